//! Independent oracles shared by the integration tests. Nothing here calls
//! into the phase bookkeeping of the library; matrices are built from scratch.
#![allow(dead_code)]

use std::collections::HashMap;

use cliffcomm::dense::{clifford_generators, DenseOperator};
use cliffcomm::gf::FMatrix;
use cliffcomm::monomial::Monomial;
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::Rng;

pub fn tau(q: u32) -> C {
    if q == 2 {
        C::new(0.0, 1.0)
    } else {
        -C::from_polar(1.0, std::f64::consts::PI / q as f64)
    }
}

pub fn omega(q: u32) -> C {
    C::from_polar(1.0, 2.0 * std::f64::consts::PI / q as f64)
}

/// tau^{ac} X^a Z^c as an explicit q x q matrix.
pub fn weyl(q: u32, a: u32, c: u32) -> DMatrix<C> {
    let d = q as usize;
    let mut m = DMatrix::zeros(d, d);
    for col in 0..d {
        let row = (col + a as usize) % d;
        m[(row, col)] = tau(q).powu(a * c) * omega(q).powu(c * col as u32);
    }
    m
}

pub fn kron(ms: &[DMatrix<C>]) -> DMatrix<C> {
    let mut out = DMatrix::from_element(1, 1, C::new(1.0, 0.0));
    for m in ms {
        out = out.kronecker(m);
    }
    out
}

/// Symplectic form sum (c a' - a c') mod q on interleaved bits.
pub fn symp(x: &[u8], y: &[u8], q: u32) -> u32 {
    let mut s = 0i64;
    for i in (0..x.len()).step_by(2) {
        s += x[i + 1] as i64 * y[i] as i64 - x[i] as i64 * y[i + 1] as i64;
    }
    s.rem_euclid(q as i64) as u32
}

/// n-qudit Weyl string from explicit matrices (qudit 1 leftmost).
pub fn weyl_string(q: u32, b: &[u8]) -> DMatrix<C> {
    let ms: Vec<DMatrix<C>> = (0..b.len() / 2).map(|s| weyl(q, b[2 * s] as u32, b[2 * s + 1] as u32)).collect();
    kron(&ms)
}

pub fn bits(q: u32, n: usize, mut x: u64) -> Vec<u8> {
    let mut b = vec![0u8; 2 * n];
    for d in b.iter_mut().rev() {
        *d = (x % q as u64) as u8;
        x /= q as u64;
    }
    b
}

/// Omega(V, M) on k copies of n qudits by the defining sum over Pauli tuples.
pub fn monomial_oracle(mon: &Monomial, n: usize) -> DMatrix<C> {
    let q = mon.q();
    let (k, m) = (mon.k(), mon.m());
    let per = (q as u64).pow(2 * n as u32);
    let dn = (q as usize).pow(n as u32);
    let singles: Vec<DMatrix<C>> = (0..per).map(|x| weyl_string(q, &bits(q, n, x))).collect();
    let dim = dn.pow(k as u32);
    let mut out = DMatrix::zeros(dim, dim);
    for code in 0..per.pow(m as u32) {
        let mut x = code;
        let idx: Vec<u64> = (0..m).map(|_| { let r = x % per; x /= per; r }).collect();
        let bs: Vec<Vec<u8>> = idx.iter().map(|&i| bits(q, n, i)).collect();
        let mut e = 0u32;
        for i in 0..m {
            for j in i + 1..m {
                e += mon.phases().get(i, j) as u32 * symp(&bs[i], &bs[j], q);
            }
        }
        let copies: Vec<DMatrix<C>> = (0..k)
            .map(|r| {
                let mut acc = DMatrix::identity(dn, dn);
                for j in 0..m {
                    for _ in 0..mon.v().get(r, j) {
                        acc *= &singles[idx[j] as usize];
                    }
                }
                acc
            })
            .collect();
        out += kron(&copies) * omega(q).powu(e % q);
    }
    out / C::new((q as f64).powi((n * m) as i32), 0.0)
}

pub fn max_diff(a: &DMatrix<C>, b: &DMatrix<C>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn random_balanced_column<R: Rng>(rng: &mut R, k: usize, q: u32) -> Vec<u8> {
    loop {
        let mut c: Vec<u8> = (0..k - 1).map(|_| rng.random_range(0..q) as u8).collect();
        let s: u32 = c.iter().map(|&x| x as u32).sum();
        c.push(((q - s % q) % q) as u8);
        if c.iter().any(|&x| x != 0) {
            return c;
        }
    }
}

/// Random monomial with m balanced columns and random phases (not necessarily reduced).
pub fn random_monomial<R: Rng>(rng: &mut R, k: usize, m: usize, q: u32) -> Monomial {
    let cols: Vec<Vec<u8>> = (0..m).map(|_| random_balanced_column(rng, k, q)).collect();
    let v = FMatrix::from_columns(q, k, &cols);
    let mut ph = FMatrix::zeros(q, m, m);
    for i in 0..m {
        for j in i + 1..m {
            let x = rng.random_range(0..q) as u8;
            ph.set(i, j, x);
            ph.set(j, i, ((q - x as u32) % q) as u8);
        }
    }
    Monomial::new(v, ph).unwrap()
}

/// Exact Clifford twirl of a Pauli tensor by breadth-first search over its
/// orbit of signed tensors under the generators. Tensors are n-qudit strings per
/// copy, stored as a single key (base q^{2n} digits, copy 1 most significant).
pub struct OrbitOracle {
    pub q: u32,
    pub n: usize,
    pub k: usize,
    tables: Vec<Vec<(u64, u32)>>, // image index and phase exponent of omega-root of unity
    roots: u32,
}

impl OrbitOracle {
    pub fn new(q: u32, n: usize, k: usize) -> Self {
        let gens = clifford_generators(n, q).unwrap();
        let per = (q as u64).pow(2 * n as u32);
        // phases that appear are powers of a primitive 2q-th (qubits: 4th) root
        let roots = if q == 2 { 4 } else { 2 * q };
        let base = C::from_polar(1.0, 2.0 * std::f64::consts::PI / roots as f64);
        let strings: Vec<DMatrix<C>> = (0..per).map(|x| weyl_string(q, &bits(q, n, x))).collect();
        let mut tables = Vec::new();
        for g in &gens {
            let mut t = Vec::new();
            for x in 0..per {
                let img = &g.mat * &strings[x as usize] * g.mat.adjoint();
                let mut found = None;
                for (y, s) in strings.iter().enumerate() {
                    let ov = (s.adjoint() * &img).trace() / s.nrows() as f64;
                    if ov.norm() > 0.5 {
                        let e = ((ov.arg() / (2.0 * std::f64::consts::PI) * roots as f64).round() as i64).rem_euclid(roots as i64) as u32;
                        assert!((base.powu(e) - ov).norm() < 1e-9);
                        found = Some((y as u64, e));
                        break;
                    }
                }
                t.push(found.expect("Clifford image"));
            }
            tables.push(t);
        }
        OrbitOracle { q, n, k, tables, roots }
    }

    fn split(&self, key: u128) -> Vec<u64> {
        let per = (self.q as u128).pow(2 * self.n as u32);
        let mut x = key;
        let mut parts = vec![0u64; self.k];
        for r in (0..self.k).rev() {
            parts[r] = (x % per) as u64;
            x /= per;
        }
        parts
    }

    /// Twirl of the phase-free tensor `key`, as a map key -> coefficient.
    pub fn twirl(&self, key: u128) -> HashMap<u128, C> {
        let per = (self.q as u128).pow(2 * self.n as u32);
        let base = C::from_polar(1.0, 2.0 * std::f64::consts::PI / self.roots as f64);
        let mut seen: HashMap<(u128, u32), ()> = HashMap::new();
        let mut stack = vec![(key, 0u32)];
        seen.insert((key, 0), ());
        while let Some((kk, e)) = stack.pop() {
            let parts = self.split(kk);
            for t in &self.tables {
                let mut nk: u128 = 0;
                let mut ne = e;
                for &p in &parts {
                    let (img, pe) = t[p as usize];
                    nk = nk * per + img as u128;
                    ne = (ne + pe) % self.roots;
                }
                if seen.insert((nk, ne), ()).is_none() {
                    stack.push((nk, ne));
                }
            }
        }
        let norm = seen.len() as f64;
        let mut out: HashMap<u128, C> = HashMap::new();
        for (kk, e) in seen.keys() {
            *out.entry(*kk).or_default() += base.powu(*e) / norm;
        }
        out.retain(|_, c| c.norm() > 1e-12);
        out
    }
}

pub fn dense_of(o: &DenseOperator) -> &DMatrix<C> {
    &o.mat
}

/// Single-copy Pauli coefficients of |psi><psi|, tr(W^dagger psi)/d, from explicit matrices.
pub fn state_coefficients(q: u32, n: usize, amps: &[C]) -> Vec<C> {
    let per = (q as u64).pow(2 * n as u32);
    let v = nalgebra::DVector::from_column_slice(amps);
    let d = amps.len() as f64;
    (0..per)
        .map(|x| {
            let w = weyl_string(q, &bits(q, n, x));
            (v.adjoint() * w.adjoint() * &v)[(0, 0)] / d
        })
        .collect()
}

/// psi^{(x) k} in the Pauli basis. With `balanced_only` (qubits) only tensors whose
/// rows sum to zero are kept; the others are annihilated by the Clifford twirl.
pub fn state_power_sum(q: u32, n: usize, amps: &[C], k: usize, balanced_only: bool) -> cliffcomm::dense::PauliSum {
    let coef = state_coefficients(q, n, amps);
    let per = coef.len() as u64;
    let free = if balanced_only { k - 1 } else { k };
    let mut out = cliffcomm::dense::PauliSum::new(q, n, k);
    for code in 0..per.pow(free as u32) {
        let mut x = code;
        let mut rows = vec![0u64; k];
        for r in (0..free).rev() {
            rows[r] = x % per;
            x /= per;
        }
        if balanced_only {
            rows[k - 1] = rows[..k - 1].iter().fold(0, |a, b| a ^ b);
        }
        let mut c = C::new(1.0, 0.0);
        let mut key: u128 = 0;
        for &r in &rows {
            c *= coef[r as usize];
            key = key * per as u128 + r as u128;
        }
        if c.norm() > 1e-300 {
            out.add(key, c);
        }
    }
    out
}

/// Frobenius distance between the exact twirl T of psi^{(x)k} and the orbit
/// decomposition X = sum_i p_i Pi O_i Pi / tr(Pi O_i).
///
/// Both lie in the span of the Pi O_i Pi, so T - X is fixed by its overlaps
/// r_j = <Pi O_j Pi, T - X> and ||T - X||^2 = r^T G^+ r with G the Gram matrix
/// of the Pi O_i Pi. <Pi O_j Pi, T> = <O_j, T> because T is permutation
/// symmetric; G comes from orbit averages of one-qubit Pauli coefficients.
pub fn orbit_residual(so: &cliffcomm::magic::StateOrbit, s: &cliffcomm::dense::StateVector) -> f64 {
    use cliffcomm::dense::{exact_twirl_sum, monomial_coefficients_n1, monomial_pauli_sum};
    let n = s.n;
    let k = so.k;
    let c = so.representatives.len();
    let psi = state_power_sum(2, n, &s.amps, k, true);
    let t = exact_twirl_sum(&psi).unwrap();
    let w: Vec<f64> = so.p.iter().zip(&so.sym_traces).map(|(p, tr)| p / tr).collect();
    let c1: Vec<_> = so.representatives.iter().map(monomial_coefficients_n1).collect();
    let mut g = DMatrix::<f64>::zeros(c, c);
    for (i, rep) in so.representatives.iter().enumerate() {
        let members = cliffcomm::fastmono::orbit_members(rep).unwrap();
        let cx: Vec<_> = members.iter().map(|x| monomial_coefficients_n1(&x.to_monomial())).collect();
        for (j, cj) in c1.iter().enumerate() {
            let mut acc = 0.0;
            for m in &cx {
                let one: C = m.iter().map(|(key, a)| a.conj() * cj.get(key).copied().unwrap_or_default()).sum::<C>() * (1u64 << k) as f64;
                acc += one.powu(n as u32).re;
            }
            g[(i, j)] = acc / members.len() as f64;
        }
    }
    let r = nalgebra::DVector::from_fn(c, |j, _| {
        let tj = monomial_pauli_sum(&so.representatives[j], n).inner(&t).re;
        let xj: f64 = (0..c).map(|i| w[i] * g[(i, j)]).sum();
        tj - xj
    });
    let gs = (&g + g.transpose()) * 0.5;
    let ginv = gs.clone().pseudo_inverse(1e-12 * gs.norm()).unwrap();
    (r.transpose() * ginv * &r)[(0, 0)].abs().sqrt()
}
