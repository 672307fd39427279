//! Explicit matrices for small systems, plus a sparse Pauli-basis form used
//! where the dense one would not fit.
//!
//! The k copies of an n-qudit system are laid out copy-major: copy 1 holds
//! the most significant digits, and within a copy qudit 1 is most significant.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::commutant::{mho_coefficients, CommClass, GraphMonomial, WeingartenMatrix};
use crate::error::{Error, Result};
use crate::gf::{check_field, column_echelon, FMatrix};
use crate::monomial::Monomial;
use crate::pauli::{anticomm_graph, decompose_tensor, recompose_rows, sigma, tensor_from_key, tensor_key, Phase, PauliString, PauliTensor};
use crate::commutant::cyclic_phase;

pub type C64 = Complex64;

static DENSE_CAP: AtomicUsize = AtomicUsize::new(0);
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// Largest dense dimension allowed: the override, else COMMUTANT_DENSE_CAP, else 4096.
pub fn dense_cap() -> usize {
    let c = DENSE_CAP.load(Ordering::Relaxed);
    if c != 0 {
        return c;
    }
    std::env::var("COMMUTANT_DENSE_CAP").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_DENSE_CAP)
}

pub fn set_dense_cap(cap: usize) {
    DENSE_CAP.store(cap, Ordering::Relaxed);
}

fn guard(q: u32, qudits: usize) -> Result<usize> {
    let cap = dense_cap();
    let mut d: usize = 1;
    for _ in 0..qudits {
        d = d.checked_mul(q as usize).filter(|&x| x <= cap).ok_or_else(|| Error::TooLarge(format!("dimension {q}^{qudits} exceeds the dense cap {cap}")))?;
    }
    Ok(d)
}

fn tau(q: u32) -> Vec<C64> {
    let ord = Phase::order(q);
    (0..ord).map(|e| Phase::new(q, e as i64).to_complex()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    pub n: usize,
    pub k: usize,
    pub q: u32,
    pub mat: DMatrix<C64>,
}

impl DenseOperator {
    pub fn zeros(n: usize, k: usize, q: u32) -> Result<Self> {
        let d = guard(q, n * k)?;
        Ok(DenseOperator { n, k, q, mat: DMatrix::zeros(d, d) })
    }

    pub fn identity(n: usize, k: usize, q: u32) -> Result<Self> {
        let d = guard(q, n * k)?;
        Ok(DenseOperator { n, k, q, mat: DMatrix::identity(d, d) })
    }

    pub fn from_matrix(n: usize, k: usize, q: u32, mat: DMatrix<C64>) -> Result<Self> {
        let d = guard(q, n * k)?;
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::ShapeMismatch(format!("matrix is {}x{}, expected {d}", mat.nrows(), mat.ncols())));
        }
        Ok(DenseOperator { n, k, q, mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn adjoint(&self) -> DenseOperator {
        DenseOperator { mat: self.mat.adjoint(), ..self.clone() }
    }

    pub fn mul(&self, o: &DenseOperator) -> Result<DenseOperator> {
        if self.dim() != o.dim() {
            return Err(Error::ShapeMismatch(format!("{} vs {}", self.dim(), o.dim())));
        }
        Ok(DenseOperator { mat: &self.mat * &o.mat, ..self.clone() })
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// tr(self^dagger o)
    pub fn inner(&self, o: &DenseOperator) -> C64 {
        self.mat.iter().zip(o.mat.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn max_abs_diff(&self, o: &DenseOperator) -> f64 {
        self.mat.iter().zip(o.mat.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// U^{(x) k} for an operator on one copy.
    pub fn tensor_power(&self, k: usize) -> Result<DenseOperator> {
        guard(self.q, self.n * self.k * k)?;
        let mut m = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        for _ in 0..k {
            m = m.kronecker(&self.mat);
        }
        Ok(DenseOperator { n: self.n, k: self.k * k, q: self.q, mat: m })
    }

    pub fn kron(&self, o: &DenseOperator) -> Result<DenseOperator> {
        if self.n != o.n || self.q != o.q {
            return Err(Error::ShapeMismatch("kron needs equal n and q".into()));
        }
        guard(self.q, self.n * (self.k + o.k))?;
        Ok(DenseOperator { n: self.n, k: self.k + o.k, q: self.q, mat: self.mat.kronecker(&o.mat) })
    }

    pub fn to_json(&self) -> Value {
        let re: Vec<f64> = (0..self.dim()).flat_map(|r| (0..self.dim()).map(move |c| (r, c))).map(|(r, c)| self.mat[(r, c)].re).collect();
        let im: Vec<f64> = (0..self.dim()).flat_map(|r| (0..self.dim()).map(move |c| (r, c))).map(|(r, c)| self.mat[(r, c)].im).collect();
        json!({"dim": self.dim(), "n": self.n, "k": self.k, "q": self.q, "re": re, "im": im})
    }

    /// Matrix JSON {"dim", "re", "im"}; (n, k, q) default to (dim as qubits, 1, 2)
    /// unless present.
    pub fn from_json(v: &Value) -> Result<DenseOperator> {
        let bad = |s: &str| Error::Parse(s.to_string());
        let dim = v.get("dim").and_then(Value::as_u64).ok_or_else(|| bad("missing dim"))? as usize;
        let q = v.get("q").and_then(Value::as_u64).unwrap_or(2) as u32;
        check_field(q)?;
        let k = v.get("k").and_then(Value::as_u64).unwrap_or(1) as usize;
        let total = {
            let mut t = 0usize;
            let mut x = 1usize;
            while x < dim {
                x = x.checked_mul(q as usize).ok_or_else(|| bad("dim overflow"))?;
                t += 1;
            }
            if x != dim {
                return Err(Error::BadShape(format!("dim {dim} is not a power of {q}")));
            }
            t
        };
        let n = v.get("n").and_then(Value::as_u64).map(|x| x as usize).unwrap_or(if k == 0 { 0 } else { total / k });
        if k == 0 || n * k != total {
            return Err(Error::ShapeMismatch(format!("n={n}, k={k} inconsistent with dim {dim}")));
        }
        guard(q, total)?;
        let read = |key: &str| -> Result<Vec<f64>> {
            let a = v.get(key).and_then(Value::as_array).ok_or_else(|| bad("missing re/im"))?;
            a.iter().map(|x| x.as_f64().ok_or_else(|| bad("non-numeric entry"))).collect()
        };
        let re = read("re")?;
        let im = read("im")?;
        if re.len() != dim * dim || im.len() != dim * dim {
            return Err(Error::ShapeMismatch(format!("expected {} entries", dim * dim)));
        }
        let mat = DMatrix::from_fn(dim, dim, |r, c| C64::new(re[r * dim + c], im[r * dim + c]));
        Ok(DenseOperator { n, k, q, mat })
    }

    pub fn parse(text: &str) -> Result<DenseOperator> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        DenseOperator::from_json(&v)
    }
}

// ------------------------------------------------------------- states

/// A pure state on n qudits; amplitudes in the computational basis with qudit 1
/// most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub q: u32,
    pub n: usize,
    pub amps: Vec<C64>,
}

impl StateVector {
    pub const NORM_TOL: f64 = 1e-12;

    pub fn new(q: u32, n: usize, amps: Vec<C64>) -> Result<StateVector> {
        check_field(q)?;
        let d = (q as usize).checked_pow(n as u32).ok_or_else(|| Error::TooLarge(format!("{q}^{n} amplitudes")))?;
        if amps.len() != d {
            return Err(Error::ShapeMismatch(format!("{} amplitudes for dimension {d}", amps.len())));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::BadShape(format!("state has squared norm {norm}")));
        }
        Ok(StateVector { q, n, amps })
    }

    /// Rescale arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(q: u32, n: usize, mut amps: Vec<C64>) -> Result<StateVector> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::BadShape("zero or non-finite amplitudes".into()));
        }
        for a in amps.iter_mut() {
            *a /= norm;
        }
        StateVector::new(q, n, amps)
    }

    /// |0...0>
    pub fn zero(q: u32, n: usize) -> Result<StateVector> {
        let d = (q as usize).pow(n as u32);
        let mut amps = vec![C64::new(0.0, 0.0); d];
        amps[0] = C64::new(1.0, 0.0);
        StateVector::new(q, n, amps)
    }

    pub fn product(one: &[C64], n: usize, q: u32) -> Result<StateVector> {
        let mut amps = vec![C64::new(1.0, 0.0)];
        for _ in 0..n {
            amps = amps.iter().flat_map(|a| one.iter().map(move |b| a * b)).collect();
        }
        StateVector::normalized(q, n, amps)
    }

    /// (|0> + e^{i pi/4}|1>)/sqrt 2 on every qubit.
    pub fn t_state(n: usize) -> Result<StateVector> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::product(&[C64::new(h, 0.0), C64::from_polar(h, std::f64::consts::FRAC_PI_4)], n, 2)
    }

    /// Haar-random state: complex Gaussian amplitudes, normalized.
    pub fn random<R: rand::Rng>(q: u32, n: usize, rng: &mut R) -> Result<StateVector> {
        use rand_distr::{Distribution, StandardNormal};
        let d = (q as usize).pow(n as u32);
        let amps = (0..d)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                C64::new(re, im)
            })
            .collect();
        StateVector::normalized(q, n, amps)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn conj(&self) -> StateVector {
        StateVector { amps: self.amps.iter().map(|a| a.conj()).collect(), ..self.clone() }
    }

    /// U|psi> for a one-copy operator on the same qudits.
    pub fn apply(&self, u: &DenseOperator) -> Result<StateVector> {
        if u.k != 1 || u.n != self.n || u.q != self.q {
            return Err(Error::ShapeMismatch("operator does not act on this state".into()));
        }
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        StateVector::normalized(self.q, self.n, (&u.mat * v).iter().copied().collect())
    }

    /// |psi><psi|^{(x) k}, copy-major.
    pub fn density_power(&self, k: usize) -> Result<DenseOperator> {
        let d = guard(self.q, self.n * k)?;
        let mut v = vec![C64::new(1.0, 0.0)];
        for _ in 0..k {
            v = v.iter().flat_map(|a| self.amps.iter().map(move |b| a * b)).collect();
        }
        let mat = DMatrix::from_fn(d, d, |r, c| v[r] * v[c].conj());
        Ok(DenseOperator { n: self.n, k, q: self.q, mat })
    }

    /// <psi| O |psi> for a one-copy operator.
    pub fn expectation(&self, o: &DenseOperator) -> C64 {
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        (v.adjoint() * (&o.mat * &v))[(0, 0)]
    }
}

/// psi^{(x) k} in the Pauli basis, coefficients tr(W^dagger psi)^k / d^k.
/// With `balanced_only` (qubits) only tensors whose copies multiply to the
/// identity are kept; the Clifford twirl annihilates the rest.
pub fn state_power_sum(s: &StateVector, k: usize, balanced_only: bool) -> Result<PauliSum> {
    let (q, n) = (s.q, s.n);
    if balanced_only && q != 2 {
        return Err(Error::BadShape("balanced filter is for qubits".into()));
    }
    let per = (q as u64).pow(2 * n as u32);
    let d = s.dim() as f64;
    let coef: Vec<C64> = (0..per)
        .map(|x| Ok(s.expectation(&dense_pauli(&PauliString { q, n, b: index_to_bits(q, n, x) })?.adjoint()) / d))
        .collect::<Result<_>>()?;
    let free = if balanced_only { k - 1 } else { k };
    let mut out = PauliSum::new(q, n, k);
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
        let mut c = C64::new(1.0, 0.0);
        let mut key: u128 = 0;
        for &r in &rows {
            c *= coef[r as usize];
            key = key * per as u128 + r as u128;
        }
        if c.norm() > 1e-300 {
            out.add(key, c);
        }
    }
    Ok(out)
}

// ------------------------------------------------------------- Pauli strings

/// Add coef * W(b) to `mat`, where W(b) is the standard Weyl string on
/// b.len()/2 qudits. O(dim).
fn accumulate_weyl(mat: &mut DMatrix<C64>, q: u32, b: &[u8], coef: C64, taus: &[C64]) {
    let nq = b.len() / 2;
    let d = mat.nrows();
    let ord = taus.len() as u64;
    let mut base = 0u64;
    for s in 0..nq {
        base += b[2 * s] as u64 * b[2 * s + 1] as u64;
    }
    let mut digits = vec![0u32; nq];
    for col in 0..d {
        let mut row = 0usize;
        let mut e = base;
        for s in 0..nq {
            let (a, c) = (b[2 * s] as u32, b[2 * s + 1] as u32);
            row = row * q as usize + ((digits[s] + a) % q) as usize;
            e += 2 * (c * digits[s]) as u64;
        }
        mat[(row, col)] += coef * taus[(e % ord) as usize];
        // increment the digit counter
        for s in (0..nq).rev() {
            digits[s] += 1;
            if digits[s] < q {
                break;
            }
            digits[s] = 0;
        }
    }
}

pub fn dense_pauli(p: &PauliString) -> Result<DenseOperator> {
    let mut o = DenseOperator::zeros(p.n, 1, p.q)?;
    accumulate_weyl(&mut o.mat, p.q, &p.b, C64::new(1.0, 0.0), &tau(p.q));
    Ok(o)
}

fn flat(rows: &FMatrix) -> Vec<u8> {
    (0..rows.rows()).flat_map(|r| rows.row(r)).collect()
}

pub fn dense_tensor(t: &PauliTensor) -> Result<DenseOperator> {
    let mut o = DenseOperator::zeros(t.n, t.k, t.q)?;
    accumulate_weyl(&mut o.mat, t.q, &flat(&t.rows), t.phase.to_complex(), &tau(t.q));
    Ok(o)
}

// ---------------------------------------------------------- Pauli sums

/// Sparse expansion in the phase-free Weyl strings of k copies of n qudits,
/// keyed by the base-q integer of the row-major digits.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    pub q: u32,
    pub n: usize,
    pub k: usize,
    pub terms: HashMap<u128, C64>,
}

impl PauliSum {
    pub fn new(q: u32, n: usize, k: usize) -> Self {
        PauliSum { q, n, k, terms: HashMap::new() }
    }

    pub fn add(&mut self, key: u128, c: C64) {
        *self.terms.entry(key).or_insert(C64::new(0.0, 0.0)) += c;
    }

    pub fn add_tensor(&mut self, t: &PauliTensor, c: C64) {
        self.add(t.key(), c * t.phase.to_complex());
    }

    pub fn get(&self, key: u128) -> C64 {
        self.terms.get(&key).copied().unwrap_or_default()
    }

    pub fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, c| c.norm() > tol);
    }

    pub fn l1(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// Hilbert-Schmidt inner product tr(self^dagger o) = D sum conj(a) b.
    pub fn inner(&self, o: &PauliSum) -> C64 {
        let d = (self.q as f64).powi((self.n * self.k) as i32);
        let (small, big, flip) = if self.terms.len() <= o.terms.len() { (self, o, false) } else { (o, self, true) };
        let mut s = C64::new(0.0, 0.0);
        for (key, a) in &small.terms {
            if let Some(b) = big.terms.get(key) {
                s += if flip { b.conj() * a } else { a.conj() * b };
            }
        }
        s * d
    }

    /// Largest |a_t - b_t|.
    pub fn max_diff(&self, o: &PauliSum) -> f64 {
        let mut m: f64 = 0.0;
        for (key, a) in &self.terms {
            m = m.max((a - o.get(*key)).norm());
        }
        for (key, b) in &o.terms {
            if !self.terms.contains_key(key) {
                m = m.max(b.norm());
            }
        }
        m
    }

    pub fn rows_of(&self, key: u128) -> FMatrix {
        tensor_from_key(key, self.q, self.k, self.n)
    }

    pub fn to_dense(&self) -> Result<DenseOperator> {
        let mut o = DenseOperator::zeros(self.n, self.k, self.q)?;
        let taus = tau(self.q);
        let mut keys: Vec<&u128> = self.terms.keys().collect();
        keys.sort();
        for key in keys {
            accumulate_weyl(&mut o.mat, self.q, &flat(&self.rows_of(*key)), self.terms[key], &taus);
        }
        Ok(o)
    }

    /// Expansion of a dense operator: c_t = tr(W_t^dagger O) / D.
    pub fn from_dense(o: &DenseOperator, tol: f64) -> PauliSum {
        let q = o.q;
        let nq = o.n * o.k;
        let d = o.dim();
        let taus = tau(q);
        let ord = taus.len();
        let mut out = PauliSum::new(q, o.n, o.k);
        let digits_of = |mut x: usize| -> Vec<u32> {
            let mut v = vec![0u32; nq];
            for s in (0..nq).rev() {
                v[s] = (x % q as usize) as u32;
                x /= q as usize;
            }
            v
        };
        let jd: Vec<Vec<u32>> = (0..d).map(digits_of).collect();
        let omega: Vec<C64> = (0..q).map(|x| taus[(2 * x as usize) % ord]).collect();
        let mut f = vec![C64::new(0.0, 0.0); d];
        let mut tmp = vec![C64::new(0.0, 0.0); q as usize];
        for a in 0..d {
            let ad = &jd[a];
            for j in 0..d {
                let mut row = 0usize;
                for s in 0..nq {
                    row = row * q as usize + ((jd[j][s] + ad[s]) % q) as usize;
                }
                f[j] = o.mat[(row, j)];
            }
            // F[c] = sum_j omega^{-c.j} f[j], one digit at a time
            let mut stride = 1usize;
            for _ in 0..nq {
                for blk in (0..d).step_by(stride * q as usize) {
                    for off in 0..stride {
                        for (cc, t) in tmp.iter_mut().enumerate() {
                            let mut s = C64::new(0.0, 0.0);
                            for jj in 0..q as usize {
                                s += omega[(q as usize - (cc * jj) % q as usize) % q as usize] * f[blk + off + jj * stride];
                            }
                            *t = s;
                        }
                        for (cc, t) in tmp.iter().enumerate() {
                            f[blk + off + cc * stride] = *t;
                        }
                    }
                }
                stride *= q as usize;
            }
            for (c, val) in f.iter().enumerate() {
                if val.norm() / (d as f64) <= tol {
                    continue;
                }
                let cd = &jd[c];
                let mut e = 0usize;
                let mut b = Vec::with_capacity(2 * nq);
                for s in 0..nq {
                    e += (ad[s] * cd[s]) as usize;
                    b.push(ad[s] as u8);
                    b.push(cd[s] as u8);
                }
                let ph = taus[(ord - e % ord) % ord];
                let rows = FMatrix::from_fn(q, o.k, 2 * o.n, |r, cidx| b[r * 2 * o.n + cidx] as i64);
                out.add(tensor_key(&rows), ph * val / d as f64);
            }
        }
        out
    }
}

// ------------------------------------------------------------- monomials

fn dense_single(q: u32, a: u8, c: u8) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(q as usize, q as usize);
    accumulate_weyl(&mut m, q, &[a, c], C64::new(1.0, 0.0), &tau(q));
    m
}

fn kron_all(ms: &[DMatrix<C64>]) -> DMatrix<C64> {
    let mut out = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for m in ms {
        out = out.kronecker(m);
    }
    out
}

/// omega(V, M) on k qudits (n = 1) from explicit q x q matrices.
pub fn dense_monomial_n1(m: &Monomial) -> Result<DMatrix<C64>> {
    let q = m.q();
    let k = m.k();
    guard(q, k)?;
    let mm = m.m();
    let taus = tau(q);
    let ord = taus.len();
    let singles: Vec<DMatrix<C64>> = (0..q * q).map(|x| dense_single(q, (x / q) as u8, (x % q) as u8)).collect();
    let d = (q as usize).pow(k as u32);
    let mut out = DMatrix::zeros(d, d);
    let total = ((q * q) as u64).pow(mm as u32);
    for code in 0..total {
        let mut x = code;
        let mut bs = Vec::with_capacity(mm);
        for _ in 0..mm {
            bs.push((x % (q * q) as u64) as u32);
            x /= (q * q) as u64;
        }
        let bvec: Vec<[u8; 2]> = bs.iter().map(|&b| [(b / q) as u8, (b % q) as u8]).collect();
        let mut e = 0usize;
        for i in 0..mm {
            for j in i + 1..mm {
                e += m.phases().get(i, j) as usize * sigma(&bvec[i], &bvec[j], q) as usize;
            }
        }
        let w = taus[(2 * e) % ord];
        let copies: Vec<DMatrix<C64>> = (0..k)
            .map(|r| {
                let mut acc = DMatrix::identity(q as usize, q as usize);
                for j in 0..mm {
                    for _ in 0..m.v().get(r, j) {
                        acc *= &singles[bs[j] as usize];
                    }
                }
                acc
            })
            .collect();
        out += kron_all(&copies) * w;
    }
    Ok(out / C64::new((q as f64).powi(mm as i32), 0.0))
}

/// Reorder a qudit-major operator (qudit s holds copies 1..k) into copy-major layout.
pub fn qudit_to_copy_major(mat: &DMatrix<C64>, q: u32, n: usize, k: usize) -> DMatrix<C64> {
    let d = mat.nrows();
    let nq = n * k;
    // position of (site s, copy r) in qudit-major digits is s*k + r; copy-major r*n + s
    let perm: Vec<usize> = (0..d)
        .map(|x| {
            let mut dig = vec![0usize; nq];
            let mut t = x;
            for p in (0..nq).rev() {
                dig[p] = t % q as usize;
                t /= q as usize;
            }
            let mut y = 0usize;
            for r in 0..k {
                for s in 0..n {
                    y = y * q as usize + dig[s * k + r];
                }
            }
            y
        })
        .collect();
    let mut out = DMatrix::zeros(d, d);
    for c in 0..d {
        for r in 0..d {
            out[(perm[r], perm[c])] = mat[(r, c)];
        }
    }
    out
}

/// Omega(V, M) on k copies of n qudits, as the n-fold tensor power of the
/// single-qudit operator.
pub fn dense_monomial(m: &Monomial, n: usize) -> Result<DenseOperator> {
    guard(m.q(), n * m.k())?;
    let one = dense_monomial_n1(m)?;
    let mut full = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for _ in 0..n {
        full = full.kronecker(&one);
    }
    let mat = qudit_to_copy_major(&full, m.q(), n, m.k());
    DenseOperator::from_matrix(n, m.k(), m.q(), mat)
}

/// Omega(V, M) summed directly over n-qudit Pauli tuples (slow cross-check).
pub fn dense_monomial_direct(m: &Monomial, n: usize) -> Result<DenseOperator> {
    let q = m.q();
    let mut o = DenseOperator::zeros(n, m.k(), q)?;
    let taus = tau(q);
    let per = (q as u64).pow(2 * n as u32);
    let mm = m.m();
    let total = per.pow(mm as u32);
    for code in 0..total {
        let mut x = code;
        let ps: Vec<PauliString> = (0..mm)
            .map(|_| {
                let b = index_to_bits(q, n, x % per);
                x /= per;
                PauliString { q, n, b }
            })
            .collect();
        let mut e = 0i64;
        for i in 0..mm {
            for j in i + 1..mm {
                e += m.phases().get(i, j) as i64 * sigma(&ps[i].b, &ps[j].b, q) as i64;
            }
        }
        let (rows, ph) = recompose_rows(m.v(), &ps, n);
        let c = Phase::omega(q, e).mul(ph).to_complex();
        accumulate_weyl(&mut o.mat, q, &flat(&rows), c, &taus);
    }
    o.mat /= C64::new((q as f64).powi((n * mm) as i32), 0.0);
    Ok(o)
}

pub fn index_to_bits(q: u32, n: usize, mut x: u64) -> Vec<u8> {
    let mut b = vec![0u8; 2 * n];
    for d in b.iter_mut().rev() {
        *d = (x % q as u64) as u8;
        x /= q as u64;
    }
    b
}

/// Pauli coefficients of omega(V, M) at n = 1 (keys over k single-qudit rows).
pub fn monomial_coefficients_n1(m: &Monomial) -> HashMap<u128, C64> {
    let q = m.q();
    let mm = m.m();
    let per = (q * q) as u64;
    let norm = (q as f64).powi(-(mm as i32));
    let mut out: HashMap<u128, C64> = HashMap::new();
    for code in 0..per.pow(mm as u32) {
        let mut x = code;
        let ps: Vec<PauliString> = (0..mm)
            .map(|_| {
                let b = index_to_bits(q, 1, x % per);
                x /= per;
                PauliString { q, n: 1, b }
            })
            .collect();
        let mut e = 0i64;
        for i in 0..mm {
            for j in i + 1..mm {
                e += m.phases().get(i, j) as i64 * sigma(&ps[i].b, &ps[j].b, q) as i64;
            }
        }
        let (rows, ph) = recompose_rows(m.v(), &ps, 1);
        *out.entry(tensor_key(&rows)).or_default() += Phase::omega(q, e).mul(ph).to_complex() * norm;
    }
    out.retain(|_, c| c.norm() > 1e-12);
    out
}

/// Join per-qudit keys (each k rows of one qudit) into the key of the n-qudit tensor.
pub fn join_site_keys(q: u32, k: usize, sites: &[u128]) -> u128 {
    let n = sites.len();
    let rows_s: Vec<FMatrix> = sites.iter().map(|&s| tensor_from_key(s, q, k, 1)).collect();
    let rows = FMatrix::from_fn(q, k, 2 * n, |r, c| rows_s[c / 2].get(r, c % 2) as i64);
    tensor_key(&rows)
}

/// Omega(V, M) at n qudits in the Pauli basis: products of single-qudit coefficients.
pub fn monomial_pauli_sum(m: &Monomial, n: usize) -> PauliSum {
    let c1: Vec<(u128, C64)> = {
        let mut v: Vec<_> = monomial_coefficients_n1(m).into_iter().collect();
        v.sort_by_key(|x| x.0);
        v
    };
    let mut out = PauliSum::new(m.q(), n, m.k());
    let mut idx = vec![0usize; n];
    if c1.is_empty() {
        return out;
    }
    loop {
        let keys: Vec<u128> = idx.iter().map(|&i| c1[i].0).collect();
        let c: C64 = idx.iter().map(|&i| c1[i].1).product();
        out.add(join_site_keys(m.q(), m.k(), &keys), c);
        let mut p = n;
        loop {
            if p == 0 {
                return out;
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < c1.len() {
                break;
            }
            idx[p] = 0;
        }
    }
}

/// mho(V, G) summed directly over all n-qudit tuples with graph G.
pub fn dense_graph_monomial(gm: &GraphMonomial, n: usize) -> Result<DenseOperator> {
    let q = gm.v.q();
    let k = gm.v.rows();
    let mut o = DenseOperator::zeros(n, k, q)?;
    let taus = tau(q);
    let per = (q as u64).pow(2 * n as u32);
    let mm = gm.v.cols();
    for code in 0..per.pow(mm as u32) {
        let mut x = code;
        let ps: Vec<PauliString> = (0..mm)
            .map(|_| {
                let b = index_to_bits(q, n, x % per);
                x /= per;
                PauliString { q, n, b }
            })
            .collect();
        let g = if mm == 0 { FMatrix::zeros(q, 0, 0) } else { anticomm_graph(&ps)? };
        if g != gm.g {
            continue;
        }
        let (rows, ph) = recompose_rows(&gm.v, &ps, n);
        accumulate_weyl(&mut o.mat, q, &flat(&rows), ph.to_complex(), &taus);
    }
    o.mat /= C64::new((q as f64).powi((n * mm) as i32), 0.0);
    Ok(o)
}

/// mho_I([V, G]) in the Pauli basis.
pub fn mho_pauli_sum(cls: &CommClass, n: usize) -> Result<PauliSum> {
    let desc = mho_coefficients(cls, n)?;
    let norm = crate::commutant::biguint_f64(&desc.norm);
    let mut out = PauliSum::new(cls.q, n, cls.k);
    for (t, phi) in desc.terms {
        out.add_tensor(&t, phi.to_complex() / norm);
    }
    Ok(out)
}

pub fn dense_mho(cls: &CommClass, n: usize) -> Result<DenseOperator> {
    guard(cls.q, n * cls.k)?;
    mho_pauli_sum(cls, n)?.to_dense()
}

// ------------------------------------------------------------ permutations

/// T_pi |i_1 ... i_k> = |i_{pi^{-1}(1)} ... i_{pi^{-1}(k)}>: the content of copy j moves to copy pi(j).
pub fn permutation_operator(pi: &[usize], n: usize, q: u32) -> Result<DenseOperator> {
    let k = pi.len();
    let mut o = DenseOperator::zeros(n, k, q)?;
    let d1 = (q as usize).pow(n as u32);
    let d = o.dim();
    for col in 0..d {
        let mut parts = vec![0usize; k];
        let mut t = col;
        for j in (0..k).rev() {
            parts[j] = t % d1;
            t /= d1;
        }
        let mut out = vec![0usize; k];
        for j in 0..k {
            out[pi[j]] = parts[j];
        }
        let row = out.iter().fold(0usize, |a, &x| a * d1 + x);
        o.mat[(row, col)] = C64::new(1.0, 0.0);
    }
    Ok(o)
}

pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    fn heap(n: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..n {
            heap(n - 1, a, out);
            if n.is_multiple_of(2) {
                a.swap(i, n - 1);
            } else {
                a.swap(0, n - 1);
            }
        }
    }
    heap(k, &mut cur, &mut out);
    out.sort();
    out
}

pub fn cycle_count(pi: &[usize]) -> usize {
    let mut seen = vec![false; pi.len()];
    let mut c = 0;
    for s in 0..pi.len() {
        if seen[s] {
            continue;
        }
        c += 1;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = pi[x];
        }
    }
    c
}

fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    // (a after b)
    b.iter().map(|&x| a[x]).collect()
}

fn inverse(a: &[usize]) -> Vec<usize> {
    let mut v = vec![0; a.len()];
    for (i, &x) in a.iter().enumerate() {
        v[x] = i;
    }
    v
}

// ------------------------------------------------------------ Cliffords

/// Generators on n qudits: Fourier/Hadamard and phase gates on each qudit and
/// an entangling gate on neighbouring pairs.
pub fn clifford_generators(n: usize, q: u32) -> Result<Vec<DenseOperator>> {
    check_field(q)?;
    let taus = tau(q);
    let ord = taus.len();
    let omega = |x: usize| taus[(2 * x) % ord];
    let dq = q as usize;
    let f = DMatrix::from_fn(dq, dq, |r, c| omega(r * c) / (q as f64).sqrt());
    // qubits: S = diag(1, i); odd q: diag(omega^{j(j+1)/2 mod q})
    let s = DMatrix::from_fn(dq, dq, |r, c| {
        if r != c {
            C64::new(0.0, 0.0)
        } else if q == 2 {
            taus[r]
        } else {
            omega((r * (r + 1) / 2) % dq)
        }
    });
    let sum = DMatrix::from_fn(dq * dq, dq * dq, |r, c| {
        let (i, j) = (c / dq, c % dq);
        if r == i * dq + (i + j) % dq {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let d1 = guard(q, n)?;
    let embed = |g: &DMatrix<C64>, at: usize, width: usize| -> DMatrix<C64> {
        let left = DMatrix::<C64>::identity(dq.pow(at as u32), dq.pow(at as u32));
        let right = DMatrix::<C64>::identity(dq.pow((n - at - width) as u32), dq.pow((n - at - width) as u32));
        left.kronecker(g).kronecker(&right)
    };
    let mut out = Vec::new();
    for i in 0..n {
        out.push(DenseOperator { n, k: 1, q, mat: embed(&f, i, 1) });
        out.push(DenseOperator { n, k: 1, q, mat: embed(&s, i, 1) });
    }
    for i in 0..n.saturating_sub(1) {
        out.push(DenseOperator { n, k: 1, q, mat: embed(&sum, i, 2) });
    }
    debug_assert!(out.iter().all(|g| g.dim() == d1));
    Ok(out)
}

/// For a one-copy Clifford U: images U W(b) U^dagger = lambda W(b') for all
/// n-qudit Weyl strings b, indexed by the base-q integer of b.
pub fn conjugation_table(u: &DenseOperator) -> Result<Vec<(u64, C64)>> {
    let q = u.q;
    let n = u.n;
    let per = (q as u64).pow(2 * n as u32);
    let mut out = Vec::with_capacity(per as usize);
    for x in 0..per {
        let p = dense_pauli(&PauliString { q, n, b: index_to_bits(q, n, x) })?;
        let img = DenseOperator { mat: &u.mat * &p.mat * u.mat.adjoint(), ..p.clone() };
        let ps = PauliSum::from_dense(&img, 1e-9);
        if ps.terms.len() != 1 {
            return Err(Error::Infeasible("generator is not a Clifford".into()));
        }
        let (key, c) = ps.terms.iter().next().unwrap();
        out.push((*key as u64, *c));
    }
    Ok(out)
}

/// max_g || g^{(x)k} O g^{dagger (x)k} - O ||_max over the generators.
pub fn commutator_residual(o: &DenseOperator) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for g in clifford_generators(o.n, o.q)? {
        let gk = g.tensor_power(o.k)?;
        let img = &gk.mat * &o.mat * gk.mat.adjoint();
        let r = img.iter().zip(o.mat.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        worst = worst.max(r);
    }
    Ok(worst)
}

pub fn commutes_with_clifford(o: &DenseOperator, tol: f64) -> Result<bool> {
    Ok(commutator_residual(o)? <= tol)
}

/// Residual of g^{(x)k} O g^{dagger (x)k} = O measured in the Pauli basis,
/// using one-copy conjugation tables. Returns the L1 norm of the difference,
/// which bounds the largest matrix entry of the difference.
pub fn pauli_commutator_residual(o: &PauliSum, tables: &[Vec<(u64, C64)>]) -> f64 {
    let q = o.q;
    let (n, k) = (o.n, o.k);
    let per = (q as u128).pow(2 * n as u32);
    let mut worst: f64 = 0.0;
    for tab in tables {
        let mut img = PauliSum::new(q, n, k);
        for (&key, &c) in &o.terms {
            let mut x = key;
            let mut parts = vec![0u128; k];
            for r in (0..k).rev() {
                parts[r] = x % per;
                x /= per;
            }
            let mut lam = c;
            let mut nk: u128 = 0;
            for &p in &parts {
                let (np, l) = tab[p as usize];
                lam *= l;
                nk = nk * per + np as u128;
            }
            img.add(nk, lam);
        }
        let mut diff = 0.0;
        for (key, a) in &img.terms {
            diff += (a - o.get(*key)).norm();
        }
        for (key, b) in &o.terms {
            if !img.terms.contains_key(key) {
                diff += b.norm();
            }
        }
        worst = worst.max(diff);
    }
    worst
}

// ------------------------------------------------------------ twirling

fn class_of_rows(rows: &FMatrix, n: usize) -> Option<CommClass> {
    let t = PauliTensor::new(rows.clone(), Phase::one(rows.q())).ok()?;
    let dec = decompose_tensor(&t);
    let q = rows.q();
    for j in 0..dec.v.cols() {
        let s: u32 = (0..dec.v.rows()).map(|r| dec.v.get(r, j) as u32).sum();
        if !s.is_multiple_of(q) {
            return None;
        }
    }
    let g = if dec.paulis.is_empty() { FMatrix::zeros(q, 0, 0) } else { anticomm_graph(&dec.paulis).ok()? };
    let _ = n;
    let (_, tr) = column_echelon(&dec.v);
    Some(CommClass::gauge(dec.v, g, &tr))
}

/// Exact Clifford twirl in the Pauli basis: each W_t goes to
/// conj(phi(t)) mho_I([V, G]) of its class, and unbalanced tensors go to 0.
pub fn exact_twirl_sum(o: &PauliSum) -> Result<PauliSum> {
    let mut weights: HashMap<CommClass, C64> = HashMap::new();
    let mut order: Vec<CommClass> = Vec::new();
    let mut keys: Vec<&u128> = o.terms.keys().collect();
    keys.sort();
    for key in keys {
        let c = o.terms[key];
        let rows = o.rows_of(*key);
        let Some(cls) = class_of_rows(&rows, o.n) else { continue };
        let phi = cyclic_phase(&rows).to_complex();
        let w = weights.entry(cls.clone()).or_insert_with(|| {
            order.push(cls);
            C64::new(0.0, 0.0)
        });
        *w += c * phi.conj();
    }
    let mut out = PauliSum::new(o.q, o.n, o.k);
    for cls in order {
        let a = weights[&cls];
        if a.norm() < 1e-15 {
            continue;
        }
        let mho = mho_pauli_sum(&cls, o.n)?;
        for (key, c) in mho.terms {
            out.add(key, a * c);
        }
    }
    Ok(out)
}

pub fn exact_twirl(o: &DenseOperator) -> Result<DenseOperator> {
    exact_twirl_sum(&PauliSum::from_dense(o, 1e-14))?.to_dense()
}

/// Twirl through the Weingarten matrix: sum_{a,b} W+_{ab} tr(a^dagger O) b.
pub fn weingarten_twirl_sum(o: &PauliSum, basis: &[Monomial], w: &WeingartenMatrix) -> Result<PauliSum> {
    if w.entries.nrows() != basis.len() {
        return Err(Error::ShapeMismatch(format!("{} basis elements, Weingarten matrix of size {}", basis.len(), w.entries.nrows())));
    }
    let sums: Vec<PauliSum> = basis.iter().map(|b| monomial_pauli_sum(b, o.n)).collect();
    let bvec: Vec<C64> = sums.iter().map(|s| s.inner(o)).collect();
    let mut out = PauliSum::new(o.q, o.n, o.k);
    for (j, s) in sums.iter().enumerate() {
        let mut x = C64::new(0.0, 0.0);
        for (i, b) in bvec.iter().enumerate() {
            x += w.entries[(j, i)] * b;
        }
        if x.norm() == 0.0 {
            continue;
        }
        for (key, c) in &s.terms {
            out.add(*key, x * c);
        }
    }
    Ok(out)
}

pub fn weingarten_twirl(o: &DenseOperator, basis: &[Monomial], w: &WeingartenMatrix) -> Result<DenseOperator> {
    weingarten_twirl_sum(&PauliSum::from_dense(o, 1e-14), basis, w)?.to_dense()
}

// ------------------------------------------------------------ Haar baseline

pub const HAAR_K_CAP: usize = 4;

#[derive(Clone, Debug)]
pub struct HaarGram {
    pub perms: Vec<Vec<usize>>,
    pub entries: DMatrix<f64>,
}

/// Lambda_{pi,sigma} = tr(T_pi^dagger T_sigma) = d^{#cycles(pi^{-1} sigma)}.
pub fn haar_gram(k: usize, d: f64) -> Result<HaarGram> {
    if k > HAAR_K_CAP {
        return Err(Error::TooLarge(format!("Haar twirl supports k <= {HAAR_K_CAP}")));
    }
    let perms = permutations(k);
    let p = perms.len();
    let entries = DMatrix::from_fn(p, p, |i, j| d.powi(cycle_count(&compose(&inverse(&perms[i]), &perms[j])) as i32));
    Ok(HaarGram { perms, entries })
}

impl HaarGram {
    pub fn weingarten(&self) -> DMatrix<f64> {
        self.entries.clone().pseudo_inverse(1e-12 * self.entries.norm()).expect("svd converges")
    }
}

pub fn haar_twirl(o: &DenseOperator) -> Result<DenseOperator> {
    let d = (o.q as f64).powi(o.n as i32);
    let g = haar_gram(o.k, d)?;
    let wg = g.weingarten();
    let ts: Vec<DenseOperator> = g.perms.iter().map(|p| permutation_operator(p, o.n, o.q)).collect::<Result<_>>()?;
    let b: Vec<C64> = ts.iter().map(|t| t.inner(o)).collect();
    let mut out = DenseOperator::zeros(o.n, o.k, o.q)?;
    for (j, t) in ts.iter().enumerate() {
        let mut x = C64::new(0.0, 0.0);
        for (i, bi) in b.iter().enumerate() {
            x += wg[(j, i)] * bi;
        }
        out.mat += &t.mat * x;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_is_diagonal() {
        let z = dense_pauli(&PauliString::single(2, 1, 0, 0, 1)).unwrap();
        assert!((z.mat[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((z.mat[(1, 1)] + C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn decomposition_roundtrip() {
        let t = PauliTensor::parse("XY|ZI", 2).unwrap();
        let d = dense_tensor(&t).unwrap();
        let s = PauliSum::from_dense(&d, 1e-12);
        assert_eq!(s.terms.len(), 1);
        assert!(s.to_dense().unwrap().max_abs_diff(&d) < 1e-12);
    }

    #[test]
    fn swap_monomial() {
        let t = Monomial::swap(2, 2, 0, 1);
        let d = dense_monomial(&t, 1).unwrap();
        let p = permutation_operator(&[1, 0], 1, 2).unwrap();
        assert!(d.max_abs_diff(&p) < 1e-12);
    }
}
