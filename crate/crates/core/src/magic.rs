//! Magic measures of pure qubit states built from Pauli monomials.
//!
//! Everything here works from the table of Pauli expectations tr(P psi), 4^n
//! real numbers, so no k-copy matrix is ever formed. Only q = 2 is handled.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::commutant::class_table;
use crate::dense::{exact_twirl_sum, monomial_coefficients_n1, monomial_pauli_sum, state_power_sum, StateVector};
use crate::error::{Error, Result};
use crate::fastmono::{orbit_contains, orbit_members};
use crate::monomial::Monomial;

type C64 = Complex64;

const I_POW: [C64; 4] = [
    C64 { re: 1.0, im: 0.0 },
    C64 { re: 0.0, im: 1.0 },
    C64 { re: -1.0, im: 0.0 },
    C64 { re: 0.0, im: -1.0 },
];

/// Largest number of Pauli tuples a monomial evaluation will visit.
pub const MAX_TUPLES: u64 = 1 << 34;
/// Bell magic goes through a double Pauli sum, 16^n terms.
pub const BELL_MAX_N: usize = 6;

fn pc(x: u64) -> u32 {
    x.count_ones()
}

/// tr(P psi) for every Pauli P(a, c) = i^{|a.c|} X^a Z^c, indexed by (a << n) | c.
/// Bit n-1-j of a mask acts on qubit j, so qubit 1 is the high bit.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTable {
    pub n: usize,
    pub vals: Vec<f64>,
}

impl PauliTable {
    pub fn new(s: &StateVector) -> Result<PauliTable> {
        if s.q != 2 {
            return Err(Error::BadShape("magic measures are implemented for qubits only".into()));
        }
        let n = s.n;
        if n > 13 {
            return Err(Error::TooLarge(format!("expectation table for n={n}")));
        }
        let d = 1usize << n;
        let mut vals = vec![0.0; d * d];
        let mut f = vec![C64::new(0.0, 0.0); d];
        for a in 0..d {
            for (x, fx) in f.iter_mut().enumerate() {
                *fx = s.amps[x ^ a].conj() * s.amps[x];
            }
            // Walsh-Hadamard over c: sum_x (-1)^{c.x} f(x)
            let mut h = 1;
            while h < d {
                for i in (0..d).step_by(2 * h) {
                    for j in i..i + h {
                        let (u, v) = (f[j], f[j + h]);
                        f[j] = u + v;
                        f[j + h] = u - v;
                    }
                }
                h *= 2;
            }
            for c in 0..d {
                let z = I_POW[(pc((a & c) as u64) % 4) as usize] * f[c];
                vals[(a << n) | c] = z.re;
            }
        }
        Ok(PauliTable { n, vals })
    }

    /// A table from arbitrary real values, physical or not.
    pub fn from_values(n: usize, vals: Vec<f64>) -> Result<PauliTable> {
        if vals.len() != 1 << (2 * n) {
            return Err(Error::ShapeMismatch(format!("{} values for n={n}", vals.len())));
        }
        Ok(PauliTable { n, vals })
    }

    pub fn d(&self) -> usize {
        1 << self.n
    }

    pub fn get(&self, a: u64, c: u64) -> f64 {
        self.vals[((a as usize) << self.n) | c as usize]
    }

    /// tr(P psi) for the ordered product of two Paulis, i^e tr(P(a^a', c^c') psi).
    pub fn product(&self, a: u64, c: u64, a2: u64, c2: u64) -> C64 {
        let (aa, cc) = (a ^ a2, c ^ c2);
        let e = pc(a & c) + pc(a2 & c2) + 2 * pc(c & a2) + 4 * 64 - pc(aa & cc);
        I_POW[(e % 4) as usize] * self.get(aa, cc)
    }

    /// (1/d) sum_P tr(P psi)^{2 alpha}
    pub fn purity(&self, alpha: u32) -> f64 {
        self.vals.iter().map(|x| x.powi(2 * alpha as i32)).sum::<f64>() / self.d() as f64
    }
}

/// tr(Omega psi^{(x) k}) by the Pauli-tuple sum of the monomial, with every
/// single-copy trace read from the table.
pub fn monomial_expectation(t: &PauliTable, mon: &Monomial) -> Result<C64> {
    if mon.q() != 2 {
        return Err(Error::BadShape("magic measures are implemented for qubits only".into()));
    }
    let n = t.n;
    let (k, m) = (mon.k(), mon.m());
    let per = 1u64 << (2 * n);
    if 2 * n * m >= 63 || per.pow(m as u32) > MAX_TUPLES {
        return Err(Error::TooLarge(format!("{m} Pauli sums over n={n} qubits")));
    }
    let cols: Vec<Vec<usize>> = (0..k).map(|r| (0..m).filter(|&j| mon.v().get(r, j) == 1).collect()).collect();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).filter(|&(i, j)| mon.phases().get(i, j) == 1).collect();
    let mask = (1u64 << n) - 1;
    let mut a = vec![0u64; m];
    let mut c = vec![0u64; m];
    let mut total = C64::new(0.0, 0.0);
    'tuples: for code in 0..per.pow(m as u32) {
        let mut x = code;
        for j in 0..m {
            let p = x % per;
            x /= per;
            a[j] = p >> n;
            c[j] = p & mask;
        }
        let mut sign = 0;
        for &(i, j) in &pairs {
            sign ^= (pc(c[i] & a[j]) + pc(a[i] & c[j])) & 1;
        }
        let mut val = if sign == 1 { C64::new(-1.0, 0.0) } else { C64::new(1.0, 0.0) };
        for cr in &cols {
            let (mut aa, mut cc, mut e) = (0u64, 0u64, 0u32);
            for &j in cr {
                let (na, nc) = (aa ^ a[j], cc ^ c[j]);
                e += pc(aa & cc) + pc(a[j] & c[j]) + 2 * pc(cc & a[j]) + 4 * 64 - pc(na & nc);
                aa = na;
                cc = nc;
            }
            let v = t.get(aa, cc);
            if v == 0.0 {
                continue 'tuples;
            }
            val *= I_POW[(e % 4) as usize] * v;
        }
        total += val;
    }
    Ok(total / (t.d() as f64).powi(m as i32))
}

/// Delta_{2 alpha} = (1/d) sum_P tr^{2 alpha}(P psi).
pub fn stabilizer_purity(s: &StateVector, alpha: u32) -> Result<f64> {
    if alpha < 2 {
        return Err(Error::BadShape(format!("alpha must be an integer >= 2, got {alpha}")));
    }
    Ok(PauliTable::new(s)?.purity(alpha))
}

/// M_alpha = log2(Delta_{2 alpha}) / (1 - alpha).
pub fn stabilizer_entropy(s: &StateVector, alpha: u32) -> Result<f64> {
    Ok(entropy_of(stabilizer_purity(s, alpha)?, alpha))
}

fn entropy_of(delta: f64, alpha: u32) -> f64 {
    let e = delta.log2() / (1.0 - alpha as f64);
    // -0.0 on stabilizer states reads badly
    if e == 0.0 {
        0.0
    } else {
        e
    }
}

/// Delta_Omega = Re tr(Omega psi^{(x) k}).
pub fn generalized_purity(s: &StateVector, mon: &Monomial) -> Result<f64> {
    Ok(monomial_expectation(&PauliTable::new(s)?, mon)?.re)
}

/// Omega_{6,6} = Omega(11111100) Omega(00111111) on eight copies.
pub fn omega_66() -> Monomial {
    Monomial::from_columns(8, 2, &[vec![1, 1, 1, 1, 1, 1, 0, 0], vec![0, 0, 1, 1, 1, 1, 1, 1]]).expect("balanced columns")
}

/// Omega(111111000) Omega(000111111) on nine copies.
pub fn omega_triple() -> Monomial {
    Monomial::from_columns(9, 2, &[vec![1, 1, 1, 1, 1, 1, 0, 0, 0], vec![0, 0, 0, 1, 1, 1, 1, 1, 1]]).expect("balanced columns")
}

/// B = 1 - Re tr(Omega_{6,6} psi^{(x) 8}).
pub fn bell_magic(s: &StateVector) -> Result<f64> {
    bell_magic_table(&PauliTable::new(s)?)
}

pub fn bell_magic_table(t: &PauliTable) -> Result<f64> {
    if t.n > BELL_MAX_N {
        return Err(Error::TooLarge(format!("Bell magic at n={} (limit {BELL_MAX_N})", t.n)));
    }
    Ok(1.0 - monomial_expectation(t, &omega_66())?.re)
}

/// B from its original definition: sum_{P1,P2} Q(P1) Q(P2) ||[P1,P2]||,
/// Q(P) = d^{-2} sum_Q tr^2(Q psi) |tr(PQ psi)|^2.
pub fn bell_magic_definition(s: &StateVector) -> Result<f64> {
    let t = PauliTable::new(s)?;
    if t.n > BELL_MAX_N {
        return Err(Error::TooLarge(format!("Bell magic at n={} (limit {BELL_MAX_N})", t.n)));
    }
    let n = t.n;
    let per = 1usize << (2 * n);
    let d2 = (t.d() * t.d()) as f64;
    let qdist: Vec<f64> = (0..per).map(|p| (0..per).map(|q| t.vals[q].powi(2) * t.vals[p ^ q].powi(2)).sum::<f64>() / d2).collect();
    let mask = (1usize << n) - 1;
    let mut b = 0.0;
    for p1 in 0..per {
        for p2 in 0..per {
            let (a1, c1, a2, c2) = (p1 >> n, p1 & mask, p2 >> n, p2 & mask);
            // ||[P1, P2]|| = 1 - chi is 2 on anticommuting pairs, 0 otherwise
            if (pc((c1 & a2) as u64) + pc((a1 & c2) as u64)) % 2 == 1 {
                b += 2.0 * qdist[p1] * qdist[p2];
            }
        }
    }
    Ok(b)
}

/// Re tr(Omega(111111000) Omega(000111111) psi^{(x) 9}).
pub fn triple_purity(s: &StateVector) -> Result<f64> {
    Ok(monomial_expectation(&PauliTable::new(s)?, &omega_triple())?.re)
}

/// (1/d^2) sum_{P,Q} tr^3(P psi) tr^3(Q psi) tr^3(PQ psi), real part, from
/// a table that need not come from a state.
pub fn triple_purity_table(t: &PauliTable) -> f64 {
    let n = t.n;
    let per = 1u64 << (2 * n);
    let mask = (1u64 << n) - 1;
    let mut acc = C64::new(0.0, 0.0);
    for p in 0..per {
        let (a, c) = (p >> n, p & mask);
        let ep = t.get(a, c).powi(3);
        if ep == 0.0 {
            continue;
        }
        for q in 0..per {
            let (a2, c2) = (q >> n, q & mask);
            let pq = t.product(a, c, a2, c2);
            acc += ep * t.get(a2, c2).powi(3) * pq * pq * pq;
        }
    }
    acc.re / (t.d() * t.d()) as f64
}

/// Optimal six-copy stabilizer testing: 1/2 + (1 - Delta_6)/4.
pub fn testing_success(s: &StateVector) -> Result<f64> {
    let d6 = stabilizer_purity(s, 3)?;
    let p = 0.5 + (1.0 - d6) / 4.0;
    debug_assert!((testing_success_from_entropy(entropy_of(d6, 3)) - p).abs() <= 1e-12);
    Ok(p)
}

/// 1/2 + (1 - 2^{-2 M_3})/4.
pub fn testing_success_from_entropy(m3: f64) -> f64 {
    0.5 + (1.0 - (-2.0 * m3).exp2()) / 4.0
}

// ------------------------------------------------------------ state orbits

/// Decomposition of the Clifford twirl of psi^{(x) k} over the symmetrized
/// orbit representatives: sum_O p_O Pi O Pi / tr(O Pi).
#[derive(Clone, Debug)]
pub struct StateOrbit {
    pub k: usize,
    pub d: f64,
    pub representatives: Vec<Monomial>,
    pub orbit_sizes: Vec<u64>,
    /// tr(Pi_sym O)
    pub sym_traces: Vec<f64>,
    /// S_{O O'} = tr(Pi O Pi O') / (tr(Pi O) tr(Pi O'))
    pub s_matrix: DMatrix<f64>,
    /// tr(O psi^{(x) k})
    pub expectations: Vec<C64>,
    pub p: Vec<f64>,
}

/// The orbit data that does not depend on the state.
#[derive(Clone, Debug)]
pub struct OrbitGeometry {
    pub k: usize,
    pub d: f64,
    pub representatives: Vec<Monomial>,
    pub orbit_sizes: Vec<u64>,
    pub sym_traces: Vec<f64>,
    pub s_matrix: DMatrix<f64>,
}

/// Pi O Pi is the uniform average over the two-sided orbit of O, so every
/// trace reduces to trace exponents of monomial products.
pub fn orbit_geometry(k: usize, d: f64) -> Result<OrbitGeometry> {
    if !(4..=6).contains(&k) {
        return Err(Error::UnsupportedK(k));
    }
    let table = class_table(k)?;
    let reps: Vec<Monomial> = table.iter().map(|r| r.representative.clone()).collect();
    let members: Vec<Vec<Monomial>> = reps.iter().map(|r| Ok(orbit_members(r)?.iter().map(|b| b.to_monomial()).collect())).collect::<Result<_>>()?;
    let avg = |orb: &[Monomial], other: Option<&Monomial>| -> Result<f64> {
        let mut s = 0.0;
        for x in orb {
            let e = match other {
                None => x.trace_exponent(),
                Some(o) => x.concat(o)?.trace_exponent(),
            };
            s += d.powi(e as i32);
        }
        Ok(s / orb.len() as f64)
    };
    let sym: Vec<f64> = members.iter().map(|o| avg(o, None)).collect::<Result<_>>()?;
    let c = reps.len();
    let mut s = DMatrix::zeros(c, c);
    for i in 0..c {
        for j in 0..c {
            s[(i, j)] = avg(&members[i], Some(&reps[j]))? / (sym[i] * sym[j]);
        }
    }
    Ok(OrbitGeometry { k, d, representatives: reps, orbit_sizes: table.iter().map(|r| r.size).collect(), sym_traces: sym, s_matrix: s })
}

/// p = S^{-1} b with b_O = tr(O psi^{(x) k}) / tr(Pi O); a pseudo-inverse is
/// used when the representatives are linearly dependent at this d.
pub fn state_orbit(s: &StateVector, k: usize) -> Result<StateOrbit> {
    let t = PauliTable::new(s)?;
    let g = orbit_geometry(k, t.d() as f64)?;
    let expectations: Vec<C64> = g.representatives.iter().map(|r| monomial_expectation(&t, r)).collect::<Result<_>>()?;
    let b = DVector::from_iterator(expectations.len(), expectations.iter().zip(&g.sym_traces).map(|(e, tr)| e.re / tr));
    let scale = g.s_matrix.norm();
    let sinv = g.s_matrix.clone().pseudo_inverse(1e-12 * scale).map_err(|e| Error::SingularMatrix(e.to_string()))?;
    let p = (sinv * b).iter().copied().collect();
    Ok(StateOrbit {
        k,
        d: g.d,
        representatives: g.representatives,
        orbit_sizes: g.orbit_sizes,
        sym_traces: g.sym_traces,
        s_matrix: g.s_matrix,
        expectations,
        p,
    })
}

impl StateOrbit {
    /// Index of the component whose orbit contains `mon`.
    pub fn component_of(&self, mon: &Monomial) -> Result<Option<usize>> {
        for (i, r) in self.representatives.iter().enumerate() {
            if orbit_contains(r, mon)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// Frobenius distance between the exact twirl T of psi^{(x) k} and
    /// X = sum_i p_i Pi O_i Pi / tr(Pi O_i).
    ///
    /// T - X lies in the span of the Pi O_i Pi, so it is fixed by the overlaps
    /// r_j = <O_j, T> - <O_j, X> and ||T - X||^2 = r^T G^+ r, with G the Gram
    /// matrix of the Pi O_i Pi. Forming ||T||^2 - 2<X,T> + ||X||^2 directly
    /// loses about eight digits to cancellation.
    pub fn residual(&self, s: &StateVector) -> Result<f64> {
        let n = s.n;
        let k = self.k;
        let c = self.representatives.len();
        let t = exact_twirl_sum(&state_power_sum(s, k, true)?)?;
        let w: Vec<f64> = self.p.iter().zip(&self.sym_traces).map(|(p, tr)| p / tr).collect();
        let c1: Vec<_> = self.representatives.iter().map(monomial_coefficients_n1).collect();
        // <Pi O_i Pi, O_j> is the orbit average of <X, O_j>, a one-qubit overlap to the n
        let mut g = DMatrix::<f64>::zeros(c, c);
        for (i, rep) in self.representatives.iter().enumerate() {
            let members = orbit_members(rep)?;
            let cx: Vec<_> = members.iter().map(|x| monomial_coefficients_n1(&x.to_monomial())).collect();
            for (j, cj) in c1.iter().enumerate() {
                let mut acc = 0.0;
                for m in &cx {
                    let one: C64 = m.iter().map(|(key, a)| a.conj() * cj.get(key).copied().unwrap_or_default()).sum::<C64>() * (1u64 << k) as f64;
                    acc += one.powu(n as u32).re;
                }
                g[(i, j)] = acc / members.len() as f64;
            }
        }
        let r = DVector::from_fn(c, |j, _| {
            let tj = monomial_pauli_sum(&self.representatives[j], n).inner(&t).re;
            let xj: f64 = (0..c).map(|i| w[i] * g[(i, j)]).sum();
            tj - xj
        });
        let gs = (&g + g.transpose()) * 0.5;
        let ginv = gs.clone().pseudo_inverse(1e-12 * gs.norm()).map_err(|e| Error::SingularMatrix(e.to_string()))?;
        Ok((r.transpose() * ginv * &r)[(0, 0)].abs().sqrt())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "d": self.d,
            "components": self.representatives.iter().enumerate().map(|(i, r)| json!({
                "representative": r.to_json(),
                "orbit_size": self.orbit_sizes[i],
                "sym_trace": self.sym_traces[i],
                "expectation": self.expectations[i].re,
                "p": self.p[i],
            })).collect::<Vec<_>>(),
        })
    }
}

/// Closed forms for the orbit weights in terms of the purities.
pub mod closed {
    /// k = 4: (p, 1 - p) with p = (d+3)(d - Delta_4)/((d+4)(d-1)).
    pub fn k4(d: f64, d4: f64) -> [f64; 2] {
        let p = (d + 3.0) * (d - d4) / ((d + 4.0) * (d - 1.0));
        [p, 1.0 - p]
    }

    /// k = 5: p = (d+3)(d+4-5 Delta_4)/((d+8)(d-1)),
    /// 1 - p = 5((d+3) Delta_4 - 4)/((d+8)(d-1)).
    pub fn k5(d: f64, d4: f64) -> [f64; 2] {
        let den = (d + 8.0) * (d - 1.0);
        [(d + 3.0) * (d + 4.0 - 5.0 * d4) / den, 5.0 * ((d + 3.0) * d4 - 4.0) / den]
    }

    /// k = 6 weights (p_2, p_4, p_6, p_{4,4}) as printed, on the classes of the
    /// identity, Omega_4, Omega_6 and Omega_{4,4}. Does not sum to one; see
    /// `k6` for the weights that solve the orbit equations.
    pub fn k6_printed(d: f64, d4: f64, d6: f64, d44: f64) -> [f64; 4] {
        let den = (d + 16.0) * (d + 8.0) * (d - 1.0) * (d - 2.0);
        let p2 = (d + 5.0) * (d + 3.0) * ((d * d + 13.0 * d) - d44 * (d - 32.0) - (15.0 * d + 60.0) * d4 + 30.0 * d6);
        let p4 = 15.0 * (d + 5.0) * (-4.0 * (d + 4.0) - 4.0 * (d + 4.0) * d44 - (d * d + 8.0 * d + 52.0) * d4 - 3.0 * (d + 6.0) * d6);
        let p6 = 720.0 + 720.0 * d44 + 270.0 * (d + 6.0) * d4 + 15.0 * (d + 14.0) * (d + 1.0) * d6;
        let p44 = (d + 23.0) * (-(d - 32.0) + d * (d + 13.0) * d44 - (15.0 * d + 60.0) * d4 + 30.0 * d6);
        [p2 / den, p4 / den, p6 / den, p44 / den]
    }

    /// k = 6 weights (p_2, p_4, p_6, p_{4,4}) from inverting the 4x4 orbit
    /// matrix over Q(d). Same denominator as the printed vector.
    pub fn k6(d: f64, d4: f64, d6: f64, d44: f64) -> [f64; 4] {
        let den = (d + 16.0) * (d + 8.0) * (d - 1.0) * (d - 2.0);
        let p2 = (d + 3.0) * (d + 5.0) * (d * (d + 13.0) - 15.0 * (d + 4.0) * d4 - (d - 32.0) * d6 + 30.0 * d44);
        let p4 = 15.0 * (d + 5.0) * (-4.0 * (d + 4.0) + (d * d + 8.0 * d + 52.0) * d4 - 4.0 * (d + 4.0) * d6 - 3.0 * (d + 6.0) * d44);
        let p6 = (d + 23.0) * (-(d - 32.0) - 15.0 * (d + 4.0) * d4 + d * (d + 13.0) * d6 + 30.0 * d44);
        let p44 = 720.0 - 270.0 * (d + 6.0) * d4 + 720.0 * d6 + 15.0 * (d + 1.0) * (d + 14.0) * d44;
        [p2 / den, p4 / den, p6 / den, p44 / den]
    }

    /// ||Phi_cl(psi^{(x)4}) - Phi_haar(psi^{(x)4})||_1 as printed: 2|Delta_4 - 4|/(d(d+1)).
    pub fn k4_trace_distance_printed(d: f64, d4: f64) -> f64 {
        2.0 * (d4 - 4.0).abs() / (d * (d + 1.0))
    }

    /// The same distance from the k = 4 decomposition. Both terms are
    /// normalized projectors with nested ranges and rank ratio 4/(d(d+3)), so
    /// the norm is 2|1-p|(d+4)(d-1)/(d(d+3)) = 2|(d+3) Delta_4 - 4|/(d(d+3)).
    pub fn k4_trace_distance(d: f64, d4: f64) -> f64 {
        2.0 * ((d + 3.0) * d4 - 4.0).abs() / (d * (d + 3.0))
    }
}

// ------------------------------------------------------------ report

/// Tolerances recorded with every report.
pub const NORM_TOL: f64 = StateVector::NORM_TOL;
pub const STABILIZER_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct MagicReport {
    pub n: usize,
    pub label: String,
    pub seed: Option<u64>,
    /// (alpha, Delta_{2 alpha}, M_alpha)
    pub purities: Vec<(u32, f64, f64)>,
    pub bell_magic: Option<f64>,
    pub p_succ: f64,
    pub triple_purity: Option<f64>,
    /// (monomial JSON text, Delta_Omega)
    pub generalized: Vec<(String, f64)>,
}

pub fn magic_report(s: &StateVector, label: &str, seed: Option<u64>, extra: &[Monomial]) -> Result<MagicReport> {
    let t = PauliTable::new(s)?;
    let purities = (2..=4).map(|a| {
        let d = t.purity(a);
        (a, d, entropy_of(d, a))
    });
    let purities: Vec<_> = purities.collect();
    let d6 = purities[1].1;
    let small = t.n <= BELL_MAX_N;
    let generalized = extra.iter().map(|m| Ok((m.to_json().to_string(), monomial_expectation(&t, m)?.re))).collect::<Result<_>>()?;
    Ok(MagicReport {
        n: s.n,
        label: label.to_string(),
        seed,
        purities,
        bell_magic: if small { Some(bell_magic_table(&t)?) } else { None },
        p_succ: 0.5 + (1.0 - d6) / 4.0,
        triple_purity: if small { Some(triple_purity_table(&t)) } else { None },
        generalized,
    })
}

impl MagicReport {
    pub fn delta(&self, alpha: u32) -> Option<f64> {
        self.purities.iter().find(|p| p.0 == alpha).map(|p| p.1)
    }

    pub fn to_json(&self) -> Value {
        let mut o = Map::new();
        o.insert("state".into(), json!(self.label));
        o.insert("n".into(), json!(self.n));
        o.insert("seed".into(), json!(self.seed));
        for (a, d, m) in &self.purities {
            o.insert(format!("Delta_{}", 2 * a), json!(d));
            o.insert(format!("M_{a}"), json!(m));
        }
        o.insert("bell_magic".into(), json!(self.bell_magic));
        o.insert("p_succ".into(), json!(self.p_succ));
        o.insert("triple_purity".into(), json!(self.triple_purity));
        o.insert(
            "generalized".into(),
            Value::Array(self.generalized.iter().map(|(m, v)| json!({"monomial": serde_json::from_str::<Value>(m).unwrap_or(Value::Null), "value": v, "kind": "measure"})).collect()),
        );
        o.insert("tolerances".into(), json!({"norm": NORM_TOL, "stabilizer": STABILIZER_TOL}));
        Value::Object(o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_state_purities() {
        let s = StateVector::t_state(1).unwrap();
        assert!((stabilizer_purity(&s, 2).unwrap() - 0.75).abs() < 1e-12);
        assert!((stabilizer_purity(&s, 3).unwrap() - 0.625).abs() < 1e-12);
        assert!((testing_success(&s).unwrap() - 0.59375).abs() < 1e-12);
    }

    #[test]
    fn stabilizer_state_is_flat() {
        let s = StateVector::zero(2, 3).unwrap();
        assert_eq!(stabilizer_purity(&s, 2).unwrap(), 1.0);
        assert_eq!(stabilizer_entropy(&s, 3).unwrap(), 0.0);
        assert!(bell_magic(&s).unwrap().abs() < 1e-12);
    }
}
