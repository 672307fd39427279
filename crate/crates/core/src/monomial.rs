//! Pauli monomials Omega(V, M) and the rewriting rules acting on them.
//!
//! Omega(V, M) = d^{-m} sum_{P_1..P_m} prod_{i<j} chi(P_i, P_j)^{M_ij} P_1^{(x)v_1} ... P_m^{(x)v_m}
//! where v_j is column j of V and chi is the group commutator character.
//! Every column operation goes through the Lambda matrix, so the phase
//! bookkeeping lives in exactly one place.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gf::{check_field, column_echelon, inv_mod, modq, rank, FMatrix, GLTransform};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    k: usize,
    q: u32,
    v: FMatrix,
    phases: FMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaMatrix {
    pub lam: FMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionResult {
    pub reduced: Monomial,
    /// Omega = d^dpower * reduced
    pub dpower: usize,
    pub beta: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub projective: Monomial,
    pub unitary: Monomial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MonomialClass {
    ProjectorScaled,
    Unitary,
    Product,
}

impl MonomialClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            MonomialClass::ProjectorScaled => "projector_scaled",
            MonomialClass::Unitary => "unitary",
            MonomialClass::Product => "product",
        }
    }
}

fn column_sum(v: &FMatrix, j: usize) -> u32 {
    (0..v.rows()).map(|r| v.get(r, j) as u32).sum()
}

impl Monomial {
    pub fn new(v: FMatrix, phases: FMatrix) -> Result<Self> {
        let q = v.q();
        check_field(q)?;
        if phases.q() != q || phases.rows() != v.cols() || phases.cols() != v.cols() {
            return Err(Error::ShapeMismatch(format!(
                "V is {}x{}, M is {}x{}",
                v.rows(),
                v.cols(),
                phases.rows(),
                phases.cols()
            )));
        }
        for j in 0..v.cols() {
            if !column_sum(&v, j).is_multiple_of(q) {
                return Err(Error::OddColumn(format!("column {} of V has entry sum {} mod {q}", j + 1, column_sum(&v, j) % q)));
            }
        }
        if !phases.is_alternating() {
            return Err(Error::BadShape(if q == 2 { "M must be symmetric with zero diagonal".into() } else { "M must be antisymmetric".into() }));
        }
        Ok(Monomial { k: v.rows(), q, v, phases })
    }

    /// Phase-free monomial on the given columns.
    pub fn from_columns(k: usize, q: u32, cols: &[Vec<u8>]) -> Result<Self> {
        let v = FMatrix::from_columns(q, k, cols);
        Monomial::new(v, FMatrix::zeros(q, cols.len(), cols.len()))
    }

    pub fn identity(k: usize, q: u32) -> Self {
        Monomial { k, q, v: FMatrix::zeros(q, k, 0), phases: FMatrix::zeros(q, 0, 0) }
    }

    /// Omega(v) = d^{-1} sum_P P^{(x) v}.
    pub fn primitive(k: usize, q: u32, col: &[u8]) -> Result<Self> {
        check_field(q)?;
        if col.len() != k {
            return Err(Error::ShapeMismatch(format!("column has length {}, expected k={k}", col.len())));
        }
        let c: Vec<u8> = col.iter().map(|&x| x % q as u8).collect();
        Monomial::from_columns(k, q, &[c])
    }

    /// Primitive on a set of copies (0-based), all entries 1.
    pub fn primitive_on(k: usize, copies: &[usize]) -> Result<Self> {
        let mut c = vec![0u8; k];
        for &i in copies {
            c[i] = 1;
        }
        Monomial::primitive(k, 2, &c)
    }

    /// The swap T_(ab) as the monomial on e_a - e_b.
    pub fn swap(k: usize, q: u32, a: usize, b: usize) -> Self {
        let mut c = vec![0u8; k];
        c[a] = 1;
        c[b] = (q - 1) as u8;
        Monomial::primitive(k, q, &c).expect("swap column is balanced")
    }

    pub fn k(&self) -> usize {
        self.k
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    pub fn m(&self) -> usize {
        self.v.cols()
    }
    pub fn v(&self) -> &FMatrix {
        &self.v
    }
    pub fn phases(&self) -> &FMatrix {
        &self.phases
    }

    pub fn is_reduced(&self) -> bool {
        rank(&self.v) == self.m()
    }

    pub fn gram_h(&self) -> FMatrix {
        self.v.transpose().mul(&self.v)
    }

    /// Lambda: M below the diagonal, M + H above it, |v_i|/2 on the diagonal
    /// (qubits); H^{1/2} + M with H^{1/2} the upper half of V^T V (odd q).
    pub fn lambda(&self) -> LambdaMatrix {
        let m = self.m();
        let q = self.q;
        let h = self.gram_h();
        let lam = if q == 2 {
            FMatrix::from_fn(2, m, m, |i, j| {
                if i > j {
                    self.phases.get(i, j) as i64
                } else if i < j {
                    (self.phases.get(i, j) + h.get(i, j)) as i64
                } else {
                    (column_sum(&self.v, i) / 2) as i64
                }
            })
        } else {
            let half = inv_mod(2, q) as i64;
            FMatrix::from_fn(q, m, m, |i, j| {
                let hh = if i < j {
                    h.get(i, j) as i64
                } else if i == j {
                    h.get(i, i) as i64 * half
                } else {
                    0
                };
                hh + self.phases.get(i, j) as i64
            })
        };
        LambdaMatrix { lam }
    }

    fn decode(v: FMatrix, lam: &FMatrix) -> Monomial {
        let q = v.q();
        let m = v.cols();
        let phases = if q == 2 {
            FMatrix::from_fn(2, m, m, |i, j| if i > j { lam.get(i, j) as i64 } else if i < j { lam.get(j, i) as i64 } else { 0 })
        } else {
            let h = v.transpose().mul(&v);
            let half = inv_mod(2, q) as i64;
            FMatrix::from_fn(q, m, m, |i, j| {
                let ht = if i < j {
                    h.get(i, j) as i64
                } else if i > j {
                    -(h.get(i, j) as i64)
                } else {
                    0
                };
                (lam.get(i, j) as i64 - lam.get(j, i) as i64 - ht) * half
            })
        };
        Monomial { k: v.rows(), q, v, phases }
    }

    /// Omega(V, M) = Omega(V A, M(A)) with Lambda(A) = A^T Lambda A.
    pub fn apply_gl(&self, a: &GLTransform) -> Result<Monomial> {
        if a.size() != self.m() || a.matrix.q() != self.q {
            return Err(Error::ShapeMismatch(format!("transform of size {} on {} columns", a.size(), self.m())));
        }
        Ok(self.apply_matrix(&a.matrix))
    }

    fn apply_matrix(&self, a: &FMatrix) -> Monomial {
        let v = self.v.mul(a);
        let lam = a.transpose().mul(&self.lambda().lam).mul(a);
        Monomial::decode(v, &lam)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.m() {
            return Err(Error::IndexOutOfRange(format!("column {i} of {}", self.m())));
        }
        Ok(())
    }

    /// Column `target` += column `source`.
    pub fn add_column(&self, target: usize, source: usize) -> Result<Monomial> {
        self.add_column_multiple(target, source, 1)
    }

    pub fn add_column_multiple(&self, target: usize, source: usize, c: u32) -> Result<Monomial> {
        self.check_index(target)?;
        self.check_index(source)?;
        if target == source {
            return Err(Error::IndexOutOfRange("cannot add a column to itself".into()));
        }
        let mut a = FMatrix::identity(self.q, self.m());
        a.set(source, target, (c % self.q) as u8);
        Ok(self.apply_matrix(&a))
    }

    pub fn swap_columns(&self, i: usize, j: usize) -> Result<Monomial> {
        self.check_index(i)?;
        self.check_index(j)?;
        let mut a = FMatrix::identity(self.q, self.m());
        if i != j {
            a.set(i, i, 0);
            a.set(j, j, 0);
            a.set(i, j, 1);
            a.set(j, i, 1);
        }
        Ok(self.apply_matrix(&a))
    }

    pub fn remove_columns(&self, idx: &[usize]) -> Monomial {
        let keep: Vec<usize> = (0..self.m()).filter(|j| !idx.contains(j)).collect();
        Monomial { k: self.k, q: self.q, v: self.v.select_columns(&keep), phases: self.phases.principal(&keep) }
    }

    /// Concatenation without reduction: the operator product self * other.
    pub fn concat(&self, other: &Monomial) -> Result<Monomial> {
        if self.k != other.k || self.q != other.q {
            return Err(Error::ShapeMismatch(format!("(k={}, q={}) vs (k={}, q={})", self.k, self.q, other.k, other.q)));
        }
        Ok(Monomial {
            k: self.k,
            q: self.q,
            v: self.v.hcat(&other.v),
            phases: self.phases.block_diag(&other.phases),
        })
    }

    /// Hermitian adjoint: columns reversed, M -> -R M R.
    pub fn dagger(&self) -> Monomial {
        let m = self.m();
        let rev: Vec<usize> = (0..m).rev().collect();
        let v = self.v.select_columns(&rev);
        let p = self.phases.principal(&rev).neg();
        Monomial { k: self.k, q: self.q, v, phases: p }
    }

    /// Strip linear dependencies among the columns.
    pub fn reduce(&self) -> ReductionResult {
        let q = self.q;
        let mut cur = self.clone();
        let (mut alpha, mut beta) = (0, 0);
        loop {
            let m = cur.m();
            let (ech, t) = column_echelon(&cur.v);
            let r = (0..m).take_while(|&c| !ech.column_is_zero(c)).count();
            if r == m {
                break;
            }
            cur = cur.apply_matrix(&t.matrix);
            let z = r;
            let attached: Vec<usize> = (0..m).filter(|&j| cur.phases.get(z, j) != 0).collect();
            let Some(&s) = attached.last() else {
                // free sum over P_z gives d^2 against the d^{-1} normalization
                cur = cur.remove_columns(&[z]);
                alpha += 1;
                beta += 1;
                continue;
            };
            let inv_s = inv_mod(cur.phases.get(z, s) as u32, q);
            for &j in attached.iter().rev().skip(1) {
                let c = modq(-(cur.phases.get(z, j) as i64) * inv_s as i64, q) as u32;
                cur = cur.add_column_multiple(j, s, c).expect("indices in range");
            }
            debug_assert!((0..m).all(|j| j == s || cur.phases.get(z, j) == 0));
            // summing P_z forces P_s to the identity
            cur = cur.remove_columns(&[z, s]);
            beta += 1;
        }
        ReductionResult { reduced: cur, dpower: alpha, beta }
    }

    pub fn multiply(&self, other: &Monomial) -> Result<ReductionResult> {
        Ok(self.concat(other)?.reduce())
    }

    /// tr(Omega) = d^{k - m + 2 beta}.
    pub fn trace_exponent(&self) -> i64 {
        let r = self.reduce();
        self.k as i64 - self.m() as i64 + 2 * r.beta as i64
    }

    pub fn order(&self) -> usize {
        rank(&self.v)
    }

    /// Gauge-fixed representative: V in reduced column-echelon form.
    pub fn canonical(&self) -> Monomial {
        let (_, t) = column_echelon(&self.v);
        self.apply_matrix(&t.matrix)
    }

    /// Canonical form of the reduced part, used as a hash key up to gauge.
    pub fn key(&self) -> (usize, Vec<u8>, Vec<u8>) {
        let c = self.canonical();
        let m = c.m();
        let mut ups = Vec::with_capacity(m * m.saturating_sub(1) / 2);
        for i in 0..m {
            for j in i + 1..m {
                ups.push(c.phases.get(i, j));
            }
        }
        (m, c.v.entries(), ups)
    }

    pub fn normal_form(&self) -> NormalForm {
        let mut cur = self.clone();
        let k = self.k;
        let pairs: Vec<(usize, usize)> = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).collect();
        let mut next = 0;
        loop {
            if let Some(nf) = try_normal_form(&cur) {
                return nf;
            }
            // insert T_(ab) T_(ab) = identity and retry
            let (a, b) = pairs[next % pairs.len().max(1)];
            next += 1;
            let t = Monomial::swap(k, self.q, a, b);
            let sq = t.concat(&t).expect("same space");
            cur = self.concat(&sq).expect("same space");
            if next > 4 * pairs.len().max(1) {
                panic!("normal form search failed for {}", self.to_json());
            }
        }
    }

    pub fn classify(&self) -> MonomialClass {
        let nf = self.normal_form();
        if nf.projective.m() == 0 {
            MonomialClass::Unitary
        } else if nf.unitary.m() == 0 {
            MonomialClass::ProjectorScaled
        } else {
            MonomialClass::Product
        }
    }

    pub fn to_json(&self) -> Value {
        let vcols: Vec<String> = self.v.columns().iter().map(|c| c.iter().map(|&d| std::char::from_digit(d as u32, 36).unwrap()).collect()).collect();
        let mut ms = Vec::new();
        for i in 0..self.m() {
            for j in i + 1..self.m() {
                let x = self.phases.get(i, j);
                if x != 0 {
                    if self.q == 2 {
                        ms.push(json!([i + 1, j + 1]));
                    } else {
                        ms.push(json!([i + 1, j + 1, x]));
                    }
                }
            }
        }
        json!({"k": self.k, "q": self.q, "V": vcols, "M": ms})
    }

    pub fn from_json(val: &Value) -> Result<Monomial> {
        let bad = |s: &str| Error::Parse(s.to_string());
        let k = val.get("k").and_then(Value::as_u64).ok_or_else(|| bad("missing k"))? as usize;
        let q = val.get("q").and_then(Value::as_u64).unwrap_or(2);
        if q > 255 {
            return Err(Error::NotPrime(q as u32));
        }
        let q = q as u32;
        check_field(q)?;
        let vs = val.get("V").and_then(Value::as_array).ok_or_else(|| bad("missing V"))?;
        let mut cols = Vec::new();
        for c in vs {
            let s = c.as_str().ok_or_else(|| bad("V entries must be strings"))?;
            let mut col = Vec::new();
            for ch in s.chars() {
                let d = ch.to_digit(36).filter(|&d| d < q).ok_or_else(|| bad("bad digit in V"))?;
                col.push(d as u8);
            }
            if col.len() != k {
                return Err(Error::ShapeMismatch(format!("V column of length {} with k={k}", col.len())));
            }
            cols.push(col);
        }
        let m = cols.len();
        let v = FMatrix::from_columns(q, k, &cols);
        let mut phases = FMatrix::zeros(q, m, m);
        if let Some(ms) = val.get("M") {
            let ms = ms.as_array().ok_or_else(|| bad("M must be an array"))?;
            for e in ms {
                let e = e.as_array().ok_or_else(|| bad("M entries must be arrays"))?;
                if e.len() < 2 || e.len() > 3 {
                    return Err(bad("M entries are [i, j] or [i, j, value]"));
                }
                let i = e[0].as_u64().ok_or_else(|| bad("M index"))? as usize;
                let j = e[1].as_u64().ok_or_else(|| bad("M index"))? as usize;
                let x = if e.len() == 3 { e[2].as_i64().ok_or_else(|| bad("M value"))? } else { 1 };
                if i == 0 || j == 0 || i > m || j > m || i >= j {
                    return Err(Error::IndexOutOfRange(format!("M pair ({i},{j}) with m={m}")));
                }
                phases.set(i - 1, j - 1, modq(x, q));
                phases.set(j - 1, i - 1, modq(-x, q));
            }
        }
        Monomial::new(v, phases)
    }

    pub fn parse(text: &str) -> Result<Monomial> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Monomial::from_json(&v)
    }
}

/// Find A = [P | U] with Lambda(A) upper triangular, P spanning ker Lambda and
/// every U column odd. Returns None when the search comes up empty.
fn try_normal_form(mon: &Monomial) -> Option<NormalForm> {
    let q = mon.q;
    let m = mon.m();
    let lam = mon.lambda().lam;
    let ker = lam.kernel();
    let p = ker.cols();
    let bform = |x: &[u8], y: &[u8]| -> u32 {
        let ly = lam.mul_vec(y);
        x.iter().zip(&ly).map(|(&a, &b)| a as u32 * b as u32).sum::<u32>() % q
    };
    // normalized nonzero vectors with nonzero quadratic value
    let total = (q as usize).pow(m as u32);
    let mut cands: Vec<Vec<u8>> = Vec::new();
    for idx in 1..total {
        let mut x = vec![0u8; m];
        let mut t = idx;
        for d in x.iter_mut().rev() {
            *d = (t % q as usize) as u8;
            t /= q as usize;
        }
        let lead = x.iter().find(|&&d| d != 0).copied().unwrap();
        if lead != 1 {
            continue;
        }
        if bform(&x, &x) != 0 {
            cands.push(x);
        }
    }
    let mut chosen: Vec<Vec<u8>> = ker.columns();
    let mut budget: usize = 200_000;
    fn dfs(
        chosen: &mut Vec<Vec<u8>>,
        p: usize,
        m: usize,
        q: u32,
        cands: &[Vec<u8>],
        bform: &dyn Fn(&[u8], &[u8]) -> u32,
        budget: &mut usize,
    ) -> bool {
        if chosen.len() == m {
            return true;
        }
        for x in cands {
            if *budget == 0 {
                return false;
            }
            *budget -= 1;
            if chosen[p..].iter().any(|u| bform(x, u) != 0) {
                continue;
            }
            chosen.push(x.clone());
            if rank(&FMatrix::from_columns(q, m, chosen)) == chosen.len() && dfs(chosen, p, m, q, cands, bform, budget) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    if !dfs(&mut chosen, p, m, q, &cands, &bform, &mut budget) {
        return None;
    }
    let a = FMatrix::from_columns(q, m, &chosen);
    let out = mon.apply_matrix(&a);
    debug_assert!(out.phases.is_zero());
    if !out.phases.is_zero() {
        return None;
    }
    let proj: Vec<usize> = (0..p).collect();
    let uni: Vec<usize> = (p..m).collect();
    Some(NormalForm {
        projective: Monomial { k: mon.k, q, v: out.v.select_columns(&proj), phases: FMatrix::zeros(q, p, p) },
        unitary: Monomial { k: mon.k, q, v: out.v.select_columns(&uni), phases: FMatrix::zeros(q, m - p, m - p) },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega4_squares_to_d_omega4() {
        let w = Monomial::primitive_on(4, &[0, 1, 2, 3]).unwrap();
        let r = w.multiply(&w).unwrap();
        assert_eq!(r.dpower, 1);
        assert_eq!(r.reduced.key(), w.key());
        assert_eq!(w.trace_exponent(), 3);
    }

    #[test]
    fn omega6_squares_to_identity() {
        let w = Monomial::primitive_on(6, &[0, 1, 2, 3, 4, 5]).unwrap();
        let r = w.multiply(&w).unwrap();
        assert_eq!(r.dpower, 0);
        assert_eq!(r.reduced.m(), 0);
    }

    #[test]
    fn json_roundtrip() {
        let s = r#"{"k":6,"q":2,"V":["111100","001111"],"M":[[1,2]]}"#;
        let m = Monomial::from_json(&serde_json::from_str(s).unwrap()).unwrap();
        assert_eq!(Monomial::from_json(&m.to_json()).unwrap(), m);
        assert_eq!(m.phases().get(0, 1), 1);
    }

    #[test]
    fn odd_column_rejected() {
        assert!(matches!(Monomial::primitive(3, 2, &[1, 1, 1]), Err(Error::OddColumn(_))));
    }
}
