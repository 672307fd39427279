//! Pauli and Weyl operators as bit strings.
//!
//! Conventions: omega = exp(2 pi i / q), X|j> = |j+1>, Z|j> = omega^j |j>.
//! The Weyl operator with exponents (a, c) on one qudit is tau^{ac} X^a Z^c,
//! where tau = i for qubits and tau = omega^{(q+1)/2} = -exp(i pi / q) for odd q.
//! For qubits this makes every operator Hermitian (Y = i X Z).
//! Bit strings are interleaved: (a_1, c_1, a_2, c_2, ...).

use std::fmt;

use num_complex::Complex64;

use crate::commutant::CommClass;
use crate::error::{Error, Result};
use crate::gf::{antisymmetric_canonical, check_field, column_echelon, modq, rank, FMatrix};

/// A power of tau. Exponents are kept modulo the order of tau (4 for qubits,
/// q for odd q), which is always inside [0, 2q).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Phase {
    q: u32,
    exp: u32,
}

impl Phase {
    pub fn order(q: u32) -> u32 {
        if q == 2 {
            4
        } else {
            q
        }
    }

    pub fn new(q: u32, e: i64) -> Phase {
        Phase { q, exp: e.rem_euclid(Self::order(q) as i64) as u32 }
    }

    pub fn one(q: u32) -> Phase {
        Phase { q, exp: 0 }
    }

    /// omega^e = tau^{2e}
    pub fn omega(q: u32, e: i64) -> Phase {
        Phase::new(q, 2 * e)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    pub fn is_one(&self) -> bool {
        self.exp == 0
    }

    pub fn mul(self, o: Phase) -> Phase {
        debug_assert_eq!(self.q, o.q);
        Phase::new(self.q, self.exp as i64 + o.exp as i64)
    }

    pub fn inv(self) -> Phase {
        Phase::new(self.q, -(self.exp as i64))
    }

    pub fn pow(self, e: i64) -> Phase {
        Phase::new(self.q, self.exp as i64 * e)
    }

    /// The numeric value; for qubits exact +-1, +-i.
    pub fn to_complex(&self) -> Complex64 {
        if self.q == 2 {
            return [
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, -1.0),
            ][self.exp as usize];
        }
        let q = self.q as f64;
        let theta = std::f64::consts::PI * self.exp as f64 * (q + 1.0) / q;
        Complex64::from_polar(1.0, theta)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q == 2 {
            f.write_str(["+1", "+i", "-1", "-i"][self.exp as usize])
        } else {
            write!(f, "tau^{}", self.exp)
        }
    }
}

/// A Weyl operator on n qudits without phase.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub q: u32,
    pub n: usize,
    pub b: Vec<u8>,
}

impl PauliString {
    pub fn identity(q: u32, n: usize) -> Self {
        PauliString { q, n, b: vec![0; 2 * n] }
    }

    pub fn new(q: u32, b: Vec<u8>) -> Result<Self> {
        check_field(q)?;
        if !b.len().is_multiple_of(2) {
            return Err(Error::BadShape("bit string length must be even".into()));
        }
        let n = b.len() / 2;
        Ok(PauliString { q, n, b: b.into_iter().map(|x| x % q as u8).collect() })
    }

    /// X^a Z^c exponents on qudit j.
    pub fn xz(&self, j: usize) -> (u8, u8) {
        (self.b[2 * j], self.b[2 * j + 1])
    }

    pub fn single(q: u32, n: usize, j: usize, a: u8, c: u8) -> Self {
        let mut p = Self::identity(q, n);
        p.b[2 * j] = a % q as u8;
        p.b[2 * j + 1] = c % q as u8;
        p
    }

    pub fn is_identity(&self) -> bool {
        self.b.iter().all(|&x| x == 0)
    }

    /// Integer power; for qubits P^2 = I, for odd q P(b)^v = P(v b).
    pub fn pow(&self, v: u8) -> PauliString {
        let q = self.q;
        if self.q == 2 {
            if v.is_multiple_of(2) {
                return Self::identity(2, self.n);
            }
            return self.clone();
        }
        PauliString { q: self.q, n: self.n, b: self.b.iter().map(|&x| ((x as u32 * v as u32) % q) as u8).collect() }
    }

    pub fn scale(&self, v: u8) -> PauliString {
        let q = self.q;
        PauliString { q, n: self.n, b: self.b.iter().map(|&x| ((x as u32 * v as u32) % q) as u8).collect() }
    }

    pub fn add(&self, o: &PauliString) -> PauliString {
        let q = self.q;
        PauliString { q, n: self.n, b: self.b.iter().zip(&o.b).map(|(&x, &y)| ((x as u32 + y as u32) % q) as u8).collect() }
    }

    /// Literal for one copy: "IXYZ" for qubits, "X1Z2X0Z0" for odd q.
    pub fn literal(&self) -> String {
        let mut s = String::new();
        for j in 0..self.n {
            let (a, c) = self.xz(j);
            if self.q == 2 {
                s.push(['I', 'Z', 'X', 'Y'][(2 * a + c) as usize]);
            } else {
                s.push_str(&format!("X{a}Z{c}"));
            }
        }
        s
    }
}

/// Symplectic form sigma(b, b') = sum_j (c_j a'_j - a_j c'_j) mod q, so that
/// P(b) P(b') = omega^{sigma} P(b') P(b).
pub fn sigma(x: &[u8], y: &[u8], q: u32) -> u8 {
    let mut s: i64 = 0;
    for j in 0..x.len() / 2 {
        s += x[2 * j + 1] as i64 * y[2 * j] as i64 - x[2 * j] as i64 * y[2 * j + 1] as i64;
    }
    modq(s, q)
}

/// tau exponent picked up by P(x) P(y) = tau^e P(x + y).
pub fn product_exponent(x: &[u8], y: &[u8], q: u32) -> i64 {
    let mut e: i64 = 0;
    for j in 0..x.len() / 2 {
        let (a, c) = (x[2 * j] as i64, x[2 * j + 1] as i64);
        let (a2, c2) = (y[2 * j] as i64, y[2 * j + 1] as i64);
        let aa = (a + a2) % q as i64;
        let cc = (c + c2) % q as i64;
        e += a * c + a2 * c2 + 2 * c * a2 - aa * cc;
    }
    e
}

fn same_space(p: &PauliString, r: &PauliString) -> Result<()> {
    if p.q != r.q || p.n != r.n {
        return Err(Error::ShapeMismatch(format!("(q={}, n={}) vs (q={}, n={})", p.q, p.n, r.q, r.n)));
    }
    Ok(())
}

/// P * R = phase * (P + R).
pub fn pauli_mul(p: &PauliString, r: &PauliString) -> Result<(PauliString, Phase)> {
    same_space(p, r)?;
    let e = product_exponent(&p.b, &r.b, p.q);
    Ok((p.add(r), Phase::new(p.q, e)))
}

/// Group commutator character: P R = chi(P, R) R P.
pub fn chi(p: &PauliString, r: &PauliString) -> Result<Phase> {
    same_space(p, r)?;
    Ok(Phase::omega(p.q, sigma(&p.b, &r.b, p.q) as i64))
}

/// Weighted anticommutation graph g[i][j] = sigma(P_i, P_j).
pub fn anticomm_graph(ps: &[PauliString]) -> Result<FMatrix> {
    let Some(first) = ps.first() else { return Ok(FMatrix::zeros(2, 0, 0)) };
    for p in ps {
        same_space(first, p)?;
    }
    let q = first.q;
    Ok(FMatrix::from_fn(q, ps.len(), ps.len(), |i, j| sigma(&ps[i].b, &ps[j].b, q) as i64))
}

/// An element of the k-fold tensor power: phase times a product of standard
/// Weyl operators, one per copy (row j of `rows` is copy j).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliTensor {
    pub q: u32,
    pub n: usize,
    pub k: usize,
    pub rows: FMatrix,
    pub phase: Phase,
}

impl PauliTensor {
    pub fn new(rows: FMatrix, phase: Phase) -> Result<Self> {
        if !rows.cols().is_multiple_of(2) {
            return Err(Error::BadShape("tensor rows need an even number of columns".into()));
        }
        Ok(PauliTensor { q: rows.q(), n: rows.cols() / 2, k: rows.rows(), rows, phase })
    }

    pub fn from_copies(copies: &[PauliString], phase: Phase) -> Result<Self> {
        let Some(first) = copies.first() else {
            return Err(Error::BadShape("need at least one copy".into()));
        };
        for c in copies {
            same_space(first, c)?;
        }
        let rows = FMatrix::from_rows(first.q, &copies.iter().map(|c| c.b.clone()).collect::<Vec<_>>());
        Ok(PauliTensor { q: first.q, n: first.n, k: copies.len(), rows, phase })
    }

    pub fn copy(&self, j: usize) -> PauliString {
        PauliString { q: self.q, n: self.n, b: self.rows.row(j) }
    }

    pub fn copies(&self) -> Vec<PauliString> {
        (0..self.k).map(|j| self.copy(j)).collect()
    }

    /// Base-q integer of the row-major digits (copy 1 most significant).
    pub fn key(&self) -> u128 {
        tensor_key(&self.rows)
    }

    /// Optional sign prefix ("-", "i", "-i") for qubits, then copies separated by '|'.
    pub fn parse(text: &str, q: u32) -> Result<Self> {
        check_field(q)?;
        let mut s = text.trim();
        let mut phase = Phase::one(q);
        if q == 2 {
            for (pre, e) in [("+i", 1), ("-i", 3), ("i", 1), ("+", 0), ("-", 2)] {
                if let Some(rest) = s.strip_prefix(pre) {
                    phase = Phase::new(2, e);
                    s = rest;
                    break;
                }
            }
        }
        let mut copies = Vec::new();
        for part in s.split('|') {
            copies.push(parse_copy(part, q)?);
        }
        let n = copies[0].len() / 2;
        if n == 0 || copies.iter().any(|c| c.len() != 2 * n) {
            return Err(Error::Parse("copies must have equal, nonzero width".into()));
        }
        let rows = FMatrix::from_rows(q, &copies);
        PauliTensor::new(rows, phase)
    }

    pub fn literal(&self) -> String {
        let body: Vec<String> = self.copies().iter().map(|c| c.literal()).collect();
        let prefix = if self.q == 2 { ["", "i", "-", "-i"][self.phase.exponent() as usize].to_string() } else if self.phase.is_one() { String::new() } else { format!("{}*", self.phase) };
        format!("{prefix}{}", body.join("|"))
    }
}

pub fn tensor_key(rows: &FMatrix) -> u128 {
    let q = rows.q() as u128;
    let mut key: u128 = 0;
    for r in 0..rows.rows() {
        for c in 0..rows.cols() {
            key = key * q + rows.get(r, c) as u128;
        }
    }
    key
}

pub fn tensor_from_key(key: u128, q: u32, k: usize, n: usize) -> FMatrix {
    let mut digits = vec![0u8; k * 2 * n];
    let mut x = key;
    for d in digits.iter_mut().rev() {
        *d = (x % q as u128) as u8;
        x /= q as u128;
    }
    FMatrix::from_fn(q, k, 2 * n, |r, c| digits[r * 2 * n + c] as i64)
}

fn parse_copy(part: &str, q: u32) -> Result<Vec<u8>> {
    let mut b = Vec::new();
    if q == 2 {
        for ch in part.chars() {
            let (a, c) = match ch {
                'I' => (0, 0),
                'X' => (1, 0),
                'Y' => (1, 1),
                'Z' => (0, 1),
                _ => return Err(Error::Parse(format!("bad Pauli letter {ch:?}"))),
            };
            b.push(a);
            b.push(c);
        }
        return Ok(b);
    }
    let bytes = part.as_bytes();
    let mut i = 0;
    let number = |i: &mut usize| -> Result<u8> {
        let start = *i;
        while *i < bytes.len() && bytes[*i].is_ascii_digit() {
            *i += 1;
        }
        let s = &part[start..*i];
        let v: u32 = s.parse().map_err(|_| Error::Parse(format!("expected exponent in {part:?}")))?;
        if v >= q {
            return Err(Error::Parse(format!("exponent {v} out of range for q={q}")));
        }
        Ok(v as u8)
    };
    while i < bytes.len() {
        if bytes[i] != b'X' {
            return Err(Error::Parse(format!("expected 'X' in {part:?}")));
        }
        i += 1;
        let a = number(&mut i)?;
        if i >= bytes.len() || bytes[i] != b'Z' {
            return Err(Error::Parse(format!("expected 'Z' in {part:?}")));
        }
        i += 1;
        let c = number(&mut i)?;
        b.push(a);
        b.push(c);
    }
    Ok(b)
}

/// The factorization Q = phase * P_1^{(x) v_1} ... P_m^{(x) v_m}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub v: FMatrix,
    pub paulis: Vec<PauliString>,
    pub phase: Phase,
}

/// Ordered product over copies' factors: copy r carries prod_j P_j^{V_rj}.
/// Returns the standard rows and the accumulated phase.
pub fn recompose_rows(v: &FMatrix, paulis: &[PauliString], n: usize) -> (FMatrix, Phase) {
    let q = v.q();
    let k = v.rows();
    let mut rows = FMatrix::zeros(q, k, 2 * n);
    let mut e: i64 = 0;
    for r in 0..k {
        let mut acc = vec![0u8; 2 * n];
        for (j, p) in paulis.iter().enumerate() {
            let x = v.get(r, j);
            if x == 0 {
                continue;
            }
            let f = p.pow(x);
            e += product_exponent(&acc, &f.b, q);
            for (s, t) in acc.iter_mut().zip(&f.b) {
                *s = ((*s as u32 + *t as u32) % q) as u8;
            }
        }
        for (c, &x) in acc.iter().enumerate() {
            if x != 0 {
                rows.set(r, c, x);
            }
        }
    }
    (rows, Phase::new(q, e))
}

pub fn recompose(d: &Decomposition, n: usize) -> PauliTensor {
    let (rows, ph) = recompose_rows(&d.v, &d.paulis, n);
    PauliTensor { q: d.v.q(), n, k: d.v.rows(), rows, phase: ph.mul(d.phase) }
}

/// Factor a tensor into independent Paulis on column-echelon copy patterns.
pub fn decompose_tensor(t: &PauliTensor) -> Decomposition {
    let (ech, _) = column_echelon(&t.rows);
    let m = (0..ech.cols()).take_while(|&c| !ech.column_is_zero(c)).count();
    let v = ech.select_columns(&(0..m).collect::<Vec<_>>());
    let mut paulis = Vec::with_capacity(m);
    let mut row = 0;
    for j in 0..m {
        while v.get(row, j) == 0 {
            row += 1;
        }
        paulis.push(t.copy(row));
    }
    let (_, c) = recompose_rows(&v, &paulis, t.n);
    Decomposition { v, paulis, phase: t.phase.mul(c.inv()) }
}

/// Independent Paulis on n qudits whose graph equals `g`.
pub fn realize_graph(g: &FMatrix, n: usize) -> Result<Vec<PauliString>> {
    let q = g.q();
    let m = g.rows();
    let (t, half) = antisymmetric_canonical(g)?;
    if m > half + n {
        return Err(Error::Infeasible(format!("graph of rank {} on {m} vertices needs {} qudits, have {n}", 2 * half, m - half)));
    }
    // tuple with the standard graph: (X_i, Z_i^{-1}) pairs then Z on fresh qudits
    let mut qs: Vec<Vec<u8>> = Vec::with_capacity(m);
    for i in 0..half {
        qs.push(PauliString::single(q, n, i, 1, 0).b);
        qs.push(PauliString::single(q, n, i, 0, (q - 1) as u8).b);
    }
    for i in 0..m - 2 * half {
        qs.push(PauliString::single(q, n, half + i, 0, 1).b);
    }
    let bq = FMatrix::from_rows(q, &qs);
    // g = T^{-T} C T^{-1}, so rows T^{-T} B_Q carry graph g
    let bp = t.inverse.transpose().mul(&bq);
    Ok((0..m).map(|i| PauliString { q, n, b: bp.row(i) }).collect())
}

pub fn sample_class_member(cls: &CommClass, n: usize) -> Result<Vec<PauliString>> {
    realize_graph(&cls.g, n)
}

/// Bit strings are independent as vectors over F_q.
pub fn independent(ps: &[PauliString]) -> bool {
    if ps.is_empty() {
        return true;
    }
    let rows = FMatrix::from_rows(ps[0].q, &ps.iter().map(|p| p.b.clone()).collect::<Vec<_>>());
    rank(&rows) == ps.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        PauliTensor::parse(s, 2).unwrap().copy(0)
    }

    #[test]
    fn x_times_z_is_minus_i_y() {
        let (r, ph) = pauli_mul(&p("X"), &p("Z")).unwrap();
        assert_eq!(r, p("Y"));
        assert_eq!(ph, Phase::new(2, 3));
    }

    #[test]
    fn chi_values() {
        assert_eq!(chi(&p("X"), &p("Z")).unwrap(), Phase::new(2, 2));
        assert!(chi(&p("XZ"), &p("ZX")).unwrap().is_one());
        assert!(chi(&p("XY"), &p("II")).unwrap().is_one());
    }

    #[test]
    fn graph_examples() {
        let g = anticomm_graph(&[p("XI"), p("ZI"), p("IZ")]).unwrap();
        assert_eq!(g.to_text(), "010/100/000");
        assert_eq!(anticomm_graph(&[]).unwrap().rows(), 0);
    }

    #[test]
    fn literal_roundtrip() {
        for s in ["XX|ZI|YY", "-i|XYZ", "I|I"] {
            let t = PauliTensor::parse(s, 2);
            if let Ok(t) = t {
                assert_eq!(PauliTensor::parse(&t.literal(), 2).unwrap(), t);
            }
        }
        let t = PauliTensor::parse("X1Z2|X0Z1", 3).unwrap();
        assert_eq!(t.literal(), "X1Z2|X0Z1");
    }

    #[test]
    fn xxxx_decomposes_to_single_column() {
        let t = PauliTensor::parse("X|X|X|X", 2).unwrap();
        let d = decompose_tensor(&t);
        assert_eq!(d.v.to_text(), "1/1/1/1");
        assert_eq!(d.paulis, vec![p("X")]);
        assert!(d.phase.is_one());
        assert_eq!(recompose(&d, 1), t);
    }
}
