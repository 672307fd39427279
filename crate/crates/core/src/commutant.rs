//! Basis classes [V, G] of the commutant, counting, Gram and Weingarten matrices.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gf::{check_field, column_echelon, rank, FMatrix, GLTransform};
use crate::monomial::Monomial;
use crate::pauli::{product_exponent, recompose_rows, sigma, Phase, PauliString, PauliTensor};

/// Gauge class [V, G]: V is k x m in column-echelon form with balanced
/// columns, G is the m x m commutation graph of the underlying Pauli tuple.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CommClass {
    pub k: usize,
    pub q: u32,
    pub v: FMatrix,
    pub g: FMatrix,
}

fn balanced_columns(v: &FMatrix) -> bool {
    (0..v.cols()).all(|j| (0..v.rows()).map(|r| v.get(r, j) as u32).sum::<u32>() % v.q() == 0)
}

impl CommClass {
    /// Validate and move (V, G) into the canonical gauge.
    pub fn new(v: FMatrix, g: FMatrix) -> Result<CommClass> {
        let q = v.q();
        check_field(q)?;
        let m = v.cols();
        if g.q() != q || g.rows() != m || g.cols() != m {
            return Err(Error::ShapeMismatch(format!("V has {m} columns, G is {}x{}", g.rows(), g.cols())));
        }
        if !g.is_alternating() {
            return Err(Error::BadShape("G must be alternating".into()));
        }
        if !balanced_columns(&v) {
            return Err(Error::OddColumn("every column of V must sum to 0 mod q".into()));
        }
        if rank(&v) != m {
            return Err(Error::SingularMatrix("V must have full column rank".into()));
        }
        let (_, t) = column_echelon(&v);
        Ok(CommClass::gauge(v, g, &t))
    }

    /// (V, G) -> (V A, A^{-1} G A^{-T}).
    pub fn gauge(v: FMatrix, g: FMatrix, a: &GLTransform) -> CommClass {
        let v2 = v.mul(&a.matrix);
        let g2 = a.inverse.mul(&g).mul(&a.inverse.transpose());
        CommClass { k: v2.rows(), q: v2.q(), v: v2, g: g2 }
    }

    pub fn m(&self) -> usize {
        self.v.cols()
    }

    pub fn graph_rank(&self) -> usize {
        rank(&self.g)
    }

    pub fn admissible(&self, n: usize) -> bool {
        self.graph_rank() + 2 * n >= 2 * self.m()
    }

    pub fn to_json(&self) -> Value {
        let vcols: Vec<String> = self.v.columns().iter().map(|c| digits(c)).collect();
        let mut o = json!({"k": self.k, "m": self.m(), "V": vcols, "G": self.g.to_text()});
        if self.q != 2 {
            o["q"] = json!(self.q);
        }
        o
    }

    pub fn from_json(val: &Value) -> Result<CommClass> {
        let bad = |s: &str| Error::Parse(s.to_string());
        let k = val.get("k").and_then(Value::as_u64).ok_or_else(|| bad("missing k"))? as usize;
        let q = val.get("q").and_then(Value::as_u64).unwrap_or(2);
        if q > 36 {
            return Err(Error::NotPrime(q.min(u32::MAX as u64) as u32));
        }
        let q = q as u32;
        check_field(q)?;
        let vs = val.get("V").and_then(Value::as_array).ok_or_else(|| bad("missing V"))?;
        let mut cols = Vec::new();
        for c in vs {
            let s = c.as_str().ok_or_else(|| bad("V entries must be strings"))?;
            let col: Vec<u8> = s.chars().map(|ch| ch.to_digit(36).filter(|&d| d < q).map(|d| d as u8)).collect::<Option<_>>().ok_or_else(|| bad("bad digit in V"))?;
            if col.len() != k {
                return Err(Error::ShapeMismatch(format!("V column of length {} with k={k}", col.len())));
            }
            cols.push(col);
        }
        let m = cols.len();
        if let Some(mm) = val.get("m").and_then(Value::as_u64) {
            if mm as usize != m {
                return Err(Error::ShapeMismatch(format!("m={mm} but V has {m} columns")));
            }
        }
        let gtxt = val.get("G").and_then(Value::as_str).unwrap_or("");
        let g = if m == 0 { FMatrix::zeros(q, 0, 0) } else { FMatrix::parse(gtxt, q)? };
        CommClass::new(FMatrix::from_columns(q, k, &cols), g)
    }

    pub fn parse(text: &str) -> Result<CommClass> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        CommClass::from_json(&v)
    }
}

fn digits(c: &[u8]) -> String {
    c.iter().map(|&d| std::char::from_digit(d as u32, 36).unwrap()).collect()
}

// ---------------------------------------------------------------- counting

fn qpow(q: u32, e: usize) -> BigUint {
    BigUint::from(q).pow(e as u32)
}

/// Number of m-dimensional subspaces of F_q^n.
pub fn gaussian_binomial(n: usize, m: usize, q: u32) -> BigUint {
    if m > n {
        return BigUint::zero();
    }
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..m {
        num *= qpow(q, n - i) - 1u32;
        den *= qpow(q, i + 1) - 1u32;
    }
    num / den
}

/// Number of m x m alternating matrices over F_q of rank 2r.
pub fn alternating_count(m: usize, r: usize, q: u32) -> BigUint {
    if 2 * r > m {
        return BigUint::zero();
    }
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 1..=r {
        num *= qpow(q, 2 * i - 2);
        den *= qpow(q, 2 * i) - 1u32;
    }
    for i in 0..2 * r {
        num *= qpow(q, m - i) - 1u32;
    }
    num / den
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountReport {
    pub n: usize,
    pub k: usize,
    pub q: u32,
    /// (m, r, number of classes with order m and graph rank 2r)
    pub counts: Vec<(usize, usize, BigUint)>,
    pub total: BigUint,
}

impl CountReport {
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self.counts.iter().map(|(m, r, c)| json!({"m": m, "r": r, "count": c.to_string()})).collect();
        json!({"n": self.n, "k": self.k, "q": self.q, "counts": rows, "total": self.total.to_string()})
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("m,r,count\n");
        for (m, r, c) in &self.counts {
            s.push_str(&format!("{m},{r},{c}\n"));
        }
        s.push_str(&format!("total,,{}\n", self.total));
        s
    }
}

pub fn dimension(n: usize, k: usize, q: u32) -> Result<CountReport> {
    check_field(q)?;
    let mut counts = Vec::new();
    let mut total = BigUint::zero();
    for m in 0..k.max(1) {
        let subspaces = gaussian_binomial(k.saturating_sub(1), m, q);
        for r in m.saturating_sub(n)..=m / 2 {
            let c = &subspaces * alternating_count(m, r, q);
            total += &c;
            counts.push((m, r, c));
        }
    }
    Ok(CountReport { n, k, q, counts, total })
}

/// prod_{i=0}^{k-2} (2^i + 1), the qubit dimension once n >= k - 1.
pub fn closed_form_dimension(k: usize) -> BigUint {
    let mut p = BigUint::one();
    for i in 0..k.saturating_sub(1) {
        p *= qpow(2, i) + 1u32;
    }
    p
}

/// Number of ordered independent Pauli m-tuples on n qudits whose graph is G.
pub fn orbit_size(cls: &CommClass, n: usize) -> Result<BigUint> {
    let q = cls.q;
    let m = cls.m();
    let r = cls.graph_rank() / 2;
    if !cls.admissible(n) {
        return Err(Error::Infeasible(format!("graph rank {} < 2(m - n) = {}", 2 * r, 2 * (m as i64 - n as i64))));
    }
    let mut s = BigUint::one();
    for i in 0..r {
        let e = 2 * (n - i);
        s *= (qpow(q, e) - 1u32) * qpow(q, e - 1);
    }
    let (mp, np) = (m - 2 * r, n - r);
    for i in 0..mp {
        s *= qpow(q, 2 * np - i) - qpow(q, i);
    }
    Ok(s)
}

// ------------------------------------------------------------- enumeration

/// Balanced m-dimensional subspaces of F_q^k as canonical k x m matrices,
/// sorted lexicographically by their entries.
pub fn even_subspaces(k: usize, m: usize, q: u32) -> Vec<FMatrix> {
    if k == 0 || m > k - 1 {
        return if m == 0 { vec![FMatrix::zeros(q, k, 0)] } else { vec![] };
    }
    let kk = k - 1;
    let mut out = Vec::new();
    // row-reduced bases of F_q^{k-1}: pivot sets, then free entries
    for piv in combinations(kk, m) {
        let mut free = Vec::new();
        for (i, &p) in piv.iter().enumerate() {
            for c in p + 1..kk {
                if !piv.contains(&c) {
                    free.push((i, c));
                }
            }
        }
        let total = (q as u64).pow(free.len() as u32);
        for code in 0..total {
            let mut basis = vec![vec![0u8; k]; m];
            let mut x = code;
            for &(i, c) in &free {
                basis[i][c] = (x % q as u64) as u8;
                x /= q as u64;
            }
            for (i, &p) in piv.iter().enumerate() {
                basis[i][p] = 1;
            }
            for b in basis.iter_mut() {
                let s: u32 = b[..kk].iter().map(|&d| d as u32).sum();
                b[kk] = ((q - s % q) % q) as u8;
            }
            let v = FMatrix::from_columns(q, k, &basis);
            out.push(column_echelon(&v).0);
        }
    }
    out.sort_by_key(|v| v.entries());
    out
}

fn combinations(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, m, cur, out);
            cur.pop();
        }
    }
    rec(0, n, m, &mut cur, &mut out);
    out
}

/// Alternating m x m matrix from its strictly-upper entries in row-major order,
/// most significant first.
fn graph_from_code(q: u32, m: usize, mut code: u64) -> FMatrix {
    let np = m * m.saturating_sub(1) / 2;
    let mut ups = vec![0u8; np];
    for d in ups.iter_mut().rev() {
        *d = (code % q as u64) as u8;
        code /= q as u64;
    }
    let mut g = FMatrix::zeros(q, m, m);
    let mut t = 0;
    for i in 0..m {
        for j in i + 1..m {
            let x = ups[t];
            t += 1;
            if x != 0 {
                g.set(i, j, x);
                g.set(j, i, ((q - x as u32) % q) as u8);
            }
        }
    }
    g
}

/// Rank of a symmetric 0/1 matrix given by strictly-upper bits (qubits only).
fn bit_graph_rank(m: usize, code: u64) -> usize {
    let np = m * m.saturating_sub(1) / 2;
    let mut rows = [0u32; 32];
    let mut t = 0;
    for i in 0..m {
        for j in i + 1..m {
            if (code >> (np - 1 - t)) & 1 == 1 {
                rows[i] |= 1 << j;
                rows[j] |= 1 << i;
            }
            t += 1;
        }
    }
    let mut r = 0;
    for bit in 0..m {
        let Some(p) = (r..m).find(|&i| rows[i] >> bit & 1 == 1) else { continue };
        rows.swap(r, p);
        let piv = rows[r];
        for (i, row) in rows.iter_mut().enumerate().take(m) {
            if i != r && *row >> bit & 1 == 1 {
                *row ^= piv;
            }
        }
        r += 1;
    }
    r
}

/// Lazy stream of admissible classes in the documented order.
pub struct ClassIter {
    n: usize,
    k: usize,
    q: u32,
    shard: (usize, usize),
    m: usize,
    vs: Vec<FMatrix>,
    vpos: usize,
    global_v: usize,
    gcode: u64,
    gtotal: u64,
}

impl ClassIter {
    fn load(&mut self) {
        self.vs = even_subspaces(self.k, self.m, self.q);
        self.vpos = 0;
        self.gcode = 0;
        let np = self.m * self.m.saturating_sub(1) / 2;
        self.gtotal = (self.q as u64).pow(np as u32);
    }

    /// Global index of the V-subspace of the class last returned.
    pub fn v_index(&self) -> usize {
        self.global_v
    }
}

impl Iterator for ClassIter {
    type Item = CommClass;

    fn next(&mut self) -> Option<CommClass> {
        loop {
            if self.m >= self.k.max(1) {
                return None;
            }
            if self.vpos >= self.vs.len() {
                self.m += 1;
                if self.m >= self.k.max(1) {
                    return None;
                }
                self.load();
                continue;
            }
            if self.global_v % self.shard.1 != self.shard.0 || self.gcode >= self.gtotal {
                self.vpos += 1;
                self.global_v += 1;
                self.gcode = 0;
                continue;
            }
            let code = self.gcode;
            self.gcode += 1;
            let m = self.m;
            let need = 2 * m.saturating_sub(self.n);
            let ok = if self.q == 2 { bit_graph_rank(m, code) >= need } else { rank(&graph_from_code(self.q, m, code)) >= need };
            if ok {
                return Some(CommClass { k: self.k, q: self.q, v: self.vs[self.vpos].clone(), g: graph_from_code(self.q, m, code) });
            }
        }
    }
}

/// Classes [V, G] admissible at n, m ascending, then V in sorted order, then G.
/// `shard = (i, count)` keeps the V-subspaces whose global index is i mod count.
pub fn enumerate_classes(n: usize, k: usize, q: u32, shard: Option<(usize, usize)>) -> Result<ClassIter> {
    check_field(q)?;
    let shard = shard.unwrap_or((0, 1));
    if shard.1 == 0 || shard.0 >= shard.1 {
        return Err(Error::IndexOutOfRange(format!("shard {}/{}", shard.0, shard.1)));
    }
    let mut it = ClassIter { n, k, q, shard, m: 0, vs: vec![], vpos: 0, global_v: 0, gcode: 0, gtotal: 1 };
    it.load();
    Ok(it)
}

/// The reduced monomials Omega(V, M): canonical V, every alternating M.
pub fn monomial_basis(k: usize, q: u32) -> Result<Vec<Monomial>> {
    check_field(q)?;
    let mut out = Vec::new();
    for m in 0..k.max(1) {
        let np = m * m.saturating_sub(1) / 2;
        let gt = (q as u64).pow(np as u32);
        for v in even_subspaces(k, m, q) {
            for code in 0..gt {
                out.push(Monomial::new(v.clone(), graph_from_code(q, m, code))?);
            }
        }
    }
    Ok(out)
}

// ------------------------------------------------------------ mho terms

/// Iterates over the ordered independent tuples of the class at n qudits,
/// yielding (Q_t, phi(t)) with Q_t the phase-free tensor and
/// phi(t) = conj(tr(A_1 ... A_k) / d) for Q_t = A_1 (x) ... (x) A_k.
pub struct MhoTerms {
    cls: CommClass,
    n: usize,
    total: u64,
    idx: Vec<u64>,
    started: bool,
    done: bool,
}

/// mho_I([V, G]) = (1/|S|) sum_t phi(t) Q_t.
pub struct MhoDescription {
    pub norm: BigUint,
    pub terms: MhoTerms,
}

pub fn mho_coefficients(cls: &CommClass, n: usize) -> Result<MhoDescription> {
    let norm = orbit_size(cls, n)?;
    let total = (cls.q as u64).checked_pow(2 * n as u32).ok_or_else(|| Error::TooLarge(format!("n={n}")))?;
    Ok(MhoDescription { norm, terms: MhoTerms { cls: cls.clone(), n, total, idx: vec![], started: false, done: false } })
}

fn pauli_from_index(q: u32, n: usize, mut x: u64) -> Vec<u8> {
    let mut b = vec![0u8; 2 * n];
    for d in b.iter_mut().rev() {
        *d = (x % q as u64) as u8;
        x /= q as u64;
    }
    b
}

/// conj of tr(A_1 ... A_k)/d for a balanced tensor, as a tau power.
pub fn cyclic_phase(rows: &FMatrix) -> Phase {
    let q = rows.q();
    let mut acc = vec![0u8; rows.cols()];
    let mut e = 0i64;
    for r in 0..rows.rows() {
        let row = rows.row(r);
        e += product_exponent(&acc, &row, q);
        for (a, b) in acc.iter_mut().zip(&row) {
            *a = ((*a as u32 + *b as u32) % q) as u8;
        }
    }
    debug_assert!(acc.iter().all(|&x| x == 0));
    Phase::new(q, -e)
}

impl MhoTerms {
    fn bump(&mut self) -> bool {
        while let Some(last) = self.idx.last_mut() {
            *last += 1;
            if *last < self.total {
                return true;
            }
            self.idx.pop();
        }
        false
    }

    fn valid_last(&self) -> bool {
        let q = self.cls.q;
        let l = self.idx.len() - 1;
        let b = pauli_from_index(q, self.n, self.idx[l]);
        for i in 0..l {
            let bi = pauli_from_index(q, self.n, self.idx[i]);
            if sigma(&bi, &b, q) != self.cls.g.get(i, l) {
                return false;
            }
        }
        let rows: Vec<Vec<u8>> = self.idx.iter().map(|&x| pauli_from_index(q, self.n, x)).collect();
        rank(&FMatrix::from_rows(q, &rows)) == rows.len()
    }

    fn emit(&self) -> (PauliTensor, Phase) {
        let q = self.cls.q;
        let ps: Vec<PauliString> = self.idx.iter().map(|&x| PauliString { q, n: self.n, b: pauli_from_index(q, self.n, x) }).collect();
        let (rows, _) = recompose_rows(&self.cls.v, &ps, self.n);
        let phi = cyclic_phase(&rows);
        (PauliTensor::new(rows, Phase::one(q)).expect("even width"), phi)
    }
}

impl Iterator for MhoTerms {
    type Item = (PauliTensor, Phase);

    fn next(&mut self) -> Option<(PauliTensor, Phase)> {
        if self.done {
            return None;
        }
        let m = self.cls.m();
        if m == 0 {
            self.done = true;
            let q = self.cls.q;
            return Some((PauliTensor::new(FMatrix::zeros(q, self.cls.k, 2 * self.n), Phase::one(q)).ok()?, Phase::one(q)));
        }
        if !self.started {
            self.started = true;
            self.idx.push(1);
        } else if !self.bump() {
            self.done = true;
            return None;
        }
        loop {
            if self.valid_last() {
                if self.idx.len() == m {
                    return Some(self.emit());
                }
                self.idx.push(1);
                continue;
            }
            if !self.bump() {
                self.done = true;
                return None;
            }
        }
    }
}

// ---------------------------------------------------------------- Fourier

/// mho(V, G) = d^{-m} sum over all tuples (dependent ones included) whose
/// graph is G of prod_j P_j^{(x) v_j}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GraphMonomial {
    pub v: FMatrix,
    pub g: FMatrix,
}

fn alternating_all(q: u32, m: usize) -> impl Iterator<Item = FMatrix> {
    let np = m * m.saturating_sub(1) / 2;
    (0..(q as u64).pow(np as u32)).map(move |c| graph_from_code(q, m, c))
}

fn pairing(a: &FMatrix, b: &FMatrix) -> i64 {
    let m = a.rows();
    let mut s = 0i64;
    for i in 0..m {
        for j in i + 1..m {
            s += a.get(i, j) as i64 * b.get(i, j) as i64;
        }
    }
    s
}

/// Omega(V, M) = sum_G omega^{sum_{i<j} M_ij G_ij} mho(V, G).
pub fn fourier(mon: &Monomial) -> Vec<(GraphMonomial, Phase)> {
    let q = mon.q();
    alternating_all(q, mon.m())
        .map(|g| {
            let ph = Phase::omega(q, pairing(mon.phases(), &g));
            (GraphMonomial { v: mon.v().clone(), g }, ph)
        })
        .collect()
}

/// mho(V, G) = q^{-m(m-1)/2} sum_M omega^{-sum_{i<j} M_ij G_ij} Omega(V, M).
pub fn inverse_fourier(v: &FMatrix, g: &FMatrix) -> Result<Vec<(Monomial, Complex64)>> {
    let q = v.q();
    let m = v.cols();
    let np = m * m.saturating_sub(1) / 2;
    let scale = (q as f64).powi(-(np as i32));
    alternating_all(q, m)
        .map(|mm| {
            let c = Phase::omega(q, -pairing(&mm, g)).to_complex() * scale;
            Ok((Monomial::new(v.clone(), mm)?, c))
        })
        .collect()
}

// ------------------------------------------------------ Gram and Weingarten

/// W_{a,b} = tr(a^dagger b) = d^{exps[a][b]}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramMatrix {
    pub n: usize,
    pub k: usize,
    pub q: u32,
    pub basis: Vec<Monomial>,
    pub exps: Vec<Vec<i64>>,
}

pub fn gram(n: usize, k: usize, q: u32, basis: &[Monomial]) -> Result<GramMatrix> {
    for b in basis {
        if b.k() != k || b.q() != q {
            return Err(Error::ShapeMismatch(format!("basis element on (k={}, q={}), expected (k={k}, q={q})", b.k(), b.q())));
        }
        if !b.is_reduced() {
            return Err(Error::BadShape("gram basis must be reduced".into()));
        }
    }
    let daggers: Vec<Monomial> = basis.iter().map(|b| b.dagger()).collect();
    let mut exps = vec![vec![0i64; basis.len()]; basis.len()];
    for i in 0..basis.len() {
        for j in i..basis.len() {
            let e = daggers[i].concat(&basis[j])?.trace_exponent();
            exps[i][j] = e;
            exps[j][i] = e;
        }
    }
    Ok(GramMatrix { n, k, q, basis: basis.to_vec(), exps })
}

impl GramMatrix {
    /// Entries divided by d^k, evaluated at d = q^n.
    pub fn scaled(&self, n: usize) -> DMatrix<f64> {
        let d = (self.q as f64).powi(n as i32);
        let b = self.basis.len();
        DMatrix::from_fn(b, b, |i, j| d.powi((self.exps[i][j] - self.k as i64) as i32))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n, "k": self.k, "q": self.q,
            "basis": self.basis.iter().map(|b| b.to_json()).collect::<Vec<_>>(),
            "d_exponents": self.exps,
        })
    }
}

#[derive(Clone, Debug)]
pub struct WeingartenMatrix {
    pub n: usize,
    pub basis: Vec<Monomial>,
    pub entries: DMatrix<f64>,
    pub pseudo_inverse: bool,
    pub condition: f64,
    pub ill_conditioned: bool,
}

pub const PINV_RTOL: f64 = 1e-12;
pub const COND_WARN: f64 = 1e12;

/// (Pseudo-)inverse of the Gram matrix at d = q^n.
pub fn weingarten(g: &GramMatrix, n: usize) -> WeingartenMatrix {
    let d = (g.q as f64).powi(n as i32);
    let s = g.scaled(n);
    let b = s.nrows();
    let (inv, cond) = if b == 0 {
        (DMatrix::zeros(0, 0), 1.0)
    } else {
        let svd = s.svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let cut = PINV_RTOL * smax;
        let u = svd.u.unwrap();
        let vt = svd.v_t.unwrap();
        let sinv = DMatrix::from_diagonal(&svd.singular_values.map(|x| if x > cut { 1.0 / x } else { 0.0 }));
        (vt.transpose() * sinv * u.transpose(), smax / smin)
    };
    let entries = inv / d.powi(g.k as i32);
    WeingartenMatrix {
        n,
        basis: g.basis.clone(),
        entries,
        pseudo_inverse: g.k > n + 1,
        condition: cond,
        ill_conditioned: !(cond < COND_WARN),
    }
}

impl WeingartenMatrix {
    pub fn to_json(&self) -> Value {
        let b = self.entries.nrows();
        let rows: Vec<Vec<f64>> = (0..b).map(|i| (0..b).map(|j| self.entries[(i, j)]).collect()).collect();
        json!({
            "n": self.n,
            "basis": self.basis.iter().map(|m| m.to_json()).collect::<Vec<_>>(),
            "pseudo_inverse": self.pseudo_inverse,
            "condition": self.condition,
            "ill_conditioned": self.ill_conditioned,
            "entries": rows,
        })
    }
}

// ------------------------------------------------------------ class tables

#[derive(Clone, Debug)]
pub struct TableRow {
    pub representative: Monomial,
    pub size: u64,
}

/// Two-sided permutation orbits T_pi Omega T_sigma of the reduced qubit monomials.
pub fn class_table(k: usize) -> Result<Vec<TableRow>> {
    if k < 2 {
        return Err(Error::UnsupportedK(k));
    }
    if k <= crate::fastmono::MAX_K {
        return crate::fastmono::class_table_bits(k);
    }
    class_table_generic(k)
}

/// Same orbits computed with the general monomial arithmetic (slow).
pub fn class_table_generic(k: usize) -> Result<Vec<TableRow>> {
    if k < 2 {
        return Err(Error::UnsupportedK(k));
    }
    let basis = monomial_basis(k, 2)?;
    let index: HashMap<_, usize> = basis.iter().enumerate().map(|(i, b)| (b.key(), i)).collect();
    let swaps: Vec<Monomial> = (0..k - 1).map(|i| Monomial::swap(k, 2, i, i + 1)).collect();
    let mut seen = vec![false; basis.len()];
    let mut rows = Vec::new();
    for start in 0..basis.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut size = 0u64;
        while let Some(i) = stack.pop() {
            size += 1;
            let b = &basis[i];
            let mut nbrs = Vec::with_capacity(2 * (k - 1));
            for (a, t) in swaps.iter().enumerate() {
                // conjugation permutes rows; right multiplication by the swap
                let mut p: Vec<usize> = (0..k).collect();
                p.swap(a, a + 1);
                nbrs.push(permute_rows(b, &p));
                nbrs.push(b.multiply(t)?.reduced);
            }
            for nb in nbrs {
                let j = *index.get(&nb.key()).ok_or_else(|| Error::Infeasible("orbit left the basis".into()))?;
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        rows.push(TableRow { representative: basis[start].clone(), size });
    }
    Ok(rows)
}

fn permute_rows(m: &Monomial, p: &[usize]) -> Monomial {
    let v = m.v();
    let v2 = FMatrix::from_fn(v.q(), v.rows(), v.cols(), |r, c| v.get(p[r], c) as i64);
    Monomial::new(v2, m.phases().clone()).expect("row permutation keeps validity")
}

/// Total of a table as a plain integer.
pub fn table_total(rows: &[TableRow]) -> u64 {
    rows.iter().map(|r| r.size).sum()
}

pub fn biguint_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_rank_matches_generic() {
        for m in 0usize..=6 {
            let np = m * m.saturating_sub(1) / 2;
            for code in 0..(1u64 << np) {
                assert_eq!(bit_graph_rank(m, code), rank(&graph_from_code(2, m, code)), "m={m} code={code}");
            }
        }
    }

    #[test]
    fn small_dimensions() {
        assert_eq!(dimension(3, 4, 2).unwrap().total, BigUint::from(30u32));
        assert_eq!(dimension(1, 1, 2).unwrap().total, BigUint::from(1u32));
        assert_eq!(dimension(1, 2, 2).unwrap().total, BigUint::from(2u32));
    }

    #[test]
    fn orbit_sizes() {
        let v = FMatrix::parse("1/1", 2).unwrap();
        let c = CommClass::new(v, FMatrix::zeros(2, 1, 1)).unwrap();
        assert_eq!(orbit_size(&c, 1).unwrap(), BigUint::from(3u32));
        assert_eq!(orbit_size(&c, 2).unwrap(), BigUint::from(15u32));
        assert_eq!(mho_coefficients(&c, 2).unwrap().terms.count(), 15);
    }

    #[test]
    fn class_json_roundtrip() {
        let c = CommClass::parse(r#"{"k":6,"m":2,"V":["111100","001111"],"G":"01/10"}"#).unwrap();
        assert_eq!(CommClass::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn enumeration_matches_count_k4() {
        for n in 1..=3 {
            let c = enumerate_classes(n, 4, 2, None).unwrap().count();
            assert_eq!(BigUint::from(c), dimension(n, 4, 2).unwrap().total);
        }
    }
}
