//! Dense matrices over a prime field F_q.
//!
//! For q = 2 every row is a run of u64 words and row operations are word XORs.
//! Other primes keep one residue per byte.

use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};

pub fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    let mut p = 2;
    while p * p <= q {
        if q.is_multiple_of(p) {
            return false;
        }
        p += 1;
    }
    true
}

/// Fields we can store: primes below 256.
pub fn check_field(q: u32) -> Result<()> {
    if q >= 256 || !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    Ok(())
}

#[inline]
pub fn inv_mod(a: u32, q: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(q));
    let mut r = 1u64;
    let mut b = (a % q) as u64;
    let mut e = q - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % q as u64;
        }
        b = b * b % q as u64;
        e >>= 1;
    }
    r as u32
}

/// Reduce a signed integer into [0, q).
#[inline]
pub fn modq(x: i64, q: u32) -> u8 {
    x.rem_euclid(q as i64) as u8
}

#[derive(Clone)]
pub struct FMatrix {
    q: u32,
    rows: usize,
    cols: usize,
    stride: usize,
    bits: Vec<u64>,
    vals: Vec<u8>,
}

impl PartialEq for FMatrix {
    fn eq(&self, o: &Self) -> bool {
        self.q == o.q && self.rows == o.rows && self.cols == o.cols && self.bits == o.bits && self.vals == o.vals
    }
}
impl Eq for FMatrix {}

impl Hash for FMatrix {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.q.hash(h);
        self.rows.hash(h);
        self.cols.hash(h);
        self.bits.hash(h);
        self.vals.hash(h);
    }
}

impl fmt::Debug for FMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FMatrix(q={}, {}x{}, \"{}\")", self.q, self.rows, self.cols, self.to_text())
    }
}

impl fmt::Display for FMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// A square invertible matrix together with its inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GLTransform {
    pub matrix: FMatrix,
    pub inverse: FMatrix,
}

impl GLTransform {
    pub fn identity(q: u32, n: usize) -> Self {
        let i = FMatrix::identity(q, n);
        GLTransform { matrix: i.clone(), inverse: i }
    }

    pub fn new(matrix: FMatrix) -> Result<Self> {
        let inverse = invert(&matrix)?;
        Ok(GLTransform { matrix, inverse })
    }

    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    pub fn compose(&self, other: &GLTransform) -> GLTransform {
        GLTransform { matrix: self.matrix.mul(&other.matrix), inverse: other.inverse.mul(&self.inverse) }
    }
}

impl FMatrix {
    pub fn zeros(q: u32, rows: usize, cols: usize) -> Self {
        assert!(check_field(q).is_ok(), "unsupported field size {q}");
        if q == 2 {
            let stride = cols.div_ceil(64);
            FMatrix { q, rows, cols, stride, bits: vec![0; rows * stride], vals: Vec::new() }
        } else {
            FMatrix { q, rows, cols, stride: 0, bits: Vec::new(), vals: vec![0; rows * cols] }
        }
    }

    pub fn identity(q: u32, n: usize) -> Self {
        let mut m = Self::zeros(q, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_fn(q: u32, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        let mut m = Self::zeros(q, rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                let v = modq(f(r, c), q);
                if v != 0 {
                    m.set(r, c, v);
                }
            }
        }
        m
    }

    pub fn from_rows(q: u32, rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_fn(q, rows.len(), cols, |r, c| rows[r][c] as i64)
    }

    /// Matrix whose j-th column is `columns[j]`.
    pub fn from_columns(q: u32, nrows: usize, columns: &[Vec<u8>]) -> Self {
        Self::from_fn(q, nrows, columns.len(), |r, c| columns[c][r] as i64)
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }
    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }
    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u8 {
        debug_assert!(r < self.rows && c < self.cols);
        if self.q == 2 {
            ((self.bits[r * self.stride + c / 64] >> (c % 64)) & 1) as u8
        } else {
            self.vals[r * self.cols + c]
        }
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u8) {
        debug_assert!(r < self.rows && c < self.cols);
        if self.q == 2 {
            let w = &mut self.bits[r * self.stride + c / 64];
            if v & 1 == 1 {
                *w |= 1 << (c % 64);
            } else {
                *w &= !(1 << (c % 64));
            }
        } else {
            self.vals[r * self.cols + c] = v % self.q as u8;
        }
    }

    /// Entries in row-major order; also the lexicographic sort key.
    pub fn entries(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.rows * self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.push(self.get(r, c));
            }
        }
        out
    }

    pub fn row(&self, r: usize) -> Vec<u8> {
        (0..self.cols).map(|c| self.get(r, c)).collect()
    }

    pub fn column(&self, c: usize) -> Vec<u8> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<u8>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&w| w == 0) && self.vals.iter().all(|&v| v == 0)
    }

    pub fn column_is_zero(&self, c: usize) -> bool {
        (0..self.rows).all(|r| self.get(r, c) == 0)
    }

    pub fn transpose(&self) -> FMatrix {
        let mut t = FMatrix::zeros(self.q, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let v = self.get(r, c);
                if v != 0 {
                    t.set(c, r, v);
                }
            }
        }
        t
    }

    pub fn mul(&self, o: &FMatrix) -> FMatrix {
        assert_eq!(self.cols, o.rows, "matrix product shape mismatch");
        assert_eq!(self.q, o.q, "matrix product field mismatch");
        let mut out = FMatrix::zeros(self.q, self.rows, o.cols);
        if self.q == 2 {
            for r in 0..self.rows {
                for k in 0..self.cols {
                    if self.get(r, k) == 1 {
                        let (dst, src) = (r * out.stride, k * o.stride);
                        for w in 0..out.stride {
                            out.bits[dst + w] ^= o.bits[src + w];
                        }
                    }
                }
            }
        } else {
            let q = self.q;
            for r in 0..self.rows {
                for k in 0..self.cols {
                    let a = self.get(r, k) as u32;
                    if a == 0 {
                        continue;
                    }
                    for c in 0..o.cols {
                        let b = o.get(k, c) as u32;
                        if b != 0 {
                            let cur = out.get(r, c) as u32;
                            out.set(r, c, ((cur + a * b) % q) as u8);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[u8]) -> Vec<u8> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|r| {
                let s: u32 = (0..self.cols).map(|c| self.get(r, c) as u32 * x[c] as u32).sum();
                (s % self.q) as u8
            })
            .collect()
    }

    pub fn add(&self, o: &FMatrix) -> FMatrix {
        assert!(self.rows == o.rows && self.cols == o.cols && self.q == o.q);
        FMatrix::from_fn(self.q, self.rows, self.cols, |r, c| self.get(r, c) as i64 + o.get(r, c) as i64)
    }

    pub fn sub(&self, o: &FMatrix) -> FMatrix {
        assert!(self.rows == o.rows && self.cols == o.cols && self.q == o.q);
        FMatrix::from_fn(self.q, self.rows, self.cols, |r, c| self.get(r, c) as i64 - o.get(r, c) as i64)
    }

    pub fn scale(&self, s: i64) -> FMatrix {
        FMatrix::from_fn(self.q, self.rows, self.cols, |r, c| self.get(r, c) as i64 * s)
    }

    pub fn neg(&self) -> FMatrix {
        self.scale(-1)
    }

    pub fn select_columns(&self, idx: &[usize]) -> FMatrix {
        FMatrix::from_fn(self.q, self.rows, idx.len(), |r, c| self.get(r, idx[c]) as i64)
    }

    /// Principal submatrix on the given index set.
    pub fn principal(&self, idx: &[usize]) -> FMatrix {
        FMatrix::from_fn(self.q, idx.len(), idx.len(), |r, c| self.get(idx[r], idx[c]) as i64)
    }

    pub fn hcat(&self, o: &FMatrix) -> FMatrix {
        assert_eq!(self.rows, o.rows);
        let w = self.cols;
        FMatrix::from_fn(self.q, self.rows, self.cols + o.cols, |r, c| {
            if c < w {
                self.get(r, c) as i64
            } else {
                o.get(r, c - w) as i64
            }
        })
    }

    pub fn block_diag(&self, o: &FMatrix) -> FMatrix {
        let (a, b) = (self.rows, self.cols);
        FMatrix::from_fn(self.q, a + o.rows, b + o.cols, |r, c| {
            if r < a && c < b {
                self.get(r, c) as i64
            } else if r >= a && c >= b {
                o.get(r - a, c - b) as i64
            } else {
                0
            }
        })
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|r| (0..r).all(|c| self.get(r, c) == self.get(c, r)))
    }

    /// Symmetric with zero diagonal (q = 2) or antisymmetric (odd q).
    pub fn is_alternating(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let q = self.q;
        for r in 0..self.rows {
            if self.get(r, r) != 0 {
                return false;
            }
            for c in 0..r {
                if !(self.get(r, c) as u32 + self.get(c, r) as u32).is_multiple_of(q) {
                    return false;
                }
            }
        }
        true
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        if self.q == 2 {
            for w in 0..self.stride {
                self.bits.swap(a * self.stride + w, b * self.stride + w);
            }
        } else {
            for c in 0..self.cols {
                self.vals.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    pub fn scale_row(&mut self, r: usize, s: u32) {
        if self.q == 2 {
            if s.is_multiple_of(2) {
                for w in 0..self.stride {
                    self.bits[r * self.stride + w] = 0;
                }
            }
            return;
        }
        let q = self.q;
        for c in 0..self.cols {
            let i = r * self.cols + c;
            self.vals[i] = ((self.vals[i] as u32 * s) % q) as u8;
        }
    }

    /// row[dst] += s * row[src]
    pub fn add_row_multiple(&mut self, dst: usize, src: usize, s: u32) {
        let s = s % self.q;
        if s == 0 {
            return;
        }
        if self.q == 2 {
            let (d, o) = (dst * self.stride, src * self.stride);
            for w in 0..self.stride {
                let v = self.bits[o + w];
                self.bits[d + w] ^= v;
            }
        } else {
            let q = self.q;
            for c in 0..self.cols {
                let v = self.vals[src * self.cols + c] as u32;
                if v != 0 {
                    let i = dst * self.cols + c;
                    self.vals[i] = ((self.vals[i] as u32 + s * v) % q) as u8;
                }
            }
        }
    }

    /// Column variant of `add_row_multiple`: col[dst] += s * col[src].
    pub fn add_col_multiple(&mut self, dst: usize, src: usize, s: u32) {
        let q = self.q;
        let s = s % q;
        if s == 0 {
            return;
        }
        for r in 0..self.rows {
            let v = self.get(r, src) as u32;
            if v != 0 {
                let cur = self.get(r, dst) as u32;
                self.set(r, dst, ((cur + s * v) % q) as u8);
            }
        }
    }

    /// Reduced row echelon form in place. Pivot search scans columns left to
    /// right and takes the first row at or below the current pivot row.
    /// `track` receives the same row operations; `dual` receives the operations
    /// of the inverse-transpose, so that if track starts at I and dual at I,
    /// afterwards dual = (track^{-1})^T.
    fn rref_in_place(&mut self, mut track: Option<&mut FMatrix>, mut dual: Option<&mut FMatrix>) -> Vec<usize> {
        let q = self.q;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c) != 0) else { continue };
            if p != r {
                self.swap_rows(p, r);
                if let Some(t) = track.as_deref_mut() {
                    t.swap_rows(p, r);
                }
                if let Some(d) = dual.as_deref_mut() {
                    d.swap_rows(p, r);
                }
            }
            let lead = self.get(r, c) as u32;
            if lead != 1 {
                let s = inv_mod(lead, q);
                self.scale_row(r, s);
                if let Some(t) = track.as_deref_mut() {
                    t.scale_row(r, s);
                }
                if let Some(d) = dual.as_deref_mut() {
                    d.scale_row(r, lead);
                }
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let e = self.get(i, c) as u32;
                if e != 0 {
                    let s = q - e;
                    self.add_row_multiple(i, r, s);
                    if let Some(t) = track.as_deref_mut() {
                        t.add_row_multiple(i, r, s);
                    }
                    // row_i += s row_r on the left  <=>  row_r -= s row_i on the dual
                    if let Some(d) = dual.as_deref_mut() {
                        d.add_row_multiple(r, i, e);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Basis of the right kernel {x : self * x = 0}, as the columns of the result.
    pub fn kernel(&self) -> FMatrix {
        let mut a = self.clone();
        let pivots = a.rref_in_place(None, None);
        let q = self.q as i64;
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = FMatrix::zeros(self.q, self.cols, free.len());
        for (j, &f) in free.iter().enumerate() {
            out.set(f, j, 1);
            for (i, &p) in pivots.iter().enumerate() {
                let v = a.get(i, f) as i64;
                if v != 0 {
                    out.set(p, j, modq(q - v, self.q));
                }
            }
        }
        out
    }

    /// Row-major digit strings separated by '/'. Column 1 is the leftmost digit.
    pub fn to_text(&self) -> String {
        let rows: Vec<String> = (0..self.rows)
            .map(|r| (0..self.cols).map(|c| digit_char(self.get(r, c))).collect())
            .collect();
        rows.join("/")
    }

    pub fn parse(text: &str, q: u32) -> Result<FMatrix> {
        check_field(q)?;
        if q > 36 {
            return Err(Error::Parse(format!("text encoding supports q <= 36, got {q}")));
        }
        if text.is_empty() {
            return Ok(FMatrix::zeros(q, 0, 0));
        }
        let mut rows = Vec::new();
        for part in text.split('/') {
            let mut row = Vec::with_capacity(part.len());
            for ch in part.chars() {
                let d = ch.to_digit(36).ok_or_else(|| Error::Parse(format!("bad digit {ch:?}")))?;
                if d >= q {
                    return Err(Error::Parse(format!("digit {ch} out of range for q={q}")));
                }
                row.push(d as u8);
            }
            rows.push(row);
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse("ragged rows".into()));
        }
        Ok(FMatrix::from_fn(q, rows.len(), cols, |r, c| rows[r][c] as i64))
    }
}

fn digit_char(d: u8) -> char {
    std::char::from_digit(d as u32, 36).unwrap()
}

/// Number of linearly independent columns.
pub fn rank(m: &FMatrix) -> usize {
    let mut a = m.clone();
    a.rref_in_place(None, None).len()
}

/// Reduced column-echelon form: echelon = m * transform.matrix.
///
/// Rows are scanned top to bottom; at each row the leftmost remaining column
/// with a nonzero entry becomes the pivot. The echelon form depends only on the
/// column space, which is what canonical gauges downstream rely on.
pub fn column_echelon(m: &FMatrix) -> (FMatrix, GLTransform) {
    let n = m.cols();
    let mut t = m.transpose();
    let mut r = FMatrix::identity(m.q(), n);
    let mut d = FMatrix::identity(m.q(), n);
    t.rref_in_place(Some(&mut r), Some(&mut d));
    // r * m^T = t  =>  m * r^T = t^T ; inverse of r^T is d
    (t.transpose(), GLTransform { matrix: r.transpose(), inverse: d })
}

pub fn invert(m: &FMatrix) -> Result<FMatrix> {
    if !m.is_square() {
        return Err(Error::BadShape(format!("invert needs a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    let mut a = m.clone();
    let mut r = FMatrix::identity(m.q(), m.rows());
    let piv = a.rref_in_place(Some(&mut r), None);
    if piv.len() < m.rows() {
        return Err(Error::SingularMatrix(format!("rank {} < {}", piv.len(), m.rows())));
    }
    Ok(r)
}

/// Congruence to the standard alternating form: transform^T g transform is a
/// direct sum of `half_rank` blocks [[0,1],[-1,0]] followed by zeros.
pub fn antisymmetric_canonical(g: &FMatrix) -> Result<(GLTransform, usize)> {
    if !g.is_alternating() {
        return Err(Error::BadShape(if g.q() == 2 {
            "expected a symmetric matrix with zero diagonal".into()
        } else {
            "expected an antisymmetric matrix".into()
        }));
    }
    let q = g.q();
    let m = g.rows();
    let form = |x: &[u8], y: &[u8]| -> u32 {
        let mut s = 0u32;
        for i in 0..m {
            if x[i] == 0 {
                continue;
            }
            for j in 0..m {
                if y[j] != 0 {
                    s = (s + x[i] as u32 * g.get(i, j) as u32 * y[j] as u32) % q;
                }
            }
        }
        s
    };
    let axpy = |z: &mut Vec<u8>, a: u32, x: &[u8]| {
        for i in 0..m {
            z[i] = ((z[i] as u32 + a * x[i] as u32) % q) as u8;
        }
    };
    let mut pool: Vec<Vec<u8>> = (0..m)
        .map(|i| {
            let mut e = vec![0u8; m];
            e[i] = 1;
            e
        })
        .collect();
    let mut pairs: Vec<Vec<u8>> = Vec::new();
    let mut radical: Vec<Vec<u8>> = Vec::new();
    while !pool.is_empty() {
        let x = pool.remove(0);
        let Some(pos) = pool.iter().position(|y| form(&x, y) != 0) else {
            radical.push(x);
            continue;
        };
        let mut y = pool.remove(pos);
        let s = inv_mod(form(&x, &y), q);
        for v in y.iter_mut() {
            *v = ((*v as u32 * s) % q) as u8;
        }
        for z in pool.iter_mut() {
            let a = form(&y, z);
            let b = (q - form(&x, z)) % q;
            let (zx, zy) = (x.clone(), y.clone());
            axpy(z, a, &zx);
            axpy(z, b, &zy);
        }
        pairs.push(x);
        pairs.push(y);
    }
    let half = pairs.len() / 2;
    pairs.extend(radical);
    let t = FMatrix::from_columns(q, m, &pairs);
    let inv = invert(&t)?;
    Ok((GLTransform { matrix: t, inverse: inv }, half))
}

/// The standard alternating form of size m with `half` hyperbolic blocks.
pub fn canonical_alternating(q: u32, m: usize, half: usize) -> FMatrix {
    let mut c = FMatrix::zeros(q, m, m);
    for i in 0..half {
        c.set(2 * i, 2 * i + 1, 1);
        c.set(2 * i + 1, 2 * i, (q - 1) as u8);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_rank_and_text() {
        let i = FMatrix::identity(2, 2);
        assert_eq!(rank(&i), 2);
        assert_eq!(i.to_text(), "10/01");
        assert_eq!(FMatrix::parse("10/01", 2).unwrap(), i);
    }

    #[test]
    fn echelon_of_swap() {
        let m = FMatrix::parse("01/10", 2).unwrap();
        let (e, t) = column_echelon(&m);
        assert_eq!(e, FMatrix::identity(2, 2));
        assert_eq!(m.mul(&t.matrix), e);
        assert_eq!(t.matrix.mul(&t.inverse), FMatrix::identity(2, 2));
    }

    #[test]
    fn kernel_is_annihilated() {
        let m = FMatrix::parse("1021/0112/1100", 3).unwrap();
        let k = m.kernel();
        assert_eq!(k.cols() + rank(&m), 4);
        assert!(m.mul(&k).is_zero());
    }

    #[test]
    fn wide_bit_rows() {
        // more than one word per row
        let m = FMatrix::from_fn(2, 3, 130, |r, c| ((r + 1) * c % 3 == 0) as i64);
        let (e, t) = column_echelon(&m);
        assert_eq!(m.mul(&t.matrix), e);
        assert_eq!(t.matrix.mul(&t.inverse), FMatrix::identity(2, 130));
    }
}
