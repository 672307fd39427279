//! Bit-packed qubit monomials for the permutation-orbit tables.
//!
//! Column j of V is a k-bit mask; Lambda is kept as m row masks and every
//! column operation is applied to it by congruence, so phases never need to be
//! decoded until the end.

use std::collections::HashSet;
use std::hash::{BuildHasherDefault, Hasher};

use crate::commutant::{even_subspaces, TableRow};
use crate::error::{Error, Result};
use crate::gf::FMatrix;
use crate::monomial::Monomial;

pub const MAX_K: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BitMono {
    pub k: usize,
    pub m: usize,
    pub v: [u16; MAX_K],
    pub lam: [u16; MAX_K],
}

impl BitMono {
    pub fn from_monomial(mon: &Monomial) -> Result<BitMono> {
        if mon.q() != 2 || mon.k() > MAX_K || mon.m() > MAX_K {
            return Err(Error::TooLarge(format!("bit kernel handles q=2, k <= {MAX_K}")));
        }
        let mut b = BitMono { k: mon.k(), m: mon.m(), v: [0; MAX_K], lam: [0; MAX_K] };
        let l = mon.lambda().lam;
        for j in 0..mon.m() {
            for r in 0..mon.k() {
                if mon.v().get(r, j) == 1 {
                    b.v[j] |= 1 << r;
                }
            }
            for i in 0..mon.m() {
                if l.get(j, i) == 1 {
                    b.lam[j] |= 1 << i;
                }
            }
        }
        Ok(b)
    }

    fn m_entry(&self, i: usize, j: usize) -> bool {
        let (a, b) = if i > j { (i, j) } else { (j, i) };
        self.lam[a] >> b & 1 == 1
    }

    pub fn to_monomial(&self) -> Monomial {
        let cols: Vec<Vec<u8>> = (0..self.m).map(|j| (0..self.k).map(|r| (self.v[j] >> r & 1) as u8).collect()).collect();
        let v = FMatrix::from_columns(2, self.k, &cols);
        let ph = FMatrix::from_fn(2, self.m, self.m, |i, j| (i != j && self.m_entry(i, j)) as i64);
        Monomial::new(v, ph).expect("valid bit monomial")
    }

    /// column t += column s
    fn add_col(&mut self, t: usize, s: usize) {
        self.v[t] ^= self.v[s];
        self.lam[t] ^= self.lam[s];
        for i in 0..self.m {
            if self.lam[i] >> s & 1 == 1 {
                self.lam[i] ^= 1 << t;
            }
        }
    }

    fn swap(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        self.v.swap(i, j);
        self.lam.swap(i, j);
        for r in 0..self.m {
            let (bi, bj) = (self.lam[r] >> i & 1, self.lam[r] >> j & 1);
            if bi != bj {
                self.lam[r] ^= (1 << i) | (1 << j);
            }
        }
    }

    fn remove(&mut self, i: usize) {
        for j in i..self.m - 1 {
            self.v[j] = self.v[j + 1];
            self.lam[j] = self.lam[j + 1];
        }
        self.m -= 1;
        self.v[self.m] = 0;
        self.lam[self.m] = 0;
        let low = (1u16 << i) - 1;
        for r in 0..self.m {
            let x = self.lam[r];
            self.lam[r] = (x & low) | ((x >> 1) & !low);
        }
    }

    /// Reduced column-echelon form; returns the rank (zero columns come last).
    fn echelon(&mut self) -> usize {
        let mut p = 0;
        for r in 0..self.k {
            if p == self.m {
                break;
            }
            let Some(c) = (p..self.m).find(|&c| self.v[c] >> r & 1 == 1) else { continue };
            self.swap(p, c);
            for j in 0..self.m {
                if j != p && self.v[j] >> r & 1 == 1 {
                    self.add_col(j, p);
                }
            }
            p += 1;
        }
        p
    }

    /// Strip dependent columns; returns the d-power gained.
    pub fn reduce(&mut self) -> usize {
        let mut alpha = 0;
        loop {
            let r = self.echelon();
            if r == self.m {
                return alpha;
            }
            let z = r;
            let attached: Vec<usize> = (0..self.m).filter(|&j| j != z && self.m_entry(z, j)).collect();
            match attached.last() {
                None => {
                    self.remove(z);
                    alpha += 1;
                }
                Some(&s) => {
                    for &j in attached.iter().rev().skip(1) {
                        self.add_col(j, s);
                    }
                    let (a, b) = if z > s { (z, s) } else { (s, z) };
                    self.remove(a);
                    self.remove(b);
                }
            }
        }
    }

    /// Canonical key: m, echelon columns, strictly-lower phase bits.
    pub fn key(&self) -> u128 {
        let mut c = *self;
        c.echelon();
        let mut key: u128 = c.m as u128;
        for j in 0..c.m {
            key = (key << c.k) | c.v[j] as u128;
        }
        for i in 0..c.m {
            for j in 0..i {
                key = (key << 1) | (c.lam[i] >> j & 1) as u128;
            }
        }
        key
    }

    /// T_(a b) Omega T_(a b): exchange copies a and b.
    pub fn conjugate_swap(&self, a: usize, b: usize) -> BitMono {
        let mut o = *self;
        for j in 0..o.m {
            let x = o.v[j];
            if (x >> a & 1) != (x >> b & 1) {
                o.v[j] = x ^ ((1 << a) | (1 << b));
            }
        }
        o
    }

    /// Omega T_(a b), reduced.
    pub fn times_swap(&self, a: usize, b: usize) -> BitMono {
        let mut o = *self;
        let col: u16 = (1 << a) | (1 << b);
        let new = o.m;
        o.v[new] = col;
        o.lam[new] = 1 << new; // |v|/2 = 1 on the diagonal, no phases below
        for i in 0..new {
            if (o.v[i] & col).count_ones() % 2 == 1 {
                o.lam[i] |= 1 << new;
            }
        }
        o.m += 1;
        let alpha = o.reduce();
        debug_assert_eq!(alpha, 0);
        o
    }
}

#[derive(Default)]
pub struct KeyHasher(u64);

impl Hasher for KeyHasher {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0 ^ b as u64).wrapping_mul(0x100000001b3);
        }
    }
    fn write_u128(&mut self, x: u128) {
        let h = (x as u64) ^ ((x >> 64) as u64).wrapping_mul(0x9e3779b97f4a7c15);
        self.0 = (h ^ (h >> 29)).wrapping_mul(0xbf58476d1ce4e5b9);
        self.0 ^= self.0 >> 32;
    }
}

pub type KeySet = HashSet<u128, BuildHasherDefault<KeyHasher>>;

/// Every reduced qubit monomial on k copies, in basis order.
pub fn basis_bits(k: usize) -> Result<Vec<BitMono>> {
    if k == 0 || k > MAX_K {
        return Err(Error::UnsupportedK(k));
    }
    let mut out = Vec::new();
    for m in 0..k {
        let np = m * m.saturating_sub(1) / 2;
        for v in even_subspaces(k, m, 2) {
            let base = BitMono::from_monomial(&Monomial::new(v, FMatrix::zeros(2, m, m))?)?;
            for code in 0..(1u64 << np) {
                let mut b = base;
                // M enters both triangles of Lambda; codes are most significant first
                let mut t = np;
                for i in 0..m {
                    for j in i + 1..m {
                        t -= 1;
                        if code >> t & 1 == 1 {
                            b.lam[j] ^= 1 << i;
                            b.lam[i] ^= 1 << j;
                        }
                    }
                }
                out.push(b);
            }
        }
    }
    Ok(out)
}

/// Orbits under Omega -> T_pi Omega T_sigma, found by search with adjacent swaps.
pub fn class_table_bits(k: usize) -> Result<Vec<TableRow>> {
    Ok(class_table_located(k, &[])?.0)
}

/// The table plus, for each query monomial, the row whose orbit contains it.
pub fn class_table_located(k: usize, queries: &[Monomial]) -> Result<(Vec<TableRow>, Vec<Option<usize>>)> {
    let basis = basis_bits(k)?;
    let qkeys: Vec<u128> = queries
        .iter()
        .map(|q| BitMono::from_monomial(&q.reduce().reduced).map(|b| b.key()))
        .collect::<Result<_>>()?;
    let mut found = vec![None; queries.len()];
    let mut seen = KeySet::default();
    seen.reserve(basis.len());
    let mut rows = Vec::new();
    let mut stack = Vec::new();
    for b in &basis {
        let key = b.key();
        if !seen.insert(key) {
            continue;
        }
        let row = rows.len();
        let mut size = 0u64;
        stack.push((*b, key));
        while let Some((x, xk)) = stack.pop() {
            size += 1;
            for (i, qk) in qkeys.iter().enumerate() {
                if *qk == xk {
                    found[i] = Some(row);
                }
            }
            for a in 0..k - 1 {
                for y in [x.conjugate_swap(a, a + 1), x.times_swap(a, a + 1)] {
                    let yk = y.key();
                    if seen.insert(yk) {
                        stack.push((y, yk));
                    }
                }
            }
        }
        rows.push(TableRow { representative: b.to_monomial(), size });
    }
    if seen.len() != basis.len() {
        return Err(Error::Infeasible(format!("orbits cover {} elements, basis has {}", seen.len(), basis.len())));
    }
    Ok((rows, found))
}

/// Whether `target` lies in the orbit of `rep`.
pub fn orbit_contains(rep: &Monomial, target: &Monomial) -> Result<bool> {
    let k = rep.k();
    let goal = BitMono::from_monomial(&target.reduce().reduced)?.key();
    let start = BitMono::from_monomial(rep)?;
    let mut seen = KeySet::default();
    seen.insert(start.key());
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        if x.key() == goal {
            return Ok(true);
        }
        for a in 0..k - 1 {
            for y in [x.conjugate_swap(a, a + 1), x.times_swap(a, a + 1)] {
                if seen.insert(y.key()) {
                    stack.push(y);
                }
            }
        }
    }
    Ok(false)
}

/// Members of the orbit of `rep`, as bit monomials.
pub fn orbit_members(rep: &Monomial) -> Result<Vec<BitMono>> {
    let k = rep.k();
    let start = BitMono::from_monomial(rep)?;
    let mut seen = KeySet::default();
    seen.insert(start.key());
    let mut stack = vec![start];
    let mut out = Vec::new();
    while let Some(x) = stack.pop() {
        out.push(x);
        for a in 0..k - 1 {
            for y in [x.conjugate_swap(a, a + 1), x.times_swap(a, a + 1)] {
                if seen.insert(y.key()) {
                    stack.push(y);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_reduce_agree_with_generic() {
        let a = Monomial::primitive_on(4, &[0, 1, 2, 3]).unwrap();
        let b = Monomial::swap(4, 2, 0, 1);
        let generic = a.multiply(&b).unwrap().reduced;
        let fast = BitMono::from_monomial(&a).unwrap().times_swap(0, 1);
        assert_eq!(fast.to_monomial().key(), generic.key());
        assert_eq!(BitMono::from_monomial(&a).unwrap().to_monomial(), a);
    }
}
