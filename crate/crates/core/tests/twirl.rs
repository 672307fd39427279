mod common;

use cliffcomm::commutant::{enumerate_classes, orbit_size};
use cliffcomm::dense::{exact_twirl_sum, mho_pauli_sum, PauliSum};
use common::*;
use num_complex::Complex64 as C;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn single(q: u32, n: usize, k: usize, key: u128) -> PauliSum {
    let mut s = PauliSum::new(q, n, k);
    s.add(key, C::new(1.0, 0.0));
    s
}

/// Tensor with balanced copy pattern: random balanced columns times random Paulis.
fn balanced_key<R: Rng>(rng: &mut R, q: u32, n: usize, k: usize) -> u128 {
    let m = rng.random_range(1..=3);
    let per = (q as u64).pow(2 * n as u32);
    let mut rows = vec![vec![0u8; 2 * n]; k];
    for _ in 0..m {
        let col = random_balanced_column(rng, k, q);
        let p = bits(q, n, rng.random_range(1..per));
        for r in 0..k {
            for s in 0..2 * n {
                rows[r][s] = ((rows[r][s] as u32 + col[r] as u32 * p[s] as u32) % q) as u8;
            }
        }
    }
    rows.iter().flatten().fold(0u128, |a, &d| a * q as u128 + d as u128)
}

#[test]
fn twirl_matches_orbit_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (q, n, k) in [(2u32, 1usize, 4usize), (2, 2, 3), (2, 1, 6), (3, 1, 3), (3, 1, 4)] {
        let oracle = OrbitOracle::new(q, n, k);
        let total = (q as u128).pow((2 * n * k) as u32);
        let mut nonzero = 0;
        for it in 0..50 {
            let key = if it % 2 == 0 { rng.random_range(0..total) } else { balanced_key(&mut rng, q, n, k) };
            let tw = exact_twirl_sum(&single(q, n, k, key)).unwrap();
            let want = oracle.twirl(key);
            let mut w = PauliSum::new(q, n, k);
            for (kk, c) in want {
                w.add(kk, c);
            }
            assert!(tw.max_diff(&w) < 1e-10, "q={q} n={n} k={k} key={key}");
            if !w.terms.is_empty() {
                nonzero += 1;
            }
        }
        assert!(nonzero >= 20, "only {nonzero} nonzero twirls");
    }
}

#[test]
fn mho_norms_and_orthogonality() {
    for (q, n, k) in [(2u32, 1usize, 4usize), (2, 2, 4), (3, 1, 3)] {
        let classes: Vec<_> = enumerate_classes(n, k, q, None).unwrap().collect();
        let sums: Vec<PauliSum> = classes.iter().map(|c| mho_pauli_sum(c, n).unwrap()).collect();
        let d = (q as f64).powi(n as i32);
        for i in 0..classes.len() {
            let s = orbit_size(&classes[i], n).unwrap().to_f64().unwrap();
            for j in 0..classes.len() {
                let ip = sums[i].inner(&sums[j]);
                let want = if i == j { d.powi(k as i32) / s } else { 0.0 };
                assert!((ip - want).norm() < 1e-9 * d.powi(k as i32), "{i} {j}");
            }
        }
    }
}
