mod common;

use cliffcomm::dense::{dense_monomial, dense_monomial_direct, monomial_coefficients_n1};
use cliffcomm::gf::{invert, FMatrix, GLTransform};
use common::*;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_gl<R: Rng>(rng: &mut R, m: usize, q: u32) -> GLTransform {
    loop {
        let a = FMatrix::from_fn(q, m, m, |_, _| rng.random_range(0..q) as i64);
        if let Ok(inv) = invert(&a) {
            return GLTransform { matrix: a, inverse: inv };
        }
    }
}

#[test]
fn dense_monomial_matches_defining_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for q in [2u32, 3] {
        for _ in 0..10 {
            let k = rng.random_range(2..=4);
            let m = rng.random_range(0..=3);
            let mon = random_monomial(&mut rng, k, m, q);
            let a = dense_monomial(&mon, 1).unwrap();
            let b = monomial_oracle(&mon, 1);
            assert!(max_diff(&a.mat, &b) < 1e-10, "q={q} {}", mon.to_json());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..5 {
        let mon = random_monomial(&mut rng, 3, 2, 2);
        let a = dense_monomial(&mon, 2).unwrap();
        let b = dense_monomial_direct(&mon, 2).unwrap();
        assert!(max_diff(&a.mat, &b.mat) < 1e-10);
        assert!(max_diff(&a.mat, &monomial_oracle(&mon, 2)) < 1e-10);
    }
}

#[test]
fn gl_moves_preserve_operator() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for q in [2u32, 3, 5] {
        for _ in 0..40 {
            let k = rng.random_range(2..=if q == 5 { 3 } else { 4 });
            let m = rng.random_range(1..=3);
            let mon = random_monomial(&mut rng, k, m, q);
            let a = random_gl(&mut rng, m, q);
            let moved = mon.apply_gl(&a).unwrap();
            let d0 = monomial_oracle(&mon, 1);
            let d1 = monomial_oracle(&moved, 1);
            assert!(max_diff(&d0, &d1) < 1e-10, "q={q} {} -> {}", mon.to_json(), moved.to_json());
        }
    }
}

#[test]
fn reduction_and_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for q in [2u32, 3] {
        for _ in 0..40 {
            let k = rng.random_range(2..=4);
            let m = rng.random_range(1..=4);
            let mon = random_monomial(&mut rng, k, m, q);
            let r = mon.reduce();
            let d0 = monomial_oracle(&mon, 1);
            let d1 = monomial_oracle(&r.reduced, 1) * C::new((q as f64).powi(r.dpower as i32), 0.0);
            assert!(max_diff(&d0, &d1) < 1e-9, "q={q} {}", mon.to_json());
            let tr = d0.trace();
            assert!((tr.re - (q as f64).powi(mon.trace_exponent() as i32)).abs() < 1e-9 && tr.im.abs() < 1e-9);
            let dg = monomial_oracle(&mon.dagger(), 1);
            assert!(max_diff(&dg, &d0.adjoint()) < 1e-10);
        }
    }
}

#[test]
fn coefficients_match_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for q in [2u32, 3] {
        for _ in 0..10 {
            let mon = random_monomial(&mut rng, 3, 2, q);
            let c = monomial_coefficients_n1(&mon);
            let mut acc = nalgebra::DMatrix::zeros(mon.k().pow(0) * (q as usize).pow(3), (q as usize).pow(3));
            for (key, v) in c {
                let b = bits(q, 3, key as u64);
                acc += weyl_string(q, &b) * v;
            }
            assert!(max_diff(&acc, &monomial_oracle(&mon, 1)) < 1e-10);
        }
    }
}

#[test]
fn normal_form_factorizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for q in [2u32, 3] {
        for _ in 0..30 {
            let k = rng.random_range(2..=4);
            let m = rng.random_range(1..=3);
            let mon = random_monomial(&mut rng, k, m, q).reduce().reduced;
            let nf = mon.normal_form();
            let prod = monomial_oracle(&nf.projective, 1) * monomial_oracle(&nf.unitary, 1);
            assert!(max_diff(&prod, &monomial_oracle(&mon, 1)) < 1e-9, "q={q} {}", mon.to_json());
            let u = monomial_oracle(&nf.unitary, 1);
            let id = nalgebra::DMatrix::<C>::identity(u.nrows(), u.ncols());
            assert!(max_diff(&(u.adjoint() * &u), &id) < 1e-9);
        }
    }
}
