mod common;

use cliffcomm::dense::{clifford_generators, dense_monomial_n1, StateVector};
use cliffcomm::magic::*;
use cliffcomm::monomial::Monomial;
use common::*;
use nalgebra::DVector;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// tr(Omega psi^{(x) k}) with Omega built from the defining sum.
fn dense_expectation(mon: &Monomial, s: &StateVector) -> C {
    let o = monomial_oracle(mon, s.n);
    let mut v = vec![C::new(1.0, 0.0)];
    for _ in 0..mon.k() {
        v = v.iter().flat_map(|a| s.amps.iter().map(move |b| a * b)).collect();
    }
    let v = DVector::from_vec(v);
    (v.adjoint() * o * &v)[(0, 0)]
}

#[test]
fn table_matches_explicit_paulis() {
    let mut r = rng(1);
    for n in 1..=3 {
        let s = StateVector::random(2, n, &mut r).unwrap();
        let t = PauliTable::new(&s).unwrap();
        let coef = state_coefficients(2, n, &s.amps);
        let d = (1 << n) as f64;
        for (x, c) in coef.iter().enumerate() {
            // bits are interleaved (a1, c1, a2, c2, ...); the table is (a << n) | c
            let b = bits(2, n, x as u64);
            let (mut a, mut cc) = (0u64, 0u64);
            for j in 0..n {
                a = (a << 1) | b[2 * j] as u64;
                cc = (cc << 1) | b[2 * j + 1] as u64;
            }
            assert!((t.get(a, cc) - c.re * d).abs() < 1e-12);
        }
    }
}

#[test]
fn monomial_expectation_matches_dense() {
    let mut r = rng(2);
    for (n, k, reps) in [(1usize, 4usize, 20), (1, 6, 10), (2, 4, 10), (2, 3, 10)] {
        for _ in 0..reps {
            let m = r.random_range(0..k.min(4));
            let mon = random_monomial(&mut r, k, m, 2);
            let s = StateVector::random(2, n, &mut r).unwrap();
            let fast = monomial_expectation(&PauliTable::new(&s).unwrap(), &mon).unwrap();
            let slow = dense_expectation(&mon, &s);
            assert!((fast - slow).norm() < 1e-10, "n={n} k={k}: {fast} vs {slow}");
        }
    }
}

#[test]
fn omega44_on_t_state() {
    let s = StateVector::t_state(1).unwrap();
    let om = Monomial::primitive_on(6, &[0, 1, 2, 3]).unwrap().concat(&Monomial::primitive_on(6, &[2, 3, 4, 5]).unwrap()).unwrap();
    let v = generalized_purity(&s, &om).unwrap();
    assert!(v > 0.0 && v < 1.0, "{v}");
    assert!((v - dense_expectation(&om, &s).re).abs() < 1e-12);
}

#[test]
fn stabilizer_states_saturate() {
    // |00> and a Bell pair (H then CNOT through the SUM generator)
    let gens = clifford_generators(2, 2).unwrap();
    let zero = StateVector::zero(2, 2).unwrap();
    let bell = zero.apply(&gens[0]).unwrap().apply(&gens[4]).unwrap();
    for s in [zero, bell] {
        for a in 2..=4 {
            assert!((stabilizer_purity(&s, a).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(bell_magic(&s).unwrap().abs() < 1e-10);
        for mon in [omega_66(), omega_triple()] {
            assert!((generalized_purity(&s, &mon).unwrap() - 1.0).abs() < 1e-10);
        }
        assert!((testing_success(&s).unwrap() - 0.5).abs() < 1e-12);
    }
}

#[test]
fn bell_magic_definition_and_bounds() {
    let mut r = rng(3);
    for n in 1..=2 {
        for _ in 0..20 {
            let s = StateVector::random(2, n, &mut r).unwrap();
            let b = bell_magic(&s).unwrap();
            let b0 = bell_magic_definition(&s).unwrap();
            assert!((b - b0).abs() < 1e-10, "{b} vs {b0}");
            let d4 = stabilizer_purity(&s, 2).unwrap();
            let d6 = stabilizer_purity(&s, 3).unwrap();
            assert!(1.0 - d4 * d4 <= b + 1e-10 && b <= 1.0 - d6 * d6 + 1e-10);
        }
    }
    let t = StateVector::t_state(1).unwrap();
    let b = bell_magic(&t).unwrap();
    assert!((1.0 - 9.0 / 16.0 - 1e-12..=1.0 - 25.0 / 64.0 + 1e-12).contains(&b));
}

#[test]
fn purity_ordering() {
    let mut r = rng(4);
    for n in 1..=2 {
        for _ in 0..50 {
            let s = StateVector::random(2, n, &mut r).unwrap();
            let (d4, d6, d8) = (stabilizer_purity(&s, 2).unwrap(), stabilizer_purity(&s, 3).unwrap(), stabilizer_purity(&s, 4).unwrap());
            assert!(d6 <= d4 + 1e-12 && d4 <= d6.powf(0.5) + 1e-12);
            assert!(d8 <= d6 + 1e-12 && d6 <= d8.powf(2.0 / 3.0) + 1e-12);
        }
    }
}

#[test]
fn clifford_invariance() {
    let mut r = rng(5);
    let gens = clifford_generators(2, 2).unwrap();
    let mons = [omega_66(), omega_triple(), Monomial::primitive_on(4, &[0, 1, 2, 3]).unwrap()];
    for _ in 0..5 {
        let s = StateVector::random(2, 2, &mut r).unwrap();
        let mut c = s.clone();
        for _ in 0..30 {
            c = c.apply(&gens[r.random_range(0..gens.len())]).unwrap();
        }
        for mon in &mons {
            assert!((generalized_purity(&s, mon).unwrap() - generalized_purity(&c, mon).unwrap()).abs() < 1e-10);
        }
    }
}

#[test]
fn triple_purity_forms_agree() {
    let mut r = rng(6);
    // dense nine-copy oracle at n = 1 (dimension 512)
    let t = StateVector::t_state(1).unwrap();
    let dense = dense_expectation(&omega_triple(), &t).re;
    assert!((triple_purity(&t).unwrap() - dense).abs() < 1e-12);
    for n in 1..=2 {
        for _ in 0..5 {
            let s = StateVector::random(2, n, &mut r).unwrap();
            let a = triple_purity(&s).unwrap();
            let b = triple_purity_table(&PauliTable::new(&s).unwrap());
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn state_orbit_reproduces_twirl() {
    let mut r = rng(7);
    for k in [4, 5] {
        let s = StateVector::random(2, 2, &mut r).unwrap();
        let so = state_orbit(&s, k).unwrap();
        assert!((so.p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let res = orbit_residual(&so, &s);
        assert!(res < 1e-8, "k={k}: residual {res}");
        let mut bad = so.clone();
        bad.p[0] += 1e-3;
        bad.p[1] -= 1e-3;
        assert!(orbit_residual(&bad, &s) > 1e-6);
    }
}

#[test]
fn state_orbit_closed_forms() {
    let mut r = rng(8);
    for n in [2usize, 3] {
        let d = (1 << n) as f64;
        let s = StateVector::random(2, n, &mut r).unwrap();
        let d4 = stabilizer_purity(&s, 2).unwrap();
        for k in [4usize, 5] {
            let so = state_orbit(&s, k).unwrap();
            let i4 = so.component_of(&Monomial::primitive_on(k, &[0, 1, 2, 3]).unwrap()).unwrap().unwrap();
            let id = so.component_of(&Monomial::identity(k, 2)).unwrap().unwrap();
            let cf = if k == 4 { closed::k4(d, d4) } else { closed::k5(d, d4) };
            assert!((so.p[id] - cf[0]).abs() < 1e-9 && (so.p[i4] - cf[1]).abs() < 1e-9, "k={k} n={n}: {:?} vs {cf:?}", so.p);
        }
    }
}

#[test]
fn dense_n1_is_used_consistently() {
    // the one-qubit blocks behind the tensor-power construction
    let m = Monomial::primitive_on(4, &[0, 1, 2, 3]).unwrap();
    let a = dense_monomial_n1(&m).unwrap();
    assert!((a.trace().re - 8.0).abs() < 1e-12);
}

fn k6_monomials() -> [Monomial; 4] {
    let o4 = Monomial::primitive_on(6, &[0, 1, 2, 3]).unwrap();
    let o6 = Monomial::primitive_on(6, &[0, 1, 2, 3, 4, 5]).unwrap();
    let o44 = o4.concat(&Monomial::primitive_on(6, &[2, 3, 4, 5]).unwrap()).unwrap();
    [Monomial::identity(6, 2), o4, o6, o44]
}

#[test]
fn k6_orbit_weights() {
    let mut r = rng(10);
    for n in [2usize, 3] {
        let d = (1 << n) as f64;
        let s = StateVector::random(2, n, &mut r).unwrap();
        let so = state_orbit(&s, 6).unwrap();
        let mons = k6_monomials();
        let ours: Vec<f64> = mons.iter().map(|m| so.p[so.component_of(m).unwrap().unwrap()]).collect();
        let (d4, d6, d44) = (stabilizer_purity(&s, 2).unwrap(), stabilizer_purity(&s, 3).unwrap(), generalized_purity(&s, &mons[3]).unwrap());
        let cf = closed::k6(d, d4, d6, d44);
        for i in 0..4 {
            assert!((ours[i] - cf[i]).abs() < 1e-9, "n={n}: {ours:?} vs {cf:?}");
        }
        // the printed vector is not normalized
        assert!((closed::k6_printed(d, d4, d6, d44).iter().sum::<f64>() - 1.0).abs() > 1e-3);
    }
}

#[test]
fn k4_trace_distance() {
    use cliffcomm::dense::{exact_twirl, haar_twirl};
    let mut r = rng(11);
    let s = StateVector::random(2, 2, &mut r).unwrap();
    let rho = s.density_power(4).unwrap();
    let diff = exact_twirl(&rho).unwrap().mat - haar_twirl(&rho).unwrap().mat;
    let herm = (&diff + diff.adjoint()) * C::new(0.5, 0.0);
    let norm: f64 = herm.symmetric_eigenvalues().iter().map(|x| x.abs()).sum();
    let d4 = stabilizer_purity(&s, 2).unwrap();
    assert!((norm - closed::k4_trace_distance(4.0, d4)).abs() < 1e-9, "{norm} d4={d4} derived={} printed={}", closed::k4_trace_distance(4.0, d4), closed::k4_trace_distance_printed(4.0, d4));
    assert!((norm - closed::k4_trace_distance_printed(4.0, d4)).abs() > 1e-3);
}

#[test]
fn triple_purity_sees_signs() {
    let mut r = rng(12);
    let flip = |t: &PauliTable, r: &mut ChaCha8Rng| {
        let v = t.vals.iter().enumerate().map(|(i, x)| if i > 0 && r.random_bool(0.5) { -x } else { *x }).collect();
        PauliTable::from_values(t.n, v).unwrap()
    };
    // one qubit: only |tr(P psi)| enters
    let t1 = PauliTable::new(&StateVector::random(2, 1, &mut r).unwrap()).unwrap();
    for _ in 0..50 {
        assert!((triple_purity_table(&flip(&t1, &mut r)) - triple_purity_table(&t1)).abs() < 1e-12);
    }
    // two qubits: some sign pattern with the same magnitudes moves it
    let t2 = PauliTable::new(&StateVector::random(2, 2, &mut r).unwrap()).unwrap();
    let base = triple_purity_table(&t2);
    let moved = (0..50).map(|_| (triple_purity_table(&flip(&t2, &mut r)) - base).abs()).fold(0.0, f64::max);
    assert!(moved > 1e-3, "{moved}");
}
