use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qorsim_core::linalg::{apply_unitary, fidelity, partial_trace, tensor, DensityMatrix};
use qorsim_core::random;

const CASES: usize = 1000;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_state(r: &mut ChaCha8Rng, dim: usize) -> DensityMatrix {
    if r.random::<bool>() {
        random::density_matrix(r, dim)
    } else {
        random::pure_state(r, dim)
    }
}

#[test]
fn tensor_then_trace_recovers_factors() {
    let mut r = rng(1);
    for _ in 0..CASES {
        let (da, db) = (r.random_range(2..=4), r.random_range(2..=4));
        let a = random_state(&mut r, da);
        let b = random_state(&mut r, db);
        let ab = tensor(&a, &b).unwrap();
        ab.validate().unwrap();
        assert!(partial_trace(&ab, &[da, db], &[0]).unwrap().max_abs_diff(&a) <= 1e-12);
        assert!(partial_trace(&ab, &[da, db], &[1]).unwrap().max_abs_diff(&b) <= 1e-12);
    }
}

#[test]
fn partial_trace_outputs_are_states() {
    let mut r = rng(2);
    for _ in 0..CASES {
        let dims = [2, r.random_range(2..=3), 2];
        let rho = random_state(&mut r, dims.iter().product());
        let keep: &[usize] = match r.random_range(0..3) {
            0 => &[0],
            1 => &[1, 2],
            _ => &[0, 2],
        };
        let reduced = partial_trace(&rho, &dims, keep).unwrap();
        reduced.validate().unwrap();
        assert!((reduced.matrix().trace().re - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn fidelity_is_symmetric_and_bounded() {
    let mut r = rng(3);
    for _ in 0..CASES {
        let d = r.random_range(2..=6);
        let a = random_state(&mut r, d);
        let b = random_state(&mut r, d);
        let ab = fidelity(&a, &b).unwrap();
        let ba = fidelity(&b, &a).unwrap();
        assert!((ab - ba).abs() <= 1e-10, "{ab} vs {ba}");
        assert!((0.0..=1.0).contains(&ab));
    }
}

#[test]
fn fidelity_with_pure_state_is_overlap() {
    let mut r = rng(4);
    for _ in 0..CASES {
        let d = r.random_range(2..=6);
        let rho = random::density_matrix(&mut r, d);
        let psi = random::pure_state_vector(&mut r, d);
        let pure = DensityMatrix::pure(&psi).unwrap();
        let f = fidelity(&rho, &pure).unwrap();
        assert!((f - rho.expectation_pure(&psi)).abs() <= 1e-10);
    }
}

#[test]
fn unitaries_preserve_spectrum() {
    let mut r = rng(5);
    for _ in 0..CASES {
        let d = r.random_range(2..=8);
        let rho = random_state(&mut r, d);
        let u = random::unitary(&mut r, d);
        let out = apply_unitary(&rho, &u).unwrap();
        out.validate().unwrap();
        for (x, y) in rho.eigenvalues().iter().zip(out.eigenvalues()) {
            assert!((x - y).abs() <= 1e-10);
        }
    }
}

#[test]
fn werner_fidelity_parameter() {
    for f in [0.25, 0.5, 0.95, 1.0] {
        let w = DensityMatrix::werner(f).unwrap();
        assert!((fidelity(&w, &DensityMatrix::phi_plus()).unwrap() - f).abs() <= 1e-10);
        assert!(partial_trace(&w, &[2, 2], &[0])
            .unwrap()
            .max_abs_diff(&DensityMatrix::maximally_mixed(2))
            <= 1e-15);
    }
}
