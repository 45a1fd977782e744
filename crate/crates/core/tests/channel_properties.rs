use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qorsim_core::channel::{
    apply_channel, compose, dephasing_channel, depolarizing_channel, loss_channel, pauli_channel,
    rotation_unitary, sop_angle, sop_rotation_channel, KrausChannel, SopMode, RAIL_DIM,
    RAIL_VACUUM,
};
use qorsim_core::fiber::{span_channel_stack, transmittance, Band, FiberSpan, FiberSpec};
use qorsim_core::linalg::{apply_unitary, ComplexMatrix, DensityMatrix};
use qorsim_core::random;

fn random_qubit_channel(r: &mut ChaCha8Rng) -> KrausChannel {
    match r.random_range(0..4) {
        0 => {
            let w: [f64; 4] = std::array::from_fn(|_| r.random::<f64>());
            let s: f64 = w.iter().sum();
            pauli_channel(w.map(|x| x / s), "pauli").unwrap()
        }
        1 => depolarizing_channel(r.random()).unwrap(),
        2 => dephasing_channel(r.random()).unwrap(),
        _ => sop_rotation_channel(
            r.random_range(0.0..1e7),
            r.random_range(0.0..1e-6),
            SopMode::Sampled {
                axis: random::unit_axis(r),
            },
        )
        .unwrap(),
    }
}

#[test]
fn compose_matches_sequential_application() {
    let mut r = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..1000 {
        let a = random_qubit_channel(&mut r);
        let b = random_qubit_channel(&mut r);
        let rho = random::density_matrix(&mut r, 2);
        let together = apply_channel(&compose(&a, &b).unwrap(), &rho).unwrap();
        let stepwise = apply_channel(&b, &apply_channel(&a, &rho).unwrap()).unwrap();
        assert!(together.max_abs_diff(&stepwise) <= 1e-10);
        together.validate().unwrap();
    }
}

#[test]
fn rail_loss_composes_multiplicatively() {
    let mut r = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let (e1, e2): (f64, f64) = (r.random(), r.random());
        let rho = random::density_matrix(&mut r, 3);
        let two = compose(&loss_channel(e1).unwrap(), &loss_channel(e2).unwrap()).unwrap();
        let one = loss_channel(e1 * e2).unwrap();
        let a = apply_channel(&two, &rho).unwrap();
        let b = apply_channel(&one, &rho).unwrap();
        assert!(a.max_abs_diff(&b) <= 1e-12);
    }
}

/// The averaged SOP channel against an explicit average of sampled rotations
/// about uniformly random axes.
#[test]
fn averaged_sop_matches_sampled_monte_carlo() {
    let (omega, dt) = (5e6, 2e-7);
    let theta = sop_angle(omega, dt);
    let averaged = sop_rotation_channel(omega, dt, SopMode::Averaged).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(12);
    let inputs = [
        DensityMatrix::basis(2, 0).unwrap(),
        DensityMatrix::pure(&[Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]).unwrap(),
    ];
    let n = 100_000;
    for input in &inputs {
        let mut sum = ComplexMatrix::zeros(2, 2);
        let mut sum_sq = [0.0f64; 4];
        for _ in 0..n {
            let u = rotation_unitary(random::unit_axis(&mut r), theta).unwrap();
            let out = apply_unitary(input, &u).unwrap();
            for (k, z) in out.matrix().entries().iter().enumerate() {
                sum_sq[k] += z.norm_sqr();
            }
            sum = &sum + out.matrix();
        }
        let mean = sum.scale_real(1.0 / n as f64);
        let exact = apply_channel(&averaged, input).unwrap();
        for (k, (m, e)) in mean.entries().iter().zip(exact.matrix().entries()).enumerate() {
            let var = sum_sq[k] / n as f64 - m.norm_sqr();
            let se = (var.max(0.0) / n as f64).sqrt();
            assert!((m - e).norm() <= 5.0 * se + 1e-12, "entry {k}: {m} vs {e} (se {se})");
        }
    }
}

#[test]
fn span_survival_equals_transmittance() {
    let mut r = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let span = FiberSpan {
            length_km: r.random_range(0.0..150.0),
            mux_insertion_loss_db: r.random_range(0.0..2.0),
            dephasing_p: r.random_range(0.0..0.2),
            sop_drift_rate: 5e6,
            sop_recalibration_interval: r.random_range(0.0..1e-7),
            ..FiberSpan::lossy(0.0, FiberSpec::ndsf(), Band::C)
        };
        let stack = span_channel_stack(&span).unwrap();
        let eta = transmittance(&span).unwrap();
        assert!((stack.survival_probability - eta).abs() <= 1e-12);

        // Photon in a random polarization, vacuum amplitude zero.
        let q = random::pure_state_vector(&mut r, 2);
        let mut amps = vec![Complex64::new(0.0, 0.0); RAIL_DIM];
        let photon: Vec<usize> = (0..RAIL_DIM).filter(|&i| i != RAIL_VACUUM).collect();
        amps[photon[0]] = q[0];
        amps[photon[1]] = q[1];
        let out = apply_channel(&stack.rail, &DensityMatrix::pure(&amps).unwrap()).unwrap();
        let vacuum = out.matrix().entries()[RAIL_VACUUM * RAIL_DIM + RAIL_VACUUM].re;
        assert!((1.0 - vacuum - eta).abs() <= 1e-12);

        let qubit = DensityMatrix::pure(&q).unwrap();
        let heralded = stack.heralded.success_probability(&qubit).unwrap();
        assert!((heralded - eta).abs() <= 1e-12);
    }
}

proptest! {
    #[test]
    fn transmittance_decreases_with_length(a in 0.0f64..300.0, b in 0.0f64..300.0) {
        prop_assume!((a - b).abs() > 1e-6);
        let t = |l| transmittance(&FiberSpan::lossy(l, FiberSpec::ndsf(), Band::O)).unwrap();
        prop_assert_eq!(a < b, t(a) > t(b));
    }

    #[test]
    fn transmittance_decreases_with_attenuation(a in 0.01f64..1.0, b in 0.01f64..1.0) {
        prop_assume!((a - b).abs() > 1e-6);
        let t = |att: f64| {
            let mut fiber = FiberSpec::ndsf();
            fiber.attenuation_db_per_km.insert(Band::C, att);
            transmittance(&FiberSpan::lossy(50.0, fiber, Band::C)).unwrap()
        };
        prop_assert_eq!(a < b, t(a) > t(b));
    }
}
