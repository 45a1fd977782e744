use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qorsim_core::fiber::{Band, FiberSpan, FiberSpec, SPEED_OF_LIGHT};
use qorsim_core::linalg::{fidelity, DensityMatrix};
use qorsim_core::random;
use qorsim_core::repeater::{
    entanglement_swap, memory_decay, simulate_chain_analytic, simulate_chain_mc,
    span_entanglement_attempt, teleport, MemorySpec, QorsNode, RepeaterChain,
    DEFAULT_ATTEMPT_RATE,
};

fn werner_swap(f1: f64, f2: f64) -> f64 {
    f1 * f2 + (1.0 - f1) * (1.0 - f2) / 3.0
}

fn ideal_chain(spans: Vec<FiberSpan>) -> RepeaterChain {
    RepeaterChain::uniform(spans, QorsNode::ideal(0.0), DEFAULT_ATTEMPT_RATE)
}

#[test]
fn teleporting_through_phi_plus_is_identity() {
    let mut r = ChaCha8Rng::seed_from_u64(20);
    let resource = DensityMatrix::phi_plus();
    for _ in 0..100 {
        let input = random::density_matrix(&mut r, 2);
        let out = teleport(&input, &resource).unwrap();
        assert!(out.max_abs_diff(&input) <= 1e-10);
    }
}

#[test]
fn swapping_werner_pairs_matches_closed_form() {
    let mut r = ChaCha8Rng::seed_from_u64(21);
    let node = QorsNode::ideal(0.0);
    for _ in 0..200 {
        let (f1, f2) = (r.random_range(0.25..=1.0), r.random_range(0.25..=1.0));
        let out = entanglement_swap(
            &DensityMatrix::werner(f1).unwrap(),
            &DensityMatrix::werner(f2).unwrap(),
            &node,
        )
        .unwrap();
        out.state.validate().unwrap();
        assert!((out.state.phi_plus_fidelity() - werner_swap(f1, f2)).abs() <= 1e-10);
        assert!((out.success_probability - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn swap_success_counts_readout_and_detection() {
    let mut r = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..200 {
        let mut node = QorsNode::ideal(0.0);
        node.bsm_success_prob = r.random();
        node.detector_efficiency = r.random();
        node.memory.read_efficiency = r.random();
        node.bsm_visibility_penalty = r.random_range(0.0..0.2);
        let expected = node.bsm_success_prob
            * (node.memory.read_efficiency * node.detector_efficiency).powi(2);
        let out = entanglement_swap(
            &random::density_matrix(&mut r, 4),
            &random::density_matrix(&mut r, 4),
            &node,
        )
        .unwrap();
        out.state.validate().unwrap();
        assert!((node.swap_success_probability() - expected).abs() <= 1e-12);
        assert_eq!(out.success_probability, node.bsm_success_prob);
    }
}

#[test]
fn heralded_and_stored_states_stay_valid() {
    let mut r = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..200 {
        let mut span = FiberSpan::deployed(r.random_range(0.0..120.0), FiberSpec::ndsf(), Band::O);
        span.dephasing_p = r.random_range(0.0..0.5);
        span.coexistence_noise_prob = r.random_range(0.0..1e-3);
        let memory = MemorySpec {
            coherence_time: r.random_range(1e-4..10.0),
            ..MemorySpec::default()
        };
        let attempt = span_entanglement_attempt(&span, r.random(), &memory).unwrap();
        attempt.state.validate().unwrap();
        let stored = memory_decay(&attempt.state, r.random_range(0..2), r.random_range(0.0..1.0), &memory)
            .unwrap();
        stored.validate().unwrap();
        assert!(stored.phi_plus_fidelity() <= attempt.state.phi_plus_fidelity() + 1e-12);
    }
}

#[test]
fn ideal_two_span_chain_delivers_swapped_span_states() {
    let span = FiberSpan::deployed(20.0, FiberSpec::ndsf(), Band::C);
    let chain = ideal_chain(vec![span.clone(), span.clone()]);
    let s = span_entanglement_attempt(&span, 1.0, &MemorySpec::ideal()).unwrap().state;
    let expected = entanglement_swap(&s, &s, &QorsNode::ideal(0.0)).unwrap().state;

    let mc = simulate_chain_mc(&chain, 500, 3).unwrap();
    assert!(mc.state.max_abs_diff(&expected) <= 1e-10);
    assert!((mc.werner_fidelity - expected.phi_plus_fidelity()).abs() <= 1e-10);
    assert!(mc.fidelity_stderr <= 1e-10);
}

#[test]
fn ideal_chains_match_iterated_swaps() {
    let node = QorsNode::ideal(0.0);
    for n in 2..=5 {
        let spans: Vec<FiberSpan> = (0..n)
            .map(|i| {
                let mut s = FiberSpan::deployed(10.0 + 7.0 * i as f64, FiberSpec::ndsf(), Band::O);
                s.dephasing_p = 0.02 * (i + 1) as f64;
                s
            })
            .collect();
        let states: Vec<DensityMatrix> = spans
            .iter()
            .map(|s| span_entanglement_attempt(s, 1.0, &MemorySpec::ideal()).unwrap().state)
            .collect();
        let mut end = states[0].clone();
        for s in &states[1..] {
            end = entanglement_swap(&end, s, &node).unwrap().state;
        }
        let analytic = simulate_chain_analytic(&ideal_chain(spans)).unwrap();
        assert!(
            (analytic.werner_fidelity - end.phi_plus_fidelity()).abs() <= 1e-10,
            "{n} spans: {} vs {}",
            analytic.werner_fidelity,
            end.phi_plus_fidelity()
        );
        assert!(fidelity(&analytic.state, &end).unwrap() >= 1.0 - 1e-9);
    }
}

/// One span with perfect memories: geometric attempts of period
/// `1/rate + 2·dwell`. No swaps, so nothing further to confirm.
#[test]
fn direct_rate_follows_transmittance() {
    let v = SPEED_OF_LIGHT / 1.468;
    for km in [5.0, 25.0, 60.0, 100.0] {
        let span = FiberSpan::lossy(km, FiberSpec::ndsf(), Band::C);
        let chain = ideal_chain(vec![span]);
        let eta = 10f64.powf(-0.2 * km / 10.0);
        let dwell = km * 1e3 / v;
        let period = 1.0 / DEFAULT_ATTEMPT_RATE + 2.0 * dwell;
        let expected = eta / period;

        let analytic = simulate_chain_analytic(&chain).unwrap();
        assert!((analytic.pair_rate / expected - 1.0).abs() <= 1e-10, "{km} km: {} vs {expected}", analytic.pair_rate);
        let mc = simulate_chain_mc(&chain, 20_000, 5).unwrap();
        assert!((mc.pair_rate - expected).abs() <= 4.0 * mc.pair_rate_stderr, "{km} km");
    }
}

#[test]
fn repeaters_beat_direct_transmission_beyond_200_km() {
    let node = QorsNode::default();
    for (hops, seed) in [(3, 1), (4, 2), (5, 3)] {
        let span = |km| FiberSpan::deployed(km, FiberSpec::ndsf(), Band::O);
        let total = 80.0 * hops as f64;
        let direct = RepeaterChain::uniform(vec![span(total)], node, DEFAULT_ATTEMPT_RATE);
        let relayed = RepeaterChain::uniform(vec![span(80.0); hops], node, DEFAULT_ATTEMPT_RATE);
        let d = simulate_chain_mc(&direct, 1_000, seed).unwrap();
        let r = simulate_chain_mc(&relayed, 1_000, seed).unwrap();
        assert!(total > 200.0);
        assert!(r.pair_rate > d.pair_rate, "{total} km: {} vs {}", r.pair_rate, d.pair_rate);
    }
}
