use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix};

use super::analytic::TIE_EPS;
use super::model::ChainModel;
use super::ops::{entanglement_swap, memory_decay};
use super::{EndToEndResult, RepeaterChain};

/// A trial that needs more generation rounds than this is reported as stalled.
pub const MAX_ROUNDS_PER_TRIAL: u64 = 10_000_000;

struct TrialOutcome {
    elapsed: f64,
    state: DensityMatrix,
}

/// Monte Carlo over `trials` independent end-to-end deliveries.
///
/// Trial `i` draws from its own ChaCha stream `(seed, i)`, and reductions run
/// in trial order, so the result does not depend on the worker count.
pub fn simulate_chain_mc(chain: &RepeaterChain, trials: u64, seed: u64) -> Result<EndToEndResult> {
    let model = ChainModel::new(chain)?;
    run(&model, trials, seed)
}

/// [`simulate_chain_mc`] on a dedicated pool of `workers` threads.
pub fn simulate_chain_mc_with_workers(
    chain: &RepeaterChain,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<EndToEndResult> {
    let model = ChainModel::new(chain)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run(&model, trials, seed))
}

fn run(model: &ChainModel, trials: u64, seed: u64) -> Result<EndToEndResult> {
    if trials == 0 {
        return Err(Error::Config("at least one trial is required".into()));
    }
    let samplers = model
        .links
        .iter()
        .map(|l| Geometric::new(l.success).map_err(|e| Error::InvalidChain(e.to_string())))
        .collect::<Result<Vec<_>>>()?;

    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            trial(model, &samplers, &mut rng)
        })
        .collect::<Result<_>>()?;

    let n = trials as f64;
    let mut time_sum = 0.0;
    let mut time_sq = 0.0;
    let mut fid_sum = 0.0;
    let mut fid_sq = 0.0;
    let mut state_sum = ComplexMatrix::zeros(4, 4);
    for o in &outcomes {
        let f = o.state.phi_plus_fidelity();
        time_sum += o.elapsed;
        time_sq += o.elapsed * o.elapsed;
        fid_sum += f;
        fid_sq += f * f;
        state_sum = &state_sum + o.state.matrix();
    }
    let stderr = |sum: f64, sq: f64| -> f64 {
        if trials < 2 {
            return 0.0;
        }
        let mean = sum / n;
        let var = ((sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    };
    let mean_latency = time_sum / n;
    let latency_stderr = stderr(time_sum, time_sq);
    let pair_rate = 1.0 / mean_latency;
    Ok(EndToEndResult {
        werner_fidelity: fid_sum / n,
        pair_rate,
        mean_latency,
        trials,
        fidelity_stderr: stderr(fid_sum, fid_sq),
        pair_rate_stderr: pair_rate * latency_stderr / mean_latency,
        latency_stderr,
        state: DensityMatrix::normalized(state_sum.scale_real(1.0 / n))?,
    })
}

fn trial(model: &ChainModel, samplers: &[Geometric], rng: &mut ChaCha8Rng) -> Result<TrialOutcome> {
    let mut elapsed = 0.0;
    let mut ready = vec![0.0; model.links.len()];
    // Same tie rule as the analytic sweep.
    let shortest = model.links.iter().map(|l| l.period).fold(f64::INFINITY, f64::min);
    let window = model.cutoff + TIE_EPS * shortest;
    for _ in 0..MAX_ROUNDS_PER_TRIAL {
        for ((slot, link), sampler) in ready.iter_mut().zip(&model.links).zip(samplers) {
            let attempts = 1 + sampler.sample(rng);
            *slot = attempts as f64 * link.period;
        }
        let last = ready.iter().copied().fold(f64::MIN, f64::max);
        let first = ready.iter().copied().fold(f64::MAX, f64::min);
        if last - first > window {
            elapsed += first + model.cutoff;
            continue;
        }
        elapsed += last + model.confirmation_latency;
        let swapped = model
            .nodes
            .iter()
            .all(|node| rng.random::<f64>() < node.swap_success_probability());
        if !swapped {
            continue;
        }
        return Ok(TrialOutcome {
            elapsed,
            state: deliver(model, &ready, last)?,
        });
    }
    Err(Error::Stalled(MAX_ROUNDS_PER_TRIAL))
}

/// Full density-matrix evolution of one successful round.
fn deliver(model: &ChainModel, ready: &[f64], last: f64) -> Result<DensityMatrix> {
    let mut pairs = model.links.iter().zip(ready).map(|(link, &t)| {
        let wait = last - t;
        let s = memory_decay(&link.state, 0, wait, &link.left_memory)?;
        memory_decay(&s, 1, wait, &link.right_memory)
    });
    let mut acc = pairs.next().expect("chains have at least one span")?;
    for (node, right) in model.nodes.iter().zip(pairs) {
        acc = entanglement_swap(&acc, &right?, node)?.state;
    }
    let latency = model.confirmation_latency;
    let acc = memory_decay(&acc, 0, latency, &model.terminal.memory)?;
    memory_decay(&acc, 1, latency, &model.terminal.memory)
}
