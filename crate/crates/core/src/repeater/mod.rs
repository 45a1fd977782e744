//! Entanglement distribution over a chain of repeater nodes.
//!
//! Each span is bridged by a heralded pair source at its right-hand site:
//! the near photon goes into local memory, the far photon crosses the span
//! and is written into the memory of the left-hand site. Once every span
//! holds a pair, the nodes perform Bell-state measurements left to right and
//! the endpoints receive the outcomes over classical channels.
//!
//! Two engines share this model: [`simulate_chain_mc`] samples it trial by
//! trial with full density matrices, and [`simulate_chain_analytic`] computes
//! the same expectations in closed form on Bell-diagonal weights.

mod analytic;
mod bell;
mod mc;
mod model;
mod ops;

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::fiber::FiberSpan;
use crate::linalg::DensityMatrix;

pub use analytic::{round_statistics, simulate_chain_analytic, LinkTiming, RoundStatistics};
pub use bell::BellDiagonal;
pub use mc::{simulate_chain_mc, simulate_chain_mc_with_workers, MAX_ROUNDS_PER_TRIAL};
pub use ops::{
    entanglement_swap, memory_decay, span_entanglement_attempt, teleport, SpanAttempt, SwapOutcome,
};

/// Quantum memory parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemorySpec {
    /// 1/e decay time of the Werner parameter, s.
    pub coherence_time: f64,
    pub write_efficiency: f64,
    pub read_efficiency: f64,
    pub cryogenic_required: bool,
}

impl Default for MemorySpec {
    fn default() -> Self {
        Self {
            coherence_time: 1.0,
            write_efficiency: 0.9,
            read_efficiency: 0.9,
            cryogenic_required: false,
        }
    }
}

impl MemorySpec {
    pub fn ideal() -> Self {
        Self {
            coherence_time: f64::INFINITY,
            write_efficiency: 1.0,
            read_efficiency: 1.0,
            cryogenic_required: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coherence_time > 0.0) {
            return Err(Error::OutOfRange {
                name: "memory coherence time",
                value: self.coherence_time,
                range: "(0, inf]",
            });
        }
        check_range("memory write efficiency", self.write_efficiency, 0.0, 1.0)?;
        check_range("memory read efficiency", self.read_efficiency, 0.0, 1.0)
    }

    /// Werner-parameter decay rate, 1/s.
    pub fn decay_rate(&self) -> f64 {
        1.0 / self.coherence_time
    }
}

/// Device descriptor for a repeater site (also used for the endpoints).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QorsNode {
    pub memory: MemorySpec,
    /// Heralding probability of the Bell-state measurement itself.
    pub bsm_success_prob: f64,
    /// Dephasing probability applied to each measured qubit before the BSM.
    pub bsm_visibility_penalty: f64,
    pub detector_efficiency: f64,
    pub position_km: f64,
}

impl Default for QorsNode {
    fn default() -> Self {
        Self {
            memory: MemorySpec::default(),
            bsm_success_prob: 0.5,
            bsm_visibility_penalty: 0.01,
            detector_efficiency: 0.9,
            position_km: 0.0,
        }
    }
}

impl QorsNode {
    pub fn ideal(position_km: f64) -> Self {
        Self {
            memory: MemorySpec::ideal(),
            bsm_success_prob: 1.0,
            bsm_visibility_penalty: 0.0,
            detector_efficiency: 1.0,
            position_km,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.memory.validate()?;
        check_range("BSM success probability", self.bsm_success_prob, 0.0, 1.0)?;
        check_range("BSM visibility penalty", self.bsm_visibility_penalty, 0.0, 1.0)?;
        check_range("detector efficiency", self.detector_efficiency, 0.0, 1.0)?;
        check_range("node position (km)", self.position_km, 0.0, f64::INFINITY)
    }

    /// Probability that a swap at this node heralds: both memories read out,
    /// both photons detected, and the BSM itself succeeds.
    pub fn swap_success_probability(&self) -> f64 {
        let readout = self.memory.read_efficiency * self.detector_efficiency;
        self.bsm_success_prob * readout * readout
    }
}

/// Spans, intermediate nodes and the endpoint devices of one link.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepeaterChain {
    pub spans: Vec<FiberSpan>,
    /// One per span boundary: `nodes.len() == spans.len() - 1`.
    pub nodes: Vec<QorsNode>,
    /// Memory and detector used at both endpoint sites.
    pub terminal: QorsNode,
    /// Pair-source attempt rate, Hz.
    pub attempt_rate: f64,
    /// Longest time a stored pair may wait before the round is restarted, s.
    pub memory_cutoff: f64,
}

/// Pair-source attempt rate used when a route does not set one, Hz.
pub const DEFAULT_ATTEMPT_RATE: f64 = 1e6;

impl RepeaterChain {
    /// Places a copy of `device` at every site, positioned by cumulative span
    /// length, with the memory cutoff equal to the coherence time.
    pub fn uniform(spans: Vec<FiberSpan>, device: QorsNode, attempt_rate: f64) -> Self {
        let mut position = 0.0;
        let nodes = spans
            .iter()
            .take(spans.len().saturating_sub(1))
            .map(|span| {
                position += span.length_km;
                QorsNode {
                    position_km: position,
                    ..device
                }
            })
            .collect();
        Self {
            spans,
            nodes,
            terminal: device,
            attempt_rate,
            memory_cutoff: device.memory.coherence_time,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.spans.is_empty() {
            return Err(Error::InvalidChain("a chain needs at least one span".into()));
        }
        if self.nodes.len() + 1 != self.spans.len() {
            return Err(Error::InvalidChain(format!(
                "{} spans need {} nodes, got {}",
                self.spans.len(),
                self.spans.len() - 1,
                self.nodes.len()
            )));
        }
        for (i, span) in self.spans.iter().enumerate() {
            span.validate()
                .map_err(|e| Error::InvalidChain(format!("span {i}: {e}")))?;
        }
        for (i, node) in self.nodes.iter().enumerate() {
            node.validate()
                .map_err(|e| Error::InvalidChain(format!("node {i}: {e}")))?;
        }
        if self
            .nodes
            .windows(2)
            .any(|w| w[1].position_km < w[0].position_km)
        {
            return Err(Error::InvalidChain("node positions must be nondecreasing".into()));
        }
        self.terminal.validate()?;
        if !(self.attempt_rate > 0.0 && self.attempt_rate.is_finite()) {
            return Err(Error::InvalidChain(format!(
                "attempt rate must be positive, got {}",
                self.attempt_rate
            )));
        }
        if !(self.memory_cutoff > 0.0) {
            return Err(Error::InvalidChain(format!(
                "memory cutoff must be positive, got {}",
                self.memory_cutoff
            )));
        }
        Ok(())
    }

    pub fn total_length_km(&self) -> f64 {
        self.spans.iter().map(|s| s.length_km).sum()
    }

    /// Device at site `index` (0 and `spans.len()` are the endpoints).
    pub fn site(&self, index: usize) -> &QorsNode {
        if index == 0 || index == self.spans.len() {
            &self.terminal
        } else {
            &self.nodes[index - 1]
        }
    }
}

/// Summary of an end-to-end simulation.
#[derive(Clone, Debug, Serialize)]
pub struct EndToEndResult {
    /// Mean fidelity of delivered pairs to Φ⁺.
    pub werner_fidelity: f64,
    /// Delivered pairs per second.
    pub pair_rate: f64,
    /// Mean time to deliver one pair, s.
    pub mean_latency: f64,
    /// Monte Carlo trials (0 for the analytic engine).
    pub trials: u64,
    pub fidelity_stderr: f64,
    pub pair_rate_stderr: f64,
    pub latency_stderr: f64,
    /// Average delivered state.
    #[serde(skip_serializing)]
    pub state: DensityMatrix,
}
