use crate::error::{Error, Result};
use crate::fiber::photon_dwell_time;
use crate::linalg::DensityMatrix;

use super::ops::{memory_decay, span_entanglement_attempt};
use super::{QorsNode, RepeaterChain};

/// Per-span generation parameters.
#[derive(Clone, Debug)]
pub(crate) struct Link {
    /// Duration of one attempt including the heralding round trip, s.
    pub period: f64,
    pub success: f64,
    /// Heralded pair after the memories waited for the herald.
    pub state: DensityMatrix,
    /// Sum of the decay rates of the two memories holding the pair, 1/s.
    pub decay_rate: f64,
    pub left_memory: super::MemorySpec,
    pub right_memory: super::MemorySpec,
}

/// Everything both engines need, derived once from a validated chain.
#[derive(Clone, Debug)]
pub(crate) struct ChainModel {
    pub links: Vec<Link>,
    pub nodes: Vec<QorsNode>,
    pub terminal: QorsNode,
    pub cutoff: f64,
    /// Time for swap outcomes to reach both endpoints, s (0 without swaps).
    pub confirmation_latency: f64,
}

impl ChainModel {
    pub fn new(chain: &RepeaterChain) -> Result<Self> {
        chain.validate()?;
        let mut links = Vec::with_capacity(chain.spans.len());
        for (k, span) in chain.spans.iter().enumerate() {
            // Source at site k+1, far photon stored at site k.
            let receiver = chain.site(k);
            let source = chain.site(k + 1);
            let attempt =
                span_entanglement_attempt(span, receiver.detector_efficiency, &receiver.memory)?;
            if !(attempt.success_probability > 0.0) {
                return Err(Error::InvalidChain(format!(
                    "span {k} can never herald a pair (success probability 0)"
                )));
            }
            let dwell = photon_dwell_time(span);
            let state = memory_decay(&attempt.state, 0, dwell, &receiver.memory)?;
            let state = memory_decay(&state, 1, 2.0 * dwell, &source.memory)?;
            links.push(Link {
                period: 1.0 / chain.attempt_rate + 2.0 * dwell,
                success: attempt.success_probability,
                state,
                decay_rate: receiver.memory.decay_rate() + source.memory.decay_rate(),
                left_memory: receiver.memory,
                right_memory: source.memory,
            });
        }

        let confirmation_latency = if chain.nodes.is_empty() {
            0.0
        } else {
            let total: f64 = chain.total_length_km();
            let mut from_a = 0.0;
            let mut worst: f64 = 0.0;
            for (k, span) in chain.spans.iter().enumerate().take(chain.nodes.len()) {
                from_a += span.length_km;
                let farthest_km = from_a.max(total - from_a);
                let velocity = chain.spans[k].fiber.group_velocity();
                worst = worst.max(farthest_km * 1e3 / velocity);
            }
            worst
        };

        Ok(Self {
            links,
            nodes: chain.nodes.clone(),
            terminal: chain.terminal,
            cutoff: chain.memory_cutoff,
            confirmation_latency,
        })
    }

    /// Probability that every swap heralds.
    pub fn swap_success(&self) -> f64 {
        self.nodes
            .iter()
            .map(QorsNode::swap_success_probability)
            .product()
    }

    /// Decay rate of the delivered pair's two endpoint memories, 1/s.
    pub fn end_decay_rate(&self) -> f64 {
        2.0 * self.terminal.memory.decay_rate()
    }
}
