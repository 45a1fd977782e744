use crate::channel::{apply_channel, dephasing_channel, depolarizing_channel};
use crate::error::{check_range, Error, Result};
use crate::fiber::{span_channel_stack, FiberSpan};
use crate::linalg::{
    bell_vector, embed_operator, partial_trace_matrix, BellState, ComplexMatrix, DensityMatrix,
    Tensor,
};

use super::{MemorySpec, QorsNode};

/// Outcome of heralded pair generation over one span.
#[derive(Clone, Debug)]
pub struct SpanAttempt {
    /// Probability that one attempt heralds a stored pair.
    pub success_probability: f64,
    /// State of the heralded pair (qubit 0 travelled the span).
    pub state: DensityMatrix,
}

/// Result of a Bell-state-measurement swap.
#[derive(Clone, Debug)]
pub struct SwapOutcome {
    /// Heralding probability reported by the node.
    pub success_probability: f64,
    /// Post-corrected state of the outer qubits, conditioned on success.
    pub state: DensityMatrix,
}

/// Heralding probability `write · detector · η` and the post-selected pair
/// state, mixed with `I/4` by the accidental-coincidence weight
/// `noise / (signal + noise)`.
pub fn span_entanglement_attempt(
    span: &FiberSpan,
    detector_efficiency: f64,
    memory: &MemorySpec,
) -> Result<SpanAttempt> {
    check_range("detector efficiency", detector_efficiency, 0.0, 1.0)?;
    memory.validate()?;
    let stack = span_channel_stack(span)?;
    let success_probability =
        memory.write_efficiency * detector_efficiency * stack.survival_probability;

    let travelling = stack.heralded.on_subsystem(&[2, 2], 0)?;
    let heralded = apply_channel(&travelling, &DensityMatrix::phi_plus())?;
    let noise = stack.noise_probability;
    let state = if noise > 0.0 {
        let accidental = noise / (success_probability + noise);
        heralded.mix(&DensityMatrix::maximally_mixed(4), accidental)?
    } else {
        heralded
    };
    Ok(SpanAttempt {
        success_probability,
        state,
    })
}

/// Depolarizes the stored `qubit` of a pair so that the Werner parameter
/// decays as `w · exp(−dwell / coherence_time)`.
pub fn memory_decay(
    state: &DensityMatrix,
    qubit: usize,
    dwell: f64,
    memory: &MemorySpec,
) -> Result<DensityMatrix> {
    if state.dim() != 4 || qubit > 1 {
        return Err(Error::DimensionMismatch(format!(
            "memory decay needs a two-qubit state and qubit 0 or 1, got dimension {} qubit {qubit}",
            state.dim()
        )));
    }
    if !(dwell >= 0.0) {
        return Err(Error::OutOfRange {
            name: "memory dwell time",
            value: dwell,
            range: "[0, inf]",
        });
    }
    let retained = (-dwell / memory.coherence_time).exp();
    if retained == 1.0 {
        return Ok(state.clone());
    }
    let ch = depolarizing_channel(1.0 - retained)?.on_subsystem(&[2, 2], qubit)?;
    apply_channel(&ch, state)
}

/// Bell outcomes a linear-optics analyzer can resolve.
const LINEAR_OPTICS_OUTCOMES: [BellState; 2] = [BellState::PsiPlus, BellState::PsiMinus];

/// Swaps `left = (A, n₁)` and `right = (n₂, B)` into a pair `(A, B)`.
///
/// The node qubits are dephased by the visibility penalty, projected onto
/// the resolvable Bell outcomes, and `B` receives the Pauli correction for
/// the observed outcome. The output is conditioned on a heralded outcome.
pub fn entanglement_swap(
    left: &DensityMatrix,
    right: &DensityMatrix,
    node: &QorsNode,
) -> Result<SwapOutcome> {
    if left.dim() != 4 || right.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "swap needs two two-qubit states, got dimensions {} and {}",
            left.dim(),
            right.dim()
        )));
    }
    node.validate()?;
    let dims = [2, 2, 2, 2];
    let mut joint = left.tensor(right)?;
    if node.bsm_visibility_penalty > 0.0 {
        let dephase = dephasing_channel(node.bsm_visibility_penalty)?;
        for q in [1, 2] {
            joint = apply_channel(&dephase.on_subsystem(&dims, q)?, &joint)?;
        }
    }

    let mut acc = ComplexMatrix::zeros(4, 4);
    for outcome in LINEAR_OPTICS_OUTCOMES {
        let beta = bell_vector(outcome);
        let projector = ComplexMatrix::identity(2)
            .kron(&ComplexMatrix::outer(&beta, &beta))
            .kron(&ComplexMatrix::identity(2));
        let projected = joint.matrix().conjugate_by(&projector);
        let outer = partial_trace_matrix(&projected, &dims, &[0, 3])?;
        let correction = embed_operator(&outcome.pauli(), &[2, 2], 1)?;
        acc = &acc + &outer.conjugate_by(&correction);
    }
    Ok(SwapOutcome {
        success_probability: node.bsm_success_prob,
        state: DensityMatrix::normalized(acc)?,
    })
}

/// Teleports a qubit over a shared pair `(A, B)`: full Bell measurement on
/// the input and `A`, Pauli correction on `B`, averaged over outcomes.
pub fn teleport(input: &DensityMatrix, resource: &DensityMatrix) -> Result<DensityMatrix> {
    if input.dim() != 2 || resource.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "teleportation needs a qubit and a two-qubit resource, got dimensions {} and {}",
            input.dim(),
            resource.dim()
        )));
    }
    let dims = [2, 2, 2];
    let joint = input.tensor(resource)?;
    let mut acc = ComplexMatrix::zeros(2, 2);
    for outcome in BellState::ALL {
        let beta = bell_vector(outcome);
        let projector = ComplexMatrix::outer(&beta, &beta).kron(&ComplexMatrix::identity(2));
        let projected = joint.matrix().conjugate_by(&projector);
        let far = partial_trace_matrix(&projected, &dims, &[2])?;
        acc = &acc + &far.conjugate_by(&outcome.pauli());
    }
    DensityMatrix::normalized(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::{FiberSpec, Band};
    use crate::linalg::{fidelity, C_ONE, C_I};

    #[test]
    fn attempt_examples() {
        let lossless = FiberSpan::lossy(0.0, FiberSpec::ndsf(), Band::C);
        let ideal = MemorySpec::ideal();
        let a = span_entanglement_attempt(&lossless, 1.0, &ideal).unwrap();
        assert_eq!(a.success_probability, 1.0);
        assert!(a.state.max_abs_diff(&DensityMatrix::phi_plus()) < 1e-15);

        // 3 dB span: η = 10^(-0.3) ≈ 0.501; then 0.9·0.8·η.
        let c15 = FiberSpan::lossy(15.0, FiberSpec::ndsf(), Band::C);
        let a = span_entanglement_attempt(&c15, 1.0, &ideal).unwrap();
        assert!((a.success_probability - 0.501).abs() < 1e-3);
        let mem = MemorySpec {
            write_efficiency: 0.9,
            ..ideal
        };
        let a = span_entanglement_attempt(&c15, 0.8, &mem).unwrap();
        assert!((a.success_probability - 0.72 * 10f64.powf(-0.3)).abs() < 1e-15);
    }

    #[test]
    fn attempt_with_half_transmittance() {
        // 10·log10(2) dB of pure insertion loss gives η = 0.5 exactly.
        let mut span = FiberSpan::lossy(0.0, FiberSpec::ndsf(), Band::C);
        span.mux_insertion_loss_db = 10.0 * 2f64.log10();
        let mem = MemorySpec {
            write_efficiency: 0.9,
            ..MemorySpec::ideal()
        };
        let a = span_entanglement_attempt(&span, 0.8, &mem).unwrap();
        assert!((a.success_probability - 0.36).abs() < 1e-12);
    }

    #[test]
    fn coexistence_noise_mixes_toward_identity() {
        let mut span = FiberSpan::lossy(0.0, FiberSpec::ndsf(), Band::C);
        span.coexistence_noise_prob = 1.0;
        let a = span_entanglement_attempt(&span, 1.0, &MemorySpec::ideal()).unwrap();
        // signal 1, noise 1: weight 1/2 on I/4.
        assert!((a.state.phi_plus_fidelity() - (0.5 + 0.5 * 0.25)).abs() < 1e-12);
    }

    #[test]
    fn decay_examples() {
        let mem = MemorySpec {
            coherence_time: 2.0,
            ..MemorySpec::default()
        };
        let bell = DensityMatrix::phi_plus();
        assert_eq!(memory_decay(&bell, 0, 0.0, &mem).unwrap(), bell);
        let gone = memory_decay(&bell, 1, f64::INFINITY, &mem).unwrap();
        assert!((gone.phi_plus_fidelity() - 0.25).abs() < 1e-15);
        let one_life = memory_decay(&bell, 0, 2.0, &mem).unwrap();
        let expect = (3.0 * (-1f64).exp() + 1.0) / 4.0;
        assert!((one_life.phi_plus_fidelity() - expect).abs() < 1e-12);
        assert!((expect - 0.526).abs() < 1e-3);
        assert!(memory_decay(&bell, 2, 1.0, &mem).is_err());
        assert!(memory_decay(&bell, 0, -1.0, &mem).is_err());
    }

    #[test]
    fn ideal_swap_is_perfect() {
        let node = QorsNode::ideal(0.0);
        let bell = DensityMatrix::phi_plus();
        let out = entanglement_swap(&bell, &bell, &node).unwrap();
        assert!((out.state.phi_plus_fidelity() - 1.0).abs() < 1e-12);
        assert_eq!(out.success_probability, 1.0);
        let linear = QorsNode {
            bsm_success_prob: 0.5,
            ..node
        };
        assert_eq!(entanglement_swap(&bell, &bell, &linear).unwrap().success_probability, 0.5);
    }

    #[test]
    fn swap_with_mixed_partner_is_mixed() {
        let node = QorsNode::ideal(0.0);
        let out = entanglement_swap(
            &DensityMatrix::werner(1.0).unwrap(),
            &DensityMatrix::werner(0.25).unwrap(),
            &node,
        )
        .unwrap();
        assert!((out.state.phi_plus_fidelity() - 0.25).abs() < 1e-12);
        assert!(entanglement_swap(&DensityMatrix::maximally_mixed(2), &DensityMatrix::phi_plus(), &node).is_err());
    }

    #[test]
    fn teleport_examples() {
        let psi = DensityMatrix::pure(&[C_ONE, C_I * 0.5]).unwrap();
        let out = teleport(&psi, &DensityMatrix::phi_plus()).unwrap();
        assert!((fidelity(&out, &psi).unwrap() - 1.0).abs() < 1e-10);
        let mixed = DensityMatrix::maximally_mixed(2);
        let out = teleport(&mixed, &DensityMatrix::werner(0.7).unwrap()).unwrap();
        assert!(out.max_abs_diff(&mixed) < 1e-15);
        assert!(teleport(&DensityMatrix::phi_plus(), &DensityMatrix::phi_plus()).is_err());
    }
}
