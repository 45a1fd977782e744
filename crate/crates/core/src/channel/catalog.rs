//! Channel constructors for the fiber degradation catalog.

use num_complex::Complex64;

use crate::error::{check_range, Error, Result};
use crate::linalg::{ComplexMatrix, C_I, C_ONE};

use super::kraus::KrausChannel;

/// Index of the vacuum level in the dual-rail space `{vacuum, |0⟩, |1⟩}`.
pub const RAIL_VACUUM: usize = 0;
pub const RAIL_DIM: usize = 3;

fn paulis() -> [ComplexMatrix; 4] {
    [
        ComplexMatrix::identity(2),
        ComplexMatrix::pauli_x(),
        ComplexMatrix::pauli_y(),
        ComplexMatrix::pauli_z(),
    ]
}

/// Qubit Pauli channel with probabilities `[p_I, p_X, p_Y, p_Z]`.
pub fn pauli_channel(weights: [f64; 4], label: impl Into<String>) -> Result<KrausChannel> {
    for &w in &weights {
        check_range("pauli weight", w, 0.0, 1.0)?;
    }
    let ops = paulis()
        .into_iter()
        .zip(weights)
        .filter(|&(_, w)| w > 0.0)
        .map(|(p, w)| p.scale_real(w.sqrt()))
        .collect();
    KrausChannel::new(ops, label)
}

/// `{√(1−3p/4)·I, √(p/4)·X, √(p/4)·Y, √(p/4)·Z}`.
pub fn depolarizing_channel(p: f64) -> Result<KrausChannel> {
    check_range("depolarizing probability", p, 0.0, 1.0)?;
    let q = p / 4.0;
    pauli_channel([1.0 - 3.0 * q, q, q, q], format!("depolarize({p})"))
}

/// `{√(1−p)·I, √p·Z}`: coherences shrink by `1 − 2p`.
pub fn dephasing_channel(p: f64) -> Result<KrausChannel> {
    check_range("dephasing probability", p, 0.0, 1.0)?;
    pauli_channel([1.0 - p, 0.0, 0.0, p], format!("dephase({p})"))
}

/// How the polarization rotation accumulated between recalibrations is treated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SopMode {
    /// A single rotation about the given axis (normalized internally).
    Sampled { axis: [f64; 3] },
    /// Average over uniformly random rotation axes at the fixed angle.
    Averaged,
}

/// Rotation angle accumulated by drift at `omega` rad/s over `delta_t` s.
pub fn sop_angle(omega: f64, delta_t: f64) -> f64 {
    omega * delta_t
}

/// `exp(−i θ/2 n̂·σ⃗)`.
pub fn rotation_unitary(axis: [f64; 3], angle: f64) -> Result<ComplexMatrix> {
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InvalidChannel(format!(
            "rotation axis {axis:?} has no direction"
        )));
    }
    let [_, x, y, z] = paulis();
    let generator = &(&x.scale_real(axis[0] / norm) + &y.scale_real(axis[1] / norm))
        + &z.scale_real(axis[2] / norm);
    let (s, c) = (angle / 2.0).sin_cos();
    Ok(&ComplexMatrix::identity(2).scale_real(c) + &generator.scale(-C_I * s))
}

/// Polarization drift channel at angle `θ = omega·delta_t`.
///
/// The averaged mode is the Pauli channel `cos²(θ/2)·ρ + sin²(θ/2)/3 · Σ σ ρ σ`,
/// i.e. a depolarizing channel whose Φ⁺ fidelity is `cos²(θ/2)`. Its
/// depolarizing parameter `4/3·sin²(θ/2)` may exceed 1.
pub fn sop_rotation_channel(omega: f64, delta_t: f64, mode: SopMode) -> Result<KrausChannel> {
    check_range("SOP drift rate", omega, 0.0, f64::INFINITY)?;
    check_range("SOP exposure time", delta_t, 0.0, f64::INFINITY)?;
    let theta = sop_angle(omega, delta_t);
    match mode {
        SopMode::Sampled { axis } => KrausChannel::new(
            vec![rotation_unitary(axis, theta)?],
            format!("sop-rotation({theta})"),
        ),
        SopMode::Averaged => {
            let (s, c) = (theta / 2.0).sin_cos();
            let flip = s * s / 3.0;
            pauli_channel([c * c, flip, flip, flip], format!("sop-averaged({theta})"))
        }
    }
}

/// Erasure-style photon loss on `{vacuum, |0⟩, |1⟩}`: the photon survives with
/// probability `eta`, otherwise the state is replaced by vacuum.
pub fn loss_channel(eta: f64) -> Result<KrausChannel> {
    check_range("transmittance", eta, 0.0, 1.0)?;
    let keep = Complex64::new(eta.sqrt(), 0.0);
    let lost = (1.0 - eta).sqrt();
    let mut ops = vec![ComplexMatrix::diagonal(&[C_ONE, keep, keep])];
    if lost > 0.0 {
        for level in 1..RAIL_DIM {
            let mut k = ComplexMatrix::zeros(RAIL_DIM, RAIL_DIM);
            k[(RAIL_VACUUM, level)] = Complex64::new(lost, 0.0);
            ops.push(k);
        }
    }
    KrausChannel::new(ops, format!("loss({eta})"))
}

/// Extends a qubit channel to `{vacuum, |0⟩, |1⟩}`, leaving vacuum untouched.
pub fn embed_in_rail(ch: &KrausChannel) -> Result<KrausChannel> {
    if ch.in_dim() != 2 || ch.out_dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "{} is not a qubit channel",
            ch.label()
        )));
    }
    let ops = ch
        .operators()
        .iter()
        .enumerate()
        .map(|(i, k)| {
            let mut e = ComplexMatrix::zeros(RAIL_DIM, RAIL_DIM);
            if i == 0 {
                e[(RAIL_VACUUM, RAIL_VACUUM)] = C_ONE;
            }
            for r in 0..2 {
                for c in 0..2 {
                    e[(r + 1, c + 1)] = k[(r, c)];
                }
            }
            e
        })
        .collect();
    if ch.is_heralded() {
        KrausChannel::new_heralded(ops, format!("rail[{}]", ch.label()))
    } else {
        KrausChannel::new(ops, format!("rail[{}]", ch.label()))
    }
}

/// Post-selects a rail channel on photon survival, giving a heralded qubit channel.
pub fn herald_on_photon(ch: &KrausChannel) -> Result<KrausChannel> {
    if ch.in_dim() != RAIL_DIM || ch.out_dim() != RAIL_DIM {
        return Err(Error::DimensionMismatch(format!(
            "{} is not a rail channel",
            ch.label()
        )));
    }
    let ops: Vec<ComplexMatrix> = ch
        .operators()
        .iter()
        .map(|k| {
            let mut q = ComplexMatrix::zeros(2, 2);
            for r in 0..2 {
                for c in 0..2 {
                    q[(r, c)] = k[(r + 1, c + 1)];
                }
            }
            q
        })
        .filter(|q| q.max_abs() > 0.0)
        .collect();
    if ops.is_empty() {
        return KrausChannel::new_heralded(vec![ComplexMatrix::zeros(2, 2)], "never-heralded");
    }
    KrausChannel::new_heralded(ops, format!("herald[{}]", ch.label()))
}
