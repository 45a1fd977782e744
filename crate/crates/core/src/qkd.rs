//! BBM92 key-rate estimates from delivered pair states.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix, C_ONE, C_ZERO};
use crate::repeater::EndToEndResult;

/// Fraction of detected pairs kept after basis reconciliation.
pub const SIFTING_RATIO: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QkdMetrics {
    pub qber: f64,
    pub sifted_rate: f64,
    pub secret_key_rate: f64,
    pub secure: bool,
}

/// Probability that the two parties' outcomes differ when both measure in
/// the basis whose eigenvectors are `basis`.
fn disagreement(rho: &DensityMatrix, basis: [[num_complex::Complex64; 2]; 2]) -> f64 {
    let mut p = 0.0;
    for (a, b) in [(0, 1), (1, 0)] {
        let v = ComplexMatrix::from_row_major(2, 1, basis[a].to_vec())
            .expect("2-vector")
            .kron(&ComplexMatrix::from_row_major(2, 1, basis[b].to_vec()).expect("2-vector"));
        let amps: Vec<_> = (0..4).map(|i| v[(i, 0)]).collect();
        p += rho.expectation_pure(&amps);
    }
    p
}

/// Error rate of a sifted BBM92 key: the state's Z⊗Z and X⊗X error
/// probabilities averaged, then diluted by uncorrelated background clicks.
pub fn qber_from_state(rho: &DensityMatrix, noise_prob: f64, signal_prob: f64) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "QBER needs a two-qubit state, got dimension {}",
            rho.dim()
        )));
    }
    check_range("noise probability", noise_prob, 0.0, 1.0)?;
    if !(signal_prob > 0.0 && signal_prob <= 1.0) {
        return Err(Error::OutOfRange {
            name: "signal probability",
            value: signal_prob,
            range: "(0, 1]",
        });
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = [[C_ONE, C_ZERO], [C_ZERO, C_ONE]];
    let x = [
        [C_ONE * h, C_ONE * h],
        [C_ONE * h, -C_ONE * h],
    ];
    let state_qber = 0.5 * (disagreement(rho, z) + disagreement(rho, x));
    Ok((state_qber * signal_prob + 0.5 * noise_prob) / (signal_prob + noise_prob))
}

/// `h₂(q)` in bits.
pub fn binary_entropy(q: f64) -> f64 {
    if q <= 0.0 || q >= 1.0 {
        0.0
    } else {
        -q * q.log2() - (1.0 - q) * (1.0 - q).log2()
    }
}

/// Asymptotic BBM92 secret fraction `max(0, 1 − 2 h₂(q))`.
pub fn secret_fraction(q: f64) -> f64 {
    (1.0 - 2.0 * binary_entropy(q)).max(0.0)
}

/// The error rate at which the secret fraction reaches zero (≈ 0.110).
pub fn qber_threshold() -> f64 {
    static ROOT: OnceLock<f64> = OnceLock::new();
    *ROOT.get_or_init(|| {
        let (mut lo, mut hi) = (0.0f64, 0.5f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if 1.0 - 2.0 * binary_entropy(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    })
}

pub fn bbm92_key_rate(q: f64, sifted_rate: f64) -> Result<QkdMetrics> {
    check_range("QBER", q, 0.0, 0.5)?;
    check_range("sifted rate", sifted_rate, 0.0, f64::MAX)?;
    let r = if q >= qber_threshold() { 0.0 } else { secret_fraction(q) };
    let secret_key_rate = sifted_rate * r;
    Ok(QkdMetrics {
        qber: q,
        sifted_rate,
        secret_key_rate,
        secure: secret_key_rate > 0.0,
    })
}

/// Key metrics for a simulated link. Background clicks are already part of
/// the delivered state, so no extra noise is mixed in here.
pub fn qkd_from_result(result: &EndToEndResult) -> Result<QkdMetrics> {
    let q = qber_from_state(&result.state, 0.0, 1.0)?.clamp(0.0, 0.5);
    bbm92_key_rate(q, result.pair_rate * SIFTING_RATIO)
}
