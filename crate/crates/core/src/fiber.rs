//! Physical-layer parameters of fiber spans and their channel stacks.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{
    compose, dephasing_channel, embed_in_rail, herald_on_photon, loss_channel,
    sop_rotation_channel, KrausChannel, SopMode,
};
use crate::error::{check_range, Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

pub const DEFAULT_GROUP_INDEX: f64 = 1.468;
pub const DEFAULT_COEXISTENCE_NOISE: f64 = 1e-5;
pub const DEFAULT_MUX_INSERTION_LOSS_DB: f64 = 1.0;
/// rad/s; with the default recalibration interval this leaves a residual
/// rotation of 0.05 rad.
pub const DEFAULT_SOP_DRIFT_RATE: f64 = 5e6;
pub const DEFAULT_SOP_RECALIBRATION_INTERVAL: f64 = 1e-8;
pub const DEFAULT_DEPHASING: f64 = 0.01;

/// Telecom wavelength band.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Band {
    O,
    C,
    L,
}

impl Band {
    pub fn center_wavelength_nm(self) -> f64 {
        match self {
            Band::O => 1310.0,
            Band::C => 1550.0,
            Band::L => 1590.0,
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Band::O => "O",
            Band::C => "C",
            Band::L => "L",
        };
        f.write_str(s)
    }
}

impl FromStr for Band {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "O" => Ok(Band::O),
            "C" => Ok(Band::C),
            "L" => Ok(Band::L),
            other => Err(Error::Config(format!("unknown band {other:?} (expected O, C or L)"))),
        }
    }
}

/// A fiber type and its per-band attenuation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberSpec {
    pub type_name: String,
    pub attenuation_db_per_km: BTreeMap<Band, f64>,
    #[serde(default = "default_group_index")]
    pub group_index: f64,
}

fn default_group_index() -> f64 {
    DEFAULT_GROUP_INDEX
}

impl FiberSpec {
    /// Standard single-mode fiber: 0.20 dB/km in the C band, 0.35 dB/km in the O band.
    pub fn ndsf() -> Self {
        Self {
            type_name: "NDSF".into(),
            attenuation_db_per_km: BTreeMap::from([(Band::O, 0.35), (Band::C, 0.20)]),
            group_index: DEFAULT_GROUP_INDEX,
        }
    }

    pub fn attenuation(&self, band: Band) -> Result<f64> {
        self.attenuation_db_per_km
            .get(&band)
            .copied()
            .ok_or_else(|| Error::MissingBand(band.to_string(), self.type_name.clone()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.type_name.trim().is_empty() {
            return Err(Error::Config("fiber type_name must not be empty".into()));
        }
        for (band, &a) in &self.attenuation_db_per_km {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::Config(format!(
                    "fiber {}: attenuation for band {band} must be positive, got {a}",
                    self.type_name
                )));
            }
        }
        if !(self.group_index.is_finite() && self.group_index >= 1.0) {
            return Err(Error::Config(format!(
                "fiber {}: group index must be >= 1, got {}",
                self.type_name, self.group_index
            )));
        }
        Ok(())
    }

    /// Speed of light in this fiber, m/s.
    pub fn group_velocity(&self) -> f64 {
        SPEED_OF_LIGHT / self.group_index
    }
}

/// One physical span between two sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberSpan {
    pub length_km: f64,
    pub fiber: FiberSpec,
    pub quantum_band: Band,
    /// SOP drift rate, rad/s.
    pub sop_drift_rate: f64,
    /// Time between polarization compensation events, s.
    pub sop_recalibration_interval: f64,
    pub dephasing_p: f64,
    /// Background-photon probability per detection gate from co-propagating classical channels.
    pub coexistence_noise_prob: f64,
    pub mux_insertion_loss_db: f64,
}

impl FiberSpan {
    /// A span with loss only: no drift, dephasing, coexistence noise or mux loss.
    pub fn lossy(length_km: f64, fiber: FiberSpec, quantum_band: Band) -> Self {
        Self {
            length_km,
            fiber,
            quantum_band,
            sop_drift_rate: 0.0,
            sop_recalibration_interval: 0.0,
            dephasing_p: 0.0,
            coexistence_noise_prob: 0.0,
            mux_insertion_loss_db: 0.0,
        }
    }

    /// A span with the default impairments of a deployed, shared route.
    pub fn deployed(length_km: f64, fiber: FiberSpec, quantum_band: Band) -> Self {
        Self {
            sop_drift_rate: DEFAULT_SOP_DRIFT_RATE,
            sop_recalibration_interval: DEFAULT_SOP_RECALIBRATION_INTERVAL,
            dephasing_p: DEFAULT_DEPHASING,
            coexistence_noise_prob: DEFAULT_COEXISTENCE_NOISE,
            mux_insertion_loss_db: DEFAULT_MUX_INSERTION_LOSS_DB,
            ..Self::lossy(length_km, fiber, quantum_band)
        }
    }

    pub fn validate(&self) -> Result<()> {
        // Zero-length spans are allowed so that the identity limit can be expressed.
        check_range("span length (km)", self.length_km, 0.0, f64::INFINITY)?;
        self.fiber.validate()?;
        self.fiber.attenuation(self.quantum_band)?;
        check_range("SOP drift rate", self.sop_drift_rate, 0.0, f64::INFINITY)?;
        check_range(
            "SOP recalibration interval",
            self.sop_recalibration_interval,
            0.0,
            f64::INFINITY,
        )?;
        check_range("dephasing probability", self.dephasing_p, 0.0, 1.0)?;
        check_range("coexistence noise probability", self.coexistence_noise_prob, 0.0, 1.0)?;
        check_range("mux insertion loss (dB)", self.mux_insertion_loss_db, 0.0, f64::INFINITY)?;
        Ok(())
    }

    /// Total loss in dB: fiber attenuation plus mux/demux insertion.
    pub fn loss_db(&self) -> Result<f64> {
        Ok(self.fiber.attenuation(self.quantum_band)? * self.length_km + self.mux_insertion_loss_db)
    }

    /// Accumulated SOP rotation angle between recalibrations, rad.
    pub fn sop_angle(&self) -> f64 {
        self.sop_drift_rate * self.sop_recalibration_interval
    }
}

/// `η = 10^(−loss_dB/10)`.
pub fn transmittance(span: &FiberSpan) -> Result<f64> {
    span.validate()?;
    Ok(db_to_transmittance(span.loss_db()?))
}

pub fn db_to_transmittance(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

/// One-way photon travel time through the span, s.
pub fn photon_dwell_time(span: &FiberSpan) -> f64 {
    span.length_km * 1e3 / span.fiber.group_velocity()
}

/// Per-span channels and the metadata the detection layer needs.
#[derive(Clone, Debug)]
pub struct SpanStack {
    /// Heralded qubit channel: post-selected on photon arrival, `Σ K†K = η·I`.
    pub heralded: KrausChannel,
    /// Trace-preserving channel on `{vacuum, |0⟩, |1⟩}`.
    pub rail: KrausChannel,
    /// Trace-preserving polarization channel (dephasing then averaged SOP drift).
    pub polarization: KrausChannel,
    pub survival_probability: f64,
    pub noise_probability: f64,
}

/// Dephasing, then averaged SOP drift, then loss.
pub fn span_channel_stack(span: &FiberSpan) -> Result<SpanStack> {
    let eta = transmittance(span)?;
    let polarization = compose(
        &dephasing_channel(span.dephasing_p)?,
        &sop_rotation_channel(
            span.sop_drift_rate,
            span.sop_recalibration_interval,
            SopMode::Averaged,
        )?,
    )?
    .with_label(format!("span-polarization({} km)", span.length_km));
    let rail = compose(&embed_in_rail(&polarization)?, &loss_channel(eta)?)?
        .with_label(format!("span({} km)", span.length_km));
    let heralded = herald_on_photon(&rail)?;
    Ok(SpanStack {
        heralded,
        rail,
        polarization,
        survival_probability: eta,
        noise_probability: span.coexistence_noise_prob,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::apply_channel;
    use crate::linalg::DensityMatrix;

    fn span(length_km: f64, band: Band) -> FiberSpan {
        FiberSpan::lossy(length_km, FiberSpec::ndsf(), band)
    }

    #[test]
    fn transmittance_examples() {
        let eta = transmittance(&span(15.0, Band::C)).unwrap();
        assert!((eta - 10f64.powf(-0.3)).abs() < 1e-15);
        assert!((eta - 0.501).abs() < 1e-3);
        assert_eq!(transmittance(&span(0.0, Band::C)).unwrap(), 1.0);
        let eta = transmittance(&span(100.0, Band::O)).unwrap();
        assert!((eta - 10f64.powf(-3.5)).abs() < 1e-18);
        assert!((eta - 3.162e-4).abs() < 1e-7);
    }

    #[test]
    fn missing_band_is_an_error() {
        assert!(matches!(
            transmittance(&span(1.0, Band::L)),
            Err(Error::MissingBand(_, _))
        ));
    }

    #[test]
    fn dwell_time() {
        assert_eq!(photon_dwell_time(&span(0.0, Band::O)), 0.0);
        let t100 = photon_dwell_time(&span(100.0, Band::O));
        assert!((t100 - 4.8967e-4).abs() < 1e-8);
        assert_eq!(photon_dwell_time(&span(50.0, Band::O)) * 2.0, t100);
    }

    #[test]
    fn trivial_stack_is_identity() {
        let stack = span_channel_stack(&span(0.0, Band::O)).unwrap();
        assert_eq!(stack.survival_probability, 1.0);
        for i in 0..3 {
            let b = DensityMatrix::basis(3, i).unwrap();
            assert!(apply_channel(&stack.rail, &b).unwrap().max_abs_diff(&b) < 1e-15);
        }
    }

    #[test]
    fn loss_only_stack_matches_loss_channel() {
        let s = span(40.0, Band::O);
        let eta = transmittance(&s).unwrap();
        let stack = span_channel_stack(&s).unwrap();
        let loss = loss_channel(eta).unwrap();
        for i in 0..3 {
            let b = DensityMatrix::basis(3, i).unwrap();
            let diff = apply_channel(&stack.rail, &b)
                .unwrap()
                .max_abs_diff(&apply_channel(&loss, &b).unwrap());
            assert!(diff < 1e-12);
        }
        let plus = DensityMatrix::pure(&[crate::linalg::C_ONE, crate::linalg::C_ONE]).unwrap();
        let p = stack.heralded.success_probability(&plus).unwrap();
        assert!((p - eta).abs() < 1e-12);
    }

    #[test]
    fn band_parsing() {
        assert_eq!("o".parse::<Band>().unwrap(), Band::O);
        assert!("X".parse::<Band>().is_err());
    }
}
