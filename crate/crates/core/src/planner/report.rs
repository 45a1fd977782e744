use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::feasibility::{assess_chain, FeasibilityVerdict, Requirement, Technology};
use crate::fiber::transmittance;
use crate::qkd::qkd_from_result;
use crate::repeater::{
    simulate_chain_analytic, simulate_chain_mc, simulate_chain_mc_with_workers,
    span_entanglement_attempt, EndToEndResult, RepeaterChain,
};

use super::config::{assessment_specs, build_chain, FiberTable, RouteConfig};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// JSON Schema that every [`Report`] validates against.
pub const REPORT_SCHEMA: &str = include_str!("../../schema/report.schema.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpanRow {
    pub index: usize,
    pub length_km: f64,
    pub transmittance: f64,
    /// Fidelity of a heralded pair across the span, before memory effects.
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndToEndRow {
    pub fidelity: f64,
    pub pair_rate_hz: f64,
    pub latency_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QkdRow {
    pub qber: f64,
    pub sifted_rate_hz: f64,
    pub secret_key_rate_hz: f64,
    pub secure: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationRow {
    pub requirement: Requirement,
    pub span_index: Option<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictRow {
    pub feasible: bool,
    pub violations: Vec<ViolationRow>,
}

impl From<FeasibilityVerdict> for VerdictRow {
    fn from(v: FeasibilityVerdict) -> Self {
        Self {
            feasible: v.feasible,
            violations: v
                .violations
                .into_iter()
                .map(|v| ViolationRow {
                    requirement: v.requirement,
                    span_index: v.span_index,
                    detail: v.detail,
                })
                .collect(),
        }
    }
}

/// Analytic expectations next to the Monte Carlo uncertainty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub analytic_fidelity: f64,
    pub analytic_pair_rate_hz: f64,
    pub fidelity_stderr: f64,
    pub pair_rate_stderr_hz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub trials: u64,
    /// SHA-256 of the route and fiber table in canonical JSON.
    pub config_hash: String,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub route: String,
    pub technology: Technology,
    pub spans: Vec<SpanRow>,
    pub end_to_end: Option<EndToEndRow>,
    pub qkd: Option<QkdRow>,
    pub verdict: VerdictRow,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cross_check: Option<CrossCheck>,
    pub provenance: Provenance,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub trials: u64,
    pub seed: u64,
    /// Worker threads for the Monte Carlo; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            trials: 10_000,
            seed: 42,
            workers: None,
        }
    }
}

pub fn config_hash(route: &RouteConfig, table: &FiberTable) -> Result<String> {
    let mut h = Sha256::new();
    for part in [serde_json::to_vec(route), serde_json::to_vec(table)] {
        let bytes = part.map_err(|e| Error::Config(format!("cannot encode config: {e}")))?;
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    Ok(hex::encode(h.finalize()))
}

/// Per-span transmittance and heralded-pair fidelity.
pub fn span_table(chain: &RepeaterChain) -> Result<Vec<SpanRow>> {
    chain
        .spans
        .iter()
        .enumerate()
        .map(|(index, span)| {
            let receiver = chain.site(index);
            let attempt =
                span_entanglement_attempt(span, receiver.detector_efficiency, &receiver.memory)?;
            Ok(SpanRow {
                index,
                length_km: span.length_km,
                transmittance: transmittance(span)?,
                fidelity: attempt.state.phi_plus_fidelity(),
            })
        })
        .collect()
}

/// Monte Carlo run of a route's chain.
pub fn simulate_route(
    route: &RouteConfig,
    table: &FiberTable,
    options: &RunOptions,
) -> Result<EndToEndResult> {
    let chain = build_chain(route, table)?;
    run_mc(&chain, options)
}

fn run_mc(chain: &RepeaterChain, options: &RunOptions) -> Result<EndToEndResult> {
    match options.workers {
        Some(w) => simulate_chain_mc_with_workers(chain, options.trials, options.seed, w),
        None => simulate_chain_mc(chain, options.trials, options.seed),
    }
}

/// Feasibility for every requested technology, plus simulation, analytic
/// cross-check and key rates for the entanglement technology.
pub fn run_plan(
    route: &RouteConfig,
    table: &FiberTable,
    technologies: &[Technology],
    options: &RunOptions,
) -> Result<Vec<Report>> {
    let chain = build_chain(route, table)?;
    let specs = assessment_specs(route);
    let spans = span_table(&chain)?;
    let provenance = Provenance {
        seed: options.seed,
        trials: options.trials,
        config_hash: config_hash(route, table)?,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };

    let mut reports = Vec::with_capacity(technologies.len());
    for &technology in technologies {
        let verdict = assess_chain(&chain, technology, &specs)?;
        let mut report = Report {
            schema_version: REPORT_SCHEMA_VERSION,
            route: route.name.clone(),
            technology,
            spans: spans.clone(),
            end_to_end: None,
            qkd: None,
            verdict: verdict.into(),
            cross_check: None,
            provenance: provenance.clone(),
        };
        if technology == Technology::Entanglement {
            let mc = run_mc(&chain, options)?;
            let analytic = simulate_chain_analytic(&chain)?;
            let keys = qkd_from_result(&mc)?;
            report.end_to_end = Some(EndToEndRow {
                fidelity: mc.werner_fidelity,
                pair_rate_hz: mc.pair_rate,
                latency_s: mc.mean_latency,
            });
            report.qkd = Some(QkdRow {
                qber: keys.qber,
                sifted_rate_hz: keys.sifted_rate,
                secret_key_rate_hz: keys.secret_key_rate,
                secure: keys.secure,
            });
            report.cross_check = Some(CrossCheck {
                analytic_fidelity: analytic.werner_fidelity,
                analytic_pair_rate_hz: analytic.pair_rate,
                fidelity_stderr: mc.fidelity_stderr,
                pair_rate_stderr_hz: mc.pair_rate_stderr,
            });
        }
        report.check_finite()?;
        reports.push(report);
    }
    Ok(reports)
}

impl Report {
    fn check_finite(&self) -> Result<()> {
        let mut values: Vec<f64> = self
            .spans
            .iter()
            .flat_map(|s| [s.length_km, s.transmittance, s.fidelity])
            .collect();
        if let Some(e) = &self.end_to_end {
            values.extend([e.fidelity, e.pair_rate_hz, e.latency_s]);
        }
        if let Some(q) = &self.qkd {
            values.extend([q.qber, q.sifted_rate_hz, q.secret_key_rate_hz]);
        }
        if let Some(c) = &self.cross_check {
            values.extend([
                c.analytic_fidelity,
                c.analytic_pair_rate_hz,
                c.fidelity_stderr,
                c.pair_rate_stderr_hz,
            ]);
        }
        if values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "report for {} contains non-finite values",
                self.technology
            )))
        }
    }
}
