//! Deployment feasibility of repeater technologies against the route
//! requirements:
//!
//! * R1: quantum and classical traffic share the fiber (coexistence).
//! * R2: the technology bridges every span of the route.
//! * R3: only existing sites are used.
//! * R4: no cryogenic facilities.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::repeater::RepeaterChain;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Technology {
    /// Memory-based repeaters with entanglement swapping.
    Entanglement,
    /// Error-correcting repeaters without memories.
    OneWay,
}

impl Technology {
    pub const ALL: [Technology; 2] = [Technology::Entanglement, Technology::OneWay];

    pub fn as_str(self) -> &'static str {
        match self {
            Technology::Entanglement => "entanglement",
            Technology::OneWay => "one_way",
        }
    }
}

impl fmt::Display for Technology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Technology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "entanglement" => Ok(Technology::Entanglement),
            "oneway" | "one_way" | "one-way" => Ok(Technology::OneWay),
            other => Err(Error::Config(format!("unknown technology {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Requirement {
    R1,
    R2,
    R3,
    R4,
}

impl Requirement {
    pub fn summary(self) -> &'static str {
        match self {
            Requirement::R1 => "coexistence with classical traffic on the same fiber",
            Requirement::R2 => "cover the span lengths between existing sites",
            Requirement::R3 => "no new sites",
            Requirement::R4 => "no cryogenic facilities",
        }
    }
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub requirement: Requirement,
    /// Offending span, when the violation is tied to one.
    pub span_index: Option<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityVerdict {
    pub technology: Technology,
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

impl FeasibilityVerdict {
    pub fn violates(&self, requirement: Requirement) -> bool {
        self.violations.iter().any(|v| v.requirement == requirement)
    }
}

/// Loss tolerance of a one-way (error-correcting) repeater hop.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneWayRepeaterSpec {
    pub loss_threshold_db: f64,
    pub cryogenic_required: bool,
}

impl Default for OneWayRepeaterSpec {
    fn default() -> Self {
        Self {
            loss_threshold_db: 3.0,
            cryogenic_required: false,
        }
    }
}

impl OneWayRepeaterSpec {
    /// Threshold at exactly 50 % loss (10·log₁₀2 ≈ 3.0103 dB).
    pub fn half_loss() -> Self {
        Self {
            loss_threshold_db: 10.0 * 2f64.log10(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.loss_threshold_db > 0.0 && self.loss_threshold_db.is_finite() {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                name: "loss threshold (dB)",
                value: self.loss_threshold_db,
                range: "(0, inf)",
            })
        }
    }
}

/// Longest span a one-way hop can bridge once `fixed_losses_db` of the
/// budget is spent elsewhere.
pub fn qec_max_span(
    attenuation_db_per_km: f64,
    spec: &OneWayRepeaterSpec,
    fixed_losses_db: f64,
) -> Result<f64> {
    if !(attenuation_db_per_km > 0.0 && attenuation_db_per_km.is_finite()) {
        return Err(Error::OutOfRange {
            name: "attenuation (dB/km)",
            value: attenuation_db_per_km,
            range: "(0, inf)",
        });
    }
    spec.validate()?;
    if !(fixed_losses_db >= 0.0) {
        return Err(Error::OutOfRange {
            name: "fixed losses (dB)",
            value: fixed_losses_db,
            range: "[0, inf)",
        });
    }
    if fixed_losses_db >= spec.loss_threshold_db {
        return Err(Error::NoLossBudget {
            fixed_db: fixed_losses_db,
            threshold_db: spec.loss_threshold_db,
        });
    }
    Ok((spec.loss_threshold_db - fixed_losses_db) / attenuation_db_per_km)
}

/// Technology limits and route attestations used by [`assess_chain`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssessmentSpecs {
    pub one_way: OneWayRepeaterSpec,
    /// Longest span over which entanglement can be heralded, km.
    pub max_heralding_distance_km: f64,
    /// Quantum channels share the fiber with classical traffic.
    pub coexistence: bool,
    /// Every node sits at an existing site.
    pub existing_sites_only: bool,
}

impl Default for AssessmentSpecs {
    fn default() -> Self {
        Self {
            one_way: OneWayRepeaterSpec::default(),
            max_heralding_distance_km: 100.0,
            coexistence: true,
            existing_sites_only: true,
        }
    }
}

/// Evaluates R1–R4 for `technology` on `chain`. Fixed insertion losses of
/// each span count against the one-way loss budget.
pub fn assess_chain(
    chain: &RepeaterChain,
    technology: Technology,
    specs: &AssessmentSpecs,
) -> Result<FeasibilityVerdict> {
    chain.validate()?;
    let mut violations = Vec::new();

    if !specs.coexistence {
        violations.push(Violation {
            requirement: Requirement::R1,
            span_index: None,
            detail: "route does not carry quantum and classical channels on the same fiber".into(),
        });
    }

    for (i, span) in chain.spans.iter().enumerate() {
        match technology {
            Technology::Entanglement => {
                if span.length_km > specs.max_heralding_distance_km {
                    violations.push(Violation {
                        requirement: Requirement::R2,
                        span_index: Some(i),
                        detail: format!(
                            "span of {:.1} km exceeds the {:.1} km heralding distance",
                            span.length_km, specs.max_heralding_distance_km
                        ),
                    });
                }
            }
            Technology::OneWay => {
                let att = span.fiber.attenuation(span.quantum_band)?;
                let budget_only = qec_max_span(att, &specs.one_way, 0.0)?;
                let fixed = span.mux_insertion_loss_db;
                match qec_max_span(att, &specs.one_way, fixed) {
                    Ok(max) if span.length_km <= max => {}
                    Ok(max) => violations.push(Violation {
                        requirement: Requirement::R2,
                        span_index: Some(i),
                        detail: format!(
                            "span of {:.1} km exceeds the one-way maximum of {:.1} km \
                             ({:.1} dB budget, {:.1} dB fixed loss, {:.2} dB/km in the {} band; \
                             {:.1} km with no fixed loss)",
                            span.length_km,
                            max,
                            specs.one_way.loss_threshold_db,
                            fixed,
                            att,
                            span.quantum_band,
                            budget_only
                        ),
                    }),
                    Err(_) => violations.push(Violation {
                        requirement: Requirement::R2,
                        span_index: Some(i),
                        detail: format!(
                            "{:.1} dB of fixed loss leaves none of the {:.1} dB one-way budget \
                             ({:.1} km at {:.2} dB/km with no fixed loss)",
                            fixed, specs.one_way.loss_threshold_db, budget_only, att
                        ),
                    }),
                }
            }
        }
    }

    if !specs.existing_sites_only {
        violations.push(Violation {
            requirement: Requirement::R3,
            span_index: None,
            detail: "chain places nodes at sites that do not exist on the route".into(),
        });
    }

    match technology {
        Technology::Entanglement => {
            for site in 0..=chain.spans.len() {
                if chain.site(site).memory.cryogenic_required {
                    violations.push(Violation {
                        requirement: Requirement::R4,
                        span_index: None,
                        detail: format!("memory at site {site} requires a cryogenic environment"),
                    });
                }
            }
        }
        Technology::OneWay => {
            if specs.one_way.cryogenic_required {
                violations.push(Violation {
                    requirement: Requirement::R4,
                    span_index: None,
                    detail: "one-way repeater hardware requires a cryogenic environment".into(),
                });
            }
        }
    }

    Ok(FeasibilityVerdict {
        technology,
        feasible: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::{Band, FiberSpan, FiberSpec};
    use crate::repeater::{QorsNode, DEFAULT_ATTEMPT_RATE};

    fn chain(lengths: &[f64], band: Band) -> RepeaterChain {
        let spans = lengths
            .iter()
            .map(|&l| FiberSpan::deployed(l, FiberSpec::ndsf(), band))
            .collect();
        RepeaterChain::uniform(spans, QorsNode::default(), DEFAULT_ATTEMPT_RATE)
    }

    #[test]
    fn max_span_examples() {
        let spec = OneWayRepeaterSpec::default();
        assert_eq!(qec_max_span(0.2, &spec, 0.0).unwrap(), 15.0);
        let o = qec_max_span(0.35, &spec, 0.0).unwrap();
        assert!((o - 8.571).abs() < 0.01);
        assert_eq!(format!("{o:.1}"), "8.6");
        assert!((qec_max_span(0.2, &spec, 1.0).unwrap() - 10.0).abs() < 1e-12);
        assert!(matches!(
            qec_max_span(0.2, &spec, 3.0),
            Err(Error::NoLossBudget { .. })
        ));
        assert!(qec_max_span(0.0, &spec, 0.0).is_err());
        let half = OneWayRepeaterSpec::half_loss();
        assert!(qec_max_span(0.2, &half, 0.0).unwrap() > 15.0);
    }

    #[test]
    fn one_way_fails_long_spans() {
        let v = assess_chain(&chain(&[100.0, 100.0], Band::C), Technology::OneWay, &Default::default())
            .unwrap();
        assert!(!v.feasible);
        assert!(v.violates(Requirement::R2));
        assert_eq!(v.violations.len(), 2);
        assert!(v.violations[0].detail.contains("15.0 km"));
    }

    #[test]
    fn entanglement_checks() {
        let specs = AssessmentSpecs::default();
        let ok = assess_chain(&chain(&[80.0, 100.0], Band::O), Technology::Entanglement, &specs)
            .unwrap();
        assert!(ok.feasible, "{ok:?}");

        let mut cold = chain(&[80.0, 80.0], Band::O);
        cold.nodes[0].memory.cryogenic_required = true;
        let v = assess_chain(&cold, Technology::Entanglement, &specs).unwrap();
        assert!(!v.feasible && v.violates(Requirement::R4));

        let v = assess_chain(&chain(&[120.0], Band::O), Technology::Entanglement, &specs).unwrap();
        assert_eq!(v.violations[0].span_index, Some(0));

        let isolated = AssessmentSpecs {
            coexistence: false,
            ..specs
        };
        let v = assess_chain(&chain(&[80.0], Band::O), Technology::Entanglement, &isolated).unwrap();
        assert!(v.violates(Requirement::R1));
    }

    #[test]
    fn technology_names() {
        assert_eq!("oneway".parse::<Technology>().unwrap(), Technology::OneWay);
        assert_eq!("entanglement".parse::<Technology>().unwrap(), Technology::Entanglement);
        assert!("both".parse::<Technology>().is_err());
        assert_eq!(serde_json::to_string(&Technology::OneWay).unwrap(), "\"one_way\"");
    }
}
