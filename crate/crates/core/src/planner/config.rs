use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::{AssessmentSpecs, OneWayRepeaterSpec};
use crate::fiber::{Band, FiberSpan, FiberSpec};
use crate::repeater::{MemorySpec, QorsNode, RepeaterChain, DEFAULT_ATTEMPT_RATE};

pub const ROUTE_SCHEMA_VERSION: u32 = 1;
pub const FIBER_TABLE_SCHEMA_VERSION: u32 = 1;

const DEFAULT_FIBER_TABLE: &str = include_str!("../../assets/fibers.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SiteKind {
    Endpoint,
    /// In-line amplifier hut, where a repeater node can be installed.
    Ila,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Site {
    pub name: String,
    pub position_km: f64,
    pub kind: SiteKind,
}

/// Optional replacements for the built-in device and span parameters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attempt_rate_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub memory_coherence_time_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub memory_write_efficiency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub memory_read_efficiency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub memory_cryogenic: Option<bool>,
    /// Defaults to the coherence time.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub memory_cutoff_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bsm_success_prob: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bsm_visibility_penalty: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detector_efficiency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sop_drift_rate_rad_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sop_recalibration_interval_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dephasing_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coexistence_noise_prob: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mux_insertion_loss_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_heralding_distance_km: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oneway_loss_threshold_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oneway_cryogenic: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteConfig {
    pub schema_version: u32,
    pub name: String,
    pub fiber_type: String,
    pub quantum_band: Band,
    /// Quantum channels share the fiber with classical DWDM traffic.
    pub coexistence: bool,
    pub sites: Vec<Site>,
    #[serde(default)]
    pub defaults: ParamOverrides,
}

impl RouteConfig {
    /// Span lengths between consecutive sites, km.
    pub fn span_lengths(&self) -> Vec<f64> {
        self.sites
            .windows(2)
            .map(|w| w[1].position_km - w[0].position_km)
            .collect()
    }

    pub fn fiber<'a>(&self, table: &'a FiberTable) -> Result<&'a FiberSpec> {
        table.get(&self.fiber_type).ok_or_else(|| {
            Error::Config(format!(
                "unknown fiber type {:?} (table has {})",
                self.fiber_type,
                table.names().join(", ")
            ))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberTable {
    pub schema_version: u32,
    pub fibers: Vec<FiberSpec>,
}

impl Default for FiberTable {
    fn default() -> Self {
        Self::parse(DEFAULT_FIBER_TABLE, "<built-in fiber table>").expect("built-in table is valid")
    }
}

impl FiberTable {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let table: FiberTable = serde_json::from_str(text).map_err(|e| json_error(source, &e))?;
        if table.schema_version != FIBER_TABLE_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "{source}: unsupported fiber table schema_version {} (expected {FIBER_TABLE_SCHEMA_VERSION})",
                table.schema_version
            )));
        }
        if table.fibers.is_empty() {
            return Err(Error::Config(format!("{source}: fiber table is empty")));
        }
        for (i, f) in table.fibers.iter().enumerate() {
            f.validate()
                .map_err(|e| Error::Config(format!("{source}: fibers[{i}]: {e}")))?;
            if table.fibers[..i]
                .iter()
                .any(|g| g.type_name.eq_ignore_ascii_case(&f.type_name))
            {
                return Err(Error::Config(format!(
                    "{source}: fiber type {:?} is listed twice",
                    f.type_name
                )));
            }
        }
        Ok(table)
    }

    pub fn get(&self, type_name: &str) -> Option<&FiberSpec> {
        self.fibers
            .iter()
            .find(|f| f.type_name.eq_ignore_ascii_case(type_name))
    }

    pub fn names(&self) -> Vec<&str> {
        self.fibers.iter().map(|f| f.type_name.as_str()).collect()
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: cannot read: {e}", path.display())))
}

fn json_error(source: &str, e: &serde_json::Error) -> Error {
    Error::Config(format!("{source}:{}:{}: {e}", e.line(), e.column()))
}

/// Reads and validates a route against the built-in fiber table.
pub fn load_route(path: &Path) -> Result<RouteConfig> {
    load_route_with(path, &FiberTable::default())
}

pub fn load_route_with(path: &Path, table: &FiberTable) -> Result<RouteConfig> {
    let text = read(path)?;
    parse_route(&text, &path.display().to_string(), table)
}

/// Parses and validates a route; errors carry `source:line:` prefixes.
pub fn parse_route(text: &str, source: &str, table: &FiberTable) -> Result<RouteConfig> {
    let route: RouteConfig = serde_json::from_str(text).map_err(|e| json_error(source, &e))?;
    let lines = Lines::scan(text);
    let at = |line: Option<usize>, msg: String| -> Error {
        match line {
            Some(l) => Error::Config(format!("{source}:{l}: {msg}")),
            None => Error::Config(format!("{source}: {msg}")),
        }
    };
    let site_line = |i: usize| lines.sites.get(i).copied().or(lines.key("sites"));

    if route.schema_version != ROUTE_SCHEMA_VERSION {
        return Err(at(
            lines.key("schema_version"),
            format!(
                "unsupported schema_version {} (expected {ROUTE_SCHEMA_VERSION})",
                route.schema_version
            ),
        ));
    }
    if route.sites.len() < 2 {
        return Err(at(lines.key("sites"), "a route needs at least two sites".into()));
    }
    let last = route.sites.len() - 1;
    for (i, site) in route.sites.iter().enumerate() {
        if site.name.trim().is_empty() {
            return Err(at(site_line(i), format!("site {i} has an empty name")));
        }
        if !(site.position_km.is_finite() && site.position_km >= 0.0) {
            return Err(at(
                site_line(i),
                format!("site {:?}: position must be a finite number >= 0", site.name),
            ));
        }
        let end = i == 0 || i == last;
        match (end, site.kind) {
            (true, SiteKind::Ila) => {
                return Err(at(
                    site_line(i),
                    format!("site {:?}: the first and last sites must be endpoints", site.name),
                ))
            }
            (false, SiteKind::Endpoint) => {
                return Err(at(
                    site_line(i),
                    format!("site {:?}: only the first and last sites may be endpoints", site.name),
                ))
            }
            _ => {}
        }
        if i > 0 {
            let prev = &route.sites[i - 1];
            if site.position_km <= prev.position_km {
                return Err(at(
                    site_line(i),
                    format!(
                        "site positions must be strictly increasing: {:?} at {} km follows {:?} at {} km",
                        site.name, site.position_km, prev.name, prev.position_km
                    ),
                ));
            }
        }
    }
    let fiber = route
        .fiber(table)
        .map_err(|e| at(lines.key("fiber_type"), e.to_string()))?;
    if fiber.attenuation(route.quantum_band).is_err() {
        return Err(at(
            lines.key("quantum_band"),
            format!(
                "fiber type {:?} has no attenuation for the {} band",
                fiber.type_name, route.quantum_band
            ),
        ));
    }
    build_chain(&route, table)
        .and_then(|_| assessment_specs(&route).one_way.validate())
        .map_err(|e| at(lines.key("defaults"), format!("invalid parameters: {e}")))?;
    Ok(route)
}

/// One span per site gap and one node per in-line site, with the route's
/// parameter overrides applied.
pub fn build_chain(route: &RouteConfig, table: &FiberTable) -> Result<RepeaterChain> {
    let fiber = route.fiber(table)?.clone();
    let d = &route.defaults;
    let spans: Vec<FiberSpan> = route
        .span_lengths()
        .into_iter()
        .map(|length| {
            let mut span = FiberSpan::deployed(length, fiber.clone(), route.quantum_band);
            set(&mut span.sop_drift_rate, d.sop_drift_rate_rad_s);
            set(&mut span.sop_recalibration_interval, d.sop_recalibration_interval_s);
            set(&mut span.dephasing_p, d.dephasing_p);
            set(&mut span.coexistence_noise_prob, d.coexistence_noise_prob);
            set(&mut span.mux_insertion_loss_db, d.mux_insertion_loss_db);
            if !route.coexistence {
                span.coexistence_noise_prob = 0.0;
            }
            span
        })
        .collect();

    let mut memory = MemorySpec::default();
    set(&mut memory.coherence_time, d.memory_coherence_time_s);
    set(&mut memory.write_efficiency, d.memory_write_efficiency);
    set(&mut memory.read_efficiency, d.memory_read_efficiency);
    set(&mut memory.cryogenic_required, d.memory_cryogenic);
    let mut device = QorsNode {
        memory,
        ..QorsNode::default()
    };
    set(&mut device.bsm_success_prob, d.bsm_success_prob);
    set(&mut device.bsm_visibility_penalty, d.bsm_visibility_penalty);
    set(&mut device.detector_efficiency, d.detector_efficiency);

    let mut chain = RepeaterChain::uniform(
        spans,
        device,
        d.attempt_rate_hz.unwrap_or(DEFAULT_ATTEMPT_RATE),
    );
    for (node, site) in chain.nodes.iter_mut().zip(&route.sites[1..]) {
        node.position_km = site.position_km;
    }
    chain.terminal.position_km = route.sites[0].position_km;
    set(&mut chain.memory_cutoff, d.memory_cutoff_s);
    chain.validate()?;
    Ok(chain)
}

/// Feasibility limits and attestations for a route. Nodes only ever sit at
/// declared sites, so R3 holds by construction.
pub fn assessment_specs(route: &RouteConfig) -> AssessmentSpecs {
    let d = &route.defaults;
    let mut one_way = OneWayRepeaterSpec::default();
    set(&mut one_way.loss_threshold_db, d.oneway_loss_threshold_db);
    set(&mut one_way.cryogenic_required, d.oneway_cryogenic);
    let mut specs = AssessmentSpecs {
        one_way,
        coexistence: route.coexistence,
        existing_sites_only: true,
        ..AssessmentSpecs::default()
    };
    set(&mut specs.max_heralding_distance_km, d.max_heralding_distance_km);
    specs
}

fn set<T: Copy>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// 1-based line numbers of top-level keys and of each `sites` element.
struct Lines {
    keys: Vec<(String, usize)>,
    sites: Vec<usize>,
}

impl Lines {
    fn key(&self, name: &str) -> Option<usize> {
        self.keys.iter().find(|(k, _)| k == name).map(|&(_, l)| l)
    }

    fn scan(text: &str) -> Self {
        let mut keys = Vec::new();
        let mut sites = Vec::new();
        let mut line = 1;
        let mut depth = 0usize;
        let mut in_sites = false;
        let mut last_string = String::new();
        let mut string_line = 0;
        let mut chars = text.chars();
        while let Some(c) = chars.next() {
            match c {
                '\n' => line += 1,
                '"' => {
                    string_line = line;
                    last_string.clear();
                    while let Some(s) = chars.next() {
                        match s {
                            '\\' => {
                                chars.next();
                            }
                            '"' => break,
                            '\n' => line += 1,
                            other => last_string.push(other),
                        }
                    }
                }
                ':' if depth == 1 => {
                    in_sites = last_string == "sites";
                    keys.push((last_string.clone(), string_line));
                }
                '{' | '[' => {
                    if c == '{' && depth == 2 && in_sites {
                        sites.push(line);
                    }
                    depth += 1;
                }
                '}' | ']' => depth = depth.saturating_sub(1),
                _ => {}
            }
        }
        Self { keys, sites }
    }
}
