use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;

use qorsim_core::planner::{FiberTable, RunOptions, SpanRow};
use qorsim_core::repeater::EndToEndResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Writes one rendered document to a file or standard output.
pub struct Sink {
    path: Option<PathBuf>,
    format: Format,
}

#[derive(Serialize)]
struct SimulationRow<'a> {
    route: &'a str,
    trials: u64,
    seed: u64,
    fidelity: f64,
    fidelity_stderr: f64,
    pair_rate_hz: f64,
    pair_rate_stderr_hz: f64,
    latency_s: f64,
    latency_stderr_s: f64,
}

#[derive(Serialize)]
struct FiberRow<'a> {
    type_name: &'a str,
    band: String,
    attenuation_db_per_km: f64,
    group_index: f64,
}

impl Sink {
    pub fn new(path: Option<PathBuf>, format: Format) -> Self {
        Self { path, format }
    }

    pub fn json<T: Serialize + ?Sized>(&self, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.emit(&bytes)
    }

    fn csv<T: Serialize>(&self, rows: impl IntoIterator<Item = T>) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in rows {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().context("cannot finish CSV output")?;
        self.emit(&bytes)
    }

    pub fn span_csv(&self, spans: &[SpanRow]) -> Result<()> {
        self.csv(spans)
    }

    pub fn simulation(&self, route: &str, options: &RunOptions, r: &EndToEndResult) -> Result<()> {
        let row = SimulationRow {
            route,
            trials: options.trials,
            seed: options.seed,
            fidelity: r.werner_fidelity,
            fidelity_stderr: r.fidelity_stderr,
            pair_rate_hz: r.pair_rate,
            pair_rate_stderr_hz: r.pair_rate_stderr,
            latency_s: r.mean_latency,
            latency_stderr_s: r.latency_stderr,
        };
        match self.format {
            Format::Json => self.json(&row),
            Format::Csv => self.csv([row]),
        }
    }

    pub fn fibers(&self, table: &FiberTable) -> Result<()> {
        match self.format {
            Format::Json => self.json(table),
            Format::Csv => self.csv(table.fibers.iter().flat_map(|f| {
                f.attenuation_db_per_km.iter().map(move |(band, &a)| FiberRow {
                    type_name: &f.type_name,
                    band: band.to_string(),
                    attenuation_db_per_km: a,
                    group_index: f.group_index,
                })
            })),
        }
    }

    fn emit(&self, bytes: &[u8]) -> Result<()> {
        match &self.path {
            Some(p) => std::fs::write(p, bytes)
                .with_context(|| format!("cannot write {}", p.display())),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes)?;
                out.flush()?;
                Ok(())
            }
        }
    }
}
