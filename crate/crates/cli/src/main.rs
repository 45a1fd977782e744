mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

use qorsim_core::feasibility::Technology;
use qorsim_core::planner::{
    build_chain, load_route_with, run_plan, simulate_route, span_table, FiberTable, RouteConfig,
    RunOptions,
};

use output::{Format, Sink};

/// Plan quantum-secured links over existing fiber routes.
#[derive(Parser)]
#[command(name = "qorsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Feasibility verdicts, simulation and key rates for a route.
    Plan {
        #[command(flatten)]
        route: RouteArgs,
        #[arg(long, value_enum, default_value_t = TechArg::Both)]
        tech: TechArg,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Monte Carlo of the route's repeater chain only.
    Simulate {
        #[command(flatten)]
        route: RouteArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Per-span transmittance and heralded-pair fidelity.
    Channel {
        #[command(flatten)]
        route: RouteArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// List the fiber table.
    Fibers {
        /// Fiber table to use instead of the built-in one.
        #[arg(long, value_name = "PATH")]
        fibers: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct RouteArgs {
    /// Route configuration (JSON).
    #[arg(long, value_name = "PATH")]
    route: PathBuf,
    /// Fiber table to use instead of the built-in one.
    #[arg(long, value_name = "PATH")]
    fibers: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Monte Carlo worker threads (results do not depend on this).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
}

#[derive(Args)]
struct OutArgs {
    /// Output file (default: standard output).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum TechArg {
    Entanglement,
    Oneway,
    Both,
}

impl TechArg {
    fn technologies(self) -> Vec<Technology> {
        match self {
            TechArg::Entanglement => vec![Technology::Entanglement],
            TechArg::Oneway => vec![Technology::OneWay],
            TechArg::Both => Technology::ALL.to_vec(),
        }
    }
}

impl RunArgs {
    fn options(&self) -> RunOptions {
        RunOptions {
            trials: self.trials,
            seed: self.seed,
            workers: self.workers.map(|w| w as usize),
        }
    }
}

fn fiber_table(path: Option<&Path>) -> Result<FiberTable> {
    match path {
        Some(p) => Ok(FiberTable::load(p)?),
        None => Ok(FiberTable::default()),
    }
}

fn load(args: &RouteArgs) -> Result<(RouteConfig, FiberTable)> {
    let table = fiber_table(args.fibers.as_deref())?;
    let route = load_route_with(&args.route, &table)?;
    Ok((route, table))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Plan {
            route,
            tech,
            run,
            out,
        } => {
            let (route, table) = load(&route)?;
            let reports = run_plan(&route, &table, &tech.technologies(), &run.options())?;
            let sink = Sink::new(out.out, out.format);
            match (out.format, reports.as_slice()) {
                (Format::Csv, [first, ..]) => sink.span_csv(&first.spans),
                (Format::Json, [single]) => sink.json(single),
                _ => sink.json(&reports),
            }
        }
        Command::Simulate { route, run, out } => {
            let (route, table) = load(&route)?;
            let result = simulate_route(&route, &table, &run.options())?;
            Sink::new(out.out, out.format).simulation(&route.name, &run.options(), &result)
        }
        Command::Channel { route, out } => {
            let (route, table) = load(&route)?;
            let chain = build_chain(&route, &table)?;
            let spans = span_table(&chain)?;
            let sink = Sink::new(out.out, out.format);
            match out.format {
                Format::Json => sink.json(&spans),
                Format::Csv => sink.span_csv(&spans),
            }
        }
        Command::Fibers { fibers, out } => {
            let table = fiber_table(fibers.as_deref())?;
            Sink::new(out.out, out.format).fibers(&table)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
