//! `depolarb`: Bayes-optimal estimation of the depolarizing parameter.
//!
//! Exit status: 0 on success, 2 for usage errors, 3 when a numerical
//! routine fails.

mod commands;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use commands::{CaseArg, CliError, CliResult, Experiment, PriorKind, Strategy};
use output::Table;

#[derive(Parser, Debug)]
#[command(name = "depolarb", version, about = "Bayesian estimation of a depolarizing channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct Emit {
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults to csv for tables and json for documents.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Minimum two-qubit costs against the Schmidt weight x.
    CostX {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 0.01)]
        x_step: f64,
        #[command(flatten)]
        emit: Emit,
    },
    /// Multi-pair cost series for M = 1..m-max.
    CostM {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 20)]
        m_max: usize,
        #[arg(long, value_enum, default_value_t = PriorKind::Full)]
        prior: PriorKind,
        #[command(flatten)]
        emit: Emit,
    },
    /// Minimizing operator, optimal measurement and optimality check.
    ThetaOp {
        #[arg(long, value_enum)]
        case: CaseArg,
        #[arg(long)]
        x: f64,
        #[arg(long, value_enum, default_value_t = PriorKind::Full)]
        prior: PriorKind,
        /// θ grid for the positivity check.
        #[arg(long, default_value_t = depolarb_core::bayes::DEFAULT_VERIFY_GRID)]
        grid: usize,
        #[command(flatten)]
        emit: Emit,
    },
    /// Monte-Carlo check of an analytic cost.
    Simulate {
        /// Two-qubit probe (needs --x).
        #[arg(long, value_enum, conflicts_with = "strategy")]
        case: Option<CaseArg>,
        #[arg(long, requires = "case")]
        x: Option<f64>,
        /// Multi-copy strategy (uses --d and --pairs).
        #[arg(long, value_enum)]
        strategy: Option<Strategy>,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Number of pairs M.
        #[arg(long, default_value_t = 1)]
        pairs: usize,
        #[arg(long, value_enum, default_value_t = PriorKind::Full)]
        prior: PriorKind,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        emit: Emit,
    },
}

enum Rendered {
    Table(Table),
    Doc(Value),
}

fn render(out: Rendered, fmt: Option<Format>, w: &mut dyn Write) -> CliResult<()> {
    let io = |e: io::Error| CliError::Usage(format!("cannot write output: {e}"));
    match (out, fmt) {
        (Rendered::Table(t), None | Some(Format::Csv)) => t.write_csv(w).map_err(io),
        (Rendered::Table(t), Some(Format::Json)) => write_json(&t.to_json(), w).map_err(io),
        (Rendered::Doc(v), None | Some(Format::Json)) => write_json(&v, w).map_err(io),
        (Rendered::Doc(_), Some(Format::Csv)) => Err(CliError::Usage("this command only emits json".into())),
    }
}

fn write_json(v: &Value, w: &mut dyn Write) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, v)?;
    writeln!(w)
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("DEPOLARB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("DEPOLARB_THREADS = {raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let (out, emit) = match cli.command {
        Command::CostX { d, x_step, emit } => (Rendered::Table(commands::cost_x(d, x_step)?), emit),
        Command::CostM { d, m_max, prior, emit } => (Rendered::Table(commands::cost_m(d, m_max, prior)?), emit),
        Command::ThetaOp { case, x, prior, grid, emit } => {
            (Rendered::Doc(commands::theta_op(case.into(), x, prior, grid)?), emit)
        }
        Command::Simulate { case, x, strategy, d, pairs, prior, trials, seed, emit } => {
            let exp = match (case, x, strategy) {
                (Some(c), Some(x), None) => Experiment::TwoQubit { case: c.into(), x },
                (Some(_), None, _) => return Err(CliError::Usage("--case needs --x".into())),
                (None, _, Some(s)) => Experiment::Mixture { strategy: s, d, pairs },
                _ => return Err(CliError::Usage("give either --case and --x, or --strategy".into())),
            };
            let sim = commands::simulate(exp, prior, trials, seed)?;
            let r = match emit.format {
                Some(Format::Csv) => Rendered::Table(sim.to_table()),
                _ => Rendered::Doc(sim.to_json()),
            };
            (r, emit)
        }
    };
    match &emit.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            render(out, emit.format, &mut w)?;
            w.flush().map_err(|e| CliError::Usage(e.to_string()))
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            render(out, emit.format, &mut w)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("depolarb: {e}");
            match e {
                CliError::Usage(_) => ExitCode::from(2),
                CliError::Numerical(_) => ExitCode::from(3),
            }
        }
    }
}
