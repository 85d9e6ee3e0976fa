//! `virtsub`: structure decompositions, bipartition tests and tensor product
//! structure tools from JSON operator files.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use virtsub::tps::MeasureKind;
use virtsub::Tolerance;

use commands::Settings;

#[derive(Parser, Debug)]
#[command(name = "virtsub", version, about = "Virtual subsystems of finite-dimensional quantum systems")]
struct Cli {
    #[command(flatten)]
    opts: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Relative singular-value cutoff for numerical rank.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol_rank: f64,
    /// Absolute residual accepted by consistency checks.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol_resid: f64,
    /// Relative eigenvalue gap separating clusters.
    #[arg(long, global = true, default_value_t = 1e-7)]
    tol_gap: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo samples for entangling-power estimates.
    #[arg(long, global = true, default_value_t = 20_000)]
    samples: usize,
    /// Include basis-change matrices and witnesses in the report.
    #[arg(long, global = true)]
    emit_basis: bool,
    #[arg(long, global = true, value_enum, default_value_t = Measure::Vn)]
    measure: Measure,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Add wall-clock time to the report (makes reports differ between runs).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Measure {
    /// Von Neumann entropy in bits.
    Vn,
    /// Linear entropy.
    Linear,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Block structure of the algebra generated by the operators in FILE.
    Decompose { file: PathBuf },
    /// Test whether the groups a1 and a2 of FILE form a virtual bipartition.
    Bipartition { file: PathBuf },
    /// Tensor product structure tools.
    #[command(subcommand)]
    Tps(TpsCommand),
}

#[derive(Subcommand, Debug)]
enum TpsCommand {
    /// Factorizations of a dimension into factors of at least 2.
    Partitions { n: u64 },
    /// Entangling power and the distance it induces.
    Distance { file: PathBuf },
    /// Equivalence of two structures up to local unitaries and reordering.
    Equivalent { file: PathBuf },
    /// Entanglement of a state relative to a structure.
    Entangle { file: PathBuf },
    /// Syndrome structure of commuting parity operators.
    Parity { file: PathBuf },
    /// Rotated bosonic modes on a truncated Fock space.
    Bosonic { file: PathBuf },
    /// Loop holonomies of an iso-degenerate family.
    Holonomy { file: PathBuf },
}

fn run(cli: &Cli, argv: &[String]) -> Result<Vec<u8>, virtsub::Error> {
    let o = &cli.opts;
    let tol = Tolerance::new(o.tol_rank, o.tol_resid, o.tol_gap)?;
    let settings = Settings {
        tol,
        seed: o.seed,
        samples: o.samples,
        emit_basis: o.emit_basis,
        measure: match o.measure {
            Measure::Vn => MeasureKind::VonNeumann,
            Measure::Linear => MeasureKind::Linear,
        },
    };
    let start = Instant::now();
    let (results, residuals) = match &cli.command {
        Command::Decompose { file } => commands::decompose(file, &settings)?,
        Command::Bipartition { file } => commands::bipartition(file, &settings)?,
        Command::Tps(t) => match t {
            TpsCommand::Partitions { n } => commands::partitions(*n)?,
            TpsCommand::Distance { file } => commands::distance(file, &settings)?,
            TpsCommand::Equivalent { file } => commands::equivalent(file, &settings)?,
            TpsCommand::Entangle { file } => commands::entangle(file, &settings)?,
            TpsCommand::Parity { file } => commands::parity(file, &settings)?,
            TpsCommand::Bosonic { file } => commands::bosonic(file, &settings)?,
            TpsCommand::Holonomy { file } => commands::holonomy(file, &settings)?,
        },
    };
    let mut report = json!({
        "command": argv,
        "seed": o.seed,
        "tolerances": report::tolerances(&tol),
        "results": results,
        "residuals": residuals,
    });
    if o.timing {
        report["wall_time_seconds"] = json!(start.elapsed().as_secs_f64());
    }
    Ok(report::to_bytes(&report))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match run(&cli, &argv) {
        Ok(bytes) => {
            let written = match &cli.opts.out {
                Some(path) => std::fs::write(path, &bytes),
                None => std::io::Write::write_all(&mut std::io::stdout(), &bytes),
            };
            if let Err(e) = written {
                eprintln!("error: cannot write report: {e}");
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
