use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use glab::harness::{run_experiment, write_record, ExperimentConfig, ExperimentKind, HarnessError};

#[derive(Parser)]
#[command(name = "glab", version, about = "Exact-diagonalization experiments on disordered spin systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gap ratio and resonance density of dense chains
    ChainSpectrum(RunArgs),
    /// D(O_B) and gap ratio against the number of coupled spins
    BathLiomSweep(RunArgs),
    /// D of S^x_i against the distance i
    DistanceSweep(RunArgs),
    /// Off-diagonal norms of repeated first-order rotations
    SwStep(RunArgs),
    /// Resonant-site density and block sizes on long chains
    #[command(name = "percolation-1d")]
    Percolation1d(RunArgs),
    /// Closed-form resonance and buffer criteria
    Criteria(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment description
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::ChainSpectrum(a) => (ExperimentKind::ChainSpectrum, a),
        Command::BathLiomSweep(a) => (ExperimentKind::BathLiomSweep, a),
        Command::DistanceSweep(a) => (ExperimentKind::DistanceSweep, a),
        Command::SwStep(a) => (ExperimentKind::SwStep, a),
        Command::Percolation1d(a) => (ExperimentKind::Percolation1d, a),
        Command::Criteria(a) => (ExperimentKind::Criteria, a),
    };
    match run(kind, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("glab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(kind: ExperimentKind, args: &RunArgs) -> Result<(), HarnessError> {
    let mut cfg = ExperimentConfig::from_file(&args.config)?;
    if cfg.kind != kind {
        return Err(HarnessError::Config(format!(
            "config describes {} but the {} subcommand was invoked",
            cfg.kind.name(),
            kind.name()
        )));
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(jobs) = args.jobs {
        cfg.jobs = jobs;
    }
    let record = run_experiment(&cfg)?;
    for skip in &record.skips {
        eprintln!(
            "skipped sweep point {} realization {} (seed {}): {}",
            skip.sweep_index, skip.realization, skip.seed, skip.reason
        );
    }
    if kind == ExperimentKind::Criteria {
        println!("{}", record.table.columns.join("\t"));
        for row in &record.table.rows {
            println!("{}", row.join("\t"));
        }
    }
    let files = write_record(&record, &args.out)?;
    eprintln!("wrote {}", files.csv.display());
    if let Some(p) = &files.realizations_csv {
        eprintln!("wrote {}", p.display());
    }
    eprintln!("wrote {}", files.json.display());
    Ok(())
}
