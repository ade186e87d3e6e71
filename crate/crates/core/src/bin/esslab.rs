use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use esslab::experiments::{self, ExperimentConfig, ExperimentKind, Grid};
use esslab::{EssReport, Integrand, WeightedSampleSet};

#[derive(Parser)]
#[command(
    name = "esslab",
    version,
    about = "Effective sample size experiments for importance sampling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Target N(0,1), proposal N(mu_q,1), h(x)=x.
    MeanMismatch(SweepArgs),
    /// Target N(0,1), proposal N(0,sigma_q^2), h(x)=x.
    VarMismatch(SweepArgs),
    /// Target = proposal = N(0,1), h = 1{|x| > alpha}.
    RareEvent(SweepArgs),
    /// Three-mode mixture target with N1, N3 and R3 multiple importance sampling.
    MisScenario(SweepArgs),
    /// ESS diagnostics for an `x,log_w` CSV file.
    Diagnose(DiagnoseArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Grid as lo:hi:step.
    #[arg(long)]
    grid: Option<Grid>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    scenario: Option<u8>,
    /// Output CSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Input CSV with header `x,log_w`; `-` reads stdin.
    #[arg(long = "in")]
    input: PathBuf,
    /// Integrand: identity, abs-gt:<alpha> or const:<c>.
    #[arg(long)]
    h: Option<Integrand>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn sweep(kind: ExperimentKind, args: SweepArgs) -> esslab::Result<()> {
    let mut cfg = ExperimentConfig::defaults(kind);
    if let Some(n) = args.n {
        cfg.n_values = n;
    }
    if let Some(g) = args.grid {
        cfg.grid = g;
    }
    if let Some(r) = args.replicates {
        cfg.replicates = r;
    }
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    if let Some(s) = args.scenario {
        cfg.scenario = s;
    }
    let table = experiments::run(&cfg)?;
    let mut out = output(&args.out)?;
    table.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn diagnose(args: DiagnoseArgs) -> esslab::Result<()> {
    let label = args.input.display().to_string();
    let ws = if args.input.as_os_str() == "-" {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf)?;
        WeightedSampleSet::read_csv(buf.as_slice(), label)?
    } else {
        WeightedSampleSet::read_csv(File::open(&args.input)?, label)?
    };
    let report = EssReport::from_sample_set(&ws, args.h.as_ref())?;
    let mut out = output(&args.out)?;
    report.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::MeanMismatch(a) => sweep(ExperimentKind::MeanMismatch, a),
        Command::VarMismatch(a) => sweep(ExperimentKind::VarMismatch, a),
        Command::RareEvent(a) => sweep(ExperimentKind::RareEvent, a),
        Command::MisScenario(a) => sweep(ExperimentKind::MisScenario, a),
        Command::Diagnose(a) => diagnose(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("esslab: {e}");
            ExitCode::FAILURE
        }
    }
}
