use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spindec::cli::{self, RunConfig};

#[derive(Parser)]
#[command(name = "spindec", version, about = "Central-spin decoherence in interacting spin baths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML configuration; omitted keys take their defaults.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a key, e.g. `--set engine.order=3` (repeatable).
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
    /// Same as `--set engine.seed=N`.
    #[arg(long)]
    seed: Option<u64>,
    /// Same as `--set engine.order=N`.
    #[arg(long)]
    order: Option<usize>,
    /// Same as `--set engine.method=NAME`.
    #[arg(long)]
    method: Option<String>,
    /// Same as `--set output.dir=DIR`.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Print the resolved configuration to stderr.
    #[arg(long)]
    echo: bool,
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Place bath isotopes on the configured lattice and write the bath file.
    Generate(Common),
    /// Coherence curve of the configured system.
    Simulate(Common),
    /// Sweep order, cutoff, bath radius and realizations.
    Converge(Common),
    /// Gaussian-noise coherence, filter functions and relaxation times.
    Noise(Common),
    /// Stretched-exponential fit of a curve CSV.
    Fit {
        /// CSV with a `t_ms` column and an `abs_L` column.
        curve: PathBuf,
        #[arg(short, long, action = clap::ArgAction::Count)]
        verbose: u8,
    },
    /// Compare the configured engine with exact propagation.
    OracleCompare(Common),
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
}

fn load(common: &Common) -> spindec::Result<RunConfig> {
    let mut overrides = common.set.clone();
    if let Some(s) = common.seed {
        overrides.push(format!("engine.seed={s}"));
    }
    if let Some(o) = common.order {
        overrides.push(format!("engine.order={o}"));
    }
    if let Some(m) = &common.method {
        overrides.push(format!("engine.method=\"{m}\""));
    }
    if let Some(d) = &common.out {
        overrides.push(format!("output.dir={:?}", d.display().to_string()));
    }
    let cfg = match &common.config {
        Some(p) => cli::load_config(p, &overrides)?,
        None => RunConfig::from_toml("", &overrides, &std::env::current_dir().unwrap_or_default())?,
    };
    if common.echo {
        eprint!("{}", cfg.to_toml());
    }
    Ok(cfg)
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("{}", f.display());
    }
}

fn run(command: Command) -> spindec::Result<()> {
    match command {
        Command::Generate(c) => print_files(&cli::run_generate(&load(&c)?)?),
        Command::Simulate(c) => print_files(&cli::run_simulate(&load(&c)?)?),
        Command::Converge(c) => {
            let (report, files) = cli::run_converge(&load(&c)?)?;
            for a in &report.axes {
                println!("{}: converged = {} (at {:?})", a.axis, a.converged, a.converged_at);
            }
            if let Some(m) = report.ensemble.t2_median {
                println!("median T2 = {m} ms over {} realizations", report.ensemble.fitted);
            }
            print_files(&files);
        }
        Command::Noise(c) => print_files(&cli::run_noise(&load(&c)?)?),
        Command::Fit { curve, .. } => {
            let fit = cli::run_fit(&curve)?;
            println!("{}", serde_json::to_string_pretty(&fit).expect("fit serializes"));
        }
        Command::OracleCompare(c) => {
            let (delta, files) = cli::run_oracle_compare(&load(&c)?)?;
            println!("max |L - L_exact| = {delta:e}");
            print_files(&files);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let verbose = match &args.command {
        Command::Fit { verbose, .. } => *verbose,
        Command::Generate(c) | Command::Simulate(c) | Command::Converge(c) | Command::Noise(c) | Command::OracleCompare(c) => {
            c.verbose
        }
    };
    init_logging(verbose);
    match run(args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
