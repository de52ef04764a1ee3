mod commands;
mod config;
mod error;
mod output;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{
    AaqstArgs, Command, ContextualityArgs, CountsArgs, ElgiArgs, FcfArgs, InrmArgs, MoussaArgs,
    NoiseArgs, NoiseSpectrumArgs, SsptArgs,
};
use config::{ConfigFile, RunConfig};
use error::CliError;

/// Ancilla-assisted NMR quantum information experiments, simulated.
#[derive(Parser, Debug)]
#[command(name = "ancilla", version)]
struct Cli {
    /// Master RNG seed; an explicit flag overrides the config file [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for CSV, result.json and plot.txt; stdout when absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel sweeps (count); rayon default when absent
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON file with optional `subcommand`, `seed` and `params` keys
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Entropic Leggett-Garg deficit sweep
    Elgi(ElgiArgs),
    /// Joint probabilities from the three two-time measurement schemes
    Inrm(InrmArgs),
    /// Single-ancilla expectation values
    Moussa(MoussaArgs),
    /// Franck-Condon factors of a truncated oscillator
    Fcf(FcfArgs),
    /// Contextuality witness on oscillator levels
    Contextuality(ContextualityArgs),
    /// Ancilla-assisted state tomography
    Aaqst(AaqstArgs),
    /// Single-scan process tomography
    Sspt(SsptArgs),
    /// Experiment and scan counts
    Counts(CountsArgs),
    /// Decoherence under random kicks with dynamical decoupling
    Noise(NoiseArgs),
    /// Noise spectral density from CPMG decay rates
    NoiseSpectrum(NoiseSpectrumArgs),
}

struct Globals {
    seed: Option<u64>,
    out: Option<PathBuf>,
    file: Option<ConfigFile>,
}

fn execute<C: Command>(flags: &C, g: &Globals) -> Result<(), CliError> {
    if let Some(name) = g.file.as_ref().and_then(|f| f.subcommand.as_deref()) {
        if name != C::NAME {
            return Err(CliError::config(format!(
                "config file is for `{name}`, not `{}`",
                C::NAME
            )));
        }
    }
    let params = config::resolve(&C::defaults(), g.file.as_ref(), flags)?;
    let seed = g
        .seed
        .or_else(|| g.file.as_ref().and_then(|f| f.seed))
        .unwrap_or(0);
    let report = params.run(seed)?;
    let run_config = RunConfig {
        subcommand: C::NAME.to_string(),
        seed,
        params: serde_json::to_value(&params).expect("params serialize"),
    };
    output::emit(&report, &run_config, g.out.as_deref())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::config("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    }
    let g = Globals {
        seed: cli.seed,
        out: cli.out,
        file: cli.config.as_deref().map(config::load_file).transpose()?,
    };
    match &cli.command {
        Sub::Elgi(a) => execute(a, &g),
        Sub::Inrm(a) => execute(a, &g),
        Sub::Moussa(a) => execute(a, &g),
        Sub::Fcf(a) => execute(a, &g),
        Sub::Contextuality(a) => execute(a, &g),
        Sub::Aaqst(a) => execute(a, &g),
        Sub::Sspt(a) => execute(a, &g),
        Sub::Counts(a) => execute(a, &g),
        Sub::Noise(a) => execute(a, &g),
        Sub::NoiseSpectrum(a) => execute(a, &g),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            let err = CliError::config(e.kind().to_string());
            eprintln!("{}", err.record());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    let out = cli.out.clone();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.record());
            if let Some(dir) = out {
                if std::fs::create_dir_all(&dir).is_ok() {
                    let _ = std::fs::write(dir.join("error.json"), err.record() + "\n");
                }
            }
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
