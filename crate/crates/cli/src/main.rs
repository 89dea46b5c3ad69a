use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pst_localisation::disorder::Workers;
use pst_localisation::CouplingLaw;
use pstloc_cli::config::InjectionSetting;
use pstloc_cli::{execute, resolve, CliError, ConfigFile, Experiment, Overrides, Sink};

/// Anderson localisation in disordered perfect-state-transfer chains.
#[derive(Debug, Parser)]
#[command(name = "pstloc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coupling profile of the chain.
    Couplings(Common),
    /// Site occupations over time for one realization.
    Evolve(Common),
    /// Time-averaged occupation profiles and the critical line.
    SteadyState(Common),
    /// Fraction of the chain holding most of the steady-state occupation.
    SupportFraction {
        #[command(flatten)]
        common: Common,
        /// Occupation the window must hold.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// End-to-end transfer fidelity over an N x E grid.
    FidelitySurface(Common),
    /// Eigenstate localisation, spectrum and injected-state weights.
    EigenReport(Common),
    /// Power-law exponent of the steady-state profile.
    DeltaFit {
        #[command(flatten)]
        common: Common,
        /// Distance range `lo,hi` with distance |i - injection| + 1.
        #[arg(long = "fit-range", value_parser = parse_range)]
        fit_range: Option<(usize, usize)>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Config file (TOML, or JSON such as a previous manifest.json).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Chain lengths, comma separated.
    #[arg(long = "N", value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Disorder strengths, comma separated.
    #[arg(long = "E", value_delimiter = ',', allow_hyphen_values = true)]
    strength: Option<Vec<f64>>,
    #[arg(long = "J-max", allow_hyphen_values = true)]
    j_max: Option<f64>,
    #[arg(long, value_parser = parse_law)]
    law: Option<CouplingLaw>,
    /// Master seed for the disorder generator.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    realizations: Option<usize>,
    /// Realization used for single-realization outputs.
    #[arg(long)]
    realization: Option<usize>,
    /// `end`, `centre` or a 1-based site.
    #[arg(long)]
    injection: Option<InjectionSetting>,
    /// Window start in units of t_M.
    #[arg(long = "t-start", allow_hyphen_values = true)]
    t_start: Option<f64>,
    /// Window end in units of t_M.
    #[arg(long = "t-end", allow_hyphen_values = true)]
    t_end: Option<f64>,
    /// Samples in the window.
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially. Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Write the single result table to standard output instead of files.
    #[arg(long)]
    stdout: bool,
    /// No progress messages.
    #[arg(long, short)]
    quiet: bool,
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi = hi.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((lo, hi))
}

fn parse_law(s: &str) -> Result<CouplingLaw, String> {
    match s {
        "pst" => Ok(CouplingLaw::Pst),
        "uniform" => Ok(CouplingLaw::Uniform),
        _ => Err(format!("expected `pst` or `uniform`, got `{s}`")),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (experiment, common, threshold, fit_range) = match cli.command {
        Command::Couplings(c) => (Experiment::Couplings, c, None, None),
        Command::Evolve(c) => (Experiment::Evolve, c, None, None),
        Command::SteadyState(c) => (Experiment::SteadyState, c, None, None),
        Command::SupportFraction { common, threshold } => {
            (Experiment::SupportFraction, common, threshold, None)
        }
        Command::FidelitySurface(c) => (Experiment::FidelitySurface, c, None, None),
        Command::EigenReport(c) => (Experiment::EigenReport, c, None, None),
        Command::DeltaFit { common, fit_range } => (Experiment::DeltaFit, common, None, fit_range),
    };
    let file = match &common.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let workers = match common.workers {
        None => Workers::Global,
        Some(0) => return Err(CliError::config("workers", "must be at least 1")),
        Some(1) => Workers::Sequential,
        Some(k) => Workers::Threads(k),
    };
    let flags = Overrides {
        n: common.n,
        j_max: common.j_max,
        law: common.law,
        strength: common.strength,
        master_seed: common.seed,
        n_realizations: common.realizations,
        realization: common.realization,
        injection: common.injection,
        t_start: common.t_start,
        t_end: common.t_end,
        n_samples: common.samples,
        fit_range,
        threshold,
        out: common.out,
    };
    let cfg = resolve(experiment, file, flags, workers)?;
    let sink = if common.stdout {
        Sink::Stdout
    } else {
        Sink::Directory
    };
    let outputs = execute(&cfg, sink, common.quiet)?;
    if sink == Sink::Directory && !common.quiet {
        eprintln!(
            "pstloc: wrote {} file(s) and manifest.json to {}",
            outputs.len(),
            cfg.out.display()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) if !err.use_stderr() => {
            // --help and --version
            let _ = err.print();
            return ExitCode::SUCCESS;
        }
        Err(err) => {
            let rendered = err.render().to_string();
            let line = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("pstloc: {}", line.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("pstloc: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
