use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use facdyn::experiments::{self, RunConfig};
use facdyn::integration::Formulation;
use facdyn::systems::SystemKind;

#[derive(Parser)]
#[command(name = "facdyn", version, about = "Factorized dynamics of mechanical systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one system and write its trajectory as CSV.
    Simulate {
        #[arg(value_enum)]
        system: SystemArg,
        #[arg(long, value_enum, default_value = "fact")]
        formulation: FormulationArg,
        /// JSON configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Robot inverse dynamics along the reference motion, with timing.
    Invdyn {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Timed repetitions per formulation (at least 100).
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Variator runs with and without tilt disturbance.
    Noise {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the self-check suite.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        system: VerifyArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemArg {
    Crank,
    Ftv,
    Robot,
}

impl From<SystemArg> for SystemKind {
    fn from(s: SystemArg) -> Self {
        match s {
            SystemArg::Crank => SystemKind::Crank,
            SystemArg::Ftv => SystemKind::Ftv,
            SystemArg::Robot => SystemKind::Robot,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulationArg {
    El,
    Fact,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyArg {
    All,
    Crank,
    Ftv,
    Robot,
}

fn out_dir(flag: PathBuf) -> PathBuf {
    match std::env::var_os("FACDYN_OUT_DIR") {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => flag,
    }
}

fn load(path: Option<&Path>, kind: SystemKind) -> Result<RunConfig> {
    RunConfig::load(path, kind).with_context(|| match path {
        Some(p) => format!("loading {}", p.display()),
        None => "building default configuration".into(),
    })
}

fn list_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn print_metrics(rows: &[experiments::MetricsRow]) {
    println!("{:<26} {:<10} {:>12} {:>12}", "comparison", "channel", "mean %", "max %");
    for r in rows {
        println!(
            "{:<26} {:<10} {:>12.4e} {:>12.4e}",
            r.comparison, r.channel, r.metrics.mean_pct, r.metrics.max_pct
        );
    }
}

/// `Ok(true)` on success, `Ok(false)` when a validation check failed.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate {
            system,
            formulation,
            config,
            out,
        } => {
            let cfg = load(config.as_deref(), system.into())?;
            let f = match formulation {
                FormulationArg::El => Formulation::EulerLagrange,
                FormulationArg::Fact => Formulation::Factorized,
            };
            let tr = experiments::run_simulation(&cfg, f)?;
            let path = experiments::write_trajectory(&out_dir(out), &cfg, f, &tr)?;
            println!("{} samples, t = 0 … {}", tr.len(), tr.t.last().copied().unwrap_or(0.0));
            list_files(&[path]);
        }
        Command::Invdyn { config, reps, out } => {
            let mut cfg = load(config.as_deref(), SystemKind::Robot)?;
            if let Some(k) = reps {
                cfg.experiment.reps = k;
            }
            let o = experiments::run_invdyn_benchmark(&cfg, Some(&out_dir(out)))?;
            print_metrics(&o.metrics);
            println!(
                "mean pass time: Euler-Lagrange {:.4e} s, factorized {:.4e} s, reduction {:.2} % over {} repetitions",
                o.timing.el_mean,
                o.timing.fact_mean,
                o.timing.reduction_pct,
                o.timing.el_seconds.len()
            );
            list_files(&o.files);
        }
        Command::Noise { config, out } => {
            let cfg = load(config.as_deref(), SystemKind::Ftv)?;
            let o = experiments::run_noise_experiment(&cfg, Some(&out_dir(out)))?;
            print_metrics(&o.metrics);
            list_files(&o.files);
        }
        Command::Verify { system } => {
            let kinds: Vec<SystemKind> = match system {
                VerifyArg::All => SystemKind::ALL.to_vec(),
                VerifyArg::Crank => vec![SystemKind::Crank],
                VerifyArg::Ftv => vec![SystemKind::Ftv],
                VerifyArg::Robot => vec![SystemKind::Robot],
            };
            let results = experiments::verify(&kinds)?;
            for r in &results {
                println!("{r}");
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            println!("{} checks, {} failed", results.len(), failed);
            return Ok(failed == 0);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
