use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use pls_lab::harness::reports::{stability_t1, stability_t2, stability_t3};
use pls_lab::harness::{gradcheck, run_experiment, write_outcome, ExperimentConfig, GradcheckOptions};

#[derive(Parser)]
#[command(name = "pls-lab", version, about = "Adaptive learning rates from predicted local smoothness")]
struct Cli {
    /// Overrides the seed stored in the config.
    #[arg(long, global = true, env = "PLS_LAB_SEED")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train according to a JSON config and write records.csv + summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Cap on the number of training (and test) samples.
        #[arg(long)]
        limit: Option<usize>,
        /// Output directory; defaults to the config's `out`, then `runs/<config name>`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Linear-convergence certificates for one parameter setting.
    #[command(subcommand)]
    Stability(Theorem),
    /// Compare analytic and central-difference gradients for a config's problem.
    Gradcheck {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        limit: Option<usize>,
        /// Perturb the analytic gradient (self-test of the checker).
        #[arg(long, hide = true)]
        corrupt_gradient: bool,
    },
}

#[derive(Subcommand)]
enum Theorem {
    /// Plain SGD on an L-smooth quadratic.
    T1 {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rho: f64,
    },
    /// AMSGrad linearized around a minimizer.
    T2 {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        beta1: f64,
        #[arg(long = "sqrtvhat")]
        sqrt_vhat: f64,
        /// Defaults to √β₁ plus a small margin.
        #[arg(long)]
        rho: Option<f64>,
    },
    /// AccSGD linearized around a minimizer.
    T3 {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        xi: f64,
        #[arg(long)]
        rho: f64,
    },
}

#[derive(Args)]
struct Common {
    /// Smoothness constant.
    #[arg(long = "L", allow_negative_numbers = true)]
    smoothness: f64,
    #[arg(long, allow_negative_numbers = true)]
    eta: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> pls_lab::Result<ExitCode> {
    match cli.command {
        Command::Run { config, limit, out } => {
            let cfg = load(&config, cli.seed)?;
            let dir = out.unwrap_or_else(|| default_out(&cfg, &config));
            let outcome = run_experiment(&cfg, limit)?;
            write_outcome(&outcome, &dir)?;
            print_json(&outcome.summary)?;
            eprintln!("wrote {}", dir.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Gradcheck { config, limit, corrupt_gradient } => {
            let cfg = load(&config, cli.seed)?;
            let report = gradcheck(&cfg, limit, GradcheckOptions { corrupt_gradient })?;
            print_json(&report)?;
            Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Stability(theorem) => {
            match theorem {
                Theorem::T1 { common, rho } => print_json(&stability_t1(common.smoothness, rho, common.eta)?)?,
                Theorem::T2 { common, beta1, sqrt_vhat, rho } => {
                    print_json(&stability_t2(beta1, sqrt_vhat, common.smoothness, common.eta, rho)?)?
                }
                Theorem::T3 { common, kappa, xi, rho } => {
                    print_json(&stability_t3(kappa, xi, common.smoothness, common.eta, rho)?)?
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load(path: &Path, seed: Option<u64>) -> pls_lab::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_file(path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn default_out(cfg: &ExperimentConfig, config_path: &Path) -> PathBuf {
    match (&cfg.out, cfg.base_dir()) {
        (Some(out), Some(base)) if out.is_relative() => base.join(out),
        (Some(out), _) => out.clone(),
        (None, _) => {
            let stem = config_path.file_stem().map(|s| s.to_string_lossy().into_owned());
            Path::new("runs").join(stem.unwrap_or_else(|| "run".into()))
        }
    }
}

fn print_json(value: &impl Serialize) -> pls_lab::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}
