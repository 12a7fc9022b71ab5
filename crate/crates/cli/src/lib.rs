//! `gspa` command-line driver: one subcommand per experiment, each reading an
//! optional JSON config and writing CSV rows plus a config sidecar.

pub mod commands;
pub mod error;
pub mod output;
pub mod plot;
pub mod stats;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use commands::{account, freq, mean, oracle_check, sgd, tv_sweep};
use error::{config_err, CliError, Result};
use output::Record;
use plot::{line_chart, Series};

#[derive(Debug, Parser)]
#[command(name = "gspa", version, about = "Shuffle-model accounting with personalized local budgets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Central guarantee for sampled or explicit cohorts.
    Account(CommonArgs),
    /// Compare the accountant against exact trade-off curves (small n).
    OracleCheck(CommonArgs),
    /// Distance between count distributions and their Gaussian approximation.
    TvSweep(CommonArgs),
    /// Shuffled Laplace mean estimation over group sweeps.
    Mean(CommonArgs),
    /// Shuffled randomized-response frequency estimation over group sweeps.
    Freq(CommonArgs),
    /// Shuffled per-client noisy SGD.
    Sgd(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON config; unspecified fields take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides trials (mean, freq) or repeats (sgd).
    #[arg(long)]
    pub trials: Option<usize>,
    /// Write SVG plots next to the CSV.
    #[arg(long)]
    pub plot: bool,
}

fn load_config<C: DeserializeOwned + Default>(path: Option<&Path>) -> Result<C> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| config_err(format!("{}: {e}", p.display())))?;
            Ok(serde_json::from_str(&text)?)
        }
        None => Ok(C::default()),
    }
}

fn reject_trials(args: &CommonArgs, command: &str) -> Result<()> {
    match args.trials {
        Some(_) => Err(config_err(format!("--trials does not apply to {command}"))),
        None => Ok(()),
    }
}

struct Plot {
    metric: &'static str,
    title: &'static str,
    x_label: &'static str,
    y_label: &'static str,
    series: Vec<Series>,
}

fn emit<R: Record, C: Serialize>(experiment: &str, args: &CommonArgs, config: &C, rows: &[R], plots: Vec<Plot>) -> Result<()> {
    let ts = output::run_timestamp();
    match &args.out {
        Some(path) => {
            output::write_csv(experiment, rows, BufWriter::new(File::create(path)?), ts)?;
            output::write_sidecar(path, config)?;
        }
        None => output::write_csv(experiment, rows, std::io::stdout().lock(), ts)?,
    }
    if args.plot {
        let dir = output::plot_dir(args.out.as_deref());
        for p in plots {
            let path = dir.join(format!("{experiment}-{}.svg", p.metric));
            line_chart(&path, p.title, p.x_label, p.y_label, &p.series)?;
        }
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Account(args) => {
            reject_trials(&args, "account")?;
            let mut cfg: account::AccountConfig = load_config(args.config.as_deref())?;
            cfg.seed = args.seed.unwrap_or(cfg.seed);
            let rows = account::execute(&cfg)?;
            let plots = vec![Plot {
                metric: "epsilon_vs_n",
                title: "Central epsilon",
                x_label: "n",
                y_label: "epsilon",
                series: account::plot_series(&rows),
            }];
            emit("account", &args, &cfg, &rows, plots)
        }
        Command::OracleCheck(args) => {
            reject_trials(&args, "oracle-check")?;
            let mut cfg: oracle_check::OracleCheckConfig = load_config(args.config.as_deref())?;
            cfg.seed = args.seed.unwrap_or(cfg.seed);
            let rows = oracle_check::execute(&cfg)?;
            emit("oracle-check", &args, &cfg, &rows, Vec::new())?;
            let failed: Vec<String> =
                rows.iter().filter(|r| !r.passed).map(|r| format!("n={} slack={:e}", r.n, r.min_slack)).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::CheckFailed(format!("{} instance(s) violate the bound: {}", failed.len(), failed.join(", "))))
            }
        }
        Command::TvSweep(args) => {
            reject_trials(&args, "tv-sweep")?;
            let mut cfg: tv_sweep::TvSweepConfig = load_config(args.config.as_deref())?;
            cfg.seed = args.seed.unwrap_or(cfg.seed);
            let rows = tv_sweep::execute(&cfg)?;
            let plots = vec![Plot {
                metric: "tv_vs_m",
                title: "Distance to the Gaussian, scaled by sqrt(m)",
                x_label: "m",
                y_label: "distance * sqrt(m)",
                series: tv_sweep::plot_series(&rows),
            }];
            emit("tv-sweep", &args, &cfg, &rows, plots)
        }
        Command::Mean(args) => {
            let mut cfg: mean::MeanConfig = load_config(args.config.as_deref())?;
            cfg.seed = args.seed.unwrap_or(cfg.seed);
            cfg.trials = args.trials.unwrap_or(cfg.trials);
            let rows = mean::execute(&cfg)?;
            let plots = vec![
                Plot {
                    metric: "mae_vs_f_c",
                    title: "Mean estimation error",
                    x_label: "conservative fraction",
                    y_label: "MAE",
                    series: mean::plot_series(&rows, "f_c"),
                },
                Plot {
                    metric: "mae_vs_eps_c",
                    title: "Mean estimation error",
                    x_label: "conservative epsilon",
                    y_label: "MAE",
                    series: mean::plot_series(&rows, "eps_c"),
                },
            ];
            emit("mean", &args, &cfg, &rows, plots)
        }
        Command::Freq(args) => {
            let mut cfg: freq::FreqConfig = load_config(args.config.as_deref())?;
            cfg.seed = args.seed.unwrap_or(cfg.seed);
            cfg.trials = args.trials.unwrap_or(cfg.trials);
            let rows = freq::execute(&cfg)?;
            let plots = vec![
                Plot {
                    metric: "mae_vs_f_c",
                    title: "Frequency estimation error",
                    x_label: "conservative fraction",
                    y_label: "MAE",
                    series: freq::plot_series(&rows, "f_c"),
                },
                Plot {
                    metric: "mae_vs_eps_c",
                    title: "Frequency estimation error",
                    x_label: "conservative epsilon",
                    y_label: "MAE",
                    series: freq::plot_series(&rows, "eps_c"),
                },
            ];
            emit("freq", &args, &cfg, &rows, plots)
        }
        Command::Sgd(args) => {
            let mut cfg: sgd::SgdConfig = load_config(args.config.as_deref())?;
            cfg.seed = args.seed.unwrap_or(cfg.seed);
            cfg.repeats = args.trials.unwrap_or(cfg.repeats);
            let rows = sgd::execute(&cfg)?;
            let plots = vec![Plot {
                metric: "accuracy_vs_epoch",
                title: "Test accuracy",
                x_label: "epoch",
                y_label: "accuracy",
                series: sgd::plot_series(&rows),
            }];
            emit("sgd", &args, &cfg, &rows, plots)
        }
    }
}
