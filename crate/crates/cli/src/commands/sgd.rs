use std::path::PathBuf;

use gspa_core::amplification::{budget_distribution_sample, BudgetDistribution, SampleOptions};
use gspa_core::dpsgd::{load_csv, load_idx, synthetic_blobs, train, Dataset, ModelSpec, TrainConfig};
use gspa_core::mechanisms::{derive_seed, NoiseSource};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::output::{f, Record};
use crate::plot::Series;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatasetSpec {
    Blobs { n_train: usize, n_test: usize, dim: usize, classes: usize, separation: f64, seed: u64 },
    /// Numeric CSV files whose last column is `label`.
    Csv { train: PathBuf, test: PathBuf },
    /// IDX image/label pairs (MNIST layout).
    Idx {
        train_images: PathBuf,
        train_labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
        limit: Option<usize>,
    },
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec::Blobs { n_train: 2000, n_test: 400, dim: 20, classes: 4, separation: 4.0, seed: 99 }
    }
}

impl DatasetSpec {
    pub fn load(&self) -> Result<(Dataset, Dataset)> {
        Ok(match self {
            DatasetSpec::Blobs { n_train, n_test, dim, classes, separation, seed } => {
                let all = synthetic_blobs(n_train + n_test, *dim, *classes, *separation, *seed)?;
                all.split(*n_test, derive_seed(*seed, 1))?
            }
            DatasetSpec::Csv { train, test } => (load_csv(train)?, load_csv(test)?),
            DatasetSpec::Idx { train_images, train_labels, test_images, test_labels, limit } => {
                (load_idx(train_images, train_labels, *limit)?, load_idx(test_images, test_labels, None)?)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgdConfig {
    pub seed: u64,
    pub repeats: usize,
    pub distributions: Vec<BudgetDistribution>,
    pub clip_bound: f64,
    pub step_size: f64,
    pub epochs: usize,
    pub clients: usize,
    /// Local delta of every client; must be positive for the Gaussian noise.
    pub local_delta: f64,
    pub target_delta: f64,
    pub model: ModelSpec,
    pub pca_components: Option<usize>,
    pub dataset: DatasetSpec,
    /// Train without noise (test seam).
    pub zero_noise: bool,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            repeats: 5,
            distributions: vec![BudgetDistribution::Constant, BudgetDistribution::Unif2, BudgetDistribution::Unif3],
            clip_bound: 2.0,
            step_size: 0.05,
            epochs: 10,
            clients: 50,
            local_delta: 1e-5,
            target_delta: 1e-5,
            model: ModelSpec::LinearSoftmax,
            pca_components: None,
            dataset: DatasetSpec::default(),
            zero_noise: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SgdRow {
    pub distribution: BudgetDistribution,
    pub repeat: usize,
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub accounted_mu: f64,
    pub central_epsilon: f64,
    pub seed: u64,
}

impl Record for SgdRow {
    const HEADER: &'static [&'static str] = &[
        "distribution",
        "repeat",
        "epoch",
        "train_loss",
        "train_accuracy",
        "test_accuracy",
        "accounted_mu",
        "central_epsilon",
        "seed",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.distribution.to_string(),
            self.repeat.to_string(),
            self.epoch.to_string(),
            f(self.train_loss),
            f(self.train_accuracy),
            f(self.test_accuracy),
            f(self.accounted_mu),
            f(self.central_epsilon),
            self.seed.to_string(),
        ]
    }
}

pub fn execute(cfg: &SgdConfig) -> Result<Vec<SgdRow>> {
    if cfg.repeats == 0 || cfg.distributions.is_empty() {
        return Err(config_err("need repeats >= 1 and at least one distribution"));
    }
    let (train_set, test_set) = cfg.dataset.load()?;
    let jobs: Vec<(BudgetDistribution, usize)> =
        cfg.distributions.iter().flat_map(|&d| (0..cfg.repeats).map(move |r| (d, r))).collect();
    let per_job: Vec<Vec<SgdRow>> = jobs
        .par_iter()
        .map(|&(dist, repeat)| {
            // every distribution sees the same seeds within a repeat
            let rep = derive_seed(cfg.seed, repeat as u64);
            let opts = SampleOptions { delta: cfg.local_delta, repeat_first: None };
            let cohort = budget_distribution_sample(dist, cfg.clients, derive_seed(rep, 1), opts)?;
            let tc = TrainConfig {
                clip_bound: cfg.clip_bound,
                step_size: cfg.step_size,
                epochs: cfg.epochs,
                clients: cfg.clients,
                cohort,
                model: cfg.model,
                pca_components: cfg.pca_components,
                target_delta: cfg.target_delta,
                seed: derive_seed(rep, 2),
            };
            let noise = if cfg.zero_noise { NoiseSource::Zero } else { NoiseSource::Seeded(derive_seed(rep, 3)) };
            let report = train(&train_set, &test_set, &tc, &noise)?;
            Ok(report
                .epochs
                .iter()
                .map(|e| SgdRow {
                    distribution: dist,
                    repeat,
                    epoch: e.epoch,
                    train_loss: e.train_loss,
                    train_accuracy: e.train_accuracy,
                    test_accuracy: e.test_accuracy,
                    accounted_mu: report.accounted_mu.mu(),
                    central_epsilon: report.central_budget.epsilon(),
                    seed: cfg.seed,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_job.into_iter().flatten().collect())
}

/// Mean final-epoch test accuracy per distribution, in config order.
pub fn final_accuracy(rows: &[SgdRow]) -> Vec<(BudgetDistribution, f64)> {
    let last = rows.iter().map(|r| r.epoch).max().unwrap_or(0);
    let mut out: Vec<(BudgetDistribution, f64, usize)> = Vec::new();
    for r in rows.iter().filter(|r| r.epoch == last) {
        match out.iter_mut().find(|o| o.0 == r.distribution) {
            Some(o) => {
                o.1 += r.test_accuracy;
                o.2 += 1;
            }
            None => out.push((r.distribution, r.test_accuracy, 1)),
        }
    }
    out.into_iter().map(|(d, s, k)| (d, s / k as f64)).collect()
}

/// Mean test accuracy per epoch, one series per distribution.
pub fn plot_series(rows: &[SgdRow]) -> Vec<Series> {
    let mut dists: Vec<BudgetDistribution> = Vec::new();
    for r in rows {
        if !dists.contains(&r.distribution) {
            dists.push(r.distribution);
        }
    }
    dists
        .into_iter()
        .map(|d| {
            let mine: Vec<&SgdRow> = rows.iter().filter(|r| r.distribution == d).collect();
            let last = mine.iter().map(|r| r.epoch).max().unwrap_or(0);
            let points = (1..=last)
                .map(|e| {
                    let accs: Vec<f64> = mine.iter().filter(|r| r.epoch == e).map(|r| r.test_accuracy).collect();
                    (e as f64, accs.iter().sum::<f64>() / accs.len() as f64)
                })
                .collect();
            Series { name: d.to_string(), points }
        })
        .collect()
}
