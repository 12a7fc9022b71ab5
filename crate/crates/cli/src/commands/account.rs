use gspa_core::amplification::{budget_distribution_sample, BudgetDistribution, SampleOptions};
use gspa_core::mechanisms::derive_seed;
use gspa_core::oracle::amplify_with_tv_correction;
use gspa_core::{amplify, central_budget, Cohort};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::output::{f, Record};
use crate::plot::Series;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AccountConfig {
    pub seed: u64,
    pub distributions: Vec<BudgetDistribution>,
    pub n_values: Vec<usize>,
    pub target_deltas: Vec<f64>,
    /// Local delta given to every sampled user.
    pub local_delta: f64,
    /// Repeat the first this-many sampled budgets cyclically for larger n.
    pub repeat_first: Option<usize>,
    /// Explicit `(epsilon, delta)` list; replaces the distribution sweep.
    pub budgets: Option<Vec<(f64, f64)>>,
    /// Attach the exact Gaussian-approximation distance (small n only).
    pub tv_correction: bool,
}

impl Default for AccountConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            distributions: vec![
                BudgetDistribution::Unif1,
                BudgetDistribution::Unif2,
                BudgetDistribution::Constant,
                BudgetDistribution::Mixed,
            ],
            n_values: (1..=10).map(|k| k * 1000).collect(),
            target_deltas: vec![1e-4],
            local_delta: 0.0,
            repeat_first: Some(1000),
            budgets: None,
            tv_correction: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AccountRow {
    pub cohort: String,
    pub n: usize,
    pub mu: f64,
    pub denominator: f64,
    pub worst_index: usize,
    pub max_local_epsilon: f64,
    pub target_delta: f64,
    pub central_epsilon: f64,
    pub tv_correction: Option<f64>,
    pub seed: u64,
}

impl Record for AccountRow {
    const HEADER: &'static [&'static str] = &[
        "cohort",
        "n",
        "mu",
        "denominator",
        "worst_index",
        "max_local_epsilon",
        "target_delta",
        "central_epsilon",
        "tv_correction",
        "seed",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.cohort.clone(),
            self.n.to_string(),
            f(self.mu),
            f(self.denominator),
            self.worst_index.to_string(),
            f(self.max_local_epsilon),
            f(self.target_delta),
            f(self.central_epsilon),
            self.tv_correction.map(f).unwrap_or_default(),
            self.seed.to_string(),
        ]
    }
}

fn rows_for(label: &str, cohort: &Cohort, cfg: &AccountConfig) -> Result<Vec<AccountRow>> {
    let report = if cfg.tv_correction { amplify_with_tv_correction(cohort)? } else { amplify(cohort)? };
    cfg.target_deltas
        .iter()
        .map(|&d| {
            Ok(AccountRow {
                cohort: label.to_string(),
                n: cohort.len(),
                mu: report.mu.mu(),
                denominator: report.denominator,
                worst_index: report.worst_index,
                max_local_epsilon: cohort.max_epsilon(),
                target_delta: d,
                central_epsilon: central_budget(cohort, d)?.epsilon(),
                tv_correction: report.tv_correction,
                seed: cfg.seed,
            })
        })
        .collect()
}

pub fn execute(cfg: &AccountConfig) -> Result<Vec<AccountRow>> {
    if cfg.target_deltas.is_empty() {
        return Err(config_err("target_deltas must not be empty"));
    }
    if let Some(budgets) = &cfg.budgets {
        let cohort = Cohort::from_pairs(budgets.iter().copied())?;
        return rows_for("explicit", &cohort, cfg);
    }
    if cfg.distributions.is_empty() || cfg.n_values.is_empty() {
        return Err(config_err("distributions and n_values must not be empty"));
    }
    let opts = SampleOptions { delta: cfg.local_delta, repeat_first: cfg.repeat_first };
    let mut rows = Vec::new();
    for (k, &dist) in cfg.distributions.iter().enumerate() {
        // one seed per distribution so growing n extends the same draws
        let seed = derive_seed(cfg.seed, k as u64);
        for &n in &cfg.n_values {
            let cohort = budget_distribution_sample(dist, n, seed, opts)?;
            rows.extend(rows_for(dist.name(), &cohort, cfg)?);
        }
    }
    Ok(rows)
}

pub fn plot_series(rows: &[AccountRow]) -> Vec<Series> {
    let mut names: Vec<&str> = Vec::new();
    for r in rows {
        if !names.contains(&r.cohort.as_str()) {
            names.push(&r.cohort);
        }
    }
    let delta = rows.first().map(|r| r.target_delta);
    names
        .into_iter()
        .map(|name| Series {
            name: name.to_string(),
            points: rows
                .iter()
                .filter(|r| r.cohort == name && Some(r.target_delta) == delta)
                .map(|r| (r.n as f64, r.central_epsilon))
                .collect(),
        })
        .collect()
}
