use gspa_core::oracle::theorem2_chain_check;
use gspa_core::tradeoff::alpha_grid;
use gspa_core::Cohort;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::output::{f, Record};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleCheckConfig {
    pub seed: u64,
    pub n_values: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub delta: f64,
    pub alpha_step: f64,
    /// Slack below `-tolerance` counts as a violation.
    pub tolerance: f64,
    /// 0-based user whose data differs; the largest-weight user when absent.
    pub distinct_index: Option<usize>,
    /// Explicit `(epsilon, delta)` list checked instead of the uniform grid.
    pub budgets: Option<Vec<(f64, f64)>>,
}

impl Default for OracleCheckConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            n_values: (2..=12).chain([25, 50, 100]).collect(),
            epsilons: vec![0.1, 0.5, 1.0, 2.0],
            delta: 0.0,
            alpha_step: 1e-3,
            tolerance: 1e-9,
            distinct_index: None,
            budgets: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleRow {
    pub cohort: String,
    pub n: usize,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub distinct_index: usize,
    pub mu: f64,
    pub tau_half_l1: f64,
    pub tau_sup_cell: f64,
    pub min_slack: f64,
    pub argmin_alpha: f64,
    pub passed: bool,
    pub seed: u64,
}

impl Record for OracleRow {
    const HEADER: &'static [&'static str] = &[
        "cohort",
        "n",
        "epsilon",
        "delta",
        "distinct_index",
        "mu",
        "tau_half_l1",
        "tau_sup_cell",
        "min_slack",
        "argmin_alpha",
        "passed",
        "seed",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.cohort.clone(),
            self.n.to_string(),
            self.epsilon.map(f).unwrap_or_default(),
            self.delta.map(f).unwrap_or_default(),
            self.distinct_index.to_string(),
            f(self.mu),
            f(self.tau_half_l1),
            f(self.tau_sup_cell),
            f(self.min_slack),
            f(self.argmin_alpha),
            self.passed.to_string(),
            self.seed.to_string(),
        ]
    }
}

pub fn execute(cfg: &OracleCheckConfig) -> Result<Vec<OracleRow>> {
    let grid = alpha_grid(cfg.alpha_step)?;
    let instances: Vec<(String, Option<(f64, f64)>, Cohort)> = match &cfg.budgets {
        Some(b) => vec![("explicit".into(), None, Cohort::from_pairs(b.iter().copied())?)],
        None => {
            if cfg.n_values.is_empty() || cfg.epsilons.is_empty() {
                return Err(config_err("n_values and epsilons must not be empty"));
            }
            let mut v = Vec::new();
            for &n in &cfg.n_values {
                for &eps in &cfg.epsilons {
                    v.push(("uniform".into(), Some((eps, cfg.delta)), Cohort::from_pairs(vec![(eps, cfg.delta); n])?));
                }
            }
            v
        }
    };
    instances
        .par_iter()
        .map(|(label, params, cohort)| {
            let r = theorem2_chain_check(cohort, &grid, cfg.distinct_index)?;
            Ok(OracleRow {
                cohort: label.clone(),
                n: r.n,
                epsilon: params.map(|p| p.0),
                delta: params.map(|p| p.1),
                distinct_index: r.distinct_index,
                mu: r.mu.mu(),
                tau_half_l1: r.tau,
                tau_sup_cell: r.tau_sup_cell,
                min_slack: r.min_slack,
                argmin_alpha: r.argmin_alpha,
                passed: r.passed(cfg.tolerance),
                seed: cfg.seed,
            })
        })
        .collect()
}
