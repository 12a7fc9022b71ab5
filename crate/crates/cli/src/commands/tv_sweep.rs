use gspa_core::oracle::{tv_multinomial_vs_gaussian, CellConvention, TrinomialComponent};
use gspa_core::PrivacyBudget;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::output::{f, Record};
use crate::plot::Series;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TvSweepConfig {
    pub seed: u64,
    pub m_values: Vec<usize>,
    pub epsilon: f64,
    pub delta: f64,
    pub convention: CellConvention,
}

impl Default for TvSweepConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            m_values: vec![10, 20, 40, 80, 160, 320, 640],
            epsilon: 0.5,
            delta: 0.0,
            convention: CellConvention::Centered,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TvRow {
    pub m: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub sup_cell: f64,
    pub half_l1: f64,
    pub gaussian_mass_on_support: f64,
    pub seed: u64,
}

impl TvRow {
    pub fn sup_cell_scaled(&self) -> f64 {
        self.sup_cell * (self.m as f64).sqrt()
    }

    pub fn half_l1_scaled(&self) -> f64 {
        self.half_l1 * (self.m as f64).sqrt()
    }
}

impl Record for TvRow {
    const HEADER: &'static [&'static str] = &[
        "m",
        "epsilon",
        "delta",
        "sup_cell",
        "half_l1",
        "sup_cell_sqrt_m",
        "half_l1_sqrt_m",
        "gaussian_mass_on_support",
        "seed",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.m.to_string(),
            f(self.epsilon),
            f(self.delta),
            f(self.sup_cell),
            f(self.half_l1),
            f(self.sup_cell_scaled()),
            f(self.half_l1_scaled()),
            f(self.gaussian_mass_on_support),
            self.seed.to_string(),
        ]
    }
}

pub fn execute(cfg: &TvSweepConfig) -> Result<Vec<TvRow>> {
    if cfg.m_values.is_empty() || cfg.m_values.contains(&0) {
        return Err(config_err("m_values must be nonempty and positive"));
    }
    let component = TrinomialComponent::from_budget(&PrivacyBudget::new(cfg.epsilon, cfg.delta)?);
    cfg.m_values
        .par_iter()
        .map(|&m| {
            let r = tv_multinomial_vs_gaussian(&vec![component; m], cfg.convention)?;
            Ok(TvRow {
                m,
                epsilon: cfg.epsilon,
                delta: cfg.delta,
                sup_cell: r.sup_cell,
                half_l1: r.half_l1,
                gaussian_mass_on_support: r.gaussian_mass_on_support,
                seed: cfg.seed,
            })
        })
        .collect()
}

pub fn plot_series(rows: &[TvRow]) -> Vec<Series> {
    vec![
        Series { name: "half-L1 x sqrt(m)".into(), points: rows.iter().map(|r| (r.m as f64, r.half_l1_scaled())).collect() },
        Series { name: "sup-cell x sqrt(m)".into(), points: rows.iter().map(|r| (r.m as f64, r.sup_cell_scaled())).collect() },
    ]
}
