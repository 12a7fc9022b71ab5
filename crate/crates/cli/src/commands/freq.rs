use gspa_core::amplify;
use gspa_core::mechanisms::{derive_seed, freq_estimate, NoiseSource};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::groups::{default_eps_c_grid, default_f_c_grid, sweep, GridPoint};
use crate::error::{config_err, Result};
use crate::output::{f, Record};
use crate::plot::Series;
use crate::stats;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FreqConfig {
    pub seed: u64,
    pub n: usize,
    pub trials: usize,
    /// Fraction of records with the attribute set.
    pub density: f64,
    pub f_c: f64,
    pub f_l: f64,
    pub f_c_grid: Vec<f64>,
    /// Conservative, moderate, liberal.
    pub epsilons: [f64; 3],
    pub eps_c_grid: Vec<f64>,
    pub local_delta: f64,
    /// Report every bit truthfully (test seam).
    pub zero_noise: bool,
}

impl Default for FreqConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            n: 10_000,
            trials: 1000,
            density: 0.7,
            f_c: 0.54,
            f_l: 0.09,
            f_c_grid: default_f_c_grid(),
            epsilons: [0.1, 0.5, 1.0],
            eps_c_grid: default_eps_c_grid(),
            local_delta: 0.0,
            zero_noise: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FreqRow {
    pub sweep: &'static str,
    pub point: GridPoint,
    pub n: usize,
    pub density: f64,
    pub trials: usize,
    pub mae: f64,
    pub mae_ci95: f64,
    pub mean_z: f64,
    pub se_z: f64,
    pub mu: f64,
    pub seed: u64,
}

impl Record for FreqRow {
    const HEADER: &'static [&'static str] = &[
        "sweep", "f_c", "f_m", "f_l", "eps_c", "eps_m", "eps_l", "n", "density", "trials", "mae", "mae_ci95", "mean_z", "se_z",
        "mu", "seed",
    ];

    fn fields(&self) -> Vec<String> {
        let p = &self.point;
        vec![
            self.sweep.to_string(),
            f(p.fractions[0]),
            f(p.fractions[1]),
            f(p.fractions[2]),
            f(p.epsilons[0]),
            f(p.epsilons[1]),
            f(p.epsilons[2]),
            self.n.to_string(),
            f(self.density),
            self.trials.to_string(),
            f(self.mae),
            f(self.mae_ci95),
            f(self.mean_z),
            f(self.se_z),
            f(self.mu),
            self.seed.to_string(),
        ]
    }
}

impl FreqRow {
    /// Standard errors between `mean_z` and the configured density.
    pub fn bias_in_se(&self) -> f64 {
        (self.mean_z - self.density).abs() / self.se_z
    }
}

pub fn execute(cfg: &FreqConfig) -> Result<Vec<FreqRow>> {
    if cfg.trials == 0 || cfg.n < 2 {
        return Err(config_err("need trials >= 1 and n >= 2"));
    }
    if !(0.0..=1.0).contains(&cfg.density) {
        return Err(config_err("density must lie in [0, 1]"));
    }
    let ones = (cfg.density * cfg.n as f64).round() as usize;
    let truth = ones as f64 / cfg.n as f64;
    let points = sweep(cfg.f_c, &cfg.f_c_grid, cfg.f_l, cfg.epsilons, &cfg.eps_c_grid)?;
    points
        .iter()
        .map(|point| {
            let cohort = point.cohort(cfg.n, cfg.local_delta)?;
            let zs: Vec<f64> = (0..cfg.trials as u64)
                .into_par_iter()
                .map(|t| {
                    let trial = derive_seed(cfg.seed, t);
                    let mut bits: Vec<bool> = (0..cfg.n).map(|i| i < ones).collect();
                    bits.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(trial, 1)));
                    let noise = if cfg.zero_noise { NoiseSource::Zero } else { NoiseSource::Seeded(derive_seed(trial, 2)) };
                    Ok(freq_estimate(&bits, &cohort, &noise, derive_seed(trial, 3))?.z)
                })
                .collect::<Result<_>>()?;
            let errors: Vec<f64> = zs.iter().map(|z| (z - truth).abs()).collect();
            Ok(FreqRow {
                sweep: point.sweep,
                point: *point,
                n: cfg.n,
                density: cfg.density,
                trials: cfg.trials,
                mae: stats::mean(&errors),
                mae_ci95: stats::ci95(&errors),
                mean_z: stats::mean(&zs),
                se_z: stats::standard_error(&zs),
                mu: amplify(&cohort)?.mu.mu(),
                seed: cfg.seed,
            })
        })
        .collect()
}

pub fn curve(rows: &[FreqRow], sweep: &str) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| r.sweep == sweep)
        .map(|r| (if sweep == "f_c" { r.point.fractions[0] } else { r.point.epsilons[0] }, r.mae))
        .collect()
}

pub fn trend(rows: &[FreqRow], sweep: &str) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) = curve(rows, sweep).into_iter().unzip();
    stats::spearman(&x, &y)
}

pub fn plot_series(rows: &[FreqRow], sweep: &str) -> Vec<Series> {
    vec![Series { name: "MAE".into(), points: curve(rows, sweep) }]
}
