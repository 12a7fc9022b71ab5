use gspa_core::mechanisms::{derive_seed, mean_estimate, ClipRange, NoiseSource};
use gspa_core::amplify;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::groups::{default_eps_c_grid, default_f_c_grid, sweep, GridPoint};
use crate::error::{config_err, Result};
use crate::output::{f, Record};
use crate::plot::Series;
use crate::stats;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeanConfig {
    pub seed: u64,
    pub n: usize,
    pub trials: usize,
    pub clip: (f64, f64),
    /// Laplace sensitivity; the clip width when absent.
    pub sensitivity: Option<f64>,
    pub data_mean: f64,
    pub data_sd: f64,
    pub f_c: f64,
    pub f_l: f64,
    pub f_c_grid: Vec<f64>,
    /// Conservative, moderate, liberal.
    pub epsilons: [f64; 3],
    pub eps_c_grid: Vec<f64>,
    pub local_delta: f64,
    /// Skip the Laplace noise (test seam).
    pub zero_noise: bool,
}

impl Default for MeanConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            n: 10_000,
            trials: 1000,
            clip: (20.0, 80.0),
            sensitivity: None,
            data_mean: 50.0,
            data_sd: 10.0,
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
pub struct MeanRow {
    pub sweep: &'static str,
    pub point: GridPoint,
    pub n: usize,
    pub trials: usize,
    pub mae: f64,
    pub mae_ci95: f64,
    pub bias: f64,
    pub mu: f64,
    pub seed: u64,
}

impl Record for MeanRow {
    const HEADER: &'static [&'static str] =
        &["sweep", "f_c", "f_m", "f_l", "eps_c", "eps_m", "eps_l", "n", "trials", "mae", "mae_ci95", "bias", "mu", "seed"];

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
            self.trials.to_string(),
            f(self.mae),
            f(self.mae_ci95),
            f(self.bias),
            f(self.mu),
            self.seed.to_string(),
        ]
    }
}

pub fn execute(cfg: &MeanConfig) -> Result<Vec<MeanRow>> {
    if cfg.trials == 0 || cfg.n < 2 {
        return Err(config_err("need trials >= 1 and n >= 2"));
    }
    let mut clip = ClipRange::new(cfg.clip.0, cfg.clip.1)?;
    if let Some(s) = cfg.sensitivity {
        clip = clip.with_sensitivity(s);
    }
    let data_dist = Normal::new(cfg.data_mean, cfg.data_sd).map_err(|e| config_err(e.to_string()))?;
    let points = sweep(cfg.f_c, &cfg.f_c_grid, cfg.f_l, cfg.epsilons, &cfg.eps_c_grid)?;
    points
        .iter()
        .map(|point| {
            let cohort = point.cohort(cfg.n, cfg.local_delta)?;
            // trial t uses the same data and per-user noise at every grid point
            let outcomes: Vec<(f64, f64)> = (0..cfg.trials as u64)
                .into_par_iter()
                .map(|t| {
                    let trial = derive_seed(cfg.seed, t);
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(trial, 1));
                    let data: Vec<f64> = (0..cfg.n).map(|_| data_dist.sample(&mut rng)).collect();
                    let truth = data.iter().map(|&x| clip.clip(x)).sum::<f64>() / cfg.n as f64;
                    let noise = if cfg.zero_noise { NoiseSource::Zero } else { NoiseSource::Seeded(derive_seed(trial, 2)) };
                    let est = mean_estimate(&data, &cohort, clip, &noise, derive_seed(trial, 3))?;
                    Ok(((est.z - truth).abs(), est.z - truth))
                })
                .collect::<Result<_>>()?;
            let errors: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
            let signed: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
            Ok(MeanRow {
                sweep: point.sweep,
                point: *point,
                n: cfg.n,
                trials: cfg.trials,
                mae: stats::mean(&errors),
                mae_ci95: stats::ci95(&errors),
                bias: stats::mean(&signed),
                mu: amplify(&cohort)?.mu.mu(),
                seed: cfg.seed,
            })
        })
        .collect()
}

/// `(x, mae)` for one sweep, x being `f_c` or `eps_c`.
pub fn curve(rows: &[MeanRow], sweep: &str) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| r.sweep == sweep)
        .map(|r| (if sweep == "f_c" { r.point.fractions[0] } else { r.point.epsilons[0] }, r.mae))
        .collect()
}

pub fn trend(rows: &[MeanRow], sweep: &str) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) = curve(rows, sweep).into_iter().unzip();
    stats::spearman(&x, &y)
}

pub fn plot_series(rows: &[MeanRow], sweep: &str) -> Vec<Series> {
    vec![Series { name: "MAE".into(), points: curve(rows, sweep) }]
}
