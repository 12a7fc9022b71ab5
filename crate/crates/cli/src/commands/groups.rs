use gspa_core::mechanisms::group_cohort;
use gspa_core::Cohort;

use crate::error::{config_err, Result};

/// One point of a group-fraction or conservative-epsilon sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub sweep: &'static str,
    /// Conservative, moderate, liberal fractions.
    pub fractions: [f64; 3],
    pub epsilons: [f64; 3],
}

impl GridPoint {
    pub fn cohort(&self, n: usize, delta: f64) -> Result<Cohort> {
        Ok(group_cohort(n, &self.fractions, &self.epsilons, delta)?)
    }
}

/// `f_c` sweep at the default epsilons, then `eps_c` sweep at the default `f_c`.
/// The moderate fraction is always `1 - f_c - f_l`.
pub fn sweep(f_c: f64, f_c_grid: &[f64], f_l: f64, epsilons: [f64; 3], eps_c_grid: &[f64]) -> Result<Vec<GridPoint>> {
    let point = |sweep, fc: f64, eps: [f64; 3]| -> Result<GridPoint> {
        let f_m = 1.0 - fc - f_l;
        if !(0.0..=1.0).contains(&fc) || !(0.0..=1.0).contains(&f_l) || f_m < -1e-12 {
            return Err(config_err(format!("group fractions f_c={fc}, f_l={f_l} leave no valid moderate share")));
        }
        Ok(GridPoint { sweep, fractions: [fc, f_m.max(0.0), f_l], epsilons: eps })
    };
    let mut out = Vec::with_capacity(f_c_grid.len() + eps_c_grid.len());
    for &fc in f_c_grid {
        out.push(point("f_c", fc, epsilons)?);
    }
    for &ec in eps_c_grid {
        out.push(point("eps_c", f_c, [ec, epsilons[1], epsilons[2]])?);
    }
    if out.is_empty() {
        return Err(config_err("both sweeps are empty"));
    }
    Ok(out)
}

pub fn default_f_c_grid() -> Vec<f64> {
    let mut g = vec![0.01];
    g.extend((1..=10).map(|k| k as f64 * 0.05));
    g
}

pub fn default_eps_c_grid() -> Vec<f64> {
    vec![0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5]
}
