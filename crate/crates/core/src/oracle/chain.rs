use serde::{Deserialize, Serialize};

use super::counts::{build_count_distribution, Hypothesis, TrinomialComponent};
use super::gaussian::{lemma3_gaussian_mu, tv_multinomial_vs_gaussian, CellConvention};
use super::neyman_pearson::symmetrized_tradeoff;
use crate::amplification::{amplify, AmplificationReport, Cohort};
use crate::error::{Error, Result};
use crate::tradeoff::{gdp_tradeoff, GdpParam};

/// Largest cohort handled by exact enumeration.
pub const ENUMERATION_LIMIT: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub n: usize,
    /// 0-based index of the user whose data differs.
    pub distinct_index: usize,
    /// Gaussian parameter over the other `n - 1` users.
    pub mu: GdpParam,
    /// Half-L1 distance of the other users' counts to their Gaussian.
    pub tau: f64,
    /// Largest single-cell discrepancy, for reference.
    pub tau_sup_cell: f64,
    /// `min_alpha T_symm(alpha) - (G_mu(alpha + tau) - tau)`.
    pub min_slack: f64,
    pub argmin_alpha: f64,
}

impl ChainReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.min_slack >= -tol
    }
}

fn check_size(n: usize) -> Result<()> {
    if n > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge { n, limit: ENUMERATION_LIMIT });
    }
    Ok(())
}

fn others(cohort: &Cohort, skip: usize) -> Vec<TrinomialComponent> {
    cohort
        .budgets()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != skip)
        .map(|(_, b)| TrinomialComponent::from_budget(b))
        .collect()
}

/// Checks that the exact symmetrized trade-off between the two count
/// distributions dominates `G_mu(alpha + tau) - tau` on `alpha_grid`.
///
/// `distinct_index` defaults to the user with the largest mixture weight,
/// which is the case the accountant's bound is written for.
pub fn theorem2_chain_check(cohort: &Cohort, alpha_grid: &[f64], distinct_index: Option<usize>) -> Result<ChainReport> {
    let n = cohort.len();
    check_size(n)?;
    if alpha_grid.is_empty() {
        return Err(Error::Empty("alpha grid"));
    }
    let distinct_index = match distinct_index {
        Some(i) => i,
        None => worst_user(cohort),
    };
    let rho0 = build_count_distribution(cohort, distinct_index, Hypothesis::H0)?;
    let rho1 = build_count_distribution(cohort, distinct_index, Hypothesis::H1)?;
    let exact = symmetrized_tradeoff(&rho0, &rho1);

    let v = others(cohort, distinct_index);
    let mu = lemma3_gaussian_mu(&v)?;
    let tv = tv_multinomial_vs_gaussian(&v, CellConvention::Centered)?;
    let tau = tv.half_l1;

    let mut min_slack = f64::INFINITY;
    let mut argmin_alpha = alpha_grid[0];
    for &alpha in alpha_grid {
        let bound = gdp_tradeoff(mu, (alpha + tau).min(1.0))? - tau;
        let slack = exact.eval(alpha) - bound;
        if slack < min_slack {
            min_slack = slack;
            argmin_alpha = alpha;
        }
    }
    Ok(ChainReport { n, distinct_index, mu, tau, tau_sup_cell: tv.sup_cell, min_slack, argmin_alpha })
}

fn worst_user(cohort: &Cohort) -> usize {
    // same tie rule as the accountant, without requiring amplification
    let w: Vec<f64> = cohort.budgets().iter().map(crate::amplification::mixture_weight).collect();
    let mut best = 0;
    for (i, &x) in w.iter().enumerate() {
        if x > w[best] {
            best = i;
        }
    }
    best
}

/// `amplify` with the exact Gaussian-approximation distance of the other
/// users attached. Small cohorts only.
pub fn amplify_with_tv_correction(cohort: &Cohort) -> Result<AmplificationReport> {
    check_size(cohort.len())?;
    let mut report = amplify(cohort)?;
    let v = others(cohort, report.worst_index);
    report.tv_correction = Some(tv_multinomial_vs_gaussian(&v, CellConvention::Centered)?.half_l1);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tradeoff::alpha_grid;

    fn grid() -> Vec<f64> {
        alpha_grid(1e-3).unwrap()
    }

    #[test]
    fn smallest_instance_holds() {
        let cohort = Cohort::from_pairs([(0.0, 0.0), (0.0, 0.0)]).unwrap();
        let r = theorem2_chain_check(&cohort, &grid(), None).unwrap();
        assert!(r.min_slack >= 0.0, "{r:?}");
        assert_eq!(r.distinct_index, 0);
    }

    #[test]
    fn full_delta_spike_gives_identity_curve() {
        let cohort = Cohort::from_pairs([(0.5, 0.0), (0.5, 0.0), (0.5, 0.0), (3.0, 1.0)]).unwrap();
        let r = theorem2_chain_check(&cohort, &grid(), Some(3)).unwrap();
        assert!(r.passed(0.0), "{r:?}");
    }

    #[test]
    fn moderate_uniform_cohorts_hold() {
        for (n, eps) in [(5, 0.1), (8, 1.0), (12, 2.0), (25, 0.5)] {
            let cohort = Cohort::from_pairs(vec![(eps, 0.0); n]).unwrap();
            let r = theorem2_chain_check(&cohort, &grid(), None).unwrap();
            assert!(r.passed(1e-9), "n={n} eps={eps}: {r:?}");
            let amp = amplify(&cohort).unwrap();
            assert!((r.mu.mu() - amp.mu.mu()).abs() < 1e-12);
        }
    }

    #[test]
    fn heterogeneous_cohort_holds_for_every_distinct_user() {
        let cohort = Cohort::from_pairs([(0.1, 0.0), (1.5, 0.01), (0.7, 0.0), (2.0, 0.0), (0.3, 0.05), (1.0, 0.0)]).unwrap();
        for i in 0..cohort.len() {
            let r = theorem2_chain_check(&cohort, &grid(), Some(i)).unwrap();
            assert!(r.passed(1e-9), "index {i}: {r:?}");
        }
    }

    #[test]
    fn size_limit_is_enforced() {
        let cohort = Cohort::from_pairs(vec![(0.5, 0.0); ENUMERATION_LIMIT + 1]).unwrap();
        assert!(matches!(
            theorem2_chain_check(&cohort, &grid(), None),
            Err(Error::EnumerationTooLarge { .. })
        ));
        assert!(amplify_with_tv_correction(&cohort).is_err());
    }

    #[test]
    fn correction_is_attached() {
        let cohort = Cohort::from_pairs(vec![(0.5, 0.0); 30]).unwrap();
        let r = amplify_with_tv_correction(&cohort).unwrap();
        let t = r.tv_correction.unwrap();
        assert!(t > 0.0 && t < 1.0);
        assert_eq!(r.mu, amplify(&cohort).unwrap().mu);
    }
}
