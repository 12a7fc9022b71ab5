//! The shuffle-model accountant.
//!
//! Each user `i` contributes a mixture weight `a_i = (1 - delta_i) / (1 + e^eps_i)`:
//! the probability that the user's report is a fair coin between the two
//! hypotheses. The user whose data differs is excluded, and the worst case
//! is the one with the largest weight, giving
//! `mu = sqrt(2 / (sum_i a_i - max_i a_i))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tradeoff::{compose_gdp, dp_epsilon_for_delta, GdpParam, PrivacyBudget};

/// Local budgets of every user taking part in one shuffle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cohort {
    budgets: Vec<PrivacyBudget>,
}

impl Cohort {
    pub fn new(budgets: Vec<PrivacyBudget>) -> Result<Self> {
        if budgets.len() < 2 {
            return Err(Error::CohortTooSmall(budgets.len()));
        }
        Ok(Self { budgets })
    }

    /// Cohort of `n` identical budgets.
    pub fn uniform(budget: PrivacyBudget, n: usize) -> Result<Self> {
        Self::new(vec![budget; n])
    }

    /// Builds from `(epsilon, delta)` pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let budgets = pairs
            .into_iter()
            .map(|(e, d)| PrivacyBudget::new(e, d))
            .collect::<Result<Vec<_>>>()?;
        Self::new(budgets)
    }

    pub fn budgets(&self) -> &[PrivacyBudget] {
        &self.budgets
    }

    pub fn len(&self) -> usize {
        self.budgets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.budgets.is_empty()
    }

    pub fn max_epsilon(&self) -> f64 {
        self.budgets.iter().map(PrivacyBudget::epsilon).fold(0.0, f64::max)
    }
}

/// `(1 - delta) / (1 + e^eps)`, the weight on each of the two indistinguishable
/// mixture components of a user's local randomizer.
pub fn mixture_weight(budget: &PrivacyBudget) -> f64 {
    // 1 / (1 + e^eps) = e^-eps / (1 + e^-eps) avoids inf / inf for large eps
    let e = (-budget.epsilon()).exp();
    (1.0 - budget.delta()) * e / (1.0 + e)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplificationReport {
    pub mu: GdpParam,
    /// `sum_i a_i - max_i a_i`.
    pub denominator: f64,
    /// Index of the user with the largest weight (first one on ties).
    pub worst_index: usize,
    pub per_user_weights: Vec<f64>,
    /// Exact distance to the Gaussian approximation, when computed.
    pub tv_correction: Option<f64>,
}

pub fn amplify(cohort: &Cohort) -> Result<AmplificationReport> {
    let weights: Vec<f64> = cohort.budgets().iter().map(mixture_weight).collect();
    let mut worst_index = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > weights[worst_index] {
            worst_index = i;
        }
    }
    let total: f64 = weights.iter().sum();
    let denominator = total - weights[worst_index];
    if !(denominator > 0.0) {
        return Err(Error::NoAmplification(denominator));
    }
    let mu = GdpParam::new((2.0 / denominator).sqrt())?;
    Ok(AmplificationReport {
        mu,
        denominator,
        worst_index,
        per_user_weights: weights,
        tv_correction: None,
    })
}

/// `sqrt(T) mu` for `T` adaptive rounds over the same cohort.
pub fn amplify_composed(cohort: &Cohort, epochs: usize) -> Result<GdpParam> {
    if epochs < 1 {
        return Err(Error::invalid("number of epochs must be at least 1"));
    }
    let mu = amplify(cohort)?.mu;
    compose_gdp(&vec![mu; epochs])
}

/// Central `(epsilon, target_delta)` implied by the amplified GDP guarantee.
pub fn central_budget(cohort: &Cohort, target_delta: f64) -> Result<PrivacyBudget> {
    let mu = amplify(cohort)?.mu;
    let eps = dp_epsilon_for_delta(mu, target_delta)?;
    PrivacyBudget::new(eps, target_delta)
}

/// Local budget distributions used across the experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BudgetDistribution {
    /// `U(0.01, 1)`
    Unif1,
    /// `U(0.01, 2)`
    Unif2,
    /// `U(0.5, 1)`
    Unif3,
    /// every user at 0.5
    Constant,
    /// half the users at 0.5, half at 0.01
    Mixed,
}

impl BudgetDistribution {
    pub const ALL: [BudgetDistribution; 5] = [
        BudgetDistribution::Unif1,
        BudgetDistribution::Unif2,
        BudgetDistribution::Unif3,
        BudgetDistribution::Constant,
        BudgetDistribution::Mixed,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BudgetDistribution::Unif1 => "unif1",
            BudgetDistribution::Unif2 => "unif2",
            BudgetDistribution::Unif3 => "unif3",
            BudgetDistribution::Constant => "constant",
            BudgetDistribution::Mixed => "mixed",
        }
    }

    fn epsilons(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self {
            BudgetDistribution::Unif1 => (0..n).map(|_| rng.gen_range(0.01..=1.0)).collect(),
            BudgetDistribution::Unif2 => (0..n).map(|_| rng.gen_range(0.01..=2.0)).collect(),
            BudgetDistribution::Unif3 => (0..n).map(|_| rng.gen_range(0.5..=1.0)).collect(),
            BudgetDistribution::Constant => vec![0.5; n],
            BudgetDistribution::Mixed => {
                let high = n - n / 2;
                (0..n).map(|i| if i < high { 0.5 } else { 0.01 }).collect()
            }
        }
    }
}

impl std::fmt::Display for BudgetDistribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BudgetDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BudgetDistribution::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown budget distribution '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleOptions {
    /// Local delta given to every user.
    pub delta: f64,
    /// Draw only this many budgets and repeat them cyclically up to `n`.
    pub repeat_first: Option<usize>,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self {
            delta: 0.0,
            repeat_first: None,
        }
    }
}

/// Draws a cohort of `n` local budgets, deterministically per seed.
pub fn budget_distribution_sample(
    dist: BudgetDistribution,
    n: usize,
    seed: u64,
    options: SampleOptions,
) -> Result<Cohort> {
    if n < 2 {
        return Err(Error::CohortTooSmall(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = match options.repeat_first {
        Some(0) => return Err(Error::invalid("repeat_first must be positive")),
        Some(k) if k < n => k,
        _ => n,
    };
    let drawn = dist.epsilons(base, &mut rng);
    let budgets = drawn
        .iter()
        .cycle()
        .take(n)
        .map(|&e| PrivacyBudget::new(e, options.delta))
        .collect::<Result<Vec<_>>>()?;
    Cohort::new(budgets)
}
