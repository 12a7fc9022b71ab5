use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::data::{Dataset, Pca};
use super::model::{Model, ModelSpec};
use crate::amplification::{amplify, central_budget, Cohort};
use crate::error::{Error, Result};
use crate::mechanisms::{derive_seed, NoiseSource};
use crate::tradeoff::{compose_gdp, GdpParam, PrivacyBudget};

/// Gaussian noise scale `(2C/m) sqrt(2 ln(1.25/delta)) / epsilon`.
pub fn noise_scale(clip_bound: f64, clients: usize, budget: PrivacyBudget) -> Result<f64> {
    let (eps, delta) = (budget.epsilon(), budget.delta());
    if eps == 0.0 {
        return Err(Error::NonInformativeBudget);
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("Gaussian noise needs 0 < delta < 1, got {delta}")));
    }
    if !(clip_bound > 0.0) || clients == 0 {
        return Err(Error::invalid("clip bound and client count must be positive"));
    }
    Ok(2.0 * clip_bound / clients as f64 * (2.0 * (1.25 / delta).ln()).sqrt() / eps)
}

/// Scales `g` into the L2 ball of radius `bound`.
pub fn clip_gradient(g: &[f64], bound: f64) -> Vec<f64> {
    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let factor = (norm / bound).max(1.0);
    g.iter().map(|v| v / factor).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub clip_bound: f64,
    pub step_size: f64,
    pub epochs: usize,
    pub clients: usize,
    /// One budget per client; every delta must lie in (0, 1).
    pub cohort: Cohort,
    pub model: ModelSpec,
    pub pca_components: Option<usize>,
    /// Central delta at which the composed guarantee is reported.
    pub target_delta: f64,
    pub seed: u64,
}

impl TrainConfig {
    pub fn validate(&self, samples: usize) -> Result<()> {
        if !(self.clip_bound > 0.0 && self.clip_bound.is_finite()) {
            return Err(Error::invalid("clip bound must be positive"));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::invalid("step size must be positive"));
        }
        if self.epochs == 0 || self.clients == 0 {
            return Err(Error::invalid("epochs and clients must be positive"));
        }
        if self.cohort.len() != self.clients {
            return Err(Error::LengthMismatch { expected: self.clients, actual: self.cohort.len() });
        }
        if samples == 0 || !samples.is_multiple_of(self.clients) {
            return Err(Error::invalid(format!("{samples} samples do not split evenly over {} clients", self.clients)));
        }
        for b in self.cohort.budgets() {
            noise_scale(self.clip_bound, self.clients, *b)?;
        }
        if !(self.target_delta > 0.0 && self.target_delta < 1.0) {
            return Err(Error::invalid("target delta must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub config: TrainConfig,
    pub final_parameters: Vec<f64>,
    pub epochs: Vec<EpochStats>,
    /// `sqrt(T) mu` for the client cohort.
    pub accounted_mu: GdpParam,
    pub central_budget: PrivacyBudget,
    /// Largest update norm before noise, never above the clip bound.
    pub max_clipped_norm: f64,
}

impl TrainReport {
    pub fn final_test_accuracy(&self) -> f64 {
        self.epochs.last().map_or(0.0, |e| e.test_accuracy)
    }
}

fn accuracy(model: &Model, theta: &[f64], data: &Dataset) -> f64 {
    let hits = (0..data.len()).filter(|&i| model.predict(theta, data.row(i)) == data.label(i)).count();
    hits as f64 / data.len() as f64
}

/// Shuffled per-client noisy SGD.
///
/// Each epoch visits the clients in a fresh random order. A client's update
/// is its shard's mean gradient, clipped to `clip_bound`, plus Gaussian noise
/// at that client's own scale. `noise` supplies the Gaussian draws (stream
/// `t` for the `t`-th update); the permutation and initial weights come from
/// `config.seed`.
pub fn train(train_set: &Dataset, test_set: &Dataset, config: &TrainConfig, noise: &NoiseSource) -> Result<TrainReport> {
    config.validate(train_set.len())?;
    let (train_set, test_set) = match config.pca_components {
        Some(k) => {
            let pca = Pca::fit(train_set, k)?;
            (pca.transform(train_set)?, pca.transform(test_set)?)
        }
        None => (train_set.clone(), test_set.clone()),
    };
    if test_set.dim() != train_set.dim() {
        return Err(Error::LengthMismatch { expected: train_set.dim(), actual: test_set.dim() });
    }
    let classes = train_set.classes().max(test_set.classes());
    let model = Model::new(config.model, train_set.dim(), classes)?;
    let sigmas: Vec<f64> = config
        .cohort
        .budgets()
        .iter()
        .map(|b| noise_scale(config.clip_bound, config.clients, *b))
        .collect::<Result<_>>()?;

    let mut init = NoiseSource::Seeded(derive_seed(config.seed, 1)).stream(0);
    let mut theta = model.init(|| init.standard_normal());
    let mut order_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 2));
    let shard = train_set.len() / config.clients;
    let mut order: Vec<usize> = (0..config.clients).collect();
    let mut epochs = Vec::with_capacity(config.epochs);
    let mut max_clipped_norm: f64 = 0.0;
    let mut step = 0u64;

    for epoch in 0..config.epochs {
        order.shuffle(&mut order_rng);
        let mut loss_sum = 0.0;
        for &client in &order {
            let rows = (client * shard..(client + 1) * shard).map(|i| (train_set.row(i), train_set.label(i)));
            let (loss, grad) = model.batch_loss_and_grad(&theta, rows);
            loss_sum += loss;
            let clipped = clip_gradient(&grad, config.clip_bound);
            max_clipped_norm = max_clipped_norm.max(clipped.iter().map(|v| v * v).sum::<f64>().sqrt());
            let mut draws = noise.stream(step);
            let sigma = sigmas[client];
            for (t, g) in theta.iter_mut().zip(&clipped) {
                *t -= config.step_size * (g + sigma * draws.standard_normal());
            }
            step += 1;
        }
        epochs.push(EpochStats {
            epoch: epoch + 1,
            train_loss: loss_sum / config.clients as f64,
            train_accuracy: accuracy(&model, &theta, &train_set),
            test_accuracy: accuracy(&model, &theta, &test_set),
        });
    }

    let mu = amplify(&config.cohort)?.mu;
    let accounted_mu = compose_gdp(&vec![mu; config.epochs])?;
    Ok(TrainReport {
        config: config.clone(),
        final_parameters: theta,
        epochs,
        accounted_mu,
        central_budget: central_budget_composed(&config.cohort, config.epochs, config.target_delta)?,
        max_clipped_norm,
    })
}

fn central_budget_composed(cohort: &Cohort, epochs: usize, target_delta: f64) -> Result<PrivacyBudget> {
    if epochs == 1 {
        return central_budget(cohort, target_delta);
    }
    let mu = compose_gdp(&vec![amplify(cohort)?.mu; epochs])?;
    let eps = crate::tradeoff::dp_epsilon_for_delta(mu, target_delta)?;
    PrivacyBudget::new(eps, target_delta)
}
