use serde::{Deserialize, Serialize};

use super::noise::{derive_seed, NoiseSource};
use super::randomizers::{laplace_randomize, rr_keep_probability, rr_randomize};
use super::shuffle::shuffle;
use crate::amplification::{amplify, AmplificationReport, Cohort};
use crate::error::{Error, Result};
use crate::tradeoff::PrivacyBudget;

/// Clipping interval for the mean pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClipRange {
    pub lo: f64,
    pub hi: f64,
    /// Laplace sensitivity; the interval width when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensitivity: Option<f64>,
}

impl ClipRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!("clip range needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi, sensitivity: None })
    }

    pub fn with_sensitivity(mut self, sensitivity: f64) -> Self {
        self.sensitivity = Some(sensitivity);
        self
    }

    pub fn sensitivity(&self) -> f64 {
        self.sensitivity.unwrap_or(self.hi - self.lo)
    }

    pub fn clip(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub z: f64,
    pub report: AmplificationReport,
}

// Summing in sorted order makes the result independent of report order.
fn order_free_sum(mut xs: Vec<f64>) -> f64 {
    xs.sort_unstable_by(f64::total_cmp);
    xs.iter().sum()
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

/// Clip, Laplace-randomize with each user's own epsilon, shuffle, average.
///
/// User `i` draws from `noise.stream(i)`; `seed` drives the shuffler.
pub fn mean_estimate(data: &[f64], cohort: &Cohort, clip: ClipRange, noise: &NoiseSource, seed: u64) -> Result<Estimate> {
    check_len(cohort.len(), data.len())?;
    let budgets = cohort.budgets();
    let sensitivity = clip.sensitivity();
    let reports = data
        .iter()
        .zip(budgets)
        .enumerate()
        .map(|(i, (&x, b))| laplace_randomize(clip.clip(x), b.epsilon(), sensitivity, &mut noise.stream(i as u64)))
        .collect::<Result<Vec<f64>>>()?;
    let batch = shuffle(reports, budgets.to_vec(), derive_seed(seed, 0))?;
    let (values, _) = batch.into_parts();
    let n = values.len() as f64;
    Ok(Estimate { z: order_free_sum(values) / n, report: amplify(cohort)? })
}

/// Randomized response per user, shuffle, then `z = (A - B) / (n - 2B)` with
/// `B = sum 1 / (1 + e^eps_i)` taken over the shuffled budgets.
pub fn freq_estimate(bits: &[bool], cohort: &Cohort, noise: &NoiseSource, seed: u64) -> Result<Estimate> {
    check_len(cohort.len(), bits.len())?;
    let budgets = cohort.budgets();
    let reports = bits
        .iter()
        .zip(budgets)
        .enumerate()
        .map(|(i, (&x, b))| rr_randomize(x, b.epsilon(), &mut noise.stream(i as u64)))
        .collect::<Result<Vec<bool>>>()?;
    let batch = shuffle(reports, budgets.to_vec(), derive_seed(seed, 0))?;
    let n = batch.len() as f64;
    let a = batch.values().iter().filter(|&&y| y).count() as f64;
    let b = order_free_sum(batch.budgets().iter().map(|b| 1.0 - rr_keep_probability(b.epsilon())).collect());
    let denom = n - 2.0 * b;
    if denom.abs() < 1e-9 * n {
        return Err(Error::NonIdentifiable(denom));
    }
    Ok(Estimate { z: (a - b) / denom, report: amplify(cohort)? })
}

/// Splits `n` users by `fractions` with largest-remainder rounding. Ties in
/// the remainder go to the earlier group.
pub fn group_sizes(n: usize, fractions: &[f64]) -> Result<Vec<usize>> {
    if fractions.is_empty() {
        return Err(Error::Empty("group fractions"));
    }
    if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
        return Err(Error::invalid("group fractions must lie in [0, 1]"));
    }
    let total: f64 = fractions.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("group fractions sum to {total}, not 1")));
    }
    let exact: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut sizes: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut left = n - sizes.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    order.sort_by(|&i, &j| {
        let (ri, rj) = (exact[i] - exact[i].floor(), exact[j] - exact[j].floor());
        rj.total_cmp(&ri).then(i.cmp(&j))
    });
    for i in order {
        if left == 0 {
            break;
        }
        sizes[i] += 1;
        left -= 1;
    }
    Ok(sizes)
}

/// Cohort with contiguous blocks of users at each group's epsilon.
pub fn group_cohort(n: usize, fractions: &[f64], epsilons: &[f64], delta: f64) -> Result<Cohort> {
    check_len(fractions.len(), epsilons.len())?;
    let sizes = group_sizes(n, fractions)?;
    let mut budgets = Vec::with_capacity(n);
    for (&size, &eps) in sizes.iter().zip(epsilons) {
        let b = PrivacyBudget::new(eps, delta)?;
        budgets.extend(std::iter::repeat_n(b, size));
    }
    Cohort::new(budgets)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cohort(eps: &[f64]) -> Cohort {
        Cohort::from_pairs(eps.iter().map(|&e| (e, 0.0))).unwrap()
    }

    #[test]
    fn mean_without_noise_is_clipped_mean() {
        let clip = ClipRange::new(20.0, 80.0).unwrap();
        let c = cohort(&[0.5, 1.0]);
        let e = mean_estimate(&[20.0, 80.0], &c, clip, &NoiseSource::Zero, 1).unwrap();
        assert_eq!(e.z, 50.0);
        let e = mean_estimate(&[-100.0, 95.0], &c, clip, &NoiseSource::Zero, 1).unwrap();
        assert_eq!(e.z, 50.0);
        assert_eq!(e.report, amplify(&c).unwrap());
        assert_eq!(clip.sensitivity(), 60.0);
    }

    #[test]
    fn mean_rejects_zero_budget_and_bad_lengths() {
        let clip = ClipRange::new(20.0, 80.0).unwrap();
        let c = cohort(&[0.0, 1.0]);
        assert!(matches!(
            mean_estimate(&[30.0, 40.0], &c, clip, &NoiseSource::Zero, 0),
            Err(Error::NonInformativeBudget)
        ));
        assert!(mean_estimate(&[30.0], &cohort(&[1.0, 1.0]), clip, &NoiseSource::Zero, 0).is_err());
        assert!(ClipRange::new(5.0, 5.0).is_err());
    }

    #[test]
    fn mean_is_unbiased() {
        let clip = ClipRange::new(20.0, 80.0).unwrap();
        let c = cohort(&[0.1, 0.5, 1.0, 0.5, 0.5, 1.0, 0.1, 0.5]);
        let data = [50.0; 8];
        let zs: Vec<f64> = (0..1000)
            .map(|t| mean_estimate(&data, &c, clip, &NoiseSource::Seeded(derive_seed(9, t)), t).unwrap().z)
            .collect();
        let m = zs.iter().sum::<f64>() / zs.len() as f64;
        let sd = (zs.iter().map(|z| (z - m).powi(2)).sum::<f64>() / (zs.len() - 1) as f64).sqrt();
        assert!((m - 50.0).abs() <= 3.0 * sd / (zs.len() as f64).sqrt(), "{m}");
    }

    #[test]
    fn estimates_do_not_depend_on_the_shuffle() {
        let clip = ClipRange::new(0.0, 1.0).unwrap();
        let c = cohort(&[0.3, 0.9, 1.7, 0.2, 2.0]);
        let data = [0.1, 0.9, 0.4, 0.6, 0.33];
        let bits = [true, false, true, true, false];
        let noise = NoiseSource::Seeded(77);
        let m0 = mean_estimate(&data, &c, clip, &noise, 0).unwrap().z;
        let f0 = freq_estimate(&bits, &c, &noise, 0).unwrap().z;
        for seed in 1..50 {
            assert_eq!(mean_estimate(&data, &c, clip, &noise, seed).unwrap().z.to_bits(), m0.to_bits());
            assert_eq!(freq_estimate(&bits, &c, &noise, seed).unwrap().z.to_bits(), f0.to_bits());
        }
    }

    #[test]
    fn freq_debiasing_by_hand() {
        // ln 3 everywhere: B = 4 * 1/4 = 1; truthful reports give A = 3
        let c = cohort(&[3f64.ln(); 4]);
        let e = freq_estimate(&[true, true, true, false], &c, &NoiseSource::Zero, 0).unwrap();
        assert!((e.z - 1.0).abs() < 1e-15);
        let big = cohort(&[50.0; 6]);
        let e = freq_estimate(&[false; 6], &big, &NoiseSource::Zero, 0).unwrap();
        assert!(e.z.abs() < 1e-15);
    }

    #[test]
    fn freq_guard_for_silent_users() {
        let c = cohort(&[0.0, 0.0, 0.0]);
        let err = freq_estimate(&[true, false, true], &c, &NoiseSource::Seeded(1), 0).unwrap_err();
        assert!(err.is_math_guard());
    }

    #[test]
    fn freq_is_unbiased() {
        let n = 400;
        let c = group_cohort(n, &[0.3, 0.5, 0.2], &[0.5, 1.0, 2.0], 0.0).unwrap();
        let bits: Vec<bool> = (0..n).map(|i| i % 10 < 7).collect();
        let zs: Vec<f64> = (0..1000)
            .map(|t| freq_estimate(&bits, &c, &NoiseSource::Seeded(derive_seed(3, t)), t).unwrap().z)
            .collect();
        let m = zs.iter().sum::<f64>() / zs.len() as f64;
        let sd = (zs.iter().map(|z| (z - m).powi(2)).sum::<f64>() / (zs.len() - 1) as f64).sqrt();
        // bits are spread evenly over groups, so the target is 0.7
        assert!((m - 0.7).abs() <= 3.0 * sd / (zs.len() as f64).sqrt(), "{m}");
    }

    #[test]
    fn largest_remainder_rounding() {
        assert_eq!(group_sizes(10_000, &[0.54, 0.37, 0.09]).unwrap(), vec![5400, 3700, 900]);
        assert_eq!(group_sizes(10, &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap(), vec![4, 3, 3]);
        assert_eq!(group_sizes(7, &[0.5, 0.25, 0.25]).unwrap(), vec![3, 2, 2]);
        assert!(group_sizes(7, &[0.5, 0.6]).is_err());
        let c = group_cohort(5, &[0.4, 0.6], &[0.1, 1.0], 0.0).unwrap();
        let eps: Vec<f64> = c.budgets().iter().map(|b| b.epsilon()).collect();
        assert_eq!(eps, vec![0.1, 0.1, 1.0, 1.0, 1.0]);
    }
}
