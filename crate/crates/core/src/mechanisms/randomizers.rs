use super::noise::NoiseStream;
use crate::error::{Error, Result};

/// `x + Lap(sensitivity / epsilon)`.
pub fn laplace_randomize(x: f64, epsilon: f64, sensitivity: f64, noise: &mut NoiseStream) -> Result<f64> {
    if epsilon == 0.0 {
        return Err(Error::NonInformativeBudget);
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(sensitivity > 0.0 && sensitivity.is_finite()) {
        return Err(Error::invalid(format!("sensitivity must be positive, got {sensitivity}")));
    }
    Ok(x + noise.laplace(sensitivity / epsilon))
}

/// Probability that randomized response reports the true bit.
pub fn rr_keep_probability(epsilon: f64) -> f64 {
    1.0 / (1.0 + (-epsilon).exp())
}

/// Binary randomized response: keeps the bit w.p. `e^eps / (1 + e^eps)`.
pub fn rr_randomize(bit: bool, epsilon: f64, noise: &mut NoiseStream) -> Result<bool> {
    if !(epsilon >= 0.0) {
        return Err(Error::invalid(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    let keep = noise.bernoulli(rr_keep_probability(epsilon));
    Ok(if keep { bit } else { !bit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::NoiseSource;

    #[test]
    fn laplace_zero_noise_and_guards() {
        let mut z = NoiseSource::Zero.stream(0);
        assert_eq!(laplace_randomize(50.0, 0.5, 60.0, &mut z).unwrap(), 50.0);
        assert!(matches!(laplace_randomize(1.0, 0.0, 60.0, &mut z), Err(Error::NonInformativeBudget)));
        assert!(laplace_randomize(1.0, 0.5, 0.0, &mut z).is_err());
    }

    #[test]
    fn laplace_scale_is_sensitivity_over_epsilon() {
        // u = 1/4 gives exactly -scale ln 2
        let mut s = NoiseSource::Injected(vec![0.25]).stream(0);
        let y = laplace_randomize(0.0, 0.5, 60.0, &mut s).unwrap();
        assert!((y + 120.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn laplace_variance() {
        let mut s = NoiseSource::Seeded(3).stream(0);
        let n = 100_000;
        let ys: Vec<f64> = (0..n).map(|_| laplace_randomize(50.0, 0.5, 60.0, &mut s).unwrap()).collect();
        let mean = ys.iter().sum::<f64>() / n as f64;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var / (2.0 * 120.0 * 120.0) - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn rr_branch_probabilities() {
        assert!((rr_keep_probability(3f64.ln()) - 0.75).abs() < 1e-15);
        assert_eq!(rr_keep_probability(0.0), 0.5);
        let n = 100_000;
        for (eps, bit) in [(3f64.ln(), true), (3f64.ln(), false), (0.0, true), (1.3, false)] {
            let mut s = NoiseSource::Seeded(5).stream(eps.to_bits() ^ bit as u64);
            let ones = (0..n).filter(|_| rr_randomize(bit, eps, &mut s).unwrap()).count() as f64;
            let p = if bit { rr_keep_probability(eps) } else { 1.0 - rr_keep_probability(eps) };
            let sd = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((ones - n as f64 * p).abs() <= 3.0 * sd, "eps {eps} bit {bit}");
        }
    }

    #[test]
    fn rr_zero_seam_is_truthful() {
        let mut z = NoiseSource::Zero.stream(0);
        assert!(rr_randomize(true, 40.0, &mut z).unwrap());
        assert!(!rr_randomize(false, 40.0, &mut z).unwrap());
        assert!(rr_randomize(true, -1.0, &mut z).is_err());
    }
}
