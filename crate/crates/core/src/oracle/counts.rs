use crate::amplification::{mixture_weight, Cohort};
use crate::error::{Error, Result};
use crate::tradeoff::PrivacyBudget;

/// Probabilities that one shuffled report counts towards `N0`, `N1`, or neither.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrinomialComponent {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
}

impl TrinomialComponent {
    pub fn new(p0: f64, p1: f64, p2: f64) -> Result<Self> {
        if [p0, p1, p2].iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid("trinomial probabilities must lie in [0, 1]"));
        }
        if (p0 + p1 + p2 - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("trinomial probabilities sum to {}", p0 + p1 + p2)));
        }
        Ok(Self { p0, p1, p2 })
    }

    /// Component of a user whose data is the same in both datasets:
    /// `(a, a, 1 - 2a)` with `a = (1 - delta) / (1 + e^eps)`.
    pub fn from_budget(budget: &PrivacyBudget) -> Self {
        let a = mixture_weight(budget);
        Self { p0: a, p1: a, p2: (1.0 - 2.0 * a).max(0.0) }
    }

    /// `p0 + p1`, the probability of a report carrying any signal.
    pub fn informative_mass(&self) -> f64 {
        self.p0 + self.p1
    }

    fn swapped(self) -> Self {
        Self { p0: self.p1, p1: self.p0, p2: self.p2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hypothesis {
    H0,
    H1,
}

/// Contribution of the user whose data differs between the two datasets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpikeComponent {
    pub epsilon: f64,
    pub delta: f64,
    pub hypothesis: Hypothesis,
}

impl SpikeComponent {
    pub fn new(budget: &PrivacyBudget, hypothesis: Hypothesis) -> Self {
        Self { epsilon: budget.epsilon(), delta: budget.delta(), hypothesis }
    }

    /// Under H0: `(1,0)` w.p. `(1-delta) e^eps/(1+e^eps)`, `(0,1)` w.p.
    /// `(1-delta)/(1+e^eps)`, neither w.p. `delta`. H1 swaps the first two.
    pub fn as_trinomial(&self) -> TrinomialComponent {
        let low = (-self.epsilon).exp();
        let p_high = (1.0 - self.delta) / (1.0 + low);
        let p_low = (1.0 - self.delta) * low / (1.0 + low);
        let h0 = TrinomialComponent { p0: p_high, p1: p_low, p2: self.delta };
        match self.hypothesis {
            Hypothesis::H0 => h0,
            Hypothesis::H1 => h0.swapped(),
        }
    }
}

/// Exact joint pmf of `(N0, N1)`, stored densely on `0..=n` squared.
#[derive(Clone, Debug, PartialEq)]
pub struct CountDistribution {
    n: usize,
    pmf: Vec<f64>,
}

impl CountDistribution {
    /// Sum of independent trinomials, by sequential convolution. `O(m^3)`.
    pub fn from_components(components: &[TrinomialComponent]) -> Self {
        let n = components.len();
        let side = n + 1;
        let mut pmf = vec![0.0; side * side];
        pmf[0] = 1.0;
        for (step, c) in components.iter().enumerate() {
            // after `step` components the support is k0 + k1 <= step; update in
            // place from the far corner so every read sees the previous layer
            for total in (0..=step + 1).rev() {
                for k0 in (0..=total).rev() {
                    let k1 = total - k0;
                    let mut v = 0.0;
                    if total <= step {
                        v += c.p2 * pmf[k0 * side + k1];
                    }
                    if k0 > 0 {
                        v += c.p0 * pmf[(k0 - 1) * side + k1];
                    }
                    if k1 > 0 {
                        v += c.p1 * pmf[k0 * side + k1 - 1];
                    }
                    pmf[k0 * side + k1] = v;
                }
            }
        }
        Self { n, pmf }
    }

    /// Number of components summed.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn prob(&self, k0: usize, k1: usize) -> f64 {
        if k0 + k1 > self.n {
            return 0.0;
        }
        self.pmf[k0 * (self.n + 1) + k1]
    }

    /// All `(k0, k1, p)` with `k0 + k1 <= n`, in a fixed order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        (0..=n).flat_map(move |k0| (0..=n - k0).map(move |k1| (k0, k1, self.prob(k0, k1))))
    }

    pub fn total(&self) -> f64 {
        self.cells().map(|(_, _, p)| p).sum()
    }

    /// Image under `(k0, k1) -> (k1, k0)`.
    pub fn swapped(&self) -> Self {
        let side = self.n + 1;
        let mut pmf = vec![0.0; side * side];
        for (k0, k1, p) in self.cells() {
            pmf[k1 * side + k0] = p;
        }
        Self { n: self.n, pmf }
    }

    /// Half-L1 distance to another count distribution over the same `n`.
    pub fn total_variation(&self, other: &CountDistribution) -> f64 {
        let n = self.n.max(other.n);
        let mut s = 0.0;
        for k0 in 0..=n {
            for k1 in 0..=n - k0 {
                s += (self.prob(k0, k1) - other.prob(k0, k1)).abs();
            }
        }
        0.5 * s
    }
}

/// Count distribution of the shuffled reports when user `distinct_index`
/// (0-based) is the one whose data differs.
pub fn build_count_distribution(
    cohort: &Cohort,
    distinct_index: usize,
    hypothesis: Hypothesis,
) -> Result<CountDistribution> {
    let budgets = cohort.budgets();
    if distinct_index >= budgets.len() {
        return Err(Error::invalid(format!(
            "distinct index {distinct_index} out of range for {} users",
            budgets.len()
        )));
    }
    let mut components: Vec<TrinomialComponent> = budgets
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != distinct_index)
        .map(|(_, b)| TrinomialComponent::from_budget(b))
        .collect();
    components.push(SpikeComponent::new(&budgets[distinct_index], hypothesis).as_trinomial());
    Ok(CountDistribution::from_components(&components))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spike(eps: f64, delta: f64, h: Hypothesis) -> TrinomialComponent {
        SpikeComponent::new(&PrivacyBudget::new(eps, delta).unwrap(), h).as_trinomial()
    }

    // Enumerates every outcome tuple; exponential, for tiny inputs only.
    fn brute_force(components: &[TrinomialComponent]) -> Vec<((usize, usize), f64)> {
        let mut out = std::collections::BTreeMap::new();
        let m = components.len();
        for code in 0..3usize.pow(m as u32) {
            let (mut c, mut k0, mut k1, mut p) = (code, 0, 0, 1.0);
            for comp in components {
                match c % 3 {
                    0 => {
                        k0 += 1;
                        p *= comp.p0
                    }
                    1 => {
                        k1 += 1;
                        p *= comp.p1
                    }
                    _ => p *= comp.p2,
                }
                c /= 3;
            }
            *out.entry((k0, k1)).or_insert(0.0) += p;
        }
        out.into_iter().collect()
    }

    #[test]
    fn spike_only_at_zero_epsilon() {
        let d = CountDistribution::from_components(&[spike(0.0, 0.0, Hypothesis::H0)]);
        assert_eq!(d.prob(1, 0), 0.5);
        assert_eq!(d.prob(0, 1), 0.5);
        assert_eq!(d.prob(0, 0), 0.0);
    }

    #[test]
    fn two_zero_budget_users() {
        let cohort = Cohort::from_pairs([(0.0, 0.0), (0.0, 0.0)]).unwrap();
        let d = build_count_distribution(&cohort, 1, Hypothesis::H0).unwrap();
        assert!((d.prob(2, 0) - 0.25).abs() < 1e-15);
        assert!((d.prob(1, 1) - 0.5).abs() < 1e-15);
        assert!((d.prob(0, 2) - 0.25).abs() < 1e-15);
        assert!((d.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn full_delta_spike_is_indistinguishable() {
        let cohort = Cohort::from_pairs([(0.7, 0.0), (1.2, 0.1), (2.0, 1.0)]).unwrap();
        let d0 = build_count_distribution(&cohort, 2, Hypothesis::H0).unwrap();
        let d1 = build_count_distribution(&cohort, 2, Hypothesis::H1).unwrap();
        assert_eq!(d0, d1);
    }

    #[test]
    fn convolution_matches_enumeration() {
        let comps = [
            TrinomialComponent::from_budget(&PrivacyBudget::new(0.3, 0.05).unwrap()),
            TrinomialComponent::new(0.2, 0.5, 0.3).unwrap(),
            spike(1.1, 0.02, Hypothesis::H1),
            TrinomialComponent::new(0.0, 0.0, 1.0).unwrap(),
            TrinomialComponent::from_budget(&PrivacyBudget::new(2.0, 0.0).unwrap()),
        ];
        let d = CountDistribution::from_components(&comps);
        for ((k0, k1), p) in brute_force(&comps) {
            assert!((d.prob(k0, k1) - p).abs() < 1e-15, "({k0},{k1})");
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(TrinomialComponent::new(0.5, 0.5, 0.1).is_err());
        assert!(TrinomialComponent::new(-0.1, 0.6, 0.5).is_err());
        let cohort = Cohort::from_pairs([(0.1, 0.0), (0.2, 0.0)]).unwrap();
        assert!(build_count_distribution(&cohort, 2, Hypothesis::H0).is_err());
    }

    proptest! {
        #[test]
        fn pmf_normalized_and_hypotheses_are_mirror_images(
            pairs in prop::collection::vec((0.0f64..3.0, 0.0f64..0.3), 2..40),
            pick in 0usize..40,
        ) {
            let cohort = Cohort::from_pairs(pairs.clone()).unwrap();
            let idx = pick % pairs.len();
            let d0 = build_count_distribution(&cohort, idx, Hypothesis::H0).unwrap();
            let d1 = build_count_distribution(&cohort, idx, Hypothesis::H1).unwrap();
            prop_assert!((d0.total() - 1.0).abs() < 1e-10);
            prop_assert!((d1.total() - 1.0).abs() < 1e-10);
            let mirrored = d0.swapped();
            for (k0, k1, p) in d1.cells() {
                prop_assert!((mirrored.prob(k0, k1) - p).abs() < 1e-14);
            }
        }
    }
}
