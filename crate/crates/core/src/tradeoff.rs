//! Trade-off functions and the (eps, delta) / mu-GDP calculus built on them.
//!
//! A trade-off function maps a type I error `alpha` to the smallest type II
//! error `beta` any test can achieve at that level. All curves here are
//! evaluated pointwise; composition is limited to the chaining rule
//! `g(1 - f(alpha))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal;

/// One user's local `(epsilon, delta)` budget. Epsilon is in nats.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    epsilon: f64,
    delta: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::invalid(format!("epsilon must be finite and >= 0, got {epsilon}")));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::invalid(format!("delta must lie in [0, 1], got {delta}")));
        }
        Ok(Self { epsilon, delta })
    }

    /// Pure `(epsilon, 0)` budget.
    pub fn pure(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 0.0)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// The `mu` of a `mu`-GDP guarantee.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct GdpParam(f64);

impl GdpParam {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::invalid(format!("mu must be finite and >= 0, got {mu}")));
        }
        Ok(Self(mu))
    }

    pub fn mu(&self) -> f64 {
        self.0
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::invalid(format!("alpha must lie in [0, 1], got {alpha}")))
    }
}

/// `G_mu(alpha) = Phi(Phi^{-1}(1 - alpha) - mu)`.
pub fn gdp_tradeoff(mu: GdpParam, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(gdp_curve(mu.mu(), alpha))
}

// Phi^{-1}(1 - a) = -Phi^{-1}(a), so G = 1 - Phi(Phi^{-1}(a) + mu).
fn gdp_curve(mu: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        return 1.0;
    }
    if alpha == 1.0 {
        return 0.0;
    }
    if mu == 0.0 {
        return 1.0 - alpha;
    }
    normal::sf(normal::quantile(alpha) + mu)
}

/// `f_{eps,delta}(alpha) = max{0, 1 - delta - e^eps alpha, e^-eps (1 - delta - alpha)}`.
pub fn epsdelta_tradeoff(budget: PrivacyBudget, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(epsdelta_curve(budget, alpha))
}

fn epsdelta_curve(budget: PrivacyBudget, alpha: f64) -> f64 {
    let (eps, delta) = (budget.epsilon(), budget.delta());
    let steep = 1.0 - delta - eps.exp() * alpha;
    let shallow = (-eps).exp() * (1.0 - delta - alpha);
    steep.max(shallow).max(0.0)
}

/// `delta(eps)` of a `mu`-GDP mechanism:
/// `Phi(-eps/mu + mu/2) - e^eps Phi(-eps/mu - mu/2)`.
///
/// `mu = 0` is perfect privacy and yields 0 for every `eps`.
pub fn gdp_to_dp(mu: GdpParam, epsilon: f64) -> Result<f64> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::invalid(format!("epsilon must be finite and >= 0, got {epsilon}")));
    }
    Ok(gdp_delta(mu.mu(), epsilon))
}

fn gdp_delta(mu: f64, eps: f64) -> f64 {
    if mu == 0.0 {
        return 0.0;
    }
    let a = normal::cdf(-eps / mu + 0.5 * mu);
    // e^eps * Phi(t) in log space; Phi(t) underflows long before e^eps overflows.
    let t = -eps / mu - 0.5 * mu;
    let b = (eps + normal::cdf(t).ln()).exp();
    (a - b).clamp(0.0, 1.0)
}

/// Smallest `epsilon` with `gdp_to_dp(mu, epsilon) <= target_delta`, by
/// bracketed bisection. Returns 0 when `target_delta >= delta(0)`.
pub fn dp_epsilon_for_delta(mu: GdpParam, target_delta: f64) -> Result<f64> {
    if !(target_delta > 0.0 && target_delta < 1.0) {
        return Err(Error::invalid(format!("target delta must lie in (0, 1), got {target_delta}")));
    }
    let mu = mu.mu();
    if mu == 0.0 || gdp_delta(mu, 0.0) <= target_delta {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0_f64.max(mu);
    while gdp_delta(mu, hi) > target_delta {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::BracketFailure(target_delta));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gdp_delta(mu, mid) > target_delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Composition of several GDP mechanisms: `sqrt(sum mu_i^2)`.
pub fn compose_gdp(mus: &[GdpParam]) -> Result<GdpParam> {
    if mus.is_empty() {
        return Err(Error::Empty("GDP composition list"));
    }
    let scale = mus.iter().map(GdpParam::mu).fold(0.0, f64::max);
    if scale == 0.0 {
        return GdpParam::new(0.0);
    }
    let sum_sq: f64 = mus.iter().map(|m| (m.mu() / scale).powi(2)).sum();
    GdpParam::new(scale * sum_sq.sqrt())
}

/// Group privacy: a `mu`-GDP mechanism is `k mu`-GDP for groups of size `k`.
pub fn group_gdp(mu: GdpParam, k: usize) -> Result<GdpParam> {
    if k < 1 {
        return Err(Error::invalid("group size must be at least 1"));
    }
    GdpParam::new(mu.mu() * k as f64)
}

/// Chaining bound `g(1 - f(alpha))`: if `T(P, Q) >= f` and `T(Q, R) >= g`
/// then `T(P, R) >= g(1 - f(alpha))`.
pub fn compose_tradeoff(f: &TradeoffCurve, g: &TradeoffCurve, alpha: f64) -> Result<f64> {
    let inner = f.eval(alpha)?;
    g.eval((1.0 - inner).clamp(0.0, 1.0))
}

/// Uniform grid `0, step, 2 step, ..., 1` (the last point is exactly 1).
pub fn alpha_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::invalid(format!("grid step must lie in (0, 1], got {step}")));
    }
    let n = (1.0 / step).round() as usize;
    Ok((0..=n).map(|i| (i as f64 / n as f64).min(1.0)).collect())
}

/// Piecewise-linear trade-off curve through `(alpha, beta)` vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalTradeoff {
    vertices: Vec<(f64, f64)>,
}

impl EmpiricalTradeoff {
    /// Vertices must be sorted by non-decreasing alpha, start at `alpha = 0`,
    /// and have non-increasing beta.
    pub fn new(vertices: Vec<(f64, f64)>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Empty("trade-off vertex list"));
        }
        if vertices[0].0 != 0.0 {
            return Err(Error::invalid("trade-off curve must start at alpha = 0"));
        }
        for w in vertices.windows(2) {
            if w[1].0 < w[0].0 || w[1].1 > w[0].1 + 1e-12 {
                return Err(Error::invalid("trade-off vertices must be monotone"));
            }
        }
        if vertices.iter().any(|&(a, b)| !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b)) {
            return Err(Error::invalid("trade-off vertices must lie in the unit square"));
        }
        Ok(Self { vertices })
    }

    /// Builds from vertices already known to satisfy the invariants.
    pub(crate) fn from_sorted(vertices: Vec<(f64, f64)>) -> Self {
        debug_assert!(Self::new(vertices.clone()).is_ok(), "{vertices:?}");
        Self { vertices }
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    /// Curve value at `alpha`; at a repeated alpha the lowest beta wins.
    pub fn eval(&self, alpha: f64) -> f64 {
        let v = &self.vertices;
        let j = v.partition_point(|&(a, _)| a <= alpha);
        if j == v.len() {
            return v[j - 1].1;
        }
        if j == 0 {
            return v[0].1;
        }
        let (a0, b0) = v[j - 1];
        let (a1, b1) = v[j];
        if a0 == alpha {
            return b0;
        }
        b0 + (b1 - b0) * (alpha - a0) / (a1 - a0)
    }

    /// Convexity check on consecutive segment slopes.
    pub fn is_convex(&self, tol: f64) -> bool {
        let v = &self.vertices;
        v.windows(3).all(|w| {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            let (x2, y2) = w[2];
            // cross product of (p1 - p0) x (p2 - p1) >= 0 for a left turn
            (x1 - x0) * (y2 - y1) - (y1 - y0) * (x2 - x1) >= -tol
        })
    }
}

/// A trade-off curve in closed form or as an empirical vertex list.
#[derive(Clone, Debug, PartialEq)]
pub enum TradeoffCurve {
    Gdp(GdpParam),
    EpsDelta(PrivacyBudget),
    Empirical(EmpiricalTradeoff),
}

impl TradeoffCurve {
    /// The identity curve `1 - alpha` (no distinguishability).
    pub fn identity() -> Self {
        TradeoffCurve::Gdp(GdpParam(0.0))
    }

    pub fn eval(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        Ok(match self {
            TradeoffCurve::Gdp(mu) => gdp_curve(mu.mu(), alpha),
            TradeoffCurve::EpsDelta(b) => epsdelta_curve(*b, alpha),
            TradeoffCurve::Empirical(e) => e.eval(alpha),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mu(m: f64) -> GdpParam {
        GdpParam::new(m).unwrap()
    }

    // Grid supremum of 1 - e^eps a - G_mu(a); independent of the closed form.
    fn delta_by_grid(m: f64, eps: f64, step: f64) -> f64 {
        alpha_grid(step)
            .unwrap()
            .into_iter()
            .map(|a| 1.0 - eps.exp() * a - gdp_tradeoff(mu(m), a).unwrap())
            .fold(0.0, f64::max)
    }

    #[test]
    fn gdp_tradeoff_examples() {
        assert!((gdp_tradeoff(mu(0.0), 0.3).unwrap() - 0.7).abs() < 1e-15);
        assert!((gdp_tradeoff(mu(1.0), 0.5).unwrap() - 0.158_655_253_931_457_05).abs() < 1e-14);
        assert_eq!(gdp_tradeoff(mu(2.0), 1.0).unwrap(), 0.0);
        assert_eq!(gdp_tradeoff(mu(2.0), 0.0).unwrap(), 1.0);
        assert!(gdp_tradeoff(mu(1.0), 1.2).is_err());
        assert!(GdpParam::new(-0.1).is_err());
    }

    #[test]
    fn gdp_tradeoff_is_strictly_decreasing_and_convex() {
        for m in [0.05, 0.5, 1.0, 3.0] {
            let grid: Vec<f64> = (1..1000).map(|i| i as f64 / 1000.0).collect();
            let vals: Vec<f64> = grid.iter().map(|&a| gdp_tradeoff(mu(m), a).unwrap()).collect();
            for w in vals.windows(2) {
                assert!(w[1] < w[0]);
            }
            for w in vals.windows(3) {
                assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-12);
            }
        }
    }

    #[test]
    fn epsdelta_tradeoff_examples() {
        let b = |e: f64, d: f64| PrivacyBudget::new(e, d).unwrap();
        assert!((epsdelta_tradeoff(b(0.0, 0.0), 0.3).unwrap() - 0.7).abs() < 1e-15);
        assert!((epsdelta_tradeoff(b(2f64.ln(), 0.0), 0.25).unwrap() - 0.5).abs() < 1e-15);
        for a in [0.0, 0.2, 0.9, 1.0] {
            assert_eq!(epsdelta_tradeoff(b(1.0, 1.0), a).unwrap(), 0.0);
        }
        assert!(PrivacyBudget::new(-1.0, 0.0).is_err());
        assert!(PrivacyBudget::new(1.0, 1.5).is_err());
        assert!(PrivacyBudget::new(f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn epsdelta_breakpoints_and_symmetry() {
        let budget = PrivacyBudget::new(1.0, 0.0).unwrap();
        let f = |a: f64| epsdelta_tradeoff(budget, a).unwrap();
        // pure DP curves are symmetric: f(f(a)) = a
        for i in 1..100 {
            let a = i as f64 / 100.0;
            assert!((f(f(a)) - a).abs() < 1e-12);
            assert!(f(a) <= 1.0 - a + 1e-15);
        }
        // kinks at a = (1 - delta)/(1 + e^eps) and a = 1 - delta
        let with_delta = PrivacyBudget::new(1.0, 0.1).unwrap();
        let kink = 0.9 / (1.0 + 1f64.exp());
        let g = |a: f64| epsdelta_tradeoff(with_delta, a).unwrap();
        let slope = |a: f64| (g(a + 1e-7) - g(a - 1e-7)) / 2e-7;
        assert!((slope(kink - 0.01) + 1f64.exp()).abs() < 1e-6);
        assert!((slope(kink + 0.01) + (-1f64).exp()).abs() < 1e-6);
        assert_eq!(g(0.9), 0.0);
        assert!((slope(0.95)).abs() < 1e-9);
    }

    #[test]
    fn gdp_to_dp_examples() {
        assert!((gdp_to_dp(mu(1.0), 0.0).unwrap() - 0.382_924_922_548_026_2).abs() < 1e-14);
        assert_eq!(gdp_to_dp(mu(0.0), 1.0).unwrap(), 0.0);
        assert!(gdp_to_dp(mu(1e-9), 1.0).unwrap() < 1e-300);
        let d = gdp_to_dp(mu(0.5), 1.0).unwrap();
        // mpmath: 0.006829594983114575384...
        assert!((d - 0.006_829_594_983_114_575).abs() < 1e-15);
        assert!((d - delta_by_grid(0.5, 1.0, 1e-5)).abs() < 1e-6);
    }

    #[test]
    fn gdp_to_dp_is_strictly_decreasing() {
        for m in [0.05, 0.5, 1.0, 3.0] {
            let mut prev = gdp_to_dp(mu(m), 0.0).unwrap();
            for i in 1..60 {
                let d = gdp_to_dp(mu(m), i as f64 * 0.02 * m).unwrap();
                assert!(d < prev, "mu = {m}");
                prev = d;
            }
        }
    }

    #[test]
    fn epsilon_inversion_examples() {
        for m in [0.05, 0.5, 1.0, 3.0] {
            let d = gdp_to_dp(mu(m), 1.0).unwrap();
            let e = dp_epsilon_for_delta(mu(m), d).unwrap();
            assert!((e - 1.0).abs() < 1e-8, "mu = {m}: {e}");
        }
        assert_eq!(dp_epsilon_for_delta(mu(1.0), 0.382_925).unwrap(), 0.0);
        let m = (2.0 * (1.0 + 0.5f64.exp()) / 1000.0).sqrt();
        let e = dp_epsilon_for_delta(mu(m), 1e-4).unwrap();
        // bisection in mpmath: 0.19285371723023417...
        assert!((e - 0.192_853_717_230_234_17).abs() < 1e-9);
        assert!((gdp_to_dp(mu(m), e).unwrap() - 1e-4).abs() < 1e-10);
        assert!(dp_epsilon_for_delta(mu(1.0), 0.0).is_err());
        assert!(dp_epsilon_for_delta(mu(1.0), 1.0).is_err());
    }

    #[test]
    fn dual_identity_holds_on_fine_grid() {
        for m in [0.05, 0.5, 1.0, 3.0] {
            for eps in [0.0, 0.5, 1.0, 2.0] {
                let closed = gdp_to_dp(mu(m), eps).unwrap();
                let grid = delta_by_grid(m, eps, 1e-5);
                assert!((closed - grid).abs() < 1e-6, "mu={m} eps={eps}: {closed} vs {grid}");
            }
        }
    }

    #[test]
    fn composition_examples() {
        assert_eq!(compose_gdp(&[mu(0.3)]).unwrap().mu(), 0.3);
        let fifty = vec![mu(0.1); 50];
        assert!((compose_gdp(&fifty).unwrap().mu() - 0.707_106_781_186_547_5).abs() < 1e-14);
        assert!((compose_gdp(&[mu(3.0), mu(4.0)]).unwrap().mu() - 5.0).abs() < 1e-15);
        assert!(compose_gdp(&[]).is_err());
        assert_eq!(compose_gdp(&[mu(0.0), mu(0.0)]).unwrap().mu(), 0.0);
    }

    #[test]
    fn group_examples() {
        assert_eq!(group_gdp(mu(0.2), 1).unwrap().mu(), 0.2);
        assert!((group_gdp(mu(0.2), 5).unwrap().mu() - 1.0).abs() < 1e-15);
        assert_eq!(group_gdp(mu(0.0), 10).unwrap().mu(), 0.0);
        assert!(group_gdp(mu(0.2), 0).is_err());
    }

    #[test]
    fn chaining_examples() {
        let g1 = TradeoffCurve::Gdp(mu(1.0));
        let g2 = TradeoffCurve::Gdp(mu(2.5));
        for a in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let v = compose_tradeoff(&TradeoffCurve::identity(), &g2, a).unwrap();
            assert!((v - g2.eval(a).unwrap()).abs() < 1e-14);
        }
        let v = compose_tradeoff(&g1, &g1, 0.5).unwrap();
        assert!((v - 0.022_750_131_948_179_207).abs() < 1e-13);
        let zero = TradeoffCurve::EpsDelta(PrivacyBudget::new(0.0, 1.0).unwrap());
        assert_eq!(compose_tradeoff(&zero, &g1, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn empirical_eval_interpolates_and_takes_lowest_at_ties() {
        let e = EmpiricalTradeoff::new(vec![(0.0, 1.0), (0.0, 0.6), (0.4, 0.2), (1.0, 0.0)]).unwrap();
        assert_eq!(e.eval(0.0), 0.6);
        assert!((e.eval(0.2) - 0.4).abs() < 1e-15);
        assert!((e.eval(0.7) - 0.1).abs() < 1e-15);
        assert_eq!(e.eval(1.0), 0.0);
        assert!(e.is_convex(0.0));
        assert!(EmpiricalTradeoff::new(vec![(0.1, 1.0)]).is_err());
        assert!(EmpiricalTradeoff::new(vec![(0.0, 0.5), (0.5, 0.6)]).is_err());
    }

    #[test]
    fn alpha_grid_covers_unit_interval() {
        let g = alpha_grid(1e-3).unwrap();
        assert_eq!(g.len(), 1001);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert!(alpha_grid(0.0).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_inversion(m in prop::sample::select(vec![0.05, 0.5, 1.0, 3.0]), eps in 0.01f64..5.0) {
            let d = gdp_to_dp(mu(m), eps).unwrap();
            prop_assume!(d > 1e-300);
            let back = dp_epsilon_for_delta(mu(m), d).unwrap();
            prop_assert!((back - eps).abs() < 1e-8);
        }

        #[test]
        fn composition_is_permutation_invariant_and_associative(
            xs in prop::collection::vec(0.0f64..5.0, 1..20),
            split in 0usize..20,
        ) {
            let ps: Vec<GdpParam> = xs.iter().map(|&x| mu(x)).collect();
            let whole = compose_gdp(&ps).unwrap().mu();
            let mut rev = ps.clone();
            rev.reverse();
            prop_assert!((compose_gdp(&rev).unwrap().mu() - whole).abs() <= 1e-12 * (1.0 + whole));
            let k = split.min(ps.len() - 1).max(1).min(ps.len());
            if k < ps.len() {
                let left = compose_gdp(&ps[..k]).unwrap();
                let right = compose_gdp(&ps[k..]).unwrap();
                let nested = compose_gdp(&[left, right]).unwrap().mu();
                prop_assert!((nested - whole).abs() <= 1e-12 * (1.0 + whole));
            }
        }

        #[test]
        fn curves_stay_below_identity(m in 0.0f64..5.0, e in 0.0f64..3.0, d in 0.0f64..1.0, a in 0.0f64..=1.0) {
            let g = gdp_tradeoff(mu(m), a).unwrap();
            let f = epsdelta_tradeoff(PrivacyBudget::new(e, d).unwrap(), a).unwrap();
            prop_assert!((0.0..=1.0).contains(&g) && g <= 1.0 - a + 1e-12);
            prop_assert!((0.0..=1.0).contains(&f) && f <= 1.0 - a + 1e-12);
        }
    }
}
