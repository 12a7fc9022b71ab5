use super::counts::CountDistribution;
use crate::tradeoff::EmpiricalTradeoff;

// Relative tolerance under which two likelihood ratios count as tied.
const TIE_TOL: f64 = 1e-12;

/// Optimal trade-off curve between two pmfs on a common finite space.
///
/// Outcomes are rejected in decreasing order of the likelihood ratio `q/p`;
/// tied ratios are rejected together, which with randomization traces the
/// straight segment between the group's endpoints. The result is the exact
/// lower convex envelope of achievable `(alpha, beta)` pairs.
pub fn neyman_pearson_curve(p: &[f64], q: &[f64]) -> EmpiricalTradeoff {
    assert_eq!(p.len(), q.len(), "pmfs must share a support");
    let mut idx: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0 || q[i] > 0.0).collect();
    // atan2(q, p) is monotone in q/p and well defined when p = 0
    idx.sort_by(|&i, &j| q[j].atan2(p[j]).total_cmp(&q[i].atan2(p[i])));

    let mut vertices = vec![(0.0, 1.0)];
    let (mut alpha, mut beta) = (0.0_f64, 1.0_f64);
    let mut k = 0;
    while k < idx.len() {
        let lead = idx[k];
        let mut group_p = 0.0;
        let mut group_q = 0.0;
        while k < idx.len() {
            let i = idx[k];
            let lhs = q[i] * p[lead];
            let rhs = q[lead] * p[i];
            if (lhs - rhs).abs() > TIE_TOL * (lhs + rhs) {
                break;
            }
            group_p += p[i];
            group_q += q[i];
            k += 1;
        }
        alpha = (alpha + group_p).min(1.0);
        beta = (beta - group_q).max(0.0);
        vertices.push((alpha, beta));
    }
    if let Some(last) = vertices.last_mut() {
        // the full rejection region has beta = 0 up to rounding
        if last.1 < 1e-14 {
            last.1 = 0.0;
        }
    }
    if vertices.last().map_or(true, |v| v.0 < 1.0) {
        let b = vertices.last().map_or(0.0, |v| v.1);
        vertices.push((1.0, b.min(0.0).max(0.0)));
    }
    EmpiricalTradeoff::from_sorted(drop_collinear(vertices))
}

/// Removes duplicate points and interior points of straight runs.
fn drop_collinear(v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for pt in v {
        if let Some(&last) = out.last() {
            if (pt.0 - last.0).abs() < 1e-15 && (pt.1 - last.1).abs() < 1e-15 {
                continue;
            }
        }
        while out.len() >= 2 {
            let (x0, y0) = out[out.len() - 2];
            let (x1, y1) = out[out.len() - 1];
            let cross = (x1 - x0) * (pt.1 - y1) - (y1 - y0) * (pt.0 - x1);
            let scale = (x1 - x0).abs() + (y1 - y0).abs() + (pt.0 - x1).abs() + (pt.1 - y1).abs();
            if cross.abs() <= 1e-13 * scale * scale {
                out.pop();
            } else {
                break;
            }
        }
        out.push(pt);
    }
    out
}

/// `T(p, q)` for two count distributions: type I error under `p`, type II under `q`.
pub fn neyman_pearson_tradeoff(p: &CountDistribution, q: &CountDistribution) -> EmpiricalTradeoff {
    let (ps, qs) = aligned(p, q);
    neyman_pearson_curve(&ps, &qs)
}

fn aligned(p: &CountDistribution, q: &CountDistribution) -> (Vec<f64>, Vec<f64>) {
    let n = p.n().max(q.n());
    let mut ps = Vec::new();
    let mut qs = Vec::new();
    for k0 in 0..=n {
        for k1 in 0..=n - k0 {
            ps.push(p.prob(k0, k1));
            qs.push(q.prob(k0, k1));
        }
    }
    (ps, qs)
}

/// Pointwise maximum of `T(p, q)` and `T(q, p)`, exact at every breakpoint and
/// crossing of the two piecewise-linear curves.
pub fn symmetrized_tradeoff(p: &CountDistribution, q: &CountDistribution) -> EmpiricalTradeoff {
    let f = neyman_pearson_tradeoff(p, q);
    let g = neyman_pearson_tradeoff(q, p);
    max_of_curves(&f, &g)
}

pub(crate) fn max_of_curves(f: &EmpiricalTradeoff, g: &EmpiricalTradeoff) -> EmpiricalTradeoff {
    let mut xs: Vec<f64> = f.vertices().iter().chain(g.vertices()).map(|v| v.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut with_crossings = Vec::with_capacity(2 * xs.len());
    for w in xs.windows(2) {
        with_crossings.push(w[0]);
        // both curves are affine on (w0, w1); evaluate just inside the interval
        // so jumps at a shared alpha = 0 do not pollute the difference
        let (a, b) = (w[0], w[1]);
        let da = f.eval(a) - g.eval(a);
        let db = f.eval(b) - g.eval(b);
        if da * db < 0.0 {
            let t = da / (da - db);
            with_crossings.push(a + t * (b - a));
        }
    }
    if let Some(&last) = xs.last() {
        with_crossings.push(last);
    }
    let mut vertices: Vec<(f64, f64)> = Vec::with_capacity(with_crossings.len() + 1);
    // keep the full drop at alpha = 0 so eval(0) is the smaller beta of the two
    let top = f.vertices()[0].1.max(g.vertices()[0].1);
    vertices.push((0.0, top));
    for x in with_crossings {
        let y = f.eval(x).max(g.eval(x));
        let y = y.min(vertices.last().map_or(1.0, |v| v.1));
        vertices.push((x, y));
    }
    EmpiricalTradeoff::from_sorted(drop_collinear(vertices))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::counts::{build_count_distribution, Hypothesis, TrinomialComponent};
    use crate::tradeoff::{epsdelta_tradeoff, PrivacyBudget};
    use crate::Cohort;
    use proptest::prelude::*;

    #[test]
    fn identical_distributions_give_identity_line() {
        let p = [0.1, 0.4, 0.2, 0.3];
        let c = neyman_pearson_curve(&p, &p);
        assert_eq!(c.vertices(), &[(0.0, 1.0), (1.0, 0.0)]);
        for a in [0.0, 0.25, 0.5, 1.0] {
            assert!((c.eval(a) - (1.0 - a)).abs() < 1e-15);
        }
    }

    #[test]
    fn disjoint_supports_are_perfectly_testable() {
        let c = neyman_pearson_curve(&[0.5, 0.5, 0.0, 0.0], &[0.0, 0.0, 0.3, 0.7]);
        for a in [0.0, 0.1, 0.7, 1.0] {
            assert_eq!(c.eval(a), 0.0);
        }
    }

    #[test]
    fn single_spike_recovers_pure_dp_curve() {
        // outcome 0 w.p. 3/4 vs 1/4 under the two hypotheses
        let eps = 3f64.ln();
        let p = [0.75, 0.25];
        let q = [0.25, 0.75];
        let c = neyman_pearson_curve(&p, &q);
        assert_eq!(c.vertices().len(), 3);
        let (a, b) = c.vertices()[1];
        assert!((a - 0.25).abs() < 1e-15 && (b - 0.25).abs() < 1e-15);
        let budget = PrivacyBudget::pure(eps).unwrap();
        for i in 0..=100 {
            let alpha = i as f64 / 100.0;
            assert!((c.eval(alpha) - epsdelta_tradeoff(budget, alpha).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn symmetrized_curve_of_mirror_pair_equals_either_direction() {
        let cohort = Cohort::from_pairs([(0.5, 0.0), (0.5, 0.0), (0.5, 0.0), (0.5, 0.0)]).unwrap();
        let d0 = build_count_distribution(&cohort, 0, Hypothesis::H0).unwrap();
        let d1 = build_count_distribution(&cohort, 0, Hypothesis::H1).unwrap();
        let s = symmetrized_tradeoff(&d0, &d1);
        let f = neyman_pearson_tradeoff(&d0, &d1);
        for i in 0..=1000 {
            let a = i as f64 / 1000.0;
            assert!((s.eval(a) - f.eval(a)).abs() < 1e-12);
        }
        let same = symmetrized_tradeoff(&d0, &d0);
        assert!((same.eval(0.3) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn curve_respects_total_variation_bound() {
        let cohort = Cohort::from_pairs([(1.0, 0.05), (0.3, 0.0), (2.0, 0.0), (0.8, 0.01)]).unwrap();
        let d0 = build_count_distribution(&cohort, 2, Hypothesis::H0).unwrap();
        let d1 = build_count_distribution(&cohort, 2, Hypothesis::H1).unwrap();
        let tv = d0.total_variation(&d1);
        let c = neyman_pearson_tradeoff(&d0, &d1);
        for &(a, b) in c.vertices() {
            assert!(a + b >= 1.0 - tv - 1e-12);
        }
        // the bound is attained by the likelihood-ratio test at the kink
        let best = c.vertices().iter().map(|&(a, b)| a + b).fold(f64::INFINITY, f64::min);
        assert!((best - (1.0 - tv)).abs() < 1e-12);
    }

    #[test]
    fn coarsening_never_helps_the_tester() {
        let comps = [
            TrinomialComponent::new(0.3, 0.3, 0.4).unwrap(),
            TrinomialComponent::new(0.6, 0.1, 0.3).unwrap(),
            TrinomialComponent::new(0.1, 0.2, 0.7).unwrap(),
        ];
        let d0 = CountDistribution::from_components(&comps);
        let mut flipped = comps;
        flipped[1] = TrinomialComponent::new(0.1, 0.6, 0.3).unwrap();
        let d1 = CountDistribution::from_components(&flipped);
        let fine = neyman_pearson_tradeoff(&d0, &d1);
        // post-process: keep only N0 - N1
        let n = 3i64;
        let mut p = vec![0.0; (2 * n + 1) as usize];
        let mut q = vec![0.0; (2 * n + 1) as usize];
        for (k0, k1, v) in d0.cells() {
            p[(k0 as i64 - k1 as i64 + n) as usize] += v;
        }
        for (k0, k1, v) in d1.cells() {
            q[(k0 as i64 - k1 as i64 + n) as usize] += v;
        }
        let coarse = neyman_pearson_curve(&p, &q);
        for i in 0..=200 {
            let a = i as f64 / 200.0;
            assert!(coarse.eval(a) >= fine.eval(a) - 1e-14);
        }
    }

    proptest! {
        #[test]
        fn curves_are_convex_monotone_and_below_identity(
            raw in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 2..40),
        ) {
            let sp: f64 = raw.iter().map(|r| r.0).sum();
            let sq: f64 = raw.iter().map(|r| r.1).sum();
            prop_assume!(sp > 1e-6 && sq > 1e-6);
            let p: Vec<f64> = raw.iter().map(|r| r.0 / sp).collect();
            let q: Vec<f64> = raw.iter().map(|r| r.1 / sq).collect();
            let c = neyman_pearson_curve(&p, &q);
            prop_assert!(c.is_convex(1e-12));
            for i in 0..=100 {
                let a = i as f64 / 100.0;
                prop_assert!(c.eval(a) <= 1.0 - a + 1e-12);
            }
            let g = neyman_pearson_curve(&q, &p);
            let s = max_of_curves(&c, &g);
            for i in 0..=100 {
                let a = i as f64 / 100.0;
                prop_assert!(s.eval(a) >= c.eval(a) - 1e-12);
                prop_assert!(s.eval(a) >= g.eval(a) - 1e-12);
                prop_assert!(s.eval(a) <= c.eval(a).max(g.eval(a)) + 1e-12);
            }
        }
    }
}
