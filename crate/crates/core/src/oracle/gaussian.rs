use serde::{Deserialize, Serialize};

use super::counts::{CountDistribution, TrinomialComponent};
use crate::error::{Error, Result};
use crate::normal::{self, BivariateNormal};
use crate::tradeoff::GdpParam;

/// Which rectangle stands in for the lattice point `(k0, k1)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellConvention {
    /// `[k0 - 1/2, k0 + 1/2] x [k1 - 1/2, k1 + 1/2]`; these tile the plane.
    #[default]
    Centered,
    /// `[k0, k0 + 1/2] x [k1, k1 + 1/2]`, anchored at the lattice point.
    /// Half-width cells, so masses do not sum to one.
    LowerCorner,
}

impl CellConvention {
    fn bounds(self, k0: i64, k1: i64) -> ([f64; 2], [f64; 2]) {
        let (k0, k1) = (k0 as f64, k1 as f64);
        match self {
            CellConvention::Centered => ([k0 - 0.5, k1 - 0.5], [k0 + 0.5, k1 + 0.5]),
            CellConvention::LowerCorner => ([k0, k1], [k0 + 0.5, k1 + 0.5]),
        }
    }
}

/// Bivariate normal mass of the cell for `(k0, k1)`.
pub fn gaussian_cell_mass(mean: [f64; 2], cov: [[f64; 2]; 2], k0: i64, k1: i64, convention: CellConvention) -> Result<f64> {
    let dist = BivariateNormal::new(mean, cov)?;
    let (lo, hi) = convention.bounds(k0, k1);
    Ok(dist.rectangle_mass(lo, hi))
}

/// Mean and covariance of a sum of independent trinomial indicators `(1[0], 1[1])`.
pub fn gaussian_moments(components: &[TrinomialComponent]) -> ([f64; 2], [[f64; 2]; 2]) {
    let mut mean = [0.0; 2];
    let mut cov = [[0.0; 2]; 2];
    for c in components {
        mean[0] += c.p0;
        mean[1] += c.p1;
        cov[0][0] += c.p0 * (1.0 - c.p0);
        cov[1][1] += c.p1 * (1.0 - c.p1);
        cov[0][1] -= c.p0 * c.p1;
    }
    cov[1][0] = cov[0][1];
    (mean, cov)
}

/// Discrepancy between an exact count pmf and its Gaussian approximation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvReport {
    pub m: usize,
    /// `max |P(k0, k1) - h(k0, k1)|` over the support.
    pub sup_cell: f64,
    /// Total variation between the pmf and the discretized Gaussian,
    /// counting Gaussian mass that falls outside the support.
    pub half_l1: f64,
    /// `sum h(k0, k1)` over the support.
    pub gaussian_mass_on_support: f64,
    /// The covariance had rank one and the Gaussian lives on a line.
    pub rank_one: bool,
}

/// Gaussian with possibly rank-one covariance, evaluated on cells.
enum CellGaussian {
    Full(BivariateNormal),
    // mean + t u, t ~ N(0, sd^2)
    Line { mean: [f64; 2], u: [f64; 2], sd: f64 },
}

impl CellGaussian {
    fn new(mean: [f64; 2], cov: [[f64; 2]; 2]) -> Result<Self> {
        let (a, b, c) = (cov[0][0], cov[0][1], cov[1][1]);
        let trace = a + c;
        if !(trace > 0.0) {
            return Err(Error::SingularCovariance);
        }
        let det = a * c - b * b;
        if det > 1e-12 * a * c && a > 0.0 && c > 0.0 {
            return Ok(CellGaussian::Full(BivariateNormal::new(mean, cov)?));
        }
        // rank one: cov = trace * u u^T with u the leading eigenvector
        let u = if a >= c {
            let norm = (a * a + b * b).sqrt();
            [a / norm, b / norm]
        } else {
            let norm = (b * b + c * c).sqrt();
            [b / norm, c / norm]
        };
        Ok(CellGaussian::Line { mean, u, sd: trace.sqrt() })
    }

    fn mass(&self, lo: [f64; 2], hi: [f64; 2]) -> f64 {
        match self {
            CellGaussian::Full(d) => d.rectangle_mass(lo, hi),
            CellGaussian::Line { mean, u, sd } => {
                let (mut t_lo, mut t_hi) = (f64::NEG_INFINITY, f64::INFINITY);
                for j in 0..2 {
                    if u[j].abs() < 1e-12 {
                        if mean[j] < lo[j] || mean[j] >= hi[j] {
                            return 0.0;
                        }
                        continue;
                    }
                    let s = (lo[j] - mean[j]) / u[j];
                    let e = (hi[j] - mean[j]) / u[j];
                    t_lo = t_lo.max(s.min(e));
                    t_hi = t_hi.min(s.max(e));
                }
                if t_hi <= t_lo {
                    return 0.0;
                }
                normal::interval_mass(t_lo / sd, t_hi / sd)
            }
        }
    }
}

/// Exact pmf of the summed components against the moment-matched Gaussian.
///
/// A rank-one covariance (for example every component with `p2 = 0`, so
/// `N0 + N1` is constant) is handled by integrating along the supporting
/// line. A zero covariance is an error.
pub fn tv_multinomial_vs_gaussian(components: &[TrinomialComponent], convention: CellConvention) -> Result<TvReport> {
    if components.is_empty() {
        return Err(Error::Empty("components"));
    }
    let (mean, cov) = gaussian_moments(components);
    let gauss = CellGaussian::new(mean, cov)?;
    let pmf = CountDistribution::from_components(components);
    let mut sup_cell: f64 = 0.0;
    let mut l1 = 0.0;
    let mut h_total = 0.0;
    for (k0, k1, p) in pmf.cells() {
        let (lo, hi) = convention.bounds(k0 as i64, k1 as i64);
        let h = gauss.mass(lo, hi);
        let d = (p - h).abs();
        sup_cell = sup_cell.max(d);
        l1 += d;
        h_total += h;
    }
    let outside = (1.0 - h_total).max(0.0);
    Ok(TvReport {
        m: components.len(),
        sup_cell,
        half_l1: (0.5 * (l1 + outside)).min(1.0),
        gaussian_mass_on_support: h_total,
        rank_one: matches!(gauss, CellGaussian::Line { .. }),
    })
}

/// `2 / sqrt(sum_i (p0_i + p1_i))`: the shift `(1, -1)` measured in the
/// covariance of components with `p0 = p1`.
pub fn lemma3_gaussian_mu(components: &[TrinomialComponent]) -> Result<GdpParam> {
    let s: f64 = components.iter().map(TrinomialComponent::informative_mass).sum();
    if !(s > 0.0) {
        return Err(Error::NoAmplification(s));
    }
    GdpParam::new(2.0 / s.sqrt())
}

/// `sqrt(d^T Sigma^{-1} d)` for `d = (1, -1)` and the components' covariance.
pub fn mahalanobis_mu(components: &[TrinomialComponent]) -> Result<GdpParam> {
    let (_, cov) = gaussian_moments(components);
    let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
    if !(det > 1e-14 * cov[0][0] * cov[1][1]) {
        return Err(Error::SingularCovariance);
    }
    let inv = [[cov[1][1] / det, -cov[0][1] / det], [-cov[1][0] / det, cov[0][0] / det]];
    let d = [1.0, -1.0];
    let mut q = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            q += d[i] * inv[i][j] * d[j];
        }
    }
    GdpParam::new(q.sqrt())
}
