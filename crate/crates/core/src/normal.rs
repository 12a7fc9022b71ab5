//! Univariate and bivariate normal distribution functions.
//!
//! `cdf`/`sf` are built on `erfc` and are accurate to a few ulps in relative
//! terms, including deep tails. The bivariate upper-orthant probability uses
//! Genz's Gauss-Legendre scheme (Drezner-Wesolowsky with the high-correlation
//! refinement), accurate to about 1e-15 absolute.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;
const TWO_PI: f64 = 2.0 * PI;

/// Standard normal CDF `Phi(x)`.
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal survival function `1 - Phi(x)`, without cancellation.
pub fn sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// `Phi(b) - Phi(a)` for `a <= b`, evaluated on whichever tail keeps the
/// difference well conditioned.
pub fn interval_mass(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        (sf(a) - sf(b)).max(0.0)
    } else if b <= 0.0 {
        (cdf(b) - cdf(a)).max(0.0)
    } else {
        (1.0 - cdf(a) - sf(b)).max(0.0)
    }
}

/// Standard normal quantile `Phi^{-1}(p)`.
///
/// Acklam's rational approximation followed by two Halley steps against the
/// `erfc`-based CDF. Returns `-inf`/`+inf` at `p = 0`/`p = 1`.
pub fn quantile(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    if p > 0.5 {
        // 1 - p is exact for p in [0.5, 1].
        return -lower_quantile(1.0 - p);
    }
    lower_quantile(p)
}

fn lower_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p <= 0.5);
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let mut x = if p < 0.024_25 {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    for _ in 0..2 {
        let e = cdf(x) - p;
        let u = e * SQRT_2PI * (0.5 * x * x).exp();
        if !u.is_finite() {
            break;
        }
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

// Gauss-Legendre half-rules (weight, negative node) from Genz's tvpack.
const GL6: [(f64, f64); 3] = [
    (0.171_324_492_379_170_5, -0.932_469_514_203_152_2),
    (0.360_761_573_048_138_4, -0.661_209_386_466_264_7),
    (0.467_913_934_572_690_4, -0.238_619_186_083_197),
];
const GL12: [(f64, f64); 6] = [
    (0.047_175_336_386_511_77, -0.981_560_634_246_719_1),
    (0.106_939_325_995_318_3, -0.904_117_256_370_475),
    (0.160_078_328_543_346_4, -0.769_902_674_194_305),
    (0.203_167_426_723_065_9, -0.587_317_954_286_617_1),
    (0.233_492_536_538_354_7, -0.367_831_498_998_180_2),
    (0.249_147_045_813_402_9, -0.125_233_408_511_469_2),
];
const GL20: [(f64, f64); 10] = [
    (0.017_614_007_139_152_12, -0.993_128_599_185_094_9),
    (0.040_601_429_800_386_94, -0.963_971_927_277_913_8),
    (0.062_672_048_334_109_06, -0.912_234_428_251_325_9),
    (0.083_276_741_576_704_75, -0.839_116_971_822_218_8),
    (0.101_930_119_817_240_4, -0.746_331_906_460_150_8),
    (0.118_194_531_961_518_4, -0.636_053_680_726_515),
    (0.131_688_638_449_176_6, -0.510_867_001_950_827_1),
    (0.142_096_109_318_382_1, -0.373_706_088_715_419_6),
    (0.149_172_986_472_603_7, -0.227_785_851_141_645_1),
    (0.152_753_387_130_725_9, -0.076_526_521_133_497_33),
];

/// `P(X > h, Y > k)` for standard normals with correlation `r`.
pub fn upper_orthant(h: f64, k: f64, r: f64) -> f64 {
    debug_assert!((-1.0..=1.0).contains(&r));
    if h == f64::INFINITY || k == f64::INFINITY {
        return 0.0;
    }
    if h == f64::NEG_INFINITY {
        return sf(k);
    }
    if k == f64::NEG_INFINITY {
        return sf(h);
    }
    let rule: &[(f64, f64)] = if r.abs() < 0.3 {
        &GL6
    } else if r.abs() < 0.75 {
        &GL12
    } else {
        &GL20
    };
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        let hs = 0.5 * (h * h + k * k);
        let asr = r.asin();
        for &(w, x) in rule {
            for node in [x, -x] {
                let sn = (0.5 * asr * (node + 1.0)).sin();
                bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        return (bvn * asr / (2.0 * TWO_PI) + sf(h) * sf(k)).clamp(0.0, 1.0);
    }

    let mut k = k;
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let a_s = (1.0 - r) * (1.0 + r);
        let mut a = a_s.sqrt();
        let b_s = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        let asr = -0.5 * (b_s / a_s + hk);
        if asr > -100.0 {
            bvn = a
                * asr.exp()
                * (1.0 - c * (b_s - a_s) * (1.0 - d * b_s / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
        }
        if -hk < 100.0 {
            let b = b_s.sqrt();
            bvn -= (-0.5 * hk).exp()
                * TWO_PI.sqrt()
                * cdf(-b / a)
                * b
                * (1.0 - c * b_s * (1.0 - d * b_s / 5.0) / 3.0);
        }
        a *= 0.5;
        for &(w, x) in rule {
            for node in [x, -x] {
                let xs = (a * (node + 1.0)).powi(2);
                let asr = -0.5 * (b_s / xs + hk);
                if asr > -100.0 {
                    let rs = (1.0 - xs).sqrt();
                    let sp = 1.0 + c * xs * (1.0 + d * xs);
                    let ep = (-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs;
                    bvn += a * w * asr.exp() * (ep - sp);
                }
            }
        }
        bvn = -bvn / TWO_PI;
    }
    if r > 0.0 {
        bvn += sf(h.max(k));
    } else {
        bvn = -bvn;
        if k > h {
            bvn += if h < 0.0 {
                cdf(k) - cdf(h)
            } else {
                sf(h) - sf(k)
            };
        }
    }
    bvn.clamp(0.0, 1.0)
}

/// Bivariate normal with a symmetric positive-definite covariance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BivariateNormal {
    mean: [f64; 2],
    sd: [f64; 2],
    rho: f64,
}

impl BivariateNormal {
    pub fn new(mean: [f64; 2], cov: [[f64; 2]; 2]) -> Result<Self> {
        if mean.iter().chain(cov.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("bivariate normal parameters must be finite"));
        }
        let scale = cov[0][0].abs().max(cov[1][1].abs()).max(f64::MIN_POSITIVE);
        if (cov[0][1] - cov[1][0]).abs() > 1e-12 * scale {
            return Err(Error::invalid("covariance matrix must be symmetric"));
        }
        let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
        if cov[0][0] <= 0.0 || cov[1][1] <= 0.0 || det <= 1e-14 * cov[0][0] * cov[1][1] {
            return Err(Error::SingularCovariance);
        }
        let sd = [cov[0][0].sqrt(), cov[1][1].sqrt()];
        let rho = (cov[0][1] / (sd[0] * sd[1])).clamp(-1.0, 1.0);
        Ok(Self { mean, sd, rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `P(X <= x, Y <= y)`.
    pub fn cdf(&self, x: f64, y: f64) -> f64 {
        let zx = (x - self.mean[0]) / self.sd[0];
        let zy = (y - self.mean[1]) / self.sd[1];
        upper_orthant(-zx, -zy, self.rho)
    }

    /// Probability of the rectangle `[lo[0], hi[0]] x [lo[1], hi[1]]`.
    pub fn rectangle_mass(&self, lo: [f64; 2], hi: [f64; 2]) -> f64 {
        let mut a = [0.0; 2];
        let mut b = [0.0; 2];
        let mut rho = self.rho;
        for j in 0..2 {
            a[j] = (lo[j] - self.mean[j]) / self.sd[j];
            b[j] = (hi[j] - self.mean[j]) / self.sd[j];
            // Reflect so the interval sits on the upper side; far cells then
            // become differences of small orthant probabilities.
            if a[j] + b[j] < 0.0 {
                (a[j], b[j]) = (-b[j], -a[j]);
                rho = -rho;
            }
        }
        let mass = upper_orthant(a[0], a[1], rho) - upper_orthant(b[0], a[1], rho)
            - upper_orthant(a[0], b[1], rho)
            + upper_orthant(b[0], b[1], rho);
        // Frechet bound: never more than either marginal interval.
        let cap = interval_mass(a[0], b[0]).min(interval_mass(a[1], b[1]));
        mass.clamp(0.0, cap)
    }
}
