use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::normal;

/// Where a stochastic operation gets its randomness.
#[derive(Clone, Debug, PartialEq)]
pub enum NoiseSource {
    /// ChaCha8 keyed by the seed; user `i` reads stream `i`.
    Seeded(u64),
    /// Uniform quantiles in `(0, 1)`, replayed cyclically. User `i` starts at
    /// offset `i`.
    Injected(Vec<f64>),
    /// No noise: Laplace and Gaussian draws are exactly 0, coins land on
    /// their more likely side.
    Zero,
}

impl NoiseSource {
    pub fn stream(&self, index: u64) -> NoiseStream {
        match self {
            NoiseSource::Seeded(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(index);
                NoiseStream(Inner::Rng(Box::new(rng)))
            }
            NoiseSource::Injected(values) => {
                assert!(!values.is_empty(), "injected noise needs at least one value");
                let values: Arc<[f64]> = values.as_slice().into();
                let pos = (index % values.len() as u64) as usize;
                NoiseStream(Inner::Fixed { values, pos })
            }
            NoiseSource::Zero => NoiseStream(Inner::Zero),
        }
    }
}

#[derive(Clone, Debug)]
enum Inner {
    Rng(Box<ChaCha8Rng>),
    Fixed { values: Arc<[f64]>, pos: usize },
    Zero,
}

/// Per-user sequence of draws.
#[derive(Clone, Debug)]
pub struct NoiseStream(Inner);

impl NoiseStream {
    /// A uniform draw in `(0, 1)`; 1/2 for the zero source.
    pub fn uniform(&mut self) -> f64 {
        match &mut self.0 {
            Inner::Rng(rng) => loop {
                let u: f64 = rng.gen();
                if u > 0.0 {
                    return u;
                }
            },
            Inner::Fixed { values, pos } => {
                let u = values[*pos];
                *pos = (*pos + 1) % values.len();
                u
            }
            Inner::Zero => 0.5,
        }
    }

    /// Laplace draw with the given scale, by inverse CDF.
    pub fn laplace(&mut self, scale: f64) -> f64 {
        let v = self.uniform() - 0.5;
        if v == 0.0 {
            return 0.0;
        }
        -scale * v.signum() * (-2.0 * v.abs()).ln_1p()
    }

    pub fn standard_normal(&mut self) -> f64 {
        match &mut self.0 {
            Inner::Rng(rng) => rng.sample(StandardNormal),
            Inner::Fixed { .. } => {
                let u = self.uniform();
                normal::quantile(u)
            }
            Inner::Zero => 0.0,
        }
    }

    /// `true` with probability `p`. The zero source answers `p >= 1/2`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        match self.0 {
            Inner::Zero => p >= 0.5,
            _ => self.uniform() < p,
        }
    }
}

/// SplitMix64 finalizer applied to `base + index`; decorrelates per-trial seeds.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
