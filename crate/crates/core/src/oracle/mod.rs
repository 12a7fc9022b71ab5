//! Exact small-cohort machinery used to validate the accountant.
//!
//! After shuffling, the counts `(N0, N1)` of reports landing in the two
//! distinguishable mixture components are a sufficient statistic. Under either
//! hypothesis they are a sum of independent trinomials, which is enumerated
//! exactly here and compared against the Gaussian approximation.

mod chain;
mod counts;
mod gaussian;
mod neyman_pearson;

pub use chain::{amplify_with_tv_correction, theorem2_chain_check, ChainReport, ENUMERATION_LIMIT};
pub use counts::{build_count_distribution, CountDistribution, Hypothesis, SpikeComponent, TrinomialComponent};
pub use gaussian::{
    gaussian_cell_mass, gaussian_moments, lemma3_gaussian_mu, mahalanobis_mu, tv_multinomial_vs_gaussian,
    CellConvention, TvReport,
};
pub use neyman_pearson::{neyman_pearson_curve, neyman_pearson_tradeoff, symmetrized_tradeoff};
