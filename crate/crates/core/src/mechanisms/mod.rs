//! Local randomizers, the shuffler, and the mean and frequency pipelines.

mod estimate;
mod noise;
mod randomizers;
mod shuffle;

pub use estimate::{freq_estimate, group_cohort, group_sizes, mean_estimate, ClipRange, Estimate};
pub use noise::{derive_seed, NoiseSource, NoiseStream};
pub use randomizers::{laplace_randomize, rr_keep_probability, rr_randomize};
pub use shuffle::{shuffle, ShuffledBatch};
