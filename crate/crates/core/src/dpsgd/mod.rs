//! Shuffled noisy SGD with per-client budgets, at desk scale.

mod data;
mod model;
mod train;

pub use data::{load_csv, load_idx, synthetic_blobs, Dataset, Pca};
pub use model::{gradient_check, Model, ModelSpec};
pub use train::{clip_gradient, noise_scale, train, EpochStats, TrainConfig, TrainReport};
