//! Accounting and mechanisms for the shuffle model with personalized local
//! privacy budgets.
//!
//! The central guarantee for a cohort of users with local budgets
//! `(eps_i, delta_i)` is approximately `mu`-GDP with
//!
//! ```text
//! mu = sqrt(2 / (sum_i a_i - max_i a_i)),   a_i = (1 - delta_i) / (1 + e^eps_i)
//! ```
//!
//! [`amplification`] computes that bound, [`oracle`] checks it against exact
//! Neyman-Pearson trade-off curves for small cohorts, and [`mechanisms`] /
//! [`dpsgd`] implement the shuffled mean, frequency and SGD pipelines.

pub mod amplification;
pub mod dpsgd;
pub mod error;
pub mod mechanisms;
pub mod normal;
pub mod oracle;
pub mod tradeoff;

pub use amplification::{amplify, amplify_composed, central_budget, AmplificationReport, Cohort};
pub use error::{Error, Result};
pub use tradeoff::{GdpParam, PrivacyBudget, TradeoffCurve};
