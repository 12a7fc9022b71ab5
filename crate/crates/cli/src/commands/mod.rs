pub mod account;
pub mod freq;
pub mod groups;
pub mod mean;
pub mod oracle_check;
pub mod sgd;
pub mod tv_sweep;
