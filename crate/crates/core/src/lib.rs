//! Ranking submissions of a peer-review process from their reviews.
//!
//! The crate turns referee scores into per-referee preference pairs and
//! offers several ways to aggregate them into a total ranking: a Gaussian
//! process preference learner over paper features ([`gp`]), Kemeny consensus
//! rankers ([`consensus`]) and plain score averages ([`baselines`]). The
//! [`eval`] module measures rankings against acceptance decisions and
//! citation counts and runs perturbation scenarios.

pub mod agreement;
pub mod baselines;
pub mod consensus;
pub mod data;
mod error;
pub mod eval;
pub mod features;
pub mod gp;
pub mod prefs;
pub mod ranking;

pub use data::{Dataset, Paper, Review, ScaleSpec};
pub use error::{Error, Result};
pub use features::{FeatureConfig, Features};
pub use prefs::PreferencePair;
pub use ranking::RankingResult;
