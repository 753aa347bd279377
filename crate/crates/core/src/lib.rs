//! Reconstructs how ideas diffuse through a timestamped corpus: topic modeling, per-topic
//! cascades, maximum-likelihood diffusion networks and the statistics built on them.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below fix `f64`.

pub mod cascade;
pub mod corpus;
pub mod diffusion;
pub mod error;
mod fsutil;
pub mod genealogy;
pub mod netstats;
pub mod pipeline;
pub mod real;
pub mod rng;
pub mod topic_model;

pub use error::{Error, Result};
pub use real::Real;

pub type Mixture = cascade::ConstitutionMixture<f64>;
pub type Network = diffusion::DiffusionNetwork<f64>;
pub type DiffusionParams = diffusion::DiffusionConfig<f64>;
pub type Tree = genealogy::FamilyTree<f64>;
pub type Fit = netstats::FitResult<f64>;
pub type Yule = netstats::YuleParams<f64>;
