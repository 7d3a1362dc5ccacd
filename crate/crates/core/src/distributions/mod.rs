//! Distribution types: finite discrete distributions on the real line,
//! weighted point clouds in R^d, seed-deterministic sampling, and the
//! parametric families used throughout the gradient experiments.
//!
//! Everything here is immutable after construction and safe to share
//! across threads. [`Rng`] is the one exception: it is single-owner
//! mutable state, never shared — parallel experiments use independently
//! seeded instances.

mod cloud;
mod discrete;
mod family;
mod rng;

pub(crate) use cloud::euclidean_distance as cloud_distance;
pub use cloud::PointCloud;
pub use discrete::{convolve, empirical, scale, DiscreteDist};
pub use family::ParametricFamily;
pub use rng::Rng;

/// Absolute tolerance for "probabilities sum to one" checks.
pub const PROB_SUM_TOL: f64 = 1e-12;
