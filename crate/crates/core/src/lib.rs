//! # cramer-metrics
//!
//! Exact computation of probability divergences on finite discrete
//! distributions — KL, p-Wasserstein, the l_p / Cramér family, and the
//! multivariate energy distance — together with the machinery needed to
//! study how their *sample* gradients behave when they replace the true
//! gradients inside stochastic gradient descent:
//!
//! - [`distributions`]: finite distributions on sorted real supports,
//!   weighted point clouds, deterministic sampling, and small parametric
//!   families (Bernoulli, softmax-categorical, a three-point toy family).
//! - [`divergences`]: every divergence, computed exactly by segment
//!   integration or weighted double sums; no sampling, no quadrature error.
//! - [`gradients`]: analytic loss gradients, sample-gradient estimators,
//!   and two independent oracles (central finite differences; exact
//!   enumeration of the expected sample gradient over all m-tuples).
//! - [`bias_lab`]: exact binomial computations quantifying the bias of
//!   sample Wasserstein gradients — the non-vanishing minimax bias, the
//!   wrong-minimum effect (the expected sample loss is minimized at the
//!   binomial median, not the mean), deterministic-solution regimes, and
//!   the large-m consistency sweep.
//! - [`sgd_lab`]: a fixed-step (stochastic) gradient descent harness and
//!   the three-point toy experiment comparing Cramér, Wasserstein and KL
//!   training under true and sample gradients.
//! - [`ordinal`]: desk-scale ordinal regression with a linear-softmax
//!   distributional predictor trained under KL, Cramér, or per-sample
//!   Wasserstein loss.
//! - [`gan_losses`]: the Cramér-GAN loss computations (critic, generator,
//!   surrogate, gradient penalty) on explicit transforms with hand-written
//!   vector-Jacobian products, plus the reparametrized generator gradient
//!   of the energy distance.
//!
//! All computations on finite supports are exact up to floating-point
//! rounding; tolerances quoted in the tests reflect that budget only.

#![forbid(unsafe_code)]

pub mod bias_lab;
pub mod binomial;
pub mod distributions;
pub mod divergences;
pub mod error;
pub mod gan_losses;
pub mod gradients;
pub mod ordinal;
pub mod sgd_lab;

pub use distributions::{DiscreteDist, ParametricFamily, PointCloud, Rng};
pub use error::{Error, Result};
pub use gradients::{Divergence, GradReport, LossSpec};
