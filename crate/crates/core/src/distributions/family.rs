use serde::{Deserialize, Serialize};

use super::DiscreteDist;
use crate::error::{Error, Result};

/// Clamping interval for the Bernoulli parameter. Keeps KL values and
/// gradients finite during optimization.
pub const BERNOULLI_CLAMP: (f64, f64) = (1e-6, 1.0 - 1e-6);

/// A parametric family theta -> Q_theta of distributions on a fixed finite
/// outcome set, exposing the analytic partials of its distribution function
/// that every gradient formula in this crate is built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParametricFamily {
    /// Q_theta = Bernoulli(theta) on {0, 1}; scalar parameter clamped to
    /// [1e-6, 1 - 1e-6].
    Bernoulli,
    /// Softmax weights over a fixed strictly increasing support;
    /// parameter dimension equals the support size.
    SoftmaxCategorical { support: Vec<f64> },
    /// Underparametrized family on {0, 1, 10} with
    /// Q(0) = 1/(1 + 2e^t), Q(1) = Q(10) = e^t/(1 + 2e^t)
    /// for a single unconstrained scalar t. The same weight is forced on
    /// the outcomes 1 and 10, so most targets are not representable.
    ThreePointToy,
}

impl ParametricFamily {
    pub fn param_dim(&self) -> usize {
        match self {
            ParametricFamily::Bernoulli | ParametricFamily::ThreePointToy => 1,
            ParametricFamily::SoftmaxCategorical { support } => support.len(),
        }
    }

    /// The fixed outcome values of the family.
    pub fn support(&self) -> Vec<f64> {
        match self {
            ParametricFamily::Bernoulli => vec![0.0, 1.0],
            ParametricFamily::SoftmaxCategorical { support } => support.clone(),
            ParametricFamily::ThreePointToy => vec![0.0, 1.0, 10.0],
        }
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.param_dim() {
            return Err(Error::LengthMismatch(theta.len(), self.param_dim()));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::Domain("non-finite parameter".into()));
        }
        Ok(())
    }

    /// True when `theta` lies strictly inside the family's valid region
    /// (used by the finite-difference oracle to reject boundary steps).
    pub fn params_valid(&self, theta: &[f64]) -> bool {
        if theta.len() != self.param_dim() || theta.iter().any(|t| !t.is_finite()) {
            return false;
        }
        match self {
            ParametricFamily::Bernoulli => theta[0] > 0.0 && theta[0] < 1.0,
            _ => true,
        }
    }

    /// Re-apply the family's parameter constraints in place (after an SGD
    /// step, for instance). Only the Bernoulli family is constrained.
    pub fn project(&self, theta: &mut [f64]) {
        if let ParametricFamily::Bernoulli = self {
            theta[0] = theta[0].clamp(BERNOULLI_CLAMP.0, BERNOULLI_CLAMP.1);
        }
    }

    /// Probability weights of Q_theta, in support order.
    pub fn probs(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_theta(theta)?;
        Ok(match self {
            ParametricFamily::Bernoulli => {
                let t = theta[0].clamp(BERNOULLI_CLAMP.0, BERNOULLI_CLAMP.1);
                vec![1.0 - t, t]
            }
            ParametricFamily::SoftmaxCategorical { .. } => softmax(theta),
            ParametricFamily::ThreePointToy => {
                // 1/(1+2e^t) and e^t/(1+2e^t), computed from whichever side
                // of the exponential stays bounded.
                let t = theta[0];
                if t <= 0.0 {
                    let e = t.exp();
                    let z = 1.0 + 2.0 * e;
                    vec![1.0 / z, e / z, e / z]
                } else {
                    let e = (-t).exp();
                    let z = e + 2.0;
                    vec![e / z, 1.0 / z, 1.0 / z]
                }
            }
        })
    }

    /// The induced distribution Q_theta on the family's support.
    pub fn dist(&self, theta: &[f64]) -> Result<DiscreteDist> {
        DiscreteDist::new(self.support(), self.probs(theta)?)
    }

    /// Exact analytic partials of the distribution function at `x`:
    /// the vector d F_{Q_theta}(x) / d theta.
    pub fn grad_cdf(&self, theta: &[f64], x: f64) -> Result<Vec<f64>> {
        self.check_theta(theta)?;
        match self {
            ParametricFamily::Bernoulli => {
                // F(x) = 1 - theta on [0, 1), constant elsewhere.
                Ok(if (0.0..1.0).contains(&x) {
                    vec![-1.0]
                } else {
                    vec![0.0]
                })
            }
            ParametricFamily::SoftmaxCategorical { support } => {
                // dF(x)/dtheta_j = p_j (1{v_j <= x} - F(x)).
                let p = softmax(theta);
                let f: f64 = support
                    .iter()
                    .zip(&p)
                    .filter(|(&v, _)| v <= x)
                    .map(|(_, &pj)| pj)
                    .sum();
                Ok(support
                    .iter()
                    .zip(&p)
                    .map(|(&v, &pj)| pj * (if v <= x { 1.0 } else { 0.0 } - f))
                    .collect())
            }
            ParametricFamily::ThreePointToy => {
                let t = theta[0];
                // d Q(0)/dt = -2e^t/(1+2e^t)^2; on [1,10) the cumulative is
                // (1+e^t)/(1+2e^t) with derivative -e^t/(1+2e^t)^2.
                let e = t.exp();
                let z = 1.0 + 2.0 * e;
                Ok(if (0.0..1.0).contains(&x) {
                    vec![-2.0 * e / (z * z)]
                } else if (1.0..10.0).contains(&x) {
                    vec![-e / (z * z)]
                } else {
                    vec![0.0]
                })
            }
        }
    }

    /// Gradient of `log Q_theta(support[atom_idx])` with respect to theta.
    pub fn grad_log_prob(&self, theta: &[f64], atom_idx: usize) -> Result<Vec<f64>> {
        self.check_theta(theta)?;
        let k = self.support().len();
        if atom_idx >= k {
            return Err(Error::Domain(format!("atom index {atom_idx} out of range {k}")));
        }
        match self {
            ParametricFamily::Bernoulli => {
                let t = theta[0].clamp(BERNOULLI_CLAMP.0, BERNOULLI_CLAMP.1);
                Ok(vec![if atom_idx == 1 { 1.0 / t } else { -1.0 / (1.0 - t) }])
            }
            ParametricFamily::SoftmaxCategorical { .. } => {
                // d log p_i / d theta_j = delta_ij - p_j.
                let p = softmax(theta);
                Ok((0..k)
                    .map(|j| if j == atom_idx { 1.0 - p[j] } else { -p[j] })
                    .collect())
            }
            ParametricFamily::ThreePointToy => {
                let t = theta[0];
                // log Q(0) = -log(1+2e^t); log Q(1) = log Q(10) = t - log(1+2e^t).
                let e = t.exp();
                let s = 2.0 * e / (1.0 + 2.0 * e);
                Ok(vec![if atom_idx == 0 { -s } else { 1.0 - s }])
            }
        }
    }
}

/// Numerically stable softmax (max-subtraction).
fn softmax(theta: &[f64]) -> Vec<f64> {
    let max = theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = theta.iter().map(|t| (t - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}
