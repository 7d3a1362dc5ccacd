//! Cramér-GAN loss computations, gradient-checked and free of any
//! training loop: the critic built from a transform h,
//!
//!   f(x) = ||h(x) - h(x_g')|| - ||h(x)||,
//!
//! the three-sample generator loss, the surrogate loss used when only one
//! real sample is available, and the interpolated gradient penalty
//! assembled from two vector-Jacobian products. The transforms shipped
//! here (identity, affine, one-hidden-layer tanh) carry hand-written vjps,
//! which is all the machinery the losses need.
//!
//! Loss *values* use exact Euclidean norms; only the vjp cotangents guard
//! the norm with ||v||_eps = sqrt(v.v + eps^2), so coincident points
//! cannot produce NaN while checked values stay unperturbed well below
//! test tolerances.

use serde::{Deserialize, Serialize};

use crate::distributions::{DiscreteDist, PointCloud};
use crate::error::{Error, Result};

/// Norm guard inside vjp cotangents.
const NORM_GUARD: f64 = 1e-12;

/// A differentiable map h: R^d -> R^k with vector-Jacobian product access:
/// `vjp(x, u)` returns u^T J_h(x), the gradient at the input of x -> u.h(x).
pub trait Transform {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn forward(&self, x: &[f64]) -> Vec<f64>;
    fn vjp(&self, x: &[f64], cotangent: &[f64]) -> Vec<f64>;
}

/// h(x) = x.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Identity {
    pub dim: usize,
}

impl Transform for Identity {
    fn input_dim(&self) -> usize {
        self.dim
    }
    fn output_dim(&self) -> usize {
        self.dim
    }
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
    fn vjp(&self, _x: &[f64], cotangent: &[f64]) -> Vec<f64> {
        cotangent.to_vec()
    }
}

/// h(x) = A x + b for a fixed k x d matrix A.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Affine {
    /// Row-major k x d.
    pub matrix: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl Transform for Affine {
    fn input_dim(&self) -> usize {
        self.matrix.first().map_or(0, Vec::len)
    }
    fn output_dim(&self) -> usize {
        self.matrix.len()
    }
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.matrix
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| b + row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>())
            .collect()
    }
    fn vjp(&self, _x: &[f64], cotangent: &[f64]) -> Vec<f64> {
        let d = self.input_dim();
        let mut out = vec![0.0; d];
        for (row, &u) in self.matrix.iter().zip(cotangent) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += u * a;
            }
        }
        out
    }
}

/// h(x) = W2 tanh(W1 x + b1) + b2: one hidden layer, enough nonlinearity
/// to exercise every loss path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TanhMlp {
    /// Row-major hidden x d.
    pub hidden_weights: Vec<Vec<f64>>,
    pub hidden_bias: Vec<f64>,
    /// Row-major k x hidden.
    pub output_weights: Vec<Vec<f64>>,
    pub output_bias: Vec<f64>,
}

impl TanhMlp {
    fn hidden(&self, x: &[f64]) -> Vec<f64> {
        self.hidden_weights
            .iter()
            .zip(&self.hidden_bias)
            .map(|(row, b)| (b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()).tanh())
            .collect()
    }
}

impl Transform for TanhMlp {
    fn input_dim(&self) -> usize {
        self.hidden_weights.first().map_or(0, Vec::len)
    }
    fn output_dim(&self) -> usize {
        self.output_weights.len()
    }
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        let h = self.hidden(x);
        self.output_weights
            .iter()
            .zip(&self.output_bias)
            .map(|(row, b)| b + row.iter().zip(&h).map(|(w, v)| w * v).sum::<f64>())
            .collect()
    }
    fn vjp(&self, x: &[f64], cotangent: &[f64]) -> Vec<f64> {
        let h = self.hidden(x);
        // u^T W2, gated by the tanh derivative 1 - h^2, then through W1.
        let mut at_hidden = vec![0.0; h.len()];
        for (row, &u) in self.output_weights.iter().zip(cotangent) {
            for (acc, w) in at_hidden.iter_mut().zip(row) {
                *acc += u * w;
            }
        }
        for (acc, hv) in at_hidden.iter_mut().zip(&h) {
            *acc *= 1.0 - hv * hv;
        }
        let mut out = vec![0.0; self.input_dim()];
        for (row, &u) in self.hidden_weights.iter().zip(&at_hidden) {
            for (acc, w) in out.iter_mut().zip(row) {
                *acc += u * w;
            }
        }
        out
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn guarded_norm(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() + NORM_GUARD * NORM_GUARD).sqrt()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// One evaluation batch: a real sample, two independent generator samples,
/// the interpolation coefficient, and the penalty weight.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GanBatch {
    pub x_real: Vec<f64>,
    pub x_gen: Vec<f64>,
    pub x_gen_prime: Vec<f64>,
    pub epsilon: f64,
    pub lambda: f64,
}

impl GanBatch {
    pub fn validate(&self, h: &dyn Transform) -> Result<()> {
        let d = h.input_dim();
        for (name, v) in [
            ("x_real", &self.x_real),
            ("x_gen", &self.x_gen),
            ("x_gen_prime", &self.x_gen_prime),
        ] {
            if v.len() != d {
                return Err(Error::DimensionMismatch(v.len(), d));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Domain(format!("non-finite entry in {name}")));
            }
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Domain(format!(
                "epsilon {} outside [0, 1]",
                self.epsilon
            )));
        }
        if self.lambda.is_nan() || self.lambda < 0.0 {
            return Err(Error::Domain(format!("lambda {} negative", self.lambda)));
        }
        Ok(())
    }
}

/// Critic value f(x) = ||h(x) - h(x_gen')|| - ||h(x)||.
pub fn critic_value(x: &[f64], x_gen_prime: &[f64], h: &dyn Transform) -> f64 {
    let hx = h.forward(x);
    let hp = h.forward(x_gen_prime);
    norm(&sub(&hx, &hp)) - norm(&hx)
}

/// Three-sample generator loss
/// ||h(x_r) - h(x_g)|| + ||h(x_r) - h(x_g')|| - ||h(x_g) - h(x_g')||,
/// the unbiased one-real-two-generated kernel of the energy distance
/// (dropping the real-real self term, which carries no generator
/// dependence).
pub fn generator_loss(batch: &GanBatch, h: &dyn Transform) -> Result<f64> {
    batch.validate(h)?;
    let hr = h.forward(&batch.x_real);
    let hg = h.forward(&batch.x_gen);
    let hp = h.forward(&batch.x_gen_prime);
    Ok(norm(&sub(&hr, &hg)) + norm(&sub(&hr, &hp)) - norm(&sub(&hg, &hp)))
}

/// Surrogate generator loss f(x_r) - f(x_g), both critics sharing the same
/// x_g' — the approximation used when a second independent real sample is
/// unavailable (it assumes h(x) is near 0 on real samples).
pub fn surrogate_loss(batch: &GanBatch, h: &dyn Transform) -> Result<f64> {
    batch.validate(h)?;
    Ok(critic_value(&batch.x_real, &batch.x_gen_prime, h)
        - critic_value(&batch.x_gen, &batch.x_gen_prime, h))
}

/// Gradient of f at `x` (two vjp calls with the unit-direction cotangents,
/// norm-guarded at coincident points).
pub fn critic_input_gradient(x: &[f64], x_gen_prime: &[f64], h: &dyn Transform) -> Vec<f64> {
    let hx = h.forward(x);
    let hp = h.forward(x_gen_prime);
    let diff = sub(&hx, &hp);
    let u1: Vec<f64> = {
        let n = guarded_norm(&diff);
        diff.iter().map(|v| v / n).collect()
    };
    let u2: Vec<f64> = {
        let n = guarded_norm(&hx);
        hx.iter().map(|v| v / n).collect()
    };
    let g1 = h.vjp(x, &u1);
    let g2 = h.vjp(x, &u2);
    g1.iter().zip(&g2).map(|(a, b)| a - b).collect()
}

/// Gradient penalty lambda (||grad_x f(x_hat)|| - 1)^2 at the interpolate
/// x_hat = eps x_r + (1 - eps) x_g.
pub fn gradient_penalty(batch: &GanBatch, h: &dyn Transform) -> Result<f64> {
    batch.validate(h)?;
    let x_hat: Vec<f64> = batch
        .x_real
        .iter()
        .zip(&batch.x_gen)
        .map(|(r, g)| batch.epsilon * r + (1.0 - batch.epsilon) * g)
        .collect();
    let grad = critic_input_gradient(&x_hat, &batch.x_gen_prime, h);
    let gap = norm(&grad) - 1.0;
    Ok(batch.lambda * gap * gap)
}

/// Critic loss: -surrogate_loss + gradient penalty.
pub fn critic_loss(batch: &GanBatch, h: &dyn Transform) -> Result<f64> {
    Ok(-surrogate_loss(batch, h)? + gradient_penalty(batch, h)?)
}

/// A scalar affine generator G(z) = intercept + slope * z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineGenerator {
    pub intercept: f64,
    pub slope: f64,
}

impl AffineGenerator {
    pub fn apply(&self, z: f64) -> f64 {
        self.intercept + self.slope * z
    }

    /// Pushforward of a finite noise distribution, as a weighted cloud in
    /// R^1 (no sorting or merging required).
    pub fn pushforward(&self, noise: &DiscreteDist) -> PointCloud {
        let points = noise.support().iter().map(|&z| vec![self.apply(z)]).collect();
        PointCloud::new(points, noise.probs().to_vec()).expect("valid by construction")
    }
}

/// Budget for the pairwise enumerations inside
/// [`reparam_generator_grad`].
pub const REPARAM_BUDGET: usize = 10_000_000;

fn sign(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else if z < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Exact gradient of the energy distance between `target` and the
/// pushforward of `noise` under G_(intercept, slope), by the
/// reparametrization identity
///
///   grad E(X, G(Z)) = 2 E grad ||X - G(Z)|| - E grad ||G(Z) - G(Z')||,
///
/// enumerated over all (target x noise) and (noise x noise) pairs.
/// Returns [d/d intercept, d/d slope]; kinks use sgn(0) = 0.
pub fn reparam_generator_grad(
    noise: &DiscreteDist,
    gen: &AffineGenerator,
    target: &DiscreteDist,
) -> Result<[f64; 2]> {
    let pairs = target.len() * noise.len() + noise.len() * noise.len();
    if pairs > REPARAM_BUDGET {
        return Err(Error::BudgetExceeded {
            needed: pairs as f64,
            budget: REPARAM_BUDGET as f64,
        });
    }
    let mut grad = [0.0; 2];
    for (&x, &px) in target.support().iter().zip(target.probs()) {
        for (&z, &pz) in noise.support().iter().zip(noise.probs()) {
            // d|G(z) - x| = sgn(G(z) - x) * (1, z).
            let s = sign(gen.apply(z) - x);
            let w = 2.0 * px * pz;
            grad[0] += w * s;
            grad[1] += w * s * z;
        }
    }
    for (&z, &pz) in noise.support().iter().zip(noise.probs()) {
        for (&zp, &pzp) in noise.support().iter().zip(noise.probs()) {
            // d|G(z) - G(z')| = sgn(G(z) - G(z')) * (0, z - z').
            let s = sign(gen.apply(z) - gen.apply(zp));
            grad[1] -= pz * pzp * s * (z - zp);
        }
    }
    Ok(grad)
}
