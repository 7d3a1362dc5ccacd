//! True analytic gradients, sample-gradient estimators, and two independent
//! oracles for losses of the form theta -> d(P, Q_theta):
//!
//! - central finite differences of the true loss, and
//! - the exact expectation of the sample gradient, enumerated over all
//!   outcome multisets of an m-sample with multinomial weights.
//!
//! The KL gradient is -sum_x P(x) d log Q_theta(x); the l_p^p gradients
//! integrate sgn(F_Q - F_P)|F_Q - F_P|^{p-1} dF_Q over merged support
//! segments; the Wasserstein-power gradients follow the motion of Q's
//! cumulative breakpoints through the target's quantile function. Ties
//! (a breakpoint exactly on a target cumulative value) take the symmetric
//! subgradient, so sgn(0) = 0 holds throughout.

use serde::{Deserialize, Serialize};

use crate::binomial::{expected_sign_against_binomial_mean, multinomial_weight};
use crate::distributions::{empirical, DiscreteDist, ParametricFamily};
use crate::divergences::{self, pairwise_sum};
use crate::error::{Error, Result};

/// Enumeration budget for [`LossSpec::expected_sample_grad`]:
/// |target support|^m may not exceed this.
pub const ENUMERATION_BUDGET: f64 = 1e7;

/// Which divergence a [`LossSpec`] optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Divergence {
    Kl,
    WassersteinPP { p: f64 },
    LpPP { p: f64 },
    Cramer,
    /// Univariate energy distance, 2x the Cramér distance. Multivariate
    /// generator gradients live in `gan_losses` via reparametrization.
    Energy,
}

impl Divergence {
    fn validate(&self) -> Result<()> {
        match *self {
            Divergence::WassersteinPP { p } | Divergence::LpPP { p } if p.is_nan() || p < 1.0 => Err(
                Error::Domain(format!("divergence order p={p} must be >= 1")),
            ),
            _ => Ok(()),
        }
    }
}

/// A loss theta -> d(target, Q_theta).
#[derive(Debug, Clone)]
pub struct LossSpec {
    pub divergence: Divergence,
    pub family: ParametricFamily,
    pub target: DiscreteDist,
}

/// Output of the exact sample-gradient expectation oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct GradReport {
    pub true_grad: Vec<f64>,
    pub expected_sample_grad: Vec<f64>,
    /// expected_sample_grad - true_grad, componentwise.
    pub bias: Vec<f64>,
    pub m: usize,
}

/// Monte Carlo estimate of the expected sample gradient; a fallback when
/// the exact enumeration budget is exceeded. Never silently substitutes
/// for the exact oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct McGradReport {
    pub mean: Vec<f64>,
    pub std_err: Vec<f64>,
    pub runs: usize,
    pub m: usize,
}

/// sgn with sgn(0) = 0, the subgradient convention at ties.
fn sign(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else if z < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// sgn(z) |z|^{p-1}: the derivative of |z|^p up to the factor p.
fn abs_power_derivative(z: f64, p: f64) -> f64 {
    if z == 0.0 {
        0.0
    } else if p == 1.0 {
        sign(z)
    } else {
        sign(z) * z.abs().powf(p - 1.0)
    }
}

impl LossSpec {
    pub fn new(divergence: Divergence, family: ParametricFamily, target: DiscreteDist) -> Result<Self> {
        divergence.validate()?;
        Ok(LossSpec {
            divergence,
            family,
            target,
        })
    }

    /// The true loss d(target, Q_theta). KL returns infinity (as a value)
    /// when the target is not absolutely continuous w.r.t. Q_theta.
    pub fn true_loss(&self, theta: &[f64]) -> Result<f64> {
        self.loss_against(&self.target, theta)
    }

    /// The sample loss d(empirical(samples), Q_theta).
    pub fn sample_loss(&self, theta: &[f64], samples: &[f64]) -> Result<f64> {
        self.loss_against(&empirical(samples)?, theta)
    }

    fn loss_against(&self, target: &DiscreteDist, theta: &[f64]) -> Result<f64> {
        let model = self.family.dist(theta)?;
        Ok(match self.divergence {
            Divergence::Kl => divergences::kl(target, &model),
            Divergence::WassersteinPP { p } => divergences::wasserstein_pp(target, &model, p)?,
            Divergence::LpPP { p } => divergences::lp_pp(target, &model, p)?,
            Divergence::Cramer => divergences::cramer(target, &model),
            Divergence::Energy => 2.0 * divergences::cramer(target, &model),
        })
    }

    /// Exact analytic gradient of the true loss at `theta`.
    pub fn grad_true(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.grad_against(&self.target, theta)
    }

    /// Gradient of the sample loss: the true gradient with the target
    /// replaced by the empirical distribution of `samples`.
    pub fn grad_sample(&self, theta: &[f64], samples: &[f64]) -> Result<Vec<f64>> {
        self.grad_against(&empirical(samples)?, theta)
    }

    fn grad_against(&self, target: &DiscreteDist, theta: &[f64]) -> Result<Vec<f64>> {
        match self.divergence {
            Divergence::Kl => self.kl_grad(target, theta),
            Divergence::Cramer => self.lp_grad(target, theta, 2.0, 1.0),
            Divergence::LpPP { p } => self.lp_grad(target, theta, p, 1.0),
            Divergence::Energy => self.lp_grad(target, theta, 2.0, 2.0),
            Divergence::WassersteinPP { p } => self.wasserstein_grad(target, theta, p),
        }
    }

    /// -sum_x P(x) d log Q_theta(x) / d theta.
    fn kl_grad(&self, target: &DiscreteDist, theta: &[f64]) -> Result<Vec<f64>> {
        let support = self.family.support();
        let mut grad = vec![0.0; self.family.param_dim()];
        for (&x, &px) in target.support().iter().zip(target.probs()) {
            if px == 0.0 {
                continue;
            }
            let idx = support
                .iter()
                .position(|&v| v == x)
                .ok_or(Error::InfiniteKl { atom: x })?;
            let g = self.family.grad_log_prob(theta, idx)?;
            for (acc, gi) in grad.iter_mut().zip(g) {
                *acc -= px * gi;
            }
        }
        Ok(grad)
    }

    /// Gradient of scale * integral |F_Q - F_P|^p dx:
    /// scale * p * sum over merged-support segments of
    /// sgn(F_Q - F_P)|F_Q - F_P|^{p-1} * dF_Q/dtheta * segment length.
    fn lp_grad(&self, target: &DiscreteDist, theta: &[f64], p: f64, scale: f64) -> Result<Vec<f64>> {
        let model = self.family.dist(theta)?;
        let grid = divergences::merged_support(target, &model);
        let dim = self.family.param_dim();
        let mut per_component: Vec<Vec<f64>> = vec![Vec::with_capacity(grid.len()); dim];
        for w in grid.windows(2) {
            let z = model.cdf(w[0]) - target.cdf(w[0]);
            let phi = abs_power_derivative(z, p);
            if phi == 0.0 {
                continue;
            }
            let dcdf = self.family.grad_cdf(theta, w[0])?;
            let seg = w[1] - w[0];
            for (terms, &d) in per_component.iter_mut().zip(&dcdf) {
                terms.push(phi * d * seg);
            }
        }
        Ok(per_component
            .iter()
            .map(|terms| scale * p * pairwise_sum(terms))
            .collect())
    }

    /// Gradient of integral |Finv_P(u) - Finv_Q(u)|^p du via the motion of
    /// Q's interior cumulative breakpoints c_j = F_Q(v_j):
    ///
    /// d/dtheta = sum_j dc_j/dtheta *
    ///            (|x_P(c_j) - v_j|^p - |x_P(c_j) - v_{j+1}|^p),
    ///
    /// where x_P is the target quantile function. When c_j lands exactly on
    /// a target cumulative value the loss has a kink; the two one-sided
    /// values are averaged (for Bernoulli pairs this is exactly sgn(0) = 0).
    fn wasserstein_grad(&self, target: &DiscreteDist, theta: &[f64], p: f64) -> Result<Vec<f64>> {
        let model = self.family.dist(theta)?;
        let support = model.support();
        let dim = self.family.param_dim();
        let mut grad = vec![0.0; dim];
        for j in 0..model.len() - 1 {
            let c = model.cumulative()[j];
            if c <= 0.0 {
                continue;
            }
            let (lower, upper) = (support[j], support[j + 1]);
            let gap = |x: f64| (x - lower).abs().powf(p) - (x - upper).abs().powf(p);
            let idx = target.cumulative().partition_point(|&t| t < c);
            let idx = idx.min(target.len() - 1);
            let term = if target.cumulative()[idx] == c && idx + 1 < target.len() {
                0.5 * (gap(target.support()[idx]) + gap(target.support()[idx + 1]))
            } else {
                gap(target.support()[idx])
            };
            if term == 0.0 {
                continue;
            }
            let dcdf = self.family.grad_cdf(theta, lower)?;
            for (acc, &d) in grad.iter_mut().zip(&dcdf) {
                *acc += term * d;
            }
        }
        Ok(grad)
    }

    /// Exact expectation of the sample gradient over all m-sample outcomes:
    /// outcome multisets are enumerated with multinomial weights (exact and
    /// exponentially cheaper than ordered tuples).
    ///
    /// For Bernoulli targets under a Wasserstein-power loss the binomial
    /// closed form 2 Pr{theta_hat < theta} - 1 is also computed and must
    /// agree with the enumeration to 1e-12.
    pub fn expected_sample_grad(&self, theta: &[f64], m: usize) -> Result<GradReport> {
        if m == 0 {
            return Err(Error::Domain("sample count m must be >= 1".into()));
        }
        let n = self.target.len();
        let needed = (n as f64).powi(m as i32);
        if needed > ENUMERATION_BUDGET {
            return Err(Error::BudgetExceeded {
                needed,
                budget: ENUMERATION_BUDGET,
            });
        }

        let dim = self.family.param_dim();
        let mut expected = vec![0.0; dim];
        let mut counts = vec![0usize; n];
        self.enumerate_multisets(theta, m, 0, m, &mut counts, &mut expected)?;

        let true_grad = self.grad_true(theta)?;
        let bias: Vec<f64> = expected
            .iter()
            .zip(&true_grad)
            .map(|(e, t)| e - t)
            .collect();

        self.check_binomial_closed_form(theta, m, &expected);

        Ok(GradReport {
            true_grad,
            expected_sample_grad: expected,
            bias,
            m,
        })
    }

    fn enumerate_multisets(
        &self,
        theta: &[f64],
        m: usize,
        atom: usize,
        remaining: usize,
        counts: &mut Vec<usize>,
        expected: &mut [f64],
    ) -> Result<()> {
        if atom + 1 == counts.len() {
            counts[atom] = remaining;
            let weight = multinomial_weight(counts, self.target.probs());
            if weight > 0.0 {
                let mut samples = Vec::with_capacity(m);
                for (i, &c) in counts.iter().enumerate() {
                    samples.extend(std::iter::repeat_n(self.target.support()[i], c));
                }
                let grad = self.grad_sample(theta, &samples)?;
                for (acc, g) in expected.iter_mut().zip(grad) {
                    *acc += weight * g;
                }
            }
            counts[atom] = 0;
            return Ok(());
        }
        for c in 0..=remaining {
            counts[atom] = c;
            self.enumerate_multisets(theta, m, atom + 1, remaining - c, counts, expected)?;
        }
        counts[atom] = 0;
        Ok(())
    }

    /// Cross-check against the binomial closed form where it applies.
    fn check_binomial_closed_form(&self, theta: &[f64], m: usize, expected: &[f64]) {
        let is_bernoulli_pair = matches!(self.family, ParametricFamily::Bernoulli)
            && matches!(self.divergence, Divergence::WassersteinPP { .. })
            && self.target.support().iter().all(|&x| x == 0.0 || x == 1.0);
        if !is_bernoulli_pair {
            return;
        }
        let theta_star = self.target.mass_at(1.0);
        let closed = expected_sign_against_binomial_mean(m, theta_star, theta[0]);
        assert!(
            (expected[0] - closed).abs() <= 1e-12,
            "enumeration {} disagrees with binomial closed form {closed}",
            expected[0]
        );
    }

    /// Monte Carlo fallback: sample-gradient mean with its standard error.
    pub fn mc_expected_sample_grad(
        &self,
        theta: &[f64],
        m: usize,
        runs: usize,
        rng: &mut crate::distributions::Rng,
    ) -> Result<McGradReport> {
        if m == 0 || runs == 0 {
            return Err(Error::Domain("m and runs must be >= 1".into()));
        }
        let dim = self.family.param_dim();
        let mut sum = vec![0.0; dim];
        let mut sum_sq = vec![0.0; dim];
        for _ in 0..runs {
            let samples = self.target.sample(rng, m);
            let g = self.grad_sample(theta, &samples)?;
            for i in 0..dim {
                sum[i] += g[i];
                sum_sq[i] += g[i] * g[i];
            }
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / runs as f64).collect();
        let std_err: Vec<f64> = sum_sq
            .iter()
            .zip(&mean)
            .map(|(sq, mu)| {
                let var = (sq / runs as f64 - mu * mu).max(0.0);
                (var / runs as f64).sqrt()
            })
            .collect();
        Ok(McGradReport {
            mean,
            std_err,
            runs,
            m,
        })
    }

    /// Central finite differences of the true loss, componentwise. Errors
    /// if a perturbed parameter leaves the family's valid region.
    pub fn finite_diff(&self, theta: &[f64], h: f64) -> Result<Vec<f64>> {
        if h.is_nan() || h <= 0.0 {
            return Err(Error::Domain(format!("step h={h} must be positive")));
        }
        let mut grad = Vec::with_capacity(theta.len());
        for i in 0..theta.len() {
            let mut up = theta.to_vec();
            let mut dn = theta.to_vec();
            up[i] += h;
            dn[i] -= h;
            if !self.family.params_valid(&up) || !self.family.params_valid(&dn) {
                return Err(Error::Domain(format!(
                    "finite-difference step leaves the valid region at component {i}"
                )));
            }
            grad.push((self.loss_against(&self.target, &up)?
                - self.loss_against(&self.target, &dn)?)
                / (2.0 * h));
        }
        Ok(grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Rng;

    fn bernoulli_spec(div: Divergence, theta_star: f64) -> LossSpec {
        LossSpec::new(
            div,
            ParametricFamily::Bernoulli,
            DiscreteDist::bernoulli(theta_star).unwrap(),
        )
        .unwrap()
    }

    fn toy_spec(div: Divergence, probs: [f64; 3]) -> LossSpec {
        LossSpec::new(
            div,
            ParametricFamily::ThreePointToy,
            DiscreteDist::new(vec![0.0, 1.0, 10.0], probs.to_vec()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn wasserstein_true_grad_is_sign_of_gap() {
        for &p in &[1.0, 1.5, 2.0, 3.0] {
            let spec = bernoulli_spec(Divergence::WassersteinPP { p }, 0.5);
            assert_eq!(spec.grad_true(&[0.8]).unwrap(), vec![1.0]);
            assert_eq!(spec.grad_true(&[0.2]).unwrap(), vec![-1.0]);
            // At the kink the symmetric subgradient is zero.
            assert_eq!(spec.grad_true(&[0.5]).unwrap(), vec![0.0]);
        }
    }

    #[test]
    fn toy_cramer_grad_vanishes_at_realizable_target() {
        let spec = toy_spec(Divergence::Cramer, [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
        let g = spec.grad_true(&[0.0]).unwrap();
        assert!(g[0].abs() < 1e-15, "{g:?}");
    }

    #[test]
    fn sample_grad_examples() {
        let spec = bernoulli_spec(Divergence::WassersteinPP { p: 1.0 }, 0.5);
        // One sample at 1: gradient sgn(0.7 - 1) = -1, for any target.
        assert_eq!(spec.grad_sample(&[0.7], &[1.0]).unwrap(), vec![-1.0]);
        // Samples whose mean ties theta: convention gives 0.
        assert_eq!(spec.grad_sample(&[0.5], &[0.0, 1.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn toy_cramer_sample_grad_matches_finite_differences() {
        let spec = toy_spec(Divergence::Cramer, [0.5, 0.25, 0.25]);
        let theta = [0.0];
        let analytic = spec.grad_sample(&theta, &[0.0]).unwrap();
        // Finite differences of the sample loss around theta.
        let h = 1e-5;
        let sample_spec = LossSpec::new(
            Divergence::Cramer,
            ParametricFamily::ThreePointToy,
            empirical(&[0.0]).unwrap(),
        )
        .unwrap();
        let fd = sample_spec.finite_diff(&theta, h).unwrap();
        assert!(
            (analytic[0] - fd[0]).abs() <= 1e-6 * analytic[0].abs().max(1.0),
            "{analytic:?} vs {fd:?}"
        );
    }

    #[test]
    fn expected_sample_grad_m1_is_constant() {
        // For m = 1 the expected Wasserstein sample gradient is 1 - 2 theta*
        // regardless of theta.
        for &ts in &[0.1, 0.3, 0.7] {
            let spec = bernoulli_spec(Divergence::WassersteinPP { p: 1.0 }, ts);
            let reference = (1.0 - ts) - ts;
            for &th in &[0.15, 0.5, 0.85] {
                let rep = spec.expected_sample_grad(&[th], 1).unwrap();
                assert_eq!(rep.expected_sample_grad[0], reference);
            }
        }
    }

    #[test]
    fn expected_sample_grad_enumeration_example() {
        // theta* = 0.5, m = 2, theta = 0.8: Pr{theta_hat < 0.8} = 0.75,
        // so E g_hat = 0.5, true gradient 1, bias -0.5.
        let spec = bernoulli_spec(Divergence::WassersteinPP { p: 1.0 }, 0.5);
        let rep = spec.expected_sample_grad(&[0.8], 2).unwrap();
        assert!((rep.expected_sample_grad[0] - 0.5).abs() <= 1e-15);
        assert_eq!(rep.true_grad, vec![1.0]);
        assert!((rep.bias[0] + 0.5).abs() <= 1e-15);
    }

    #[test]
    fn cramer_sample_gradients_are_unbiased() {
        let mut rng = Rng::seeded(42);
        for _ in 0..25 {
            let probs = {
                let raw: Vec<f64> = (0..3).map(|_| 0.05 + rng.uniform_in(0.0, 1.0)).collect();
                let t: f64 = raw.iter().sum();
                [raw[0] / t, raw[1] / t, raw[2] / t]
            };
            let spec = toy_spec(Divergence::Cramer, probs);
            let theta = [rng.uniform_in(-1.5, 1.5)];
            for m in 1..=4 {
                let rep = spec.expected_sample_grad(&theta, m).unwrap();
                assert!(
                    rep.bias[0].abs() <= 1e-10,
                    "m={m} probs={probs:?}: bias {}",
                    rep.bias[0]
                );
            }
        }
    }

    #[test]
    fn energy_sample_gradients_are_unbiased() {
        let spec = toy_spec(Divergence::Energy, [0.5, 0.25, 0.25]);
        for m in 1..=3 {
            let rep = spec.expected_sample_grad(&[0.4], m).unwrap();
            assert!(rep.bias[0].abs() <= 1e-10, "m={m}: {}", rep.bias[0]);
            // And the energy gradient is exactly twice the Cramér one.
            let cram = toy_spec(Divergence::Cramer, [0.5, 0.25, 0.25]);
            let c = cram.grad_true(&[0.4]).unwrap();
            let e = spec.grad_true(&[0.4]).unwrap();
            assert!((e[0] - 2.0 * c[0]).abs() <= 1e-15);
        }
    }

    /// The Jensen directions for l_p^p, p != 2, in a regime where the CDF
    /// gap keeps one dominant sign: below the Cramér exponent the bias is
    /// negative, above it positive.
    #[test]
    fn lp_bias_signs_straddle_cramer() {
        let half = DiscreteDist::bernoulli(0.5).unwrap();
        let theta = [0.9];
        let lo = LossSpec::new(
            Divergence::LpPP { p: 1.5 },
            ParametricFamily::Bernoulli,
            half.clone(),
        )
        .unwrap();
        let hi = LossSpec::new(Divergence::LpPP { p: 3.0 }, ParametricFamily::Bernoulli, half)
            .unwrap();
        let rep_lo = lo.expected_sample_grad(&theta, 2).unwrap();
        let rep_hi = hi.expected_sample_grad(&theta, 2).unwrap();
        assert!(rep_lo.bias[0] < -1e-6, "p=1.5 bias {}", rep_lo.bias[0]);
        assert!(rep_hi.bias[0] > 1e-6, "p=3 bias {}", rep_hi.bias[0]);
    }

    #[test]
    fn budget_is_enforced() {
        let spec = toy_spec(Divergence::Cramer, [0.5, 0.25, 0.25]);
        let err = spec.expected_sample_grad(&[0.0], 20).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }), "{err}");
    }

    #[test]
    fn mc_fallback_agrees_with_exact_oracle() {
        let spec = toy_spec(Divergence::Cramer, [0.5, 0.25, 0.25]);
        let exact = spec.expected_sample_grad(&[0.3], 2).unwrap();
        let mut rng = Rng::seeded(7);
        let mc = spec.mc_expected_sample_grad(&[0.3], 2, 20_000, &mut rng).unwrap();
        let gap = (mc.mean[0] - exact.expected_sample_grad[0]).abs();
        assert!(gap <= 4.0 * mc.std_err[0] + 1e-3, "gap {gap}, se {}", mc.std_err[0]);
    }

    #[test]
    fn finite_diff_matches_smooth_gradients() {
        let mut rng = Rng::seeded(11);
        for _ in 0..20 {
            let probs = {
                let raw: Vec<f64> = (0..3).map(|_| 0.05 + rng.uniform_in(0.0, 1.0)).collect();
                let t: f64 = raw.iter().sum();
                [raw[0] / t, raw[1] / t, raw[2] / t]
            };
            let theta = [rng.uniform_in(-1.5, 1.5)];
            for div in [Divergence::Cramer, Divergence::Kl] {
                let spec = toy_spec(div, probs);
                let g = spec.grad_true(&theta).unwrap();
                let fd = spec.finite_diff(&theta, 1e-5).unwrap();
                assert!(
                    (g[0] - fd[0]).abs() <= 1e-6 * g[0].abs().max(1e-3),
                    "{div:?} theta={theta:?}: {} vs {}",
                    g[0],
                    fd[0]
                );
            }
        }
    }

    #[test]
    fn finite_diff_on_wasserstein_kinks() {
        let spec = bernoulli_spec(Divergence::WassersteinPP { p: 1.0 }, 0.5);
        // Away from the kink the loss is locally linear.
        let fd = spec.finite_diff(&[0.8], 1e-5).unwrap();
        assert!((fd[0] - 1.0).abs() <= 1e-10);
        // At the kink the symmetric difference averages to zero.
        let fd = spec.finite_diff(&[0.5], 1e-5).unwrap();
        assert!(fd[0].abs() <= 1e-10);
    }

    #[test]
    fn finite_diff_rejects_boundary_exit() {
        let spec = bernoulli_spec(Divergence::Cramer, 0.5);
        assert!(spec.finite_diff(&[1e-7], 1e-5).is_err());
    }

    #[test]
    fn kl_grad_infinite_signal() {
        // A target atom outside the family support cannot be covered.
        let spec = LossSpec::new(
            Divergence::Kl,
            ParametricFamily::Bernoulli,
            DiscreteDist::new(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            spec.grad_true(&[0.5]),
            Err(Error::InfiniteKl { atom }) if atom == 2.0
        ));
    }

    #[test]
    fn wasserstein_and_l1_gradients_agree_at_p1() {
        let mut rng = Rng::seeded(59);
        for _ in 0..50 {
            let probs = {
                let raw: Vec<f64> = (0..3).map(|_| 0.05 + rng.uniform_in(0.0, 1.0)).collect();
                let t: f64 = raw.iter().sum();
                [raw[0] / t, raw[1] / t, raw[2] / t]
            };
            let theta = [rng.uniform_in(-1.5, 1.5)];
            let w = toy_spec(Divergence::WassersteinPP { p: 1.0 }, probs)
                .grad_true(&theta)
                .unwrap();
            let l = toy_spec(Divergence::LpPP { p: 1.0 }, probs)
                .grad_true(&theta)
                .unwrap();
            assert!((w[0] - l[0]).abs() <= 1e-12, "{} vs {}", w[0], l[0]);
        }
    }

    #[test]
    fn consistency_bias_shrinks_with_m() {
        let spec = bernoulli_spec(Divergence::WassersteinPP { p: 1.0 }, 0.3);
        let mut prev = f64::INFINITY;
        for m in [1usize, 2, 4, 8] {
            let rep = spec.expected_sample_grad(&[0.6], m).unwrap();
            let b = rep.bias[0].abs();
            assert!(b <= prev + 1e-12, "m={m}: {b} > {prev}");
            prev = b;
        }
    }
}
