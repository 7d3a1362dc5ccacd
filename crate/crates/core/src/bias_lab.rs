//! Quantitative reproduction of the sample-Wasserstein bias phenomena on
//! Bernoulli estimation, via exact binomial computations and grid search:
//! the non-vanishing minimax bias, the half-point witness at
//! |theta* - theta| ~ 1/sqrt(m), the wrong-minimum effect (the expected
//! sample loss is minimized at the binomial median, not at theta*), the
//! deterministic-solution regime, and the large-m consistency sweep.
//!
//! Throughout, theta_hat is the empirical mean of m Bernoulli(theta*)
//! draws, the true gradient of |theta* - theta| is sgn(theta - theta*),
//! and the expected sample gradient has the closed form
//! 2 Pr{theta_hat < theta} - 1 (plus a tie term under sgn(0) = 0).

use std::io::Write;

use crate::binomial::{
    binomial_median_interval, binomial_pmf, expected_sign_against_binomial_mean,
};
use crate::error::{Error, Result};

/// One row of a bias table.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasRow {
    pub m: usize,
    pub theta_star: f64,
    pub theta: f64,
    pub true_grad: f64,
    pub expected_sample_grad: f64,
    /// true_grad - expected_sample_grad: the orientation in which the
    /// minimax bias is the positive quantity 2(1 - 1/m)^m.
    pub bias: f64,
}

/// A table of bias rows with a CSV emitter.
#[derive(Debug, Clone, Default)]
pub struct BiasCurve {
    pub rows: Vec<BiasRow>,
}

impl BiasCurve {
    pub const CSV_HEADER: &'static str = "m,theta_star,theta,true_grad,exp_sample_grad,bias";

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.m, r.theta_star, r.theta, r.true_grad, r.expected_sample_grad, r.bias
            )?;
        }
        Ok(())
    }
}

/// Expected sample Wasserstein gradient E sgn(theta - theta_hat) for
/// theta_hat the mean of m Bernoulli(theta_star) samples.
pub fn expected_sample_gradient(m: usize, theta_star: f64, theta: f64) -> f64 {
    expected_sign_against_binomial_mean(m, theta_star, theta)
}

fn sign(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else if z < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// The minimax-bias witness at sample size m.
///
/// For m >= 2 this is the pair theta* = (m-1)/m, theta = midpoint(theta*, 1),
/// where the bias g - E g_hat equals 2(1 - 1/m)^m >= 2e^-2 exactly.
///
/// At m = 1 that construction degenerates: theta* = 0 makes the target a
/// point mass, sampling noise disappears, and the bias is exactly zero (the
/// supremum 2 is approached as theta* -> 1 but attained by no valid pair).
/// The witness used instead is theta* = 1/2, whose m = 1 bias is exactly 1
/// and still clears the 2e^-2 bound.
pub fn minimax_bias(m: usize) -> BiasRow {
    assert!(m >= 1);
    let theta_star = if m == 1 { 0.5 } else { (m as f64 - 1.0) / m as f64 };
    let theta = 0.5 * (theta_star + 1.0);
    let expected = expected_sample_gradient(m, theta_star, theta);
    let true_grad = sign(theta - theta_star);
    let bias = true_grad - expected;
    assert!(
        bias >= 2.0 * (-2.0f64).exp() - 1e-12,
        "minimax bias {bias} below 2e^-2 at m={m}"
    );
    BiasRow {
        m,
        theta_star,
        theta,
        true_grad,
        expected_sample_grad: expected,
        bias,
    }
}

/// Bias at the half point: theta* = 1/2 and theta = 1/2 + 1/(2 sqrt(8m)),
/// a gap of order 1/sqrt(m). Returns g - E g_hat = 2 Pr{theta_hat >= theta},
/// which the anti-concentration bound keeps at or above 1/6 for every m.
pub fn half_point_bias(m: usize) -> BiasRow {
    assert!(m >= 1);
    let theta_star = 0.5;
    let theta = 0.5 + 0.5 / (8.0 * m as f64).sqrt();
    let expected = expected_sample_gradient(m, theta_star, theta);
    let bias = 1.0 - expected;
    assert!(bias >= 1.0 / 6.0 - 1e-12, "half-point bias {bias} below 1/6 at m={m}");
    BiasRow {
        m,
        theta_star,
        theta,
        true_grad: 1.0,
        expected_sample_grad: expected,
        bias,
    }
}

/// True and expected-sample Wasserstein loss curves over a theta grid.
#[derive(Debug, Clone)]
pub struct LossCurve {
    pub m: usize,
    pub theta_star: f64,
    pub thetas: Vec<f64>,
    /// |theta* - theta| per grid point.
    pub true_loss: Vec<f64>,
    /// E|theta_hat - theta| per grid point (exact binomial expectation).
    pub expected_sample_loss: Vec<f64>,
    pub true_argmin: f64,
    pub sample_argmin: f64,
    /// The binomial median interval of theta_hat, in theta units. The
    /// expected sample loss is minimized exactly on this interval.
    pub median_interval: (f64, f64),
}

impl LossCurve {
    pub const CSV_HEADER: &'static str = "theta,true_loss,expected_sample_loss";

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for i in 0..self.thetas.len() {
            writeln!(
                out,
                "{},{},{}",
                self.thetas[i], self.true_loss[i], self.expected_sample_loss[i]
            )?;
        }
        Ok(())
    }
}

/// Exact expected sample loss E|theta_hat - theta|.
pub fn expected_sample_loss(m: usize, theta_star: f64, theta: f64) -> f64 {
    (0..=m)
        .map(|k| binomial_pmf(m, k, theta_star) * (k as f64 / m as f64 - theta).abs())
        .sum()
}

/// Sweep the true loss |theta* - theta| and the exact expected sample loss
/// over a [0, 1] grid with the kink points {k/m} injected exactly.
pub fn loss_curve(m: usize, theta_star: f64, grid_step: f64) -> Result<LossCurve> {
    if grid_step.is_nan() || grid_step <= 0.0 || grid_step > 1e-3 {
        return Err(Error::Domain(format!(
            "grid step {grid_step} must be in (0, 1e-3]"
        )));
    }
    let n = (1.0 / grid_step).round() as usize;
    let mut thetas: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    thetas.extend((0..=m).map(|k| k as f64 / m as f64));
    thetas.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    thetas.dedup();

    let true_loss: Vec<f64> = thetas.iter().map(|t| (theta_star - t).abs()).collect();
    let sample_loss: Vec<f64> = thetas
        .iter()
        .map(|&t| expected_sample_loss(m, theta_star, t))
        .collect();

    let argmin = |vals: &[f64]| -> f64 {
        let mut best = 0;
        for i in 1..vals.len() {
            if vals[i] < vals[best] {
                best = i;
            }
        }
        thetas[best]
    };
    let (med_lo, med_hi) = binomial_median_interval(m, theta_star);
    Ok(LossCurve {
        m,
        theta_star,
        true_argmin: argmin(&true_loss),
        sample_argmin: argmin(&sample_loss),
        median_interval: (med_lo as f64 / m as f64, med_hi as f64 / m as f64),
        thetas,
        true_loss,
        expected_sample_loss: sample_loss,
    })
}

/// Report of the deterministic-solution regime check at a given m, theta*.
#[derive(Debug, Clone)]
pub struct RegimeReport {
    pub m: usize,
    pub theta_star: f64,
    /// The entropy threshold (1/2)^{1/m}.
    pub threshold: f64,
    /// Expected sample gradient at each probed theta in (theta*, 1).
    pub rows: Vec<(f64, f64)>,
    /// True iff the expected sample gradient was negative at every probe,
    /// so gradient descent drifts to the zero-entropy solution theta = 1.
    pub all_negative: bool,
}

/// The theta* threshold (1/2)^{1/m} above which the expected sample
/// Wasserstein loss is minimized by a deterministic distribution.
pub fn deterministic_threshold(m: usize) -> f64 {
    assert!(m >= 1);
    0.5f64.powf(1.0 / m as f64)
}

/// For theta* above the threshold, verify E g_hat(theta) < 0 across a grid
/// of (theta*, 1): every gradient step pushes theta toward 1.
pub fn deterministic_regime(m: usize, theta_star: f64, grid_points: usize) -> Result<RegimeReport> {
    let threshold = deterministic_threshold(m);
    if theta_star.is_nan() || theta_star <= threshold || theta_star >= 1.0 {
        return Err(Error::Domain(format!(
            "theta*={theta_star} is not above the threshold {threshold}"
        )));
    }
    if grid_points == 0 {
        return Err(Error::Domain("grid must be non-empty".into()));
    }
    let mut rows = Vec::with_capacity(grid_points);
    let mut all_negative = true;
    for i in 1..=grid_points {
        let theta = theta_star + (1.0 - theta_star) * i as f64 / (grid_points as f64 + 1.0);
        let g = expected_sample_gradient(m, theta_star, theta);
        all_negative &= g < 0.0;
        rows.push((theta, g));
    }
    Ok(RegimeReport {
        m,
        theta_star,
        threshold,
        rows,
        all_negative,
    })
}

/// |bias| per sample size for a fixed (theta*, theta) pair, via the
/// binomial closed form. A theta that ties a grid point k/m is perturbed
/// by 1e-9 before evaluation.
pub fn consistency_sweep(theta_star: f64, theta: f64, m_list: &[usize]) -> Result<BiasCurve> {
    if theta == theta_star {
        return Err(Error::Domain("theta must differ from theta*".into()));
    }
    let inside_unit = |v: f64| !v.is_nan() && v > 0.0 && v < 1.0;
    if !inside_unit(theta) || !inside_unit(theta_star) {
        return Err(Error::Domain("theta and theta* must lie in (0,1)".into()));
    }
    let mut rows = Vec::with_capacity(m_list.len());
    for &m in m_list {
        if m == 0 {
            return Err(Error::Domain("sample sizes must be >= 1".into()));
        }
        let mut t = theta;
        if (t * m as f64).fract() == 0.0 {
            t += 1e-9;
        }
        let expected = expected_sample_gradient(m, theta_star, t);
        let true_grad = sign(t - theta_star);
        rows.push(BiasRow {
            m,
            theta_star,
            theta: t,
            true_grad,
            expected_sample_grad: expected,
            bias: true_grad - expected,
        });
    }
    Ok(BiasCurve { rows })
}
