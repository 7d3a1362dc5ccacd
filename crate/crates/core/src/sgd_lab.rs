//! Fixed-step (stochastic) gradient descent harness and the three-point
//! toy experiment: minimize KL, Cramér, or Wasserstein losses over the
//! underparametrized three-point family, with either true gradients or
//! sample gradients from fresh m-sample draws at every step, and track the
//! true 1-Wasserstein distance to the target along the way.
//!
//! Runs are deterministic given their seeds; seeds run in parallel, each
//! owning its generator, and results are aggregated in seed order.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{DiscreteDist, ParametricFamily, Rng};
use crate::error::{Error, Result};
use crate::gradients::{Divergence, LossSpec};

/// Gradient source for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GradMode {
    /// Exact analytic gradient of the true loss.
    TrueGrad,
    /// Gradient of the loss against a fresh m-sample empirical distribution
    /// drawn at every step.
    SampleGrad { m: usize },
}

/// Initial parameter choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaInit {
    Fixed(Vec<f64>),
    /// Each component drawn uniformly from [lo, hi), per seed.
    Uniform { lo: f64, hi: f64 },
}

#[derive(Debug, Clone)]
pub struct SgdConfig {
    pub loss: LossSpec,
    pub mode: GradMode,
    pub step_size: f64,
    pub steps: usize,
    pub init: ThetaInit,
    pub seeds: Vec<u64>,
    /// Divergence evaluated against the true target at recorded steps.
    pub eval_metric: Divergence,
    /// Record every this-many steps (step 0 and the final step always
    /// included). 1 records everything.
    pub eval_every: usize,
}

impl SgdConfig {
    fn validate(&self) -> Result<()> {
        if self.step_size.is_nan() || self.step_size < 0.0 {
            return Err(Error::Domain("step size must be nonnegative".into()));
        }
        if self.steps == 0 {
            return Err(Error::Domain("steps must be >= 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Domain("at least one seed is required".into()));
        }
        if self.eval_every == 0 {
            return Err(Error::Domain("eval_every must be >= 1".into()));
        }
        if let GradMode::SampleGrad { m: 0 } = self.mode {
            return Err(Error::Domain("sample size m must be >= 1".into()));
        }
        Ok(())
    }
}

/// One recorded point of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajPoint {
    pub step: usize,
    pub theta: Vec<f64>,
    pub eval: f64,
}

/// A full per-seed run.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedRun {
    pub seed: u64,
    pub points: Vec<TrajPoint>,
}

impl SeedRun {
    pub fn final_point(&self) -> &TrajPoint {
        self.points.last().expect("runs record at least step 0")
    }
}

/// All seeds of one configuration plus the cross-seed mean and standard
/// deviation of the evaluation metric at each recorded step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub runs: Vec<SeedRun>,
    pub recorded_steps: Vec<usize>,
    pub mean_eval: Vec<f64>,
    pub std_eval: Vec<f64>,
}

impl Trajectory {
    pub fn final_mean_eval(&self) -> f64 {
        *self.mean_eval.last().expect("non-empty trajectory")
    }

    pub fn final_std_eval(&self) -> f64 {
        *self.std_eval.last().expect("non-empty trajectory")
    }
}

fn eval_divergence(metric: Divergence, target: &DiscreteDist, model: &DiscreteDist) -> Result<f64> {
    use crate::divergences;
    Ok(match metric {
        Divergence::Kl => divergences::kl(target, model),
        Divergence::WassersteinPP { p } => divergences::wasserstein_pp(target, model, p)?,
        Divergence::LpPP { p } => divergences::lp_pp(target, model, p)?,
        Divergence::Cramer => divergences::cramer(target, model),
        Divergence::Energy => 2.0 * divergences::cramer(target, model),
    })
}

fn run_single_seed(cfg: &SgdConfig, seed: u64) -> Result<SeedRun> {
    let mut rng = Rng::seeded(seed);
    let family = &cfg.loss.family;
    let mut theta = match &cfg.init {
        ThetaInit::Fixed(t) => {
            if t.len() != family.param_dim() {
                return Err(Error::LengthMismatch(t.len(), family.param_dim()));
            }
            t.clone()
        }
        ThetaInit::Uniform { lo, hi } => (0..family.param_dim())
            .map(|_| rng.uniform_in(*lo, *hi))
            .collect(),
    };
    family.project(&mut theta);

    let mut points = Vec::with_capacity(cfg.steps / cfg.eval_every + 2);
    let record = |step: usize, theta: &[f64], points: &mut Vec<TrajPoint>| -> Result<()> {
        let model = family.dist(theta)?;
        let eval = eval_divergence(cfg.eval_metric, &cfg.loss.target, &model)?;
        points.push(TrajPoint {
            step,
            theta: theta.to_vec(),
            eval,
        });
        Ok(())
    };

    for step in 0..cfg.steps {
        if step % cfg.eval_every == 0 {
            record(step, &theta, &mut points)?;
        }
        let grad = match cfg.mode {
            GradMode::TrueGrad => cfg.loss.grad_true(&theta),
            GradMode::SampleGrad { m } => {
                let samples = cfg.loss.target.sample(&mut rng, m);
                cfg.loss.grad_sample(&theta, &samples)
            }
        }
        .map_err(|e| Error::Aborted {
            step,
            reason: e.to_string(),
        })?;
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Aborted {
                step,
                reason: "non-finite gradient".into(),
            });
        }
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t -= cfg.step_size * g;
        }
        family.project(&mut theta);
    }
    record(cfg.steps, &theta, &mut points)?;
    Ok(SeedRun { seed, points })
}

/// Run the configured descent for every seed. Deterministic: identical
/// configurations produce bit-identical trajectories.
pub fn run_sgd(cfg: &SgdConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let runs: Result<Vec<SeedRun>> = cfg
        .seeds
        .par_iter()
        .map(|&seed| run_single_seed(cfg, seed))
        .collect();
    let runs = runs?;

    let recorded_steps: Vec<usize> = runs[0].points.iter().map(|p| p.step).collect();
    let n = cfg.seeds.len() as f64;
    let mut mean_eval = Vec::with_capacity(recorded_steps.len());
    let mut std_eval = Vec::with_capacity(recorded_steps.len());
    for i in 0..recorded_steps.len() {
        let mean = runs.iter().map(|r| r.points[i].eval).sum::<f64>() / n;
        let var = runs
            .iter()
            .map(|r| (r.points[i].eval - mean).powi(2))
            .sum::<f64>()
            / n;
        mean_eval.push(mean);
        std_eval.push(var.sqrt());
    }
    Ok(Trajectory {
        runs,
        recorded_steps,
        mean_eval,
        std_eval,
    })
}

/// Default target weights on {0, 1, 10} for the toy experiment.
pub const DEFAULT_TOY_TARGET: [f64; 3] = [0.5, 0.25, 0.25];

/// The default toy target distribution.
pub fn default_toy_target() -> DiscreteDist {
    DiscreteDist::new(vec![0.0, 1.0, 10.0], DEFAULT_TOY_TARGET.to_vec())
        .expect("default target is valid")
}

/// True-loss minimizers over the toy family for KL, 1-Wasserstein, and
/// Cramér, plus the minimizer of the m = 1 expected sample Wasserstein
/// loss (computed exactly by enumerating the target's outcomes).
#[derive(Debug, Clone)]
pub struct MinimizerTable {
    pub kl: Minimizer,
    pub wasserstein: Minimizer,
    pub cramer: Minimizer,
    pub sample_wasserstein_m1: Minimizer,
}

#[derive(Debug, Clone)]
pub struct Minimizer {
    pub theta: f64,
    pub loss: f64,
    pub dist: DiscreteDist,
}

fn grid_minimize(lo: f64, hi: f64, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    // Coarse pass, then refinements around the best cell.
    let mut lo = lo;
    let mut hi = hi;
    let mut best = (lo, f(lo));
    for _ in 0..3 {
        let n = 2000;
        for i in 0..=n {
            let t = lo + (hi - lo) * i as f64 / n as f64;
            let v = f(t);
            if v < best.1 {
                best = (t, v);
            }
        }
        let width = (hi - lo) / n as f64;
        lo = best.0 - 2.0 * width;
        hi = best.0 + 2.0 * width;
    }
    best
}

/// Minimize each divergence over the toy parameter by grid search.
///
/// Values of theta beyond +-20 saturate the family weights to machine
/// precision, so the search interval [-20, 20] is effectively unbounded;
/// losses minimized in a weight-saturation limit (the m = 1 sample
/// Wasserstein loss drifts to all mass on zero) report the boundary point.
pub fn toy_minimizer_table(target: &DiscreteDist) -> Result<MinimizerTable> {
    let family = ParametricFamily::ThreePointToy;
    let toy_support = family.support();
    if !target.support().iter().all(|x| toy_support.contains(x)) {
        return Err(Error::Domain(
            "toy target must be supported on {0, 1, 10}".into(),
        ));
    }
    let spec = |d: Divergence| LossSpec::new(d, family.clone(), target.clone()).expect("valid");
    let kl_spec = spec(Divergence::Kl);
    let w_spec = spec(Divergence::WassersteinPP { p: 1.0 });
    let c_spec = spec(Divergence::Cramer);

    let make = |theta: f64, loss: f64| -> Result<Minimizer> {
        Ok(Minimizer {
            theta,
            loss,
            dist: family.dist(&[theta])?,
        })
    };

    let (kl_t, kl_v) = grid_minimize(-20.0, 20.0, |t| {
        kl_spec.true_loss(&[t]).unwrap_or(f64::INFINITY)
    });
    let (w_t, w_v) = grid_minimize(-20.0, 20.0, |t| {
        w_spec.true_loss(&[t]).unwrap_or(f64::INFINITY)
    });
    let (c_t, c_v) = grid_minimize(-20.0, 20.0, |t| {
        c_spec.true_loss(&[t]).unwrap_or(f64::INFINITY)
    });
    // m = 1 expected sample Wasserstein loss: sum_x P(x) w1(dirac_x, Q_t).
    let (s_t, s_v) = grid_minimize(-20.0, 20.0, |t| {
        let model = family.dist(&[t]).expect("valid theta");
        target
            .support()
            .iter()
            .zip(target.probs())
            .map(|(&x, &px)| {
                px * crate::divergences::wasserstein_pp(&DiscreteDist::dirac(x), &model, 1.0)
                    .expect("p=1 valid")
            })
            .sum()
    });

    Ok(MinimizerTable {
        kl: make(kl_t, kl_v)?,
        wasserstein: make(w_t, w_v)?,
        cramer: make(c_t, c_v)?,
        sample_wasserstein_m1: make(s_t, s_v)?,
    })
}

/// A labeled trajectory from the toy learning-curve sweep.
#[derive(Debug, Clone)]
pub struct LabeledTrajectory {
    /// "kl", "w1", or "cramer".
    pub loss_label: String,
    /// "true" or "sample".
    pub mode_label: String,
    /// Sample size for sample-gradient runs, 0 for true-gradient runs.
    pub m: usize,
    pub trajectory: Trajectory,
}

/// The learning-curve suite: Cramér (true and sample), 1-Wasserstein (true
/// and sample), and KL (true), each evaluated in true 1-Wasserstein
/// distance against the target.
pub fn toy_learning_curves(
    target: &DiscreteDist,
    m_list: &[usize],
    step_size: f64,
    steps: usize,
    seeds: &[u64],
    eval_every: usize,
) -> Result<Vec<LabeledTrajectory>> {
    let family = ParametricFamily::ThreePointToy;
    let mut jobs: Vec<(&str, &str, usize, Divergence, GradMode)> = vec![
        ("cramer", "true", 0, Divergence::Cramer, GradMode::TrueGrad),
        (
            "w1",
            "true",
            0,
            Divergence::WassersteinPP { p: 1.0 },
            GradMode::TrueGrad,
        ),
        ("kl", "true", 0, Divergence::Kl, GradMode::TrueGrad),
    ];
    for &m in m_list {
        jobs.push((
            "cramer",
            "sample",
            m,
            Divergence::Cramer,
            GradMode::SampleGrad { m },
        ));
        jobs.push((
            "w1",
            "sample",
            m,
            Divergence::WassersteinPP { p: 1.0 },
            GradMode::SampleGrad { m },
        ));
    }

    jobs.into_iter()
        .map(|(loss_label, mode_label, m, divergence, mode)| {
            let cfg = SgdConfig {
                loss: LossSpec::new(divergence, family.clone(), target.clone())?,
                mode,
                step_size,
                steps,
                init: ThetaInit::Uniform { lo: -1.0, hi: 1.0 },
                seeds: seeds.to_vec(),
                eval_metric: Divergence::WassersteinPP { p: 1.0 },
                eval_every,
            };
            Ok(LabeledTrajectory {
                loss_label: loss_label.to_string(),
                mode_label: mode_label.to_string(),
                m,
                trajectory: run_sgd(&cfg)?,
            })
        })
        .collect()
}

pub const CURVES_CSV_HEADER: &str = "loss,mode,m,seed,step,theta,eval_w1";

/// Emit the toy learning curves as CSV (`theta` is the scalar toy
/// parameter).
pub fn write_curves_csv<W: Write>(curves: &[LabeledTrajectory], mut out: W) -> Result<()> {
    writeln!(out, "{CURVES_CSV_HEADER}")?;
    for c in curves {
        for run in &c.trajectory.runs {
            for p in &run.points {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    c.loss_label, c.mode_label, c.m, run.seed, p.step, p.theta[0], p.eval
                )?;
            }
        }
    }
    Ok(())
}
