//! Command-line runner: every experiment as a reproducible, config-driven
//! run emitting CSV/JSON.
//!
//! Exit codes: 0 success, 1 embedded assertion failure, 2 usage or config
//! error. The env var CRAMER_METRICS_THREADS caps worker parallelism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cramer_metrics::bias_lab::{self, BiasCurve};
use cramer_metrics::distributions::{DiscreteDist, PointCloud};
use cramer_metrics::divergences;
use cramer_metrics::gan_losses::{self, GanBatch};
use cramer_metrics::gradients::Divergence;
use cramer_metrics::ordinal::{self, TrainConfig};
use cramer_metrics::sgd_lab::{self, ThetaInit};

mod config;
use config::{read_json_config, GanBatchFile, OrdinalConfig, ToyConfig};

#[derive(Parser)]
#[command(
    name = "cramer-metrics",
    version,
    about = "Exact divergences on finite distributions and sample-gradient bias experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a divergence between two distributions stored as JSON files.
    Divergence(DivergenceArgs),
    /// Exact binomial bias experiments; writes CSV and checks the
    /// embedded bounds.
    Bias(BiasArgs),
    /// Three-point toy experiment: learning curves and minimizer table.
    Toy(ToyArgs),
    /// Ordinal regression sweep on synthetic or CSV data.
    Ordinal(OrdinalArgs),
    /// Evaluate the GAN losses on a JSON-supplied batch.
    GanLosses(GanLossesArgs),
}

#[derive(Args)]
struct DivergenceArgs {
    /// Which divergence to compute.
    #[arg(long, value_enum)]
    kind: DivergenceKind,
    /// JSON file {"support": [...], "probs": [...]}.
    #[arg(long)]
    dist_a: PathBuf,
    /// JSON file {"support": [...], "probs": [...]}.
    #[arg(long)]
    dist_b: PathBuf,
    /// Order for the wp / lp families.
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DivergenceKind {
    Kl,
    W1,
    W2,
    Wp,
    L1,
    L2,
    Lp,
    Cramer,
    Energy,
}

#[derive(Args)]
struct BiasArgs {
    #[arg(long, value_enum)]
    experiment: BiasExperiment,
    /// Largest sample size (minimax, halfpoint, consistency) or the exact
    /// sample size (curve, deterministic).
    #[arg(long, default_value_t = 32)]
    m: usize,
    #[arg(long)]
    theta_star: Option<f64>,
    /// Model parameter for the consistency sweep.
    #[arg(long)]
    theta: Option<f64>,
    /// Grid step for the loss curve.
    #[arg(long, default_value_t = 1e-4)]
    grid_step: f64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum BiasExperiment {
    Minimax,
    Halfpoint,
    Curve,
    Deterministic,
    Consistency,
}

#[derive(Args)]
struct ToyArgs {
    /// JSON config file (see README for the schema).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Learning-curve CSV output.
    #[arg(long)]
    out_curves: PathBuf,
    /// Minimizer-table CSV output.
    #[arg(long)]
    out_minimizers: PathBuf,
}

#[derive(Args)]
struct OrdinalArgs {
    /// JSON config file (see README for the schema).
    #[arg(long)]
    config: PathBuf,
    /// Data source: "synth" or "csv:PATH".
    #[arg(long)]
    data: String,
    /// Override the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Learning-curve CSV output.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GanLossesArgs {
    /// JSON batch file (see README for the schema).
    #[arg(long)]
    batch: PathBuf,
}

enum RunError {
    /// Usage/config problems: exit 2.
    Config(String),
    /// Embedded assertion failures: exit 1.
    Assertion(String),
}

impl From<cramer_metrics::Error> for RunError {
    fn from(e: cramer_metrics::Error) -> Self {
        RunError::Config(e.to_string())
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Config(e.to_string())
    }
}

fn main() -> ExitCode {
    configure_thread_pool();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Divergence(args) => run_divergence(args),
        Command::Bias(args) => run_bias(args),
        Command::Toy(args) => run_toy(args),
        Command::Ordinal(args) => run_ordinal(args),
        Command::GanLosses(args) => run_gan_losses(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Assertion(msg)) => {
            eprintln!("assertion failed: {msg}");
            ExitCode::from(1)
        }
        Err(RunError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn configure_thread_pool() {
    if let Ok(value) = std::env::var("CRAMER_METRICS_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                // Ignore failure: the global pool may already exist.
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn load_dist(path: &Path) -> Result<DiscreteDist, RunError> {
    let text = fs::read_to_string(path)
        .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
    read_json_config::<DiscreteDist>(&text)
        .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))
}

fn run_divergence(args: DivergenceArgs) -> Result<(), RunError> {
    let a = load_dist(&args.dist_a)?;
    let b = load_dist(&args.dist_b)?;
    let need_p = |p: Option<f64>| {
        p.ok_or_else(|| RunError::Config("--p is required for this kind".into()))
    };
    let (label, value) = match args.kind {
        DivergenceKind::Kl => ("kl".into(), divergences::kl(&a, &b)),
        DivergenceKind::W1 => ("w1".into(), divergences::wasserstein_pp(&a, &b, 1.0)?),
        DivergenceKind::W2 => ("w2".into(), divergences::wasserstein_pp(&a, &b, 2.0)?),
        DivergenceKind::Wp => {
            let p = need_p(args.p)?;
            (format!("w{p}"), divergences::wasserstein_pp(&a, &b, p)?)
        }
        DivergenceKind::L1 => ("l1".into(), divergences::lp_pp(&a, &b, 1.0)?),
        DivergenceKind::L2 => ("l2".into(), divergences::lp_pp(&a, &b, 2.0)?),
        DivergenceKind::Lp => {
            let p = need_p(args.p)?;
            (format!("l{p}"), divergences::lp_pp(&a, &b, p)?)
        }
        DivergenceKind::Cramer => ("cramer".into(), divergences::cramer(&a, &b)),
        DivergenceKind::Energy => (
            "energy".into(),
            divergences::energy(&PointCloud::from_discrete(&a), &PointCloud::from_discrete(&b))?,
        ),
    };
    // JSON has no infinity literal; serialize it as the string "inf".
    let value_json = if value.is_finite() {
        serde_json::json!(value)
    } else {
        serde_json::json!("inf")
    };
    println!("{}", serde_json::json!({ "kind": label, "value": value_json }));
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    fs::write(path, bytes).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))
}

fn run_bias(args: BiasArgs) -> Result<(), RunError> {
    if args.m == 0 {
        return Err(RunError::Config("--m must be >= 1".into()));
    }
    let mut failures = Vec::new();
    let csv = match args.experiment {
        BiasExperiment::Minimax => {
            let rows: Vec<_> = (1..=args.m).map(bias_lab::minimax_bias).collect();
            let bound = 2.0 * (-2.0f64).exp();
            for r in &rows {
                if r.bias < bound {
                    failures.push(format!("minimax bias {} < 2e^-2 at m={}", r.bias, r.m));
                }
            }
            let curve = BiasCurve { rows };
            let mut buf = Vec::new();
            curve.write_csv(&mut buf)?;
            buf
        }
        BiasExperiment::Halfpoint => {
            let rows: Vec<_> = (1..=args.m).map(bias_lab::half_point_bias).collect();
            for r in &rows {
                if r.bias < 1.0 / 6.0 {
                    failures.push(format!("half-point bias {} < 1/6 at m={}", r.bias, r.m));
                }
            }
            let curve = BiasCurve { rows };
            let mut buf = Vec::new();
            curve.write_csv(&mut buf)?;
            buf
        }
        BiasExperiment::Curve => {
            let theta_star = args
                .theta_star
                .ok_or_else(|| RunError::Config("--theta-star is required for curve".into()))?;
            let curve = bias_lab::loss_curve(args.m, theta_star, args.grid_step)?;
            if (curve.true_argmin - theta_star).abs() > args.grid_step {
                failures.push(format!(
                    "true-loss argmin {} differs from theta*={theta_star}",
                    curve.true_argmin
                ));
            }
            let (lo, hi) = curve.median_interval;
            if curve.sample_argmin < lo - args.grid_step || curve.sample_argmin > hi + args.grid_step
            {
                failures.push(format!(
                    "sample-loss argmin {} outside the median interval [{lo}, {hi}]",
                    curve.sample_argmin
                ));
            }
            let mut buf = Vec::new();
            curve.write_csv(&mut buf)?;
            buf
        }
        BiasExperiment::Deterministic => {
            let threshold = bias_lab::deterministic_threshold(args.m);
            let theta_star = args.theta_star.unwrap_or(0.5 * (threshold + 1.0));
            let report = bias_lab::deterministic_regime(args.m, theta_star, 1000)?;
            if !report.all_negative {
                failures.push(format!(
                    "expected sample gradient not negative everywhere above threshold {threshold}"
                ));
            }
            let rows: Vec<_> = report
                .rows
                .iter()
                .map(|&(theta, grad)| bias_lab::BiasRow {
                    m: args.m,
                    theta_star,
                    theta,
                    true_grad: 1.0,
                    expected_sample_grad: grad,
                    bias: 1.0 - grad,
                })
                .collect();
            let curve = BiasCurve { rows };
            let mut buf = Vec::new();
            curve.write_csv(&mut buf)?;
            buf
        }
        BiasExperiment::Consistency => {
            let theta_star = args.theta_star.unwrap_or(0.3);
            let theta = args.theta.unwrap_or(0.6);
            let mut m_list: Vec<usize> = Vec::new();
            let mut m = 1;
            while m <= args.m {
                m_list.push(m);
                m *= 2;
            }
            if *m_list.last().unwrap_or(&0) != args.m {
                m_list.push(args.m);
            }
            let curve = bias_lab::consistency_sweep(theta_star, theta, &m_list)?;
            for w in curve.rows.windows(2) {
                if w[1].bias.abs() > w[0].bias.abs() + 1e-12 {
                    failures.push(format!(
                        "|bias| not nonincreasing: m={} -> m={}",
                        w[0].m, w[1].m
                    ));
                }
            }
            if args.m >= 1000 && (theta - theta_star).abs() >= 0.1 {
                let last = curve.rows.last().expect("non-empty m list");
                if last.bias.abs() >= 0.01 {
                    failures.push(format!(
                        "|bias| = {} at m={} should be below 0.01",
                        last.bias.abs(),
                        last.m
                    ));
                }
            }
            let mut buf = Vec::new();
            curve.write_csv(&mut buf)?;
            buf
        }
    };
    write_file(&args.out, &csv)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(RunError::Assertion(failures.join("; ")))
    }
}

fn run_toy(args: ToyArgs) -> Result<(), RunError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| RunError::Config(format!("{}: {e}", args.config.display())))?;
    let cfg: ToyConfig = read_json_config(&text).map_err(RunError::Config)?;
    cfg.check_version().map_err(RunError::Config)?;
    let target = cfg.target()?;
    let seeds = cfg.seeds(args.seed);
    let init = cfg.theta_init();

    let curves = toy_curves_with_init(&cfg, &target, &seeds, init)?;
    let mut buf = Vec::new();
    sgd_lab::write_curves_csv(&curves, &mut buf)?;
    write_file(&args.out_curves, &buf)?;

    let table = sgd_lab::toy_minimizer_table(&target)?;
    let mut buf = String::from("divergence,theta,loss,q0,q1,q10\n");
    for (name, m) in [
        ("kl", &table.kl),
        ("w1", &table.wasserstein),
        ("cramer", &table.cramer),
        ("sample_w1_m1", &table.sample_wasserstein_m1),
    ] {
        buf.push_str(&format!(
            "{},{},{},{},{},{}\n",
            name,
            m.theta,
            m.loss,
            m.dist.probs()[0],
            m.dist.probs()[1],
            m.dist.probs()[2]
        ));
    }
    write_file(&args.out_minimizers, buf.as_bytes())?;
    Ok(())
}

fn toy_curves_with_init(
    cfg: &ToyConfig,
    target: &DiscreteDist,
    seeds: &[u64],
    init: ThetaInit,
) -> Result<Vec<sgd_lab::LabeledTrajectory>, RunError> {
    use cramer_metrics::gradients::LossSpec;
    use cramer_metrics::ParametricFamily;
    use sgd_lab::{GradMode, SgdConfig};

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
    for &m in &cfg.m_list {
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
            let sgd = SgdConfig {
                loss: LossSpec::new(divergence, family.clone(), target.clone())?,
                mode,
                step_size: cfg.step_size,
                steps: cfg.steps,
                init: init.clone(),
                seeds: seeds.to_vec(),
                eval_metric: Divergence::WassersteinPP { p: 1.0 },
                eval_every: cfg.eval_every,
            };
            Ok(sgd_lab::LabeledTrajectory {
                loss_label: loss_label.to_string(),
                mode_label: mode_label.to_string(),
                m,
                trajectory: sgd_lab::run_sgd(&sgd)?,
            })
        })
        .collect()
}

fn run_ordinal(args: OrdinalArgs) -> Result<(), RunError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| RunError::Config(format!("{}: {e}", args.config.display())))?;
    let cfg: OrdinalConfig = read_json_config(&text).map_err(RunError::Config)?;
    cfg.check_version().map_err(RunError::Config)?;
    let seeds = cfg.seeds(args.seed);

    let data = if args.data == "synth" {
        let synth = &cfg.synth;
        ordinal::synth_data_with_noise(
            cfg.base_seed(args.seed),
            synth.n,
            synth.d,
            synth.k,
            synth.noise,
        )
    } else if let Some(path) = args.data.strip_prefix("csv:") {
        let bins = cfg.bin_values.clone().ok_or_else(|| {
            RunError::Config("config must provide bin_values for csv data".into())
        })?;
        ordinal::load_csv(path, bins)?
    } else {
        return Err(RunError::Config(format!(
            "--data must be 'synth' or 'csv:PATH', got '{}'",
            args.data
        )));
    };
    let n_train = ((data.len() as f64) * cfg.train_frac).round() as usize;
    let (train_set, test_set) = data.split_at(n_train.clamp(1, data.len() - 1))?;

    let mut rows = Vec::new();
    for &loss in &cfg.losses().map_err(RunError::Config)? {
        for &batch_size in &cfg.batch_sizes {
            // Average the per-epoch test metrics across seeds.
            let mut averaged: Vec<ordinal::EpochMetrics> = Vec::new();
            for &seed in &seeds {
                let train_cfg = TrainConfig {
                    loss,
                    batch_size,
                    learning_rate: cfg.learning_rate_for(batch_size),
                    epochs: cfg.epochs,
                    seed,
                };
                let (_, curve) = ordinal::train(&train_set, &test_set, &train_cfg)?;
                if averaged.is_empty() {
                    averaged = curve;
                } else {
                    for (acc, m) in averaged.iter_mut().zip(curve) {
                        acc.rmse += m.rmse;
                        acc.w1 += m.w1;
                        acc.nll += m.nll;
                    }
                }
            }
            let k = seeds.len() as f64;
            for m in &mut averaged {
                m.rmse /= k;
                m.w1 /= k;
                m.nll /= k;
            }
            rows.push((loss, batch_size, averaged));
        }
    }
    let mut buf = Vec::new();
    ordinal::write_curves_csv(&rows, &mut buf)?;
    write_file(&args.out, &buf)?;
    Ok(())
}

fn run_gan_losses(args: GanLossesArgs) -> Result<(), RunError> {
    let text = fs::read_to_string(&args.batch)
        .map_err(|e| RunError::Config(format!("{}: {e}", args.batch.display())))?;
    let file: GanBatchFile = read_json_config(&text).map_err(RunError::Config)?;
    file.check_version().map_err(RunError::Config)?;
    let transform = file.transform.build()?;
    let batch = GanBatch {
        x_real: file.x_real,
        x_gen: file.x_gen,
        x_gen_prime: file.x_gen_prime,
        epsilon: file.epsilon,
        lambda: file.lambda,
    };
    let generator = gan_losses::generator_loss(&batch, transform.as_ref())?;
    let surrogate = gan_losses::surrogate_loss(&batch, transform.as_ref())?;
    let penalty = gan_losses::gradient_penalty(&batch, transform.as_ref())?;
    let critic = gan_losses::critic_loss(&batch, transform.as_ref())?;
    println!(
        "{}",
        serde_json::json!({
            "generator_loss": generator,
            "surrogate_loss": surrogate,
            "gradient_penalty": penalty,
            "critic_loss": critic,
        })
    );
    Ok(())
}
