//! JSON config schemas for the experiment subcommands. Every file carries
//! a top-level `"version": 1`; unknown fields are rejected; schema
//! violations are reported with JSON-pointer paths.

use cramer_metrics::distributions::DiscreteDist;
use cramer_metrics::gan_losses::{Affine, Identity, TanhMlp, Transform};
use cramer_metrics::ordinal::OrdinalLoss;
use cramer_metrics::sgd_lab::ThetaInit;
use serde::de::DeserializeOwned;
use serde::Deserialize;

pub const SCHEMA_VERSION: u32 = 1;

/// Deserialize JSON, turning errors into messages with a JSON-pointer
/// location ("/synth/n: invalid type ...").
pub fn read_json_config<T: DeserializeOwned>(text: &str) -> Result<T, String> {
    let mut deserializer = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut deserializer).map_err(|e| {
        let pointer = path_to_json_pointer(e.path());
        format!("{pointer}: {}", e.inner())
    })
}

fn path_to_json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for segment in path.iter() {
        match segment {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{key}")),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => out.push_str("/?"),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

fn check_version(version: u32) -> Result<(), String> {
    if version != SCHEMA_VERSION {
        return Err(format!(
            "/version: unsupported config version {version}, expected {SCHEMA_VERSION}"
        ));
    }
    Ok(())
}

/// Config for the `toy` subcommand.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyConfig {
    pub version: u32,
    /// Target distribution on {0, 1, 10}.
    pub target: TargetSpec,
    /// Sample sizes for the sample-gradient runs.
    #[serde(default = "default_m_list")]
    pub m_list: Vec<usize>,
    #[serde(default = "default_step_size")]
    pub step_size: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_base_seed")]
    pub base_seed: u64,
    #[serde(default = "default_n_seeds")]
    pub n_seeds: usize,
    #[serde(default = "default_eval_every")]
    pub eval_every: usize,
    /// Uniform initialization range [lo, hi) for the scalar parameter.
    #[serde(default = "default_init_range")]
    pub theta_init_range: (f64, f64),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub support: Vec<f64>,
    pub probs: Vec<f64>,
}

fn default_m_list() -> Vec<usize> {
    vec![1, 10]
}
fn default_step_size() -> f64 {
    0.001
}
fn default_steps() -> usize {
    100_000
}
fn default_base_seed() -> u64 {
    1
}
fn default_n_seeds() -> usize {
    10
}
fn default_eval_every() -> usize {
    100
}
fn default_init_range() -> (f64, f64) {
    (-1.0, 1.0)
}

impl ToyConfig {
    pub fn check_version(&self) -> Result<(), String> {
        check_version(self.version)
    }

    pub fn target(&self) -> Result<DiscreteDist, cramer_metrics::Error> {
        DiscreteDist::new(self.target.support.clone(), self.target.probs.clone())
    }

    pub fn seeds(&self, override_base: Option<u64>) -> Vec<u64> {
        let base = override_base.unwrap_or(self.base_seed);
        (0..self.n_seeds as u64).map(|i| base + i).collect()
    }

    pub fn theta_init(&self) -> ThetaInit {
        ThetaInit::Uniform {
            lo: self.theta_init_range.0,
            hi: self.theta_init_range.1,
        }
    }
}

/// Config for the `ordinal` subcommand.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrdinalConfig {
    pub version: u32,
    /// Loss names: "kl", "cramer", "wasserstein".
    #[serde(default = "default_losses")]
    pub loss_kinds: Vec<String>,
    #[serde(default = "default_batch_sizes")]
    pub batch_sizes: Vec<usize>,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    /// Base learning rate; each run uses base * sqrt(batch_size), keeping
    /// the per-example gradient noise comparable across batch sizes.
    #[serde(default = "default_base_learning_rate")]
    pub base_learning_rate: f64,
    #[serde(default = "default_base_seed")]
    pub base_seed: u64,
    #[serde(default = "default_ordinal_seeds")]
    pub n_seeds: usize,
    /// Fraction of rows used for training; the rest is the test set.
    #[serde(default = "default_train_frac")]
    pub train_frac: f64,
    #[serde(default)]
    pub synth: SynthConfig,
    /// Bin values for CSV ingestion (targets are matched against these).
    #[serde(default)]
    pub bin_values: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n: 6250,
            d: 20,
            k: 30,
            noise: 1.0,
        }
    }
}

fn default_losses() -> Vec<String> {
    vec!["kl".into(), "cramer".into(), "wasserstein".into()]
}
fn default_batch_sizes() -> Vec<usize> {
    vec![1, 16, 128]
}
fn default_epochs() -> usize {
    60
}
fn default_base_learning_rate() -> f64 {
    0.02
}
fn default_ordinal_seeds() -> usize {
    3
}
fn default_train_frac() -> f64 {
    0.8
}

impl OrdinalConfig {
    pub fn check_version(&self) -> Result<(), String> {
        check_version(self.version)
    }

    pub fn base_seed(&self, override_base: Option<u64>) -> u64 {
        override_base.unwrap_or(self.base_seed)
    }

    pub fn seeds(&self, override_base: Option<u64>) -> Vec<u64> {
        let base = self.base_seed(override_base);
        (0..self.n_seeds as u64).map(|i| base + i).collect()
    }

    pub fn losses(&self) -> Result<Vec<OrdinalLoss>, String> {
        self.loss_kinds
            .iter()
            .map(|name| match name.as_str() {
                "kl" => Ok(OrdinalLoss::Kl),
                "cramer" => Ok(OrdinalLoss::Cramer),
                "wasserstein" => Ok(OrdinalLoss::Wasserstein),
                other => Err(format!(
                    "/loss_kinds: unknown loss '{other}' (expected kl, cramer, wasserstein)"
                )),
            })
            .collect()
    }

    pub fn learning_rate_for(&self, batch_size: usize) -> f64 {
        self.base_learning_rate * (batch_size as f64).sqrt()
    }
}

/// Batch file for the `gan-losses` subcommand.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GanBatchFile {
    pub version: u32,
    pub x_real: Vec<f64>,
    pub x_gen: Vec<f64>,
    pub x_gen_prime: Vec<f64>,
    pub epsilon: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    pub transform: TransformSpec,
}

fn default_lambda() -> f64 {
    10.0
}

impl GanBatchFile {
    pub fn check_version(&self) -> Result<(), String> {
        check_version(self.version)
    }
}

/// Transform selection inside a GAN batch file.
#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransformSpec {
    Identity {
        dim: usize,
    },
    Affine {
        matrix: Vec<Vec<f64>>,
        bias: Vec<f64>,
    },
    TanhMlp {
        hidden_weights: Vec<Vec<f64>>,
        hidden_bias: Vec<f64>,
        output_weights: Vec<Vec<f64>>,
        output_bias: Vec<f64>,
    },
}

impl TransformSpec {
    pub fn build(&self) -> Result<Box<dyn Transform>, cramer_metrics::Error> {
        Ok(match self {
            TransformSpec::Identity { dim } => Box::new(Identity { dim: *dim }),
            TransformSpec::Affine { matrix, bias } => Box::new(Affine {
                matrix: matrix.clone(),
                bias: bias.clone(),
            }),
            TransformSpec::TanhMlp {
                hidden_weights,
                hidden_bias,
                output_weights,
                output_bias,
            } => Box::new(TanhMlp {
                hidden_weights: hidden_weights.clone(),
                hidden_bias: hidden_bias.clone(),
                output_weights: output_weights.clone(),
                output_bias: output_bias.clone(),
            }),
        })
    }
}
