use serde::{Deserialize, Serialize};

use super::{Rng, PROB_SUM_TOL};
use crate::error::{Error, Result};

/// A probability distribution with finite support on the real line.
///
/// The support is strictly increasing and the weights sum to one (within
/// [`PROB_SUM_TOL`]). This one type carries every distribution in the
/// crate: targets, models, Diracs (a single support point), and empirical
/// distributions built from samples.
///
/// Serializes to/from JSON as `{"support": [...], "probs": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistJson", into = "DistJson")]
pub struct DiscreteDist {
    support: Vec<f64>,
    probs: Vec<f64>,
    /// Cumulative probabilities; `cum[i] = sum(probs[..=i])`.
    cum: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DistJson {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl TryFrom<DistJson> for DiscreteDist {
    type Error = Error;
    fn try_from(raw: DistJson) -> Result<Self> {
        DiscreteDist::new(raw.support, raw.probs)
    }
}

impl From<DiscreteDist> for DistJson {
    fn from(d: DiscreteDist) -> Self {
        DistJson {
            support: d.support,
            probs: d.probs,
        }
    }
}

impl DiscreteDist {
    /// Build a distribution, validating all structural invariants.
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if support.len() != probs.len() {
            return Err(Error::LengthMismatch(support.len(), probs.len()));
        }
        for w in support.windows(2) {
            if w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less) {
                return Err(Error::InvalidDistribution(format!(
                    "support not strictly increasing at {} >= {}",
                    w[0], w[1]
                )));
            }
        }
        if support.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidDistribution("non-finite support point".into()));
        }
        let mut cum = Vec::with_capacity(probs.len());
        let mut total = 0.0;
        for &p in &probs {
            if p.is_nan() || p < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "negative or NaN probability {p}"
                )));
            }
            total += p;
            cum.push(total);
        }
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(DiscreteDist { support, probs, cum })
    }

    /// Point mass at `x`.
    pub fn dirac(x: f64) -> Self {
        DiscreteDist::new(vec![x], vec![1.0]).expect("dirac is always valid")
    }

    /// Bernoulli distribution on {0, 1} with success probability `theta`.
    pub fn bernoulli(theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::Domain(format!("Bernoulli parameter {theta} not in [0,1]")));
        }
        DiscreteDist::new(vec![0.0, 1.0], vec![1.0 - theta, theta])
    }

    /// Uniform distribution on the given (strictly increasing) points.
    pub fn uniform_on(points: Vec<f64>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let probs = vec![1.0 / n as f64; n];
        DiscreteDist::new(points, probs)
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Cumulative probabilities at each support point.
    pub fn cumulative(&self) -> &[f64] {
        &self.cum
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        false // an invariant: support is never empty
    }

    pub fn mean(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .map(|(&x, &p)| x * p)
            .sum()
    }

    /// Distribution function F(x) = P{X <= x}. Right-continuous step function.
    pub fn cdf(&self, x: f64) -> f64 {
        let idx = self.support.partition_point(|&s| s <= x);
        if idx == 0 {
            0.0
        } else if idx == self.len() {
            1.0
        } else {
            self.cum[idx - 1]
        }
    }

    /// Generalized inverse distribution function for `u` in (0, 1]:
    /// the smallest support point x with F(x) >= u.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if u.is_nan() || u <= 0.0 || u > 1.0 {
            return Err(Error::Domain(format!("quantile argument {u} not in (0,1]")));
        }
        let idx = self.cum.partition_point(|&c| c < u);
        // Accumulated rounding can leave cum.last() a hair below 1.
        Ok(self.support[idx.min(self.len() - 1)])
    }

    /// `m` i.i.d. draws via inverse-CDF sampling. Deterministic given the
    /// generator state.
    pub fn sample(&self, rng: &mut Rng, m: usize) -> Vec<f64> {
        (0..m)
            .map(|_| {
                let u = rng.uniform_open_closed();
                self.quantile(u).expect("u in (0,1] by construction")
            })
            .collect()
    }

    /// Probability mass at `x` (exact support-point match), 0 elsewhere.
    pub fn mass_at(&self, x: f64) -> f64 {
        match self
            .support
            .binary_search_by(|s| s.partial_cmp(&x).expect("finite support"))
        {
            Ok(i) => self.probs[i],
            Err(_) => 0.0,
        }
    }
}

/// Empirical distribution of a non-empty sample: exact-duplicate values are
/// merged, each support point weighted by its multiplicity / m.
pub fn empirical(samples: &[f64]) -> Result<DiscreteDist> {
    if samples.is_empty() {
        return Err(Error::Domain("empirical distribution of an empty sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let m = sorted.len() as f64;
    let mut support = Vec::new();
    let mut probs = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut count = 0usize;
        while i < sorted.len() && sorted[i] == x {
            count += 1;
            i += 1;
        }
        support.push(x);
        probs.push(count as f64 / m);
    }
    DiscreteDist::new(support, probs)
}

/// Distribution of A + X for independent A, X: the exact discrete
/// convolution of the two supports, merging equal sums.
pub fn convolve(a: &DiscreteDist, x: &DiscreteDist) -> DiscreteDist {
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(a.len() * x.len());
    for (&sa, &pa) in a.support().iter().zip(a.probs()) {
        for (&sx, &px) in x.support().iter().zip(x.probs()) {
            pairs.push((sa + sx, pa * px));
        }
    }
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).expect("finite sums"));
    let mut support = Vec::new();
    let mut probs = Vec::new();
    for (s, p) in pairs {
        if support.last() == Some(&s) {
            *probs.last_mut().expect("non-empty") += p;
        } else {
            support.push(s);
            probs.push(p);
        }
    }
    DiscreteDist::new(support, probs).expect("convolution preserves validity")
}

/// Distribution of c*X for c > 0 (support scaled, weights unchanged).
pub fn scale(d: &DiscreteDist, c: f64) -> Result<DiscreteDist> {
    if c.is_nan() || c <= 0.0 {
        return Err(Error::Domain(format!("scale factor {c} must be positive")));
    }
    let support = d.support().iter().map(|&x| c * x).collect();
    DiscreteDist::new(support, d.probs().to_vec())
}
