use super::{DiscreteDist, PROB_SUM_TOL};
use crate::error::{Error, Result};

/// A weighted multivariate sample set in R^d: the carrier for energy
/// distance computations. Weights are probabilities (default uniform).
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    dim: usize,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidDistribution("empty point cloud".into()));
        }
        if points.len() != weights.len() {
            return Err(Error::LengthMismatch(points.len(), weights.len()));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::InvalidDistribution("zero-dimensional points".into()));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch(p.len(), dim));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidDistribution("non-finite coordinate".into()));
            }
        }
        let mut total = 0.0;
        for &w in &weights {
            if w.is_nan() || w < 0.0 {
                return Err(Error::InvalidDistribution(format!("negative weight {w}")));
            }
            total += w;
        }
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(PointCloud { points, weights, dim })
    }

    /// Uniformly weighted cloud.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::InvalidDistribution("empty point cloud".into()));
        }
        let weights = vec![1.0 / n as f64; n];
        PointCloud::new(points, weights)
    }

    /// Single-atom cloud at `x`.
    pub fn dirac(x: Vec<f64>) -> Result<Self> {
        PointCloud::new(vec![x], vec![1.0])
    }

    /// View a univariate discrete distribution as a cloud in R^1.
    pub fn from_discrete(d: &DiscreteDist) -> Self {
        let points = d.support().iter().map(|&x| vec![x]).collect();
        PointCloud::new(points, d.probs().to_vec()).expect("valid by construction")
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: at least one point
    }

    /// Weighted mean vector.
    pub fn mean(&self) -> Vec<f64> {
        let mut mu = vec![0.0; self.dim];
        for (p, &w) in self.points.iter().zip(&self.weights) {
            for (m, &x) in mu.iter_mut().zip(p) {
                *m += w * x;
            }
        }
        mu
    }
}

/// Euclidean norm of the difference of two equal-length vectors.
pub(crate) fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(PointCloud::new(vec![], vec![]).is_err());
        assert!(PointCloud::new(vec![vec![0.0], vec![1.0, 2.0]], vec![0.5, 0.5]).is_err());
        assert!(PointCloud::new(vec![vec![0.0]], vec![0.9]).is_err());
        assert!(PointCloud::uniform(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).is_ok());
    }

    #[test]
    fn from_discrete_keeps_weights() {
        let d = DiscreteDist::new(vec![0.0, 1.0], vec![0.3, 0.7]).unwrap();
        let c = PointCloud::from_discrete(&d);
        assert_eq!(c.dim(), 1);
        assert_eq!(c.weights(), &[0.3, 0.7]);
        assert_eq!(c.points(), &[vec![0.0], vec![1.0]]);
    }

    #[test]
    fn mean_is_weighted() {
        let c = PointCloud::new(vec![vec![0.0, 0.0], vec![2.0, 4.0]], vec![0.75, 0.25]).unwrap();
        assert_eq!(c.mean(), vec![0.5, 1.0]);
    }
}
