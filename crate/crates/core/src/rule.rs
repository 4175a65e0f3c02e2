use crate::error::{Error, Result};

/// Measure a rule integrates against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Measure {
    /// `dμ(x) = (2π)^{-1/2} e^{-x²/2} dx`.
    #[default]
    StandardGaussian,
}

/// One-dimensional quadrature rule `Q(f) = Σ wₙ f(xₙ)` with strictly
/// ascending nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    measure: Measure,
}

impl QuadratureRule {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Domain(
                "quadrature rule needs at least one node".into(),
            ));
        }
        if nodes.len() != weights.len() {
            return Err(Error::Domain(format!(
                "{} nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        if nodes.iter().chain(&weights).any(|v| !v.is_finite()) {
            return Err(Error::Domain("nodes and weights must be finite".into()));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("nodes must be strictly ascending".into()));
        }
        Ok(Self {
            nodes,
            weights,
            measure: Measure::StandardGaussian,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn abs_weight_sum(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `|1 - w_N / w_1|`, zero for a rule with mirror-symmetric weights.
    pub fn symmetry_proxy(&self) -> f64 {
        (1.0 - self.weights[self.len() - 1] / self.weights[0]).abs()
    }

    /// Same nodes, different weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.nodes.clone(), weights)
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.nodes, self.weights)
    }
}
