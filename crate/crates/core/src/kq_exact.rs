//! Exact Gaussian kernel quadrature: weights solving `K w = k_μ`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mercer::GaussianKernel;

/// Largest node count accepted by [`exact_weights`].
pub const MAX_NODES: usize = 200;

/// Condition estimates above this mark a solve as unreliable: the relative
/// weight error bound `κ·u` exceeds roughly 1e-4.
pub const UNRELIABLE_CONDITION: f64 = 1e12;

/// Kernel mean embedding `k_μ(x) = ∫ k(x, y) dμ(y) = ℓ/√(1+ℓ²) · e^{-x²/(2(1+ℓ²))}`.
pub fn kernel_mean(length_scale: f64, x: f64) -> f64 {
    let s = 1.0 + length_scale * length_scale;
    length_scale / s.sqrt() * (-0.5 * x * x / s).exp()
}

/// Initial error `μ(k_μ) = ∬ k dμ dμ = ℓ/√(2+ℓ²)`.
pub fn kernel_mean_mean(length_scale: f64) -> f64 {
    length_scale / (2.0 + length_scale * length_scale).sqrt()
}

/// Kernel matrix and embedding vector for a node set.
#[derive(Debug, Clone)]
pub struct KernelSystem {
    kernel_matrix: DMatrix<f64>,
    embedding: DVector<f64>,
    condition_estimate: f64,
}

impl KernelSystem {
    pub fn assemble(nodes: &[f64], length_scale: f64) -> Result<Self> {
        let kernel = GaussianKernel::new(length_scale)?;
        let n = nodes.len();
        if n == 0 || n > MAX_NODES {
            return Err(Error::InvalidSize {
                what: "number of kernel quadrature nodes",
                value: n,
                min: 1,
                max: MAX_NODES,
            });
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("nodes must be finite".into()));
        }
        let mut sorted = nodes.to_vec();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain(
                "kernel quadrature nodes must be pairwise distinct".into(),
            ));
        }

        let kernel_matrix = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                1.0
            } else {
                kernel.eval(nodes[i], nodes[j])
            }
        });
        let embedding =
            DVector::from_iterator(n, nodes.iter().map(|&x| kernel_mean(length_scale, x)));
        let condition_estimate = spectral_condition(&kernel_matrix);
        Ok(Self {
            kernel_matrix,
            embedding,
            condition_estimate,
        })
    }

    pub fn kernel_matrix(&self) -> &DMatrix<f64> {
        &self.kernel_matrix
    }

    pub fn embedding(&self) -> &DVector<f64> {
        &self.embedding
    }

    /// Spectral (2-norm) condition number of the kernel matrix.
    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    /// Cholesky solve of `(K + ridge·I) w = k_μ`. No jitter is added on failure.
    pub fn solve(&self, ridge: f64) -> Result<Vec<f64>> {
        if !(ridge >= 0.0 && ridge.is_finite()) {
            return Err(Error::Domain(format!(
                "ridge must be nonnegative, got {ridge}"
            )));
        }
        let mut k = self.kernel_matrix.clone();
        if ridge > 0.0 {
            for i in 0..k.nrows() {
                k[(i, i)] += ridge;
            }
        }
        let chol = k.cholesky().ok_or(Error::IllConditioned {
            condition: self.condition_estimate,
        })?;
        let w = chol.solve(&self.embedding);
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::IllConditioned {
                condition: self.condition_estimate,
            });
        }
        Ok(w.iter().copied().collect())
    }
}

/// `max|λ| / min|λ|` from a symmetric eigendecomposition.
fn spectral_condition(matrix: &DMatrix<f64>) -> f64 {
    let eig = matrix.clone().symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
        (lo.min(v.abs()), hi.max(v.abs()))
    });
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Kernel quadrature weights with the condition estimate of the system.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactWeights {
    pub weights: Vec<f64>,
    pub condition_estimate: f64,
}

impl ExactWeights {
    pub fn is_reliable(&self) -> bool {
        self.condition_estimate < UNRELIABLE_CONDITION
    }
}

/// Exact kernel quadrature weights for arbitrary distinct nodes.
pub fn exact_weights(nodes: &[f64], length_scale: f64) -> Result<ExactWeights> {
    exact_weights_with_ridge(nodes, length_scale, 0.0)
}

/// As [`exact_weights`], solving `(K + ridge·I) w = k_μ`.
pub fn exact_weights_with_ridge(
    nodes: &[f64],
    length_scale: f64,
    ridge: f64,
) -> Result<ExactWeights> {
    let system = KernelSystem::assemble(nodes, length_scale)?;
    let weights = system.solve(ridge)?;
    Ok(ExactWeights {
        weights,
        condition_estimate: system.condition_estimate(),
    })
}

/// `max_i |Σ_n w_n k(x_n, x_i) - k_μ(x_i)|`: how far a weight vector is from
/// integrating every kernel translate exactly.
pub fn kernel_translate_residual(nodes: &[f64], weights: &[f64], length_scale: f64) -> Result<f64> {
    let kernel = GaussianKernel::new(length_scale)?;
    Ok(nodes
        .iter()
        .map(|&xi| {
            let q: f64 = nodes
                .iter()
                .zip(weights)
                .map(|(&xn, w)| w * kernel.eval(xn, xi))
                .sum();
            (q - kernel_mean(length_scale, xi)).abs()
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss_hermite::gh_rule;
    use crate::mercer::MercerBasis;
    use crate::test_support::{adaptive_simpson, gaussian_expectation, normal_pdf};

    fn scaled_gh_nodes(l: f64, n: usize) -> Vec<f64> {
        let b = MercerBasis::standard(l).unwrap();
        gh_rule(n)
            .unwrap()
            .nodes()
            .iter()
            .map(|x| x / b.hermite_scale())
            .collect()
    }

    #[test]
    fn kernel_mean_examples() {
        assert!((kernel_mean(1.0, 0.0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((kernel_mean(1e8, 0.0) - 1.0).abs() < 1e-12);
        let expected = (-9.0f64 / 4.0).exp() / 2f64.sqrt();
        assert!((kernel_mean(1.0, 3.0) - expected).abs() < 1e-15);
    }

    #[test]
    fn kernel_mean_matches_oracle() {
        for &l in &[0.2, 1.0, 4.0] {
            let k = GaussianKernel::new(l).unwrap();
            for &x in &[0.0, 0.5, -1.7, 3.0] {
                let oracle = gaussian_expectation(|y| k.eval(x, y));
                assert!((kernel_mean(l, x) - oracle).abs() < 1e-10, "l={l} x={x}");
            }
        }
    }

    #[test]
    fn kernel_mean_mean_matches_oracle() {
        assert!((kernel_mean_mean(1.0) - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((kernel_mean_mean(1e8) - 1.0).abs() < 1e-12);
        assert!((kernel_mean_mean(0.2) - 0.2 / 2.04f64.sqrt()).abs() < 1e-15);
        for &l in &[0.2, 1.0, 4.0] {
            let k = GaussianKernel::new(l).unwrap();
            let outer = |x: f64| {
                normal_pdf(x)
                    * adaptive_simpson(|y| k.eval(x, y) * normal_pdf(y), -10.0, 10.0, 1e-13)
            };
            let oracle = adaptive_simpson(outer, -10.0, 10.0, 1e-12);
            assert!(
                (kernel_mean_mean(l) - oracle).abs() < 1e-10,
                "l={l}: {oracle}"
            );
        }
    }

    #[test]
    fn single_node() {
        let w = exact_weights(&[0.0], 1.0).unwrap();
        assert!((w.weights[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(w.condition_estimate, 1.0);
    }

    #[test]
    fn symmetric_pair() {
        for &a in &[0.1, 1.0, 3.0] {
            for &l in &[0.3, 1.0, 5.0] {
                let w = exact_weights(&[-a, a], l).unwrap().weights;
                assert!((w[0] - w[1]).abs() <= 1e-12 * w[0].abs(), "a={a} l={l}");
            }
        }
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(matches!(
            exact_weights(&[0.0, 1.0, 0.0], 1.0),
            Err(Error::Domain(_))
        ));
        assert!(exact_weights(&[], 1.0).is_err());
        assert!(exact_weights(&[0.0], -1.0).is_err());
        assert!(exact_weights_with_ridge(&[0.0], 1.0, -1.0).is_err());
    }

    #[test]
    fn ill_conditioned_large_length_scale() {
        let nodes = scaled_gh_nodes(4.0, 99);
        let condition = match exact_weights(&nodes, 4.0) {
            Ok(w) => {
                assert!(!w.is_reliable());
                w.condition_estimate
            }
            Err(Error::IllConditioned { condition }) => condition,
            Err(e) => panic!("unexpected error {e}"),
        };
        assert!(condition >= 1e15, "{condition:e}");
    }

    #[test]
    fn ridge_regularises() {
        let nodes = scaled_gh_nodes(4.0, 99);
        let w = exact_weights_with_ridge(&nodes, 4.0, 1e-8).unwrap();
        assert!(w.weights.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn symmetric_weights_when_well_conditioned() {
        for n in 2..=40 {
            let nodes = scaled_gh_nodes(0.2, n);
            let w = exact_weights(&nodes, 0.2).unwrap().weights;
            assert!((1.0 - w[n - 1] / w[0]).abs() <= 1e-6, "n={n}");
        }
    }

    #[test]
    fn translates_integrated_exactly() {
        for &(l, n) in &[(0.2, 30), (1.0, 15), (0.5, 25)] {
            let nodes = scaled_gh_nodes(l, n);
            let w = exact_weights(&nodes, l).unwrap();
            let res = kernel_translate_residual(&nodes, &w.weights, l).unwrap();
            assert!(
                res <= 1e-8 * w.condition_estimate * f64::EPSILON + 1e-15,
                "l={l} n={n} res={res:e}"
            );
        }
    }
}
