//! Tensor-product cubature for the standard Gaussian measure on `ℝ^d`.

use crate::error::{Error, Result};
use crate::kq_exact::{kernel_mean, kernel_mean_mean};
use crate::mercer::GaussianKernel;
use crate::rule::QuadratureRule;

pub const MAX_DIMENSION: usize = 6;
pub const MAX_GRID_POINTS: usize = 10_000_000;

/// Product of one-dimensional rules. Grid points are enumerated in row-major
/// order (the last coordinate varies fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct TensorRule {
    factors: Vec<QuadratureRule>,
    len: usize,
}

impl TensorRule {
    pub fn new(factors: Vec<QuadratureRule>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Domain(
                "tensor rule needs at least one factor".into(),
            ));
        }
        if factors.len() > MAX_DIMENSION {
            return Err(Error::InvalidSize {
                what: "tensor dimension",
                value: factors.len(),
                min: 1,
                max: MAX_DIMENSION,
            });
        }
        let mut len: usize = 1;
        for f in &factors {
            len = len.saturating_mul(f.len());
        }
        if len > MAX_GRID_POINTS {
            return Err(Error::InvalidSize {
                what: "tensor grid size",
                value: len,
                min: 1,
                max: MAX_GRID_POINTS,
            });
        }
        Ok(Self { factors, len })
    }

    pub fn dimension(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[QuadratureRule] {
        &self.factors
    }

    pub fn shape(&self) -> Vec<usize> {
        self.factors.iter().map(QuadratureRule::len).collect()
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `Π_i Σ_n w_{i,n}`.
    pub fn weight_sum(&self) -> f64 {
        self.factors
            .iter()
            .map(QuadratureRule::weight_sum)
            .product()
    }

    /// Multi-index of the grid point at row-major position `flat`.
    pub fn multi_index(&self, flat: usize) -> Result<Vec<usize>> {
        if flat >= self.len {
            return Err(Error::Index {
                index: flat,
                limit: self.len,
            });
        }
        let mut index = vec![0; self.dimension()];
        let mut rest = flat;
        for (slot, f) in index.iter_mut().zip(&self.factors).rev() {
            *slot = rest % f.len();
            rest /= f.len();
        }
        Ok(index)
    }

    pub fn iter(&self) -> GridIter<'_> {
        self.iter_range(0, self.len)
    }

    /// Grid points with row-major positions in `start..end`.
    pub fn iter_range(&self, start: usize, end: usize) -> GridIter<'_> {
        let end = end.min(self.len);
        let index = if start < end {
            self.multi_index(start).ok()
        } else {
            None
        };
        GridIter {
            rule: self,
            index,
            remaining: end.saturating_sub(start),
        }
    }

    fn fill(&self, index: &[usize], point: &mut [f64]) -> f64 {
        let mut w = 1.0;
        for ((p, &i), f) in point.iter_mut().zip(index).zip(&self.factors) {
            *p = f.nodes()[i];
            w *= f.weights()[i];
        }
        w
    }
}

/// One grid point with its product weight.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub index: Vec<usize>,
    pub point: Vec<f64>,
    pub weight: f64,
}

/// Lazy multi-index odometer over a [`TensorRule`].
#[derive(Debug, Clone)]
pub struct GridIter<'a> {
    rule: &'a TensorRule,
    index: Option<Vec<usize>>,
    remaining: usize,
}

fn advance(index: &mut [usize], factors: &[QuadratureRule]) {
    for (slot, f) in index.iter_mut().zip(factors).rev() {
        *slot += 1;
        if *slot < f.len() {
            return;
        }
        *slot = 0;
    }
}

impl Iterator for GridIter<'_> {
    type Item = GridPoint;

    fn next(&mut self) -> Option<GridPoint> {
        if self.remaining == 0 {
            return None;
        }
        let index = self.index.as_mut()?;
        let mut point = vec![0.0; index.len()];
        let weight = self.rule.fill(index, &mut point);
        let item = GridPoint {
            index: index.clone(),
            point,
            weight,
        };
        self.remaining -= 1;
        advance(index, &self.rule.factors);
        Some(item)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for GridIter<'_> {}

fn integrate_range<F: Fn(&[f64]) -> f64>(
    rule: &TensorRule,
    f: &F,
    start: usize,
    end: usize,
) -> Result<f64> {
    if start >= end {
        return Ok(0.0);
    }
    let mut index = rule.multi_index(start)?;
    let mut point = vec![0.0; rule.dimension()];
    let mut sum = 0.0;
    for _ in start..end {
        let w = rule.fill(&index, &mut point);
        let v = f(&point);
        if !v.is_finite() {
            return Err(Error::NonFiniteIntegrand { index, value: v });
        }
        sum += w * v;
        advance(&mut index, &rule.factors);
    }
    Ok(sum)
}

/// `Σ_I w_I f(x_I)` summed in row-major order.
pub fn tensor_integrate<F: Fn(&[f64]) -> f64>(rule: &TensorRule, f: F) -> Result<f64> {
    integrate_range(rule, &f, 0, rule.len())
}

/// As [`tensor_integrate`], split into `workers` contiguous row-major chunks
/// evaluated on scoped threads. Each chunk is summed in order and the chunk
/// sums are added left to right, so the result depends only on `workers`.
pub fn tensor_integrate_parallel<F>(rule: &TensorRule, f: F, workers: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let workers = workers.clamp(1, rule.len());
    let chunk = rule.len().div_ceil(workers);
    let partials: Vec<Result<f64>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|k| {
                let f = &f;
                let start = k * chunk;
                let end = ((k + 1) * chunk).min(rule.len());
                s.spawn(move || integrate_range(rule, f, start, end))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("integration worker panicked"))
            .collect()
    });
    let mut total = 0.0;
    for p in partials {
        total += p?;
    }
    Ok(total)
}

/// `k(x, y) = Π exp(-(xᵢ - yᵢ)²/(2ℓᵢ²))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableGaussianKernel {
    length_scales: Vec<f64>,
}

impl SeparableGaussianKernel {
    pub fn new(length_scales: Vec<f64>) -> Result<Self> {
        if length_scales.is_empty() || length_scales.len() > MAX_DIMENSION {
            return Err(Error::InvalidSize {
                what: "kernel dimension",
                value: length_scales.len(),
                min: 1,
                max: MAX_DIMENSION,
            });
        }
        for &l in &length_scales {
            GaussianKernel::new(l)?;
        }
        Ok(Self { length_scales })
    }

    pub fn isotropic(length_scale: f64, dimension: usize) -> Result<Self> {
        Self::new(vec![length_scale; dimension])
    }

    pub fn dimension(&self) -> usize {
        self.length_scales.len()
    }

    pub fn length_scales(&self) -> &[f64] {
        &self.length_scales
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut e = 0.0;
        for ((a, b), l) in x.iter().zip(y).zip(&self.length_scales) {
            let d = (a - b) / l;
            e += d * d;
        }
        (-0.5 * e).exp()
    }

    pub fn kernel_mean(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.length_scales)
            .map(|(&xi, &l)| kernel_mean(l, xi))
            .product()
    }

    pub fn kernel_mean_mean(&self) -> f64 {
        self.length_scales
            .iter()
            .map(|&l| kernel_mean_mean(l))
            .product()
    }
}

/// `f(x) = Π exp(-cᵢxᵢ²/(2ℓ²)) xᵢ^{mᵢ}` together with its Gaussian integral.
#[derive(Debug, Clone, PartialEq)]
pub struct TestIntegrand {
    powers: Vec<u32>,
    decay: Vec<f64>,
    length_scale: f64,
    exact: f64,
}

impl TestIntegrand {
    pub fn dimension(&self) -> usize {
        self.powers.len()
    }

    pub fn powers(&self) -> &[u32] {
        &self.powers
    }

    pub fn decay(&self) -> &[f64] {
        &self.decay
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    /// Closed-form `∫ f dμ^d`.
    pub fn exact(&self) -> f64 {
        self.exact
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let l2 = self.length_scale * self.length_scale;
        let mut v = 1.0;
        let mut e = 0.0;
        for ((&xi, &m), &c) in x.iter().zip(&self.powers).zip(&self.decay) {
            v *= xi.powi(m as i32);
            e += c * xi * xi;
        }
        v * (-0.5 * e / l2).exp()
    }
}

/// Builds the test integrand. Each `cᵢ` must lie in `(0, 4)` so that `f`
/// belongs to the Gaussian RKHS with length-scale `ℓ`.
pub fn test_integrand(d: usize, m: &[u32], c: &[f64], length_scale: f64) -> Result<TestIntegrand> {
    if d == 0 || d > MAX_DIMENSION {
        return Err(Error::InvalidSize {
            what: "integrand dimension",
            value: d,
            min: 1,
            max: MAX_DIMENSION,
        });
    }
    if m.len() != d || c.len() != d {
        return Err(Error::Domain(format!(
            "expected {d} powers and {d} decay rates, got {} and {}",
            m.len(),
            c.len()
        )));
    }
    GaussianKernel::new(length_scale)?;
    if let Some(bad) = c.iter().find(|&&ci| !(ci > 0.0 && ci < 4.0)) {
        return Err(Error::Domain(format!("decay rate {bad} is outside (0, 4)")));
    }
    if let Some(bad) = m.iter().find(|&&mi| mi > 64) {
        return Err(Error::Domain(format!("power {bad} exceeds 64")));
    }
    let l2 = length_scale * length_scale;
    let mut exact = 1.0;
    for (&mi, &ci) in m.iter().zip(c) {
        if mi % 2 == 1 {
            exact = 0.0;
            break;
        }
        // (m-1)!! s^{m+1} with s² = ℓ²/(ℓ²+c)
        let dfact: f64 = (1..mi).step_by(2).map(|k| k as f64).product();
        exact *= dfact * (l2 / (l2 + ci)).powf(0.5 * (mi as f64 + 1.0));
    }
    Ok(TestIntegrand {
        powers: m.to_vec(),
        decay: c.to_vec(),
        length_scale,
        exact,
    })
}
