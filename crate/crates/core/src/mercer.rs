//! Mercer eigendecomposition of the Gaussian kernel with respect to
//! `dμ_α(x) = (α/√π) e^{-α²x²} dx`.
//!
//! With `ε = 1/(√2 ℓ)`, `β = (1 + (2ε/α)²)^{1/4}` and `δ² = (α²/2)(β² - 1)`:
//!
//! ```text
//! λ_n = √(α²/(α²+δ²+ε²)) · (ε²/(α²+δ²+ε²))ⁿ
//! φ_n(x) = √β e^{-δ²x²} ĥ_n(√2 α β x)
//! ```

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::hermite::{self, HermiteSequence};

/// The global scale that makes `μ_α` the standard Gaussian measure.
pub const DEFAULT_ALPHA: f64 = FRAC_1_SQRT_2;

/// `k(x, y) = exp(-(x - y)² / (2ℓ²))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianKernel {
    length_scale: f64,
}

impl GaussianKernel {
    pub fn new(length_scale: f64) -> Result<Self> {
        if !(length_scale > 0.0 && length_scale.is_finite()) {
            return Err(Error::Domain(format!(
                "length-scale must be positive and finite, got {length_scale}"
            )));
        }
        Ok(Self { length_scale })
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let d = (x - y) / self.length_scale;
        (-0.5 * d * d).exp()
    }
}

/// `r_m = √((2m)!)/(2^m m!) = √(binom(2m, m)/4^m)` for `m = 0..count`, by
/// `r_m = r_{m-1} √((2m-1)/(2m))`.
pub fn mean_factors(count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut r = 1.0;
    for m in 0..count {
        if m > 0 {
            r *= ((2 * m - 1) as f64 / (2 * m) as f64).sqrt();
        }
        out.push(r);
    }
    out
}

/// Derived constants of the Mercer expansion for one length-scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MercerBasis {
    length_scale: f64,
    alpha: f64,
    epsilon: f64,
    beta: f64,
    delta_sq: f64,
}

impl MercerBasis {
    pub fn new(length_scale: f64, alpha: f64) -> Result<Self> {
        if !(length_scale > 0.0 && length_scale.is_finite()) {
            return Err(Error::Domain(format!(
                "length-scale must be positive and finite, got {length_scale}"
            )));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!(
                "alpha must be positive and finite, got {alpha}"
            )));
        }
        let epsilon = FRAC_1_SQRT_2 / length_scale;
        let t = (2.0 * epsilon / alpha).powi(2);
        let beta_sq = (1.0 + t).sqrt();
        // β² - 1 without cancellation near the flat limit
        let beta_sq_m1 = t / (beta_sq + 1.0);
        Ok(Self {
            length_scale,
            alpha,
            epsilon,
            beta: beta_sq.sqrt(),
            delta_sq: 0.5 * alpha * alpha * beta_sq_m1,
        })
    }

    /// Basis with `α = 1/√2`, orthonormal in `L²(μ)`.
    pub fn standard(length_scale: f64) -> Result<Self> {
        Self::new(length_scale, DEFAULT_ALPHA)
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn epsilon_sq(&self) -> f64 {
        self.epsilon * self.epsilon
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn delta_sq(&self) -> f64 {
        self.delta_sq
    }

    pub fn kernel(&self) -> GaussianKernel {
        GaussianKernel {
            length_scale: self.length_scale,
        }
    }

    /// True when `α` is `1/√2` to rounding.
    pub fn is_standard(&self) -> bool {
        (self.alpha - DEFAULT_ALPHA).abs() <= 4.0 * f64::EPSILON
    }

    /// `√2 α β`, the factor mapping eigenfunction arguments to Hermite arguments.
    pub fn hermite_scale(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.alpha * self.beta
    }

    fn denominator(&self) -> f64 {
        self.alpha * self.alpha + self.delta_sq + self.epsilon_sq()
    }

    /// `ε²/(α²+δ²+ε²)`, the geometric decay of the eigenvalues.
    pub fn eigenvalue_ratio(&self) -> f64 {
        self.epsilon_sq() / self.denominator()
    }

    /// `λ_0 = √(α²/(α²+δ²+ε²))`.
    pub fn eigenvalue_scale(&self) -> f64 {
        (self.alpha * self.alpha / self.denominator()).sqrt()
    }

    /// `γ = 2α²β²/(1+2δ²) - 1`, computed as `(α²(β²-1) + 2α² - 1)/(1+2δ²)`.
    pub fn gamma(&self) -> f64 {
        let a2 = self.alpha * self.alpha;
        (2.0 * self.delta_sq + 2.0 * a2 - 1.0) / (1.0 + 2.0 * self.delta_sq)
    }

    pub fn eigenvalue(&self, n: usize) -> f64 {
        self.eigenvalue_scale() * self.eigenvalue_ratio().powi(n as i32)
    }

    /// `φ_n(x)` through the normalised Hermite recurrence.
    pub fn eigenfunction(&self, n: usize, x: f64) -> Result<f64> {
        let h = hermite::hermite_normalized(n, self.hermite_scale() * x)?;
        Ok(self.beta.sqrt() * (-self.delta_sq * x * x).exp() * h)
    }

    /// `φ_0(x), …, φ_{count-1}(x)`.
    pub fn eigenfunctions(&self, x: f64, count: usize) -> Result<Vec<f64>> {
        if count == 0 {
            return Ok(Vec::new());
        }
        let seq = HermiteSequence::normalized(self.hermite_scale() * x, count - 1)?;
        let envelope = self.beta.sqrt() * (-self.delta_sq * x * x).exp();
        Ok(seq
            .into_values()
            .into_iter()
            .map(|h| envelope * h)
            .collect())
    }

    /// `μ(φ_n)` against the standard Gaussian measure.
    pub fn eigenfunction_mean(&self, n: usize) -> f64 {
        if n % 2 == 1 {
            return 0.0;
        }
        let m = n / 2;
        let r = mean_factors(m + 1)[m];
        self.mean_prefactor() * r * self.gamma().powi(m as i32)
    }

    /// `μ(φ_0), …, μ(φ_{count-1})`.
    pub fn eigenfunction_means(&self, count: usize) -> Vec<f64> {
        let factors = mean_factors(count.div_ceil(2));
        let (pre, gamma) = (self.mean_prefactor(), self.gamma());
        (0..count)
            .map(|n| {
                if n % 2 == 1 {
                    0.0
                } else {
                    let m = n / 2;
                    pre * factors[m] * gamma.powi(m as i32)
                }
            })
            .collect()
    }

    fn mean_prefactor(&self) -> f64 {
        (self.beta / (1.0 + 2.0 * self.delta_sq)).sqrt()
    }

    /// `Σ_{n<terms} λ_n φ_n(x) φ_n(y)`.
    pub fn kernel_truncated(&self, terms: usize, x: f64, y: f64) -> Result<f64> {
        if terms == 0 {
            return Err(Error::Domain(
                "truncated kernel needs at least one term".into(),
            ));
        }
        let px = self.eigenfunctions(x, terms)?;
        let py = self.eigenfunctions(y, terms)?;
        let ratio = self.eigenvalue_ratio();
        let mut lambda = self.eigenvalue_scale();
        let mut sum = 0.0;
        for (a, b) in px.iter().zip(&py) {
            sum += lambda * a * b;
            lambda *= ratio;
        }
        Ok(sum)
    }
}
