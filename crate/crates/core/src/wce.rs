//! Worst-case error in the Gaussian RKHS and the theoretical convergence
//! constants for scaled Gauss–Hermite kernel quadrature.

use crate::error::{Error, Result};
use crate::hermite::{HERMITE_BOUND_K, MAX_DEGREE};
use crate::kq_exact::{kernel_mean, kernel_mean_mean};
use crate::mercer::{GaussianKernel, MercerBasis};
use crate::rule::QuadratureRule;

/// Squared errors down to this negative value are rounding noise and are
/// clamped to zero.
pub const NEGATIVE_CLAMP: f64 = -1e-14;

/// Upper cap for `-ln η` when `η` underflows to zero.
pub const C_THEORY_CAP: f64 = 744.44;

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

/// Terms of `e² = μ(k_μ) + Σₙ Σₘ wₙ wₘ k(xₙ, xₘ) - 2 Σₙ wₙ k_μ(xₙ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WceReport {
    pub wce: f64,
    pub term_mean_mean: f64,
    pub term_quadratic: f64,
    pub term_cross: f64,
}

impl WceReport {
    fn from_terms(term_mean_mean: f64, term_quadratic: f64, term_cross: f64) -> Result<Self> {
        let mut acc = Compensated::default();
        acc.add(term_mean_mean);
        acc.add(term_quadratic);
        acc.add(-2.0 * term_cross);
        let sq = acc.value();
        if sq < NEGATIVE_CLAMP || sq.is_nan() {
            return Err(Error::Numerical(format!(
                "squared worst-case error is {sq:e}"
            )));
        }
        Ok(Self {
            wce: sq.max(0.0).sqrt(),
            term_mean_mean,
            term_quadratic,
            term_cross,
        })
    }

    /// `e²` reassembled from the three terms.
    pub fn squared_from_terms(&self) -> f64 {
        self.term_mean_mean + self.term_quadratic - 2.0 * self.term_cross
    }
}

fn quadratic_and_cross(rule: &QuadratureRule, length_scale: f64) -> Result<(f64, f64)> {
    let kernel = GaussianKernel::new(length_scale)?;
    let (x, w) = (rule.nodes(), rule.weights());
    let mut quad = Compensated::default();
    let mut cross = Compensated::default();
    for i in 0..x.len() {
        quad.add(w[i] * w[i]);
        for j in 0..i {
            quad.add(2.0 * w[i] * w[j] * kernel.eval(x[i], x[j]));
        }
        cross.add(w[i] * kernel_mean(length_scale, x[i]));
    }
    Ok((quad.value(), cross.value()))
}

/// Worst-case error of `rule` in the RKHS of the Gaussian kernel with
/// length-scale `ℓ`, against the standard Gaussian measure.
pub fn worst_case_error(rule: &QuadratureRule, length_scale: f64) -> Result<WceReport> {
    let (quad, cross) = quadratic_and_cross(rule, length_scale)?;
    WceReport::from_terms(kernel_mean_mean(length_scale), quad, cross)
}

/// Worst-case error of the tensor product of `rules` for the separable
/// kernel with the given per-dimension length-scales. Every term factorises.
pub fn tensor_worst_case_error(
    rules: &[QuadratureRule],
    length_scales: &[f64],
) -> Result<WceReport> {
    if rules.is_empty() || rules.len() != length_scales.len() {
        return Err(Error::Domain(format!(
            "{} factor rules for {} length-scales",
            rules.len(),
            length_scales.len()
        )));
    }
    let (mut mm, mut quad, mut cross) = (1.0, 1.0, 1.0);
    for (rule, &l) in rules.iter().zip(length_scales) {
        let (q, c) = quadratic_and_cross(rule, l)?;
        mm *= kernel_mean_mean(l);
        quad *= q;
        cross *= c;
    }
    WceReport::from_terms(mm, quad, cross)
}

/// Worst-case error from the Mercer series, `e² = Σₙ λₙ (μ(φₙ) - Q(φₙ))²`.
/// Every term is nonnegative, so unlike the explicit form there is no
/// cancellation and errors far below `√ε_mach` are resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralWce {
    pub wce: f64,
    /// Number of eigenpairs summed.
    pub terms: usize,
    /// Upper bound on the omitted part of `e²`.
    pub tail_bound: f64,
}

/// Target for the omitted tail of `e²`.
const SPECTRAL_TAIL_TARGET: f64 = 1e-36;

pub fn spectral_worst_case_error(
    rule: &QuadratureRule,
    basis: &MercerBasis,
) -> Result<SpectralWce> {
    if !basis.is_standard() {
        return Err(Error::Precondition(
            "spectral worst-case error needs alpha = 1/sqrt(2)".into(),
        ));
    }
    let r = basis.eigenvalue_ratio();
    let lambda0 = basis.eigenvalue_scale();
    // |φₙ(x)| ≤ K√β e^{x²/4} and |μ(φₙ)| ≤ √(β/(1+2δ²))
    let envelope = rule
        .iter()
        .map(|(x, w)| w.abs() * (0.25 * x * x).exp())
        .sum::<f64>()
        * HERMITE_BOUND_K
        * basis.beta().sqrt();
    let mean_bound = (basis.beta() / (1.0 + 2.0 * basis.delta_sq())).sqrt();
    let scale = lambda0 * (mean_bound + envelope).powi(2) / (1.0 - r);
    let tail = |m: usize| scale * r.powi(m as i32);

    let mut terms = rule.len();
    while terms <= MAX_DEGREE && tail(terms) > SPECTRAL_TAIL_TARGET {
        terms += 1;
    }
    let terms = terms.min(MAX_DEGREE + 1);

    let means = basis.eigenfunction_means(terms);
    let mut q = vec![0.0; terms];
    for (x, w) in rule.iter() {
        for (acc, v) in q.iter_mut().zip(basis.eigenfunctions(x, terms)?) {
            *acc += w * v;
        }
    }
    let mut sq = Compensated::default();
    let mut lambda = lambda0;
    for (m, qn) in means.iter().zip(&q) {
        let d = m - qn;
        sq.add(lambda * d * d);
        lambda *= r;
    }
    Ok(SpectralWce {
        wce: sq.value().sqrt(),
        terms,
        tail_bound: tail(terms),
    })
}

/// Constants of the exponential convergence bound
/// `e(Q_N) ≤ (1 + C₁ W_N) C₂ η^{M_N}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceConstants {
    /// `√(½/(½+δ²+ε²))`.
    pub tau: f64,
    /// Eigenvalue ratio `ε²/(½+δ²+ε²)`.
    pub lambda: f64,
    /// `√λ e^{1/β²}`.
    pub eta: f64,
    /// `K√β`.
    pub c1: f64,
    /// `√τ/(1-√λ)`.
    pub c2: f64,
}

impl ConvergenceConstants {
    /// `-ln η`, capped at [`C_THEORY_CAP`] when `η` underflows.
    pub fn c_theory(&self) -> f64 {
        if self.eta > 0.0 {
            (-self.eta.ln()).min(C_THEORY_CAP)
        } else {
            C_THEORY_CAP
        }
    }

    /// `(1 + C₁ W) C₂ η^M`.
    pub fn bound(&self, abs_weight_sum: f64, exactness: usize) -> f64 {
        (1.0 + self.c1 * abs_weight_sum) * self.c2 * self.eta.powi(exactness as i32)
    }
}

fn require_standard(basis: &MercerBasis) -> Result<()> {
    if basis.is_standard() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "convergence constants need alpha = 1/sqrt(2), got {}",
            basis.alpha()
        )))
    }
}

pub fn theoretical_constants(basis: &MercerBasis) -> Result<ConvergenceConstants> {
    require_standard(basis)?;
    let tau = basis.eigenvalue_scale();
    let lambda = basis.eigenvalue_ratio();
    let beta = basis.beta();
    let eta = lambda.sqrt() * (1.0 / (beta * beta)).exp();
    Ok(ConvergenceConstants {
        tau,
        lambda,
        eta,
        c1: HERMITE_BOUND_K * beta.sqrt(),
        c2: tau.sqrt() / (1.0 - lambda.sqrt()),
    })
}

/// Whether `√(ε²/(½+δ²+ε²)) · e^{ρ/(2β²)} < 1` for length-scale `ℓ`.
pub fn eta_lemma_check(length_scale: f64, rho: f64) -> Result<bool> {
    let b = MercerBasis::standard(length_scale)?;
    let beta = b.beta();
    Ok(b.eigenvalue_ratio().sqrt() * (rho / (2.0 * beta * beta)).exp() < 1.0)
}

/// Constants of the `d`-dimensional tensor bound `e(Q^d) ≤ C W^d η^M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultivariateConstants {
    pub dimension: usize,
    /// `2d (K√(τβ)/(1-η))^d`.
    pub c: f64,
    pub eta: f64,
    /// Bound `W ≥ 1` on the per-dimension absolute weight sums.
    pub abs_weight_sum: f64,
}

impl MultivariateConstants {
    /// `C W^d η^M` for minimum per-dimension exactness order `M`.
    pub fn bound(&self, exactness: usize) -> f64 {
        self.c * self.abs_weight_sum.powi(self.dimension as i32) * self.eta.powi(exactness as i32)
    }
}

pub fn multivariate_constants(
    basis: &MercerBasis,
    d: usize,
    abs_weight_sum: f64,
) -> Result<MultivariateConstants> {
    if d == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    if !(abs_weight_sum >= 1.0 && abs_weight_sum.is_finite()) {
        return Err(Error::Domain(format!(
            "weight bound must be at least 1, got {abs_weight_sum}"
        )));
    }
    let k = theoretical_constants(basis)?;
    let beta = basis.beta();
    let base = HERMITE_BOUND_K * (k.tau * beta).sqrt() / (1.0 - k.eta);
    Ok(MultivariateConstants {
        dimension: d,
        c: 2.0 * d as f64 * base.powi(d as i32),
        eta: k.eta,
        abs_weight_sum,
    })
}

/// Least-squares rate `c` in `e ≈ A e^{-cN}`, fitted over the leading run of
/// points with `e > floor`. `None` with fewer than two usable points.
pub fn empirical_rate(ns: &[usize], errors: &[f64], floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(errors)
        .take_while(|(_, &e)| e > floor)
        .map(|(&n, &e)| (n as f64, e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    Some(-sxy / sxx)
}
