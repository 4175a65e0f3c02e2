//! Approximate Gaussian kernel quadrature on scaled Gauss–Hermite nodes.
//!
//! The closed-form weights are
//!
//! ```text
//! w̃ₙ = (1+2δ²)^{-1/2} · wₙ^GH · e^{δ² x̃ₙ²} · Σ_{m=0}^{⌊(N-1)/2⌋} γ^m r_m ĥ_{2m}(xₙ^GH)
//! ```
//!
//! with `x̃ₙ = xₙ^GH / (√2αβ)`, `r_m = √(binom(2m, m)/4^m)` and `ĥ` the
//! normalised probabilists' Hermite polynomials. Every term stays of moderate
//! size up to `N = 200`, unlike the factorial form.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gauss_hermite::gh_rule;
use crate::hermite::{HermiteSequence, MAX_DEGREE};
use crate::mercer::{mean_factors, MercerBasis};
use crate::rule::QuadratureRule;

/// An approximate kernel quadrature rule and the pieces it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxRule {
    pub rule: QuadratureRule,
    pub basis: MercerBasis,
    pub gh_source: QuadratureRule,
}

impl ApproxRule {
    pub fn len(&self) -> usize {
        self.rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rule.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        self.rule.nodes()
    }

    pub fn weights(&self) -> &[f64] {
        self.rule.weights()
    }
}

/// Gauss–Hermite nodes divided by `√2αβ`.
pub fn scaled_nodes(basis: &MercerBasis, n: usize) -> Result<Vec<f64>> {
    let gh = gh_rule(n)?;
    Ok(scale(basis, gh.nodes()))
}

fn scale(basis: &MercerBasis, gh_nodes: &[f64]) -> Vec<f64> {
    let s = basis.hermite_scale();
    gh_nodes.iter().map(|x| x / s).collect()
}

/// `Σ_{m=0}^{⌊(N-1)/2⌋} γ^m r_m ĥ_{2m}(x)`, the polynomial factor of the
/// closed-form weights.
pub fn positivity_sum(gamma: f64, n: usize, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidSize {
            what: "number of nodes",
            value: 0,
            min: 1,
            max: MAX_DEGREE,
        });
    }
    let terms = (n - 1) / 2 + 1;
    let seq = HermiteSequence::normalized(x, 2 * (terms - 1))?;
    Ok(series(gamma, &mean_factors(terms), seq.values()))
}

fn series(gamma: f64, factors: &[f64], hermite: &[f64]) -> f64 {
    let mut g = 1.0;
    let mut sum = 0.0;
    for (m, r) in factors.iter().enumerate() {
        sum += g * r * hermite[2 * m];
        g *= gamma;
    }
    sum
}

/// The `N`-point approximate kernel quadrature rule for `basis`.
pub fn approx_weights(basis: &MercerBasis, n: usize) -> Result<ApproxRule> {
    let gh = gh_rule(n)?;
    let nodes = scale(basis, gh.nodes());
    let terms = (n - 1) / 2 + 1;
    let factors = mean_factors(terms);
    let gamma = basis.gamma();
    let delta_sq = basis.delta_sq();
    let pre = (1.0 + 2.0 * delta_sq).sqrt().recip();

    let mut weights = Vec::with_capacity(n);
    for ((&x, &w), &xs) in gh.nodes().iter().zip(gh.weights()).zip(&nodes) {
        let seq = HermiteSequence::normalized(x, 2 * (terms - 1))?;
        let s = series(gamma, &factors, seq.values());
        let v = pre * w * (delta_sq * xs * xs).exp() * s;
        if !v.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite approximate weight at node {x}"
            )));
        }
        weights.push(v);
    }
    // the formula is even in the node; keep mirrored weights bit-identical
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let avg = 0.5 * (weights[i] + weights[j]);
        weights[i] = avg;
        weights[j] = avg;
    }

    Ok(ApproxRule {
        rule: QuadratureRule::new(nodes, weights)?,
        basis: *basis,
        gh_source: gh,
    })
}

/// `|Q̃(φₙ) - μ(φₙ)|` for any `n` up to the degree guard.
pub fn eigenfunction_residual(approx: &ApproxRule, n: usize) -> Result<f64> {
    let b = &approx.basis;
    let mut q = 0.0;
    for (x, w) in approx.rule.iter() {
        q += w * b.eigenfunction(n, x)?;
    }
    Ok((q - b.eigenfunction_mean(n)).abs())
}

/// As [`eigenfunction_residual`], restricted to the `n < N` eigenfunctions
/// the rule integrates exactly.
pub fn eigen_exactness_residual(approx: &ApproxRule, n: usize) -> Result<f64> {
    if n >= approx.len() {
        return Err(Error::Index {
            index: n,
            limit: approx.len(),
        });
    }
    eigenfunction_residual(approx, n)
}

/// Truncation length at which the dropped eigenvalues fall below machine
/// precision relative to the last retained one: the smallest `M ≥ N` with
/// `λ_M / λ_{N-1} < ε_mach`, capped at the degree guard.
pub fn machine_precision_truncation(basis: &MercerBasis, n: usize) -> usize {
    let r = basis.eigenvalue_ratio();
    let extra = if r <= 0.0 {
        1.0
    } else {
        (f64::EPSILON.ln() / r.ln()).floor() + 1.0
    };
    let m = (n as f64 - 1.0 + extra.max(1.0)).min(MAX_DEGREE as f64);
    (m as usize).max(n)
}

/// Weights of the `M`-term truncated kernel, `(ΦΛΦᵀ)^{-1}ΦΛφ_μ`, evaluated
/// through a QR split of `Φ` with the eigenvalue ratios applied analytically.
///
/// `Φ` is `N × M` with `Φ[i][n] = φₙ(xᵢ)`. With `Φ = Q[R₁ R₂]` the weights
/// are `Q y` where `(R₁ᵀ + D R₂ᵀ) y = φ₁ + D φ₂` and
/// `D[i][j] = (R₁^{-1}R₂)[i][j] · r^{N+j-i}`.
pub fn qr_weights(basis: &MercerBasis, nodes: &[f64], m: usize) -> Result<Vec<f64>> {
    let n = nodes.len();
    if n == 0 {
        return Err(Error::Domain("qr_weights needs at least one node".into()));
    }
    if m < n {
        return Err(Error::Precondition(format!(
            "truncation length {m} is smaller than the node count {n}"
        )));
    }
    if m > MAX_DEGREE {
        return Err(Error::DegreeOverflow {
            degree: m,
            max: MAX_DEGREE,
        });
    }
    let mut sorted = nodes.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.iter().any(|x| !x.is_finite()) || sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Domain(
            "nodes must be finite and pairwise distinct".into(),
        ));
    }

    // Φ = S Φ' with S the row norms; the weights for Φ are S^{-1} times those for Φ'
    let mut norms = Vec::with_capacity(n);
    let mut phi = DMatrix::zeros(n, m);
    for (i, &x) in nodes.iter().enumerate() {
        let row = basis.eigenfunctions(x, m)?;
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Numerical(format!(
                "all eigenfunctions underflow at node {x}"
            )));
        }
        for (k, v) in row.into_iter().enumerate() {
            phi[(i, k)] = v / norm;
        }
        norms.push(norm);
    }
    let means = basis.eigenfunction_means(m);

    let qr = phi.qr();
    let q = qr.q();
    let r = qr.r();
    let r1 = r.columns(0, n).into_owned();
    let scale = r1.diagonal().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if r1
        .diagonal()
        .iter()
        .any(|d| d.abs() <= scale * f64::EPSILON * n as f64)
    {
        return Err(Error::Numerical(
            "eigenfunction matrix is rank deficient".into(),
        ));
    }

    let mut lhs = r1.transpose();
    let mut rhs = DVector::from_column_slice(&means[..n]);
    if m > n {
        let r2 = r.columns(n, m - n).into_owned();
        let mut d = r1
            .solve_upper_triangular(&r2)
            .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
        let ratio = basis.eigenvalue_ratio();
        for i in 0..n {
            for j in 0..m - n {
                d[(i, j)] *= ratio.powi((n + j - i) as i32);
            }
        }
        lhs += &d * r2.transpose();
        rhs += &d * DVector::from_column_slice(&means[n..]);
    }
    let y = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("reduced QR system is singular".into()))?;
    let w: Vec<f64> = (q * y).iter().zip(&norms).map(|(v, s)| v / s).collect();
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite QR weight".into()));
    }
    Ok(w)
}

/// `Σ_{m=0}^{M} ĥ_m(x) ĥ_m(y)`, equal to `Σ H_m(x)H_m(y)/m!`.
pub fn christoffel_darboux_sum(x: f64, y: f64, m: usize) -> Result<f64> {
    let hx = HermiteSequence::normalized(x, m)?;
    let hy = HermiteSequence::normalized(y, m)?;
    Ok(hx
        .values()
        .iter()
        .zip(hy.values())
        .map(|(a, b)| a * b)
        .sum())
}

/// Right-hand side of the Christoffel–Darboux identity,
/// `√(M+1) [ĥ_M(y) ĥ_{M+1}(x) - ĥ_M(x) ĥ_{M+1}(y)] / (x - y)`.
/// The diagonal `x = y` is rejected.
pub fn christoffel_darboux_closed_form(x: f64, y: f64, m: usize) -> Result<f64> {
    if x == y {
        return Err(Error::Domain(
            "closed Christoffel-Darboux form is undefined at x = y; use the sum".into(),
        ));
    }
    let hx = HermiteSequence::normalized(x, m + 1)?;
    let hy = HermiteSequence::normalized(y, m + 1)?;
    let (hx, hy) = (hx.values(), hy.values());
    Ok(((m + 1) as f64).sqrt() * (hy[m] * hx[m + 1] - hx[m] * hy[m + 1]) / (x - y))
}
