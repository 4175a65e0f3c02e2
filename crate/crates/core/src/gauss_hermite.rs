//! Gauss–Hermite rules for the standard Gaussian measure.
//!
//! Nodes come from the eigenvalues of the Jacobi matrix of the normalised
//! Hermite recurrence (zero diagonal, off-diagonal `√1, …, √(N-1)`), found by
//! implicit-shift QL. Each node then gets one Newton step against `ĥ_N`,
//! mirrored pairs are averaged, and the weights are taken from the Christoffel
//! function `1 / Σ_{n<N} ĥ_n(x)²`, which is accurate in the relative sense even
//! for the far tails where the eigenvector components underflow.

use crate::error::{Error, Result};
use crate::hermite::HermiteSequence;
use crate::rule::QuadratureRule;

/// Largest supported rule size.
pub const MAX_NODES: usize = 200;

/// QL sweeps allowed per eigenvalue before giving up.
pub const MAX_SWEEPS: usize = 50;

/// Nodes whose relative residual `|ĥ_N(x)| / max_k |ĥ_k(x)|` exceeds this are flagged.
pub const RESIDUAL_FLAG: f64 = 1e-8;

/// Post-processing report for a computed Gauss–Hermite rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GhDiagnostics {
    /// Total QL sweeps across all eigenvalues.
    pub sweeps: usize,
    /// Largest relative residual after polishing.
    pub max_residual: f64,
    /// Indices of nodes above [`RESIDUAL_FLAG`].
    pub flagged: Vec<usize>,
    /// Largest absolute gap between the Christoffel weights and the squared
    /// first eigenvector components (Golub–Welsch weights).
    pub eigenvector_discrepancy: f64,
}

/// Symmetric tridiagonal eigenproblem by implicit QL with Wilkinson-type
/// shifts. `diag` is overwritten with the eigenvalues (unsorted), `off[i]`
/// couples rows `i` and `i + 1` (`off[n-1]` is scratch) and `first_row`
/// carries the first row of the accumulated rotations.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], first_row: &mut [f64]) -> Result<usize> {
    let n = diag.len();
    let mut total = 0;
    if n > 0 {
        off[n - 1] = 0.0;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if iter == MAX_SWEEPS {
                return Err(Error::NoConvergence {
                    eigenvalue: l,
                    sweeps: iter,
                });
            }
            iter += 1;
            total += 1;

            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                let z = first_row[i + 1];
                first_row[i + 1] = s * first_row[i] + c * z;
                first_row[i] = c * first_row[i] - s * z;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(total)
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_NODES {
        return Err(Error::InvalidSize {
            what: "number of Gauss-Hermite nodes",
            value: n,
            min: 1,
            max: MAX_NODES,
        });
    }
    Ok(())
}

/// Relative residual of `x` as a root of `ĥ_n`.
fn root_residual(n: usize, x: f64) -> Result<f64> {
    let seq = HermiteSequence::normalized(x, n)?;
    let scale = seq.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(seq.values()[n].abs() / scale)
}

/// The `n`-point Gauss–Hermite rule together with its accuracy diagnostics.
pub fn gh_rule_with_diagnostics(n: usize) -> Result<(QuadratureRule, GhDiagnostics)> {
    check_size(n)?;

    let mut diag = vec![0.0; n];
    let mut off: Vec<f64> = (1..=n).map(|k| (k as f64).sqrt()).collect();
    let mut first_row = vec![0.0; n];
    first_row[0] = 1.0;
    let sweeps = tridiagonal_ql(&mut diag, &mut off, &mut first_row)?;

    let mut pairs: Vec<(f64, f64)> = diag
        .into_iter()
        .zip(first_row.iter().map(|z| z * z))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut nodes, eigen_weights): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();

    // one Newton step on ĥ_N, using ĥ_N' = √N ĥ_{N-1}
    if n > 1 {
        for x in nodes.iter_mut() {
            let seq = HermiteSequence::normalized(*x, n)?;
            let v = seq.values();
            let deriv = (n as f64).sqrt() * v[n - 1];
            if deriv != 0.0 {
                *x -= v[n] / deriv;
            }
        }
    }

    for i in 0..n / 2 {
        let j = n - 1 - i;
        let half = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -half;
        nodes[j] = half;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }

    let mut weights = Vec::with_capacity(n);
    for &x in &nodes {
        let seq = HermiteSequence::normalized(x, n - 1)?;
        let christoffel: f64 = seq.values().iter().map(|v| v * v).sum();
        weights.push(1.0 / christoffel);
    }
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let avg = 0.5 * (weights[i] + weights[j]);
        weights[i] = avg;
        weights[j] = avg;
    }

    let eigenvector_discrepancy = weights
        .iter()
        .zip(&eigen_weights)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));

    let mut max_residual: f64 = 0.0;
    let mut flagged = Vec::new();
    for (i, &x) in nodes.iter().enumerate() {
        let r = root_residual(n, x)?;
        max_residual = max_residual.max(r);
        if r > RESIDUAL_FLAG {
            flagged.push(i);
        }
    }

    let rule = QuadratureRule::new(nodes, weights)?;
    Ok((
        rule,
        GhDiagnostics {
            sweeps,
            max_residual,
            flagged,
            eigenvector_discrepancy,
        },
    ))
}

/// The `n`-point Gauss–Hermite rule for the standard Gaussian measure,
/// `1 ≤ n ≤ 200`.
pub fn gh_rule(n: usize) -> Result<QuadratureRule> {
    gh_rule_with_diagnostics(n).map(|(rule, _)| rule)
}

/// Whether every node satisfies `|x| ≤ 2√(N-1)`.
pub fn gh_node_bound_check(rule: &QuadratureRule) -> bool {
    let bound = 2.0 * ((rule.len() - 1) as f64).sqrt();
    rule.nodes().iter().all(|x| x.abs() <= bound)
}
