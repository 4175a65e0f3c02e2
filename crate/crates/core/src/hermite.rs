//! Probabilists' Hermite polynomials.
//!
//! `H_{n+1}(x) = x H_n(x) - n H_{n-1}(x)` with `H_0 = 1`, `H_1 = x`. The
//! normalised polynomials `ĥ_n = H_n / √(n!)` are orthonormal in `L²(μ)` for
//! the standard Gaussian measure and obey
//! `ĥ_{n+1} = (x ĥ_n - √n ĥ_{n-1}) / √(n+1)`. Every consumer downstream of
//! this module uses the normalised form; `n!` never appears as a factor.

use crate::error::{Error, Result};

/// Largest degree accepted by any evaluator in this module.
pub const MAX_DEGREE: usize = 400;

/// Constant in the Cramér-type bound `ĥ_n(x)² ≤ K² e^{x²/2}`.
pub const HERMITE_BOUND_K: f64 = 1.087;

fn check_degree(degree: usize) -> Result<()> {
    if degree > MAX_DEGREE {
        return Err(Error::DegreeOverflow {
            degree,
            max: MAX_DEGREE,
        });
    }
    Ok(())
}

/// Unnormalised `H_n(x)` by the three-term recurrence.
///
/// Values grow like `√(n!)`, so this is only meaningful for moderate `n`;
/// prefer [`hermite_normalized`] for anything large.
pub fn hermite_eval(n: usize, x: f64) -> Result<f64> {
    check_degree(n)?;
    let mut prev = 1.0;
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = x;
    for k in 1..n {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Normalised `ĥ_n(x) = H_n(x)/√(n!)`.
pub fn hermite_normalized(n: usize, x: f64) -> Result<f64> {
    check_degree(n)?;
    let mut prev = 1.0;
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = x;
    for k in 1..n {
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Values of `H_n(x)` or `ĥ_n(x)` for `n = 0..=degree_max` at a fixed `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteSequence {
    x: f64,
    normalized: bool,
    values: Vec<f64>,
}

impl HermiteSequence {
    /// `ĥ_0(x), …, ĥ_{degree_max}(x)`.
    pub fn normalized(x: f64, degree_max: usize) -> Result<Self> {
        check_degree(degree_max)?;
        let mut values = Vec::with_capacity(degree_max + 1);
        values.push(1.0);
        if degree_max >= 1 {
            values.push(x);
        }
        for k in 1..degree_max {
            let next =
                (x * values[k] - (k as f64).sqrt() * values[k - 1]) / ((k + 1) as f64).sqrt();
            values.push(next);
        }
        Ok(Self {
            x,
            normalized: true,
            values,
        })
    }

    /// `H_0(x), …, H_{degree_max}(x)`.
    pub fn unnormalized(x: f64, degree_max: usize) -> Result<Self> {
        check_degree(degree_max)?;
        let mut values = Vec::with_capacity(degree_max + 1);
        values.push(1.0);
        if degree_max >= 1 {
            values.push(x);
        }
        for k in 1..degree_max {
            let next = x * values[k] - k as f64 * values[k - 1];
            values.push(next);
        }
        Ok(Self {
            x,
            normalized: false,
            values,
        })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn degree_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, n: usize) -> Option<f64> {
        self.values.get(n).copied()
    }

    /// Largest absolute deviation from the recurrence, relative to the
    /// magnitude of the terms involved. Zero up to rounding for a sequence
    /// produced by this module.
    pub fn recurrence_defect(&self) -> f64 {
        let v = &self.values;
        let mut worst: f64 = 0.0;
        for k in 1..v.len().saturating_sub(1) {
            let (lhs, a, b) = if self.normalized {
                let s = ((k + 1) as f64).sqrt();
                (s * v[k + 1], self.x * v[k], (k as f64).sqrt() * v[k - 1])
            } else {
                (v[k + 1], self.x * v[k], k as f64 * v[k - 1])
            };
            let scale = lhs.abs().max(a.abs()).max(b.abs()).max(f64::MIN_POSITIVE);
            worst = worst.max((lhs - (a - b)).abs() / scale);
        }
        worst
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Shorthand for [`HermiteSequence::normalized`].
pub fn hermite_normalized_sequence(x: f64, degree_max: usize) -> Result<HermiteSequence> {
    HermiteSequence::normalized(x, degree_max)
}
