//! Named quadrature-rule constructions behind a common trait, so callers can
//! pick rules at runtime.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gauss_hermite::gh_rule;
use crate::kq_approx::{approx_weights, machine_precision_truncation, qr_weights, scaled_nodes};
use crate::kq_exact::exact_weights;
use crate::mercer::MercerBasis;
use crate::rule::QuadratureRule;

/// Inputs shared by every construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleContext {
    pub basis: MercerBasis,
}

impl RuleContext {
    pub fn new(basis: MercerBasis) -> Self {
        Self { basis }
    }

    pub fn length_scale(&self) -> f64 {
        self.basis.length_scale()
    }
}

/// A constructed rule. `condition` is set for rules that solve a kernel system.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltRule {
    pub rule: QuadratureRule,
    pub condition: Option<f64>,
}

pub trait RuleStrategy: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn build(&self, ctx: &RuleContext, n: usize) -> Result<BuiltRule>;
}

/// Closed-form approximate weights on scaled Gauss–Hermite nodes.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScaledGhApprox;

impl RuleStrategy for ScaledGhApprox {
    fn name(&self) -> &'static str {
        "sghkq"
    }

    fn description(&self) -> &'static str {
        "approximate kernel weights at scaled Gauss-Hermite nodes"
    }

    fn build(&self, ctx: &RuleContext, n: usize) -> Result<BuiltRule> {
        Ok(BuiltRule {
            rule: approx_weights(&ctx.basis, n)?.rule,
            condition: None,
        })
    }
}

/// Exact kernel weights at scaled Gauss–Hermite nodes.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScaledGhExact;

impl RuleStrategy for ScaledGhExact {
    fn name(&self) -> &'static str {
        "kq"
    }

    fn description(&self) -> &'static str {
        "exact kernel weights at scaled Gauss-Hermite nodes"
    }

    fn build(&self, ctx: &RuleContext, n: usize) -> Result<BuiltRule> {
        let nodes = scaled_nodes(&ctx.basis, n)?;
        let w = exact_weights(&nodes, ctx.length_scale())?;
        Ok(BuiltRule {
            rule: QuadratureRule::new(nodes, w.weights)?,
            condition: Some(w.condition_estimate),
        })
    }
}

/// `n` equispaced nodes spanning `[min x̃, max x̃]` of the `n`-point scaled
/// Gauss–Hermite rule; a single node sits at 0.
pub fn uniform_nodes(basis: &MercerBasis, n: usize) -> Result<Vec<f64>> {
    let scaled = scaled_nodes(basis, n)?;
    if n == 1 {
        return Ok(vec![0.0]);
    }
    let (lo, hi) = (scaled[0], scaled[n - 1]);
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect())
}

/// Exact kernel weights at uniform nodes.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformExact;

impl RuleStrategy for UniformExact {
    fn name(&self) -> &'static str {
        "ukq"
    }

    fn description(&self) -> &'static str {
        "exact kernel weights at uniform nodes over the scaled Gauss-Hermite span"
    }

    fn build(&self, ctx: &RuleContext, n: usize) -> Result<BuiltRule> {
        let nodes = uniform_nodes(&ctx.basis, n)?;
        let w = exact_weights(&nodes, ctx.length_scale())?;
        Ok(BuiltRule {
            rule: QuadratureRule::new(nodes, w.weights)?,
            condition: Some(w.condition_estimate),
        })
    }
}

/// Plain Gauss–Hermite rule.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussHermite;

impl RuleStrategy for GaussHermite {
    fn name(&self) -> &'static str {
        "gh"
    }

    fn description(&self) -> &'static str {
        "Gauss-Hermite nodes and weights"
    }

    fn build(&self, _ctx: &RuleContext, n: usize) -> Result<BuiltRule> {
        Ok(BuiltRule {
            rule: gh_rule(n)?,
            condition: None,
        })
    }
}

/// Truncated-Mercer weights at scaled Gauss–Hermite nodes, truncated at
/// machine precision.
#[derive(Debug, Clone, Copy, Default)]
pub struct MercerQr;

impl RuleStrategy for MercerQr {
    fn name(&self) -> &'static str {
        "qr"
    }

    fn description(&self) -> &'static str {
        "QR-split truncated Mercer weights at scaled Gauss-Hermite nodes"
    }

    fn build(&self, ctx: &RuleContext, n: usize) -> Result<BuiltRule> {
        let nodes = scaled_nodes(&ctx.basis, n)?;
        let m = machine_precision_truncation(&ctx.basis, n);
        let w = qr_weights(&ctx.basis, &nodes, m)?;
        Ok(BuiltRule {
            rule: QuadratureRule::new(nodes, w)?,
            condition: None,
        })
    }
}

/// Name-keyed collection of strategies.
#[derive(Clone, Default)]
pub struct RuleRegistry {
    strategies: BTreeMap<&'static str, Arc<dyn RuleStrategy>>,
}

impl std::fmt::Debug for RuleRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.strategies.keys()).finish()
    }
}

impl RuleRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Registry holding `sghkq`, `kq`, `ukq`, `gh` and `qr`.
    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(ScaledGhApprox));
        r.register(Arc::new(ScaledGhExact));
        r.register(Arc::new(UniformExact));
        r.register(Arc::new(GaussHermite));
        r.register(Arc::new(MercerQr));
        r
    }

    /// Adds a strategy, replacing any previous one with the same name.
    pub fn register(&mut self, strategy: Arc<dyn RuleStrategy>) -> Option<Arc<dyn RuleStrategy>> {
        self.strategies.insert(strategy.name(), strategy)
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn RuleStrategy>> {
        self.strategies.get(name).cloned().ok_or_else(|| {
            Error::Domain(format!(
                "unknown rule '{name}' (available: {})",
                self.names().join(", ")
            ))
        })
    }

    /// Registered names in sorted order.
    pub fn names(&self) -> Vec<&'static str> {
        self.strategies.keys().copied().collect()
    }

    /// Resolves a list of names, keeping the given order.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<Arc<dyn RuleStrategy>>> {
        names.iter().map(|n| self.get(n.as_ref())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(l: f64) -> RuleContext {
        RuleContext::new(MercerBasis::standard(l).unwrap())
    }

    #[test]
    fn builtins_registered() {
        let r = RuleRegistry::with_builtins();
        assert_eq!(r.names(), vec!["gh", "kq", "qr", "sghkq", "ukq"]);
        assert!(r.get("nope").is_err());
        let picked = r.select(&["ukq", "gh"]).unwrap();
        assert_eq!(picked[0].name(), "ukq");
        assert_eq!(picked[1].name(), "gh");
    }

    #[test]
    fn every_builtin_builds() {
        let r = RuleRegistry::with_builtins();
        let c = ctx(1.0);
        for name in r.names() {
            let s = r.get(name).unwrap();
            assert!(!s.description().is_empty());
            let b = s.build(&c, 7).unwrap();
            assert_eq!(b.rule.len(), 7);
            assert!((b.rule.weight_sum() - 1.0).abs() < 0.2, "{name}");
        }
    }

    #[test]
    fn uniform_span() {
        let b = MercerBasis::standard(0.5).unwrap();
        let scaled = scaled_nodes(&b, 9).unwrap();
        let u = uniform_nodes(&b, 9).unwrap();
        assert_eq!(u[0], scaled[0]);
        assert_eq!(u[8], scaled[8]);
        assert!(u[4].abs() < 1e-14);
        assert_eq!(uniform_nodes(&b, 1).unwrap(), vec![0.0]);
    }

    #[test]
    fn custom_strategy() {
        struct Midpoint;
        impl RuleStrategy for Midpoint {
            fn name(&self) -> &'static str {
                "mid"
            }
            fn description(&self) -> &'static str {
                "single node at the origin"
            }
            fn build(&self, _: &RuleContext, _: usize) -> Result<BuiltRule> {
                Ok(BuiltRule {
                    rule: QuadratureRule::new(vec![0.0], vec![1.0])?,
                    condition: None,
                })
            }
        }
        let mut r = RuleRegistry::with_builtins();
        assert!(r.register(Arc::new(Midpoint)).is_none());
        assert_eq!(
            r.get("mid")
                .unwrap()
                .build(&ctx(1.0), 3)
                .unwrap()
                .rule
                .len(),
            1
        );
    }
}
