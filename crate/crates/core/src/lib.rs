pub mod error;
pub mod gauss_hermite;
pub mod hermite;
pub mod kq_approx;
pub mod kq_exact;
pub mod mercer;
pub mod rule;
pub mod strategy;
pub mod tensor;
pub mod wce;

#[cfg(test)]
mod test_support;

pub use error::{Error, Result};
pub use mercer::{GaussianKernel, MercerBasis, DEFAULT_ALPHA};
pub use rule::{Measure, QuadratureRule};
pub use strategy::{BuiltRule, RuleContext, RuleRegistry, RuleStrategy};
