use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix dimension must be at least 1")]
    EmptyMatrix,
    #[error("expected {} elements for a {n}x{n} matrix, got {got}", n * n)]
    ElementCount { n: usize, got: usize },
    #[error("non-finite element at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: {left}x{left} vs {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is singular")]
    SingularMatrix,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoeffError {
    #[error("t = {t} is outside the tabulated range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },
}

/// One field-level problem found by `Scenario::validate`.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Every invariant a scenario broke, in check order.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

impl ValidationError {
    pub fn mentions(&self, needle: &str) -> bool {
        self.violations.iter().any(|v| v.message.contains(needle))
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid scenario: ")?;
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
    #[error(transparent)]
    Coefficient(#[from] CoeffError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IdentityError {
    #[error("F is not identically zero; the homogeneous formula does not apply")]
    NotHomogeneous,
    #[error("B is not identically zero; the left-only formula does not apply")]
    NotLeftOnly,
    #[error("det(X0) = 0; the exponential formula needs an invertible start")]
    SingularStart,
    #[error("trajectory does not belong to this scenario (dimension {traj} vs {scenario})")]
    Mismatch { traj: usize, scenario: usize },
    #[error(transparent)]
    Coefficient(#[from] CoeffError),
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
}

/// Anything that can go wrong loading a scenario document.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}
