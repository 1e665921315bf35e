//! Time-dependent coefficient matrices and the initial-value problem they
//! belong to.

use crate::error::{CoeffError, ValidationError, Violation};
use crate::linalg::{Matrix, MAX_DIM};

/// A matrix-valued function of time.
///
/// `Tabulated` interpolates linearly between knots, so it is only continuous;
/// integrators lose order at its knots. Use the polynomial or sinusoidal kinds
/// where smoothness matters.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientSpec {
    Zero,
    Constant(Matrix),
    /// `sum_k C_k t^k`, coefficients in increasing degree.
    Polynomial(Vec<Matrix>),
    /// `offset + amplitude * sin(omega t + phase)`.
    Sinusoidal {
        offset: Matrix,
        amplitude: Matrix,
        omega: f64,
        phase: f64,
    },
    Tabulated {
        knots: Vec<f64>,
        values: Vec<Matrix>,
    },
}

impl CoefficientSpec {
    /// Value at `t` for an `n x n` problem. Only the tabulated kind can fail.
    pub fn eval(&self, t: f64, n: usize) -> Result<Matrix, CoeffError> {
        match self {
            CoefficientSpec::Zero => Ok(Matrix::zeros(n)),
            CoefficientSpec::Constant(m) => Ok(m.clone()),
            CoefficientSpec::Polynomial(coeffs) => {
                let Some((last, rest)) = coeffs.split_last() else {
                    return Ok(Matrix::zeros(n));
                };
                // Horner, highest degree first
                let mut acc = last.as_slice().to_vec();
                for c in rest.iter().rev() {
                    for (a, ci) in acc.iter_mut().zip(c.as_slice()) {
                        *a = *a * t + ci;
                    }
                }
                Ok(Matrix::from_raw(last.dim(), acc))
            }
            CoefficientSpec::Sinusoidal {
                offset,
                amplitude,
                omega,
                phase,
            } => {
                let s = (omega * t + phase).sin();
                let elems = offset
                    .as_slice()
                    .iter()
                    .zip(amplitude.as_slice())
                    .map(|(o, a)| o + a * s)
                    .collect();
                Ok(Matrix::from_raw(offset.dim(), elems))
            }
            CoefficientSpec::Tabulated { knots, values } => {
                let (start, end) = (knots[0], knots[knots.len() - 1]);
                if !(t >= start && t <= end) {
                    return Err(CoeffError::OutOfRange { t, start, end });
                }
                // first knot strictly greater than t, clamped to the last segment
                let upper = knots.partition_point(|&k| k <= t).clamp(1, knots.len() - 1);
                let (k0, k1) = (knots[upper - 1], knots[upper]);
                if t == k0 {
                    return Ok(values[upper - 1].clone());
                }
                if t == k1 {
                    return Ok(values[upper].clone());
                }
                let w = (t - k0) / (k1 - k0);
                let elems = values[upper - 1]
                    .as_slice()
                    .iter()
                    .zip(values[upper].as_slice())
                    .map(|(lo, hi)| lo + w * (hi - lo))
                    .collect();
                Ok(Matrix::from_raw(values[upper].dim(), elems))
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CoefficientSpec::Zero => "zero",
            CoefficientSpec::Constant(_) => "constant",
            CoefficientSpec::Polynomial(_) => "polynomial",
            CoefficientSpec::Sinusoidal { .. } => "sinusoidal",
            CoefficientSpec::Tabulated { .. } => "tabulated",
        }
    }

    /// True when the function vanishes for every `t`.
    pub fn is_identically_zero(&self) -> bool {
        let zero = |m: &Matrix| m.as_slice().iter().all(|v| *v == 0.0);
        match self {
            CoefficientSpec::Zero => true,
            CoefficientSpec::Constant(m) => zero(m),
            CoefficientSpec::Polynomial(cs) => cs.iter().all(zero),
            CoefficientSpec::Sinusoidal {
                offset, amplitude, ..
            } => zero(offset) && zero(amplitude),
            CoefficientSpec::Tabulated { values, .. } => values.iter().all(zero),
        }
    }

    fn matrices(&self) -> Vec<&Matrix> {
        match self {
            CoefficientSpec::Zero => vec![],
            CoefficientSpec::Constant(m) => vec![m],
            CoefficientSpec::Polynomial(cs) => cs.iter().collect(),
            CoefficientSpec::Sinusoidal {
                offset, amplitude, ..
            } => vec![offset, amplitude],
            CoefficientSpec::Tabulated { values, .. } => values.iter().collect(),
        }
    }

    fn check(&self, field: &str, n: usize, t0: f64, t_end: f64, out: &mut Vec<Violation>) {
        let mut push = |msg: String| {
            out.push(Violation {
                field: field.to_owned(),
                message: msg,
            })
        };
        if self.matrices().iter().any(|m| m.dim() != n) {
            push(format!(
                "dimension mismatch: payload matrices must be {n}x{n}"
            ));
        }
        match self {
            CoefficientSpec::Polynomial(cs) if cs.is_empty() => {
                push("polynomial needs at least one coefficient".into());
            }
            CoefficientSpec::Sinusoidal { omega, phase, .. }
                if !omega.is_finite() || !phase.is_finite() =>
            {
                push("omega and phase must be finite".into());
            }
            CoefficientSpec::Tabulated { knots, values } => {
                if knots.len() < 2 {
                    push("tabulated kind needs at least 2 knots".into());
                }
                if knots.len() != values.len() {
                    push(format!("{} knots but {} values", knots.len(), values.len()));
                }
                if knots.iter().any(|k| !k.is_finite()) {
                    push("knots must be finite".into());
                } else if knots.windows(2).any(|w| w[1] <= w[0]) {
                    push("knots must be strictly increasing".into());
                } else if knots.len() >= 2 && (knots[0] > t0 || knots[knots.len() - 1] < t_end) {
                    push(format!("knots do not cover [{t0}, {t_end}]"));
                }
            }
            _ => {}
        }
    }
}

/// Step control for [`crate::ode::integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Classic RK4 with `ceil((t_end - t0) / h)` uniform steps.
    Rk4 { h: f64 },
    /// Fehlberg 4(5) with a per-step max-norm error bound.
    Rkf45 { tol: f64 },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Rk4 { .. } => "rk4",
            Method::Rkf45 { .. } => "rkf45",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
}

impl SolverConfig {
    pub fn rk4(h: f64) -> Self {
        Self {
            method: Method::Rk4 { h },
        }
    }

    pub fn rkf45(tol: f64) -> Self {
        Self {
            method: Method::Rkf45 { tol },
        }
    }
}

/// The initial-value problem `X' + A X + X B = F`, `X(t0) = x0`, on
/// `[t0, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub n: usize,
    pub t0: f64,
    pub t_end: f64,
    pub x0: Matrix,
    pub a: CoefficientSpec,
    pub b: CoefficientSpec,
    pub f: CoefficientSpec,
    pub solver: SolverConfig,
    pub seed: Option<u64>,
}

impl Scenario {
    pub fn eval_a(&self, t: f64) -> Result<Matrix, CoeffError> {
        self.a.eval(t, self.n)
    }

    pub fn eval_b(&self, t: f64) -> Result<Matrix, CoeffError> {
        self.b.eval(t, self.n)
    }

    pub fn eval_f(&self, t: f64) -> Result<Matrix, CoeffError> {
        self.f.eval(t, self.n)
    }

    /// Checks every invariant and reports all violations at once.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let mut out = Vec::new();
        let mut push = |field: &str, msg: String| {
            out.push(Violation {
                field: field.to_owned(),
                message: msg,
            })
        };
        if self.n == 0 || self.n > MAX_DIM {
            push("n", format!("n = {} is outside 1..={MAX_DIM}", self.n));
        }
        if !self.t0.is_finite() {
            push("t0", "must be finite".into());
        }
        if !self.t_end.is_finite() {
            push("t_end", "must be finite".into());
        }
        if self.t0.is_finite() && self.t_end.is_finite() && self.t_end <= self.t0 {
            push(
                "t_end",
                format!("empty interval [{}, {}]", self.t0, self.t_end),
            );
        }
        if self.x0.dim() != self.n {
            push(
                "x0",
                format!(
                    "dimension mismatch: x0 is {0}x{0}, n = {1}",
                    self.x0.dim(),
                    self.n
                ),
            );
        }
        match self.solver.method {
            Method::Rk4 { h } if !(h.is_finite() && h > 0.0) => {
                push("solver.h", format!("step size must be positive, got {h}"));
            }
            Method::Rkf45 { tol } if !(tol.is_finite() && tol > 0.0) => {
                push(
                    "solver.tol",
                    format!("tolerance must be positive, got {tol}"),
                );
            }
            _ => {}
        }
        for (name, spec) in [("a", &self.a), ("b", &self.b), ("f", &self.f)] {
            spec.check(name, self.n, self.t0, self.t_end, &mut out);
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(ValidationError { violations: out })
        }
    }
}
