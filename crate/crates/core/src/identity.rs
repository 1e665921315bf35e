//! Closed-form determinant identities evaluated along a trajectory.
//!
//! Every series here is built from the trajectory's own grid: the
//! cumulative trace channel supplies the exponent and the integrals are
//! grid quadratures. Exponentials are formed last, from log magnitudes, so
//! a determinant beyond `exp(700)` comes back as [`Sample::Overflow`]
//! instead of `inf`.
//!
//! | series | formula |
//! |--------|---------|
//! | homogeneous | `det X0 * exp(-C(t))` |
//! | left-only | `exp(-C(t)) * (int D_{X,F} exp(C) ds + det X0)` |
//! | general | `exp(-C(t)) * (int tr(adj(X) F) exp(C) ds + det X0)` |
//! | invertible | `det X0 * exp(int tr(X^-1 F) ds - C(t))` |
//!
//! with `C(t) = int_{t0}^{t} tr(A + B)`.

use crate::coeffs::Scenario;
use crate::error::IdentityError;
use crate::linalg::{self, Axis};
use crate::ode::Trajectory;
use crate::quad::{self, Quadrature};

/// Log-magnitude beyond which a value is reported as overflowed.
pub const OVERFLOW_LOG: f64 = 700.0;

/// One point of a determinant series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sample {
    Value(f64),
    Overflow,
}

impl Sample {
    /// Classifies a directly computed number.
    pub fn from_f64(v: f64) -> Sample {
        if v.is_finite() && v.abs() <= OVERFLOW_LOG.exp() {
            Sample::Value(v)
        } else {
            Sample::Overflow
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Sample::Value(v) => Some(v),
            Sample::Overflow => None,
        }
    }

    pub fn is_overflow(self) -> bool {
        matches!(self, Sample::Overflow)
    }
}

/// `det0 * exp(exponent)`, judged by `ln|det0| + exponent`.
fn scaled_exp(det0: f64, exponent: f64) -> Sample {
    if det0 == 0.0 {
        return Sample::Value(0.0);
    }
    let log = det0.abs().ln() + exponent;
    if !log.is_finite() || log > OVERFLOW_LOG {
        return Sample::Overflow;
    }
    if exponent.abs() < 700.0 {
        Sample::Value(det0 * exponent.exp())
    } else {
        Sample::Value(det0.signum() * log.exp())
    }
}

fn check_shape(s: &Scenario, traj: &Trajectory) -> Result<(), IdentityError> {
    if traj.dim() != s.n {
        return Err(IdentityError::Mismatch {
            traj: traj.dim(),
            scenario: s.n,
        });
    }
    Ok(())
}

/// Homogeneous closed form `det X0 * exp(-C(t_k))`. Requires `F = 0`.
pub fn eq2_det(s: &Scenario, traj: &Trajectory) -> Result<Vec<Sample>, IdentityError> {
    check_shape(s, traj)?;
    if !s.f.is_identically_zero() {
        return Err(IdentityError::NotHomogeneous);
    }
    let det0 = traj.det_direct[0];
    Ok(traj
        .cum_trace
        .iter()
        .map(|c| scaled_exp(det0, -c))
        .collect())
}

/// General two-sided identity with the default (trapezoid) quadrature.
pub fn eq5_det(s: &Scenario, traj: &Trajectory) -> Result<Vec<Sample>, IdentityError> {
    eq5_det_with(s, traj, Quadrature::default())
}

/// General two-sided identity, valid through zeros of `det X`.
pub fn eq5_det_with(
    s: &Scenario,
    traj: &Trajectory,
    rule: Quadrature,
) -> Result<Vec<Sample>, IdentityError> {
    check_shape(s, traj)?;
    let integrand = traj
        .times
        .iter()
        .zip(&traj.x_samples)
        .map(|(&t, x)| {
            let f = s.eval_f(t)?;
            Ok(linalg::trace_of_product(&linalg::adjugate(x), &f).expect("same dimension"))
        })
        .collect::<Result<Vec<f64>, IdentityError>>()?;
    Ok(integrating_factor_series(traj, &integrand, rule))
}

/// Left-only identity (`B = 0`) with the replaced-row determinant sum as
/// the integrand, default quadrature.
pub fn eq4_det(s: &Scenario, traj: &Trajectory) -> Result<Vec<Sample>, IdentityError> {
    eq4_det_with(s, traj, Quadrature::default())
}

pub fn eq4_det_with(
    s: &Scenario,
    traj: &Trajectory,
    rule: Quadrature,
) -> Result<Vec<Sample>, IdentityError> {
    check_shape(s, traj)?;
    if !s.b.is_identically_zero() {
        return Err(IdentityError::NotLeftOnly);
    }
    let integrand = traj
        .times
        .iter()
        .zip(&traj.x_samples)
        .map(|(&t, x)| {
            let f = s.eval_f(t)?;
            Ok(linalg::replaced_det_sum(x, &f, Axis::Rows).expect("same dimension"))
        })
        .collect::<Result<Vec<f64>, IdentityError>>()?;
    // with B = 0 the cumulative trace channel is the integral of tr A alone
    Ok(integrating_factor_series(traj, &integrand, rule))
}

/// `exp(-C_k) * (int g exp(C) + det X0)` on the trajectory grid.
fn integrating_factor_series(
    traj: &Trajectory,
    integrand: &[f64],
    rule: Quadrature,
) -> Vec<Sample> {
    let det0 = traj.det_direct[0];
    let forced = quad::cumulative_weighted(&traj.times, integrand, &traj.cum_trace, rule);
    forced
        .iter()
        .zip(&traj.cum_trace)
        .map(|(q, c)| match scaled_exp(det0, -c) {
            Sample::Overflow => Sample::Overflow,
            Sample::Value(free) => {
                if *q == 0.0 {
                    Sample::Value(free)
                } else {
                    Sample::from_f64(q + free)
                }
            }
        })
        .collect()
}

/// Invertible-case series, truncated at the first sample where `X` fails
/// [`linalg::is_invertible`].
#[derive(Debug, Clone, PartialEq)]
pub struct Eq6Series {
    /// One entry per grid point up to (not including) the first
    /// non-invertible sample.
    pub values: Vec<Sample>,
    pub first_noninvertible_time: Option<f64>,
}

pub fn eq6_det(s: &Scenario, traj: &Trajectory) -> Result<Eq6Series, IdentityError> {
    eq6_det_with(s, traj, Quadrature::default())
}

pub fn eq6_det_with(
    s: &Scenario,
    traj: &Trajectory,
    rule: Quadrature,
) -> Result<Eq6Series, IdentityError> {
    check_shape(s, traj)?;
    let det0 = traj.det_direct[0];
    if det0 == 0.0 {
        return Err(IdentityError::SingularStart);
    }
    let mut rates = Vec::with_capacity(traj.len());
    let mut first_noninvertible_time = None;
    for (&t, x) in traj.times.iter().zip(&traj.x_samples) {
        let Ok(inv) = linalg::inverse(x) else {
            first_noninvertible_time = Some(t);
            break;
        };
        let f = s.eval_f(t)?;
        rates.push(linalg::trace_of_product(&inv, &f).expect("same dimension"));
    }
    let valid = rates.len();
    let forced = quad::cumulative(&traj.times[..valid], &rates, rule);
    let values = forced
        .iter()
        .zip(&traj.cum_trace[..valid])
        .map(|(q, c)| scaled_exp(det0, q - c))
        .collect();
    Ok(Eq6Series {
        values,
        first_noninvertible_time,
    })
}

/// Last value of every channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminalValues {
    pub det_direct: Sample,
    pub det_ode: Sample,
    pub eq5: Sample,
    /// `None` when the invertible-case series stops before the end.
    pub eq6: Option<Sample>,
    pub eq2: Option<Sample>,
    pub eq4: Option<Sample>,
}

/// Agreement of each identity series with `det_direct`, as the max over the
/// grid of `|channel - det_direct| / max(1, |det_direct|)`. Points where
/// either side overflowed are skipped and counted in `overflow_points`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    pub grid_points: usize,
    pub max_rel_drift_eq5: f64,
    /// `None` when the start is singular.
    pub max_rel_drift_eq6: Option<f64>,
    pub max_rel_drift_detode: f64,
    pub max_rel_drift_eq2: Option<f64>,
    pub max_rel_drift_eq4: Option<f64>,
    /// Where the invertible-case series became inapplicable.
    pub first_noninvertible_time: Option<f64>,
    pub overflow_points: usize,
    pub terminal: TerminalValues,
}

impl DriftReport {
    /// Largest drift across all computed channels.
    pub fn worst_drift(&self) -> f64 {
        [
            Some(self.max_rel_drift_eq5),
            self.max_rel_drift_eq6,
            Some(self.max_rel_drift_detode),
            self.max_rel_drift_eq2,
            self.max_rel_drift_eq4,
        ]
        .into_iter()
        .flatten()
        .fold(0.0, f64::max)
    }
}

/// All identity series for one trajectory together with their drift report.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub det_direct: Vec<Sample>,
    pub det_ode: Vec<Sample>,
    pub eq5: Vec<Sample>,
    /// `None` when the start is singular.
    pub eq6: Option<Eq6Series>,
    pub eq2: Option<Vec<Sample>>,
    pub eq4: Option<Vec<Sample>>,
    pub report: DriftReport,
}

/// Relative drift of one channel point against `det_direct`.
pub fn rel_drift(channel: Sample, direct: Sample) -> Option<f64> {
    match (channel, direct) {
        (Sample::Value(c), Sample::Value(d)) => Some((c - d).abs() / d.abs().max(1.0)),
        _ => None,
    }
}

fn max_drift(channel: &[Sample], direct: &[Sample]) -> f64 {
    channel
        .iter()
        .zip(direct)
        .filter_map(|(c, d)| rel_drift(*c, *d))
        .fold(0.0, f64::max)
}

pub fn evaluate(s: &Scenario, traj: &Trajectory) -> Result<Evaluation, IdentityError> {
    evaluate_with(s, traj, Quadrature::default())
}

pub fn evaluate_with(
    s: &Scenario,
    traj: &Trajectory,
    rule: Quadrature,
) -> Result<Evaluation, IdentityError> {
    check_shape(s, traj)?;
    let det_direct: Vec<Sample> = traj
        .det_direct
        .iter()
        .map(|d| Sample::from_f64(*d))
        .collect();
    let det_ode: Vec<Sample> = traj.det_ode.iter().map(|d| Sample::from_f64(*d)).collect();
    let eq5 = eq5_det_with(s, traj, rule)?;
    let eq6 = match eq6_det_with(s, traj, rule) {
        Ok(series) => Some(series),
        Err(IdentityError::SingularStart) => None,
        Err(e) => return Err(e),
    };
    let eq2 = match eq2_det(s, traj) {
        Ok(v) => Some(v),
        Err(IdentityError::NotHomogeneous) => None,
        Err(e) => return Err(e),
    };
    let eq4 = match eq4_det_with(s, traj, rule) {
        Ok(v) => Some(v),
        Err(IdentityError::NotLeftOnly) => None,
        Err(e) => return Err(e),
    };

    let overflow_points = (0..traj.len())
        .filter(|&k| {
            det_direct[k].is_overflow()
                || det_ode[k].is_overflow()
                || eq5[k].is_overflow()
                || eq6
                    .as_ref()
                    .and_then(|e| e.values.get(k))
                    .is_some_and(|v| v.is_overflow())
        })
        .count();

    let last = traj.len() - 1;
    let report = DriftReport {
        grid_points: traj.len(),
        max_rel_drift_eq5: max_drift(&eq5, &det_direct),
        max_rel_drift_eq6: eq6.as_ref().map(|e| max_drift(&e.values, &det_direct)),
        max_rel_drift_detode: max_drift(&det_ode, &det_direct),
        max_rel_drift_eq2: eq2.as_ref().map(|v| max_drift(v, &det_direct)),
        max_rel_drift_eq4: eq4.as_ref().map(|v| max_drift(v, &det_direct)),
        first_noninvertible_time: eq6.as_ref().and_then(|e| e.first_noninvertible_time),
        overflow_points,
        terminal: TerminalValues {
            det_direct: det_direct[last],
            det_ode: det_ode[last],
            eq5: eq5[last],
            eq6: eq6.as_ref().and_then(|e| e.values.get(last).copied()),
            eq2: eq2.as_ref().map(|v| v[last]),
            eq4: eq4.as_ref().map(|v| v[last]),
        },
    };

    Ok(Evaluation {
        det_direct,
        det_ode,
        eq5,
        eq6,
        eq2,
        eq4,
        report,
    })
}

pub fn drift_report(s: &Scenario, traj: &Trajectory) -> Result<DriftReport, IdentityError> {
    evaluate(s, traj).map(|e| e.report)
}
