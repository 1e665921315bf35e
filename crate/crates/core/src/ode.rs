//! Integration of `X' = F - A X - X B` together with two scalar channels:
//! the determinant, evolved by its own linear ODE
//! `d' = tr(adj(X) F) - tr(A + B) d`, and the running integral of
//! `tr(A + B)`.
//!
//! State layout: `n*n` entries of `X` row-major, then the determinant
//! channel, then the cumulative trace.

use crate::coeffs::{Method, Scenario};
use crate::error::{CoeffError, IntegrationError};
use crate::linalg::{self, Matrix};

/// Integrator output sampled on the accepted-step grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub x_samples: Vec<Matrix>,
    /// `det(X(t_k))` from the sampled matrix.
    pub det_direct: Vec<f64>,
    /// Determinant from the coupled scalar ODE.
    pub det_ode: Vec<f64>,
    /// Integral of `tr(A + B)` from `t0` to `t_k`.
    pub cum_trace: Vec<f64>,
    pub step_stats: StepStats,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x_samples.first().map_or(0, Matrix::dim)
    }

    pub fn terminal_x(&self) -> &Matrix {
        self.x_samples
            .last()
            .expect("trajectory has at least one sample")
    }
}

/// `dX/dt = F(t) - A(t) X - X B(t)`.
pub fn rhs(t: f64, x: &Matrix, s: &Scenario) -> Result<Matrix, CoeffError> {
    let coeffs = Coefficients::at(t, s)?;
    Ok(coeffs.x_rate(x))
}

/// `tr(adj(X) F(t)) - tr(A(t) + B(t)) * d`.
pub fn det_rhs(t: f64, x: &Matrix, d: f64, s: &Scenario) -> Result<f64, CoeffError> {
    let coeffs = Coefficients::at(t, s)?;
    Ok(coeffs.det_rate(x, d))
}

struct Coefficients {
    a: Matrix,
    b: Matrix,
    f: Matrix,
    trace_sum: f64,
}

impl Coefficients {
    fn at(t: f64, s: &Scenario) -> Result<Self, CoeffError> {
        let a = s.eval_a(t)?;
        let b = s.eval_b(t)?;
        let f = s.eval_f(t)?;
        let trace_sum = linalg::trace(&a) + linalg::trace(&b);
        Ok(Self { a, b, f, trace_sum })
    }

    fn x_rate(&self, x: &Matrix) -> Matrix {
        let n = x.dim();
        let (a, b, f) = (self.a.as_slice(), self.b.as_slice(), self.f.as_slice());
        let xs = x.as_slice();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut ax = 0.0;
                let mut xb = 0.0;
                for k in 0..n {
                    ax += a[i * n + k] * xs[k * n + j];
                    xb += xs[i * n + k] * b[k * n + j];
                }
                out[i * n + j] = f[i * n + j] - ax - xb;
            }
        }
        Matrix::from_raw(n, out)
    }

    fn det_rate(&self, x: &Matrix, d: f64) -> f64 {
        let adj = linalg::adjugate(x);
        let forcing = linalg::trace_of_product(&adj, &self.f).expect("same dimension");
        forcing - self.trace_sum * d
    }
}

/// Full-state derivative for the coupled system.
fn state_rate(
    t: f64,
    y: &[f64],
    n: usize,
    s: &Scenario,
    out: &mut [f64],
) -> Result<(), CoeffError> {
    let nn = n * n;
    let x = Matrix::from_raw(n, y[..nn].to_vec());
    let coeffs = Coefficients::at(t, s)?;
    out[..nn].copy_from_slice(coeffs.x_rate(&x).as_slice());
    out[nn] = if x.is_finite() {
        coeffs.det_rate(&x, y[nn])
    } else {
        f64::NAN
    };
    out[nn + 1] = coeffs.trace_sum;
    Ok(())
}

struct Recorder {
    n: usize,
    traj: Trajectory,
}

impl Recorder {
    fn new(s: &Scenario) -> (Self, Vec<f64>) {
        let n = s.n;
        let d0 = linalg::det(&s.x0);
        let mut y = s.x0.as_slice().to_vec();
        y.push(d0);
        y.push(0.0);
        let traj = Trajectory {
            times: vec![s.t0],
            x_samples: vec![s.x0.clone()],
            det_direct: vec![d0],
            det_ode: vec![d0],
            cum_trace: vec![0.0],
            step_stats: StepStats::default(),
        };
        (Self { n, traj }, y)
    }

    fn push(&mut self, t: f64, y: &[f64]) -> Result<(), IntegrationError> {
        let nn = self.n * self.n;
        if y[..nn].iter().any(|v| !v.is_finite()) {
            return Err(IntegrationError::NonFiniteState { t });
        }
        let x = Matrix::from_raw(self.n, y[..nn].to_vec());
        self.traj.times.push(t);
        self.traj.det_direct.push(linalg::det(&x));
        self.traj.x_samples.push(x);
        self.traj.det_ode.push(y[nn]);
        self.traj.cum_trace.push(y[nn + 1]);
        self.traj.step_stats.accepted += 1;
        Ok(())
    }
}

/// Integrates the scenario from `t0` to `t_end`.
///
/// `Rk4 { h }` takes `ceil((t_end - t0) / h)` equal steps. `Rkf45 { tol }`
/// accepts a step when the max over state components of
/// `|err_i| / max(1, |y_i|)` is at most `tol`, and records every accepted
/// step.
pub fn integrate(s: &Scenario) -> Result<Trajectory, IntegrationError> {
    match s.solver.method {
        Method::Rk4 { h } => integrate_rk4(s, h),
        Method::Rkf45 { tol } => integrate_rkf45(s, tol),
    }
}

/// Number of uniform RK4 steps for a span and nominal step. Ratios within
/// rounding of an integer are not bumped up by `ceil`.
pub fn rk4_step_count(span: f64, h: f64) -> usize {
    let r = span / h;
    let nearest = r.round();
    let steps = if (r - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        r.ceil()
    };
    (steps as usize).max(1)
}

fn integrate_rk4(s: &Scenario, h_nominal: f64) -> Result<Trajectory, IntegrationError> {
    let span = s.t_end - s.t0;
    let steps = rk4_step_count(span, h_nominal);
    let h = span / steps as f64;
    let n = s.n;
    let dim = n * n + 2;

    let (mut rec, mut y) = Recorder::new(s);
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];

    for step in 0..steps {
        let t = s.t0 + step as f64 * h;
        state_rate(t, &y, n, s, &mut k1)?;
        axpy(&y, 0.5 * h, &k1, &mut tmp);
        state_rate(t + 0.5 * h, &tmp, n, s, &mut k2)?;
        axpy(&y, 0.5 * h, &k2, &mut tmp);
        state_rate(t + 0.5 * h, &tmp, n, s, &mut k3)?;
        axpy(&y, h, &k3, &mut tmp);
        state_rate(t + h, &tmp, n, s, &mut k4)?;
        for i in 0..dim {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = if step + 1 == steps {
            s.t_end
        } else {
            s.t0 + (step + 1) as f64 * h
        };
        rec.push(t_next, &y)?;
    }
    Ok(rec.traj)
}

fn axpy(y: &[f64], a: f64, x: &[f64], out: &mut [f64]) {
    for ((o, yi), xi) in out.iter_mut().zip(y).zip(x) {
        *o = yi + a * xi;
    }
}

// Fehlberg 4(5) tableau.
const C: [f64; 6] = [0.0, 1.0 / 4.0, 3.0 / 8.0, 12.0 / 13.0, 1.0, 1.0 / 2.0];
const A: [[f64; 5]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 4.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
    [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
    [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
    [
        -8.0 / 27.0,
        2.0,
        -3544.0 / 2565.0,
        1859.0 / 4104.0,
        -11.0 / 40.0,
    ],
];
const B5: [f64; 6] = [
    16.0 / 135.0,
    0.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
];
const B4: [f64; 6] = [
    25.0 / 216.0,
    0.0,
    1408.0 / 2565.0,
    2197.0 / 4104.0,
    -1.0 / 5.0,
    0.0,
];

const SAFETY: f64 = 0.9;
const MIN_SHRINK: f64 = 0.2;
const MAX_GROW: f64 = 5.0;

fn integrate_rkf45(s: &Scenario, tol: f64) -> Result<Trajectory, IntegrationError> {
    let span = s.t_end - s.t0;
    let h_min = 1e-14 * span;
    let n = s.n;
    let nn = n * n;
    let dim = nn + 2;

    let (mut rec, mut y) = Recorder::new(s);
    let mut k = vec![vec![0.0; dim]; 6];
    let mut stage = vec![0.0; dim];
    let mut y5 = vec![0.0; dim];

    let mut t = s.t0;
    let mut h = (span / 100.0).clamp(1e-12, span);

    while t < s.t_end {
        let remaining = s.t_end - t;
        let last = h >= remaining || remaining - h <= 1e-12 * span;
        if last {
            h = remaining;
        }
        if h < h_min {
            return Err(IntegrationError::StepSizeUnderflow { t, h });
        }

        for i in 0..6 {
            stage.copy_from_slice(&y);
            for (j, kj) in k.iter().enumerate().take(i) {
                let a = A[i][j];
                if a != 0.0 {
                    for (st, kv) in stage.iter_mut().zip(kj) {
                        *st += h * a * kv;
                    }
                }
            }
            state_rate(t + C[i] * h, &stage, n, s, &mut k[i])?;
        }

        let mut err = 0.0_f64;
        for c in 0..dim {
            let mut high = 0.0;
            let mut diff = 0.0;
            for i in 0..6 {
                high += B5[i] * k[i][c];
                diff += (B5[i] - B4[i]) * k[i][c];
            }
            y5[c] = y[c] + h * high;
            let e = (h * diff).abs() / y[c].abs().max(1.0);
            // the determinant channel may overflow on its own; X is checked on record
            if c >= nn && !(y[c].is_finite() && y5[c].is_finite()) {
                continue;
            }
            err = if e.is_nan() {
                f64::INFINITY
            } else {
                err.max(e)
            };
        }
        let ratio = err / tol;

        if ratio <= 1.0 {
            t = if last { s.t_end } else { t + h };
            std::mem::swap(&mut y, &mut y5);
            rec.push(t, &y)?;
            let grow = if ratio == 0.0 {
                MAX_GROW
            } else {
                (SAFETY * ratio.powf(-0.2)).clamp(MIN_SHRINK, MAX_GROW)
            };
            h *= grow;
        } else {
            rec.traj.step_stats.rejected += 1;
            if !ratio.is_finite() && y[..nn].iter().any(|v| !v.is_finite()) {
                return Err(IntegrationError::NonFiniteState { t });
            }
            let shrink = if ratio.is_finite() {
                (SAFETY * ratio.powf(-0.2)).clamp(MIN_SHRINK, 1.0)
            } else {
                MIN_SHRINK
            };
            h *= shrink;
        }
    }
    Ok(rec.traj)
}

/// Largest defect `||X' + A X + X B - F||_max` over interior grid points,
/// with `X'` from the three-point (central on uniform grids) difference.
pub fn operator_residual(traj: &Trajectory, s: &Scenario) -> Result<f64, CoeffError> {
    let mut worst = 0.0_f64;
    for k in 1..traj.len().saturating_sub(1) {
        let deriv = three_point_derivative(
            &traj.times[k - 1..=k + 1],
            [
                traj.x_samples[k - 1].as_slice(),
                traj.x_samples[k].as_slice(),
                traj.x_samples[k + 1].as_slice(),
            ],
        );
        let rate = rhs(traj.times[k], &traj.x_samples[k], s)?;
        for (d, r) in deriv.iter().zip(rate.as_slice()) {
            worst = worst.max((d - r).abs());
        }
    }
    Ok(worst)
}

/// Largest relative gap between the central difference of `det_direct` and
/// `tr(adj(X) X')` at interior points, relative to `max(1, |tr(adj(X) X')|)`.
pub fn jacobi_defect(traj: &Trajectory, s: &Scenario) -> Result<f64, CoeffError> {
    let mut worst = 0.0_f64;
    for k in 1..traj.len().saturating_sub(1) {
        let fd = three_point_derivative(
            &traj.times[k - 1..=k + 1],
            [
                &traj.det_direct[k - 1..k],
                &traj.det_direct[k..k + 1],
                &traj.det_direct[k + 1..k + 2],
            ],
        )[0];
        let x = &traj.x_samples[k];
        let rate = rhs(traj.times[k], x, s)?;
        let jacobi = linalg::trace_of_product(&linalg::adjugate(x), &rate).expect("same dimension");
        worst = worst.max((fd - jacobi).abs() / jacobi.abs().max(1.0));
    }
    Ok(worst)
}

fn three_point_derivative(t: &[f64], y: [&[f64]; 3]) -> Vec<f64> {
    let hm = t[1] - t[0];
    let hp = t[2] - t[1];
    let denom = hm * hp * (hm + hp);
    y[0].iter()
        .zip(y[1])
        .zip(y[2])
        .map(|((prev, mid), next)| {
            (hm * hm * next - hp * hp * prev + (hp * hp - hm * hm) * mid) / denom
        })
        .collect()
}
