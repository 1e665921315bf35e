//! Cumulative quadrature over sampled grids.
//!
//! The integrating-factor variants compute `exp(-C_k) * Q_k` where `Q_k` is
//! the cumulative integral of `g * exp(C)`, without ever forming `exp(C)`
//! on its own; only differences `C_j - C_k` between nearby nodes are
//! exponentiated.

/// Which composite rule to use on a sampled grid.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Quadrature {
    #[default]
    Trapezoid,
    /// Composite Simpson. Falls back to trapezoid unless the grid is uniform
    /// with an even number of intervals.
    Simpson,
}

const UNIFORM_RTOL: f64 = 1e-9;

/// Common spacing of `times`, if all intervals agree to a relative 1e-9.
pub fn uniform_step(times: &[f64]) -> Option<f64> {
    if times.len() < 2 {
        return None;
    }
    let m = times.len() - 1;
    let h = (times[m] - times[0]) / m as f64;
    times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= UNIFORM_RTOL * h.abs())
        .then_some(h)
}

impl Quadrature {
    /// The rule actually applied on `times`.
    pub fn resolve(self, times: &[f64]) -> Quadrature {
        match self {
            Quadrature::Simpson
                if times.len() >= 3
                    && (times.len() - 1).is_multiple_of(2)
                    && uniform_step(times).is_some() =>
            {
                Quadrature::Simpson
            }
            _ => Quadrature::Trapezoid,
        }
    }
}

/// `out[k] = integral of values from times[0] to times[k]`.
pub fn cumulative(times: &[f64], values: &[f64], rule: Quadrature) -> Vec<f64> {
    let zeros = vec![0.0; times.len()];
    cumulative_weighted(times, values, &zeros, rule)
}

/// `out[k] = exp(-log_weight[k]) * integral_{t0}^{t_k} values * exp(log_weight)`.
///
/// All three slices must have the same length.
pub fn cumulative_weighted(
    times: &[f64],
    values: &[f64],
    log_weight: &[f64],
    rule: Quadrature,
) -> Vec<f64> {
    assert_eq!(times.len(), values.len());
    assert_eq!(times.len(), log_weight.len());
    let m = times.len();
    let mut out = vec![0.0; m];
    if m < 2 {
        return out;
    }
    // exp(C_j - C_k)
    let shift = |j: usize, k: usize| {
        let d = log_weight[j] - log_weight[k];
        if d == 0.0 {
            1.0
        } else {
            d.exp()
        }
    };

    match rule.resolve(times) {
        Quadrature::Trapezoid => {
            for k in 1..m {
                let h = times[k] - times[k - 1];
                let e = shift(k - 1, k);
                out[k] = e * out[k - 1] + 0.5 * h * (values[k - 1] * e + values[k]);
            }
        }
        Quadrature::Simpson => {
            let h = (times[m - 1] - times[0]) / (m - 1) as f64;
            for k in (2..m).step_by(2) {
                out[k] = shift(k - 2, k) * out[k - 2]
                    + h / 3.0
                        * (values[k - 2] * shift(k - 2, k)
                            + 4.0 * values[k - 1] * shift(k - 1, k)
                            + values[k]);
            }
            // first interval from the three-point rule, later odd nodes by 3/8
            out[1] = h / 12.0
                * (5.0 * values[0] * shift(0, 1) + 8.0 * values[1] - values[2] * shift(2, 1));
            for k in (3..m).step_by(2) {
                out[k] = shift(k - 3, k) * out[k - 3]
                    + 3.0 * h / 8.0
                        * (values[k - 3] * shift(k - 3, k)
                            + 3.0 * values[k - 2] * shift(k - 2, k)
                            + 3.0 * values[k - 1] * shift(k - 1, k)
                            + values[k]);
            }
        }
    }
    out
}
