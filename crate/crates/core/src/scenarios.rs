//! Reference scenarios with known behaviour, plus seeded random generators
//! used by the property suites.

use std::f64::consts::PI;

use rand::Rng;

use crate::coeffs::{CoefficientSpec, Scenario, SolverConfig};
use crate::linalg::{self, Matrix};

fn constant(m: Matrix) -> CoefficientSpec {
    CoefficientSpec::Constant(m)
}

fn scaled_identity(n: usize, c: f64) -> Matrix {
    linalg::mat_scale(&Matrix::identity(n), c)
}

/// `A = B = 0`, `F = [[0, 1], [0, 0]]`, `X0 = I` on `[0, 2]`.
/// Exact solution `X(t) = [[1, t], [0, 1]]`, `det X = 1`.
pub fn nilpotent_forcing() -> Scenario {
    Scenario {
        n: 2,
        t0: 0.0,
        t_end: 2.0,
        x0: Matrix::identity(2),
        a: CoefficientSpec::Zero,
        b: CoefficientSpec::Zero,
        f: constant(Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap()),
        solver: SolverConfig::rk4(1e-3),
        seed: None,
    }
}

/// Scalar `x' = -(0.3 + 0.7) x`, `x(0) = 2` on `[0, 1]`.
pub fn scalar_decay() -> Scenario {
    Scenario {
        n: 1,
        t0: 0.0,
        t_end: 1.0,
        x0: Matrix::from_row_major(1, vec![2.0]).unwrap(),
        a: constant(Matrix::from_row_major(1, vec![0.3]).unwrap()),
        b: constant(Matrix::from_row_major(1, vec![0.7]).unwrap()),
        f: CoefficientSpec::Zero,
        solver: SolverConfig::rk4(1e-3),
        seed: None,
    }
}

/// `A = diag(1, 2)`, `B = diag(3, 4)`, `F = 0`, `X0 = I` on `[0, 0.2]`.
/// `det X(t) = exp(-10 t)`.
pub fn diagonal_homogeneous() -> Scenario {
    Scenario {
        n: 2,
        t0: 0.0,
        t_end: 0.2,
        x0: Matrix::identity(2),
        a: constant(Matrix::from_diagonal(&[1.0, 2.0]).unwrap()),
        b: constant(Matrix::from_diagonal(&[3.0, 4.0]).unwrap()),
        f: CoefficientSpec::Zero,
        solver: SolverConfig::rk4(1e-3),
        seed: None,
    }
}

/// Scalar `x' = 1`, `x(0) = -1` on `[0, 2]`: `x(t) = t - 1` crosses zero at
/// `t = 1`.
pub fn sign_crossing() -> Scenario {
    Scenario {
        n: 1,
        t0: 0.0,
        t_end: 2.0,
        x0: Matrix::from_row_major(1, vec![-1.0]).unwrap(),
        a: CoefficientSpec::Zero,
        b: CoefficientSpec::Zero,
        f: constant(Matrix::identity(1)),
        solver: SolverConfig::rk4(1e-3),
        seed: None,
    }
}

/// `A = B = -10 I` (n = 2), homogeneous, on `[0, 20]`: `X = exp(20 t) I`
/// stays representable while `det X = exp(40 t)` passes `exp(700)` at
/// `t = 17.5`.
pub fn blow_up() -> Scenario {
    Scenario {
        n: 2,
        t0: 0.0,
        t_end: 20.0,
        x0: Matrix::identity(2),
        a: constant(scaled_identity(2, -10.0)),
        b: constant(scaled_identity(2, -10.0)),
        f: CoefficientSpec::Zero,
        solver: SolverConfig::rk4(1e-2),
        seed: None,
    }
}

/// Uniform entries in `[-scale, scale]`.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> Matrix {
    let elems = (0..n * n).map(|_| rng.gen_range(-scale..=scale)).collect();
    Matrix::from_row_major(n, elems).expect("finite entries")
}

fn random_sinusoidal<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> CoefficientSpec {
    CoefficientSpec::Sinusoidal {
        offset: random_matrix(rng, n, scale),
        amplitude: random_matrix(rng, n, scale),
        omega: rng.gen_range(0.5..3.0),
        phase: rng.gen_range(0.0..2.0 * PI),
    }
}

fn random_polynomial<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> CoefficientSpec {
    let degree = rng.gen_range(0..=2);
    CoefficientSpec::Polynomial((0..=degree).map(|_| random_matrix(rng, n, scale)).collect())
}

fn random_smooth_coeff<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> CoefficientSpec {
    if rng.gen_bool(0.5) {
        random_sinusoidal(rng, n, scale)
    } else {
        random_polynomial(rng, n, scale)
    }
}

/// Sinusoidal `A`, polynomial `B`, polynomial or sinusoidal `F` (payload
/// entries up to 0.3), `X0` with entries in `[-1, 1]`, on `[0, 1]` with RK4 at `h = 1e-3`.
pub fn random_smooth<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Scenario {
    Scenario {
        n,
        t0: 0.0,
        t_end: 1.0,
        x0: random_matrix(rng, n, 1.0),
        a: random_sinusoidal(rng, n, 0.3),
        b: random_polynomial(rng, n, 0.3),
        f: random_smooth_coeff(rng, n, 0.3),
        solver: SolverConfig::rk4(1e-3),
        seed: None,
    }
}

/// [`random_smooth`] with `F = 0`.
pub fn random_homogeneous<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Scenario {
    let mut s = random_smooth(rng, n);
    s.f = CoefficientSpec::Zero;
    s
}

/// [`random_smooth`] with `B = 0`.
pub fn random_left_only<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Scenario {
    let mut s = random_smooth(rng, n);
    s.b = CoefficientSpec::Zero;
    s
}

/// `X0 = I` with small forcing, likely (not guaranteed) to stay invertible
/// on `[0, 1]`. Callers confirm `min |det|` after integrating.
pub fn random_near_identity<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Scenario {
    Scenario {
        n,
        t0: 0.0,
        t_end: 1.0,
        x0: Matrix::identity(n),
        a: random_smooth_coeff(rng, n, 0.3),
        b: random_smooth_coeff(rng, n, 0.3),
        f: random_smooth_coeff(rng, n, 0.1),
        solver: SolverConfig::rk4(1e-3),
        seed: None,
    }
}
