//! Numerical integration of the two-sided matrix ODE
//!
//! ```text
//! dX/dt + A(t) X + X B(t) = F(t),    X(t0) = X0
//! ```
//!
//! with the determinant of the solution tracked through independent
//! channels: `det X(t)` computed from the sampled matrix, a scalar ODE for
//! the determinant integrated alongside `X`, and closed-form
//! integrating-factor identities evaluated on the trajectory grid.
//!
//! - [`linalg`]: dense matrices, determinant, inverse, adjugate.
//! - [`coeffs`]: coefficient functions and the [`Scenario`] model.
//! - [`ode`]: fixed-step RK4 and adaptive RKF45 producing a [`Trajectory`].
//! - [`identity`]: determinant identities and [`DriftReport`].
//! - [`cli`]: scenario files, CSV output, the `detflow` command.
//!
//! ```
//! use detflow::{identity, ode, scenarios};
//!
//! let s = scenarios::diagonal_homogeneous();
//! let traj = ode::integrate(&s).unwrap();
//! let report = identity::drift_report(&s, &traj).unwrap();
//! assert!(report.max_rel_drift_eq5 < 1e-8);
//! ```

pub mod checks;
pub mod cli;
pub mod coeffs;
pub mod error;
pub mod identity;
pub mod linalg;
pub mod ode;
pub mod quad;
pub mod scenarios;

pub use coeffs::{CoefficientSpec, Method, Scenario, SolverConfig};
pub use error::{
    CoeffError, IdentityError, IntegrationError, LinalgError, LoadError, ParseError,
    ValidationError,
};
pub use identity::{DriftReport, Evaluation, Sample};
pub use linalg::{Axis, Matrix};
pub use ode::Trajectory;
