//! Seeded property suites behind `detflow check`.
//!
//! Each property runs a batch of randomized cases and records how many
//! failed, keeping the inputs of the first failure so it can be replayed.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coeffs::{Scenario, SolverConfig};
use crate::identity::{self, Sample};
use crate::linalg::{self, Axis, Matrix};
use crate::ode;
use crate::scenarios;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Linalg,
    Identities,
    Convergence,
    All,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linalg" => Ok(Suite::Linalg),
            "identities" => Ok(Suite::Identities),
            "convergence" => Ok(Suite::Convergence),
            "all" => Ok(Suite::All),
            other => Err(format!(
                "unknown suite `{other}` (expected linalg, identities, convergence or all)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl PropertyResult {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            cases: 0,
            failures: 0,
            first_failure: None,
        }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(describe());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

impl fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{status} {} ({} cases, {} failed)",
            self.name, self.cases, self.failures
        )?;
        if let Some(case) = &self.first_failure {
            write!(f, "\n  first failure: {case}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub seed: u64,
    pub results: Vec<PropertyResult>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(PropertyResult::passed)
    }

    pub fn passed_count(&self) -> usize {
        self.results.iter().filter(|r| r.passed()).count()
    }

    pub fn failed_count(&self) -> usize {
        self.results.len() - self.passed_count()
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> SuiteReport {
    let mut results = Vec::new();
    if matches!(suite, Suite::Linalg | Suite::All) {
        results.extend(linalg_suite_with(seed, linalg::adjugate));
    }
    if matches!(suite, Suite::Identities | Suite::All) {
        results.extend(identities_suite(seed));
    }
    if matches!(suite, Suite::Convergence | Suite::All) {
        results.extend(convergence_suite(seed));
    }
    SuiteReport { seed, results }
}

fn describe_matrices(ms: &[(&str, &Matrix)]) -> String {
    ms.iter()
        .map(|(name, m)| format!("{name}(n={})={:?}", m.dim(), m.as_slice()))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Linear-algebra identities, with the adjugate implementation injectable so
/// a deliberately broken one can be shown to fail.
pub fn linalg_suite_with(seed: u64, adjugate: fn(&Matrix) -> Matrix) -> Vec<PropertyResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut adj_identity = PropertyResult::new("adjugate identity X X# = X# X = det(X) I");
    for _ in 0..1000 {
        let n = rng.gen_range(1..=6);
        let x = scenarios::random_matrix(&mut rng, n, 1.0);
        let adj = adjugate(&x);
        let target = linalg::mat_scale(&Matrix::identity(n), linalg::det(&x));
        let bound = 1e-10 * x.max_norm().powi(n as i32).max(1.0);
        let left = linalg::mat_sub(&linalg::mat_mul(&x, &adj).unwrap(), &target).unwrap();
        let right = linalg::mat_sub(&linalg::mat_mul(&adj, &x).unwrap(), &target).unwrap();
        let worst = left.max_norm().max(right.max_norm());
        adj_identity.record(worst <= bound, || {
            format!(
                "residual {worst:e} > {bound:e}; {}",
                describe_matrices(&[("X", &x)])
            )
        });
    }

    let mut replaced = PropertyResult::new("replacement sums: rows = columns = tr(X# F)");
    for _ in 0..1000 {
        let n = rng.gen_range(2..=5);
        let x = scenarios::random_matrix(&mut rng, n, 1.0);
        let f = scenarios::random_matrix(&mut rng, n, 1.0);
        let tr = linalg::trace_of_product(&adjugate(&x), &f).unwrap();
        let rows = linalg::replaced_det_sum(&x, &f, Axis::Rows).unwrap();
        let cols = linalg::replaced_det_sum(&x, &f, Axis::Columns).unwrap();
        let tol = 1e-11 * tr.abs().max(1.0);
        let ok = (rows - cols).abs() <= tol && (rows - tr).abs() <= tol && (cols - tr).abs() <= tol;
        replaced.record(ok, || {
            format!(
                "rows={rows:e} cols={cols:e} tr={tr:e}; {}",
                describe_matrices(&[("X", &x), ("F", &f)])
            )
        });
    }

    let mut cyclic = PropertyResult::new("trace cyclic tr(XY) = tr(YX)");
    let mut linear = PropertyResult::new("trace linear");
    for _ in 0..1000 {
        let n = rng.gen_range(1..=6);
        let x = scenarios::random_matrix(&mut rng, n, 1.0);
        let y = scenarios::random_matrix(&mut rng, n, 1.0);
        let xy = linalg::trace(&linalg::mat_mul(&x, &y).unwrap());
        let yx = linalg::trace(&linalg::mat_mul(&y, &x).unwrap());
        cyclic.record((xy - yx).abs() <= 1e-12 * xy.abs().max(1.0), || {
            describe_matrices(&[("X", &x), ("Y", &y)])
        });
        let (l, mu) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let combo = linalg::mat_add(&linalg::mat_scale(&x, l), &linalg::mat_scale(&y, mu)).unwrap();
        let lhs = linalg::trace(&combo);
        let rhs = l * linalg::trace(&x) + mu * linalg::trace(&y);
        linear.record((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0), || {
            format!(
                "l={l} mu={mu}; {}",
                describe_matrices(&[("X", &x), ("Y", &y)])
            )
        });
    }

    let mut duplicated = PropertyResult::new("duplicated row gives det = 0 exactly");
    for _ in 0..200 {
        let n = rng.gen_range(2..=6);
        let mut x = scenarios::random_matrix(&mut rng, n, 1.0);
        let src = rng.gen_range(0..n);
        let dst = (src + rng.gen_range(1..n)) % n;
        for c in 0..n {
            x[(dst, c)] = x[(src, c)];
        }
        let d = linalg::det(&x);
        duplicated.record(d == 0.0, || {
            format!("det={d:e}; {}", describe_matrices(&[("X", &x)]))
        });
    }

    let mut singular_adj = PropertyResult::new("adjugate identity on singular matrices");
    for _ in 0..200 {
        let n = rng.gen_range(2..=6);
        let mut x = scenarios::random_matrix(&mut rng, n, 1.0);
        // last row = sum of the others: rank <= n - 1
        for c in 0..n {
            x[(n - 1, c)] = (0..n - 1).map(|r| x[(r, c)]).sum();
        }
        let adj = adjugate(&x);
        let d = linalg::det(&x);
        let target = linalg::mat_scale(&Matrix::identity(n), d);
        let bound = 1e-10 * x.max_norm().powi(n as i32).max(1.0);
        let left = linalg::mat_sub(&linalg::mat_mul(&x, &adj).unwrap(), &target).unwrap();
        let right = linalg::mat_sub(&linalg::mat_mul(&adj, &x).unwrap(), &target).unwrap();
        let oracle = linalg::cofactor_adjugate(&x);
        let gap = linalg::mat_sub(&adj, &oracle).unwrap().max_norm();
        let ok = left.max_norm() <= bound && right.max_norm() <= bound && gap <= 1e-10;
        singular_adj.record(ok, || describe_matrices(&[("X", &x)]));
    }

    vec![
        adj_identity,
        replaced,
        cyclic,
        linear,
        duplicated,
        singular_adj,
    ]
}

fn direct_samples(traj: &ode::Trajectory) -> Vec<Sample> {
    traj.det_direct
        .iter()
        .map(|d| Sample::from_f64(*d))
        .collect()
}

fn pointwise_gap(a: &[Sample], b: &[Sample]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| match (x.value(), y.value()) {
            (Some(x), Some(y)) => (x - y).abs() / y.abs().max(1.0),
            _ => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

fn describe_scenario(label: &str, s: &Scenario) -> String {
    format!("{label}: {s:?}")
}

fn identities_suite(seed: u64) -> Vec<PropertyResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1de7);

    let mut eq5 = PropertyResult::new("general identity drift <= 1e-6 (rk4 h = 1e-3)");
    let mut channels = PropertyResult::new("det ODE channel agrees with det(X) to 1e-6");
    let mut jacobi = PropertyResult::new("Jacobi formula vs central difference <= 1e-5");
    for _ in 0..10 {
        let n = rng.gen_range(1..=5);
        let s = scenarios::random_smooth(&mut rng, n);
        match ode::integrate(&s) {
            Ok(traj) => {
                let report = identity::drift_report(&s, &traj);
                let drift = report
                    .as_ref()
                    .map_or(f64::INFINITY, |r| r.max_rel_drift_eq5);
                eq5.record(drift <= 1e-6, || {
                    describe_scenario(&format!("drift {drift:e}"), &s)
                });
                let ode_drift = report.map_or(f64::INFINITY, |r| r.max_rel_drift_detode);
                channels.record(ode_drift <= 1e-6, || {
                    describe_scenario(&format!("drift {ode_drift:e}"), &s)
                });
                let defect = ode::jacobi_defect(&traj, &s).unwrap_or(f64::INFINITY);
                jacobi.record(defect <= 1e-5, || {
                    describe_scenario(&format!("defect {defect:e}"), &s)
                });
            }
            Err(e) => {
                for p in [&mut eq5, &mut channels, &mut jacobi] {
                    p.record(false, || describe_scenario(&e.to_string(), &s));
                }
            }
        }
    }

    let mut eq2 = PropertyResult::new("homogeneous closed form vs det(X) <= 1e-8");
    let mut eq5_eq2 = PropertyResult::new("general identity reduces to homogeneous form");
    for _ in 0..10 {
        let n = rng.gen_range(1..=5);
        let s = scenarios::random_homogeneous(&mut rng, n);
        let outcome = ode::integrate(&s)
            .map_err(|e| e.to_string())
            .and_then(|traj| {
                let e2 = identity::eq2_det(&s, &traj).map_err(|e| e.to_string())?;
                let e5 = identity::eq5_det(&s, &traj).map_err(|e| e.to_string())?;
                Ok((
                    pointwise_gap(&e2, &direct_samples(&traj)),
                    pointwise_gap(&e5, &e2),
                ))
            });
        let (gap, reduction) = outcome.clone().unwrap_or((f64::INFINITY, f64::INFINITY));
        eq2.record(gap <= 1e-8, || {
            describe_scenario(&format!("gap {gap:e}"), &s)
        });
        eq5_eq2.record(reduction <= 1e-12, || {
            describe_scenario(&format!("gap {reduction:e}"), &s)
        });
    }

    let mut eq4 = PropertyResult::new("left-only identity equals general identity (B = 0)");
    for _ in 0..10 {
        let n = rng.gen_range(1..=5);
        let s = scenarios::random_left_only(&mut rng, n);
        let gap = ode::integrate(&s)
            .ok()
            .and_then(|traj| {
                let e4 = identity::eq4_det(&s, &traj).ok()?;
                let e5 = identity::eq5_det(&s, &traj).ok()?;
                Some(pointwise_gap(&e4, &e5))
            })
            .unwrap_or(f64::INFINITY);
        eq4.record(gap <= 1e-11, || {
            describe_scenario(&format!("gap {gap:e}"), &s)
        });
    }

    let mut eq6 = PropertyResult::new("invertible-case identity agrees with general identity");
    let mut sign = PropertyResult::new("invertible-case identity keeps the sign of det(X0)");
    let mut attempts = 0;
    while eq6.cases < 10 && attempts < 100 {
        attempts += 1;
        let n = rng.gen_range(1..=5);
        let mut s = scenarios::random_near_identity(&mut rng, n);
        if rng.gen_bool(0.5) {
            // flip the sign of det(X0) by negating one row
            s.x0[(0, 0)] = -1.0;
        }
        let Ok(traj) = ode::integrate(&s) else {
            continue;
        };
        if traj.det_direct.iter().any(|d| d.abs() < 0.1) {
            continue;
        }
        let (Ok(e5), Ok(e6)) = (identity::eq5_det(&s, &traj), identity::eq6_det(&s, &traj)) else {
            eq6.record(false, || describe_scenario("evaluation failed", &s));
            continue;
        };
        let complete = e6.values.len() == traj.len();
        let gap = if complete {
            pointwise_gap(&e6.values, &e5)
        } else {
            f64::INFINITY
        };
        eq6.record(gap <= 1e-7, || {
            describe_scenario(&format!("gap {gap:e}"), &s)
        });
        let s0 = traj.det_direct[0].signum();
        let kept = e6
            .values
            .iter()
            .all(|v| v.value().is_some_and(|v| v.signum() == s0));
        sign.record(kept, || describe_scenario("sign flipped", &s));
    }

    let mut crossing =
        PropertyResult::new("sign crossing: general identity tracks det through zero");
    let s = scenarios::sign_crossing();
    let (ok, why) = match ode::integrate(&s) {
        Ok(traj) => {
            let e5 = identity::eq5_det(&s, &traj).unwrap_or_default();
            let abs_err = e5
                .iter()
                .zip(&traj.times)
                .map(|(v, t)| v.value().map_or(f64::INFINITY, |v| (v - (t - 1.0)).abs()))
                .fold(0.0, f64::max);
            let flag = identity::eq6_det(&s, &traj)
                .ok()
                .and_then(|e| e.first_noninvertible_time);
            let step = traj.times[1] - traj.times[0];
            let flagged = flag.is_some_and(|t| (t - 1.0).abs() <= step * (1.0 + 1e-9));
            (
                abs_err <= 1e-8 && flagged,
                format!("abs err {abs_err:e}, flagged at {flag:?}"),
            )
        }
        Err(e) => (false, e.to_string()),
    };
    crossing.record(ok, || why);

    vec![
        eq5, channels, jacobi, eq2, eq5_eq2, eq4, eq6, sign, crossing,
    ]
}

/// Terminal max-norm error of the diagonal scenario on `[0, 1]` at step `h`.
pub fn diagonal_terminal_error(h: f64) -> f64 {
    let mut s = scenarios::diagonal_homogeneous();
    s.t_end = 1.0;
    s.solver = SolverConfig::rk4(h);
    let traj = ode::integrate(&s).expect("diagonal scenario integrates");
    let exact = Matrix::from_diagonal(&[(-4.0f64).exp(), (-6.0f64).exp()]).unwrap();
    linalg::mat_sub(traj.terminal_x(), &exact)
        .unwrap()
        .max_norm()
}

fn convergence_suite(seed: u64) -> Vec<PropertyResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0de);

    let mut order = PropertyResult::new("rk4 error ratio h -> h/2 within [12, 20]");
    for h in [1e-2, 5e-3] {
        let ratio = diagonal_terminal_error(h) / diagonal_terminal_error(h / 2.0);
        order.record((12.0..=20.0).contains(&ratio), || {
            format!("h={h}: ratio {ratio}")
        });
    }

    let mut refine = PropertyResult::new("general identity drift shrinks >= 3.5x when h halves");
    for _ in 0..5 {
        let n = rng.gen_range(1..=5);
        let mut s = scenarios::random_smooth(&mut rng, n);
        let drift_at = |s: &Scenario| {
            ode::integrate(s)
                .ok()
                .and_then(|t| identity::drift_report(s, &t).ok())
                .map_or(f64::NAN, |r| r.max_rel_drift_eq5)
        };
        let coarse = drift_at(&s);
        s.solver = SolverConfig::rk4(5e-4);
        let fine = drift_at(&s);
        let ratio = coarse / fine;
        refine.record(ratio >= 3.5, || {
            describe_scenario(&format!("coarse {coarse:e} fine {fine:e}"), &s)
        });
    }

    let mut residual = PropertyResult::new("operator residual is second order in the grid step");
    let mut s = scenarios::diagonal_homogeneous();
    let r1 = ode::integrate(&s)
        .ok()
        .and_then(|t| ode::operator_residual(&t, &s).ok());
    s.solver = SolverConfig::rk4(5e-4);
    let r2 = ode::integrate(&s)
        .ok()
        .and_then(|t| ode::operator_residual(&t, &s).ok());
    let ratio = match (r1, r2) {
        (Some(a), Some(b)) => a / b,
        _ => f64::NAN,
    };
    residual.record(
        (3.5..=4.5).contains(&ratio) && r1.is_some_and(|r| r <= 1e-4),
        || format!("residuals {r1:?} / {r2:?}"),
    );

    vec![order, refine, residual]
}
