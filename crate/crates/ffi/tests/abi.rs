use std::ffi::{CStr, CString};
use std::ptr;

use detflow_ffi::*;

const NILPOTENT: &str = r#"{
    "n": 2, "t0": 0.0, "t_end": 2.0,
    "x0": [1.0, 0.0, 0.0, 1.0],
    "f": {"kind": "constant", "value": [0.0, 1.0, 0.0, 0.0]},
    "solver": {"method": "rk4", "h": 0.001}
}"#;

const BLOW_UP: &str = r#"{
    "n": 2, "t0": 0.0, "t_end": 20.0,
    "x0": [1.0, 0.0, 0.0, 1.0],
    "a": {"kind": "constant", "value": [-10.0, 0.0, 0.0, -10.0]},
    "b": {"kind": "constant", "value": [-10.0, 0.0, 0.0, -10.0]},
    "solver": {"method": "rk4", "h": 0.01}
}"#;

fn last_error() -> String {
    let p = detflow_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn scenario(json: &str) -> *mut DetflowScenario {
    let c = CString::new(json).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { detflow_scenario_from_json(c.as_ptr(), &mut out) };
    assert_eq!(status, DetflowStatus::Ok, "{}", last_error());
    out
}

fn integrate(s: *const DetflowScenario) -> *mut DetflowTrajectory {
    let mut out = ptr::null_mut();
    let status = unsafe { detflow_integrate(s, &mut out) };
    assert_eq!(status, DetflowStatus::Ok, "{}", last_error());
    out
}

fn channel(t: *const DetflowTrajectory, ch: DetflowChannel) -> Vec<f64> {
    let len = unsafe { detflow_trajectory_len(t) };
    let mut buf = vec![0.0; len];
    let status = unsafe { detflow_trajectory_channel(t, ch, buf.as_mut_ptr(), len) };
    assert_eq!(status, DetflowStatus::Ok, "{}", last_error());
    buf
}

#[test]
fn nilpotent_round_trip() {
    let s = scenario(NILPOTENT);
    assert_eq!(unsafe { detflow_scenario_dim(s) }, 2);
    let t = integrate(s);
    assert_eq!(unsafe { detflow_trajectory_len(t) }, 2001);
    assert_eq!(unsafe { detflow_trajectory_dim(t) }, 2);

    let times = channel(t, DetflowChannel::Times);
    assert_eq!(times[0], 0.0);
    assert_eq!(*times.last().unwrap(), 2.0);
    for ch in [
        DetflowChannel::DetDirect,
        DetflowChannel::DetOde,
        DetflowChannel::Eq5,
        DetflowChannel::Eq6,
        DetflowChannel::Eq4,
    ] {
        for v in channel(t, ch) {
            assert!((v - 1.0).abs() <= 1e-10, "{ch:?}: {v}");
        }
    }
    assert!(channel(t, DetflowChannel::CumTrace)
        .iter()
        .all(|&c| c == 0.0));

    let mut x = [0.0; 4];
    let last = unsafe { detflow_trajectory_len(t) } - 1;
    let status = unsafe { detflow_trajectory_matrix(t, last, x.as_mut_ptr(), 4) };
    assert_eq!(status, DetflowStatus::Ok);
    assert!((x[1] - 2.0).abs() <= 1e-12 && x[0] == 1.0 && x[2] == 0.0 && x[3] == 1.0);

    let mut report = std::mem::MaybeUninit::<DetflowDriftReport>::uninit();
    let status = unsafe { detflow_trajectory_report(t, report.as_mut_ptr()) };
    assert_eq!(status, DetflowStatus::Ok);
    let report = unsafe { report.assume_init() };
    assert_eq!(report.grid_points, 2001);
    assert_eq!(report.accepted_steps, 2000);
    assert_eq!(report.overflow_points, 0);
    assert!(report.worst_drift <= 1e-10);
    assert!(report.first_noninvertible_time.is_nan());

    unsafe {
        detflow_trajectory_free(t);
        detflow_scenario_free(s);
    }
}

#[test]
fn homogeneous_channel_absent_when_forced() {
    let s = scenario(NILPOTENT);
    let t = integrate(s);
    let len = unsafe { detflow_trajectory_len(t) };
    let mut buf = vec![0.0; len];
    let status =
        unsafe { detflow_trajectory_channel(t, DetflowChannel::Eq2, buf.as_mut_ptr(), len) };
    assert_eq!(status, DetflowStatus::NotApplicable);
    assert!(last_error().contains("Eq2"), "{}", last_error());

    let mut report = std::mem::MaybeUninit::<DetflowDriftReport>::uninit();
    unsafe { detflow_trajectory_report(t, report.as_mut_ptr()) };
    let report = unsafe { report.assume_init() };
    assert!(report.max_rel_drift_eq2.is_nan());
    assert!(!report.max_rel_drift_eq4.is_nan());
    unsafe {
        detflow_trajectory_free(t);
        detflow_scenario_free(s);
    }
}

#[test]
fn overflow_written_as_infinity() {
    let s = scenario(BLOW_UP);
    let t = integrate(s);
    let times = channel(t, DetflowChannel::Times);
    let det = channel(t, DetflowChannel::DetDirect);
    let onset = det.iter().position(|v| v.is_infinite()).expect("overflow");
    assert!((times[onset] - 17.5).abs() <= 0.02, "{}", times[onset]);
    assert!(det[..onset].iter().all(|v| v.is_finite()));
    unsafe {
        detflow_trajectory_free(t);
        detflow_scenario_free(s);
    }
}

#[test]
fn solver_override_and_rejection() {
    let s = scenario(NILPOTENT);
    assert_eq!(
        unsafe { detflow_scenario_set_rkf45(s, 1e-8) },
        DetflowStatus::Ok
    );
    let t = integrate(s);
    let mut report = std::mem::MaybeUninit::<DetflowDriftReport>::uninit();
    unsafe { detflow_trajectory_report(t, report.as_mut_ptr()) };
    let report = unsafe { report.assume_init() };
    assert!(report.grid_points < 2001);

    assert_eq!(
        unsafe { detflow_scenario_set_rk4(s, -1.0) },
        DetflowStatus::Validation
    );
    assert!(last_error().contains('h'), "{}", last_error());
    // The rejected override leaves the scenario unchanged.
    let t2 = integrate(s);
    assert_eq!(unsafe { detflow_trajectory_len(t2) }, report.grid_points);
    unsafe {
        detflow_trajectory_free(t);
        detflow_trajectory_free(t2);
        detflow_scenario_free(s);
    }
}

#[test]
fn input_errors_have_status_and_message() {
    let mut out = ptr::null_mut();
    let bad = CString::new("{ not json").unwrap();
    assert_eq!(
        unsafe { detflow_scenario_from_json(bad.as_ptr(), &mut out) },
        DetflowStatus::Parse
    );
    assert!(out.is_null());

    let mismatched =
        CString::new(r#"{"n": 3, "t0": 0, "t_end": 1, "x0": [1, 0, 0, 1], "solver": {"h": 0.01}}"#)
            .unwrap();
    assert_eq!(
        unsafe { detflow_scenario_from_json(mismatched.as_ptr(), &mut out) },
        DetflowStatus::Validation
    );
    assert!(last_error().contains("x0"), "{}", last_error());

    let invalid_utf8 = [0xffu8, 0xfe, 0];
    assert_eq!(
        unsafe { detflow_scenario_from_json(invalid_utf8.as_ptr().cast(), &mut out) },
        DetflowStatus::InvalidUtf8
    );
    assert_eq!(
        unsafe { detflow_scenario_from_json(ptr::null(), &mut out) },
        DetflowStatus::NullPointer
    );
    assert_eq!(
        unsafe { detflow_integrate(ptr::null(), &mut ptr::null_mut()) },
        DetflowStatus::NullPointer
    );
}

#[test]
fn buffers_are_checked() {
    let s = scenario(NILPOTENT);
    let t = integrate(s);
    let mut small = [0.0; 10];
    assert_eq!(
        unsafe { detflow_trajectory_channel(t, DetflowChannel::Times, small.as_mut_ptr(), 10) },
        DetflowStatus::BufferTooSmall
    );
    assert_eq!(
        unsafe { detflow_trajectory_matrix(t, 5000, small.as_mut_ptr(), 10) },
        DetflowStatus::IndexOutOfRange
    );
    assert_eq!(
        unsafe { detflow_trajectory_matrix(t, 0, small.as_mut_ptr(), 3) },
        DetflowStatus::BufferTooSmall
    );
    unsafe {
        detflow_trajectory_free(t);
        detflow_scenario_free(s);
        detflow_trajectory_free(ptr::null_mut());
        detflow_scenario_free(ptr::null_mut());
        detflow_string_free(ptr::null_mut());
    }
}

#[test]
fn run_csv_matches_core_renderer() {
    let json = CString::new(NILPOTENT).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { detflow_run_csv(json.as_ptr(), &mut out) },
        DetflowStatus::Ok
    );
    let csv = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_string();
    unsafe { detflow_string_free(out) };

    let s = detflow::cli::parse_scenario_str(NILPOTENT).unwrap();
    let expected = detflow::cli::run_scenario(&s).unwrap().csv;
    assert_eq!(csv, expected);
    assert!(csv.starts_with(detflow::cli::CSV_HEADER));
}

#[test]
fn matrix_functions() {
    // det [[2,1,0],[1,3,1],[0,1,4]] = 2(12-1) - 1(4-0) = 18
    let m = [2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0];
    let mut d = 0.0;
    assert_eq!(
        unsafe { detflow_det(m.as_ptr(), 3, &mut d) },
        DetflowStatus::Ok
    );
    assert!((d - 18.0).abs() < 1e-12);
    let mut tr = 0.0;
    assert_eq!(
        unsafe { detflow_trace(m.as_ptr(), 3, &mut tr) },
        DetflowStatus::Ok
    );
    assert_eq!(tr, 9.0);

    let mut inv = [0.0; 9];
    let mut adj = [0.0; 9];
    assert_eq!(
        unsafe { detflow_inverse(m.as_ptr(), 3, inv.as_mut_ptr()) },
        DetflowStatus::Ok
    );
    assert_eq!(
        unsafe { detflow_adjugate(m.as_ptr(), 3, adj.as_mut_ptr()) },
        DetflowStatus::Ok
    );
    // Cofactors by hand: adj[0][0] = 3*4 - 1*1 = 11, adj[0][1] = -(1*4 - 0*1) = -4.
    assert!((adj[0] - 11.0).abs() < 1e-12 && (adj[1] + 4.0).abs() < 1e-12);
    for (a, i) in adj.iter().zip(&inv) {
        assert!((a - 18.0 * i).abs() < 1e-12);
    }

    let singular = [1.0, 2.0, 2.0, 4.0];
    let mut out = [0.0; 4];
    assert_eq!(
        unsafe { detflow_inverse(singular.as_ptr(), 2, out.as_mut_ptr()) },
        DetflowStatus::Singular
    );
    assert_eq!(
        unsafe { detflow_adjugate(singular.as_ptr(), 2, out.as_mut_ptr()) },
        DetflowStatus::Ok
    );
    assert_eq!(out, [4.0, -2.0, -2.0, 1.0]);

    let f = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
    for axis in [DetflowAxis::Rows, DetflowAxis::Columns] {
        let mut sum = 0.0;
        let status = unsafe { detflow_replaced_det_sum(m.as_ptr(), f.as_ptr(), 3, axis, &mut sum) };
        assert_eq!(status, DetflowStatus::Ok);
        // With F = I the sum is tr(adj X) = 11 + 8 + 5.
        assert!((sum - 24.0).abs() < 1e-12, "{axis:?}: {sum}");
    }

    let nan = [f64::NAN, 0.0, 0.0, 1.0];
    assert_eq!(
        unsafe { detflow_det(nan.as_ptr(), 2, &mut d) },
        DetflowStatus::NonFinite
    );
    assert_eq!(
        unsafe { detflow_det(m.as_ptr(), 0, &mut d) },
        DetflowStatus::Dimension
    );
    assert_eq!(
        unsafe { detflow_det(ptr::null(), 2, &mut d) },
        DetflowStatus::NullPointer
    );
}
