//! Compiles a small C program against the generated header and the static
//! library, then runs it.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "detflow.h"

int main(void) {
    const char *json =
        "{\"n\": 2, \"t0\": 0, \"t_end\": 2, \"x0\": [1, 0, 0, 1],"
        " \"f\": {\"kind\": \"constant\", \"value\": [0, 1, 0, 0]},"
        " \"solver\": {\"h\": 0.001}}";
    DetflowScenario *s = NULL;
    if (detflow_scenario_from_json(json, &s) != DETFLOW_STATUS_OK) return 10;
    DetflowTrajectory *t = NULL;
    if (detflow_integrate(s, &t) != DETFLOW_STATUS_OK) return 11;
    size_t len = detflow_trajectory_len(t);
    double det[2001];
    if (len != 2001) return 12;
    if (detflow_trajectory_channel(t, DETFLOW_CHANNEL_EQ5, det, len) != DETFLOW_STATUS_OK) return 13;
    for (size_t i = 0; i < len; i++) if (fabs(det[i] - 1.0) > 1e-10) return 14;
    DetflowDriftReport r;
    if (detflow_trajectory_report(t, &r) != DETFLOW_STATUS_OK) return 15;
    if (r.grid_points != len || !isnan(r.max_rel_drift_eq2)) return 16;
    detflow_trajectory_free(t);
    detflow_scenario_free(s);

    double m[4] = {1, 2, 2, 4}, inv[4];
    if (detflow_inverse(m, 2, inv) != DETFLOW_STATUS_SINGULAR) return 17;
    if (detflow_last_error() == NULL) return 18;
    printf("ok %s\n", detflow_version());
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test> -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libdetflow_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let bin = dir.path().join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();

    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".to_string());
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&bin)
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap_or_else(|e| panic!("running {cc}: {e}"));
    assert!(status.success(), "C compile failed");

    let out = Command::new(&bin).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.trim(), format!("ok {}", env!("CARGO_PKG_VERSION")));
}
