use std::path::Path;
use std::process::{Command, Output};

fn mollab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mollab"))
        .args(args)
        .env_remove("MOLLAB_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Non-comment lines of a CSV.
fn body(s: &str) -> Vec<String> {
    s.lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
}

fn field(text: &str, key: &str) -> f64 {
    let prefix = format!("{key} = ");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

#[test]
fn kappa_special_mode_reproduces_reference_rows() {
    let o = mollab(&["kappa", "--theta", "5/54"]);
    assert!(o.status.success());
    assert!((field(&stdout(&o), "kappa") - 0.0632).abs() <= 2e-4);
    let o = mollab(&["kappa", "--theta", "1/8"]);
    assert!((field(&stdout(&o), "kappa") - 0.0854).abs() <= 2e-4);
}

#[test]
fn sinh_mollifier_does_not_lose_to_linear() {
    let lin = field(&stdout(&mollab(&["kappa", "--theta", "0.125"])), "kappa");
    let o = mollab(&["kappa", "--theta", "0.125", "--mollifier", "sinh:0.25"]);
    assert!(o.status.success());
    let sinh = field(&stdout(&o), "kappa");
    assert!(sinh.is_finite() && sinh >= lin - 1e-6, "{sinh} vs {lin}");
}

#[test]
fn kappa_json_carries_manifest() {
    let o = mollab(&["kappa", "--theta", "0.25", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["manifest"]["command"], "kappa");
    assert_eq!(v["manifest"]["modes"][0]["tag"], "special");
    assert!((v["result"]["kappa"].as_f64().unwrap() - 0.176).abs() < 2e-3);
}

#[test]
fn table_is_deterministic_across_runs_and_job_counts() {
    let a = mollab(&["table", "--reference-set", "--jobs", "1"]);
    let b = mollab(&["table", "--reference-set", "--jobs", "4"]);
    assert!(a.status.success() && b.status.success());
    let (ba, bb) = (body(&stdout(&a)), body(&stdout(&b)));
    assert_eq!(ba, bb);
    assert_eq!(ba[0], "theta,R,beta,mollifier,c_pqr,kappa");
    assert_eq!(ba.len(), 9);
    let thetas: Vec<f64> = ba[1..].iter().map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(thetas.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn empty_table_is_header_only() {
    let o = mollab(&["table"]);
    assert!(o.status.success());
    assert_eq!(body(&stdout(&o)), vec!["theta,R,beta,mollifier,c_pqr,kappa"]);
}

#[test]
fn grid_table_round_trips_and_stays_above_two_thirds_theta() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    let p = path.to_str().unwrap();
    let o = mollab(&["table", "--grid", "0.01:0.5:50", "--jobs", "4", "--out", p]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let rows = body(&text);
    assert_eq!(rows.len(), 51);
    for r in &rows[1..] {
        let f: Vec<f64> = r.split(',').filter_map(|x| x.parse().ok()).collect();
        let (theta, kappa) = (f[0], f[f.len() - 1]);
        assert!(kappa - 2.0 * theta / 3.0 > 0.0, "{r}");
    }
    let o = mollab(&["check-table", p]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("50 rows checked, 0 failed"));
}

#[test]
fn tampered_table_row_fails_recheck() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let p = path.to_str().unwrap();
    assert!(mollab(&["table", "1/4", "--out", p]).status.success());
    let text = std::fs::read_to_string(&path).unwrap().replace("0.176381230348174", "0.17638123");
    std::fs::write(&path, text).unwrap();
    assert_eq!(mollab(&["check-table", p]).status.code(), Some(4));
}

#[test]
fn failed_rows_get_an_error_column_and_exit_3() {
    let o = mollab(&["table", "0.25", "1e-7"]);
    assert_eq!(o.status.code(), Some(3));
    let rows = body(&stdout(&o));
    assert_eq!(rows[0], "theta,R,beta,mollifier,c_pqr,kappa,error");
    assert!(rows[1].starts_with("1e-7,,"));
    assert!(rows[2].ends_with(','));
}

#[test]
fn solve_profile_endpoints_and_shape() {
    let o = mollab(&["solve", "--R", "5", "--points", "51"]);
    assert!(o.status.success());
    let rows = body(&stdout(&o));
    assert_eq!(rows[0], "t,S,Sprime");
    let parsed: Vec<Vec<f64>> = rows[1..]
        .iter()
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(parsed.len(), 51);
    assert_eq!(parsed[0][0], 0.0);
    assert!((parsed[0][1] - 0.5).abs() < 1e-12);
    assert_eq!(parsed[50][0], 5.0);
    assert!(parsed[50][1].abs() < 1e-12);
    assert!(parsed.windows(2).all(|w| w[1][1] < w[0][1]));
}

#[test]
fn limit_scan_decreases() {
    let o = mollab(&["limit", "--y0", "0.75", "--R-list", "5,10,20,40"]);
    assert!(o.status.success());
    let q: Vec<f64> = body(&stdout(&o))[1..]
        .iter()
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(q.windows(2).all(|w| w[1] < w[0]));
    assert!(q[3] <= 1e-2);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["kappa", "--theta", "0"],
        vec!["kappa", "--theta", "1/2", "--mollifier", "cubic"],
        vec!["table", "--grid", "0.5:0.1:3"],
        vec!["limit", "--y0", "0.75", "--R-list", "10,5"],
        vec!["verify", "--level", "medium"],
        vec!["frobnicate"],
    ] {
        assert_eq!(mollab(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn numeric_failure_exits_3() {
    assert_eq!(mollab(&["solve", "--R", "5", "--c", "0.3"]).status.code(), Some(3));
}

#[test]
fn verify_quick_passes_and_tampering_fails() {
    let o = mollab(&["verify"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let o = mollab(&["verify", "--tamper-c1", "0.01", "--json"]);
    assert_eq!(o.status.code(), Some(4));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let failed: Vec<&str> = v["report"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false && c["informational"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["ode_residual"]);
}

#[test]
fn tolerance_flag_beats_environment() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_mollab"));
        c.args(["kappa", "--theta", "0.5"]);
        match env {
            Some(v) => c.env("MOLLAB_TOL", v),
            None => c.env_remove("MOLLAB_TOL"),
        };
        if let Some(f) = flag {
            c.args(["--tol", f]);
        }
        let out = String::from_utf8(c.output().unwrap().stdout).unwrap();
        out.lines().find(|l| l.starts_with("# tolerances")).unwrap().to_string()
    };
    assert!(run(None, None).contains("abs_tol=1e-11"));
    assert!(run(Some("1e-9"), None).contains("abs_tol=1e-9"));
    assert!(run(Some("1e-9"), Some("1e-10")).contains("abs_tol=1e-10"));
}

#[test]
fn out_file_matches_stdout_body() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    assert!(mollab(&["constants", "--out", path.to_str().unwrap()]).status.success());
    let file = std::fs::read_to_string(Path::new(&path)).unwrap();
    assert_eq!(body(&file), body(&stdout(&mollab(&["constants"]))));
}
