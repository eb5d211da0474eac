use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn entloss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entloss"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn family_counts<'a>(report: &'a Value, name: &str) -> &'a Value {
    &report["counts"][name]
}

#[test]
fn fig2_endpoints_and_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig2.csv");
    let res = entloss(&["fig2", "--grid", "1001", "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("ef_norm,bound_norm"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(text.lines().last(), Some("1.000000000000,1.000000000000"));
    assert_eq!(rows[0], (0.0, 0.0));
    let half = rows.iter().find(|r| (r.0 - 0.5).abs() < 1e-12).unwrap();
    assert_eq!(half.1, 0.0);
    assert!(rows.windows(2).all(|w| w[1].1 >= w[0].1 && w[1].0 > w[0].0));

    let s_a = 3f64.log2();
    let first = rows.iter().position(|r| r.1 > 0.0).unwrap();
    let delta_at = |i: usize| (1.0 - rows[i].0) * s_a;
    assert!(delta_at(first) < 9.6e-6 * 1.2, "{}", delta_at(first));
    assert!(delta_at(first - 1) > 9.6e-6 * 0.8, "{}", delta_at(first - 1));
}

#[test]
fn fig2_rejects_tiny_grid() {
    let res = entloss(&["fig2", "--grid", "1"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn unknown_flags_and_bad_dims_are_config_errors() {
    assert_eq!(entloss(&["verify", "--bogus"]).status.code(), Some(2));
    assert_eq!(entloss(&["verify", "--dims", "2y2"]).status.code(), Some(2));
    assert_eq!(entloss(&["verify", "--dims", "3x4"]).status.code(), Some(2));
    assert_eq!(entloss(&["verify", "--instances", "0"]).status.code(), Some(2));
    assert_eq!(entloss(&["report", "--channel", "nonsense"]).status.code(), Some(2));
}

#[test]
fn unitary_instance_sits_on_the_direct_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let res = entloss(&[
        "verify",
        "--seed",
        "5",
        "--dims",
        "2x2",
        "--instances",
        "1",
        "--channels",
        "unitary",
        "--quick",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let report = read_json(&out);
    let first = report["records"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["name"] == "thm1_direct")
        .unwrap();
    assert_eq!(first["status"], "pass");
    assert!(first["slack"].as_f64().unwrap().abs() < 1e-7);
}

#[test]
fn corrupted_tolerance_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let res = entloss(&[
        "verify",
        "--dims",
        "2x2",
        "--instances",
        "3",
        "--quick",
        "--tolerance",
        "1e-30",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1));
    let report = read_json(&out);
    let fails: u64 = report["counts"]
        .as_object()
        .unwrap()
        .values()
        .map(|c| c["fail"].as_u64().unwrap())
        .sum();
    assert!(fails > 0);
}

#[test]
fn verify_is_deterministic_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2).map(|i| dir.path().join(format!("r{i}.csv"))).collect();
    for p in &paths {
        let res = entloss(&[
            "verify",
            "--seed",
            "9",
            "--dims",
            "2x2,2x3",
            "--instances",
            "3",
            "--quick",
            "--format",
            "csv",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(res.status.code(), Some(0));
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("name,instance,lhs,rhs,slack,status\n"));
    assert!(text.lines().skip(1).all(|l| l.split(',').count() == 6));
}

#[test]
fn default_suite_passes_with_populated_families() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let res = entloss(&["verify", "--seed", "42", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let report = read_json(&out);
    let populated = report["counts"]
        .as_object()
        .unwrap()
        .values()
        .filter(|c| c["pass"].as_u64().unwrap() + c["conditional"].as_u64().unwrap() > 0)
        .count();
    assert!(populated >= 11, "{populated}");
    for name in ["thm1_direct", "thm2_direct2", "corollary_gap", "thm3_a", "final_b"] {
        assert_eq!(family_counts(&report, name)["fail"], 0);
    }
}

fn report(args: &[&str]) -> Value {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let mut full = vec!["report", "--quick"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", out.to_str().unwrap()]);
    let res = entloss(&full);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    read_json(&out)
}

#[test]
fn report_schema_and_identity_values() {
    let r = report(&["--channel", "identity:d=2"]);
    let keys: Vec<&String> = r.as_object().unwrap().keys().collect();
    assert_eq!(
        keys,
        ["bounds", "channel_descriptor", "delta_c_lower", "delta_f_lower", "phi_lower", "q_cb_upper"]
    );
    assert!(r["delta_c_lower"].as_f64().unwrap() < 1e-9);
    assert!(r["delta_f_lower"].as_f64().unwrap() < 1e-9);
    assert!((r["phi_lower"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    for b in r["bounds"].as_array().unwrap() {
        let keys: Vec<&String> = b.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["lhs", "name", "rhs", "slack", "status"]);
        assert_ne!(b["status"], "fail");
        if let (Some(l), Some(h), Some(s)) = (b["lhs"].as_f64(), b["rhs"].as_f64(), b["slack"].as_f64()) {
            assert!((h - l - s).abs() < 1e-12);
        }
    }
}

#[test]
fn report_closed_form_losses() {
    let r = report(&["--channel", "depolarizing:p=1,d=2", "--state", "mixed"]);
    assert!((r["delta_c_lower"].as_f64().unwrap() - 2.0).abs() < 1e-9);

    let r = report(&["--channel", "dephasing:p=0.5", "--state", "diag:0.5,0.5"]);
    assert!((r["delta_c_lower"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let direct = r["bounds"]
        .as_array()
        .unwrap()
        .iter()
        .find(|b| b["name"] == "thm1_direct")
        .unwrap();
    // complete dephasing is idempotent and self-adjoint, so its transpose
    // channel is itself and F_e(I/2, D∘D) = F_e(I/2, D) = 1/2
    assert!((direct["rhs"].as_f64().unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn report_reads_kraus_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.json");
    std::fs::write(
        &path,
        r#"{"dimA": 2, "dimB": 2, "kraus": [[[1,0],[0,0],[0,0],[-1,0]]]}"#,
    )
    .unwrap();
    let r = report(&["--channel", path.to_str().unwrap()]);
    assert!(r["q_cb_upper"].as_f64().unwrap() < 1e-6);
    assert!(r["delta_c_lower"].as_f64().unwrap() < 1e-9);
}
