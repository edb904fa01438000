//! End-to-end tests of the `evoplan` binary: exit codes, report files
//! and determinism of the generated artifacts.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn evoplan(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evoplan"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

const GEN: &[&str] = &[
    "generate",
    "--stations",
    "40",
    "--clusters",
    "160",
    "--horizon",
    "12",
    "--growth",
    "4",
    "--seed",
    "5",
];

#[test]
fn generate_is_deterministic() {
    let tmp = tempdir().unwrap();
    let out = evoplan(&[GEN, &["-o", "a"]].concat(), tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = evoplan(&[GEN, &["-o", "b"]].concat(), tmp.path());
    assert!(out.status.success());
    assert_eq!(
        read_dir_bytes(&tmp.path().join("a")),
        read_dir_bytes(&tmp.path().join("b"))
    );
}

#[test]
fn generate_rejects_shrinking_demand() {
    let tmp = tempdir().unwrap();
    let out = evoplan(
        &["generate", "--stations", "10", "--clusters", "20", "--growth", "0.5", "-o", "x"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("growth"));
}

#[test]
fn plan_writes_reports_and_exit_codes_reflect_feasibility() {
    let tmp = tempdir().unwrap();
    assert!(evoplan(&[GEN, &["-o", "sc"]].concat(), tmp.path()).status.success());

    let out = evoplan(&["plan", "sc", "--mode", "shared", "-o", "out"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["schedule.csv", "metrics.csv", "summary.json"] {
        assert!(tmp.path().join("out").join(f).is_file(), "missing {f}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["status"], "success");

    // A zero change budget cannot cover the demand growth: exit 2 and the
    // summary names the first period whose demand cannot be met in time.
    let out = evoplan(
        &["plan", "sc", "--change-rate", "0", "--mode", "shared", "-o", "tight"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("tight/summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["status"], "infeasible");
    let reason = summary["infeasible_reason"].as_str().unwrap();
    assert!(reason.contains("period"), "reason does not name a period: {reason}");
}

#[test]
fn sweep_is_deterministic_and_independent_of_parallelism() {
    let tmp = tempdir().unwrap();
    assert!(evoplan(&[GEN, &["-o", "sc"]].concat(), tmp.path()).status.success());

    let args = [
        "sweep", "sc", "--change-rate", "2,8", "--mode", "shared,independent", "-o",
    ];
    for (threads, file) in [("1", "a.csv"), ("4", "b.csv")] {
        let out = Command::new(env!("CARGO_BIN_EXE_evoplan"))
            .args([&args[..], &[file]].concat())
            .env("EVOPLAN_THREADS", threads)
            .current_dir(tmp.path())
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(tmp.path().join("a.csv")).unwrap();
    let b = std::fs::read(tmp.path().join("b.csv")).unwrap();
    assert_eq!(a, b);

    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("change_rate,h_max,mode,status"));
    let firsts: Vec<String> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            format!("{},{}", f[0], f[2])
        })
        .collect();
    assert_eq!(firsts, ["2,shared", "2,independent", "8,shared", "8,independent"]);
}

#[test]
fn verify_certifies_and_refuses_oversized_enumeration() {
    let tmp = tempdir().unwrap();
    let out = evoplan(&["verify", "--samples", "300"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    assert_eq!(text.matches("PASS").count(), 3, "{text}");

    let out = evoplan(&["verify", "--horizon", "9"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("limit"));
}
