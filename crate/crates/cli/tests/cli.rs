//! Exit codes and outputs of the `riskbandit` binary.

use std::path::Path;
use std::process::{Command, Output};

fn riskbandit(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riskbandit"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_CONFIG: &str = r#"
replications = 2
base_seed = 5
output_dir = "out"
[measure]
kind = "mean_variance"
level = 1.0
[environment]
kind = "file"
path = "inst.csv"
[policy]
bonus_scale = 0.004
[[algorithm]]
name = "rbocpd_risk_lcb"
[[algorithm]]
name = "glr_risk_lcb"
[[algorithm]]
name = "oracle"
"#;

#[test]
fn gen_env_then_run_then_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let gen = riskbandit(
        &["gen-env", "--A", "3", "--T", "1500", "--K", "2", "--lambda", "0.3", "--seed", "4", "--out", "inst.csv"],
        dir.path(),
    );
    assert!(gen.status.success(), "{}", stderr(&gen));
    let csv = std::fs::read_to_string(dir.path().join("inst.csv")).unwrap();
    assert!(csv.starts_with("arm,start,end,mean"));

    std::fs::write(dir.path().join("small.toml"), SMALL_CONFIG).unwrap();
    let run = riskbandit(&["run", "--config", "small.toml"], dir.path());
    assert!(run.status.success(), "{}", stderr(&run));
    let out = stdout(&run);
    assert!(out.starts_with("algorithm,final_mean_regret"));
    assert_eq!(out.lines().count(), 4);
    for f in ["regret_rbocpd_risk_lcb.csv", "events_glr_risk_lcb.csv", "summary.csv", "regret.svg"] {
        assert!(dir.path().join("out").join(f).is_file(), "{f}");
    }
    let regret = std::fs::read_to_string(dir.path().join("out/regret_oracle.csv")).unwrap();
    assert_eq!(regret.lines().count(), 1501);

    // Reruns with a different worker count write identical bytes.
    let again = Command::new(env!("CARGO_BIN_EXE_riskbandit"))
        .args(["run", "--config", "small.toml", "--out", "again"])
        .env("RISKBANDIT_THREADS", "1")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(again.status.success());
    for f in ["regret_rbocpd_risk_lcb.csv", "events_rbocpd_risk_lcb.csv", "summary.csv", "regret.svg"] {
        let a = std::fs::read(dir.path().join("out").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("again").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }

    let bounds = riskbandit(&["bounds", "--config", "small.toml"], dir.path());
    assert!(bounds.status.success(), "{}", stderr(&bounds));
    let table = stdout(&bounds);
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "bound,value,note");
    assert_eq!(rows.len(), 5);
    assert!(rows[1..].iter().all(|r| r.split(',').count() == 3), "{table}");
}

#[test]
fn detect_reports_restarts() {
    let dir = tempfile::tempdir().unwrap();
    let mut bits = String::from("z\n");
    for t in 0..400 {
        bits.push_str(if t < 200 { "0\n" } else { "1\n" });
    }
    std::fs::write(dir.path().join("bits.csv"), bits).unwrap();
    for detector in ["rbocpd", "glr"] {
        let o = riskbandit(&["detect", "--input", "bits.csv", "--delta", "0.05", "--detector", detector], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        let text = stdout(&o);
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows[0], "t,restart");
        assert_eq!(rows.len(), 2, "{detector}: {text}");
        let t: usize = rows[1].strip_suffix(",1").unwrap().parse().unwrap();
        assert!((201..230).contains(&t), "{detector}: {t}");
    }
}

#[test]
fn usage_errors_exit_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = riskbandit(&["run", "--config", "nope.toml"], dir.path());
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).starts_with("error: config not found"));

    let unknown = riskbandit(&["run", "--bogus"], dir.path());
    assert_eq!(unknown.status.code(), Some(1));

    let none = riskbandit(&[], dir.path());
    assert_eq!(none.status.code(), Some(1));

    let help = riskbandit(&["--help"], dir.path());
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn runtime_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bits.csv"), "0\n1\n2\n").unwrap();
    let bad_bits = riskbandit(&["detect", "--input", "bits.csv", "--delta", "0.05"], dir.path());
    assert_eq!(bad_bits.status.code(), Some(2));
    let msg = stderr(&bad_bits);
    assert!(msg.starts_with("error:") && msg.contains('3'), "{msg}");
    assert_eq!(msg.trim_end().lines().count(), 1);

    std::fs::write(dir.path().join("bits.csv"), "0\n1\n").unwrap();
    let bad_delta = riskbandit(&["detect", "--input", "bits.csv", "--delta", "1.5"], dir.path());
    assert_eq!(bad_delta.status.code(), Some(2));

    std::fs::write(dir.path().join("bad.toml"), "replications = 2\n[measure]\nkind = \"cvar\"\nlevel = 2.0\n[environment]\nkind = \"synthetic\"\narms = 2\nhorizon = 100\nchanges = 0\nlambda = 0.2\n[[algorithm]]\nname = \"oracle\"\n").unwrap();
    let bad_cfg = riskbandit(&["run", "--config", "bad.toml"], dir.path());
    assert_eq!(bad_cfg.status.code(), Some(2), "{}", stderr(&bad_cfg));

    let infeasible = riskbandit(
        &["gen-env", "--A", "2", "--T", "10", "--K", "20", "--lambda", "0.2", "--out", "x.csv"],
        dir.path(),
    );
    assert_eq!(infeasible.status.code(), Some(2));
}
