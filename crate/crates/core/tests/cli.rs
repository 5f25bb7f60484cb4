use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_whitham-cm"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn winding_prints_four() {
    let o = run(&["winding", "--tau", "0.2", "--c0", "1", "--eta", "auto"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "4");
}

#[test]
fn c3_curve_has_unit_alpha() {
    let o = run(&["curves", "--c3", "--beta", "0:0.3333:0.01"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("beta,alpha"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 34);
    for row in rows {
        let alpha: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(alpha, 1.0);
    }
}

#[test]
fn c2_curve_has_alpha_above_one() {
    let o = run(&["curves", "--c2", "--s", "0.1:4:0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 40);
    for row in rows {
        let alpha: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert!(alpha > 1.0, "{row}");
    }
}

#[test]
fn empty_range_gives_a_header_only() {
    let o = run(&["curves", "--c2", "--s", "1:0.5:0.1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(4));
    assert_eq!(run(&["winding", "--tau", "0.2"]).status.code(), Some(4));
    let dir = scratch("codes");
    let out = dir.join("p.csv");
    let out = out.to_str().unwrap();
    let o = run(&["wave", "gsw", "--tau", "0.2", "--mu", "0.06", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("CeilingViolation"));
    let o = run(&["wave", "gsw", "--tau", "0.2", "--mu", "1e-3", "--kprime", "0.5", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("PersistenceViolation"));
    assert_eq!(run(&["residual", "--input", dir.join("missing.csv").to_str().unwrap()]).status.code(), Some(4));
}

#[test]
fn wave_residual_refine_round_trip() {
    let dir = scratch("msw");
    let csv = dir.join("msw.csv");
    let o = run(&["wave", "msw", "--s", "1", "--mu", "-1e-3", "--theta", "0", "--N", "2048", "--L", "300", "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("x,phi"));
    assert_eq!(text.lines().count(), 2049);
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("msw.json")).unwrap()).unwrap();
    assert_eq!(meta["meta"]["kind"], "Msw");

    let o = run(&["residual", "--input", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ratio = r["sup"].as_f64().unwrap() / r["sup_profile"].as_f64().unwrap();
    assert!(ratio < 0.2, "{ratio}");

    let refined = dir.join("refined.csv");
    let o = run(&["refine", "--input", csv.to_str().unwrap(), "--tol", "1e-11", "--out", refined.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["residual", "--input", refined.to_str().unwrap()]);
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(r["sup"].as_f64().unwrap() < 1e-11);
}

#[test]
fn config_file_overrides_flags() {
    let dir = scratch("config");
    let kv = dir.join("run.conf");
    std::fs::write(&kv, "# winding at another Bond number\ntau = 0.1\n").unwrap();
    let json = dir.join("run.json");
    std::fs::write(&json, r#"{"tau": 0.1, "c0": 1}"#).unwrap();
    let a = run(&["winding", "--tau", "0.9", "--c0", "1", "--config", kv.to_str().unwrap()]);
    let b = run(&["winding", "--config", json.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(stdout(&a).trim(), "4");
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(run(&["winding", "--config", dir.join("nope").to_str().unwrap()]).status.code(), Some(4));
}

#[test]
fn coeffs_output_is_deterministic() {
    let a = run(&["coeffs", "--s", "1"]);
    let b = run(&["coeffs", "--s", "1"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert!(v.is_object());
}
