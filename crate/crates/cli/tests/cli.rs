use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn apkit(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_apkit"));
    c.args(args).env_remove("APKIT_OUT");
    if let Some(p) = env_out {
        c.env("APKIT_OUT", p);
    }
    c.output().expect("apkit runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn names(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir)
        .map(|rd| rd.filter_map(|e| e.ok()).map(|e| e.file_name().to_string_lossy().into_owned()).collect())
        .unwrap_or_default();
    v.sort();
    v
}

fn small_sin(out: &Path, checker: &str, eps: &str) -> Output {
    let o = out.display().to_string();
    apkit(
        &["check", "--function", "sin", "--checker", checker, "--epsilon", eps, "--window", "half_width=20", "--out", &o],
        None,
    )
}

#[test]
fn passing_check_exits_zero_and_writes_files() {
    let d = tempfile::tempdir().unwrap();
    let o = small_sin(d.path(), "periods", "0.2");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let files = names(d.path());
    assert!(files.contains(&"sin-periods-left-0.2-periods.json".to_string()));
    assert!(files.contains(&"report-sin-periods-left-0.2.json".to_string()));
    assert!(files.contains(&"timings-sin-periods-left-0.2.json".to_string()));
    assert!(files.iter().all(|f| !f.contains(".tmp")), "{files:?}");
}

#[test]
fn failing_check_exits_one() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().display().to_string();
    let o = apkit(
        &["check", "--function", "wu", "--checker", "uc", "--side", "right", "--epsilon", "1", "--out", &out],
        None,
    );
    assert_eq!(code(&o), 1);
    let left = apkit(&["check", "--function", "wu", "--checker", "uc", "--side", "left", "--epsilon", "1", "--out", &out], None);
    assert_eq!(code(&left), 0);
}

#[test]
fn input_errors_exit_two() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().display().to_string();
    for args in [
        vec!["check", "--function", "sin", "--checker", "bogus", "--epsilon", "0.1", "--out", &out],
        vec!["check", "--function", "nope", "--checker", "maak", "--epsilon", "0.1", "--out", &out],
        vec!["check", "--function", "sin", "--checker", "maak", "--epsilon", "-1", "--out", &out],
        vec!["check", "--function", "sin", "--checker", "maak", "--epsilon", "0.1", "--side", "up", "--out", &out],
        vec!["counterexample", "nope", "--out", &out],
        vec!["verify", "/nonexistent/cert.json"],
    ] {
        let o = apkit(&args, None);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn environment_overrides_out() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let out = b.path().display().to_string();
    let o = apkit(
        &["check", "--function", "z6_chi1", "--checker", "net", "--epsilon", "0.5", "--out", &out],
        Some(a.path()),
    );
    assert_eq!(code(&o), 0);
    assert!(names(b.path()).is_empty());
    assert!(names(a.path()).contains(&"z6_chi1-net-left-0.5.json".to_string()));
}

#[test]
fn verify_accepts_own_output_and_rejects_tampering() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&small_sin(d.path(), "maak", "0.5")), 0);
    let cert = d.path().join("sin-maak-left-0.5.json");
    let p = cert.display().to_string();
    let o = apkit(&["verify", &p], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let lines: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(lines[0]["byte_identical"], true);
    assert_eq!(lines[0]["matches_stored"], true);

    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    v["certificate"]["body"]["defect"] = serde_json::json!(0.0);
    let bad = d.path().join("tampered.json");
    fs::write(&bad, serde_json::to_string_pretty(&v).unwrap() + "\n").unwrap();
    let o = apkit(&["verify", &bad.display().to_string()], None);
    assert_eq!(code(&o), 1);

    let mut w = v.clone();
    w["window_fingerprint"] = serde_json::json!("00");
    fs::write(&bad, serde_json::to_string_pretty(&w).unwrap() + "\n").unwrap();
    assert_eq!(code(&apkit(&["verify", &bad.display().to_string()], None)), 2);
}

#[test]
fn reports_are_byte_identical_on_rerun() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [a.path(), b.path()] {
        assert_eq!(code(&small_sin(d, "density", "0.2")), 0);
    }
    for f in names(a.path()) {
        if f.starts_with("timings-") {
            continue;
        }
        assert_eq!(fs::read(a.path().join(&f)).unwrap(), fs::read(b.path().join(&f)).unwrap(), "{f}");
    }
}

#[test]
fn convert_chain_on_a_finite_group() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().display().to_string();
    let o = apkit(&["check", "--function", "s3_sign", "--checker", "maak", "--epsilon", "0.125", "--out", &out], None);
    assert_eq!(code(&o), 0);
    let mut cert = d.path().join("s3_sign-maak-left-0.125.json");
    for (t, op) in [
        ("lemma51", "left_cover_to_twosided"),
        ("part5", "cover_to_period_set"),
        ("part6", "period_set_to_left_cover"),
    ] {
        let p = cert.display().to_string();
        let o = apkit(&["convert", &p, "--transform", t, "--out", &out], None);
        assert_eq!(code(&o), 0, "{t}: {}", String::from_utf8_lossy(&o.stderr));
        cert = d.path().join(format!("{}-{op}.json", cert.file_stem().unwrap().to_string_lossy()));
        assert!(cert.exists());
    }
    let o = apkit(&["verify", &cert.display().to_string()], None);
    assert_eq!(code(&o), 0);
}

#[test]
fn spectrum_writes_tables() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().display().to_string();
    let o = apkit(
        &["spectrum", "--function", "quasi", "--omegas", "1,2", "--half-width", "200", "--out", &out],
        None,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.path().join("spectrum-quasi.csv").exists());
}
