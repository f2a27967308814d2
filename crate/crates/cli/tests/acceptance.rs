//! Acceptance run: one line per criterion, nonzero exit if any fails.
//!
//! Criteria 1 to 4 drive the `apkit` binary and log every command so that
//! criterion 7 can re-verify what they emitted and rerun them.

use std::f64::consts::{PI, SQRT_2};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use apkit::checkers::periods::period_scan;
use apkit::corpus::Manifest;
use apkit::harmonic::{bohr_mean, fourier_coefficient, spectrum_scan, TrigPoly, RUC_GRID_POINTS};
use apkit::{build_window, CayleyGroup, FunctionTable, GroupModel, Side, WindowDoc};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const AP: [&str; 8] = ["const_line", "const_int", "sin", "zchar6", "quasi", "z6_chi1", "s3_sign", "s3_standard"];
const SCHEDULE: [f64; 3] = [0.5, 0.2, 0.1];

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

struct Harness {
    first: PathBuf,
    second: PathBuf,
    log: Vec<Vec<String>>,
}

impl Harness {
    /// Runs `apkit <args> --out first/<sub>` (no `--out` for verify).
    fn apkit(&mut self, sub: &str, args: &[&str]) -> Run {
        let mut a: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        if !sub.is_empty() {
            a.push("--out".into());
            a.push(self.first.join(sub).display().to_string());
            self.log.push(a.clone());
        }
        exec(&a)
    }

    fn dir(&self, sub: &str) -> PathBuf {
        self.first.join(sub)
    }
}

fn exec(args: &[String]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_apkit"))
        .args(args)
        .env_remove("APKIT_OUT")
        .output()
        .expect("apkit runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn read_json(p: &Path) -> Option<Value> {
    serde_json::from_str(&fs::read_to_string(p).ok()?).ok()
}

fn files(dir: &Path, out: &mut Vec<PathBuf>) {
    let Ok(rd) = fs::read_dir(dir) else { return };
    let mut entries: Vec<PathBuf> = rd.filter_map(|e| e.ok().map(|e| e.path())).collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            files(&p, out);
        } else {
            out.push(p);
        }
    }
}

fn is_certificate(p: &Path) -> bool {
    p.extension().is_some_and(|e| e == "json")
        && read_json(p).is_some_and(|v| v.get("schema_version").is_some() && v.get("provenance").is_some())
}

struct Line {
    ok: bool,
    detail: String,
}

fn line(ok: bool, detail: impl Into<String>) -> Line {
    Line {
        ok,
        detail: detail.into(),
    }
}

fn csv_rows(p: &Path) -> Vec<Vec<String>> {
    let Ok(mut r) = csv::Reader::from_path(p) else { return Vec::new() };
    r.records()
        .filter_map(|x| x.ok())
        .map(|x| x.iter().map(|s| s.to_string()).collect())
        .collect()
}

fn criterion1(h: &mut Harness) -> Line {
    let start = Instant::now();
    let r = h.apkit("c1", &["counterexample", "wu"]);
    let secs = start.elapsed().as_secs_f64();
    let dir = h.dir("c1");
    let periods = csv_rows(&dir.join("wu_right_periods.csv"));
    let worst = periods
        .iter()
        .map(|r| r[2].parse::<f64>().unwrap_or(f64::INFINITY))
        .fold(0.0f64, f64::max);
    let a = periods.len() == 21 && worst <= 1e-12;
    let sweep = csv_rows(&dir.join("wu_theta_sweep.csv"));
    let row = sweep.iter().find(|r| r[0].parse::<f64>().ok() == Some(0.01));
    let oracle = (Complex64::from_polar(1.0, PI * 0.01f64.cos()) - 1.0).norm();
    let (env, sup) = row
        .map(|r| (r[2].parse::<f64>().unwrap_or(0.0), r[1].parse::<f64>().unwrap_or(0.0)))
        .unwrap_or((0.0, 0.0));
    let b = env >= 1.99 && (env - oracle).abs() <= 1e-12 && sup >= 1.9 && RUC_GRID_POINTS == 10_000;
    let rep = read_json(&dir.join("report-wu.json")).unwrap_or(Value::Null);
    let fsize = rep["density_factor_size"].as_u64().unwrap_or(u64::MAX);
    let c = rep["density_ok"].as_bool() == Some(true) && rep["density_residual"].as_u64() == Some(0) && fsize <= 40;
    let ok = r.code == 0 && a && b && c && secs <= 30.0;
    line(
        ok,
        format!(
            "wu counterexample: max right-period defect {worst:.3e} over {} periods; envelope {env:.6} (oracle {oracle:.6}), grid sup {sup:.6}; density |F| = {fsize}; {secs:.1}s",
            periods.len()
        ),
    )
}

fn report_checks(dir: &Path, stem: &str) -> Vec<Value> {
    read_json(&dir.join(format!("report-{stem}.json")))
        .and_then(|v| v["checks"].as_array().cloned())
        .unwrap_or_default()
}

fn side_list(name: &str) -> &'static [&'static str] {
    if name.starts_with("z6") || name.starts_with("s3") {
        &["left", "right", "two"]
    } else {
        &["left"]
    }
}

fn criterion2(h: &mut Harness) -> Line {
    let start = Instant::now();
    let manifest = Manifest::bundled();
    let mut runs = 0;
    let mut failures: Vec<String> = Vec::new();
    for name in AP {
        let kind = manifest.get(name).map(|e| e.window.params.clone()).expect("corpus entry");
        let seq: Vec<&str> = match kind {
            apkit::WindowParams::RealGrid { .. } => vec!["--seq-step", "0.2", "--seq-count", "1000"],
            apkit::WindowParams::Lattice { .. } => vec!["--seq-step", "1", "--seq-count", "200"],
            _ => vec![],
        };
        for &eps in &SCHEDULE {
            let quarter = (eps / 4.0).to_string();
            let full = eps.to_string();
            for &side in side_list(name) {
                let sub = format!("c2/{name}");
                let mut jobs: Vec<(&str, String, Vec<&str>)> = vec![
                    ("maak", quarter.clone(), vec![]),
                    ("net", quarter.clone(), vec![]),
                    ("range", quarter.clone(), vec![]),
                    ("density", full.clone(), vec![]),
                    ("uc", full.clone(), vec![]),
                    ("bochner", full.clone(), seq.clone()),
                ];
                if side != "left" {
                    jobs.retain(|j| j.0 != "range");
                }
                for (checker, e, extra) in jobs {
                    runs += 1;
                    let mut args = vec![
                        "check",
                        "--function",
                        name,
                        "--checker",
                        checker,
                        "--side",
                        side,
                        "--epsilon",
                        e.as_str(),
                    ];
                    args.extend(extra.iter());
                    let r = h.apkit(&sub, &args);
                    let stem = format!("{name}-{checker}-{side}-{e}");
                    let checks = report_checks(&h.dir(&sub), &stem);
                    let within = !checks.is_empty()
                        && checks.iter().all(|c| {
                            c["pass"].as_bool() == Some(true)
                                && c["defect"].as_f64().is_some_and(|d| d <= c["budget"].as_f64().unwrap_or(-1.0))
                                && c["defect"].as_f64().is_some_and(|d| d <= eps || c["kind"] == "density")
                        });
                    if r.code != 0 || !within {
                        failures.push(format!("{name}/{checker}/{side}/{e} (exit {}{})", r.code, short(&r.stderr)));
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = failures.is_empty() && secs <= 120.0;
    let mut d = format!("consistency suite: {runs} checker runs, {} failures; {secs:.1}s", failures.len());
    if !failures.is_empty() {
        d.push_str(&format!("; first: {}", failures[..failures.len().min(5)].join(", ")));
    }
    line(ok, d)
}

fn short(s: &str) -> String {
    let t = s.trim();
    if t.is_empty() {
        String::new()
    } else {
        format!(", {}", t.lines().last().unwrap_or(""))
    }
}

fn verify_lines(paths: &[PathBuf]) -> Vec<Value> {
    if paths.is_empty() {
        return Vec::new();
    }
    let mut args = vec!["verify".to_string()];
    args.extend(paths.iter().map(|p| p.display().to_string()));
    let r = exec(&args);
    serde_json::from_str::<Value>(&r.stdout)
        .ok()
        .and_then(|v| v.as_array().cloned())
        .unwrap_or_default()
}

fn criterion3(h: &mut Harness) -> Line {
    let manifest = Manifest::bundled();
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["arctan", "sin_t2"] {
        let threshold = manifest
            .get(name)
            .ok()
            .and_then(|e| e.thresholds.get("density_fail_half_width").copied())
            .unwrap_or(100.0);
        let mut residuals = Vec::new();
        for t in [50.0f64, 100.0, 200.0] {
            let sub = format!("c3/{name}-{t}");
            let hw = format!("half_width={t}");
            let r = h.apkit(&sub, &["check", "--function", name, "--checker", "density", "--epsilon", "0.3", "--window", &hw]);
            let stem = format!("{name}-density-left-0.3");
            let checks = report_checks(&h.dir(&sub), &stem);
            let dens = checks.iter().find(|c| c["kind"] == "density");
            let residual = dens.and_then(|c| c["summary"]["residual"].as_u64()).unwrap_or(0);
            residuals.push(residual);
            if t >= threshold {
                let cert = h.dir(&sub).join(format!("{stem}-density.json"));
                let v = verify_lines(&[cert]);
                let reverified = v.len() == 1
                    && v[0]["matches_stored"].as_bool() == Some(true)
                    && v[0]["byte_identical"].as_bool() == Some(true)
                    && v[0]["pass"].as_bool() == Some(false);
                ok &= r.code == 1 && residual > 0 && reverified;
            }
        }
        let monotone = residuals.windows(2).all(|p| p[1] > p[0]);
        ok &= monotone;
        parts.push(format!("{name} residuals {residuals:?}"));
    }
    line(ok, format!("non-ap rejection at eps 0.3: {}", parts.join("; ")))
}

fn criterion4(h: &mut Harness) -> Line {
    let eps = 0.5f64;
    let base = (eps / 4.0).to_string();
    let mut failures = Vec::new();
    let mut certs = Vec::new();
    for name in AP {
        let sub = format!("c4/{name}");
        let mut args = vec!["check", "--function", name, "--checker", "maak", "--epsilon", base.as_str()];
        if name == "quasi" {
            args.extend(["--window", "half_width=50", "--window", "step=0.1"]);
        }
        let r = h.apkit(&sub, &args);
        let dir = h.dir(&sub);
        let mut path = dir.join(format!("{name}-maak-left-{base}.json"));
        let mut good = r.code == 0;
        certs.push(path.clone());
        let mut prev_budget = eps / 4.0;
        for (t, op, factor) in [
            ("lemma51", "left_cover_to_twosided", 4.0),
            ("part5", "cover_to_period_set", 1.0),
            ("part6", "period_set_to_left_cover", 2.0),
        ] {
            let p = path.display().to_string();
            let r = h.apkit(&sub, &["convert", &p, "--transform", t]);
            let next = dir.join(format!("{}-{op}.json", path.file_stem().unwrap().to_string_lossy()));
            let body = read_json(&next).map(|v| v["certificate"]["body"].clone()).unwrap_or(Value::Null);
            let inflation = body["inflation"].as_f64();
            let input = body["input_epsilon"].as_f64();
            let budget = body["output"]["budget"].as_f64();
            let chained = inflation == Some(factor)
                && input == Some(prev_budget)
                && budget == Some(factor * prev_budget)
                && body["output"]["pass"].as_bool() == Some(true);
            if r.code != 0 || !chained {
                good = false;
                failures.push(format!("{name}/{t} (exit {}{})", r.code, short(&r.stderr)));
                break;
            }
            if t == "part6" {
                let c = &body["output"]["certificate"];
                good &= c["side"] == "left" && budget.is_some_and(|b| b <= 4.0 * eps);
            }
            prev_budget = budget.unwrap_or(0.0);
            certs.push(next.clone());
            path = next;
        }
        if !good && !failures.iter().any(|f| f.starts_with(name)) {
            failures.push(name.to_string());
        }
    }
    let v = verify_lines(&certs);
    let reverified = v.len() == certs.len()
        && v.iter().all(|l| {
            l["pass"].as_bool() == Some(true)
                && l["matches_stored"].as_bool() == Some(true)
                && l["byte_identical"].as_bool() == Some(true)
        });
    let ok = failures.is_empty() && reverified;
    let mut d = format!(
        "round trip maak({base}) -> lemma51 -> part5 -> part6: {} functions, {} failures, {} of {} certificates re-verified",
        AP.len(),
        failures.len(),
        v.iter().filter(|l| l["pass"].as_bool() == Some(true) && l["matches_stored"].as_bool() == Some(true)).count(),
        certs.len()
    );
    if !failures.is_empty() {
        d.push_str(&format!("; {}", failures.join(", ")));
    }
    line(ok, d)
}

fn criterion5() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3_10);
    let mut exceptions = 0;
    let mut checked = 0;
    for g in [CayleyGroup::cyclic(6).expect("z6"), CayleyGroup::symmetric3()] {
        let w = build_window(&WindowDoc::group(g.name())).expect("window");
        let model = w.model().clone();
        let GroupModel::Cayley(grp) = &model else { unreachable!() };
        let order = grp.order();
        for trial in 0..100 {
            let vals: Vec<Vec<Complex64>> = (0..order)
                .map(|_| vec![Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))])
                .collect();
            let f = FunctionTable::lookup(format!("r{trial}"), model.clone(), vals).expect("lookup");
            for eps in [0.1, 0.5, 1.0] {
                let p = period_scan(&f, eps, Side::Left, &w).expect("scan");
                let taus: Vec<usize> = p.taus.iter().filter_map(|t| t.tau.as_index()).collect();
                for a in 0..order {
                    checked += 1;
                    if taus.contains(&a) != taus.contains(&grp.inv(a)) {
                        exceptions += 1;
                    }
                }
            }
        }
    }
    line(
        exceptions == 0,
        format!("inverse symmetry on z6 and s3: {checked} membership pairs, {exceptions} exceptions"),
    )
}

fn criterion6() -> Line {
    let manifest = Manifest::bundled();
    let e = manifest.get("quasi").expect("quasi");
    let w = build_window(&e.window).expect("window");
    let f = e.function.build(&e.name, w.model()).expect("quasi builds");
    let c = fourier_coefficient(&f, SQRT_2, 2000.0).expect("coefficient").value;
    let target = Complex64::new(1.0, 0.0) / Complex64::new(0.0, 2.0);
    let a = (c - target).norm() <= 0.01;
    let s = spectrum_scan(&f, &[0.5, 1.0, SQRT_2, 2.0], 2000.0, 0.1).expect("spectrum");
    let mut found: Vec<f64> = s.coefficients.iter().map(|c| c.0).collect();
    found.sort_by(f64::total_cmp);
    let b = found == vec![1.0, SQRT_2];
    let p = TrigPoly::new(vec![(Complex64::new(1.0, 0.0), 1.0)]);
    let exp = p.to_function("exp", w.model().clone());
    let m = bohr_mean(&exp, 1000.0).expect("mean");
    let bound = 0.002 + m.quadrature_bound(p.second_derivative_bound());
    let cc = m.value.norm() <= bound;
    line(
        a && b && cc,
        format!(
            "harmonic: |c(sqrt2) - 1/(2i)| = {:.2e}; spectrum {found:?}; |M(e^it)| = {:.2e} <= {bound:.2e}",
            (c - target).norm(),
            m.value.norm()
        ),
    )
}

fn criterion7(h: &mut Harness) -> Line {
    let mut all = Vec::new();
    files(&h.first, &mut all);
    let certs: Vec<PathBuf> = all.iter().filter(|p| is_certificate(p)).cloned().collect();
    let v = verify_lines(&certs);
    let mut bad = 0;
    for (p, l) in certs.iter().zip(&v) {
        let stored = read_json(p).map(|c| CertStored::of(&c)).unwrap_or_default();
        let fine = l["matches_stored"].as_bool() == Some(true)
            && l["byte_identical"].as_bool() == Some(true)
            && l["pass"].as_bool() == stored.pass;
        if !fine {
            bad += 1;
        }
    }
    bad += certs.len().saturating_sub(v.len());

    let first = h.first.display().to_string();
    let second = h.second.display().to_string();
    for cmd in &h.log {
        let mut args = cmd.clone();
        let n = args.len();
        args[n - 1] = args[n - 1].replacen(&first, &second, 1);
        exec(&args);
    }
    let mut differing = Vec::new();
    let mut compared = 0;
    for p in &all {
        let name = p.file_name().unwrap().to_string_lossy();
        if name.starts_with("timings-") {
            continue;
        }
        compared += 1;
        let q = h.second.join(p.strip_prefix(&h.first).unwrap());
        if fs::read(p).ok() != fs::read(&q).ok() {
            differing.push(name.into_owned());
        }
    }
    let ok = bad == 0 && differing.is_empty() && !certs.is_empty();
    let mut d = format!(
        "certificates: {} re-verified, {bad} mismatches; rerun of {} commands: {compared} files compared, {} differ",
        certs.len(),
        h.log.len(),
        differing.len()
    );
    if !differing.is_empty() {
        d.push_str(&format!(" ({})", differing[..differing.len().min(5)].join(", ")));
    }
    line(ok, d)
}

#[derive(Default)]
struct CertStored {
    pass: Option<bool>,
}

impl CertStored {
    fn of(c: &Value) -> Self {
        let body = &c["certificate"]["body"];
        let pass = body["pass"].as_bool().or_else(|| body["output"]["pass"].as_bool());
        Self { pass }
    }
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("temp dir");
    let mut h = Harness {
        first: tmp.path().join("first"),
        second: tmp.path().join("second"),
        log: Vec::new(),
    };
    let names = [
        "1 wu counterexample",
        "2 consistency suite",
        "3 non-ap rejection",
        "4 transform round trip",
        "5 inverse symmetry",
        "6 harmonic instruments",
        "7 certificate ecosystem",
    ];
    let mut results = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let start = Instant::now();
        let l = match i {
            0 => criterion1(&mut h),
            1 => criterion2(&mut h),
            2 => criterion3(&mut h),
            3 => criterion4(&mut h),
            4 => criterion5(),
            5 => criterion6(),
            _ => criterion7(&mut h),
        };
        println!(
            "criterion {name}: {} [{:.1}s] {}",
            if l.ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            l.detail
        );
        results.push(l.ok);
    }
    let passed = results.iter().filter(|x| **x).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
