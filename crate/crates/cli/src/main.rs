use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use apkit::certificate::{write_atomic, Certificate, CertificateBody, Provenance, Reverification};
use apkit::checkers::bochner::cauchy_subsequence_extract;
use apkit::checkers::cover::{maak_cover_search, range_net, translate_net, MaakCover};
use apkit::checkers::density::{density_check, DensityBudget, DensityMode};
use apkit::checkers::periods::{period_defect, period_scan};
use apkit::checkers::uc::uc_modulus_scan;
use apkit::checkers::verdict::Verdict;
use apkit::corpus::{override_window, CorpusEntry, Manifest};
use apkit::harmonic::{spectrum_scan, wu_ruc_defect};
use apkit::rows::Translates;
use apkit::transforms::{
    cover_to_period_set, left_cover_to_twosided, part6_density, period_set_inverse, period_set_to_left_cover,
    periods_on_side, weak_periods_to_cover,
};
use apkit::{Element, FunctionTable, GroupModel, Motion, Side, WindowSpec, TOOL_VERSION};

#[derive(Parser)]
#[command(name = "apkit", version, about = "Almost periodicity checks on sampled groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Common {
    /// Corpus manifest; the bundled one by default.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Output directory; APKIT_OUT takes precedence.
    #[arg(long, default_value = "apkit-out")]
    out: PathBuf,
    /// Accepted for compatibility; checks run on one thread.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Reserved; every pipeline is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Checker {
    Maak,
    Net,
    Periods,
    Density,
    Uc,
    Bochner,
    Range,
}

impl Checker {
    fn name(self) -> &'static str {
        match self {
            Checker::Maak => "maak",
            Checker::Net => "net",
            Checker::Periods => "periods",
            Checker::Density => "density",
            Checker::Uc => "uc",
            Checker::Bochner => "bochner",
            Checker::Range => "range",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    FiniteLeft,
    FiniteRight,
    Compact,
    Weak,
}

#[derive(Clone, Copy, ValueEnum)]
enum Transform {
    /// Left cover to two-sided cover.
    Lemma51,
    /// Two-sided cover to periods with a finite density witness.
    Part5,
    /// Left periods with a finite witness to a left cover.
    Part6,
    /// Periods with a weak witness to a two-sided cover.
    Part14,
    /// Inverted period set.
    Inverse,
}

#[derive(Subcommand)]
enum Command {
    /// Run one checker on a corpus function.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        function: String,
        /// One of maak, net, periods, density, uc, bochner, range.
        #[arg(long)]
        checker: String,
        #[arg(long, default_value = "left")]
        side: String,
        #[arg(long)]
        epsilon: f64,
        /// Window parameter override, `key=value`; repeatable.
        #[arg(long = "window")]
        window: Vec<String>,
        /// Density mode; chosen from the window and side by default.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Bochner sequence `s_n = n * step` on a one-dimensional model;
        /// the candidates are used when absent, four times over on a finite group.
        #[arg(long = "seq-step", requires = "seq_count")]
        seq_step: Option<f64>,
        #[arg(long = "seq-count", requires = "seq_step")]
        seq_count: Option<usize>,
    },
    /// Re-verify certificate files.
    Verify {
        #[arg(required = true)]
        certificates: Vec<PathBuf>,
    },
    /// Convert a certificate and write the receipt.
    Convert {
        #[command(flatten)]
        common: Common,
        certificate: PathBuf,
        #[arg(long, value_enum)]
        transform: Transform,
        /// Density certificate for part6 and part14 when the input is a
        /// period set.
        #[arg(long)]
        density: Option<PathBuf>,
        #[arg(long = "max-sets")]
        max_sets: Option<usize>,
    },
    /// Reproduce a named counterexample as CSV tables.
    Counterexample {
        #[command(flatten)]
        common: Common,
        name: String,
    },
    /// Fourier coefficients of a corpus function.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        function: String,
        /// Comma-separated probe frequencies.
        #[arg(long, value_delimiter = ',', required = true)]
        omegas: Vec<f64>,
        #[arg(long = "half-width")]
        half_width: f64,
        #[arg(long, default_value_t = 0.1)]
        threshold: f64,
        #[arg(long = "window")]
        window: Vec<String>,
    },
}

enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::Check {
            common,
            function,
            checker,
            side,
            epsilon,
            window,
            mode,
            seq_step,
            seq_count,
        } => {
            let checker = Checker::from_str(&checker, true).map_err(|_| anyhow!("unknown checker {checker:?}"))?;
            let side: Side = side.parse()?;
            cmd_check(&common, &function, checker, side, epsilon, &window, mode, seq_step.zip(seq_count))
        }
        Command::Verify { certificates } => cmd_verify(&certificates),
        Command::Convert {
            common,
            certificate,
            transform,
            density,
            max_sets,
        } => cmd_convert(&common, &certificate, transform, density.as_deref(), max_sets),
        Command::Counterexample { common, name } => cmd_counterexample(&common, &name),
        Command::Spectrum {
            common,
            function,
            omegas,
            half_width,
            threshold,
            window,
        } => cmd_spectrum(&common, &function, &omegas, half_width, threshold, &window),
    }
}

fn out_dir(common: &Common) -> PathBuf {
    match std::env::var_os("APKIT_OUT") {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => common.out.clone(),
    }
}

fn manifest(common: &Common) -> anyhow::Result<Manifest> {
    Ok(match &common.manifest {
        Some(p) => Manifest::load(p)?,
        None => Manifest::bundled(),
    })
}

/// Corpus entry with window overrides applied.
fn entry(common: &Common, name: &str, overrides: &[String]) -> anyhow::Result<CorpusEntry> {
    let m = manifest(common)?;
    let mut e = m.get(name)?.clone();
    for kv in overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| anyhow!("window override {kv:?} is not key=value"))?;
        e.window = override_window(&e.window, k.trim(), v.trim())?;
    }
    Ok(e)
}

fn setup(e: &CorpusEntry) -> anyhow::Result<(FunctionTable, WindowSpec)> {
    let w = apkit::build_window(&e.window)?;
    let f = e.function.build(&e.name, w.model())?;
    Ok((f, w))
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    write_atomic(path, text).with_context(|| format!("writing {}", path.display()))
}

#[derive(Serialize)]
struct CheckLine {
    checker: String,
    side: Side,
    epsilon: f64,
    kind: String,
    pass: bool,
    budget: f64,
    defect: f64,
    certificate: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<serde_json::Value>,
}

#[derive(Serialize)]
struct RunReport {
    tool_version: &'static str,
    function: String,
    corpus_entry: CorpusEntry,
    window_fingerprint: String,
    checks: Vec<CheckLine>,
    pass: bool,
}

fn default_mode(w: &WindowSpec, side: Side) -> DensityMode {
    match (w.model(), side) {
        (GroupModel::RealGrid { dim: 1, .. }, _) => DensityMode::Compact,
        (_, Side::Right) => DensityMode::FiniteRight,
        (m, Side::TwoSided) if !m.is_abelian() => DensityMode::Weak,
        _ => DensityMode::FiniteLeft,
    }
}

fn to_mode(m: Mode) -> DensityMode {
    match m {
        Mode::FiniteLeft => DensityMode::FiniteLeft,
        Mode::FiniteRight => DensityMode::FiniteRight,
        Mode::Compact => DensityMode::Compact,
        Mode::Weak => DensityMode::Weak,
    }
}

fn provenance(e: &CorpusEntry, op: &str, params: BTreeMap<String, serde_json::Value>) -> Provenance {
    Provenance {
        operation: op.into(),
        function_name: e.name.clone(),
        function: e.function.clone(),
        window: e.window.clone(),
        params,
    }
}

/// `s_n = n * step` for `n = 1..=count`.
fn arithmetic_sequence(model: &GroupModel, step: f64, count: usize) -> anyhow::Result<Vec<Element>> {
    if !(step > 0.0) || count < 2 {
        bail!("sequence needs a positive step and at least two terms");
    }
    match model {
        GroupModel::RealGrid { dim: 1, .. } => Ok((1..=count).map(|n| Element::scalar(n as f64 * step)).collect()),
        GroupModel::Lattice { dim: 1 } if step.fract() == 0.0 => {
            Ok((1..=count).map(|n| Element::integer(n as i64 * step as i64)).collect())
        }
        _ => bail!("arithmetic sequences need a one-dimensional real or integer model with matching step"),
    }
}

fn cmd_check(
    common: &Common,
    name: &str,
    checker: Checker,
    side: Side,
    epsilon: f64,
    overrides: &[String],
    mode: Option<Mode>,
    seq: Option<(f64, usize)>,
) -> anyhow::Result<Outcome> {
    if !(epsilon > 0.0) {
        bail!("epsilon must be positive");
    }
    let e = entry(common, name, overrides)?;
    let (f, w) = setup(&e)?;
    let dir = out_dir(common);
    let stem = format!("{}-{}-{}-{}", e.name, checker.name(), side, epsilon);
    let mut params = BTreeMap::new();
    params.insert("epsilon".to_string(), serde_json::json!(epsilon));
    params.insert("side".to_string(), serde_json::json!(side));
    let mut bodies: Vec<(String, &'static str, CertificateBody, Option<serde_json::Value>)> = Vec::new();
    let mut timings = BTreeMap::new();
    let start = Instant::now();
    match checker {
        Checker::Maak => {
            let v = maak_cover_search(&f, epsilon, side, &w)?;
            let s = serde_json::json!({"sets": v.certificate.len()});
            bodies.push((stem.clone(), "maak_cover_search", CertificateBody::MaakCover(v), Some(s)));
        }
        Checker::Net => {
            let v = translate_net(&f, epsilon, side, &w)?;
            let s = serde_json::json!({"centers": v.certificate.centers.len()});
            bodies.push((stem.clone(), "translate_net", CertificateBody::EpsilonNet(v), Some(s)));
        }
        Checker::Range => {
            let v = range_net(&f, epsilon, &w)?;
            let s = serde_json::json!({"centers": v.certificate.centers.len()});
            bodies.push((stem.clone(), "range_net", CertificateBody::EpsilonNet(v), Some(s)));
        }
        Checker::Periods | Checker::Density => {
            let p = period_scan(&f, epsilon, side, &w)?;
            let worst = p.max_defect();
            let pv = Verdict::new(p.clone(), epsilon, worst, w.fingerprint());
            let s = serde_json::json!({"periods": p.taus.len()});
            bodies.push((format!("{stem}-periods"), "period_scan", CertificateBody::PeriodSet(pv), Some(s)));
            if matches!(checker, Checker::Density) {
                let m = mode.map(to_mode).unwrap_or_else(|| default_mode(&w, side));
                params.insert("mode".to_string(), serde_json::json!(m));
                let d = density_check(&p, &w, m, DensityBudget::default())?;
                let s = serde_json::json!({
                    "mode": m,
                    "left": d.certificate.left.len(),
                    "right": d.certificate.right.len(),
                    "residual": d.certificate.residual.len(),
                    "first_residual": d.certificate.residual.first(),
                });
                bodies.push((format!("{stem}-density"), "density_check", CertificateBody::Density(d), Some(s)));
            }
        }
        Checker::Uc => {
            let v = uc_modulus_scan(&f, &[epsilon], side, &w, None)?;
            let s = serde_json::to_value(&v.certificate.table).ok();
            bodies.push((stem.clone(), "uc_modulus_scan", CertificateBody::UcModulus(v), s));
        }
        Checker::Bochner => {
            let seq = match seq {
                Some((step, count)) => {
                    params.insert("seq_step".to_string(), serde_json::json!(step));
                    params.insert("seq_count".to_string(), serde_json::json!(count));
                    arithmetic_sequence(w.model(), step, count)?
                }
                // a finite group is walked four times so every translate recurs
                None if matches!(w.model(), GroupModel::Cayley(_)) => w.candidates().repeat(4),
                None => w.candidates().to_vec(),
            };
            let v = cauchy_subsequence_extract(&f, &seq, &[epsilon], side, &w)?;
            let s = serde_json::json!({"survivors": v.certificate.survivors().len(), "failed_stage": v.certificate.failed_stage});
            bodies.push((stem.clone(), "cauchy_subsequence_extract", CertificateBody::Bochner(v), Some(s)));
        }
    }
    timings.insert(checker.name().to_string(), start.elapsed().as_secs_f64());
    let mut checks = Vec::new();
    for (file_stem, op, body, summary) in bodies {
        let (pass, budget, defect) = body.stored();
        let kind = body.kind().to_string();
        let cert = Certificate::new(body, provenance(&e, op, params.clone()));
        let file = format!("{file_stem}.json");
        write(&dir.join(&file), &cert.to_json())?;
        checks.push(CheckLine {
            checker: checker.name().into(),
            side,
            epsilon,
            kind,
            pass,
            budget,
            defect,
            certificate: file,
            summary,
        });
    }
    let pass = checks.iter().all(|c| c.pass);
    let report = RunReport {
        tool_version: TOOL_VERSION,
        function: e.name.clone(),
        window_fingerprint: w.fingerprint().to_string(),
        corpus_entry: e,
        checks,
        pass,
    };
    write(&dir.join(format!("report-{stem}.json")), &json(&report))?;
    write(&dir.join(format!("timings-{stem}.json")), &json(&timings))?;
    println!("{}", json(&report.checks).trim_end());
    Ok(if pass { Outcome::Pass } else { Outcome::Fail })
}

fn load(path: &Path) -> anyhow::Result<Certificate> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Certificate::parse(&text)?)
}

#[derive(Serialize)]
struct VerifyLine {
    certificate: String,
    #[serde(flatten)]
    result: Reverification,
    byte_identical: bool,
}

fn cmd_verify(paths: &[PathBuf]) -> anyhow::Result<Outcome> {
    let mut ok = true;
    let mut lines = Vec::new();
    for p in paths {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let cert = Certificate::parse(&text)?;
        let r = cert.verify()?;
        let same = cert.to_json() == text;
        ok &= r.pass && r.matches_stored && same;
        lines.push(VerifyLine {
            certificate: p.display().to_string(),
            result: r,
            byte_identical: same,
        });
    }
    println!("{}", json(&lines).trim_end());
    Ok(if ok { Outcome::Pass } else { Outcome::Fail })
}

fn cover_of(c: &Certificate) -> anyhow::Result<MaakCover> {
    match &c.certificate {
        CertificateBody::MaakCover(v) => Ok(v.certificate.clone()),
        CertificateBody::CoverReceipt(r) => Ok(r.output.certificate.clone()),
        other => bail!("expected a cover certificate, got {}", other.kind()),
    }
}

fn cmd_convert(
    common: &Common,
    path: &Path,
    transform: Transform,
    density: Option<&Path>,
    max_sets: Option<usize>,
) -> anyhow::Result<Outcome> {
    let input = load(path)?;
    let (f, w) = input.rebuild()?;
    let density_of = |fallback: Option<_>| -> anyhow::Result<apkit::checkers::density::DensityWitness> {
        if let Some(d) = density {
            match load(d)?.certificate {
                CertificateBody::Density(v) => Ok(v.certificate),
                other => bail!("expected a density certificate, got {}", other.kind()),
            }
        } else {
            fallback.ok_or_else(|| anyhow!("--density is required for this input"))
        }
    };
    let (op, body) = match transform {
        Transform::Lemma51 => {
            let r = left_cover_to_twosided(&f, &cover_of(&input)?, &w, max_sets)?;
            ("left_cover_to_twosided", CertificateBody::CoverReceipt(r))
        }
        Transform::Part5 => {
            let r = cover_to_period_set(&f, &cover_of(&input)?, &w)?;
            ("cover_to_period_set", CertificateBody::PeriodReceipt(r))
        }
        Transform::Part6 | Transform::Part14 => {
            let (p, fallback) = match &input.certificate {
                CertificateBody::PeriodSet(v) => (v.certificate.clone(), None),
                CertificateBody::PeriodReceipt(r) => (
                    r.output.certificate.periods.clone(),
                    Some(r.output.certificate.density.clone()),
                ),
                other => bail!("expected periods, got {}", other.kind()),
            };
            if matches!(transform, Transform::Part6) {
                let p = if p.side == Side::Left { p } else { periods_on_side(&f, &p, Side::Left, &w)? };
                let d = match (density, fallback) {
                    (None, Some(carried)) => part6_density(&p, &carried, &w)?.certificate,
                    (_, fb) => density_of(fb)?,
                };
                let r = period_set_to_left_cover(&f, &p, &d, &w)?;
                ("period_set_to_left_cover", CertificateBody::CoverReceipt(r))
            } else {
                let d = density_of(fallback)?;
                let r = weak_periods_to_cover(&f, &p, &d, &w)?;
                ("weak_periods_to_cover", CertificateBody::CoverReceipt(r))
            }
        }
        Transform::Inverse => {
            let p = match &input.certificate {
                CertificateBody::PeriodSet(v) => v.certificate.clone(),
                other => bail!("expected a period set, got {}", other.kind()),
            };
            let inv = period_set_inverse(&f, &p, &w)?;
            if !inv.dropped.is_empty() {
                eprintln!("notice: {} inverses outside the window were dropped", inv.dropped.len());
            }
            let worst = inv.periods.max_defect();
            let eps = inv.periods.epsilon;
            ("period_set_inverse", CertificateBody::PeriodSet(Verdict::new(inv.periods, eps, worst, w.fingerprint())))
        }
    };
    let (pass, budget, defect) = body.stored();
    let mut params = input.provenance.params.clone();
    params.insert("input".to_string(), serde_json::json!(path.file_name().map(|n| n.to_string_lossy())));
    let cert = Certificate::new(
        body,
        Provenance {
            operation: op.into(),
            params,
            ..input.provenance.clone()
        },
    );
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let file = out_dir(common).join(format!("{stem}-{op}.json"));
    write(&file, &cert.to_json())?;
    println!(
        "{}",
        json(&serde_json::json!({"receipt": file.display().to_string(), "pass": pass, "budget": budget, "defect": defect}))
            .trim_end()
    );
    Ok(if pass { Outcome::Pass } else { Outcome::Fail })
}

fn csv_writer(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow!("csv: {e}"))?;
    write(path, &String::from_utf8(bytes)?)
}

const WU_THETAS: [f64; 6] = [1.0, 0.3, 0.1, 0.03, 0.01, 0.003];

fn cmd_counterexample(common: &Common, name: &str) -> anyhow::Result<Outcome> {
    if name != "wu" {
        bail!("unknown counterexample {name:?} (known: wu)");
    }
    let dir = out_dir(common);
    let e = entry(common, "wu", &[])?;
    let (f, w) = setup(&e)?;

    let mut sweep = Vec::new();
    let mut sweep_ok = true;
    for &th in &WU_THETAS {
        let d = wu_ruc_defect(th)?;
        if th == 0.01 {
            sweep_ok = d.envelope >= 1.99 && d.grid_sup >= 1.9;
        }
        sweep.push(vec![th.to_string(), d.grid_sup.to_string(), d.envelope.to_string(), d.argmax_u.to_string()]);
    }
    csv_writer(&dir.join("wu_theta_sweep.csv"), &["theta", "grid_sup", "envelope", "argmax_u"], sweep)?;

    let rows = Translates::new(&f, &w, Side::Right)?;
    let mut per = Vec::new();
    let mut worst: f64 = 0.0;
    for k in -3..=3 {
        for y in [-5.0, 0.0, 5.0] {
            let tau = Element::Motion(Motion::from_parts(2.0 * std::f64::consts::PI * k as f64, y, 0.0));
            let (d, _) = period_defect(&rows, &tau)?;
            worst = worst.max(d);
            per.push(vec![k.to_string(), y.to_string(), d.to_string()]);
        }
    }
    csv_writer(&dir.join("wu_right_periods.csv"), &["k", "y", "defect"], per)?;
    let periods_ok = worst <= 1e-12;

    let p = period_scan(&f, 0.1, Side::Right, &w)?;
    let dens = density_check(&p, &w, DensityMode::FiniteRight, DensityBudget::default())?;
    let fset = &dens.certificate.left;
    let density_ok = dens.pass && fset.len() <= 40;
    let mut drows = Vec::new();
    for a in fset {
        let m = a.as_motion().ok_or_else(|| anyhow!("motion element expected"))?;
        drows.push(vec![m.z.re.to_string(), m.z.im.to_string(), m.w.arg().to_string()]);
    }
    csv_writer(&dir.join("wu_density_witness.csv"), &["x", "y", "theta"], drows)?;
    let cert = Certificate::new(
        CertificateBody::Density(dens.clone()),
        provenance(&e, "density_check", BTreeMap::from([("epsilon".to_string(), serde_json::json!(0.1))])),
    );
    write(&dir.join("wu_density.json"), &cert.to_json())?;

    let report = serde_json::json!({
        "tool_version": TOOL_VERSION,
        "counterexample": "wu",
        "window_fingerprint": w.fingerprint(),
        "theta_sweep_ok": sweep_ok,
        "right_period_max_defect": worst,
        "right_periods_ok": periods_ok,
        "right_periods_found": p.taus.len(),
        "density_factor_size": fset.len(),
        "density_residual": dens.certificate.residual.len(),
        "density_ok": density_ok,
        "pass": sweep_ok && periods_ok && density_ok,
    });
    write(&dir.join("report-wu.json"), &json(&report))?;
    println!("{}", json(&report).trim_end());
    Ok(if sweep_ok && periods_ok && density_ok { Outcome::Pass } else { Outcome::Fail })
}

fn cmd_spectrum(
    common: &Common,
    name: &str,
    omegas: &[f64],
    half_width: f64,
    threshold: f64,
    overrides: &[String],
) -> anyhow::Result<Outcome> {
    let e = entry(common, name, overrides)?;
    let (f, _) = setup(&e)?;
    let s = spectrum_scan(&f, omegas, half_width, threshold)?;
    let dir = out_dir(common);
    let rows = s
        .coefficients
        .iter()
        .map(|(w, c)| vec![w.to_string(), c.re.to_string(), c.im.to_string(), c.norm().to_string()])
        .collect();
    csv_writer(&dir.join(format!("spectrum-{}.csv", e.name)), &["omega", "re", "im", "abs"], rows)?;
    let report = serde_json::json!({"tool_version": TOOL_VERSION, "function": e.name, "spectrum": s});
    write(&dir.join(format!("spectrum-{}.json", e.name)), &json(&report))?;
    println!("{}", json(&report).trim_end());
    Ok(Outcome::Pass)
}

