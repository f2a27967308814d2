//! Certificate envelope: schema, provenance and independent
//! re-verification from the stored function spec and window document.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::checkers::bochner::{verify_bochner, BochnerCertificate};
use crate::checkers::cover::{verify_cover, verify_net, EpsilonNet, MaakCover};
use crate::checkers::density::{verify_density, DensityWitness};
use crate::checkers::periods::{verify_periods, PeriodSet};
use crate::checkers::uc::{uc_modulus_scan, verify_uc_witnesses, UcModulus};
use crate::checkers::verdict::{passes, Verdict};
use crate::corpus::FunctionSpec;
use crate::function::FunctionTable;
use crate::rows::Translates;
use crate::transforms::{PeriodsWithDensity, TransformReceipt};
use crate::window::{build_window, WindowDoc, WindowSpec};
use crate::{ApError, Result, TOOL_VERSION};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "body", rename_all = "snake_case")]
pub enum CertificateBody {
    MaakCover(Verdict<MaakCover>),
    EpsilonNet(Verdict<EpsilonNet>),
    PeriodSet(Verdict<PeriodSet>),
    Density(Verdict<DensityWitness>),
    UcModulus(Verdict<UcModulus>),
    Bochner(Verdict<BochnerCertificate>),
    CoverReceipt(TransformReceipt<MaakCover>),
    PeriodReceipt(TransformReceipt<PeriodsWithDensity>),
}

impl CertificateBody {
    pub fn kind(&self) -> &'static str {
        match self {
            CertificateBody::MaakCover(_) => "maak_cover",
            CertificateBody::EpsilonNet(_) => "epsilon_net",
            CertificateBody::PeriodSet(_) => "period_set",
            CertificateBody::Density(_) => "density",
            CertificateBody::UcModulus(_) => "uc_modulus",
            CertificateBody::Bochner(_) => "bochner",
            CertificateBody::CoverReceipt(_) => "cover_receipt",
            CertificateBody::PeriodReceipt(_) => "period_receipt",
        }
    }

    /// Stored `(pass, budget, defect)` of the certificate's verdict.
    pub fn stored(&self) -> (bool, f64, f64) {
        fn of<C>(v: &Verdict<C>) -> (bool, f64, f64) {
            (v.pass, v.budget, v.defect)
        }
        match self {
            CertificateBody::MaakCover(v) => of(v),
            CertificateBody::EpsilonNet(v) => of(v),
            CertificateBody::PeriodSet(v) => of(v),
            CertificateBody::Density(v) => of(v),
            CertificateBody::UcModulus(v) => of(v),
            CertificateBody::Bochner(v) => of(v),
            CertificateBody::CoverReceipt(r) => of(&r.output),
            CertificateBody::PeriodReceipt(r) => of(&r.output),
        }
    }

    fn fingerprint(&self) -> &str {
        match self {
            CertificateBody::MaakCover(v) => &v.window_fingerprint,
            CertificateBody::EpsilonNet(v) => &v.window_fingerprint,
            CertificateBody::PeriodSet(v) => &v.window_fingerprint,
            CertificateBody::Density(v) => &v.window_fingerprint,
            CertificateBody::UcModulus(v) => &v.window_fingerprint,
            CertificateBody::Bochner(v) => &v.window_fingerprint,
            CertificateBody::CoverReceipt(r) => &r.output.window_fingerprint,
            CertificateBody::PeriodReceipt(r) => &r.output.window_fingerprint,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Producing operation, e.g. `maak_cover_search`.
    pub operation: String,
    pub function_name: String,
    pub function: FunctionSpec,
    pub window: WindowDoc,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: u32,
    pub tool_version: String,
    pub window_fingerprint: String,
    pub provenance: Provenance,
    pub certificate: CertificateBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reverification {
    pub kind: String,
    pub pass: bool,
    pub budget: f64,
    pub defect: f64,
    /// Recomputed verdict equals the stored one bit for bit.
    pub matches_stored: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn new(body: CertificateBody, provenance: Provenance) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            window_fingerprint: body.fingerprint().to_string(),
            provenance,
            certificate: body,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificates serialize");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ApError::Invalid(format!("certificate JSON: {e}")))?;
        match v.get("schema_version").and_then(|s| s.as_u64()) {
            Some(s) if s == SCHEMA_VERSION as u64 => {}
            Some(s) => {
                return Err(ApError::Invalid(format!(
                    "certificate schema {s} is not supported (expected {SCHEMA_VERSION})"
                )))
            }
            None => return Err(ApError::Invalid("certificate has no schema_version".into())),
        }
        serde_json::from_value(v).map_err(|e| ApError::Invalid(format!("certificate: {e}")))
    }

    /// Function and window rebuilt from provenance; the window fingerprint
    /// must match.
    pub fn rebuild(&self) -> Result<(FunctionTable, WindowSpec)> {
        let w = build_window(&self.provenance.window)?;
        if w.fingerprint() != self.window_fingerprint || self.certificate.fingerprint() != self.window_fingerprint {
            return Err(ApError::Invalid("window fingerprint does not match the provenance window".into()));
        }
        let f = self.provenance.function.build(&self.provenance.function_name, w.model())?;
        Ok((f, w))
    }

    /// Recomputes the certificate's defect from scratch.
    pub fn verify(&self) -> Result<Reverification> {
        let (f, w) = self.rebuild()?;
        verify_body(&self.certificate, &f, &w)
    }
}

fn density_periods_ok(f: &FunctionTable, wit: &DensityWitness, w: &WindowSpec) -> Result<bool> {
    let rows = Translates::new(f, w, wit.side)?;
    let e = w.model().identity();
    for tau in &wit.periods {
        if rows.distance_within(tau, &e, wit.epsilon)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Re-verification of one certificate body against `f` on `w`.
pub fn verify_body(body: &CertificateBody, f: &FunctionTable, w: &WindowSpec) -> Result<Reverification> {
    let (stored_pass, budget, stored_defect) = body.stored();
    let mut notes = Vec::new();
    let (pass, defect) = match body {
        CertificateBody::MaakCover(v) => {
            let c = verify_cover(f, &v.certificate, w)?;
            if let Some(g) = c.coverage_gap {
                notes.push(format!("not covered: {g}"));
            }
            (c.pass && passes(c.defect, budget), c.defect)
        }
        CertificateBody::EpsilonNet(v) => {
            let r = verify_net(f, &v.certificate, w)?;
            (passes(r, budget), r)
        }
        CertificateBody::PeriodSet(v) => {
            let c = verify_periods(f, &v.certificate, w)?;
            if c.mismatched > 0 {
                notes.push(format!("{} stored defects differ", c.mismatched));
            }
            (c.pass && passes(c.max_defect, budget), c.max_defect)
        }
        CertificateBody::Density(v) => {
            let c = verify_density(&v.certificate, w)?;
            if !c.residual_matches {
                notes.push("stored residual differs".into());
            }
            let periods_ok = density_periods_ok(f, &v.certificate, w)?;
            if !periods_ok {
                notes.push("a listed period exceeds epsilon".into());
            }
            let d = c.residual.len() as f64;
            (c.residual_matches && periods_ok && passes(d, budget), d)
        }
        CertificateBody::UcModulus(v) => {
            let m = &v.certificate;
            let eps: Vec<f64> = m.table.iter().map(|e| e.epsilon).collect();
            let again = uc_modulus_scan(f, &eps, m.side, w, Some(m.scale.clone()))?;
            let same = again.certificate == *m;
            if !same {
                notes.push("recomputed modulus differs".into());
            }
            verify_uc_witnesses(f, m)?;
            (same && again.pass, again.defect)
        }
        CertificateBody::Bochner(v) => {
            let bad = verify_bochner(f, &v.certificate, w)?;
            if bad > 0 {
                notes.push(format!("{bad} stages fail re-verification"));
            }
            let d = match v.certificate.failed_stage {
                Some(s) => (v.certificate.schedule.len() - s) as f64,
                None => 0.0,
            };
            (bad == 0 && passes(d, budget), d)
        }
        CertificateBody::CoverReceipt(r) => {
            let c = verify_cover(f, &r.output.certificate, w)?;
            let void = r.notes.iter().any(|n| n.starts_with("guarantee void"));
            (c.pass && !void, c.defect)
        }
        CertificateBody::PeriodReceipt(r) => {
            let p = verify_periods(f, &r.output.certificate.periods, w)?;
            let d = verify_density(&r.output.certificate.density, w)?;
            (p.pass && d.residual_matches, p.max_defect)
        }
    };
    Ok(Reverification {
        kind: body.kind().to_string(),
        pass,
        budget,
        defect,
        matches_stored: pass == stored_pass && defect.to_bits() == stored_defect.to_bits(),
        notes,
    })
}

/// Writes `text` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &std::path::Path, text: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(std::path::Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)
}
