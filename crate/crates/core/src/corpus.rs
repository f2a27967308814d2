//! Test-function corpus: function specs, manifest entries and the bundled
//! manifest.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::function::{zmod_character, EvalError, FunctionTable};
use crate::group::{s3_permutations, GroupModel};
use crate::harmonic::{wu_function, TrigPoly};
use crate::window::WindowDoc;
use crate::{ApError, Result};

/// How to build a function; serialized as `{"kind", "params"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// `C^k` constant, one `[re, im]` per component.
    Constant { value: Vec<[f64; 2]> },
    /// `sum c e^{i omega t}` from `[re, im, omega]` terms plus
    /// `sum a sin(b t)` from `[a, b]` pairs.
    TrigPoly {
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        terms: Vec<[f64; 3]>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        sines: Vec<[f64; 2]>,
    },
    /// `n -> e^{2 pi i n / m}` on the integers.
    ZmodCharacter { m: i64 },
    /// On `zN`, `j -> e^{2 pi i index j / N}`; on `s3`, index 0 is the
    /// trivial character, 1 the sign and 2 the standard character.
    CayleyCharacter { index: usize },
    /// `e^{i Re(z / w)}` on `E(2)`.
    Wu,
    Arctan,
    SinTSquared,
    /// Lookup table on a finite group: row `i` is `f(#i)`.
    CustomTable { values: Vec<Vec<[f64; 2]>> },
}

fn c(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

fn one_dim(model: &GroupModel, kind: &str) -> Result<()> {
    match model {
        GroupModel::RealGrid { dim: 1, .. } | GroupModel::Lattice { dim: 1 } => Ok(()),
        m => Err(ApError::Contract(format!("{kind} is defined on the line, not on {}", m.kind()))),
    }
}

impl FunctionSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            FunctionSpec::Constant { .. } => "constant",
            FunctionSpec::TrigPoly { .. } => "trig_poly",
            FunctionSpec::ZmodCharacter { .. } => "zmod_character",
            FunctionSpec::CayleyCharacter { .. } => "cayley_character",
            FunctionSpec::Wu => "wu",
            FunctionSpec::Arctan => "arctan",
            FunctionSpec::SinTSquared => "sin_t_squared",
            FunctionSpec::CustomTable { .. } => "custom_table",
        }
    }

    /// The function on `model`; fails when the kind does not live there.
    pub fn build(&self, name: &str, model: &GroupModel) -> Result<FunctionTable> {
        let m = model.clone();
        Ok(match self {
            FunctionSpec::Constant { value } => {
                if value.is_empty() {
                    return Err(ApError::Invalid("constant needs at least one component".into()));
                }
                FunctionTable::constant(m, value.iter().map(|v| c(*v)).collect()).renamed(name)
            }
            FunctionSpec::TrigPoly { terms, sines } => {
                one_dim(model, "trig_poly")?;
                let mut p = TrigPoly::sin_sum(&sines.iter().map(|s| (s[0], s[1])).collect::<Vec<_>>());
                p.terms.extend(terms.iter().map(|t| (Complex64::new(t[0], t[1]), t[2])));
                if p.terms.is_empty() {
                    return Err(ApError::Invalid("trig_poly needs terms or sines".into()));
                }
                p.to_function(name, m)
            }
            FunctionSpec::ZmodCharacter { m: modulus } => {
                if !matches!(model, GroupModel::Lattice { dim: 1 }) {
                    return Err(ApError::Contract(format!("zmod_character lives on Z, not on {}", model.kind())));
                }
                if *modulus <= 0 {
                    return Err(ApError::Invalid("modulus must be positive".into()));
                }
                zmod_character(*modulus, m).renamed(name)
            }
            FunctionSpec::CayleyCharacter { index } => {
                let GroupModel::Cayley(g) = model else {
                    return Err(ApError::Contract(format!("cayley_character needs a finite group, not {}", model.kind())));
                };
                let values: Vec<Complex64> = if g.name() == "s3" {
                    s3_permutations()
                        .iter()
                        .map(|p| {
                            let fixed = (0..3).filter(|&i| p[i] == i).count();
                            let sign = if fixed == 1 { -1.0 } else { 1.0 };
                            match index {
                                0 => Ok(1.0),
                                1 => Ok(sign),
                                2 => Ok(fixed as f64 - 1.0),
                                _ => Err(ApError::Invalid(format!("s3 has characters 0..=2, not {index}"))),
                            }
                            .map(|v| Complex64::new(v, 0.0))
                        })
                        .collect::<Result<_>>()?
                } else if let Some(n) = g.name().strip_prefix('z').and_then(|s| s.parse::<usize>().ok()) {
                    (0..n)
                        .map(|j| Complex64::from_polar(1.0, 2.0 * PI * ((index * j) % n) as f64 / n as f64))
                        .collect()
                } else {
                    return Err(ApError::Contract(format!("no characters known for group {}", g.name())));
                };
                FunctionTable::lookup(name, m, values.into_iter().map(|v| vec![v]).collect())?
            }
            FunctionSpec::Wu => {
                if !matches!(model, GroupModel::MotionE2) {
                    return Err(ApError::Contract(format!("wu lives on motion_e2, not on {}", model.kind())));
                }
                wu_function().renamed(name)
            }
            FunctionSpec::Arctan => {
                one_dim(model, "arctan")?;
                FunctionTable::of_real(name, m, |t| Complex64::new(t.atan(), 0.0))
            }
            FunctionSpec::SinTSquared => {
                one_dim(model, "sin_t_squared")?;
                FunctionTable::of_real(name, m, |t| Complex64::new((t * t).sin(), 0.0))
            }
            FunctionSpec::CustomTable { values } => {
                let rows = values.iter().map(|r| r.iter().map(|v| c(*v)).collect()).collect();
                FunctionTable::lookup(name, m, rows).map_err(|e| match e {
                    EvalError::NotFinite => ApError::Contract("custom_table needs a finite group".into()),
                    e => e.into(),
                })?
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Ap,
    NonAp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub name: String,
    #[serde(flatten)]
    pub function: FunctionSpec,
    pub tag: Tag,
    pub window: WindowDoc,
    /// Empirical per-entry thresholds, e.g. the window size beyond which a
    /// non-ap entry is expected to fail.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub thresholds: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub entries: Vec<CorpusEntry>,
}

pub const MANIFEST_SCHEMA: u32 = 1;

const BUNDLED: &str = include_str!("../../../corpus/manifest.json");

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        let m: Manifest = serde_json::from_str(text).map_err(|e| ApError::Invalid(format!("manifest: {e}")))?;
        if m.schema_version != MANIFEST_SCHEMA {
            return Err(ApError::Invalid(format!(
                "manifest schema {} is not supported (expected {MANIFEST_SCHEMA})",
                m.schema_version
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for e in &m.entries {
            if !seen.insert(e.name.as_str()) {
                return Err(ApError::Invalid(format!("duplicate corpus entry {}", e.name)));
            }
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ApError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The manifest shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled manifest parses")
    }

    pub fn get(&self, name: &str) -> Result<&CorpusEntry> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| ApError::Invalid(format!("unknown function {name}")))
    }
}

/// Sets one window parameter, `key=value`; values parse as JSON and fall
/// back to strings.
pub fn override_window(doc: &WindowDoc, key: &str, value: &str) -> Result<WindowDoc> {
    let mut v = serde_json::to_value(doc).map_err(|e| ApError::Invalid(e.to_string()))?;
    let parsed = serde_json::from_str(value).unwrap_or_else(|_| serde_json::Value::String(value.to_string()));
    let params = v
        .get_mut("params")
        .and_then(|p| p.as_object_mut())
        .ok_or_else(|| ApError::Invalid("window has no parameters".into()))?;
    params.insert(key.to_string(), parsed);
    serde_json::from_value(v).map_err(|e| ApError::Invalid(format!("window parameter {key}: {e}")))
}
