//! Finite windows standing in for the whole group.
//!
//! Candidates are where covers, nets and periods are searched; the test set
//! is where translate suprema are taken.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::group::{CayleyGroup, Element, GroupError, GroupModel, ModelKind, Motion, MAX_DIM};

/// Cell width for tolerant lookup of real coordinates.
const LOOKUP_CELL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WindowError {
    #[error("step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("window has an empty {0}")]
    Empty(&'static str),
    #[error("duplicate element {0} in {1}")]
    Duplicate(String, &'static str),
    #[error("unknown group {0:?}")]
    UnknownGroup(String),
    #[error("invalid Cayley table: {0}")]
    Cayley(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("window of {0} elements exceeds the limit of {1}")]
    TooLarge(usize, usize),
    #[error("malformed window document: {0}")]
    Json(String),
}

/// Largest window the builders will materialize.
pub const MAX_WINDOW: usize = 2_000_000;

/// Sample points along one axis: an arithmetic grid or explicit values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Grid { start: f64, step: f64, count: usize },
    Values { values: Vec<f64> },
}

impl Axis {
    pub fn grid(start: f64, step: f64, count: usize) -> Self {
        Axis::Grid { start, step, count }
    }

    pub fn values(values: Vec<f64>) -> Self {
        Axis::Values { values }
    }

    pub fn points(&self) -> Result<Vec<f64>, WindowError> {
        match self {
            Axis::Grid { start, step, count } => {
                if *count == 0 {
                    return Err(WindowError::Empty("axis"));
                }
                if *count > 1 && !(*step > 0.0) {
                    return Err(WindowError::NonPositiveStep(*step));
                }
                Ok((0..*count).map(|k| start + k as f64 * step).collect())
            }
            Axis::Values { values } => {
                if values.is_empty() {
                    return Err(WindowError::Empty("axis"));
                }
                Ok(values.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionAxes {
    pub x: Axis,
    pub y: Axis,
    pub theta: Axis,
}

impl MotionAxes {
    fn product(&self) -> Result<Vec<Element>, WindowError> {
        let (xs, ys, ts) = (self.x.points()?, self.y.points()?, self.theta.points()?);
        let total = xs.len() * ys.len() * ts.len();
        if total > MAX_WINDOW {
            return Err(WindowError::TooLarge(total, MAX_WINDOW));
        }
        let mut out = Vec::with_capacity(total);
        for &x in &xs {
            for &y in &ys {
                for &t in &ts {
                    out.push(Element::Motion(Motion::from_parts(x, y, t)));
                }
            }
        }
        Ok(out)
    }
}

fn is_one(v: &usize) -> bool {
    *v == 1
}

fn one() -> usize {
    1
}

/// Kind-specific window parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum WindowParams {
    Cayley {
        group: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        table: Option<Vec<Vec<usize>>>,
    },
    Lattice {
        dim: usize,
        radius: i64,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        stride: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        test_radius: Option<i64>,
    },
    RealGrid {
        dim: usize,
        half_width: f64,
        step: f64,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        stride: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        test_half_width: Option<f64>,
    },
    MotionE2 {
        #[serde(flatten)]
        axes: MotionAxes,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        test: Option<MotionAxes>,
        /// Further blocks joined to the test set.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        test_extra: Vec<MotionAxes>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowElements {
    pub candidates: Vec<Element>,
    pub test_set: Vec<Element>,
}

/// Serialized window: `{"kind", "params", "elements"?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowDoc {
    #[serde(flatten)]
    pub params: WindowParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<WindowElements>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl WindowDoc {
    pub fn new(params: WindowParams) -> Self {
        Self {
            params,
            elements: None,
            tolerance: None,
        }
    }

    pub fn real_line(half_width: f64, step: f64) -> Self {
        Self::new(WindowParams::RealGrid {
            dim: 1,
            half_width,
            step,
            stride: 1,
            test_half_width: None,
        })
    }

    pub fn integers(radius: i64) -> Self {
        Self::new(WindowParams::Lattice {
            dim: 1,
            radius,
            stride: 1,
            test_radius: None,
        })
    }

    pub fn group(name: &str) -> Self {
        Self::new(WindowParams::Cayley {
            group: name.to_string(),
            table: None,
        })
    }
}

/// Hash-bucket lookup of elements, tolerant for real coordinates.
#[derive(Debug, Clone)]
struct ElementIndex {
    buckets: HashMap<[i64; 4], Vec<u32>>,
}

fn cell(c: f64) -> i64 {
    (c / LOOKUP_CELL).floor() as i64
}

impl ElementIndex {
    fn build(elements: &[Element]) -> Self {
        let mut buckets: HashMap<[i64; 4], Vec<u32>> = HashMap::with_capacity(elements.len());
        for (i, e) in elements.iter().enumerate() {
            let (c, _) = e.coordinates();
            let key = [cell(c[0]), cell(c[1]), cell(c[2]), cell(c[3])];
            buckets.entry(key).or_default().push(i as u32);
        }
        Self { buckets }
    }

    fn find(&self, elements: &[Element], x: &Element, tol: f64) -> Option<usize> {
        let (c, n) = x.coordinates();
        let mut lo = [0i64; 4];
        let mut hi = [0i64; 4];
        for k in 0..4 {
            if k < n {
                lo[k] = cell(c[k] - tol);
                hi[k] = cell(c[k] + tol);
            } else {
                lo[k] = 0;
                hi[k] = 0;
            }
        }
        let mut best: Option<usize> = None;
        for a in lo[0]..=hi[0] {
            for b in lo[1]..=hi[1] {
                for d in lo[2]..=hi[2] {
                    for e in lo[3]..=hi[3] {
                        if let Some(list) = self.buckets.get(&[a, b, d, e]) {
                            for &i in list {
                                let i = i as usize;
                                let y = &elements[i];
                                let hit = match (x, y) {
                                    (Element::Index(p), Element::Index(q)) => p == q,
                                    (Element::Lattice(p), Element::Lattice(q)) => p == q,
                                    _ => x.coordinate_gap(y) <= tol,
                                };
                                if hit && best.is_none_or(|b| i < b) {
                                    best = Some(i);
                                }
                            }
                        }
                    }
                }
            }
        }
        best
    }
}

/// A finite window over a group model. Immutable after construction.
#[derive(Debug, Clone)]
pub struct WindowSpec {
    model: GroupModel,
    doc: WindowDoc,
    candidates: Arc<Vec<Element>>,
    test_set: Arc<Vec<Element>>,
    tolerance: f64,
    cand_index: Arc<ElementIndex>,
    test_index: Arc<ElementIndex>,
    fingerprint: String,
}

fn sorted_unique(
    model: &GroupModel,
    mut v: Vec<Element>,
    tol: f64,
    what: &'static str,
) -> Result<Vec<Element>, WindowError> {
    if v.is_empty() {
        return Err(WindowError::Empty(what));
    }
    for e in &v {
        model.check(e)?;
    }
    v.sort_by(|a, b| a.lex_cmp(b));
    let idx = ElementIndex::build(&v);
    for (i, e) in v.iter().enumerate() {
        if idx.find(&v, e, tol) != Some(i) {
            return Err(WindowError::Duplicate(e.to_string(), what));
        }
    }
    Ok(v)
}

fn grid_coords(n: i64, stride: usize) -> Vec<i64> {
    (-n..=n).filter(|k| k.rem_euclid(stride as i64) == 0).collect()
}

fn box_product(axis: &[i64], dim: usize) -> Result<Vec<Vec<i64>>, WindowError> {
    let total = axis.len().checked_pow(dim as u32).unwrap_or(usize::MAX);
    if total > MAX_WINDOW {
        return Err(WindowError::TooLarge(total, MAX_WINDOW));
    }
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&k| {
                    let mut q = p.clone();
                    q.push(k);
                    q
                })
            })
            .collect();
    }
    Ok(out)
}

fn check_dim(dim: usize) -> Result<(), WindowError> {
    if dim == 0 || dim > MAX_DIM {
        Err(GroupError::UnsupportedDimension(dim).into())
    } else {
        Ok(())
    }
}

/// Number of grid steps in `[0, T]`, tolerant of `T/h` rounding.
pub fn grid_count(half_width: f64, step: f64) -> i64 {
    (half_width / step + 1e-9).floor() as i64
}

/// Builds the window described by `doc`.
pub fn build_window(doc: &WindowDoc) -> Result<WindowSpec, WindowError> {
    let (model, cands, tests) = match &doc.params {
        WindowParams::Cayley { group, table } => {
            let g = match table {
                Some(rows) => CayleyGroup::from_table(group.clone(), rows)
                    .map_err(|e| WindowError::Cayley(e.to_string()))?,
                None => CayleyGroup::by_name(group)
                    .ok_or_else(|| WindowError::UnknownGroup(group.clone()))?,
            };
            let all: Vec<Element> = (0..g.order() as u32).map(Element::Index).collect();
            (GroupModel::cayley(g), all.clone(), all)
        }
        WindowParams::Lattice {
            dim,
            radius,
            stride,
            test_radius,
        } => {
            check_dim(*dim)?;
            if *radius < 0 || test_radius.is_some_and(|r| r < 0) {
                return Err(WindowError::NonPositive("radius"));
            }
            if *stride == 0 {
                return Err(WindowError::NonPositive("stride"));
            }
            let mk = |r: i64, s: usize| -> Result<Vec<Element>, WindowError> {
                box_product(&grid_coords(r, s), *dim)?
                    .iter()
                    .map(|p| Element::int(p).map_err(WindowError::from))
                    .collect()
            };
            (
                GroupModel::Lattice { dim: *dim },
                mk(*radius, *stride)?,
                mk(test_radius.unwrap_or(*radius), 1)?,
            )
        }
        WindowParams::RealGrid {
            dim,
            half_width,
            step,
            stride,
            test_half_width,
        } => {
            check_dim(*dim)?;
            if !(*step > 0.0) || !step.is_finite() {
                return Err(WindowError::NonPositiveStep(*step));
            }
            if !(*half_width >= 0.0) || test_half_width.is_some_and(|t| !(t >= 0.0)) {
                return Err(WindowError::NonPositive("half_width"));
            }
            if *stride == 0 {
                return Err(WindowError::NonPositive("stride"));
            }
            let h = *step;
            let mk = |t: f64, s: usize| -> Result<Vec<Element>, WindowError> {
                box_product(&grid_coords(grid_count(t, h), s), *dim)?
                    .iter()
                    .map(|p| {
                        let x: Vec<f64> = p.iter().map(|&k| k as f64 * h).collect();
                        Element::real(&x).map_err(WindowError::from)
                    })
                    .collect()
            };
            (
                GroupModel::RealGrid { dim: *dim, step: h },
                mk(*half_width, *stride)?,
                mk(test_half_width.unwrap_or(*half_width), 1)?,
            )
        }
        WindowParams::MotionE2 { axes, test, test_extra } => {
            let c = axes.product()?;
            let mut t = match test {
                Some(t) => t.product()?,
                None => c.clone(),
            };
            for block in test_extra {
                t.extend(block.product()?);
            }
            (GroupModel::MotionE2, c, t)
        }
    };
    let (cands, tests) = match &doc.elements {
        Some(el) => (el.candidates.clone(), el.test_set.clone()),
        None => (cands, tests),
    };
    let tolerance = doc.tolerance.unwrap_or_else(|| model.default_tolerance());
    if !(tolerance >= 0.0) {
        return Err(WindowError::NonPositive("tolerance"));
    }
    WindowSpec::assemble(model, doc.clone(), cands, tests, tolerance)
}

impl WindowSpec {
    fn assemble(
        model: GroupModel,
        doc: WindowDoc,
        candidates: Vec<Element>,
        test_set: Vec<Element>,
        tolerance: f64,
    ) -> Result<Self, WindowError> {
        let candidates = sorted_unique(&model, candidates, tolerance, "candidate set")?;
        let test_set = sorted_unique(&model, test_set, tolerance, "test set")?;
        let fingerprint = fingerprint_doc(&doc);
        Ok(Self {
            cand_index: Arc::new(ElementIndex::build(&candidates)),
            test_index: Arc::new(ElementIndex::build(&test_set)),
            candidates: Arc::new(candidates),
            test_set: Arc::new(test_set),
            model,
            doc,
            tolerance,
            fingerprint,
        })
    }

    /// Window with explicit element lists over the model described by `doc`.
    pub fn with_elements(
        doc: &WindowDoc,
        candidates: Vec<Element>,
        test_set: Vec<Element>,
    ) -> Result<Self, WindowError> {
        let mut d = doc.clone();
        d.elements = Some(WindowElements {
            candidates,
            test_set,
        });
        build_window(&d)
    }

    pub fn model(&self) -> &GroupModel {
        &self.model
    }

    pub fn doc(&self) -> &WindowDoc {
        &self.doc
    }

    pub fn candidates(&self) -> &[Element] {
        &self.candidates
    }

    pub fn test_set(&self) -> &[Element] {
        &self.test_set
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Hex SHA-256 of the canonical window document.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn candidate_index(&self, x: &Element) -> Option<usize> {
        self.cand_index.find(&self.candidates, x, self.tolerance)
    }

    pub fn test_index(&self, x: &Element) -> Option<usize> {
        self.test_index.find(&self.test_set, x, self.tolerance)
    }

    pub fn contains_candidate(&self, x: &Element) -> bool {
        self.candidate_index(x).is_some()
    }

    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }

    /// Whether every candidate inverse is again a candidate.
    pub fn candidates_inverse_closed(&self) -> bool {
        self.candidates.iter().all(|c| {
            self.model
                .inv(c)
                .map(|i| self.contains_candidate(&i))
                .unwrap_or(false)
        })
    }

    /// Largest displacement size between two candidates; the "unbounded"
    /// value reported by modulus scans.
    pub fn diameter(&self) -> f64 {
        let c = &self.candidates;
        match &self.model {
            GroupModel::Cayley(_) => 1.0,
            _ => {
                let (_, n) = c[0].coordinates();
                let mut lo = [f64::INFINITY; 4];
                let mut hi = [f64::NEG_INFINITY; 4];
                for e in c.iter() {
                    let (x, _) = e.coordinates();
                    for k in 0..n {
                        lo[k] = lo[k].min(x[k]);
                        hi[k] = hi[k].max(x[k]);
                    }
                }
                (0..n).map(|k| hi[k] - lo[k]).fold(0.0, f64::max)
            }
        }
    }
}

/// Canonical JSON of a window document.
pub fn canonical_json(doc: &WindowDoc) -> String {
    let v = serde_json::to_value(doc).expect("window docs serialize");
    serde_json::to_string(&v).expect("values serialize")
}

fn fingerprint_doc(doc: &WindowDoc) -> String {
    hex::encode(Sha256::digest(canonical_json(doc).as_bytes()))
}

/// Parses a window document from JSON text.
pub fn parse_window(text: &str) -> Result<WindowSpec, WindowError> {
    let doc: WindowDoc = serde_json::from_str(text).map_err(|e| WindowError::Json(e.to_string()))?;
    build_window(&doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_grid_count() {
        let w = build_window(&WindowDoc::real_line(10.0, 1.0)).unwrap();
        assert_eq!(w.candidates().len(), 21);
        assert_eq!(w.candidates()[0], Element::scalar(-10.0));
    }

    #[test]
    fn cayley_window_is_whole_group() {
        let w = build_window(&WindowDoc::group("z6")).unwrap();
        let all: Vec<Element> = (0..6).map(Element::Index).collect();
        assert_eq!(w.candidates(), &all[..]);
        assert_eq!(w.test_set(), &all[..]);
    }

    #[test]
    fn motion_product_count() {
        let doc = WindowDoc::new(WindowParams::MotionE2 {
            axes: MotionAxes {
                x: Axis::grid(0.0, 1.0, 3),
                y: Axis::grid(0.0, 1.0, 3),
                theta: Axis::grid(0.0, 0.5, 4),
            },
            test: None,
            test_extra: Vec::new(),
        });
        assert_eq!(build_window(&doc).unwrap().candidates().len(), 36);
    }

    #[test]
    fn bad_params_rejected() {
        assert!(matches!(
            build_window(&WindowDoc::real_line(10.0, 0.0)),
            Err(WindowError::NonPositiveStep(_))
        ));
        let doc = WindowDoc::new(WindowParams::MotionE2 {
            axes: MotionAxes {
                x: Axis::values(vec![]),
                y: Axis::grid(0.0, 1.0, 1),
                theta: Axis::grid(0.0, 1.0, 1),
            },
            test: None,
            test_extra: Vec::new(),
        });
        assert!(matches!(build_window(&doc), Err(WindowError::Empty(_))));
        assert!(matches!(
            build_window(&WindowDoc::group("q8")),
            Err(WindowError::UnknownGroup(_))
        ));
    }

    #[test]
    fn duplicates_rejected() {
        let doc = WindowDoc::integers(3);
        let e = vec![Element::integer(1), Element::integer(1)];
        assert!(matches!(
            WindowSpec::with_elements(&doc, e.clone(), e),
            Err(WindowError::Duplicate(..))
        ));
    }

    #[test]
    fn tolerant_lookup() {
        let w = build_window(&WindowDoc::real_line(5.0, 0.1)).unwrap();
        let i = w.candidate_index(&Element::scalar(0.3 + 1e-12)).unwrap();
        assert_eq!(w.candidates()[i], Element::scalar(3.0 * 0.1));
        assert!(w.candidate_index(&Element::scalar(0.35)).is_none());
        assert!(w.candidates_inverse_closed());
    }

    #[test]
    fn stride_and_test_width() {
        let doc = WindowDoc::new(WindowParams::RealGrid {
            dim: 1,
            half_width: 2.0,
            step: 0.5,
            stride: 2,
            test_half_width: Some(1.0),
        });
        let w = build_window(&doc).unwrap();
        assert_eq!(w.candidates().len(), 5);
        assert_eq!(w.test_set().len(), 5);
        assert_eq!(w.candidates()[1], Element::scalar(-1.0));
    }

    #[test]
    fn doc_round_trip_and_fingerprint() {
        let doc = WindowDoc::new(WindowParams::MotionE2 {
            axes: MotionAxes {
                x: Axis::grid(0.0, 1.0, 2),
                y: Axis::values(vec![0.0, 3.0]),
                theta: Axis::grid(0.0, 1.0, 1),
            },
            test: None,
            test_extra: Vec::new(),
        });
        let s = canonical_json(&doc);
        let back: WindowDoc = serde_json::from_str(&s).unwrap();
        assert_eq!(back, doc);
        let a = build_window(&doc).unwrap();
        let b = build_window(&back).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_ne!(
            a.fingerprint(),
            build_window(&WindowDoc::integers(3)).unwrap().fingerprint()
        );
        let s = canonical_json(&WindowDoc::real_line(1.0, 0.5));
        assert!(s.contains(r#""kind":"real_grid""#), "{s}");
    }
}
