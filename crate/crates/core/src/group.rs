//! Computable group models and their elements.
//!
//! Four kinds are supported: finite groups given by a Cayley table, the
//! lattice `Z^d`, real space `R^d` sampled on a grid, and the Euclidean
//! motion group of the plane, `E(2) = { (z, w) : |w| = 1 }` with the law
//! `(z', w')(z, w) = (z' + w' z, w' w)`.

use std::cmp::Ordering;
use std::fmt;
use std::io::Read;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest Cayley table accepted; the associativity check is cubic.
pub const MAX_CAYLEY_ORDER: usize = 256;
/// Largest supported dimension for lattice and real-grid models.
pub const MAX_DIM: usize = 3;
/// Allowed drift of `|w|` from 1 for motion elements.
pub const UNIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GroupError {
    #[error("element {element} does not belong to a {kind} model")]
    Encoding { kind: ModelKind, element: String },
    #[error("dimension mismatch: model has dimension {expected}, element has {found}")]
    Dimension { expected: usize, found: usize },
    #[error("index {index} is outside a group of order {order}")]
    IndexOutOfRange { index: usize, order: usize },
    #[error("motion element has |w| = {modulus}, expected 1 within {UNIT_TOLERANCE}")]
    NotUnit { modulus: f64 },
    #[error("dimension {0} is not supported (1..={MAX_DIM})")]
    UnsupportedDimension(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Cayley,
    Lattice,
    RealGrid,
    MotionE2,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelKind::Cayley => "cayley",
            ModelKind::Lattice => "lattice",
            ModelKind::RealGrid => "real_grid",
            ModelKind::MotionE2 => "motion_e2",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IntPoint {
    dim: u8,
    coords: [i64; MAX_DIM],
}

impl IntPoint {
    pub fn new(coords: &[i64]) -> Result<Self, GroupError> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(GroupError::UnsupportedDimension(coords.len()));
        }
        let mut c = [0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Self {
            dim: coords.len() as u8,
            coords: c,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.dim as usize]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealPoint {
    dim: u8,
    coords: [f64; MAX_DIM],
}

impl RealPoint {
    pub fn new(coords: &[f64]) -> Result<Self, GroupError> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(GroupError::UnsupportedDimension(coords.len()));
        }
        let mut c = [0.0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Self {
            dim: coords.len() as u8,
            coords: c,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }
}

/// A rigid motion `x -> w x + z` of the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Motion {
    pub z: Complex64,
    pub w: Complex64,
}

impl Motion {
    pub fn new(z: Complex64, w: Complex64) -> Result<Self, GroupError> {
        let modulus = w.norm();
        if (modulus - 1.0).abs() > UNIT_TOLERANCE {
            return Err(GroupError::NotUnit { modulus });
        }
        Ok(Self { z, w })
    }

    /// `(x + i y, e^{i theta})`.
    pub fn from_parts(x: f64, y: f64, theta: f64) -> Self {
        Self {
            z: Complex64::new(x, y),
            w: Complex64::from_polar(1.0, theta),
        }
    }

    pub fn identity() -> Self {
        Self {
            z: Complex64::new(0.0, 0.0),
            w: Complex64::new(1.0, 0.0),
        }
    }

    pub fn compose(&self, rhs: &Motion) -> Motion {
        let w = renormalize(self.w * rhs.w);
        Motion {
            z: self.z + self.w * rhs.z,
            w,
        }
    }

    pub fn inverse(&self) -> Motion {
        let wc = self.w.conj();
        Motion { z: -(wc * self.z), w: wc }
    }
}

fn renormalize(w: Complex64) -> Complex64 {
    let m = w.norm();
    if (m - 1.0).abs() > UNIT_TOLERANCE {
        w / m
    } else {
        w
    }
}

/// An element of one of the supported models. Elements are plain values so
/// certificates stay meaningful when a window is re-gridded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Element {
    Index(u32),
    Lattice(IntPoint),
    Real(RealPoint),
    Motion(Motion),
}

impl Element {
    pub fn int(coords: &[i64]) -> Result<Self, GroupError> {
        IntPoint::new(coords).map(Element::Lattice)
    }

    pub fn integer(n: i64) -> Self {
        Element::Lattice(IntPoint {
            dim: 1,
            coords: [n, 0, 0],
        })
    }

    pub fn real(coords: &[f64]) -> Result<Self, GroupError> {
        RealPoint::new(coords).map(Element::Real)
    }

    pub fn scalar(x: f64) -> Self {
        Element::Real(RealPoint {
            dim: 1,
            coords: [x, 0.0, 0.0],
        })
    }

    pub fn motion(z: Complex64, w: Complex64) -> Result<Self, GroupError> {
        Motion::new(z, w).map(Element::Motion)
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Element::Index(_) => ModelKind::Cayley,
            Element::Lattice(_) => ModelKind::Lattice,
            Element::Real(_) => ModelKind::RealGrid,
            Element::Motion(_) => ModelKind::MotionE2,
        }
    }

    /// First coordinate of a one-dimensional lattice or real element.
    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Element::Lattice(p) if p.dim == 1 => Some(p.coords[0] as f64),
            Element::Real(p) if p.dim == 1 => Some(p.coords[0]),
            _ => None,
        }
    }

    pub fn as_index(&self) -> Option<usize> {
        match self {
            Element::Index(i) => Some(*i as usize),
            _ => None,
        }
    }

    pub fn as_motion(&self) -> Option<Motion> {
        match self {
            Element::Motion(m) => Some(*m),
            _ => None,
        }
    }

    /// Coordinates used for ordering and tolerant lookup.
    pub(crate) fn coordinates(&self) -> ([f64; 4], usize) {
        match self {
            Element::Index(i) => ([*i as f64, 0.0, 0.0, 0.0], 1),
            Element::Lattice(p) => {
                let mut c = [0.0; 4];
                for (k, v) in p.coords().iter().enumerate() {
                    c[k] = *v as f64;
                }
                (c, p.dim())
            }
            Element::Real(p) => {
                let mut c = [0.0; 4];
                c[..p.dim()].copy_from_slice(p.coords());
                (c, p.dim())
            }
            Element::Motion(m) => ([m.z.re, m.z.im, m.w.re, m.w.im], 4),
        }
    }

    /// Lexicographic order on (kind, coordinates); the order used for
    /// windows, representatives and tie-breaks.
    pub fn lex_cmp(&self, other: &Element) -> Ordering {
        let k = self.kind().cmp(&other.kind());
        if k != Ordering::Equal {
            return k;
        }
        if let (Element::Lattice(a), Element::Lattice(b)) = (self, other) {
            return a.dim.cmp(&b.dim).then_with(|| a.coords().cmp(b.coords()));
        }
        let (a, na) = self.coordinates();
        let (b, nb) = other.coordinates();
        na.cmp(&nb).then_with(|| {
            for i in 0..na {
                let c = a[i].total_cmp(&b[i]);
                if c != Ordering::Equal {
                    return c;
                }
            }
            Ordering::Equal
        })
    }

    /// Max-coordinate distance, used for tolerant equality.
    pub fn coordinate_gap(&self, other: &Element) -> f64 {
        if self.kind() != other.kind() {
            return f64::INFINITY;
        }
        let (a, na) = self.coordinates();
        let (b, nb) = other.coordinates();
        if na != nb {
            return f64::INFINITY;
        }
        (0..na).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Index(i) => write!(f, "#{i}"),
            Element::Lattice(p) => write!(f, "{:?}", p.coords()),
            Element::Real(p) => write!(f, "{:?}", p.coords()),
            Element::Motion(m) => write!(
                f,
                "({}{:+}i, {}{:+}i)",
                m.z.re, m.z.im, m.w.re, m.w.im
            ),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ElementRepr {
    Index(u32),
    Lattice { n: Vec<i64> },
    Real { x: Vec<f64> },
    Motion { z: [f64; 2], w: [f64; 2] },
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let repr = match self {
            Element::Index(i) => ElementRepr::Index(*i),
            Element::Lattice(p) => ElementRepr::Lattice {
                n: p.coords().to_vec(),
            },
            Element::Real(p) => ElementRepr::Real {
                x: p.coords().to_vec(),
            },
            Element::Motion(m) => ElementRepr::Motion {
                z: [m.z.re, m.z.im],
                w: [m.w.re, m.w.im],
            },
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        match ElementRepr::deserialize(d)? {
            ElementRepr::Index(i) => Ok(Element::Index(i)),
            ElementRepr::Lattice { n } => Element::int(&n).map_err(D::Error::custom),
            ElementRepr::Real { x } => Element::real(&x).map_err(D::Error::custom),
            ElementRepr::Motion { z, w } => Element::motion(
                Complex64::new(z[0], z[1]),
                Complex64::new(w[0], w[1]),
            )
            .map_err(D::Error::custom),
        }
    }
}

/// Failure of one of the group axioms in a Cayley table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "axiom", rename_all = "snake_case")]
pub enum AxiomViolation {
    MissingIdentity,
    MissingInverse { element: usize },
    NonAssociative { a: usize, b: usize, c: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CayleyReport {
    pub order: usize,
    pub valid: bool,
    pub identity: Option<usize>,
    pub abelian: bool,
    /// First non-commuting pair, when one exists.
    pub non_commuting: Option<(usize, usize)>,
    pub violation: Option<AxiomViolation>,
}

/// Malformed input, as opposed to a well-formed table that is not a group.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TableInputError {
    #[error("table is empty")]
    Empty,
    #[error("row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("entry ({row}, {col}) = {value} is outside 0..{order}")]
    OutOfRange {
        row: usize,
        col: usize,
        value: usize,
        order: usize,
    },
    #[error("order {0} exceeds the supported maximum {MAX_CAYLEY_ORDER}")]
    TooLarge(usize),
    #[error("CSV: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CayleyError {
    #[error(transparent)]
    Input(#[from] TableInputError),
    #[error("table is not a group: {0:?}")]
    NotAGroup(AxiomViolation),
}

/// Checks closure, identity, inverses and associativity of an `n x n` table.
pub fn validate_cayley_table(rows: &[Vec<usize>]) -> Result<CayleyReport, TableInputError> {
    let n = rows.len();
    if n == 0 {
        return Err(TableInputError::Empty);
    }
    if n > MAX_CAYLEY_ORDER {
        return Err(TableInputError::TooLarge(n));
    }
    for (r, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(TableInputError::NotSquare {
                row: r,
                len: row.len(),
                expected: n,
            });
        }
        if let Some((c, &v)) = row.iter().enumerate().find(|(_, &v)| v >= n) {
            return Err(TableInputError::OutOfRange {
                row: r,
                col: c,
                value: v,
                order: n,
            });
        }
    }
    let m = |a: usize, b: usize| rows[a][b];

    let non_commuting = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .find(|&(a, b)| m(a, b) != m(b, a));
    let mut report = CayleyReport {
        order: n,
        valid: false,
        identity: None,
        abelian: non_commuting.is_none(),
        non_commuting,
        violation: None,
    };

    let identity = (0..n).find(|&e| (0..n).all(|a| m(e, a) == a && m(a, e) == a));
    let Some(e) = identity else {
        report.violation = Some(AxiomViolation::MissingIdentity);
        return Ok(report);
    };
    report.identity = Some(e);

    if let Some(a) = (0..n).find(|&a| !(0..n).any(|b| m(a, b) == e && m(b, a) == e)) {
        report.violation = Some(AxiomViolation::MissingInverse { element: a });
        return Ok(report);
    }

    for a in 0..n {
        for b in 0..n {
            let ab = m(a, b);
            for c in 0..n {
                if m(ab, c) != m(a, m(b, c)) {
                    report.violation = Some(AxiomViolation::NonAssociative { a, b, c });
                    return Ok(report);
                }
            }
        }
    }
    report.valid = true;
    Ok(report)
}

/// Reads `n` rows of `n` comma-separated indices.
pub fn read_cayley_csv<R: Read>(reader: R) -> Result<Vec<Vec<usize>>, TableInputError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| TableInputError::Csv(e.to_string()))?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|e| TableInputError::Csv(format!("{s:?}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// A validated finite group.
#[derive(Debug, Clone, PartialEq)]
pub struct CayleyGroup {
    name: String,
    order: usize,
    table: Vec<u32>,
    identity: u32,
    inverse: Vec<u32>,
    abelian: bool,
}

impl CayleyGroup {
    pub fn from_table(name: impl Into<String>, rows: &[Vec<usize>]) -> Result<Self, CayleyError> {
        let report = validate_cayley_table(rows)?;
        if let Some(v) = report.violation {
            return Err(CayleyError::NotAGroup(v));
        }
        let n = report.order;
        let e = report.identity.expect("valid table has an identity");
        let table: Vec<u32> = rows.iter().flatten().map(|&v| v as u32).collect();
        let inverse = (0..n)
            .map(|a| (0..n).find(|&b| rows[a][b] == e).unwrap() as u32)
            .collect();
        Ok(Self {
            name: name.into(),
            order: n,
            table,
            identity: e as u32,
            inverse,
            abelian: report.abelian,
        })
    }

    /// `Z_n` under addition.
    pub fn cyclic(n: usize) -> Result<Self, CayleyError> {
        let rows: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table(format!("z{n}"), &rows)
    }

    /// The symmetric group on three letters; elements are the permutations
    /// of `[0, 1, 2]` in lexicographic order, product `(p q)(i) = p(q(i))`.
    pub fn symmetric3() -> Self {
        let perms = s3_permutations();
        let rows: Vec<Vec<usize>> = perms
            .iter()
            .map(|p| {
                perms
                    .iter()
                    .map(|q| {
                        let pq = [p[q[0]], p[q[1]], p[q[2]]];
                        perms.iter().position(|r| *r == pq).unwrap()
                    })
                    .collect()
            })
            .collect();
        Self::from_table("s3", &rows).expect("S3 table is a group")
    }

    pub fn by_name(name: &str) -> Option<Self> {
        if name == "s3" {
            return Some(Self::symmetric3());
        }
        let n: usize = name.strip_prefix('z')?.parse().ok()?;
        (1..=MAX_CAYLEY_ORDER).contains(&n).then(|| Self::cyclic(n).ok())?
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity as usize
    }

    pub fn is_abelian(&self) -> bool {
        self.abelian
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a] as usize
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.table
            .chunks(self.order)
            .map(|r| r.iter().map(|&v| v as usize).collect())
            .collect()
    }
}

/// Permutations of `[0, 1, 2]` in lexicographic order.
pub fn s3_permutations() -> [[usize; 3]; 6] {
    [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ]
}

/// A computable group.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupModel {
    Cayley(Arc<CayleyGroup>),
    Lattice { dim: usize },
    RealGrid { dim: usize, step: f64 },
    MotionE2,
}

impl GroupModel {
    pub fn cayley(group: CayleyGroup) -> Self {
        GroupModel::Cayley(Arc::new(group))
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            GroupModel::Cayley(_) => ModelKind::Cayley,
            GroupModel::Lattice { .. } => ModelKind::Lattice,
            GroupModel::RealGrid { .. } => ModelKind::RealGrid,
            GroupModel::MotionE2 => ModelKind::MotionE2,
        }
    }

    pub fn identity(&self) -> Element {
        match self {
            GroupModel::Cayley(g) => Element::Index(g.identity),
            GroupModel::Lattice { dim } => Element::Lattice(IntPoint {
                dim: *dim as u8,
                coords: [0; MAX_DIM],
            }),
            GroupModel::RealGrid { dim, .. } => Element::Real(RealPoint {
                dim: *dim as u8,
                coords: [0.0; MAX_DIM],
            }),
            GroupModel::MotionE2 => Element::Motion(Motion::identity()),
        }
    }

    pub fn is_abelian(&self) -> bool {
        match self {
            GroupModel::Cayley(g) => g.abelian,
            GroupModel::Lattice { .. } | GroupModel::RealGrid { .. } => true,
            GroupModel::MotionE2 => false,
        }
    }

    /// Discrete models have `{e}` as an identity neighbourhood.
    pub fn is_discrete(&self) -> bool {
        matches!(self, GroupModel::Cayley(_) | GroupModel::Lattice { .. })
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, GroupModel::Cayley(_))
    }

    /// Default element-equality tolerance for windows over this model.
    pub fn default_tolerance(&self) -> f64 {
        match self {
            GroupModel::Cayley(_) | GroupModel::Lattice { .. } => 0.0,
            GroupModel::RealGrid { .. } | GroupModel::MotionE2 => 1e-9,
        }
    }

    fn mismatch(&self, a: &Element) -> GroupError {
        GroupError::Encoding {
            kind: self.kind(),
            element: a.to_string(),
        }
    }

    /// Verifies that `a` is encoded for this model.
    pub fn check(&self, a: &Element) -> Result<(), GroupError> {
        match (self, a) {
            (GroupModel::Cayley(g), Element::Index(i)) => {
                if (*i as usize) < g.order {
                    Ok(())
                } else {
                    Err(GroupError::IndexOutOfRange {
                        index: *i as usize,
                        order: g.order,
                    })
                }
            }
            (GroupModel::Lattice { dim }, Element::Lattice(p)) => dim_check(*dim, p.dim()),
            (GroupModel::RealGrid { dim, .. }, Element::Real(p)) => dim_check(*dim, p.dim()),
            (GroupModel::MotionE2, Element::Motion(m)) => {
                let modulus = m.w.norm();
                if (modulus - 1.0).abs() > UNIT_TOLERANCE {
                    Err(GroupError::NotUnit { modulus })
                } else {
                    Ok(())
                }
            }
            _ => Err(self.mismatch(a)),
        }
    }

    /// The group product `a b`.
    #[inline]
    pub fn op(&self, a: &Element, b: &Element) -> Result<Element, GroupError> {
        match (self, a, b) {
            (GroupModel::Cayley(g), Element::Index(x), Element::Index(y)) => {
                let (x, y) = (*x as usize, *y as usize);
                if x >= g.order || y >= g.order {
                    return Err(GroupError::IndexOutOfRange {
                        index: x.max(y),
                        order: g.order,
                    });
                }
                Ok(Element::Index(g.table[x * g.order + y]))
            }
            (GroupModel::Lattice { dim }, Element::Lattice(p), Element::Lattice(q)) => {
                dim_check(*dim, p.dim())?;
                dim_check(*dim, q.dim())?;
                let mut out = *p;
                for i in 0..*dim {
                    out.coords[i] = p.coords[i] + q.coords[i];
                }
                Ok(Element::Lattice(out))
            }
            (GroupModel::RealGrid { dim, .. }, Element::Real(p), Element::Real(q)) => {
                dim_check(*dim, p.dim())?;
                dim_check(*dim, q.dim())?;
                let mut out = *p;
                for i in 0..*dim {
                    out.coords[i] = p.coords[i] + q.coords[i];
                }
                Ok(Element::Real(out))
            }
            (GroupModel::MotionE2, Element::Motion(p), Element::Motion(q)) => {
                Ok(Element::Motion(p.compose(q)))
            }
            (_, x, y) => {
                let bad = if x.kind() != self.kind() { x } else { y };
                Err(self.mismatch(bad))
            }
        }
    }

    pub fn inv(&self, a: &Element) -> Result<Element, GroupError> {
        match (self, a) {
            (GroupModel::Cayley(g), Element::Index(x)) => {
                self.check(a)?;
                Ok(Element::Index(g.inverse[*x as usize]))
            }
            (GroupModel::Lattice { dim }, Element::Lattice(p)) => {
                dim_check(*dim, p.dim())?;
                let mut out = *p;
                for c in out.coords.iter_mut() {
                    *c = -*c;
                }
                Ok(Element::Lattice(out))
            }
            (GroupModel::RealGrid { dim, .. }, Element::Real(p)) => {
                dim_check(*dim, p.dim())?;
                let mut out = *p;
                for c in out.coords.iter_mut() {
                    *c = -*c;
                }
                Ok(Element::Real(out))
            }
            (GroupModel::MotionE2, Element::Motion(m)) => Ok(Element::Motion(m.inverse())),
            _ => Err(self.mismatch(a)),
        }
    }

    /// Equality up to `tol` in the max-coordinate distance.
    pub fn equal(&self, a: &Element, b: &Element, tol: f64) -> bool {
        match (a, b) {
            (Element::Index(x), Element::Index(y)) => x == y,
            (Element::Lattice(p), Element::Lattice(q)) => p == q,
            _ => a.coordinate_gap(b) <= tol,
        }
    }

    /// Size of a near-identity displacement: `|v|_inf` for vector groups,
    /// `max(|dx|, |dy|, |dtheta|)` on `E(2)`, 0/1 on finite groups.
    pub fn displacement_size(&self, v: &Element) -> f64 {
        match v {
            Element::Index(i) => {
                if let GroupModel::Cayley(g) = self {
                    if *i == g.identity {
                        return 0.0;
                    }
                }
                1.0
            }
            Element::Lattice(p) => p.coords().iter().map(|c| c.unsigned_abs() as f64).fold(0.0, f64::max),
            Element::Real(p) => p.coords().iter().map(|c| c.abs()).fold(0.0, f64::max),
            Element::Motion(m) => m.z.re.abs().max(m.z.im.abs()).max(m.w.arg().abs()),
        }
    }
}

fn dim_check(expected: usize, found: usize) -> Result<(), GroupError> {
    if expected == found {
        Ok(())
    } else {
        Err(GroupError::Dimension { expected, found })
    }
}

/// `op(id, a) = a`, `op(a, inv a) = id` and `inv(ab) = inv(b) inv(a)` over
/// the sampled elements; returns the largest coordinate gap observed.
pub fn axiom_gap(model: &GroupModel, sample: &[Element]) -> Result<f64, GroupError> {
    let e = model.identity();
    let mut worst: f64 = 0.0;
    for a in sample {
        worst = worst.max(model.op(&e, a)?.coordinate_gap(a));
        worst = worst.max(model.op(a, &e)?.coordinate_gap(a));
        worst = worst.max(model.op(a, &model.inv(a)?)?.coordinate_gap(&e));
        for b in sample {
            let lhs = model.inv(&model.op(a, b)?)?;
            let rhs = model.op(&model.inv(b)?, &model.inv(a)?)?;
            worst = worst.max(lhs.coordinate_gap(&rhs));
        }
    }
    Ok(worst)
}

/// `ab != ba` witness among the sampled elements, if any.
pub fn non_commuting_pair(
    model: &GroupModel,
    sample: &[Element],
    tol: f64,
) -> Result<Option<(Element, Element)>, GroupError> {
    for (i, a) in sample.iter().enumerate() {
        for b in &sample[i + 1..] {
            if !model.equal(&model.op(a, b)?, &model.op(b, a)?, tol) {
                return Ok(Some((*a, *b)));
            }
        }
    }
    Ok(None)
}

/// Wraps `op` for call sites that hold a `&Element` pair.
pub fn group_op(model: &GroupModel, a: &Element, b: &Element) -> Result<Element, GroupError> {
    model.op(a, b)
}
