//! Translate rows: the vector of values `f(u t)`, `f(s u)` or `f(s u t)`
//! over the test set, for a fixed translator `u`.
//!
//! The translate pseudometric is the sup-distance between two rows. On
//! one-dimensional grids with a contiguous test set every row is a slice
//! of one shared array of samples, and the two-sided row is indexed by the
//! sumset `W + W`.

use std::borrow::Cow;

use num_complex::Complex64;

use crate::function::FunctionTable;
use crate::group::{Element, GroupModel};
use crate::uniformity::{Side, Witness};
use crate::window::WindowSpec;
use crate::{ApError, Result};

/// Upper bound on complex values held by the dense row cache.
pub const DENSE_CAP: usize = 25_000_000;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// How positions in a row map back to test elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Position `p` is `test[p]`.
    Plain(usize),
    /// Position `p` is the pair `(test[p / m], test[p % m])`.
    Pairs(usize),
    /// Position `q` is any pair `(s, t)` with index sum `q`.
    Sumset(usize),
}

impl Layout {
    pub fn len(&self) -> usize {
        match *self {
            Layout::Plain(m) => m,
            Layout::Pairs(m) => m * m,
            Layout::Sumset(m) => 2 * m - 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Test-set indices `(s, t)` for a position; `s` is unused for
    /// one-sided layouts. For sums the smallest `s` is chosen.
    pub fn indices(&self, p: usize) -> (usize, usize) {
        match *self {
            Layout::Plain(_) => (0, p),
            Layout::Pairs(m) => (p / m, p % m),
            Layout::Sumset(m) => {
                let s = p.saturating_sub(m - 1);
                (s, p - s)
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Grid {
    /// Samples `f(step * (base + i))`, `k` values each.
    values: Vec<Complex64>,
    base: i64,
    /// Grid index of the first row position for translator index 0.
    first: i64,
    step: Option<f64>,
}

/// Rows for one function, window and side.
pub struct Translates<'a> {
    f: &'a FunctionTable,
    w: &'a WindowSpec,
    side: Side,
    k: usize,
    layout: Layout,
    grid: Option<Grid>,
    dense: Vec<Vec<Complex64>>,
}

/// Grid index of a one-dimensional element, if it sits on the grid.
fn grid_index(model: &GroupModel, x: &Element) -> Option<i64> {
    match (model, x) {
        (GroupModel::Lattice { dim: 1 }, Element::Lattice(p)) => Some(p.coords()[0]),
        (GroupModel::RealGrid { dim: 1, step }, Element::Real(p)) => {
            let v = p.coords()[0];
            let j = (v / step).round();
            ((v - j * step).abs() <= 1e-9 * v.abs().max(1.0)).then_some(j as i64)
        }
        _ => None,
    }
}

impl<'a> Translates<'a> {
    pub fn new(f: &'a FunctionTable, w: &'a WindowSpec, side: Side) -> Result<Self> {
        if f.model().kind() != w.kind() {
            return Err(ApError::Contract(format!(
                "function on {} evaluated over a {} window",
                f.model().kind(),
                w.kind()
            )));
        }
        let m = w.test_set().len();
        let mut t = Self {
            f,
            w,
            side,
            k: f.width(),
            layout: match side {
                Side::TwoSided => Layout::Pairs(m),
                _ => Layout::Plain(m),
            },
            grid: None,
            dense: Vec::new(),
        };
        t.try_grid(false)?;
        Ok(t)
    }

    /// Like [`Self::new`], with grid samples reaching every product of two
    /// candidates, so rows of such translators are slices as well.
    pub fn with_products(f: &'a FunctionTable, w: &'a WindowSpec, side: Side) -> Result<Self> {
        let mut t = Self::new(f, w, side)?;
        if t.grid.is_some() {
            t.grid = None;
            t.layout = match side {
                Side::TwoSided => Layout::Pairs(w.test_set().len()),
                _ => Layout::Plain(w.test_set().len()),
            };
            t.try_grid(true)?;
        }
        Ok(t)
    }

    fn try_grid(&mut self, products: bool) -> Result<()> {
        let model = self.w.model();
        let test = self.w.test_set();
        let Some(k0) = grid_index(model, &test[0]) else {
            return Ok(());
        };
        let contiguous = test
            .iter()
            .enumerate()
            .all(|(i, x)| grid_index(model, x) == Some(k0 + i as i64));
        if !contiguous {
            return Ok(());
        }
        let mut idx: Vec<i64> = Vec::with_capacity(self.w.candidates().len() + 1);
        for c in self.w.candidates() {
            match grid_index(model, c) {
                Some(j) => idx.push(j),
                None => return Ok(()),
            }
        }
        idx.push(0);
        if products {
            let (a, b) = (*idx.iter().min().unwrap(), *idx.iter().max().unwrap());
            idx.extend([2 * a, 2 * b]);
        }
        let m = test.len() as i64;
        let (first, span) = match self.side {
            Side::TwoSided => (2 * k0, 2 * m - 1),
            _ => (k0, m),
        };
        let lo = idx.iter().min().unwrap() + first;
        let hi = idx.iter().max().unwrap() + first + span - 1;
        let n = (hi - lo + 1) as usize;
        if n * self.k > DENSE_CAP {
            return Ok(());
        }
        let step = match model {
            GroupModel::RealGrid { step, .. } => Some(*step),
            _ => None,
        };
        let mut values = vec![ZERO; n * self.k];
        for (i, chunk) in values.chunks_mut(self.k).enumerate() {
            let x = grid_element(model, step, lo + i as i64);
            self.f.eval_into(&x, chunk)?;
        }
        self.grid = Some(Grid {
            values,
            base: lo,
            first,
            step,
        });
        if self.side == Side::TwoSided {
            self.layout = Layout::Sumset(test.len());
        }
        Ok(())
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn width(&self) -> usize {
        self.k
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn window(&self) -> &WindowSpec {
        self.w
    }

    pub fn function(&self) -> &FunctionTable {
        self.f
    }

    pub fn uses_grid(&self) -> bool {
        self.grid.is_some()
    }

    /// Materializes every candidate row. Needed by covers and nets.
    pub fn cache_candidates(&mut self) -> Result<()> {
        if self.grid.is_some() || !self.dense.is_empty() {
            return Ok(());
        }
        let n = self.w.candidates().len();
        let needed = n * self.layout.len() * self.k;
        if needed > DENSE_CAP {
            return Err(ApError::TooLarge {
                what: "candidate row cache",
                needed,
                cap: DENSE_CAP,
            });
        }
        let rows = self
            .w
            .candidates()
            .iter()
            .map(|u| self.compute_row(u))
            .collect::<Result<Vec<_>>>()?;
        self.dense = rows;
        Ok(())
    }

    fn grid_slice(&self, u: &Element) -> Option<&[Complex64]> {
        let g = self.grid.as_ref()?;
        let j = grid_index(self.w.model(), u)?;
        let start = j + g.first - g.base;
        let len = self.layout.len() as i64;
        if start < 0 || (start + len) as usize * self.k > g.values.len() {
            return None;
        }
        let s = start as usize * self.k;
        Some(&g.values[s..s + len as usize * self.k])
    }

    /// Row for an arbitrary translator.
    pub fn row(&self, u: &Element) -> Result<Cow<'_, [Complex64]>> {
        if let Some(s) = self.grid_slice(u) {
            return Ok(Cow::Borrowed(s));
        }
        if !self.dense.is_empty() {
            if let Some(i) = self.w.candidate_index(u) {
                return Ok(Cow::Borrowed(&self.dense[i]));
            }
        }
        Ok(Cow::Owned(self.compute_row(u)?))
    }

    /// Row of candidate `i`; requires a grid or [`Self::cache_candidates`].
    pub fn candidate_row(&self, i: usize) -> Cow<'_, [Complex64]> {
        let u = &self.w.candidates()[i];
        if let Some(s) = self.grid_slice(u) {
            return Cow::Borrowed(s);
        }
        if let Some(r) = self.dense.get(i) {
            return Cow::Borrowed(r);
        }
        Cow::Owned(self.compute_row(u).expect("candidate rows evaluate"))
    }

    /// Element evaluated at row position `p` for translator `u`.
    pub fn product_at(&self, u: &Element, p: usize) -> Result<Element> {
        let model = self.w.model();
        let test = self.w.test_set();
        if let (Some(g), Some(j)) = (&self.grid, grid_index(model, u)) {
            return Ok(grid_element(model, g.step, j + g.first + p as i64));
        }
        let (s, t) = self.layout.indices(p);
        Ok(match self.side {
            Side::Left => model.op(u, &test[t])?,
            Side::Right => model.op(&test[t], u)?,
            Side::TwoSided => match (&self.grid, self.layout) {
                (Some(g), Layout::Sumset(_)) => {
                    model.op(u, &grid_element(model, g.step, g.first + p as i64))?
                }
                _ => model.op(&model.op(&test[s], u)?, &test[t])?,
            },
        })
    }

    /// Test elements realizing row position `p`.
    pub fn witness_at(&self, p: usize) -> Witness {
        let test = self.w.test_set();
        let (s, t) = self.layout.indices(p);
        match self.side {
            Side::Left => Witness::Left { t: test[t] },
            Side::Right => Witness::Right { s: test[t] },
            Side::TwoSided => Witness::TwoSided { s: test[s], t: test[t] },
        }
    }

    fn compute_row(&self, u: &Element) -> Result<Vec<Complex64>> {
        let model = self.w.model();
        let test = self.w.test_set();
        let k = self.k;
        let mut out = vec![ZERO; self.layout.len() * k];
        match (&self.grid, self.layout) {
            (Some(g), Layout::Sumset(_)) => {
                // off-grid translator over a sumset layout
                let h = g.step;
                for (q, chunk) in out.chunks_mut(k).enumerate() {
                    let st = grid_element(model, h, g.first + q as i64);
                    self.f.eval_into(&model.op(u, &st)?, chunk)?;
                }
            }
            _ => match self.side {
                Side::Left => {
                    for (t, chunk) in test.iter().zip(out.chunks_mut(k)) {
                        self.f.eval_into(&model.op(u, t)?, chunk)?;
                    }
                }
                Side::Right => {
                    for (s, chunk) in test.iter().zip(out.chunks_mut(k)) {
                        self.f.eval_into(&model.op(s, u)?, chunk)?;
                    }
                }
                Side::TwoSided => {
                    let mut chunks = out.chunks_mut(k);
                    for s in test {
                        let su = model.op(s, u)?;
                        for t in test {
                            let chunk = chunks.next().unwrap();
                            self.f.eval_into(&model.op(&su, t)?, chunk)?;
                        }
                    }
                }
            },
        }
        Ok(out)
    }

    /// `D(u, v)` with the first maximizing position.
    pub fn distance(&self, u: &Element, v: &Element) -> Result<(f64, usize)> {
        Ok(row_distance(&self.row(u)?, &self.row(v)?, self.k))
    }

    /// `Some(D(u, v))` when it does not exceed `bound`, scanning lazily so
    /// non-members exit early. Rows are never materialized for `u`.
    pub fn distance_within(&self, u: &Element, v: &Element, bound: f64) -> Result<Option<(f64, usize)>> {
        let rv = self.row(v)?;
        if let Some(ru) = self.grid_slice(u) {
            return Ok(row_distance_within(ru, &rv, self.k, bound));
        }
        if !self.dense.is_empty() {
            if let Some(i) = self.w.candidate_index(u) {
                return Ok(row_distance_within(&self.dense[i], &rv, self.k, bound));
            }
        }
        // lazy evaluation, position by position
        let mut buf = vec![ZERO; self.k];
        let mut best = (0.0f64, 0usize);
        for p in 0..self.layout.len() {
            let x = self.product_at(u, p)?;
            self.f.eval_into(&x, &mut buf)?;
            let d = crate::function::codomain_distance(&buf, &rv[p * self.k..(p + 1) * self.k]);
            if d > bound {
                return Ok(None);
            }
            if d > best.0 {
                best = (d, p);
            }
        }
        Ok(Some(best))
    }
}

fn grid_element(model: &GroupModel, step: Option<f64>, j: i64) -> Element {
    match (model, step) {
        (GroupModel::RealGrid { .. }, Some(h)) => Element::scalar(j as f64 * h),
        _ => Element::integer(j),
    }
}

/// Sup-distance between two rows of width-`k` points; first argmax.
#[inline]
pub fn row_distance(a: &[Complex64], b: &[Complex64], k: usize) -> (f64, usize) {
    let mut best = 0.0f64;
    let mut at = 0usize;
    if k == 1 {
        for (p, (x, y)) in a.iter().zip(b).enumerate() {
            let d = (*x - *y).norm_sqr();
            if d > best {
                best = d;
                at = p;
            }
        }
        return (best.sqrt(), at);
    }
    for (p, (x, y)) in a.chunks(k).zip(b.chunks(k)).enumerate() {
        let d = crate::function::codomain_distance(x, y);
        if d > best {
            best = d;
            at = p;
        }
    }
    (best, at)
}

/// Like [`row_distance`] but gives up as soon as `bound` is exceeded.
#[inline]
pub fn row_distance_within(a: &[Complex64], b: &[Complex64], k: usize, bound: f64) -> Option<(f64, usize)> {
    let mut best = 0.0f64;
    let mut at = 0usize;
    if k == 1 {
        for (p, (x, y)) in a.iter().zip(b).enumerate() {
            let d = (*x - *y).norm_sqr();
            if d > best {
                if d.sqrt() > bound {
                    return None;
                }
                best = d;
                at = p;
            }
        }
        return Some((best.sqrt(), at));
    }
    for (p, (x, y)) in a.chunks(k).zip(b.chunks(k)).enumerate() {
        let d = crate::function::codomain_distance(x, y);
        if d > bound {
            return None;
        }
        if d > best {
            best = d;
            at = p;
        }
    }
    Some((best, at))
}
