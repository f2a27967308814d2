//! Uniform continuity moduli on a sampled scale of near-identity
//! displacements.
//!
//! For a displacement `v` the discrepancy is `max_x d(f(v x), f(x))` on the
//! left, `max_x d(f(x v), f(x))` on the right and
//! `max_{x,y} d(f(x v y), f(x y))` two-sided.

use serde::{Deserialize, Serialize};

use crate::checkers::verdict::Verdict;
use crate::function::{codomain_distance, FunctionTable};
use crate::group::{Element, GroupModel, Motion};
use crate::rows::Layout;
use crate::uniformity::Side;
use crate::window::WindowSpec;
use crate::{ApError, Result};

/// Near-identity displacements grouped by size, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacementScale {
    pub levels: Vec<ScaleLevel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleLevel {
    pub size: f64,
    pub displacements: Vec<Element>,
}

impl DisplacementScale {
    /// Default scale for the window's model.
    ///
    /// * real grid: `h / 2^k` for `k = 10..1`, then `m h` for `m = 1..8`,
    ///   then `h 2^k` up to the window diameter, each along every axis;
    /// * lattice: `0` (the identity) and `1..8` along every axis;
    /// * finite groups: `0` (the identity) and `1` (every element);
    /// * `E(2)`: `10^(-4 + k/4)` for `k = 0..12` along `x`, `y`, `theta`
    ///   (both signs) and the two diagonals.
    pub fn for_window(w: &WindowSpec) -> Self {
        let model = w.model();
        let mut levels = Vec::new();
        match model {
            GroupModel::RealGrid { dim, step } => {
                let mut sizes: Vec<f64> = (1..=10).rev().map(|k| step / f64::powi(2.0, k)).collect();
                sizes.extend((1..=8).map(|m| m as f64 * step));
                let diam = w.diameter();
                let mut s = 16.0 * step;
                while s < diam {
                    sizes.push(s);
                    s *= 2.0;
                }
                for size in sizes {
                    levels.push(ScaleLevel {
                        size,
                        displacements: axis_moves(*dim, |c| Element::real(c).unwrap(), size),
                    });
                }
            }
            GroupModel::Lattice { dim } => {
                levels.push(ScaleLevel {
                    size: 0.0,
                    displacements: vec![model.identity()],
                });
                for m in 1..=8 {
                    let moves = axis_moves(*dim, |c| {
                        Element::int(&c.iter().map(|x| *x as i64).collect::<Vec<_>>()).unwrap()
                    }, m as f64);
                    levels.push(ScaleLevel {
                        size: m as f64,
                        displacements: moves,
                    });
                }
            }
            GroupModel::Cayley(g) => {
                levels.push(ScaleLevel {
                    size: 0.0,
                    displacements: vec![model.identity()],
                });
                levels.push(ScaleLevel {
                    size: 1.0,
                    displacements: (0..g.order() as u32).map(Element::Index).collect(),
                });
            }
            GroupModel::MotionE2 => {
                for k in 0..=12 {
                    let d = 10f64.powf(-4.0 + k as f64 / 4.0);
                    let mut moves = Vec::new();
                    for s in [d, -d] {
                        moves.push(Element::Motion(Motion::from_parts(s, 0.0, 0.0)));
                        moves.push(Element::Motion(Motion::from_parts(0.0, s, 0.0)));
                        moves.push(Element::Motion(Motion::from_parts(0.0, 0.0, s)));
                        moves.push(Element::Motion(Motion::from_parts(s, s, s)));
                    }
                    levels.push(ScaleLevel {
                        size: d,
                        displacements: moves,
                    });
                }
            }
        }
        Self { levels }
    }
}

fn axis_moves(dim: usize, make: impl Fn(&[f64]) -> Element, size: f64) -> Vec<Element> {
    let mut out = Vec::with_capacity(2 * dim);
    for axis in 0..dim {
        for s in [size, -size] {
            let mut c = vec![0.0; dim];
            c[axis] = s;
            out.push(make(&c));
        }
    }
    out
}

/// Where a discrepancy is attained: `d(f(x v y), f(x y))` with `y`
/// absent on one-sided scans (and `x` the free variable).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UcWitness {
    pub x: Element,
    pub v: Element,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Element>,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcEntry {
    pub epsilon: f64,
    /// Largest admissible sampled size, `None` when even the smallest fails.
    pub delta: Option<f64>,
    /// Whether every sampled size was admissible; `delta` is then the
    /// window diameter.
    pub unbounded: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<UcWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcModulus {
    pub side: Side,
    pub scale: DisplacementScale,
    /// Cumulative worst discrepancy over all displacements up to each level.
    pub level_defects: Vec<f64>,
    pub table: Vec<UcEntry>,
}

/// `d(f(x v y), f(x y))` for the scan's side.
pub fn uc_discrepancy(f: &FunctionTable, side: Side, x: &Element, v: &Element, y: Option<&Element>) -> Result<f64> {
    let m = f.model();
    let (a, b) = match side {
        Side::Left => (m.op(v, x)?, *x),
        Side::Right => (m.op(x, v)?, *x),
        Side::TwoSided => {
            let y = y.ok_or_else(|| ApError::Invalid("two-sided witness needs y".into()))?;
            (m.op(&m.op(x, v)?, y)?, m.op(x, y)?)
        }
    };
    Ok(f.distance(&a, &b)?)
}

fn level_worst(f: &FunctionTable, side: Side, w: &WindowSpec, level: &ScaleLevel) -> Result<(f64, Option<UcWitness>)> {
    let test = w.test_set();
    let m = f.model();
    let k = f.width();
    let base: Vec<Vec<num_complex::Complex64>> = match side {
        Side::TwoSided => Vec::new(),
        _ => test.iter().map(|x| f.eval(x)).collect::<Result<_, _>>()?,
    };
    let sums = match side {
        Side::TwoSided => grid_sumset(m, test)
            .map(|zs| zs.iter().map(|z| f.eval(z)).collect::<Result<Vec<_>, _>>().map(|fz| (zs, fz)))
            .transpose()?,
        _ => None,
    };
    let mut buf = vec![num_complex::Complex64::new(0.0, 0.0); k];
    let mut best = 0.0f64;
    let mut wit = None;
    for v in &level.displacements {
        match side {
            Side::Left | Side::Right => {
                for (x, fx) in test.iter().zip(&base) {
                    let p = if side == Side::Left { m.op(v, x)? } else { m.op(x, v)? };
                    f.eval_into(&p, &mut buf)?;
                    let d = codomain_distance(&buf, fx);
                    if d > best || wit.is_none() {
                        best = best.max(d);
                        wit = Some(UcWitness { x: *x, v: *v, y: None, distance: d });
                    }
                }
            }
            Side::TwoSided if sums.is_some() => {
                let (zs, fz) = sums.as_ref().unwrap();
                for (q, (z, fz)) in zs.iter().zip(fz).enumerate() {
                    f.eval_into(&m.op(z, v)?, &mut buf)?;
                    let d = codomain_distance(&buf, fz);
                    if d > best || wit.is_none() {
                        best = best.max(d);
                        let (a, b) = Layout::Sumset(test.len()).indices(q);
                        wit = Some(UcWitness { x: test[a], v: *v, y: Some(test[b]), distance: d });
                    }
                }
            }
            Side::TwoSided => {
                let mut other = vec![num_complex::Complex64::new(0.0, 0.0); k];
                for x in test {
                    let xv = m.op(x, v)?;
                    for y in test {
                        f.eval_into(&m.op(&xv, y)?, &mut buf)?;
                        f.eval_into(&m.op(x, y)?, &mut other)?;
                        let d = codomain_distance(&buf, &other);
                        if d > best || wit.is_none() {
                            best = best.max(d);
                            wit = Some(UcWitness { x: *x, v: *v, y: Some(*y), distance: d });
                        }
                    }
                }
            }
        }
    }
    Ok((best, wit))
}

/// `{x y}` for a contiguous 1-d grid test set, ordered by index sum.
/// Products are formed as `x y` with the smallest admissible `x`, matching
/// the pair scan bit for bit.
fn grid_sumset(m: &GroupModel, test: &[Element]) -> Option<Vec<Element>> {
    let step = match m {
        GroupModel::Lattice { dim: 1 } => 1.0,
        GroupModel::RealGrid { dim: 1, step } => *step,
        _ => return None,
    };
    let xs: Vec<f64> = test.iter().map(|x| x.as_scalar().unwrap()).collect();
    let k0 = (xs[0] / step).round();
    let on_grid = xs
        .iter()
        .enumerate()
        .all(|(i, &x)| x == (k0 + i as f64) * step || (matches!(m, GroupModel::Lattice { .. }) && x == k0 + i as f64));
    if !on_grid {
        return None;
    }
    let n = test.len();
    let layout = Layout::Sumset(n);
    (0..layout.len())
        .map(|q| {
            let (a, b) = layout.indices(q);
            m.op(&test[a], &test[b]).ok()
        })
        .collect()
}

/// For each epsilon, the largest sampled displacement size whose
/// cumulative discrepancy is at most epsilon.
pub fn uc_modulus_scan(
    f: &FunctionTable,
    epsilons: &[f64],
    side: Side,
    w: &WindowSpec,
    scale: Option<DisplacementScale>,
) -> Result<Verdict<UcModulus>> {
    if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(ApError::Invalid("epsilons must be positive and nonempty".into()));
    }
    let scale = scale.unwrap_or_else(|| DisplacementScale::for_window(w));
    if scale.levels.is_empty() {
        return Err(ApError::Precondition("displacement scale is empty".into()));
    }
    let mut cumulative = Vec::with_capacity(scale.levels.len());
    let mut first_wit = None;
    let mut running = 0.0f64;
    for (i, level) in scale.levels.iter().enumerate() {
        let (d, wit) = level_worst(f, side, w, level)?;
        if i == 0 {
            first_wit = wit;
        }
        running = running.max(d);
        cumulative.push(running);
    }
    let diameter = w.diameter();
    let table: Vec<UcEntry> = epsilons
        .iter()
        .map(|&eps| {
            let admissible = cumulative.iter().take_while(|&&d| d <= eps).count();
            if admissible == 0 {
                UcEntry {
                    epsilon: eps,
                    delta: None,
                    unbounded: false,
                    failure: first_wit,
                }
            } else if admissible == cumulative.len() {
                UcEntry {
                    epsilon: eps,
                    delta: Some(diameter.max(scale.levels[admissible - 1].size)),
                    unbounded: true,
                    failure: None,
                }
            } else {
                UcEntry {
                    epsilon: eps,
                    delta: Some(scale.levels[admissible - 1].size),
                    unbounded: false,
                    failure: None,
                }
            }
        })
        .collect();
    let failures = table.iter().filter(|e| e.delta.is_none()).count();
    let modulus = UcModulus {
        side,
        scale,
        level_defects: cumulative,
        table,
    };
    Ok(Verdict::new(modulus, 0.0, failures as f64, w.fingerprint()))
}

/// Re-evaluates every stored failure witness; returns the largest gap
/// between a stored and a recomputed distance.
pub fn verify_uc_witnesses(f: &FunctionTable, m: &UcModulus) -> Result<f64> {
    let mut gap = 0.0f64;
    for e in &m.table {
        if let Some(wit) = &e.failure {
            let d = uc_discrepancy(f, m.side, &wit.x, &wit.v, wit.y.as_ref())?;
            gap = gap.max((d - wit.distance).abs());
            if !(d > e.epsilon) {
                return Err(ApError::Reverification(format!(
                    "uc witness at epsilon {} has distance {d}",
                    e.epsilon
                )));
            }
        }
    }
    Ok(gap)
}
