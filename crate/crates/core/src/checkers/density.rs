//! Relative density of period sets: `F P`, `P F`, `K P` and `F1 P F2`
//! covering the window.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::checkers::periods::PeriodSet;
use crate::checkers::verdict::Verdict;
use crate::group::{Element, GroupModel};
use crate::uniformity::Side;
use crate::window::WindowSpec;
use crate::{ApError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMode {
    /// Finite `F` with `F P` covering the window.
    FiniteLeft,
    /// Finite `F` with `P F` covering the window.
    FiniteRight,
    /// An interval `K = [-L/2, L/2]` with `K + P` covering a 1-d window.
    Compact,
    /// Finite `F1`, `F2` with `F1 P F2` covering the window.
    Weak,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityBudget {
    /// Largest total witness size for the finite modes.
    pub max_size: usize,
    /// Largest interval length in compact mode; defaults to the window's
    /// half-width.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_extent: Option<f64>,
}

impl Default for DensityBudget {
    fn default() -> Self {
        Self {
            max_size: 64,
            max_extent: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityWitness {
    pub mode: DensityMode,
    pub side: Side,
    pub epsilon: f64,
    pub periods: Vec<Element>,
    /// `F`, or `F1` in weak mode.
    pub left: Vec<Element>,
    /// `F2` in weak mode.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub right: Vec<Element>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    /// Largest gap between consecutive periods (compact mode).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_gap: Option<f64>,
    /// Interval length needed to cover the window, edges included.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extent: Option<f64>,
    pub budget: DensityBudget,
    pub residual: Vec<Element>,
}

impl DensityWitness {
    pub fn residual_count(&self) -> usize {
        self.residual.len()
    }
}

/// Builds a density witness for `p` over the window's candidates.
pub fn density_check(
    p: &PeriodSet,
    w: &WindowSpec,
    mode: DensityMode,
    budget: DensityBudget,
) -> Result<Verdict<DensityWitness>> {
    if p.taus.is_empty() {
        return Err(ApError::Precondition("empty period set".into()));
    }
    let periods = p.elements();
    let mut wit = DensityWitness {
        mode,
        side: p.side,
        epsilon: p.epsilon,
        periods,
        left: Vec::new(),
        right: Vec::new(),
        interval: None,
        max_gap: None,
        extent: None,
        budget,
        residual: Vec::new(),
    };
    match mode {
        DensityMode::Compact => compact(&mut wit, w)?,
        DensityMode::FiniteLeft | DensityMode::FiniteRight => finite(&mut wit, w)?,
        DensityMode::Weak => weak(&mut wit, w)?,
    }
    let defect = wit.residual.len() as f64;
    Ok(Verdict::new(wit, 0.0, defect, w.fingerprint()))
}

fn scalars(model: &GroupModel, xs: &[Element]) -> Result<Vec<f64>> {
    match model {
        GroupModel::Lattice { dim: 1 } | GroupModel::RealGrid { dim: 1, .. } => Ok(xs
            .iter()
            .map(|x| x.as_scalar().expect("1-d element"))
            .collect()),
        _ => Err(ApError::Contract(format!(
            "compact density is defined on one-dimensional windows, not {}",
            model.kind()
        ))),
    }
}

/// Half-width of the candidate range.
fn half_width(xs: &[f64]) -> f64 {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (hi - lo) / 2.0
}

fn compact(wit: &mut DensityWitness, w: &WindowSpec) -> Result<()> {
    let xs = scalars(w.model(), w.candidates())?;
    let mut ps = scalars(w.model(), &wit.periods)?;
    ps.sort_by(f64::total_cmp);
    let lo = xs[0];
    let hi = xs[xs.len() - 1];
    let gap = ps.windows(2).map(|v| v[1] - v[0]).fold(0.0, f64::max);
    let edge = (ps[0] - lo).max(hi - ps[ps.len() - 1]).max(0.0);
    let need = gap.max(2.0 * edge);
    let cap = wit.budget.max_extent.unwrap_or_else(|| half_width(&xs));
    let len = need.min(cap);
    wit.max_gap = Some(gap);
    wit.extent = Some(need);
    wit.interval = Some([-len / 2.0, len / 2.0]);
    wit.residual = compact_residual(w, &xs, &ps, len / 2.0);
    Ok(())
}

fn compact_residual(w: &WindowSpec, xs: &[f64], sorted: &[f64], reach: f64) -> Vec<Element> {
    let tol = w.tolerance().max(1e-12 * reach.abs());
    xs.iter()
        .zip(w.candidates())
        .filter(|(&x, _)| {
            let i = sorted.partition_point(|&p| p < x);
            let below = if i > 0 { x - sorted[i - 1] } else { f64::INFINITY };
            let above = if i < sorted.len() { sorted[i] - x } else { f64::INFINITY };
            below.min(above) > reach + tol
        })
        .map(|(_, e)| *e)
        .collect()
}

/// Candidate indices of `a P` (left) or `P a` (right).
fn translate_set(w: &WindowSpec, periods: &[Element], a: &Element, left: bool) -> Result<Vec<usize>> {
    let m = w.model();
    let mut out = Vec::with_capacity(periods.len());
    for p in periods {
        let x = if left { m.op(a, p)? } else { m.op(p, a)? };
        if let Some(i) = w.candidate_index(&x) {
            out.push(i);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn finite(wit: &mut DensityWitness, w: &WindowSpec) -> Result<()> {
    let left = wit.mode == DensityMode::FiniteLeft;
    let cands = w.candidates();
    let n = cands.len();
    let sets = cands
        .iter()
        .map(|a| translate_set(w, &wit.periods, a, left))
        .collect::<Result<Vec<_>>>()?;
    let mut covered = vec![false; n];
    let mut remaining = n;
    // lazy greedy; ties go to the lowest candidate index
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> =
        sets.iter().enumerate().map(|(i, s)| (s.len(), Reverse(i))).collect();
    while remaining > 0 && wit.left.len() < wit.budget.max_size {
        let Some((_, Reverse(i))) = heap.pop() else { break };
        let gain = sets[i].iter().filter(|&&j| !covered[j]).count();
        if gain == 0 {
            continue;
        }
        if let Some(&(top, Reverse(ti))) = heap.peek() {
            if (gain, Reverse(i)) < (top, Reverse(ti)) {
                heap.push((gain, Reverse(i)));
                continue;
            }
        }
        for &j in &sets[i] {
            if !covered[j] {
                covered[j] = true;
                remaining -= 1;
            }
        }
        wit.left.push(cands[i]);
    }
    wit.residual = (0..n).filter(|&j| !covered[j]).map(|j| cands[j]).collect();
    Ok(())
}

fn weak(wit: &mut DensityWitness, w: &WindowSpec) -> Result<()> {
    let m = w.model();
    let cands = w.candidates();
    let n = cands.len();
    let e = m.identity();
    let mut f1 = vec![e];
    let mut f2 = vec![e];
    let mut covered = vec![false; n];
    let mark = |covered: &mut [bool], a: &Element, b: &Element| -> Result<usize> {
        let mut gain = 0;
        for p in &wit.periods {
            if let Some(i) = w.candidate_index(&m.op(&m.op(a, p)?, b)?) {
                if !covered[i] {
                    covered[i] = true;
                    gain += 1;
                }
            }
        }
        Ok(gain)
    };
    mark(&mut covered, &e, &e)?;
    while covered.iter().any(|c| !c) && f1.len() + f2.len() < wit.budget.max_size {
        // (gain, prefer left, lowest index)
        let mut best: Option<(usize, bool, Reverse<usize>)> = None;
        for (i, a) in cands.iter().enumerate() {
            for side_left in [true, false] {
                let mut seen = covered.clone();
                let mut gain = 0;
                let others = if side_left { &f2 } else { &f1 };
                for o in others {
                    gain += if side_left {
                        mark(&mut seen, a, o)?
                    } else {
                        mark(&mut seen, o, a)?
                    };
                }
                let key = (gain, side_left, Reverse(i));
                if gain > 0 && best.is_none_or(|b| key > b) {
                    best = Some(key);
                }
            }
        }
        let Some((_, side_left, Reverse(i))) = best else { break };
        let a = cands[i];
        if side_left {
            for o in f2.clone() {
                mark(&mut covered, &a, &o)?;
            }
            f1.push(a);
        } else {
            for o in f1.clone() {
                mark(&mut covered, &o, &a)?;
            }
            f2.push(a);
        }
    }
    wit.left = f1;
    wit.right = f2;
    wit.residual = (0..n).filter(|&j| !covered[j]).map(|j| cands[j]).collect();
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCheck {
    pub residual: Vec<Element>,
    /// The stored residual equals the recomputed one.
    pub residual_matches: bool,
    pub pass: bool,
}

/// Recomputes the residual of a witness from its own data.
pub fn verify_density(wit: &DensityWitness, w: &WindowSpec) -> Result<DensityCheck> {
    let m = w.model();
    for x in wit.periods.iter().chain(&wit.left).chain(&wit.right) {
        m.check(x)?;
    }
    let cands = w.candidates();
    let residual: Vec<Element> = match wit.mode {
        DensityMode::Compact => {
            let [a, b] = wit
                .interval
                .ok_or_else(|| ApError::Invalid("compact witness without an interval".into()))?;
            if a != -b {
                return Err(ApError::Invalid("compact interval must be symmetric".into()));
            }
            let xs = scalars(m, cands)?;
            let mut ps = scalars(m, &wit.periods)?;
            ps.sort_by(f64::total_cmp);
            compact_residual(w, &xs, &ps, b)
        }
        DensityMode::FiniteLeft | DensityMode::FiniteRight | DensityMode::Weak => {
            let mut covered = vec![false; cands.len()];
            let e = m.identity();
            let (f1, f2): (Vec<Element>, Vec<Element>) = match wit.mode {
                DensityMode::FiniteLeft => (wit.left.clone(), vec![e]),
                DensityMode::FiniteRight => (vec![e], wit.left.clone()),
                _ => (wit.left.clone(), wit.right.clone()),
            };
            for a in &f1 {
                for p in &wit.periods {
                    let ap = m.op(a, p)?;
                    for b in &f2 {
                        if let Some(i) = w.candidate_index(&m.op(&ap, b)?) {
                            covered[i] = true;
                        }
                    }
                }
            }
            (0..cands.len()).filter(|&i| !covered[i]).map(|i| cands[i]).collect()
        }
    };
    let matches = residual.len() == wit.residual.len()
        && residual.iter().zip(&wit.residual).all(|(a, b)| m.equal(a, b, w.tolerance()));
    Ok(DensityCheck {
        pass: residual.is_empty(),
        residual_matches: matches,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checkers::periods::{period_scan, PeriodEntry};
    use crate::function::{zmod_character, FunctionTable};
    use crate::window::{build_window, WindowDoc};
    use num_complex::Complex64;
    use std::f64::consts::{PI, SQRT_2};

    fn set_of(w: &WindowSpec, taus: Vec<Element>) -> PeriodSet {
        let _ = w;
        PeriodSet {
            epsilon: 0.1,
            side: Side::Left,
            taus: taus.into_iter().map(|tau| PeriodEntry { tau, defect: 0.0 }).collect(),
            scanned: 0,
        }
    }

    #[test]
    fn arithmetic_progression_passes() {
        // integer window scaled so 2 pi multiples sit on the grid
        let h = 2.0 * PI / 64.0;
        let half = (100.0 / h).floor() * h;
        let w = build_window(&WindowDoc::real_line(half, h)).unwrap();
        let taus = (-15..=15).map(|k| Element::scalar((64 * k) as f64 * h)).collect();
        let v = density_check(&set_of(&w, taus), &w, DensityMode::Compact, DensityBudget::default()).unwrap();
        assert!(v.pass);
        assert!((v.certificate.max_gap.unwrap() - 2.0 * PI).abs() < 1e-9);
        assert!(verify_density(&v.certificate, &w).unwrap().residual_matches);
    }

    #[test]
    fn single_period_fails_with_large_residual() {
        let w = build_window(&WindowDoc::integers(100)).unwrap();
        let p = set_of(&w, vec![Element::integer(0)]);
        let budget = DensityBudget { max_size: 5, max_extent: None };
        let v = density_check(&p, &w, DensityMode::FiniteLeft, budget).unwrap();
        assert!(!v.pass);
        assert_eq!(v.certificate.left.len(), 5);
        assert_eq!(v.certificate.residual_count(), 201 - 5);
        let c = density_check(&p, &w, DensityMode::Compact, DensityBudget::default()).unwrap();
        assert!(!c.pass);
        assert_eq!(c.certificate.residual_count(), 201 - 101);
        let check = verify_density(&v.certificate, &w).unwrap();
        assert!(check.residual_matches && !check.pass);
    }

    #[test]
    fn character_needs_six_translates() {
        let w = build_window(&WindowDoc::integers(60)).unwrap();
        let f = zmod_character(6, w.model().clone());
        let p = period_scan(&f, 0.5, Side::Left, &w).unwrap();
        for mode in [DensityMode::FiniteLeft, DensityMode::FiniteRight, DensityMode::Weak] {
            let v = density_check(&p, &w, mode, DensityBudget::default()).unwrap();
            assert!(v.pass, "{mode:?}");
            // six residue classes need six translates of 6Z
            let c = &v.certificate;
            let products = if mode == DensityMode::Weak { c.left.len() * c.right.len() } else { c.left.len() };
            assert!(products >= 6, "{mode:?}: {products}");
            assert!(verify_density(&v.certificate, &w).unwrap().pass);
        }
    }

    #[test]
    fn quasi_periodic_gap_is_stable() {
        let g = |t: f64| t.sin() + (SQRT_2 * t).sin();
        let mut gaps = vec![];
        for t in [200.0, 400.0] {
            let doc = WindowDoc::new(crate::window::WindowParams::RealGrid {
                dim: 1,
                half_width: t,
                step: 0.05,
                stride: 1,
                test_half_width: Some(200.0),
            });
            let w = build_window(&doc).unwrap();
            let f = FunctionTable::of_real("qp", w.model().clone(), move |x| Complex64::new(g(x), 0.0));
            let p = period_scan(&f, 0.3, Side::Left, &w).unwrap();
            let v = density_check(&p, &w, DensityMode::Compact, DensityBudget::default()).unwrap();
            assert!(v.pass);
            gaps.push(v.certificate.max_gap.unwrap());
        }
        assert!(gaps[1] <= gaps[0] + 1e-9, "{gaps:?}");
    }
}
