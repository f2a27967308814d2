//! epsilon-period sets `P_L`, `P_R` and `P`.

use serde::{Deserialize, Serialize};

use crate::checkers::cover::check_epsilon;
use crate::function::FunctionTable;
use crate::group::Element;
use crate::rows::Translates;
use crate::uniformity::{Side, Witness};
use crate::window::WindowSpec;
use crate::{ApError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodEntry {
    pub tau: Element,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodSet {
    pub epsilon: f64,
    pub side: Side,
    pub taus: Vec<PeriodEntry>,
    /// Number of candidates scanned.
    pub scanned: usize,
}

impl PeriodSet {
    pub fn elements(&self) -> Vec<Element> {
        self.taus.iter().map(|p| p.tau).collect()
    }

    pub fn max_defect(&self) -> f64 {
        self.taus.iter().map(|p| p.defect).fold(0.0, f64::max)
    }

    pub fn contains(&self, x: &Element, tol: f64) -> bool {
        self.taus.iter().any(|p| {
            p.tau.kind() == x.kind() && (p.tau == *x || p.tau.coordinate_gap(x) <= tol)
        })
    }
}

/// `defect(tau) = D_side(tau, e)`: the sup of `d(f(tau x), f(x))`,
/// `d(f(x tau), f(x))` or `d(f(x tau y), f(x y))` over the test set.
pub fn period_defect(rows: &Translates<'_>, tau: &Element) -> Result<(f64, Witness)> {
    let e = rows.window().model().identity();
    let (d, p) = rows.distance(tau, &e)?;
    Ok((d, rows.witness_at(p)))
}

/// All candidates with defect at most `epsilon`, plus the identity.
pub fn period_scan(f: &FunctionTable, epsilon: f64, side: Side, w: &WindowSpec) -> Result<PeriodSet> {
    check_epsilon(epsilon)?;
    let rows = Translates::new(f, w, side)?;
    let e = w.model().identity();
    let mut taus = Vec::new();
    for tau in w.candidates() {
        if let Some((d, _)) = rows.distance_within(tau, &e, epsilon)? {
            taus.push(PeriodEntry { tau: *tau, defect: d });
        }
    }
    if !taus.iter().any(|p| w.model().equal(&p.tau, &e, w.tolerance())) {
        let (d, _) = rows.distance(&e, &e)?;
        taus.push(PeriodEntry { tau: e, defect: d });
        taus.sort_by(|a, b| a.tau.lex_cmp(&b.tau));
    }
    Ok(PeriodSet {
        epsilon,
        side,
        taus,
        scanned: w.candidates().len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodCheck {
    pub budget: f64,
    pub max_defect: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst: Option<Element>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// Entries whose stored defect differs from the recomputed one.
    pub mismatched: usize,
    pub pass: bool,
}

/// Recomputes every listed defect.
pub fn verify_periods(f: &FunctionTable, p: &PeriodSet, w: &WindowSpec) -> Result<PeriodCheck> {
    if p.taus.is_empty() {
        return Err(ApError::Precondition("empty period set".into()));
    }
    let rows = Translates::new(f, w, p.side)?;
    let mut check = PeriodCheck {
        budget: p.epsilon,
        max_defect: 0.0,
        worst: None,
        witness: None,
        mismatched: 0,
        pass: true,
    };
    for entry in &p.taus {
        let (d, wit) = period_defect(&rows, &entry.tau)?;
        if d != entry.defect {
            check.mismatched += 1;
        }
        if d > check.max_defect || check.worst.is_none() {
            check.max_defect = d.max(check.max_defect);
            check.worst = Some(entry.tau);
            check.witness = Some(wit);
        }
    }
    check.pass = check.max_defect <= p.epsilon && check.mismatched == 0;
    Ok(check)
}

/// Smallest positive one-dimensional period outside the run of periods
/// that contains the identity; `step` is the grid spacing.
pub fn first_nontrivial(p: &PeriodSet, step: f64) -> Option<f64> {
    let mut pos: Vec<f64> = p.taus.iter().filter_map(|e| e.tau.as_scalar()).filter(|&x| x > 0.0).collect();
    pos.sort_by(f64::total_cmp);
    let mut last = 0.0;
    for x in pos {
        if x - last > 1.5 * step {
            return Some(x);
        }
        last = x;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::zmod_character;
    use crate::group::CayleyGroup;
    use crate::window::{build_window, WindowDoc};
    use num_complex::Complex64;
    use std::f64::consts::{PI, SQRT_2};

    #[test]
    fn sin_has_two_pi_period() {
        let h = 0.01;
        let w = build_window(&WindowDoc::real_line(20.0, h)).unwrap();
        let f = FunctionTable::of_real("sin", w.model().clone(), |t| Complex64::new(t.sin(), 0.0));
        let p = period_scan(&f, 0.02, Side::Left, &w).unwrap();
        let tau = Element::scalar((2.0 * PI / h).round() * h);
        let entry = p.taus.iter().find(|e| e.tau == tau).expect("2 pi grid point");
        assert!(entry.defect <= h);
        assert!(p.contains(&Element::scalar(0.0), 0.0));
        assert!(verify_periods(&f, &p, &w).unwrap().pass);
    }

    #[test]
    fn character_periods_are_multiples_of_six() {
        let w = build_window(&WindowDoc::integers(30)).unwrap();
        let f = zmod_character(6, w.model().clone());
        let p = period_scan(&f, 0.5, Side::Left, &w).unwrap();
        let expected: Vec<Element> = (-5..=5).map(|k| Element::integer(6 * k)).collect();
        assert_eq!(p.elements(), expected);
        assert!(p.taus.iter().all(|e| e.defect == 0.0));
    }

    #[test]
    fn identity_present_and_monotone() {
        let w = build_window(&WindowDoc::group("s3")).unwrap();
        let vals = (0..6).map(|i| vec![Complex64::from_polar(1.0, i as f64)]).collect();
        let f = FunctionTable::lookup("t", w.model().clone(), vals).unwrap();
        let g = CayleyGroup::symmetric3();
        for side in Side::ALL {
            let mut prev: Vec<Element> = vec![];
            for eps in [0.1, 0.5, 1.0, 2.5] {
                let p = period_scan(&f, eps, side, &w).unwrap();
                let id = p.taus.iter().find(|e| e.tau == Element::Index(g.identity() as u32)).unwrap();
                assert_eq!(id.defect, 0.0);
                assert!(prev.iter().all(|x| p.contains(x, 0.0)));
                prev = p.elements();
            }
        }
    }

    #[test]
    fn quasi_periodic_smallest_period() {
        // 10x finer re-check of the grid result
        let w = build_window(&WindowDoc::real_line(200.0, 0.05)).unwrap();
        let g = |t: f64| t.sin() + (SQRT_2 * t).sin();
        let f = FunctionTable::of_real("qp", w.model().clone(), move |t| Complex64::new(g(t), 0.0));
        let p = period_scan(&f, 0.3, Side::Left, &w).unwrap();
        let tau = first_nontrivial(&p, 0.05).unwrap();
        // brute force oracle on the same grid
        let xs: Vec<f64> = (-4000..=4000).map(|k| k as f64 * 0.05).collect();
        let defect = |tau: f64| xs.iter().map(|&x| (g(x + tau) - g(x)).abs()).fold(0.0, f64::max);
        let leave = (1..=4000).find(|&k| defect(k as f64 * 0.05) > 0.3).unwrap();
        let first = (leave..=4000).map(|k| k as f64 * 0.05).find(|&t| defect(t) <= 0.3).unwrap();
        assert!((tau - first).abs() < 1e-9, "{tau} vs {first}");
        let fine: Vec<f64> = (-40000..=40000).map(|k| k as f64 * 0.005).collect();
        let fine_defect = fine.iter().map(|&x| (g(x + tau) - g(x)).abs()).fold(0.0, f64::max);
        assert!(fine_defect <= 0.3 + (1.0 + SQRT_2) * 0.05, "{fine_defect}");
        assert!((tau - 75.4).abs() < 1e-9, "tau = {tau}");
    }
}
