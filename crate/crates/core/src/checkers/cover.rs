//! Maak covers, translate nets and range nets by farthest-point sampling.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::checkers::verdict::Verdict;
use crate::function::{codomain_distance, FunctionTable};
use crate::group::Element;
use crate::rows::{row_distance, row_distance_within, Translates};
use crate::uniformity::{Side, TranslateDistance};
use crate::window::WindowSpec;
use crate::{ApError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaakCover {
    pub epsilon: f64,
    pub side: Side,
    pub sets: Vec<Vec<Element>>,
    pub representatives: Vec<Element>,
    pub defect: f64,
}

impl MaakCover {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetSpace {
    /// Translates of `f` under the side's pseudometric.
    Translates,
    /// Values `f(candidates)` in the codomain metric.
    Range,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonNet {
    pub epsilon: f64,
    pub space: NetSpace,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
    pub centers: Vec<Element>,
    pub radius: f64,
}

/// Result of a farthest-point run over `n` points.
#[derive(Debug, Clone)]
pub struct FarthestPoints {
    pub centers: Vec<usize>,
    /// Distance from each point to its nearest center.
    pub dist: Vec<f64>,
    /// Index into `centers` of the nearest (earliest on ties) center.
    pub nearest: Vec<usize>,
}

impl FarthestPoints {
    pub fn radius(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }
}

/// Greedy farthest-point sampling starting at point 0, ties to the lowest
/// index, until the covering radius is at most `stop`.
///
/// `within(c, i, b)` returns `Some(d(c, i))` when it is at most `b` and may
/// return `None` otherwise.
pub fn farthest_points<F>(n: usize, stop: f64, mut within: F) -> Result<FarthestPoints>
where
    F: FnMut(usize, usize, f64) -> Result<Option<f64>>,
{
    if n == 0 {
        return Err(ApError::Invalid("farthest-point sampling over no points".into()));
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut nearest = vec![0usize; n];
    let mut centers = Vec::new();
    let mut next = 0usize;
    loop {
        let c = next;
        let j = centers.len();
        centers.push(c);
        for i in 0..n {
            if i == c {
                dist[i] = 0.0;
                nearest[i] = j;
                continue;
            }
            if dist[i] == 0.0 {
                continue;
            }
            if let Some(d) = within(c, i, dist[i])? {
                if d < dist[i] {
                    dist[i] = d;
                    nearest[i] = j;
                }
            }
        }
        let mut best = 0usize;
        for i in 1..n {
            if dist[i] > dist[best] {
                best = i;
            }
        }
        if !(dist[best] > stop) {
            break;
        }
        next = best;
    }
    Ok(FarthestPoints {
        centers,
        dist,
        nearest,
    })
}

/// Farthest-point net of the candidates' translate rows.
fn translate_fps(rows: &Translates<'_>, stop: f64) -> Result<FarthestPoints> {
    let k = rows.width();
    let n = rows.window().candidates().len();
    farthest_points(n, stop, |c, i, b| {
        let rc = rows.candidate_row(c);
        let ri = rows.candidate_row(i);
        Ok(if b.is_finite() {
            row_distance_within(&rc, &ri, k, b).map(|x| x.0)
        } else {
            Some(row_distance(&rc, &ri, k).0)
        })
    })
}

/// Maak cover with defect at most `epsilon`: an `epsilon / 2` net, each
/// set the closed `epsilon / 2` ball around a center.
pub fn maak_cover_search(f: &FunctionTable, epsilon: f64, side: Side, w: &WindowSpec) -> Result<Verdict<MaakCover>> {
    check_epsilon(epsilon)?;
    let mut rows = Translates::new(f, w, side)?;
    rows.cache_candidates()?;
    let half = epsilon / 2.0;
    let fps = translate_fps(&rows, half)?;
    let cands = w.candidates();
    let k = rows.width();
    let mut sets = Vec::with_capacity(fps.centers.len());
    for &c in &fps.centers {
        let rc = rows.candidate_row(c);
        let mut set = Vec::new();
        for (i, u) in cands.iter().enumerate() {
            if i == c || row_distance_within(&rc, &rows.candidate_row(i), k, half).is_some() {
                set.push(*u);
            }
        }
        sets.push(set);
    }
    let representatives: Vec<Element> = fps.centers.iter().map(|&c| cands[c]).collect();
    let (defect, _) = max_intra_set(&rows, &sets)?;
    let cover = MaakCover {
        epsilon,
        side,
        sets,
        representatives,
        defect,
    };
    Ok(Verdict::new(cover, epsilon, defect, w.fingerprint()))
}

/// Largest translate distance between two members of one set, with a pair
/// attaining it.
fn max_intra_set(rows: &Translates<'_>, sets: &[Vec<Element>]) -> Result<(f64, Option<(Element, Element, usize)>)> {
    let k = rows.width();
    let mut best = 0.0f64;
    let mut wit = None;
    for set in sets {
        let set_rows = set.iter().map(|u| rows.row(u)).collect::<Result<Vec<_>>>()?;
        let (d, a, b, p) = set_diameter(&set_rows, k);
        if d > best {
            best = d;
            wit = Some((set[a], set[b], p));
        }
    }
    Ok((best, wit))
}

/// Diameter of a family of rows in the sup metric: `(d, a, b, position)`.
/// Bit-identical rows are merged first; all-real rows use a per-coordinate
/// min/max sweep.
pub(crate) fn set_diameter<R: AsRef<[Complex64]>>(set_rows: &[R], k: usize) -> (f64, usize, usize, usize) {
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut uniq: Vec<usize> = Vec::new();
    for (i, r) in set_rows.iter().enumerate() {
        let key: Vec<u64> = r.as_ref().iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]).collect();
        seen.entry(key).or_insert_with(|| {
            uniq.push(i);
            i
        });
    }
    let mut best = (0.0f64, 0usize, 0usize, 0usize);
    if uniq.len() < 2 {
        return best;
    }
    let real = uniq.iter().all(|&i| set_rows[i].as_ref().iter().all(|z| z.im == 0.0));
    if real {
        let len = set_rows[uniq[0]].as_ref().len();
        for q in 0..len {
            let (mut lo, mut hi) = (uniq[0], uniq[0]);
            for &i in &uniq[1..] {
                let v = set_rows[i].as_ref()[q].re;
                if v < set_rows[lo].as_ref()[q].re {
                    lo = i;
                }
                if v > set_rows[hi].as_ref()[q].re {
                    hi = i;
                }
            }
            let d = set_rows[hi].as_ref()[q].re - set_rows[lo].as_ref()[q].re;
            if d > best.0 {
                best = (d, lo.min(hi), lo.max(hi), q / k);
            }
        }
        return best;
    }
    for (x, &a) in uniq.iter().enumerate() {
        for &b in &uniq[x + 1..] {
            let (d, p) = row_distance(set_rows[a].as_ref(), set_rows[b].as_ref(), k);
            if d > best.0 {
                best = (d, a, b, p);
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverCheck {
    pub budget: f64,
    pub defect: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage_gap: Option<Element>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<TranslateDistance>,
    pub pass: bool,
}

/// Recomputes coverage and intra-set defect of `cover` from scratch.
pub fn verify_cover(f: &FunctionTable, cover: &MaakCover, w: &WindowSpec) -> Result<CoverCheck> {
    if cover.sets.len() != cover.representatives.len() {
        return Err(ApError::Invalid("cover has mismatched representatives".into()));
    }
    let cands = w.candidates();
    let mut covered = vec![false; cands.len()];
    for (set, rep) in cover.sets.iter().zip(&cover.representatives) {
        let mut has_rep = false;
        for u in set {
            let Some(i) = w.candidate_index(u) else {
                return Err(ApError::Precondition(format!("cover element {u} lies outside the window")));
            };
            covered[i] = true;
            has_rep |= w.model().equal(u, rep, w.tolerance());
        }
        if !has_rep {
            return Err(ApError::Invalid(format!("representative {rep} is not in its set")));
        }
    }
    let gap = covered.iter().position(|c| !c).map(|i| cands[i]);
    let mut rows = Translates::new(f, w, cover.side)?;
    // rows fall back to on-demand evaluation past the cache cap
    let _ = rows.cache_candidates();
    let (defect, wit) = max_intra_set(&rows, &cover.sets)?;
    let witness = wit.map(|(u, v, p)| TranslateDistance {
        u,
        v,
        side: cover.side,
        value: defect,
        witness: rows.witness_at(p),
    });
    Ok(CoverCheck {
        budget: cover.epsilon,
        defect,
        pass: gap.is_none() && defect <= cover.epsilon,
        coverage_gap: gap,
        witness,
    })
}

/// Farthest-point net of translates with covering radius at most `epsilon`.
pub fn translate_net(f: &FunctionTable, epsilon: f64, side: Side, w: &WindowSpec) -> Result<Verdict<EpsilonNet>> {
    check_epsilon(epsilon)?;
    let mut rows = Translates::new(f, w, side)?;
    rows.cache_candidates()?;
    let fps = translate_fps(&rows, epsilon)?;
    let radius = fps.radius();
    let net = EpsilonNet {
        epsilon,
        space: NetSpace::Translates,
        side: Some(side),
        centers: fps.centers.iter().map(|&c| w.candidates()[c]).collect(),
        radius,
    };
    Ok(Verdict::new(net, epsilon, radius, w.fingerprint()))
}

/// Farthest-point net of the sampled range `f(candidates)`.
pub fn range_net(f: &FunctionTable, epsilon: f64, w: &WindowSpec) -> Result<Verdict<EpsilonNet>> {
    check_epsilon(epsilon)?;
    let values = w.candidates().iter().map(|x| f.eval(x)).collect::<Result<Vec<_>, _>>()?;
    let fps = farthest_points(values.len(), epsilon, |c, i, _| Ok(Some(codomain_distance(&values[c], &values[i]))))?;
    let radius = fps.radius();
    let net = EpsilonNet {
        epsilon,
        space: NetSpace::Range,
        side: None,
        centers: fps.centers.iter().map(|&c| w.candidates()[c]).collect(),
        radius,
    };
    Ok(Verdict::new(net, epsilon, radius, w.fingerprint()))
}

/// Recomputes the covering radius of a net over the window's candidates.
pub fn verify_net(f: &FunctionTable, net: &EpsilonNet, w: &WindowSpec) -> Result<f64> {
    if net.centers.is_empty() {
        return Err(ApError::Invalid("net has no centers".into()));
    }
    for c in &net.centers {
        if !w.contains_candidate(c) {
            return Err(ApError::Precondition(format!("net center {c} lies outside the window")));
        }
    }
    match net.space {
        NetSpace::Range => {
            let centers = net.centers.iter().map(|c| f.eval(c)).collect::<Result<Vec<_>, _>>()?;
            let mut radius: f64 = 0.0;
            for x in w.candidates() {
                let v = f.eval(x)?;
                let m = centers.iter().map(|c| codomain_distance(c, &v)).fold(f64::INFINITY, f64::min);
                radius = radius.max(m);
            }
            Ok(radius)
        }
        NetSpace::Translates => {
            let side = net
                .side
                .ok_or_else(|| ApError::Invalid("translate net without a side".into()))?;
            let mut rows = Translates::new(f, w, side)?;
            let _ = rows.cache_candidates();
            let k = rows.width();
            let crows = net.centers.iter().map(|c| rows.row(c)).collect::<Result<Vec<_>>>()?;
            let mut radius: f64 = 0.0;
            for i in 0..w.candidates().len() {
                let r = rows.candidate_row(i);
                let mut m = f64::INFINITY;
                for c in &crows {
                    let d = if m.is_finite() {
                        row_distance_within(c, &r, k, m).map(|x| x.0)
                    } else {
                        Some(row_distance(c, &r, k).0)
                    };
                    if let Some(d) = d {
                        m = m.min(d);
                    }
                    if m == 0.0 {
                        break;
                    }
                }
                radius = radius.max(m);
            }
            Ok(radius)
        }
    }
}

/// The cover of closed `epsilon` balls around the centers of a net whose
/// radius is at most `epsilon / 2`.
pub fn cover_from_net(f: &FunctionTable, net: &EpsilonNet, w: &WindowSpec) -> Result<Verdict<MaakCover>> {
    let side = net
        .side
        .ok_or_else(|| ApError::Invalid("range nets do not induce covers".into()))?;
    let mut rows = Translates::new(f, w, side)?;
    let _ = rows.cache_candidates();
    let k = rows.width();
    let cands = w.candidates();
    let reach = net.epsilon;
    let mut sets = Vec::with_capacity(net.centers.len());
    for c in &net.centers {
        let rc = rows.row(c)?;
        let set: Vec<Element> = (0..cands.len())
            .filter(|&i| row_distance_within(&rc, &rows.candidate_row(i), k, reach).is_some())
            .map(|i| cands[i])
            .collect();
        sets.push(set);
    }
    let (defect, _) = max_intra_set(&rows, &sets)?;
    let budget = 2.0 * net.epsilon;
    let cover = MaakCover {
        epsilon: budget,
        side,
        sets,
        representatives: net.centers.clone(),
        defect,
    };
    Ok(Verdict::new(cover, budget, defect, w.fingerprint()))
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(ApError::Invalid(format!("epsilon must be positive, got {epsilon}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::zmod_character;
    use crate::window::{build_window, WindowDoc};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn z_window(r: i64) -> WindowSpec {
        build_window(&WindowDoc::integers(r)).unwrap()
    }

    #[test]
    fn constant_cover_is_single_set() {
        let w = z_window(10);
        let f = FunctionTable::constant(w.model().clone(), vec![Complex64::new(1.0, 0.0)]);
        let v = maak_cover_search(&f, 0.1, Side::Left, &w).unwrap();
        assert_eq!(v.certificate.len(), 1);
        assert_eq!(v.defect, 0.0);
        let n = translate_net(&f, 0.1, Side::Left, &w).unwrap();
        assert_eq!(n.certificate.centers.len(), 1);
        assert_eq!(n.certificate.radius, 0.0);
        assert_eq!(range_net(&f, 0.1, &w).unwrap().certificate.centers.len(), 1);
    }

    #[test]
    fn character_cover_is_residue_partition() {
        let w = z_window(30);
        let f = zmod_character(6, w.model().clone());
        let v = maak_cover_search(&f, 0.5, Side::Left, &w).unwrap();
        assert!(v.pass);
        assert_eq!(v.certificate.len(), 6);
        assert_eq!(v.defect, 0.0);
        // oracle: residue classes of the window
        let mut expected: Vec<Vec<Element>> = (0..6)
            .map(|r| (-30..=30).filter(|n: &i64| n.rem_euclid(6) == r).map(Element::integer).collect())
            .collect();
        let mut got = v.certificate.sets.clone();
        expected.sort_by(|a, b| a[0].lex_cmp(&b[0]));
        got.sort_by(|a, b| a[0].lex_cmp(&b[0]));
        assert_eq!(got, expected);
        let check = verify_cover(&f, &v.certificate, &w).unwrap();
        assert!(check.pass);
        assert_eq!(check.defect, v.defect);
        assert_eq!(translate_net(&f, 0.5, Side::Left, &w).unwrap().certificate.centers.len(), 6);
    }

    #[test]
    fn bad_cover_reports_witness_pair() {
        let w = z_window(30);
        let f = zmod_character(6, w.model().clone());
        let good = maak_cover_search(&f, 0.5, Side::Left, &w).unwrap().certificate;
        let mut bad = good.clone();
        bad.sets.push(vec![Element::integer(0), Element::integer(3)]);
        bad.representatives.push(Element::integer(0));
        let check = verify_cover(&f, &bad, &w).unwrap();
        assert!(!check.pass);
        let wit = check.witness.unwrap();
        assert_eq!((wit.u, wit.v), (Element::integer(0), Element::integer(3)));
        assert!((wit.value - 2.0).abs() < 1e-15);

        let sets: Vec<Vec<Element>> = (0..6)
            .map(|r| {
                (-30..=30i64)
                    .filter(|n| n.rem_euclid(6) == r && *n != 5)
                    .map(Element::integer)
                    .collect()
            })
            .collect();
        let gap = MaakCover {
            epsilon: 0.5,
            side: Side::Left,
            representatives: sets.iter().map(|s| s[0]).collect(),
            sets,
            defect: 0.0,
        };
        let check = verify_cover(&f, &gap, &w).unwrap();
        assert_eq!(check.coverage_gap, Some(Element::integer(5)));
        assert!(!check.pass);
    }

    #[test]
    fn sin_cover_oracle() {
        let h = PI / 50.0;
        let w = build_window(&WindowDoc::real_line(20.0 * PI, h)).unwrap();
        let f = FunctionTable::of_real("sin", w.model().clone(), |t| Complex64::new(t.sin(), 0.0));
        let v = maak_cover_search(&f, 0.2, Side::Left, &w).unwrap();
        assert!(v.pass && v.defect <= 0.2);
        // Oracle: full distance matrix by direct evaluation, then an
        // independent farthest-point pass.
        let xs: Vec<f64> = w.candidates().iter().map(|e| e.as_scalar().unwrap()).collect();
        let m = xs.len();
        let d = |a: usize, b: usize| {
            xs.iter().map(|t| ((xs[a] + t).sin() - (xs[b] + t).sin()).abs()).fold(0.0, f64::max)
        };
        let mut near = vec![f64::INFINITY; m];
        let mut count = 0;
        let mut c = 0;
        loop {
            count += 1;
            for i in 0..m {
                near[i] = near[i].min(d(c, i));
            }
            let (bi, bd) = near.iter().enumerate().fold((0, -1.0), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc });
            if bd <= 0.1 {
                break;
            }
            c = bi;
        }
        let n = v.certificate.len();
        assert_eq!(n, count);
        assert_eq!(n, 36);
        // centers form a 0.1-packing of a circle of length 2 pi
        assert!(n <= (2.0 * PI / 0.1).ceil() as usize);
        assert_eq!(verify_cover(&f, &v.certificate, &w).unwrap().defect, v.defect);
    }

    #[test]
    fn net_duality() {
        let h = PI / 50.0;
        let w = build_window(&WindowDoc::real_line(10.0 * PI, h)).unwrap();
        let f = FunctionTable::of_real("sin", w.model().clone(), |t| Complex64::new(t.sin(), 0.0));
        for eps in [0.5, 0.2] {
            let net = translate_net(&f, eps / 2.0, Side::Left, &w).unwrap();
            assert!(net.pass);
            assert!((verify_net(&f, &net.certificate, &w).unwrap() - net.defect).abs() < 1e-15);
            let cover = cover_from_net(&f, &net.certificate, &w).unwrap();
            assert!(cover.pass, "eps {eps}: defect {}", cover.defect);
            assert!(verify_cover(&f, &cover.certificate, &w).unwrap().pass);
        }
    }

    #[test]
    fn sin_range_net() {
        let w = build_window(&WindowDoc::real_line(10.0, 0.01)).unwrap();
        let f = FunctionTable::of_real("sin", w.model().clone(), |t| Complex64::new(t.sin(), 0.0));
        let net = range_net(&f, 0.1, &w).unwrap();
        assert!(net.pass);
        assert!(net.certificate.centers.len() <= 21);
        assert!((verify_net(&f, &net.certificate, &w).unwrap() - net.defect).abs() < 1e-15);
    }

    #[test]
    fn fps_ties_go_to_lowest_index() {
        let pts: [f64; 4] = [0.0, 2.0, -2.0, 1.0];
        let r = farthest_points(4, 0.5, |a, b, _| Ok(Some((pts[a] - pts[b]).abs()))).unwrap();
        assert_eq!(r.centers, vec![0, 1, 2, 3]);
    }
}
