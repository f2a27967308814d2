//! Conversions between certificate kinds with recorded epsilon inflation.
//!
//! Every output is re-verified through [`crate::checkers`] without using
//! the construction. On exact finite models a failed re-verification is an
//! error; elsewhere the measured defect is reported in a failing verdict.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::checkers::cover::{verify_cover, MaakCover};
use crate::checkers::density::{verify_density, DensityBudget, DensityMode, DensityWitness};
use crate::checkers::periods::{period_defect, PeriodEntry, PeriodSet};
use crate::checkers::verdict::Verdict;
use crate::function::FunctionTable;
use crate::group::{Element, GroupModel};
use crate::rows::Translates;
use crate::uniformity::Side;
use crate::window::WindowSpec;
use crate::{ApError, Result};

/// Default cap on the number of input sets for [`left_cover_to_twosided`].
pub const MAX_BETA_SETS: usize = 4096;
/// Cap on the refined family while intersecting.
const MAX_FAMILY: usize = 100_000;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub representatives: Vec<Element>,
    /// Index vectors `beta` of the surviving intersections.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub betas: Vec<Vec<usize>>,
    /// Constructed products that fell outside the candidates.
    pub clipped: usize,
    /// Memberships decided by the nearest representative because the
    /// product left the window.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub fallbacks: usize,
    /// The density factors were inverted to pass between `F P` and `P F`.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub inverted_factors: bool,
}

fn is_zero(x: &usize) -> bool {
    *x == 0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformReceipt<C> {
    pub transform: String,
    /// sha256 of the input certificate's JSON.
    pub input_id: String,
    pub input_epsilon: f64,
    /// Output epsilon over input epsilon.
    pub inflation: f64,
    pub output: Verdict<C>,
    pub trace: Trace,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Periods of `P(f, .)` with the finite density witness built beside them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodsWithDensity {
    pub periods: PeriodSet,
    pub density: DensityWitness,
}

/// Hex sha256 of a value's JSON.
pub fn certificate_id<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("certificates serialize");
    hex::encode(Sha256::digest(bytes))
}

/// Finite model with the whole group as candidates and test set.
fn exact(w: &WindowSpec) -> bool {
    match w.model() {
        GroupModel::Cayley(g) => w.candidates().len() == g.order() && w.test_set().len() == g.order(),
        _ => false,
    }
}

fn lex_min(set: &[Element]) -> Result<Element> {
    set.iter()
        .copied()
        .min_by(|a, b| a.lex_cmp(b))
        .ok_or_else(|| ApError::Precondition("cover contains an empty set".into()))
}

fn indices_of(w: &WindowSpec, set: &[Element]) -> Result<Vec<usize>> {
    let mut out = set
        .iter()
        .map(|u| {
            w.candidate_index(u)
                .ok_or_else(|| ApError::Precondition(format!("cover element {u} lies outside the window")))
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Sorted index sets: drop duplicates and sets strictly inside another.
/// Only sets sharing a set's first element can contain it.
fn maximal(mut family: Vec<(Vec<usize>, Vec<usize>)>, universe: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    family.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
    let mut kept: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut holding: Vec<Vec<usize>> = vec![Vec::new(); universe];
    for (set, beta) in family {
        let inside = holding[set[0]].iter().any(|&k| is_subset(&set, &kept[k].0));
        if !inside {
            for &x in &set {
                holding[x].push(kept.len());
            }
            kept.push((set, beta));
        }
    }
    kept.sort_by(|a, b| a.0.cmp(&b.0));
    kept
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    if a.len() > b.len() {
        return false;
    }
    let mut j = 0;
    for x in a {
        while j < b.len() && b[j] < *x {
            j += 1;
        }
        if j == b.len() || b[j] != *x {
            return false;
        }
    }
    true
}

fn finish_cover(
    f: &FunctionTable,
    cover: MaakCover,
    w: &WindowSpec,
    what: &str,
) -> Result<Verdict<MaakCover>> {
    let check = verify_cover(f, &cover, w)?;
    if exact(w) && !check.pass {
        return Err(ApError::Reverification(format!(
            "{what}: defect {} above {}",
            check.defect, cover.epsilon
        )));
    }
    let mut cover = cover;
    cover.defect = check.defect;
    let budget = cover.epsilon;
    let mut v = Verdict::new(cover, budget, check.defect, w.fingerprint());
    v.pass = check.pass;
    Ok(v)
}

/// Two-sided cover from a left cover: with `a_j` the smallest element of
/// `A_j` and `B_kj = a_k^{-1} A_j`, the sets are the nonempty
/// `C_beta = B_{1 beta_1} ∩ ... ∩ B_{n beta_n}`, kept when maximal.
///
/// The output epsilon is four times the input's.
pub fn left_cover_to_twosided(
    f: &FunctionTable,
    cover: &MaakCover,
    w: &WindowSpec,
    max_sets: Option<usize>,
) -> Result<TransformReceipt<MaakCover>> {
    if cover.side != Side::Left {
        return Err(ApError::Contract(format!("expected a left cover, got side {}", cover.side)));
    }
    if cover.is_empty() {
        return Err(ApError::Precondition("empty cover".into()));
    }
    let n = cover.len();
    let cap = max_sets.unwrap_or(MAX_BETA_SETS);
    if n > cap {
        return Err(ApError::SizeCap(format!("{n} sets exceed the intersection cap of {cap}")));
    }
    let m = w.model();
    let cands = w.candidates();
    if n.saturating_mul(cands.len()) > crate::rows::DENSE_CAP {
        return Err(ApError::SizeCap(format!(
            "{n} sets times {} candidates exceed the label cap of {}",
            cands.len(),
            crate::rows::DENSE_CAP
        )));
    }
    let reps: Vec<Element> = cover.sets.iter().map(|s| lex_min(s)).collect::<Result<_>>()?;
    // sets holding each candidate
    let mut member: Vec<Vec<usize>> = vec![Vec::new(); cands.len()];
    for (j, set) in cover.sets.iter().enumerate() {
        for i in indices_of(w, set)? {
            member[i].push(j);
        }
    }
    let rows = Translates::with_products(f, w, Side::Left)?;
    let k = rows.width();
    let rep_rows = reps.iter().map(|a| rows.row(a).map(|r| r.into_owned())).collect::<Result<Vec<_>>>()?;
    let mut fallbacks = 0usize;
    // labels[k][x]: the j with a_k x in A_j
    let mut labels: Vec<Vec<Vec<usize>>> = Vec::with_capacity(n);
    for a in &reps {
        let mut lk = Vec::with_capacity(cands.len());
        for x in cands {
            let ax = m.op(a, x)?;
            let js: Vec<usize> = match w.candidate_index(&ax) {
                Some(i) => member[i].clone(),
                None => {
                    fallbacks += 1;
                    let r = rows.row(&ax)?;
                    let mut best = (crate::rows::row_distance(&r, &rep_rows[0], k).0, 0);
                    for (j, rr) in rep_rows.iter().enumerate().skip(1) {
                        if let Some((d, _)) = crate::rows::row_distance_within(&r, rr, k, best.0) {
                            if d < best.0 {
                                best = (d, j);
                            }
                        }
                    }
                    vec![best.1]
                }
            };
            lk.push(js);
        }
        labels.push(lk);
    }
    let mut family: Vec<(Vec<usize>, Vec<usize>)> = vec![((0..cands.len()).collect(), Vec::new())];
    for lk in &labels {
        let mut next = Vec::new();
        for (set, beta) in &family {
            let mut parts: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
            for &x in set {
                for &j in &lk[x] {
                    parts.entry(j).or_default().push(x);
                }
            }
            for (j, part) in parts {
                let mut b = beta.clone();
                b.push(j);
                next.push((part, b));
            }
        }
        family = maximal(next, cands.len());
        if family.len() > MAX_FAMILY {
            return Err(ApError::SizeCap(format!("intersection family exceeds {MAX_FAMILY} sets")));
        }
    }
    let sets: Vec<Vec<Element>> = family.iter().map(|(s, _)| s.iter().map(|&i| cands[i]).collect()).collect();
    let representatives = sets.iter().map(|s| s[0]).collect();
    let eps = 4.0 * cover.epsilon;
    let out = MaakCover {
        epsilon: eps,
        side: Side::TwoSided,
        sets,
        representatives,
        defect: 0.0,
    };
    let output = finish_cover(f, out, w, "two-sided cover")?;
    Ok(TransformReceipt {
        transform: "left_cover_to_twosided".into(),
        input_id: certificate_id(cover),
        input_epsilon: cover.epsilon,
        inflation: 4.0,
        output,
        trace: Trace {
            representatives: reps,
            betas: family.into_iter().map(|(_, b)| b).collect(),
            clipped: 0,
            fallbacks,
            inverted_factors: false,
        },
        notes: Vec::new(),
    })
}

fn push_period(rows: &Translates<'_>, taus: &mut Vec<PeriodEntry>, tau: Element) -> Result<()> {
    let (d, _) = period_defect(rows, &tau)?;
    taus.push(PeriodEntry { tau, defect: d });
    Ok(())
}

/// Fills the residual of a finite witness from its own data.
fn with_residual(mut wit: DensityWitness, w: &WindowSpec) -> Result<DensityWitness> {
    wit.residual = verify_density(&wit, w)?.residual;
    Ok(wit)
}

/// Periods `a_j^{-1} u` for `u` in `A_j` and `F = {a_j}` from a two-sided
/// cover; `F P` covers what the cover covers.
///
/// The verdict judges the periods. The residual of `F P` is reported in the
/// density witness; it is nonempty only when clipping dropped periods.
pub fn cover_to_period_set(
    f: &FunctionTable,
    cover: &MaakCover,
    w: &WindowSpec,
) -> Result<TransformReceipt<PeriodsWithDensity>> {
    if cover.side != Side::TwoSided {
        return Err(ApError::Contract(format!("expected a two-sided cover, got side {}", cover.side)));
    }
    if cover.is_empty() || cover.sets.len() != cover.representatives.len() {
        return Err(ApError::Precondition("cover needs one representative per set".into()));
    }
    let m = w.model();
    let cands = w.candidates();
    let mut hit = vec![false; cands.len()];
    let mut clipped = 0usize;
    let mut scanned = 0usize;
    for (set, a) in cover.sets.iter().zip(&cover.representatives) {
        let ai = m.inv(a)?;
        for u in set {
            scanned += 1;
            match w.candidate_index(&m.op(&ai, u)?) {
                Some(i) => hit[i] = true,
                None => clipped += 1,
            }
        }
    }
    let rows = Translates::new(f, w, Side::TwoSided)?;
    let mut taus = Vec::new();
    let e = m.identity();
    if !hit.iter().enumerate().any(|(i, h)| *h && m.equal(&cands[i], &e, w.tolerance())) {
        push_period(&rows, &mut taus, e)?;
    }
    for (i, _) in hit.iter().enumerate().filter(|(_, h)| **h) {
        push_period(&rows, &mut taus, cands[i])?;
    }
    taus.sort_by(|a, b| a.tau.lex_cmp(&b.tau));
    let periods = PeriodSet {
        epsilon: cover.epsilon,
        side: Side::TwoSided,
        taus,
        scanned,
    };
    let worst = periods.max_defect();
    if exact(w) && worst > cover.epsilon {
        return Err(ApError::Reverification(format!(
            "constructed period with defect {worst} above {}",
            cover.epsilon
        )));
    }
    let mut left: Vec<Element> = cover.representatives.clone();
    left.sort_by(|a, b| a.lex_cmp(b));
    left.dedup_by(|a, b| m.equal(a, b, w.tolerance()));
    let density = with_residual(
        DensityWitness {
            mode: DensityMode::FiniteLeft,
            side: Side::TwoSided,
            epsilon: cover.epsilon,
            periods: periods.elements(),
            left,
            right: Vec::new(),
            interval: None,
            max_gap: None,
            extent: None,
            budget: DensityBudget::default(),
            residual: Vec::new(),
        },
        w,
    )?;
    let residual = density.residual.len();
    let mut notes = Vec::new();
    if residual > 0 {
        notes.push(format!("{residual} candidates outside F P after clipping"));
    }
    let output = Verdict::new(
        PeriodsWithDensity {
            periods,
            density,
        },
        cover.epsilon,
        worst,
        w.fingerprint(),
    );
    Ok(TransformReceipt {
        transform: "cover_to_period_set".into(),
        input_id: certificate_id(cover),
        input_epsilon: cover.epsilon,
        inflation: 1.0,
        output,
        trace: Trace {
            representatives: cover.representatives.clone(),
            clipped,
            ..Trace::default()
        },
        notes,
    })
}

/// Sets `a P b` over factor pairs, clipped to the candidates; the window
/// must be covered.
fn product_sets(
    w: &WindowSpec,
    periods: &[Element],
    pairs: &[(Element, Element)],
) -> Result<(Vec<Vec<Element>>, Vec<Element>, usize)> {
    let m = w.model();
    let cands = w.candidates();
    let mut covered = vec![false; cands.len()];
    let mut clipped = 0usize;
    let mut sets = Vec::new();
    let mut reps = Vec::new();
    for (a, b) in pairs {
        let mut idx = Vec::new();
        for tau in periods {
            match w.candidate_index(&m.op(&m.op(a, tau)?, b)?) {
                Some(i) => idx.push(i),
                None => clipped += 1,
            }
        }
        idx.sort_unstable();
        idx.dedup();
        if idx.is_empty() {
            continue;
        }
        for &i in &idx {
            covered[i] = true;
        }
        let ab = m.op(a, b)?;
        let set: Vec<Element> = idx.iter().map(|&i| cands[i]).collect();
        let rep = set
            .iter()
            .find(|u| m.equal(u, &ab, w.tolerance()))
            .copied()
            .unwrap_or(set[0]);
        sets.push(set);
        reps.push(rep);
    }
    let missing = covered.iter().filter(|c| !**c).count();
    if missing > 0 {
        return Err(ApError::Precondition(format!("{missing} candidates are not covered by the period products")));
    }
    Ok((sets, reps, clipped))
}

/// Left cover `A_j = P a_j` from left periods at `epsilon` and a finite
/// density witness; the output epsilon is twice the input's.
///
/// An `F P` witness is turned into `P F^{-1}` using that left period sets
/// are closed under inversion.
pub fn period_set_to_left_cover(
    f: &FunctionTable,
    p: &PeriodSet,
    dens: &DensityWitness,
    w: &WindowSpec,
) -> Result<TransformReceipt<MaakCover>> {
    if p.side != Side::Left {
        return Err(ApError::Contract(format!("expected left periods, got side {}", p.side)));
    }
    if !dens.residual.is_empty() {
        return Err(ApError::Precondition(format!("density residual has {} elements", dens.residual.len())));
    }
    let m = w.model();
    let (factors, inverted) = match dens.mode {
        DensityMode::FiniteRight => (dens.left.clone(), false),
        DensityMode::FiniteLeft => (dens.left.iter().map(|a| m.inv(a)).collect::<Result<_, _>>()?, true),
        other => {
            return Err(ApError::Precondition(format!("a finite density witness is required, got {other:?}")));
        }
    };
    // F P = W gives W^{-1} = P^{-1} F^{-1}
    let periods: Vec<Element> = if inverted {
        p.elements().iter().map(|t| m.inv(t)).collect::<Result<_, _>>()?
    } else {
        p.elements()
    };
    let e = m.identity();
    let pairs: Vec<(Element, Element)> = factors.iter().map(|a| (e, *a)).collect();
    let (sets, representatives, clipped) = product_sets(w, &periods, &pairs)?;
    let eps = 2.0 * p.epsilon;
    let out = MaakCover {
        epsilon: eps,
        side: Side::Left,
        sets,
        representatives: representatives.clone(),
        defect: 0.0,
    };
    let output = finish_cover(f, out, w, "left cover from periods")?;
    Ok(TransformReceipt {
        transform: "period_set_to_left_cover".into(),
        input_id: certificate_id(&(p, dens)),
        input_epsilon: p.epsilon,
        inflation: 2.0,
        output,
        trace: Trace {
            representatives,
            clipped,
            inverted_factors: inverted,
            ..Trace::default()
        },
        notes: Vec::new(),
    })
}

/// Two-sided cover `A_jk = a_j P b_k` from a weak density witness; the
/// output epsilon is twice the input's.
///
/// The bound needs two-sided periods; other sides are accepted, measured
/// and always fail, with a note.
pub fn weak_periods_to_cover(
    f: &FunctionTable,
    p: &PeriodSet,
    dens: &DensityWitness,
    w: &WindowSpec,
) -> Result<TransformReceipt<MaakCover>> {
    if !dens.residual.is_empty() {
        return Err(ApError::Precondition(format!("density residual has {} elements", dens.residual.len())));
    }
    let e = w.model().identity();
    let (f1, f2) = match dens.mode {
        DensityMode::Weak => (dens.left.clone(), dens.right.clone()),
        DensityMode::FiniteLeft => (dens.left.clone(), vec![e]),
        DensityMode::FiniteRight => (vec![e], dens.left.clone()),
        DensityMode::Compact => {
            return Err(ApError::Precondition("a finite density witness is required, got Compact".into()));
        }
    };
    let pairs: Vec<(Element, Element)> = f1.iter().flat_map(|a| f2.iter().map(move |b| (*a, *b))).collect();
    let (sets, representatives, clipped) = product_sets(w, &p.elements(), &pairs)?;
    let out = MaakCover {
        epsilon: 2.0 * p.epsilon,
        side: Side::TwoSided,
        sets,
        representatives: representatives.clone(),
        defect: 0.0,
    };
    let mut notes = Vec::new();
    let mut output = if p.side == Side::TwoSided {
        finish_cover(f, out, w, "two-sided cover from weak periods")?
    } else {
        notes.push(format!("guarantee void: periods are {}-sided, not two-sided", p.side));
        let check = verify_cover(f, &out, w)?;
        let mut out = out;
        out.defect = check.defect;
        let budget = out.epsilon;
        Verdict::new(out, budget, check.defect, w.fingerprint())
    };
    if p.side != Side::TwoSided {
        output.pass = false;
    }
    Ok(TransformReceipt {
        transform: "weak_periods_to_cover".into(),
        input_id: certificate_id(&(p, dens)),
        input_epsilon: p.epsilon,
        inflation: 2.0,
        output,
        trace: Trace {
            representatives,
            clipped,
            ..Trace::default()
        },
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversePeriods {
    pub periods: PeriodSet,
    /// Inverses outside the candidates.
    pub dropped: Vec<Element>,
}

/// `{tau^{-1}}` with defects recomputed on the same side.
pub fn period_set_inverse(f: &FunctionTable, p: &PeriodSet, w: &WindowSpec) -> Result<InversePeriods> {
    let m = w.model();
    let rows = Translates::new(f, w, p.side)?;
    let mut taus = Vec::new();
    let mut dropped = Vec::new();
    for entry in &p.taus {
        let t = m.inv(&entry.tau)?;
        match w.candidate_index(&t) {
            Some(i) => push_period(&rows, &mut taus, w.candidates()[i])?,
            None => dropped.push(t),
        }
    }
    taus.sort_by(|a, b| a.tau.lex_cmp(&b.tau));
    Ok(InversePeriods {
        periods: PeriodSet {
            epsilon: p.epsilon,
            side: p.side,
            taus,
            scanned: p.taus.len(),
        },
        dropped,
    })
}

/// The same periods with defects recomputed on another side.
pub fn periods_on_side(f: &FunctionTable, p: &PeriodSet, side: Side, w: &WindowSpec) -> Result<PeriodSet> {
    let rows = Translates::new(f, w, side)?;
    let mut taus = Vec::with_capacity(p.taus.len());
    for e in &p.taus {
        push_period(&rows, &mut taus, e.tau)?;
    }
    Ok(PeriodSet {
        epsilon: p.epsilon,
        side,
        taus,
        scanned: p.scanned,
    })
}

/// Every certificate of the cycle: left cover at `epsilon / 4`, two-sided
/// cover at `epsilon`, periods at `epsilon`, left cover at `2 epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTrip {
    pub base: Verdict<MaakCover>,
    pub twosided: TransformReceipt<MaakCover>,
    pub periods: TransformReceipt<PeriodsWithDensity>,
    pub left_periods: Verdict<PeriodSet>,
    pub density: Verdict<DensityWitness>,
    pub left_cover: TransformReceipt<MaakCover>,
}

/// Density witness handed to [`period_set_to_left_cover`]: the one carried
/// from [`cover_to_period_set`] when its residual is empty, else a fresh
/// `P F` witness for the left periods `lp`, its size bounded only by the
/// candidate count.
pub fn part6_density(lp: &PeriodSet, carried: &DensityWitness, w: &WindowSpec) -> Result<Verdict<DensityWitness>> {
    if carried.residual.is_empty() {
        return Ok(Verdict::new(carried.clone(), 0.0, 0.0, w.fingerprint()));
    }
    let budget = DensityBudget {
        max_size: w.candidates().len(),
        ..DensityBudget::default()
    };
    crate::checkers::density::density_check(lp, w, DensityMode::FiniteRight, budget)
}

/// Left cover at `epsilon / 4`, then two-sided cover, periods and left cover
/// again. When clipping leaves `F P` short of the window the last density
/// witness is a fresh `P F` greedy.
pub fn round_trip(f: &FunctionTable, epsilon: f64, w: &WindowSpec, max_sets: Option<usize>) -> Result<RoundTrip> {
    let base = crate::checkers::cover::maak_cover_search(f, epsilon / 4.0, Side::Left, w)?;
    let twosided = left_cover_to_twosided(f, &base.certificate, w, max_sets)?;
    let periods = cover_to_period_set(f, &twosided.output.certificate, w)?;
    let lp = periods_on_side(f, &periods.output.certificate.periods, Side::Left, w)?;
    let dens = part6_density(&lp, &periods.output.certificate.density, w)?;
    let left_cover = period_set_to_left_cover(f, &lp, &dens.certificate, w)?;
    let worst = lp.max_defect();
    let left_periods = Verdict::new(lp, epsilon, worst, w.fingerprint());
    Ok(RoundTrip {
        base,
        twosided,
        periods,
        left_periods,
        density: dens,
        left_cover,
    })
}
