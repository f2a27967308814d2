//! Cauchy subsequence extraction by iterated pigeonhole refinement.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use std::borrow::Cow;

use crate::checkers::cover::{check_epsilon, set_diameter};
use crate::checkers::verdict::Verdict;
use crate::function::FunctionTable;
use crate::group::Element;
use crate::rows::{row_distance, row_distance_within, Translates, DENSE_CAP};
use crate::uniformity::Side;
use crate::window::WindowSpec;
use crate::{ApError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BochnerStage {
    pub epsilon: f64,
    /// Surviving indices into the input sequence, ascending.
    pub indices: Vec<usize>,
    /// Bound on the pairwise translate distance among survivors: the
    /// exact maximum, or twice the radius around `center` when present.
    pub bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BochnerCertificate {
    pub side: Side,
    pub schedule: Vec<f64>,
    pub sequence: Vec<Element>,
    pub stages: Vec<BochnerStage>,
    /// Stage at which fewer than two indices survived.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed_stage: Option<usize>,
}

impl BochnerCertificate {
    /// Indices surviving the last completed stage.
    pub fn survivors(&self) -> &[usize] {
        self.stages.last().map(|s| s.indices.as_slice()).unwrap_or(&[])
    }
}

fn check_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(ApError::Invalid("empty epsilon schedule".into()));
    }
    for e in schedule {
        check_epsilon(*e)?;
    }
    if schedule.windows(2).any(|p| p[1] >= p[0]) {
        return Err(ApError::Invalid("epsilon schedule must be strictly decreasing".into()));
    }
    Ok(())
}

fn radius_bound<R: AsRef<[Complex64]>>(rows: &[R], idx: &[usize], c: usize, k: usize) -> f64 {
    let r = idx
        .iter()
        .map(|&i| row_distance(rows[c].as_ref(), rows[i].as_ref(), k).0)
        .fold(0.0f64, f64::max);
    2.0 * r
}

fn stage_bound<R: AsRef<[Complex64]>>(rows: &[R], idx: &[usize], center: Option<usize>, k: usize) -> f64 {
    match center {
        Some(c) => radius_bound(rows, idx, c, k),
        None => max_pairwise(rows, idx, k),
    }
}

fn max_pairwise<R: AsRef<[Complex64]>>(rows: &[R], idx: &[usize], k: usize) -> f64 {
    let sub: Vec<&[Complex64]> = idx.iter().map(|&i| rows[i].as_ref()).collect();
    set_diameter(&sub, k).0
}

/// Greedy clique in the `eps`-adjacency graph on `alive`. Seeds are tried
/// by decreasing degree (lowest index on ties); each seed absorbs its
/// neighbours in ascending order when adjacent to every member so far.
fn largest_clique(adj: &[Vec<usize>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..adj.len()).collect();
    order.sort_by(|a, b| adj[*b].len().cmp(&adj[*a].len()).then(a.cmp(b)));
    let mut best: Vec<usize> = Vec::new();
    for &seed in &order {
        if adj[seed].len() < best.len() {
            break;
        }
        let mut clique = vec![seed];
        for &j in &adj[seed] {
            if clique.iter().all(|m| *m == seed || adj[*m].binary_search(&j).is_ok()) {
                clique.push(j);
            }
        }
        clique.sort_unstable();
        if clique.len() > best.len() {
            best = clique;
        }
    }
    best
}

/// At stage `k` the survivors are joined whenever their translate distance
/// is at most `eps_k`, and a largest clique found greedily is kept, so the
/// pairwise bound holds by construction. Every `eps_k / 2` net cell is such
/// a clique, hence the pigeonhole guarantee of the cell rule carries over.
///
/// Defect counts failed and unreached stages against budget 0.
pub fn cauchy_subsequence_extract(
    f: &FunctionTable,
    sequence: &[Element],
    schedule: &[f64],
    side: Side,
    w: &WindowSpec,
) -> Result<Verdict<BochnerCertificate>> {
    check_schedule(schedule)?;
    if sequence.len() < 2 {
        return Err(ApError::Invalid("sequence needs at least two elements".into()));
    }
    let tr = Translates::new(f, w, side)?;
    let k = tr.width();
    let needed = sequence.len().saturating_mul(tr.layout().len()).saturating_mul(k);
    if needed > DENSE_CAP && !tr.uses_grid() {
        return Err(ApError::TooLarge {
            what: "sequence rows",
            needed,
            cap: DENSE_CAP,
        });
    }
    let rows: Vec<Cow<'_, [Complex64]>> = sequence.iter().map(|s| tr.row(s)).collect::<Result<_>>()?;

    let mut alive: Vec<usize> = (0..sequence.len()).collect();
    let mut stages = Vec::new();
    let mut failed_stage = None;
    for (stage, &eps) in schedule.iter().enumerate() {
        // everything within eps/2 of one survivor is already a clique
        let ball = alive[1..]
            .iter()
            .all(|&i| row_distance_within(&rows[alive[0]], &rows[i], k, eps / 2.0).is_some());
        let mut adj = vec![Vec::new(); if ball { 0 } else { alive.len() }];
        for a in 0..adj.len() {
            for b in a + 1..alive.len() {
                if row_distance_within(&rows[alive[a]], &rows[alive[b]], k, eps).is_some() {
                    adj[a].push(b);
                    adj[b].push(a);
                }
            }
        }
        let next: Vec<usize> = if ball {
            alive.clone()
        } else {
            largest_clique(&adj).into_iter().map(|i| alive[i]).collect()
        };
        if next.len() < 2 {
            failed_stage = Some(stage);
            break;
        }
        let center = ball.then_some(alive[0]);
        let bound = stage_bound(&rows, &next, center, k);
        let ok = bound <= eps;
        stages.push(BochnerStage {
            epsilon: eps,
            indices: next.clone(),
            bound,
            center,
        });
        if !ok {
            failed_stage = Some(stage);
            break;
        }
        alive = next;
    }
    let defect = match failed_stage {
        Some(s) => (schedule.len() - s) as f64,
        None => 0.0,
    };
    let cert = BochnerCertificate {
        side,
        schedule: schedule.to_vec(),
        sequence: sequence.to_vec(),
        stages,
        failed_stage,
    };
    Ok(Verdict::new(cert, 0.0, defect, w.fingerprint()))
}

/// Recomputes every stage bound; returns the number of stages that are not
/// nested, exceed their epsilon or disagree with the stored bound.
pub fn verify_bochner(f: &FunctionTable, cert: &BochnerCertificate, w: &WindowSpec) -> Result<usize> {
    let tr = Translates::new(f, w, cert.side)?;
    let k = tr.width();
    let rows: Vec<Cow<'_, [Complex64]>> = cert.sequence.iter().map(|s| tr.row(s)).collect::<Result<_>>()?;
    let mut prev: Vec<usize> = (0..cert.sequence.len()).collect();
    let mut bad = 0;
    for st in &cert.stages {
        if st.indices.iter().any(|i| *i >= rows.len()) {
            return Err(ApError::Invalid("stage index outside the sequence".into()));
        }
        if st.center.is_some_and(|c| st.indices.binary_search(&c).is_err()) {
            return Err(ApError::Invalid("stage center outside its survivors".into()));
        }
        let nested = st.indices.iter().all(|i| prev.binary_search(i).is_ok());
        let bound = stage_bound(&rows, &st.indices, st.center, k);
        if !nested || bound > st.epsilon || bound != st.bound {
            bad += 1;
        }
        prev = st.indices.clone();
    }
    Ok(bad)
}
