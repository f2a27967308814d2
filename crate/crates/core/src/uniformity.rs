//! Vicinities as metric balls, and the left, right and two-sided translate
//! pseudometrics
//!
//! * left: `D_L(u, v) = max_t d(f(u t), f(v t))`
//! * right: `D_R(u, v) = max_s d(f(s u), f(s v))`
//! * two-sided: `D(u, v) = max_{s,t} d(f(s u t), f(s v t))`
//!
//! with the maxima over the window's test set.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::function::FunctionTable;
use crate::group::Element;
use crate::rows::Translates;
use crate::window::WindowSpec;
use crate::{ApError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
    TwoSided,
}

impl Side {
    pub const ALL: [Side; 3] = [Side::Left, Side::Right, Side::TwoSided];
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::TwoSided => "two",
        })
    }
}

impl FromStr for Side {
    type Err = ApError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" | "l" | "L" => Ok(Side::Left),
            "right" | "r" | "R" => Ok(Side::Right),
            "two" | "two_sided" | "TWO_SIDED" => Ok(Side::TwoSided),
            _ => Err(ApError::Invalid(format!("unknown side {s:?}"))),
        }
    }
}

/// The closed ball `{(x, y) : d(x, y) <= epsilon}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vicinity {
    pub epsilon: f64,
}

impl Vicinity {
    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon > 0.0 && epsilon.is_finite() {
            Ok(Self { epsilon })
        } else {
            Err(ApError::Invalid(format!("epsilon must be positive, got {epsilon}")))
        }
    }

    pub fn contains(&self, d: f64) -> bool {
        d <= self.epsilon
    }

    /// The vicinity whose composition with itself lies inside `self`.
    pub fn half(&self) -> Self {
        Self {
            epsilon: self.epsilon / 2.0,
        }
    }
}

/// Test elements at which a translate distance is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "side", rename_all = "snake_case")]
pub enum Witness {
    Left { t: Element },
    Right { s: Element },
    TwoSided { s: Element, t: Element },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslateDistance {
    pub u: Element,
    pub v: Element,
    pub side: Side,
    pub value: f64,
    pub witness: Witness,
}

/// `D_side(u, v)` over the window's test set, with its first maximizer.
pub fn translate_distance(
    f: &FunctionTable,
    u: &Element,
    v: &Element,
    side: Side,
    w: &WindowSpec,
) -> Result<TranslateDistance> {
    let rows = Translates::new(f, w, side)?;
    let (value, p) = rows.distance(u, v)?;
    Ok(TranslateDistance {
        u: *u,
        v: *v,
        side,
        value,
        witness: rows.witness_at(p),
    })
}

/// Recomputes `d(f(x u y), f(x v y))` at a stored witness.
pub fn distance_at_witness(f: &FunctionTable, u: &Element, v: &Element, wit: &Witness) -> Result<f64> {
    let m = f.model();
    let (a, b) = match wit {
        Witness::Left { t } => (m.op(u, t)?, m.op(v, t)?),
        Witness::Right { s } => (m.op(s, u)?, m.op(s, v)?),
        Witness::TwoSided { s, t } => (m.op(&m.op(s, u)?, t)?, m.op(&m.op(s, v)?, t)?),
    };
    Ok(f.distance(&a, &b)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideCollapseReport {
    pub left: f64,
    pub right: f64,
    pub two_sided: f64,
    pub left_right_gap: f64,
    pub two_left_gap: f64,
    /// Whether the test set is closed under products of its elements.
    pub test_set_closed: bool,
    pub consistent: bool,
}

/// On an abelian model the left and right distances coincide, and the
/// two-sided one agrees with them on a product-closed test set.
pub fn abelian_side_collapse_check(
    f: &FunctionTable,
    u: &Element,
    v: &Element,
    w: &WindowSpec,
) -> Result<SideCollapseReport> {
    if !w.model().is_abelian() {
        return Err(ApError::Contract(format!(
            "side collapse requires an abelian model, got {}",
            w.kind()
        )));
    }
    let left = translate_distance(f, u, v, Side::Left, w)?.value;
    let right = translate_distance(f, u, v, Side::Right, w)?.value;
    let two_sided = translate_distance(f, u, v, Side::TwoSided, w)?.value;
    let test = w.test_set();
    let mut closed = true;
    'outer: for a in test {
        for b in test {
            if w.test_index(&w.model().op(a, b)?).is_none() {
                closed = false;
                break 'outer;
            }
        }
    }
    let left_right_gap = (left - right).abs();
    let two_left_gap = (two_sided - left).abs();
    Ok(SideCollapseReport {
        left,
        right,
        two_sided,
        left_right_gap,
        two_left_gap,
        test_set_closed: closed,
        consistent: left_right_gap == 0.0 && (!closed || two_left_gap == 0.0),
    })
}
