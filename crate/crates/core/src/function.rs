//! Functions from a group model into `C^k` with the max-modulus metric.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::group::{Element, GroupError, GroupModel};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("function is not defined at {0}")]
    Partial(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("codomain widths differ: {0} vs {1}")]
    Width(usize, usize),
    #[error("lookup table has {found} rows, group has {expected} elements")]
    TableSize { expected: usize, found: usize },
    #[error("lookup tables need a finite model")]
    NotFinite,
}

pub type Evaluator = dyn Fn(&Element, &mut [Complex64]) -> Result<(), EvalError> + Send + Sync;

/// `f: G -> C^k`. Cloning shares the evaluator.
#[derive(Clone)]
pub struct FunctionTable {
    name: String,
    model: GroupModel,
    width: usize,
    eval: Arc<Evaluator>,
}

impl fmt::Debug for FunctionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionTable")
            .field("name", &self.name)
            .field("model", &self.model.kind())
            .field("width", &self.width)
            .finish()
    }
}

/// Max-modulus distance on `C^k`.
#[inline]
pub fn codomain_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut m: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = (*x - *y).norm_sqr();
        if d > m {
            m = d;
        }
    }
    m.sqrt()
}

impl FunctionTable {
    pub fn new<F>(name: impl Into<String>, model: GroupModel, width: usize, eval: F) -> Self
    where
        F: Fn(&Element, &mut [Complex64]) -> Result<(), EvalError> + Send + Sync + 'static,
    {
        assert!(width > 0, "codomain width must be positive");
        Self {
            name: name.into(),
            model,
            width,
            eval: Arc::new(eval),
        }
    }

    /// Scalar function given by a closure on elements.
    pub fn scalar<F>(name: impl Into<String>, model: GroupModel, f: F) -> Self
    where
        F: Fn(&Element) -> Result<Complex64, EvalError> + Send + Sync + 'static,
    {
        Self::new(name, model, 1, move |x, out| {
            out[0] = f(x)?;
            Ok(())
        })
    }

    /// Scalar function of the first real coordinate on a 1-d model.
    pub fn of_real<F>(name: impl Into<String>, model: GroupModel, f: F) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        Self::scalar(name, model, move |x| {
            x.as_scalar()
                .map(&f)
                .ok_or_else(|| EvalError::Partial(x.to_string()))
        })
    }

    pub fn constant(model: GroupModel, value: Vec<Complex64>) -> Self {
        let width = value.len();
        Self::new("constant", model, width, move |_, out| {
            out.copy_from_slice(&value);
            Ok(())
        })
    }

    /// Lookup table on a finite group; row `i` is `f(#i)`.
    pub fn lookup(
        name: impl Into<String>,
        model: GroupModel,
        rows: Vec<Vec<Complex64>>,
    ) -> Result<Self, EvalError> {
        let GroupModel::Cayley(g) = &model else {
            return Err(EvalError::NotFinite);
        };
        if rows.len() != g.order() {
            return Err(EvalError::TableSize {
                expected: g.order(),
                found: rows.len(),
            });
        }
        let width = rows.first().map_or(1, |r| r.len());
        if let Some(r) = rows.iter().find(|r| r.len() != width) {
            return Err(EvalError::Width(width, r.len()));
        }
        Ok(Self::new(name, model, width, move |x, out| {
            let i = x.as_index().ok_or_else(|| EvalError::Partial(x.to_string()))?;
            let row = rows.get(i).ok_or_else(|| EvalError::Partial(x.to_string()))?;
            out.copy_from_slice(row);
            Ok(())
        }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn model(&self) -> &GroupModel {
        &self.model
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    #[inline]
    pub fn eval_into(&self, x: &Element, out: &mut [Complex64]) -> Result<(), EvalError> {
        (self.eval)(x, out)
    }

    pub fn eval(&self, x: &Element) -> Result<Vec<Complex64>, EvalError> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.width];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }

    /// `d(f(x), f(y))`.
    pub fn distance(&self, x: &Element, y: &Element) -> Result<f64, EvalError> {
        Ok(codomain_distance(&self.eval(x)?, &self.eval(y)?))
    }

    /// `x -> f(a x)`.
    pub fn left_translate(&self, a: Element) -> Self {
        let inner = self.clone();
        let model = self.model.clone();
        Self::new(format!("{}_l", self.name), self.model.clone(), self.width, move |x, out| {
            inner.eval_into(&model.op(&a, x)?, out)
        })
    }

    /// `x -> f(x a)`.
    pub fn right_translate(&self, a: Element) -> Self {
        let inner = self.clone();
        let model = self.model.clone();
        Self::new(format!("{}_r", self.name), self.model.clone(), self.width, move |x, out| {
            inner.eval_into(&model.op(x, &a)?, out)
        })
    }

    /// `x -> f(x^{-1})`.
    pub fn inverted(&self) -> Self {
        let inner = self.clone();
        let model = self.model.clone();
        Self::new(format!("{}_inv", self.name), self.model.clone(), self.width, move |x, out| {
            inner.eval_into(&model.inv(x)?, out)
        })
    }

    /// `x -> (f(x), g(x))` into the max-metric product.
    pub fn pair(&self, g: &FunctionTable) -> Self {
        let (f, g) = (self.clone(), g.clone());
        let k = f.width;
        Self::new(
            format!("({},{})", f.name, g.name),
            f.model.clone(),
            f.width + g.width,
            move |x, out| {
                let (a, b) = out.split_at_mut(k);
                f.eval_into(x, a)?;
                g.eval_into(x, b)
            },
        )
    }

    /// Pointwise sum; widths must agree.
    pub fn sum(&self, g: &FunctionTable) -> Result<Self, EvalError> {
        if self.width != g.width {
            return Err(EvalError::Width(self.width, g.width));
        }
        let (f, g) = (self.clone(), g.clone());
        Ok(Self::new(
            format!("{}+{}", f.name, g.name),
            f.model.clone(),
            f.width,
            move |x, out| {
                let mut tmp = vec![Complex64::new(0.0, 0.0); out.len()];
                f.eval_into(x, out)?;
                g.eval_into(x, &mut tmp)?;
                for (o, t) in out.iter_mut().zip(tmp) {
                    *o += t;
                }
                Ok(())
            },
        ))
    }

    /// Pointwise product with a scalar function `phi`.
    pub fn scaled_by(&self, phi: &FunctionTable) -> Result<Self, EvalError> {
        if phi.width != 1 {
            return Err(EvalError::Width(1, phi.width));
        }
        let (f, phi) = (self.clone(), phi.clone());
        Ok(Self::new(
            format!("{}*{}", phi.name, f.name),
            f.model.clone(),
            f.width,
            move |x, out| {
                let mut s = [Complex64::new(0.0, 0.0)];
                phi.eval_into(x, &mut s)?;
                f.eval_into(x, out)?;
                for o in out.iter_mut() {
                    *o *= s[0];
                }
                Ok(())
            },
        ))
    }

    /// `sup |f|` over the given elements.
    pub fn sup_norm(&self, xs: &[Element]) -> Result<f64, EvalError> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.width];
        let mut m: f64 = 0.0;
        for x in xs {
            self.eval_into(x, &mut buf)?;
            m = m.max(buf.iter().map(|c| c.norm()).fold(0.0, f64::max));
        }
        Ok(m)
    }
}

/// `n -> e^{2 pi i n / m}` on `Z`, evaluated from the residue so equal
/// residues give identical values.
pub fn zmod_character(m: i64, model: GroupModel) -> FunctionTable {
    let m = m.max(1);
    FunctionTable::scalar(format!("chi_{m}"), model, move |x| match x {
        Element::Lattice(p) if p.dim() == 1 => {
            let r = p.coords()[0].rem_euclid(m);
            Ok(Complex64::from_polar(1.0, std::f64::consts::TAU * r as f64 / m as f64))
        }
        _ => Err(EvalError::Partial(x.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::CayleyGroup;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn character_residues_are_bit_identical() {
        let f = zmod_character(6, GroupModel::Lattice { dim: 1 });
        assert_eq!(
            f.eval(&Element::integer(-5)).unwrap(),
            f.eval(&Element::integer(7)).unwrap()
        );
        let d = f.distance(&Element::integer(0), &Element::integer(3)).unwrap();
        assert!((d - 2.0).abs() < 1e-15);
    }

    #[test]
    fn lookup_requires_finite_model_and_full_table() {
        let g = GroupModel::cayley(CayleyGroup::cyclic(3).unwrap());
        assert!(FunctionTable::lookup("t", g.clone(), vec![vec![c(1.0, 0.0)]; 2]).is_err());
        assert!(matches!(
            FunctionTable::lookup("t", GroupModel::Lattice { dim: 1 }, vec![]),
            Err(EvalError::NotFinite)
        ));
        let f = FunctionTable::lookup("t", g, vec![vec![c(1.0, 0.0)], vec![c(2.0, 0.0)], vec![c(0.0, 1.0)]]).unwrap();
        assert_eq!(f.eval(&Element::Index(2)).unwrap(), vec![c(0.0, 1.0)]);
    }

    #[test]
    fn combinators() {
        let m = GroupModel::RealGrid { dim: 1, step: 0.1 };
        let f = FunctionTable::of_real("id", m.clone(), |t| c(t, 0.0));
        let g = FunctionTable::of_real("sq", m, |t| c(t * t, 0.0));
        let x = Element::scalar(3.0);
        assert_eq!(f.left_translate(Element::scalar(1.0)).eval(&x).unwrap()[0], c(4.0, 0.0));
        assert_eq!(f.inverted().eval(&x).unwrap()[0], c(-3.0, 0.0));
        assert_eq!(f.pair(&g).eval(&x).unwrap(), vec![c(3.0, 0.0), c(9.0, 0.0)]);
        assert_eq!(f.sum(&g).unwrap().eval(&x).unwrap()[0], c(12.0, 0.0));
        assert_eq!(f.scaled_by(&g).unwrap().eval(&x).unwrap()[0], c(27.0, 0.0));
        assert!(f.pair(&g).sum(&f).is_err());
    }

    #[test]
    fn partial_evaluation_names_element() {
        let f = FunctionTable::of_real("id", GroupModel::MotionE2, |t| c(t, 0.0));
        let e = GroupModel::MotionE2.identity();
        assert!(matches!(f.eval(&e), Err(EvalError::Partial(_))));
    }

    proptest! {
        #[test]
        fn metric_axioms(a in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3),
                         b in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3),
                         d in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3)) {
            let to = |v: &Vec<(f64, f64)>| v.iter().map(|&(r, i)| c(r, i)).collect::<Vec<_>>();
            let (x, y, z) = (to(&a), to(&b), to(&d));
            prop_assert_eq!(codomain_distance(&x, &x), 0.0);
            prop_assert_eq!(codomain_distance(&x, &y), codomain_distance(&y, &x));
            prop_assert!(codomain_distance(&x, &z) <= codomain_distance(&x, &y) + codomain_distance(&y, &z) + 1e-12);
        }
    }
}
