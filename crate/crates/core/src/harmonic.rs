//! Trigonometric polynomials, Bohr means and Fourier coefficients on the
//! line, and the Wu function on `E(2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::function::{EvalError, FunctionTable};
use crate::group::{Element, GroupError, GroupModel, Motion, UNIT_TOLERANCE};
use crate::{ApError, Result};

/// `sum_j c_j e^{i omega_j t}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    pub terms: Vec<(Complex64, f64)>,
}

impl TrigPoly {
    pub fn new(terms: Vec<(Complex64, f64)>) -> Self {
        Self { terms }
    }

    /// `sum_j a_j sin(b_j t)` as exponential pairs `a/(2i)` at `b` and
    /// `-a/(2i)` at `-b`.
    pub fn sin_sum(pairs: &[(f64, f64)]) -> Self {
        let half_i = Complex64::new(0.0, 2.0);
        let mut terms = Vec::with_capacity(2 * pairs.len());
        for &(a, b) in pairs {
            terms.push((Complex64::new(a, 0.0) / half_i, b));
            terms.push((Complex64::new(-a, 0.0) / half_i, -b));
        }
        Self { terms }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(c, w)| c * Complex64::from_polar(1.0, w * t))
            .sum()
    }

    /// `sum_j |c_j|`, a bound for `|p(t)|`.
    pub fn bound(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.norm()).sum()
    }

    /// `sum_j |c_j| omega_j^2`, a bound for `|p''(t)|`.
    pub fn second_derivative_bound(&self) -> f64 {
        self.terms.iter().map(|(c, w)| c.norm() * w * w).sum()
    }

    /// The polynomial as a function on a one-dimensional model.
    pub fn to_function(&self, name: impl Into<String>, model: GroupModel) -> FunctionTable {
        let p = self.clone();
        FunctionTable::of_real(name, model, move |t| p.eval(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub value: Complex64,
    pub half_width: f64,
    pub step: f64,
}

impl MeanEstimate {
    /// Composite trapezoid error of the mean, `h^2 M2 / 12`, for an
    /// integrand with `|g''| <= M2`.
    pub fn quadrature_bound(&self, m2: f64) -> f64 {
        self.step * self.step * m2 / 12.0
    }
}

fn grid_step(f: &FunctionTable) -> Result<f64> {
    match f.model() {
        GroupModel::RealGrid { dim: 1, step } => Ok(*step),
        GroupModel::Lattice { dim: 1 } => Ok(1.0),
        m => Err(ApError::Contract(format!("means are taken on the line, not on {}", m.kind()))),
    }
}

/// `(1 / 2T) int_{-T}^{T} g`, composite trapezoid on `k h`, `|k| <= T / h`.
fn trapezoid_mean(g: impl Fn(f64) -> Result<Complex64>, half_width: f64, step: f64) -> Result<MeanEstimate> {
    if !(half_width > 0.0) || !(step > 0.0) {
        return Err(ApError::Invalid("mean needs T > 0 and a positive step".into()));
    }
    let n = (half_width / step).round();
    if (n * step - half_width).abs() > 1e-9 * half_width.max(1.0) || n < 1.0 {
        return Err(ApError::Invalid(format!("T = {half_width} is not a multiple of the step {step}")));
    }
    let n = n as i64;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in -n..=n {
        let v = g(k as f64 * step)?;
        sum += if k.abs() == n { v * 0.5 } else { v };
    }
    Ok(MeanEstimate {
        value: sum / (2 * n) as f64,
        half_width,
        step,
    })
}

/// Bohr mean over `[-T, T]` at the model's grid step.
pub fn bohr_mean(f: &FunctionTable, half_width: f64) -> Result<MeanEstimate> {
    let h = grid_step(f)?;
    trapezoid_mean(|t| Ok(f.eval(&Element::scalar(t))?[0]), half_width, h)
}

/// `M(f e^{-i omega t})`.
pub fn fourier_coefficient(f: &FunctionTable, omega: f64, half_width: f64) -> Result<MeanEstimate> {
    let h = grid_step(f)?;
    trapezoid_mean(
        |t| Ok(f.eval(&Element::scalar(t))?[0] * Complex64::from_polar(1.0, -omega * t)),
        half_width,
        h,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEstimate {
    pub probes: Vec<f64>,
    /// `(omega, c_omega)` with `|c_omega| >= threshold`, largest first.
    pub coefficients: Vec<(f64, Complex64)>,
    pub half_width: f64,
    pub threshold: f64,
}

pub fn spectrum_scan(f: &FunctionTable, omegas: &[f64], half_width: f64, threshold: f64) -> Result<SpectrumEstimate> {
    let mut coefficients = Vec::new();
    for &w in omegas {
        let c = fourier_coefficient(f, w, half_width)?.value;
        if c.norm() >= threshold {
            coefficients.push((w, c));
        }
    }
    coefficients.sort_by(|a, b| b.1.norm().total_cmp(&a.1.norm()).then(a.0.total_cmp(&b.0)));
    Ok(SpectrumEstimate {
        probes: omegas.to_vec(),
        coefficients,
        half_width,
        threshold,
    })
}

/// `e^{i Re(z / w)}`; `|w| = 1` makes `z / w = z conj(w)`.
pub fn wu_value(m: &Motion) -> Result<Complex64, GroupError> {
    let modulus = m.w.norm();
    if (modulus - 1.0).abs() > UNIT_TOLERANCE {
        return Err(GroupError::NotUnit { modulus });
    }
    Ok(Complex64::from_polar(1.0, (m.z * m.w.conj()).re))
}

pub fn wu_function() -> FunctionTable {
    FunctionTable::scalar("wu", GroupModel::MotionE2, |x| {
        let m = x.as_motion().ok_or_else(|| EvalError::Partial(x.to_string()))?;
        Ok(wu_value(&m)?)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RucDefect {
    pub theta: f64,
    /// `sup_u |f((u,1)(0,e^{i theta})) - f(u,1)|` on the grid.
    pub grid_sup: f64,
    pub argmax_u: f64,
    /// `|e^{i pi cos theta} - 1|`.
    pub envelope: f64,
}

pub const RUC_GRID_POINTS: usize = 10_000;

/// Right-uniformity defect of the Wu function at `v = (0, e^{i theta})`,
/// on `u` in `[0, 2 pi / (1 - cos theta)]`.
pub fn wu_ruc_defect(theta: f64) -> Result<RucDefect> {
    if theta == 0.0 || !theta.is_finite() {
        return Err(ApError::Invalid("theta must be finite and nonzero".into()));
    }
    let v = Motion::from_parts(0.0, 0.0, theta);
    let span = 2.0 * std::f64::consts::PI / (1.0 - theta.cos());
    let mut best = (0.0f64, 0.0f64);
    for k in 0..RUC_GRID_POINTS {
        let u = span * k as f64 / (RUC_GRID_POINTS - 1) as f64;
        let x = Motion::from_parts(u, 0.0, 0.0);
        let d = (wu_value(&x.compose(&v))? - wu_value(&x)?).norm();
        if d > best.0 {
            best = (d, u);
        }
    }
    Ok(RucDefect {
        theta,
        grid_sup: best.0,
        argmax_u: best.1,
        envelope: (Complex64::from_polar(1.0, std::f64::consts::PI * theta.cos()) - 1.0).norm(),
    })
}
