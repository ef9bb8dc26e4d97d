//! Kolmogorov-distance bound evaluators: the Esseen smoothing inequality, the
//! characteristic-function ODE lemma and the two forms of the Stein coupling
//! bound.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{integrate, log_plus};

/// `24/(π√(2π))`, the smoothing tail constant at `T = 1`.
pub fn smoothing_constant() -> f64 {
    24.0 / (PI * (2.0 * PI).sqrt())
}

/// Inputs of the characteristic-function ODE bound. The ODE
/// `φ'(t) = -t(1 + a(t))φ(t) + b(t)` is assumed to hold with
/// `|a(t)| ≤ A₀ + A₁|t|` and `|b(t)| ≤ B₀|t| + B₁t² + B₂|t|³`-type control.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Params {
    pub a0: f64,
    pub a1: f64,
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub t: f64,
}

impl Lemma2Params {
    pub fn validate(&self) -> Result<()> {
        let all = [self.a0, self.a1, self.b0, self.b1, self.b2];
        if all.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidInput("A and B coefficients must be finite and nonnegative".into()));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidInput(format!("t = {} must be positive", self.t)));
        }
        if self.a0 >= 0.5 {
            return Err(Error::Precondition(format!("A0 = {} must be below 1/2", self.a0)));
        }
        let threshold = 2.0 * self.a1 / (1.0 - 2.0 * self.a0);
        if self.t < threshold {
            return Err(Error::Precondition(format!("t = {} is below 2A1/(1-2A0) = {threshold}", self.t)));
        }
        Ok(())
    }
}

/// `(2/π)A₀ + (4/(3√π))A₁ + (√π/2)B₀ + (2/π)B₁(1 + 2log₊(1/(2t))) + (4/π)B₂/t + 24t/(π√(2π))`.
pub fn lemma2_bound(q: &Lemma2Params) -> Result<f64> {
    q.validate()?;
    let sp = PI.sqrt();
    Ok(2.0 / PI * q.a0
        + 4.0 / (3.0 * sp) * q.a1
        + sp / 2.0 * q.b0
        + 2.0 / PI * q.b1 * (1.0 + 2.0 * log_plus(1.0 / (2.0 * q.t))?)
        + 4.0 / PI * q.b2 / q.t
        + smoothing_constant() * q.t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundForm {
    /// `0.38r₁ + 3.05r̃₁ + 0.64r₂(1 + 2log₊(1/(2r̃₁)))`
    Simple,
    /// `0.76r₃ + 6.10r̃₃ + 0.64r₄/r̃₃`
    Extended,
}

/// Terms of the coupling bound. Only the fields of the chosen form are read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub r1: f64,
    pub r1_tilde: f64,
    pub r2: f64,
    pub r3: f64,
    pub r3_tilde: f64,
    pub r4: f64,
}

fn check_terms(terms: &[(&str, f64)]) -> Result<()> {
    for (name, x) in terms {
        if !(x.is_finite() && *x >= 0.0) {
            return Err(Error::InvalidInput(format!("{name} = {x} must be finite and nonnegative")));
        }
    }
    Ok(())
}

pub fn theorem2_bound(b: &BoundInputs, form: BoundForm) -> Result<f64> {
    match form {
        BoundForm::Simple => {
            check_terms(&[("r1", b.r1), ("r1_tilde", b.r1_tilde), ("r2", b.r2)])?;
            if b.r1_tilde <= 0.0 || b.r1_tilde < b.r1 {
                return Err(Error::Precondition(format!(
                    "r1_tilde = {} must be positive and at least r1 = {}",
                    b.r1_tilde, b.r1
                )));
            }
            let log_term = if b.r2 == 0.0 { 0.0 } else { 0.64 * b.r2 * (1.0 + 2.0 * log_plus(0.5 / b.r1_tilde)?) };
            Ok(0.38 * b.r1 + 3.05 * b.r1_tilde + log_term)
        }
        BoundForm::Extended => {
            check_terms(&[("r3", b.r3), ("r3_tilde", b.r3_tilde), ("r4", b.r4)])?;
            if b.r3_tilde <= 0.0 || b.r3_tilde < b.r3 {
                return Err(Error::Precondition(format!(
                    "r3_tilde = {} must be positive and at least r3 = {}",
                    b.r3_tilde, b.r3
                )));
            }
            Ok(0.76 * b.r3 + 6.10 * b.r3_tilde + 0.64 * b.r4 / b.r3_tilde)
        }
    }
}

/// Half-width of the window around `t = 0` left out of the smoothing integral.
pub const ESSEEN_WINDOW: f64 = 1e-6;

/// Right-hand side of Esseen's smoothing inequality,
/// `(1/π)∫_{-T}^{T} |φ(t) - e^{-t²/2}|/|t| dt + 24/(π√(2π)T)`.
///
/// The integrand has a removable singularity at zero for a centred law, so
/// `(-10⁻⁶, 10⁻⁶)` is skipped. Each half-line is cut into `panels` pieces,
/// each integrated adaptively.
pub fn esseen_rhs<F: Fn(f64) -> Complex64>(chf: F, t_max: f64, panels: usize) -> Result<f64> {
    if !(t_max > ESSEEN_WINDOW && t_max.is_finite()) {
        return Err(Error::InvalidInput(format!("T = {t_max} must be positive")));
    }
    let one = chf(0.0);
    if (one - 1.0).norm() > 1e-12 {
        return Err(Error::InvalidInput(format!("chf(0) = {one} is not 1")));
    }
    let bad = std::cell::Cell::new(false);
    let integrand = |t: f64| {
        let z = chf(t);
        if !(z.re.is_finite() && z.im.is_finite()) {
            bad.set(true);
        }
        (z - (-0.5 * t * t).exp()).norm() / t.abs()
    };
    let panels = panels.max(1);
    let h = (t_max - ESSEEN_WINDOW) / panels as f64;
    let tol = 1e-12 / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = ESSEEN_WINDOW + k as f64 * h;
        let hi = if k + 1 == panels { t_max } else { lo + h };
        total += integrate(integrand, lo, hi, tol)?;
        total += integrate(integrand, -hi, -lo, tol)?;
    }
    if bad.get() {
        return Err(Error::Numeric("characteristic function returned a non-finite value".into()));
    }
    Ok(total / PI + smoothing_constant() / t_max)
}
