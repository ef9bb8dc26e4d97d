//! Complex variance and covariance, `Cov(U, V) = E{(U - EU)(V - EV)*}`.
//!
//! The sample functions use the plug-in `1/m` normalisation. The `weighted_*`
//! functions work on a finite probability space given as outcome weights, and
//! back the conditional covariance formula and the covariance perturbation
//! bound, both checked exactly on small examples.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::ComplexNeumaier;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexStats {
    pub var_u: f64,
    pub cov_uv: Complex64,
}

pub fn complex_stats(pairs: &[(Complex64, Complex64)]) -> Result<ComplexStats> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput("complex_stats needs at least one sample".into()));
    }
    let w = vec![1.0; pairs.len()];
    let u: Vec<_> = pairs.iter().map(|x| x.0).collect();
    let v: Vec<_> = pairs.iter().map(|x| x.1).collect();
    Ok(ComplexStats { var_u: weighted_cov(&w, &u, &u)?.re, cov_uv: weighted_cov(&w, &u, &v)? })
}

fn check_weights(w: &[f64], len: usize) -> Result<f64> {
    if w.is_empty() || w.len() != len {
        return Err(Error::InvalidInput(format!("{} weights for {len} outcomes", w.len())));
    }
    if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
    }
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidInput("weights sum to zero".into()));
    }
    Ok(total)
}

pub fn weighted_mean(w: &[f64], x: &[Complex64]) -> Result<Complex64> {
    let total = check_weights(w, x.len())?;
    let mut s = ComplexNeumaier::new();
    for (wi, xi) in w.iter().zip(x) {
        s.add(xi * *wi);
    }
    Ok(s.value() / total)
}

/// Two-pass covariance on a finite space with (unnormalised) weights `w`.
pub fn weighted_cov(w: &[f64], u: &[Complex64], v: &[Complex64]) -> Result<Complex64> {
    if u.len() != v.len() {
        return Err(Error::InvalidInput("U and V have different lengths".into()));
    }
    let total = check_weights(w, u.len())?;
    let (mu, mv) = (weighted_mean(w, u)?, weighted_mean(w, v)?);
    let mut s = ComplexNeumaier::new();
    for i in 0..u.len() {
        s.add((u[i] - mu) * (v[i] - mv).conj() * w[i]);
    }
    Ok(s.value() / total)
}

pub fn weighted_var(w: &[f64], u: &[Complex64]) -> Result<f64> {
    Ok(weighted_cov(w, u, u)?.re)
}

/// Both sides of `Cov(U,V) = E Cov^F(U,V) + Cov(E^F U, E^F V)` where `F` is
/// generated by the partition `labels`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalCovariance {
    pub total: Complex64,
    pub within: Complex64,
    pub between: Complex64,
}

impl ConditionalCovariance {
    pub fn residual(&self) -> f64 {
        (self.total - self.within - self.between).norm()
    }
}

pub fn conditional_covariance(
    w: &[f64],
    labels: &[usize],
    u: &[Complex64],
    v: &[Complex64],
) -> Result<ConditionalCovariance> {
    let total_w = check_weights(w, u.len())?;
    if labels.len() != u.len() {
        return Err(Error::InvalidInput("one label per outcome is required".into()));
    }
    let total = weighted_cov(w, u, v)?;
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, &l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    let mut within = ComplexNeumaier::new();
    // E^F U and E^F V evaluated on each outcome
    let (mut eu, mut ev) = (vec![Complex64::default(); u.len()], vec![Complex64::default(); u.len()]);
    for idx in groups.values() {
        let gw: Vec<f64> = idx.iter().map(|&i| w[i]).collect();
        let mass: f64 = gw.iter().sum();
        if mass == 0.0 {
            continue;
        }
        let gu: Vec<_> = idx.iter().map(|&i| u[i]).collect();
        let gv: Vec<_> = idx.iter().map(|&i| v[i]).collect();
        within.add(weighted_cov(&gw, &gu, &gv)? * (mass / total_w));
        let (mu, mv) = (weighted_mean(&gw, &gu)?, weighted_mean(&gw, &gv)?);
        for &i in idx {
            eu[i] = mu;
            ev[i] = mv;
        }
    }
    Ok(ConditionalCovariance { total, within: within.value(), between: weighted_cov(w, &eu, &ev)? })
}

/// Terms of the perturbation bound
/// `|Cov(UV, U'V')| ≤ |Cov(UṼ, U'Ṽ')| + R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationCheck {
    pub lhs: f64,
    pub main: f64,
    /// `R` built from the three-term covariance split.
    pub remainder: f64,
    /// `R` with `Ṽ'` in the first factor of its third term.
    pub remainder_primed: f64,
}

impl PerturbationCheck {
    pub fn holds(&self) -> bool {
        self.lhs <= self.main + self.remainder + 1e-12
    }
}

/// The six variables are given as outcome vectors on the weighted space `w`:
/// `[U, V, Ṽ, U', V', Ṽ']`.
pub fn perturbation_check(w: &[f64], vars: [&[Complex64]; 6]) -> Result<PerturbationCheck> {
    let [u, v, vt, up, vp, vtp] = vars;
    let len = u.len();
    if vars.iter().any(|x| x.len() != len) {
        return Err(Error::InvalidInput("all variables need the same number of outcomes".into()));
    }
    let zip = |f: &dyn Fn(usize) -> Complex64| -> Vec<Complex64> { (0..len).map(f).collect() };
    let abs_mean = |x: Vec<Complex64>| -> Result<f64> {
        let a: Vec<Complex64> = x.iter().map(|z| Complex64::new(z.norm(), 0.0)).collect();
        Ok(weighted_mean(w, &a)?.re)
    };
    let uv = zip(&|i| u[i] * v[i]);
    let upvp = zip(&|i| up[i] * vp[i]);
    let uvt = zip(&|i| u[i] * vt[i]);
    let upvtp = zip(&|i| up[i] * vtp[i]);
    let lhs = weighted_cov(w, &uv, &upvp)?.norm();
    let main = weighted_cov(w, &uvt, &upvtp)?.norm();
    let du = zip(&|i| u[i] * (v[i] - vt[i]));
    let dup = zip(&|i| up[i] * (vp[i] - vtp[i]));
    let first = abs_mean(zip(&|i| du[i] * upvp[i]))? + abs_mean(du.clone())? * abs_mean(upvp.clone())?;
    let tail = abs_mean(uvt.clone())? * abs_mean(dup.clone())?;
    let remainder = first + abs_mean(zip(&|i| uvt[i] * dup[i]))? + tail;
    let remainder_primed = first + abs_mean(zip(&|i| u[i] * vtp[i] * dup[i]))? + tail;
    Ok(PerturbationCheck { lhs, main, remainder, remainder_primed })
}
