//! Closed-form moments of the triangle count, regime rates and the
//! independent proxy model.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, Discrete};

use crate::error::{check_probability, check_vertex_count, Error, Result};
use crate::graph::triple_total;

/// Exact first and second moments of `T` under `G(n, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub n: usize,
    pub p: f64,
    pub mean_t: f64,
    pub var_t: f64,
    pub sigma: f64,
    /// `Cov(X_v, X_w)` for `|v ∩ w| = 2`.
    pub cov_overlap2: f64,
    /// `Var X_v`.
    pub var_x: f64,
}

impl MomentReport {
    /// `σ_{v,w} = Cov(X_v, X_w)` for `w ∈ ν_v`.
    #[inline]
    pub fn sigma_vw(&self, same: bool) -> f64 {
        if same {
            self.var_x
        } else {
            self.cov_overlap2
        }
    }
}

/// `E T = C(n,3)p³` and `Var T = C(n,3)p³(1-p)(1+p+p²+3(n-3)p²)`.
pub fn exact_moments(n: usize, p: f64) -> Result<MomentReport> {
    check_vertex_count(n)?;
    check_probability(p)?;
    let c3 = triple_total(n) as f64;
    let p3 = p * p * p;
    let var_t = c3 * p3 * (1.0 - p) * (1.0 + p + p * p + 3.0 * (n as f64 - 3.0) * p * p);
    Ok(MomentReport {
        n,
        p,
        mean_t: c3 * p3,
        var_t,
        sigma: var_t.sqrt(),
        cov_overlap2: p.powi(5) * (1.0 - p),
        var_x: p3 * (1.0 - p3),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `1/2 < p < 1`
    Dense,
    /// `n^{-1/2} < p ≤ 1/2`
    Middle,
    /// `0 < p ≤ n^{-1/2}`
    Sparse,
}

impl Regime {
    pub fn classify(n: usize, p: f64) -> Regime {
        if p > 0.5 {
            Regime::Dense
        } else if p > 1.0 / (n as f64).sqrt() {
            Regime::Middle
        } else {
            Regime::Sparse
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Dense => "dense",
            Regime::Middle => "middle",
            Regime::Sparse => "sparse",
        })
    }
}

/// Rates of the main theorem with every universal constant set to one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeRates {
    pub regime: Regime,
    /// Order of `Var T`: `n⁴(1-p)`, `n⁴p⁵` or `n³p³`.
    pub s2: f64,
    /// Kolmogorov rate.
    pub thm1_rate: f64,
    /// Wasserstein rate; same shape as the Kolmogorov one.
    pub wasserstein_rate: f64,
    /// Bound on `r₃` with the exact `σ`; the default `r̃₃`.
    pub r3_rate: f64,
    /// Bound on `r₄` with the exact `σ`.
    pub r4_rate: f64,
}

pub fn regime_rates(n: usize, p: f64) -> Result<RegimeRates> {
    let m = exact_moments(n, p)?;
    let nf = n as f64;
    let s3 = m.sigma.powi(3);
    let regime = Regime::classify(n, p);
    let (s2, rate, r3, r4) = match regime {
        Regime::Dense => (
            nf.powi(4) * (1.0 - p),
            1.0 / (nf * (1.0 - p).sqrt()),
            nf.powi(5) * (1.0 - p),
            nf.powi(4) * (1.0 - p).sqrt(),
        ),
        Regime::Middle => {
            (nf.powi(4) * p.powi(5), 1.0 / (nf * p.sqrt()), nf.powi(5) * p.powi(7), nf.powi(4) * p.powf(6.5))
        }
        Regime::Sparse => (nf.powi(3) * p.powi(3), (nf * p).powf(-1.5), (nf * p).powi(3), (nf * p).powf(1.5)),
    };
    Ok(RegimeRates { regime, s2, thm1_rate: rate, wasserstein_rate: rate, r3_rate: r3 / s3, r4_rate: r4 / s3 })
}

/// Kolmogorov bound implied by a Wasserstein bound: `d_K ≤ √d_W`.
pub fn dk_from_dw(dw: f64) -> Result<f64> {
    if dw >= 0.0 && dw.is_finite() {
        Ok(dw.sqrt())
    } else {
        Err(Error::InvalidInput(format!("d_W = {dw} must be finite and nonnegative")))
    }
}

/// Exact quantities of the independent proxy model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProxyReport {
    pub n: usize,
    pub p: f64,
    pub mean_y: f64,
    /// `Var Y` for the literal model (pairs keyed by each triple's two smallest labels).
    pub var_y: f64,
    /// Closed form with a `(1-p)³` factor where the exact one has `(1-p³)`; for comparison.
    pub var_y_display: f64,
    /// `Var Y` for the variant that is a sum of `C(n,2)` i.i.d. terms.
    pub var_y_iid: f64,
    /// `E|I₁₂ Σ_k I₁₂ₖ - (n-2)p³|³`.
    pub gamma: f64,
    /// `n²γ/s³` with `s² = var_y_iid`.
    pub be_bound: f64,
}

pub fn proxy_exact(n: usize, p: f64) -> Result<ProxyReport> {
    if n < 4 {
        return Err(Error::InvalidInput(format!("proxy model needs n >= 4, got {n}")));
    }
    check_probability(p)?;
    let nf = n as f64;
    let c3 = triple_total(n) as f64;
    let c2 = nf * (nf - 1.0) / 2.0;
    let (p3, p5) = (p.powi(3), p.powi(5));

    // ordered pairs of distinct triples hanging off the same pair (i, j),
    // j the larger label: j pairs, each with n-1-j completions
    let shared: f64 = (1..n - 1).map(|j| (j * (n - 1 - j) * (n - 2 - j)) as f64).sum();
    let var_y = c3 * p3 * (1.0 - p3) + p5 * (1.0 - p) * shared;
    let var_y_display = c3 * (p3 * (1.0 - p).powi(3) + (nf - 3.0) * p5 * (1.0 - p));

    // one i.i.d. summand: I·B with B ~ Bin(n-2, p²)
    let k = nf - 2.0;
    let var_y_iid = c2 * (k * p3 * (1.0 - p * p) + k * k * p5 * (1.0 - p));

    let bin = Binomial::new(p * p, (n - 2) as u64).map_err(|e| Error::Numeric(e.to_string()))?;
    let centre = k * p3;
    let tail: f64 =
        crate::stats::neumaier_sum((0..=n as u64 - 2).map(|j| bin.pmf(j) * (j as f64 - centre).abs().powi(3)));
    let gamma = (1.0 - p) * centre.powi(3) + p * tail;
    let be_bound = nf * nf * gamma / var_y_iid.powf(1.5);
    Ok(ProxyReport { n, p, mean_y: c3 * p3, var_y, var_y_display, var_y_iid, gamma, be_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{triangle_count, Graph};

    /// Brute force over all 2^{C(n,2)} graphs.
    fn brute_moments(n: usize, p: f64) -> (f64, f64) {
        let e = n * (n - 1) / 2;
        let (mut m1, mut m2) = (0.0, 0.0);
        for mask in 0u64..1 << e {
            let k = mask.count_ones() as i32;
            let w = p.powi(k) * (1.0 - p).powi(e as i32 - k);
            let t = triangle_count(&Graph::from_mask(n, mask)) as f64;
            m1 += w * t;
            m2 += w * t * t;
        }
        (m1, m2 - m1 * m1)
    }

    #[test]
    fn moments_against_brute_force() {
        for n in 3..=5 {
            for p in [0.1, 0.5, 0.85] {
                let m = exact_moments(n, p).unwrap();
                let (mean, var) = brute_moments(n, p);
                assert!((m.mean_t - mean).abs() < 1e-12);
                assert!((m.var_t - var).abs() < 1e-12);
                let c3 = triple_total(n) as f64;
                let decomposed = c3 * (m.var_x + 3.0 * (n as f64 - 3.0) * m.cov_overlap2);
                assert!((m.var_t - decomposed).abs() < 1e-12);
            }
        }
        let m = exact_moments(4, 0.5).unwrap();
        assert_eq!((m.mean_t, m.var_t), (0.5, 0.625));
        let p = 0.37f64;
        let m3 = exact_moments(3, p).unwrap();
        assert!((m3.var_t - p.powi(3) * (1.0 - p.powi(3))).abs() < 1e-15);
        assert!(exact_moments(4, 1.0).is_err());
        assert!(exact_moments(2, 0.5).is_err());
    }

    #[test]
    fn regimes_and_rates() {
        let r = regime_rates(100, 0.05).unwrap();
        assert_eq!(r.regime, Regime::Sparse);
        assert!((r.thm1_rate - 5f64.powf(-1.5)).abs() < 1e-12);
        let r = regime_rates(100, 0.7).unwrap();
        assert_eq!(r.regime, Regime::Dense);
        assert!((r.thm1_rate - 1.0 / (100.0 * 0.3f64.sqrt())).abs() < 1e-12);
        assert_eq!(regime_rates(100, 0.2).unwrap().regime, Regime::Middle);
        assert_eq!(regime_rates(100, 0.1).unwrap().regime, Regime::Sparse);
        assert_eq!(regime_rates(100, 0.5).unwrap().regime, Regime::Middle);
        assert_eq!(r.wasserstein_rate, r.thm1_rate);
    }

    #[test]
    fn rates_blow_up_at_the_edges() {
        let a = regime_rates(50, 0.99).unwrap().thm1_rate;
        let b = regime_rates(50, 0.9999).unwrap().thm1_rate;
        assert!(b > 5.0 * a);
        // np fixed along growing n
        let a = regime_rates(100, 2.0 / 100.0).unwrap().thm1_rate;
        let b = regime_rates(10_000, 2.0 / 10_000.0).unwrap().thm1_rate;
        assert!((a - b).abs() < 1e-12 && a > 0.3);
    }

    #[test]
    fn square_root_relation() {
        assert_eq!(dk_from_dw(0.0).unwrap(), 0.0);
        assert!((dk_from_dw(0.04).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(dk_from_dw(1.0).unwrap(), 1.0);
        assert!(dk_from_dw(-1.0).is_err());
    }

    #[test]
    fn proxy_gamma_and_variances() {
        let r = proxy_exact(4, 0.5).unwrap();
        assert!((r.gamma - 0.258_789_062_5).abs() < 1e-12);
        assert!((r.mean_y - 0.5).abs() < 1e-15);
        // n = 4: only pair 01 carries two triples (012, 013)
        let p = 0.3f64;
        let r = proxy_exact(4, p).unwrap();
        let want = 4.0 * p.powi(3) * (1.0 - p.powi(3)) + 2.0 * p.powi(5) * (1.0 - p);
        assert!((r.var_y - want).abs() < 1e-15);
        assert!(proxy_exact(3, 0.5).is_err());
    }

    #[test]
    fn proxy_literal_variance_by_enumeration() {
        // n = 5: enumerate the 10 edge bits and 10 marks as independent Bernoullis
        let n = 5;
        let p = 0.4f64;
        let triples: Vec<_> = crate::graph::TripleId::all(n).collect();
        let (mut m1, mut m2) = (0.0, 0.0);
        for emask in 0u32..1 << 10 {
            let we = p.powi(emask.count_ones() as i32) * (1.0 - p).powi(10 - emask.count_ones() as i32);
            for xmask in 0u32..1 << 10 {
                let k = xmask.count_ones() as i32;
                let w = we * (p * p).powi(k) * (1.0 - p * p).powi(10 - k);
                let y = triples
                    .iter()
                    .enumerate()
                    .filter(|(r, t)| {
                        let [a, b, _] = t.vertices();
                        let e = crate::graph::EdgeId::new(a, b).unwrap().rank();
                        emask >> e & 1 == 1 && xmask >> r & 1 == 1
                    })
                    .count() as f64;
                m1 += w * y;
                m2 += w * y * y;
            }
        }
        let r = proxy_exact(n, p).unwrap();
        assert!((r.mean_y - m1).abs() < 1e-10);
        assert!((r.var_y - (m2 - m1 * m1)).abs() < 1e-10);
    }
}
