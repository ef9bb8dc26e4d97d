//! Dawson's integral, `log₊`, the normal distribution function and a
//! subdividing quadrature wrapper.

use crate::error::{Error, Result};

/// Dawson's integral `F(x) = e^{-x²} ∫₀ˣ e^{u²} du`.
///
/// For `|x| ≤ 8` the Maclaurin series of `∫₀ˣ e^{u²}du` is summed; its terms
/// are all positive so the only loss is the final scaling. Beyond that the
/// asymptotic series `1/(2x) Σ (2k-1)!!/(2x²)^k` is truncated at its smallest
/// term, which is below `e^{-64}` there.
pub fn dawson(x: f64) -> f64 {
    let a = x.abs();
    let v = if a <= 8.0 {
        let x2 = a * a;
        // term_k = x^{2k+1}/k!, weight 1/(2k+1)
        let mut term = a;
        let mut sum = a;
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= x2 / k;
            let add = term / (2.0 * k + 1.0);
            sum += add;
            if add <= sum * 1e-17 {
                break;
            }
        }
        (-x2).exp() * sum
    } else {
        let inv = 1.0 / (2.0 * a * a);
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            let next = term * (2.0 * k - 1.0) * inv;
            if next >= term || next < 1e-18 {
                break;
            }
            sum += next;
            term = next;
            k += 1.0;
        }
        sum / (2.0 * a)
    };
    v.copysign(x)
}

/// `max(ln x, 0)`.
pub fn log_plus(x: f64) -> Result<f64> {
    if x > 0.0 {
        Ok(x.ln().max(0.0))
    } else {
        Err(Error::InvalidInput(format!("log_plus({x}) needs a positive argument")))
    }
}

/// Standard normal distribution function via the complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `∫_a^b f` by double-exponential quadrature on unit panels, bisecting any
/// panel whose error estimate exceeds its share of `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput("integration limits must be finite".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate(f, b, a, tol).map(|v| -v);
    }
    let panels = (b - a).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let share = tol / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * h;
        let hi = if k + 1 == panels { b } else { lo + h };
        total += panel(&f, lo, hi, share, 0)?;
    }
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::Numeric(format!("integral over [{a}, {b}] is not finite")))
    }
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
    let out = quadrature::integrate(f, a, b, tol);
    if out.error_estimate <= tol {
        return Ok(out.integral);
    }
    if depth >= 40 {
        return Err(Error::Numeric(format!(
            "quadrature on [{a}, {b}] did not reach {tol:e} (estimate {:e})",
            out.error_estimate
        )));
    }
    let mid = 0.5 * (a + b);
    Ok(panel(f, a, mid, 0.5 * tol, depth + 1)? + panel(f, mid, b, 0.5 * tol, depth + 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson for `∫₀ˣ e^{u² - x²} du`, independent of the series.
    fn dawson_simpson(x: f64) -> f64 {
        let steps = 200_000;
        let h = x / steps as f64;
        let g = |u: f64| (u * u - x * x).exp();
        let mut s = g(0.0) + g(x);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * g(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn dawson_against_simpson() {
        for i in 0..=100 {
            let x = i as f64 * 0.1;
            let (got, want) = (dawson(x), dawson_simpson(x));
            assert!((got - want).abs() < 1e-10, "x = {x}: {got} vs {want}");
            assert_eq!(dawson(-x), -got);
        }
    }

    #[test]
    fn dawson_known_values() {
        assert_eq!(dawson(0.0), 0.0);
        assert!((dawson(1.0) - 0.538_079_506_9).abs() < 1e-10);
        // global maximum
        let top = dawson(0.924_138_873_0);
        assert!((top - 0.541_044_224_635).abs() < 1e-11);
        assert!(top > dawson(0.924) && top > dawson(0.9243));
        // continuity across the series/asymptotic switch
        assert!((dawson(8.0) - dawson(8.000_000_001)).abs() < 1e-10);
    }

    #[test]
    fn dawson_ode() {
        let h = 1e-5;
        for i in 0..=50 {
            let x = i as f64 * 0.1;
            let d = (dawson(x + h) - dawson(x - h)) / (2.0 * h);
            assert!((d - (1.0 - 2.0 * x * dawson(x))).abs() < 1e-6);
        }
    }

    #[test]
    fn log_plus_values() {
        assert_eq!(log_plus(1.0).unwrap(), 0.0);
        assert_eq!(log_plus(0.3).unwrap(), 0.0);
        assert!((log_plus(50.0).unwrap() - 3.912_023_005_4).abs() < 1e-9);
        assert!(log_plus(0.0).is_err());
    }

    #[test]
    fn normal_cdf_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-12);
        assert!((normal_cdf(-3.0) - 0.001_349_898_031_630_094_6).abs() < 1e-15);
    }

    #[test]
    fn integrate_smooth_and_oscillatory() {
        let v = integrate(|x| x * x, 0.0, 3.0, 1e-12).unwrap();
        assert!((v - 9.0).abs() < 1e-11);
        let v = integrate(|x| (10.0 * x).cos(), 0.0, 20.0, 1e-10).unwrap();
        assert!((v - (200.0f64).sin() / 10.0).abs() < 1e-9);
        assert!((integrate(|x| x, 2.0, 1.0, 1e-12).unwrap() + 1.5).abs() < 1e-12);
    }
}
