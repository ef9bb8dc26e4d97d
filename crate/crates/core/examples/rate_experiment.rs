// Monte Carlo Kolmogorov distance of W across n and the fitted log-log slope.
use tristein::experiment::{empirical_dk, rate_fit, sample_w};
use tristein::SamplerConfig;

fn main() -> tristein::Result<()> {
    let samples = 20_000;
    let mut points = Vec::new();
    for n in [16, 32, 64] {
        let cfg = SamplerConfig::new(n, 0.5, 7, 0)?;
        let d = empirical_dk(&sample_w(&cfg, samples, 16)?)?;
        println!("n = {n:>3}: dk = {:.4} (DKW band {:.4})", d.dk, d.dkw_band);
        points.push((n as f64, d.dk));
    }
    let fit = rate_fit(&points)?;
    println!("slope = {:.3}, r^2 = {:.3}", fit.slope, fit.r_squared);
    Ok(())
}
