// Exact moments of T and the regime rates of the Kolmogorov bound.
use tristein::moments::{exact_moments, regime_rates};

fn main() -> tristein::Result<()> {
    println!("{:>5} {:>6} {:>8} {:>14} {:>12} {:>10}", "n", "p", "regime", "E T", "sd T", "rate");
    for &(n, p) in &[(4, 0.5), (20, 0.9), (100, 0.5), (100, 0.05), (1000, 0.01)] {
        let m = exact_moments(n, p)?;
        let r = regime_rates(n, p)?;
        println!(
            "{n:>5} {p:>6} {:>8} {:>14.3} {:>12.3} {:>10.3e}",
            r.regime.to_string(),
            m.mean_t,
            m.sigma,
            r.thm1_rate
        );
    }
    Ok(())
}
