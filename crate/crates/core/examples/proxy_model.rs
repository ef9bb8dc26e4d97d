// The independent proxy statistic: exact variance forms, Berry-Esseen bound
// and the Monte Carlo distance of its standardized version.
use tristein::experiment::{empirical_dk, sample_proxy_w};
use tristein::moments::proxy_exact;
use tristein::{ProxyVariant, SamplerConfig};

fn main() -> tristein::Result<()> {
    for n in [16, 32, 64] {
        let r = proxy_exact(n, 0.5)?;
        let cfg = SamplerConfig::new(n, 0.5, 3, 0)?;
        let d = empirical_dk(&sample_proxy_w(&cfg, 50_000, 16, ProxyVariant::Iid)?)?;
        println!(
            "n = {n:>3}: var literal {:.1}, display {:.1}, iid {:.1}; BE bound {:.3}; dk {:.4}",
            r.var_y, r.var_y_display, r.var_y_iid, r.be_bound, d.dk
        );
    }
    Ok(())
}
