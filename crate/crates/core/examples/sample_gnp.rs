// Counter-based sampling: sample i depends only on (seed, stream, i).
use tristein::graph::triangle_count;
use tristein::{sample_gnp, sample_proxy, ProxyVariant, SamplerConfig};

fn main() -> tristein::Result<()> {
    let cfg = SamplerConfig::new(30, 0.3, 7, 0)?;
    let counts: Vec<u64> = (0..8).map(|i| sample_gnp(&cfg, i).map(|g| triangle_count(&g))).collect::<Result<_, _>>()?;
    println!("T for samples 0..8: {counts:?}");

    // random access gives the same graph as sequential order
    assert_eq!(sample_gnp(&cfg, 5)?, sample_gnp(&cfg, 5)?);

    let other = cfg.with_stream(1);
    println!("stream 1, sample 0: T = {}", triangle_count(&sample_gnp(&other, 0)?));

    for variant in [ProxyVariant::Literal, ProxyVariant::Iid] {
        println!("proxy {variant:?}: Y = {}", sample_proxy(&cfg, 0, variant)?);
    }
    Ok(())
}
