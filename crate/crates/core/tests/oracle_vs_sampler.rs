// Sampler frequencies against the exact law from enumeration.
use tristein::graph::triangle_count;
use tristein::moments::exact_moments;
use tristein::oracle::{dk_of_atoms, enumerate_distribution, exact_dk};
use tristein::{sample_gnp, SamplerConfig};

#[test]
fn triangle_law_matches_enumeration() {
    let (n, p, m) = (5, 0.4, 200_000u64);
    let exact = enumerate_distribution(n, p).unwrap();
    let cfg = SamplerConfig::new(n, p, 21, 2).unwrap();
    let mut counts = [0u64; 11];
    for i in 0..m {
        counts[triangle_count(&sample_gnp(&cfg, i).unwrap()) as usize] += 1;
    }
    for &(t, q) in &exact.atoms {
        let f = counts[t as usize] as f64 / m as f64;
        let se = (q * (1.0 - q) / m as f64).sqrt();
        assert!((f - q).abs() <= 5.0 * se + 1e-12, "T = {t}: {f} vs {q}");
    }
}

#[test]
fn exact_dk_is_dk_of_standardized_atoms() {
    for n in 3..=6 {
        let atoms = enumerate_distribution(n, 0.5).unwrap().standardized().unwrap();
        assert_eq!(dk_of_atoms(&atoms), exact_dk(n, 0.5).unwrap());
    }
}

#[test]
fn enumeration_moments() {
    let d = enumerate_distribution(6, 0.7).unwrap();
    let m = exact_moments(6, 0.7).unwrap();
    assert!((d.mean() - m.mean_t).abs() < 1e-10);
    assert!((d.variance() - m.var_t).abs() < 1e-10);
    let total: f64 = d.atoms.iter().map(|a| a.1).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn point_mass_distance() {
    let d = exact_dk(3, 0.5).unwrap();
    // T is Bernoulli(1/8): atoms at -1/sqrt(7) and sqrt(7)
    let q = 0.125f64;
    let (lo, hi) = (-(q / (1.0 - q)).sqrt(), ((1.0 - q) / q).sqrt());
    let phi = |x: f64| tristein::special::normal_cdf(x);
    let want =
        [phi(lo), (1.0 - q - phi(lo)).abs(), (1.0 - q - phi(hi)).abs(), 1.0 - phi(hi)].into_iter().fold(0.0, f64::max);
    assert!((d - want).abs() < 1e-14);
}
