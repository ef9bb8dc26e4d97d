use proptest::prelude::*;
use tristein::experiment::{empirical_dk, rate_fit, ConfigLayer, ExperimentConfig, ResultRecord, Subcommand};
use tristein::patterns::{classify_pattern, enumerate_classes, Anchor, PatternConfig};
use tristein::TripleId;

fn relabel(v: TripleId, perm: &[usize]) -> TripleId {
    let [a, b, c] = v.vertices();
    TripleId::new(perm[a], perm[b], perm[c]).unwrap()
}

proptest! {
    #[test]
    fn classes_survive_relabelling(anchor in 0usize..4, class in 0usize..11, perm in Just((0..12).collect::<Vec<usize>>()).prop_shuffle()) {
        let classes = enumerate_classes(Anchor::ALL[anchor]);
        let c = &classes[class % classes.len()];
        let [v, w, vp, wp] = c.representative.triples();
        let moved = PatternConfig::new(relabel(v, &perm), relabel(w, &perm), relabel(vp, &perm), relabel(wp, &perm)).unwrap();
        let d = classify_pattern(moved).unwrap();
        prop_assert_eq!(&d.canonical, &c.canonical);
        prop_assert_eq!(d.m, c.m);
        prop_assert_eq!(d.lemma_tag, c.lemma_tag);
    }

    #[test]
    fn dk_in_unit_interval(w in prop::collection::vec(-5.0f64..5.0, 2..200)) {
        let d = empirical_dk(&w).unwrap().dk;
        prop_assert!((0.0..=1.0).contains(&d));
    }

    #[test]
    fn duplicate_moves_dk_by_at_most_one_over_m(w in prop::collection::vec(-4.0f64..4.0, 2..200), pick in any::<prop::sample::Index>()) {
        let m = w.len() as f64;
        let a = empirical_dk(&w).unwrap().dk;
        let mut more = w.clone();
        more.push(w[pick.index(w.len())]);
        let b = empirical_dk(&more).unwrap().dk;
        prop_assert!((a - b).abs() <= 1.0 / m + 1e-15);
    }

    #[test]
    fn slope_ignores_scale(slope in -2.0f64..-0.1, c in 0.01f64..100.0, noise in prop::collection::vec(0.9f64..1.1, 4)) {
        let pts: Vec<(f64, f64)> = [16.0f64, 32.0, 64.0, 128.0].iter().zip(&noise).map(|(&n, &e)| (n, e * n.powf(slope))).collect();
        let scaled: Vec<(f64, f64)> = pts.iter().map(|&(n, d)| (n, c * d)).collect();
        let (a, b) = (rate_fit(&pts).unwrap(), rate_fit(&scaled).unwrap());
        prop_assert!((a.slope - b.slope).abs() < 1e-9);
        prop_assert!((a.r_squared - b.r_squared).abs() < 1e-9);
    }

    #[test]
    fn record_round_trip(value in any::<f64>().prop_filter("finite", |x| x.is_finite()), se in 0.0f64..1e3, seed in any::<u64>()) {
        let layer = ConfigLayer { n: Some(vec![5]), seed: Some(seed), ..ConfigLayer::default() };
        let cfg = ExperimentConfig::resolve(Subcommand::Moments, layer, None).unwrap();
        let mut r = tristein::experiment::run(&cfg).unwrap().remove(0);
        r.value = value;
        r.std_error = Some(se);
        let text = serde_json::to_string(&r).unwrap();
        let back: ResultRecord = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.value.to_bits(), value.to_bits());
        prop_assert_eq!(&back, &r);
        prop_assert_eq!(back.compute_hash().unwrap(), r.compute_hash().unwrap());
    }
}

#[test]
fn noisy_slope_recovered() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let pts: Vec<(f64, f64)> =
        (4..=9).map(|k| 2f64.powi(k)).map(|n| (n, 3.0 / n * (1.0 + rng.random_range(-0.05..0.05)))).collect();
    let s = rate_fit(&pts).unwrap().slope;
    assert!((-1.1..=-0.9).contains(&s), "{s}");
}
