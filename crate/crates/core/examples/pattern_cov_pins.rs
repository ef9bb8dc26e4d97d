// Regenerates tests/fixtures/pattern_cov_pins.json: exact covariance ratios
// for one class per lemma at n = 7, t = 1.
use std::collections::BTreeMap;

use serde_json::json;
use tristein::patterns::{classify_pattern, pattern_cov_check, CovCheck, CovMode, Kernel, LocalArg, PatternConfig};
use tristein::TripleId;

fn main() -> tristein::Result<()> {
    let t = |a, b, c| TripleId::new(a, b, c).unwrap();
    let reps = [
        ("L9", [t(0, 1, 2), t(1, 2, 3), t(0, 3, 4), t(0, 3, 4)]),
        ("L10", [t(0, 1, 2), t(0, 1, 2), t(0, 3, 4), t(0, 3, 4)]),
        ("L11", [t(0, 1, 2), t(0, 1, 3), t(4, 5, 6), t(4, 5, 6)]),
        ("L12", [t(0, 1, 2), t(0, 1, 3), t(3, 4, 5), t(3, 4, 5)]),
    ];
    let mut pins = Vec::new();
    for (tag, [v, w, vp, wp]) in reps {
        let cls = classify_pattern(PatternConfig::new(v, w, vp, wp)?)?;
        assert_eq!(cls.lemma_tag.to_string(), tag);
        let mut ratios = BTreeMap::new();
        for p in [0.3, 0.7] {
            let check = CovCheck { n: 7, p, t: 1.0, mode: CovMode::Exact, kernel: Kernel::Phi, arg: LocalArg::Pair };
            let r = pattern_cov_check(&cls, &check)?;
            ratios.insert(format!("{p}"), json!({ "abs_cov": r.abs_cov, "ratio": r.ratio }));
        }
        pins.push(json!({ "lemma": tag, "pattern": [v, w, vp, wp], "m": cls.m, "values": ratios }));
    }
    let text =
        serde_json::to_string_pretty(&json!({ "n": 7, "t": 1.0, "kernel": "phi", "arg": "pair", "pins": pins }))?;
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/pattern_cov_pins.json");
    std::fs::write(path, text + "\n")?;
    println!("wrote {path}");
    Ok(())
}
