// Covariance of kernel-weighted local sums for one class per lemma, exact at n = 7.
use tristein::patterns::{classify_pattern, pattern_cov_check, CovCheck, CovMode, Kernel, LocalArg, PatternConfig};
use tristein::TripleId;

fn main() -> tristein::Result<()> {
    let t = |a, b, c| TripleId::new(a, b, c).unwrap();
    let reps = [
        [t(0, 1, 2), t(1, 2, 3), t(0, 3, 4), t(0, 3, 4)],
        [t(0, 1, 2), t(0, 1, 2), t(0, 3, 4), t(0, 3, 4)],
        [t(0, 1, 2), t(0, 1, 3), t(4, 5, 6), t(4, 5, 6)],
        [t(0, 1, 2), t(0, 1, 3), t(3, 4, 5), t(3, 4, 5)],
    ];
    for p in [0.3, 0.7] {
        let check = CovCheck { n: 7, p, t: 1.0, mode: CovMode::Exact, kernel: Kernel::Phi, arg: LocalArg::Pair };
        for [v, w, vp, wp] in reps {
            let cls = classify_pattern(PatternConfig::new(v, w, vp, wp)?)?;
            let r = pattern_cov_check(&cls, &check)?;
            println!("p = {p}  {}  m = {:>2}  |cov| = {:.3e}  ratio = {:.3e}", r.lemma, r.m, r.abs_cov, r.ratio);
        }
    }
    Ok(())
}
