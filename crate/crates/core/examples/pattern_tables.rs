// Overlap patterns of four triangles, grouped into isomorphism classes.
use tristein::patterns::{enumerate_classes, moment_bound_check, Anchor};
use tristein::TripleId;

fn main() -> tristein::Result<()> {
    for anchor in Anchor::ALL {
        let classes = enumerate_classes(anchor);
        println!("{anchor}: {} classes", classes.len());
        for c in &classes {
            let [v, w, vp, wp] = c.representative.triples();
            println!("  {v} {w} | {vp} {wp}  m = {:>2}  {}  p^{}", c.m, c.lemma_tag, c.small_p_exponent());
        }
    }

    let t = |a, b, c| TripleId::new(a, b, c).unwrap();
    let rep = moment_bound_check(&[t(0, 1, 2), t(0, 1, 3), t(2, 3, 4)], &[0.1, 0.5, 0.9])?;
    println!("moment bound violations: {}", rep.violations());
    Ok(())
}
