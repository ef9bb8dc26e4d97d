// The ODE-based smoothing bound, the coupling bound and Esseen's inequality.
use num_complex::Complex64;
use tristein::bounds::{esseen_rhs, lemma2_bound, theorem2_bound, BoundForm, BoundInputs, Lemma2Params};
use tristein::special::dawson;

fn main() -> tristein::Result<()> {
    let q = Lemma2Params { a0: 0.1, a1: 0.01, b0: 0.01, b1: 0.01, b2: 0.001, t: 0.05 };
    println!("ODE bound: {:.5}", lemma2_bound(&q)?);

    let r = BoundInputs { r1: 0.01, r1_tilde: 0.01, r2: 0.02, r3: 0.01, r3_tilde: 0.02, r4: 0.001 };
    println!("simple:   {:.5}", theorem2_bound(&r, BoundForm::Simple)?);
    println!("extended: {:.5}", theorem2_bound(&r, BoundForm::Extended)?);

    // a normal law against itself leaves only the smoothing term
    let gauss = |t: f64| Complex64::new((-t * t / 2.0).exp(), 0.0);
    println!("Esseen, Z vs Z, T = 10: {:.5}", esseen_rhs(gauss, 10.0, 8)?);

    println!("Dawson F(1) = {:.10}", dawson(1.0));
    Ok(())
}
