// Exhaustive enumeration: exact law of T, exact Kolmogorov distance and the
// characteristic-function ODE residual.
use tristein::oracle::{enumerate_distribution, exact_chf_ode, exact_dk};

fn main() -> tristein::Result<()> {
    let d = enumerate_distribution(5, 0.3)?;
    for (t, q) in &d.atoms {
        println!("P[T = {t}] = {q:.6}");
    }
    println!("mean = {:.6}, variance = {:.6}", d.mean(), d.variance());

    for n in 3..=6 {
        println!("n = {n}: d_K(W, Z) = {:.5}", exact_dk(n, 0.5)?);
    }

    for t in [0.5, 1.0, 2.0, 4.0] {
        let c = exact_chf_ode(5, 0.3, t)?;
        println!("t = {t}: |phi| = {:.5}, ODE residual = {:.2e}", c.phi.norm(), c.residual);
    }
    Ok(())
}
