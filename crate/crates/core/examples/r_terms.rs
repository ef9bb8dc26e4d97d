// Monte Carlo r-terms at one (n, p), compared with the exact values, then
// assembled into the coupling bound.
use tristein::coupling::{assemble_bound, estimate_r, RTerm, TildePolicy};
use tristein::oracle::exact_r_terms;

fn main() -> tristein::Result<()> {
    let (n, p) = (5, 0.3);
    let grid = [0.5, 1.0, 2.0];
    let all = [RTerm::R1, RTerm::R2, RTerm::R3, RTerm::R4];
    let mc = estimate_r(n, p, 100_000, &grid, &all, 1)?;
    let exact = exact_r_terms(n, p, &grid)?;
    for name in ["r1", "r2", "r3_1", "r3_2", "r3_3", "r3", "r4"] {
        let (a, b) = (mc.get(name).unwrap(), exact.get(name).unwrap());
        println!("{name:>5}: mc {:.5} +- {:.5}   exact {:.5}", a.value, a.std_error, b.value);
    }

    let big = estimate_r(40, 0.5, 2_000, &grid, &all, 1)?;
    let b = assemble_bound(&big, TildePolicy::Theoretical)?;
    println!("n = 40, p = 0.5: simple {:?}, extended {:?}", b.simple, b.extended);
    for w in &b.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
