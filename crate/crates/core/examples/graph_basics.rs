// Build a small graph, count its triangles and look at the local sums.
use tristein::graph::{centered_indicator, local_sum, neighborhood, triangle_count};
use tristein::{Graph, TripleId};

fn main() -> tristein::Result<()> {
    let g = Graph::from_edges(5, [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (3, 4)])?;
    println!("{}", g.to_text());
    println!("edges = {}, triangles = {}", g.edge_count(), triangle_count(&g));

    let p = 0.4;
    let v = TripleId::new(0, 1, 2)?;
    let w = TripleId::new(1, 2, 3)?;
    println!("X_v = {:.4}", centered_indicator(&g, p, v)?);
    println!("|nu_v| = {}", neighborhood(v, 5, None)?.len());
    println!("Y_v = {:.4}", local_sum(&g, p, v, None)?);
    println!("Y_vw = {:.4}", local_sum(&g, p, v, Some(w))?);

    let back: Graph = g.to_text().parse()?;
    assert_eq!(back, g);
    Ok(())
}
