//! Separated ball covers of an embedded circle and the homology of their nerve.

use thick_embed::complex::cycle_graph;
use thick_embed::geometry::EmbeddedComplex;
use thick_embed::nerve::homotopy_invariant_report;

fn main() -> thick_embed::Result<()> {
    let m = 100;
    let coords = (0..m)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / m as f64;
            vec![10.0 * a.cos(), 10.0 * a.sin(), 0.0]
        })
        .collect();
    let e = EmbeddedComplex::new(cycle_graph(m)?, coords)?;
    for t in [0.5, 1.0, 2.0] {
        let r = homotopy_invariant_report(&e, t, 0, 50_000)?;
        println!("T = {t}: {} balls, nerve betti {:?}, rank/(V T^-3) = {:.4}", r.ball_count, r.betti, r.ratio);
    }
    Ok(())
}
