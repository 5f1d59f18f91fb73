//! Random facewise-linear embeddings and their thickness.

use thick_embed::complex::cycle_graph;
use thick_embed::construct::random_facewise_linear;
use thick_embed::geometry::{bisecting_sweep, random_directions, strong_combinatorial_thickness};

fn main() -> thick_embed::Result<()> {
    for n in [8, 16, 32, 64] {
        let x = cycle_graph(n)?;
        let (e, t) = random_facewise_linear(&x, 3, 10.0, 1)?;
        let strong = strong_combinatorial_thickness(&e).value;
        let sweep = bisecting_sweep(&e, &random_directions(3, 32, 1))?;
        println!(
            "cycle {n:>3}: thickness {t:.5}, strong {strong:.5}, bisecting crossings {} ({} independent)",
            sweep.total, sweep.independent
        );
    }
    Ok(())
}
