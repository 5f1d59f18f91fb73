//! Two-scale construction versus a plain random embedding at the same radius.

use thick_embed::complex::random_bipartite_graph;
use thick_embed::construct::{random_facewise_linear, two_scale_embedding, TwoScaleOptions};

fn main() -> thick_embed::Result<()> {
    let x = random_bipartite_graph(8, 6, 2)?;
    let ts = two_scale_embedding(&x, 3, 2, TwoScaleOptions::default())?;
    let (_, plain) = random_facewise_linear(&x, 3, ts.initial_radius, 2)?;
    println!("radius {:.2}", ts.initial_radius);
    println!("plain random thickness {plain:.5}");
    println!("two-scale thickness    {:.5}", ts.achieved_eps);
    println!("rescaled to thickness 1: radius {:.2}, {} fine edges", ts.radius, ts.embedding.fine.complex().count(1));
    Ok(())
}
