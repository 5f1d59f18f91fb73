//! Grid graphs folded into a ball, and graphs embedded up to homotopy.

use thick_embed::complex::random_bipartite_graph;
use thick_embed::construct::{folded_grid_embedding, retraction_embed_graph};

fn main() -> thick_embed::Result<()> {
    for side in [4, 8, 16] {
        let f = folded_grid_embedding(side, 3)?;
        println!("grid {side}x{side}: thickness {:.3}, radius {:.2}", f.thickness, f.radius);
    }
    let g = random_bipartite_graph(6, 3, 1)?;
    let r = retraction_embed_graph(&g, 3)?;
    println!("graph with b1 = {}: grid side {}, strong thickness {:.3}, radius {:.2}", r.b1, r.grid_side, r.strong_thickness, r.radius);
    Ok(())
}
