//! Vertices on a sphere, edges routed through random interior waypoints.

use thick_embed::complex::random_bipartite_graph;
use thick_embed::construct::kb_sphere_embedding;

fn main() -> thick_embed::Result<()> {
    let g = random_bipartite_graph(10, 3, 4)?;
    let kb = kb_sphere_embedding(&g, 4, 400)?;
    println!(
        "{} edges routed in a ball of radius {:.1}; thickness {:.3}; {} fine segments",
        g.count(1),
        kb.radius,
        kb.thickness,
        kb.embedding.fine.complex().count(1)
    );
    Ok(())
}
