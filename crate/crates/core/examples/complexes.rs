//! Generators, mod-2 Betti numbers and expansion constants.

use thick_embed::complex::{
    betti_gf2, betti_gf2_cubical, expansion_constant, grid_skeleton, random_bipartite_graph, simplex_skeleton,
    ExpansionMode,
};

fn main() -> thick_embed::Result<()> {
    let k4 = simplex_skeleton(1, 4)?;
    println!("K4: counts {:?}, betti {:?}", k4.counts(), betti_gf2(&k4));
    println!("K4 expansion (exact): {}", expansion_constant(&k4, ExpansionMode::Exact)?.value);

    let g = random_bipartite_graph(32, 6, 7)?;
    let h = expansion_constant(&g, ExpansionMode::Spectral)?;
    println!("random bipartite 32+32, d=6: {} edges, spectral h >= {:.3}", g.count(1), h.value);

    let grid = grid_skeleton(1, 2, 3)?;
    println!("1-skeleton of [0,3]^2: counts {:?}, betti {:?}", grid.counts(), betti_gf2_cubical(&grid));
    Ok(())
}
