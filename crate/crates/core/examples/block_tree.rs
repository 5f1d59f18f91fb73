//! Lattice decomposition of a block and the nested block tree of a trefoil.

use thick_embed::knot::{block_decompose, conformal_length, nested_block_tree, torus_knot, Block};

fn main() -> thick_embed::Result<()> {
    let k = torus_knot(2, 3, 10.0, 2.0, 120)?;
    let cb = 1.2 * conformal_length(&k, 4000, 0)?.lower;
    let q = Block::cube([0.0; 3], 28.0)?;
    let d = block_decompose(&q, &k, cb, 0, 100)?;
    let worst = d.crossings.iter().flatten().max().copied().unwrap_or(0);
    println!("{} blocks after {} attempts; busiest face crosses the knot {worst} times", d.blocks.len(), d.attempt + 1);

    let t = nested_block_tree(&k, 0)?;
    println!(
        "tree: {} nodes, depth {} (cap {}), {} leaves, partition error {:.1e}, all properties hold: {}",
        t.nodes.len(),
        t.depth(),
        t.max_depth,
        t.leaves().count(),
        t.partition_error,
        t.all_verified()
    );
    Ok(())
}
