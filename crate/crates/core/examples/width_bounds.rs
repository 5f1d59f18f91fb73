//! Filling constants on dual grids and the resulting width sandwich.

use thick_embed::complex::grid_skeleton;
use thick_embed::width::{coordinate_map, fill_constant_estimate, filling_width_lower_bound, pl_map_width_upper_cubical};

fn main() -> thick_embed::Result<()> {
    for s in [4, 8, 16] {
        let fill = fill_constant_estimate(2, 1, s, 1, 60, 0)?;
        let x = grid_skeleton(1, 2, s)?;
        let lower = filling_width_lower_bound(&x, &[fill.value.max(1.0)])?;
        let upper = pl_map_width_upper_cubical(&x, &coordinate_map(&x, &[0]), 64)?;
        println!("S = {s:>2}: Fill(1) ~ {:>4.1}, width in [{:.2}, {}]", fill.value, lower.value, upper.count);
    }
    Ok(())
}
