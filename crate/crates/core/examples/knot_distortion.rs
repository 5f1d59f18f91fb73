//! Distortion and conformal length of torus knots.

use thick_embed::knot::{check_convol_bound, torus_knot};

fn main() -> thick_embed::Result<()> {
    for q in [3, 5, 7, 9] {
        let k = torus_knot(2, q, 10.0, 2.0, 400)?;
        let c = check_convol_bound(&k, 4000, 1e-3, 0)?;
        println!(
            "T(2,{q}): distortion in [{:.3}, {:.3}], conformal length >= {:.3}, convol <= 4 distor: {}",
            c.distortion.lo, c.distortion.hi, c.convol.lower, c.holds
        );
    }
    Ok(())
}
