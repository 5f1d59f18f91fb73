//! Monte Carlo probabilities of the near-collision events behind random embeddings.

use thick_embed::construct::{bad_probability_curve, inverse_norm_tail, Scenario};
use thick_embed::sweep::fit_loglog;

fn main() -> thick_embed::Result<()> {
    let eps = [0.02, 0.04, 0.08, 0.16];
    let curve = bad_probability_curve(Scenario::Pair { k: 1, n: 3 }, &eps, 20_000, 1)?;
    for p in &curve {
        println!("eps {:.2}: p = {:.5}  95% [{:.5}, {:.5}]", p.eps, p.p_hat, p.ci95.0, p.ci95.1);
    }
    let pts: Vec<(f64, f64)> = curve.iter().map(|p| (p.eps, p.p_hat)).collect();
    println!("slope {:.3}", fit_loglog(&pts)?.slope);
    let tail = inverse_norm_tail(2, 0.05, 20_000, 1)?;
    println!("2x2 determinant 5% quantile {:.4} (ratio {:.3})", tail.quantile, tail.ratio);
    Ok(())
}
