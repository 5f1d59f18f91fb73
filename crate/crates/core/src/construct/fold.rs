//! Square grids laid out in a thin slab and folded into a ball.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::complex::{betti_gf2, SimplicialComplex};
use crate::error::{param, Error, Result};
use crate::geometry::{combinatorial_thickness, strong_combinatorial_thickness, EmbeddedComplex};

/// Spacing of grid vertices inside the slab.
const SPACING: f64 = 10.0;
/// Slab thickness.
const SLAB: f64 = 10.0;
/// Bend radius of the first fold. The bent slab has half-thickness 5, so the
/// stretch across a bend stays within `1 -+ 5/18`.
const RHO_A: f64 = 18.0;
/// Ratio of bend radius to block thickness in the second fold.
const RHO_B_FACTOR: f64 = 1.8;

/// The `S x S` grid graph; vertex `(i, j)` has id `i * S + j`.
pub fn grid_graph(side: usize) -> Result<SimplicialComplex> {
    if side < 2 {
        return Err(param("grid side must be at least 2"));
    }
    let mut edges = Vec::new();
    for i in 0..side {
        for j in 0..side {
            let v = i * side + j;
            if i + 1 < side {
                edges.push(vec![v, v + side]);
            }
            if j + 1 < side {
                edges.push(vec![v, v + 1]);
            }
        }
    }
    SimplicialComplex::from_simplices(side * side, edges)
}

/// Boustrophedon path of `layers` straight runs of length `run` joined by
/// half-turns of radius `rho`. Returns the point `(u, v)`, and the unit
/// tangent, at arc length `s`.
fn serpentine(s: f64, layers: usize, run: f64, rho: f64) -> ([f64; 2], [f64; 2]) {
    let period = run + PI * rho;
    let r = ((s / period).floor() as usize).min(layers - 1);
    let local = s - r as f64 * period;
    let v0 = 2.0 * rho * r as f64;
    if local <= run || r == layers - 1 {
        let u = if r % 2 == 0 { local } else { run - local };
        let t = if r % 2 == 0 { [1.0, 0.0] } else { [-1.0, 0.0] };
        return ([u, v0], t);
    }
    let phi = (local - run) / rho;
    let (sp, cp) = phi.sin_cos();
    if r % 2 == 0 {
        ([run + rho * sp, v0 + rho - rho * cp], [cp, sp])
    } else {
        ([-rho * sp, v0 + rho - rho * cp], [-cp, sp])
    }
}

/// A two-stage fold of the slab `[0,W] x [0,W] x [0,10]`, `W = 10 S`.
/// The first stage bends the `x` direction into layers stacked along `z`;
/// the second bends `y` into layers stacked along the first stage's width.
/// Each stage distorts lengths by a factor in `[0.72, 1.28]`, so the map is
/// locally 2-bilipschitz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldMap {
    pub side: usize,
    pub layers_a: usize,
    pub layers_b: usize,
    run_a: f64,
    run_b: f64,
    rho_b: f64,
    mid_b: f64,
    lo: [f64; 3],
    hi: [f64; 3],
}

impl FoldMap {
    pub fn new(side: usize, layers_a: usize, layers_b: usize) -> Result<Self> {
        if side < 2 || layers_a == 0 || layers_b == 0 {
            return Err(param("fold needs side >= 2 and positive layer counts"));
        }
        let w = SPACING * side as f64;
        let run_a = (w - (layers_a - 1) as f64 * PI * RHO_A) / layers_a as f64;
        if run_a <= 0.0 {
            return Err(param("too many first-stage layers for this slab"));
        }
        let half = SLAB / 2.0;
        let (xa_lo, xa_hi) = if layers_a == 1 {
            (0.0, w)
        } else {
            (-(RHO_A + half), run_a + RHO_A + half)
        };
        let t_b = xa_hi - xa_lo;
        let rho_b = RHO_B_FACTOR * t_b;
        let run_b = (w - (layers_b - 1) as f64 * PI * rho_b) / layers_b as f64;
        if run_b <= 0.0 {
            return Err(param("too many second-stage layers for this slab"));
        }
        let hb = t_b / 2.0;
        let (u_lo, u_hi) = if layers_b == 1 { (0.0, w) } else { (-(rho_b + hb), run_b + rho_b + hb) };
        let lo = [-hb, u_lo, 0.0];
        let hi = [2.0 * rho_b * (layers_b - 1) as f64 + hb, u_hi, SLAB + 2.0 * RHO_A * (layers_a - 1) as f64];
        Ok(FoldMap { side, layers_a, layers_b, run_a, run_b, rho_b, mid_b: (xa_lo + xa_hi) / 2.0, lo, hi })
    }

    /// The layer counts giving the smallest bounding ball.
    pub fn best(side: usize) -> Result<Self> {
        let mut best = FoldMap::new(side, 1, 1)?;
        for la in 1..=side.max(1) * 2 {
            let Ok(_) = FoldMap::new(side, la, 1) else { break };
            for lb in 1..=side.max(1) * 2 {
                match FoldMap::new(side, la, lb) {
                    Ok(f) => {
                        if f.bounding_radius() < best.bounding_radius() - 1e-9 {
                            best = f;
                        }
                    }
                    Err(_) => break,
                }
            }
        }
        Ok(best)
    }

    /// Half the diagonal of the image's bounding box.
    pub fn bounding_radius(&self) -> f64 {
        (0..3).map(|i| (self.hi[i] - self.lo[i]).powi(2)).sum::<f64>().sqrt() / 2.0
    }

    /// Image of a slab point, centred so the bounding box is symmetric about 0.
    pub fn apply(&self, p: &[f64; 3]) -> [f64; 3] {
        let half = SLAB / 2.0;
        let (a, ta) = serpentine(p[0], self.layers_a, self.run_a, RHO_A);
        let wa = p[2] - half;
        let na = [-ta[1], ta[0]];
        let x_a = a[0] + wa * na[0];
        let z_a = half + a[1] + wa * na[1];
        let (b, tb) = serpentine(p[1], self.layers_b, self.run_b, self.rho_b);
        let wb = x_a - self.mid_b;
        let nb = [-tb[1], tb[0]];
        let y = b[0] + wb * nb[0];
        let x = b[1] + wb * nb[1];
        let out = [x, y, z_a];
        [
            out[0] - (self.lo[0] + self.hi[0]) / 2.0,
            out[1] - (self.lo[1] + self.hi[1]) / 2.0,
            out[2] - (self.lo[2] + self.hi[2]) / 2.0,
        ]
    }

    /// Slab position of grid vertex `(i, j)`.
    pub fn slab_point(i: usize, j: usize) -> [f64; 3] {
        [SPACING * (i as f64 + 0.5), SPACING * (j as f64 + 0.5), SLAB / 2.0]
    }

    pub fn slab_extent(&self) -> [f64; 3] {
        let w = SPACING * self.side as f64;
        [w, w, SLAB]
    }
}

#[derive(Clone, Debug)]
pub struct FoldedGrid {
    pub embedding: EmbeddedComplex,
    pub fold: FoldMap,
    /// Radius of a ball about the origin containing the image.
    pub radius: f64,
    pub thickness: f64,
}

fn place_grid(side: usize, n: usize, fold: &FoldMap) -> Result<EmbeddedComplex> {
    let g = grid_graph(side)?;
    let coords = (0..side * side)
        .map(|v| {
            let q = fold.apply(&FoldMap::slab_point(v / side, v % side));
            let mut c = q.to_vec();
            c.resize(n, 0.0);
            c
        })
        .collect();
    EmbeddedComplex::new(g, coords)
}

/// Embed the `S x S` grid graph with thickness at least 1 inside a ball of
/// radius `O(S^{2/3})`, by laying it out in a slab and folding.
pub fn folded_grid_embedding(side: usize, n: usize) -> Result<FoldedGrid> {
    if n < 3 {
        return Err(param("folding needs ambient dimension at least 3"));
    }
    let fold = FoldMap::best(side)?;
    folded_grid_with(side, n, fold)
}

/// As [`folded_grid_embedding`] with explicit fold parameters.
pub fn folded_grid_with(side: usize, n: usize, fold: FoldMap) -> Result<FoldedGrid> {
    if n < 3 {
        return Err(param("folding needs ambient dimension at least 3"));
    }
    if fold.side != side {
        return Err(param("fold was built for a different grid side"));
    }
    let embedding = place_grid(side, n, &fold)?;
    let thickness = combinatorial_thickness(&embedding).value;
    if thickness < 1.0 {
        return Err(Error::Construction(format!("folded grid thickness {thickness} below 1")));
    }
    let radius = embedding.radius();
    Ok(FoldedGrid { embedding, fold, radius, thickness })
}

#[derive(Clone, Debug)]
pub struct RetractionEmbedding {
    /// Embedded grid subgraph with the same first Betti number as the input.
    pub embedding: EmbeddedComplex,
    pub b1: usize,
    pub grid_side: usize,
    pub radius: f64,
    pub strong_thickness: f64,
}

/// Embed a connected graph up to homotopy: a grid subgraph with the same
/// first Betti number, placed by the folded grid, scaled so its strong
/// thickness is at least 1.
pub fn retraction_embed_graph(g: &SimplicialComplex, n: usize) -> Result<RetractionEmbedding> {
    if g.dim() > 1 {
        return Err(Error::Structure("input must be a graph".into()));
    }
    if g.components() != 1 {
        return Err(Error::Structure("graph must be connected".into()));
    }
    let b1 = betti_gf2(g).get(1).copied().unwrap_or(0);
    let side = ((b1 as f64).sqrt().ceil() as usize + 1).max(2);
    let full = grid_graph(side)?;
    let mut keep: Vec<Vec<usize>> = full.edges().to_vec();
    let mut cycles = (side - 1) * (side - 1);
    let mut i = keep.len();
    while cycles > b1 && i > 0 {
        i -= 1;
        let mut trial = keep.clone();
        trial.remove(i);
        let sub = SimplicialComplex::from_simplices(side * side, trial.clone())?;
        if sub.components() == 1 {
            keep = trial;
            cycles -= 1;
        }
    }
    if cycles != b1 {
        return Err(Error::Construction("could not thin the grid to the target Betti number".into()));
    }
    let folded = folded_grid_embedding(side, n)?;
    let mut embedding = folded.embedding.restrict(keep)?;
    let mut st = strong_combinatorial_thickness(&embedding).value;
    if st < 1.0 {
        embedding = embedding.scaled(1.0 / st);
        st = strong_combinatorial_thickness(&embedding).value;
    }
    let radius = embedding.radius();
    Ok(RetractionEmbedding { embedding, b1, grid_side: side, radius, strong_thickness: st })
}
