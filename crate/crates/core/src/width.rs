//! Width machinery: fillings on dual cubical grids, filling-constant
//! estimates, lower bounds for combinatorial width and fiber counts of
//! explicit maps.
//!
//! A relative `(D-j)`-chain of the dual grid is stored by the primal
//! `j`-faces it corresponds to, so the relative boundary of a dual chain is
//! the coboundary of the matching primal cochain.

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{betti_gf2_cubical, grid_skeleton, CellId, CubeFace, CubicalComplex, SimplicialComplex};
use crate::error::{param, Error, Result};
use crate::geometry::point_simplex_distance;
use crate::gf2::xor_sorted;
use crate::rng;

/// Random base points tried by [`ff_fill`].
pub const FILL_CENTERS: usize = 8;
/// Largest grid handled by the brute-force filling.
pub const BRUTE_FORCE_FACES: usize = 200;

/// The cubical grid dual to `[0,S]^D`, relative to its boundary.
#[derive(Clone, Debug)]
pub struct DualGrid {
    d: usize,
    s: usize,
    primal: CubicalComplex,
}

/// A chain with GF(2) coefficients: a sorted set of cells of one dimension.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gf2Chain {
    pub dim: usize,
    pub cells: Vec<usize>,
}

impl Gf2Chain {
    /// Cells listed an even number of times cancel.
    pub fn new(dim: usize, cells: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = cells.into_iter().collect();
        v.sort_unstable();
        let mut out: Vec<usize> = Vec::with_capacity(v.len());
        for c in v {
            if out.last() == Some(&c) {
                out.pop();
            } else {
                out.push(c);
            }
        }
        Gf2Chain { dim, cells: out }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

impl DualGrid {
    pub fn new(d: usize, s: usize) -> Result<Self> {
        if !(1..=4).contains(&d) {
            return Err(param("D must be in 1..=4"));
        }
        if !(1..=32).contains(&s) {
            return Err(param("S must be in 1..=32"));
        }
        Ok(DualGrid { d, s, primal: grid_skeleton(d, d, s)? })
    }

    pub fn ambient_dim(&self) -> usize {
        self.d
    }

    pub fn side(&self) -> usize {
        self.s
    }

    /// The full primal grid `[0,S]^D`.
    pub fn primal(&self) -> &CubicalComplex {
        &self.primal
    }

    /// Dimension of the primal face matching a dual cell of dimension `m`.
    pub fn primal_dim(&self, m: usize) -> usize {
        self.d - m
    }

    pub fn count(&self, m: usize) -> usize {
        if m > self.d {
            0
        } else {
            self.primal.count(self.d - m)
        }
    }

    pub fn counts(&self) -> Vec<usize> {
        (0..=self.d).map(|m| self.count(m)).collect()
    }

    /// Primal face dual to cell `i` of dimension `m`.
    pub fn primal_face(&self, m: usize, i: usize) -> &CubeFace {
        &self.primal.faces(self.d - m)[i]
    }

    /// Centre of dual cell `(m, i)`, shared with its primal face.
    pub fn center(&self, m: usize, i: usize) -> Vec<f64> {
        self.primal_face(m, i).center()
    }

    /// Primal faces one dimension up that contain primal face `f`.
    fn cofaces(&self, f: &CubeFace) -> Vec<usize> {
        let mut out = Vec::new();
        for i in 0..self.d {
            if f.dirs >> i & 1 == 1 {
                continue;
            }
            let dirs = f.dirs | 1 << i;
            if f.base[i] > 0 {
                let mut b = f.base.clone();
                b[i] -= 1;
                out.push(self.primal.id_of(&CubeFace { base: b, dirs }).expect("grid face").index);
            }
            if (f.base[i] as usize) < self.s {
                out.push(self.primal.id_of(&CubeFace { base: f.base.clone(), dirs }).expect("grid face").index);
            }
        }
        out.sort_unstable();
        out
    }

    /// Boundary of dual cell `(m, i)` relative to the grid boundary.
    pub fn cell_boundary(&self, m: usize, i: usize) -> Vec<usize> {
        self.cofaces(self.primal_face(m, i))
    }

    /// Relative boundary of a dual chain.
    pub fn boundary(&self, c: &Gf2Chain) -> Gf2Chain {
        if c.dim == 0 {
            return Gf2Chain { dim: 0, cells: Vec::new() };
        }
        let mut acc: Vec<usize> = Vec::new();
        for &i in &c.cells {
            acc = xor_sorted(&acc, &self.cell_boundary(c.dim, i));
        }
        Gf2Chain { dim: c.dim - 1, cells: acc }
    }

    /// The primal cochain `(degree, support)` matching a dual chain.
    pub fn to_cochain(&self, c: &Gf2Chain) -> (usize, Vec<usize>) {
        (self.d - c.dim, c.cells.clone())
    }

    pub fn from_cochain(&self, degree: usize, support: &[usize]) -> Result<Gf2Chain> {
        if degree > self.d || support.iter().any(|&i| i >= self.primal.count(degree)) {
            return Err(Error::Input("cochain does not live on this grid".into()));
        }
        Ok(Gf2Chain::new(self.d - degree, support.iter().copied()))
    }

    fn check_chain(&self, c: &Gf2Chain) -> Result<()> {
        if c.dim > self.d || c.cells.iter().any(|&i| i >= self.count(c.dim)) {
            return Err(Error::Input("chain does not live on this grid".into()));
        }
        Ok(())
    }

    /// Cone of the primal face `f` to the vertex `p`, as primal faces of one
    /// dimension more: slide each coordinate in turn to `p`, stopping at the
    /// first axis along which `f` extends.
    fn cone(&self, f: &CubeFace, p: &[u32], mut visit: impl FnMut(usize)) {
        let mut base = f.base.clone();
        for i in 0..self.d {
            if f.dirs >> i & 1 == 1 {
                break;
            }
            let (lo, hi) = if p[i] < f.base[i] { (p[i], f.base[i]) } else { (f.base[i], p[i]) };
            let dirs = f.dirs | 1 << i;
            for m in lo..hi {
                base[i] = m;
                visit(self.primal.id_of(&CubeFace { base: base.clone(), dirs }).expect("grid face").index);
            }
            base[i] = p[i];
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Filling {
    pub chain: Gf2Chain,
    /// Primal vertex the cone was taken from.
    pub base: Vec<u32>,
    /// `|b| / |a|`, zero for an empty cycle.
    pub ratio: f64,
}

/// Fill a relative cycle `a` of the dual grid: cone it from the best of
/// [`FILL_CENTERS`] random lattice points along coordinate-ordered lattice
/// paths. Every output satisfies `boundary(b) = a` exactly and
/// `|b| <= D S |a|`.
pub fn ff_fill(y: &DualGrid, a: &Gf2Chain, seed: u64) -> Result<Filling> {
    y.check_chain(a)?;
    if a.dim >= y.d {
        return Err(Error::Input("cannot fill a top-dimensional dual chain".into()));
    }
    if !y.boundary(a).is_empty() {
        return Err(Error::Input("chain is not a relative cycle".into()));
    }
    if a.is_empty() {
        return Ok(Filling { chain: Gf2Chain::new(a.dim + 1, []), base: vec![0; y.d], ratio: 0.0 });
    }
    let j = y.d - a.dim;
    let alpha: HashSet<usize> = a.cells.iter().copied().collect();
    let mut g = rng::stream(seed, 0);
    let mut best: Option<(Vec<usize>, Vec<u32>)> = None;
    for _ in 0..FILL_CENTERS {
        let p: Vec<u32> = (0..y.d).map(|_| g.gen_range(0..=y.s as u32)).collect();
        let beta: Vec<usize> = y
            .primal
            .faces(j - 1)
            .iter()
            .enumerate()
            .filter(|(_, f)| {
                let mut parity = false;
                y.cone(f, &p, |t| parity ^= alpha.contains(&t));
                parity
            })
            .map(|(i, _)| i)
            .collect();
        if best.as_ref().map_or(true, |(b, _)| beta.len() < b.len()) {
            best = Some((beta, p));
        }
    }
    let (cells, base) = best.expect("at least one centre");
    let chain = Gf2Chain { dim: a.dim + 1, cells };
    if y.boundary(&chain) != *a {
        return Err(Error::Construction("filling failed the boundary check".into()));
    }
    let ratio = chain.len() as f64 / a.len() as f64;
    Ok(Filling { chain, base, ratio })
}

/// Smallest filling by exhaustive search over all fillings, for grids with
/// at most [`BRUTE_FORCE_FACES`] faces.
pub fn minimal_filling(y: &DualGrid, a: &Gf2Chain) -> Result<Gf2Chain> {
    if y.primal.counts().iter().sum::<usize>() > BRUTE_FORCE_FACES {
        return Err(Error::Budget { evaluations: 0, detail: format!("brute force limited to {BRUTE_FORCE_FACES} faces") });
    }
    let start = ff_fill(y, a, 0)?.chain;
    let j = y.d - a.dim;
    // fillings differ by (j-1)-cocycles: the dual cycles of dimension a.dim+1
    let n = y.primal.count(j - 1);
    let rows: Vec<Vec<usize>> = (0..n).map(|i| y.cofaces(&y.primal.faces(j - 1)[i])).collect();
    let kernel = gf2_kernel(&rows, y.primal.count(j));
    if kernel.len() > 24 {
        return Err(Error::Budget { evaluations: 0, detail: "cycle space too large for exhaustive search".into() });
    }
    let words = n.div_ceil(64);
    let to_bits = |cells: &[usize]| {
        let mut w = vec![0u64; words];
        for &c in cells {
            w[c / 64] ^= 1 << (c % 64);
        }
        w
    };
    let basis: Vec<Vec<u64>> = kernel.iter().map(|k| to_bits(k)).collect();
    let mut cur = to_bits(&start.cells);
    let weight = |w: &[u64]| w.iter().map(|x| x.count_ones() as usize).sum::<usize>();
    let mut best = (weight(&cur), cur.clone());
    for step in 1u64..(1u64 << basis.len()) {
        let flip = step.trailing_zeros() as usize;
        cur.iter_mut().zip(&basis[flip]).for_each(|(a, b)| *a ^= b);
        let w = weight(&cur);
        if w < best.0 {
            best = (w, cur.clone());
        }
    }
    let cells = (0..n).filter(|&i| best.1[i / 64] >> (i % 64) & 1 == 1);
    Ok(Gf2Chain::new(a.dim + 1, cells))
}

/// Basis of `{x : sum_{i in x} rows[i] = 0}` where each row is a sorted list
/// of column indices below `ncols`.
fn gf2_kernel(rows: &[Vec<usize>], ncols: usize) -> Vec<Vec<usize>> {
    // eliminate on [row | identity] and read the identity part of zero rows
    let n = rows.len();
    let cw = ncols.div_ceil(64).max(1);
    let iw = n.div_ceil(64).max(1);
    let mut m: Vec<(Vec<u64>, Vec<u64>)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut a = vec![0u64; cw];
            for &c in r {
                a[c / 64] ^= 1 << (c % 64);
            }
            let mut b = vec![0u64; iw];
            b[i / 64] |= 1 << (i % 64);
            (a, b)
        })
        .collect();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..n).find(|&r| m[r].0[col / 64] >> (col % 64) & 1 == 1) else { continue };
        m.swap(rank, p);
        let pivot = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && row.0[col / 64] >> (col % 64) & 1 == 1 {
                row.0.iter_mut().zip(&pivot.0).for_each(|(a, b)| *a ^= b);
                row.1.iter_mut().zip(&pivot.1).for_each(|(a, b)| *a ^= b);
            }
        }
        rank += 1;
    }
    m[rank..]
        .iter()
        .map(|(_, b)| (0..n).filter(|&i| b[i / 64] >> (i % 64) & 1 == 1).collect())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FillEstimate {
    /// Largest `|ff_fill(a)| / |a|` over the sampled cycles.
    pub value: f64,
    /// Samples whose cycle was non-empty.
    pub evaluated: usize,
}

/// Random primal `(j-1)`-cochain for sample `i`: scattered faces, a slab
/// anchored at the grid boundary, or a box, in rotation.
fn sample_cochain(y: &DualGrid, j: usize, i: usize, seed: u64) -> Vec<usize> {
    let mut g = rng::stream(seed, i as u64);
    let faces = y.primal.faces(j - 1);
    let s = y.s as u32;
    let mask = (1u32 << (j - 1)) - 1;
    let in_box = |lo: &[u32], hi: &[u32]| -> Vec<usize> {
        faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.dirs == mask && f.intervals().iter().zip(lo.iter().zip(hi)).all(|(iv, (&l, &h))| iv.0 >= l && iv.1 <= h))
            .map(|(k, _)| k)
            .collect()
    };
    match i % 3 {
        0 => {
            let count = g.gen_range(1..=y.s);
            (0..count).map(|_| g.gen_range(0..faces.len())).collect()
        }
        1 => {
            let t = g.gen_range(0..s);
            let lo = vec![0; y.d];
            let mut hi = vec![s; y.d];
            hi[y.d - 1] = t;
            in_box(&lo, &hi)
        }
        _ => {
            let mut lo = vec![0; y.d];
            let mut hi = vec![0; y.d];
            for a in 0..y.d {
                let u = g.gen_range(0..=s);
                let v = g.gen_range(0..=s);
                lo[a] = u.min(v);
                hi[a] = u.max(v);
            }
            in_box(&lo, &hi)
        }
    }
}

/// Largest filling ratio achieved by [`ff_fill`] over `samples` random
/// relative `(D-j)`-cycles of the dual of `[0,S]^D`, each the boundary of a
/// random union of dual `(D-j+1)`-cells.
pub fn fill_constant_estimate(d: usize, k: usize, s: usize, j: usize, samples: usize, seed: u64) -> Result<FillEstimate> {
    if !(1 <= j && j <= k && k <= d) {
        return Err(param("need 1 <= j <= k <= D"));
    }
    if samples == 0 {
        return Err(param("samples must be positive"));
    }
    let y = DualGrid::new(d, s)?;
    let ratios: Vec<Option<f64>> = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<Option<f64>> {
            let b = Gf2Chain::new(d - j + 1, sample_cochain(&y, j, i, seed));
            let a = y.boundary(&b);
            if a.is_empty() {
                return Ok(None);
            }
            Ok(Some(ff_fill(&y, &a, rng::derive(seed, i as u64))?.ratio))
        })
        .collect::<Result<_>>()?;
    let evaluated = ratios.iter().flatten().count();
    let value = ratios.iter().flatten().fold(0.0f64, |m, &r| m.max(r));
    Ok(FillEstimate { value, evaluated })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WidthMode {
    /// `h N / 2` from the expansion constant of a graph.
    Graph,
    /// `c_k N / prod Fill(j)` from filling constants.
    Filling,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthBound {
    pub value: f64,
    pub mode: WidthMode,
    /// Multiplicative constant used; the filling constant is a normalisation.
    pub constant: f64,
    pub vertices: usize,
}

/// Width over `R` of a graph with expansion constant `h` is at least `h N / 2`.
pub fn graph_width_lower_bound(g: &SimplicialComplex, h: f64) -> Result<WidthBound> {
    if g.dim() > 1 {
        return Err(Error::Structure("graph mode needs a complex of dimension at most 1".into()));
    }
    if !(h >= 0.0) || !h.is_finite() {
        return Err(param("expansion constant must be finite and non-negative"));
    }
    let n = g.vertex_count();
    Ok(WidthBound { value: h * n as f64 / 2.0, mode: WidthMode::Graph, constant: 0.5, vertices: n })
}

/// Normalised constant `c_k = 2^{-(k+1)}` of the filling-mode bound.
pub fn filling_constant_normalization(k: usize) -> f64 {
    0.5f64.powi(k as i32 + 1)
}

/// Width over `R^k` of a connected `k`-dimensional cubical complex with
/// vanishing intermediate cohomology is at least `c_k N / prod_j Fill(j)`.
pub fn filling_width_lower_bound(x: &CubicalComplex, fill: &[f64]) -> Result<WidthBound> {
    let k = x.dim();
    if k == 0 {
        return Err(Error::Structure("filling mode needs positive dimension".into()));
    }
    if fill.len() != k {
        return Err(param(format!("need {k} filling constants, got {}", fill.len())));
    }
    if fill.iter().any(|f| !(*f > 0.0) || !f.is_finite()) {
        return Err(param("filling constants must be positive"));
    }
    let b = betti_gf2_cubical(x);
    if b[0] != 1 {
        return Err(Error::Structure("complex is not connected".into()));
    }
    if let Some(j) = (1..k).find(|&j| b[j] != 0) {
        return Err(Error::Structure(format!("cohomology in degree {j} does not vanish")));
    }
    let n = x.count(0);
    let c = filling_constant_normalization(k);
    let prod: f64 = fill.iter().product();
    Ok(WidthBound { value: c * n as f64 / prod, mode: WidthMode::Filling, constant: c, vertices: n })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberCount {
    /// Most closed top faces met by one sampled fiber.
    pub count: usize,
    /// Where that fiber sits.
    pub point: Vec<f64>,
}

/// Count, over the centres of a `resolution^k` grid covering the image, the
/// closed `k`-faces whose image contains the point, and return the worst.
/// Each face is given as the simplices triangulating it.
fn max_fiber(faces: &[Vec<Vec<usize>>], f: &[Vec<f64>], resolution: usize) -> Result<FiberCount> {
    if resolution == 0 {
        return Err(param("resolution must be positive"));
    }
    let k = f.first().map_or(0, |v| v.len());
    if k == 0 || f.iter().any(|v| v.len() != k) {
        return Err(param("map values must share a positive dimension"));
    }
    if (resolution as f64).powi(k as i32) > (1u64 << 22) as f64 {
        return Err(param("resolution^k too large"));
    }
    let refs: Vec<&[f64]> = f.iter().map(|v| v.as_slice()).collect();
    let (lo, hi) = crate::linalg::bbox(&refs);
    // an irrational nudge keeps sample points off lattice values of the map
    let nudge = 1e-7 * (5f64.sqrt() - 1.0);
    let axis: Vec<Vec<f64>> = (0..k)
        .map(|a| {
            if hi[a] > lo[a] {
                let w = hi[a] - lo[a];
                (0..resolution).map(|i| lo[a] + (i as f64 + 0.5 + nudge) * w / resolution as f64).collect()
            } else {
                vec![lo[a]]
            }
        })
        .collect();
    let boxes: Vec<(Vec<f64>, Vec<f64>)> = faces
        .iter()
        .map(|simplices| {
            let pts: Vec<&[f64]> = simplices.iter().flatten().map(|&v| f[v].as_slice()).collect();
            crate::linalg::bbox(&pts)
        })
        .collect();
    let total: usize = axis.iter().map(|a| a.len()).product();
    let scale = lo.iter().zip(&hi).map(|(a, b)| (b - a).abs()).fold(1.0f64, f64::max);
    let tol = 1e-12 * scale;
    let best = (0..total)
        .into_par_iter()
        .map(|mut r| {
            let y: Vec<f64> = axis
                .iter()
                .map(|a| {
                    let v = a[r % a.len()];
                    r /= a.len();
                    v
                })
                .collect();
            let count = faces
                .iter()
                .zip(&boxes)
                .filter(|(simplices, (blo, bhi))| {
                    y.iter().zip(blo.iter().zip(bhi)).all(|(v, (l, h))| *v >= l - tol && *v <= h + tol)
                        && simplices.iter().any(|s| {
                            let pts: Vec<&[f64]> = s.iter().map(|&v| f[v].as_slice()).collect();
                            point_simplex_distance(&y, &pts) <= tol
                        })
                })
                .count();
            (count, y)
        })
        .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
        .expect("non-empty grid");
    Ok(FiberCount { count: best.0, point: best.1 })
}

/// Fiber count of the facewise-linear map with vertex values `f`, counting
/// closed faces of dimension `k = f[v].len()`.
pub fn pl_map_width_upper(x: &SimplicialComplex, f: &[Vec<f64>], resolution: usize) -> Result<FiberCount> {
    if f.len() != x.vertex_count() {
        return Err(param("one map value per vertex required"));
    }
    let k = f.first().map_or(0, |v| v.len());
    let faces: Vec<Vec<Vec<usize>>> = x.faces(k).iter().map(|s| vec![s.clone()]).collect();
    max_fiber(&faces, f, resolution)
}

/// As [`pl_map_width_upper`] for a cubical complex, each cube mapped by the
/// linear extension over its Kuhn triangulation.
pub fn pl_map_width_upper_cubical(x: &CubicalComplex, f: &[Vec<f64>], resolution: usize) -> Result<FiberCount> {
    if f.len() != x.count(0) {
        return Err(param("one map value per vertex required"));
    }
    let k = f.first().map_or(0, |v| v.len());
    let vid = |base: &[u32]| x.id_of(&CubeFace { base: base.to_vec(), dirs: 0 }).map(|c: CellId| c.index).expect("vertex");
    let faces: Vec<Vec<Vec<usize>>> = x
        .faces(k)
        .iter()
        .map(|c| {
            let axes: Vec<usize> = (0..x.ambient_dim()).filter(|&i| c.dirs >> i & 1 == 1).collect();
            permutations(&axes)
                .into_iter()
                .map(|perm| {
                    let mut b = c.base.clone();
                    let mut s = vec![vid(&b)];
                    for a in perm {
                        b[a] += 1;
                        s.push(vid(&b));
                    }
                    s
                })
                .collect()
        })
        .collect();
    max_fiber(&faces, f, resolution)
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let first = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, first);
            out.push(p);
        }
    }
    out
}

/// The coordinate projection `v -> v[axes]` on the vertices of a cubical complex.
pub fn coordinate_map(x: &CubicalComplex, axes: &[usize]) -> Vec<Vec<f64>> {
    x.faces(0).iter().map(|v| axes.iter().map(|&a| v.base[a] as f64).collect()).collect()
}
