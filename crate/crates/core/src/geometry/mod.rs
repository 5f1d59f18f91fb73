//! Embedded complexes and the measurements taken on them.

pub mod dist;

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{shares_vertex, CellId, Refinement, SimplicialComplex};
use crate::error::{param, Error, Result};
use crate::linalg::{bbox, box_gap, dot, norm};
use crate::rng;

pub use dist::{hull_distance, min_enclosing_ball, minimax_point, point_simplex_distance};

/// A complex with a point of `R^n` for every vertex, extended linearly
/// over each simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedComplex {
    complex: SimplicialComplex,
    coords: Vec<Vec<f64>>,
    n: usize,
}

impl EmbeddedComplex {
    pub fn new(complex: SimplicialComplex, coords: Vec<Vec<f64>>) -> Result<Self> {
        if coords.len() != complex.vertex_count() {
            return Err(Error::Input(format!(
                "{} coordinates for {} vertices",
                coords.len(),
                complex.vertex_count()
            )));
        }
        let n = coords.first().map_or(0, |c| c.len());
        if n == 0 {
            return Err(Error::Input("ambient dimension must be positive".into()));
        }
        if coords.iter().any(|c| c.len() != n || c.iter().any(|x| !x.is_finite())) {
            return Err(Error::Input("coordinates must be finite and of equal length".into()));
        }
        Ok(EmbeddedComplex { complex, coords, n })
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    pub fn coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn vertex(&self, v: usize) -> &[f64] {
        &self.coords[v]
    }

    pub fn simplex_points(&self, id: CellId) -> Vec<&[f64]> {
        self.complex.face(id).iter().map(|&v| self.coords[v].as_slice()).collect()
    }

    /// Largest vertex norm; the image lies in the ball of this radius.
    pub fn radius(&self) -> f64 {
        self.coords.iter().map(|c| norm(c)).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> EmbeddedComplex {
        EmbeddedComplex {
            complex: self.complex.clone(),
            coords: self.coords.iter().map(|c| c.iter().map(|x| x * s).collect()).collect(),
            n: self.n,
        }
    }

    pub fn translated(&self, t: &[f64]) -> EmbeddedComplex {
        EmbeddedComplex {
            complex: self.complex.clone(),
            coords: self.coords.iter().map(|c| c.iter().zip(t).map(|(x, y)| x + y).collect()).collect(),
            n: self.n,
        }
    }

    /// Restriction to a subcomplex given by its top simplices.
    pub fn restrict(&self, simplices: Vec<Vec<usize>>) -> Result<EmbeddedComplex> {
        let sub = SimplicialComplex::from_simplices(self.complex.vertex_count(), simplices)?;
        EmbeddedComplex::new(sub, self.coords.clone())
    }
}

/// A piecewise-linear image of a complex: each closed face is the union
/// of one or more linear simplices. Measurements are taken with respect to
/// the faces of [`PlImage::complex`].
pub trait PlImage {
    fn complex(&self) -> &SimplicialComplex;
    fn ambient_dim(&self) -> usize;
    fn vertex(&self, v: usize) -> &[f64];
    /// Linear pieces whose union is the image of the closed face `id`.
    fn pieces(&self, id: CellId) -> Vec<Vec<&[f64]>>;
}

impl PlImage for EmbeddedComplex {
    fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }
    fn ambient_dim(&self) -> usize {
        self.n
    }
    fn vertex(&self, v: usize) -> &[f64] {
        &self.coords[v]
    }
    fn pieces(&self, id: CellId) -> Vec<Vec<&[f64]>> {
        vec![self.simplex_points(id)]
    }
}

/// A linear embedding of a subdivision, viewed as a PL map of the coarse
/// complex.
#[derive(Clone, Debug)]
pub struct RefinedEmbedding {
    pub coarse: SimplicialComplex,
    pub fine: EmbeddedComplex,
    pub refinement: Refinement,
    children: Vec<Vec<Vec<usize>>>,
    coarse_vertex: Vec<usize>,
}

impl RefinedEmbedding {
    pub fn new(coarse: SimplicialComplex, fine: EmbeddedComplex, refinement: Refinement) -> Result<Self> {
        if refinement.coarse_counts != coarse.counts() {
            return Err(Error::Input("refinement does not match the coarse complex".into()));
        }
        let mut children: Vec<Vec<Vec<usize>>> = coarse.counts().iter().map(|&n| vec![Vec::new(); n]).collect();
        let mut coarse_vertex = vec![usize::MAX; coarse.vertex_count()];
        for (d, list) in refinement.parent.iter().enumerate() {
            for (i, p) in list.iter().enumerate() {
                if p.dim == d {
                    children[p.dim][p.index].push(i);
                }
                if d == 0 && p.dim == 0 {
                    coarse_vertex[p.index] = fine.complex().faces(0)[i][0];
                }
            }
        }
        if coarse_vertex.iter().any(|&v| v == usize::MAX) {
            return Err(Error::Input("coarse vertex without fine counterpart".into()));
        }
        Ok(RefinedEmbedding { coarse, fine, refinement, children, coarse_vertex })
    }
}

impl PlImage for RefinedEmbedding {
    fn complex(&self) -> &SimplicialComplex {
        &self.coarse
    }
    fn ambient_dim(&self) -> usize {
        self.fine.ambient_dim()
    }
    fn vertex(&self, v: usize) -> &[f64] {
        self.fine.vertex(self.coarse_vertex[v])
    }
    fn pieces(&self, id: CellId) -> Vec<Vec<&[f64]>> {
        self.children[id.dim][id.index]
            .iter()
            .map(|&i| self.fine.simplex_points(CellId::new(id.dim, i)))
            .collect()
    }
}

struct Item<'a> {
    id: CellId,
    verts: &'a [usize],
    pieces: Vec<Vec<&'a [f64]>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

fn items<'a, E: PlImage>(e: &'a E) -> Vec<Item<'a>> {
    let c = e.complex();
    c.cell_ids()
        .map(|id| {
            let pieces = e.pieces(id);
            let all: Vec<&[f64]> = pieces.iter().flatten().copied().collect();
            let (lo, hi) = bbox(&all);
            Item { id, verts: c.face(id), pieces, lo, hi }
        })
        .collect()
}

fn item_distance(a: &Item, b: &Item, cutoff: f64) -> f64 {
    let mut best = f64::INFINITY;
    for p in &a.pieces {
        for q in &b.pieces {
            if a.pieces.len() * b.pieces.len() > 1 {
                let (plo, phi) = bbox(p);
                let (qlo, qhi) = bbox(q);
                if box_gap(&plo, &phi, &qlo, &qhi) >= best.min(cutoff) {
                    continue;
                }
            }
            best = best.min(hull_distance(p, q));
        }
    }
    best
}

/// Uniform hash grid over axis-aligned boxes.
struct BoxGrid {
    cell: f64,
    map: HashMap<Vec<i64>, Vec<usize>>,
}

impl BoxGrid {
    fn new(cell: f64, boxes: &[(&[f64], &[f64])]) -> Self {
        let mut map: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, (lo, hi)) in boxes.iter().enumerate() {
            for key in cells_in(lo, hi, cell, 0.0) {
                map.entry(key).or_default().push(i);
            }
        }
        BoxGrid { cell, map }
    }

    fn query(&self, lo: &[f64], hi: &[f64], pad: f64, out: &mut Vec<usize>) {
        for key in cells_in(lo, hi, self.cell, pad) {
            if let Some(v) = self.map.get(&key) {
                out.extend_from_slice(v);
            }
        }
    }

    fn cell_count(lo: &[f64], hi: &[f64], cell: f64, pad: f64) -> f64 {
        lo.iter()
            .zip(hi)
            .map(|(a, b)| (((b + pad) / cell).floor() - ((a - pad) / cell).floor() + 1.0).max(1.0))
            .product()
    }
}

fn cells_in(lo: &[f64], hi: &[f64], cell: f64, pad: f64) -> Vec<Vec<i64>> {
    let a: Vec<i64> = lo.iter().map(|x| ((x - pad) / cell).floor() as i64).collect();
    let b: Vec<i64> = hi.iter().map(|x| ((x + pad) / cell).floor() as i64).collect();
    let mut out = vec![a.clone()];
    for i in 0..a.len() {
        let mut next = Vec::new();
        for k in &out {
            for x in a[i]..=b[i] {
                let mut k2 = k.clone();
                k2[i] = x;
                next.push(k2);
            }
        }
        out = next;
    }
    out
}

/// Result of a thickness computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thickness {
    /// `+inf` when no admissible family exists.
    pub value: f64,
    /// Faces realising the minimum.
    pub witness: Vec<CellId>,
}

/// Minimum distance between images of closed faces that share no vertex.
pub fn combinatorial_thickness<E: PlImage>(e: &E) -> Thickness {
    let items = items(e);
    if items.len() < 2 {
        return Thickness { value: f64::INFINITY, witness: Vec::new() };
    }
    let mut best = f64::INFINITY;
    let mut witness = Vec::new();
    // seed the bound with a nearby pair of vertices
    let nv = e.complex().vertex_count();
    if nv >= 2 {
        best = crate::linalg::dist(e.vertex(0), e.vertex(1));
        witness = vec![CellId::new(0, 0), CellId::new(0, 1)];
    }
    let extents: Vec<f64> = items
        .iter()
        .map(|it| it.lo.iter().zip(&it.hi).map(|(a, b)| b - a).fold(0.0, f64::max))
        .collect();
    let mut ext_sorted: Vec<f64> = extents.iter().copied().filter(|x| *x > 0.0).collect();
    ext_sorted.sort_by(|a, b| a.total_cmp(b));
    let all: Vec<&[f64]> = items.iter().flat_map(|it| [it.lo.as_slice(), it.hi.as_slice()]).collect();
    let (glo, ghi) = bbox(&all);
    let diag = crate::linalg::dist(&glo, &ghi).max(1e-12);
    let typical = ext_sorted.get(ext_sorted.len() / 2).copied().unwrap_or(diag);
    let cell = typical.max(diag / (items.len() as f64).powf(1.0 / e.ambient_dim() as f64)).max(1e-12);
    let boxes: Vec<(&[f64], &[f64])> = items.iter().map(|it| (it.lo.as_slice(), it.hi.as_slice())).collect();
    let grid = BoxGrid::new(cell, &boxes);
    let mut stamp = vec![usize::MAX; items.len()];
    let mut cand = Vec::new();
    for (ia, a) in items.iter().enumerate() {
        cand.clear();
        let pad = if best.is_finite() { best } else { diag };
        if BoxGrid::cell_count(&a.lo, &a.hi, cell, pad) > items.len() as f64 {
            cand.extend(ia + 1..items.len());
        } else {
            grid.query(&a.lo, &a.hi, pad, &mut cand);
        }
        for &ib in &cand {
            if ib <= ia || stamp[ib] == ia {
                continue;
            }
            stamp[ib] = ia;
            let b = &items[ib];
            if shares_vertex(a.verts, b.verts) {
                continue;
            }
            if box_gap(&a.lo, &a.hi, &b.lo, &b.hi) >= best {
                continue;
            }
            let d = item_distance(a, b, best);
            if d < best {
                best = d;
                witness = vec![a.id, b.id];
            }
        }
    }
    Thickness { value: best, witness }
}

/// All pairs of faces sharing no vertex whose images lie within `r` of each
/// other, as `(a, b)` with `a < b` in [`SimplicialComplex::cell_ids`] order.
pub fn disjoint_pairs_within(e: &EmbeddedComplex, r: f64) -> Vec<(CellId, CellId)> {
    let items = items(e);
    if items.len() < 2 {
        return Vec::new();
    }
    let all: Vec<&[f64]> = items.iter().flat_map(|it| [it.lo.as_slice(), it.hi.as_slice()]).collect();
    let (glo, ghi) = bbox(&all);
    let diag = crate::linalg::dist(&glo, &ghi).max(1e-12);
    let cell = r.max(diag / (items.len() as f64).powf(1.0 / e.ambient_dim() as f64)).max(1e-12);
    let boxes: Vec<(&[f64], &[f64])> = items.iter().map(|it| (it.lo.as_slice(), it.hi.as_slice())).collect();
    let grid = BoxGrid::new(cell, &boxes);
    let mut stamp = vec![usize::MAX; items.len()];
    let mut cand = Vec::new();
    let mut out = Vec::new();
    for (ia, a) in items.iter().enumerate() {
        cand.clear();
        grid.query(&a.lo, &a.hi, r, &mut cand);
        cand.sort_unstable();
        for &ib in &cand {
            if ib <= ia || stamp[ib] == ia {
                continue;
            }
            stamp[ib] = ia;
            let b = &items[ib];
            if shares_vertex(a.verts, b.verts) || box_gap(&a.lo, &a.hi, &b.lo, &b.hi) > r {
                continue;
            }
            if item_distance(a, b, f64::INFINITY) <= r {
                out.push((a.id, b.id));
            }
        }
    }
    out
}

/// Families of faces in which every proper subfamily has a common vertex
/// but the whole family does not, of sizes `3..=max_size`. Larger
/// families never bind tighter than their minimal subfamilies.
pub fn minimal_families(c: &SimplicialComplex, max_size: usize) -> Vec<Vec<CellId>> {
    let stars = c.vertex_stars();
    let ids: Vec<CellId> = c.cell_ids().collect();
    let pos: HashMap<CellId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut out = Vec::new();
    for (ia, &a) in ids.iter().enumerate() {
        let mut nbrs: Vec<usize> = c
            .face(a)
            .iter()
            .flat_map(|&v| stars[v].iter().map(|id| pos[id]))
            .filter(|&j| j > ia)
            .collect();
        nbrs.sort_unstable();
        nbrs.dedup();
        let mut fam = vec![ia];
        extend_family(c, &ids, &nbrs, 0, &mut fam, max_size, &mut out);
    }
    out
}

fn extend_family(
    c: &SimplicialComplex,
    ids: &[CellId],
    nbrs: &[usize],
    start: usize,
    fam: &mut Vec<usize>,
    max_size: usize,
    out: &mut Vec<Vec<CellId>>,
) {
    if fam.len() >= 3 && is_minimal_family(c, ids, fam) {
        out.push(fam.iter().map(|&i| ids[i]).collect());
        return;
    }
    if fam.len() == max_size {
        return;
    }
    for k in start..nbrs.len() {
        let j = nbrs[k];
        if fam.iter().all(|&i| shares_vertex(c.face(ids[i]), c.face(ids[j]))) {
            fam.push(j);
            // only keep growing while the family still has a common vertex
            if common_vertex(c, ids, fam) || fam.len() >= 3 {
                extend_family(c, ids, nbrs, k + 1, fam, max_size, out);
            }
            fam.pop();
        }
    }
}

fn common_vertex(c: &SimplicialComplex, ids: &[CellId], fam: &[usize]) -> bool {
    let first = c.face(ids[fam[0]]);
    first.iter().any(|v| fam[1..].iter().all(|&i| c.face(ids[i]).binary_search(v).is_ok()))
}

fn is_minimal_family(c: &SimplicialComplex, ids: &[CellId], fam: &[usize]) -> bool {
    if common_vertex(c, ids, fam) {
        return false;
    }
    (0..fam.len()).all(|skip| {
        let sub: Vec<usize> = fam.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &x)| x).collect();
        common_vertex(c, ids, &sub)
    })
}

/// Largest `T` such that the `T`-neighbourhoods of the images of any family
/// of at most `k+2` closed faces with no common vertex fail to meet, i.e.
/// the minimum over such families of `min_x max_j dist(x, face_j)`.
/// A pair of faces at distance `d` contributes `d / 2`.
pub fn strong_combinatorial_thickness(e: &EmbeddedComplex) -> Thickness {
    let pair = combinatorial_thickness(e);
    let mut best = pair.value / 2.0;
    let mut witness = pair.witness.clone();
    let k = e.complex().dim();
    for fam in minimal_families(e.complex(), k + 2) {
        let simplices: Vec<Vec<&[f64]>> = fam.iter().map(|&id| e.simplex_points(id)).collect();
        // half the largest pairwise distance bounds the minimax from below
        let mut lower: f64 = 0.0;
        for i in 0..simplices.len() {
            for j in i + 1..simplices.len() {
                lower = lower.max(hull_distance(&simplices[i], &simplices[j]) / 2.0);
            }
        }
        if lower >= best {
            continue;
        }
        let (val, _) = minimax_point(&simplices, 1e-9);
        if val < best {
            best = val;
            witness = fam;
        }
    }
    Thickness { value: best, witness }
}

/// Affine hyperplane `{x : <normal, x> = offset}` with a unit normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Hyperplane {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        if ((norm(&normal)) - 1.0).abs() > 1e-12 {
            return Err(param("hyperplane normal must have unit length"));
        }
        if !offset.is_finite() {
            return Err(param("hyperplane offset must be finite"));
        }
        Ok(Hyperplane { normal, offset })
    }

    pub fn signed(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossings {
    /// Closed top-dimensional faces whose image meets the hyperplane.
    pub total: usize,
    /// Size of a greedy vertex-disjoint subfamily of those faces.
    pub independent: usize,
    pub witness: Vec<CellId>,
}

pub fn hyperplane_crossings<E: PlImage>(e: &E, h: &Hyperplane) -> Result<Crossings> {
    if h.normal.len() != e.ambient_dim() {
        return Err(param("hyperplane dimension does not match the embedding"));
    }
    let c = e.complex();
    let k = c.dim();
    let mut used = vec![false; c.vertex_count()];
    let (mut total, mut witness) = (0usize, Vec::new());
    for i in 0..c.count(k) {
        let id = CellId::new(k, i);
        let meets = e.pieces(id).iter().any(|p| {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for x in p {
                let s = h.signed(x);
                lo = lo.min(s);
                hi = hi.max(s);
            }
            lo <= 0.0 && hi >= 0.0
        });
        if !meets {
            continue;
        }
        total += 1;
        let verts = c.face(id);
        if verts.iter().all(|&v| !used[v]) {
            verts.iter().for_each(|&v| used[v] = true);
            witness.push(id);
        }
    }
    Ok(Crossings { total, independent: witness.len(), witness })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BisectingSweep {
    pub independent: usize,
    pub total: usize,
    pub direction: Vec<f64>,
    pub offset: f64,
    pub witness: Vec<CellId>,
}

/// For each direction, place the hyperplane at the smallest offset leaving
/// at least half of the vertices on each closed side, count crossings there
/// and keep the direction with the most independent crossings.
pub fn bisecting_sweep<E: PlImage>(e: &E, directions: &[Vec<f64>]) -> Result<BisectingSweep> {
    if directions.is_empty() {
        return Err(param("need at least one direction"));
    }
    let nv = e.complex().vertex_count();
    if nv == 0 {
        return Err(Error::Input("empty complex".into()));
    }
    let mut best: Option<BisectingSweep> = None;
    for dir in directions {
        let nrm = norm(dir);
        if dir.len() != e.ambient_dim() || nrm < 1e-12 {
            return Err(param("direction must be a nonzero vector of the ambient dimension"));
        }
        let u: Vec<f64> = dir.iter().map(|x| x / nrm).collect();
        let mut proj: Vec<f64> = (0..nv).map(|v| dot(&u, e.vertex(v))).collect();
        proj.sort_by(|a, b| a.total_cmp(b));
        let offset = proj[(nv + 1) / 2 - 1];
        let h = Hyperplane { normal: u.clone(), offset };
        let cr = hyperplane_crossings(e, &h)?;
        if best.as_ref().map_or(true, |b| cr.independent > b.independent) {
            best = Some(BisectingSweep {
                independent: cr.independent,
                total: cr.total,
                direction: u,
                offset,
                witness: cr.witness,
            });
        }
    }
    Ok(best.unwrap())
}

/// `m` seeded uniformly random unit directions in `R^n`.
pub fn random_directions(n: usize, m: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng::stream(seed, 0x6469_7273);
    (0..m).map(|_| rng::unit_vector(&mut r, n)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    /// Half-width of the binomial 95% interval.
    pub ci95: f64,
    pub samples: usize,
}

/// Spatial index answering "is x within T of the image" queries.
pub struct NeighborhoodIndex<'a> {
    t: f64,
    cell: f64,
    pieces: Vec<Vec<&'a [f64]>>,
    map: HashMap<Vec<i64>, Vec<usize>>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl<'a> NeighborhoodIndex<'a> {
    pub fn new<E: PlImage>(e: &'a E, t: f64) -> Self {
        let c = e.complex();
        let mut pieces = Vec::new();
        for id in c.cell_ids() {
            // lower faces are covered by the top pieces containing them,
            // except for faces that are maximal
            pieces.extend(e.pieces(id));
        }
        let all: Vec<&[f64]> = pieces.iter().flatten().copied().collect();
        let (mut lo, mut hi) = bbox(&all);
        lo.iter_mut().for_each(|x| *x -= t);
        hi.iter_mut().for_each(|x| *x += t);
        let cell = t.max(1e-9);
        let rings = ((t / cell).ceil() as i64) + 1;
        let mut map: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (pi, p) in pieces.iter().enumerate() {
            let mut keys = std::collections::HashSet::new();
            for s in sample_simplex(p, cell) {
                let base: Vec<i64> = s.iter().map(|x| (x / cell).floor() as i64).collect();
                for k in neighbours(&base, rings) {
                    keys.insert(k);
                }
            }
            for k in keys {
                map.entry(k).or_default().push(pi);
            }
        }
        NeighborhoodIndex { t, cell, pieces, map, lo, hi }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let key: Vec<i64> = x.iter().map(|v| (v / self.cell).floor() as i64).collect();
        match self.map.get(&key) {
            Some(list) => list.iter().any(|&i| point_simplex_distance(x, &self.pieces[i]) <= self.t),
            None => false,
        }
    }
}

/// Points on a simplex forming a net of spacing at most `h`.
pub(crate) fn sample_simplex(p: &[&[f64]], h: f64) -> Vec<Vec<f64>> {
    let mut diam: f64 = 0.0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            diam = diam.max(crate::linalg::dist(p[i], p[j]));
        }
    }
    let m = ((diam / h).ceil() as usize).max(1);
    let k = p.len();
    let mut out = Vec::new();
    let mut idx = vec![0usize; k];
    fn rec(pos: usize, left: usize, idx: &mut Vec<usize>, p: &[&[f64]], m: usize, out: &mut Vec<Vec<f64>>) {
        if pos + 1 == idx.len() {
            idx[pos] = left;
            let mut x = vec![0.0; p[0].len()];
            for (w, q) in idx.iter().zip(p) {
                let wf = *w as f64 / m as f64;
                x.iter_mut().zip(q.iter()).for_each(|(a, b)| *a += wf * b);
            }
            out.push(x);
            return;
        }
        for a in 0..=left {
            idx[pos] = a;
            rec(pos + 1, left - a, idx, p, m, out);
        }
    }
    rec(0, m, &mut idx, p, m, &mut out);
    out
}

fn neighbours(base: &[i64], r: i64) -> Vec<Vec<i64>> {
    let lo: Vec<f64> = base.iter().map(|&b| (b - r) as f64).collect();
    let hi: Vec<f64> = base.iter().map(|&b| (b + r) as f64).collect();
    cells_in(&lo, &hi, 1.0, 0.0)
}

/// Monte Carlo volume of the closed `T`-neighbourhood of the image,
/// sampling uniformly in the bounding box inflated by `T`.
pub fn neighborhood_volume<E: PlImage>(e: &E, t: f64, samples: usize, seed: u64) -> Result<VolumeEstimate> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(param("T must be positive"));
    }
    if samples == 0 {
        return Err(param("samples must be positive"));
    }
    let idx = NeighborhoodIndex::new(e, t);
    let n = e.ambient_dim();
    let box_vol: f64 = idx.lo.iter().zip(&idx.hi).map(|(a, b)| b - a).product();
    const CHUNK: usize = 4096;
    let chunks = samples.div_ceil(CHUNK);
    let hits: usize = (0..chunks)
        .map(|ci| {
            let mut r = rng::stream(seed, ci as u64);
            let m = CHUNK.min(samples - ci * CHUNK);
            let mut x = vec![0.0; n];
            let mut h = 0;
            for _ in 0..m {
                for i in 0..n {
                    x[i] = r.gen_range(idx.lo[i]..idx.hi[i]);
                }
                if idx.contains(&x) {
                    h += 1;
                }
            }
            h
        })
        .sum();
    let p = hits as f64 / samples as f64;
    let half = 1.96 * (p * (1.0 - p) / samples as f64).sqrt();
    Ok(VolumeEstimate { value: p * box_vol, ci95: half * box_vol, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{cycle_graph, path_graph};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn embed(c: SimplicialComplex, pts: &[&[f64]]) -> EmbeddedComplex {
        EmbeddedComplex::new(c, pts.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn path_thickness() {
        let e = embed(path_graph(3).unwrap(), &[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[1.0, 1.0, 0.0]]);
        assert!((combinatorial_thickness(&e).value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn square_thickness() {
        let e = embed(cycle_graph(4).unwrap(), &[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]]);
        assert!((combinatorial_thickness(&e).value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_simplex_has_infinite_thickness() {
        let c = SimplicialComplex::from_simplices(2, vec![vec![0, 1]]).unwrap();
        let e = embed(c, &[&[0.0, 0.0], &[1.0, 0.0]]);
        // the two endpoints are disjoint faces
        assert!((combinatorial_thickness(&e).value - 1.0).abs() < 1e-12);
        let c = SimplicialComplex::from_simplices(1, vec![vec![0]]).unwrap();
        let e = embed(c, &[&[0.0, 0.0]]);
        assert!(combinatorial_thickness(&e).value.is_infinite());
    }

    #[test]
    fn strong_thickness_of_triangle_boundary() {
        let s3 = 3f64.sqrt();
        let e = embed(cycle_graph(3).unwrap(), &[&[0.0, 0.0], &[1.0, 0.0], &[0.5, s3 / 2.0]]);
        let st = strong_combinatorial_thickness(&e);
        assert!((st.value - 1.0 / (2.0 * s3)).abs() < 1e-6);
        assert_eq!(st.witness.len(), 3);
    }

    #[test]
    fn strong_thickness_of_far_triangles_is_the_inradius() {
        let c = SimplicialComplex::from_simplices(6, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        let e = embed(
            c,
            &[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 5.0], &[1.0, 0.0, 5.0], &[0.0, 1.0, 5.0]],
        );
        let st = strong_combinatorial_thickness(&e).value;
        // inside one triangle a vertex and its opposite edge are disjoint faces
        let pair = combinatorial_thickness(&e).value;
        assert!((pair - 0.5f64.sqrt()).abs() < 1e-9);
        // the three edges of either triangle form a family with no common vertex
        let inradius = (2.0 - 2f64.sqrt()) / 2.0;
        assert!(inradius < pair / 2.0);
        assert!((st - inradius).abs() < 1e-6);
    }

    #[test]
    fn crossing_through_shared_vertex() {
        let e = embed(path_graph(3).unwrap(), &[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[2.0, 0.0, 0.0]]);
        let h = Hyperplane::new(vec![1.0, 0.0, 0.0], 1.0).unwrap();
        let c = hyperplane_crossings(&e, &h).unwrap();
        assert_eq!((c.total, c.independent), (2, 1));
    }

    #[test]
    fn non_unit_normal_rejected() {
        assert!(Hyperplane::new(vec![2.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn volume_of_point_and_segment() {
        let c = SimplicialComplex::from_simplices(1, vec![vec![0]]).unwrap();
        let e = embed(c, &[&[0.0, 0.0, 0.0]]);
        let v = neighborhood_volume(&e, 1.0, 200_000, 1).unwrap();
        assert!((v.value - 4.0 * PI / 3.0).abs() <= v.ci95, "{v:?}");
        let e = embed(path_graph(2).unwrap(), &[&[-1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]]);
        let v = neighborhood_volume(&e, 1.0, 200_000, 2).unwrap();
        assert!((v.value - (2.0 * PI + 4.0 * PI / 3.0)).abs() <= v.ci95, "{v:?}");
    }

    fn brute_thickness(e: &EmbeddedComplex) -> f64 {
        let c = e.complex();
        let ids: Vec<CellId> = c.cell_ids().collect();
        let mut best = f64::INFINITY;
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                if !shares_vertex(c.face(ids[i]), c.face(ids[j])) {
                    best = best.min(hull_distance(&e.simplex_points(ids[i]), &e.simplex_points(ids[j])));
                }
            }
        }
        best
    }

    proptest! {
        #[test]
        fn grid_pruning_matches_brute_force(seed in 0u64..200, n in 4usize..12) {
            let g = crate::complex::random_bipartite_graph(n, 2, seed).unwrap();
            let mut r = rng::stream(seed, 9);
            let coords: Vec<Vec<f64>> = (0..g.vertex_count()).map(|_| rng::in_ball(&mut r, 3, 4.0)).collect();
            let e = EmbeddedComplex::new(g, coords).unwrap();
            let fast = combinatorial_thickness(&e).value;
            prop_assert!((fast - brute_thickness(&e)).abs() < 1e-12);
            let st = strong_combinatorial_thickness(&e).value;
            prop_assert!(st <= fast + 1e-12);
        }

        #[test]
        fn crossing_counts_are_consistent(seed in 0u64..100) {
            let g = crate::complex::random_bipartite_graph(6, 3, seed).unwrap();
            let mut r = rng::stream(seed, 3);
            let coords: Vec<Vec<f64>> = (0..g.vertex_count()).map(|_| rng::in_ball(&mut r, 3, 2.0)).collect();
            let e = EmbeddedComplex::new(g, coords).unwrap();
            let dirs = random_directions(3, 5, seed);
            for d in &dirs {
                let h = Hyperplane::new(d.clone(), 0.1).unwrap();
                let c = hyperplane_crossings(&e, &h).unwrap();
                let l = e.complex().local_degree();
                prop_assert!(c.independent <= c.total);
                prop_assert!(c.independent * (1 + 2 * l) >= c.total);
            }
        }

        #[test]
        fn scaling_scales_thickness(seed in 0u64..50, s in 0.1f64..10.0) {
            let g = cycle_graph(7).unwrap();
            let mut r = rng::stream(seed, 4);
            let coords: Vec<Vec<f64>> = (0..7).map(|_| rng::in_ball(&mut r, 3, 2.0)).collect();
            let e = EmbeddedComplex::new(g, coords).unwrap();
            let t = combinatorial_thickness(&e).value;
            let ts = combinatorial_thickness(&e.scaled(s)).value;
            prop_assert!((ts - s * t).abs() <= 1e-9 * (1.0 + s * t));
        }
    }
}
