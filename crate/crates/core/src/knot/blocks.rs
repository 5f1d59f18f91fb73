//! Axis-aligned blocks, random lattice decompositions of a block, and the
//! nested tree of blocks adapted to a knot.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{conformal_length, PlKnot};
use crate::error::{param, Error, Result};
use crate::rng;

/// Sub-blocks must have eccentricity strictly below this.
pub const MAX_ECCENTRICITY: f64 = 10.0;
/// Each face may cross the knot at most this many times the conformal length bound.
pub const CROSSING_FACTOR: f64 = 1000.0;
pub const MIN_BLOCKS: usize = 8;
pub const MAX_BLOCKS: usize = 2000;

/// Closed axis-aligned box. Face `f` lies on axis `f / 2`, on the low side
/// when `f` is even.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl Block {
    pub fn new(lo: [f64; 3], hi: [f64; 3]) -> Result<Self> {
        if (0..3).any(|a| !(hi[a] > lo[a]) || !lo[a].is_finite() || !hi[a].is_finite()) {
            return Err(param("block needs finite lo < hi on every axis"));
        }
        Ok(Block { lo, hi })
    }

    pub fn cube(center: [f64; 3], side: f64) -> Result<Self> {
        Block::new(center.map(|c| c - 0.5 * side), center.map(|c| c + 0.5 * side))
    }

    pub fn sides(&self) -> [f64; 3] {
        [0, 1, 2].map(|a| self.hi[a] - self.lo[a])
    }

    /// Sides in increasing order.
    pub fn sorted_sides(&self) -> [f64; 3] {
        let mut s = self.sides();
        s.sort_by(f64::total_cmp);
        s
    }

    /// Shortest side.
    pub fn l1(&self) -> f64 {
        self.sorted_sides()[0]
    }

    pub fn eccentricity(&self) -> f64 {
        let s = self.sorted_sides();
        s[2] / s[0]
    }

    pub fn volume(&self) -> f64 {
        self.sides().iter().product()
    }

    pub fn diameter(&self) -> f64 {
        self.sides().iter().map(|s| s * s).sum::<f64>().sqrt()
    }

    pub fn contains(&self, p: &[f64; 3]) -> bool {
        (0..3).all(|a| p[a] >= self.lo[a] && p[a] <= self.hi[a])
    }

    pub fn contains_interior(&self, p: &[f64; 3]) -> bool {
        (0..3).all(|a| p[a] > self.lo[a] && p[a] < self.hi[a])
    }

    /// Same center, every face moved inward by `margin`.
    pub fn shrunk(&self, margin: f64) -> Result<Block> {
        Block::new(self.lo.map(|x| x + margin), self.hi.map(|x| x - margin))
    }

    fn face_coord(&self, f: usize) -> f64 {
        if f % 2 == 0 {
            self.lo[f / 2]
        } else {
            self.hi[f / 2]
        }
    }

    fn meets_bbox(&self, lo: &[f64; 3], hi: &[f64; 3]) -> bool {
        (0..3).all(|a| lo[a] <= self.hi[a] && hi[a] >= self.lo[a])
    }
}

fn segment_bbox(a: &[f64; 3], b: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    ([0, 1, 2].map(|c| a[c].min(b[c])), [0, 1, 2].map(|c| a[c].max(b[c])))
}

/// Crossings of `k` with each face of `b`. A segment counts when it meets
/// the closed face rectangle at a parameter in `[0, 1)`, so a vertex on a
/// face is counted once.
pub fn count_face_crossings(b: &Block, k: &PlKnot) -> [usize; 6] {
    let mut out = [0; 6];
    for i in 0..k.len() {
        let (p, q) = k.segment(i);
        let (slo, shi) = segment_bbox(p, q);
        if !b.meets_bbox(&slo, &shi) {
            continue;
        }
        for (f, count) in out.iter_mut().enumerate() {
            if crosses_face(b, f, p, q) {
                *count += 1;
            }
        }
    }
    out
}

fn crosses_face(b: &Block, f: usize, p: &[f64; 3], q: &[f64; 3]) -> bool {
    let a = f / 2;
    let c = b.face_coord(f);
    let den = q[a] - p[a];
    if den == 0.0 {
        return false;
    }
    let t = (c - p[a]) / den;
    if !(0.0..1.0).contains(&t) {
        return false;
    }
    (0..3).filter(|&o| o != a).all(|o| {
        let x = p[o] + t * (q[o] - p[o]);
        x >= b.lo[o] && x <= b.hi[o]
    })
}

/// Parameter interval of segment `p q` inside `b`, with the face crossed on
/// entry and exit (`None` when that endpoint is inside).
struct Clip {
    t0: f64,
    t1: f64,
    enter: Option<usize>,
    exit: Option<usize>,
}

fn clip(b: &Block, p: &[f64; 3], q: &[f64; 3]) -> Option<Clip> {
    let (mut t0, mut t1) = (0.0, 1.0);
    let (mut enter, mut exit) = (None, None);
    for a in 0..3 {
        let d = q[a] - p[a];
        if d == 0.0 {
            if p[a] < b.lo[a] || p[a] > b.hi[a] {
                return None;
            }
            continue;
        }
        let (mut ta, mut tb) = ((b.lo[a] - p[a]) / d, (b.hi[a] - p[a]) / d);
        let (mut fa, mut fb) = (2 * a, 2 * a + 1);
        if d < 0.0 {
            std::mem::swap(&mut ta, &mut tb);
            std::mem::swap(&mut fa, &mut fb);
        }
        if ta > t0 {
            t0 = ta;
            enter = Some(fa);
        }
        if tb < t1 {
            t1 = tb;
            exit = Some(fb);
        }
    }
    (t0 <= t1).then_some(Clip { t0, t1, enter, exit })
}

/// Segments meeting `b`, and vertices inside it.
fn knot_in_block(b: &Block, k: &PlKnot) -> (Vec<usize>, Vec<usize>) {
    let segs = (0..k.len())
        .filter(|&i| {
            let (p, q) = k.segment(i);
            let (lo, hi) = segment_bbox(p, q);
            b.meets_bbox(&lo, &hi) && clip(b, p, q).is_some()
        })
        .collect();
    let verts = (0..k.len()).filter(|&i| b.contains(&k.points()[i])).collect();
    (segs, verts)
}

/// `b` meets `k` in nothing, in part of one edge, or in one vertex and
/// parts of its two edges.
fn simple_intersection(b: &Block, k: &PlKnot) -> bool {
    let (segs, verts) = knot_in_block(b, k);
    match (segs.len(), verts.len()) {
        (0, _) | (1, 0) => true,
        (2, 1) => {
            let v = verts[0];
            let prev = (v + k.len() - 1) % k.len();
            segs.contains(&v) && segs.contains(&prev)
        }
        _ => false,
    }
}

/// Every strand in the shell `b \ q` runs from a face of `b` to the
/// matching face of `q`, and no vertex lies in the shell.
fn clean_shell(b: &Block, q: &Block, k: &PlKnot) -> bool {
    if k.points().iter().any(|p| b.contains(p) && !q.contains_interior(p)) {
        return false;
    }
    (0..k.len()).all(|i| {
        let (p, r) = k.segment(i);
        let (lo, hi) = segment_bbox(p, r);
        if !b.meets_bbox(&lo, &hi) {
            return true;
        }
        let Some(cb) = clip(b, p, r) else { return true };
        let Some(cq) = clip(q, p, r) else { return false };
        cb.enter == cq.enter && cb.exit == cq.exit && cq.t0 < cq.t1 && cb.t0 < cb.t1
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub blocks: Vec<Block>,
    pub crossings: Vec<[usize; 6]>,
    /// Index of the accepted translation (0-based).
    pub attempt: usize,
    pub translation: [f64; 3],
}

fn cut_axis(lo: f64, hi: f64, offset: f64, h: f64) -> Vec<f64> {
    let mut cuts = vec![lo];
    let mut x = lo + offset;
    while x < hi {
        if x > lo {
            cuts.push(x);
        }
        x += h;
    }
    cuts.push(hi);
    cuts
}

/// Cut `q` by a randomly translated cubical lattice of spacing `L1(q)/2`,
/// retrying until every piece has eccentricity below 10, every face crosses
/// `k` at most `1000 * convol_bound` times and there are 8 to 2000 pieces.
pub fn block_decompose(q: &Block, k: &PlKnot, convol_bound: f64, seed: u64, retries: usize) -> Result<Decomposition> {
    if !(convol_bound > 0.0) {
        return Err(param("convol_bound must be positive"));
    }
    if q.eccentricity() >= MAX_ECCENTRICITY {
        return Err(param(format!("block eccentricity {} is not below 10", q.eccentricity())));
    }
    let limit = CROSSING_FACTOR * convol_bound;
    if count_face_crossings(q, k).iter().any(|&c| c as f64 > limit) {
        return Err(param("a face of the block crosses the knot too often"));
    }
    let h = 0.5 * q.l1();
    for attempt in 0..retries {
        let mut g = rng::stream(seed, attempt as u64);
        let tr: [f64; 3] = [0, 1, 2].map(|_| g.gen_range(0.0..h));
        let cuts: Vec<Vec<f64>> = (0..3).map(|a| cut_axis(q.lo[a], q.hi[a], tr[a], h)).collect();
        let count: usize = cuts.iter().map(|c| c.len() - 1).product();
        if !(MIN_BLOCKS..=MAX_BLOCKS).contains(&count) {
            continue;
        }
        let mut blocks = Vec::with_capacity(count);
        for x in cuts[0].windows(2) {
            for y in cuts[1].windows(2) {
                for z in cuts[2].windows(2) {
                    blocks.push(Block { lo: [x[0], y[0], z[0]], hi: [x[1], y[1], z[1]] });
                }
            }
        }
        if blocks.iter().any(|b| b.eccentricity() >= MAX_ECCENTRICITY) {
            continue;
        }
        let crossings: Vec<[usize; 6]> = blocks.iter().map(|b| count_face_crossings(b, k)).collect();
        if crossings.iter().flatten().any(|&c| c as f64 > limit) {
            continue;
        }
        return Ok(Decomposition { blocks, crossings, attempt, translation: tr });
    }
    Err(Error::Decomposition(format!(
        "no admissible lattice translation in {retries} attempts (convol_bound {convol_bound} may be too small)"
    )))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockNode {
    pub b: Block,
    pub q: Block,
    pub depth: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub terminal: bool,
    pub b_crossings: [usize; 6],
    pub q_crossings: [usize; 6],
    /// Face crossings of `b` and `q` within the bound.
    pub bounded_crossings: bool,
    /// No vertex in the shell; shell strands go face to matching face.
    pub clean_shell: bool,
    /// Terminal nodes meet the knot in at most one vertex and its edges.
    pub simple_leaf: bool,
    /// Between 8 and 2000 children for internal nodes.
    pub bounded_split: bool,
}

impl BlockNode {
    pub fn verified(&self) -> bool {
        self.bounded_crossings && self.clean_shell && self.simple_leaf && self.bounded_split
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockTree {
    pub root_cube: Block,
    pub nodes: Vec<BlockNode>,
    pub convol_bound: f64,
    pub epsilon: f64,
    pub max_depth: usize,
    /// Relative gap between `vol(Q0)` and the sum of shell volumes plus
    /// terminal `q` volumes.
    pub partition_error: f64,
    /// Largest number of tree neighbours of any node.
    pub max_degree: usize,
}

impl BlockTree {
    pub fn all_verified(&self) -> bool {
        self.nodes.iter().all(BlockNode::verified) && self.partition_error <= 1e-6 && self.max_degree <= MAX_BLOCKS + 1
    }

    pub fn leaves(&self) -> impl Iterator<Item = &BlockNode> {
        self.nodes.iter().filter(|n| n.terminal)
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeOptions {
    pub retries: usize,
    /// Ball evaluations for the conformal length bound.
    pub convol_budget: u64,
    /// `convol_bound = factor * conformal length lower bound`.
    pub convol_factor: f64,
    pub max_nodes: usize,
}

impl Default for TreeOptions {
    fn default() -> Self {
        TreeOptions { retries: 100, convol_budget: 4000, convol_factor: 1.2, max_nodes: 500_000 }
    }
}

/// Shrink `b` by a margin halved from `1e-3 * L1(b)` until the shell is clean.
fn shrink_to_clean(b: &Block, k: &PlKnot) -> Result<Block> {
    let mut margin = 1e-3 * b.l1();
    while margin > 1e-12 * b.l1() {
        let q = b.shrunk(margin)?;
        if q.eccentricity() < MAX_ECCENTRICITY && clean_shell(b, &q, k) {
            return Ok(q);
        }
        margin *= 0.5;
    }
    Err(Error::Decomposition(format!("no clean shell for block {b:?}")))
}

/// Nested block tree with default options.
pub fn nested_block_tree(k: &PlKnot, seed: u64) -> Result<BlockTree> {
    nested_block_tree_with(k, seed, &TreeOptions::default())
}

/// Root cube around `k`, then repeated lattice decompositions. A node stops
/// once its block meets `k` simply or the depth cap is reached; the cap is
/// the least `D` with `2^-D diam(Q0)` below the knot's feature size.
pub fn nested_block_tree_with(k: &PlKnot, seed: u64, opts: &TreeOptions) -> Result<BlockTree> {
    if !(opts.convol_factor >= 1.0) {
        return Err(param("convol_factor must be at least 1"));
    }
    let convol_bound = opts.convol_factor * conformal_length(k, opts.convol_budget, seed)?.lower;
    let limit = CROSSING_FACTOR * convol_bound;
    let (lo, hi) = k.bbox();
    let center = [0, 1, 2].map(|a| 0.5 * (lo[a] + hi[a]));
    let extent = (0..3).map(|a| hi[a] - lo[a]).fold(0.0, f64::max);
    let root_cube = Block::cube(center, 1.1 * extent)?;
    let epsilon = k.feature_size();
    let mut max_depth = 0;
    while root_cube.diameter() * 0.5f64.powi(max_depth as i32) >= epsilon {
        max_depth += 1;
    }

    let crossings = count_face_crossings(&root_cube, k);
    let mut nodes = vec![BlockNode {
        b: root_cube,
        q: root_cube,
        depth: 0,
        parent: None,
        children: Vec::new(),
        terminal: false,
        b_crossings: crossings,
        q_crossings: crossings,
        bounded_crossings: crossings.iter().all(|&c| c as f64 <= limit),
        clean_shell: true,
        simple_leaf: true,
        bounded_split: true,
    }];
    let mut next = 0;
    while next < nodes.len() {
        let id = next;
        next += 1;
        let simple = simple_intersection(&nodes[id].b, k);
        if id > 0 && (simple || nodes[id].depth >= max_depth) {
            nodes[id].terminal = true;
            nodes[id].simple_leaf = simple;
            continue;
        }
        let dec = block_decompose(&nodes[id].q, k, convol_bound, rng::derive(seed, id as u64), opts.retries)?;
        nodes[id].bounded_split = (MIN_BLOCKS..=MAX_BLOCKS).contains(&dec.blocks.len());
        if nodes.len() + dec.blocks.len() > opts.max_nodes {
            return Err(Error::Budget {
                evaluations: nodes.len() as u64,
                detail: format!("block tree exceeds {} nodes", opts.max_nodes),
            });
        }
        for (b, bc) in dec.blocks.into_iter().zip(dec.crossings) {
            let q = shrink_to_clean(&b, k)?;
            let qc = count_face_crossings(&q, k);
            let child = nodes.len();
            nodes[id].children.push(child);
            nodes.push(BlockNode {
                b,
                q,
                depth: nodes[id].depth + 1,
                parent: Some(id),
                children: Vec::new(),
                terminal: false,
                b_crossings: bc,
                q_crossings: qc,
                bounded_crossings: bc.iter().chain(&qc).all(|&c| c as f64 <= limit),
                clean_shell: clean_shell(&b, &q, k),
                simple_leaf: true,
                bounded_split: true,
            });
        }
    }

    let covered: f64 = nodes
        .iter()
        .skip(1)
        .map(|n| n.b.volume() - n.q.volume() + if n.terminal { n.q.volume() } else { 0.0 })
        .sum();
    let partition_error = (covered - root_cube.volume()).abs() / root_cube.volume();
    let max_degree = nodes.iter().map(|n| n.children.len() + usize::from(n.parent.is_some())).max().unwrap_or(0);
    Ok(BlockTree { root_cube, nodes, convol_bound, epsilon, max_depth, partition_error, max_degree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knot::{regular_polygon, torus_knot};
    use proptest::prelude::*;

    fn unit() -> Block {
        Block::new([0.0; 3], [1.0; 3]).unwrap()
    }

    #[test]
    fn block_shape() {
        let b = Block::new([0.0; 3], [1.0, 2.0, 4.0]).unwrap();
        assert_eq!(b.eccentricity(), 4.0);
        assert_eq!(b.l1(), 1.0);
        assert_eq!(b.volume(), 8.0);
        assert!(Block::new([0.0; 3], [1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn face_crossings_of_a_ring_through_a_cube() {
        // Square loop piercing the x faces of the unit cube once each.
        let k = PlKnot::new(vec![[-1.0, 0.5, 0.5], [2.0, 0.5, 0.5], [2.0, 3.0, 0.5], [-1.0, 3.0, 0.5]]).unwrap();
        let c = count_face_crossings(&unit(), &k);
        // The knot was rotated, so compare against a direct recount.
        let direct: usize = (0..6).map(|f| (0..4).filter(|&i| crosses_face(&unit(), f, k.segment(i).0, k.segment(i).1)).count()).sum();
        assert_eq!(c.iter().sum::<usize>(), direct);
    }

    #[test]
    fn clipping_reports_faces() {
        let c = clip(&unit(), &[-1.0, 0.5, 0.5], &[2.0, 0.5, 0.5]).unwrap();
        assert_eq!((c.enter, c.exit), (Some(0), Some(1)));
        assert!((c.t0 - 1.0 / 3.0).abs() < 1e-12 && (c.t1 - 2.0 / 3.0).abs() < 1e-12);
        assert!(clip(&unit(), &[2.0, 2.0, 2.0], &[3.0, 2.0, 2.0]).is_none());
        let inside = clip(&unit(), &[0.5, 0.5, 0.5], &[2.0, 0.5, 0.5]).unwrap();
        assert_eq!(inside.enter, None);
    }

    #[test]
    fn decomposition_away_from_the_knot() {
        let k = regular_polygon(12, 1.0).unwrap();
        let q = Block::new([10.0; 3], [13.0, 14.0, 15.0]).unwrap();
        let d = block_decompose(&q, &k, 1.0, 4, 100).unwrap();
        assert!((MIN_BLOCKS..=MAX_BLOCKS).contains(&d.blocks.len()));
        assert!(d.crossings.iter().flatten().all(|&c| c == 0));
        let vol: f64 = d.blocks.iter().map(Block::volume).sum();
        assert!((vol - q.volume()).abs() < 1e-9 * q.volume());
        assert!(d.blocks.iter().all(|b| b.sorted_sides()[2] <= 0.5 * q.l1() * (1.0 + 1e-12)));
    }

    #[test]
    fn bad_decomposition_inputs() {
        let k = regular_polygon(12, 1.0).unwrap();
        let thin = Block::new([0.0; 3], [1.0, 1.0, 20.0]).unwrap();
        assert!(matches!(block_decompose(&thin, &k, 1.0, 0, 10), Err(Error::Parameter(_))));
        assert!(matches!(block_decompose(&unit(), &k, 0.0, 0, 10), Err(Error::Parameter(_))));
    }

    #[test]
    fn impossible_crossing_bound_exhausts_retries() {
        let k = torus_knot(2, 3, 10.0, 2.0, 120).unwrap();
        let (lo, hi) = k.bbox();
        let q = Block::cube([0, 1, 2].map(|a| 0.5 * (lo[a] + hi[a])), 30.0).unwrap();
        // Faces of the cube see nothing, but inner lattice faces cut the knot.
        assert!(matches!(block_decompose(&q, &k, 1e-4, 0, 20), Err(Error::Decomposition(_))));
    }

    #[test]
    fn polygon_tree_is_shallow_and_verified() {
        let k = regular_polygon(12, 5.0).unwrap();
        let t = nested_block_tree(&k, 3).unwrap();
        assert!(t.all_verified(), "partition {}", t.partition_error);
        assert!(t.depth() <= t.max_depth);
        for n in t.nodes.iter().filter(|n| !n.terminal) {
            assert!((MIN_BLOCKS..=MAX_BLOCKS).contains(&n.children.len()));
        }
    }

    #[test]
    fn trefoil_tree_is_verified() {
        let k = torus_knot(2, 3, 10.0, 2.0, 120).unwrap();
        let t = nested_block_tree(&k, 1).unwrap();
        assert!(t.all_verified());
        assert!(t.partition_error < 1e-6);
        assert!(t.max_degree <= 2001);
        for leaf in t.leaves() {
            let (segs, verts) = knot_in_block(&leaf.b, &k);
            assert!(verts.len() <= 1 && segs.len() <= 2);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn decompositions_tile_the_block(sx in 1.0f64..3.0, sy in 1.0f64..3.0, sz in 1.0f64..3.0, seed in any::<u64>()) {
            let k = regular_polygon(8, 0.2).unwrap();
            let q = Block::new([5.0; 3], [5.0 + sx, 5.0 + sy, 5.0 + sz]).unwrap();
            if let Ok(d) = block_decompose(&q, &k, 1.0, seed, 100) {
                let vol: f64 = d.blocks.iter().map(Block::volume).sum();
                prop_assert!((vol - q.volume()).abs() < 1e-9 * q.volume());
                prop_assert!(d.blocks.iter().all(|b| b.eccentricity() < MAX_ECCENTRICITY));
            }
        }
    }
}
