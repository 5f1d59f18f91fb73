//! Branch-and-bound for the distortion of a polygonal knot.
//!
//! The search space is the set of unordered pairs of arc positions. A box is a
//! pair of pieces, each either a run of whole segments (bounded by the
//! bounding box of its vertices) or a sub-interval of one segment (bounded
//! exactly).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::PlKnot;
use crate::error::{param, Error, Result};
use crate::geometry::dist::segment_distance;
use crate::linalg::{box_gap, dist};

/// Default cap on processed pair boxes.
pub const DISTORTION_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distortion {
    pub lo: f64,
    pub hi: f64,
    pub evaluations: u64,
    /// Arc positions realising `lo` (or approaching it, at a vertex).
    pub witness: (f64, f64),
}

#[derive(Clone, Copy, Debug)]
struct Piece {
    /// Segments `seg..seg_end` are covered; a sub-segment piece has `seg_end = seg + 1`.
    seg: usize,
    seg_end: usize,
    a: f64,
    b: f64,
}

impl Piece {
    fn single(&self) -> bool {
        self.seg_end == self.seg + 1
    }

    fn same(&self, o: &Piece) -> bool {
        self.seg == o.seg && self.seg_end == o.seg_end && self.a == o.a && self.b == o.b
    }

    fn split(&self, k: &PlKnot) -> (Piece, Piece) {
        if self.single() {
            let mid = 0.5 * (self.a + self.b);
            (Piece { b: mid, ..*self }, Piece { a: mid, ..*self })
        } else {
            let mid = (self.seg + self.seg_end) / 2;
            let c = k.arc_position(mid);
            (Piece { seg_end: mid, b: c, ..*self }, Piece { seg: mid, a: c, ..*self })
        }
    }
}

/// Range min/max over knot vertices `0..=m` (vertex `m` is vertex 0 again).
struct SparseBox {
    lo: Vec<Vec<[f64; 3]>>,
    hi: Vec<Vec<[f64; 3]>>,
}

impl SparseBox {
    fn new(k: &PlKnot) -> Self {
        let mut base: Vec<[f64; 3]> = k.points().to_vec();
        base.push(k.points()[0]);
        let mut lo = vec![base.clone()];
        let mut hi = vec![base];
        let mut w = 1;
        while 2 * w <= lo[0].len() {
            let (pl, ph) = (lo.last().unwrap(), hi.last().unwrap());
            let n = pl.len() - w;
            let nl = (0..n).map(|i| [0, 1, 2].map(|c| pl[i][c].min(pl[i + w][c]))).collect();
            let nh = (0..n).map(|i| [0, 1, 2].map(|c| ph[i][c].max(ph[i + w][c]))).collect();
            lo.push(nl);
            hi.push(nh);
            w *= 2;
        }
        SparseBox { lo, hi }
    }

    /// Box of vertices `i..=j`.
    fn query(&self, i: usize, j: usize) -> ([f64; 3], [f64; 3]) {
        let len = j - i + 1;
        let lvl = (usize::BITS - 1 - len.leading_zeros()) as usize;
        let r = j + 1 - (1 << lvl);
        let (a, b) = (&self.lo[lvl], &self.hi[lvl]);
        ([0, 1, 2].map(|c| a[i][c].min(a[r][c])), [0, 1, 2].map(|c| b[i][c].max(b[r][c])))
    }
}

struct Search<'a> {
    k: &'a PlKnot,
    boxes: SparseBox,
    length: f64,
}

/// Largest value of `min(|x|, L - |x|)` for `x` in `[x0, x1]`, `-L <= x0 <= x1 <= L`.
fn max_tent(x0: f64, x1: f64, l: f64) -> f64 {
    let f = |x: f64| {
        let a = x.abs();
        a.min(l - a)
    };
    let h = 0.5 * l;
    if (x0..=x1).contains(&h) || (x0..=x1).contains(&-h) {
        h
    } else {
        f(x0).max(f(x1))
    }
}

impl Search<'_> {
    fn ratio(&self, s: f64, t: f64) -> f64 {
        let d = dist(&self.k.point_at(s), &self.k.point_at(t));
        if d <= 0.0 {
            return 0.0;
        }
        self.k.arc_distance(s, t) / d
    }

    fn piece_points(&self, p: &Piece) -> ([f64; 3], [f64; 3]) {
        (self.k.point_on_segment(p.seg, p.a), self.k.point_on_segment(p.seg, p.b))
    }

    /// Exact supremum for the two degenerate configurations, if `p`, `q`
    /// form one.
    fn exact(&self, p: &Piece, q: &Piece) -> Option<f64> {
        if !(p.single() && q.single()) {
            return None;
        }
        if p.seg == q.seg {
            return Some(1.0);
        }
        let m = self.k.len();
        let (first, second) = if (p.seg + 1) % m == q.seg {
            (p, q)
        } else if (q.seg + 1) % m == p.seg {
            (q, p)
        } else {
            return None;
        };
        let v = second.seg;
        let end_first = self.k.arc_position(first.seg + 1);
        if first.b == end_first && second.a == self.k.arc_position(v) {
            let phi = self.k.vertex_angle(v);
            return Some(1.0 / (0.5 * phi).sin());
        }
        None
    }

    fn upper(&self, p: &Piece, q: &Piece) -> f64 {
        if let Some(e) = self.exact(p, q) {
            return e;
        }
        let d = if p.single() && q.single() {
            let (a, b) = self.piece_points(p);
            let (c, e) = self.piece_points(q);
            segment_distance(&a, &b, &c, &e)
        } else {
            let (alo, ahi) = self.piece_box(p);
            let (blo, bhi) = self.piece_box(q);
            box_gap(&alo, &ahi, &blo, &bhi)
        };
        if d <= 0.0 {
            return f64::INFINITY;
        }
        max_tent(q.a - p.b, q.b - p.a, self.length) / d
    }

    fn piece_box(&self, p: &Piece) -> ([f64; 3], [f64; 3]) {
        if p.single() {
            let (a, b) = self.piece_points(p);
            ([0, 1, 2].map(|c| a[c].min(b[c])), [0, 1, 2].map(|c| a[c].max(b[c])))
        } else {
            self.boxes.query(p.seg, p.seg_end)
        }
    }
}

struct Node {
    ub: f64,
    seq: u64,
    p: Piece,
    q: Piece,
}

impl PartialEq for Node {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Node {
    fn cmp(&self, o: &Self) -> Ordering {
        self.ub.total_cmp(&o.ub).then(o.seq.cmp(&self.seq))
    }
}

/// Distortion of `k` to relative tolerance `tol`, with the default budget.
pub fn distortion(k: &PlKnot, tol: f64) -> Result<Distortion> {
    distortion_with_budget(k, tol, DISTORTION_BUDGET)
}

/// Returns `lo <= distortion <= hi` with `hi <= lo * (1 + tol)`, or a budget
/// error carrying the interval reached so far.
pub fn distortion_with_budget(k: &PlKnot, tol: f64, budget: u64) -> Result<Distortion> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(param("tolerance must be positive"));
    }
    let s = Search { k, boxes: SparseBox::new(k), length: k.total_length() };
    let mut lo = 1.0;
    let mut witness = (0.0, k.segment_length(0) * 0.5);
    for v in 0..k.len() {
        let r = 1.0 / (0.5 * k.vertex_angle(v)).sin();
        if r > lo {
            lo = r;
            witness = (k.arc_position(v), k.arc_position(v));
        }
    }
    let root = Piece { seg: 0, seg_end: k.len(), a: 0.0, b: s.length };
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Node { ub: f64::INFINITY, seq, p: root, q: root });
    let mut evaluations = 0u64;
    while let Some(top) = heap.pop() {
        if top.ub <= lo * (1.0 + tol) {
            return Ok(Distortion { lo, hi: top.ub.max(lo), evaluations, witness });
        }
        if evaluations >= budget {
            return Err(Error::Budget {
                evaluations,
                detail: format!("distortion interval [{lo}, {}] above tolerance {tol}", top.ub),
            });
        }
        let children: Vec<(Piece, Piece)> = if top.p.same(&top.q) {
            let (a, b) = top.p.split(k);
            vec![(a, a), (a, b), (b, b)]
        } else if top.p.b - top.p.a >= top.q.b - top.q.a {
            let (a, b) = top.p.split(k);
            vec![(a, top.q), (b, top.q)]
        } else {
            let (a, b) = top.q.split(k);
            vec![(top.p, a), (top.p, b)]
        };
        for (p, q) in children {
            evaluations += 1;
            let ms = 0.5 * (p.a + p.b);
            let mt = 0.5 * (q.a + q.b);
            let r = s.ratio(ms, mt);
            if r > lo {
                lo = r;
                witness = (ms, mt);
            }
            let ub = s.upper(&p, &q).min(top.ub);
            if s.exact(&p, &q).is_some() && ub > lo {
                lo = ub;
                witness = (p.b.min(q.b), p.b.min(q.b));
            }
            seq += 1;
            heap.push(Node { ub, seq, p, q });
        }
    }
    // Every box closed exactly.
    Ok(Distortion { lo, hi: lo, evaluations, witness })
}
