//! Subdivision of a linearly embedded complex by the unit cube lattice.

use std::collections::HashMap;

use rand::Rng;

use crate::complex::{CellId, Refinement, SimplicialComplex};
use crate::error::{param, Error, Result};
use crate::geometry::{EmbeddedComplex, RefinedEmbedding};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Key {
    Vertex(usize),
    /// Crossing of coarse edge `edge` with the plane `x_axis = plane`.
    Edge { edge: usize, axis: usize, plane: i64 },
    /// Meeting point of two lattice planes inside a coarse triangle.
    Face { tri: usize, a: (usize, i64), b: (usize, i64) },
}

#[derive(Clone, Copy, Debug)]
enum Side {
    Edge(usize),
    Line(usize, i64),
}

struct Builder<'a> {
    e: &'a EmbeddedComplex,
    keys: HashMap<Key, usize>,
    points: Vec<Vec<f64>>,
    parents: Vec<CellId>,
    simplices: Vec<Vec<usize>>,
}

const GAP: f64 = 1e-10;

fn degenerate(x: f64) -> bool {
    (x - x.round()).abs() < GAP
}

impl<'a> Builder<'a> {
    fn vertex(&mut self, key: Key, point: impl FnOnce() -> Result<Vec<f64>>, parent: CellId) -> Result<usize> {
        if let Some(&i) = self.keys.get(&key) {
            return Ok(i);
        }
        let p = point()?;
        let id = self.points.len();
        self.points.push(p);
        self.parents.push(parent);
        self.keys.insert(key, id);
        Ok(id)
    }

    fn edge_point(&self, edge: usize, axis: usize, plane: i64) -> Result<Vec<f64>> {
        let f = self.e.complex().faces(1)[edge].clone();
        let (a, b) = (self.e.vertex(f[0]), self.e.vertex(f[1]));
        let t = (plane as f64 - a[axis]) / (b[axis] - a[axis]);
        let p = crate::linalg::lerp(a, b, t);
        for (i, &x) in p.iter().enumerate() {
            if i != axis && degenerate(x) {
                return Err(Error::Construction("edge crosses a lattice line".into()));
            }
        }
        Ok(p)
    }

    fn face_point(&self, tri: usize, a: (usize, i64), b: (usize, i64)) -> Result<Vec<f64>> {
        let f = &self.e.complex().faces(2)[tri];
        let (p0, p1, p2) = (self.e.vertex(f[0]), self.e.vertex(f[1]), self.e.vertex(f[2]));
        let m = vec![
            vec![p1[a.0] - p0[a.0], p2[a.0] - p0[a.0]],
            vec![p1[b.0] - p0[b.0], p2[b.0] - p0[b.0]],
        ];
        let rhs = vec![a.1 as f64 - p0[a.0], b.1 as f64 - p0[b.0]];
        let uv = crate::linalg::solve(m, rhs).ok_or_else(|| Error::Construction("parallel lattice traces".into()))?;
        let p: Vec<f64> = (0..p0.len()).map(|i| p0[i] + uv[0] * (p1[i] - p0[i]) + uv[1] * (p2[i] - p0[i])).collect();
        for (i, &x) in p.iter().enumerate() {
            if i != a.0 && i != b.0 && degenerate(x) {
                return Err(Error::Construction("three lattice planes meet on a triangle".into()));
            }
        }
        Ok(p)
    }
}

fn lattice_between(a: f64, b: f64) -> std::ops::RangeInclusive<i64> {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    (lo.floor() as i64 + 1)..=(hi.ceil() as i64 - 1)
}

fn try_refine(e: &EmbeddedComplex) -> Result<(EmbeddedComplex, Refinement)> {
    let c = e.complex();
    if c.dim() > 2 {
        return Err(param("lattice refinement supports complexes of dimension at most 2"));
    }
    if e.coords().iter().flatten().any(|&x| degenerate(x)) {
        return Err(Error::Construction("vertex on a lattice plane".into()));
    }
    let n = e.ambient_dim();
    let mut b = Builder { e, keys: HashMap::new(), points: Vec::new(), parents: Vec::new(), simplices: Vec::new() };
    for v in 0..c.vertex_count() {
        let p = e.vertex(v).to_vec();
        b.vertex(Key::Vertex(v), || Ok(p), CellId::new(0, v))?;
        b.simplices.push(vec![b.keys[&Key::Vertex(v)]]);
    }
    for (ei, f) in c.faces(1).iter().enumerate() {
        let (pa, pb) = (e.vertex(f[0]), e.vertex(f[1]));
        let mut cuts: Vec<(f64, usize, i64)> = Vec::new();
        for axis in 0..n {
            for plane in lattice_between(pa[axis], pb[axis]) {
                cuts.push(((plane as f64 - pa[axis]) / (pb[axis] - pa[axis]), axis, plane));
            }
        }
        cuts.sort_by(|x, y| x.0.total_cmp(&y.0));
        if cuts.windows(2).any(|w| (w[1].0 - w[0].0).abs() < 1e-13) {
            return Err(Error::Construction("edge passes through a lattice line".into()));
        }
        let mut chain = vec![b.keys[&Key::Vertex(f[0])]];
        for &(_, axis, plane) in &cuts {
            let pt = b.edge_point(ei, axis, plane)?;
            chain.push(b.vertex(Key::Edge { edge: ei, axis, plane }, || Ok(pt), CellId::new(1, ei))?);
        }
        chain.push(b.keys[&Key::Vertex(f[1])]);
        for w in chain.windows(2) {
            b.simplices.push(vec![w[0], w[1]]);
        }
    }
    for (ti, f) in c.faces(2).iter().enumerate() {
        let side = |u: usize, v: usize| Side::Edge(c.id_of(&[u, v]).unwrap().index);
        let mut cells: Vec<Vec<(usize, Side)>> = vec![vec![
            (b.keys[&Key::Vertex(f[0])], side(f[0], f[1])),
            (b.keys[&Key::Vertex(f[1])], side(f[1], f[2])),
            (b.keys[&Key::Vertex(f[2])], side(f[2], f[0])),
        ]];
        for axis in 0..n {
            let xs: Vec<f64> = f.iter().map(|&v| e.vertex(v)[axis]).collect();
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for plane in lattice_between(lo, hi) {
                let mut next = Vec::new();
                for cell in cells {
                    let s: Vec<f64> = cell.iter().map(|&(v, _)| b.points[v][axis] - plane as f64).collect();
                    if s.iter().any(|x| x.abs() < GAP) {
                        return Err(Error::Construction("cell vertex on a lattice plane".into()));
                    }
                    if s.iter().all(|&x| x > 0.0) || s.iter().all(|&x| x < 0.0) {
                        next.push(cell);
                        continue;
                    }
                    let (mut pos, mut neg) = (Vec::new(), Vec::new());
                    let m = cell.len();
                    for i in 0..m {
                        let (v, sd) = cell[i];
                        let target = if s[i] > 0.0 { &mut pos } else { &mut neg };
                        target.push((v, sd));
                        let j = (i + 1) % m;
                        if (s[i] > 0.0) != (s[j] > 0.0) {
                            let cut = match sd {
                                Side::Edge(ei) => {
                                    let pt = b.edge_point(ei, axis, plane)?;
                                    b.vertex(Key::Edge { edge: ei, axis, plane }, || Ok(pt), CellId::new(1, ei))?
                                }
                                Side::Line(a2, p2) => {
                                    let (ka, kb) = if (axis, plane) < (a2, p2) { ((axis, plane), (a2, p2)) } else { ((a2, p2), (axis, plane)) };
                                    let pt = b.face_point(ti, ka, kb)?;
                                    b.vertex(Key::Face { tri: ti, a: ka, b: kb }, || Ok(pt), CellId::new(2, ti))?
                                }
                            };
                            // the side is split; the new vertex starts the cut line on the other part
                            let line = Side::Line(axis, plane);
                            if s[i] > 0.0 {
                                pos.push((cut, line));
                                neg.push((cut, sd));
                            } else {
                                neg.push((cut, line));
                                pos.push((cut, sd));
                            }
                        }
                    }
                    next.push(pos);
                    next.push(neg);
                }
                cells = next;
            }
        }
        for cell in cells {
            let verts: Vec<usize> = cell.iter().map(|&(v, _)| v).collect();
            let start = (0..verts.len()).min_by_key(|&i| verts[i]).unwrap();
            let rot: Vec<usize> = (0..verts.len()).map(|i| verts[(start + i) % verts.len()]).collect();
            for i in 1..rot.len() - 1 {
                b.simplices.push(vec![rot[0], rot[i], rot[i + 1]]);
            }
        }
    }
    let fine = SimplicialComplex::from_simplices(b.points.len(), b.simplices.clone())?;
    let coarse_faces = |p: CellId| c.face(p).to_vec();
    let mut parent = Vec::new();
    for d in 0..=fine.dim() {
        let mut list = Vec::with_capacity(fine.count(d));
        for s in fine.faces(d) {
            let mut verts: Vec<usize> = s.iter().flat_map(|&v| coarse_faces(b.parents[v])).collect();
            verts.sort_unstable();
            verts.dedup();
            let id = c.id_of(&verts).ok_or_else(|| Error::Construction("fine simplex straddles coarse faces".into()))?;
            list.push(id);
        }
        parent.push(list);
    }
    let emb = EmbeddedComplex::new(fine, b.points)?;
    Ok((emb, Refinement { parent, coarse_counts: c.counts() }))
}

/// Cut every simplex by the planes `x_i = integer` and triangulate the
/// pieces without adding interior vertices. Inputs touching the lattice
/// are perturbed by a seeded `1e-9` jitter first.
pub fn refine_by_unit_lattice(e: &EmbeddedComplex) -> Result<RefinedEmbedding> {
    let mut cur = e.clone();
    let mut last = None;
    for attempt in 0..8u64 {
        match try_refine(&cur) {
            Ok((fine, r)) => return RefinedEmbedding::new(e.complex().clone(), fine, r),
            Err(Error::Construction(msg)) => {
                last = Some(msg);
                let mut r = rng::stream(0x6a69_7474, attempt);
                let coords = e
                    .coords()
                    .iter()
                    .map(|p| p.iter().map(|x| x + r.gen_range(-1e-9..1e-9)).collect())
                    .collect();
                cur = EmbeddedComplex::new(e.complex().clone(), coords)?;
            }
            Err(other) => return Err(other),
        }
    }
    Err(Error::Construction(format!("lattice refinement stayed degenerate: {}", last.unwrap_or_default())))
}
