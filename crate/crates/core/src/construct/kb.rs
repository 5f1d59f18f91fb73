//! Graph embeddings with vertices on a sphere and edges routed as short
//! polygonal paths through the ball.

use crate::complex::{CellId, Refinement, SimplicialComplex};
use crate::error::{param, Error, Result};
use crate::geometry::dist::{point_simplex_distance, segment_distance};
use crate::geometry::{combinatorial_thickness, EmbeddedComplex, RefinedEmbedding};
use crate::linalg::{bbox, box_gap, dist};
use crate::rng;

/// Interior waypoints per routed edge; each edge becomes five segments.
pub const WAYPOINTS: usize = 4;

#[derive(Clone, Debug)]
pub struct KbEmbedding {
    pub embedding: RefinedEmbedding,
    /// Radius `8 sqrt(d N)` of the vertex sphere; the image lies in this ball.
    pub radius: f64,
    /// Thickness measured on the graph (routes as PL curves).
    pub thickness: f64,
    pub attempts: usize,
}

fn fibonacci_sphere(count: usize, r: f64) -> Vec<Vec<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let y = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let rad = (1.0 - y * y).max(0.0).sqrt();
            let th = golden * i as f64;
            vec![r * rad * th.cos(), r * y, r * rad * th.sin()]
        })
        .collect()
}

struct Seg {
    a: Vec<f64>,
    b: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Sphere vertex at each end, if any.
    ends: [Option<usize>; 2],
}

impl Seg {
    fn new(a: Vec<f64>, b: Vec<f64>, ends: [Option<usize>; 2]) -> Self {
        let (lo, hi) = bbox(&[&a, &b]);
        Seg { a, b, lo, hi, ends }
    }

    fn shares_end(&self, o: &Seg) -> bool {
        self.ends.iter().flatten().any(|v| o.ends.iter().flatten().any(|w| v == w))
    }
}

/// Vertices spread evenly on the sphere of radius `8 sqrt(d N)`; each edge
/// is a path through four uniformly random interior waypoints, redrawn
/// until every pair of segments sharing no vertex is at least 1 apart.
pub fn kb_sphere_embedding(g: &SimplicialComplex, seed: u64, route_attempts: usize) -> Result<KbEmbedding> {
    kb_sphere_embedding_with(g, seed, route_attempts, 8.0)
}

/// As [`kb_sphere_embedding`] with sphere radius `multiplier * sqrt(d N)`.
pub fn kb_sphere_embedding_with(g: &SimplicialComplex, seed: u64, route_attempts: usize, multiplier: f64) -> Result<KbEmbedding> {
    if !(multiplier > 0.0) || !multiplier.is_finite() {
        return Err(param("radius multiplier must be positive"));
    }
    if g.dim() > 1 {
        return Err(Error::Structure("input must be a graph".into()));
    }
    if route_attempts == 0 {
        return Err(param("route_attempts must be positive"));
    }
    let nv = g.vertex_count();
    let d = g.adjacency().iter().map(|l| l.len()).max().unwrap_or(0).max(1);
    let radius = multiplier * ((d * nv) as f64).sqrt();
    let sphere = fibonacci_sphere(nv, radius);
    for i in 0..nv {
        for j in i + 1..nv {
            if dist(&sphere[i], &sphere[j]) < 4.0 {
                return Err(Error::Construction("sphere too crowded".into()));
            }
        }
    }
    let mut attempts = 0;
    let mut r = rng::stream(seed, 0x6b62);
    let mut placed: Vec<Seg> = Vec::new();
    let mut routes: Vec<Vec<Vec<f64>>> = Vec::new();
    for (ei, e) in g.edges().iter().enumerate() {
        let (u, v) = (e[0], e[1]);
        let mut found = None;
        for _ in 0..route_attempts {
            attempts += 1;
            let way: Vec<Vec<f64>> = (0..WAYPOINTS).map(|_| rng::in_ball(&mut r, 3, radius)).collect();
            let mut path = vec![sphere[u].clone()];
            path.extend(way.iter().cloned());
            path.push(sphere[v].clone());
            let segs: Vec<Seg> = (0..=WAYPOINTS)
                .map(|i| {
                    let ends = [if i == 0 { Some(u) } else { None }, if i == WAYPOINTS { Some(v) } else { None }];
                    Seg::new(path[i].clone(), path[i + 1].clone(), ends)
                })
                .collect();
            if route_is_clear(&segs, &placed, &sphere) {
                found = Some((way, segs));
                break;
            }
        }
        let Some((way, segs)) = found else {
            return Err(Error::Construction(format!(
                "edge {ei} ({u},{v}) not routed within {route_attempts} attempts"
            )));
        };
        routes.push(way);
        placed.extend(segs);
    }
    let embedding = assemble(g, &sphere, &routes)?;
    let thickness = combinatorial_thickness(&embedding).value;
    Ok(KbEmbedding { embedding, radius, thickness, attempts })
}

fn route_is_clear(segs: &[Seg], placed: &[Seg], sphere: &[Vec<f64>]) -> bool {
    for (i, s) in segs.iter().enumerate() {
        for t in segs.iter().skip(i + 2) {
            if segment_distance(&s.a, &s.b, &t.a, &t.b) < 1.0 {
                return false;
            }
        }
        for t in placed {
            if s.shares_end(t) || box_gap(&s.lo, &s.hi, &t.lo, &t.hi) >= 1.0 {
                continue;
            }
            if segment_distance(&s.a, &s.b, &t.a, &t.b) < 1.0 {
                return false;
            }
        }
        for (w, p) in sphere.iter().enumerate() {
            if s.ends.contains(&Some(w)) {
                continue;
            }
            if point_simplex_distance(p, &[&s.a, &s.b]) < 1.0 {
                return false;
            }
        }
    }
    true
}

fn assemble(g: &SimplicialComplex, sphere: &[Vec<f64>], routes: &[Vec<Vec<f64>>]) -> Result<RefinedEmbedding> {
    let nv = g.vertex_count();
    let mut coords: Vec<Vec<f64>> = sphere.to_vec();
    let mut fine_edges = Vec::new();
    let mut vertex_parent: Vec<CellId> = (0..nv).map(|v| CellId::new(0, v)).collect();
    for (ei, (e, way)) in g.edges().iter().zip(routes).enumerate() {
        let base = coords.len();
        coords.extend(way.iter().cloned());
        vertex_parent.extend(std::iter::repeat(CellId::new(1, ei)).take(way.len()));
        let chain: Vec<usize> = std::iter::once(e[0]).chain(base..base + way.len()).chain(std::iter::once(e[1])).collect();
        for w in chain.windows(2) {
            fine_edges.push(vec![w[0], w[1]]);
        }
    }
    let fine = SimplicialComplex::from_simplices(coords.len(), fine_edges)?;
    let edge_parent: Vec<CellId> = fine
        .edges()
        .iter()
        .map(|f| if vertex_parent[f[0]].dim == 1 { vertex_parent[f[0]] } else { vertex_parent[f[1]] })
        .collect();
    let mut parent = vec![vertex_parent];
    if fine.dim() >= 1 {
        parent.push(edge_parent);
    }
    let refinement = Refinement { parent, coarse_counts: g.counts() };
    RefinedEmbedding::new(g.clone(), EmbeddedComplex::new(fine, coords)?, refinement)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::cycle_graph;
    use crate::geometry::PlImage;

    #[test]
    fn six_cycle_routes() {
        let c6 = cycle_graph(6).unwrap();
        let k = kb_sphere_embedding(&c6, 1, 2000).unwrap();
        assert!(k.thickness >= 1.0);
        assert!(combinatorial_thickness(&k.embedding.fine).value >= 1.0);
        assert!(k.embedding.fine.radius() <= k.radius + 1e-9);
        assert_eq!(k.embedding.complex().count(1), 6);
        assert_eq!(k.embedding.fine.complex().count(1), 30);
        let again = kb_sphere_embedding(&c6, 1, 2000).unwrap();
        assert_eq!(again.embedding.fine, k.embedding.fine);
    }

    #[test]
    fn complete_graph_vertices_on_sphere() {
        let k4 = crate::complex::simplex_skeleton(1, 4).unwrap();
        let k = kb_sphere_embedding(&k4, 3, 2000).unwrap();
        for v in 0..4 {
            let r = crate::linalg::norm(k.embedding.fine.vertex(v));
            assert!((r - k.radius).abs() < 1e-9);
        }
        assert!(k.thickness >= 1.0);
    }

    #[test]
    fn tiny_budget_fails_with_edge_id() {
        let k4 = crate::complex::simplex_skeleton(1, 4).unwrap();
        match kb_sphere_embedding_with(&k4, 3, 1, 2.0) {
            Err(Error::Construction(m)) => assert!(m.contains("edge")),
            Err(e) => panic!("unexpected {e}"),
            Ok(_) => {}
        }
    }

    #[test]
    fn rejects_two_dimensional_input() {
        let t = crate::complex::simplex_skeleton(2, 3).unwrap();
        assert!(matches!(kb_sphere_embedding(&t, 1, 10), Err(Error::Structure(_))));
    }
}
