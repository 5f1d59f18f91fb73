//! Ball covers of embedded complexes, their nerves, and the homology and
//! simplex-count bounds read off from them.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{betti_gf2, SimplicialComplex};
use crate::error::{param, Error, Result};
use crate::geometry::{min_enclosing_ball, neighborhood_volume, sample_simplex, EmbeddedComplex, VolumeEstimate};
use crate::linalg::dist;
use crate::rng;

/// Candidate spacing of the net as a fraction of `T`.
pub const NET_SPACING: f64 = 1.0 / 200.0;
/// Candidate points allowed before the spacing is coarsened.
pub const MAX_CANDIDATES: usize = 2_000_000;
/// Default top dimension of computed nerves; homology is exact below it.
pub const DEFAULT_NERVE_DIM: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallCover {
    pub centers: Vec<Vec<f64>>,
    pub radius: f64,
    pub separation: f64,
}

impl BallCover {
    pub fn new(centers: Vec<Vec<f64>>, radius: f64, separation: f64) -> Result<Self> {
        if !(radius > 0.0) || !(separation >= 0.0) {
            return Err(param("radius must be positive and separation non-negative"));
        }
        let n = centers.first().map_or(0, |c| c.len());
        if centers.iter().any(|c| c.len() != n) {
            return Err(Error::Input("centres must share one dimension".into()));
        }
        let c = BallCover { centers, radius, separation };
        if let Some((i, j)) = c.close_pair() {
            return Err(Error::Input(format!("centres {i} and {j} are closer than the separation")));
        }
        Ok(c)
    }

    fn close_pair(&self) -> Option<(usize, usize)> {
        let s = self.separation;
        if s == 0.0 {
            return None;
        }
        let grid = HashGrid::new(&self.centers, s);
        for (i, c) in self.centers.iter().enumerate() {
            for j in grid.near(c) {
                if j > i && dist(c, &self.centers[j]) < s * (1.0 - 1e-12) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn ambient_dim(&self) -> usize {
        self.centers.first().map_or(0, |c| c.len())
    }

    /// Most balls that can contain one point: separated centres inside a
    /// ball of radius `r` number at most `(1 + 2r/s)^n`.
    pub fn multiplicity_bound(&self) -> usize {
        if self.separation == 0.0 {
            return self.centers.len();
        }
        let m = (1.0 + 2.0 * self.radius / self.separation).powi(self.ambient_dim() as i32);
        (m.floor() as usize).min(self.centers.len()).max(1)
    }

    /// Whether `x` lies in one of the balls.
    pub fn covers(&self, x: &[f64]) -> bool {
        self.centers.iter().any(|c| dist(c, x) <= self.radius)
    }
}

/// Uniform hash grid over points with cell size `h`.
struct HashGrid {
    h: f64,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

impl HashGrid {
    fn new(points: &[Vec<f64>], h: f64) -> Self {
        let mut g = HashGrid { h, cells: HashMap::new() };
        for (i, p) in points.iter().enumerate() {
            g.insert(p, i);
        }
        g
    }

    fn key(&self, p: &[f64]) -> Vec<i64> {
        p.iter().map(|x| (x / self.h).floor() as i64).collect()
    }

    fn insert(&mut self, p: &[f64], i: usize) {
        let k = self.key(p);
        self.cells.entry(k).or_default().push(i);
    }

    /// Indices in the cells adjacent to the one holding `p`; includes every
    /// point within distance `h`.
    fn near(&self, p: &[f64]) -> Vec<usize> {
        let k = self.key(p);
        let n = k.len();
        let mut out = Vec::new();
        for code in 0..3usize.pow(n as u32) {
            let mut c = code;
            let key: Vec<i64> = k
                .iter()
                .map(|&b| {
                    let d = (c % 3) as i64 - 1;
                    c /= 3;
                    b + d
                })
                .collect();
            if let Some(v) = self.cells.get(&key) {
                out.extend_from_slice(v);
            }
        }
        out
    }
}

/// Greedy maximal separated set among dense samples of the image, taken in
/// a seeded random order with the vertices of the complex leading. Candidates are at most `h` from every image
/// point, so separation `T/2 - h` makes the radius-`T/2` balls cover the
/// image.
pub fn separated_net(e: &EmbeddedComplex, t: f64, seed: u64) -> Result<BallCover> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(param("T must be positive"));
    }
    let c = e.complex();
    let mut h = t * NET_SPACING;
    let mut candidates: Vec<Vec<f64>>;
    loop {
        candidates = Vec::new();
        let mut over = false;
        for d in (0..=c.dim()).rev() {
            for s in c.faces(d) {
                let pts: Vec<&[f64]> = s.iter().map(|&v| e.vertex(v)).collect();
                candidates.extend(sample_simplex(&pts, h));
                if candidates.len() > MAX_CANDIDATES {
                    over = true;
                    break;
                }
            }
            if over {
                break;
            }
        }
        if !over {
            break;
        }
        h *= 2.0;
        if h >= t / 4.0 {
            return Err(Error::Budget { evaluations: candidates.len() as u64, detail: "image too large for the net sampler".into() });
        }
    }
    let mut g = rng::stream(seed, 0x6e6574);
    // vertices first, so that junctions get a ball of their own and their
    // arms close up into filled triangles of the nerve
    let mut vertices: Vec<Vec<f64>> = e.coords().to_vec();
    vertices.shuffle(&mut g);
    candidates.shuffle(&mut g);
    let candidates = vertices.into_iter().chain(candidates);
    let sep = t / 2.0 - h;
    let mut centers: Vec<Vec<f64>> = Vec::new();
    let mut grid = HashGrid { h: sep, cells: HashMap::new() };
    for p in candidates {
        if grid.near(&p).iter().all(|&j| dist(&centers[j], &p) >= sep) {
            grid.insert(&p, centers.len());
            centers.push(p);
        }
    }
    Ok(BallCover { centers, radius: t / 2.0, separation: sep })
}

/// Nerve of the cover up to dimension `max_dim`: balls of a common radius
/// share a point exactly when the smallest ball enclosing their centres is
/// no larger.
pub fn nerve_complex(cover: &BallCover, max_dim: usize) -> Result<SimplicialComplex> {
    let m = cover.centers.len();
    let r = cover.radius;
    let tol = 1e-12 * r.max(1.0);
    let grid = HashGrid::new(&cover.centers, 2.0 * r);
    let nbrs: Vec<Vec<usize>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut v: Vec<usize> = grid
                .near(&cover.centers[i])
                .into_iter()
                .filter(|&j| j > i && dist(&cover.centers[i], &cover.centers[j]) <= 2.0 * r + tol)
                .collect();
            v.sort_unstable();
            v
        })
        .collect();
    let cap = max_dim.min(cover.multiplicity_bound().saturating_sub(1));
    let per_vertex: Vec<Vec<Vec<usize>>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut out = vec![vec![i]];
            let mut stack = vec![vec![i]];
            while let Some(s) = stack.pop() {
                if s.len() > cap {
                    continue;
                }
                let last = *s.last().expect("non-empty");
                let from = if s.len() == 1 { &nbrs[i] } else { &nbrs[last] };
                for &j in from {
                    if j <= last || !s.iter().all(|&a| a == i && nbrs[i].binary_search(&j).is_ok() || nbrs[a].binary_search(&j).is_ok()) {
                        continue;
                    }
                    let mut t = s.clone();
                    t.push(j);
                    if t.len() > 2 {
                        let pts: Vec<&[f64]> = t.iter().map(|&a| cover.centers[a].as_slice()).collect();
                        if min_enclosing_ball(&pts).1 > r + tol {
                            continue;
                        }
                    }
                    out.push(t.clone());
                    stack.push(t);
                }
            }
            out
        })
        .collect();
    SimplicialComplex::from_simplices(m, per_vertex.into_iter().flatten())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NerveReport {
    pub t: f64,
    pub ball_count: usize,
    /// Number of nerve simplices; bounds the simplicial norm of every class.
    pub nerve_simplex_count: usize,
    pub nerve_dim: usize,
    /// Mod-2 Betti numbers of the nerve in the degrees where they are exact.
    pub betti: Vec<usize>,
    pub rank: usize,
    pub volume: VolumeEstimate,
    /// `rank / (V T^{-n})`.
    pub ratio: f64,
}

/// Net, nerve and the homology bound at scale `T`.
pub fn homotopy_invariant_report(e: &EmbeddedComplex, t: f64, seed: u64, volume_samples: usize) -> Result<NerveReport> {
    let cover = separated_net(e, t, seed)?;
    let nerve = nerve_complex(&cover, DEFAULT_NERVE_DIM)?;
    let mut betti = betti_gf2(&nerve);
    // the top computed degree is only exact if the cap was not reached
    if nerve.dim() >= DEFAULT_NERVE_DIM {
        betti.truncate(DEFAULT_NERVE_DIM);
    }
    let rank = betti.iter().sum();
    let volume = neighborhood_volume(e, t, volume_samples, rng::derive(seed, 1))?;
    let n = e.ambient_dim() as i32;
    let ratio = rank as f64 / (volume.value * t.powi(-n));
    Ok(NerveReport {
        t,
        ball_count: cover.centers.len(),
        nerve_simplex_count: nerve.total_count(),
        nerve_dim: nerve.dim(),
        betti,
        rank,
        volume,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{cycle_graph, grid_skeleton, triangulate_cubical};
    use crate::rng::in_ball;
    use proptest::prelude::*;
    use rand::Rng;

    fn circle(n: usize, r: f64, shift: f64) -> EmbeddedComplex {
        let coords = (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / n as f64;
                vec![r * a.cos() + shift, r * a.sin(), 0.0]
            })
            .collect();
        EmbeddedComplex::new(cycle_graph(n).unwrap(), coords).unwrap()
    }

    #[test]
    fn single_point_gives_one_ball() {
        let c = SimplicialComplex::from_simplices(1, vec![vec![0]]).unwrap();
        let e = EmbeddedComplex::new(c, vec![vec![1.0, 2.0, 3.0]]).unwrap();
        for t in [0.1, 1.0, 10.0] {
            assert_eq!(separated_net(&e, t, 3).unwrap().centers.len(), 1);
        }
    }

    #[test]
    fn segment_net_size_and_coverage() {
        let c = SimplicialComplex::from_simplices(2, vec![vec![0, 1]]).unwrap();
        let e = EmbeddedComplex::new(c, vec![vec![0.0, 0.0, 0.0], vec![10.0, 0.0, 0.0]]).unwrap();
        let cover = separated_net(&e, 1.0, 5).unwrap();
        assert!((10..=42).contains(&cover.centers.len()), "{}", cover.centers.len());
        assert!(BallCover::new(cover.centers.clone(), cover.radius, cover.separation).is_ok());
        let mut g = rng::stream(1, 1);
        for _ in 0..10_000 {
            let x = g.gen_range(0.0..10.0);
            assert!(cover.covers(&[x, 0.0, 0.0]));
        }
    }

    #[test]
    fn small_nerves() {
        let two = BallCover::new(vec![vec![0.0, 0.0], vec![1.8, 0.0]], 1.0, 0.0).unwrap();
        assert_eq!(nerve_complex(&two, 3).unwrap().counts(), vec![2, 1]);
        let tiny = BallCover::new(vec![vec![0.0, 0.0], vec![0.1, 0.0], vec![0.0, 0.1]], 1.0, 0.0).unwrap();
        assert_eq!(nerve_complex(&tiny, 3).unwrap().counts(), vec![3, 3, 1]);
        // circumradius 1.1 > r = 1 while side 1.1 * sqrt(3) < 2 r
        let s3 = 3f64.sqrt();
        let big = BallCover::new(
            vec![vec![1.1, 0.0], vec![-0.55, 0.55 * s3], vec![-0.55, -0.55 * s3]],
            1.0,
            0.0,
        )
        .unwrap();
        assert_eq!(nerve_complex(&big, 3).unwrap().counts(), vec![3, 3]);
    }

    #[test]
    fn circle_nerve_has_one_loop() {
        let e = circle(100, 10.0, 0.0);
        let rep = homotopy_invariant_report(&e, 0.5, 2, 100_000).unwrap();
        assert_eq!(&rep.betti[..2], &[1, 1]);
        assert!(rep.ratio > 0.0 && rep.ratio < 1.0);
    }

    #[test]
    fn two_far_circles() {
        let a = circle(30, 3.0, 0.0);
        let b = circle(30, 3.0, 20.0);
        let mut simplices: Vec<Vec<usize>> = a.complex().edges().to_vec();
        simplices.extend(b.complex().edges().iter().map(|s| vec![s[0] + 30, s[1] + 30]));
        let mut coords = a.coords().to_vec();
        coords.extend(b.coords().iter().cloned());
        let e = EmbeddedComplex::new(SimplicialComplex::from_simplices(60, simplices).unwrap(), coords).unwrap();
        let rep = homotopy_invariant_report(&e, 0.5, 1, 20_000).unwrap();
        assert_eq!(&rep.betti[..2], &[2, 2]);
    }

    #[test]
    fn grid_graph_keeps_its_cycles() {
        let x = grid_skeleton(1, 2, 4).unwrap();
        let (g, _) = triangulate_cubical(&x).unwrap();
        let coords = x.faces(0).iter().map(|v| vec![v.base[0] as f64, v.base[1] as f64, 0.0]).collect();
        let e = EmbeddedComplex::new(g, coords).unwrap();
        assert!(crate::geometry::combinatorial_thickness(&e).value >= 1.0);
        let nerve = nerve_complex(&separated_net(&e, 0.4, 3).unwrap(), 2).unwrap();
        assert_eq!(betti_gf2(&nerve)[1], 16);
    }

    #[test]
    fn packing_is_consistent_with_volume() {
        let e = circle(40, 5.0, 0.0);
        let t = 0.5;
        let cover = separated_net(&e, t, 4).unwrap();
        let vol = neighborhood_volume(&e, t, 100_000, 4).unwrap();
        let omega3 = 4.0 / 3.0 * std::f64::consts::PI;
        let cap = (vol.value + vol.ci95) * (t / 4.0f64).powi(-3) / omega3;
        assert!((cover.centers.len() as f64) <= cap);
        assert_eq!(e.ambient_dim(), 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn nerve_matches_sampling_oracle(seed in 0u64..10_000, m in 2usize..=8) {
            let mut g = rng::stream(seed, 0);
            let centers: Vec<Vec<f64>> = (0..m).map(|_| in_ball(&mut g, 2, 1.5)).collect();
            let cover = BallCover::new(centers.clone(), 1.0, 0.0).unwrap();
            let nerve = nerve_complex(&cover, 3).unwrap();
            // every subset of up to 4 balls, skipping near-tangent cases
            for mask in 1u32..(1 << m) {
                let s: Vec<usize> = (0..m).filter(|&i| mask >> i & 1 == 1).collect();
                if s.len() > 4 {
                    continue;
                }
                let pts: Vec<&[f64]> = s.iter().map(|&i| centers[i].as_slice()).collect();
                let rad = min_enclosing_ball(&pts).1;
                if (rad - 1.0).abs() < 0.02 {
                    continue;
                }
                let mut hit = false;
                let steps = 200;
                'grid: for a in 0..=steps {
                    for b in 0..=steps {
                        let x = [-2.5 + 5.0 * a as f64 / steps as f64, -2.5 + 5.0 * b as f64 / steps as f64];
                        if s.iter().all(|&i| dist(&centers[i], &x) <= 1.0) {
                            hit = true;
                            break 'grid;
                        }
                    }
                }
                prop_assert_eq!(nerve.id_of(&s).is_some(), hit, "subset {:?}", s);
            }
        }
    }
}
