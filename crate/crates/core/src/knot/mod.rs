//! Piecewise-linear knots in `R^3`: distortion, conformal length, and
//! decompositions of space into nested blocks adapted to a knot.

mod blocks;
mod conformal;
mod distortion;

pub use blocks::{
    block_decompose, count_face_crossings, nested_block_tree, nested_block_tree_with, Block, BlockNode, BlockTree,
    Decomposition, TreeOptions, CROSSING_FACTOR, MAX_BLOCKS, MAX_ECCENTRICITY, MIN_BLOCKS,
};
pub use conformal::{check_convol_bound, check_convol_bound_with, conformal_length, length_in_ball, ConformalLength, ConvolCheck};
pub use distortion::{distortion, distortion_with_budget, Distortion, DISTORTION_BUDGET};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::geometry::dist::segment_distance;
use crate::linalg::{dist, norm};

/// Closed polygonal curve in `R^3`, stored with cumulative arc length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlKnot {
    points: Vec<[f64; 3]>,
    /// `cum[i]` is the arc length from point 0 to point `i`; `cum[m]` is the total.
    cum: Vec<f64>,
}

/// Rotation angles tried, in order, until every edge is transverse to the
/// coordinate planes.
const ROTATION_ANGLES: [f64; 4] = [0.0, 0.618_033_988_7, 1.324_717_957_2, 2.236_067_977_5];
const TRANSVERSE_TOL: f64 = 1e-9;

fn rotation(angle: f64) -> [[f64; 3]; 3] {
    let k = [1.0, std::f64::consts::SQRT_2, 3f64.sqrt()];
    let n = norm(&k);
    let (x, y, z) = (k[0] / n, k[1] / n, k[2] / n);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
        [y * x * t + z * s, c + y * y * t, y * z * t - x * s],
        [z * x * t - y * s, z * y * t + x * s, c + z * z * t],
    ]
}

fn apply(m: &[[f64; 3]; 3], p: &[f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| m[i][0] * p[0] + m[i][1] * p[1] + m[i][2] * p[2])
}

impl PlKnot {
    /// Validate a closed polygon. If some edge is parallel to a coordinate
    /// plane the whole curve is turned by a fixed generic rotation, which
    /// changes neither distortion nor conformal length.
    pub fn new(points: Vec<[f64; 3]>) -> Result<Self> {
        let m = points.len();
        if m < 3 {
            return Err(Error::Input("a knot needs at least 3 points".into()));
        }
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Input("non-finite coordinate".into()));
        }
        for i in 0..m {
            if points[i] == points[(i + 1) % m] {
                return Err(Error::Input(format!("points {i} and {} coincide", (i + 1) % m)));
            }
        }
        let k = PlKnot::from_points_unchecked(points);
        k.check_embedded()?;
        for angle in ROTATION_ANGLES {
            let r = rotation(angle);
            let cand = if angle == 0.0 {
                k.clone()
            } else {
                PlKnot::from_points_unchecked(k.points.iter().map(|p| apply(&r, p)).collect())
            };
            if cand.is_transverse() {
                return Ok(cand);
            }
        }
        Err(Error::Input("could not make edges transverse to the coordinate planes".into()))
    }

    fn from_points_unchecked(points: Vec<[f64; 3]>) -> Self {
        let m = points.len();
        let mut cum = Vec::with_capacity(m + 1);
        cum.push(0.0);
        for i in 0..m {
            let l = dist(&points[i], &points[(i + 1) % m]);
            cum.push(cum[i] + l);
        }
        PlKnot { points, cum }
    }

    fn is_transverse(&self) -> bool {
        (0..self.len()).all(|i| {
            let (a, b) = self.segment(i);
            let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            let l = norm(&d);
            d.iter().all(|x| x.abs() > TRANSVERSE_TOL * l)
        })
    }

    /// Non-adjacent segments must be disjoint; pairs are found with a hash
    /// grid whose cell is the longest segment.
    fn check_embedded(&self) -> Result<()> {
        let m = self.len();
        let cell = (0..m).map(|i| self.segment_length(i)).fold(0.0f64, f64::max);
        let key = |p: &[f64; 3]| p.map(|x| (x / cell).floor() as i64);
        let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for i in 0..m {
            grid.entry(key(&self.points[i])).or_default().push(i);
        }
        for i in 0..m {
            let (a, b) = self.segment(i);
            let k = key(a);
            for dx in -2..=2 {
                for dy in -2..=2 {
                    for dz in -2..=2 {
                        let Some(list) = grid.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) else { continue };
                        for &j in list {
                            if j <= i || self.adjacent(i, j) {
                                continue;
                            }
                            let (c, d) = self.segment(j);
                            if segment_distance(a, b, c, d) <= 1e-12 {
                                return Err(Error::Input(format!("segments {i} and {j} intersect")));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn total_length(&self) -> f64 {
        self.cum[self.len()]
    }

    /// Arc-length position of point `i`.
    pub fn arc_position(&self, i: usize) -> f64 {
        self.cum[i]
    }

    /// Segment `i` runs from point `i` to point `i+1` (cyclically).
    pub fn segment(&self, i: usize) -> (&[f64; 3], &[f64; 3]) {
        (&self.points[i], &self.points[(i + 1) % self.len()])
    }

    pub fn segment_length(&self, i: usize) -> f64 {
        self.cum[i + 1] - self.cum[i]
    }

    /// Segments `i` and `j` share an endpoint.
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        let m = self.len();
        (i + 1) % m == j || (j + 1) % m == i
    }

    /// Intrinsic distance between arc positions.
    pub fn arc_distance(&self, s: f64, t: f64) -> f64 {
        let d = (s - t).abs();
        d.min(self.total_length() - d)
    }

    /// Segment containing arc position `s` (taken modulo the length).
    pub fn segment_at(&self, s: f64) -> usize {
        let l = self.total_length();
        let s = s.rem_euclid(l);
        match self.cum.binary_search_by(|c| c.total_cmp(&s)) {
            Ok(i) => i.min(self.len() - 1),
            Err(i) => i - 1,
        }
    }

    pub fn point_at(&self, s: f64) -> [f64; 3] {
        let i = self.segment_at(s);
        self.point_on_segment(i, s.rem_euclid(self.total_length()))
    }

    /// Point of segment `i` at arc position `s`, clamped to the segment.
    pub fn point_on_segment(&self, i: usize, s: f64) -> [f64; 3] {
        let (a, b) = self.segment(i);
        let t = ((s - self.cum[i]) / self.segment_length(i)).clamp(0.0, 1.0);
        [0, 1, 2].map(|k| a[k] + t * (b[k] - a[k]))
    }

    /// Interior angle at point `i` between its two segments.
    pub fn vertex_angle(&self, i: usize) -> f64 {
        let m = self.len();
        let p = self.points[i];
        let a = self.points[(i + m - 1) % m];
        let b = self.points[(i + 1) % m];
        let u = [a[0] - p[0], a[1] - p[1], a[2] - p[2]];
        let v = [b[0] - p[0], b[1] - p[1], b[2] - p[2]];
        let c = (crate::linalg::dot(&u, &v) / (norm(&u) * norm(&v))).clamp(-1.0, 1.0);
        c.acos()
    }

    /// Smallest of the shortest edge and the least distance between
    /// non-adjacent edges.
    pub fn feature_size(&self) -> f64 {
        let m = self.len();
        let mut eps = (0..m).map(|i| self.segment_length(i)).fold(f64::INFINITY, f64::min);
        for i in 0..m {
            for j in i + 1..m {
                if self.adjacent(i, j) {
                    continue;
                }
                let (a, b) = self.segment(i);
                let (c, d) = self.segment(j);
                eps = eps.min(segment_distance(a, b, c, d));
            }
        }
        eps
    }

    pub fn bbox(&self) -> ([f64; 3], [f64; 3]) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.points {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    pub fn scaled(&self, s: f64) -> Result<PlKnot> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(param("scale must be positive"));
        }
        Ok(PlKnot::from_points_unchecked(self.points.iter().map(|p| p.map(|x| x * s)).collect()))
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Torus knot `T(p,q)` sampled at `m` points on the torus with radii
/// `R > r`. The smaller of `p`, `q` counts turns about the torus axis, so
/// `T(p,q)` and `T(q,p)` give the same curve.
pub fn torus_knot(p: usize, q: usize, big_r: f64, r: f64, m: usize) -> Result<PlKnot> {
    if p < 2 || q < 2 {
        return Err(param("p and q must be at least 2"));
    }
    if gcd(p, q) != 1 {
        return Err(param(format!("gcd({p},{q}) != 1: not a knot")));
    }
    if !(r > 0.0 && r < big_r) {
        return Err(param("need 0 < r < R"));
    }
    if m < 12 * p.max(q) {
        return Err(param(format!("need at least {} points", 12 * p.max(q))));
    }
    let (a, b) = (p.min(q) as f64, p.max(q) as f64);
    let pts = (0..m)
        .map(|i| {
            let phi = std::f64::consts::TAU * i as f64 / m as f64;
            let rad = big_r + r * (b * phi).cos();
            [rad * (a * phi).cos(), rad * (a * phi).sin(), r * (b * phi).sin()]
        })
        .collect();
    PlKnot::new(pts)
}

/// Regular `m`-gon of circumradius `r` in a plane through the origin.
pub fn regular_polygon(m: usize, r: f64) -> Result<PlKnot> {
    if m < 3 {
        return Err(param("need at least 3 sides"));
    }
    if !(r > 0.0) {
        return Err(param("radius must be positive"));
    }
    PlKnot::new(
        (0..m)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / m as f64;
                [r * a.cos(), r * a.sin(), 0.0]
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trefoil_is_valid() {
        let k = torus_knot(2, 3, 10.0, 2.0, 200).unwrap();
        assert_eq!(k.len(), 200);
        assert!(k.is_transverse());
    }

    #[test]
    fn bad_torus_parameters() {
        assert!(matches!(torus_knot(2, 4, 10.0, 2.0, 200), Err(Error::Parameter(_))));
        assert!(matches!(torus_knot(2, 3, 2.0, 2.0, 200), Err(Error::Parameter(_))));
        assert!(matches!(torus_knot(2, 3, 10.0, 2.0, 20), Err(Error::Parameter(_))));
    }

    #[test]
    fn exchanged_torus_parameters_agree() {
        let a = torus_knot(2, 3, 10.0, 2.0, 200).unwrap();
        let b = torus_knot(3, 2, 10.0, 2.0, 200).unwrap();
        assert!((a.total_length() - b.total_length()).abs() < 0.01 * a.total_length());
    }

    #[test]
    fn planar_square_is_rotated_but_keeps_lengths() {
        let k = PlKnot::new(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]]).unwrap();
        assert!(k.is_transverse());
        assert!((k.total_length() - 4.0).abs() < 1e-12);
        assert!((dist(&k.points()[0], &k.points()[2]) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn self_intersection_is_rejected() {
        let bow = vec![[0.0, 0.0, 0.0], [1.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        assert!(matches!(PlKnot::new(bow), Err(Error::Input(_))));
        assert!(PlKnot::new(vec![[0.0; 3], [0.0; 3], [1.0, 0.0, 0.0]]).is_err());
    }

    #[test]
    fn arc_helpers() {
        let k = regular_polygon(4, 1.0).unwrap();
        let l = k.total_length();
        assert!((k.arc_distance(0.1, l - 0.1) - 0.2).abs() < 1e-12);
        let side = k.segment_length(0);
        assert_eq!(k.segment_at(1.5 * side), 1);
        let p = k.point_at(0.5 * side);
        let (a, b) = k.segment(0);
        assert!(dist(&p, a) - dist(&p, b) < 1e-12);
        assert!((k.vertex_angle(0) - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!((k.feature_size() - side).abs() < 1e-9);
    }
}
