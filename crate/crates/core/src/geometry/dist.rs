//! Distances between convex hulls of small point sets, closest points on
//! simplices, smallest enclosing balls and minimax points.

use crate::linalg::{axpy, dist, dot, norm, norm2, scale, solve, sub};

/// Closest point of `aff(points)` to the origin together with its affine
/// weights, or `None` when the points are affinely dependent.
fn affine_projection(points: &[Vec<f64>]) -> Option<(Vec<f64>, Vec<f64>)> {
    let m = points.len();
    if m == 1 {
        return Some((points[0].clone(), vec![1.0]));
    }
    // minimise |sum mu_i p_i| subject to sum mu_i = 1
    let mut a = vec![vec![0.0; m + 1]; m + 1];
    for i in 0..m {
        for j in 0..m {
            a[i][j] = dot(&points[i], &points[j]);
        }
        a[i][m] = 1.0;
        a[m][i] = 1.0;
    }
    let mut b = vec![0.0; m + 1];
    b[m] = 1.0;
    let sol = solve(a, b)?;
    let mu = sol[..m].to_vec();
    let mut p = vec![0.0; points[0].len()];
    for (w, q) in mu.iter().zip(points) {
        p = axpy(&p, *w, q);
    }
    Some((p, mu))
}

/// Closest point to the origin in the convex hull of at most a handful of
/// points, by enumerating faces. Returns the point and the indices of the
/// face whose relative interior contains it.
pub fn closest_to_origin(points: &[Vec<f64>]) -> (Vec<f64>, Vec<usize>) {
    let m = points.len();
    let mut best: Option<(f64, Vec<f64>, Vec<usize>)> = None;
    for mask in 1u32..(1u32 << m) {
        let idx: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        let sub_pts: Vec<Vec<f64>> = idx.iter().map(|&i| points[i].clone()).collect();
        if let Some((p, mu)) = affine_projection(&sub_pts) {
            if mu.iter().all(|&w| w >= -1e-12) {
                let d = norm2(&p);
                if best.as_ref().map_or(true, |b| d < b.0) {
                    best = Some((d, p, idx));
                }
            }
        }
    }
    best.map(|(_, p, i)| (p, i)).unwrap_or_else(|| (points[0].clone(), vec![0]))
}

/// Closest point of the simplex `conv(vertices)` to `x`.
pub fn closest_point_on_simplex(x: &[f64], vertices: &[&[f64]]) -> Vec<f64> {
    match vertices.len() {
        1 => vertices[0].to_vec(),
        2 => {
            let (a, b) = (vertices[0], vertices[1]);
            let ab = sub(b, a);
            let l2 = norm2(&ab);
            let t = if l2 > 0.0 { (dot(&sub(x, a), &ab) / l2).clamp(0.0, 1.0) } else { 0.0 };
            axpy(a, t, &ab)
        }
        _ => {
            let shifted: Vec<Vec<f64>> = vertices.iter().map(|v| sub(v, x)).collect();
            let (p, _) = closest_to_origin(&shifted);
            axpy(x, 1.0, &p)
        }
    }
}

pub fn point_simplex_distance(x: &[f64], vertices: &[&[f64]]) -> f64 {
    dist(x, &closest_point_on_simplex(x, vertices))
}

/// Distance between closed segments `[p0,p1]` and `[q0,q1]` in any dimension.
pub fn segment_distance(p0: &[f64], p1: &[f64], q0: &[f64], q1: &[f64]) -> f64 {
    let (mut a, mut e, mut b, mut c, mut f) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..p0.len() {
        let d1 = p1[i] - p0[i];
        let d2 = q1[i] - q0[i];
        let r = p0[i] - q0[i];
        a += d1 * d1;
        e += d2 * d2;
        b += d1 * d2;
        c += d1 * r;
        f += d2 * r;
    }
    let eps = 1e-300;
    let (s, t) = if a <= eps && e <= eps {
        (0.0, 0.0)
    } else if a <= eps {
        (0.0, (f / e).clamp(0.0, 1.0))
    } else if e <= eps {
        ((-c / a).clamp(0.0, 1.0), 0.0)
    } else {
        let denom = a * e - b * b;
        let mut s0 = if denom > 1e-14 * a * e { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
        let mut t0 = (b * s0 + f) / e;
        if t0 < 0.0 {
            t0 = 0.0;
            s0 = (-c / a).clamp(0.0, 1.0);
        } else if t0 > 1.0 {
            t0 = 1.0;
            s0 = ((b - c) / a).clamp(0.0, 1.0);
        }
        (s0, t0)
    };
    let mut d2 = 0.0;
    for i in 0..p0.len() {
        let x = p0[i] + s * (p1[i] - p0[i]) - q0[i] - t * (q1[i] - q0[i]);
        d2 += x * x;
    }
    d2.sqrt()
}

fn point_segment(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    point_simplex_distance(x, &[a, b])
}

/// Distance between `conv(a)` and `conv(b)`. Closed form for points and
/// segments; otherwise a GJK iteration on the Minkowski difference that
/// stops when the duality gap is below `1e-10` relative.
pub fn hull_distance(a: &[&[f64]], b: &[&[f64]]) -> f64 {
    match (a.len(), b.len()) {
        (1, 1) => dist(a[0], b[0]),
        (1, 2) => point_segment(a[0], b[0], b[1]),
        (2, 1) => point_segment(b[0], a[0], a[1]),
        (2, 2) => segment_distance(a[0], a[1], b[0], b[1]),
        (1, _) => point_simplex_distance(a[0], b),
        (_, 1) => point_simplex_distance(b[0], a),
        _ => gjk_distance(a, b),
    }
}

fn support(a: &[&[f64]], b: &[&[f64]], d: &[f64]) -> Vec<f64> {
    let pa = a.iter().max_by(|x, y| dot(x, d).total_cmp(&dot(y, d))).unwrap();
    let pb = b.iter().min_by(|x, y| dot(x, d).total_cmp(&dot(y, d))).unwrap();
    sub(pa, pb)
}

pub fn gjk_distance(a: &[&[f64]], b: &[&[f64]]) -> f64 {
    let mut v = sub(a[0], b[0]);
    let mut w_set: Vec<Vec<f64>> = Vec::new();
    for _ in 0..200 {
        let vv = norm2(&v);
        if vv < 1e-28 {
            return 0.0;
        }
        let w = support(a, b, &scale(&v, -1.0));
        if vv - dot(&v, &w) <= 1e-10 * vv || w_set.iter().any(|u| dist(u, &w) < 1e-15) {
            break;
        }
        w_set.push(w);
        let (p, keep) = closest_to_origin(&w_set);
        w_set = keep.into_iter().map(|i| w_set[i].clone()).collect();
        v = p;
    }
    norm(&v)
}

/// Smallest enclosing ball of a point set (Welzl's recursion).
pub fn min_enclosing_ball(points: &[&[f64]]) -> (Vec<f64>, f64) {
    let n = points[0].len();
    let (c, r2) = welzl(points, points.len(), &mut Vec::new(), n);
    (c, r2.max(0.0).sqrt())
}

fn welzl<'a>(p: &[&'a [f64]], m: usize, r: &mut Vec<&'a [f64]>, n: usize) -> (Vec<f64>, f64) {
    if m == 0 || r.len() == n + 1 {
        return ball_through(r, n);
    }
    let q = p[m - 1];
    let (c, r2) = welzl(p, m - 1, r, n);
    if r2 >= 0.0 && norm2(&sub(q, &c)) <= r2 * (1.0 + 1e-12) + 1e-24 {
        return (c, r2);
    }
    r.push(q);
    let out = welzl(p, m - 1, r, n);
    r.pop();
    out
}

/// Smallest ball with all of `r` on its boundary (circumsphere inside the
/// affine hull). Degenerate support sets fall back to the best sub-ball.
fn ball_through(r: &[&[f64]], n: usize) -> (Vec<f64>, f64) {
    match r.len() {
        0 => (vec![0.0; n], -1.0),
        1 => (r[0].to_vec(), 0.0),
        _ => {
            let p0 = r[0];
            let diffs: Vec<Vec<f64>> = r[1..].iter().map(|q| sub(q, p0)).collect();
            let m = diffs.len();
            let a: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| 2.0 * dot(&diffs[i], &diffs[j])).collect()).collect();
            let b: Vec<f64> = diffs.iter().map(|d| norm2(d)).collect();
            match solve(a, b) {
                Some(lam) => {
                    let mut c = p0.to_vec();
                    for (l, d) in lam.iter().zip(&diffs) {
                        c = axpy(&c, *l, d);
                    }
                    let r2 = norm2(&sub(&c, p0));
                    (c, r2)
                }
                None => {
                    // affinely dependent: the farthest pair spans the ball
                    let mut best = (r[0].to_vec(), 0.0);
                    for i in 0..r.len() {
                        for j in i + 1..r.len() {
                            let c = crate::linalg::lerp(r[i], r[j], 0.5);
                            let rad2 = r.iter().map(|q| norm2(&sub(q, &c))).fold(0.0, f64::max);
                            if rad2 > best.1 {
                                best = (c, rad2);
                            }
                        }
                    }
                    best
                }
            }
        }
    }
}

/// `min_x max_j dist(x, conv(S_j))` for a family of simplices, by
/// alternating between closest points on each simplex and the centre of
/// their smallest enclosing ball. Any fixed point satisfies the optimality
/// condition for this convex problem. Returns the value and the minimiser.
pub fn minimax_point(family: &[Vec<&[f64]>], tol: f64) -> (f64, Vec<f64>) {
    let n = family[0][0].len();
    let bary: Vec<Vec<f64>> = family.iter().map(|s| crate::linalg::centroid(s)).collect();
    let mut x = crate::linalg::centroid(&bary.iter().map(|v| v.as_slice()).collect::<Vec<_>>());
    let eval = |x: &[f64]| family.iter().map(|s| point_simplex_distance(x, s)).fold(0.0, f64::max);
    let mut val = eval(&x);
    for _ in 0..5000 {
        let ys: Vec<Vec<f64>> = family.iter().map(|s| closest_point_on_simplex(&x, s)).collect();
        let refs: Vec<&[f64]> = ys.iter().map(|v| v.as_slice()).collect();
        let (c, _) = min_enclosing_ball(&refs);
        let nv = eval(&c);
        if nv < val - tol * 1e-3 {
            x = c;
            val = nv;
        } else {
            if nv < val {
                x = c;
                val = nv;
            }
            break;
        }
    }
    debug_assert_eq!(x.len(), n);
    (val, x)
}
