//! Lower bounds on the conformal length of a polygonal knot, and the check
//! that it stays below four times the distortion.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{distortion_with_budget, Distortion, PlKnot, DISTORTION_BUDGET};
use crate::error::{param, Result};
use crate::linalg::dist;
use crate::rng;

/// Radii tried per candidate center.
const RADII_PER_CENTER: usize = 48;
/// Candidate evaluations between refinement rounds.
const CANDIDATE_BLOCK: usize = 512;
const REFINE_BLOCK: usize = 64;
/// Relative slack for rounding when comparing the two sides of the bound.
const ROUNDING_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformalLength {
    /// `length(K ∩ B(center, radius)) / radius` for the best ball found.
    pub lower: f64,
    pub center: [f64; 3],
    pub radius: f64,
    pub evaluations: u64,
}

/// Length of `k` inside the closed ball `B(x, r)`, clipped exactly per segment.
pub fn length_in_ball(k: &PlKnot, x: &[f64; 3], r: f64) -> f64 {
    let r2 = r * r;
    let mut total = 0.0;
    for i in 0..k.len() {
        let (a, b) = k.segment(i);
        let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let w = [a[0] - x[0], a[1] - x[1], a[2] - x[2]];
        let qa = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        let qb = 2.0 * (d[0] * w[0] + d[1] * w[1] + d[2] * w[2]);
        let qc = w[0] * w[0] + w[1] * w[1] + w[2] * w[2] - r2;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc <= 0.0 {
            continue;
        }
        let sq = disc.sqrt();
        let t0 = ((-qb - sq) / (2.0 * qa)).max(0.0);
        let t1 = ((-qb + sq) / (2.0 * qa)).min(1.0);
        if t1 > t0 {
            total += (t1 - t0) * qa.sqrt();
        }
    }
    total
}

/// Radii for a center: distances to the knot vertices, thinned by rank to
/// at most `RADII_PER_CENTER` values and always including the largest.
fn event_radii(k: &PlKnot, x: &[f64; 3]) -> Vec<f64> {
    let mut d: Vec<f64> = k.points().iter().map(|p| dist(p, x)).filter(|&r| r > 0.0).collect();
    d.sort_by(f64::total_cmp);
    if d.len() <= RADII_PER_CENTER {
        return d;
    }
    let n = d.len();
    (0..RADII_PER_CENTER).map(|i| d[(i + 1) * n / RADII_PER_CENTER - 1]).collect()
}

/// Deterministic, budget-independent stream of candidate centers.
struct Centers<'a> {
    k: &'a PlKnot,
    order: Vec<usize>,
    pairs: rand_chacha::ChaCha8Rng,
    next: usize,
}

impl Iterator for Centers<'_> {
    type Item = [f64; 3];

    fn next(&mut self) -> Option<[f64; 3]> {
        let m = self.k.len();
        let j = self.next;
        self.next += 1;
        let p = self.k.points();
        let mid = |a: &[f64; 3], b: &[f64; 3]| [0, 1, 2].map(|c| 0.5 * (a[c] + b[c]));
        if j == 0 {
            let (lo, hi) = self.k.bbox();
            return Some(mid(&lo, &hi));
        }
        let i = (j - 1) / 3;
        match (j - 1) % 3 {
            0 if i < m => Some(p[self.order[i]]),
            1 if i < m => {
                let (a, b) = self.k.segment(self.order[i]);
                Some(mid(a, b))
            }
            _ => {
                let a = self.pairs.gen_range(0..m);
                let b = self.pairs.gen_range(0..m);
                Some(mid(&p[a], &p[b]))
            }
        }
    }
}

struct Best {
    lower: f64,
    center: [f64; 3],
    radius: f64,
}

/// Certified lower bound on the conformal length after `budget` ball
/// evaluations. The evaluation sequence does not depend on `budget`, so the
/// result is nondecreasing in it.
pub fn conformal_length(k: &PlKnot, budget: u64, seed: u64) -> Result<ConformalLength> {
    if budget == 0 {
        return Err(param("budget must be positive"));
    }
    let mut ev = Evaluator { k, budget, evaluations: 0, best: Best { lower: 0.0, center: k.points()[0], radius: 0.0 } };

    // A small ball around a vertex sees two half-edges.
    let m = k.len();
    let r0 = 0.25 * k.segment_length(0).min(k.segment_length(m - 1));
    ev.eval(k.points()[0], r0);

    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut rng::stream(seed, 0x636f6e));
    let mut centers = Centers { k, order, pairs: rng::stream(seed, 0x706169), next: 0 };
    let mut queue: Vec<([f64; 3], f64)> = Vec::new();
    let mut step = 0.0;
    let mut pos = (ev.best.center, ev.best.radius);
    loop {
        for _ in 0..CANDIDATE_BLOCK {
            if queue.is_empty() {
                let x = centers.next().expect("endless stream");
                queue = event_radii(k, &x).into_iter().rev().map(|r| (x, r)).collect();
            }
            if let Some((x, r)) = queue.pop() {
                if !ev.eval(x, r) {
                    return Ok(ev.finish());
                }
            }
        }
        // Coordinate descent from the best ball; restarts when a candidate wins.
        if (ev.best.center, ev.best.radius) != pos || step == 0.0 {
            pos = (ev.best.center, ev.best.radius);
            step = 0.1 * ev.best.radius;
        }
        let mut done = 0;
        while done < REFINE_BLOCK && step > 1e-9 * pos.1 {
            let mut improved = false;
            for axis in 0..4 {
                for sign in [1.0, -1.0] {
                    let (mut x, mut r) = pos;
                    if axis < 3 {
                        x[axis] += sign * step;
                    } else {
                        r = (r + sign * step).max(0.5 * r);
                    }
                    let before = ev.best.lower;
                    if !ev.eval(x, r) {
                        return Ok(ev.finish());
                    }
                    done += 1;
                    if ev.best.lower > before {
                        pos = (x, r);
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
    }
}

struct Evaluator<'a> {
    k: &'a PlKnot,
    budget: u64,
    evaluations: u64,
    best: Best,
}

impl Evaluator<'_> {
    /// Scores one ball; false once the budget is spent.
    fn eval(&mut self, x: [f64; 3], r: f64) -> bool {
        if self.evaluations >= self.budget {
            return false;
        }
        self.evaluations += 1;
        if r > 0.0 {
            let v = length_in_ball(self.k, &x, r) / r;
            if v > self.best.lower {
                self.best = Best { lower: v, center: x, radius: r };
            }
        }
        true
    }

    fn finish(self) -> ConformalLength {
        let b = self.best;
        ConformalLength { lower: b.lower, center: b.center, radius: b.radius, evaluations: self.evaluations }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvolCheck {
    pub convol: ConformalLength,
    pub distortion: Distortion,
    /// `convol.lower <= 4 * distortion.hi`; false means a bug.
    pub holds: bool,
}

/// Compare the conformal length lower bound with four times the distortion
/// upper bound.
pub fn check_convol_bound(k: &PlKnot, budget: u64, tol: f64, seed: u64) -> Result<ConvolCheck> {
    check_convol_bound_with(k, budget, tol, seed, DISTORTION_BUDGET)
}

/// As [`check_convol_bound`] with an explicit cap on distortion box evaluations.
pub fn check_convol_bound_with(
    k: &PlKnot,
    budget: u64,
    tol: f64,
    seed: u64,
    distortion_budget: u64,
) -> Result<ConvolCheck> {
    let convol = conformal_length(k, budget, seed)?;
    let distortion = distortion_with_budget(k, tol, distortion_budget)?;
    let holds = convol.lower <= 4.0 * distortion.hi * (1.0 + ROUNDING_SLACK);
    Ok(ConvolCheck { convol, distortion, holds })
}
