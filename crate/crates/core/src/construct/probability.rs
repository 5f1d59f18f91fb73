//! Monte Carlo frequencies of the degenerate configurations that a random
//! perturbation of unit size must avoid.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::geometry::{hull_distance, minimax_point};
use crate::linalg::{dot, norm, sub};
use crate::rng;

/// Smallest trial count accepted by the estimators.
pub const MIN_TRIALS: usize = 10_000;
const CHUNK: usize = 4096;
/// Circumradius of the regular simplices whose vertices are the ball centres.
const CENTER_RADIUS: f64 = 1.2;

/// Arrangement of random simplices. Every vertex is uniform in the unit ball
/// about a fixed centre; centres are at most 3 apart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scenario {
    /// Two vertex-disjoint k-simplices whose centre simplices cross at the
    /// origin. Bad when the simplices come within `eps`.
    Pair { k: usize, n: usize },
    /// The `j` facets of a simplex on `j` vertices (`2 <= j <= k + 2`). Bad
    /// when the `eps`-neighbourhoods of all facets share a point.
    Family { j: usize, k: usize, n: usize },
    /// As `Pair`, but bad when the `eps`-neighbourhoods of the affine hulls meet.
    PlanePair { k: usize, n: usize },
    /// Two k-simplices sharing `shared` vertices. Bad when the intersection
    /// of the `eps`-neighbourhoods of their hulls is not certified to lie in
    /// the unit neighbourhood of the intersection of the hulls.
    PlaneNearIntersection { k: usize, n: usize, shared: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BadProbability {
    pub eps: f64,
    pub p_hat: f64,
    /// Wilson score interval.
    pub ci95: (f64, f64),
    pub trials: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub delta: f64,
    /// Empirical `delta`-quantile of `|det M|`.
    pub quantile: f64,
    /// `quantile / delta`, the implied constant.
    pub ratio: f64,
    pub trials: usize,
}

/// Vertices of a regular simplex with `count` vertices in the first
/// `count - 1` coordinates of `R^n`, centred at the origin.
fn regular_simplex(count: usize, n: usize, radius: f64, offset: usize) -> Vec<Vec<f64>> {
    let m = count - 1;
    if m == 0 {
        return vec![vec![0.0; n]];
    }
    let norm_e = (m as f64 / count as f64).sqrt();
    (0..count)
        .map(|i| {
            let mut p = vec![0.0; n];
            for j in 1..=m {
                // Helmert basis vector j: ones on 0..j, -j at j
                let b = if i < j {
                    1.0
                } else if i == j {
                    -(j as f64)
                } else {
                    0.0
                };
                p[offset + j - 1] = b / ((j * (j + 1)) as f64).sqrt() * radius / norm_e;
            }
            p
        })
        .collect()
}

impl Scenario {
    fn validate(&self) -> Result<()> {
        match *self {
            Scenario::Pair { k, n } | Scenario::PlanePair { k, n } => {
                if n < 2 * k + 1 {
                    return Err(param("need n >= 2k+1"));
                }
            }
            Scenario::Family { j, k, n } => {
                if j < 2 || j > k + 2 {
                    return Err(param("need 2 <= J <= k+2"));
                }
                if n < j - 1 {
                    return Err(param("need n >= J-1"));
                }
            }
            Scenario::PlaneNearIntersection { k, n, shared } => {
                if shared == 0 || shared > k {
                    return Err(param("need 1 <= shared <= k"));
                }
                if n < 2 * k + 1 - shared {
                    return Err(param("need n >= 2k+1-shared"));
                }
            }
        }
        Ok(())
    }

    fn centers(&self) -> Vec<Vec<f64>> {
        match *self {
            Scenario::Pair { k, n } | Scenario::PlanePair { k, n } => {
                let mut c = regular_simplex(k + 1, n, CENTER_RADIUS, 0);
                c.extend(regular_simplex(k + 1, n, CENTER_RADIUS, k));
                c
            }
            Scenario::Family { j, n, .. } => regular_simplex(j, n, CENTER_RADIUS, 0),
            Scenario::PlaneNearIntersection { k, n, shared } => regular_simplex(2 * (k + 1) - shared, n, CENTER_RADIUS, 0),
        }
    }

    /// Statistic `s` of one configuration; the configuration is bad at `eps`
    /// exactly when `s <= eps`.
    fn statistic(&self, v: &[Vec<f64>]) -> f64 {
        match *self {
            Scenario::Pair { k, .. } => {
                let a: Vec<&[f64]> = v[..=k].iter().map(|p| p.as_slice()).collect();
                let b: Vec<&[f64]> = v[k + 1..].iter().map(|p| p.as_slice()).collect();
                hull_distance(&a, &b)
            }
            Scenario::PlanePair { k, .. } => {
                let a: Vec<&[f64]> = v[..=k].iter().map(|p| p.as_slice()).collect();
                let b: Vec<&[f64]> = v[k + 1..].iter().map(|p| p.as_slice()).collect();
                affine_distance(&a, &b) / 2.0
            }
            Scenario::Family { j, .. } => {
                let fam: Vec<Vec<&[f64]>> = (0..j)
                    .map(|skip| (0..j).filter(|&i| i != skip).map(|i| v[i].as_slice()).collect())
                    .collect();
                minimax_point(&fam, 1e-10).0
            }
            Scenario::PlaneNearIntersection { k, shared, .. } => {
                let common: Vec<&[f64]> = v[..shared].iter().map(|p| p.as_slice()).collect();
                let own = k + 1 - shared;
                let mut a = common.clone();
                a.extend(v[shared..shared + own].iter().map(|p| p.as_slice()));
                let mut b = common;
                b.extend(v[shared + own..].iter().map(|p| p.as_slice()));
                let lam = intersection_eigenvalue(&a, &b, shared - 1);
                (lam.max(0.0) / 2.0).sqrt()
            }
        }
    }
}

/// Orthonormal basis of the span of `vectors`, dropping dependent ones.
fn orthonormal(vectors: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for mut w in vectors {
        let scale = norm(&w).max(1e-300);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let l = norm(&w);
        if l > 1e-10 * scale {
            basis.push(w.into_iter().map(|x| x / l).collect());
        }
    }
    basis
}

fn directions(s: &[&[f64]]) -> Vec<Vec<f64>> {
    s[1..].iter().map(|p| sub(p, s[0])).collect()
}

/// Distance between the affine hulls of two point sets.
pub(crate) fn affine_distance(a: &[&[f64]], b: &[&[f64]]) -> f64 {
    let mut dirs = directions(a);
    dirs.extend(directions(b));
    let basis = orthonormal(dirs);
    let mut r = sub(b[0], a[0]);
    for q in &basis {
        let c = dot(&r, q);
        r.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
    }
    norm(&r)
}

/// Smallest eigenvalue of `(I - P_1) + (I - P_2)` on the orthogonal
/// complement of the common directions, `P_i` the projection onto the
/// direction space of hull `i`. A point within `e` of both hulls lies within
/// `e * sqrt(2 / lambda)` of their intersection.
fn intersection_eigenvalue(a: &[&[f64]], b: &[&[f64]], common_dim: usize) -> f64 {
    let n = a[0].len();
    let mut q = DMatrix::<f64>::identity(n, n) * 2.0;
    for basis in [orthonormal(directions(a)), orthonormal(directions(b))] {
        for u in &basis {
            for i in 0..n {
                for j in 0..n {
                    q[(i, j)] -= u[i] * u[j];
                }
            }
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(q).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev[common_dim]
}

/// Per-trial statistics, generated in fixed chunks so that the result does
/// not depend on the thread count.
fn statistics(scenario: Scenario, trials: usize, seed: u64) -> Vec<f64> {
    let centers = scenario.centers();
    let n = centers[0].len();
    let chunks = trials.div_ceil(CHUNK);
    let per_chunk: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut g = rng::stream(seed, c as u64);
            let len = CHUNK.min(trials - c * CHUNK);
            (0..len)
                .map(|_| {
                    let v: Vec<Vec<f64>> = centers
                        .iter()
                        .map(|ctr| {
                            let off = rng::in_ball(&mut g, n, 1.0);
                            ctr.iter().zip(&off).map(|(a, b)| a + b).collect()
                        })
                        .collect();
                    scenario.statistic(&v)
                })
                .collect()
        })
        .collect();
    per_chunk.concat()
}

fn wilson(hits: usize, trials: usize) -> (f64, f64) {
    let z = 1.959_963_984_540_054_f64;
    let nn = trials as f64;
    let p = hits as f64 / nn;
    let denom = 1.0 + z * z / nn;
    let center = (p + z * z / (2.0 * nn)) / denom;
    let half = z * (p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(param(format!("need at least {MIN_TRIALS} trials")));
    }
    Ok(())
}

/// Frequency of the bad event of `scenario` at scale `eps`.
pub fn estimate_bad_probability(scenario: Scenario, eps: f64, trials: usize, seed: u64) -> Result<BadProbability> {
    Ok(bad_probability_curve(scenario, &[eps], trials, seed)?.remove(0))
}

/// Frequencies at several scales from one set of samples, hence monotone in `eps`.
pub fn bad_probability_curve(scenario: Scenario, eps: &[f64], trials: usize, seed: u64) -> Result<Vec<BadProbability>> {
    scenario.validate()?;
    check_trials(trials)?;
    if eps.iter().any(|e| !(*e >= 0.0)) {
        return Err(param("eps must be non-negative"));
    }
    let stats = statistics(scenario, trials, seed);
    Ok(eps
        .iter()
        .map(|&e| {
            let hits = stats.iter().filter(|&&s| s <= e).count();
            BadProbability { eps: e, p_hat: hits as f64 / trials as f64, ci95: wilson(hits, trials), trials }
        })
        .collect())
}

/// Empirical `delta`-quantile of `|det M|` for `M` uniform in the unit ball
/// of `d x d` matrices.
pub fn inverse_norm_tail(d: usize, delta: f64, trials: usize, seed: u64) -> Result<TailEstimate> {
    if d == 0 {
        return Err(param("d must be positive"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(param("delta must lie in (0, 1)"));
    }
    check_trials(trials)?;
    let chunks = trials.div_ceil(CHUNK);
    let mut dets: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut g = rng::stream(seed, c as u64);
            let len = CHUNK.min(trials - c * CHUNK);
            (0..len)
                .map(|_| DMatrix::from_row_slice(d, d, &rng::in_ball(&mut g, d * d, 1.0)).determinant().abs())
                .collect::<Vec<f64>>()
        })
        .collect::<Vec<_>>()
        .concat();
    dets.sort_by(f64::total_cmp);
    let idx = ((delta * trials as f64).ceil() as usize).clamp(1, trials) - 1;
    let quantile = dets[idx];
    Ok(TailEstimate { delta, quantile, ratio: quantile / delta, trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dist;

    #[test]
    fn centres_are_close() {
        let scenarios = [
            Scenario::Pair { k: 1, n: 3 },
            Scenario::Pair { k: 2, n: 5 },
            Scenario::Family { j: 3, k: 1, n: 3 },
            Scenario::Family { j: 4, k: 2, n: 5 },
            Scenario::PlaneNearIntersection { k: 2, n: 5, shared: 1 },
        ];
        for s in scenarios {
            let c = s.centers();
            for a in &c {
                assert!((norm(a) - CENTER_RADIUS).abs() < 1e-12 || norm(a) < 1e-12);
                for b in &c {
                    assert!(dist(a, b) <= 3.0);
                }
            }
        }
    }

    #[test]
    fn zero_eps_is_never_bad() {
        let p = estimate_bad_probability(Scenario::Pair { k: 1, n: 3 }, 0.0, 10_000, 1).unwrap();
        assert_eq!(p.p_hat, 0.0);
    }

    #[test]
    fn monotone_in_eps() {
        let eps = [0.01, 0.02, 0.05, 0.1, 0.3];
        let c = bad_probability_curve(Scenario::Family { j: 3, k: 1, n: 3 }, &eps, 10_000, 4).unwrap();
        for w in c.windows(2) {
            assert!(w[0].p_hat <= w[1].p_hat);
        }
        assert!(c[4].ci95.0 <= c[4].p_hat && c[4].p_hat <= c[4].ci95.1);
    }

    #[test]
    fn plane_pair_dominates_pair() {
        // hulls are closer than simplices, and the plane event uses eps on each side
        let eps = [0.05];
        let a = bad_probability_curve(Scenario::Pair { k: 1, n: 3 }, &eps, 10_000, 9).unwrap();
        let b = bad_probability_curve(Scenario::PlanePair { k: 1, n: 3 }, &eps, 10_000, 9).unwrap();
        assert!(b[0].p_hat >= a[0].p_hat);
    }

    #[test]
    fn affine_distance_of_skew_lines() {
        let a: [&[f64]; 2] = [&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0]];
        let b: [&[f64]; 2] = [&[5.0, 0.0, 2.0], &[5.0, 1.0, 2.0]];
        assert!((affine_distance(&a, &b) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_lines_have_unit_eigenvalue() {
        let a: [&[f64]; 2] = [&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0]];
        let b: [&[f64]; 2] = [&[0.0, 0.0, 0.0], &[0.0, 1.0, 0.0]];
        assert!((intersection_eigenvalue(&a, &b, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn determinant_tail_in_one_dimension() {
        for delta in [0.1, 0.5] {
            let t = inverse_norm_tail(1, delta, 100_000, 3).unwrap();
            assert!((t.quantile - delta).abs() < 0.01, "{t:?}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(estimate_bad_probability(Scenario::Pair { k: 1, n: 2 }, 0.1, 10_000, 1).is_err());
        assert!(estimate_bad_probability(Scenario::Family { j: 4, k: 1, n: 3 }, 0.1, 10_000, 1).is_err());
        assert!(estimate_bad_probability(Scenario::Pair { k: 1, n: 3 }, 0.1, 10, 1).is_err());
        assert!(inverse_norm_tail(2, 1.5, 10_000, 1).is_err());
    }
}
