//! Embedding constructions and the Monte Carlo probes that accompany them.

mod fold;
mod kb;
mod probability;
mod refine;

pub use fold::{folded_grid_embedding, grid_graph, retraction_embed_graph, FoldMap, FoldedGrid, RetractionEmbedding};
pub use kb::{kb_sphere_embedding, kb_sphere_embedding_with, KbEmbedding};
pub use probability::{bad_probability_curve, estimate_bad_probability, inverse_norm_tail, BadProbability, Scenario, TailEstimate, MIN_TRIALS};
pub use refine::refine_by_unit_lattice;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::complex::{CellId, SimplicialComplex};
use crate::error::{param, Error, Result};
use crate::geometry::{
    combinatorial_thickness, disjoint_pairs_within, hull_distance, minimal_families, minimax_point,
    point_simplex_distance, strong_combinatorial_thickness, EmbeddedComplex, RefinedEmbedding,
};
use crate::rng;

/// Number of fresh draws allowed before a random embedding is declared degenerate.
pub const RESAMPLE_LIMIT: usize = 10;

/// Send every vertex to an independent uniform point of the ball of radius
/// `r` and extend linearly. Draws with zero thickness are redrawn.
pub fn random_facewise_linear(x: &SimplicialComplex, n: usize, r: f64, seed: u64) -> Result<(EmbeddedComplex, f64)> {
    if n == 0 {
        return Err(param("ambient dimension must be positive"));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(param("radius must be positive"));
    }
    if x.vertex_count() == 0 {
        return Err(Error::Input("empty complex".into()));
    }
    for attempt in 0..RESAMPLE_LIMIT as u64 {
        let mut g = rng::stream(seed, attempt);
        let coords = (0..x.vertex_count()).map(|_| rng::in_ball(&mut g, n, r)).collect();
        let e = EmbeddedComplex::new(x.clone(), coords)?;
        let t = combinatorial_thickness(&e).value;
        if t > 0.0 {
            return Ok((e, t));
        }
    }
    Err(Error::Construction(format!("no embedding with positive thickness after {RESAMPLE_LIMIT} draws")))
}

/// Largest number of top-dimensional simplices whose images meet one of
/// `balls` random unit balls centred in the ball of radius `r`.
pub fn unit_ball_hits(e: &EmbeddedComplex, r: f64, balls: usize, seed: u64) -> usize {
    let c = e.complex();
    let k = c.dim();
    let mut g = rng::stream(seed, 0x6261_6c6c);
    let mut best = 0;
    for _ in 0..balls {
        let x = rng::in_ball(&mut g, e.ambient_dim(), r);
        let hits = (0..c.count(k))
            .filter(|&i| point_simplex_distance(&x, &e.simplex_points(CellId::new(k, i))) <= 1.0)
            .count();
        best = best.max(hits);
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoScaleOptions {
    /// Candidates tried per vertex in the local placement step.
    pub candidates: usize,
    /// Use the strong (neighbourhood-family) thickness as the score.
    pub strong: bool,
    /// Seeds tried before giving up.
    pub retries: usize,
}

impl Default for TwoScaleOptions {
    fn default() -> Self {
        TwoScaleOptions { candidates: 64, strong: false, retries: 5 }
    }
}

#[derive(Clone, Debug)]
pub struct TwoScaleEmbedding {
    /// Embedding of the lattice refinement, rescaled to thickness 1.
    pub embedding: RefinedEmbedding,
    /// Thickness reached before rescaling.
    pub achieved_eps: f64,
    /// Radius `N^{1/(n-k)}` of the coarse random placement.
    pub initial_radius: f64,
    /// Radius of the rescaled embedding.
    pub radius: f64,
    /// Seed of the successful attempt.
    pub seed_used: u64,
}

/// Coarse random placement at radius `N^{1/(n-k)}`, subdivision by the unit
/// lattice, then a sequential pass moving every fine vertex to the best of
/// `candidates` uniform points of the unit ball about its coarse position.
/// A candidate is scored by the smallest separation it leaves among faces
/// that started within distance 3 of each other.
pub fn two_scale_embedding(x: &SimplicialComplex, n: usize, seed: u64, opts: TwoScaleOptions) -> Result<TwoScaleEmbedding> {
    let k = x.dim();
    if n < 2 * k + 1 {
        return Err(param(format!("need n >= 2k+1 = {}", 2 * k + 1)));
    }
    if opts.candidates == 0 || opts.retries == 0 {
        return Err(param("candidates and retries must be positive"));
    }
    let big_n = x.total_count() as f64;
    let initial_radius = big_n.powf(1.0 / (n - k) as f64);
    let mut last_err = None;
    for attempt in 0..opts.retries as u64 {
        let s = rng::derive(seed, attempt);
        match two_scale_once(x, n, initial_radius, s, opts) {
            Ok((emb, eps)) if eps > 0.0 => {
                let fine = emb.fine.scaled(1.0 / eps);
                let radius = fine.radius();
                let embedding = RefinedEmbedding::new(emb.coarse.clone(), fine, emb.refinement.clone())?;
                return Ok(TwoScaleEmbedding { embedding, achieved_eps: eps, initial_radius, radius, seed_used: s });
            }
            Ok(_) => last_err = Some("zero thickness".to_string()),
            Err(Error::Construction(m)) => last_err = Some(m),
            Err(e) => return Err(e),
        }
    }
    Err(Error::Construction(format!(
        "two-scale embedding failed after {} seeds: {}",
        opts.retries,
        last_err.unwrap_or_default()
    )))
}

fn two_scale_once(x: &SimplicialComplex, n: usize, r: f64, seed: u64, opts: TwoScaleOptions) -> Result<(RefinedEmbedding, f64)> {
    let (coarse, _) = random_facewise_linear(x, n, r, seed)?;
    let refined = refine_by_unit_lattice(&coarse)?;
    let fine = &refined.fine;
    let fc = fine.complex();
    let ids: Vec<CellId> = fc.cell_ids().collect();
    let pos_of: HashMap<CellId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    // events: pairs that can still come close after every vertex moves by at most 1
    let mut nb: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    for (a, b) in disjoint_pairs_within(fine, 3.0) {
        let (ia, ib) = (pos_of[&a], pos_of[&b]);
        nb[ia].push(ib);
        nb[ib].push(ia);
    }
    let stars = fc.vertex_stars();
    let families: Vec<Vec<CellId>> = if opts.strong { minimal_families(fc, k_plus_two(fc)) } else { Vec::new() };
    let mut fam_of: Vec<Vec<usize>> = vec![Vec::new(); fc.vertex_count()];
    for (fi, fam) in families.iter().enumerate() {
        let mut vs: Vec<usize> = fam.iter().flat_map(|&id| fc.face(id).iter().copied()).collect();
        vs.sort_unstable();
        vs.dedup();
        for v in vs {
            fam_of[v].push(fi);
        }
    }
    let home: Vec<Vec<f64>> = fine.coords().to_vec();
    let mut pos = home.clone();
    let mut g = rng::stream(seed, 0x706c_6163);
    let points = |pos: &Vec<Vec<f64>>, id: CellId| -> Vec<Vec<f64>> { fc.face(id).iter().map(|&v| pos[v].clone()).collect() };
    for v in 0..fc.vertex_count() {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for _ in 0..opts.candidates {
            let off = rng::in_ball(&mut g, n, 1.0);
            let cand: Vec<f64> = home[v].iter().zip(&off).map(|(a, b)| a + b).collect();
            pos[v] = cand.clone();
            let mut score = f64::INFINITY;
            'events: for &sid in &stars[v] {
                let sp = points(&pos, sid);
                let sr: Vec<&[f64]> = sp.iter().map(|p| p.as_slice()).collect();
                for &t in &nb[pos_of[&sid]] {
                    let tp = points(&pos, ids[t]);
                    let tr: Vec<&[f64]> = tp.iter().map(|p| p.as_slice()).collect();
                    let mut d = hull_distance(&sr, &tr);
                    if opts.strong {
                        d /= 2.0;
                    }
                    score = score.min(d);
                    if let Some((bs, _)) = &best {
                        if score <= *bs {
                            break 'events;
                        }
                    }
                }
            }
            if opts.strong {
                for &fi in &fam_of[v] {
                    let pts: Vec<Vec<Vec<f64>>> = families[fi].iter().map(|&id| points(&pos, id)).collect();
                    let refs: Vec<Vec<&[f64]>> = pts.iter().map(|s| s.iter().map(|p| p.as_slice()).collect()).collect();
                    score = score.min(minimax_point(&refs, 1e-9).0);
                }
            }
            if best.as_ref().map_or(true, |(bs, _)| score > *bs) {
                best = Some((score, cand));
            }
        }
        pos[v] = best.map(|b| b.1).unwrap_or_else(|| home[v].clone());
    }
    let moved = EmbeddedComplex::new(fc.clone(), pos)?;
    let eps = if opts.strong {
        strong_combinatorial_thickness(&moved).value
    } else {
        combinatorial_thickness(&moved).value
    };
    Ok((RefinedEmbedding::new(refined.coarse.clone(), moved, refined.refinement.clone())?, eps))
}

fn k_plus_two(c: &SimplicialComplex) -> usize {
    c.dim() + 2
}
