//! Seed handling. Every random stream is a ChaCha8 generator keyed by a user
//! seed and a stream index, so parallel work stays deterministic.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Rng64 = ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a stream label.
pub fn derive(seed: u64, stream: u64) -> u64 {
    splitmix(seed ^ splitmix(stream.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

pub fn stream(seed: u64, stream: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(derive(seed, stream))
}

/// Uniform point in the closed ball of radius `r` about the origin in R^n.
pub fn in_ball<R: Rng + ?Sized>(rng: &mut R, n: usize, r: f64) -> Vec<f64> {
    let dir = unit_vector(rng, n);
    let s: f64 = rng.gen::<f64>().powf(1.0 / n as f64) * r;
    dir.into_iter().map(|x| x * s).collect()
}

pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
