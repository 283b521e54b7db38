//! Seeded random streams shared by the probes and the verification harness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::Point;

pub type StreamRng = ChaCha8Rng;

pub fn rng(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` under `seed`.
pub fn stream(seed: u64, stream: u64) -> StreamRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn normal_vec<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Standard normal point scaled by `scale`.
pub fn normal_point<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> Point {
    let v: Vec<f64> = normal_vec(rng, dim).into_iter().map(|c| c * scale).collect();
    Point::new(v).expect("dim >= 1 and normal samples are finite")
}
