//! Seeded random piecewise contractions.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::billiard::{self, Point, PolygonScene};
use crate::error::{Error, Result};
use crate::map::{PiecewiseAffineContraction, Side};
use crate::rational::{self, Rational};

pub const MAX_ATTEMPTS: usize = 1000;

/// Largest slope denominator drawn.
pub const SLOPE_DENOMINATOR: i64 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    General,
    IncreasingLeftClosed,
}

pub fn fuzz_generate(n: usize, seed: u64) -> Result<PiecewiseAffineContraction> {
    generate(n, seed, Shape::General)
}

/// Increasing on every piece, every piece of the form `[x_{i-1}, x_i)`.
pub fn fuzz_generate_increasing(n: usize, seed: u64) -> Result<PiecewiseAffineContraction> {
    generate(n, seed, Shape::IncreasingLeftClosed)
}

fn generate(n: usize, seed: u64, shape: Shape) -> Result<PiecewiseAffineContraction> {
    if n == 0 {
        return Err(Error::PreconditionFailed("need at least one piece".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((n as u64) << 48));
    for _ in 0..MAX_ATTEMPTS {
        if let Some(map) = attempt(n, shape, &mut rng) {
            return Ok(map);
        }
    }
    Err(Error::GenerationFailed(MAX_ATTEMPTS))
}

fn attempt(n: usize, shape: Shape, rng: &mut ChaCha8Rng) -> Option<PiecewiseAffineContraction> {
    let den = rng.gen_range(2 * n as i64..=64);
    let mut nums: Vec<i64> = (1..den).collect();
    nums.shuffle(rng);
    let mut cuts: Vec<Rational> = nums[..n - 1].iter().map(|&k| rational::ratio(k, den)).collect();
    cuts.sort();
    // Left ownership is drawn as often as right so `(x_{i-1}, x_i]` pieces get exercised.
    let owners: Vec<Side> = (0..n - 1)
        .map(|_| match shape {
            Shape::IncreasingLeftClosed => Side::Right,
            Shape::General if rng.gen_bool(0.5) => Side::Left,
            Shape::General => Side::Right,
        })
        .collect();
    let slopes: Vec<Rational> = (0..n)
        .map(|_| {
            let q = rng.gen_range(2..=SLOPE_DENOMINATOR);
            let p = rng.gen_range(1..q);
            let negative = shape == Shape::General && rng.gen_bool(0.5);
            rational::ratio(if negative { -p } else { p }, q)
        })
        .collect();
    let mut xs = vec![rational::zero()];
    xs.extend(cuts.iter().cloned());
    xs.push(rational::one());
    let image_len: Vec<Rational> = (0..n).map(|i| (&xs[i + 1] - &xs[i]) * rational::abs(&slopes[i])).collect();
    let free = rational::one() - image_len.iter().sum::<Rational>();
    let weights: Vec<i64> = (0..=n).map(|_| if rng.gen_bool(0.25) { 0 } else { rng.gen_range(1..=8) }).collect();
    let total: i64 = weights.iter().sum();
    if total == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut intercepts = vec![rational::zero(); n];
    let mut y = &free * rational::ratio(weights[0], total);
    for (k, &i) in order.iter().enumerate() {
        let anchor = if slopes[i] > rational::zero() { &xs[i] } else { &xs[i + 1] };
        intercepts[i] = &y - &slopes[i] * anchor;
        y = y + &image_len[i] + &free * rational::ratio(weights[k + 1], total);
    }
    let affine: Vec<(Rational, Rational)> = slopes.into_iter().zip(intercepts).collect();
    PiecewiseAffineContraction::from_partition(&cuts, &affine, &owners).ok()
}

/// The 3-4-5 triangle with a random strictly inward integer direction on each edge.
pub fn fuzz_scene(seed: u64) -> Result<PolygonScene> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let mut dir = || Point::ints(rng.gen_range(-4..=4), rng.gen_range(-4..=4));
        if let Ok(scene) = billiard::triangle_345([dir(), dir(), dir()]) {
            return Ok(scene);
        }
    }
    Err(Error::GenerationFailed(MAX_ATTEMPTS))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_valid() {
        for n in 1..=5 {
            for seed in 0..40 {
                let a = fuzz_generate(n, seed).unwrap();
                assert_eq!(a, fuzz_generate(n, seed).unwrap());
                assert_eq!(a.n(), n);
                assert!(a.validate().is_ok());
                let b = fuzz_generate_increasing(n, seed).unwrap();
                assert!(b.pieces().iter().all(|p| p.is_increasing() && p.domain.lo_closed));
            }
        }
    }

    #[test]
    fn left_owned_breakpoints_occur() {
        let left = (0..50u64)
            .map(|s| fuzz_generate(4, s).unwrap())
            .filter(|m| (1..m.n()).any(|i| m.owner_side(i) == Side::Left))
            .count();
        assert!(left > 10);
    }
}
