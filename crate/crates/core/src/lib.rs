//! Exact analysis of piecewise affine contractions of the half-open unit interval.
//!
//! Every predicate is decided with arbitrary-precision rationals. The only
//! numerical tolerance lives in [`conjugacy`], where the conjugating
//! homeomorphism is an infinite sum represented by certified enclosures.

pub mod analysis;
pub mod billiard;
pub mod census;
pub mod chains;
pub mod conjugacy;
pub mod cylinder;
pub mod error;
pub mod fuzz;
pub mod fixtures;
pub mod gapflow;
pub mod interval;
pub mod map;
pub mod rational;

pub use error::{Error, Result};
pub use interval::SidedInterval;
pub use map::{AffinePiece, PiecewiseAffineContraction, Side};
pub use rational::Rational;

/// Default bit-size ceiling for intermediate rationals.
pub const DEFAULT_BUDGET_BITS: u64 = 1 << 14;
