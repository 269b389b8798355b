//! Hand-built maps used throughout the tests, the acceptance suite and the CLI examples.

use crate::map::{PiecewiseAffineContraction, Side};
use crate::rational::{ratio, Rational};

fn build(cuts: &[Rational], affine: &[(Rational, Rational)], owners: &[Side]) -> PiecewiseAffineContraction {
    PiecewiseAffineContraction::from_partition(cuts, affine, owners).expect("fixture must validate")
}

/// Two pieces, `-(2/5)x + 3/5` on `[0,1/2)` and `(1/5)x - 1/10` on `[1/2,1)`.
pub fn map_g() -> PiecewiseAffineContraction {
    build(
        &[ratio(1, 2)],
        &[(ratio(-2, 5), ratio(3, 5)), (ratio(1, 5), ratio(-1, 10))],
        &[Side::Right],
    )
}

/// `x/2` on `[0,1)`.
pub fn map_half() -> PiecewiseAffineContraction {
    build(&[], &[(ratio(1, 2), ratio(0, 1))], &[])
}

/// `x/2` on `[0,3/4)`, `-x/2 + 9/8` on `[3/4,1)`; `3/4` is a degenerate fixed point.
pub fn map_deg() -> PiecewiseAffineContraction {
    build(
        &[ratio(3, 4)],
        &[(ratio(1, 2), ratio(0, 1)), (ratio(-1, 2), ratio(9, 8))],
        &[Side::Right],
    )
}

/// Piecewise increasing with left-closed pieces: `x/2 + 1/8` and `x/2 + 7/16`.
pub fn map_inc() -> PiecewiseAffineContraction {
    build(
        &[ratio(1, 2)],
        &[(ratio(1, 2), ratio(1, 8)), (ratio(1, 2), ratio(7, 16))],
        &[Side::Right],
    )
}

/// Three pieces with one attracting fixed point each (`1/6`, `1/2`, `5/6`).
pub fn map_tri() -> PiecewiseAffineContraction {
    build(
        &[ratio(1, 3), ratio(2, 3)],
        &[(ratio(1, 2), ratio(1, 12)), (ratio(-1, 2), ratio(3, 4)), (ratio(1, 2), ratio(5, 12))],
        &[Side::Right, Side::Right],
    )
}

/// Four pieces: regular fixed points `1/8`, `3/8`, `1/2` and the degenerate fixed point `3/4`.
pub fn map_quad() -> PiecewiseAffineContraction {
    build(
        &[ratio(1, 4), ratio(1, 2), ratio(3, 4)],
        &[
            (ratio(1, 2), ratio(1, 16)),
            (ratio(-1, 2), ratio(9, 16)),
            (ratio(1, 4), ratio(3, 8)),
            (ratio(-1, 2), ratio(9, 8)),
        ],
        &[Side::Right, Side::Right, Side::Right],
    )
}

/// All named fixtures with their labels.
pub fn all() -> Vec<(&'static str, PiecewiseAffineContraction)> {
    vec![
        ("MAP-HALF", map_half()),
        ("MAP-G", map_g()),
        ("MAP-DEG", map_deg()),
        ("MAP-INC", map_inc()),
        ("MAP-TRI", map_tri()),
        ("MAP-QUAD", map_quad()),
    ]
}
