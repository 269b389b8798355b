//! Cylinders: maximal sets sharing an itinerary, on which `f^k` is one affine map.

use num_traits::Signed;

use crate::error::Result;
use crate::interval::SidedInterval;
use crate::map::{ItineraryWord, PiecewiseAffineContraction};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct Cylinder {
    pub support: SidedInterval,
    pub word: ItineraryWord,
    pub composed_slope: Rational,
    pub composed_intercept: Rational,
}

impl Cylinder {
    pub fn depth(&self) -> usize {
        self.word.len()
    }

    pub fn apply(&self, x: &Rational) -> Rational {
        &self.composed_slope * x + &self.composed_intercept
    }

    pub fn image(&self) -> SidedInterval {
        self.support.affine_image(&self.composed_slope, &self.composed_intercept)
    }

    /// The unique fixed point of the composed map (its slope is never 1).
    pub fn fixed_point(&self) -> Rational {
        &self.composed_intercept / (rational::one() - &self.composed_slope)
    }

    pub fn is_increasing(&self) -> bool {
        self.composed_slope.is_positive()
    }
}

/// Depth-1 cylinders: the partition itself.
pub fn base_cylinders(map: &PiecewiseAffineContraction) -> Vec<Cylinder> {
    map.pieces()
        .iter()
        .enumerate()
        .map(|(i, p)| Cylinder {
            support: p.domain.clone(),
            word: ItineraryWord(vec![i]),
            composed_slope: p.slope.clone(),
            composed_intercept: p.intercept.clone(),
        })
        .collect()
}

/// Splits every depth-`k` cylinder by the piece its image falls in, giving depth `k+1`.
pub fn refine(map: &PiecewiseAffineContraction, level: &[Cylinder], budget_bits: u64) -> Result<Vec<Cylinder>> {
    let mut next = Vec::with_capacity(level.len() + map.n());
    for c in level {
        let img = c.image();
        for (i, piece) in map.pieces().iter().enumerate() {
            let Some(part) = img.intersect(&piece.domain) else { continue };
            let support = part.affine_preimage(&c.composed_slope, &c.composed_intercept);
            let composed_slope = &piece.slope * &c.composed_slope;
            let composed_intercept = &piece.slope * &c.composed_intercept + &piece.intercept;
            rational::check_budget(&composed_intercept, budget_bits, "cylinder refinement")?;
            let mut word = c.word.clone();
            word.0.push(i);
            next.push(Cylinder { support, word, composed_slope, composed_intercept });
        }
    }
    next.sort_by(|a, b| (&a.support.lo, !a.support.lo_closed).cmp(&(&b.support.lo, !b.support.lo_closed)));
    Ok(next)
}

/// All cylinders of depth `1..=k`, level by level.
pub fn cylinder_levels(map: &PiecewiseAffineContraction, k: usize, budget_bits: u64) -> Result<Vec<Vec<Cylinder>>> {
    let mut levels = Vec::with_capacity(k);
    if k == 0 {
        return Ok(levels);
    }
    levels.push(base_cylinders(map));
    for _ in 1..k {
        let next = refine(map, levels.last().unwrap(), budget_bits)?;
        levels.push(next);
    }
    Ok(levels)
}

/// Cylinders of depth exactly `k >= 1`.
pub fn cylinders(map: &PiecewiseAffineContraction, k: usize) -> Result<Vec<Cylinder>> {
    Ok(cylinder_levels(map, k.max(1), crate::DEFAULT_BUDGET_BITS)?.pop().unwrap_or_default())
}

/// The depth-`k` cylinder containing `x`.
pub fn cylinder_of(map: &PiecewiseAffineContraction, x: &Rational, k: usize) -> Result<Cylinder> {
    let word = map.itinerary(x, k)?;
    let mut support = SidedInterval::unit();
    let mut slope = rational::one();
    let mut intercept = rational::zero();
    for &i in &word.0 {
        let piece = map.piece(i);
        // Points of `support` whose current image lies in piece `i`.
        let img = support.affine_image(&slope, &intercept);
        let part = img.intersect(&piece.domain).expect("orbit point lies in the piece");
        support = part.affine_preimage(&slope, &intercept);
        intercept = &piece.slope * &intercept + &piece.intercept;
        slope = &piece.slope * &slope;
    }
    Ok(Cylinder { support, word, composed_slope: slope, composed_intercept: intercept })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::ratio;

    #[test]
    fn map_g_depth_two() {
        let g = fixtures::map_g();
        assert_eq!(cylinders(&g, 1).unwrap().len(), 2);
        let cs = cylinders(&g, 2).unwrap();
        let summary: Vec<(SidedInterval, Vec<usize>)> =
            cs.iter().map(|c| (c.support.clone(), c.word.one_based())).collect();
        assert_eq!(
            summary,
            vec![
                (SidedInterval::closed(ratio(0, 1), ratio(1, 4)), vec![1, 2]),
                (SidedInterval::open(ratio(1, 4), ratio(1, 2)), vec![1, 1]),
                (SidedInterval::closed_open(ratio(1, 2), ratio(1, 1)), vec![2, 1]),
            ]
        );
    }

    #[test]
    fn map_half_single_cylinder() {
        let h = fixtures::map_half();
        for k in 1..6 {
            let cs = cylinders(&h, k).unwrap();
            assert_eq!(cs.len(), 1);
            assert_eq!(cs[0].word.one_based(), vec![1; k]);
            assert_eq!(cs[0].composed_slope, rational::pow(&ratio(1, 2), k as u32));
        }
    }

    #[test]
    fn map_deg_has_singleton_cylinder() {
        let d = fixtures::map_deg();
        let cs = cylinders(&d, 2).unwrap();
        assert!(cs.iter().any(|c| c.support == SidedInterval::point(ratio(3, 4)) && c.word.one_based() == vec![2, 2]));
        assert!(cs.len() <= 3);
    }

    #[test]
    fn cylinder_of_matches_level() {
        let g = fixtures::map_g();
        let c = cylinder_of(&g, &ratio(1, 54), 2).unwrap();
        assert_eq!(c.support, SidedInterval::closed(ratio(0, 1), ratio(1, 4)));
        assert_eq!(c.fixed_point(), ratio(1, 54));
    }
}
