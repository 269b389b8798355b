//! The measure `ν` carried by the gap layers, the homeomorphism
//! `h(x) = ν((0,x))`, and the normal form `h∘f∘h⁻¹` with slopes `±1/2`.
//!
//! `h` is an infinite sum over layers. Summing layers up to depth `L` misses a
//! total mass of exactly `2^{-(L+1)}`, so every value is returned as an exact
//! rational enclosure of at most that width.

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::gapflow::{self, GapAtlas};
use crate::interval::{self, SidedInterval};
use crate::map::PiecewiseAffineContraction;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enclosure {
    pub lo: Rational,
    pub hi: Rational,
}

impl Enclosure {
    pub fn exact(x: Rational) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn is_within(&self, other: &Enclosure) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / rational::int(2)
    }

    pub fn overlaps(&self, other: &Enclosure) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

#[derive(Debug, Clone)]
struct WeightedLayer {
    interval: SidedInterval,
    mass: Rational,
    /// Mass of all layers to the left.
    before: Rational,
}

/// `ν` on finite unions of intervals, from the layers of a propagated atlas.
#[derive(Debug, Clone)]
pub struct NuMeasure {
    pub r: usize,
    pub depth: usize,
    layers: Vec<WeightedLayer>,
    /// Positive-length components not covered by any layer; all deeper layers live here.
    uncovered: Vec<SidedInterval>,
    tail: Rational,
}

impl NuMeasure {
    pub fn new(atlas: &GapAtlas) -> Self {
        let r = atlas.r();
        let mut layers: Vec<WeightedLayer> = atlas
            .all_layers()
            .map(|(_, l, layer)| WeightedLayer {
                interval: layer.interval.clone(),
                mass: rational::ratio(1, r as i64) / rational::pow(&rational::int(2), l as u32 + 1),
                before: rational::zero(),
            })
            .collect();
        layers.sort_by(|a, b| a.interval.lo.cmp(&b.interval.lo));
        let mut acc = rational::zero();
        for l in &mut layers {
            l.before = acc.clone();
            acc += &l.mass;
        }
        let closures = interval::normalize(layers.iter().map(|l| l.interval.closure()).collect());
        let uncovered = interval::complement_within(&closures, &SidedInterval::unit())
            .into_iter()
            .filter(|c| !c.is_point())
            .collect();
        let tail = rational::pow(&rational::half(), atlas.depth as u32 + 1);
        Self { r, depth: atlas.depth, layers, uncovered, tail }
    }

    /// Mass not yet accounted for: `2^{-(L+1)}`.
    pub fn tail(&self) -> &Rational {
        &self.tail
    }

    /// Total mass of the summed layers, `1 - 2^{-(L+1)}`.
    pub fn summed_mass(&self) -> Rational {
        self.layers.iter().fold(rational::zero(), |acc, l| acc + &l.mass)
    }

    fn partial(&self, j: &SidedInterval) -> Rational {
        self.layers
            .iter()
            .filter(|l| l.interval.hi > j.lo && l.interval.lo < j.hi)
            .fold(rational::zero(), |acc, l| acc + &l.mass * j.overlap_length(&l.interval) / l.interval.length())
    }

    fn tail_can_meet(&self, j: &SidedInterval) -> bool {
        self.uncovered.iter().any(|u| rational::is_positive(&u.overlap_length(j)))
    }

    /// Enclosure of `ν(J)`; endpoint flags do not matter since `ν` has no atoms.
    pub fn of_interval(&self, j: &SidedInterval) -> Enclosure {
        let lo = self.partial(j);
        let hi = if self.tail_can_meet(j) { &lo + &self.tail } else { lo.clone() };
        Enclosure { lo, hi }
    }

    /// Summed-layer part of `ν((0,x))`: continuous, nondecreasing, piecewise linear.
    fn p(&self, x: &Rational) -> Rational {
        let idx = self.layers.partition_point(|l| &l.interval.lo < x);
        if idx == 0 {
            return rational::zero();
        }
        let l = &self.layers[idx - 1];
        let covered = rational::min(x, &l.interval.hi) - &l.interval.lo;
        &l.before + &l.mass * covered / l.interval.length()
    }

    /// Smallest `x` with `P(x) >= u`.
    fn p_inv_min(&self, u: &Rational) -> Rational {
        if !rational::is_positive(u) {
            return rational::zero();
        }
        match self.layers.iter().find(|l| &(&l.before + &l.mass) >= u) {
            Some(l) => &l.interval.lo + (u - &l.before) / &l.mass * l.interval.length(),
            None => rational::one(),
        }
    }

    /// Largest `x` with `P(x) <= u`.
    fn p_inv_max(&self, u: &Rational) -> Rational {
        match self.layers.iter().find(|l| &(&l.before + &l.mass) > u) {
            Some(l) if u >= &l.before => &l.interval.lo + (u - &l.before) / &l.mass * l.interval.length(),
            Some(l) => l.interval.lo.clone(),
            None => rational::one(),
        }
    }

    fn h_enclosure(&self, x: &Rational) -> Enclosure {
        if rational::is_zero(x) {
            return Enclosure::exact(rational::zero());
        }
        let lo = self.p(x);
        let below = SidedInterval::open(rational::zero(), x.clone());
        let hi = if self.tail_can_meet(&below) { &lo + &self.tail } else { lo.clone() };
        Enclosure { lo, hi }
    }
}

pub fn nu_of_interval(measure: &NuMeasure, j: &SidedInterval) -> Enclosure {
    measure.of_interval(j)
}

#[derive(Debug, Clone)]
pub struct ConjugacyTable {
    pub measure: NuMeasure,
    /// `h(x_0), …, h(x_n)`.
    pub breakpoint_images: Vec<Enclosure>,
    pub samples: Vec<(Rational, Enclosure)>,
}

impl ConjugacyTable {
    pub fn depth(&self) -> usize {
        self.measure.depth
    }
}

/// Builds `ν` and `h` from the gap layers of depth `depth`, caching `h` on the
/// grid `i / sample_count`.
pub fn build_table(map: &PiecewiseAffineContraction, depth: usize, sample_count: usize) -> Result<ConjugacyTable> {
    let atlas = gapflow::build_atlas(map, depth)?;
    Ok(table_from_atlas(map, &atlas, sample_count))
}

pub fn table_from_atlas(map: &PiecewiseAffineContraction, atlas: &GapAtlas, sample_count: usize) -> ConjugacyTable {
    let measure = NuMeasure::new(atlas);
    let mut breakpoint_images: Vec<Enclosure> =
        map.breakpoints()[..map.n()].iter().map(|x| measure.h_enclosure(x)).collect();
    breakpoint_images.push(Enclosure::exact(rational::one()));
    let samples = (0..sample_count)
        .map(|i| {
            let x = rational::grid_point(i, sample_count);
            let e = measure.h_enclosure(&x);
            (x, e)
        })
        .collect();
    ConjugacyTable { measure, breakpoint_images, samples }
}

pub fn h_value(table: &ConjugacyTable, x: &Rational) -> Result<Enclosure> {
    if x.is_negative() || x >= &rational::one() {
        return Err(Error::OutOfDomain(x.to_string()));
    }
    Ok(table.measure.h_enclosure(x))
}

/// Enclosure of `h⁻¹(y)` of width at most `tol`.
///
/// Since `P(x) <= h(x) <= P(x) + 2^{-(L+1)}`, the preimage lies between the
/// first point where `P` reaches `y - 2^{-(L+1)}` and the last point where `P`
/// is still at most `y`.
pub fn h_inverse(table: &ConjugacyTable, y: &Rational, tol: &Rational) -> Result<Enclosure> {
    if y.is_negative() || y >= &rational::one() {
        return Err(Error::OutOfDomain(y.to_string()));
    }
    if rational::is_zero(y) {
        return Ok(Enclosure::exact(rational::zero()));
    }
    let m = &table.measure;
    let lo = m.p_inv_min(&(y - m.tail()));
    let hi = m.p_inv_max(y);
    let e = Enclosure { lo, hi };
    if &e.width() > tol {
        return Err(Error::ResolutionExceeded(format!(
            "h^-1({y}) known only to width {} at depth {}",
            rational::to_f64(&e.width()),
            m.depth
        )));
    }
    Ok(e)
}

/// `ĥ(h(x)) = h(f(x))`: the normal form evaluated at a point of the form `h(x)`.
pub fn normal_form_at(map: &PiecewiseAffineContraction, table: &ConjugacyTable, x: &Rational) -> Result<(Enclosure, Enclosure)> {
    let u = h_value(table, x)?;
    let v = h_value(table, &map.evaluate(x)?)?;
    Ok((u, v))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PieceSlope {
    pub piece: usize,
    pub expected: Rational,
    pub pairs: usize,
    /// Extreme values of the difference-quotient enclosures.
    pub min_quotient: Rational,
    pub max_quotient: Rational,
    pub within_tol: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeReport {
    pub depth: usize,
    pub tol: Rational,
    pub pieces: Vec<PieceSlope>,
}

impl SlopeReport {
    pub fn all_within_tol(&self) -> bool {
        self.pieces.iter().all(|p| p.within_tol)
    }

    pub fn worst_deviation(&self) -> Rational {
        self.pieces
            .iter()
            .map(|p| {
                let a = (&p.min_quotient - &p.expected).abs();
                let b = (&p.max_quotient - &p.expected).abs();
                rational::max(&a, &b).clone()
            })
            .max()
            .unwrap_or_else(rational::zero)
    }
}

fn quotient_bounds(du: (&Enclosure, &Enclosure), dv: (&Enclosure, &Enclosure)) -> Option<(Rational, Rational)> {
    let (ua, ub) = du;
    let (va, vb) = dv;
    let den_lo = &ub.lo - &ua.hi;
    let den_hi = &ub.hi - &ua.lo;
    if !rational::is_positive(&den_lo) {
        return None;
    }
    let num_lo = &vb.lo - &va.hi;
    let num_hi = &vb.hi - &va.lo;
    let candidates = [&num_lo / &den_lo, &num_lo / &den_hi, &num_hi / &den_lo, &num_hi / &den_hi];
    let lo = candidates.iter().min().unwrap().clone();
    let hi = candidates.iter().max().unwrap().clone();
    Some((lo, hi))
}

/// Difference quotients of `ĥ` over `samples_per_piece` consecutive pairs in
/// each `h(I_i)`, compared with `+1/2` (increasing piece) or `-1/2`.
///
/// Sample points are placed so their `h`-values are evenly spread; each pair is
/// evaluated as `(h(f(x_b)) - h(f(x_a))) / (h(x_b) - h(x_a))` with enclosures.
pub fn verify_half_slopes(
    map: &PiecewiseAffineContraction,
    table: &ConjugacyTable,
    samples_per_piece: usize,
    tol: &Rational,
) -> Result<SlopeReport> {
    let m = &table.measure;
    let mut pieces = Vec::with_capacity(map.n());
    for (i, piece) in map.pieces().iter().enumerate() {
        let expected = if piece.is_increasing() { rational::half() } else { -rational::half() };
        let ua = m.p(&piece.domain.lo);
        let ub = m.p(&piece.domain.hi);
        let span = &ub - &ua;
        let steps = samples_per_piece + 2;
        let spacing = &span / rational::int(steps as i64);
        if &(m.tail() * rational::int(4)) > &(tol * &spacing) {
            return Err(Error::ResolutionExceeded(format!(
                "piece {} has h-width {} too small for depth {}",
                i + 1,
                rational::to_f64(&span),
                m.depth
            )));
        }
        let xs: Vec<Rational> = (1..steps)
            .map(|t| m.p_inv_min(&(&ua + &spacing * rational::int(t as i64))))
            .filter(|x| piece.domain.contains_in_interior(x))
            .collect();
        let evals = xs.iter().map(|x| normal_form_at(map, table, x)).collect::<Result<Vec<_>>>()?;
        let mut min_q: Option<Rational> = None;
        let mut max_q: Option<Rational> = None;
        let mut pairs = 0;
        for w in evals.windows(2) {
            let Some((lo, hi)) = quotient_bounds((&w[0].0, &w[1].0), (&w[0].1, &w[1].1)) else {
                return Err(Error::ResolutionExceeded(format!("sample spacing on piece {} below resolution", i + 1)));
            };
            pairs += 1;
            min_q = Some(min_q.map_or(lo.clone(), |q| rational::min(&q, &lo).clone()));
            max_q = Some(max_q.map_or(hi.clone(), |q| rational::max(&q, &hi).clone()));
        }
        let (min_quotient, max_quotient) = (min_q.unwrap_or_else(rational::zero), max_q.unwrap_or_else(rational::zero));
        let within_tol = pairs > 0
            && (&min_quotient - &expected).abs() <= *tol
            && (&max_quotient - &expected).abs() <= *tol;
        pieces.push(PieceSlope { piece: i, expected, pairs, min_quotient, max_quotient, within_tol });
    }
    Ok(SlopeReport { depth: m.depth, tol: tol.clone(), pieces })
}

/// `ν(f(B))` and `ν(B)/2` enclosures overlap for an interval `B` inside one piece.
pub fn halving_law_holds(map: &PiecewiseAffineContraction, measure: &NuMeasure, b: &SidedInterval) -> Result<bool> {
    let image = map.image_interval(b)?;
    if image.len() != 1 {
        return Err(Error::PreconditionFailed(format!("{b} is not inside a single piece")));
    }
    let lhs = measure.of_interval(&image[0]);
    let whole = measure.of_interval(b);
    let rhs = Enclosure { lo: &whole.lo / rational::int(2), hi: &whole.hi / rational::int(2) };
    Ok(lhs.overlaps(&rhs))
}

/// A normal-form map with slopes set to `±1/2` and breakpoints at enclosure
/// midpoints; approximate because `h(x_i)` is only known to an enclosure.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximateNormalForm {
    pub breakpoints: Vec<Rational>,
    /// `(slope, intercept)` per piece.
    pub pieces: Vec<(Rational, Rational)>,
}

pub fn snap_normal_form(map: &PiecewiseAffineContraction, table: &ConjugacyTable) -> Result<ApproximateNormalForm> {
    let breakpoints: Vec<Rational> = table.breakpoint_images.iter().map(|e| e.midpoint()).collect();
    let mut pieces = Vec::with_capacity(map.n());
    for (i, piece) in map.pieces().iter().enumerate() {
        let slope = if piece.is_increasing() { rational::half() } else { -rational::half() };
        // Value of ĥ at the left end of h(I_i), from the right-hand limit of f.
        let left_value = table.measure.h_enclosure(&piece.apply(&piece.domain.lo)).midpoint();
        let intercept = left_value - &slope * &breakpoints[i];
        pieces.push((slope, intercept));
    }
    Ok(ApproximateNormalForm { breakpoints, pieces })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::ratio;

    #[test]
    fn map_half_measure_is_lebesgue() {
        let t = build_table(&fixtures::map_half(), 20, 16).unwrap();
        let m = &t.measure;
        assert_eq!(m.of_interval(&SidedInterval::open(ratio(1, 2), ratio(1, 1))), Enclosure::exact(ratio(1, 2)));
        assert_eq!(m.of_interval(&SidedInterval::open(ratio(1, 4), ratio(1, 2))), Enclosure::exact(ratio(1, 4)));
        assert_eq!(m.of_interval(&SidedInterval::open(ratio(1, 2), ratio(3, 4))), Enclosure::exact(ratio(1, 4)));
        let h = h_value(&t, &ratio(1, 2)).unwrap();
        assert!(h.contains(&ratio(1, 2)) && h.width() <= *m.tail());
        let inv = h_inverse(&t, &ratio(1, 4), &ratio(1, 1000)).unwrap();
        assert!(inv.contains(&ratio(1, 4)));
    }

    #[test]
    fn total_mass() {
        let atlas = gapflow::build_atlas(&fixtures::map_g(), 12).unwrap();
        let m = NuMeasure::new(&atlas);
        assert_eq!(m.summed_mass(), rational::one() - m.tail());
    }

    #[test]
    fn map_g_enclosure_width() {
        let t = build_table(&fixtures::map_g(), 10, 0).unwrap();
        let h = h_value(&t, &ratio(1, 2)).unwrap();
        assert!(h.width() <= rational::pow(&ratio(1, 2), 11));
        assert_eq!(h_value(&t, &ratio(0, 1)).unwrap(), Enclosure::exact(ratio(0, 1)));
    }

    #[test]
    fn half_slopes_on_fixtures() {
        let tol = ratio(1, 100_000);
        for map in [fixtures::map_half(), fixtures::map_g(), fixtures::map_deg()] {
            let t = build_table(&map, 40, 0).unwrap();
            let report = verify_half_slopes(&map, &t, 20, &tol).unwrap();
            assert!(report.all_within_tol(), "{report:?}");
        }
    }
}
