//! Piecewise affine contractions of `[0,1)` and their elementary dynamics.

use std::collections::HashMap;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::interval::{self, SidedInterval};
use crate::rational::{self, Rational};

/// Which side of a point a one-sided object lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn flip(self) -> Self {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffinePiece {
    pub slope: Rational,
    pub intercept: Rational,
    pub domain: SidedInterval,
}

impl AffinePiece {
    pub fn new(slope: Rational, intercept: Rational, domain: SidedInterval) -> Self {
        Self { slope, intercept, domain }
    }

    pub fn apply(&self, x: &Rational) -> Rational {
        &self.slope * x + &self.intercept
    }

    pub fn image(&self) -> SidedInterval {
        self.domain.affine_image(&self.slope, &self.intercept)
    }

    pub fn is_increasing(&self) -> bool {
        self.slope.is_positive()
    }
}

/// A reason a list of pieces is not a piecewise contraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NotPartition(String),
    NotInjective { first: usize, second: usize },
    NonContractive { piece: usize },
    ZeroSlope { piece: usize },
    ImageEscapes { piece: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotPartition(why) => write!(f, "NotPartition: {why}"),
            Violation::NotInjective { first, second } => {
                write!(f, "NotInjective: images of pieces {} and {} intersect", first + 1, second + 1)
            }
            Violation::NonContractive { piece } => write!(f, "NonContractive: |slope| >= 1 on piece {}", piece + 1),
            Violation::ZeroSlope { piece } => write!(f, "ZeroSlope: piece {}", piece + 1),
            Violation::ImageEscapes { piece } => write!(f, "ImageEscapes: image of piece {} leaves [0,1)", piece + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// Lipschitz constant `max |slope|` (reported even when other checks fail).
    pub kappa: Option<Rational>,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every defining property of a piecewise contraction.
pub fn validate(pieces: &[AffinePiece]) -> ValidationReport {
    let mut violations = Vec::new();
    if pieces.is_empty() {
        violations.push(Violation::NotPartition("no pieces".into()));
        return ValidationReport { kappa: None, violations };
    }
    let first = &pieces[0].domain;
    if !first.lo.is_zero() || !first.lo_closed {
        violations.push(Violation::NotPartition("0 must be owned by the first piece".into()));
    }
    let last = &pieces[pieces.len() - 1].domain;
    if last.hi != rational::one() || last.hi_closed {
        violations.push(Violation::NotPartition("the last piece must end at 1, open".into()));
    }
    for (i, p) in pieces.iter().enumerate() {
        if p.domain.is_point() {
            violations.push(Violation::NotPartition(format!("piece {} has an empty interior", i + 1)));
        }
    }
    for (i, w) in pieces.windows(2).enumerate() {
        let (a, b) = (&w[0].domain, &w[1].domain);
        if a.hi != b.lo {
            let kind = if a.hi > b.lo { "overlap" } else { "leave a gap" };
            violations.push(Violation::NotPartition(format!("pieces {} and {} {kind}", i + 1, i + 2)));
        } else if a.hi_closed == b.lo_closed {
            violations.push(Violation::NotPartition(format!(
                "breakpoint {} must be owned by exactly one of pieces {} and {}",
                a.hi,
                i + 1,
                i + 2
            )));
        }
    }
    let mut kappa = rational::zero();
    for (i, p) in pieces.iter().enumerate() {
        if p.slope.is_zero() {
            violations.push(Violation::ZeroSlope { piece: i });
            continue;
        }
        let s = p.slope.abs();
        if s >= rational::one() {
            violations.push(Violation::NonContractive { piece: i });
        }
        if s > kappa {
            kappa = s;
        }
        if !p.image().is_subset_of(&SidedInterval::unit()) {
            violations.push(Violation::ImageEscapes { piece: i });
        }
    }
    for i in 0..pieces.len() {
        for j in i + 1..pieces.len() {
            if pieces[i].slope.is_zero() || pieces[j].slope.is_zero() {
                continue;
            }
            if pieces[i].image().intersects(&pieces[j].image()) {
                violations.push(Violation::NotInjective { first: i, second: j });
            }
        }
    }
    ValidationReport { kappa: Some(kappa), violations }
}

/// Builds pieces for the partition `0 = x_0 < x_1 < … < x_n = 1`.
///
/// `owners[i]` says which neighbour owns the interior breakpoint `x_{i+1}`.
pub fn pieces_from_partition(
    interior_breakpoints: &[Rational],
    affine: &[(Rational, Rational)],
    owners: &[Side],
) -> Vec<AffinePiece> {
    assert_eq!(affine.len(), interior_breakpoints.len() + 1);
    assert_eq!(owners.len(), interior_breakpoints.len());
    let mut xs = vec![rational::zero()];
    xs.extend(interior_breakpoints.iter().cloned());
    xs.push(rational::one());
    (0..affine.len())
        .map(|i| {
            let lo_closed = i == 0 || owners[i - 1] == Side::Right;
            let hi_closed = i + 1 < affine.len() && owners[i] == Side::Left;
            let domain = SidedInterval { lo: xs[i].clone(), hi: xs[i + 1].clone(), lo_closed, hi_closed };
            AffinePiece::new(affine[i].0.clone(), affine[i].1.clone(), domain)
        })
        .collect()
}

/// Result of iterating a point: the trajectory and the first exact repeat, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub points: Vec<Rational>,
    /// `(a, b)` with `a < b` and `f^a(x) = f^b(x)`, the earliest such pair.
    pub cycle: Option<(usize, usize)>,
}

/// A finite itinerary, stored with 0-based piece indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItineraryWord(pub Vec<usize>);

impl ItineraryWord {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Symbols numbered `1..=n` as in the usual mathematical notation.
    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|s| s + 1).collect()
    }

    /// Smallest `d` such that the word is `d`-periodic with `d | len`.
    pub fn primitive_period(&self) -> usize {
        let k = self.0.len();
        (1..=k)
            .find(|&d| k % d == 0 && (d..k).all(|i| self.0[i] == self.0[i - d]))
            .unwrap_or(k)
    }
}

impl fmt::Display for ItineraryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let syms: Vec<String> = self.one_based().iter().map(|s| s.to_string()).collect();
        write!(f, "({})", syms.join(","))
    }
}

/// An injective map of `[0,1)` that is an affine contraction on each of `n` intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseAffineContraction {
    pieces: Vec<AffinePiece>,
    breakpoints: Vec<Rational>,
    kappa: Rational,
    float_pieces: Vec<FloatPiece>,
}

#[derive(Debug, Clone, PartialEq)]
struct FloatPiece {
    lo: f64,
    hi: f64,
    lo_closed: bool,
    hi_closed: bool,
    slope: f64,
    intercept: f64,
}

impl PiecewiseAffineContraction {
    /// Validates and wraps the pieces; rejects anything that is not a piecewise contraction.
    pub fn new(pieces: Vec<AffinePiece>) -> Result<Self> {
        let report = validate(&pieces);
        if !report.is_ok() {
            return Err(Error::Invalid(report.violations));
        }
        let mut breakpoints: Vec<Rational> = pieces.iter().map(|p| p.domain.lo.clone()).collect();
        breakpoints.push(rational::one());
        let float_pieces = pieces
            .iter()
            .map(|p| FloatPiece {
                lo: rational::to_f64(&p.domain.lo),
                hi: rational::to_f64(&p.domain.hi),
                lo_closed: p.domain.lo_closed,
                hi_closed: p.domain.hi_closed,
                slope: rational::to_f64(&p.slope),
                intercept: rational::to_f64(&p.intercept),
            })
            .collect();
        Ok(Self { pieces, breakpoints, kappa: report.kappa.expect("validated map has kappa"), float_pieces })
    }

    pub fn from_partition(
        interior_breakpoints: &[Rational],
        affine: &[(Rational, Rational)],
        owners: &[Side],
    ) -> Result<Self> {
        Self::new(pieces_from_partition(interior_breakpoints, affine, owners))
    }

    pub fn validate(&self) -> ValidationReport {
        validate(&self.pieces)
    }

    pub fn n(&self) -> usize {
        self.pieces.len()
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn piece(&self, i: usize) -> &AffinePiece {
        &self.pieces[i]
    }

    pub fn kappa(&self) -> &Rational {
        &self.kappa
    }

    /// `x_0, …, x_n` with `x_0 = 0` and `x_n = 1`.
    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    /// The discontinuities `x_1, …, x_{n-1}`.
    pub fn interior_breakpoints(&self) -> &[Rational] {
        &self.breakpoints[1..self.breakpoints.len() - 1]
    }

    pub fn is_interior_breakpoint(&self, x: &Rational) -> bool {
        self.interior_breakpoints().binary_search(x).is_ok()
    }

    /// 0 or one of the discontinuities: the points an external periodic orbit must contain.
    pub fn is_external_point(&self, x: &Rational) -> bool {
        x.is_zero() || self.is_interior_breakpoint(x)
    }

    /// Index `i` with `x == x_i` among `x_0..x_{n-1}`.
    pub fn breakpoint_index(&self, x: &Rational) -> Option<usize> {
        self.breakpoints[..self.breakpoints.len() - 1].binary_search(x).ok()
    }

    /// Which neighbour owns the interior breakpoint `x_i` (`1 <= i <= n-1`).
    pub fn owner_side(&self, i: usize) -> Side {
        if self.pieces[i].domain.lo_closed {
            Side::Right
        } else {
            Side::Left
        }
    }

    /// One-sided limits of `f` at the interior breakpoint `x_i`.
    pub fn one_sided_limits(&self, i: usize) -> (Rational, Rational) {
        let x = &self.breakpoints[i];
        (self.pieces[i - 1].apply(x), self.pieces[i].apply(x))
    }

    /// True when the two one-sided limits at `x_i` agree (no jump).
    pub fn is_continuous_at(&self, i: usize) -> bool {
        let (l, r) = self.one_sided_limits(i);
        l == r
    }

    fn check_domain(x: &Rational) -> Result<()> {
        if x.is_negative() || x >= &rational::one() {
            return Err(Error::OutOfDomain(x.to_string()));
        }
        Ok(())
    }

    /// Index of the piece whose domain contains `x`.
    pub fn piece_index(&self, x: &Rational) -> Result<usize> {
        Self::check_domain(x)?;
        let pos = self.breakpoints.partition_point(|b| b <= x);
        // `pos - 1` is the piece whose lo <= x; x might be its owned-by-left lo.
        let i = pos - 1;
        if self.pieces[i].domain.contains(x) {
            Ok(i)
        } else {
            Ok(i - 1)
        }
    }

    pub fn evaluate(&self, x: &Rational) -> Result<Rational> {
        let i = self.piece_index(x)?;
        Ok(self.pieces[i].apply(x))
    }

    pub fn slope_at(&self, x: &Rational) -> Result<&Rational> {
        Ok(&self.pieces[self.piece_index(x)?].slope)
    }

    /// Exact image of `j` as the minimal list of disjoint intervals.
    pub fn image_interval(&self, j: &SidedInterval) -> Result<Vec<SidedInterval>> {
        if !j.is_subset_of(&SidedInterval::unit()) {
            return Err(Error::OutOfDomain(j.to_string()));
        }
        let parts = self
            .pieces
            .iter()
            .filter_map(|p| p.domain.intersect(j).map(|s| s.affine_image(&p.slope, &p.intercept)))
            .collect();
        Ok(interval::normalize(parts))
    }

    /// The full image `f([0,1))` as disjoint components.
    pub fn image(&self) -> Vec<SidedInterval> {
        interval::normalize(self.pieces.iter().map(|p| p.image()).collect())
    }

    /// The unique `x` with `f(x) = y`, if `y` is in the image.
    pub fn preimage_point(&self, y: &Rational) -> Result<Option<Rational>> {
        Self::check_domain(y)?;
        Ok(self.pieces.iter().find_map(|p| {
            let x = (y - &p.intercept) / &p.slope;
            p.domain.contains(&x).then_some(x)
        }))
    }

    pub fn orbit(&self, x: &Rational, steps: usize) -> Result<Orbit> {
        let mut points = Vec::with_capacity(steps + 1);
        let mut seen: HashMap<Rational, usize> = HashMap::new();
        let mut cycle = None;
        let mut cur = x.clone();
        for step in 0..=steps {
            if cycle.is_none() {
                if let Some(&first) = seen.get(&cur) {
                    cycle = Some((first, step));
                } else {
                    seen.insert(cur.clone(), step);
                }
            }
            points.push(cur.clone());
            if step < steps {
                cur = self.evaluate(&cur)?;
            }
        }
        Ok(Orbit { points, cycle })
    }

    /// `f^k(x)`.
    pub fn iterate(&self, x: &Rational, k: usize) -> Result<Rational> {
        let mut cur = x.clone();
        for _ in 0..k {
            cur = self.evaluate(&cur)?;
        }
        Ok(cur)
    }

    pub fn itinerary(&self, x: &Rational, length: usize) -> Result<ItineraryWord> {
        let mut word = Vec::with_capacity(length);
        let mut cur = x.clone();
        for step in 0..length {
            let i = self.piece_index(&cur)?;
            word.push(i);
            if step + 1 < length {
                cur = self.pieces[i].apply(&cur);
            }
        }
        Ok(ItineraryWord(word))
    }

    /// Floating-point evaluation, used only for sampled evidence.
    pub fn evaluate_f64(&self, x: f64) -> f64 {
        let ps = &self.float_pieces;
        let i = ps
            .iter()
            .position(|p| (x > p.lo || (x == p.lo && p.lo_closed)) && (x < p.hi || (x == p.hi && p.hi_closed)))
            .unwrap_or(if x < 0.5 { 0 } else { ps.len() - 1 });
        ps[i].slope * x + ps[i].intercept
    }
}

/// A piecewise polynomial observable, left-closed on each segment.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePolynomial {
    /// Interior cut points, increasing.
    pub cuts: Vec<Rational>,
    /// Ascending coefficients per segment; `cuts.len() + 1` segments.
    pub coefficients: Vec<Vec<Rational>>,
}

impl PiecewisePolynomial {
    pub fn identity() -> Self {
        Self { cuts: vec![], coefficients: vec![vec![rational::zero(), rational::one()]] }
    }

    pub fn indicator(lo: Rational, hi: Rational) -> Self {
        Self {
            cuts: vec![lo, hi],
            coefficients: vec![vec![rational::zero()], vec![rational::one()], vec![rational::zero()]],
        }
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let seg = self.cuts.partition_point(|c| c <= x);
        self.coefficients[seg].iter().rev().fold(rational::zero(), |acc, c| acc * x + c)
    }
}

/// `(1/k) · Σ_{i<k} φ(f^i(x))`, exactly.
pub fn birkhoff_average(
    map: &PiecewiseAffineContraction,
    phi: &PiecewisePolynomial,
    x: &Rational,
    k: usize,
) -> Result<Rational> {
    if k == 0 {
        return Err(Error::PreconditionFailed("birkhoff average needs k >= 1".into()));
    }
    let mut cur = x.clone();
    let mut sum = rational::zero();
    for i in 0..k {
        sum += phi.eval(&cur);
        if i + 1 < k {
            cur = map.evaluate(&cur)?;
        }
    }
    Ok(sum / rational::int(k as i64))
}
