//! Periodic orbits: enumeration, regular/degenerate classification, maximal
//! trapping intervals and regions, and the counting verdicts.

use std::collections::BTreeMap;

use num_traits::Signed;
use rayon::prelude::*;

use crate::cylinder::{self, Cylinder};
use crate::error::{Error, Result};
use crate::interval::{self, SidedInterval};
use crate::map::{ItineraryWord, PiecewiseAffineContraction, PiecewisePolynomial, Side};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrbitKind {
    Regular,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Externality {
    Internal,
    External,
}

/// Outcome of germ-side propagation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub kind: OrbitKind,
    /// Side of a one-sided germ at the starting point whose iterates stay intervals.
    pub seed: Option<Side>,
    /// For degenerate orbits, the first step at which each seed leaves its admissible sides.
    pub blocking_steps: Vec<(Side, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbitRecord {
    /// Orbit in iteration order, starting at its least point.
    pub points: Vec<Rational>,
    pub period: usize,
    pub word: ItineraryWord,
    pub kind: OrbitKind,
    pub externality: Externality,
    pub classification: Classification,
}

impl PeriodicOrbitRecord {
    pub fn least(&self) -> &Rational {
        &self.points[0]
    }

    pub fn is_regular(&self) -> bool {
        self.kind == OrbitKind::Regular
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.points.contains(x)
    }
}

/// Every periodic orbit of period at most `max_period`, ordered by (period, least point).
///
/// A periodic point of period `k` is the fixed point of the composed map of the
/// depth-`k` cylinder containing it, so scanning cylinder fixed points is complete.
pub fn enumerate_periodic_orbits(map: &PiecewiseAffineContraction, max_period: usize) -> Result<Vec<PeriodicOrbitRecord>> {
    enumerate_with_budget(map, max_period, crate::DEFAULT_BUDGET_BITS)
}

pub fn enumerate_with_budget(
    map: &PiecewiseAffineContraction,
    max_period: usize,
    budget_bits: u64,
) -> Result<Vec<PeriodicOrbitRecord>> {
    if max_period == 0 {
        return Err(Error::PreconditionFailed("max period must be at least 1".into()));
    }
    let mut found: BTreeMap<(usize, Rational), Vec<Rational>> = BTreeMap::new();
    let mut level: Vec<Cylinder> = cylinder::base_cylinders(map);
    for k in 1..=max_period {
        if k > 1 {
            level = cylinder::refine(map, &level, budget_bits)?;
        }
        for c in &level {
            // The composed word of a period-k point is k-periodic; a primitive
            // period d < k means the point was already found at depth d.
            if c.word.primitive_period() != k {
                continue;
            }
            let x = c.fixed_point();
            if !c.support.contains(&x) {
                continue;
            }
            let orbit = map.orbit(&x, k)?;
            let period = match orbit.cycle {
                Some((0, b)) => b,
                _ => continue,
            };
            if period != k {
                continue;
            }
            let mut points = orbit.points[..k].to_vec();
            let start = (0..k).min_by(|&a, &b| points[a].cmp(&points[b])).unwrap();
            points.rotate_left(start);
            found.entry((k, points[0].clone())).or_insert(points);
        }
    }
    let records = found
        .into_values()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|points| record_for(map, points))
        .collect::<Result<Vec<_>>>()?;
    Ok(records)
}

fn record_for(map: &PiecewiseAffineContraction, points: Vec<Rational>) -> Result<PeriodicOrbitRecord> {
    let period = points.len();
    let word = map.itinerary(&points[0], period)?;
    let externality = if points.iter().any(|p| map.is_external_point(p)) {
        Externality::External
    } else {
        Externality::Internal
    };
    let classification = classify_point(map, &points[0], period)?;
    Ok(PeriodicOrbitRecord { kind: classification.kind, points, period, word, externality, classification })
}

/// Sides a one-sided germ at `q` may occupy without straddling a jump.
fn admissible(map: &PiecewiseAffineContraction, q: &Rational, side: Side) -> bool {
    if rational::is_zero(q) {
        return side == Side::Right;
    }
    match map.breakpoint_index(q) {
        Some(i) if i > 0 && !map.is_continuous_at(i) => map.owner_side(i) == side,
        _ => true,
    }
}

/// Regular/degenerate classification of the periodic point `p` of period `period`.
pub fn classify_point(map: &PiecewiseAffineContraction, p: &Rational, period: usize) -> Result<Classification> {
    let orbit = map.orbit(p, period)?;
    let pts = &orbit.points[..period];
    if !pts.iter().any(|q| map.is_external_point(q)) {
        return Ok(Classification { kind: OrbitKind::Regular, seed: Some(Side::Right), blocking_steps: vec![] });
    }
    let negative: Vec<bool> = pts.iter().map(|q| map.slope_at(q).map(|s| s.is_negative())).collect::<Result<_>>()?;
    let mut blocking_steps = Vec::new();
    for seed in [Side::Right, Side::Left] {
        let mut side = seed;
        let mut blocked = None;
        for step in 0..2 * period {
            let q = &pts[step % period];
            if !admissible(map, q, side) {
                blocked = Some(step);
                break;
            }
            if negative[step % period] {
                side = side.flip();
            }
        }
        match blocked {
            None => return Ok(Classification { kind: OrbitKind::Regular, seed: Some(seed), blocking_steps: vec![] }),
            Some(step) => blocking_steps.push((seed, step)),
        }
    }
    Ok(Classification { kind: OrbitKind::Degenerate, seed: None, blocking_steps })
}

pub fn classify(map: &PiecewiseAffineContraction, orbit: &PeriodicOrbitRecord) -> Result<Classification> {
    classify_point(map, orbit.least(), orbit.period)
}

/// Brute-force regularity check independent of the side bookkeeping.
///
/// Iterates the germs `(p-δ,p]`, `[p,p+δ)` and `(p-δ,p+δ)` exactly for two
/// periods and reports, per germ, whether every iterate stayed an interval.
pub fn germ_oracle(map: &PiecewiseAffineContraction, p: &Rational, period: usize) -> Result<[bool; 3]> {
    let orbit = map.orbit(p, period)?;
    let mut delta = rational::one();
    for q in &orbit.points[..period] {
        for b in map.breakpoints() {
            let d = interval::abs_diff(q, b);
            if rational::is_positive(&d) && d < delta {
                delta = d;
            }
        }
    }
    delta /= rational::int(4);
    let germs = [
        SidedInterval::new(p - &delta, p.clone(), false, true),
        Some(SidedInterval::closed_open(p.clone(), p + &delta)),
        SidedInterval::new(p - &delta, p + &delta, false, false),
    ];
    let mut out = [false; 3];
    for (slot, germ) in out.iter_mut().zip(germs) {
        let Some(mut cur) = germ else { continue };
        if cur.lo.is_negative() {
            continue;
        }
        let mut ok = true;
        for _ in 0..2 * period {
            let img = map.image_interval(&cur)?;
            if img.len() != 1 {
                ok = false;
                break;
            }
            cur = img.into_iter().next().unwrap();
        }
        *slot = ok;
    }
    Ok(out)
}

/// Maximal intervals on which `f` is continuous: pieces merged across jump-free breakpoints.
pub fn continuity_cells(map: &PiecewiseAffineContraction) -> Vec<SidedInterval> {
    let mut cells: Vec<SidedInterval> = Vec::new();
    for (i, piece) in map.pieces().iter().enumerate() {
        if i > 0 && map.is_continuous_at(i) {
            let last = cells.last_mut().unwrap();
            last.hi = piece.domain.hi.clone();
            last.hi_closed = piece.domain.hi_closed;
        } else {
            cells.push(piece.domain.clone());
        }
    }
    cells
}

fn cell_of<'a>(cells: &'a [SidedInterval], x: &Rational) -> &'a SidedInterval {
    cells.iter().find(|c| c.contains(x)).expect("cells partition [0,1)")
}

/// Def. 2.3 checked directly: `p ∈ J`, `f(J), …, f^k(J)` intervals and `f^k(J) ⊆ J`.
pub fn is_trapping_interval(map: &PiecewiseAffineContraction, j: &SidedInterval, p: &Rational, period: usize) -> Result<bool> {
    if j.is_point() || !j.contains(p) || !j.is_subset_of(&SidedInterval::unit()) {
        return Ok(false);
    }
    let mut cur = j.clone();
    for _ in 0..period {
        let img = map.image_interval(&cur)?;
        if img.len() != 1 {
            return Ok(false);
        }
        cur = img.into_iter().next().unwrap();
    }
    Ok(cur.is_subset_of(j))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrappingInterval {
    pub owner: Rational,
    pub interval: SidedInterval,
    pub period: usize,
    /// Set when a small enlargement across a jump still passed Def. 2.3, which
    /// would mean an iterate straddles a discontinuity with abutting images.
    pub straddle_detected: bool,
}

/// Points whose first `period` iterates stay in the continuity cells visited by
/// the orbit of `p`; it is an interval containing `p` on which `f^period` is
/// continuous and monotone.
fn orbit_cell_domain(map: &PiecewiseAffineContraction, p: &Rational, period: usize) -> Result<SidedInterval> {
    let cells = continuity_cells(map);
    let orbit = map.orbit(p, period)?;
    let visited: Vec<&SidedInterval> = orbit.points[..period].iter().map(|q| cell_of(&cells, q)).collect();
    let mut target = visited[period - 1].clone();
    for step in (0..period - 1).rev() {
        let q = &orbit.points[step];
        let cell = visited[step];
        let parts: Vec<SidedInterval> = map
            .pieces()
            .iter()
            .filter_map(|piece| {
                let dom = piece.domain.intersect(cell)?;
                target.affine_preimage(&piece.slope, &piece.intercept).intersect(&dom)
            })
            .collect();
        target = interval::normalize(parts)
            .into_iter()
            .find(|c| c.contains(q))
            .expect("orbit point lies in its own preimage");
    }
    Ok(target)
}

fn affine_at_closure(subs: &[Cylinder], x: &Rational) -> Rational {
    let c = subs.iter().find(|c| c.support.closure().contains(x)).expect("x in closure of domain");
    c.apply(x)
}

fn inverse_at_closure(subs: &[Cylinder], y: &Rational) -> Rational {
    let c = subs.iter().find(|c| c.image().closure().contains(y)).expect("y in closure of image");
    (y - &c.composed_intercept) / &c.composed_slope
}

/// The maximal trapping interval `J_p` of a regular periodic point.
///
/// Every trapping interval lies in the orbit-cell domain `D` of `p`, on which
/// `G = f^period` is a continuous monotone contraction fixing `p`. When `G`
/// increases every subinterval of `D` containing `p` is invariant, so `J_p = D`.
/// When `G` decreases, the largest invariant subinterval is cut out by
/// `G^{-1}` of the far endpoint.
pub fn maximal_trapping_interval(map: &PiecewiseAffineContraction, p: &Rational, period: usize) -> Result<TrappingInterval> {
    let class = classify_point(map, p, period)?;
    if class.kind == OrbitKind::Degenerate {
        return Err(Error::DegenerateOwner(p.to_string()));
    }
    let d = orbit_cell_domain(map, p, period)?;
    if d.is_point() {
        return Err(Error::DegenerateOwner(p.to_string()));
    }
    let mut subs = vec![Cylinder {
        support: d.clone(),
        word: ItineraryWord(vec![]),
        composed_slope: rational::one(),
        composed_intercept: rational::zero(),
    }];
    for _ in 0..period {
        subs = cylinder::refine(map, &subs, crate::DEFAULT_BUDGET_BITS)?;
    }
    let j = if subs[0].is_increasing() {
        d.clone()
    } else {
        let g_lo = affine_at_closure(&subs, &d.lo);
        let g_hi = affine_at_closure(&subs, &d.hi);
        let (a, mut a_closed) =
            if g_lo > d.hi { (inverse_at_closure(&subs, &d.hi), true) } else { (d.lo.clone(), d.lo_closed) };
        let (b, mut b_closed) =
            if g_hi < d.lo { (inverse_at_closure(&subs, &d.lo), true) } else { (d.hi.clone(), d.hi_closed) };
        // G swaps the endpoint flags; a closed end may not land on an open one.
        if affine_at_closure(&subs, &a) == b && !b_closed {
            a_closed = false;
        }
        if affine_at_closure(&subs, &b) == a && !a_closed {
            b_closed = false;
        }
        SidedInterval::new(a, b, a_closed, b_closed).expect("trapping interval contains p")
    };
    if !is_trapping_interval(map, &j, p, period)? {
        return Err(Error::PreconditionFailed(format!("computed interval {j} is not trapping for {p}")));
    }
    let straddle_detected = enlargement_is_trapping(map, &j, p, period)?;
    Ok(TrappingInterval { owner: p.clone(), interval: j, period, straddle_detected })
}

/// Tries the one-step enlargements of `j` (closing an open end, or pushing an end
/// outward by a small amount) against Def. 2.3.
fn enlargement_is_trapping(map: &PiecewiseAffineContraction, j: &SidedInterval, p: &Rational, period: usize) -> Result<bool> {
    let eps = j.length() / rational::int(1 << 12);
    let unit = SidedInterval::unit();
    let mut candidates = Vec::new();
    if !j.lo_closed {
        candidates.push(SidedInterval { lo_closed: true, ..j.clone() });
    }
    if !j.hi_closed {
        candidates.push(SidedInterval { hi_closed: true, ..j.clone() });
    }
    candidates.push(SidedInterval { lo: &j.lo - &eps, ..j.clone() });
    candidates.push(SidedInterval { hi: &j.hi + &eps, ..j.clone() });
    for c in candidates {
        if c.is_subset_of(&unit) && is_trapping_interval(map, &c, p, period)? {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrappingRegion {
    pub orbit_points: Vec<Rational>,
    /// One maximal trapping interval per orbit point, in iteration order.
    pub components: Vec<TrappingInterval>,
}

impl TrappingRegion {
    pub fn intervals(&self) -> Vec<SidedInterval> {
        self.components.iter().map(|c| c.interval.clone()).collect()
    }

    /// Components sorted by position.
    pub fn union(&self) -> Vec<SidedInterval> {
        interval::normalize(self.intervals())
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.components.iter().any(|c| c.interval.contains(x))
    }

    pub fn covers(&self, j: &SidedInterval) -> bool {
        self.components.iter().any(|c| j.is_subset_of(&c.interval))
    }

    pub fn meets(&self, j: &SidedInterval) -> bool {
        self.components.iter().any(|c| c.interval.intersects(j))
    }

    pub fn interior(&self) -> Vec<SidedInterval> {
        interval::interior_of_union(self.intervals())
    }
}

pub fn trapping_region(map: &PiecewiseAffineContraction, orbit: &PeriodicOrbitRecord) -> Result<TrappingRegion> {
    if orbit.kind == OrbitKind::Degenerate {
        return Err(Error::DegenerateOwner(orbit.least().to_string()));
    }
    let components = orbit
        .points
        .iter()
        .map(|p| maximal_trapping_interval(map, p, orbit.period))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrappingRegion { orbit_points: orbit.points.clone(), components })
}

/// TR1: `f(Ω) ⊆ Ω`.
pub fn check_tr1(map: &PiecewiseAffineContraction, region: &TrappingRegion) -> Result<bool> {
    let union = region.union();
    for c in &region.components {
        for img in map.image_interval(&c.interval)? {
            if !interval::union_covers(&union, &img) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// TR2 in contraction form: `|f^{ℓk}(J_p)| ≤ κ^{ℓk} |J_p|` for `ℓ = 1..=rounds`.
pub fn check_tr2(map: &PiecewiseAffineContraction, region: &TrappingRegion, rounds: usize) -> Result<bool> {
    for c in &region.components {
        let k = c.period;
        let base = c.interval.length();
        let mut cur = c.interval.clone();
        for l in 1..=rounds {
            for _ in 0..k {
                let img = map.image_interval(&cur)?;
                if img.len() != 1 {
                    return Ok(false);
                }
                cur = img.into_iter().next().unwrap();
            }
            let bound = rational::pow(map.kappa(), (l * k) as u32) * &base;
            if cur.length() > bound {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// TR3: exactly `period` pairwise disjoint components.
pub fn check_tr3(region: &TrappingRegion) -> bool {
    let ints = region.intervals();
    ints.len() == region.orbit_points.len() && interval::pairwise_disjoint(&ints)
}

/// Fraction of sampled seeds whose orbits come within `10^-12` of an enumerated orbit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergenceEvidence {
    pub seeds: usize,
    pub steps: usize,
    pub converged: usize,
}

impl ConvergenceEvidence {
    pub fn all_converged(&self) -> bool {
        self.converged == self.seeds
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CensusVerdict {
    pub m: usize,
    pub d: usize,
    pub n: usize,
    /// `m + d <= n`.
    pub bound_ok: bool,
    /// `m <= n`.
    pub regular_bound_ok: bool,
    pub tight: bool,
    pub asymptotically_periodic_evidence: Option<ConvergenceEvidence>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Census {
    pub max_period: usize,
    pub orbits: Vec<PeriodicOrbitRecord>,
    /// Trapping region of each regular orbit, aligned with `orbits`.
    pub regions: Vec<Option<TrappingRegion>>,
}

impl Census {
    pub fn regular(&self) -> impl Iterator<Item = (&PeriodicOrbitRecord, &TrappingRegion)> {
        self.orbits.iter().zip(&self.regions).filter_map(|(o, r)| r.as_ref().map(|r| (o, r)))
    }

    pub fn degenerate(&self) -> impl Iterator<Item = &PeriodicOrbitRecord> {
        self.orbits.iter().filter(|o| o.kind == OrbitKind::Degenerate)
    }

    pub fn m(&self) -> usize {
        self.regions.iter().filter(|r| r.is_some()).count()
    }

    pub fn d(&self) -> usize {
        self.degenerate().count()
    }
}

pub fn run_census(map: &PiecewiseAffineContraction, max_period: usize) -> Result<Census> {
    let orbits = enumerate_periodic_orbits(map, max_period)?;
    let regions = orbits
        .par_iter()
        .map(|o| if o.is_regular() { trapping_region(map, o).map(Some) } else { Ok(None) })
        .collect::<Result<Vec<_>>>()?;
    Ok(Census { max_period, orbits, regions })
}

pub const EVIDENCE_SEEDS: usize = 1000;
pub const EVIDENCE_STEPS: usize = 2000;

pub fn census_verdict(map: &PiecewiseAffineContraction, max_period: usize) -> Result<CensusVerdict> {
    let census = run_census(map, max_period)?;
    Ok(verdict_for(map, &census))
}

pub fn verdict_for(map: &PiecewiseAffineContraction, census: &Census) -> CensusVerdict {
    let (m, d, n) = (census.m(), census.d(), map.n());
    let tight = m + d == n;
    let evidence = tight.then(|| convergence_evidence(map, &census.orbits, EVIDENCE_SEEDS, EVIDENCE_STEPS));
    CensusVerdict {
        m,
        d,
        n,
        bound_ok: m + d <= n,
        regular_bound_ok: m <= n,
        tight,
        asymptotically_periodic_evidence: evidence,
    }
}

/// Iterates `seeds` grid points and counts those ending within `10^-12` of an orbit.
///
/// Runs in `f64` first; seeds that miss are re-run in exact arithmetic, since a
/// float iterate can fall on the wrong side of a breakpoint.
pub fn convergence_evidence(
    map: &PiecewiseAffineContraction,
    orbits: &[PeriodicOrbitRecord],
    seeds: usize,
    steps: usize,
) -> ConvergenceEvidence {
    let targets: Vec<f64> = orbits.iter().flat_map(|o| o.points.iter().map(rational::to_f64)).collect();
    let exact_targets: Vec<&Rational> = orbits.iter().flat_map(|o| o.points.iter()).collect();
    let threshold = rational::ratio(1, 1_000_000_000_000);
    let converged = (0..seeds)
        .into_par_iter()
        .filter(|&i| {
            let seed = rational::ratio(2 * i as i64 + 1, 2 * seeds as i64);
            let mut x = rational::to_f64(&seed);
            for _ in 0..steps {
                x = map.evaluate_f64(x);
            }
            if targets.iter().any(|t| (x - t).abs() < 1e-12) {
                return true;
            }
            exact_converges(map, &seed, steps, &exact_targets, &threshold)
        })
        .count();
    ConvergenceEvidence { seeds, steps, converged }
}

fn exact_converges(
    map: &PiecewiseAffineContraction,
    seed: &Rational,
    steps: usize,
    targets: &[&Rational],
    threshold: &Rational,
) -> bool {
    let mut x = seed.clone();
    for _ in 0..steps {
        if targets.contains(&&x) {
            return true;
        }
        x = match map.evaluate(&x) {
            Ok(y) => y,
            Err(_) => return false,
        };
    }
    targets.iter().any(|t| &interval::abs_diff(&x, t) < threshold)
}

/// Birkhoff limit when the orbit of `x` is absorbed by a known orbit: the
/// average of `phi` over that cycle.
///
/// Returns `None` if within `max_steps` the orbit neither enters a trapping
/// region nor lands exactly on an enumerated orbit.
pub fn birkhoff_limit(
    map: &PiecewiseAffineContraction,
    census: &Census,
    phi: &PiecewisePolynomial,
    x: &Rational,
    max_steps: usize,
) -> Result<Option<Rational>> {
    let average = |o: &PeriodicOrbitRecord| {
        let sum = o.points.iter().fold(rational::zero(), |acc, p| acc + phi.eval(p));
        sum / rational::int(o.period as i64)
    };
    let mut cur = x.clone();
    for _ in 0..=max_steps {
        if let Some(o) = census.orbits.iter().find(|o| o.contains(&cur)) {
            return Ok(Some(average(o)));
        }
        if let Some((o, _)) = census.regular().find(|(_, r)| r.contains(&cur)) {
            return Ok(Some(average(o)));
        }
        cur = map.evaluate(&cur)?;
    }
    Ok(None)
}

/// One orbit of the piecewise-increasing fast path.
#[derive(Debug, Clone, PartialEq)]
pub struct AppendixAEntry {
    pub orbit: PeriodicOrbitRecord,
    pub epsilon: Rational,
    pub interval: SidedInterval,
    /// Index `i` of the breakpoint `x_i` (`1..=n`) assigned to the orbit.
    pub alpha: usize,
    pub alpha_point: Rational,
}

pub fn is_piecewise_increasing_left_closed(map: &PiecewiseAffineContraction) -> bool {
    map.pieces().iter().all(|p| p.is_increasing() && p.domain.lo_closed && !p.domain.hi_closed)
}

/// Census for piecewise increasing maps with left-closed pieces, where every
/// orbit has the trapping interval `[p, ε(p))` and the map `α` is injective.
pub fn appendix_a_census(map: &PiecewiseAffineContraction, max_period: usize) -> Result<Vec<AppendixAEntry>> {
    if !is_piecewise_increasing_left_closed(map) {
        return Err(Error::PreconditionFailed(
            "appendix census needs increasing pieces of the form [x_{i-1}, x_i)".into(),
        ));
    }
    let orbits = enumerate_periodic_orbits(map, max_period)?;
    let n = map.n();
    let mut entries = Vec::with_capacity(orbits.len());
    for orbit in orbits {
        let p = orbit.least().clone();
        let k = orbit.period;
        // (candidate, steps to reach the breakpoint, breakpoint index)
        let mut best: (Rational, usize, usize) = (rational::one(), 0, n);
        for (i, x) in map.interior_breakpoints().iter().enumerate() {
            let mut y = x.clone();
            for l in 0..k {
                if y > p && (y < best.0 || (y == best.0 && l < best.1)) {
                    best = (y.clone(), l, i + 1);
                }
                match map.preimage_point(&y)? {
                    Some(z) => {
                        rational::check_budget(&z, crate::DEFAULT_BUDGET_BITS, "appendix preimage chain")?;
                        y = z
                    }
                    None => break,
                }
            }
        }
        let (epsilon, _, alpha) = best;
        let interval = SidedInterval::closed_open(p.clone(), epsilon.clone());
        entries.push(AppendixAEntry { orbit, epsilon, interval, alpha, alpha_point: map.breakpoints()[alpha].clone() });
    }
    let mut seen = std::collections::HashSet::new();
    if !entries.iter().all(|e| seen.insert(e.alpha)) {
        return Err(Error::PreconditionFailed("alpha is not injective".into()));
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::ratio;

    fn orbit_sets(orbits: &[PeriodicOrbitRecord]) -> Vec<Vec<Rational>> {
        orbits.iter().map(|o| o.points.clone()).collect()
    }

    #[test]
    fn map_g_orbits() {
        let g = fixtures::map_g();
        let orbits = enumerate_periodic_orbits(&g, 2).unwrap();
        assert_eq!(orbit_sets(&orbits), vec![vec![ratio(3, 7)], vec![ratio(1, 54), ratio(16, 27)]]);
        assert!(orbits.iter().all(|o| o.is_regular()));
        assert_eq!(orbits[1].word.one_based(), vec![1, 2]);
    }

    #[test]
    fn map_deg_orbits_and_kinds() {
        let d = fixtures::map_deg();
        let orbits = enumerate_periodic_orbits(&d, 3).unwrap();
        assert_eq!(orbit_sets(&orbits), vec![vec![ratio(0, 1)], vec![ratio(3, 4)]]);
        assert_eq!(orbits[0].kind, OrbitKind::Regular);
        assert_eq!(orbits[1].kind, OrbitKind::Degenerate);
        assert_eq!(orbits[1].classification.blocking_steps, vec![(Side::Right, 1), (Side::Left, 0)]);
        assert_eq!(orbits[0].externality, Externality::External);
    }

    #[test]
    fn map_g_trapping_intervals() {
        let g = fixtures::map_g();
        let j = |p: Rational, k| maximal_trapping_interval(&g, &p, k).unwrap().interval;
        assert_eq!(j(ratio(16, 27), 2), SidedInterval::closed_open(ratio(1, 2), ratio(1, 1)));
        assert_eq!(j(ratio(3, 7), 1), SidedInterval::open(ratio(1, 4), ratio(1, 2)));
        assert_eq!(j(ratio(1, 54), 2), SidedInterval::closed(ratio(0, 1), ratio(1, 4)));
    }

    #[test]
    fn degenerate_owner_rejected() {
        let d = fixtures::map_deg();
        assert!(matches!(maximal_trapping_interval(&d, &ratio(3, 4), 1), Err(Error::DegenerateOwner(_))));
        assert_eq!(germ_oracle(&d, &ratio(3, 4), 1).unwrap(), [false, false, false]);
    }

    #[test]
    fn map_half_region_is_everything() {
        let h = fixtures::map_half();
        let census = run_census(&h, 5).unwrap();
        assert_eq!(census.orbits.len(), 1);
        assert_eq!(census.regions[0].as_ref().unwrap().intervals(), vec![SidedInterval::unit()]);
    }

    #[test]
    fn verdicts_on_fixtures() {
        for (map, m, d) in [(fixtures::map_g(), 2, 0), (fixtures::map_deg(), 1, 1), (fixtures::map_half(), 1, 0)] {
            let v = census_verdict(&map, 4).unwrap();
            assert_eq!((v.m, v.d), (m, d));
            assert!(v.bound_ok && v.tight);
            assert!(v.asymptotically_periodic_evidence.unwrap().all_converged());
        }
    }

    #[test]
    fn birkhoff_limits() {
        let g = fixtures::map_g();
        let census = run_census(&g, 4).unwrap();
        let id = PiecewisePolynomial::identity();
        assert_eq!(birkhoff_limit(&g, &census, &id, &ratio(1, 3), 100).unwrap(), Some(ratio(3, 7)));
        assert_eq!(birkhoff_limit(&g, &census, &id, &ratio(16, 27), 100).unwrap(), Some(ratio(11, 36)));
        let h = fixtures::map_half();
        let census = run_census(&h, 4).unwrap();
        assert_eq!(birkhoff_limit(&h, &census, &id, &ratio(1, 2), 100).unwrap(), Some(ratio(0, 1)));
    }

    #[test]
    fn appendix_a_on_map_inc() {
        let inc = fixtures::map_inc();
        let entries = appendix_a_census(&inc, 8).unwrap();
        let summary: Vec<_> = entries.iter().map(|e| (e.orbit.points.clone(), e.epsilon.clone(), e.alpha)).collect();
        assert_eq!(
            summary,
            vec![(vec![ratio(1, 4)], ratio(1, 2), 1), (vec![ratio(7, 8)], ratio(1, 1), 2)]
        );
        let half = appendix_a_census(&fixtures::map_half(), 4).unwrap();
        assert_eq!((half[0].epsilon.clone(), half[0].alpha), (ratio(1, 1), 1));
        assert!(matches!(appendix_a_census(&fixtures::map_g(), 4), Err(Error::PreconditionFailed(_))));
    }
}
