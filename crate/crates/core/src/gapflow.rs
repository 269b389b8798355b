//! Gaps of the image and their forward orbits: the sets `E`, `B`, `F_j`, the
//! layers `f^ℓ(F_j)`, capture by trapping regions, stable-manifold interiors,
//! the residual set and the injective assignment `β`.

use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;

use crate::census::Census;
use crate::chains;
use crate::error::{Error, Result};
use crate::interval::{self, SidedInterval};
use crate::map::{PiecewiseAffineContraction, Side};
use crate::rational::{self, Rational};

/// Default propagation depth `L`.
pub const DEFAULT_DEPTH: usize = 60;

/// Longest backward chain followed when computing `B`.
pub const MAX_BACKWARD_CHAIN: usize = 4096;

/// `f^ℓ(F_j) = slope·F_j + intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub interval: SidedInterval,
    pub slope: Rational,
    pub intercept: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapAtlas {
    pub e: Vec<SidedInterval>,
    pub b: Vec<Rational>,
    pub f: Vec<SidedInterval>,
    /// `layers[j][ℓ] = f^ℓ(F_j)` for `ℓ = 0..=depth`.
    pub layers: Vec<Vec<Layer>>,
    pub depth: usize,
}

impl GapAtlas {
    pub fn r(&self) -> usize {
        self.f.len()
    }

    pub fn all_layers(&self) -> impl Iterator<Item = (usize, usize, &Layer)> {
        self.layers.iter().enumerate().flat_map(|(j, ls)| ls.iter().enumerate().map(move |(l, layer)| (j, l, layer)))
    }

    pub fn covered_length(&self) -> Rational {
        self.all_layers().fold(rational::zero(), |acc, (_, _, l)| acc + l.interval.length())
    }
}

/// `E = int([0,1) \ f([0,1)))` as open components.
pub fn compute_e(map: &PiecewiseAffineContraction) -> Vec<SidedInterval> {
    interval::complement_within(&map.image(), &SidedInterval::unit())
        .into_iter()
        .filter_map(|c| c.interior())
        .collect()
}

/// Points of `E` whose forward orbit hits a discontinuity, found by walking
/// backward from each discontinuity. `f` is injective, so each backward step
/// has at most one candidate.
pub fn compute_b(map: &PiecewiseAffineContraction, e: &[SidedInterval]) -> Result<Vec<Rational>> {
    let mut b = BTreeSet::new();
    for x in map.interior_breakpoints() {
        let mut seen = HashSet::new();
        let mut y = x.clone();
        for step in 0.. {
            if step >= MAX_BACKWARD_CHAIN {
                return Err(Error::BudgetExceeded(format!("backward chain of {x} longer than {MAX_BACKWARD_CHAIN}")));
            }
            if !seen.insert(y.clone()) {
                break;
            }
            if interval::union_contains(e, &y) {
                b.insert(y.clone());
            }
            match map.preimage_point(&y)? {
                Some(z) => {
                    rational::check_budget(&z, crate::DEFAULT_BUDGET_BITS, "backward chain")?;
                    y = z;
                }
                None => break,
            }
        }
    }
    Ok(b.into_iter().collect())
}

/// `E`, `B` and the components `F_1..F_r` of `E \ B`; no layers yet.
pub fn compute_f(map: &PiecewiseAffineContraction) -> Result<GapAtlas> {
    let e = compute_e(map);
    let b = compute_b(map, &e)?;
    let points: Vec<SidedInterval> = b.iter().cloned().map(SidedInterval::point).collect();
    let f = interval::difference(&e, &points);
    Ok(GapAtlas { e, b, f, layers: vec![], depth: 0 })
}

/// Fills `f^ℓ(F_j)` for `ℓ <= depth`; each layer must avoid every breakpoint.
pub fn propagate(map: &PiecewiseAffineContraction, mut atlas: GapAtlas, depth: usize) -> Result<GapAtlas> {
    let layers = atlas
        .f
        .par_iter()
        .enumerate()
        .map(|(j, fj)| {
            let mut out = Vec::with_capacity(depth + 1);
            let mut cur =
                Layer { interval: fj.clone(), slope: rational::one(), intercept: rational::zero() };
            for l in 0..=depth {
                if let Some(x) = map.breakpoints()[..map.n()].iter().find(|x| cur.interval.contains(x)) {
                    return Err(Error::LayerHitBreakpoint { gap: j + 1, layer: l, breakpoint: rational::to_pq(x) });
                }
                out.push(cur.clone());
                if l == depth {
                    break;
                }
                let i = map.piece_index(&cur.interval.midpoint())?;
                let piece = map.piece(i);
                if !cur.interval.is_subset_of(&piece.domain) {
                    return Err(Error::LayerHitBreakpoint {
                        gap: j + 1,
                        layer: l,
                        breakpoint: rational::to_pq(&piece.domain.hi),
                    });
                }
                let next = Layer {
                    interval: cur.interval.affine_image(&piece.slope, &piece.intercept),
                    slope: &piece.slope * &cur.slope,
                    intercept: &piece.slope * &cur.intercept + &piece.intercept,
                };
                rational::check_budget(&next.intercept, crate::DEFAULT_BUDGET_BITS, "gap propagation")?;
                cur = next;
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    atlas.layers = layers;
    atlas.depth = depth;
    Ok(atlas)
}

pub fn build_atlas(map: &PiecewiseAffineContraction, depth: usize) -> Result<GapAtlas> {
    propagate(map, compute_f(map)?, depth)
}

/// The structural facts the gap atlas must satisfy, each checked exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct AtlasChecks {
    /// Number of components of `E` is at most `n+1`.
    pub e_components_ok: bool,
    /// `|E| >= 1 - κ`.
    pub e_length_ok: bool,
    /// `E ∩ f^ℓ(E) = ∅` for `ℓ = 1..=depth`.
    pub e_disjoint_from_images: bool,
    /// `|B| <= n-1`.
    pub b_bound_ok: bool,
    /// `r <= 2n`.
    pub r_bound_ok: bool,
    pub layers_disjoint: bool,
    /// `1 - Σ|layers| <= κ^{depth+1}`.
    pub leftover_ok: bool,
    pub leftover: Rational,
}

impl AtlasChecks {
    pub fn all_ok(&self) -> bool {
        self.e_components_ok
            && self.e_length_ok
            && self.e_disjoint_from_images
            && self.b_bound_ok
            && self.r_bound_ok
            && self.layers_disjoint
            && self.leftover_ok
    }
}

pub fn check_atlas(map: &PiecewiseAffineContraction, atlas: &GapAtlas) -> Result<AtlasChecks> {
    let n = map.n();
    let mut images = atlas.e.clone();
    let mut e_disjoint_from_images = true;
    for _ in 1..=atlas.depth {
        let mut next = Vec::new();
        for c in &images {
            next.extend(map.image_interval(c)?);
        }
        images = interval::normalize(next);
        if images.iter().any(|c| atlas.e.iter().any(|e| e.intersects(c))) {
            e_disjoint_from_images = false;
            break;
        }
    }
    let layers: Vec<SidedInterval> = atlas.all_layers().map(|(_, _, l)| l.interval.clone()).collect();
    let leftover = rational::one() - atlas.covered_length();
    let bound = rational::pow(map.kappa(), atlas.depth as u32 + 1);
    Ok(AtlasChecks {
        e_components_ok: atlas.e.len() <= n + 1,
        e_length_ok: interval::total_length(&atlas.e) >= rational::one() - map.kappa(),
        e_disjoint_from_images,
        b_bound_ok: atlas.b.len() < n.max(1),
        r_bound_ok: atlas.r() <= 2 * n,
        layers_disjoint: interval::pairwise_disjoint(&layers),
        leftover_ok: leftover <= bound,
        leftover,
    })
}

/// `τ(F_j, γ)`: first layer contained in `Ω(γ)`, or `None` if none up to the atlas depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptureRecord {
    pub gap: usize,
    /// Index into the census orbit list.
    pub orbit: usize,
    pub target_time: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaptureTable {
    pub records: Vec<CaptureRecord>,
    /// `(gap, layer, orbit)` where a layer partially overlaps a trapping region.
    pub dichotomy_violations: Vec<(usize, usize, usize)>,
    /// Gaps captured by no region within the atlas depth.
    pub uncaptured_gaps: Vec<usize>,
    /// Regular orbits that capture no gap within the atlas depth.
    pub orbits_without_capture: Vec<usize>,
}

impl CaptureTable {
    pub fn target_time(&self, gap: usize, orbit: usize) -> Option<usize> {
        self.records.iter().find(|r| r.gap == gap && r.orbit == orbit).and_then(|r| r.target_time)
    }

    pub fn all_gaps_captured(&self) -> bool {
        self.uncaptured_gaps.is_empty()
    }
}

pub fn target_times(atlas: &GapAtlas, census: &Census) -> CaptureTable {
    let mut records = Vec::new();
    let mut dichotomy_violations = Vec::new();
    let mut captured = vec![false; atlas.r()];
    let mut orbits_without_capture = Vec::new();
    for (oi, region) in census.regions.iter().enumerate() {
        let Some(region) = region else { continue };
        let union = region.union();
        let mut any = false;
        for (j, layers) in atlas.layers.iter().enumerate() {
            let mut tau = None;
            for (l, layer) in layers.iter().enumerate() {
                let inside = interval::union_covers(&union, &layer.interval);
                let meets = region.meets(&layer.interval);
                if meets && !inside {
                    dichotomy_violations.push((j, l, oi));
                }
                if inside && tau.is_none() {
                    tau = Some(l);
                }
            }
            if tau.is_some() {
                captured[j] = true;
                any = true;
            }
            records.push(CaptureRecord { gap: j, orbit: oi, target_time: tau });
        }
        if !any {
            orbits_without_capture.push(oi);
        }
    }
    let uncaptured_gaps = captured.iter().enumerate().filter(|(_, c)| !**c).map(|(j, _)| j).collect();
    CaptureTable { records, dichotomy_violations, uncaptured_gaps, orbits_without_capture }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StableManifoldRecord {
    pub orbit: usize,
    /// Disjoint open intervals, sorted.
    pub open_intervals: Vec<SidedInterval>,
    /// Bound `κ^{L+1}` on the length the depth-`L` truncation can miss.
    pub uncovered_bound: Rational,
}

impl StableManifoldRecord {
    pub fn inf(&self) -> Option<&Rational> {
        self.open_intervals.first().map(|c| &c.lo)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        interval::union_contains(&self.open_intervals, x)
    }

    pub fn closure(&self) -> Vec<SidedInterval> {
        interval::normalize(self.open_intervals.iter().map(|c| c.closure()).collect())
    }
}

/// `int Ω(γ) ∪ ⋃_{j ∈ Λ(γ)} ⋃_{ℓ < τ_j} f^ℓ(F_j)`.
pub fn stable_manifold_interior(
    map: &PiecewiseAffineContraction,
    atlas: &GapAtlas,
    census: &Census,
    captures: &CaptureTable,
    orbit: usize,
) -> Result<StableManifoldRecord> {
    let region = census.regions[orbit].as_ref().ok_or_else(|| Error::DegenerateOwner(census.orbits[orbit].least().to_string()))?;
    let mut parts = region.interior();
    for j in 0..atlas.r() {
        if let Some(tau) = captures.target_time(j, orbit) {
            parts.extend(atlas.layers[j][..tau].iter().map(|l| l.interval.clone()));
        }
    }
    Ok(StableManifoldRecord {
        orbit,
        open_intervals: interval::normalize(parts),
        uncovered_bound: rational::pow(map.kappa(), atlas.depth as u32 + 1),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualComponent {
    pub interval: SidedInterval,
    /// Shorter than the truncation leftover bound, so possibly an artifact of depth.
    pub below_resolution: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaAssignment {
    /// Index into `Decomposition::manifolds`.
    pub manifold: usize,
    pub inf: Rational,
    pub q: usize,
    pub breakpoint: Rational,
}

/// `(a_ℓ, b_ℓ)` pairs read off at the discontinuities of a degenerate orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct HarvestedChain {
    /// Index into the census orbit list.
    pub orbit: usize,
    pub pairs: Vec<(u32, u32)>,
    pub is_chain: bool,
    pub coordinates: usize,
    pub contains_zero: bool,
    /// `#S <= s`, and `#S <= s-1` when the orbit contains 0.
    pub bound_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub manifolds: Vec<StableManifoldRecord>,
    /// `int([0,1) \ ⋃ closure(W_j))` for the truncated manifolds.
    pub residual: Vec<ResidualComponent>,
    /// Every gap was captured, so the manifolds are exact and the residual is certainly empty.
    pub certified: bool,
    /// `β` on `W_1..W_m`; present only when certified.
    pub beta: Option<Vec<BetaAssignment>>,
    pub beta_injective: Option<bool>,
    /// Sampled `f(W_j) ⊆ closure(W_j)`.
    pub invariance_ok: bool,
    /// Every degenerate orbit point lies on some `∂W_j`; present only when certified.
    pub degenerate_on_boundaries: Option<bool>,
    pub chains: Vec<HarvestedChain>,
}

impl Decomposition {
    pub fn residual_nonempty(&self) -> bool {
        !self.residual.is_empty()
    }

    pub fn beta_image_size(&self) -> Option<usize> {
        self.beta.as_ref().map(|b| b.iter().map(|a| &a.breakpoint).collect::<BTreeSet<_>>().len())
    }
}

/// Longest forward orbit followed from `inf W_j` looking for a discontinuity.
pub const MAX_BETA_STEPS: usize = 100_000;

pub fn decompose_and_beta(
    map: &PiecewiseAffineContraction,
    census: &Census,
    captures: &CaptureTable,
    manifolds: Vec<StableManifoldRecord>,
    samples_per_manifold: usize,
) -> Result<Decomposition> {
    let closures: Vec<SidedInterval> = manifolds.iter().flat_map(|w| w.closure()).collect();
    let leftover = manifolds.first().map(|w| w.uncovered_bound.clone()).unwrap_or_else(rational::zero);
    let residual: Vec<ResidualComponent> =
        interval::complement_within(&interval::normalize(closures), &SidedInterval::unit())
            .into_iter()
            .filter_map(|c| c.interior())
            .map(|c| ResidualComponent { below_resolution: c.length() < leftover, interval: c })
            .collect();
    let certified = captures.all_gaps_captured() && residual.is_empty();
    let invariance_ok = manifolds
        .par_iter()
        .map(|w| lemma_4_1_sampled(map, w, samples_per_manifold))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .all(|ok| ok);
    let (beta, beta_injective, degenerate_on_boundaries, chains) = if certified {
        let beta = beta_assignments(map, &manifolds)?;
        let injective = beta.iter().map(|a| &a.breakpoint).collect::<BTreeSet<_>>().len() == beta.len();
        let on_boundary = census.degenerate().all(|o| {
            o.points.iter().all(|p| {
                !manifolds.iter().any(|w| w.contains(p)) && manifolds.iter().any(|w| interval::union_contains(&w.closure(), p))
            })
        });
        let chains = harvest_chains(map, census, &manifolds)?;
        (Some(beta), Some(injective), Some(on_boundary), chains)
    } else {
        (None, None, None, vec![])
    };
    Ok(Decomposition { manifolds, residual, certified, beta, beta_injective, invariance_ok, degenerate_on_boundaries, chains })
}

fn beta_assignments(map: &PiecewiseAffineContraction, manifolds: &[StableManifoldRecord]) -> Result<Vec<BetaAssignment>> {
    manifolds
        .iter()
        .enumerate()
        .filter_map(|(i, w)| w.inf().map(|y| (i, y.clone())))
        .map(|(i, y)| {
            if rational::is_zero(&y) {
                return Ok(BetaAssignment { manifold: i, inf: y, q: 0, breakpoint: rational::zero() });
            }
            let mut cur = y.clone();
            let mut seen = HashSet::new();
            for q in 0..MAX_BETA_STEPS {
                if map.is_interior_breakpoint(&cur) {
                    return Ok(BetaAssignment { manifold: i, inf: y, q, breakpoint: cur });
                }
                if !seen.insert(cur.clone()) {
                    break;
                }
                cur = map.evaluate(&cur)?;
            }
            Err(Error::BetaHitNotFound(y.to_string()))
        })
        .collect()
}

fn lemma_4_1_sampled(map: &PiecewiseAffineContraction, w: &StableManifoldRecord, samples: usize) -> Result<bool> {
    let closure = w.closure();
    let per = samples.div_ceil(w.open_intervals.len().max(1));
    for c in &w.open_intervals {
        for i in 0..per {
            let t = rational::ratio(2 * i as i64 + 1, 2 * per as i64);
            let x = &c.lo + c.length() * t;
            if !interval::union_contains(&closure, &map.evaluate(&x)?) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Index of the manifold whose closure contains the germ of `q` on `side`.
fn germ_owner(manifolds: &[StableManifoldRecord], q: &Rational, side: Side) -> Option<u32> {
    manifolds
        .iter()
        .position(|w| {
            w.open_intervals.iter().any(|c| match side {
                Side::Right => &c.lo <= q && q < &c.hi,
                Side::Left => &c.lo < q && q <= &c.hi,
            })
        })
        .map(|i| i as u32 + 1)
}

/// For each degenerate orbit, the pairs `(a_ℓ, b_ℓ)` at its discontinuities.
fn harvest_chains(
    map: &PiecewiseAffineContraction,
    census: &Census,
    manifolds: &[StableManifoldRecord],
) -> Result<Vec<HarvestedChain>> {
    let mut out = Vec::new();
    for (oi, orbit) in census.orbits.iter().enumerate() {
        if orbit.is_regular() {
            continue;
        }
        let mut pairs = Vec::new();
        for q in &orbit.points {
            let Some(i) = map.breakpoint_index(q) else { continue };
            let own = if i == 0 { Side::Right } else { map.owner_side(i) };
            let a = germ_owner(manifolds, q, own);
            let b = if i == 0 { a } else { germ_owner(manifolds, q, own.flip()) };
            match (a, b) {
                (Some(a), Some(b)) => pairs.push((a, b)),
                _ => {
                    return Err(Error::PreconditionFailed(format!("no manifold borders the discontinuity {q}")));
                }
            }
        }
        let s = pairs.len();
        let is_chain = chains::is_chain(&pairs)?;
        let coordinates = chains::coordinate_set(&pairs).len();
        let contains_zero = orbit.points.iter().any(|p| rational::is_zero(p));
        let limit = if contains_zero { s.saturating_sub(1) } else { s };
        out.push(HarvestedChain { orbit: oi, is_chain, coordinates, contains_zero, bound_ok: coordinates <= limit, pairs });
    }
    Ok(out)
}

/// Whether the counting bound tied to the residual set holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualVerdict {
    /// Residual empty and `m + d <= n`.
    HoldsEmpty,
    /// Residual non-empty (at this depth) and `m + d <= n - 1`.
    HoldsNonEmpty,
    /// The bound fails although every gap was captured.
    Violated,
    /// Some gap was not captured by depth `L` and `m + d = n`; undecidable at this depth.
    Inconclusive,
}

pub fn residual_verdict(m: usize, d: usize, n: usize, decomposition: &Decomposition) -> ResidualVerdict {
    if decomposition.residual_nonempty() {
        if m + d < n {
            ResidualVerdict::HoldsNonEmpty
        } else if decomposition.certified {
            ResidualVerdict::Violated
        } else {
            ResidualVerdict::Inconclusive
        }
    } else if m + d <= n {
        ResidualVerdict::HoldsEmpty
    } else {
        ResidualVerdict::Violated
    }
}
