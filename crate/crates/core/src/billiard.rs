//! First-return maps of convex-polygon pseudo-billiards with piecewise-constant inward fields.
//!
//! The boundary is parameterized by normalized arclength starting at the first
//! vertex. Each edge carries an exact chart `λ ∈ [0,1)`; the normalized
//! parameter on edge `i` is `c_i + ℓ_i λ`. When squared edge lengths have
//! rational-square ratios the `ℓ_i` are exact. Otherwise the scene is rejected
//! unless built in approximate mode, where `ℓ_i` comes from a dyadic square
//! root and every extract is flagged approximate.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::interval::SidedInterval;
use crate::map::{AffinePiece, PiecewiseAffineContraction};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Point {
    pub x: Rational,
    pub y: Rational,
}

impl Point {
    pub fn new(x: Rational, y: Rational) -> Self {
        Self { x, y }
    }

    pub fn ints(x: i64, y: i64) -> Self {
        Self::new(rational::int(x), rational::int(y))
    }

    fn sub(&self, o: &Point) -> Point {
        Point::new(&self.x - &o.x, &self.y - &o.y)
    }

    fn add_scaled(&self, v: &Point, s: &Rational) -> Point {
        Point::new(&self.x + &v.x * s, &self.y + &v.y * s)
    }

    fn norm_sq(&self) -> Rational {
        &self.x * &self.x + &self.y * &self.y
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

fn cross(a: &Point, b: &Point) -> Rational {
    &a.x * &b.y - &a.y * &b.x
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthMode {
    Exact,
    /// Edge lengths rounded to `2^-precision` before normalization.
    Approximate { precision: u32 },
}

/// A constant direction on the half-open normalized arc `[lo, hi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPiece {
    pub lo: Rational,
    pub hi: Rational,
    pub direction: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolygonScene {
    vertices: Vec<Point>,
    field: Vec<FieldPiece>,
    /// `c_0 = 0 < c_1 < … < c_s = 1`.
    starts: Vec<Rational>,
    lengths: Vec<Rational>,
    approximate: bool,
}

impl PolygonScene {
    /// Validates convexity, the field arcs and strict inwardness on every edge interior.
    pub fn new(vertices: Vec<Point>, field: Vec<FieldPiece>, mode: LengthMode) -> Result<Self> {
        let s = vertices.len();
        if s < 3 {
            return Err(Error::InvalidScene("a polygon needs at least 3 vertices".into()));
        }
        for i in 0..s {
            let e0 = vertices[(i + 1) % s].sub(&vertices[i]);
            let e1 = vertices[(i + 2) % s].sub(&vertices[(i + 1) % s]);
            if !cross(&e0, &e1).is_positive() {
                return Err(Error::InvalidScene(format!(
                    "not strictly convex counterclockwise at vertex {}",
                    vertices[(i + 1) % s]
                )));
            }
        }
        let sq: Vec<Rational> =
            (0..s).map(|i| vertices[(i + 1) % s].sub(&vertices[i]).norm_sq()).collect();
        let raw: Vec<Rational> = match mode {
            LengthMode::Exact => {
                let mut out = Vec::with_capacity(s);
                for (i, q) in sq.iter().enumerate() {
                    match rational::exact_sqrt(&(q / &sq[0])) {
                        Some(r) => out.push(r),
                        None => {
                            return Err(Error::IncommensurableEdges(format!(
                                "|e_{i}|^2 / |e_0|^2 = {} is not a rational square",
                                q / &sq[0]
                            )))
                        }
                    }
                }
                out
            }
            LengthMode::Approximate { precision } => {
                sq.iter().map(|q| rational::approx_sqrt(q, precision)).collect()
            }
        };
        let total: Rational = raw.iter().sum();
        let lengths: Vec<Rational> = raw.iter().map(|l| l / &total).collect();
        let mut starts = vec![rational::zero()];
        for l in &lengths[..s - 1] {
            let next = starts.last().unwrap() + l;
            starts.push(next);
        }
        starts.push(rational::one());
        let scene = Self {
            vertices,
            field,
            starts,
            lengths,
            approximate: matches!(mode, LengthMode::Approximate { .. }),
        };
        scene.check_field()?;
        Ok(scene)
    }

    /// One constant direction per edge, covering the whole boundary.
    pub fn with_edge_fields(vertices: Vec<Point>, directions: Vec<Point>, mode: LengthMode) -> Result<Self> {
        if directions.len() != vertices.len() {
            return Err(Error::InvalidScene("need one direction per edge".into()));
        }
        let mut scene = Self::new(vertices, Vec::new(), mode)?;
        scene.field = directions
            .into_iter()
            .enumerate()
            .map(|(i, d)| FieldPiece { lo: scene.starts[i].clone(), hi: scene.starts[i + 1].clone(), direction: d })
            .collect();
        scene.check_field()?;
        Ok(scene)
    }

    fn check_field(&self) -> Result<()> {
        let mut prev_hi: Option<&Rational> = None;
        for f in &self.field {
            if f.lo >= f.hi || f.lo.is_negative() || f.hi > rational::one() {
                return Err(Error::InvalidScene(format!("bad field arc [{}, {})", f.lo, f.hi)));
            }
            if prev_hi.is_some_and(|h| &f.lo < h) {
                return Err(Error::InvalidScene("field arcs must be sorted and disjoint".into()));
            }
            if f.direction.x.is_zero() && f.direction.y.is_zero() {
                return Err(Error::InvalidScene("zero field direction".into()));
            }
            for i in 0..self.s() {
                let overlaps = f.lo < self.starts[i + 1] && self.starts[i] < f.hi;
                if overlaps && !cross(&self.edge(i), &f.direction).is_positive() {
                    return Err(Error::NotInward(rational::to_pq(rational::max(&f.lo, &self.starts[i]))));
                }
            }
            prev_hi = Some(&f.hi);
        }
        Ok(())
    }

    pub fn s(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn field(&self) -> &[FieldPiece] {
        &self.field
    }

    pub fn is_approximate(&self) -> bool {
        self.approximate
    }

    /// Normalized parameter of each vertex, with `1` appended.
    pub fn edge_starts(&self) -> &[Rational] {
        &self.starts
    }

    /// Normalized length of each edge.
    pub fn edge_lengths(&self) -> &[Rational] {
        &self.lengths
    }

    pub fn edge(&self, i: usize) -> Point {
        self.vertices[(i + 1) % self.s()].sub(&self.vertices[i])
    }

    /// True iff the field arcs cover `[0,1)`.
    pub fn field_covers_boundary(&self) -> bool {
        let mut at = rational::zero();
        for f in &self.field {
            if f.lo != at {
                return false;
            }
            at = f.hi.clone();
        }
        at == rational::one()
    }

    /// `(edge, λ)` for a normalized parameter.
    pub fn chart(&self, q: &Rational) -> Result<(usize, Rational)> {
        if q.is_negative() || q >= &rational::one() {
            return Err(Error::OutOfDomain(rational::to_pq(q)));
        }
        let i = self.starts.partition_point(|c| c <= q) - 1;
        Ok((i, (q - &self.starts[i]) / &self.lengths[i]))
    }

    pub fn parameter(&self, edge: usize, lambda: &Rational) -> Rational {
        &self.starts[edge] + &self.lengths[edge] * lambda
    }

    pub fn point(&self, edge: usize, lambda: &Rational) -> Point {
        self.vertices[edge].add_scaled(&self.edge(edge), lambda)
    }

    pub fn field_at(&self, q: &Rational) -> Option<(usize, &FieldPiece)> {
        let k = self.field.partition_point(|f| &f.lo <= q);
        (k > 0 && q < &self.field[k - 1].hi).then(|| (k - 1, &self.field[k - 1]))
    }

    /// Exit `(edge, μ)` of the ray from `V_i + λ e_i` along `d`.
    pub fn first_return_chart(&self, edge: usize, lambda: &Rational, d: &Point) -> Result<(usize, Rational)> {
        let s = self.s();
        let q = rational::to_pq(&self.parameter(edge, lambda));
        if !cross(&self.edge(edge), d).is_positive() {
            return Err(Error::NotInward(q));
        }
        if lambda.is_zero() && !cross(&self.edge((edge + s - 1) % s), d).is_positive() {
            return Err(Error::NotInward(q));
        }
        let p = self.point(edge, lambda);
        let mut best: Option<(Rational, usize, Rational)> = None;
        for j in (0..s).filter(|&j| j != edge) {
            let e = self.edge(j);
            let den = cross(d, &e);
            if den.is_zero() {
                continue;
            }
            let w = self.vertices[j].sub(&p);
            let t = cross(&w, &e) / &den;
            let mu = cross(&w, d) / &den;
            if !t.is_positive() || mu.is_negative() || mu > rational::one() {
                continue;
            }
            if best.as_ref().map_or(true, |(bt, _, _)| &t < bt) {
                best = Some((t, j, mu));
            }
        }
        let (_, j, mu) = best.ok_or_else(|| Error::NotInward(q.clone()))?;
        if mu.is_zero() || mu == rational::one() {
            return Err(Error::CornerHit(q));
        }
        Ok((j, mu))
    }

    /// Boundary parameter of the first strictly-positive-time boundary hit from `q`.
    pub fn first_return(&self, q: &Rational) -> Result<Rational> {
        let (edge, lambda) = self.chart(q)?;
        let (_, f) = self
            .field_at(q)
            .ok_or_else(|| Error::PreconditionFailed(format!("no field at {}", rational::to_pq(q))))?;
        let (j, mu) = self.first_return_chart(edge, &lambda, &f.direction)?;
        Ok(self.parameter(j, &mu))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    pub field_arc: usize,
    pub source_edge: usize,
    pub target_edge: usize,
}

/// A source parameter where the flow is undefined; the adjacent piece is extended to it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcludedPoint {
    pub parameter: Rational,
    pub reason: Error,
}

/// Edge-local affine law `μ = a + b λ` of one extracted piece.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartLaw {
    pub lambda_lo: Rational,
    pub lambda_hi: Rational,
    pub mu_intercept: Rational,
    pub mu_slope: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnMapExtract {
    /// Left-closed pieces ordered by source parameter.
    pub pieces: Vec<AffinePiece>,
    pub provenance: Vec<Provenance>,
    pub chart_laws: Vec<ChartLaw>,
    pub excluded: Vec<ExcludedPoint>,
    pub contractive: bool,
    pub approximate: bool,
    pub field_discontinuities: usize,
    /// Interior polygon vertices plus vertex preimages inside the field arcs.
    pub vertex_crossings: usize,
    /// Interior points where the extracted map jumps.
    pub discontinuities: usize,
    pub map: Option<PiecewiseAffineContraction>,
    /// Why `map` is absent when it is.
    pub not_emitted: Option<String>,
}

impl ReturnMapExtract {
    pub fn discontinuity_bound_ok(&self) -> bool {
        self.discontinuities <= self.field_discontinuities + self.vertex_crossings
    }

    pub fn evaluate(&self, q: &Rational) -> Option<Rational> {
        self.pieces.iter().find(|p| p.domain.contains(q)).map(|p| p.apply(q))
    }
}

pub fn extract_return_map(scene: &PolygonScene) -> Result<ReturnMapExtract> {
    let mut pieces = Vec::new();
    let mut provenance = Vec::new();
    let mut chart_laws = Vec::new();
    let mut excluded = Vec::new();
    let mut preimages = 0;
    for (arc, f) in scene.field.iter().enumerate() {
        for i in 0..scene.s() {
            let lo = rational::max(&f.lo, &scene.starts[i]).clone();
            let hi = rational::min(&f.hi, &scene.starts[i + 1]).clone();
            if lo >= hi {
                continue;
            }
            let li = &scene.lengths[i];
            let la = (&lo - &scene.starts[i]) / li;
            let lb = (&hi - &scene.starts[i]) / li;
            let d = &f.direction;
            let b = cross(&scene.edge(i), d);
            let mut cuts = vec![la.clone()];
            for j in (0..scene.s()).filter(|&j| j != i) {
                let den = cross(d, &scene.edge(j));
                if den.is_zero() {
                    continue;
                }
                let a = cross(&scene.vertices[j].sub(&scene.vertices[i]), d);
                for mu in [rational::zero(), rational::one()] {
                    let l = (&a - &mu * &den) / &b;
                    if l > la && l < lb {
                        cuts.push(l);
                    }
                }
            }
            cuts.sort();
            cuts.dedup();
            preimages += cuts.len() - 1;
            cuts.push(lb);
            for w in cuts.windows(2) {
                let (l0, l1) = (&w[0], &w[1]);
                let mid = (l0 + l1) / rational::int(2);
                let (j, _) = scene.first_return_chart(i, &mid, d)?;
                let den = cross(d, &scene.edge(j));
                let a = cross(&scene.vertices[j].sub(&scene.vertices[i]), d);
                let mu_intercept = &a / &den;
                let mu_slope = -(&b / &den);
                if let Err(reason) = scene.first_return_chart(i, l0, d) {
                    excluded.push(ExcludedPoint { parameter: scene.parameter(i, l0), reason });
                }
                let lj = &scene.lengths[j];
                let slope = lj * &mu_slope / li;
                let intercept = &scene.starts[j] + lj * &mu_intercept - &slope * &scene.starts[i];
                let domain = SidedInterval::closed_open(scene.parameter(i, l0), scene.parameter(i, l1));
                pieces.push(AffinePiece::new(slope, intercept, domain));
                provenance.push(Provenance { field_arc: arc, source_edge: i, target_edge: j });
                chart_laws.push(ChartLaw {
                    lambda_lo: l0.clone(),
                    lambda_hi: l1.clone(),
                    mu_intercept,
                    mu_slope,
                });
            }
        }
    }
    for a in 0..pieces.len() {
        for b in a + 1..pieces.len() {
            if pieces[a].image().intersects(&pieces[b].image()) {
                return Err(Error::NonInjective(format!(
                    "images of {} and {} overlap",
                    pieces[a].domain, pieces[b].domain
                )));
            }
        }
    }
    let contractive = pieces.iter().all(|p| p.slope.abs() < rational::one());
    let discontinuities = pieces
        .windows(2)
        .filter(|w| w[0].domain.hi == w[1].domain.lo && w[0].apply(&w[0].domain.hi) != w[1].apply(&w[1].domain.lo))
        .count();
    let field_discontinuities =
        scene.field.windows(2).filter(|w| w[0].hi == w[1].lo && w[0].direction != w[1].direction).count();
    let interior_vertices = scene.starts[1..scene.s()]
        .iter()
        .filter(|c| scene.field.iter().any(|f| &f.lo < *c && *c < &f.hi))
        .count();
    let (map, not_emitted) = if !scene.field_covers_boundary() {
        (None, Some("field does not cover the whole boundary".to_string()))
    } else if !contractive {
        (None, Some("some piece has |slope| >= 1".to_string()))
    } else {
        match PiecewiseAffineContraction::new(pieces.clone()) {
            Ok(m) => (Some(m), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };
    Ok(ReturnMapExtract {
        pieces,
        provenance,
        chart_laws,
        excluded,
        contractive,
        approximate: scene.approximate,
        field_discontinuities,
        vertex_crossings: interior_vertices + preimages,
        discontinuities,
        map,
        not_emitted,
    })
}

/// Triangle `(0,0),(1,0),(0,1)` with field `(1,1)` on the bottom edge only.
pub fn right_triangle_bottom_field() -> PolygonScene {
    let v = vec![Point::ints(0, 0), Point::ints(1, 0), Point::ints(0, 1)];
    let scene = PolygonScene::new(v, Vec::new(), LengthMode::Approximate { precision: 64 }).expect("valid triangle");
    let bottom = FieldPiece {
        lo: rational::zero(),
        hi: scene.edge_starts()[1].clone(),
        direction: Point::ints(1, 1),
    };
    PolygonScene::new(scene.vertices.clone(), vec![bottom], LengthMode::Approximate { precision: 64 })
        .expect("valid field")
}

/// The same triangle with a field on every edge, bottom `(1,1)`.
pub fn right_triangle_full_field() -> PolygonScene {
    PolygonScene::with_edge_fields(
        vec![Point::ints(0, 0), Point::ints(1, 0), Point::ints(0, 1)],
        vec![Point::ints(1, 1), Point::ints(-3, 1), Point::ints(1, -3)],
        LengthMode::Approximate { precision: 64 },
    )
    .expect("valid scene")
}

/// The 3-4-5 right triangle, whose normalized arclength is exact.
pub fn triangle_345(directions: [Point; 3]) -> Result<PolygonScene> {
    PolygonScene::with_edge_fields(
        vec![Point::ints(0, 0), Point::ints(4, 0), Point::ints(0, 3)],
        directions.to_vec(),
        LengthMode::Exact,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn unit_square(dirs: Vec<Point>) -> PolygonScene {
        PolygonScene::with_edge_fields(
            vec![Point::ints(0, 0), Point::ints(1, 0), Point::ints(1, 1), Point::ints(0, 1)],
            dirs,
            LengthMode::Exact,
        )
        .unwrap()
    }

    #[test]
    fn square_vertical_transport() {
        let sq = unit_square(vec![Point::ints(0, 1), Point::ints(-1, 0), Point::ints(0, -1), Point::ints(1, 0)]);
        // (t,0) at parameter t/4 goes to (t,1), parameter 1/2 + (1-t)/4.
        let t = ratio(1, 3);
        assert_eq!(sq.first_return(&(&t / rational::int(4))).unwrap(), ratio(1, 2) + (rational::one() - &t) / rational::int(4));
        let ex = extract_return_map(&sq).unwrap();
        assert!(!ex.contractive);
        assert!(ex.pieces.iter().all(|p| p.slope.abs() == rational::one()));
        assert!(ex.map.is_none());
        assert_eq!(ex.excluded.len(), 4);
        assert!(matches!(sq.first_return(&rational::zero()), Err(Error::NotInward(_))));
    }

    #[test]
    fn parallel_field_rejected() {
        let v = vec![Point::ints(0, 0), Point::ints(1, 0), Point::ints(0, 1)];
        let r = PolygonScene::with_edge_fields(
            v,
            vec![Point::ints(1, 0), Point::ints(-1, -1), Point::ints(1, 0)],
            LengthMode::Approximate { precision: 32 },
        );
        assert!(matches!(r, Err(Error::NotInward(_))));
    }

    #[test]
    fn incommensurable_needs_opt_in() {
        let v = vec![Point::ints(0, 0), Point::ints(1, 0), Point::ints(0, 1)];
        assert!(matches!(
            PolygonScene::new(v, Vec::new(), LengthMode::Exact),
            Err(Error::IncommensurableEdges(_))
        ));
    }

    #[test]
    fn right_triangle_chart_law() {
        let sc = right_triangle_bottom_field();
        let d = Point::ints(1, 1);
        for k in 1..16 {
            let t = ratio(k, 16);
            let (j, mu) = sc.first_return_chart(0, &t, &d).unwrap();
            assert_eq!(j, 1);
            let p = sc.point(j, &mu);
            assert_eq!(p, Point::new((rational::one() + &t) / rational::int(2), (rational::one() - &t) / rational::int(2)));
        }
        let ex = extract_return_map(&sc).unwrap();
        assert_eq!(ex.pieces.len(), 1);
        assert_eq!(ex.chart_laws[0].mu_slope, ratio(-1, 2));
        assert_eq!(ex.chart_laws[0].mu_intercept, ratio(1, 2));
        assert!(ex.contractive);
        assert!(ex.map.is_none());
        let slope = rational::to_f64(&ex.pieces[0].slope);
        assert!((slope + std::f64::consts::SQRT_2 / 2.0).abs() < 1e-15);
        let full = extract_return_map(&right_triangle_full_field()).unwrap();
        assert!(full.approximate && full.map.is_some());
    }

    #[test]
    fn exact_345_slopes() {
        let folding = triangle_345([Point::ints(1, 1), Point::ints(-1, -2), Point::ints(2, -1)]).unwrap();
        assert!(matches!(extract_return_map(&folding), Err(Error::NonInjective(_))));
        let sc = triangle_345([Point::ints(1, 1), Point::ints(-3, 1), Point::ints(1, -3)]).unwrap();
        assert_eq!(sc.edge_lengths(), &[ratio(1, 3), ratio(5, 12), ratio(1, 4)]);
        let ex = extract_return_map(&sc).unwrap();
        assert!(ex.map.is_some());
        for (p, law) in ex.pieces.iter().zip(&ex.chart_laws) {
            for k in 0..8 {
                let l = &law.lambda_lo + (&law.lambda_hi - &law.lambda_lo) * ratio(k, 8);
                let q = p.domain.lo.clone() + (&p.domain.hi - &p.domain.lo) * ratio(k, 8);
                if let Ok(v) = sc.first_return(&q) {
                    assert_eq!(v, p.apply(&q));
                    assert_eq!(&law.mu_intercept + &law.mu_slope * &l, sc.chart(&v).unwrap().1);
                }
            }
        }
        assert!(ex.discontinuity_bound_ok());
    }
}
