//! Intervals with exact endpoints and per-endpoint open/closed flags.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::rational::{self, Rational};

/// An interval of the real line with exact endpoints.
///
/// Either `lo < hi`, or `lo == hi` with both ends closed (a single point).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SidedInterval {
    pub lo: Rational,
    pub hi: Rational,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl SidedInterval {
    /// Returns `None` when the flags and endpoints describe an empty set.
    pub fn new(lo: Rational, hi: Rational, lo_closed: bool, hi_closed: bool) -> Option<Self> {
        match lo.cmp(&hi) {
            Ordering::Less => Some(Self { lo, hi, lo_closed, hi_closed }),
            Ordering::Equal if lo_closed && hi_closed => Some(Self { lo, hi, lo_closed, hi_closed }),
            _ => None,
        }
    }

    pub fn closed(lo: Rational, hi: Rational) -> Self {
        Self::new(lo, hi, true, true).expect("closed interval with lo > hi")
    }

    pub fn open(lo: Rational, hi: Rational) -> Self {
        Self::new(lo, hi, false, false).expect("empty open interval")
    }

    pub fn closed_open(lo: Rational, hi: Rational) -> Self {
        Self::new(lo, hi, true, false).expect("empty half-open interval")
    }

    pub fn open_closed(lo: Rational, hi: Rational) -> Self {
        Self::new(lo, hi, false, true).expect("empty half-open interval")
    }

    pub fn point(x: Rational) -> Self {
        Self { lo: x.clone(), hi: x, lo_closed: true, hi_closed: true }
    }

    /// The half-open unit interval `[0,1)`.
    pub fn unit() -> Self {
        Self::closed_open(rational::zero(), rational::one())
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let above = match x.cmp(&self.lo) {
            Ordering::Greater => true,
            Ordering::Equal => self.lo_closed,
            Ordering::Less => false,
        };
        above
            && match x.cmp(&self.hi) {
                Ordering::Less => true,
                Ordering::Equal => self.hi_closed,
                Ordering::Greater => false,
            }
    }

    /// True when `x` lies strictly between the endpoints.
    pub fn contains_in_interior(&self, x: &Rational) -> bool {
        &self.lo < x && x < &self.hi
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let (lo, lo_closed) = match self.lo.cmp(&other.lo) {
            Ordering::Greater => (self.lo.clone(), self.lo_closed),
            Ordering::Less => (other.lo.clone(), other.lo_closed),
            Ordering::Equal => (self.lo.clone(), self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.cmp(&other.hi) {
            Ordering::Less => (self.hi.clone(), self.hi_closed),
            Ordering::Greater => (other.hi.clone(), other.hi_closed),
            Ordering::Equal => (self.hi.clone(), self.hi_closed && other.hi_closed),
        };
        Self::new(lo, hi, lo_closed, hi_closed)
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.intersect(other).is_some()
    }

    /// Length of the overlap (zero when disjoint or touching in a point).
    pub fn overlap_length(&self, other: &Self) -> Rational {
        self.intersect(other).map(|i| i.length()).unwrap_or_else(rational::zero)
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        let lo_ok = match self.lo.cmp(&other.lo) {
            Ordering::Greater => true,
            Ordering::Equal => other.lo_closed || !self.lo_closed,
            Ordering::Less => false,
        };
        let hi_ok = match self.hi.cmp(&other.hi) {
            Ordering::Less => true,
            Ordering::Equal => other.hi_closed || !self.hi_closed,
            Ordering::Greater => false,
        };
        lo_ok && hi_ok
    }

    pub fn interior(&self) -> Option<Self> {
        Self::new(self.lo.clone(), self.hi.clone(), false, false)
    }

    pub fn closure(&self) -> Self {
        Self::closed(self.lo.clone(), self.hi.clone())
    }

    /// Image under `x ↦ slope·x + intercept`; flags swap when the slope is negative.
    pub fn affine_image(&self, slope: &Rational, intercept: &Rational) -> Self {
        let a = slope * &self.lo + intercept;
        let b = slope * &self.hi + intercept;
        if slope.is_negative() {
            Self { lo: b, hi: a, lo_closed: self.hi_closed, hi_closed: self.lo_closed }
        } else {
            debug_assert!(!slope.is_zero());
            Self { lo: a, hi: b, lo_closed: self.lo_closed, hi_closed: self.hi_closed }
        }
    }

    /// Preimage under an injective affine map.
    pub fn affine_preimage(&self, slope: &Rational, intercept: &Rational) -> Self {
        let inv = rational::one() / slope;
        let shift = -(intercept * &inv);
        self.affine_image(&inv, &shift)
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / rational::int(2)
    }

    fn sort_key(&self) -> (&Rational, bool) {
        (&self.lo, !self.lo_closed)
    }
}

impl fmt::Display for SidedInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            return write!(f, "{{{}}}", self.lo);
        }
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

/// Sorts and merges a list of intervals into the minimal list of disjoint
/// components whose union is the same point set.
pub fn normalize(mut parts: Vec<SidedInterval>) -> Vec<SidedInterval> {
    parts.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    let mut out: Vec<SidedInterval> = Vec::with_capacity(parts.len());
    for next in parts {
        if let Some(cur) = out.last_mut() {
            let joins = match next.lo.cmp(&cur.hi) {
                Ordering::Less => true,
                Ordering::Equal => cur.hi_closed || next.lo_closed,
                Ordering::Greater => false,
            };
            if joins {
                match next.hi.cmp(&cur.hi) {
                    Ordering::Greater => {
                        cur.hi = next.hi;
                        cur.hi_closed = next.hi_closed;
                    }
                    Ordering::Equal => cur.hi_closed |= next.hi_closed,
                    Ordering::Less => {}
                }
                continue;
            }
        }
        out.push(next);
    }
    out
}

/// Complement inside `within`, for a normalized list.
pub fn complement_within(parts: &[SidedInterval], within: &SidedInterval) -> Vec<SidedInterval> {
    let mut out = Vec::new();
    let mut cursor = within.lo.clone();
    let mut cursor_closed = within.lo_closed;
    for p in parts {
        let Some(p) = p.intersect(within) else { continue };
        if let Some(gap) = SidedInterval::new(cursor.clone(), p.lo.clone(), cursor_closed, !p.lo_closed) {
            out.push(gap);
        }
        cursor = p.hi.clone();
        cursor_closed = !p.hi_closed;
    }
    if let Some(gap) = SidedInterval::new(cursor, within.hi.clone(), cursor_closed, within.hi_closed) {
        out.push(gap);
    }
    out
}

/// Interior (in the real line) of a finite union of intervals, as open components.
pub fn interior_of_union(parts: Vec<SidedInterval>) -> Vec<SidedInterval> {
    normalize(parts).into_iter().filter_map(|p| p.interior()).collect()
}

/// Point-set difference `a \ b` of two finite unions.
pub fn difference(a: &[SidedInterval], b: &[SidedInterval]) -> Vec<SidedInterval> {
    let b = normalize(b.to_vec());
    let mut out = Vec::new();
    for piece in normalize(a.to_vec()) {
        out.extend(complement_within(&b, &piece));
    }
    normalize(out)
}

pub fn union_contains(parts: &[SidedInterval], x: &Rational) -> bool {
    parts.iter().any(|p| p.contains(x))
}

/// True when `j` is contained in the union `parts` (which is normalized first).
pub fn union_covers(parts: &[SidedInterval], j: &SidedInterval) -> bool {
    normalize(parts.to_vec()).iter().any(|p| j.is_subset_of(p))
}

pub fn total_length(parts: &[SidedInterval]) -> Rational {
    parts.iter().fold(rational::zero(), |acc, p| acc + p.length())
}

/// True when no two intervals of the list share a point.
pub fn pairwise_disjoint(parts: &[SidedInterval]) -> bool {
    let mut sorted: Vec<&SidedInterval> = parts.iter().collect();
    sorted.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    sorted.windows(2).all(|w| !w[0].intersects(w[1]))
}

/// Boundary points (closure minus interior) of a finite union.
pub fn boundary_points(parts: &[SidedInterval]) -> Vec<Rational> {
    let norm = normalize(parts.to_vec());
    let mut pts = Vec::new();
    for p in &norm {
        for e in [&p.lo, &p.hi] {
            if !norm.iter().any(|q| q.contains_in_interior(e)) && !pts.contains(e) {
                pts.push(e.clone());
            }
        }
    }
    pts.sort();
    pts
}

/// Distance from `x` to the interval (zero inside).
pub fn distance_to(j: &SidedInterval, x: &Rational) -> Rational {
    if x < &j.lo {
        &j.lo - x
    } else if x > &j.hi {
        x - &j.hi
    } else {
        rational::zero()
    }
}

pub fn abs_diff(a: &Rational, b: &Rational) -> Rational {
    (a - b).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn q(n: i64, d: i64) -> Rational {
        ratio(n, d)
    }

    #[test]
    fn membership_respects_flags() {
        let j = SidedInterval::closed_open(q(0, 1), q(1, 2));
        assert!(j.contains(&q(0, 1)));
        assert!(!j.contains(&q(1, 2)));
        assert!(SidedInterval::new(q(1, 2), q(1, 2), true, false).is_none());
    }

    #[test]
    fn negative_slope_swaps_flags() {
        let j = SidedInterval::closed_open(q(0, 1), q(1, 2));
        let img = j.affine_image(&q(-2, 5), &q(3, 5));
        assert_eq!(img, SidedInterval::open_closed(q(2, 5), q(3, 5)));
    }

    #[test]
    fn normalize_merges_only_when_union_is_interval() {
        let parts = vec![
            SidedInterval::closed_open(q(1, 2), q(3, 4)),
            SidedInterval::closed_open(q(0, 1), q(1, 2)),
            SidedInterval::open(q(3, 4), q(1, 1)),
        ];
        let n = normalize(parts);
        assert_eq!(n.len(), 2);
        assert_eq!(n[0], SidedInterval::closed_open(q(0, 1), q(3, 4)));
    }

    #[test]
    fn complement_of_map_g_image() {
        let image = normalize(vec![
            SidedInterval::open_closed(q(2, 5), q(3, 5)),
            SidedInterval::closed_open(q(0, 1), q(1, 10)),
        ]);
        let c = complement_within(&image, &SidedInterval::unit());
        assert_eq!(
            c,
            vec![SidedInterval::closed(q(1, 10), q(2, 5)), SidedInterval::open(q(3, 5), q(1, 1))]
        );
    }

    #[test]
    fn boundary_of_split_union() {
        let parts = vec![SidedInterval::open(q(0, 1), q(3, 4)), SidedInterval::open(q(3, 4), q(1, 1))];
        assert_eq!(boundary_points(&parts), vec![q(0, 1), q(3, 4), q(1, 1)]);
    }

    #[test]
    fn subset_with_flags() {
        let a = SidedInterval::open(q(1, 10), q(1, 4));
        let b = SidedInterval::closed(q(0, 1), q(1, 4));
        assert!(a.is_subset_of(&b));
        let c = SidedInterval::open_closed(q(1, 10), q(1, 4));
        assert!(!c.is_subset_of(&SidedInterval::open(q(0, 1), q(1, 4))));
    }
}
