//! s-chains of integer pairs and the bound on their coordinate sets.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Pairs `(a_0,b_0), …, (a_{s-1},b_{s-1})` where each pair repeats its
/// predecessor's first coordinate, cyclically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chain {
    pub pairs: Vec<(u32, u32)>,
}

impl Chain {
    pub fn new(pairs: Vec<(u32, u32)>) -> Result<Self> {
        if is_chain(&pairs)? {
            Ok(Self { pairs })
        } else {
            Err(Error::PreconditionFailed(format!("{pairs:?} is not a chain")))
        }
    }

    pub fn s(&self) -> usize {
        self.pairs.len()
    }

    pub fn coordinate_set(&self) -> BTreeSet<u32> {
        coordinate_set(&self.pairs)
    }

    /// All first coordinates equal, and `a_0, b_0, …, b_{s-1}` pairwise distinct.
    pub fn is_extremal_shape(&self) -> bool {
        is_extremal_shape(&self.pairs)
    }
}

/// True iff for every `ℓ in 1..=s`, `a_{ℓ mod s} = a_{ℓ-1}` or `b_{ℓ mod s} = a_{ℓ-1}`.
pub fn is_chain(pairs: &[(u32, u32)]) -> Result<bool> {
    if pairs.is_empty() {
        return Err(Error::EmptyChain);
    }
    let s = pairs.len();
    Ok((1..=s).all(|l| {
        let prev = pairs[l - 1].0;
        let (a, b) = pairs[l % s];
        a == prev || b == prev
    }))
}

pub fn coordinate_set(pairs: &[(u32, u32)]) -> BTreeSet<u32> {
    pairs.iter().flat_map(|&(a, b)| [a, b]).collect()
}

pub fn is_extremal_shape(pairs: &[(u32, u32)]) -> bool {
    let a0 = pairs[0].0;
    if pairs.iter().any(|&(a, _)| a != a0) {
        return false;
    }
    let mut seen = BTreeSet::from([a0]);
    pairs.iter().all(|&(_, b)| seen.insert(b))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerificationReport {
    pub s_max: usize,
    pub alphabet_max: u32,
    /// Number of chains examined, per `s` (index `s-1`).
    pub chains_per_s: Vec<u64>,
    /// Largest `#S` seen, per `s`.
    pub max_coordinates_per_s: Vec<usize>,
    /// Chains with `#S = s+1`, per `s`.
    pub extremal_per_s: Vec<u64>,
    /// Chains with `#S > s+1`.
    pub bound_violations: Vec<Vec<(u32, u32)>>,
    /// Chains where `#S = s+1` and the extremal shape disagree.
    pub characterization_violations: Vec<Vec<(u32, u32)>>,
}

impl VerificationReport {
    pub fn is_clean(&self) -> bool {
        self.bound_violations.is_empty() && self.characterization_violations.is_empty()
    }

    pub fn total_chains(&self) -> u64 {
        self.chains_per_s.iter().sum()
    }
}

/// Upper limit on chains examined by [`verify_lemma`].
pub const ENUMERATION_BUDGET: u64 = 50_000_000;

#[derive(Default)]
struct Tally {
    chains: u64,
    max_coords: usize,
    extremal: u64,
    bound_violations: Vec<Vec<(u32, u32)>>,
    characterization_violations: Vec<Vec<(u32, u32)>>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.chains += other.chains;
        self.max_coords = self.max_coords.max(other.max_coords);
        self.extremal += other.extremal;
        self.bound_violations.extend(other.bound_violations);
        self.characterization_violations.extend(other.characterization_violations);
        self
    }
}

/// Every chain with `1 <= s <= s_max` over the alphabet `{1..alphabet_max}`,
/// checked against `#S <= s+1` and its equality case.
pub fn verify_lemma(s_max: usize, alphabet_max: u32) -> Result<VerificationReport> {
    let a = alphabet_max as u64;
    // Each pair after the first has at most 2a-1 continuations.
    let estimate: u64 = (1..=s_max as u32).map(|s| a * a * (2 * a).saturating_pow(s - 1)).sum();
    if estimate > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded(format!("about {estimate} chains for s <= {s_max}")));
    }
    let mut report = VerificationReport { s_max, alphabet_max, ..Default::default() };
    for s in 1..=s_max {
        let firsts: Vec<(u32, u32)> =
            (1..=alphabet_max).flat_map(|x| (1..=alphabet_max).map(move |y| (x, y))).collect();
        let tally = firsts
            .into_par_iter()
            .map(|first| {
                let mut tally = Tally::default();
                let mut buf = vec![first];
                extend(&mut buf, s, alphabet_max, &mut tally);
                tally
            })
            .reduce(Tally::default, Tally::merge);
        report.chains_per_s.push(tally.chains);
        report.max_coordinates_per_s.push(tally.max_coords);
        report.extremal_per_s.push(tally.extremal);
        report.bound_violations.extend(tally.bound_violations);
        report.characterization_violations.extend(tally.characterization_violations);
    }
    Ok(report)
}

fn extend(buf: &mut Vec<(u32, u32)>, s: usize, alphabet_max: u32, tally: &mut Tally) {
    if buf.len() == s {
        let prev = buf[s - 1].0;
        let (a0, b0) = buf[0];
        if a0 != prev && b0 != prev {
            return;
        }
        tally.chains += 1;
        let size = coordinate_set(buf).len();
        tally.max_coords = tally.max_coords.max(size);
        let extremal = size == s + 1;
        if extremal {
            tally.extremal += 1;
        }
        if size > s + 1 {
            tally.bound_violations.push(buf.clone());
        }
        if extremal != is_extremal_shape(buf) {
            tally.characterization_violations.push(buf.clone());
        }
        return;
    }
    let prev = buf[buf.len() - 1].0;
    for other in 1..=alphabet_max {
        buf.push((prev, other));
        extend(buf, s, alphabet_max, tally);
        buf.pop();
        if other != prev {
            buf.push((other, prev));
            extend(buf, s, alphabet_max, tally);
            buf.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recognizes_chains() {
        assert!(is_chain(&[(1, 2), (1, 3), (4, 1), (2, 4)]).unwrap());
        assert!(!is_chain(&[(1, 2), (3, 4)]).unwrap());
        assert!(is_chain(&[(5, 9)]).unwrap());
        assert_eq!(is_chain(&[]), Err(Error::EmptyChain));
    }

    #[test]
    fn coordinate_sets() {
        let star: Vec<(u32, u32)> = (0..3).map(|l| (1, l + 2)).collect();
        assert_eq!(coordinate_set(&star), BTreeSet::from([1, 2, 3, 4]));
        assert_eq!(coordinate_set(&[(1, 2), (1, 3), (4, 1), (2, 4)]).len(), 4);
        assert_eq!(coordinate_set(&[(7, 7)]).len(), 1);
    }

    #[test]
    fn small_exhaustion() {
        let r = verify_lemma(2, 3).unwrap();
        assert!(r.is_clean());
        assert_eq!(r.max_coordinates_per_s, vec![2, 3]);
        let r = verify_lemma(1, 4).unwrap();
        assert_eq!(r.chains_per_s, vec![16]);
        assert!(r.is_clean());
    }
}
