//! Interval arithmetic on a finite open chain `0..n`.
//!
//! Every derived set is clipped to the chain, so the half-infinite regions
//! "≤ x" and "> x" become ordinary intervals. Regions that may split into two
//! pieces (complements, boundaries) are sorted lists of disjoint intervals.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A contiguous, inclusive range of sites `[lo, hi]` on a chain of `n` sites,
/// or the empty set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    bounds: Option<(usize, usize)>,
    n: usize,
}

impl Interval {
    pub fn new(lo: usize, hi: usize, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Geometry("chain length must be positive".into()));
        }
        if lo > hi || hi >= n {
            return Err(Error::Geometry(format!("[{lo},{hi}] is not inside a chain of {n} sites")));
        }
        Ok(Self { bounds: Some((lo, hi)), n })
    }

    pub fn empty(n: usize) -> Self {
        Self { bounds: None, n }
    }

    pub fn site(x: usize, n: usize) -> Result<Self> {
        Self::new(x, x, n)
    }

    pub fn whole(n: usize) -> Self {
        Self { bounds: if n == 0 { None } else { Some((0, n - 1)) }, n }
    }

    /// Builds `[lo, hi]` from signed endpoints, clipping to the chain.
    pub fn clipped(lo: i64, hi: i64, n: usize) -> Self {
        let lo = lo.max(0);
        let hi = hi.min(n as i64 - 1);
        if n == 0 || lo > hi {
            Self::empty(n)
        } else {
            Self { bounds: Some((lo as usize, hi as usize)), n }
        }
    }

    /// Closed ball `[x - r, x + r]` clipped to the chain.
    pub fn ball(x: usize, r: usize, n: usize) -> Self {
        Self::clipped(x as i64 - r as i64, x as i64 + r as i64, n)
    }

    /// The half-line `≤ x`.
    pub fn at_most(x: i64, n: usize) -> Self {
        Self::clipped(0, x, n)
    }

    /// The half-line `≥ x`.
    pub fn at_least(x: i64, n: usize) -> Self {
        Self::clipped(x, n as i64 - 1, n)
    }

    pub fn chain_len(&self) -> usize {
        self.n
    }

    pub fn bounds(&self) -> Option<(usize, usize)> {
        self.bounds
    }

    pub fn lo(&self) -> Option<usize> {
        self.bounds.map(|b| b.0)
    }

    pub fn hi(&self) -> Option<usize> {
        self.bounds.map(|b| b.1)
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_none()
    }

    pub fn len(&self) -> usize {
        self.bounds.map_or(0, |(lo, hi)| hi - lo + 1)
    }

    pub fn contains(&self, x: usize) -> bool {
        self.bounds.is_some_and(|(lo, hi)| lo <= x && x <= hi)
    }

    pub fn sites(&self) -> Vec<usize> {
        self.bounds.map_or_else(Vec::new, |(lo, hi)| (lo..=hi).collect())
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        match (self.bounds, other.bounds) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some((a, b)), Some((c, d))) => c <= a && b <= d,
        }
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        match (self.bounds, other.bounds) {
            (Some((a, b)), Some((c, d))) => Interval::clipped(a.max(c) as i64, b.min(d) as i64, self.n),
            _ => Interval::empty(self.n),
        }
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Interval) -> Interval {
        match (self.bounds, other.bounds) {
            (None, _) => *other,
            (_, None) => *self,
            (Some((a, b)), Some((c, d))) => Interval { bounds: Some((a.min(c), b.max(d))), n: self.n },
        }
    }

    pub fn to_region(&self) -> Region {
        Region::from_intervals(self.n, [*self])
    }

    pub fn complement(&self) -> Region {
        self.to_region().complement()
    }

    /// `r`-fattening `{y : dist(y, X) ≤ r}` for `r ≥ 0`; for `r < 0` the
    /// shrinking `[(X^c)_{|r|}]^c`.
    pub fn fatten(&self, r: i64) -> Interval {
        let Some((lo, hi)) = self.bounds else {
            return *self;
        };
        if r >= 0 {
            return Interval::clipped(lo as i64 - r, hi as i64 + r, self.n);
        }
        let grown = self.complement().fatten(-r);
        let shrunk = grown.complement();
        // complement of a fattened co-interval is a single interval or empty
        shrunk.pieces().first().copied().unwrap_or_else(|| Interval::empty(self.n))
    }

    /// `r`-width boundary `X_r ∩ (X^c)_r`.
    pub fn boundary(&self, r: usize) -> Region {
        if self.is_empty() {
            return Region::empty(self.n);
        }
        let inner = self.fatten(r as i64).to_region();
        let outer = self.complement().fatten(r as i64);
        inner.intersect(&outer)
    }

    /// `min |x - y|` over the two sets.
    pub fn dist(&self, other: &Interval) -> Result<usize> {
        let ((a, b), (c, d)) = match (self.bounds, other.bounds) {
            (Some(p), Some(q)) => (p, q),
            _ => return Err(Error::EmptyDistance),
        };
        Ok(if b < c {
            c - b
        } else if d < a {
            a - d
        } else {
            0
        })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bounds {
            Some((lo, hi)) => write!(f, "[{lo},{hi}]"),
            None => write!(f, "∅"),
        }
    }
}

/// Union of sorted, disjoint, non-adjacent intervals on one chain.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    pieces: Vec<Interval>,
    n: usize,
}

impl Region {
    pub fn empty(n: usize) -> Self {
        Self { pieces: Vec::new(), n }
    }

    pub fn whole(n: usize) -> Self {
        Interval::whole(n).to_region()
    }

    pub fn from_intervals(n: usize, intervals: impl IntoIterator<Item = Interval>) -> Self {
        let mut spans: Vec<(usize, usize)> = intervals.into_iter().filter_map(|i| i.bounds).collect();
        spans.sort_unstable();
        let mut merged: Vec<(usize, usize)> = Vec::with_capacity(spans.len());
        for (lo, hi) in spans {
            match merged.last_mut() {
                Some(last) if lo <= last.1 + 1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        let pieces = merged.into_iter().map(|(lo, hi)| Interval { bounds: Some((lo, hi)), n }).collect();
        Self { pieces, n }
    }

    pub fn from_sites(n: usize, sites: &[usize]) -> Result<Self> {
        let mut intervals = Vec::with_capacity(sites.len());
        for &s in sites {
            intervals.push(Interval::site(s, n)?);
        }
        Ok(Self::from_intervals(n, intervals))
    }

    pub fn chain_len(&self) -> usize {
        self.n
    }

    pub fn pieces(&self) -> &[Interval] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pieces.iter().map(Interval::len).sum()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.pieces.iter().any(|p| p.contains(x))
    }

    pub fn sites(&self) -> Vec<usize> {
        self.pieces.iter().flat_map(Interval::sites).collect()
    }

    pub fn complement(&self) -> Region {
        let mut out = Vec::new();
        let mut next = 0usize;
        for p in &self.pieces {
            let (lo, hi) = p.bounds.expect("region pieces are nonempty");
            if lo > next {
                out.push(Interval { bounds: Some((next, lo - 1)), n: self.n });
            }
            next = hi + 1;
        }
        if next < self.n {
            out.push(Interval { bounds: Some((next, self.n - 1)), n: self.n });
        }
        Region { pieces: out, n: self.n }
    }

    pub fn union(&self, other: &Region) -> Region {
        Region::from_intervals(self.n, self.pieces.iter().chain(&other.pieces).copied())
    }

    pub fn intersect(&self, other: &Region) -> Region {
        let mut out = Vec::new();
        for a in &self.pieces {
            for b in &other.pieces {
                let i = a.intersect(b);
                if !i.is_empty() {
                    out.push(i);
                }
            }
        }
        Region::from_intervals(self.n, out)
    }

    /// Fattening for `r ≥ 0`, complement-fatten-complement for `r < 0`.
    pub fn fatten(&self, r: i64) -> Region {
        if r >= 0 {
            Region::from_intervals(self.n, self.pieces.iter().map(|p| p.fatten(r)))
        } else {
            self.complement().fatten(-r).complement()
        }
    }

    pub fn is_subset_of(&self, other: &Region) -> bool {
        self.intersect(other) == *self
    }
}

impl From<Interval> for Region {
    fn from(i: Interval) -> Self {
        i.to_region()
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pieces.is_empty() {
            return write!(f, "∅");
        }
        let parts: Vec<String> = self.pieces.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(" ∪ "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: usize, hi: usize, n: usize) -> Interval {
        Interval::new(lo, hi, n).unwrap()
    }

    #[test]
    fn fatten_examples() {
        assert_eq!(iv(3, 5, 10).fatten(2), iv(1, 7, 10));
        assert_eq!(iv(3, 5, 10).fatten(0), iv(3, 5, 10));
        assert_eq!(iv(2, 7, 10).fatten(-2), iv(4, 5, 10));
    }

    #[test]
    fn shrinking_past_empty() {
        assert!(iv(4, 5, 10).fatten(-1).is_empty());
        assert!(iv(4, 5, 10).fatten(-7).is_empty());
    }

    #[test]
    fn shrinking_at_chain_edge_only_moves_inner_end() {
        // the chain edge is not a boundary with the complement
        assert_eq!(iv(0, 5, 10).fatten(-1), iv(0, 4, 10));
        assert_eq!(Interval::whole(10).fatten(-3), Interval::whole(10));
    }

    #[test]
    fn boundary_examples() {
        let b = iv(2, 6, 10).boundary(1);
        assert_eq!(b, Region::from_intervals(10, [iv(1, 2, 10), iv(6, 7, 10)]));
        assert!(iv(0, 9, 10).boundary(1).is_empty());
        assert_eq!(iv(4, 4, 10).boundary(2), iv(2, 6, 10).to_region());
        assert_eq!(iv(0, 4, 10).boundary(1), iv(4, 5, 10).to_region());
        assert!(Interval::empty(10).boundary(2).is_empty());
    }

    #[test]
    fn dist_examples() {
        assert_eq!(iv(0, 2, 10).dist(&iv(5, 8, 10)).unwrap(), 3);
        assert_eq!(iv(0, 5, 10).dist(&iv(3, 8, 10)).unwrap(), 0);
        assert_eq!(iv(4, 4, 10).dist(&iv(4, 4, 10)).unwrap(), 0);
        assert!(matches!(Interval::empty(10).dist(&iv(1, 1, 10)), Err(Error::EmptyDistance)));
    }

    #[test]
    fn invalid_intervals_rejected() {
        assert!(Interval::new(3, 2, 10).is_err());
        assert!(Interval::new(0, 10, 10).is_err());
        assert!(Interval::new(0, 0, 0).is_err());
    }

    #[test]
    fn complement_round_trip() {
        let r = Region::from_intervals(12, [iv(0, 1, 12), iv(5, 7, 12)]);
        assert_eq!(r.complement(), Region::from_intervals(12, [iv(2, 4, 12), iv(8, 11, 12)]));
        assert_eq!(r.complement().complement(), r);
        assert_eq!(Region::empty(5).complement(), Region::whole(5));
    }

    #[test]
    fn adjacent_pieces_merge() {
        let r = Region::from_intervals(10, [iv(0, 2, 10), iv(3, 4, 10), iv(7, 7, 10)]);
        assert_eq!(r.pieces().len(), 2);
        assert_eq!(r.sites(), vec![0, 1, 2, 3, 4, 7]);
    }

    fn all_intervals(n: usize) -> Vec<Interval> {
        let mut v = vec![Interval::empty(n)];
        for lo in 0..n {
            for hi in lo..n {
                v.push(iv(lo, hi, n));
            }
        }
        v
    }

    fn as_set(sites: Vec<usize>) -> std::collections::BTreeSet<usize> {
        sites.into_iter().collect()
    }

    #[test]
    fn fatten_matches_definition_by_enumeration() {
        for n in 1..=9 {
            for x in all_intervals(n) {
                for r in 0..4i64 {
                    let expected: Vec<usize> = (0..n)
                        .filter(|&y| x.sites().iter().any(|&s| (s as i64 - y as i64).abs() <= r))
                        .collect();
                    assert_eq!(x.fatten(r).sites(), expected);
                }
            }
        }
    }

    #[test]
    fn fatten_composition_and_nesting() {
        for n in 1..=12 {
            for x in all_intervals(n) {
                for r in 0..4i64 {
                    for s in 0..4i64 {
                        assert_eq!(x.fatten(r).fatten(s), x.fatten(r + s));
                    }
                    assert!(x.fatten(-r).is_subset_of(&x));
                    assert!(x.is_subset_of(&x.fatten(r)));
                }
            }
        }
    }

    #[test]
    fn boundary_matches_enumeration() {
        for n in 1..=12 {
            for x in all_intervals(n) {
                for r in 1..4usize {
                    let xs = as_set(x.sites());
                    let within = |y: usize, set: &std::collections::BTreeSet<usize>| {
                        set.iter().any(|&s| (s as i64 - y as i64).unsigned_abs() as usize <= r)
                    };
                    let comp: std::collections::BTreeSet<usize> = (0..n).filter(|y| !xs.contains(y)).collect();
                    let expected: Vec<usize> = (0..n).filter(|&y| within(y, &xs) && within(y, &comp)).collect();
                    assert_eq!(x.boundary(r).sites(), expected, "X={x} r={r} n={n}");
                }
            }
        }
    }
}
