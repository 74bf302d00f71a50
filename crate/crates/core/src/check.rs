//! The pruning test shared by every construction: does some hub already in
//! `L(v)` cover the candidate `(u, d)`?
//!
//! [`batch_distance_check`] is the one call site all algorithms go through,
//! so an accelerated scan (bit-parallel hub sets, vectorised lookups) can be
//! dropped in here without touching the drivers.

use rustc_hash::FxHashMap;

use crate::labels::HubEntry;
use crate::{Distance, Rank, INF};

/// Distance lookup into an index built over one hub's label `L(u)`.
pub trait HubLookup {
    fn lookup(&self, hub: Rank) -> Option<Distance>;
}

impl HubLookup for FxHashMap<Rank, Distance> {
    #[inline]
    fn lookup(&self, hub: Rank) -> Option<Distance> {
        self.get(&hub).copied()
    }
}

/// Direct-indexed hub → distance array with dirty-list reset.
#[derive(Debug, Clone)]
pub struct DenseIndex {
    dist: Vec<Distance>,
    dirty: Vec<Rank>,
}

impl DenseIndex {
    pub fn new(n: usize) -> Self {
        DenseIndex {
            dist: vec![INF; n],
            dirty: Vec::new(),
        }
    }

    /// Loads `entries`, returning how many were written.
    pub fn load(&mut self, entries: &[HubEntry]) -> usize {
        for e in entries {
            if self.dist[e.hub as usize] == INF {
                self.dirty.push(e.hub);
            }
            self.dist[e.hub as usize] = e.dist;
        }
        entries.len()
    }

    pub fn clear(&mut self) {
        for &h in &self.dirty {
            self.dist[h as usize] = INF;
        }
        self.dirty.clear();
    }

    pub fn is_clear(&self) -> bool {
        self.dirty.is_empty() && self.dist.iter().all(|&d| d == INF)
    }
}

impl HubLookup for DenseIndex {
    #[inline]
    fn lookup(&self, hub: Rank) -> Option<Distance> {
        match self.dist[hub as usize] {
            INF => None,
            d => Some(d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOutcome {
    pub accepted: bool,
    /// Entries of `L(v)` examined: all of them on accept, the prefix up to and
    /// including the witness on reject.
    pub scanned: usize,
}

/// Accepts `(u, d)` for `v` iff no hub `h` in `lv` has `H(u)[h] + d(h, v) <= d`.
///
/// `lv` is scanned in rank order and the scan stops at the first witness.
#[inline]
pub fn batch_distance_check<H: HubLookup + ?Sized>(lv: &[HubEntry], index: &H, d: Distance) -> CheckOutcome {
    for (i, e) in lv.iter().enumerate() {
        if let Some(du) = index.lookup(e.hub) {
            if du.saturating_add(e.dist) <= d {
                return CheckOutcome {
                    accepted: false,
                    scanned: i + 1,
                };
            }
        }
    }
    CheckOutcome {
        accepted: true,
        scanned: lv.len(),
    }
}

/// `L(v)` without its trailing self-entry: the part a check scans.
#[inline]
pub fn scan_slice(lv: &[HubEntry], owner: Rank) -> &[HubEntry] {
    match lv.last() {
        Some(e) if e.hub == owner => &lv[..lv.len() - 1],
        _ => lv,
    }
}

/// Check counts and scan-length sums for one run, or one worker's share.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CheckTally {
    pub positive: u64,
    pub negative: u64,
    pub scan_positive: u64,
    pub scan_negative: u64,
}

impl CheckTally {
    #[inline]
    pub fn record(&mut self, outcome: CheckOutcome) {
        if outcome.accepted {
            self.positive += 1;
            self.scan_positive += outcome.scanned as u64;
        } else {
            self.negative += 1;
            self.scan_negative += outcome.scanned as u64;
        }
    }

    pub fn checks(&self) -> u64 {
        self.positive + self.negative
    }
}

impl std::ops::AddAssign for CheckTally {
    fn add_assign(&mut self, o: Self) {
        self.positive += o.positive;
        self.negative += o.negative;
        self.scan_positive += o.scan_positive;
        self.scan_negative += o.scan_negative;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(Rank, Distance)]) -> FxHashMap<Rank, Distance> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn witness_rejects() {
        let lv = [HubEntry::new(3, 1)];
        let out = batch_distance_check(&lv, &map(&[(3, 1)]), 2);
        assert_eq!(out, CheckOutcome { accepted: false, scanned: 1 });
    }

    #[test]
    fn longer_detour_accepts() {
        let lv = [HubEntry::new(3, 1)];
        let out = batch_distance_check(&lv, &map(&[(3, 2)]), 2);
        assert_eq!(out, CheckOutcome { accepted: true, scanned: 1 });
    }

    #[test]
    fn empty_label_accepts() {
        let out = batch_distance_check(&[], &map(&[(0, 0)]), 5);
        assert_eq!(out, CheckOutcome { accepted: true, scanned: 0 });
    }

    #[test]
    fn scan_stops_at_first_witness() {
        let lv = [HubEntry::new(0, 4), HubEntry::new(2, 1), HubEntry::new(5, 1)];
        let index = map(&[(2, 1), (5, 0)]);
        assert_eq!(batch_distance_check(&lv, &index, 2).scanned, 2);
    }

    #[test]
    fn dense_and_hashed_agree() {
        let lu = [HubEntry::new(0, 2), HubEntry::new(4, 1), HubEntry::new(6, 0)];
        let mut dense = DenseIndex::new(8);
        assert_eq!(dense.load(&lu), 3);
        let hashed: FxHashMap<_, _> = lu.iter().map(|e| (e.hub, e.dist)).collect();
        let lv = [HubEntry::new(0, 1), HubEntry::new(4, 3)];
        for d in 0..8 {
            assert_eq!(batch_distance_check(&lv, &dense, d), batch_distance_check(&lv, &hashed, d));
        }
        dense.clear();
        assert!(dense.is_clear());
    }

    #[test]
    fn self_entry_is_not_scanned() {
        let lv = [HubEntry::new(1, 2), HubEntry::new(7, 0)];
        assert_eq!(scan_slice(&lv, 7).len(), 1);
        assert_eq!(scan_slice(&lv, 9).len(), 2);
    }
}
