//! Batch-scoped per-vertex message filters.
//!
//! Storage for a vertex is carved out of a slab on first touch, so a batch
//! costs memory and clearing time proportional to the vertices it reaches,
//! not to `n`.

use crate::{Distance, Rank, INF};

const NO_SLOT: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Slab<T: Copy> {
    width: usize,
    empty: T,
    slot_of: Vec<u32>,
    data: Vec<T>,
    touched: Vec<Rank>,
}

impl<T: Copy> Slab<T> {
    fn new(n: usize, width: usize, empty: T) -> Self {
        Slab {
            width,
            empty,
            slot_of: vec![NO_SLOT; n],
            data: Vec::new(),
            touched: Vec::new(),
        }
    }

    #[inline]
    fn row(&self, v: Rank) -> Option<&[T]> {
        match self.slot_of[v as usize] {
            NO_SLOT => None,
            s => {
                let s = s as usize * self.width;
                Some(&self.data[s..s + self.width])
            }
        }
    }

    #[inline]
    fn row_mut(&mut self, v: Rank) -> &mut [T] {
        let slot = match self.slot_of[v as usize] {
            NO_SLOT => {
                let s = self.touched.len() as u32;
                self.slot_of[v as usize] = s;
                self.touched.push(v);
                self.data.extend(std::iter::repeat_n(self.empty, self.width));
                s
            }
            s => s,
        } as usize;
        &mut self.data[slot * self.width..(slot + 1) * self.width]
    }

    fn clear(&mut self) -> usize {
        let touched = self.touched.len();
        for &v in &self.touched {
            self.slot_of[v as usize] = NO_SLOT;
        }
        self.touched.clear();
        self.data.clear();
        touched
    }
}

/// One bit per batch hub per vertex: "this hub has already been delivered
/// here during the current batch".
#[derive(Debug, Clone)]
pub struct CandidateBitSet {
    slab: Slab<u64>,
    width: usize,
}

impl CandidateBitSet {
    pub fn new(n: usize, batch_size: usize) -> Self {
        CandidateBitSet {
            slab: Slab::new(n, batch_size.div_ceil(64).max(1), 0),
            width: batch_size,
        }
    }

    pub fn batch_size(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn test(&self, v: Rank, idx: u32) -> bool {
        self.slab
            .row(v)
            .is_some_and(|r| r[idx as usize / 64] & (1u64 << (idx % 64)) != 0)
    }

    /// Sets the bit, returning whether it was clear.
    #[inline]
    pub fn set(&mut self, v: Rank, idx: u32) -> bool {
        debug_assert!((idx as usize) < self.width);
        let word = &mut self.slab.row_mut(v)[idx as usize / 64];
        let mask = 1u64 << (idx % 64);
        let fresh = *word & mask == 0;
        *word |= mask;
        fresh
    }

    pub fn touched(&self) -> &[Rank] {
        &self.slab.touched
    }

    /// Resets every touched vertex, returning how many there were.
    pub fn clear(&mut self) -> usize {
        self.slab.clear()
    }
}

/// Best distance received per batch hub per vertex; `INF` until a message
/// arrives.
#[derive(Debug, Clone)]
pub struct CandidateDistTable {
    slab: Slab<Distance>,
}

impl CandidateDistTable {
    pub fn new(n: usize, batch_size: usize) -> Self {
        CandidateDistTable {
            slab: Slab::new(n, batch_size.max(1), INF),
        }
    }

    #[inline]
    pub fn get(&self, v: Rank, idx: u32) -> Distance {
        self.slab.row(v).map_or(INF, |r| r[idx as usize])
    }

    /// Lowers the slot to `d` if that is an improvement.
    #[inline]
    pub fn improve(&mut self, v: Rank, idx: u32, d: Distance) -> bool {
        let slot = &mut self.slab.row_mut(v)[idx as usize];
        if d < *slot {
            *slot = d;
            true
        } else {
            false
        }
    }

    pub fn touched(&self) -> &[Rank] {
        &self.slab.touched
    }

    pub fn clear(&mut self) -> usize {
        self.slab.clear()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_are_per_vertex_and_cleared_by_touch() {
        let mut c = CandidateBitSet::new(10, 130);
        assert!(!c.test(3, 129));
        assert!(c.set(3, 129));
        assert!(!c.set(3, 129));
        assert!(c.test(3, 129));
        assert!(!c.test(4, 129));
        assert!(c.set(7, 0));
        assert_eq!(c.touched(), &[3, 7]);
        assert_eq!(c.clear(), 2);
        assert!(!c.test(3, 129) && !c.test(7, 0));
        assert!(c.touched().is_empty());
    }

    #[test]
    fn slots_only_improve() {
        let mut t = CandidateDistTable::new(5, 4);
        assert_eq!(t.get(2, 1), INF);
        assert!(t.improve(2, 1, 9));
        assert!(!t.improve(2, 1, 9));
        assert!(!t.improve(2, 1, 12));
        assert!(t.improve(2, 1, 3));
        assert_eq!(t.get(2, 1), 3);
        assert_eq!(t.get(2, 0), INF);
        assert_eq!(t.clear(), 1);
        assert_eq!(t.get(2, 1), INF);
    }
}
