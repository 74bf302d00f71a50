//! Hub label storage, merge-join distance queries and the `HLB1` binary
//! label file.

use std::io::{Read, Write};

use crate::{Distance, Rank, Side, INF};

/// One `(hub, distance)` pair of a vertex label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HubEntry {
    pub hub: Rank,
    pub dist: Distance,
}

impl HubEntry {
    pub const fn new(hub: Rank, dist: Distance) -> Self {
        HubEntry { hub, dist }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LabelError {
    #[error("rank {rank} out of range for {n} vertices")]
    RankOutOfRange { rank: Rank, n: usize },
    #[error("vertex {vertex} already holds hub {hub}")]
    DuplicateHub { vertex: Rank, hub: Rank },
    #[error("bad magic bytes {0:?}, expected \"HLB1\"")]
    BadMagic([u8; 4]),
    #[error("label file version {0} is not supported (expected 1)")]
    VersionMismatch(u8),
    #[error("unknown flag bits {0:#04x}")]
    UnknownFlags(u8),
    #[error("label file truncated")]
    Truncated,
    #[error("vertex {vertex}: {reason}")]
    Invalid { vertex: Rank, reason: String },
    #[error("directed label store expected")]
    NotDirected,
    #[error(transparent)]
    Io(std::io::Error),
}

impl From<std::io::Error> for LabelError {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            LabelError::Truncated
        } else {
            LabelError::Io(e)
        }
    }
}

/// Per-vertex hub lists sorted strictly ascending by hub rank.
///
/// Undirected stores hold one list per vertex; directed stores hold `L_out`
/// and `L_in`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelStore {
    weighted: bool,
    sides: Vec<Vec<Vec<HubEntry>>>,
}

pub const MAGIC: &[u8; 4] = b"HLB1";
const FLAG_DIRECTED: u8 = 0b01;
const FLAG_WEIGHTED: u8 = 0b10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelStats {
    pub n: usize,
    pub total_entries: usize,
    /// Zero for an empty store.
    pub mean: f64,
    pub max: usize,
}

impl LabelStore {
    pub fn new(n: usize, directed: bool, weighted: bool) -> Self {
        let sides = if directed { 2 } else { 1 };
        LabelStore {
            weighted,
            sides: (0..sides).map(|_| vec![Vec::new(); n]).collect(),
        }
    }

    /// Undirected store from explicit lists (sorted on the way in).
    pub fn from_lists(lists: Vec<Vec<HubEntry>>, weighted: bool) -> Result<Self, LabelError> {
        let mut store = LabelStore {
            weighted,
            sides: vec![lists],
        };
        store.sort_all();
        store.validate()?;
        Ok(store)
    }

    pub fn directed_from_lists(
        out: Vec<Vec<HubEntry>>,
        inc: Vec<Vec<HubEntry>>,
        weighted: bool,
    ) -> Result<Self, LabelError> {
        let mut store = LabelStore {
            weighted,
            sides: vec![out, inc],
        };
        store.sort_all();
        store.validate()?;
        Ok(store)
    }

    fn sort_all(&mut self) {
        for side in &mut self.sides {
            for list in side.iter_mut() {
                list.sort_unstable();
            }
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.sides[0].len()
    }

    pub fn is_directed(&self) -> bool {
        self.sides.len() == 2
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn side_count(&self) -> usize {
        self.sides.len()
    }

    /// `L(v)` of an undirected store, or `L_out(v)` of a directed one.
    pub fn labels(&self, v: Rank) -> &[HubEntry] {
        &self.sides[0][v as usize]
    }

    pub fn side_labels(&self, side: Side, v: Rank) -> &[HubEntry] {
        &self.sides[side.index()][v as usize]
    }

    pub fn side(&self, side: Side) -> &[Vec<HubEntry>] {
        &self.sides[side.index()]
    }

    pub(crate) fn list_mut(&mut self, side: Side, v: Rank) -> &mut Vec<HubEntry> {
        &mut self.sides[side.index()][v as usize]
    }

    fn check_rank(&self, r: Rank) -> Result<(), LabelError> {
        if (r as usize) < self.vertex_count() {
            Ok(())
        } else {
            Err(LabelError::RankOutOfRange {
                rank: r,
                n: self.vertex_count(),
            })
        }
    }

    /// `min over common hubs h of d(u,h) + d(h,v)`; [`INF`] without a common
    /// hub. Directed stores read `L_out(u)` and `L_in(v)`.
    pub fn query(&self, u: Rank, v: Rank) -> Result<Distance, LabelError> {
        self.query_counted(u, v).map(|(d, _)| d)
    }

    /// Like [`LabelStore::query`], also returning how many entries the merge
    /// visited (at most `|L(u)| + |L(v)|`).
    pub fn query_counted(&self, u: Rank, v: Rank) -> Result<(Distance, usize), LabelError> {
        self.check_rank(u)?;
        self.check_rank(v)?;
        let (lu, lv) = if self.is_directed() {
            (self.side_labels(Side::Out, u), self.side_labels(Side::In, v))
        } else {
            (self.labels(u), self.labels(v))
        };
        Ok(merge_min(lu, lv))
    }

    /// Inserts a batch of entries into `L(v)` keeping rank order. Fails on a
    /// hub `L(v)` already holds (or that `delta` repeats), leaving `L(v)`
    /// untouched.
    pub fn append_delta(&mut self, side: Side, v: Rank, delta: &[HubEntry]) -> Result<(), LabelError> {
        self.check_rank(v)?;
        let mut delta = delta.to_vec();
        delta.sort_unstable();
        for w in delta.windows(2) {
            if w[0].hub == w[1].hub {
                return Err(LabelError::DuplicateHub {
                    vertex: v,
                    hub: w[0].hub,
                });
            }
        }
        let list = self.list_mut(side, v);
        match (list.last(), delta.first()) {
            (_, None) => return Ok(()),
            (None, _) => {
                list.extend(delta);
                return Ok(());
            }
            (Some(last), Some(first)) if last.hub < first.hub => {
                list.extend(delta);
                return Ok(());
            }
            _ => {}
        }
        let mut merged = Vec::with_capacity(list.len() + delta.len());
        let (mut i, mut j) = (0, 0);
        while i < list.len() || j < delta.len() {
            let take_old = match (list.get(i), delta.get(j)) {
                (Some(a), Some(b)) if a.hub == b.hub => {
                    return Err(LabelError::DuplicateHub { vertex: v, hub: a.hub })
                }
                (Some(a), Some(b)) => a.hub < b.hub,
                (Some(_), None) => true,
                (None, _) => false,
            };
            if take_old {
                merged.push(list[i]);
                i += 1;
            } else {
                merged.push(delta[j]);
                j += 1;
            }
        }
        *list = merged;
        Ok(())
    }

    /// Sets `dist` for hubs already present and inserts the rest. `entries`
    /// must be sorted by hub and duplicate-free.
    pub(crate) fn upsert(&mut self, side: Side, v: Rank, entries: &[HubEntry]) {
        let list = self.list_mut(side, v);
        let mut fresh = Vec::new();
        for e in entries {
            match list.binary_search_by_key(&e.hub, |x| x.hub) {
                Ok(pos) => list[pos].dist = e.dist,
                Err(_) => fresh.push(*e),
            }
        }
        if !fresh.is_empty() {
            list.extend(fresh);
            list.sort_unstable_by_key(|e| e.hub);
        }
    }

    /// Checks every store invariant: rank-sorted, duplicate-free lists,
    /// finite distances, hubs never below their owner, self-entries present.
    pub fn validate(&self) -> Result<(), LabelError> {
        let n = self.vertex_count();
        for side in &self.sides {
            if side.len() != n {
                return Err(LabelError::Invalid {
                    vertex: 0,
                    reason: "label sides disagree on vertex count".into(),
                });
            }
            for (v, list) in side.iter().enumerate() {
                let v = v as Rank;
                let bad = |reason: String| Err(LabelError::Invalid { vertex: v, reason });
                if !list.windows(2).all(|w| w[0].hub < w[1].hub) {
                    return bad("hubs not strictly ascending".into());
                }
                for e in list {
                    if e.dist == INF {
                        return bad(format!("hub {} has infinite distance", e.hub));
                    }
                    if e.hub > v {
                        return bad(format!("hub {} ranks below its owner", e.hub));
                    }
                    if e.hub == v && e.dist != 0 {
                        return bad(format!("self-entry with distance {}", e.dist));
                    }
                    if e.hub != v && e.dist == 0 {
                        return bad(format!("hub {} at distance 0", e.hub));
                    }
                }
                if list.last().map(|e| e.hub) != Some(v) {
                    return bad("missing self-entry".into());
                }
            }
        }
        Ok(())
    }

    pub fn stats(&self) -> LabelStats {
        let n = self.vertex_count();
        let mut total = 0;
        let mut max = 0;
        for v in 0..n {
            let size: usize = self.sides.iter().map(|s| s[v].len()).sum();
            total += size;
            max = max.max(size);
        }
        LabelStats {
            n,
            total_entries: total,
            mean: if n == 0 { 0.0 } else { total as f64 / n as f64 },
            max,
        }
    }

    pub fn total_entries(&self) -> usize {
        self.sides.iter().flatten().map(Vec::len).sum()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), LabelError> {
        w.write_all(MAGIC)?;
        let mut flags = 0;
        if self.is_directed() {
            flags |= FLAG_DIRECTED;
        }
        if self.weighted {
            flags |= FLAG_WEIGHTED;
        }
        w.write_all(&[flags])?;
        w.write_all(&(self.vertex_count() as u64).to_le_bytes())?;
        let mut buf = Vec::new();
        for v in 0..self.vertex_count() {
            for side in &self.sides {
                let list = &side[v];
                buf.clear();
                buf.extend_from_slice(&(list.len() as u32).to_le_bytes());
                for e in list {
                    buf.extend_from_slice(&e.hub.to_le_bytes());
                    buf.extend_from_slice(&e.dist.to_le_bytes());
                }
                w.write_all(&buf)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, LabelError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic[..3] == b"HLB" && magic[3] != b'1' {
            return Err(LabelError::VersionMismatch(magic[3].wrapping_sub(b'0')));
        }
        if &magic != MAGIC {
            return Err(LabelError::BadMagic(magic));
        }
        let flags = read_u8(&mut r)?;
        if flags & !(FLAG_DIRECTED | FLAG_WEIGHTED) != 0 {
            return Err(LabelError::UnknownFlags(flags));
        }
        let n = read_u64(&mut r)?;
        if n > Rank::MAX as u64 {
            return Err(LabelError::Invalid {
                vertex: 0,
                reason: format!("vertex count {n} exceeds the rank range"),
            });
        }
        let n = n as usize;
        let mut store = LabelStore::new(0, flags & FLAG_DIRECTED != 0, flags & FLAG_WEIGHTED != 0);
        for side in &mut store.sides {
            side.reserve(n.min(1 << 20));
        }
        for _ in 0..n {
            for side in &mut store.sides {
                let len = read_u32(&mut r)? as usize;
                let mut list = Vec::with_capacity(len.min(1 << 16));
                for _ in 0..len {
                    let hub = read_u32(&mut r)?;
                    let dist = read_u32(&mut r)?;
                    list.push(HubEntry { hub, dist });
                }
                side.push(list);
            }
        }
        store.validate()?;
        Ok(store)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, LabelError> {
        Self::read_from(bytes)
    }
}

/// Single merge-join pass over two rank-sorted lists.
pub fn merge_min(a: &[HubEntry], b: &[HubEntry]) -> (Distance, usize) {
    let (mut i, mut j) = (0, 0);
    let mut best = INF;
    while i < a.len() && j < b.len() {
        let (x, y) = (a[i], b[j]);
        match x.hub.cmp(&y.hub) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                best = best.min(x.dist.saturating_add(y.dist));
                i += 1;
                j += 1;
            }
        }
    }
    (best, i + j)
}

fn read_u8<R: Read>(r: &mut R) -> Result<u8, LabelError> {
    let mut b = [0u8; 1];
    r.read_exact(&mut b)?;
    Ok(b[0])
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, LabelError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, LabelError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}
