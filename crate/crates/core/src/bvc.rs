//! Batched vertex-centric labeling.
//!
//! Hubs are processed in rank-ordered batches. Within a batch all hubs
//! propagate together on the BSP engine; a per-vertex candidate filter lets
//! each hub reach each vertex at most once (unweighted) or only with
//! improving distances (weighted), and the labels of the batch hubs sit in
//! hash indices for O(1) witness lookups. Accepted entries become visible at
//! the commit step that ends each iteration.

use std::ops::{AddAssign, Range};
use std::time::Instant;

use rustc_hash::FxHashMap;

use crate::candidates::{CandidateBitSet, CandidateDistTable};
use crate::check::{batch_distance_check, scan_slice, CheckTally};
use crate::engine::{ActiveSet, BspSchedule, CallbackError, Engine, Envelope, Outbox, VertexProgram};
use crate::labels::{HubEntry, LabelStore};
use crate::metrics::{ArrivalGroup, CounterReport, Detail};
use crate::{AlgoError, Distance, Graph, Rank, Side, MAX_DISTANCE};

pub const DEFAULT_BATCH_UNWEIGHTED: usize = 1024;
pub const DEFAULT_BATCH_WEIGHTED: usize = 512;

#[derive(Debug, Clone, Copy)]
pub struct BvcOptions {
    pub batch_size: usize,
    pub threads: usize,
    pub chunk_size: usize,
    /// Collect per-vertex breakdowns, arrival groups and checked pairs.
    pub detail: bool,
}

impl BvcOptions {
    pub fn new(batch_size: usize, threads: usize) -> Self {
        BvcOptions {
            batch_size,
            threads,
            ..Default::default()
        }
    }

    pub fn with_detail(mut self) -> Self {
        self.detail = true;
        self
    }
}

impl Default for BvcOptions {
    fn default() -> Self {
        BvcOptions {
            batch_size: DEFAULT_BATCH_UNWEIGHTED,
            threads: 1,
            chunk_size: BspSchedule::default().chunk_size(),
            detail: false,
        }
    }
}

/// Consecutive rank ranges of `batch_size` vertices (the last may be short).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchPlan {
    n: usize,
    batch_size: usize,
}

impl BatchPlan {
    pub fn new(n: usize, batch_size: usize) -> Result<Self, AlgoError> {
        if batch_size == 0 {
            return Err(AlgoError::ZeroBatchSize);
        }
        Ok(BatchPlan { n, batch_size })
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn len(&self) -> usize {
        self.n.div_ceil(self.batch_size)
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn batch_of(&self, r: Rank) -> usize {
        r as usize / self.batch_size
    }

    pub fn batches(&self) -> impl Iterator<Item = Range<Rank>> + '_ {
        (0..self.n)
            .step_by(self.batch_size)
            .map(|b| b as Rank..(b + self.batch_size).min(self.n) as Rank)
    }
}

/// Hash indices over the labels of the current batch's hubs, one per label
/// side.
#[derive(Debug, Clone)]
pub struct BatchHubIndex {
    base: Rank,
    maps: Vec<Vec<FxHashMap<Rank, Distance>>>,
}

impl BatchHubIndex {
    /// Mirrors every side of `L(u)` for `u` in `batch`. Returns the index and
    /// the number of entries loaded.
    pub fn build(store: &LabelStore, batch: Range<Rank>) -> (Self, usize) {
        let mut loaded = 0;
        let maps = (0..store.side_count())
            .map(|s| {
                let side = side_at(s);
                batch
                    .clone()
                    .map(|u| {
                        let l = store.side_labels(side, u);
                        loaded += l.len();
                        l.iter().map(|e| (e.hub, e.dist)).collect()
                    })
                    .collect()
            })
            .collect();
        (BatchHubIndex { base: batch.start, maps }, loaded)
    }

    #[inline]
    pub fn get(&self, side: Side, hub: Rank) -> &FxHashMap<Rank, Distance> {
        &self.maps[side.index()][(hub - self.base) as usize]
    }

    fn covers(&self, v: Rank) -> bool {
        v >= self.base && ((v - self.base) as usize) < self.maps[0].len()
    }

    fn insert(&mut self, side: Side, v: Rank, entries: &[HubEntry]) {
        let map = &mut self.maps[side.index()][(v - self.base) as usize];
        for e in entries {
            map.insert(e.hub, e.dist);
        }
    }
}

fn side_at(s: usize) -> Side {
    if s == 0 {
        Side::Out
    } else {
        Side::In
    }
}

/// Side whose labels a check for an entry headed into `side` looks up.
fn witness_side(directed: bool, side: Side) -> Side {
    if directed {
        side.opposite()
    } else {
        Side::Out
    }
}

/// Removes every entry `(u, d)` with `u` in `batch` from `L(v)` when a
/// higher-ranked hub `h` in `L(v)` gives `H(u)[h] + d(h, v) <= d`. All
/// decisions are taken against the labels as they stand on entry.
pub fn recheck_batch(store: &mut LabelStore, index: &BatchHubIndex, batch: Range<Rank>) -> usize {
    let directed = store.is_directed();
    let n = store.vertex_count() as Rank;
    let mut doomed: Vec<(Side, Rank, Rank)> = Vec::new();
    for s in 0..store.side_count() {
        let side = side_at(s);
        let wside = witness_side(directed, side);
        for v in batch.start + 1..n {
            let lv = store.side_labels(side, v);
            let lo = lv.partition_point(|e| e.hub < batch.start);
            let hi = lv.partition_point(|e| e.hub < batch.end);
            for (k, e) in lv.iter().enumerate().take(hi).skip(lo) {
                if e.hub == v {
                    continue;
                }
                let hu = index.get(wside, e.hub);
                let covered = lv[..k]
                    .iter()
                    .any(|h| hu.get(&h.hub).is_some_and(|&du| du.saturating_add(h.dist) <= e.dist));
                if covered {
                    doomed.push((side, v, e.hub));
                }
            }
        }
    }
    for &(side, v, hub) in &doomed {
        let list = store.list_mut(side, v);
        if let Ok(pos) = list.binary_search_by_key(&hub, |e| e.hub) {
            list.remove(pos);
        }
    }
    doomed.len()
}

#[derive(Debug, Clone, Copy)]
struct Msg {
    idx: u32,
    side: Side,
    dist: Distance,
}

#[derive(Default)]
struct Tally {
    checks: CheckTally,
    messages: u64,
    edges: u64,
}

impl AddAssign for Tally {
    fn add_assign(&mut self, o: Self) {
        self.checks += o.checks;
        self.messages += o.messages;
        self.edges += o.edges;
    }
}

struct CheckRecord {
    side: Side,
    hub: Rank,
    accepted: bool,
    scanned: u32,
    /// Scanned entries whose hub belongs to the current batch.
    in_batch: u32,
}

#[derive(Default)]
struct Update {
    /// `(side, idx, dist)` for every surviving message.
    marks: Vec<(Side, u32, Distance)>,
    /// Accepted entries grouped by side, each group sorted by hub.
    accepted: Vec<(Side, HubEntry)>,
    checks: Vec<CheckRecord>,
}

struct BvcProgram<'g> {
    g: &'g Graph,
    directed: bool,
    weighted: bool,
    sides: Vec<Side>,
    store: LabelStore,
    delta: Vec<Vec<Vec<HubEntry>>>,
    bits: Vec<CandidateBitSet>,
    slots: Vec<CandidateDistTable>,
    index: BatchHubIndex,
    base: Rank,
    batch_no: u32,
    report: CounterReport,
    detail: Option<Detail>,
    groups: FxHashMap<(Side, Rank), (Vec<u32>, u64)>,
}

impl BvcProgram<'_> {
    #[inline]
    fn already_delivered(&self, side: Side, v: Rank, idx: u32, d: Distance) -> bool {
        if self.weighted {
            d >= self.slots[side.index()].get(v, idx)
        } else {
            self.bits[side.index()].test(v, idx)
        }
    }

    fn flush_groups(&mut self) {
        if let Some(det) = self.detail.as_mut() {
            for ((side, vertex), (sizes, scan)) in self.groups.drain() {
                det.arrival_groups.push(ArrivalGroup {
                    batch: self.batch_no,
                    side,
                    vertex,
                    sizes,
                    in_batch_positive_scan: scan,
                });
            }
        }
    }
}

impl VertexProgram for BvcProgram<'_> {
    type Message = Msg;
    type Update = Update;
    type Tally = Tally;

    fn scatter(&self, a: Rank, out: &mut Outbox<Msg>, _: &mut Tally) -> Result<(), CallbackError> {
        for &side in &self.sides {
            let delta = &self.delta[side.index()][a as usize];
            let Some(lowest) = delta.first().map(|e| e.hub) else {
                continue;
            };
            let csr = self.g.propagation(side);
            let start = csr.neighbors(a).partition_point(|&x| x <= lowest);
            for (v, w) in csr.edges(a).skip(start) {
                for e in delta.iter().take_while(|e| e.hub < v) {
                    let d = e
                        .dist
                        .checked_add(w)
                        .filter(|&d| d <= MAX_DISTANCE)
                        .ok_or(AlgoError::DistanceOverflow(v))?;
                    let idx = e.hub - self.base;
                    if !self.already_delivered(side, v, idx, d) {
                        out.send(v, Msg { idx, side, dist: d });
                    }
                }
            }
        }
        Ok(())
    }

    fn gather(&self, v: Rank, inbox: &[Envelope<Msg>], t: &mut Tally) -> Result<Option<Update>, CallbackError> {
        // Inbox is in source-rank order; a stable sort keeps the lowest
        // source first among equal (side, hub, dist).
        let mut msgs: Vec<(Side, u32, Distance, Rank)> =
            inbox.iter().map(|e| (e.msg.side, e.msg.idx, e.msg.dist, e.src)).collect();
        msgs.sort_by_key(|m| (m.0, m.1, m.2));
        msgs.dedup_by_key(|m| (m.0, m.1));
        msgs.retain(|m| !self.already_delivered(m.0, v, m.1, m.2));
        if msgs.is_empty() {
            return Ok(None);
        }
        t.messages += msgs.len() as u64;
        let mut sources: Vec<(Side, Rank)> = msgs.iter().map(|m| (m.0, m.3)).collect();
        sources.sort_unstable();
        sources.dedup();
        t.edges += sources.len() as u64;

        let mut up = Update::default();
        for &(side, idx, d, _) in &msgs {
            let hub = self.base + idx;
            let lv = scan_slice(self.store.side_labels(side, v), v);
            let index = self.index.get(witness_side(self.directed, side), hub);
            let outcome = batch_distance_check(lv, index, d);
            t.checks.record(outcome);
            up.marks.push((side, idx, d));
            if outcome.accepted {
                up.accepted.push((side, HubEntry::new(hub, d)));
            }
            if self.detail.is_some() {
                let before_batch = lv[..outcome.scanned].partition_point(|e| e.hub < self.base);
                up.checks.push(CheckRecord {
                    side,
                    hub,
                    accepted: outcome.accepted,
                    scanned: outcome.scanned as u32,
                    in_batch: (outcome.scanned - before_batch) as u32,
                });
            }
        }
        Ok(Some(up))
    }

    fn commit(
        &mut self,
        _iteration: usize,
        retired: &[Rank],
        updates: Vec<(Rank, Update)>,
        tally: Tally,
        next: &mut ActiveSet,
    ) -> Result<(), CallbackError> {
        for &a in retired {
            for &side in &self.sides {
                self.delta[side.index()][a as usize].clear();
            }
        }
        self.report.add_checks(&tally.checks);
        self.report.messages_sent += tally.messages;
        self.report.edge_accesses += tally.edges;

        for (v, up) in updates {
            for &(side, idx, d) in &up.marks {
                if self.weighted {
                    self.slots[side.index()].improve(v, idx, d);
                } else if !self.bits[side.index()].set(v, idx) {
                    return Err(format!("hub {} delivered twice to vertex {v}", self.base + idx).into());
                }
            }
            if let Some(det) = self.detail.as_mut() {
                for c in &up.checks {
                    det.checked_pairs.push((c.side, c.hub, v));
                    if c.accepted {
                        det.positive_scan_by_vertex[v as usize] += c.scanned as u64;
                        let g = self.groups.entry((c.side, v)).or_default();
                        g.1 += c.in_batch as u64;
                    } else {
                        det.negative_scan_by_hub[c.hub as usize] += c.scanned as u64;
                    }
                }
            }
            let mut rest = &up.accepted[..];
            while let Some(&(side, _)) = rest.first() {
                let k = rest.iter().take_while(|x| x.0 == side).count();
                let entries: Vec<HubEntry> = rest[..k].iter().map(|x| x.1).collect();
                rest = &rest[k..];
                if self.weighted {
                    self.store.upsert(side, v, &entries);
                } else {
                    self.store.append_delta(side, v, &entries)?;
                }
                if self.index.covers(v) {
                    self.index.insert(side, v, &entries);
                }
                if self.detail.is_some() {
                    self.groups.entry((side, v)).or_default().0.push(k as u32);
                }
                if k > 1 {
                    self.report.multi_entry_deltas += 1;
                }
                self.delta[side.index()][v as usize] = entries;
                next.insert(v);
            }
        }
        Ok(())
    }
}

/// Progress callback: invoked after each completed batch with its index,
/// rank range and the labels built so far.
pub type BatchObserver<'a> = dyn FnMut(usize, Range<Rank>, &LabelStore) + 'a;

fn run(
    g: &Graph,
    opts: BvcOptions,
    weighted: bool,
    algorithm: &str,
    mut observer: Option<&mut BatchObserver<'_>>,
) -> Result<(LabelStore, CounterReport), AlgoError> {
    if opts.threads == 0 {
        return Err(AlgoError::ZeroThreads);
    }
    let started = Instant::now();
    let n = g.vertex_count();
    let plan = BatchPlan::new(n, opts.batch_size)?;
    let schedule = BspSchedule::new(opts.threads)?.with_chunk_size(opts.chunk_size)?;
    let directed = g.is_directed();
    let sides = if directed { vec![Side::In, Side::Out] } else { vec![Side::Out] };
    let side_count = if directed { 2 } else { 1 };
    let width = opts.batch_size.min(n.max(1));
    let mut program = BvcProgram {
        g,
        directed,
        weighted,
        sides,
        store: LabelStore::new(n, directed, g.is_weighted()),
        delta: vec![vec![Vec::new(); n]; side_count],
        bits: if weighted {
            Vec::new()
        } else {
            (0..side_count).map(|_| CandidateBitSet::new(n, width)).collect()
        },
        slots: if weighted {
            (0..side_count).map(|_| CandidateDistTable::new(n, width)).collect()
        } else {
            Vec::new()
        },
        index: BatchHubIndex {
            base: 0,
            maps: Vec::new(),
        },
        base: 0,
        batch_no: 0,
        report: CounterReport::new(algorithm, g),
        detail: opts.detail.then(|| Detail::new(n)),
        groups: FxHashMap::default(),
    };
    let mut engine = Engine::new(n, schedule)?;
    let mut active = ActiveSet::new(n);

    for (bi, batch) in plan.batches().enumerate() {
        program.base = batch.start;
        program.batch_no = bi as u32;
        for u in batch.clone() {
            for s in 0..side_count {
                let side = side_at(s);
                program.store.list_mut(side, u).push(HubEntry::new(u, 0));
                program.delta[s][u as usize].push(HubEntry::new(u, 0));
            }
            active.insert(u);
        }
        let (index, loaded) = BatchHubIndex::build(&program.store, batch.clone());
        program.index = index;
        program.report.index_entries += loaded as u64;

        let stats = engine.run(&mut program, &mut active)?;
        let r = &mut program.report;
        r.iterations += stats.iterations as u64;
        r.batches += 1;
        r.phases.scatter += stats.scatter;
        r.phases.deliver += stats.deliver;
        r.phases.gather += stats.gather;
        r.phases.commit += stats.commit;

        if weighted {
            let t = Instant::now();
            let removed = recheck_batch(&mut program.store, &program.index, batch.clone());
            program.report.recheck_removed += removed as u64;
            program.report.phases.recheck += t.elapsed();
            for slots in &mut program.slots {
                slots.clear();
            }
        } else {
            for bits in &mut program.bits {
                bits.clear();
            }
        }
        program.flush_groups();
        program.index.maps.clear();
        if let Some(obs) = observer.as_mut() {
            obs(bi, batch, &program.store);
        }
    }

    let mut report = program.report;
    if let Some(mut d) = program.detail {
        d.finish();
        report.detail = Some(d);
    }
    report.phases.total = started.elapsed();
    Ok((program.store, report))
}

fn unsupported(algorithm: &'static str, what: &'static str) -> AlgoError {
    AlgoError::UnsupportedGraph { algorithm, what }
}

/// Canonical labels of an undirected, unweighted graph.
pub fn bvcpll(g: &Graph, opts: BvcOptions) -> Result<(LabelStore, CounterReport), AlgoError> {
    if g.is_directed() {
        return Err(unsupported("bvcpll", "directed"));
    }
    if g.is_weighted() {
        return Err(unsupported("bvcpll", "weighted"));
    }
    run(g, opts, false, "bvc-pll", None)
}

/// `L_in`/`L_out` labels of a directed graph. `L_in` entries spread along
/// outgoing edges, `L_out` entries along incoming ones. Weighted directed
/// graphs take the improving-distance path with recheck.
pub fn bvcpll_directed(g: &Graph, opts: BvcOptions) -> Result<(LabelStore, CounterReport), AlgoError> {
    if !g.is_directed() {
        return Err(unsupported("bvcpll_directed", "undirected"));
    }
    run(g, opts, g.is_weighted(), "bvc-pll-directed", None)
}

/// Weighted labels: messages travel only when they improve the best distance
/// a vertex has seen for that hub, and a recheck at the end of every batch
/// drops entries a higher-ranked batch hub covers. Unweighted graphs are
/// treated as unit-weight.
pub fn bvcpll_weighted(g: &Graph, opts: BvcOptions) -> Result<(LabelStore, CounterReport), AlgoError> {
    if g.is_directed() {
        return Err(unsupported("bvcpll_weighted", "directed"));
    }
    run(g, opts, true, "bvc-pll-weighted", None)
}

/// Dispatches on the graph kind and reports every finished batch to
/// `observer`.
pub fn bvcpll_observed(
    g: &Graph,
    opts: BvcOptions,
    observer: &mut BatchObserver<'_>,
) -> Result<(LabelStore, CounterReport), AlgoError> {
    let (weighted, name) = match (g.is_directed(), g.is_weighted()) {
        (true, w) => (w, "bvc-pll-directed"),
        (false, true) => (true, "bvc-pll-weighted"),
        (false, false) => (false, "bvc-pll"),
    };
    run(g, opts, weighted, name, Some(observer))
}

/// Dispatches on the graph kind.
pub fn bvc(g: &Graph, opts: BvcOptions) -> Result<(LabelStore, CounterReport), AlgoError> {
    match (g.is_directed(), g.is_weighted()) {
        (true, _) => bvcpll_directed(g, opts),
        (false, true) => bvcpll_weighted(g, opts),
        (false, false) => bvcpll(g, opts),
    }
}
