//! Sequential pruned landmark labeling: one pruned BFS (or Dijkstra) per
//! vertex in rank order. The baseline every other construction is checked
//! against.
//!
//! Searches only ever step to vertices ranked below the current root; a
//! higher-ranked vertex already covers every path through itself.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::time::Instant;

use crate::check::{batch_distance_check, CheckTally, DenseIndex};
use crate::engine::ActiveSet;
use crate::graph::Csr;
use crate::labels::{HubEntry, LabelStore};
use crate::metrics::{CounterReport, Detail};
use crate::{AlgoError, Distance, Graph, Rank, Side, INF, MAX_DISTANCE};

#[derive(Debug, Clone, Copy, Default)]
pub struct PllOptions {
    /// Collect per-vertex / per-hub breakdowns and checked pairs.
    pub detail: bool,
}

struct Scratch {
    visited: ActiveSet,
    settled: ActiveSet,
    index: DenseIndex,
    tentative: Vec<Distance>,
    queue: VecDeque<(Rank, Distance)>,
    heap: BinaryHeap<Reverse<(Distance, Rank)>>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            visited: ActiveSet::new(n),
            settled: ActiveSet::new(n),
            index: DenseIndex::new(n),
            tentative: vec![INF; n],
            queue: VecDeque::new(),
            heap: BinaryHeap::new(),
        }
    }

    fn reset(&mut self) {
        for &v in self.visited.members() {
            self.tentative[v as usize] = INF;
        }
        self.visited.clear();
        self.settled.clear();
        self.index.clear();
        debug_assert!(self.visited.bitmap_is_clear() && self.index.is_clear());
        debug_assert!(self.tentative.iter().all(|&d| d == INF));
    }
}

struct Run<'g> {
    g: &'g Graph,
    store: LabelStore,
    report: CounterReport,
    tally: CheckTally,
    scratch: Scratch,
    detail: Option<Detail>,
}

impl<'g> Run<'g> {
    fn new(g: &'g Graph, algorithm: &str, opts: PllOptions) -> Self {
        let n = g.vertex_count();
        Run {
            g,
            store: LabelStore::new(n, g.is_directed(), g.is_weighted()),
            report: CounterReport::new(algorithm, g),
            tally: CheckTally::default(),
            scratch: Scratch::new(n),
            detail: opts.detail.then(|| Detail::new(n)),
        }
    }

    fn add_self(&mut self, u: Rank) {
        for s in 0..self.store.side_count() {
            let side = if s == 0 { Side::Out } else { Side::In };
            self.store.list_mut(side, u).push(HubEntry::new(u, 0));
        }
    }

    /// Labels from `u` along `csr` into `side`, pruning with `L_witness(u)`.
    fn search(&mut self, u: Rank, side: Side, witness: Side, weighted: bool) -> Result<(), AlgoError> {
        let g = self.g;
        let csr = g.propagation(side);
        self.report.index_entries += self.scratch.index.load(self.store.side_labels(witness, u)) as u64;
        if weighted {
            self.dijkstra(csr, u, side)?;
        } else {
            self.bfs(csr, u, side);
        }
        self.report.iterations += 1;
        self.scratch.reset();
        Ok(())
    }

    /// Runs the distance check for `(u, d)` at `v` and records it.
    fn check(&mut self, u: Rank, v: Rank, d: Distance, side: Side) -> bool {
        let lv = self.store.side_labels(side, v);
        let outcome = batch_distance_check(lv, &self.scratch.index, d);
        self.tally.record(outcome);
        if let Some(det) = self.detail.as_mut() {
            det.checked_pairs.push((side, u, v));
            if outcome.accepted {
                det.positive_scan_by_vertex[v as usize] += outcome.scanned as u64;
            } else {
                det.negative_scan_by_hub[u as usize] += outcome.scanned as u64;
            }
        }
        if outcome.accepted {
            self.store.list_mut(side, v).push(HubEntry::new(u, d));
        }
        outcome.accepted
    }

    fn bfs(&mut self, csr: &Csr, u: Rank, side: Side) {
        self.scratch.visited.insert(u);
        self.scratch.queue.push_back((u, 0));
        while let Some((v, d)) = self.scratch.queue.pop_front() {
            if v != u && !self.check(u, v, d, side) {
                continue;
            }
            let nbrs = csr.neighbors(v);
            let start = nbrs.partition_point(|&t| t <= u);
            for &t in &nbrs[start..] {
                if self.scratch.visited.insert(t) {
                    self.scratch.queue.push_back((t, d + 1));
                    self.report.messages_sent += 1;
                    self.report.edge_accesses += 1;
                }
            }
        }
    }

    fn dijkstra(&mut self, csr: &Csr, u: Rank, side: Side) -> Result<(), AlgoError> {
        self.scratch.visited.insert(u);
        self.scratch.tentative[u as usize] = 0;
        self.scratch.heap.push(Reverse((0, u)));
        while let Some(Reverse((d, v))) = self.scratch.heap.pop() {
            if d > self.scratch.tentative[v as usize] || !self.scratch.settled.insert(v) {
                continue;
            }
            if v != u && !self.check(u, v, d, side) {
                continue;
            }
            let nbrs = csr.neighbors(v);
            let start = nbrs.partition_point(|&t| t <= u);
            for (t, w) in csr.edges(v).skip(start) {
                let nd = d.checked_add(w).filter(|&x| x <= MAX_DISTANCE).ok_or(AlgoError::DistanceOverflow(t))?;
                if nd < self.scratch.tentative[t as usize] && !self.scratch.settled.contains(t) {
                    self.scratch.visited.insert(t);
                    self.scratch.tentative[t as usize] = nd;
                    self.scratch.heap.push(Reverse((nd, t)));
                    self.report.messages_sent += 1;
                    self.report.edge_accesses += 1;
                }
            }
        }
        Ok(())
    }

    fn finish(mut self, started: Instant) -> (LabelStore, CounterReport) {
        self.report.add_checks(&self.tally);
        if let Some(mut d) = self.detail.take() {
            d.finish();
            self.report.detail = Some(d);
        }
        self.report.phases.total = started.elapsed();
        (self.store, self.report)
    }
}

fn unsupported(algorithm: &'static str, what: &'static str) -> AlgoError {
    AlgoError::UnsupportedGraph { algorithm, what }
}

/// Canonical labels of an undirected, unweighted graph by pruned BFS.
pub fn pll_unweighted(g: &Graph) -> Result<(LabelStore, CounterReport), AlgoError> {
    pll_unweighted_with(g, PllOptions::default())
}

pub fn pll_unweighted_with(g: &Graph, opts: PllOptions) -> Result<(LabelStore, CounterReport), AlgoError> {
    if g.is_directed() {
        return Err(unsupported("pll_unweighted", "directed"));
    }
    if g.is_weighted() {
        return Err(unsupported("pll_unweighted", "weighted"));
    }
    let started = Instant::now();
    let mut run = Run::new(g, "pll", opts);
    for u in 0..g.vertex_count() as Rank {
        run.add_self(u);
        run.search(u, Side::Out, Side::Out, false)?;
    }
    Ok(run.finish(started))
}

/// Canonical labels of an undirected graph by pruned Dijkstra. Unweighted
/// graphs are treated as unit-weight.
pub fn pll_weighted(g: &Graph) -> Result<(LabelStore, CounterReport), AlgoError> {
    pll_weighted_with(g, PllOptions::default())
}

pub fn pll_weighted_with(g: &Graph, opts: PllOptions) -> Result<(LabelStore, CounterReport), AlgoError> {
    if g.is_directed() {
        return Err(unsupported("pll_weighted", "directed"));
    }
    let started = Instant::now();
    let mut run = Run::new(g, "pll-weighted", opts);
    for u in 0..g.vertex_count() as Rank {
        run.add_self(u);
        run.search(u, Side::Out, Side::Out, true)?;
    }
    Ok(run.finish(started))
}

/// `L_in`/`L_out` labels of a directed graph: per root a forward search
/// fills `L_in` of the vertices it reaches, then a backward search fills
/// `L_out` of the vertices reaching it. Weighted graphs use Dijkstra.
pub fn pll_directed(g: &Graph) -> Result<(LabelStore, CounterReport), AlgoError> {
    pll_directed_with(g, PllOptions::default())
}

pub fn pll_directed_with(g: &Graph, opts: PllOptions) -> Result<(LabelStore, CounterReport), AlgoError> {
    if !g.is_directed() {
        return Err(unsupported("pll_directed", "undirected"));
    }
    let started = Instant::now();
    let weighted = g.is_weighted();
    let mut run = Run::new(g, "pll-directed", opts);
    for u in 0..g.vertex_count() as Rank {
        run.add_self(u);
        run.search(u, Side::In, Side::Out, weighted)?;
        run.search(u, Side::Out, Side::In, weighted)?;
    }
    Ok(run.finish(started))
}

/// Dispatches on the graph kind.
pub fn pll(g: &Graph, opts: PllOptions) -> Result<(LabelStore, CounterReport), AlgoError> {
    match (g.is_directed(), g.is_weighted()) {
        (true, _) => pll_directed_with(g, opts),
        (false, true) => pll_weighted_with(g, opts),
        (false, false) => pll_unweighted_with(g, opts),
    }
}
