//! Unbatched vertex-centric labeling: every vertex starts as a hub at once
//! and label entries spread one hop per iteration.
//!
//! This is the slow reference formulation. It produces the same labels as
//! [`crate::pll`] but may check a pair more than once and pays
//! `|L(u)| + |L(v)|` per check.

use std::collections::BTreeMap;
use std::ops::AddAssign;
use std::time::Instant;

use crate::check::{scan_slice, CheckOutcome, CheckTally};
use crate::engine::{ActiveSet, BspSchedule, CallbackError, Engine, Envelope, Outbox, VertexProgram};
use crate::labels::{HubEntry, LabelStore};
use crate::metrics::{CounterReport, Detail};
use crate::{AlgoError, Distance, Graph, Rank, Side};

#[derive(Debug, Clone, Copy)]
pub struct VcOptions {
    pub threads: usize,
    /// Record arrival iterations of `(hub, vertex)` pairs.
    pub trace: bool,
    /// Keep only pairs with `(hub + vertex) % trace_stride == 0`.
    pub trace_stride: usize,
    pub detail: bool,
}

impl Default for VcOptions {
    fn default() -> Self {
        VcOptions {
            threads: 1,
            trace: false,
            trace_stride: 1,
            detail: false,
        }
    }
}

/// Iterations at which some message about `hub` reached `vertex`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArrivalTrace {
    pub arrivals: BTreeMap<(Rank, Rank), Vec<u32>>,
}

/// Scan of `lv` in rank order against `lu` by merge, stopping at the first
/// hub that covers `d`. Same outcome as an indexed scan.
fn merge_check(lu: &[HubEntry], lv: &[HubEntry], d: Distance) -> CheckOutcome {
    let mut i = 0;
    for (j, e) in lv.iter().enumerate() {
        while i < lu.len() && lu[i].hub < e.hub {
            i += 1;
        }
        if i < lu.len() && lu[i].hub == e.hub && lu[i].dist.saturating_add(e.dist) <= d {
            return CheckOutcome {
                accepted: false,
                scanned: j + 1,
            };
        }
    }
    CheckOutcome {
        accepted: true,
        scanned: lv.len(),
    }
}

#[derive(Default)]
struct Tally {
    checks: CheckTally,
    messages: u64,
    edges: u64,
    index_entries: u64,
}

impl AddAssign for Tally {
    fn add_assign(&mut self, o: Self) {
        self.checks += o.checks;
        self.messages += o.messages;
        self.edges += o.edges;
        self.index_entries += o.index_entries;
    }
}

struct Update {
    accepted: Vec<HubEntry>,
    arrived: Vec<Rank>,
    /// `(hub, accepted, scanned)` per check, when detail is on.
    checks: Vec<(Rank, bool, u32)>,
}

struct VcProgram<'g> {
    g: &'g Graph,
    store: LabelStore,
    delta: Vec<Vec<HubEntry>>,
    opts: VcOptions,
    report: CounterReport,
    trace: Option<ArrivalTrace>,
    detail: Option<Detail>,
}

impl VertexProgram for VcProgram<'_> {
    type Message = HubEntry;
    type Update = Update;
    type Tally = Tally;

    fn scatter(&self, a: Rank, out: &mut Outbox<HubEntry>, t: &mut Tally) -> Result<(), CallbackError> {
        let delta = &self.delta[a as usize];
        let lowest = match delta.first() {
            Some(e) => e.hub,
            None => return Ok(()),
        };
        let nbrs = self.g.out().neighbors(a);
        for &v in &nbrs[nbrs.partition_point(|&x| x <= lowest)..] {
            let lv = self.store.labels(v);
            let mut any = false;
            for e in delta.iter().take_while(|e| e.hub < v) {
                if lv.binary_search_by_key(&e.hub, |x| x.hub).is_err() {
                    out.send(v, HubEntry::new(e.hub, e.dist + 1));
                    t.messages += 1;
                    any = true;
                }
            }
            t.edges += any as u64;
        }
        Ok(())
    }

    fn gather(&self, v: Rank, inbox: &[Envelope<HubEntry>], t: &mut Tally) -> Result<Option<Update>, CallbackError> {
        let mut msgs: Vec<HubEntry> = inbox.iter().map(|e| e.msg).collect();
        msgs.sort_unstable();
        msgs.dedup();
        let lv = scan_slice(self.store.labels(v), v);
        let mut update = Update {
            accepted: Vec::new(),
            arrived: Vec::new(),
            checks: Vec::new(),
        };
        for m in &msgs {
            let lu = self.store.labels(m.hub);
            t.index_entries += lu.len() as u64;
            let outcome = merge_check(lu, lv, m.dist);
            t.checks.record(outcome);
            if self.detail.is_some() {
                update.checks.push((m.hub, outcome.accepted, outcome.scanned as u32));
            }
            if outcome.accepted {
                update.accepted.push(*m);
            }
        }
        if self.trace.is_some() {
            let stride = self.opts.trace_stride.max(1) as u64;
            update.arrived = msgs
                .iter()
                .map(|m| m.hub)
                .filter(|&u| (u as u64 + v as u64).is_multiple_of(stride))
                .collect();
            update.arrived.dedup();
        }
        let keep = !update.accepted.is_empty() || !update.arrived.is_empty() || !update.checks.is_empty();
        Ok(keep.then_some(update))
    }

    fn commit(
        &mut self,
        iteration: usize,
        retired: &[Rank],
        updates: Vec<(Rank, Update)>,
        tally: Tally,
        next: &mut ActiveSet,
    ) -> Result<(), CallbackError> {
        for &a in retired {
            self.delta[a as usize].clear();
        }
        self.report.add_checks(&tally.checks);
        self.report.messages_sent += tally.messages;
        self.report.edge_accesses += tally.edges;
        self.report.index_entries += tally.index_entries;
        for (v, up) in updates {
            if let Some(trace) = self.trace.as_mut() {
                for u in up.arrived {
                    trace.arrivals.entry((u, v)).or_default().push(iteration as u32);
                }
            }
            if let Some(det) = self.detail.as_mut() {
                for (u, accepted, scanned) in up.checks {
                    det.checked_pairs.push((Side::Out, u, v));
                    if accepted {
                        det.positive_scan_by_vertex[v as usize] += scanned as u64;
                    } else {
                        det.negative_scan_by_hub[u as usize] += scanned as u64;
                    }
                }
            }
            if up.accepted.is_empty() {
                continue;
            }
            self.store.append_delta(Side::Out, v, &up.accepted)?;
            if up.accepted.len() > 1 {
                self.report.multi_entry_deltas += 1;
            }
            self.delta[v as usize] = up.accepted;
            next.insert(v);
        }
        Ok(())
    }
}

/// Canonical labels of an undirected, unweighted graph with every vertex
/// propagating simultaneously.
pub fn vcpll(g: &Graph, opts: VcOptions) -> Result<(LabelStore, CounterReport, Option<ArrivalTrace>), AlgoError> {
    if g.is_directed() {
        return Err(AlgoError::UnsupportedGraph {
            algorithm: "vcpll",
            what: "directed",
        });
    }
    if g.is_weighted() {
        return Err(AlgoError::UnsupportedGraph {
            algorithm: "vcpll",
            what: "weighted",
        });
    }
    if opts.threads == 0 {
        return Err(AlgoError::ZeroThreads);
    }
    let started = Instant::now();
    let n = g.vertex_count();
    let mut store = LabelStore::new(n, false, false);
    let mut active = ActiveSet::new(n);
    let mut delta = vec![Vec::new(); n];
    for v in 0..n as Rank {
        store.list_mut(Side::Out, v).push(HubEntry::new(v, 0));
        delta[v as usize].push(HubEntry::new(v, 0));
        active.insert(v);
    }
    let mut program = VcProgram {
        g,
        store,
        delta,
        opts,
        report: CounterReport::new("vc-pll", g),
        trace: opts.trace.then(ArrivalTrace::default),
        detail: opts.detail.then(|| Detail::new(n)),
    };
    let mut engine = Engine::new(n, BspSchedule::new(opts.threads)?)?;
    let stats = engine.run(&mut program, &mut active)?;

    let mut report = program.report;
    report.iterations = stats.iterations as u64;
    report.phases.scatter = stats.scatter;
    report.phases.deliver = stats.deliver;
    report.phases.gather = stats.gather;
    report.phases.commit = stats.commit;
    report.phases.total = started.elapsed();
    if let Some(mut d) = program.detail {
        d.finish();
        report.detail = Some(d);
    }
    Ok((program.store, report, program.trace))
}
