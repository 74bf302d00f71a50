//! Brute-force ground truth for small graphs: all-pairs distances and the
//! canonical labeling derived straight from them.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt;

use rayon::prelude::*;

use crate::graph::Csr;
use crate::labels::{HubEntry, LabelStore};
use crate::{Distance, Graph, Rank, Side, INF};

pub const MAX_VERTICES: usize = 20_000;
pub const MAX_EDGES: usize = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("oracle guard exceeded: {n} vertices / {m} edges (limits {MAX_VERTICES} / {MAX_EDGES})")]
    GuardExceeded { n: usize, m: usize },
    #[error("label store has {store} vertices but the graph has {graph}")]
    SizeMismatch { store: usize, graph: usize },
    #[error("label store and graph disagree on direction")]
    DirectionMismatch,
}

fn guard(g: &Graph) -> Result<(), OracleError> {
    let (n, m) = (g.vertex_count(), g.edge_count());
    if n > MAX_VERTICES || m > MAX_EDGES {
        return Err(OracleError::GuardExceeded { n, m });
    }
    Ok(())
}

/// Row-major `n × n` distance table; row `u` holds `d(u, ·)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<Distance>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, u: Rank, v: Rank) -> Distance {
        self.d[u as usize * self.n + v as usize]
    }

    pub fn row(&self, u: Rank) -> &[Distance] {
        &self.d[u as usize * self.n..(u as usize + 1) * self.n]
    }

    /// Largest finite distance.
    pub fn diameter(&self) -> Distance {
        self.d.iter().copied().filter(|&x| x != INF).max().unwrap_or(0)
    }
}

/// Single-source distances over `csr`: BFS when `weighted` is false,
/// Dijkstra otherwise.
pub fn sssp(csr: &Csr, src: Rank, weighted: bool) -> Vec<Distance> {
    let n = csr.vertex_count();
    let mut dist = vec![INF; n];
    dist[src as usize] = 0;
    if !weighted {
        let mut q = VecDeque::from([src]);
        while let Some(v) = q.pop_front() {
            let nd = dist[v as usize] + 1;
            for &t in csr.neighbors(v) {
                if dist[t as usize] == INF {
                    dist[t as usize] = nd;
                    q.push_back(t);
                }
            }
        }
        return dist;
    }
    let mut heap = BinaryHeap::from([Reverse((0, src))]);
    while let Some(Reverse((d, v))) = heap.pop() {
        if d > dist[v as usize] {
            continue;
        }
        for (t, w) in csr.edges(v) {
            let nd = d.saturating_add(w);
            if nd < dist[t as usize] {
                dist[t as usize] = nd;
                heap.push(Reverse((nd, t)));
            }
        }
    }
    dist
}

/// Every pairwise distance, following edge direction.
pub fn all_pairs(g: &Graph) -> Result<DistanceMatrix, OracleError> {
    guard(g)?;
    let n = g.vertex_count();
    let rows: Vec<Vec<Distance>> = (0..n as Rank)
        .into_par_iter()
        .map(|u| sssp(g.out(), u, g.is_weighted()))
        .collect();
    Ok(DistanceMatrix {
        n,
        d: rows.into_iter().flatten().collect(),
    })
}

/// For source `u`: the vertices whose every shortest path from `u` (along
/// `csr`) avoids anything ranked above `u`, with their distances.
fn canonical_targets(csr: &Csr, u: Rank, weighted: bool) -> Vec<(Rank, Distance)> {
    let dist = sssp(csr, u, weighted);
    let mut reached: Vec<Rank> = (0..dist.len() as Rank).filter(|&v| dist[v as usize] != INF).collect();
    reached.sort_unstable_by_key(|&v| dist[v as usize]);
    // best[v]: highest-priority (smallest) rank on any shortest u-v path.
    let mut best: Vec<Rank> = (0..dist.len() as Rank).collect();
    for &v in &reached {
        let (dv, bv) = (dist[v as usize], best[v as usize]);
        for (t, w) in csr.edges(v) {
            if dv.saturating_add(w) == dist[t as usize] && bv < best[t as usize] {
                best[t as usize] = bv;
            }
        }
    }
    reached
        .into_iter()
        .filter(|&v| best[v as usize] == u)
        .map(|v| (v, dist[v as usize]))
        .collect()
}

fn lists_from_sources(csr: &Csr, n: usize, weighted: bool) -> Vec<Vec<HubEntry>> {
    let per_source: Vec<Vec<(Rank, Distance)>> = (0..n as Rank)
        .into_par_iter()
        .map(|u| canonical_targets(csr, u, weighted))
        .collect();
    let mut lists = vec![Vec::new(); n];
    // Sources visited in rank order, so every list comes out sorted.
    for (u, targets) in per_source.into_iter().enumerate() {
        for (v, d) in targets {
            lists[v as usize].push(HubEntry::new(u as Rank, d));
        }
    }
    lists
}

/// The canonical hierarchical labeling for the graph's order: `u` is in
/// `L(v)` iff `u` outranks every other vertex on every shortest path
/// between them.
pub fn canonical_labels_bruteforce(g: &Graph) -> Result<LabelStore, OracleError> {
    guard(g)?;
    let n = g.vertex_count();
    let w = g.is_weighted();
    let store = if g.is_directed() {
        // Forward searches reach targets that the hub reaches: L_in.
        let inc = lists_from_sources(g.out(), n, w);
        let out = lists_from_sources(g.inc(), n, w);
        LabelStore::directed_from_lists(out, inc, w)
    } else {
        LabelStore::from_lists(lists_from_sources(g.out(), n, w), w)
    };
    Ok(store.expect("oracle labels satisfy the store invariants"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryFailure {
    pub u: Rank,
    pub v: Rank,
    pub expected: Distance,
    pub got: Distance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MismatchKind {
    Missing { expected: Distance },
    Extra { got: Distance },
    WrongDistance { expected: Distance, got: Distance },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMismatch {
    pub side: Side,
    pub vertex: Rank,
    pub hub: Rank,
    pub kind: MismatchKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub pairs_checked: u64,
    pub query_failures: Vec<QueryFailure>,
    pub label_mismatches: Vec<LabelMismatch>,
}

impl VerifyReport {
    pub fn queries_exact(&self) -> bool {
        self.query_failures.is_empty()
    }

    pub fn canonical(&self) -> bool {
        self.label_mismatches.is_empty()
    }

    pub fn passed(&self) -> bool {
        self.queries_exact() && self.canonical()
    }
}

fn show(d: Distance) -> String {
    if d == INF {
        "INF".into()
    } else {
        d.to_string()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SHOWN: usize = 20;
        writeln!(
            f,
            "query exactness: {} ({} pairs, {} failures)",
            if self.queries_exact() { "pass" } else { "FAIL" },
            self.pairs_checked,
            self.query_failures.len()
        )?;
        for q in self.query_failures.iter().take(SHOWN) {
            writeln!(f, "  pair ({}, {}): expected {}, got {}", q.u, q.v, show(q.expected), show(q.got))?;
        }
        writeln!(
            f,
            "canonical labels: {} ({} mismatches)",
            if self.canonical() { "pass" } else { "FAIL" },
            self.label_mismatches.len()
        )?;
        for m in self.label_mismatches.iter().take(SHOWN) {
            let what = match m.kind {
                MismatchKind::Missing { expected } => format!("missing (dist {expected})"),
                MismatchKind::Extra { got } => format!("redundant (dist {got})"),
                MismatchKind::WrongDistance { expected, got } => format!("dist {got}, expected {expected}"),
            };
            writeln!(f, "  vertex {} {:?} hub {}: {what}", m.vertex, m.side, m.hub)?;
        }
        Ok(())
    }
}

fn diff_lists(side: Side, vertex: Rank, want: &[HubEntry], got: &[HubEntry], out: &mut Vec<LabelMismatch>) {
    let (mut i, mut j) = (0, 0);
    let mut push = |hub, kind| out.push(LabelMismatch { side, vertex, hub, kind });
    while i < want.len() || j < got.len() {
        match (want.get(i), got.get(j)) {
            (Some(a), Some(b)) if a.hub == b.hub => {
                if a.dist != b.dist {
                    push(a.hub, MismatchKind::WrongDistance { expected: a.dist, got: b.dist });
                }
                i += 1;
                j += 1;
            }
            (Some(a), Some(b)) if a.hub < b.hub => {
                push(a.hub, MismatchKind::Missing { expected: a.dist });
                i += 1;
            }
            (Some(a), None) => {
                push(a.hub, MismatchKind::Missing { expected: a.dist });
                i += 1;
            }
            (_, Some(b)) => {
                push(b.hub, MismatchKind::Extra { got: b.dist });
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
}

/// Compares every pairwise query against the oracle distances, and the
/// labels themselves against the canonical labeling.
pub fn verify_store(store: &LabelStore, g: &Graph) -> Result<VerifyReport, OracleError> {
    guard(g)?;
    let n = g.vertex_count();
    if store.vertex_count() != n {
        return Err(OracleError::SizeMismatch {
            store: store.vertex_count(),
            graph: n,
        });
    }
    if store.is_directed() != g.is_directed() {
        return Err(OracleError::DirectionMismatch);
    }
    let dist = all_pairs(g)?;
    let mut query_failures: Vec<QueryFailure> = (0..n as Rank)
        .into_par_iter()
        .flat_map_iter(|u| {
            let row = dist.row(u);
            (0..n as Rank).filter_map(move |v| {
                let got = store.query(u, v).expect("ranks in range");
                (got != row[v as usize]).then_some(QueryFailure {
                    u,
                    v,
                    expected: row[v as usize],
                    got,
                })
            })
        })
        .collect();
    query_failures.sort_unstable_by_key(|q| (q.u, q.v));

    let canon = canonical_labels_bruteforce(g)?;
    let sides: &[Side] = if g.is_directed() { &[Side::Out, Side::In] } else { &[Side::Out] };
    let mut label_mismatches = Vec::new();
    for &side in sides {
        for v in 0..n as Rank {
            diff_lists(side, v, canon.side_labels(side, v), store.side_labels(side, v), &mut label_mismatches);
        }
    }
    Ok(VerifyReport {
        pairs_checked: (n * n) as u64,
        query_failures,
        label_mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::{RawGraph, VertexOrder};

    fn e(h: Rank, d: Distance) -> HubEntry {
        HubEntry::new(h, d)
    }

    fn ordered(raw: RawGraph, ids: &[u64]) -> Graph {
        build_graph(&raw, VertexOrder::from_ranked_ids(ids.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn p3_distances_and_labels() {
        let g = ordered(RawGraph::undirected(&[(1, 2), (2, 3)]), &[2, 1, 3]);
        let d = all_pairs(&g).unwrap();
        let r = |id| g.order().rank_of(id).unwrap();
        assert_eq!(d.get(r(1), r(3)), 2);
        let canon = canonical_labels_bruteforce(&g).unwrap();
        assert_eq!(canon.labels(0), &[e(0, 0)]);
        assert_eq!(canon.labels(1), &[e(0, 1), e(1, 0)]);
        assert_eq!(canon.labels(2), &[e(0, 1), e(2, 0)]);
        assert_eq!(canon.stats().total_entries, 5);
    }

    #[test]
    fn triangle_labels() {
        let g = ordered(RawGraph::undirected(&[(1, 2), (2, 3), (1, 3)]), &[1, 2, 3]);
        let canon = canonical_labels_bruteforce(&g).unwrap();
        assert_eq!(canon.labels(2), &[e(0, 1), e(1, 1), e(2, 0)]);
    }

    #[test]
    fn disconnected_pair_is_inf() {
        let g = ordered(RawGraph::undirected(&[]).with_vertices([4, 9]), &[4, 9]);
        let d = all_pairs(&g).unwrap();
        assert_eq!(d.get(0, 1), INF);
        assert_eq!(d.get(1, 1), 0);
        let canon = canonical_labels_bruteforce(&g).unwrap();
        assert_eq!(canon.labels(1), &[e(1, 0)]);
    }

    #[test]
    fn weighted_triangle_distance() {
        // u=1, v=2, w=3
        let g = ordered(RawGraph::weighted(&[(1, 2, 5), (1, 3, 1), (3, 2, 1)]), &[3, 1, 2]);
        let d = all_pairs(&g).unwrap();
        assert_eq!(d.get(1, 2), 2);
        let canon = canonical_labels_bruteforce(&g).unwrap();
        assert_eq!(canon.labels(2), &[e(0, 1), e(2, 0)]);
        assert_eq!(canon.labels(1), &[e(0, 1), e(1, 0)]);
    }

    #[test]
    fn verify_names_faults() {
        let g = ordered(RawGraph::undirected(&[(1, 2), (2, 3)]), &[2, 1, 3]);
        let canon = canonical_labels_bruteforce(&g).unwrap();
        assert!(verify_store(&canon, &g).unwrap().passed());

        let mut lists: Vec<Vec<HubEntry>> = (0..3).map(|v| canon.labels(v).to_vec()).collect();
        lists[1][0].dist = 2;
        let bad = LabelStore::from_lists(lists, false).unwrap();
        let rep = verify_store(&bad, &g).unwrap();
        assert!(rep.query_failures.iter().any(|q| (q.u, q.v) == (0, 1) && q.got == 2));
        assert!(rep.to_string().contains("pair (0, 1)"));

        let mut lists: Vec<Vec<HubEntry>> = (0..3).map(|v| canon.labels(v).to_vec()).collect();
        lists[2].insert(1, e(1, 2));
        let redundant = LabelStore::from_lists(lists, false).unwrap();
        let rep = verify_store(&redundant, &g).unwrap();
        assert!(rep.queries_exact());
        assert_eq!(
            rep.label_mismatches,
            vec![LabelMismatch {
                side: Side::Out,
                vertex: 2,
                hub: 1,
                kind: MismatchKind::Extra { got: 2 }
            }]
        );
    }

    #[test]
    fn directed_chain() {
        // a=1 b=2 c=3, order [b, a, c]
        let g = ordered(RawGraph::directed(&[(1, 2), (2, 3)]), &[2, 1, 3]);
        let d = all_pairs(&g).unwrap();
        assert_eq!(d.get(1, 2), 2);
        assert_eq!(d.get(2, 1), INF);
        let canon = canonical_labels_bruteforce(&g).unwrap();
        assert_eq!(canon.query(1, 2).unwrap(), 2);
        assert_eq!(canon.query(2, 1).unwrap(), INF);
        assert!(verify_store(&canon, &g).unwrap().passed());
    }
}
