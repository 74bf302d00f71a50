//! Edge-list ingestion, degree ordering and the immutable rank-indexed
//! adjacency structure shared by every labeling algorithm.

use std::collections::HashMap;
use std::io::BufRead;

use crate::{Distance, Rank, Side};

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: negative vertex id `{token}`")]
    NegativeId { line: usize, token: String },
    #[error("line {line}: weight must be an integer >= 1, got `{token}`")]
    BadWeight { line: usize, token: String },
    #[error("line {line}: unexpected weight token `{token}` in an unweighted edge list")]
    UnexpectedWeight { line: usize, token: String },
    #[error("line {line}: missing weight token in a weighted edge list")]
    MissingWeight { line: usize },
    #[error("vertex id {0} is not covered by the vertex order")]
    IdNotInOrder(u64),
    #[error("vertex id {0} appears twice in the vertex order")]
    DuplicateId(u64),
    #[error("{0} vertices exceed the rank range")]
    TooManyVertices(usize),
    #[error("weighted edge list given weight {0}; weights must be >= 1")]
    ZeroWeight(Distance),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RawEdge {
    pub src: u64,
    pub dst: u64,
    /// Always 1 in unweighted graphs.
    pub weight: Distance,
}

/// Edges exactly as read, over original (possibly sparse) vertex ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawGraph {
    pub directed: bool,
    pub weighted: bool,
    pub edges: Vec<RawEdge>,
    /// Sorted, deduplicated ids seen in the input.
    pub vertices: Vec<u64>,
}

impl RawGraph {
    pub fn new(directed: bool, weighted: bool, edges: Vec<RawEdge>) -> Self {
        let mut vertices: Vec<u64> = edges.iter().flat_map(|e| [e.src, e.dst]).collect();
        vertices.sort_unstable();
        vertices.dedup();
        RawGraph {
            directed,
            weighted,
            edges,
            vertices,
        }
    }

    pub fn undirected(pairs: &[(u64, u64)]) -> Self {
        Self::new(false, false, unit_edges(pairs))
    }

    pub fn directed(pairs: &[(u64, u64)]) -> Self {
        Self::new(true, false, unit_edges(pairs))
    }

    pub fn weighted(triples: &[(u64, u64, Distance)]) -> Self {
        let edges = triples
            .iter()
            .map(|&(src, dst, weight)| RawEdge { src, dst, weight })
            .collect();
        Self::new(false, true, edges)
    }

    /// Adds ids that carry no edges (isolated vertices).
    pub fn with_vertices(mut self, ids: impl IntoIterator<Item = u64>) -> Self {
        self.vertices.extend(ids);
        self.vertices.sort_unstable();
        self.vertices.dedup();
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }
}

fn unit_edges(pairs: &[(u64, u64)]) -> Vec<RawEdge> {
    pairs
        .iter()
        .map(|&(src, dst)| RawEdge {
            src,
            dst,
            weight: 1,
        })
        .collect()
}

/// Reads a whitespace-separated edge list: `u v` or `u v w` per line, `#`
/// comments and blank lines ignored. Duplicates are kept for
/// [`build_graph`] to clean.
pub fn parse_edge_list<R: BufRead>(
    reader: R,
    directed: bool,
    weighted: bool,
) -> Result<RawGraph, GraphError> {
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() < 2 {
            return Err(GraphError::Malformed {
                line: lineno,
                reason: format!("expected `u v`{}", if weighted { " w" } else { "" }),
            });
        }
        if tokens.len() > 3 {
            return Err(GraphError::Malformed {
                line: lineno,
                reason: format!("expected at most 3 tokens, got {}", tokens.len()),
            });
        }
        let src = parse_id(tokens[0], lineno)?;
        let dst = parse_id(tokens[1], lineno)?;
        let weight = match (tokens.get(2), weighted) {
            (Some(tok), false) => {
                return Err(GraphError::UnexpectedWeight {
                    line: lineno,
                    token: (*tok).to_string(),
                })
            }
            (None, true) => return Err(GraphError::MissingWeight { line: lineno }),
            (None, false) => 1,
            (Some(tok), true) => match tok.parse::<Distance>() {
                Ok(w) if w >= 1 => w,
                _ => {
                    return Err(GraphError::BadWeight {
                        line: lineno,
                        token: (*tok).to_string(),
                    })
                }
            },
        };
        edges.push(RawEdge { src, dst, weight });
    }
    Ok(RawGraph::new(directed, weighted, edges))
}

pub fn parse_edge_str(text: &str, directed: bool, weighted: bool) -> Result<RawGraph, GraphError> {
    parse_edge_list(text.as_bytes(), directed, weighted)
}

fn parse_id(token: &str, line: usize) -> Result<u64, GraphError> {
    if token.starts_with('-') {
        return Err(GraphError::NegativeId {
            line,
            token: token.to_string(),
        });
    }
    token.parse::<u64>().map_err(|_| GraphError::Malformed {
        line,
        reason: format!("`{token}` is not a vertex id"),
    })
}

/// Bijection between original ids and ranks. Rank 0 is the highest priority.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexOrder {
    id_of: Vec<u64>,
    rank_of: HashMap<u64, Rank>,
}

impl VertexOrder {
    /// Builds an order from ids listed highest priority first.
    pub fn from_ranked_ids(ids: Vec<u64>) -> Result<Self, GraphError> {
        if ids.len() > Rank::MAX as usize {
            return Err(GraphError::TooManyVertices(ids.len()));
        }
        let mut rank_of = HashMap::with_capacity(ids.len());
        for (rank, &id) in ids.iter().enumerate() {
            if rank_of.insert(id, rank as Rank).is_some() {
                return Err(GraphError::DuplicateId(id));
            }
        }
        Ok(VertexOrder {
            id_of: ids,
            rank_of,
        })
    }

    pub fn len(&self) -> usize {
        self.id_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_of.is_empty()
    }

    pub fn rank_of(&self, id: u64) -> Option<Rank> {
        self.rank_of.get(&id).copied()
    }

    pub fn id_of(&self, rank: Rank) -> u64 {
        self.id_of[rank as usize]
    }

    /// Original ids in rank order.
    pub fn ids(&self) -> &[u64] {
        &self.id_of
    }
}

/// Degree-descending order on the cleaned simple graph; ties go to the
/// smaller original id. Directed graphs rank by in-degree plus out-degree.
pub fn degree_order(raw: &RawGraph) -> VertexOrder {
    let mut pairs: Vec<(u64, u64)> = raw
        .edges
        .iter()
        .filter(|e| e.src != e.dst)
        .map(|e| {
            if raw.directed {
                (e.src, e.dst)
            } else {
                (e.src.min(e.dst), e.src.max(e.dst))
            }
        })
        .collect();
    pairs.sort_unstable();
    pairs.dedup();

    let mut degree: HashMap<u64, usize> = raw.vertices.iter().map(|&id| (id, 0)).collect();
    for &(a, b) in &pairs {
        *degree.entry(a).or_default() += 1;
        *degree.entry(b).or_default() += 1;
    }
    let mut ids: Vec<u64> = degree.keys().copied().collect();
    ids.sort_unstable_by(|a, b| degree[b].cmp(&degree[a]).then(a.cmp(b)));
    VertexOrder::from_ranked_ids(ids).expect("degree map keys are unique")
}

/// Compressed adjacency indexed by rank; each neighbor list is strictly
/// increasing in rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Csr {
    offsets: Vec<usize>,
    targets: Vec<Rank>,
    weights: Option<Vec<Distance>>,
}

impl Csr {
    /// `edges` are (src, dst, weight) over ranks; duplicates keep the minimum
    /// weight and self-loops must already be gone.
    fn from_sorted_unique(n: usize, edges: &[(Rank, Rank, Distance)], weighted: bool) -> Csr {
        let mut offsets = vec![0usize; n + 1];
        for &(s, _, _) in edges {
            offsets[s as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let targets = edges.iter().map(|&(_, d, _)| d).collect();
        let weights = weighted.then(|| edges.iter().map(|&(_, _, w)| w).collect());
        Csr {
            offsets,
            targets,
            weights,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn entry_count(&self) -> usize {
        self.targets.len()
    }

    #[inline]
    pub fn neighbors(&self, v: Rank) -> &[Rank] {
        let v = v as usize;
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn weights(&self, v: Rank) -> Option<&[Distance]> {
        let v = v as usize;
        self.weights
            .as_ref()
            .map(|w| &w[self.offsets[v]..self.offsets[v + 1]])
    }

    /// Neighbors paired with edge lengths (1 when unweighted).
    #[inline]
    pub fn edges(&self, v: Rank) -> impl Iterator<Item = (Rank, Distance)> + '_ {
        let nbrs = self.neighbors(v);
        let weights = self.weights(v);
        nbrs.iter()
            .enumerate()
            .map(move |(i, &t)| (t, weights.map_or(1, |w| w[i])))
    }

    pub fn degree(&self, v: Rank) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }
}

/// Immutable rank-permuted graph.
#[derive(Debug, Clone)]
pub struct Graph {
    directed: bool,
    weighted: bool,
    m: usize,
    out: Csr,
    inc: Option<Csr>,
    order: VertexOrder,
    fingerprint: u64,
}

/// Removes self-loops, deduplicates parallel edges keeping the minimum
/// weight, remaps ids to ranks and sorts every adjacency list.
pub fn build_graph(raw: &RawGraph, order: VertexOrder) -> Result<Graph, GraphError> {
    for &id in &raw.vertices {
        if order.rank_of(id).is_none() {
            return Err(GraphError::IdNotInOrder(id));
        }
    }
    let n = order.len();
    let mut arcs: Vec<(Rank, Rank, Distance)> = Vec::with_capacity(raw.edges.len());
    for e in &raw.edges {
        if e.weight == 0 {
            return Err(GraphError::ZeroWeight(e.weight));
        }
        let s = order.rank_of(e.src).ok_or(GraphError::IdNotInOrder(e.src))?;
        let d = order.rank_of(e.dst).ok_or(GraphError::IdNotInOrder(e.dst))?;
        if s == d {
            continue;
        }
        let w = if raw.weighted { e.weight } else { 1 };
        if raw.directed {
            arcs.push((s, d, w));
        } else {
            arcs.push((s.min(d), s.max(d), w));
        }
    }
    // Sorting by (src, dst, weight) puts the lightest duplicate first.
    arcs.sort_unstable();
    arcs.dedup_by_key(|a| (a.0, a.1));
    let m = arcs.len();

    let (out, inc) = if raw.directed {
        let out = Csr::from_sorted_unique(n, &arcs, raw.weighted);
        let mut rev: Vec<_> = arcs.iter().map(|&(s, d, w)| (d, s, w)).collect();
        rev.sort_unstable();
        (out, Some(Csr::from_sorted_unique(n, &rev, raw.weighted)))
    } else {
        let mut both: Vec<_> = arcs.iter().flat_map(|&(s, d, w)| [(s, d, w), (d, s, w)]).collect();
        both.sort_unstable();
        (Csr::from_sorted_unique(n, &both, raw.weighted), None)
    };

    let mut graph = Graph {
        directed: raw.directed,
        weighted: raw.weighted,
        m,
        out,
        inc,
        order,
        fingerprint: 0,
    };
    graph.fingerprint = graph.compute_fingerprint();
    Ok(graph)
}

impl Graph {
    /// Degree order followed by [`build_graph`].
    pub fn from_raw(raw: &RawGraph) -> Result<Graph, GraphError> {
        build_graph(raw, degree_order(raw))
    }

    pub fn vertex_count(&self) -> usize {
        self.order.len()
    }

    /// Edges after cleaning (undirected edges counted once).
    pub fn edge_count(&self) -> usize {
        self.m
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn order(&self) -> &VertexOrder {
        &self.order
    }

    /// Outgoing adjacency (the only adjacency of an undirected graph).
    pub fn out(&self) -> &Csr {
        &self.out
    }

    /// Incoming adjacency; for undirected graphs this is the same structure
    /// as [`Graph::out`].
    pub fn inc(&self) -> &Csr {
        self.inc.as_ref().unwrap_or(&self.out)
    }

    /// Adjacency a label side propagates along: `In` labels grow along
    /// outgoing edges, `Out` labels along incoming edges.
    pub fn propagation(&self, side: Side) -> &Csr {
        match (self.directed, side) {
            (false, _) => &self.out,
            (true, Side::In) => &self.out,
            (true, Side::Out) => self.inc(),
        }
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Edge multiset over original ids, one record per stored edge.
    pub fn to_raw(&self) -> RawGraph {
        let mut edges = Vec::with_capacity(self.m);
        for v in 0..self.vertex_count() as Rank {
            for (t, w) in self.out.edges(v) {
                if self.directed || v < t {
                    edges.push(RawEdge {
                        src: self.order.id_of(v),
                        dst: self.order.id_of(t),
                        weight: w,
                    });
                }
            }
        }
        RawGraph::new(self.directed, self.weighted, edges).with_vertices(self.order.ids().iter().copied())
    }

    /// Views this graph as unweighted-with-weights, i.e. every edge keeps its
    /// weight but algorithms that insist on `weighted` accept it. Used to run
    /// Dijkstra-based code on unit-weight graphs.
    pub fn as_weighted(&self) -> Graph {
        let mut g = self.clone();
        if !g.weighted {
            g.weighted = true;
            let unit = |c: &mut Csr| c.weights = Some(vec![1; c.targets.len()]);
            unit(&mut g.out);
            if let Some(inc) = g.inc.as_mut() {
                unit(inc);
            }
            g.fingerprint = g.compute_fingerprint();
        }
        g
    }

    fn compute_fingerprint(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        let mut feed = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(PRIME);
            }
        };
        feed(self.vertex_count() as u64);
        feed(self.directed as u64 | (self.weighted as u64) << 1);
        for csr in std::iter::once(&self.out).chain(self.inc.as_ref()) {
            for &o in &csr.offsets {
                feed(o as u64);
            }
            for &t in &csr.targets {
                feed(t as u64);
            }
            for &w in csr.weights.iter().flatten() {
                feed(w as u64);
            }
        }
        h
    }
}
