//! Seeded synthetic graphs for test corpora. Vertex ids start at 1.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{RawEdge, RawGraph};
use crate::Distance;

pub const MAX_GEN_WEIGHT: Distance = 7;

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("{model} needs at least {min} vertices, got {n}")]
    TooFewVertices { model: &'static str, min: u64, n: u64 },
    #[error("edge probability {0} is outside [0, 1]")]
    BadProbability(f64),
    #[error("attachment count must be at least 1")]
    ZeroAttachment,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    /// Erdős–Rényi: every pair independently with probability `p`.
    Gnp { n: u64, p: f64 },
    /// Preferential attachment, `m` edges per new vertex.
    Ba { n: u64, m: u64 },
    Path { n: u64 },
    /// Vertex 1 joined to every other vertex.
    Star { n: u64 },
    Grid { rows: u64, cols: u64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GenOptions {
    pub seed: u64,
    pub directed: bool,
    /// Draw weights uniformly from `1..=7`.
    pub weighted: bool,
}

struct Builder {
    rng: ChaCha8Rng,
    weighted: bool,
    edges: Vec<RawEdge>,
}

impl Builder {
    fn edge(&mut self, src: u64, dst: u64) {
        let weight = if self.weighted {
            self.rng.gen_range(1..=MAX_GEN_WEIGHT)
        } else {
            1
        };
        self.edges.push(RawEdge { src, dst, weight });
    }
}

/// Builds the graph; every id in `1..=n` is a vertex, isolated or not.
pub fn generate(model: Model, opts: GenOptions) -> Result<RawGraph, GenError> {
    let mut b = Builder {
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
        weighted: opts.weighted,
        edges: Vec::new(),
    };
    let n = match model {
        Model::Gnp { n, p } => {
            gnp(&mut b, n, p, opts.directed)?;
            n
        }
        Model::Ba { n, m } => {
            ba(&mut b, n, m)?;
            n
        }
        Model::Path { n } => {
            for v in 1..n {
                b.edge(v, v + 1);
            }
            n
        }
        Model::Star { n } => {
            for v in 2..=n {
                b.edge(1, v);
            }
            n
        }
        Model::Grid { rows, cols } => {
            let id = |r: u64, c: u64| r * cols + c + 1;
            for r in 0..rows {
                for c in 0..cols {
                    if c + 1 < cols {
                        b.edge(id(r, c), id(r, c + 1));
                    }
                    if r + 1 < rows {
                        b.edge(id(r, c), id(r + 1, c));
                    }
                }
            }
            rows * cols
        }
    };
    Ok(RawGraph::new(opts.directed, opts.weighted, b.edges).with_vertices(1..=n))
}

/// Geometric skipping over the pair sequence, so the cost is proportional
/// to the number of edges drawn.
fn gnp(b: &mut Builder, n: u64, p: f64, directed: bool) -> Result<(), GenError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GenError::BadProbability(p));
    }
    let pairs = if directed { n * n.saturating_sub(1) } else { n * n.saturating_sub(1) / 2 };
    if p == 0.0 || pairs == 0 {
        return Ok(());
    }
    let decode = |k: u64| -> (u64, u64) {
        if directed {
            let (u, j) = (k / (n - 1), k % (n - 1));
            (u + 1, if j < u { j + 1 } else { j + 2 })
        } else {
            // k-th pair (v, w), w < v, in row-major order of v.
            let mut v = ((((8 * k + 1) as f64).sqrt() + 1.0) / 2.0) as u64;
            while v * (v - 1) / 2 > k {
                v -= 1;
            }
            while (v + 1) * v / 2 <= k {
                v += 1;
            }
            (k - v * (v - 1) / 2 + 1, v + 1)
        }
    };
    if p >= 1.0 {
        for k in 0..pairs {
            let (s, t) = decode(k);
            b.edge(s, t);
        }
        return Ok(());
    }
    let log_q = (1.0 - p).ln();
    let mut k: u64 = 0;
    loop {
        let r: f64 = b.rng.gen();
        let skip = ((1.0 - r).ln() / log_q).floor();
        if !skip.is_finite() || skip >= (pairs - k) as f64 {
            break;
        }
        k += skip as u64;
        let (s, t) = decode(k);
        b.edge(s, t);
        k += 1;
        if k >= pairs {
            break;
        }
    }
    Ok(())
}

fn ba(b: &mut Builder, n: u64, m: u64) -> Result<(), GenError> {
    if m == 0 {
        return Err(GenError::ZeroAttachment);
    }
    if n == 0 {
        return Err(GenError::TooFewVertices { model: "ba", min: 1, n });
    }
    let seed = (m + 1).min(n);
    // Endpoint multiset: sampling from it is degree-proportional.
    let mut ends: Vec<u64> = Vec::new();
    for v in 1..=seed {
        for w in 1..v {
            b.edge(w, v);
            ends.extend([w, v]);
        }
    }
    let mut picked = Vec::with_capacity(m as usize);
    for v in seed + 1..=n {
        picked.clear();
        while (picked.len() as u64) < m {
            let t = ends[b.rng.gen_range(0..ends.len())];
            if !picked.contains(&t) {
                picked.push(t);
            }
        }
        for &t in &picked {
            b.edge(t, v);
            ends.extend([t, v]);
        }
    }
    Ok(())
}

/// Writes `u v` (or `u v w`) lines.
pub fn write_edge_list<W: Write>(raw: &RawGraph, mut w: W) -> std::io::Result<()> {
    for e in &raw.edges {
        if raw.weighted {
            writeln!(w, "{} {} {}", e.src, e.dst, e.weight)?;
        } else {
            writeln!(w, "{} {}", e.src, e.dst)?;
        }
    }
    w.flush()
}

pub fn to_edge_list(raw: &RawGraph) -> String {
    let mut out = Vec::new();
    write_edge_list(raw, &mut out).expect("writing to a Vec cannot fail");
    String::from_utf8(out).expect("edge lists are ASCII")
}
