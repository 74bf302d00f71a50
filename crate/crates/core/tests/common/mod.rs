//! Generated graph corpora shared by the integration tests.
#![allow(dead_code)]

use hubkit::gen::{generate, GenOptions, Model};
use hubkit::graph::build_graph;
use hubkit::{Graph, RawGraph, VertexOrder};

pub struct Instance {
    pub name: String,
    pub seed: u64,
    pub graph: Graph,
}

impl Instance {
    fn new(name: String, seed: u64, raw: &RawGraph) -> Self {
        Instance {
            name,
            seed,
            graph: Graph::from_raw(raw).expect("generated graphs are valid"),
        }
    }
}

fn make(model: Model, seed: u64, directed: bool, weighted: bool) -> Instance {
    let raw = generate(model, GenOptions { seed, directed, weighted }).expect("valid model");
    let kind = match (directed, weighted) {
        (true, true) => "dw-",
        (true, false) => "d-",
        (false, true) => "w-",
        (false, false) => "",
    };
    Instance::new(format!("{kind}{}", describe(model)), seed, &raw)
}

pub fn describe(model: Model) -> String {
    match model {
        Model::Gnp { n, p } => format!("gnp(n={n},deg={:.0})", p * (n - 1) as f64),
        Model::Ba { n, m } => format!("ba(n={n},m={m})"),
        Model::Path { n } => format!("path({n})"),
        Model::Star { n } => format!("star({n})"),
        Model::Grid { rows, cols } => format!("grid({rows}x{cols})"),
    }
}

fn gnp_model(n: u64, deg: f64) -> Model {
    Model::Gnp {
        n,
        p: (deg / (n - 1) as f64).min(1.0),
    }
}

/// Random graphs at several sizes and average degrees.
pub fn gnp_corpus() -> Vec<Instance> {
    let mut out = Vec::new();
    let mut seed = 100;
    for n in [50, 100, 200, 500, 1000, 2000] {
        for deg in [2.0, 4.0, 8.0] {
            seed += 1;
            out.push(make(gnp_model(n, deg), seed, false, false));
        }
    }
    for s in 0..12 {
        out.push(make(gnp_model(60, 2.0 + s as f64 / 2.0), 200 + s, false, false));
    }
    out
}

/// The undirected, unweighted corpus: random, preferential-attachment and
/// regular families.
pub fn undirected_corpus() -> Vec<Instance> {
    let mut out = gnp_corpus();
    let mut seed = 300;
    for n in [50, 200, 500, 1000] {
        for m in [1, 2, 3] {
            seed += 1;
            out.push(make(Model::Ba { n, m }, seed, false, false));
        }
    }
    for n in [1, 2, 10, 100] {
        out.push(make(Model::Path { n }, 0, false, false));
    }
    for n in [5, 100] {
        out.push(make(Model::Star { n }, 0, false, false));
    }
    for (rows, cols) in [(3, 3), (10, 10), (20, 30)] {
        out.push(make(Model::Grid { rows, cols }, 0, false, false));
    }
    out
}

pub fn directed_corpus() -> Vec<Instance> {
    let mut out = Vec::new();
    let mut seed = 400;
    for n in [30, 100, 300, 800] {
        for deg in [1.5, 3.0, 6.0] {
            seed += 1;
            out.push(make(gnp_model(n, deg), seed, true, false));
        }
    }
    out.push(make(Model::Path { n: 20 }, 0, true, false));
    out.push(make(Model::Grid { rows: 6, cols: 7 }, 0, true, false));
    out
}

pub fn weighted_corpus() -> Vec<Instance> {
    let mut out = Vec::new();
    let mut seed = 500;
    for n in [30, 100, 300, 800] {
        for deg in [2.0, 4.0, 8.0] {
            seed += 1;
            out.push(make(gnp_model(n, deg), seed, false, true));
        }
    }
    for (n, m) in [(200, 2), (400, 3)] {
        seed += 1;
        out.push(make(Model::Ba { n, m }, seed, false, true));
    }
    out.push(make(Model::Grid { rows: 12, cols: 12 }, 7, false, true));
    out
}

pub fn directed_weighted_corpus() -> Vec<Instance> {
    let mut out = Vec::new();
    for (i, n) in [40, 150, 400].into_iter().enumerate() {
        out.push(make(gnp_model(n, 3.0), 600 + i as u64, true, true));
    }
    out
}

pub fn ordered(raw: &RawGraph, ids: &[u64]) -> Graph {
    build_graph(raw, VertexOrder::from_ranked_ids(ids.to_vec()).unwrap()).unwrap()
}

/// Small hand-built graphs with fixed orders.
pub fn hand_examples() -> Vec<Instance> {
    let named = |name: &str, g: Graph| Instance {
        name: name.to_string(),
        seed: 0,
        graph: g,
    };
    vec![
        named("p3", ordered(&RawGraph::undirected(&[(1, 2), (2, 3)]), &[2, 1, 3])),
        named("triangle", ordered(&RawGraph::undirected(&[(1, 2), (2, 3), (1, 3)]), &[1, 2, 3])),
        named("single", ordered(&RawGraph::undirected(&[]).with_vertices([1]), &[1])),
        named("empty", Graph::from_raw(&RawGraph::undirected(&[])).unwrap()),
        named("two-isolated", ordered(&RawGraph::undirected(&[]).with_vertices([1, 2]), &[1, 2])),
        named(
            "star-center-first",
            Graph::from_raw(&RawGraph::undirected(&[(1, 2), (1, 3), (1, 4), (1, 5)])).unwrap(),
        ),
        named("spider", spider().0),
    ]
}

/// Center vertex joined to nine hubs by legs of lengths 1,1,1,2,2,2,3,3,3.
/// Hubs take ranks 0..9, the center rank 9 and leg interiors the rest.
/// Returns the graph and the center's rank.
pub fn spider() -> (Graph, u32) {
    let center = 1000;
    let mut edges = Vec::new();
    let mut interiors = Vec::new();
    for (i, len) in [1u64, 1, 1, 2, 2, 2, 3, 3, 3].into_iter().enumerate() {
        let hub = 1 + i as u64;
        let mut prev = hub;
        for k in 1..len {
            let mid = 100 + 10 * i as u64 + k;
            interiors.push(mid);
            edges.push((prev, mid));
            prev = mid;
        }
        edges.push((prev, center));
    }
    let mut ids: Vec<u64> = (1..=9).collect();
    ids.push(center);
    ids.extend(interiors);
    let g = ordered(&RawGraph::undirected(&edges), &ids);
    let c = g.order().rank_of(center).unwrap();
    (g, c)
}
