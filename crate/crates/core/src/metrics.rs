//! Counters shared by all constructions and the comparisons run over them.

use std::fmt;
use std::time::Duration;

use crate::check::CheckTally;
use crate::labels::LabelStore;
use crate::oracle::{self, OracleError};
use crate::{Graph, Rank, Side};

/// Wall-clock split of a run. Informational only.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseTimes {
    pub scatter: Duration,
    pub deliver: Duration,
    pub gather: Duration,
    pub commit: Duration,
    pub recheck: Duration,
    pub total: Duration,
}

/// Accepted-entry counts of one vertex (and label side) within one batch,
/// grouped by the iteration they arrived in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrivalGroup {
    pub batch: u32,
    pub side: Side,
    pub vertex: Rank,
    pub sizes: Vec<u32>,
    /// Positive-check scan length spent on entries of the same batch.
    pub in_batch_positive_scan: u64,
}

/// Per-vertex and per-hub breakdowns, collected on request.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Detail {
    /// Positive scan length charged to each owner vertex (all sides summed).
    pub positive_scan_by_vertex: Vec<u64>,
    /// Negative scan length charged to each hub being propagated.
    pub negative_scan_by_hub: Vec<u64>,
    /// Filled by the batched construction only.
    pub arrival_groups: Vec<ArrivalGroup>,
    /// Distinct `(side, hub, vertex)` triples that went through a check,
    /// sorted.
    pub checked_pairs: Vec<(Side, Rank, Rank)>,
}

impl Detail {
    pub fn new(n: usize) -> Self {
        Detail {
            positive_scan_by_vertex: vec![0; n],
            negative_scan_by_hub: vec![0; n],
            ..Default::default()
        }
    }

    pub(crate) fn finish(&mut self) {
        self.checked_pairs.sort_unstable();
        self.checked_pairs.dedup();
        self.arrival_groups
            .sort_unstable_by_key(|g| (g.batch, g.side, g.vertex));
    }

    /// Negative scan totals per batch of `batch_size` consecutive hub ranks.
    pub fn negative_scan_by_batch(&self, batch_size: usize) -> Vec<u64> {
        self.negative_scan_by_hub
            .chunks(batch_size.max(1))
            .map(|c| c.iter().sum())
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CounterReport {
    pub algorithm: String,
    pub graph_fingerprint: u64,
    pub messages_sent: u64,
    pub edge_accesses: u64,
    pub checks_positive: u64,
    pub checks_negative: u64,
    pub scan_len_positive: u64,
    pub scan_len_negative: u64,
    /// Entries loaded into hub indices.
    pub index_entries: u64,
    pub iterations: u64,
    pub batches: u64,
    pub recheck_removed: u64,
    /// Label deltas holding more than one entry when scattered.
    pub multi_entry_deltas: u64,
    pub phases: PhaseTimes,
    pub detail: Option<Detail>,
}

impl CounterReport {
    pub fn new(algorithm: &str, g: &Graph) -> Self {
        CounterReport {
            algorithm: algorithm.to_string(),
            graph_fingerprint: g.fingerprint(),
            ..Default::default()
        }
    }

    pub fn add_checks(&mut self, t: &CheckTally) {
        self.checks_positive += t.positive;
        self.checks_negative += t.negative;
        self.scan_len_positive += t.scan_positive;
        self.scan_len_negative += t.scan_negative;
    }

    pub fn checks(&self) -> u64 {
        self.checks_positive + self.checks_negative
    }

    /// Every counter except timings and detail, in a fixed order.
    pub fn counters(&self) -> Vec<(&'static str, u64)> {
        vec![
            ("graph_fingerprint", self.graph_fingerprint),
            ("messages_sent", self.messages_sent),
            ("edge_accesses", self.edge_accesses),
            ("checks_positive", self.checks_positive),
            ("checks_negative", self.checks_negative),
            ("scan_len_positive", self.scan_len_positive),
            ("scan_len_negative", self.scan_len_negative),
            ("index_entries", self.index_entries),
            ("iterations", self.iterations),
            ("batches", self.batches),
            ("recheck_removed", self.recheck_removed),
            ("multi_entry_deltas", self.multi_entry_deltas),
        ]
    }

    /// True when every counter and the detail agree (timings ignored).
    pub fn same_counts(&self, other: &CounterReport) -> bool {
        self.counters() == other.counters() && self.detail == other.detail
    }

    fn lines(&self) -> Vec<(String, String)> {
        let mut out = vec![("algorithm".to_string(), self.algorithm.clone())];
        for (k, v) in self.counters() {
            let v = if k == "graph_fingerprint" {
                format!("{v:016x}")
            } else {
                v.to_string()
            };
            out.push((k.to_string(), v));
        }
        let p = &self.phases;
        for (k, d) in [
            ("time_scatter_ms", p.scatter),
            ("time_deliver_ms", p.deliver),
            ("time_gather_ms", p.gather),
            ("time_commit_ms", p.commit),
            ("time_recheck_ms", p.recheck),
            ("time_total_ms", p.total),
        ] {
            out.push((k.to_string(), format!("{:.3}", d.as_secs_f64() * 1e3)));
        }
        out
    }

    /// One `name,value` pair per line.
    pub fn to_csv(&self) -> String {
        self.lines().into_iter().map(|(k, v)| format!("{k},{v}\n")).collect()
    }
}

/// `key=value` block.
impl fmt::Display for CounterReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.lines() {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("reports come from different graphs ({0:016x} vs {1:016x})")]
    FingerprintMismatch(u64, u64),
    #[error("{0} report lacks per-hub detail")]
    MissingDetail(&'static str),
    #[error("negative scan bounds need an undirected unweighted graph")]
    Unsupported,
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub claim: &'static str,
    /// Hard claims fail the comparison; soft ones are reported only.
    pub hard: bool,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub verdicts: Vec<Verdict>,
    pub negative_scan_ratio: f64,
}

impl Comparison {
    pub fn hard_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass || !v.hard)
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn get(&self, claim: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.claim == claim)
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.verdicts {
            let status = match (v.pass, v.hard) {
                (true, _) => "PASS",
                (false, true) => "FAIL",
                (false, false) => "WARN",
            };
            writeln!(f, "{status} {}: {}", v.claim, v.detail)?;
        }
        Ok(())
    }
}

pub const DEFAULT_RATIO_TOLERANCE: f64 = 0.10;

/// `pll / bvc` negative scan ratio; 1 when both are zero.
pub fn negative_scan_ratio(pll: &CounterReport, bvc: &CounterReport) -> f64 {
    match (pll.scan_len_negative, bvc.scan_len_negative) {
        (0, 0) => 1.0,
        (_, 0) => f64::INFINITY,
        (p, b) => p as f64 / b as f64,
    }
}

/// Checks the sequential-vs-batched cost claims on two reports of the same
/// graph and order.
pub fn compare(pll: &CounterReport, bvc: &CounterReport, ratio_tolerance: f64) -> Result<Comparison, MetricsError> {
    if pll.graph_fingerprint != bvc.graph_fingerprint {
        return Err(MetricsError::FingerprintMismatch(pll.graph_fingerprint, bvc.graph_fingerprint));
    }
    let eq = |claim, a: u64, b: u64| Verdict {
        claim,
        hard: true,
        pass: a == b,
        detail: format!("pll={a} bvc={b}"),
    };
    let le = |claim, a: u64, b: u64| Verdict {
        claim,
        hard: true,
        pass: b <= a,
        detail: format!("pll={a} bvc={b}"),
    };
    let ratio = negative_scan_ratio(pll, bvc);
    let verdicts = vec![
        eq("messages_equal", pll.messages_sent, bvc.messages_sent),
        eq("checks_equal", pll.checks(), bvc.checks()),
        le("positive_scan_not_worse", pll.scan_len_positive, bvc.scan_len_positive),
        le("edge_accesses_not_worse", pll.edge_accesses, bvc.edge_accesses),
        Verdict {
            claim: "negative_scan_ratio",
            hard: false,
            pass: (ratio - 1.0).abs() <= ratio_tolerance,
            detail: format!(
                "pll={} bvc={} ratio={ratio:.4} tolerance={ratio_tolerance}",
                pll.scan_len_negative, bvc.scan_len_negative
            ),
        },
    ];
    Ok(Comparison {
        verdicts,
        negative_scan_ratio: ratio,
    })
}

/// Positive scan cost of one vertex in one batch whose accepted entries
/// arrive in groups of the given sizes: `(sequential, batched)`.
pub fn grouped_positive_scan(groups: &[u64]) -> (u64, u64) {
    let n: u64 = groups.iter().sum();
    let pairs = |k: u64| k * k.saturating_sub(1) / 2;
    let seq = pairs(n);
    (seq, seq - groups.iter().map(|&k| pairs(k)).sum::<u64>())
}

/// Positive scan length the sequential construction spends on a finished
/// store: each vertex pays `k(k-1)/2` for its `k` non-self entries.
pub fn sequential_positive_scan(store: &LabelStore) -> u64 {
    let sides = if store.is_directed() {
        vec![Side::Out, Side::In]
    } else {
        vec![Side::Out]
    };
    let mut total = 0;
    for side in sides {
        for list in store.side(side) {
            let k = list.len().saturating_sub(1) as u64;
            total += k * k.saturating_sub(1) / 2;
        }
    }
    total
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchBounds {
    pub batch: usize,
    /// Scan entries the batched run can skip relative to the sequential one.
    pub batched_gain: u64,
    /// Scan entries the sequential run can skip relative to the batched one.
    pub sequential_gain: u64,
    pub pll_negative_scan: u64,
    pub bvc_negative_scan: u64,
}

impl BatchBounds {
    /// `pll - bvc`.
    pub fn measured_difference(&self) -> i64 {
        self.pll_negative_scan as i64 - self.bvc_negative_scan as i64
    }

    pub fn holds(&self) -> bool {
        let d = self.measured_difference();
        -(self.sequential_gain as i64) <= d && d <= self.batched_gain as i64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundsReport {
    pub batches: Vec<BatchBounds>,
}

impl BoundsReport {
    pub fn holds(&self) -> bool {
        self.batches.iter().all(BatchBounds::holds)
    }

    pub fn violations(&self) -> impl Iterator<Item = &BatchBounds> {
        self.batches.iter().filter(|b| !b.holds())
    }
}

/// Evaluates, per batch, how many negative-check scan entries each algorithm
/// can save over the other, and pairs them with the measured per-batch
/// negative scan totals.
///
/// Batched gain for batch `i`: triples `(x, u, v)` with `u` and `v` hubs of
/// the batch, `u` in `L(x)`, `v` reaching `x` through a neighbor but not in
/// `L(x)`, `u < v < x`, and `u` arriving at `x` no earlier than `v` does.
/// Sequential gain mirrors it: `(y, v, u)` with `v` in `L(y)` (non-self),
/// `u` reaching `y` negatively, `u < v` and `v` arriving strictly earlier.
pub fn negative_scan_bounds_report(
    g: &Graph,
    labels: &LabelStore,
    batch_size: usize,
    pll: &CounterReport,
    bvc: &CounterReport,
) -> Result<BoundsReport, MetricsError> {
    if g.is_directed() || g.is_weighted() {
        return Err(MetricsError::Unsupported);
    }
    let pll_detail = pll.detail.as_ref().ok_or(MetricsError::MissingDetail("sequential"))?;
    let bvc_detail = bvc.detail.as_ref().ok_or(MetricsError::MissingDetail("batched"))?;
    let dist = oracle::all_pairs(g)?;
    let n = g.vertex_count();
    let b = batch_size.max(1);
    let pll_by_batch = pll_detail.negative_scan_by_batch(b);
    let bvc_by_batch = bvc_detail.negative_scan_by_batch(b);
    let adj = g.out();

    let mut batches = Vec::new();
    for (i, base) in (0..n).step_by(b).enumerate() {
        let end = (base + b).min(n) as Rank;
        let base = base as Rank;
        let in_batch = |h: Rank| h >= base && h < end;
        let mut batched_gain = 0u64;
        let mut sequential_gain = 0u64;
        for x in 0..n as Rank {
            let lx = labels.labels(x);
            // Batch hubs reaching x negatively, with their arrival iteration.
            let mut arrivals: Vec<(Rank, u32)> = Vec::new();
            for &y in adj.neighbors(x) {
                for e in labels.labels(y) {
                    if in_batch(e.hub) && e.hub < x && lx.binary_search_by_key(&e.hub, |h| h.hub).is_err() {
                        arrivals.push((e.hub, e.dist + 1));
                    }
                }
            }
            arrivals.sort_unstable();
            arrivals.dedup_by_key(|a| a.0);
            for e in lx.iter().filter(|e| in_batch(e.hub) && e.hub != x) {
                let u = e.hub;
                let du = dist.get(x, u);
                batched_gain += arrivals.iter().filter(|&&(v, t)| v > u && du >= t).count() as u64;
                sequential_gain += arrivals.iter().filter(|&&(w, t)| w < u && du < t).count() as u64;
            }
        }
        batches.push(BatchBounds {
            batch: i,
            batched_gain,
            sequential_gain,
            pll_negative_scan: pll_by_batch.get(i).copied().unwrap_or(0),
            bvc_negative_scan: bvc_by_batch.get(i).copied().unwrap_or(0),
        });
    }
    Ok(BoundsReport { batches })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grouped_positive_scan_examples() {
        assert_eq!(grouped_positive_scan(&[3, 3, 3]), (36, 27));
        assert_eq!(grouped_positive_scan(&[1; 6]), (15, 15));
        assert_eq!(grouped_positive_scan(&[6]), (15, 0));
        assert_eq!(grouped_positive_scan(&[1]), (0, 0));
    }

    fn report(algo: &str, fp: u64) -> CounterReport {
        CounterReport {
            algorithm: algo.into(),
            graph_fingerprint: fp,
            ..Default::default()
        }
    }

    #[test]
    fn compare_flags_each_claim() {
        let mut pll = report("pll", 7);
        pll.messages_sent = 10;
        pll.edge_accesses = 10;
        pll.checks_positive = 6;
        pll.checks_negative = 4;
        pll.scan_len_positive = 9;
        pll.scan_len_negative = 20;
        let mut bvc = pll.clone();
        bvc.algorithm = "bvc".into();
        let c = compare(&pll, &bvc, DEFAULT_RATIO_TOLERANCE).unwrap();
        assert!(c.all_pass());

        bvc.messages_sent = 11;
        bvc.scan_len_negative = 40;
        let c = compare(&pll, &bvc, DEFAULT_RATIO_TOLERANCE).unwrap();
        assert!(!c.hard_pass());
        assert!(!c.get("messages_equal").unwrap().pass);
        assert!(!c.get("negative_scan_ratio").unwrap().pass);
        assert!(c.get("checks_equal").unwrap().pass);
        assert!(c.to_string().contains("FAIL messages_equal"));

        let other = report("bvc", 8);
        assert!(matches!(
            compare(&pll, &other, 0.1),
            Err(MetricsError::FingerprintMismatch(7, 8))
        ));
    }

    #[test]
    fn report_formats() {
        let mut r = report("pll", 0xabc);
        r.messages_sent = 3;
        let kv = r.to_string();
        assert!(kv.contains("algorithm=pll\n"));
        assert!(kv.contains("messages_sent=3\n"));
        assert!(kv.contains("graph_fingerprint=0000000000000abc\n"));
        assert!(r.to_csv().contains("messages_sent,3\n"));
    }
}
