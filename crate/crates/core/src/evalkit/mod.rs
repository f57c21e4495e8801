//! Retrieval evaluation: precision at cutoffs, average precision, found and
//! relevant-found counts, before/after deltas and three-way comparisons.

mod compare;
mod report;
mod trec;

pub use compare::{
    delta_report, percent_hundredths, threeway_report, BucketCounts, DeltaRecord, DeltaReport, Percent, ThreeWayCounts,
    ThreeWayReport,
};
pub use report::{parse_tsv, render_reports, ReportFormat, ReportSet, SystemEval, TsvTable};
pub use trec::{apply_found_counts, read_found_sidecar, read_qrels, read_trec_run};

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::RankedList;

/// Cutoffs reported for P@k.
pub const CUTOFFS: [usize; 5] = [5, 10, 20, 100, 1000];

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{path}line {line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("query sets differ; offending qids: {}", .0.join(", "))]
    QidMismatch(Vec<String>),
    #[error("unknown report format {0:?} (expected tsv or json)")]
    UnknownFormat(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Relevant documents per query. A query may be present with an empty set
/// when all its judgments are non-relevant.
pub type Qrels = BTreeMap<String, BTreeSet<String>>;

/// Fraction of the first `k` positions holding relevant documents. The
/// denominator is always `k`, so rankings shorter than `k` are penalized.
pub fn precision_at_k<S: AsRef<str>>(ranking: &[S], relevant: &BTreeSet<String>, k: usize) -> f64 {
    assert!(k >= 1, "precision cutoff must be at least 1");
    let hits = ranking.iter().take(k).filter(|d| relevant.contains(d.as_ref())).count();
    hits as f64 / k as f64
}

/// Sum of precision at the rank of each retrieved relevant document, over
/// the number of relevant documents. `None` when `relevant` is empty.
pub fn average_precision<S: AsRef<str>>(ranking: &[S], relevant: &BTreeSet<String>) -> Option<f64> {
    if relevant.is_empty() {
        return None;
    }
    let mut seen = HashSet::new();
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, doc) in ranking.iter().enumerate() {
        let doc = doc.as_ref();
        if relevant.contains(doc) && seen.insert(doc) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Some(sum / relevant.len() as f64)
}

/// Per-query evaluation result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub qid: String,
    pub found: usize,
    pub relevant_found: usize,
    pub p_at: BTreeMap<usize, f64>,
    pub ap: f64,
}

impl EvalRecord {
    /// A record carrying only counts, for delta computations over
    /// externally supplied numbers.
    pub fn counts(qid: impl Into<String>, found: usize, relevant_found: usize) -> Self {
        Self { qid: qid.into(), found, relevant_found, p_at: CUTOFFS.iter().map(|&k| (k, 0.0)).collect(), ap: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    MissingQrels,
    NoRelevantDocuments,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedQuery {
    pub qid: String,
    pub reason: ExclusionReason,
}

/// One system's row of summary figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionSummary {
    pub system: String,
    pub queries: usize,
    pub mean_ap: f64,
    pub median_ap: f64,
    pub mean_p_at: BTreeMap<usize, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub records: Vec<EvalRecord>,
    pub excluded: Vec<ExcludedQuery>,
    pub summary: PrecisionSummary,
}

/// Evaluates a run.
///
/// `found` and `relevant_found` count over every hit in each list; P@k and
/// AP only look at the first `depth` hits. Queries missing from `qrels`, or
/// with no relevant documents, are excluded and listed.
pub fn evaluate_run(system: &str, lists: &[RankedList], qrels: &Qrels, depth: Option<usize>) -> Evaluation {
    let mut records = Vec::with_capacity(lists.len());
    let mut excluded = Vec::new();
    for list in lists {
        let relevant = match qrels.get(&list.qid) {
            None => {
                excluded.push(ExcludedQuery { qid: list.qid.clone(), reason: ExclusionReason::MissingQrels });
                continue;
            }
            Some(rel) if rel.is_empty() => {
                excluded.push(ExcludedQuery { qid: list.qid.clone(), reason: ExclusionReason::NoRelevantDocuments });
                continue;
            }
            Some(rel) => rel,
        };
        let all: Vec<&str> = list.doc_ids().collect();
        let ranked = &all[..depth.map_or(all.len(), |d| d.min(all.len()))];
        let relevant_found = all.iter().collect::<HashSet<_>>().into_iter().filter(|d| relevant.contains(**d)).count();
        records.push(EvalRecord {
            qid: list.qid.clone(),
            found: list.found_count.max(all.len()),
            relevant_found,
            p_at: CUTOFFS.iter().map(|&k| (k, precision_at_k(ranked, relevant, k))).collect(),
            ap: average_precision(ranked, relevant).expect("non-empty relevant set"),
        });
    }
    let summary = summarize(system, &records);
    Evaluation { records, excluded, summary }
}

pub fn summarize(system: &str, records: &[EvalRecord]) -> PrecisionSummary {
    let n = records.len();
    let mean = |values: &mut dyn Iterator<Item = f64>| if n == 0 { 0.0 } else { values.sum::<f64>() / n as f64 };
    let mean_ap = mean(&mut records.iter().map(|r| r.ap));
    let mean_p_at = CUTOFFS
        .iter()
        .map(|&k| (k, mean(&mut records.iter().map(|r| r.p_at.get(&k).copied().unwrap_or(0.0)))))
        .collect();
    PrecisionSummary {
        system: system.to_string(),
        queries: n,
        mean_ap,
        median_ap: median(records.iter().map(|r| r.ap).collect()),
        mean_p_at,
    }
}

/// Median; the mean of the two middle values for even counts, 0 when empty.
pub fn median(mut values: Vec<f64>) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}
