//! Readers for qrels, TREC run files and found-count sidecars.

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;

use super::{EvalError, Qrels};
use crate::engine::{RankedHit, RankedList};

fn parse_err(path: &str, line: usize, message: impl Into<String>) -> EvalError {
    let path = if path.is_empty() { String::new() } else { format!("{path}: ") };
    EvalError::Parse { path, line, message: message.into() }
}

/// Reads `qid 0 doc_id rel` lines. Judgments greater than zero count as
/// relevant; a query whose judgments are all zero maps to an empty set.
pub fn read_qrels<R: BufRead>(reader: R, path: &str) -> Result<Qrels, EvalError> {
    let mut qrels = Qrels::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let [qid, _, doc, rel] = fields[..] else {
            return Err(parse_err(path, idx + 1, format!("expected 4 fields, got {}", fields.len())));
        };
        let rel: i64 = rel.parse().map_err(|_| parse_err(path, idx + 1, format!("bad relevance {rel:?}")))?;
        let entry = qrels.entry(qid.to_string()).or_default();
        if rel > 0 {
            entry.insert(doc.to_string());
        }
    }
    Ok(qrels)
}

/// Reads a TREC run (`qid Q0 doc_id rank score tag`). Queries keep their
/// first-appearance order; hits within a query are ordered by the rank
/// column and renumbered from 1. `found_count` defaults to the number of
/// hits; see [`apply_found_counts`].
pub fn read_trec_run<R: BufRead>(reader: R, path: &str) -> Result<Vec<RankedList>, EvalError> {
    let mut order: Vec<String> = Vec::new();
    let mut by_qid: HashMap<String, Vec<(usize, RankedHit)>> = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let [qid, _, doc, rank, score, _tag] = fields[..] else {
            return Err(parse_err(path, idx + 1, format!("expected 6 fields, got {}", fields.len())));
        };
        let rank: usize = rank.parse().map_err(|_| parse_err(path, idx + 1, format!("bad rank {rank:?}")))?;
        let score: f64 = score.parse().map_err(|_| parse_err(path, idx + 1, format!("bad score {score:?}")))?;
        if !by_qid.contains_key(qid) {
            order.push(qid.to_string());
        }
        by_qid.entry(qid.to_string()).or_default().push((rank, RankedHit { doc_id: doc.to_string(), score, rank }));
    }
    Ok(order
        .into_iter()
        .map(|qid| {
            let mut hits = by_qid.remove(&qid).unwrap_or_default();
            hits.sort_by_key(|(rank, _)| *rank);
            let hits: Vec<RankedHit> =
                hits.into_iter().enumerate().map(|(i, (_, hit))| RankedHit { rank: i + 1, ..hit }).collect();
            RankedList { qid, found_count: hits.len(), hits }
        })
        .collect())
}

/// Reads the `{qid: found_count}` JSON sidecar.
pub fn read_found_sidecar(bytes: &[u8], path: &str) -> Result<BTreeMap<String, usize>, EvalError> {
    serde_json::from_slice(bytes).map_err(|e| parse_err(path, e.line(), e.to_string()))
}

/// Replaces each list's `found_count` with the sidecar value (never below
/// the number of hits). Queries with no hits at all do not appear in a TREC
/// file; they are added as empty lists so found counts of zero survive.
pub fn apply_found_counts(lists: &mut Vec<RankedList>, found: &BTreeMap<String, usize>) {
    for list in lists.iter_mut() {
        if let Some(&n) = found.get(&list.qid) {
            list.found_count = n.max(list.hits.len());
        }
    }
    for (qid, &n) in found {
        if !lists.iter().any(|l| &l.qid == qid) {
            lists.push(RankedList { qid: qid.clone(), hits: Vec::new(), found_count: n });
        }
    }
}
