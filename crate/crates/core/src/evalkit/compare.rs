//! Before/after deltas with sign buckets, and the three-system comparison.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{EvalError, EvalRecord};

/// Percentage of `count` in `total`, in hundredths of a percent, rounded
/// half-up. Exact integer arithmetic; 0 when `total` is 0.
pub fn percent_hundredths(count: usize, total: usize) -> u64 {
    if total == 0 {
        return 0;
    }
    let (count, total) = (count as u128, total as u128);
    ((count * 20_000 + total) / (2 * total)) as u64
}

/// A percentage with two decimals, stored as hundredths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Percent(pub u64);

impl Percent {
    pub fn of(count: usize, total: usize) -> Self {
        Percent(percent_hundredths(count, total))
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 100, self.0 % 100)
    }
}

/// Per-query differences between a baseline and a treatment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaRecord {
    pub qid: String,
    /// Documents found before.
    pub ndtb: usize,
    /// Documents found after.
    pub ndta: usize,
    /// Relevant documents found before.
    pub ndtpb: usize,
    /// Relevant documents found after.
    pub ndtpa: usize,
    pub d: i64,
    pub dp: i64,
}

/// Queries split by the sign of a delta.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "BucketJson", from = "BucketJson")]
pub struct BucketCounts {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

impl BucketCounts {
    pub fn from_values(values: impl IntoIterator<Item = i64>) -> Self {
        let mut b = BucketCounts::default();
        for v in values {
            match v.signum() {
                -1 => b.negative += 1,
                0 => b.zero += 1,
                _ => b.positive += 1,
            }
        }
        b
    }

    pub fn total(&self) -> usize {
        self.negative + self.zero + self.positive
    }

    /// (negative, zero, positive) percentages.
    pub fn percentages(&self) -> [Percent; 3] {
        let t = self.total();
        [Percent::of(self.negative, t), Percent::of(self.zero, t), Percent::of(self.positive, t)]
    }
}

#[derive(Serialize, Deserialize)]
struct BucketJson {
    negative: usize,
    zero: usize,
    positive: usize,
    #[serde(default)]
    negative_pct: f64,
    #[serde(default)]
    zero_pct: f64,
    #[serde(default)]
    positive_pct: f64,
}

impl From<BucketCounts> for BucketJson {
    fn from(b: BucketCounts) -> Self {
        let [n, z, p] = b.percentages();
        BucketJson {
            negative: b.negative,
            zero: b.zero,
            positive: b.positive,
            negative_pct: n.as_f64(),
            zero_pct: z.as_f64(),
            positive_pct: p.as_f64(),
        }
    }
}

impl From<BucketJson> for BucketCounts {
    fn from(j: BucketJson) -> Self {
        BucketCounts { negative: j.negative, zero: j.zero, positive: j.positive }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub baseline: String,
    pub treatment: String,
    pub records: Vec<DeltaRecord>,
    /// Buckets over `d`.
    pub found: BucketCounts,
    /// Buckets over `dp`.
    pub relevant: BucketCounts,
}

fn qid_mismatch(sets: &[&[EvalRecord]]) -> Option<Vec<String>> {
    let as_sets: Vec<BTreeSet<&str>> = sets.iter().map(|s| s.iter().map(|r| r.qid.as_str()).collect()).collect();
    let union: BTreeSet<&str> = as_sets.iter().flatten().copied().collect();
    let offending: Vec<String> =
        union.into_iter().filter(|q| as_sets.iter().any(|s| !s.contains(q))).map(str::to_string).collect();
    let duplicated = sets.iter().zip(&as_sets).any(|(s, set)| s.len() != set.len());
    if offending.is_empty() && !duplicated {
        None
    } else {
        Some(offending)
    }
}

/// Integer deltas `found_after - found_before` and
/// `relevant_after - relevant_before` per query, in `before` order, with
/// sign buckets for both.
pub fn delta_report(
    baseline: &str,
    treatment: &str,
    before: &[EvalRecord],
    after: &[EvalRecord],
) -> Result<DeltaReport, EvalError> {
    if let Some(qids) = qid_mismatch(&[before, after]) {
        return Err(EvalError::QidMismatch(qids));
    }
    let after_by_qid: BTreeMap<&str, &EvalRecord> = after.iter().map(|r| (r.qid.as_str(), r)).collect();
    let records: Vec<DeltaRecord> = before
        .iter()
        .map(|b| {
            let a = after_by_qid[b.qid.as_str()];
            DeltaRecord {
                qid: b.qid.clone(),
                ndtb: b.found,
                ndta: a.found,
                ndtpb: b.relevant_found,
                ndtpa: a.relevant_found,
                d: a.found as i64 - b.found as i64,
                dp: a.relevant_found as i64 - b.relevant_found as i64,
            }
        })
        .collect();
    Ok(DeltaReport {
        baseline: baseline.to_string(),
        treatment: treatment.to_string(),
        found: BucketCounts::from_values(records.iter().map(|r| r.d)),
        relevant: BucketCounts::from_values(records.iter().map(|r| r.dp)),
        records,
    })
}

/// Queries where each system strictly beats both others, where all three
/// tie, and the rest (two systems tied for the top).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreeWayCounts {
    pub wins: [usize; 3],
    pub all_equal: usize,
    pub partial_tie: usize,
}

impl ThreeWayCounts {
    fn add(&mut self, values: [usize; 3]) {
        let [a, b, c] = values;
        if a == b && b == c {
            self.all_equal += 1;
        } else if a > b && a > c {
            self.wins[0] += 1;
        } else if b > a && b > c {
            self.wins[1] += 1;
        } else if c > a && c > b {
            self.wins[2] += 1;
        } else {
            self.partial_tie += 1;
        }
    }

    pub fn total(&self) -> usize {
        self.wins.iter().sum::<usize>() + self.all_equal + self.partial_tie
    }

    /// Percentages in column order: wins of the three systems, all equal,
    /// partial tie.
    pub fn percentages(&self) -> [Percent; 5] {
        let t = self.total();
        [
            Percent::of(self.wins[0], t),
            Percent::of(self.wins[1], t),
            Percent::of(self.wins[2], t),
            Percent::of(self.all_equal, t),
            Percent::of(self.partial_tie, t),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreeWayReport {
    pub systems: [String; 3],
    pub found: ThreeWayCounts,
    pub relevant: ThreeWayCounts,
}

pub fn threeway_report(
    systems: [&str; 3],
    first: &[EvalRecord],
    second: &[EvalRecord],
    third: &[EvalRecord],
) -> Result<ThreeWayReport, EvalError> {
    if let Some(qids) = qid_mismatch(&[first, second, third]) {
        return Err(EvalError::QidMismatch(qids));
    }
    let index = |records: &[EvalRecord]| -> BTreeMap<String, (usize, usize)> {
        records.iter().map(|r| (r.qid.clone(), (r.found, r.relevant_found))).collect()
    };
    let (b, c) = (index(second), index(third));
    let mut found = ThreeWayCounts::default();
    let mut relevant = ThreeWayCounts::default();
    for r in first {
        let (bf, br) = b[&r.qid];
        let (cf, cr) = c[&r.qid];
        found.add([r.found, bf, cf]);
        relevant.add([r.relevant_found, br, cr]);
    }
    Ok(ThreeWayReport { systems: systems.map(str::to_string), found, relevant })
}
