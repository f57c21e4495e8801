//! TSV and JSON renderings of evaluation and comparison results.
//!
//! A TSV report is a sequence of tables, each introduced by a `# name`
//! line followed by a header row. Metrics are printed with four decimals
//! and percentages with two (rounded half-up).

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::compare::ThreeWayCounts;
use super::{
    BucketCounts, DeltaReport, EvalError, EvalRecord, ExcludedQuery, PrecisionSummary, ThreeWayReport, CUTOFFS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Tsv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tsv" => Ok(ReportFormat::Tsv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(EvalError::UnknownFormat(s.to_string())),
        }
    }
}

/// One evaluated system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemEval {
    pub label: String,
    pub records: Vec<EvalRecord>,
    pub excluded: Vec<ExcludedQuery>,
    pub summary: PrecisionSummary,
}

/// Everything a report can contain. Sections left empty render as
/// header-only tables.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportSet {
    pub systems: Vec<SystemEval>,
    pub deltas: Vec<DeltaReport>,
    pub threeway: Option<ThreeWayReport>,
}

pub fn render_reports(set: &ReportSet, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(set).expect("report values serialize");
            out.push(b'\n');
            out
        }
        ReportFormat::Tsv => render_tsv(set).into_bytes(),
    }
}

fn p_at_headers() -> impl Iterator<Item = String> {
    CUTOFFS.iter().map(|k| format!("p@{k}"))
}

fn metric(x: f64) -> String {
    format!("{x:.4}")
}

fn tables(set: &ReportSet) -> Vec<TsvTable> {
    let mut per_query = TsvTable::new(
        "per_query",
        ["system", "qid", "found", "relevant_found", "ap"].into_iter().map(String::from).chain(p_at_headers()),
    );
    let mut summary = TsvTable::new(
        "summary",
        ["system", "queries", "mean_ap", "median_ap"].into_iter().map(String::from).chain(p_at_headers()),
    );
    let mut excluded = TsvTable::new("excluded", ["system", "qid", "reason"].map(String::from));
    for sys in &set.systems {
        for r in &sys.records {
            let mut row =
                vec![sys.label.clone(), r.qid.clone(), r.found.to_string(), r.relevant_found.to_string(), metric(r.ap)];
            row.extend(CUTOFFS.iter().map(|k| metric(r.p_at.get(k).copied().unwrap_or(0.0))));
            per_query.rows.push(row);
        }
        let s = &sys.summary;
        let mut row = vec![sys.label.clone(), s.queries.to_string(), metric(s.mean_ap), metric(s.median_ap)];
        row.extend(CUTOFFS.iter().map(|k| metric(s.mean_p_at.get(k).copied().unwrap_or(0.0))));
        summary.rows.push(row);
        for e in &sys.excluded {
            let reason = serde_json::to_value(e.reason).expect("enum").as_str().unwrap_or_default().to_string();
            excluded.rows.push(vec![sys.label.clone(), e.qid.clone(), reason]);
        }
    }

    let mut deltas = TsvTable::new(
        "deltas",
        ["baseline", "treatment", "qid", "ndtb", "ndta", "d", "ndtpb", "ndtpa", "dp"].map(String::from),
    );
    let mut buckets = TsvTable::new(
        "buckets",
        [
            "baseline",
            "treatment",
            "measure",
            "negative",
            "negative_pct",
            "zero",
            "zero_pct",
            "positive",
            "positive_pct",
            "total",
        ]
        .map(String::from),
    );
    for rep in &set.deltas {
        for r in &rep.records {
            deltas.rows.push(vec![
                rep.baseline.clone(),
                rep.treatment.clone(),
                r.qid.clone(),
                r.ndtb.to_string(),
                r.ndta.to_string(),
                r.d.to_string(),
                r.ndtpb.to_string(),
                r.ndtpa.to_string(),
                r.dp.to_string(),
            ]);
        }
        for (measure, b) in [("D", &rep.found), ("DP", &rep.relevant)] {
            let [n, z, p] = b.percentages();
            buckets.rows.push(vec![
                rep.baseline.clone(),
                rep.treatment.clone(),
                measure.to_string(),
                b.negative.to_string(),
                n.to_string(),
                b.zero.to_string(),
                z.to_string(),
                b.positive.to_string(),
                p.to_string(),
                b.total().to_string(),
            ]);
        }
    }

    let mut threeway = TsvTable::new(
        "threeway",
        [
            "measure",
            "first",
            "second",
            "third",
            "first_wins",
            "first_pct",
            "second_wins",
            "second_pct",
            "third_wins",
            "third_pct",
            "all_equal",
            "all_equal_pct",
            "partial_tie",
            "partial_tie_pct",
            "total",
        ]
        .map(String::from),
    );
    if let Some(tw) = &set.threeway {
        for (measure, c) in [("found", &tw.found), ("relevant_found", &tw.relevant)] {
            let pct = c.percentages();
            let mut row = vec![measure.to_string()];
            row.extend(tw.systems.iter().cloned());
            for (count, p) in [c.wins[0], c.wins[1], c.wins[2], c.all_equal, c.partial_tie].iter().zip(pct) {
                row.push(count.to_string());
                row.push(p.to_string());
            }
            row.push(c.total().to_string());
            threeway.rows.push(row);
        }
    }

    vec![per_query, summary, excluded, deltas, buckets, threeway]
}

fn render_tsv(set: &ReportSet) -> String {
    let mut out = String::new();
    for (i, table) in tables(set).iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "# {}", table.name);
        let _ = writeln!(out, "{}", table.header.join("\t"));
        for row in &table.rows {
            let _ = writeln!(out, "{}", row.join("\t"));
        }
    }
    out
}

/// A parsed TSV table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TsvTable {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl TsvTable {
    fn new(name: &str, header: impl IntoIterator<Item = String>) -> Self {
        Self { name: name.to_string(), header: header.into_iter().collect(), rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Parses a TSV report produced by [`render_reports`].
pub fn parse_tsv(text: &str) -> Result<Vec<TsvTable>, EvalError> {
    let mut tables: Vec<TsvTable> = Vec::new();
    let mut expecting_header = false;
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix("# ") {
            tables.push(TsvTable::new(name, std::iter::empty()));
            expecting_header = true;
            continue;
        }
        let cells: Vec<String> = line.split('\t').map(String::from).collect();
        let table = tables.last_mut().ok_or_else(|| EvalError::Parse {
            path: String::new(),
            line: idx + 1,
            message: "row before any table".into(),
        })?;
        if expecting_header {
            table.header = cells;
            expecting_header = false;
        } else if cells.len() != table.header.len() {
            return Err(EvalError::Parse {
                path: String::new(),
                line: idx + 1,
                message: format!("expected {} cells, got {}", table.header.len(), cells.len()),
            });
        } else {
            table.rows.push(cells);
        }
    }
    Ok(tables)
}

/// Convenience for callers building reports piecemeal.
impl ReportSet {
    pub fn bucket_rows(&self) -> impl Iterator<Item = (&str, &str, &BucketCounts, &BucketCounts)> {
        self.deltas.iter().map(|d| (d.baseline.as_str(), d.treatment.as_str(), &d.found, &d.relevant))
    }

    pub fn threeway_counts(&self) -> Option<(&ThreeWayCounts, &ThreeWayCounts)> {
        self.threeway.as_ref().map(|t| (&t.found, &t.relevant))
    }
}
