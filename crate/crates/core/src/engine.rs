//! The four retrieval configurations and batch runs over a query set.
//!
//! | type | document index | query            |
//! |------|----------------|------------------|
//! | R0   | plain          | as typed         |
//! | R1   | semantic       | expanded         |
//! | R2   | plain          | expanded         |
//! | R3   | semantic       | as typed         |

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::index::{Index, IndexMode, LexiconMismatch};
use crate::lexicon::Lexicon;
use crate::semantics::{expand, DEFAULT_MAX_CONCEPT_LEN};
use crate::textnorm::{Analyzer, TokenStream};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("search type {search_type} needs a {mode} index, none is loaded")]
    MissingIndex { search_type: SearchType, mode: IndexMode },
    #[error("{index} index supplied where a {expected} index is required")]
    WrongMode { index: IndexMode, expected: IndexMode },
    #[error("unknown search type {0:?} (expected R0, R1, R2 or R3)")]
    UnknownSearchType(String),
    #[error("query {qid}: {source}")]
    Query {
        qid: String,
        #[source]
        source: Box<EngineError>,
    },
    #[error("line {line}: {message}")]
    QueryFile { line: usize, message: String },
    #[error("duplicate query id {0:?}")]
    DuplicateQuery(String),
    #[error("{0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SearchType {
    R0,
    R1,
    R2,
    R3,
}

impl SearchType {
    pub const ALL: [SearchType; 4] = [SearchType::R0, SearchType::R1, SearchType::R2, SearchType::R3];

    pub fn index_mode(self) -> IndexMode {
        match self {
            SearchType::R0 | SearchType::R2 => IndexMode::Plain,
            SearchType::R1 | SearchType::R3 => IndexMode::Semantic,
        }
    }

    pub fn expands_query(self) -> bool {
        matches!(self, SearchType::R1 | SearchType::R2)
    }
}

impl fmt::Display for SearchType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for SearchType {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "R0" => Ok(SearchType::R0),
            "R1" => Ok(SearchType::R1),
            "R2" => Ok(SearchType::R2),
            "R3" => Ok(SearchType::R3),
            _ => Err(EngineError::UnknownSearchType(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub qid: String,
    pub text: String,
}

impl Query {
    pub fn new(qid: impl Into<String>, text: impl Into<String>) -> Self {
        Self { qid: qid.into(), text: text.into() }
    }
}

/// Reads a `qid<TAB>text` query file. Blank lines are skipped; qids must be
/// unique and free of whitespace.
pub fn read_queries<R: BufRead>(reader: R) -> Result<Vec<Query>, EngineError> {
    let mut queries = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (qid, text) = line
            .split_once('\t')
            .ok_or_else(|| EngineError::QueryFile { line: idx + 1, message: "expected qid<TAB>query".into() })?;
        let qid = qid.trim();
        if qid.is_empty() || qid.chars().any(char::is_whitespace) {
            return Err(EngineError::QueryFile { line: idx + 1, message: format!("invalid query id {qid:?}") });
        }
        if !seen.insert(qid.to_string()) {
            return Err(EngineError::DuplicateQuery(qid.to_string()));
        }
        queries.push(Query::new(qid, text));
    }
    Ok(queries)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedHit {
    pub doc_id: String,
    pub score: f64,
    /// 1-based.
    pub rank: usize,
}

/// One query's ranking.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankedList {
    pub qid: String,
    pub hits: Vec<RankedHit>,
    /// Size of the full match set, before any depth cut.
    pub found_count: usize,
}

impl RankedList {
    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.hits.iter().map(|h| h.doc_id.as_str())
    }

    /// Copy limited to the first `depth` hits; `found_count` is kept.
    pub fn truncated(&self, depth: Option<usize>) -> RankedList {
        let mut out = self.clone();
        if let Some(depth) = depth {
            out.hits.truncate(depth);
        }
        out
    }
}

/// Per-query rankings for one search type, in query-set order.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub search_type: SearchType,
    pub tag: String,
    pub lists: Vec<RankedList>,
}

impl Run {
    /// TREC run format: `qid Q0 doc_id rank score tag`, score to 6 places.
    pub fn write_trec<W: Write>(&self, mut out: W) -> io::Result<()> {
        for list in &self.lists {
            for hit in &list.hits {
                writeln!(out, "{} Q0 {} {} {:.6} {}", list.qid, hit.doc_id, hit.rank, hit.score, self.tag)?;
            }
        }
        Ok(())
    }

    pub fn trec_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_trec(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    /// The `{qid: found_count}` sidecar that carries pre-truncation counts.
    pub fn found_counts(&self) -> BTreeMap<String, usize> {
        self.lists.iter().map(|l| (l.qid.clone(), l.found_count)).collect()
    }

    pub fn found_sidecar_bytes(&self) -> Vec<u8> {
        let mut buf = serde_json::to_vec_pretty(&self.found_counts()).expect("map of strings to ints");
        buf.push(b'\n');
        buf
    }

    pub fn truncated(&self, depth: Option<usize>) -> Run {
        Run {
            search_type: self.search_type,
            tag: self.tag.clone(),
            lists: self.lists.iter().map(|l| l.truncated(depth)).collect(),
        }
    }
}

/// Everything needed to run queries: both indexes (either may be absent),
/// the lexicon used for expansion and the query-side analyzer.
#[derive(Debug)]
pub struct System {
    plain: Option<Index>,
    semantic: Option<Index>,
    lexicon: Lexicon,
    analyzer: Analyzer,
    max_concept_len: usize,
    workers: usize,
}

impl System {
    pub fn new(lexicon: Lexicon, analyzer: Analyzer) -> Self {
        Self { plain: None, semantic: None, lexicon, analyzer, max_concept_len: DEFAULT_MAX_CONCEPT_LEN, workers: 0 }
    }

    pub fn with_plain(mut self, index: Index) -> Result<Self, EngineError> {
        if index.mode() != IndexMode::Plain {
            return Err(EngineError::WrongMode { index: index.mode(), expected: IndexMode::Plain });
        }
        self.plain = Some(index);
        Ok(self)
    }

    pub fn with_semantic(mut self, index: Index) -> Result<Self, EngineError> {
        if index.mode() != IndexMode::Semantic {
            return Err(EngineError::WrongMode { index: index.mode(), expected: IndexMode::Semantic });
        }
        self.semantic = Some(index);
        Ok(self)
    }

    pub fn with_max_concept_len(mut self, max_len: usize) -> Self {
        self.max_concept_len = max_len;
        self
    }

    /// Threads used by [`System::batch_run`]; 0 picks the rayon default.
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    /// Set when the semantic index was built with a different lexicon than
    /// the one used for expansion.
    pub fn lexicon_warning(&self) -> Option<LexiconMismatch> {
        self.semantic.as_ref().and_then(|idx| idx.lexicon_mismatch(&self.lexicon))
    }

    fn index_for(&self, st: SearchType) -> Result<&Index, EngineError> {
        let index = match st.index_mode() {
            IndexMode::Plain => self.plain.as_ref(),
            IndexMode::Semantic => self.semantic.as_ref(),
        };
        index.ok_or(EngineError::MissingIndex { search_type: st, mode: st.index_mode() })
    }

    /// The query side of the pipeline: analyze, then expand for R1/R2.
    pub fn query_terms(&self, text: &str, st: SearchType) -> TokenStream {
        let tokens = self.analyzer.analyze(text);
        if st.expands_query() {
            expand(&tokens, &self.lexicon, self.max_concept_len)
        } else {
            tokens
        }
    }

    pub fn run_query(&self, q: &Query, st: SearchType, depth: Option<usize>) -> Result<RankedList, EngineError> {
        let index = self.index_for(st)?;
        let terms = self.query_terms(&q.text, st);
        let result = index.retrieve(&terms, depth);
        Ok(RankedList {
            qid: q.qid.clone(),
            hits: result
                .hits
                .into_iter()
                .enumerate()
                .map(|(i, h)| RankedHit { doc_id: h.doc_id, score: h.score, rank: i + 1 })
                .collect(),
            found_count: result.found_count,
        })
    }

    /// Runs every query; the output follows input order regardless of how
    /// many worker threads execute it.
    pub fn batch_run(
        &self,
        queries: &[Query],
        st: SearchType,
        depth: Option<usize>,
        tag: &str,
    ) -> Result<Run, EngineError> {
        let mut seen = HashSet::new();
        for q in queries {
            if !seen.insert(q.qid.as_str()) {
                return Err(EngineError::DuplicateQuery(q.qid.clone()));
            }
        }
        self.index_for(st)?;
        let run_one = |q: &Query| {
            self.run_query(q, st, depth).map_err(|e| EngineError::Query { qid: q.qid.clone(), source: Box::new(e) })
        };
        let lists: Result<Vec<_>, _> = if self.workers == 1 {
            queries.iter().map(run_one).collect()
        } else if self.workers == 0 {
            queries.par_iter().map(run_one).collect()
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(self.workers)
                .build()
                .map_err(|e| EngineError::Io(io::Error::other(e)))?;
            pool.install(|| queries.par_iter().map(run_one).collect())
        };
        Ok(Run { search_type: st, tag: tag.to_string(), lists: lists? })
    }
}
