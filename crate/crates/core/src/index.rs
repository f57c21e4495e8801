//! Inverted index with BM25 ranking and a checksummed binary file format.
//!
//! Documents are ordered by id; internally a document is its position in
//! that order, so posting lists sorted by ordinal are also sorted by id.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::lexicon::Lexicon;
use crate::semantics::semantize;
use crate::textnorm::{Analyzer, TokenStream};

const MAGIC: &[u8; 8] = b"SEMIDX\0\0";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 1 + 1 + 32 + 8 + 8;
const CHECKSUM_LEN: usize = 32;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("duplicate document id {0:?}")]
    DuplicateDoc(String),
    #[error("unknown document id {0:?}")]
    UnknownDoc(String),
    #[error("not an index file (bad magic)")]
    BadMagic,
    #[error("index format version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("index checksum mismatch")]
    Checksum,
    #[error("index file is truncated")]
    Truncated,
    #[error("corrupt index: {0}")]
    Corrupt(String),
    #[error("{0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexMode {
    Plain,
    Semantic,
}

impl IndexMode {
    fn code(self) -> u8 {
        match self {
            IndexMode::Plain => 0,
            IndexMode::Semantic => 1,
        }
    }
}

impl fmt::Display for IndexMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IndexMode::Plain => "plain",
            IndexMode::Semantic => "semantic",
        })
    }
}

impl FromStr for IndexMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "plain" => Ok(IndexMode::Plain),
            "semantic" => Ok(IndexMode::Semantic),
            other => Err(format!("unknown index mode {other:?} (expected plain or semantic)")),
        }
    }
}

/// BM25 parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25 {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25 {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

impl Bm25 {
    /// `ln(1 + (N - df + 0.5) / (df + 0.5))`; positive for every df ≤ N.
    pub fn idf(&self, doc_count: usize, df: usize) -> f64 {
        let n = doc_count as f64;
        let df = df as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    pub fn term_weight(&self, idf: f64, tf: u32, doc_len: u32, avg_len: f64) -> f64 {
        let tf = f64::from(tf);
        let norm = if avg_len > 0.0 { f64::from(doc_len) / avg_len } else { 0.0 };
        idf * tf * (self.k1 + 1.0) / (tf + self.k1 * (1.0 - self.b + self.b * norm))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    /// Ordinal of the document in id order.
    pub doc: u32,
    pub tf: u32,
}

/// One input document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusDoc {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedDoc {
    pub line: usize,
    pub reason: String,
}

/// Outcome of a build, written next to the index by the CLI.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BuildReport {
    pub docs_indexed: usize,
    pub docs_skipped: usize,
    pub vocabulary_size: usize,
    pub skipped: Vec<SkippedDoc>,
}

/// Reads corpus JSONL (`{"id": ..., "text": ...}` per line). Lines that do
/// not parse, or whose id is empty or contains whitespace, are skipped and
/// reported instead of failing the whole read.
pub fn read_corpus<R: BufRead>(reader: R) -> io::Result<(Vec<CorpusDoc>, Vec<SkippedDoc>)> {
    let mut docs = Vec::new();
    let mut skipped = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<CorpusDoc>(&line) {
            Ok(doc) if doc.id.is_empty() || doc.id.chars().any(char::is_whitespace) => {
                skipped.push(SkippedDoc { line: idx + 1, reason: format!("invalid document id {:?}", doc.id) })
            }
            Ok(doc) => docs.push(doc),
            Err(e) => skipped.push(SkippedDoc { line: idx + 1, reason: e.to_string() }),
        }
    }
    Ok((docs, skipped))
}

/// Everything a build needs besides the documents.
#[derive(Debug, Clone, Copy)]
pub struct BuildOptions<'a> {
    pub mode: IndexMode,
    pub lexicon: &'a Lexicon,
    pub analyzer: &'a Analyzer,
    pub max_concept_len: usize,
}

impl BuildOptions<'_> {
    /// The document-side pipeline: analyze, then semantize in Semantic mode.
    pub fn process(&self, text: &str) -> TokenStream {
        let tokens = self.analyzer.analyze(text);
        match self.mode {
            IndexMode::Plain => tokens,
            IndexMode::Semantic => semantize(&tokens, self.lexicon, self.max_concept_len),
        }
    }
}

/// A ranked hit from [`Index::retrieve`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDoc {
    pub doc_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SearchResult {
    pub hits: Vec<ScoredDoc>,
    /// Number of documents with a positive score, before any truncation.
    pub found_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Index {
    mode: IndexMode,
    lexicon_digest: Option<[u8; 32]>,
    doc_ids: Vec<String>,
    doc_lengths: Vec<u32>,
    total_length: u64,
    postings: BTreeMap<String, Vec<Posting>>,
    bm25: Bm25,
}

/// Warning raised when a semantic index was built with a different lexicon
/// than the one about to be used for query expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconMismatch {
    pub index_digest: String,
    pub lexicon_digest: String,
}

impl fmt::Display for LexiconMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "semantic index was built with lexicon {} but lexicon {} is loaded",
            short(&self.index_digest),
            short(&self.lexicon_digest)
        )
    }
}

fn short(digest: &str) -> &str {
    &digest[..digest.len().min(12)]
}

impl Index {
    /// Builds an index serially.
    pub fn build(docs: Vec<CorpusDoc>, opts: BuildOptions<'_>) -> Result<(Self, BuildReport), IndexError> {
        Self::build_with_workers(docs, opts, 1)
    }

    /// Builds an index, processing documents on `workers` threads (0 picks
    /// the rayon default). The result does not depend on the worker count.
    pub fn build_with_workers(
        mut docs: Vec<CorpusDoc>,
        opts: BuildOptions<'_>,
        workers: usize,
    ) -> Result<(Self, BuildReport), IndexError> {
        let mut seen = HashSet::with_capacity(docs.len());
        for doc in &docs {
            if !seen.insert(doc.id.as_str()) {
                return Err(IndexError::DuplicateDoc(doc.id.clone()));
            }
        }
        drop(seen);
        docs.sort_by(|a, b| a.id.cmp(&b.id));

        let count_terms = |doc: &CorpusDoc| -> (u32, BTreeMap<String, u32>) {
            let tokens = opts.process(&doc.text);
            let mut counts = BTreeMap::new();
            for token in tokens.iter() {
                *counts.entry(token.clone()).or_insert(0u32) += 1;
            }
            (tokens.len() as u32, counts)
        };
        let per_doc: Vec<(u32, BTreeMap<String, u32>)> = if workers == 1 {
            docs.iter().map(count_terms).collect()
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| IndexError::Io(io::Error::other(e)))?;
            pool.install(|| docs.par_iter().map(count_terms).collect())
        };

        // Merge in ordinal order; posting lists come out sorted by doc id.
        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut doc_lengths = Vec::with_capacity(docs.len());
        let mut total_length = 0u64;
        for (ordinal, (len, counts)) in per_doc.into_iter().enumerate() {
            doc_lengths.push(len);
            total_length += u64::from(len);
            for (term, tf) in counts {
                postings.entry(term).or_default().push(Posting { doc: ordinal as u32, tf });
            }
        }

        let index = Index {
            mode: opts.mode,
            lexicon_digest: (opts.mode == IndexMode::Semantic).then(|| opts.lexicon.digest()),
            doc_ids: docs.into_iter().map(|d| d.id).collect(),
            doc_lengths,
            total_length,
            postings,
            bm25: Bm25::default(),
        };
        let report = BuildReport {
            docs_indexed: index.doc_count(),
            docs_skipped: 0,
            vocabulary_size: index.vocabulary_size(),
            skipped: Vec::new(),
        };
        Ok((index, report))
    }

    pub fn mode(&self) -> IndexMode {
        self.mode
    }

    pub fn lexicon_digest(&self) -> Option<&[u8; 32]> {
        self.lexicon_digest.as_ref()
    }

    pub fn bm25(&self) -> Bm25 {
        self.bm25
    }

    pub fn set_bm25(&mut self, params: Bm25) {
        self.bm25 = params;
    }

    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn vocabulary_size(&self) -> usize {
        self.postings.len()
    }

    pub fn average_doc_length(&self) -> f64 {
        if self.doc_ids.is_empty() {
            0.0
        } else {
            self.total_length as f64 / self.doc_ids.len() as f64
        }
    }

    /// Document ids in ascending order.
    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn doc_length(&self, doc_id: &str) -> Option<u32> {
        self.ordinal(doc_id).map(|i| self.doc_lengths[i])
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Terms in lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    fn ordinal(&self, doc_id: &str) -> Option<usize> {
        self.doc_ids.binary_search_by(|id| id.as_str().cmp(doc_id)).ok()
    }

    /// Compares the index's recorded lexicon with `lex`. Plain indexes never
    /// mismatch.
    pub fn lexicon_mismatch(&self, lex: &Lexicon) -> Option<LexiconMismatch> {
        let recorded = self.lexicon_digest?;
        let current = lex.digest();
        (recorded != current)
            .then(|| LexiconMismatch { index_digest: hex::encode(recorded), lexicon_digest: hex::encode(current) })
    }

    fn term_weights<'a>(&'a self, query: &'a [String]) -> impl Iterator<Item = (f64, &'a [Posting])> + 'a {
        query.iter().filter_map(move |term| {
            self.postings.get(term).map(|list| (self.bm25.idf(self.doc_count(), list.len()), list.as_slice()))
        })
    }

    /// BM25 score of one document. Repeated query terms contribute once per
    /// occurrence.
    pub fn score(&self, query: &[String], doc_id: &str) -> Result<f64, IndexError> {
        let ordinal = self.ordinal(doc_id).ok_or_else(|| IndexError::UnknownDoc(doc_id.to_string()))? as u32;
        let avg = self.average_doc_length();
        let len = self.doc_lengths[ordinal as usize];
        let mut score = 0.0;
        for (idf, list) in self.term_weights(query) {
            if let Ok(pos) = list.binary_search_by_key(&ordinal, |p| p.doc) {
                score += self.bm25.term_weight(idf, list[pos].tf, len, avg);
            }
        }
        Ok(score)
    }

    /// Disjunctive retrieval: every document containing at least one query
    /// term, by descending score, ties by ascending id. `depth` truncates the
    /// hit list but not `found_count`.
    pub fn retrieve(&self, query: &[String], depth: Option<usize>) -> SearchResult {
        let avg = self.average_doc_length();
        let mut acc = vec![0.0f64; self.doc_count()];
        let mut touched: Vec<u32> = Vec::new();
        for (idf, list) in self.term_weights(query) {
            for p in list {
                let slot = &mut acc[p.doc as usize];
                if *slot == 0.0 {
                    touched.push(p.doc);
                }
                *slot += self.bm25.term_weight(idf, p.tf, self.doc_lengths[p.doc as usize], avg);
            }
        }
        let mut ranked: Vec<(u32, f64)> =
            touched.into_iter().map(|d| (d, acc[d as usize])).filter(|&(_, s)| s > 0.0).collect();
        ranked.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let found_count = ranked.len();
        if let Some(depth) = depth {
            ranked.truncate(depth);
        }
        SearchResult {
            hits: ranked
                .into_iter()
                .map(|(d, score)| ScoredDoc { doc_id: self.doc_ids[d as usize].clone(), score })
                .collect(),
            found_count,
        }
    }

    /// Serializes to the versioned binary format.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut body = Vec::new();
        for (id, len) in self.doc_ids.iter().zip(&self.doc_lengths) {
            put_str(&mut body, id);
            body.extend_from_slice(&len.to_le_bytes());
        }
        body.extend_from_slice(&(self.postings.len() as u64).to_le_bytes());
        for (term, list) in &self.postings {
            put_str(&mut body, term);
            body.extend_from_slice(&(list.len() as u32).to_le_bytes());
            for p in list {
                body.extend_from_slice(&p.doc.to_le_bytes());
                body.extend_from_slice(&p.tf.to_le_bytes());
            }
        }

        let mut out = Vec::with_capacity(HEADER_LEN + body.len() + CHECKSUM_LEN);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.push(self.mode.code());
        out.push(u8::from(self.lexicon_digest.is_some()));
        out.extend_from_slice(&self.lexicon_digest.unwrap_or([0; 32]));
        out.extend_from_slice(&(self.doc_ids.len() as u64).to_le_bytes());
        out.extend_from_slice(&(body.len() as u64).to_le_bytes());
        out.extend_from_slice(&body);
        let checksum = Sha256::digest(&out);
        out.extend_from_slice(&checksum);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IndexError> {
        if bytes.len() < MAGIC.len() {
            return Err(IndexError::Truncated);
        }
        if &bytes[..MAGIC.len()] != MAGIC {
            return Err(IndexError::BadMagic);
        }
        let mut header = Cursor::new(&bytes[MAGIC.len()..]);
        let version = header.u32()?;
        if version != FORMAT_VERSION {
            return Err(IndexError::Version { found: version, expected: FORMAT_VERSION });
        }
        let mode = match header.u8()? {
            0 => IndexMode::Plain,
            1 => IndexMode::Semantic,
            other => return Err(IndexError::Corrupt(format!("mode byte {other}"))),
        };
        let has_digest = header.u8()? != 0;
        let digest: [u8; 32] = header.take(32)?.try_into().expect("32 bytes");
        let doc_count = header.u64()? as usize;
        let body_len = header.u64()? as usize;

        let expected_len =
            HEADER_LEN.checked_add(body_len).and_then(|n| n.checked_add(CHECKSUM_LEN)).ok_or(IndexError::Truncated)?;
        if bytes.len() < expected_len {
            return Err(IndexError::Truncated);
        }
        if bytes.len() > expected_len {
            return Err(IndexError::Corrupt("trailing bytes".into()));
        }
        let (payload, checksum) = bytes.split_at(HEADER_LEN + body_len);
        if Sha256::digest(payload).as_slice() != checksum {
            return Err(IndexError::Checksum);
        }

        let mut body = Cursor::new(&payload[HEADER_LEN..]);
        let mut doc_ids = Vec::with_capacity(doc_count);
        let mut doc_lengths = Vec::with_capacity(doc_count);
        let mut total_length = 0u64;
        for _ in 0..doc_count {
            doc_ids.push(body.string()?);
            let len = body.u32()?;
            total_length += u64::from(len);
            doc_lengths.push(len);
        }
        if doc_ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(IndexError::Corrupt("document ids out of order".into()));
        }
        let term_count = body.u64()?;
        let mut postings = BTreeMap::new();
        for _ in 0..term_count {
            let term = body.string()?;
            let n = body.u32()? as usize;
            let mut list = Vec::with_capacity(n.min(doc_count));
            for _ in 0..n {
                let doc = body.u32()?;
                let tf = body.u32()?;
                if doc as usize >= doc_count || tf == 0 {
                    return Err(IndexError::Corrupt(format!("bad posting in {term:?}")));
                }
                list.push(Posting { doc, tf });
            }
            postings.insert(term, list);
        }
        if !body.is_empty() {
            return Err(IndexError::Corrupt("unread body bytes".into()));
        }
        Ok(Index {
            mode,
            lexicon_digest: has_digest.then_some(digest),
            doc_ids,
            doc_lengths,
            total_length,
            postings,
            bm25: Bm25::default(),
        })
    }

    /// Writes the index atomically: a sibling temp file is renamed into
    /// place, so a failed save never leaves a partial file at `path`.
    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        write_atomic(path, &self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, IndexError> {
        Self::from_bytes(&fs::read(path)?)
    }

    /// Human-readable dump for debugging and diffing.
    pub fn to_json(&self) -> serde_json::Value {
        let doc_lengths: BTreeMap<&str, u32> =
            self.doc_ids.iter().map(String::as_str).zip(self.doc_lengths.iter().copied()).collect();
        let postings: BTreeMap<&str, Vec<(&str, u32)>> = self
            .postings
            .iter()
            .map(|(t, list)| (t.as_str(), list.iter().map(|p| (self.doc_ids[p.doc as usize].as_str(), p.tf)).collect()))
            .collect();
        serde_json::json!({
            "format_version": FORMAT_VERSION,
            "mode": self.mode,
            "lexicon_digest": self.lexicon_digest.map(hex::encode),
            "doc_count": self.doc_count(),
            "average_doc_length": self.average_doc_length(),
            "doc_lengths": doc_lengths,
            "postings": postings,
        })
    }
}

/// Writes `bytes` to `path` through a temp file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let file_name =
        path.file_name().ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

struct Cursor<'a> {
    buf: &'a [u8],
}

impl<'a> Cursor<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], IndexError> {
        if self.buf.len() < n {
            return Err(IndexError::Truncated);
        }
        let (head, rest) = self.buf.split_at(n);
        self.buf = rest;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, IndexError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, IndexError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, IndexError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn string(&mut self) -> Result<String, IndexError> {
        let len = self.u32()? as usize;
        String::from_utf8(self.take(len)?.to_vec()).map_err(|e| IndexError::Corrupt(e.to_string()))
    }

    fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }
}
