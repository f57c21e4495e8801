//! WordNet-style lexical database: synsets, lemmas and monosemy queries.
//!
//! The on-disk format is JSONL, one synset per line:
//!
//! ```text
//! {"id": "s1", "pos": "n", "lemmas": ["خطيئة", "إثم"], "relations": [...]}
//! ```
//!
//! `relations` is accepted and ignored. Lemmas are run through the same
//! tokenizer as documents and re-joined with single spaces, so a lemma
//! matches a token window by plain string comparison.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{self, BufRead};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::textnorm::tokenize;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate synset id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: synset {id:?} has no usable lemmas")]
    EmptyLemmas { line: usize, id: String },
    #[error("line {line}: unknown part of speech {tag:?}")]
    UnknownPos { line: usize, tag: String },
    #[error("unknown synset id {0:?}")]
    UnknownSynset(String),
    #[error("reading lexicon: {0}")]
    Io(#[from] io::Error),
}

/// The four WordNet part-of-speech classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pos {
    Noun,
    Verb,
    Adjective,
    Adverb,
}

impl Pos {
    pub const ALL: [Pos; 4] = [Pos::Noun, Pos::Verb, Pos::Adjective, Pos::Adverb];

    pub fn tag(self) -> &'static str {
        match self {
            Pos::Noun => "n",
            Pos::Verb => "v",
            Pos::Adjective => "a",
            Pos::Adverb => "r",
        }
    }
}

impl FromStr for Pos {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "n" => Ok(Pos::Noun),
            "v" => Ok(Pos::Verb),
            "a" => Ok(Pos::Adjective),
            "r" => Ok(Pos::Adverb),
            other => Err(other.to_string()),
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// One sense: an id, a part of speech and its ordered synonyms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Synset {
    pub id: String,
    pub pos: Pos,
    pub lemmas: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LexiconStats {
    pub total_synsets: usize,
    pub per_pos: BTreeMap<Pos, usize>,
    /// Distinct normalized lemmas.
    pub total_words: usize,
}

#[derive(Deserialize)]
struct RawSynset {
    id: String,
    pos: String,
    lemmas: Vec<String>,
    #[serde(default)]
    #[allow(dead_code)]
    relations: Option<serde_json::Value>,
}

/// Immutable lemma ↔ synset store.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    synsets: Vec<Synset>,
    by_id: HashMap<String, usize>,
    inverted: HashMap<String, Vec<String>>,
    max_lemma_tokens: usize,
}

/// Normalizes a lemma the way document text is normalized: tokenize, then
/// join with single spaces. Returns `None` when nothing survives.
pub fn normalize_lemma(raw: &str) -> Option<String> {
    let tokens = tokenize(raw);
    if tokens.is_empty() {
        None
    } else {
        Some(tokens.join(" "))
    }
}

impl Lexicon {
    /// Parses lexicon JSONL. Blank lines are skipped and do not count as
    /// records.
    pub fn load<R: BufRead>(source: R) -> Result<Self, LexiconError> {
        let mut lex = Lexicon::default();
        for (idx, line) in source.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let raw: RawSynset = serde_json::from_str(&line)
                .map_err(|e| LexiconError::Malformed { line: line_no, message: e.to_string() })?;
            let pos = raw.pos.parse::<Pos>().map_err(|tag| LexiconError::UnknownPos { line: line_no, tag })?;
            if lex.by_id.contains_key(&raw.id) {
                return Err(LexiconError::DuplicateId { line: line_no, id: raw.id });
            }
            let mut lemmas: Vec<String> = Vec::with_capacity(raw.lemmas.len());
            for lemma in &raw.lemmas {
                let normalized = normalize_lemma(lemma).ok_or_else(|| LexiconError::Malformed {
                    line: line_no,
                    message: format!("lemma {lemma:?} is empty after normalization"),
                })?;
                // Spelling variants collapse under normalization; keep the first.
                if !lemmas.contains(&normalized) {
                    lemmas.push(normalized);
                }
            }
            if lemmas.is_empty() {
                return Err(LexiconError::EmptyLemmas { line: line_no, id: raw.id });
            }
            lex.insert(Synset { id: raw.id, pos, lemmas });
        }
        Ok(lex)
    }

    fn insert(&mut self, synset: Synset) {
        for lemma in &synset.lemmas {
            let width = lemma.split(' ').count();
            self.max_lemma_tokens = self.max_lemma_tokens.max(width);
            self.inverted.entry(lemma.clone()).or_default().push(synset.id.clone());
        }
        self.by_id.insert(synset.id.clone(), self.synsets.len());
        self.synsets.push(synset);
    }

    /// Synset ids containing `lemma`, in file order. Empty when unknown.
    pub fn synsets_of(&self, lemma: &str) -> &[String] {
        self.inverted.get(lemma).map(Vec::as_slice).unwrap_or(&[])
    }

    /// A lemma with exactly one sense. Unknown words have zero senses and
    /// are not monosemous.
    pub fn is_monosemous(&self, lemma: &str) -> bool {
        self.synsets_of(lemma).len() == 1
    }

    pub fn synset(&self, id: &str) -> Result<&Synset, LexiconError> {
        self.by_id.get(id).map(|&i| &self.synsets[i]).ok_or_else(|| LexiconError::UnknownSynset(id.to_string()))
    }

    /// The representative used when rewriting documents: the first stored
    /// lemma of the synset.
    pub fn canonical_lemma(&self, id: &str) -> Result<&str, LexiconError> {
        Ok(&self.synset(id)?.lemmas[0])
    }

    pub fn lemmas_of(&self, id: &str) -> Result<&[String], LexiconError> {
        Ok(&self.synset(id)?.lemmas)
    }

    /// Synsets in load order.
    pub fn synsets(&self) -> &[Synset] {
        &self.synsets
    }

    pub fn is_empty(&self) -> bool {
        self.synsets.is_empty()
    }

    pub fn contains_lemma(&self, lemma: &str) -> bool {
        self.inverted.contains_key(lemma)
    }

    /// Longest lemma, in tokens.
    pub fn max_lemma_tokens(&self) -> usize {
        self.max_lemma_tokens
    }

    /// Iterates the lemma → synset-ids map (unordered).
    pub fn inverted(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.inverted.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn stats(&self) -> LexiconStats {
        let mut per_pos: BTreeMap<Pos, usize> = Pos::ALL.iter().map(|&p| (p, 0)).collect();
        for synset in &self.synsets {
            *per_pos.entry(synset.pos).or_default() += 1;
        }
        LexiconStats { total_synsets: self.synsets.len(), per_pos, total_words: self.inverted.len() }
    }

    /// SHA-256 over the normalized synset content in load order. Two
    /// lexicons with the same digest drive semantization identically.
    pub fn digest(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        for synset in &self.synsets {
            hasher.update(synset.id.as_bytes());
            hasher.update([0x1f]);
            hasher.update(synset.pos.tag().as_bytes());
            for lemma in &synset.lemmas {
                hasher.update([0x1f]);
                hasher.update(lemma.as_bytes());
            }
            hasher.update(b"\n");
        }
        hasher.finalize().into()
    }
}
