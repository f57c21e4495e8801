//! Concept-based semantic indexing over a WordNet-style lexicon.
//!
//! Documents and queries are tokenized with Arabic-aware normalization,
//! lexicon concepts are found by longest match, and words with a single
//! sense are either replaced by a canonical synonym (documents) or expanded
//! with all their synonyms (queries). Four retrieval configurations combine
//! plain or semantic document indexes with raw or expanded queries, and the
//! evaluation kit compares them by found counts, deltas and precision.

pub mod cli;
pub mod engine;
pub mod evalkit;
pub mod index;
pub mod lexicon;
pub mod semantics;
pub mod textnorm;

pub use engine::{Query, RankedList, Run, SearchType, System};
pub use index::{Bm25, BuildOptions, Index, IndexMode};
pub use lexicon::{Lexicon, Pos, Synset};
pub use textnorm::{normalize, tokenize, Analyzer, TokenStream};
