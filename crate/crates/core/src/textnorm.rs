//! Arabic-aware normalization, tokenization and stopword filtering.
//!
//! The same pipeline is applied to documents, queries and lexicon lemmas so
//! that concept lookup reduces to exact string equality.

use std::collections::HashSet;
use std::fmt;
use std::io::BufRead;
use std::ops::Deref;
use std::sync::Arc;

use unicode_normalization::UnicodeNormalization;

const TATWEEL: char = '\u{0640}';
const ALEF: char = '\u{0627}';
const YEH: char = '\u{064A}';
const HEH: char = '\u{0647}';

/// Upper bound on normalization passes. Two passes reach the fixed point for
/// every input seen in practice; the bound only guards against pathological
/// composition chains.
const MAX_PASSES: usize = 8;

/// A set of normalized stopwords.
pub type Stoplist = HashSet<String>;

/// Normalizes `text`: NFC, tashkeel and tatweel removal, alef/yeh/teh-marbuta
/// folding and Latin lowercasing.
///
/// The result is a fixed point: `normalize(&normalize(x)) == normalize(x)`.
pub fn normalize(text: &str) -> String {
    let mut current = normalize_pass(text);
    for _ in 1..MAX_PASSES {
        let next = normalize_pass(&current);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

fn normalize_pass(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.nfc() {
        match ch {
            '\u{064B}'..='\u{0652}' | TATWEEL => {}
            '\u{0623}' | '\u{0625}' | '\u{0622}' => out.push(ALEF),
            '\u{0649}' => out.push(YEH),
            '\u{0629}' => out.push(HEH),
            c if is_latin(c) => out.push(lowercase_latin(c)),
            c => out.push(c),
        }
    }
    out
}

fn is_latin(ch: char) -> bool {
    matches!(ch, 'A'..='Z' | 'a'..='z' | '\u{00C0}'..='\u{024F}' | '\u{1E00}'..='\u{1EFF}')
}

// Only one-to-one case mappings are applied so normalization never grows
// the code point count.
fn lowercase_latin(ch: char) -> char {
    let mut lower = ch.to_lowercase();
    match (lower.next(), lower.next()) {
        (Some(l), None) => l,
        _ => ch,
    }
}

fn is_arabic_block(ch: char) -> bool {
    matches!(ch,
        '\u{0600}'..='\u{06FF}'
        | '\u{0750}'..='\u{077F}'
        | '\u{08A0}'..='\u{08FF}'
        | '\u{FB50}'..='\u{FDFF}'
        | '\u{FE70}'..='\u{FEFF}')
}

fn is_digit(ch: char) -> bool {
    ch.is_ascii_digit() || matches!(ch, '\u{0660}'..='\u{0669}' | '\u{06F0}'..='\u{06F9}')
}

/// True for characters that belong to a token: Arabic letters (including
/// the combining marks Unicode classes as alphabetic), Latin letters and
/// ASCII or Arabic-Indic digits. Everything else separates tokens.
pub fn is_token_char(ch: char) -> bool {
    is_digit(ch) || (ch.is_alphabetic() && (is_arabic_block(ch) || is_latin(ch)))
}

/// An ordered sequence of normalized, non-empty, whitespace-free tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenStream(Vec<String>);

impl TokenStream {
    pub fn new() -> Self {
        Self::default()
    }

    /// Wraps tokens that are already normalized. Callers are responsible for
    /// the invariant; use [`tokenize`] for raw text.
    pub fn from_normalized<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self(tokens.into_iter().map(Into::into).collect())
    }

    pub fn push(&mut self, token: String) {
        self.0.push(token);
    }

    pub fn into_vec(self) -> Vec<String> {
        self.0
    }
}

impl Deref for TokenStream {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl fmt::Display for TokenStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

impl<'a> IntoIterator for &'a TokenStream {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Splits `text` into normalized tokens.
///
/// The text is normalized before splitting so that diacritics never break a
/// word apart; each token is then re-normalized in isolation.
pub fn tokenize(text: &str) -> TokenStream {
    let normalized = normalize(text);
    let tokens = normalized
        .split(|c: char| !is_token_char(c))
        .filter(|t| !t.is_empty())
        .map(normalize)
        .filter(|t| !t.is_empty())
        .collect();
    TokenStream(tokens)
}

/// Order-preserving removal of stoplist entries.
pub fn remove_stopwords(ts: TokenStream, stoplist: &Stoplist) -> TokenStream {
    if stoplist.is_empty() {
        return ts;
    }
    TokenStream(ts.0.into_iter().filter(|t| !stoplist.contains(t)).collect())
}

/// Reads a stopword file: one token per line, blank lines ignored. Entries
/// are normalized on the way in.
pub fn read_stoplist<R: BufRead>(reader: R) -> std::io::Result<Stoplist> {
    let mut stoplist = Stoplist::new();
    for line in reader.lines() {
        let entry = normalize(line?.trim());
        if !entry.is_empty() {
            stoplist.insert(entry);
        }
    }
    Ok(stoplist)
}

/// Hook for a light stemmer applied after stopword removal.
pub trait Stemmer: Send + Sync {
    fn stem(&self, token: &str) -> String;
}

/// The full text pipeline: tokenize, drop stopwords, optionally stem.
///
/// No stemmer is installed by default; stemming changes which surface
/// forms reach the lexicon and therefore which words count as monosemous.
#[derive(Clone, Default)]
pub struct Analyzer {
    stoplist: Stoplist,
    stemmer: Option<Arc<dyn Stemmer>>,
}

impl Analyzer {
    pub fn new(stoplist: Stoplist) -> Self {
        Self { stoplist, stemmer: None }
    }

    pub fn with_stemmer(mut self, stemmer: Arc<dyn Stemmer>) -> Self {
        self.stemmer = Some(stemmer);
        self
    }

    pub fn stoplist(&self) -> &Stoplist {
        &self.stoplist
    }

    pub fn analyze(&self, text: &str) -> TokenStream {
        let ts = remove_stopwords(tokenize(text), &self.stoplist);
        match &self.stemmer {
            None => ts,
            Some(stemmer) => {
                TokenStream(ts.0.iter().map(|t| normalize(&stemmer.stem(t))).filter(|t| !t.is_empty()).collect())
            }
        }
    }
}

impl fmt::Debug for Analyzer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Analyzer")
            .field("stopwords", &self.stoplist.len())
            .field("stemmer", &self.stemmer.is_some())
            .finish()
    }
}
