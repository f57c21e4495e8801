//! Concept extraction and the two concept-level rewrites.
//!
//! Documents are *semantized*: every monosemous concept occurrence is
//! replaced by its synset's canonical lemma. Queries are *expanded*: the
//! original tokens are kept and the synonyms of each monosemous concept are
//! appended. Polysemous and unknown words are never touched.

use crate::lexicon::Lexicon;
use crate::textnorm::TokenStream;

/// Default longest multiword lemma considered during matching, in tokens.
pub const DEFAULT_MAX_CONCEPT_LEN: usize = 4;

/// A lexicon lemma found in a token stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptMatch {
    /// Token span, half-open.
    pub start: usize,
    pub end: usize,
    pub surface_lemma: String,
    pub synset_ids: Vec<String>,
    pub monosemous: bool,
}

/// Greedy left-to-right longest match of lexicon lemmas over `tokens`.
///
/// At each position windows of `max_len` down to 1 tokens are tried; the
/// first that is a lemma becomes a match and scanning resumes after it.
/// A `max_len` of 0 is treated as 1.
pub fn match_concepts(tokens: &[String], lex: &Lexicon, max_len: usize) -> Vec<ConceptMatch> {
    let max_len = max_len.max(1).min(lex.max_lemma_tokens().max(1));
    let mut matches = Vec::new();
    if lex.is_empty() {
        return matches;
    }
    let mut pos = 0;
    while pos < tokens.len() {
        let widest = max_len.min(tokens.len() - pos);
        let found = (1..=widest).rev().find_map(|width| {
            let window = tokens[pos..pos + width].join(" ");
            let ids = lex.synsets_of(&window);
            (!ids.is_empty()).then_some((width, window, ids))
        });
        match found {
            Some((width, surface_lemma, ids)) => {
                matches.push(ConceptMatch {
                    start: pos,
                    end: pos + width,
                    surface_lemma,
                    synset_ids: ids.to_vec(),
                    monosemous: ids.len() == 1,
                });
                pos += width;
            }
            None => pos += 1,
        }
    }
    matches
}

/// Document-side rewrite: monosemous concepts are replaced by the tokens of
/// their canonical lemma; everything else passes through in order.
pub fn semantize(ts: &TokenStream, lex: &Lexicon, max_len: usize) -> TokenStream {
    let mut out = TokenStream::new();
    let mut cursor = 0;
    for m in match_concepts(ts, lex, max_len).into_iter().filter(|m| m.monosemous) {
        for token in &ts[cursor..m.start] {
            out.push(token.clone());
        }
        let canonical = lex.canonical_lemma(&m.synset_ids[0]).expect("match ids come from the same lexicon");
        for token in canonical.split(' ') {
            out.push(token.to_string());
        }
        cursor = m.end;
    }
    for token in &ts[cursor..] {
        out.push(token.clone());
    }
    out
}

/// Query-side rewrite: the input tokens, followed by every synonym of each
/// monosemous concept that is not already present in the output. A
/// multiword synonym counts as present when its tokens already occur
/// contiguously.
pub fn expand(ts: &TokenStream, lex: &Lexicon, max_len: usize) -> TokenStream {
    let mut out = ts.clone();
    for m in match_concepts(ts, lex, max_len).into_iter().filter(|m| m.monosemous) {
        let lemmas = lex.lemmas_of(&m.synset_ids[0]).expect("match ids come from the same lexicon");
        for lemma in lemmas {
            let parts: Vec<&str> = lemma.split(' ').collect();
            if !contains_window(&out, &parts) {
                for part in parts {
                    out.push(part.to_string());
                }
            }
        }
    }
    out
}

fn contains_window(haystack: &[String], needle: &[&str]) -> bool {
    haystack.windows(needle.len()).any(|w| w.iter().zip(needle).all(|(a, b)| a == b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lex(lines: &[&str]) -> Lexicon {
        Lexicon::load(lines.join("\n").as_bytes()).unwrap()
    }

    fn ithm() -> Lexicon {
        lex(&[r#"{"id":"sin","pos":"n","lemmas":["خطيئة","إثم"]}"#])
    }

    fn ts(tokens: &[&str]) -> TokenStream {
        TokenStream::from_normalized(tokens.iter().copied())
    }

    #[test]
    fn single_token_match() {
        let m = match_concepts(&ts(&["اثم"]), &ithm(), 4);
        assert_eq!(m.len(), 1);
        assert_eq!((m[0].start, m[0].end), (0, 1));
        assert_eq!(m[0].surface_lemma, "اثم");
        assert_eq!(m[0].synset_ids, ["sin"]);
        assert!(m[0].monosemous);
        assert!(match_concepts(&ts(&["مجهول"]), &ithm(), 4).is_empty());
    }

    /// Every way to cover `tokens` with lexicon lemmas and single unmatched
    /// tokens, as lists of (start, end, is_lemma).
    fn segmentations(tokens: &[String], lex: &Lexicon, max_len: usize) -> Vec<Vec<(usize, usize, bool)>> {
        fn go(
            pos: usize,
            tokens: &[String],
            lex: &Lexicon,
            max_len: usize,
            acc: &mut Vec<(usize, usize, bool)>,
            out: &mut Vec<Vec<(usize, usize, bool)>>,
        ) {
            if pos == tokens.len() {
                out.push(acc.clone());
                return;
            }
            for w in 1..=max_len.min(tokens.len() - pos) {
                let is_lemma = lex.contains_lemma(&tokens[pos..pos + w].join(" "));
                if w == 1 || is_lemma {
                    acc.push((pos, pos + w, is_lemma));
                    go(pos + w, tokens, lex, max_len, acc, out);
                    acc.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(0, tokens, lex, max_len, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn longest_match_wins() {
        let lex = lex(&[r#"{"id":"xy","pos":"n","lemmas":["x y"]}"#, r#"{"id":"x","pos":"n","lemmas":["x"]}"#]);
        let input = ts(&["x", "y"]);
        let segs = segmentations(&input, &lex, 4);
        // ["x y"] as one concept, or "x" + unmatched "y", or both unmatched.
        assert_eq!(segs.len(), 2);
        // Greedy picks the segmentation whose first lemma is longest.
        let greedy = segs.iter().max_by_key(|s| s.iter().map(|&(a, b, l)| if l { b - a } else { 0 }).max()).unwrap();
        let m = match_concepts(&input, &lex, 4);
        let got: Vec<_> = m.iter().map(|m| (m.start, m.end, true)).collect();
        assert_eq!(&got, greedy);
        assert_eq!(m[0].surface_lemma, "x y");
    }

    #[test]
    fn max_len_limits_windows() {
        let lex = lex(&[r#"{"id":"xy","pos":"n","lemmas":["x y"]}"#, r#"{"id":"x","pos":"n","lemmas":["x"]}"#]);
        let m = match_concepts(&ts(&["x", "y"]), &lex, 1);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].surface_lemma, "x");
        assert_eq!(match_concepts(&ts(&["x", "y"]), &lex, 0).len(), 1);
    }

    #[test]
    fn semantize_replaces_with_canonical() {
        assert_eq!(semantize(&ts(&["اثم"]), &ithm(), 4), ts(&["خطيئه"]));
        assert_eq!(semantize(&ts(&["كبير", "اثم", "جدا"]), &ithm(), 4), ts(&["كبير", "خطيئه", "جدا"]));
    }

    #[test]
    fn semantize_keeps_polysemous() {
        let lex = lex(&[r#"{"id":"a","pos":"n","lemmas":["p","q"]}"#, r#"{"id":"b","pos":"v","lemmas":["q","r"]}"#]);
        assert_eq!(semantize(&ts(&["q", "r"]), &lex, 4), ts(&["q", "q"]));
        // "q" is in two synsets and stays; "r" is monosemous and becomes "q".
        assert_eq!(expand(&ts(&["q"]), &lex, 4), ts(&["q"]));
    }

    #[test]
    fn semantize_multiword_canonical() {
        let lex = lex(&[r#"{"id":"a","pos":"n","lemmas":["دار الافتاء","مفتيه"]}"#]);
        assert_eq!(semantize(&ts(&["زار", "مفتيه"]), &lex, 4), ts(&["زار", "دار", "الافتاء"]));
    }

    #[test]
    fn replacement_can_complete_a_multiword_lemma() {
        // "x" becomes "p", and "p q" is itself a lemma of another synset, so
        // a second pass rewrites further. A single pass never looks back.
        let lex = lex(&[r#"{"id":"a","pos":"n","lemmas":["p","x"]}"#, r#"{"id":"b","pos":"n","lemmas":["z","p q"]}"#]);
        let once = semantize(&ts(&["x", "q"]), &lex, 4);
        assert_eq!(once, ts(&["p", "q"]));
        assert_eq!(semantize(&once, &lex, 4), ts(&["z"]));
    }

    #[test]
    fn expand_appends_synonyms() {
        assert_eq!(expand(&ts(&["اثم"]), &ithm(), 4), ts(&["اثم", "خطيئه"]));
        assert_eq!(expand(&ts(&["مجهول"]), &ithm(), 4), ts(&["مجهول"]));
        // Already-present synonyms are not repeated.
        assert_eq!(expand(&ts(&["اثم", "خطيئه"]), &ithm(), 4), ts(&["اثم", "خطيئه"]));
    }

    #[test]
    fn expand_multiword_contiguous() {
        let lex = lex(&[r#"{"id":"a","pos":"n","lemmas":["مفتيه","دار الافتاء"]}"#]);
        assert_eq!(expand(&ts(&["مفتيه"]), &lex, 4), ts(&["مفتيه", "دار", "الافتاء"]));
    }

    #[test]
    fn empty_lexicon_is_identity() {
        let empty = Lexicon::default();
        let x = ts(&["اثم", "خطيئه", "x"]);
        assert_eq!(semantize(&x, &empty, 4), x);
        assert_eq!(expand(&x, &empty, 4), x);
    }

    // Random fixtures over a small vocabulary so that collisions, shared
    // lemmas and polysemy are frequent.
    const VOCAB: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

    fn lexicon_strategy() -> impl Strategy<Value = Lexicon> {
        let lemma = proptest::sample::select(VOCAB.to_vec());
        proptest::collection::vec(proptest::collection::vec(lemma, 1..4), 0..6).prop_map(|synsets| {
            let lines: Vec<String> = synsets
                .iter()
                .enumerate()
                .map(|(i, lemmas)| serde_json::json!({"id": format!("s{i}"), "pos": "n", "lemmas": lemmas}).to_string())
                .collect();
            Lexicon::load(lines.join("\n").as_bytes()).unwrap()
        })
    }

    fn stream_strategy() -> impl Strategy<Value = TokenStream> {
        proptest::collection::vec(
            proptest::sample::select(VOCAB.iter().chain(&["z"]).copied().collect::<Vec<_>>()),
            0..12,
        )
        .prop_map(TokenStream::from_normalized)
    }

    proptest! {
        #[test]
        fn matches_are_sorted_and_disjoint(lex in lexicon_strategy(), x in stream_strategy()) {
            let ms = match_concepts(&x, &lex, 4);
            for pair in ms.windows(2) {
                prop_assert!(pair[0].end <= pair[1].start);
            }
            for m in &ms {
                prop_assert_eq!(m.monosemous, m.synset_ids.len() == 1);
                prop_assert_eq!(m.end - m.start, m.surface_lemma.split(' ').count());
            }
        }

        #[test]
        fn semantize_is_idempotent(lex in lexicon_strategy(), x in stream_strategy()) {
            let once = semantize(&x, &lex, 4);
            prop_assert_eq!(semantize(&once, &lex, 4), once);
        }

        #[test]
        fn semantize_leaves_non_monosemous_tokens(lex in lexicon_strategy(), x in stream_strategy()) {
            let out = semantize(&x, &lex, 4);
            // Single-token lemmas only: replacement is one-for-one.
            prop_assert_eq!(out.len(), x.len());
            for (a, b) in x.iter().zip(out.iter()) {
                if !lex.is_monosemous(a) {
                    prop_assert_eq!(a, b);
                }
            }
        }

        #[test]
        fn expand_keeps_prefix(lex in lexicon_strategy(), x in stream_strategy()) {
            let out = expand(&x, &lex, 4);
            prop_assert!(out.len() >= x.len());
            prop_assert_eq!(&out[..x.len()], &x[..]);
        }

        #[test]
        fn expanded_query_meets_semantized_doc(lex in lexicon_strategy(), pick in 0usize..64) {
            // Pick a synset and two of its monosemous lemmas, put one in the
            // query and the other in a document.
            let candidates: Vec<(&str, &str)> = lex
                .synsets()
                .iter()
                .flat_map(|s| {
                    let mono: Vec<&str> = s.lemmas.iter().map(String::as_str).filter(|l| lex.is_monosemous(l)).collect();
                    mono.iter().flat_map(|&a| mono.iter().map(move |&b| (a, b))).collect::<Vec<_>>()
                })
                .collect();
            prop_assume!(!candidates.is_empty());
            let (a, b) = candidates[pick % candidates.len()];
            let q = expand(&ts(&["z", a, "z"]), &lex, 4);
            let d = semantize(&ts(&["z", b, "z"]), &lex, 4);
            prop_assert!(q.iter().any(|t| t != "z" && d.contains(t)));
        }
    }
}
