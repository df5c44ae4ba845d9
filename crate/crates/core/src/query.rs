//! Turning debate questions into PRO and CON search queries.
//!
//! The question is tokenized, its root (first main verb) is located with a
//! verb lexicon, punctuation and the root are dropped, and only words with a
//! Zipf frequency below the threshold survive. The root is then put back in
//! front. CON queries are the same terms behind a leading `not`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::{Stance, Topic};

pub const DEFAULT_ZIPF_THRESHOLD: f64 = 5.6;

/// Auxiliary verbs; never chosen as root.
pub const AUX_VERBS: [&str; 21] = [
    "do", "does", "did", "is", "are", "was", "were", "be", "been", "can", "could", "should",
    "would", "will", "shall", "may", "might", "must", "have", "has", "had",
];

static DEFAULT_VERBS: &str = include_str!("../resources/verbs_en.txt");
static DEFAULT_ZIPF: &str = include_str!("../resources/zipf_en.tsv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub is_punct: bool,
    pub is_verb: bool,
    pub is_aux: bool,
}

/// Main-verb lexicon. Auxiliaries are handled separately and always count as
/// verbs.
#[derive(Debug, Clone, Default)]
pub struct VerbLexicon {
    verbs: BTreeSet<String>,
}

impl VerbLexicon {
    /// One word per line; blank lines and `#` comments are ignored.
    pub fn from_lines(text: &str) -> Self {
        let verbs = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        Self { verbs }
    }

    pub fn english() -> Self {
        Self::from_lines(DEFAULT_VERBS)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.verbs.contains(word)
    }

    pub fn len(&self) -> usize {
        self.verbs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verbs.is_empty()
    }
}

/// Word → Zipf frequency (log10 of occurrences per 10^9 tokens).
/// Unknown words have frequency 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ZipfTable {
    freqs: BTreeMap<String, f64>,
}

impl ZipfTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `word<TAB>zipf` lines.
    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut table = Self::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: i + 1, message };
            let (word, value) = line
                .split_once('\t')
                .ok_or_else(|| parse_err("expected word<TAB>zipf".to_string()))?;
            let zipf: f64 = value
                .trim()
                .parse()
                .map_err(|_| parse_err(format!("invalid zipf value {value:?}")))?;
            table
                .insert(word.trim(), zipf)
                .map_err(|_| parse_err(format!("zipf value {zipf} outside [0, 10]")))?;
        }
        Ok(table)
    }

    pub fn english() -> Self {
        Self::parse_tsv(DEFAULT_ZIPF).expect("bundled zipf table is valid")
    }

    pub fn insert(&mut self, word: &str, zipf: f64) -> Result<()> {
        if !(0.0..=10.0).contains(&zipf) {
            return Err(Error::InvalidArgument("zipf value outside [0, 10]"));
        }
        self.freqs.insert(word.to_lowercase(), zipf);
        Ok(())
    }

    pub fn zipf(&self, word: &str) -> f64 {
        self.freqs.get(word).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Query {
    pub topic_id: u32,
    pub stance: Stance,
    pub terms: Vec<String>,
}

impl Query {
    pub fn text(&self) -> String {
        self.terms.join(" ")
    }

    /// Terms without a leading negation.
    pub fn unnegated_terms(&self) -> &[String] {
        match self.terms.first() {
            Some(t) if t == "not" => &self.terms[1..],
            _ => &self.terms,
        }
    }
}

fn is_punct_char(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace()
}

fn make_token(text: String, lexicon: &VerbLexicon) -> Token {
    let is_punct = text.chars().all(is_punct_char);
    let is_aux = !is_punct && AUX_VERBS.contains(&text.as_str());
    let is_verb = is_aux || (!is_punct && lexicon.contains(&text));
    Token {
        text,
        is_punct,
        is_verb,
        is_aux,
    }
}

/// Splits on whitespace, peels leading and trailing punctuation into
/// one-character punctuation tokens, splits a `n't` clitic off its host and
/// lowercases everything.
pub fn tokenize(text: &str, lexicon: &VerbLexicon) -> Vec<Token> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let lower = chunk.to_lowercase();
        let start = lower
            .char_indices()
            .find(|&(_, c)| !is_punct_char(c))
            .map(|(i, _)| i)
            .unwrap_or(lower.len());
        let end = lower
            .char_indices()
            .rev()
            .find(|&(_, c)| !is_punct_char(c))
            .map(|(i, c)| i + c.len_utf8())
            .unwrap_or(start);
        for c in lower[..start].chars() {
            out.push(make_token(c.to_string(), lexicon));
        }
        let word = &lower[start..end];
        if !word.is_empty() {
            match word.strip_suffix("n't") {
                Some(host) if !host.is_empty() => {
                    let host = match host {
                        "ca" => "can",
                        "wo" => "will",
                        "sha" => "shall",
                        h => h,
                    };
                    out.push(make_token(host.to_string(), lexicon));
                    out.push(make_token("n't".to_string(), lexicon));
                }
                _ => out.push(make_token(word.to_string(), lexicon)),
            }
        }
        for c in lower[end.max(start)..].chars() {
            out.push(make_token(c.to_string(), lexicon));
        }
    }
    out
}

/// Index of the first main (non-auxiliary) verb.
pub fn detect_root(tokens: &[Token]) -> Option<usize> {
    tokens.iter().position(|t| t.is_verb && !t.is_aux)
}

/// Drops punctuation and the root token, then keeps words whose Zipf
/// frequency is strictly below `threshold`, in their original order.
pub fn zipf_filter(tokens: &[Token], table: &ZipfTable, threshold: f64) -> Vec<String> {
    let root = detect_root(tokens);
    tokens
        .iter()
        .enumerate()
        .filter(|&(i, t)| !t.is_punct && Some(i) != root && table.zipf(&t.text) < threshold)
        .map(|(_, t)| t.text.clone())
        .collect()
}

/// Lexicon, frequency table and threshold bundled for query construction.
#[derive(Debug, Clone)]
pub struct QueryBuilder {
    pub lexicon: VerbLexicon,
    pub zipf: ZipfTable,
    pub threshold: f64,
}

impl Default for QueryBuilder {
    fn default() -> Self {
        Self {
            lexicon: VerbLexicon::english(),
            zipf: ZipfTable::english(),
            threshold: DEFAULT_ZIPF_THRESHOLD,
        }
    }
}

impl QueryBuilder {
    pub fn new(lexicon: VerbLexicon, zipf: ZipfTable, threshold: f64) -> Self {
        Self {
            lexicon,
            zipf,
            threshold,
        }
    }

    pub fn tokenize(&self, text: &str) -> Vec<Token> {
        tokenize(text, &self.lexicon)
    }

    /// Root followed by the filtered words.
    pub fn intermediate_terms(&self, question: &str) -> Vec<String> {
        let tokens = self.tokenize(question);
        let mut terms = Vec::new();
        if let Some(root) = detect_root(&tokens) {
            terms.push(tokens[root].text.clone());
        }
        terms.extend(zipf_filter(&tokens, &self.zipf, self.threshold));
        terms
    }

    /// Returns `(pro, con)`.
    pub fn build_queries(&self, topic: &Topic) -> Result<(Query, Query)> {
        let terms = self.intermediate_terms(&topic.question);
        if terms.is_empty() {
            return Err(Error::EmptyQuery { topic_id: topic.id });
        }
        let mut con_terms = vec!["not".to_string()];
        con_terms.extend(terms.iter().cloned());
        Ok((
            Query {
                topic_id: topic.id,
                stance: Stance::Pro,
                terms,
            },
            Query {
                topic_id: topic.id,
                stance: Stance::Con,
                terms: con_terms,
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EXAMPLE: &str = "Do we need sex education in schools?";

    fn example_table() -> ZipfTable {
        let mut t = ZipfTable::new();
        for (w, z) in [("we", 6.54), ("in", 7.27), ("do", 6.35)] {
            t.insert(w, z).unwrap();
        }
        for (w, z) in [("sex", 5.22), ("education", 5.28), ("schools", 5.05)] {
            t.insert(w, z).unwrap();
        }
        t
    }

    #[test]
    fn tokenizes_the_worked_example() {
        let lex = VerbLexicon::english();
        let toks = tokenize(EXAMPLE, &lex);
        let texts: Vec<&str> = toks.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(texts, ["do", "we", "need", "sex", "education", "in", "schools", "?"]);
        assert!(toks[0].is_aux && toks[0].is_verb);
        assert!(toks[2].is_verb && !toks[2].is_aux);
        assert!(toks[7].is_punct);
        assert!(toks[1..7].iter().all(|t| !t.is_punct));
        assert!(tokenize("", &lex).is_empty());
    }

    #[test]
    fn splits_negative_clitic() {
        let lex = VerbLexicon::english();
        let toks = tokenize("don't", &lex);
        assert_eq!(toks.len(), 2);
        assert_eq!(toks[0].text, "do");
        assert!(toks[0].is_aux);
        assert_eq!(toks[1].text, "n't");
        assert!(!toks[1].is_punct && !toks[1].is_verb);
        let toks = tokenize("Can't", &lex);
        assert_eq!(toks[0].text, "can");
    }

    #[test]
    fn peels_surrounding_punctuation() {
        let lex = VerbLexicon::english();
        let texts: Vec<String> = tokenize("(\"ban\")... e-mail!", &lex)
            .into_iter()
            .map(|t| t.text)
            .collect();
        assert_eq!(texts, ["(", "\"", "ban", "\"", ")", ".", ".", ".", "e-mail", "!"]);
        let only = tokenize("???", &lex);
        assert_eq!(only.len(), 3);
        assert!(only.iter().all(|t| t.is_punct));
    }

    #[test]
    fn root_detection() {
        let lex = VerbLexicon::english();
        assert_eq!(detect_root(&tokenize(EXAMPLE, &lex)), Some(2));
        assert_eq!(detect_root(&tokenize("Is water wet?", &lex)), None);
        assert_eq!(detect_root(&[]), None);
    }

    #[test]
    fn zipf_filter_keeps_rare_words() {
        let lex = VerbLexicon::english();
        let toks = tokenize(EXAMPLE, &lex);
        assert_eq!(
            zipf_filter(&toks, &example_table(), DEFAULT_ZIPF_THRESHOLD),
            ["sex", "education", "schools"]
        );
        // unknown word has zipf 0
        let toks = tokenize("zyzzyva", &lex);
        assert_eq!(zipf_filter(&toks, &ZipfTable::new(), 5.6), ["zyzzyva"]);
        // 5e7 per 1e9 tokens => log10(5e7) = 7.699
        let mut t = ZipfTable::new();
        t.insert("the", libm::log10(5.0e7)).unwrap();
        assert!((t.zipf("the") - 7.699).abs() < 1e-3);
        assert!(zipf_filter(&tokenize("the", &lex), &t, 5.6).is_empty());
    }

    #[test]
    fn builds_worked_example_queries() {
        let topic = Topic {
            id: 1,
            question: EXAMPLE.to_string(),
        };
        for b in [
            QueryBuilder::new(VerbLexicon::english(), example_table(), 5.6),
            QueryBuilder::default(),
        ] {
            let (pro, con) = b.build_queries(&topic).unwrap();
            assert_eq!(pro.text(), "need sex education schools");
            assert_eq!(con.text(), "not need sex education schools");
            assert_eq!(pro.stance, Stance::Pro);
            assert_eq!(con.stance, Stance::Con);
        }
    }

    #[test]
    fn root_only_query_and_empty_query() {
        let b = QueryBuilder::default();
        let (pro, _) = b
            .build_queries(&Topic {
                id: 2,
                question: "Do we need it?".to_string(),
            })
            .unwrap();
        assert_eq!(pro.terms, ["need"]);
        let err = b
            .build_queries(&Topic {
                id: 3,
                question: "???".to_string(),
            })
            .unwrap_err();
        assert_eq!(err, Error::EmptyQuery { topic_id: 3 });
    }

    #[test]
    fn parses_tsv_and_rejects_bad_lines() {
        let t = ZipfTable::parse_tsv("a\t7.5\nb\t1.0\n").unwrap();
        assert_eq!(t.zipf("a"), 7.5);
        assert!(matches!(
            ZipfTable::parse_tsv("a\t7.5\nb 1.0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(ZipfTable::parse_tsv("a\t11\n").is_err());
        assert!(ZipfTable::english().len() > 10_000);
        assert!(VerbLexicon::english().contains("need"));
    }

    fn word() -> impl Strategy<Value = String> {
        prop_oneof![
            Just("need".to_string()),
            Just("do".to_string()),
            Just("the".to_string()),
            Just("?".to_string()),
            Just("ban".to_string()),
            "[a-z]{1,8}",
        ]
    }

    proptest! {
        #[test]
        fn filter_is_an_ordered_subsequence(words in proptest::collection::vec(word(), 0..12)) {
            let b = QueryBuilder::default();
            let question = words.join(" ");
            let toks = b.tokenize(&question);
            let kept = zipf_filter(&toks, &b.zipf, b.threshold);
            let all: Vec<&str> = toks.iter().map(|t| t.text.as_str()).collect();
            let mut it = all.iter();
            for k in &kept {
                prop_assert!(it.any(|t| t == k));
            }
            // infinite threshold only drops punctuation and root
            let root = detect_root(&toks);
            let loose = zipf_filter(&toks, &b.zipf, f64::INFINITY);
            let expected: Vec<String> = toks.iter().enumerate()
                .filter(|&(i, t)| !t.is_punct && Some(i) != root)
                .map(|(_, t)| t.text.clone()).collect();
            prop_assert_eq!(loose, expected);
        }

        #[test]
        fn con_is_pro_behind_not(words in proptest::collection::vec(word(), 1..10)) {
            let b = QueryBuilder::default();
            let topic = Topic { id: 9, question: words.join(" ") };
            if let Ok((pro, con)) = b.build_queries(&topic) {
                prop_assert!(!pro.terms.is_empty());
                prop_assert_eq!(&con.terms[0], "not");
                prop_assert_eq!(&con.terms[1..], &pro.terms[..]);
            }
        }
    }
}
