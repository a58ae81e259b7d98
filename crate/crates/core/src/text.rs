//! Tokenization, sentence segmentation, n-grams and vocabulary construction.
//!
//! Every featurizer and every length-based filter goes through [`tokenize`],
//! so "a word" means the same thing everywhere in the crate.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lowercase tokens of one document, in document order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenStream(Vec<String>);

impl TokenStream {
    pub fn new(tokens: Vec<String>) -> Self {
        debug_assert!(tokens.iter().all(|t| !t.is_empty()));
        TokenStream(tokens)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    /// Drop every token contained in `stopwords`.
    pub fn without(&self, stopwords: &StopWords) -> TokenStream {
        TokenStream(
            self.0
                .iter()
                .filter(|t| !stopwords.contains(t))
                .cloned()
                .collect(),
        )
    }
}

impl fmt::Display for TokenStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Split `text` into lowercase word tokens.
///
/// Letters and digits form words; an apostrophe is kept only when it sits
/// between two word characters (`don't`). Everything else separates tokens.
pub fn tokenize(text: &str) -> TokenStream {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            current.extend(c.to_lowercase().filter(|l| l.is_alphanumeric()));
        } else if is_apostrophe(c)
            && !current.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric())
        {
            current.push('\'');
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    TokenStream(tokens)
}

/// Number of words in `text` as counted by [`tokenize`].
pub fn word_count(text: &str) -> usize {
    tokenize(text).len()
}

/// Split `text` into sentences.
///
/// A sentence ends at a maximal run of `.`, `!` or `?` that is followed by
/// whitespace or the end of the text. Segments without any letter are dropped.
pub fn sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        if matches!(chars[i], '.' | '!' | '?') {
            let mut end = i;
            while end < chars.len() && matches!(chars[end], '.' | '!' | '?') {
                end += 1;
            }
            if end == chars.len() || chars[end].is_whitespace() {
                push_sentence(&chars[start..end], &mut out);
                start = end;
            }
            i = end;
        } else {
            i += 1;
        }
    }
    if start < chars.len() {
        push_sentence(&chars[start..], &mut out);
    }
    out
}

fn push_sentence(segment: &[char], out: &mut Vec<String>) {
    if segment.iter().any(|c| c.is_alphabetic()) {
        let s: String = segment.iter().collect();
        out.push(s.trim().to_string());
    }
}

/// A validated, sorted set of n-gram orders drawn from {1, 2, 3}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct NgramOrders(Vec<usize>);

impl NgramOrders {
    pub fn new(orders: &[usize]) -> Result<Self> {
        let mut v = orders.to_vec();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() || v.iter().any(|&n| !(1..=3).contains(&n)) {
            return Err(Error::config(format!(
                "n-gram orders must be a nonempty subset of {{1,2,3}}, got {orders:?}"
            )));
        }
        Ok(NgramOrders(v))
    }

    pub fn unigrams() -> Self {
        NgramOrders(vec![1])
    }

    pub fn up_to_trigrams() -> Self {
        NgramOrders(vec![1, 2, 3])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl TryFrom<Vec<usize>> for NgramOrders {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        NgramOrders::new(&v)
    }
}

impl From<NgramOrders> for Vec<usize> {
    fn from(o: NgramOrders) -> Self {
        o.0
    }
}

/// Contiguous n-grams of every requested order, joined with single spaces.
/// Orders are emitted in ascending order, each in document order.
pub fn ngrams(tokens: &TokenStream, orders: &NgramOrders) -> Vec<String> {
    let t = tokens.tokens();
    let mut out = Vec::new();
    for &n in orders.as_slice() {
        if t.len() < n {
            continue;
        }
        for window in t.windows(n) {
            out.push(window.join(" "));
        }
    }
    out
}

/// Order of an n-gram string produced by [`ngrams`].
pub fn ngram_order(ngram: &str) -> usize {
    ngram.bytes().filter(|&b| b == b' ').count() + 1
}

/// How the top-k vocabulary entries are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Total occurrence count across the corpus.
    #[default]
    TermFrequency,
    /// Number of documents containing the n-gram.
    DocumentFrequency,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabEntry {
    pub ngram: String,
    pub order: usize,
    pub count: u64,
    pub document_frequency: u64,
}

/// An ordered n-gram vocabulary. Positions are `0..len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<VocabEntry>", into = "Vec<VocabEntry>")]
pub struct Vocabulary {
    entries: Vec<VocabEntry>,
    index: HashMap<String, usize>,
}

impl From<Vec<VocabEntry>> for Vocabulary {
    fn from(entries: Vec<VocabEntry>) -> Self {
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.ngram.clone(), i))
            .collect();
        Vocabulary { entries, index }
    }
}

impl From<Vocabulary> for Vec<VocabEntry> {
    fn from(v: Vocabulary) -> Self {
        v.entries
    }
}

impl Vocabulary {
    /// Keep the `top_k` most frequent n-grams of `docs`; ties go to the
    /// lexicographically smaller n-gram.
    pub fn build(
        docs: &[TokenStream],
        top_k: usize,
        orders: &NgramOrders,
        selection: Selection,
    ) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::data("cannot build a vocabulary from an empty corpus"));
        }
        if top_k == 0 {
            return Err(Error::config("vocabulary size must be at least 1"));
        }
        // ngram -> (count, document frequency, last document seen)
        let mut stats: HashMap<String, (u64, u64, usize)> = HashMap::new();
        for (d, doc) in docs.iter().enumerate() {
            for g in ngrams(doc, orders) {
                let e = stats.entry(g).or_insert((0, 0, usize::MAX));
                e.0 += 1;
                if e.2 != d {
                    e.1 += 1;
                    e.2 = d;
                }
            }
        }
        let mut all: Vec<VocabEntry> = stats
            .into_iter()
            .map(|(ngram, (count, df, _))| VocabEntry {
                order: ngram_order(&ngram),
                ngram,
                count,
                document_frequency: df,
            })
            .collect();
        let key = |e: &VocabEntry| match selection {
            Selection::TermFrequency => e.count,
            Selection::DocumentFrequency => e.document_frequency,
        };
        all.sort_by(|a, b| key(b).cmp(&key(a)).then_with(|| a.ngram.cmp(&b.ngram)));
        all.truncate(top_k);
        Ok(Vocabulary::from(all))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn get(&self, ngram: &str) -> Option<usize> {
        self.index.get(ngram).copied()
    }

    pub fn term(&self, position: usize) -> &str {
        &self.entries[position].ngram
    }
}

/// Convenience wrapper: tokenize every record of `corpus` and build a vocabulary.
pub fn build_vocabulary(
    corpus: &crate::corpus::Corpus,
    top_k: usize,
    orders: &NgramOrders,
) -> Result<Vocabulary> {
    let docs: Vec<TokenStream> = corpus.records().iter().map(|r| tokenize(&r.text)).collect();
    Vocabulary::build(&docs, top_k, orders, Selection::TermFrequency)
}

/// A stopword list: one token per line, `#` starts a comment.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct StopWords(HashSet<String>);

impl From<Vec<String>> for StopWords {
    fn from(v: Vec<String>) -> Self {
        StopWords(v.into_iter().collect())
    }
}

impl From<StopWords> for Vec<String> {
    fn from(s: StopWords) -> Self {
        let mut v: Vec<String> = s.0.into_iter().collect();
        v.sort();
        v
    }
}

impl StopWords {
    pub fn parse(content: &str) -> Self {
        let words = content
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(|l| l.to_lowercase())
            .collect();
        StopWords(words)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&content))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}
