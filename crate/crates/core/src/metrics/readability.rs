//! Coleman–Liau index and Dale–Chall style difficult-word counts.

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::text::{sentences, tokenize, TokenStream};

/// `0.0588·L − 0.296·S − 15.8`, with `L` letters and `S` sentences per 100 words.
pub fn coleman_liau(text: &str) -> Result<f64> {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return Err(Error::data("Coleman–Liau index is undefined for text without words"));
    }
    let words = tokens.len() as f64;
    let letters = tokens
        .iter()
        .flat_map(str::chars)
        .filter(|c| c.is_alphabetic())
        .count() as f64;
    let sentence_count = sentences(text).len() as f64;
    let l = letters / words * 100.0;
    let s = sentence_count / words * 100.0;
    Ok(0.0588 * l - 0.296 * s - 15.8)
}

/// A list of "easy" words, one per line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EasyWords(HashSet<String>);

impl EasyWords {
    pub fn parse(content: &str) -> Self {
        EasyWords(
            content
                .lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&content))
    }

    /// A short built-in list of very common words.
    pub fn builtin() -> Self {
        Self::parse(include_str!("../../data/easy_words.txt"))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for EasyWords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        EasyWords(iter.into_iter().map(|s| s.into().to_lowercase()).collect())
    }
}

/// Unique token types that contain a letter and are absent from `easy`.
pub fn difficult_words(tokens: &TokenStream, easy: &EasyWords) -> usize {
    tokens
        .iter()
        .filter(|t| t.chars().any(char::is_alphabetic) && !easy.contains(t))
        .collect::<HashSet<_>>()
        .len()
}
