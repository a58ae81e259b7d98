//! TF-IDF vectors over a top-k n-gram vocabulary.
//!
//! `idf(t) = ln(|R| / (n_t + 1)) + 1`, where `n_t` is the number of training
//! documents containing `t`. Term frequency is the count of `t` divided by
//! the number of n-gram slots of `t`'s order in the document, so a bigram is
//! normalized by bigram slots only. Vectors are left unnormalized.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::text::{ngram_order, ngrams, tokenize, NgramOrders, Selection, StopWords, TokenStream, Vocabulary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TfidfConfig {
    pub top_k: usize,
    pub orders: NgramOrders,
    pub selection: Selection,
    pub stopwords: Option<StopWords>,
}

impl Default for TfidfConfig {
    fn default() -> Self {
        TfidfConfig {
            top_k: 2000,
            orders: NgramOrders::up_to_trigrams(),
            selection: Selection::TermFrequency,
            stopwords: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel {
    pub config: TfidfConfig,
    pub vocabulary: Vocabulary,
    pub idf: Vec<f64>,
    pub corpus_size: usize,
}

pub fn idf(corpus_size: usize, document_frequency: u64) -> f64 {
    (corpus_size as f64 / (document_frequency as f64 + 1.0)).ln() + 1.0
}

impl TfidfModel {
    pub fn fit(train: &[TokenStream], config: TfidfConfig) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::data("TF-IDF needs a nonempty training corpus"));
        }
        let docs: Vec<TokenStream> = match &config.stopwords {
            Some(sw) => train.iter().map(|d| d.without(sw)).collect(),
            None => train.to_vec(),
        };
        let vocabulary = Vocabulary::build(&docs, config.top_k, &config.orders, config.selection)?;
        let corpus_size = docs.len();
        let idf = vocabulary
            .entries()
            .iter()
            .map(|e| idf(corpus_size, e.document_frequency))
            .collect();
        Ok(TfidfModel {
            config,
            vocabulary,
            idf,
            corpus_size,
        })
    }

    pub fn fit_texts<'a>(texts: impl IntoIterator<Item = &'a str>, config: TfidfConfig) -> Result<Self> {
        let docs: Vec<TokenStream> = texts.into_iter().map(tokenize).collect();
        Self::fit(&docs, config)
    }

    pub fn dim(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn transform(&self, tokens: &TokenStream) -> FeatureVector {
        let filtered;
        let tokens = match &self.config.stopwords {
            Some(sw) => {
                filtered = tokens.without(sw);
                &filtered
            }
            None => tokens,
        };
        let mut counts: HashMap<usize, u64> = HashMap::new();
        for g in ngrams(tokens, &self.config.orders) {
            if let Some(pos) = self.vocabulary.get(&g) {
                *counts.entry(pos).or_insert(0) += 1;
            }
        }
        let n = tokens.len();
        let mut entries: Vec<(u32, f64)> = counts
            .into_iter()
            .map(|(pos, count)| {
                let order = ngram_order(self.vocabulary.term(pos));
                let slots = (n + 1 - order) as f64;
                (pos as u32, count as f64 / slots * self.idf[pos])
            })
            .collect();
        entries.sort_unstable_by_key(|e| e.0);
        FeatureVector::Sparse {
            dim: self.dim(),
            entries,
        }
    }

    pub fn transform_text(&self, text: &str) -> FeatureVector {
        self.transform(&tokenize(text))
    }
}
