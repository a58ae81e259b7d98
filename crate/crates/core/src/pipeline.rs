//! Featurizer dispatch and the featurizer + forest pipeline.

use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::corpus::Corpus;
use crate::doc2vec::{Doc2VecConfig, Doc2VecModel};
use crate::embed::EmbeddingTable;
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FeatureVector};
use crate::forest::{Forest, ForestConfig};
use crate::lda::{LdaConfig, TopicModel};
use crate::lexicon::CategoryLexicon;
use crate::seed;
use crate::text::{tokenize, TokenStream};
use crate::tfidf::{TfidfConfig, TfidfModel};

/// Featurizer choice as written in a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FeaturizerConfig {
    Tfidf(TfidfConfig),
    Lda(LdaConfig),
    Embed(PathConfig),
    Doc2vec(Doc2VecConfig),
    Lexicon(PathConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    pub path: PathBuf,
}

/// A featurizer with any external resources loaded.
#[derive(Debug, Clone)]
pub enum Featurizer {
    Tfidf(TfidfConfig),
    Lda(LdaConfig),
    Embed(Arc<EmbeddingTable>),
    Doc2vec(Doc2VecConfig),
    Lexicon(Arc<CategoryLexicon>),
}

impl Featurizer {
    pub fn from_config(config: &FeaturizerConfig) -> Result<Self> {
        Ok(match config {
            FeaturizerConfig::Tfidf(c) => Featurizer::Tfidf(c.clone()),
            FeaturizerConfig::Lda(c) => Featurizer::Lda(c.clone()),
            FeaturizerConfig::Embed(p) => Featurizer::Embed(Arc::new(EmbeddingTable::load(&p.path)?)),
            FeaturizerConfig::Doc2vec(c) => Featurizer::Doc2vec(c.clone()),
            FeaturizerConfig::Lexicon(p) => Featurizer::Lexicon(Arc::new(CategoryLexicon::load(&p.path)?)),
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Featurizer::Tfidf(_) => "tfidf",
            Featurizer::Lda(_) => "lda",
            Featurizer::Embed(_) => "embed",
            Featurizer::Doc2vec(_) => "doc2vec",
            Featurizer::Lexicon(_) => "lexicon",
        }
    }

    /// Parameters recorded in reports and fingerprints.
    pub fn params(&self) -> serde_json::Value {
        match self {
            Featurizer::Tfidf(c) => json!(c),
            Featurizer::Lda(c) => json!({
                "topics": c.topics,
                "alpha": c.alpha(),
                "beta": c.beta,
                "iterations": c.iterations,
                "max_vocab": c.max_vocab,
            }),
            Featurizer::Embed(t) => json!({
                "source": t.source(),
                "dimension": t.dimension(),
                "words": t.len(),
            }),
            Featurizer::Doc2vec(c) => json!(c),
            Featurizer::Lexicon(l) => json!({
                "categories": l.categories().iter().map(|(_, n)| n.as_str()).collect::<Vec<_>>(),
            }),
        }
    }
}

/// A featurizer fitted on training documents.
#[derive(Debug, Clone)]
pub enum FittedFeaturizer {
    Tfidf(TfidfModel),
    Lda(TopicModel),
    Embed(Arc<EmbeddingTable>),
    Doc2vec(Doc2VecModel),
    Lexicon(Arc<CategoryLexicon>),
}

fn token_streams(corpus: &Corpus) -> Vec<TokenStream> {
    corpus.records().par_iter().map(|r| tokenize(&r.text)).collect()
}

fn dense(rows: Vec<Vec<f64>>, dim: usize) -> Result<FeatureMatrix> {
    FeatureMatrix::new(dim, rows.into_iter().map(FeatureVector::Dense).collect())
}

impl FittedFeaturizer {
    /// Fit on `train` and return the training feature matrix alongside.
    /// Doc2Vec training rows are the learned document vectors.
    pub fn fit(featurizer: &Featurizer, train: &Corpus, seed: u64) -> Result<(Self, FeatureMatrix)> {
        let docs = token_streams(train);
        let fitted = match featurizer {
            Featurizer::Tfidf(c) => FittedFeaturizer::Tfidf(TfidfModel::fit(&docs, c.clone())?),
            Featurizer::Lda(c) => FittedFeaturizer::Lda(TopicModel::fit(&docs, c, seed)?),
            Featurizer::Embed(t) => FittedFeaturizer::Embed(Arc::clone(t)),
            Featurizer::Lexicon(l) => FittedFeaturizer::Lexicon(Arc::clone(l)),
            Featurizer::Doc2vec(c) => {
                let model = Doc2VecModel::train(&docs, c, seed)?;
                let d = model.dimension();
                let rows = (0..model.documents()).map(|i| model.doc_vector(i).to_vec()).collect();
                let x = dense(rows, d)?;
                return Ok((FittedFeaturizer::Doc2vec(model), x));
            }
        };
        let x = fitted.transform_tokens(&docs)?;
        Ok((fitted, x))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FittedFeaturizer::Tfidf(_) => "tfidf",
            FittedFeaturizer::Lda(_) => "lda",
            FittedFeaturizer::Embed(_) => "embed",
            FittedFeaturizer::Doc2vec(_) => "doc2vec",
            FittedFeaturizer::Lexicon(_) => "lexicon",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FittedFeaturizer::Tfidf(m) => m.dim(),
            FittedFeaturizer::Lda(m) => m.topics(),
            FittedFeaturizer::Embed(t) => t.dimension(),
            FittedFeaturizer::Doc2vec(m) => m.dimension(),
            FittedFeaturizer::Lexicon(l) => l.len(),
        }
    }

    pub fn transform_one(&self, tokens: &TokenStream) -> FeatureVector {
        match self {
            FittedFeaturizer::Tfidf(m) => m.transform(tokens),
            FittedFeaturizer::Lda(m) => FeatureVector::Dense(m.doc_topics(tokens).weights),
            FittedFeaturizer::Embed(t) => FeatureVector::Dense(t.doc_vector(tokens).vector),
            FittedFeaturizer::Doc2vec(m) => FeatureVector::Dense(m.infer_default(tokens).vector),
            FittedFeaturizer::Lexicon(l) => FeatureVector::Dense(l.category_frequencies(tokens)),
        }
    }

    fn transform_tokens(&self, docs: &[TokenStream]) -> Result<FeatureMatrix> {
        let rows: Vec<FeatureVector> = docs.par_iter().map(|d| self.transform_one(d)).collect();
        FeatureMatrix::new(self.dim(), rows)
    }

    pub fn transform(&self, corpus: &Corpus) -> Result<FeatureMatrix> {
        self.transform_tokens(&token_streams(corpus))
    }
}

/// Fitted featurizer followed by a random forest.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub featurizer: FittedFeaturizer,
    pub forest: Forest,
}

impl Pipeline {
    pub fn fit(featurizer: &Featurizer, forest: &ForestConfig, train: &Corpus, seed: u64) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::data("cannot train on an empty corpus"));
        }
        let y = train.targets()?;
        let (fitted, x) = FittedFeaturizer::fit(featurizer, train, seed::derive(seed, featurizer.kind()))?;
        let forest = Forest::fit(&x, &y, forest, seed::derive(seed, "forest"))?;
        Ok(Pipeline {
            featurizer: fitted,
            forest,
        })
    }

    /// Predictions for every record; targets are never read.
    pub fn predict(&self, corpus: &Corpus) -> Result<Vec<f64>> {
        let x = self.featurizer.transform(corpus)?;
        self.forest.predict(&x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn featurizer_config_json() {
        let c: FeaturizerConfig = serde_json::from_str(r#"{"kind": "lda", "topics": 7}"#).unwrap();
        match &c {
            FeaturizerConfig::Lda(l) => assert_eq!(l.topics, 7),
            other => panic!("{other:?}"),
        }
        assert!(serde_json::from_str::<FeaturizerConfig>(r#"{"kind": "lda", "topicz": 7}"#).is_err());
        assert!(serde_json::from_str::<FeaturizerConfig>(r#"{"kind": "bow"}"#).is_err());
        let e: FeaturizerConfig = serde_json::from_str(r#"{"kind": "embed", "path": "x.txt"}"#).unwrap();
        assert_eq!(serde_json::to_value(&e).unwrap()["path"], "x.txt");
    }
}
