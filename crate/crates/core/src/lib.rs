//! Text representations and evaluation machinery for inferring a numeric
//! score (for example job-hopping likelihood) from free-text responses.
//!
//! The crate covers the full experiment loop:
//!
//! - [`corpus`]: dataset ingestion, Likert-item targets, length filters, splits
//! - [`text`]: tokenization, sentence segmentation, n-grams, vocabularies
//! - five featurizers: [`tfidf`], [`lda`], [`embed`], [`doc2vec`], [`lexicon`]
//! - [`forest`]: a random forest regressor over any feature representation
//! - [`metrics`]: Pearson correlation, readability and formality measures,
//!   effect sizes and one-way ANOVA
//! - [`analyze`]: evaluation, method × length grids, correlate and group reports
//! - [`synth`]: a synthetic corpus generator with a planted lexical signal
//! - [`persist`]: the versioned model file

pub mod analyze;
pub mod corpus;
pub mod doc2vec;
pub mod embed;
pub mod error;
pub mod features;
pub mod forest;
pub mod lda;
pub mod lexicon;
pub mod metrics;
pub mod persist;
pub mod pipeline;
pub mod seed;
pub mod synth;
pub mod text;
pub mod tfidf;

pub use corpus::{Corpus, DatasetFormat, Gender, ResponseRecord, SplitSpec};
pub use error::{Error, ErrorKind, Result};
pub use features::{FeatureMatrix, FeatureVector};
pub use forest::{Forest, ForestConfig, MaxFeatures};
pub use pipeline::{FeaturizerConfig, FittedFeaturizer, Pipeline};
pub use text::{TokenStream, Vocabulary};
