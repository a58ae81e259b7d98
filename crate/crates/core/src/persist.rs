//! Versioned model files: a JSON metadata document plus a sidecar blob of
//! little-endian `f64` values. Arrays are stored row-major; their names,
//! shapes and offsets live in the JSON. `model.json` pairs with `model.bin`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::doc2vec::{Doc2VecConfig, Doc2VecModel};
use crate::embed::EmbeddingTable;
use crate::error::{Error, Result};
use crate::forest::{Forest, ForestConfig, Node, Tree};
use crate::lda::TopicModel;
use crate::lexicon::CategoryLexicon;
use crate::pipeline::{FittedFeaturizer, Pipeline};
use crate::seed;
use crate::text::Vocabulary;
use crate::tfidf::{TfidfConfig, TfidfModel};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArrayRef {
    name: String,
    shape: Vec<usize>,
    /// In units of `f64` values from the start of the blob.
    offset: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum FeaturizerState {
    Tfidf {
        config: TfidfConfig,
        vocabulary: Vocabulary,
        corpus_size: usize,
    },
    Lda {
        topics: usize,
        terms: Vec<String>,
        alpha: f64,
        beta: f64,
        iterations: usize,
        seed: u64,
    },
    Embed {
        source: Option<PathBuf>,
        dimension: usize,
        words: Vec<String>,
    },
    Doc2vec {
        config: Doc2VecConfig,
        seed: u64,
        words: Vec<String>,
        counts: Vec<u64>,
        documents: usize,
    },
    Lexicon {
        dictionary: String,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ForestState {
    config: ForestConfig,
    dim: usize,
    y_min: f64,
    y_max: f64,
    tree_sizes: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Metadata {
    format_version: u32,
    seed: u64,
    fingerprint: String,
    config: serde_json::Value,
    featurizer: FeaturizerState,
    forest: ForestState,
    arrays: Vec<ArrayRef>,
    blob_sha256: String,
}

#[derive(Default)]
struct BlobWriter {
    values: Vec<f64>,
    arrays: Vec<ArrayRef>,
}

impl BlobWriter {
    fn push(&mut self, name: &str, shape: &[usize], data: &[f64]) {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        self.arrays.push(ArrayRef {
            name: name.to_string(),
            shape: shape.to_vec(),
            offset: self.values.len(),
        });
        self.values.extend_from_slice(data);
    }

    fn bytes(&self) -> Vec<u8> {
        self.values.iter().flat_map(|v| v.to_le_bytes()).collect()
    }
}

struct BlobReader<'a> {
    arrays: &'a [ArrayRef],
    values: Vec<f64>,
}

impl BlobReader<'_> {
    fn take(&self, name: &str, shape: &[usize]) -> Result<Vec<f64>> {
        let a = self
            .arrays
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| Error::ModelFile(format!("array {name:?} missing from model file")))?;
        if a.shape != shape {
            return Err(Error::ModelFile(format!(
                "array {name:?} has shape {:?}, expected {shape:?}",
                a.shape
            )));
        }
        let len: usize = shape.iter().product();
        self.values
            .get(a.offset..a.offset + len)
            .map(<[f64]>::to_vec)
            .ok_or_else(|| Error::ModelFile(format!("array {name:?} extends past the end of the blob")))
    }
}

/// A trained pipeline with the seed and configuration that produced it.
#[derive(Debug, Clone)]
pub struct ModelFile {
    pub pipeline: Pipeline,
    pub seed: u64,
    /// Fingerprint of the creating configuration.
    pub fingerprint: String,
    /// The effective run configuration, stored verbatim.
    pub config: serde_json::Value,
}

pub fn blob_path(json_path: &Path) -> PathBuf {
    json_path.with_extension("bin")
}

fn encode_featurizer(f: &FittedFeaturizer, blob: &mut BlobWriter) -> FeaturizerState {
    match f {
        FittedFeaturizer::Tfidf(m) => {
            blob.push("tfidf.idf", &[m.idf.len()], &m.idf);
            FeaturizerState::Tfidf {
                config: m.config.clone(),
                vocabulary: m.vocabulary.clone(),
                corpus_size: m.corpus_size,
            }
        }
        FittedFeaturizer::Lda(m) => {
            blob.push("lda.phi", &[m.topics(), m.terms().len()], m.phi());
            blob.push("lda.topic_prior", &[m.topics()], m.topic_prior());
            FeaturizerState::Lda {
                topics: m.topics(),
                terms: m.terms().to_vec(),
                alpha: m.alpha(),
                beta: m.beta(),
                iterations: m.iterations(),
                seed: m.seed(),
            }
        }
        FittedFeaturizer::Embed(t) => {
            blob.push("embed.vectors", &[t.len(), t.dimension()], t.flat_vectors());
            FeaturizerState::Embed {
                source: t.source().map(Path::to_path_buf),
                dimension: t.dimension(),
                words: t.words().to_vec(),
            }
        }
        FittedFeaturizer::Doc2vec(m) => {
            let (v, d) = (m.words().len(), m.dimension());
            blob.push("doc2vec.doc_matrix", &[m.documents(), d], m.doc_matrix());
            blob.push("doc2vec.word_matrix", &[v, d], m.word_matrix());
            blob.push("doc2vec.output_matrix", &[v, d], m.output_matrix());
            FeaturizerState::Doc2vec {
                config: m.config().clone(),
                seed: m.seed(),
                words: m.words().to_vec(),
                counts: m.counts().to_vec(),
                documents: m.documents(),
            }
        }
        FittedFeaturizer::Lexicon(l) => FeaturizerState::Lexicon {
            dictionary: l.to_dic(),
        },
    }
}

fn decode_featurizer(state: FeaturizerState, blob: &BlobReader) -> Result<FittedFeaturizer> {
    Ok(match state {
        FeaturizerState::Tfidf {
            config,
            vocabulary,
            corpus_size,
        } => {
            let idf = blob.take("tfidf.idf", &[vocabulary.len()])?;
            FittedFeaturizer::Tfidf(TfidfModel {
                config,
                vocabulary,
                idf,
                corpus_size,
            })
        }
        FeaturizerState::Lda {
            topics,
            terms,
            alpha,
            beta,
            iterations,
            seed,
        } => {
            let phi = blob.take("lda.phi", &[topics, terms.len()])?;
            let prior = blob.take("lda.topic_prior", &[topics])?;
            FittedFeaturizer::Lda(TopicModel::from_parts(terms, topics, phi, prior, alpha, beta, iterations, seed)?)
        }
        FeaturizerState::Embed {
            source,
            dimension,
            words,
        } => {
            let flat = blob.take("embed.vectors", &[words.len(), dimension])?;
            let entries = words
                .into_iter()
                .enumerate()
                .map(|(i, w)| (w, flat[i * dimension..(i + 1) * dimension].to_vec()))
                .collect();
            let table = EmbeddingTable::new(dimension, entries).map_err(|e| Error::ModelFile(e.to_string()))?;
            FittedFeaturizer::Embed(Arc::new(table.with_source(source)))
        }
        FeaturizerState::Doc2vec {
            config,
            seed,
            words,
            counts,
            documents,
        } => {
            let (v, d) = (words.len(), config.dimension);
            let docs = blob.take("doc2vec.doc_matrix", &[documents, d])?;
            let w = blob.take("doc2vec.word_matrix", &[v, d])?;
            let u = blob.take("doc2vec.output_matrix", &[v, d])?;
            FittedFeaturizer::Doc2vec(Doc2VecModel::from_parts(config, seed, words, counts, docs, w, u)?)
        }
        FeaturizerState::Lexicon { dictionary } => {
            let lex = CategoryLexicon::parse(&dictionary, Path::new("<model file>"))
                .map_err(|e| Error::ModelFile(e.to_string()))?;
            FittedFeaturizer::Lexicon(Arc::new(lex))
        }
    })
}

fn encode_forest(forest: &Forest, blob: &mut BlobWriter) -> ForestState {
    let mut flat = Vec::new();
    let mut sizes = Vec::with_capacity(forest.trees().len());
    for tree in forest.trees() {
        sizes.push(tree.nodes().len());
        for node in tree.nodes() {
            match *node {
                Node::Leaf(v) => flat.extend([-1.0, v, 0.0, 0.0]),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => flat.extend([f64::from(feature), threshold, f64::from(left), f64::from(right)]),
            }
        }
    }
    blob.push("forest.nodes", &[flat.len() / 4, 4], &flat);
    let (y_min, y_max) = forest.target_range();
    ForestState {
        config: forest.config().clone(),
        dim: forest.dim(),
        y_min,
        y_max,
        tree_sizes: sizes,
    }
}

fn as_index(x: f64, what: &str) -> Result<u32> {
    if x >= 0.0 && x <= f64::from(u32::MAX) && x.fract() == 0.0 {
        Ok(x as u32)
    } else {
        Err(Error::ModelFile(format!("invalid {what} {x} in forest nodes")))
    }
}

fn decode_forest(state: ForestState, blob: &BlobReader) -> Result<Forest> {
    let total: usize = state.tree_sizes.iter().sum();
    let flat = blob.take("forest.nodes", &[total, 4])?;
    let mut trees = Vec::with_capacity(state.tree_sizes.len());
    let mut start = 0;
    for &size in &state.tree_sizes {
        let nodes = flat[start * 4..(start + size) * 4]
            .chunks_exact(4)
            .map(|c| {
                if c[0] == -1.0 {
                    Ok(Node::Leaf(c[1]))
                } else {
                    let feature = as_index(c[0], "feature")?;
                    if feature as usize >= state.dim {
                        return Err(Error::ModelFile(format!("feature {feature} out of range")));
                    }
                    Ok(Node::Split {
                        feature,
                        threshold: c[1],
                        left: as_index(c[2], "child")?,
                        right: as_index(c[3], "child")?,
                    })
                }
            })
            .collect::<Result<Vec<Node>>>()?;
        trees.push(Tree::new(nodes)?);
        start += size;
    }
    Forest::from_parts(state.config, state.dim, state.y_min, state.y_max, trees)
}

impl ModelFile {
    /// Serialize to `(json, blob)` bytes.
    pub fn to_bytes(&self) -> Result<(Vec<u8>, Vec<u8>)> {
        let mut blob = BlobWriter::default();
        let featurizer = encode_featurizer(&self.pipeline.featurizer, &mut blob);
        let forest = encode_forest(&self.pipeline.forest, &mut blob);
        let bytes = blob.bytes();
        let meta = Metadata {
            format_version: FORMAT_VERSION,
            seed: self.seed,
            fingerprint: self.fingerprint.clone(),
            config: self.config.clone(),
            featurizer,
            forest,
            arrays: blob.arrays,
            blob_sha256: seed::fingerprint(&bytes),
        };
        let mut json = serde_json::to_vec_pretty(&meta).map_err(|e| Error::Internal(e.to_string()))?;
        json.push(b'\n');
        Ok((json, bytes))
    }

    pub fn from_bytes(json: &[u8], blob: &[u8]) -> Result<Self> {
        let version: serde_json::Value =
            serde_json::from_slice(json).map_err(|e| Error::ModelFile(format!("model metadata: {e}")))?;
        match version.get("format_version").and_then(serde_json::Value::as_u64) {
            Some(v) if v == u64::from(FORMAT_VERSION) => {}
            Some(v) => {
                return Err(Error::ModelFile(format!(
                    "model format version {v} is not supported (expected {FORMAT_VERSION})"
                )))
            }
            None => return Err(Error::ModelFile("model metadata lacks format_version".into())),
        }
        let meta: Metadata =
            serde_json::from_value(version).map_err(|e| Error::ModelFile(format!("model metadata: {e}")))?;
        if seed::fingerprint(blob) != meta.blob_sha256 {
            return Err(Error::ModelFile("model blob does not match its recorded checksum".into()));
        }
        if blob.len() % 8 != 0 {
            return Err(Error::ModelFile("model blob length is not a multiple of 8".into()));
        }
        let values = blob
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        let reader = BlobReader {
            arrays: &meta.arrays,
            values,
        };
        let featurizer = decode_featurizer(meta.featurizer, &reader)?;
        let forest = decode_forest(meta.forest, &reader)?;
        if forest.dim() != featurizer.dim() {
            return Err(Error::ModelFile("forest and featurizer dimensions disagree".into()));
        }
        Ok(ModelFile {
            pipeline: Pipeline { featurizer, forest },
            seed: meta.seed,
            fingerprint: meta.fingerprint,
            config: meta.config,
        })
    }

    /// Write `path` and its sidecar blob; returns both paths.
    pub fn save(&self, path: &Path) -> Result<(PathBuf, PathBuf)> {
        let (json, blob) = self.to_bytes()?;
        let bin = blob_path(path);
        std::fs::write(path, json).map_err(|e| Error::io(path, e))?;
        std::fs::write(&bin, blob).map_err(|e| Error::io(&bin, e))?;
        Ok((path.to_path_buf(), bin))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let json = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let bin = blob_path(path);
        let blob = std::fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
        Self::from_bytes(&json, &blob)
    }
}
