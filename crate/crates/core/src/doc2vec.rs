//! Paragraph vectors, distributed-memory variant (PV-DM), trained with
//! negative sampling.
//!
//! For every position `i` of document `d` the hidden vector is the mean of
//! the document vector and the in-vocabulary words within `window` positions
//! on each side of `i`:
//!
//! ```text
//! h = (D_d + Σ_c W_c) / (1 + |C|)
//! L = −ln σ(U_target · h) − Σ_{n ∈ negatives} ln σ(−U_n · h)
//! ```
//!
//! Negatives are drawn from the unigram distribution raised to 0.75.
//! All parameters are updated by plain SGD with a linearly decaying rate.

use std::collections::HashMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{self, Rng};
use crate::text::TokenStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Doc2VecConfig {
    pub dimension: usize,
    pub window: usize,
    pub negative: usize,
    pub epochs: usize,
    pub learning_rate_start: f64,
    pub learning_rate_end: f64,
    pub min_count: u64,
    /// Passes over a document when inferring a vector for it.
    pub infer_steps: usize,
}

impl Default for Doc2VecConfig {
    fn default() -> Self {
        Doc2VecConfig {
            dimension: 100,
            window: 5,
            negative: 5,
            epochs: 10,
            learning_rate_start: 0.025,
            learning_rate_end: 0.0001,
            min_count: 1,
            infer_steps: 20,
        }
    }
}

impl Doc2VecConfig {
    fn validate(&self) -> Result<()> {
        if self.dimension < 2 {
            return Err(Error::config("doc2vec dimension must be at least 2"));
        }
        if !(self.learning_rate_start > 0.0) || self.learning_rate_end < 0.0 {
            return Err(Error::config("doc2vec learning rates must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Doc2VecModel {
    config: Doc2VecConfig,
    seed: u64,
    words: Vec<String>,
    index: HashMap<String, usize>,
    counts: Vec<u64>,
    /// Row-major `documents × dimension`.
    doc_matrix: Vec<f64>,
    /// Row-major `|V| × dimension`, context (input) vectors.
    word_matrix: Vec<f64>,
    /// Row-major `|V| × dimension`, output vectors scored against `h`.
    output_matrix: Vec<f64>,
    noise_cdf: Vec<f64>,
    loss_history: Vec<f64>,
}

/// An inferred document vector.
#[derive(Debug, Clone, PartialEq)]
pub struct InferredVector {
    pub vector: Vec<f64>,
    /// Set when the document has no in-vocabulary token; `vector` is zero.
    pub empty: bool,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `−ln σ(x)`, computed without overflow.
fn neg_log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn row(m: &[f64], i: usize, d: usize) -> &[f64] {
    &m[i * d..(i + 1) * d]
}

fn row_mut(m: &mut [f64], i: usize, d: usize) -> &mut [f64] {
    &mut m[i * d..(i + 1) * d]
}

/// Which parameter blocks an SGD step may modify.
#[derive(Debug, Clone, Copy)]
struct Trainable {
    words: bool,
    outputs: bool,
}

/// One SGD step on a single (context, target, negatives) sample. Returns the loss
/// evaluated before the update.
#[allow(clippy::too_many_arguments)]
fn sgd_step(
    doc: &mut [f64],
    word_matrix: &mut [f64],
    output_matrix: &mut [f64],
    context: &[usize],
    target: usize,
    negatives: &[usize],
    lr: f64,
    trainable: Trainable,
    hidden: &mut [f64],
    grad_hidden: &mut [f64],
) -> f64 {
    let d = doc.len();
    let scale = 1.0 / (1 + context.len()) as f64;
    hidden.copy_from_slice(doc);
    for &c in context {
        for (h, w) in hidden.iter_mut().zip(row(word_matrix, c, d)) {
            *h += w;
        }
    }
    hidden.iter_mut().for_each(|h| *h *= scale);
    grad_hidden.iter_mut().for_each(|g| *g = 0.0);

    let mut loss = 0.0;
    let samples = std::iter::once((target, 1.0)).chain(negatives.iter().map(|&n| (n, 0.0)));
    for (word, label) in samples {
        let out = row_mut(output_matrix, word, d);
        let f = dot(out, hidden);
        loss += if label > 0.0 { neg_log_sigmoid(f) } else { neg_log_sigmoid(-f) };
        // dL/df
        let g = sigmoid(f) - label;
        for (gh, u) in grad_hidden.iter_mut().zip(out.iter()) {
            *gh += g * u;
        }
        if trainable.outputs {
            for (u, h) in out.iter_mut().zip(hidden.iter()) {
                *u -= lr * g * h;
            }
        }
    }
    let step = lr * scale;
    for (x, g) in doc.iter_mut().zip(grad_hidden.iter()) {
        *x -= step * g;
    }
    if trainable.words {
        for &c in context {
            for (w, g) in row_mut(word_matrix, c, d).iter_mut().zip(grad_hidden.iter()) {
                *w -= step * g;
            }
        }
    }
    loss
}

fn context_of(ids: &[usize], i: usize, window: usize, out: &mut Vec<usize>) {
    out.clear();
    let lo = i.saturating_sub(window);
    let hi = (i + window + 1).min(ids.len());
    out.extend(ids[lo..hi].iter().enumerate().filter(|(j, _)| lo + j != i).map(|(_, &w)| w));
}

fn init_vector(rng: &mut Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| (rng.random::<f64>() - 0.5) / d as f64).collect()
}

impl Doc2VecModel {
    pub fn train(docs: &[TokenStream], config: &Doc2VecConfig, seed: u64) -> Result<Self> {
        Self::train_observed(docs, config, seed, |_, _| {})
    }

    /// Train, calling `observer(epoch, model)` after every epoch.
    pub fn train_observed(
        docs: &[TokenStream],
        config: &Doc2VecConfig,
        seed: u64,
        mut observer: impl FnMut(usize, &Doc2VecModel),
    ) -> Result<Self> {
        config.validate()?;
        if docs.is_empty() {
            return Err(Error::data("doc2vec needs a nonempty training corpus"));
        }
        let mut freq: HashMap<&str, u64> = HashMap::new();
        for doc in docs {
            for t in doc.iter() {
                *freq.entry(t).or_insert(0) += 1;
            }
        }
        let mut vocab: Vec<(&str, u64)> = freq
            .into_iter()
            .filter(|&(_, c)| c >= config.min_count.max(1))
            .collect();
        vocab.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        if vocab.is_empty() {
            return Err(Error::data("doc2vec vocabulary is empty"));
        }
        let words: Vec<String> = vocab.iter().map(|(w, _)| w.to_string()).collect();
        let counts: Vec<u64> = vocab.iter().map(|&(_, c)| c).collect();

        let d = config.dimension;
        let mut rng = seed::rng(seed);
        let mut doc_matrix = Vec::with_capacity(docs.len() * d);
        for _ in 0..docs.len() {
            doc_matrix.extend(init_vector(&mut rng, d));
        }
        let mut word_matrix = Vec::with_capacity(words.len() * d);
        for _ in 0..words.len() {
            word_matrix.extend(init_vector(&mut rng, d));
        }
        let mut model = Self::from_parts(
            config.clone(),
            seed,
            words,
            counts,
            doc_matrix,
            word_matrix,
            vec![0.0; vocab.len() * d],
        )?;

        let ids: Vec<Vec<usize>> = docs.iter().map(|doc| model.word_ids(doc)).collect();
        let total = (ids.iter().map(Vec::len).sum::<usize>() * config.epochs).max(1) as f64;
        let mut processed = 0usize;
        let (mut hidden, mut grad) = (vec![0.0; d], vec![0.0; d]);
        let mut context = Vec::new();
        let mut negatives = Vec::with_capacity(config.negative);
        let trainable = Trainable {
            words: true,
            outputs: true,
        };

        for epoch in 0..config.epochs {
            let mut epoch_loss = 0.0;
            let mut samples = 0usize;
            for (doc_index, doc_ids) in ids.iter().enumerate() {
                for i in 0..doc_ids.len() {
                    let lr = model.learning_rate(processed as f64 / total);
                    processed += 1;
                    let target = doc_ids[i];
                    context_of(doc_ids, i, config.window, &mut context);
                    model.draw_negatives(&mut rng, target, &mut negatives);
                    let Doc2VecModel {
                        doc_matrix,
                        word_matrix,
                        output_matrix,
                        ..
                    } = &mut model;
                    epoch_loss += sgd_step(
                        row_mut(doc_matrix, doc_index, d),
                        word_matrix,
                        output_matrix,
                        &context,
                        target,
                        &negatives,
                        lr,
                        trainable,
                        &mut hidden,
                        &mut grad,
                    );
                    samples += 1;
                }
            }
            if !model.is_finite() {
                return Err(Error::Internal(format!(
                    "doc2vec parameters became non-finite in epoch {epoch}"
                )));
            }
            model.loss_history.push(if samples > 0 {
                epoch_loss / samples as f64
            } else {
                0.0
            });
            observer(epoch, &model);
        }
        Ok(model)
    }

    /// Assemble a model from stored parameters.
    pub fn from_parts(
        config: Doc2VecConfig,
        seed: u64,
        words: Vec<String>,
        counts: Vec<u64>,
        doc_matrix: Vec<f64>,
        word_matrix: Vec<f64>,
        output_matrix: Vec<f64>,
    ) -> Result<Self> {
        config.validate()?;
        let d = config.dimension;
        let v = words.len();
        if counts.len() != v
            || word_matrix.len() != v * d
            || output_matrix.len() != v * d
            || doc_matrix.len() % d != 0
        {
            return Err(Error::ModelFile("doc2vec matrix shapes are inconsistent".into()));
        }
        if counts.iter().any(|&c| c == 0) {
            return Err(Error::ModelFile("doc2vec vocabulary frequencies must be positive".into()));
        }
        let index: HashMap<String, usize> =
            words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        if index.len() != v {
            return Err(Error::ModelFile("duplicate word in doc2vec vocabulary".into()));
        }
        let mut noise_cdf = Vec::with_capacity(v);
        let mut acc = 0.0;
        for &c in &counts {
            acc += (c as f64).powf(0.75);
            noise_cdf.push(acc);
        }
        Ok(Doc2VecModel {
            config,
            seed,
            words,
            index,
            counts,
            doc_matrix,
            word_matrix,
            output_matrix,
            noise_cdf,
            loss_history: Vec::new(),
        })
    }

    fn learning_rate(&self, progress: f64) -> f64 {
        let c = &self.config;
        c.learning_rate_start - (c.learning_rate_start - c.learning_rate_end) * progress
    }

    fn draw_negatives(&self, rng: &mut Rng, target: usize, out: &mut Vec<usize>) {
        out.clear();
        let total = *self.noise_cdf.last().expect("nonempty vocabulary");
        for _ in 0..self.config.negative {
            let u = rng.random::<f64>() * total;
            let w = self.noise_cdf.partition_point(|&c| c <= u).min(self.words.len() - 1);
            if w != target {
                out.push(w);
            }
        }
    }

    fn word_ids(&self, tokens: &TokenStream) -> Vec<usize> {
        tokens.iter().filter_map(|t| self.index.get(t).copied()).collect()
    }

    pub fn config(&self) -> &Doc2VecConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dimension(&self) -> usize {
        self.config.dimension
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn documents(&self) -> usize {
        self.doc_matrix.len() / self.config.dimension
    }

    pub fn doc_vector(&self, doc: usize) -> &[f64] {
        row(&self.doc_matrix, doc, self.config.dimension)
    }

    pub fn doc_matrix(&self) -> &[f64] {
        &self.doc_matrix
    }

    pub fn word_matrix(&self) -> &[f64] {
        &self.word_matrix
    }

    pub fn output_matrix(&self) -> &[f64] {
        &self.output_matrix
    }

    /// Mean training loss per epoch.
    pub fn loss_history(&self) -> &[f64] {
        &self.loss_history
    }

    pub fn is_finite(&self) -> bool {
        self.doc_matrix
            .iter()
            .chain(&self.word_matrix)
            .chain(&self.output_matrix)
            .all(|x| x.is_finite())
    }

    /// Optimize a fresh document vector for `tokens` with word and output
    /// vectors frozen. `steps = 0` returns the seeded initialization.
    pub fn infer_vector(&self, tokens: &TokenStream, steps: usize, seed: u64) -> InferredVector {
        let d = self.config.dimension;
        let ids = self.word_ids(tokens);
        if ids.is_empty() {
            return InferredVector {
                vector: vec![0.0; d],
                empty: true,
            };
        }
        let mut rng = seed::rng(seed);
        let mut doc = init_vector(&mut rng, d);
        let mut word_matrix = self.word_matrix.clone();
        let mut output_matrix = self.output_matrix.clone();
        let (mut hidden, mut grad) = (vec![0.0; d], vec![0.0; d]);
        let mut context = Vec::new();
        let mut negatives = Vec::new();
        let frozen = Trainable {
            words: false,
            outputs: false,
        };
        let total = (ids.len() * steps).max(1) as f64;
        let mut processed = 0usize;
        for _ in 0..steps {
            for i in 0..ids.len() {
                let lr = self.learning_rate(processed as f64 / total);
                processed += 1;
                context_of(&ids, i, self.config.window, &mut context);
                self.draw_negatives(&mut rng, ids[i], &mut negatives);
                sgd_step(
                    &mut doc,
                    &mut word_matrix,
                    &mut output_matrix,
                    &context,
                    ids[i],
                    &negatives,
                    lr,
                    frozen,
                    &mut hidden,
                    &mut grad,
                );
            }
        }
        debug_assert!(word_matrix == self.word_matrix && output_matrix == self.output_matrix);
        InferredVector {
            vector: doc,
            empty: false,
        }
    }

    /// Inference seeded from the model seed and the document's tokens, so the
    /// same text always maps to the same vector.
    pub fn infer_default(&self, tokens: &TokenStream) -> InferredVector {
        let seed = seed::derive(self.seed, &format!("infer:{tokens}"));
        self.infer_vector(tokens, self.config.infer_steps, seed)
    }

    /// Extract the parameters touched by one training sample.
    pub fn micro_state(
        &self,
        doc: usize,
        tokens: &TokenStream,
        position: usize,
        negatives: &[usize],
    ) -> Result<MicroState> {
        let d = self.config.dimension;
        let ids = self.word_ids(tokens);
        if position >= ids.len() || doc >= self.documents() {
            return Err(Error::config("micro-state position out of range"));
        }
        let mut context = Vec::new();
        context_of(&ids, position, self.config.window, &mut context);
        Ok(MicroState {
            doc: self.doc_vector(doc).to_vec(),
            context: context.iter().map(|&c| row(&self.word_matrix, c, d).to_vec()).collect(),
            target: row(&self.output_matrix, ids[position], d).to_vec(),
            negatives: negatives.iter().map(|&n| row(&self.output_matrix, n, d).to_vec()).collect(),
        })
    }
}

/// Parameters of one training sample, copied out of a model. Context and
/// output vectors are treated as distinct parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroState {
    pub doc: Vec<f64>,
    pub context: Vec<Vec<f64>>,
    pub target: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// Gradients with the same layout as [`MicroState`].
pub type MicroGradients = MicroState;

impl MicroState {
    pub fn zeros(dimension: usize, context: usize, negatives: usize) -> Self {
        MicroState {
            doc: vec![0.0; dimension],
            context: vec![vec![0.0; dimension]; context],
            target: vec![0.0; dimension],
            negatives: vec![vec![0.0; dimension]; negatives],
        }
    }

    fn params_mut(&mut self) -> Vec<&mut f64> {
        let mut v: Vec<&mut f64> = self.doc.iter_mut().collect();
        v.extend(self.context.iter_mut().flatten());
        v.extend(self.target.iter_mut());
        v.extend(self.negatives.iter_mut().flatten());
        v
    }

    fn params(&self) -> Vec<f64> {
        let mut v = self.doc.clone();
        v.extend(self.context.iter().flatten());
        v.extend(&self.target);
        v.extend(self.negatives.iter().flatten());
        v
    }

    /// Negative-sampling loss, written directly from its definition.
    pub fn loss(&self) -> f64 {
        let n = (1 + self.context.len()) as f64;
        let h: Vec<f64> = (0..self.doc.len())
            .map(|j| (self.doc[j] + self.context.iter().map(|c| c[j]).sum::<f64>()) / n)
            .collect();
        let ln_sigmoid = |x: f64| -(1.0 + (-x).exp()).ln();
        -ln_sigmoid(dot(&self.target, &h))
            - self.negatives.iter().map(|u| ln_sigmoid(-dot(u, &h))).sum::<f64>()
    }
}

/// Gradients obtained by running the training update with unit learning
/// rate on a copy of the state and reading off the parameter change.
pub fn analytic_gradients(state: &MicroState) -> MicroGradients {
    let d = state.doc.len();
    let mut doc = state.doc.clone();
    let mut words: Vec<f64> = state.context.iter().flatten().copied().collect();
    let mut outputs: Vec<f64> = state.target.clone();
    outputs.extend(state.negatives.iter().flatten());
    let context: Vec<usize> = (0..state.context.len()).collect();
    let negatives: Vec<usize> = (1..=state.negatives.len()).collect();
    let (mut hidden, mut grad) = (vec![0.0; d], vec![0.0; d]);
    sgd_step(
        &mut doc,
        &mut words,
        &mut outputs,
        &context,
        0,
        &negatives,
        1.0,
        Trainable {
            words: true,
            outputs: true,
        },
        &mut hidden,
        &mut grad,
    );
    let diff = |before: &[f64], after: &[f64]| -> Vec<f64> {
        before.iter().zip(after).map(|(b, a)| b - a).collect()
    };
    MicroState {
        doc: diff(&state.doc, &doc),
        context: state
            .context
            .iter()
            .enumerate()
            .map(|(i, c)| diff(c, row(&words, i, d)))
            .collect(),
        target: diff(&state.target, row(&outputs, 0, d)),
        negatives: state
            .negatives
            .iter()
            .enumerate()
            .map(|(i, u)| diff(u, row(&outputs, i + 1, d)))
            .collect(),
    }
}

/// Central finite-difference gradients of [`MicroState::loss`].
pub fn numerical_gradients(state: &MicroState, step: f64) -> Vec<f64> {
    let n = state.params().len();
    (0..n)
        .map(|k| {
            let mut plus = state.clone();
            *plus.params_mut()[k] += step;
            let mut minus = state.clone();
            *minus.params_mut()[k] -= step;
            (plus.loss() - minus.loss()) / (2.0 * step)
        })
        .collect()
}

/// Maximum relative error between `gradients(state)` and central finite
/// differences with step 1e-4.
pub fn gradient_check_with(state: &MicroState, gradients: impl Fn(&MicroState) -> MicroGradients) -> f64 {
    let analytic = gradients(state).params();
    let numeric = numerical_gradients(state, 1e-4);
    analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-6))
        .fold(0.0, f64::max)
}

pub fn gradient_check(state: &MicroState) -> f64 {
    gradient_check_with(state, analytic_gradients)
}
