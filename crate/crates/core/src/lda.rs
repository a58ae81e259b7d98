//! Latent Dirichlet Allocation fitted by collapsed Gibbs sampling.
//!
//! A document's topic vector is `p(θ|r) = Σ_t p(θ|t) p(t|r)`, where `p(t|r)`
//! is the in-vocabulary relative frequency of unigram `t` and `p(θ|t)` is the
//! Bayes inversion of the topic-term matrix with the topic prior estimated
//! from the final Gibbs assignments.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::metrics::stats::{pearson, CorrelationResult};
use crate::seed;
use crate::text::{tokenize, NgramOrders, Selection, TokenStream, Vocabulary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LdaConfig {
    pub topics: usize,
    /// Document-topic prior; `None` means `50 / topics`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    /// Keep only the most frequent unigrams; `None` keeps all.
    pub max_vocab: Option<usize>,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            topics: 100,
            alpha: None,
            beta: 0.01,
            iterations: 1000,
            max_vocab: None,
        }
    }
}

impl LdaConfig {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.topics as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    topics: usize,
    terms: Vec<String>,
    index: BTreeMap<String, usize>,
    /// Row-major `topics × |V|`.
    phi: Vec<f64>,
    topic_prior: Vec<f64>,
    alpha: f64,
    beta: f64,
    iterations: usize,
    seed: u64,
    /// Row-major `|V| × topics`, `p(θ|t)`.
    posterior: Vec<f64>,
}

/// Topic vector for one document.
#[derive(Debug, Clone, PartialEq)]
pub struct DocTopics {
    pub weights: Vec<f64>,
    /// Set when no token was in the model vocabulary; weights are uniform.
    pub out_of_vocabulary: bool,
}

impl TopicModel {
    pub fn fit(docs: &[TokenStream], config: &LdaConfig, seed: u64) -> Result<Self> {
        let k = config.topics;
        if k < 2 {
            return Err(Error::config("LDA needs at least 2 topics"));
        }
        if !(config.beta > 0.0) || !(config.alpha() > 0.0) {
            return Err(Error::config("LDA priors must be positive"));
        }
        if docs.iter().all(TokenStream::is_empty) {
            return Err(Error::data("LDA training corpus has no tokens"));
        }
        let vocab = Vocabulary::build(
            docs,
            config.max_vocab.unwrap_or(usize::MAX),
            &NgramOrders::unigrams(),
            Selection::TermFrequency,
        )?;
        let v = vocab.len();
        let words: Vec<Vec<usize>> = docs
            .iter()
            .map(|d| d.iter().filter_map(|t| vocab.get(t)).collect())
            .collect();

        let alpha = config.alpha();
        let beta = config.beta;
        let v_beta = v as f64 * beta;
        let mut rng = seed::rng(seed);

        let mut doc_topic = vec![0u32; docs.len() * k];
        let mut term_topic = vec![0u32; v * k];
        let mut topic_total = vec![0u64; k];
        let mut assignment: Vec<Vec<u32>> = Vec::with_capacity(words.len());
        for (d, ws) in words.iter().enumerate() {
            let mut z = Vec::with_capacity(ws.len());
            for &t in ws {
                let topic = rng.random_range(0..k);
                doc_topic[d * k + topic] += 1;
                term_topic[t * k + topic] += 1;
                topic_total[topic] += 1;
                z.push(topic as u32);
            }
            assignment.push(z);
        }

        let mut cumulative = vec![0.0f64; k];
        for _ in 0..config.iterations {
            for (d, ws) in words.iter().enumerate() {
                let dt = &mut doc_topic[d * k..(d + 1) * k];
                for (i, &t) in ws.iter().enumerate() {
                    let old = assignment[d][i] as usize;
                    let tt = &mut term_topic[t * k..(t + 1) * k];
                    dt[old] -= 1;
                    tt[old] -= 1;
                    topic_total[old] -= 1;

                    let mut acc = 0.0;
                    for j in 0..k {
                        acc += (f64::from(dt[j]) + alpha) * (f64::from(tt[j]) + beta)
                            / (topic_total[j] as f64 + v_beta);
                        cumulative[j] = acc;
                    }
                    let u = rng.random::<f64>() * acc;
                    let new = cumulative.partition_point(|&c| c <= u).min(k - 1);

                    dt[new] += 1;
                    tt[new] += 1;
                    topic_total[new] += 1;
                    assignment[d][i] = new as u32;
                }
            }
        }

        let mut phi = vec![0.0; k * v];
        for topic in 0..k {
            let denom = topic_total[topic] as f64 + v_beta;
            for t in 0..v {
                phi[topic * v + t] = (f64::from(term_topic[t * k + topic]) + beta) / denom;
            }
        }
        let total: u64 = topic_total.iter().sum();
        let topic_prior = topic_total.iter().map(|&c| c as f64 / total as f64).collect();
        let terms = vocab.entries().iter().map(|e| e.ngram.clone()).collect();
        Self::from_parts(terms, k, phi, topic_prior, alpha, beta, config.iterations, seed)
    }

    pub fn fit_corpus(corpus: &Corpus, config: &LdaConfig, seed: u64) -> Result<Self> {
        let docs: Vec<TokenStream> = corpus.records().iter().map(|r| tokenize(&r.text)).collect();
        Self::fit(&docs, config, seed)
    }

    /// Assemble a model from stored parameters, validating normalization.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        terms: Vec<String>,
        topics: usize,
        phi: Vec<f64>,
        topic_prior: Vec<f64>,
        alpha: f64,
        beta: f64,
        iterations: usize,
        seed: u64,
    ) -> Result<Self> {
        let v = terms.len();
        if topics < 2 || phi.len() != topics * v || topic_prior.len() != topics {
            return Err(Error::ModelFile("topic model shapes are inconsistent".into()));
        }
        let index: BTreeMap<String, usize> =
            terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        if index.len() != v {
            return Err(Error::ModelFile("duplicate term in topic model vocabulary".into()));
        }
        let mut posterior = vec![0.0; v * topics];
        for t in 0..v {
            let row = &mut posterior[t * topics..(t + 1) * topics];
            let mut z = 0.0;
            for k in 0..topics {
                row[k] = phi[k * v + t] * topic_prior[k];
                z += row[k];
            }
            if z > 0.0 {
                row.iter_mut().for_each(|x| *x /= z);
            } else {
                row.iter_mut().for_each(|x| *x = 1.0 / topics as f64);
            }
        }
        Ok(TopicModel {
            topics,
            terms,
            index,
            phi,
            topic_prior,
            alpha,
            beta,
            iterations,
            seed,
            posterior,
        })
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn phi_row(&self, topic: usize) -> &[f64] {
        let v = self.terms.len();
        &self.phi[topic * v..(topic + 1) * v]
    }

    pub fn topic_prior(&self) -> &[f64] {
        &self.topic_prior
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn term_index(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// `p(θ|t)` for every topic, or `None` for an unknown term.
    pub fn topics_given_term(&self, term: &str) -> Option<&[f64]> {
        let k = self.topics;
        self.term_index(term)
            .map(|t| &self.posterior[t * k..(t + 1) * k])
    }

    pub fn doc_topics(&self, tokens: &TokenStream) -> DocTopics {
        let k = self.topics;
        let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
        for tok in tokens.iter() {
            if let Some(t) = self.term_index(tok) {
                *counts.entry(t).or_insert(0) += 1;
            }
        }
        let total: u64 = counts.values().sum();
        if total == 0 {
            return DocTopics {
                weights: vec![1.0 / k as f64; k],
                out_of_vocabulary: true,
            };
        }
        let mut weights = vec![0.0; k];
        for (&t, &c) in &counts {
            let p_t = c as f64 / total as f64;
            for (w, post) in weights.iter_mut().zip(&self.posterior[t * k..(t + 1) * k]) {
                *w += post * p_t;
            }
        }
        DocTopics {
            weights,
            out_of_vocabulary: false,
        }
    }

    /// The `n` terms with the highest `φ_topic(t)`, descending.
    pub fn top_terms(&self, topic: usize, n: usize) -> Result<Vec<(String, f64)>> {
        if topic >= self.topics {
            return Err(Error::config(format!(
                "topic {topic} out of range for a {}-topic model",
                self.topics
            )));
        }
        let row = self.phi_row(topic);
        let mut order: Vec<usize> = (0..row.len()).collect();
        order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        Ok(order
            .into_iter()
            .take(n)
            .map(|t| (self.terms[t].clone(), row[t]))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicCorrelation {
    pub topic: usize,
    pub top_terms: Vec<(String, f64)>,
    /// `None` when the topic weight is constant across documents.
    pub correlation: Option<CorrelationResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicReport {
    pub topics: Vec<TopicCorrelation>,
    pub most_positive: Option<usize>,
    pub most_negative: Option<usize>,
}

impl TopicReport {
    /// Word-cloud weights as `topic,term,weight` CSV.
    pub fn word_cloud_csv(&self) -> String {
        let mut out = String::from("topic,term,weight\n");
        for t in &self.topics {
            for (term, w) in &t.top_terms {
                writeln!(out, "{},{},{}", t.topic, term, w).unwrap();
            }
        }
        out
    }

    /// Per-topic correlation table as `topic,r,p,n` CSV.
    pub fn correlations_csv(&self) -> String {
        let mut out = String::from("topic,r,p,n\n");
        for t in &self.topics {
            match &t.correlation {
                Some(c) => writeln!(out, "{},{},{},{}", t.topic, c.r, c.p_two_sided, c.n).unwrap(),
                None => writeln!(out, "{},,,", t.topic).unwrap(),
            }
        }
        out
    }
}

/// Correlate every topic's document weight with the target score.
pub fn topic_correlations(model: &TopicModel, corpus: &Corpus, top_n: usize) -> Result<TopicReport> {
    if corpus.len() < 3 {
        return Err(Error::data("topic correlations need at least 3 documents"));
    }
    let targets = corpus.targets()?;
    let weights: Vec<Vec<f64>> = corpus
        .records()
        .iter()
        .map(|r| model.doc_topics(&tokenize(&r.text)).weights)
        .collect();
    let mut topics = Vec::with_capacity(model.topics());
    for k in 0..model.topics() {
        let series: Vec<f64> = weights.iter().map(|w| w[k]).collect();
        let correlation = pearson(&series, &targets).ok();
        topics.push(TopicCorrelation {
            topic: k,
            top_terms: model.top_terms(k, top_n)?,
            correlation,
        });
    }
    let extreme = |better: fn(f64, f64) -> bool| {
        topics
            .iter()
            .filter_map(|t| t.correlation.as_ref().map(|c| (t.topic, c.r)))
            .fold(None::<(usize, f64)>, |best, (k, r)| match best {
                Some((_, b)) if !better(r, b) => best,
                _ => Some((k, r)),
            })
            .map(|(k, _)| k)
    };
    Ok(TopicReport {
        most_positive: extreme(|a, b| a > b),
        most_negative: extreme(|a, b| a < b),
        topics,
    })
}
