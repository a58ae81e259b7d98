//! Synthetic corpora with a planted lexical signal.
//!
//! Each document draws a latent score `u ~ U[1, 5]` (plus any configured
//! group shifts, clamped back into range). Every token is a signal word with
//! probability `0.3 + 0.25 · λ · (u − 3) / 2` and a noise word otherwise.
//! Likert items are `round(u + N(0, item_noise))` clamped to 1..=5, so the
//! target goes through the ordinary item-averaging path.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Gender, ResponseRecord};
use crate::embed::EmbeddingTable;
use crate::error::{Error, Result};
use crate::lexicon::CategoryLexicon;
use crate::metrics::pearson;
use crate::seed::{self, Rng};

const BASE_SIGNAL_RATE: f64 = 0.3;
const SIGNAL_AMPLITUDE: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub label: String,
    pub proportion: f64,
    #[serde(default)]
    pub mean_shift: f64,
}

impl GroupSpec {
    pub fn new(label: &str, proportion: f64, mean_shift: f64) -> Self {
        GroupSpec {
            label: label.to_string(),
            proportion,
            mean_shift,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub documents: usize,
    pub signal_words: usize,
    pub noise_words: usize,
    pub length_mean: f64,
    pub length_sd: f64,
    /// Change in mean length per unit of latent score above 3.
    pub length_slope: f64,
    /// λ in [0, 1].
    pub signal_strength: f64,
    pub items: usize,
    pub item_noise: f64,
    pub genders: Vec<GroupSpec>,
    pub job_families: Vec<GroupSpec>,
    pub embedding_dimension: usize,
    /// Emit an `x_openness` column correlated with the latent score.
    pub extra_trait: bool,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            documents: 2000,
            signal_words: 10,
            noise_words: 200,
            length_mean: 200.0,
            length_sd: 60.0,
            length_slope: 0.0,
            signal_strength: 1.0,
            items: 6,
            item_noise: 0.5,
            genders: vec![GroupSpec::new("female", 0.5, 0.0), GroupSpec::new("male", 0.5, 0.0)],
            job_families: vec![
                GroupSpec::new("engineering", 0.4, 0.0),
                GroupSpec::new("sales", 0.3, 0.0),
                GroupSpec::new("support", 0.3, 0.0),
            ],
            embedding_dimension: 50,
            extra_trait: true,
            seed: 0,
        }
    }
}

fn validate_groups(name: &str, groups: &[GroupSpec]) -> Result<()> {
    if groups.is_empty() {
        return Err(Error::config(format!("{name}: at least one group is required")));
    }
    if groups.iter().any(|g| !(g.proportion >= 0.0) || !g.mean_shift.is_finite()) {
        return Err(Error::config(format!("{name}: proportions must be >= 0 and shifts finite")));
    }
    let total: f64 = groups.iter().map(|g| g.proportion).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::config(format!("{name}: proportions sum to {total}, expected 1")));
    }
    Ok(())
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.signal_strength) {
            return Err(Error::config("signal_strength must lie in [0, 1]"));
        }
        if self.signal_words == 0 || self.noise_words == 0 {
            return Err(Error::config("signal_words and noise_words must be at least 1"));
        }
        if self.documents == 0 || self.items == 0 || self.embedding_dimension == 0 {
            return Err(Error::config("documents, items and embedding_dimension must be positive"));
        }
        if !(self.length_mean > 0.0) || !(self.length_sd >= 0.0) || !(self.item_noise >= 0.0) {
            return Err(Error::config("length_mean must be positive; length_sd and item_noise non-negative"));
        }
        validate_groups("genders", &self.genders)?;
        validate_groups("job_families", &self.job_families)?;
        for g in &self.genders {
            g.label.parse::<Gender>().map_err(Error::config)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub corpus: Corpus,
    pub embeddings: EmbeddingTable,
    /// Pearson r between the latent score and each document's realized
    /// signal-word fraction.
    pub oracle_r: f64,
    pub latent: Vec<f64>,
    pub signal_fraction: Vec<f64>,
    pub signal_words: Vec<String>,
    pub noise_words: Vec<String>,
}

const ONSETS: &[&str] = &["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u"];

/// Distinct pronounceable three-syllable words.
fn make_words(rng: &mut Rng, n: usize) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let w: String = (0..3)
            .map(|_| {
                let c = ONSETS[rng.random_range(0..ONSETS.len())];
                let v = VOWELS[rng.random_range(0..VOWELS.len())];
                format!("{c}{v}")
            })
            .collect();
        if seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

fn pick_group<'a>(rng: &mut Rng, groups: &'a [GroupSpec]) -> &'a GroupSpec {
    let x: f64 = rng.random();
    let mut acc = 0.0;
    for g in groups {
        acc += g.proportion;
        if x < acc {
            return g;
        }
    }
    groups.last().expect("validated nonempty")
}

struct Draft {
    record: ResponseRecord,
    latent: f64,
    signal_fraction: f64,
}

fn draft(config: &SynthConfig, index: usize, signal: &[String], noise: &[String]) -> Draft {
    let mut rng = seed::rng(seed::derive_indexed(config.seed, "document", index as u64));
    let gender = pick_group(&mut rng, &config.genders);
    let family = pick_group(&mut rng, &config.job_families);
    let u = (1.0 + 4.0 * rng.random::<f64>() + gender.mean_shift + family.mean_shift).clamp(1.0, 5.0);
    let p = BASE_SIGNAL_RATE + SIGNAL_AMPLITUDE * config.signal_strength * (u - 3.0) / 2.0;

    let mean_len = config.length_mean + config.length_slope * (u - 3.0);
    let len = if config.length_sd > 0.0 {
        Normal::new(mean_len, config.length_sd).expect("validated sd").sample(&mut rng)
    } else {
        mean_len
    };
    let len = (len.round() as i64).max(1) as usize;

    let mut text = String::new();
    let mut signal_hits = 0usize;
    let mut until_break = rng.random_range(12..=18);
    let mut sentence_start = true;
    for i in 0..len {
        let word = if rng.random::<f64>() < p {
            signal_hits += 1;
            &signal[rng.random_range(0..signal.len())]
        } else {
            &noise[rng.random_range(0..noise.len())]
        };
        if i > 0 {
            text.push(' ');
        }
        if sentence_start {
            let mut cs = word.chars();
            let first = cs.next().expect("nonempty word");
            text.extend(first.to_uppercase());
            text.push_str(cs.as_str());
            sentence_start = false;
        } else {
            text.push_str(word);
        }
        until_break -= 1;
        if until_break == 0 || i + 1 == len {
            text.push('.');
            sentence_start = true;
            until_break = rng.random_range(12..=18);
        }
    }

    let item_noise = Normal::new(0.0, config.item_noise).expect("validated sd");
    let items: Vec<u8> = (0..config.items)
        .map(|_| (u + item_noise.sample(&mut rng)).round().clamp(1.0, 5.0) as u8)
        .collect();
    let mut extra = BTreeMap::new();
    if config.extra_trait {
        let z: f64 = Normal::new(0.0, 0.5).expect("constant sd").sample(&mut rng);
        extra.insert("openness".to_string(), 3.0 + 0.4 * (u - 3.0) + z);
    }

    let mut record = ResponseRecord::new(format!("doc_{index:05}"), text);
    record.items = items;
    record.gender = gender.label.parse().expect("validated gender label");
    record.job_family = family.label.clone();
    record.extra = extra;
    Draft {
        record,
        latent: u,
        signal_fraction: signal_hits as f64 / len as f64,
    }
}

fn embeddings(config: &SynthConfig, signal: &[String], noise: &[String]) -> Result<EmbeddingTable> {
    let d = config.embedding_dimension;
    let mut rng = seed::rng(seed::derive(config.seed, "embeddings"));
    let scale = 1.0 / (d as f64).sqrt();
    let normal = Normal::new(0.0, scale).expect("positive sd");
    let random_vec = |rng: &mut Rng| -> Vec<f64> { (0..d).map(|_| normal.sample(rng)).collect() };
    // signal words share a common offset so averaged vectors carry the signal
    let offset = random_vec(&mut rng);
    let mut entries = Vec::with_capacity(signal.len() + noise.len());
    for w in signal {
        let v = random_vec(&mut rng);
        entries.push((w.clone(), v.iter().zip(&offset).map(|(a, b)| 0.3 * a + b).collect()));
    }
    for w in noise {
        entries.push((w.clone(), random_vec(&mut rng)));
    }
    EmbeddingTable::new(d, entries)
}

pub fn generate(config: &SynthConfig) -> Result<SynthOutput> {
    config.validate()?;
    let mut vocab_rng = seed::rng(seed::derive(config.seed, "vocabulary"));
    let mut words = make_words(&mut vocab_rng, config.signal_words + config.noise_words);
    let noise_words = words.split_off(config.signal_words);
    let signal_words = words;

    let drafts: Vec<Draft> = (0..config.documents)
        .into_par_iter()
        .map(|i| draft(config, i, &signal_words, &noise_words))
        .collect();
    let latent: Vec<f64> = drafts.iter().map(|d| d.latent).collect();
    let signal_fraction: Vec<f64> = drafts.iter().map(|d| d.signal_fraction).collect();
    let oracle_r = pearson(&latent, &signal_fraction).map(|c| c.r).unwrap_or(0.0);
    let corpus = Corpus::new(drafts.into_iter().map(|d| d.record).collect())?;
    let embeddings = embeddings(config, &signal_words, &noise_words)?;
    Ok(SynthOutput {
        corpus,
        embeddings,
        oracle_r,
        latent,
        signal_fraction,
        signal_words,
        noise_words,
    })
}

/// A small category lexicon over the synthetic vocabulary: four categories,
/// words assigned round-robin, so each category mixes signal and noise words.
pub fn demo_lexicon(output: &SynthOutput) -> CategoryLexicon {
    let names = ["alpha", "beta", "gamma", "delta"];
    let mut dic = String::from("%\n");
    for (i, n) in names.iter().enumerate() {
        dic.push_str(&format!("{}\t{n}\n", i + 1));
    }
    dic.push_str("%\n");
    for (i, w) in output.signal_words.iter().chain(&output.noise_words).enumerate() {
        dic.push_str(&format!("{w}\t{}\n", i % names.len() + 1));
    }
    CategoryLexicon::parse(&dic, Path::new("synthetic.dic")).expect("generated lexicon is well formed")
}
