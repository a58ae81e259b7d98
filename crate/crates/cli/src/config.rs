use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use textrait_core::lda::LdaConfig;
use textrait_core::synth::SynthConfig;
use textrait_core::tfidf::TfidfConfig;
use textrait_core::{DatasetFormat, FeaturizerConfig, ForestConfig};

use crate::UsageError;

/// The JSON run configuration. Every field has a default, and the fully
/// populated value is written back out as `effective_config.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub dataset: Option<DatasetConfig>,
    pub featurizer: FeaturizerConfig,
    /// Featurizers compared by `grid`; empty means just `featurizer`.
    pub featurizers: Vec<FeaturizerConfig>,
    pub forest: ForestConfig,
    pub split: SplitConfig,
    pub min_length: usize,
    pub min_lengths: Vec<usize>,
    pub metrics: MetricsConfig,
    pub topics: TopicsConfig,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out: PathBuf::from("out"),
            dataset: None,
            featurizer: FeaturizerConfig::Tfidf(TfidfConfig::default()),
            featurizers: Vec::new(),
            forest: ForestConfig::default(),
            split: SplitConfig::default(),
            min_length: 0,
            min_lengths: vec![50, 100, 150, 200],
            metrics: MetricsConfig::default(),
            topics: TopicsConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub path: PathBuf,
    /// Inferred from the extension when absent.
    #[serde(default)]
    pub format: Option<DatasetFormat>,
}

impl DatasetConfig {
    pub fn format(&self) -> DatasetFormat {
        self.format.unwrap_or_else(|| DatasetFormat::from_path(&self.path))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitConfig {
    pub train_fraction: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { train_fraction: 0.8 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsConfig {
    /// One easy word per line; the built-in short list when absent.
    pub easy_words: Option<PathBuf>,
    /// `word<TAB>tag` lines overriding the built-in tagger.
    pub pos_lexicon: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TopicsConfig {
    pub lda: LdaConfig,
    pub top_terms: usize,
}

impl Default for TopicsConfig {
    fn default() -> Self {
        TopicsConfig {
            lda: LdaConfig::default(),
            top_terms: 10,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn grid_featurizers(&self) -> Vec<FeaturizerConfig> {
        if self.featurizers.is_empty() {
            vec![self.featurizer.clone()]
        } else {
            self.featurizers.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::parse("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(RunConfig::parse(&text).unwrap(), c);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = RunConfig::parse(r#"{"sede": 3}"#).unwrap_err();
        assert!(err.to_string().contains("sede"), "{err}");
        let err = RunConfig::parse(r#"{"forest": {"trees": 3, "depth": 2}}"#).unwrap_err();
        assert!(err.to_string().contains("depth"), "{err}");
    }
}
