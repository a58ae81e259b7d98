//! Evaluation protocol: filter by length, split, fit on the training side
//! only, score the held-out side by Pearson r. Also the method × length
//! grid, correlates of the predicted score, and demographic breakdowns.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Gender, SplitSpec};
use crate::error::{Error, Result};
use crate::forest::ForestConfig;
use crate::metrics::{anova_f, cohens_d, coleman_liau, difficult_words, fscore, pearson};
use crate::metrics::{AnovaResult, CorrelationResult, EasyWords, PosLexicon};
use crate::pipeline::{Featurizer, Pipeline};
use crate::seed;
use crate::text::{sentences, tokenize};

/// Seconds since the epoch, or `SOURCE_DATE_EPOCH` when set so that
/// repeated runs can produce identical files.
pub fn timestamp() -> u64 {
    if let Some(v) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.parse().ok()) {
        return v;
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub featurizer: String,
    pub featurizer_params: serde_json::Value,
    pub forest: ForestConfig,
    pub min_length: usize,
    pub split: SplitSpec,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub r: f64,
    pub p: f64,
    pub fingerprint: String,
    pub timestamp: u64,
}

#[derive(Serialize)]
struct FingerprintInput<'a> {
    featurizer: &'a str,
    featurizer_params: &'a serde_json::Value,
    forest: &'a ForestConfig,
    min_length: usize,
    split: &'a SplitSpec,
    seed: u64,
}

impl EvalReport {
    /// Hash of every seed and hyperparameter that determines the result.
    pub fn compute_fingerprint(&self) -> String {
        let input = FingerprintInput {
            featurizer: &self.featurizer,
            featurizer_params: &self.featurizer_params,
            forest: &self.forest,
            min_length: self.min_length,
            split: &self.split,
            seed: self.seed,
        };
        seed::fingerprint(&serde_json::to_vec(&input).expect("serializable"))
    }

    pub fn to_text(&self) -> String {
        format!(
            "featurizer   {}\nmin_length   {}\nn_train      {}\nn_test       {}\nr            {:.4}\np            {:.4e}\nfingerprint  {}\n",
            self.featurizer, self.min_length, self.n_train, self.n_test, self.r, self.p, self.fingerprint
        )
    }
}

/// An evaluation together with the held-out predictions it was scored on.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: EvalReport,
    pub test_ids: Vec<String>,
    pub actual: Vec<f64>,
    pub predicted: Vec<f64>,
}

impl Evaluation {
    /// `id,actual,predicted` rows.
    pub fn predictions_csv(&self) -> Result<String> {
        predictions_csv(&self.test_ids, &self.actual, &self.predicted)
    }
}

pub fn predictions_csv(ids: &[String], actual: &[f64], predicted: &[f64]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Internal(e.to_string());
    w.write_record(["id", "actual", "predicted"]).map_err(err)?;
    for ((id, a), p) in ids.iter().zip(actual).zip(predicted) {
        w.write_record([id.clone(), a.to_string(), p.to_string()]).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn evaluate(
    featurizer: &Featurizer,
    forest: &ForestConfig,
    corpus: &Corpus,
    split: &SplitSpec,
    min_length: usize,
    seed: u64,
) -> Result<Evaluation> {
    let filtered = corpus.filter_min_length(min_length);
    let (train, test) = filtered.split(split)?;
    if test.len() < 3 || train.len() < 2 {
        return Err(Error::data(format!(
            "min_length {min_length} leaves {} training and {} test records; need at least 2 and 3",
            train.len(),
            test.len()
        )));
    }
    let pipeline = Pipeline::fit(featurizer, forest, &train, seed)?;
    // the held-out side is featurized without its targets
    let predicted = pipeline.predict(&test.without_targets())?;
    let actual = test.targets()?;
    let c = pearson(&actual, &predicted)?;
    let mut report = EvalReport {
        featurizer: featurizer.kind().to_string(),
        featurizer_params: featurizer.params(),
        forest: forest.clone(),
        min_length,
        split: *split,
        seed,
        n_train: train.len(),
        n_test: test.len(),
        r: c.r,
        p: c.p_two_sided,
        fingerprint: String::new(),
        timestamp: timestamp(),
    };
    report.fingerprint = report.compute_fingerprint();
    Ok(Evaluation {
        report,
        test_ids: test.ids().into_iter().map(str::to_string).collect(),
        actual,
        predicted,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub featurizer: String,
    pub min_length: usize,
    pub report: Option<EvalReport>,
    /// Why the cell failed, when it did.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub featurizers: Vec<String>,
    pub min_lengths: Vec<usize>,
    /// Featurizer-major order.
    pub cells: Vec<GridCell>,
}

/// Split seed shared by every cell at one minimum length.
pub fn split_seed(master: u64, min_length: usize) -> u64 {
    seed::derive_indexed(master, "split", min_length as u64)
}

pub fn cell_seed(master: u64, featurizer: &str, min_length: usize) -> u64 {
    seed::derive_indexed(master, &format!("cell:{featurizer}"), min_length as u64)
}

pub fn run_grid(
    corpus: &Corpus,
    featurizers: &[Featurizer],
    min_lengths: &[usize],
    forest: &ForestConfig,
    train_fraction: f64,
    master_seed: u64,
) -> Result<GridResult> {
    let ids: Vec<String> = featurizers.iter().map(|f| f.kind().to_string()).collect();
    if ids.iter().collect::<BTreeSet<_>>().len() != ids.len() {
        return Err(Error::config("grid featurizers must be distinct kinds"));
    }
    SplitSpec::new(train_fraction, 0)?;
    let jobs: Vec<(usize, usize)> = (0..featurizers.len())
        .flat_map(|f| min_lengths.iter().map(move |&m| (f, m)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(f, min_length)| {
            let featurizer = &featurizers[f];
            let split = SplitSpec {
                train_fraction,
                seed: split_seed(master_seed, min_length),
            };
            let seed = cell_seed(master_seed, featurizer.kind(), min_length);
            let outcome = evaluate(featurizer, forest, corpus, &split, min_length, seed);
            match &outcome {
                Ok(e) => log::info!("{} @ {min_length}: r = {:.4}", featurizer.kind(), e.report.r),
                Err(e) => log::warn!("{} @ {min_length} failed: {e}", featurizer.kind()),
            }
            let (report, error) = match outcome {
                Ok(e) => (Some(e.report), None),
                Err(e) => (None, Some(e.to_string())),
            };
            GridCell {
                featurizer: featurizer.kind().to_string(),
                min_length,
                report,
                error,
            }
        })
        .collect();
    Ok(GridResult {
        featurizers: ids,
        min_lengths: min_lengths.to_vec(),
        cells,
    })
}

impl GridResult {
    pub fn cell(&self, featurizer: &str, min_length: usize) -> Option<&GridCell> {
        self.cells
            .iter()
            .find(|c| c.featurizer == featurizer && c.min_length == min_length)
    }

    /// Index of the successful cell with the largest r; the first one wins ties.
    pub fn best_cell(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in self.cells.iter().enumerate() {
            if let Some(r) = c.report.as_ref().map(|r| r.r) {
                if best.is_none_or(|(_, b)| r > b) {
                    best = Some((i, r));
                }
            }
        }
        best.map(|(i, _)| i)
    }

    /// Plot data: `featurizer,min_length,r,p,n` with blanks for failed cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("featurizer,min_length,r,p,n\n");
        for c in &self.cells {
            match &c.report {
                Some(r) => writeln!(out, "{},{},{},{},{}", c.featurizer, c.min_length, r.r, r.p, r.n_test),
                None => writeln!(out, "{},{},,,", c.featurizer, c.min_length),
            }
            .unwrap();
        }
        out
    }

    /// Featurizers as rows, minimum lengths as columns; the best cell is
    /// marked with `*` and failed cells show `failed`.
    pub fn to_table(&self) -> String {
        let best = self.best_cell();
        let mut out = format!("{:<10}", "method");
        for m in &self.min_lengths {
            write!(out, "{:>12}", format!("min={m}")).unwrap();
        }
        out.push('\n');
        for f in &self.featurizers {
            write!(out, "{f:<10}").unwrap();
            for &m in &self.min_lengths {
                let i = self
                    .cells
                    .iter()
                    .position(|c| &c.featurizer == f && c.min_length == m);
                let text = match i.map(|i| (i, &self.cells[i])) {
                    Some((i, GridCell { report: Some(r), .. })) => {
                        format!("{:.3}{}", r.r, if Some(i) == best { "*" } else { " " })
                    }
                    Some(_) => "failed ".to_string(),
                    None => "- ".to_string(),
                };
                write!(out, "{text:>12}").unwrap();
            }
            out.push('\n');
        }
        for c in self.cells.iter().filter(|c| c.error.is_some()) {
            writeln!(
                out,
                "{} @ {}: {}",
                c.featurizer,
                c.min_length,
                c.error.as_deref().unwrap_or_default()
            )
            .unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelateRow {
    pub metric: String,
    pub correlation: CorrelationResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelateTable {
    pub rows: Vec<CorrelateRow>,
    /// `(metric, reason)` for series that could not be correlated.
    pub skipped: Vec<(String, String)>,
}

impl CorrelateTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,r,p,n\n");
        for row in &self.rows {
            let c = &row.correlation;
            writeln!(out, "{},{},{},{}", row.metric, c.r, c.p_two_sided, c.n).unwrap();
        }
        out
    }

    pub fn get(&self, metric: &str) -> Option<&CorrelationResult> {
        self.rows.iter().find(|r| r.metric == metric).map(|r| &r.correlation)
    }
}

/// Correlate predictions with length, sentence count, formality,
/// readability, difficult-word count, and every `extra` column.
pub fn correlate_outputs(
    predictions: &[f64],
    corpus: &Corpus,
    pos: &PosLexicon,
    easy: &EasyWords,
) -> Result<CorrelateTable> {
    if predictions.len() != corpus.len() {
        return Err(Error::data(format!(
            "{} predictions for {} records",
            predictions.len(),
            corpus.len()
        )));
    }
    let records = corpus.records();
    let per_record: Vec<[Option<f64>; 5]> = records
        .par_iter()
        .map(|r| {
            let tokens = tokenize(&r.text);
            [
                Some(tokens.len() as f64),
                Some(sentences(&r.text).len() as f64),
                fscore(&tokens, pos).ok(),
                coleman_liau(&r.text).ok(),
                Some(difficult_words(&tokens, easy) as f64),
            ]
        })
        .collect();
    let mut series: Vec<(String, Vec<Option<f64>>)> = [
        "response_length",
        "sentence_count",
        "fscore",
        "coleman_liau",
        "difficult_words",
    ]
    .iter()
    .enumerate()
    .map(|(k, name)| (name.to_string(), per_record.iter().map(|v| v[k]).collect()))
    .collect();
    let extras: BTreeSet<&String> = records.iter().flat_map(|r| r.extra.keys()).collect();
    for key in extras {
        series.push((
            format!("x_{key}"),
            records.iter().map(|r| r.extra.get(key).copied()).collect(),
        ));
    }

    let mut table = CorrelateTable {
        rows: Vec::new(),
        skipped: Vec::new(),
    };
    for (metric, values) in series {
        let (x, y): (Vec<f64>, Vec<f64>) = values
            .iter()
            .zip(predictions)
            .filter_map(|(v, p)| v.map(|v| (v, *p)))
            .unzip();
        match pearson(&y, &x) {
            Ok(correlation) => table.rows.push(CorrelateRow { metric, correlation }),
            Err(e) => {
                log::warn!("skipping {metric}: {e}");
                table.skipped.push((metric, e.to_string()));
            }
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupAttribute {
    Gender,
    JobFamily,
}

impl std::str::FromStr for GroupAttribute {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "gender" => Ok(GroupAttribute::Gender),
            "job_family" => Ok(GroupAttribute::JobFamily),
            other => Err(format!("unknown group attribute {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub group: String,
    pub count: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub attribute: GroupAttribute,
    pub groups: Vec<GroupStats>,
    /// Female minus male, gender only.
    pub cohens_d: Option<f64>,
    /// Job family only.
    pub anova: Option<AnovaResult>,
    pub notes: Vec<String>,
}

impl GroupReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Internal(e.to_string());
        w.write_record(["group", "count", "mean"]).map_err(err)?;
        for g in &self.groups {
            w.write_record([g.group.clone(), g.count.to_string(), g.mean.to_string()])
                .map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for g in &self.groups {
            writeln!(out, "{:<16} n={:<6} mean={:.4}", g.group, g.count, g.mean).unwrap();
        }
        if let Some(d) = self.cohens_d {
            writeln!(out, "cohen's d (female - male) = {d:.4}").unwrap();
        }
        if let Some(a) = &self.anova {
            writeln!(out, "ANOVA F({}, {}) = {:.4}, p = {:.4e}", a.df_between, a.df_within, a.f, a.p).unwrap();
        }
        for n in &self.notes {
            writeln!(out, "note: {n}").unwrap();
        }
        out
    }
}

fn group_mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn group_report(predictions: &[f64], corpus: &Corpus, attribute: GroupAttribute) -> Result<GroupReport> {
    if predictions.len() != corpus.len() {
        return Err(Error::data(format!(
            "{} predictions for {} records",
            predictions.len(),
            corpus.len()
        )));
    }
    let mut members: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (r, &p) in corpus.records().iter().zip(predictions) {
        let key = match attribute {
            GroupAttribute::Gender => match r.gender {
                Gender::Unspecified => "unspecified".to_string(),
                g => g.as_str().to_string(),
            },
            GroupAttribute::JobFamily => r.job_family.clone(),
        };
        members.entry(key).or_default().push(p);
    }
    let groups: Vec<GroupStats> = members
        .iter()
        .map(|(g, v)| GroupStats {
            group: g.clone(),
            count: v.len(),
            mean: group_mean(v),
        })
        .collect();
    let mut notes = Vec::new();
    for (g, v) in &members {
        if v.len() < 2 {
            notes.push(format!("group {g:?} has fewer than 2 members; excluded from inference"));
        }
    }
    let mut report = GroupReport {
        attribute,
        groups,
        cohens_d: None,
        anova: None,
        notes,
    };
    match attribute {
        GroupAttribute::Gender => {
            let female = members.get("female").map(Vec::as_slice).unwrap_or_default();
            let male = members.get("male").map(Vec::as_slice).unwrap_or_default();
            report.cohens_d = match cohens_d(female, male) {
                Ok(d) => Some(d),
                // both groups constant: equal means give no difference at all
                Err(_) if female.len() >= 2 && male.len() >= 2 && group_mean(female) == group_mean(male) => Some(0.0),
                Err(e) => {
                    report.notes.push(format!("cohen's d unavailable: {e}"));
                    None
                }
            };
        }
        GroupAttribute::JobFamily => {
            let eligible: Vec<&[f64]> = members.values().filter(|v| v.len() >= 2).map(Vec::as_slice).collect();
            match anova_f(&eligible) {
                Ok(a) => report.anova = Some(a),
                Err(e) => report.notes.push(format!("ANOVA unavailable: {e}")),
            }
        }
    }
    Ok(report)
}
