//! Labeled response datasets: loading, regression targets, length filters
//! and train/test splits.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Female,
    Male,
    #[default]
    Unspecified,
}

impl Gender {
    pub fn as_str(&self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
            Gender::Unspecified => "",
        }
    }
}

impl FromStr for Gender {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "female" => Ok(Gender::Female),
            "male" => Ok(Gender::Male),
            "" | "unspecified" => Ok(Gender::Unspecified),
            other => Err(format!("unknown gender value {other:?}")),
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gender::Unspecified => f.write_str("unspecified"),
            g => f.write_str(g.as_str()),
        }
    }
}

/// One candidate's response together with its ratings and attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub id: String,
    pub text: String,
    /// Answered Likert items, each in 1..=5.
    pub items: Vec<u8>,
    /// Precomputed target, used verbatim when present.
    pub score: Option<f64>,
    pub gender: Gender,
    pub job_family: String,
    /// Externally supplied numeric columns (`x_<name>` in datasets).
    pub extra: BTreeMap<String, f64>,
}

impl ResponseRecord {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        ResponseRecord {
            id: id.into(),
            text: text.into(),
            items: Vec::new(),
            score: None,
            gender: Gender::Unspecified,
            job_family: String::new(),
            extra: BTreeMap::new(),
        }
    }

    /// The regression target: the precomputed score when present, otherwise
    /// the mean of the answered items.
    pub fn target_score(&self) -> Result<f64> {
        if let Some(s) = self.score {
            return Ok(s);
        }
        if self.items.is_empty() {
            return Err(Error::data(format!(
                "record {:?} has neither items nor a precomputed score",
                self.id
            )));
        }
        let sum: u32 = self.items.iter().map(|&i| u32::from(i)).sum();
        Ok(f64::from(sum) / self.items.len() as f64)
    }

    pub fn has_target(&self) -> bool {
        self.score.is_some() || !self.items.is_empty()
    }

    pub fn word_count(&self) -> usize {
        text::word_count(&self.text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    Csv,
    Jsonl,
}

impl DatasetFormat {
    /// Guess from the file extension; anything but `.jsonl`/`.json` is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") => DatasetFormat::Jsonl,
            _ => DatasetFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub source: Option<PathBuf>,
    /// Every `min_words` threshold applied, in order.
    pub min_length_filters: Vec<usize>,
}

/// An ordered collection of records with unique ids.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Corpus {
    records: Vec<ResponseRecord>,
    provenance: Provenance,
}

impl Corpus {
    pub fn new(records: Vec<ResponseRecord>) -> Result<Self> {
        let mut seen = HashSet::new();
        for r in &records {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::data(format!("duplicate id {:?}", r.id)));
            }
            if let Some(bad) = r.items.iter().find(|i| !(1..=5).contains(*i)) {
                return Err(Error::data(format!(
                    "record {:?}: item value {bad} outside 1..5",
                    r.id
                )));
            }
        }
        Ok(Corpus {
            records,
            provenance: Provenance::default(),
        })
    }

    pub fn records(&self) -> &[ResponseRecord] {
        &self.records
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.id.as_str()).collect()
    }

    pub fn targets(&self) -> Result<Vec<f64>> {
        self.records.iter().map(ResponseRecord::target_score).collect()
    }

    pub fn load(path: &Path, format: DatasetFormat) -> Result<Self> {
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut corpus = match format {
            DatasetFormat::Csv => parse_csv(&content, path)?,
            DatasetFormat::Jsonl => parse_jsonl(&content, path)?,
        };
        corpus.provenance.source = Some(path.to_path_buf());
        Ok(corpus)
    }

    /// Keep the records with at least `min_words` tokens.
    pub fn filter_min_length(&self, min_words: usize) -> Corpus {
        let records = self
            .records
            .iter()
            .filter(|r| r.word_count() >= min_words)
            .cloned()
            .collect();
        let mut provenance = self.provenance.clone();
        provenance.min_length_filters.push(min_words);
        Corpus {
            records,
            provenance,
        }
    }

    /// Partition into (train, test) by a seeded Fisher–Yates shuffle of the
    /// record indices. Both sides keep the original record order.
    pub fn split(&self, spec: &SplitSpec) -> Result<(Corpus, Corpus)> {
        spec.validate()?;
        if self.records.is_empty() {
            return Err(Error::data("cannot split an empty corpus"));
        }
        let n = self.records.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = seed::rng(spec.seed);
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        let n_train = spec.train_size(n);
        let mut in_train = vec![false; n];
        for &i in &order[..n_train] {
            in_train[i] = true;
        }
        let (train, test): (Vec<_>, Vec<_>) = self
            .records
            .iter()
            .cloned()
            .zip(in_train)
            .partition(|(_, t)| *t);
        let side = |v: Vec<(ResponseRecord, bool)>| Corpus {
            records: v.into_iter().map(|(r, _)| r).collect(),
            provenance: self.provenance.clone(),
        };
        Ok((side(train), side(test)))
    }

    /// A copy with every target removed.
    pub fn without_targets(&self) -> Corpus {
        let mut c = self.clone();
        for r in &mut c.records {
            r.items.clear();
            r.score = None;
        }
        c
    }

    pub fn write(&self, path: &Path, format: DatasetFormat) -> Result<()> {
        let bytes = match format {
            DatasetFormat::Csv => self.to_csv_bytes()?,
            DatasetFormat::Jsonl => self.to_jsonl_bytes()?,
        };
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let n_items = self.records.iter().map(|r| r.items.len()).max().unwrap_or(0);
        let has_score = self.records.iter().any(|r| r.score.is_some());
        let extra: BTreeSet<&str> = self
            .records
            .iter()
            .flat_map(|r| r.extra.keys().map(String::as_str))
            .collect();

        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["id".to_string(), "text".into(), "gender".into(), "job_family".into()];
        header.extend((1..=n_items).map(|k| format!("item_{k}")));
        if has_score {
            header.push("score".into());
        }
        header.extend(extra.iter().map(|k| format!("x_{k}")));
        w.write_record(&header).map_err(csv_err)?;

        for r in &self.records {
            let mut row = vec![
                r.id.clone(),
                r.text.clone(),
                r.gender.as_str().to_string(),
                r.job_family.clone(),
            ];
            for k in 0..n_items {
                row.push(r.items.get(k).map(|v| v.to_string()).unwrap_or_default());
            }
            if has_score {
                row.push(r.score.map(|s| s.to_string()).unwrap_or_default());
            }
            for k in &extra {
                row.push(r.extra.get(*k).map(|v| v.to_string()).unwrap_or_default());
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.into_inner()
            .map_err(|e| Error::Internal(format!("csv writer: {e}")))
    }

    pub fn to_jsonl_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        for r in &self.records {
            let mut obj = serde_json::Map::new();
            obj.insert("id".into(), r.id.clone().into());
            obj.insert("text".into(), r.text.clone().into());
            obj.insert("gender".into(), r.gender.as_str().into());
            obj.insert("job_family".into(), r.job_family.clone().into());
            if !r.items.is_empty() {
                obj.insert("items".into(), r.items.clone().into());
            }
            if let Some(s) = r.score {
                obj.insert("score".into(), s.into());
            }
            for (k, v) in &r.extra {
                obj.insert(format!("x_{k}"), (*v).into());
            }
            serde_json::to_writer(&mut out, &obj)
                .map_err(|e| Error::Internal(format!("jsonl writer: {e}")))?;
            out.write_all(b"\n").expect("write to Vec");
        }
        Ok(out)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Internal(format!("csv writer: {e}"))
}

fn parse_item(raw: &str, path: &Path, line: usize, column: &str) -> Result<Option<u8>> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(None);
    }
    let bad = || Error::parse(path, line, format!("column {column}: item value {raw:?} is not an integer in 1..5"));
    let v: i64 = raw.parse().map_err(|_| bad())?;
    if !(1..=5).contains(&v) {
        return Err(bad());
    }
    Ok(Some(v as u8))
}

fn parse_float(raw: &str, path: &Path, line: usize, column: &str) -> Result<Option<f64>> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(None);
    }
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(Error::parse(path, line, format!("column {column}: {raw:?} is not a finite number"))),
    }
}

fn finish_record(
    mut rec: ResponseRecord,
    path: &Path,
    line: usize,
    seen: &mut HashSet<String>,
) -> Result<ResponseRecord> {
    if !rec.has_target() {
        return Err(Error::parse(path, line, "no answered items and no score"));
    }
    if rec.id.is_empty() {
        rec.id = format!("row_{}", seen.len() + 1);
    }
    if !seen.insert(rec.id.clone()) {
        return Err(Error::parse(path, line, format!("duplicate id {:?}", rec.id)));
    }
    Ok(rec)
}

fn parse_csv(content: &str, path: &Path) -> Result<Corpus> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(content.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let text_col = col("text").ok_or_else(|| Error::parse(path, 1, "missing required column `text`"))?;
    let id_col = col("id");
    let score_col = col("score");
    let gender_col = col("gender");
    let family_col = col("job_family");

    let mut item_cols: Vec<(usize, usize)> = headers
        .iter()
        .enumerate()
        .filter_map(|(i, h)| {
            h.trim()
                .strip_prefix("item_")
                .and_then(|k| k.parse::<usize>().ok())
                .map(|k| (k, i))
        })
        .collect();
    item_cols.sort_unstable();
    if item_cols.is_empty() && score_col.is_none() {
        return Err(Error::parse(
            path,
            1,
            "missing target columns: need `item_1..item_k` or `score`",
        ));
    }
    let extra_cols: Vec<(String, usize)> = headers
        .iter()
        .enumerate()
        .filter_map(|(i, h)| h.trim().strip_prefix("x_").map(|n| (n.to_string(), i)))
        .collect();

    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for result in reader.records() {
        let row = result.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::parse(path, line, e.to_string())
        })?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let field = |i: usize| row.get(i).unwrap_or("");

        let mut rec = ResponseRecord::new(id_col.map(field).unwrap_or("").trim(), field(text_col));
        for &(k, i) in &item_cols {
            if let Some(v) = parse_item(field(i), path, line, &format!("item_{k}"))? {
                rec.items.push(v);
            }
        }
        if let Some(i) = score_col {
            rec.score = parse_float(field(i), path, line, "score")?;
        }
        if let Some(i) = gender_col {
            rec.gender = field(i)
                .parse()
                .map_err(|m: String| Error::parse(path, line, format!("column gender: {m}")))?;
        }
        if let Some(i) = family_col {
            rec.job_family = field(i).trim().to_string();
        }
        for (name, i) in &extra_cols {
            if let Some(v) = parse_float(field(*i), path, line, &format!("x_{name}"))? {
                rec.extra.insert(name.clone(), v);
            }
        }
        records.push(finish_record(rec, path, line, &mut seen)?);
    }
    Ok(Corpus {
        records,
        provenance: Provenance::default(),
    })
}

fn parse_jsonl(content: &str, path: &Path) -> Result<Corpus> {
    use serde_json::Value;

    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (idx, raw) in content.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let value: Value =
            serde_json::from_str(raw).map_err(|e| Error::parse(path, line, e.to_string()))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::parse(path, line, "expected a JSON object"))?;
        let text = obj
            .get("text")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::parse(path, line, "missing required field `text`"))?;
        let id = match obj.get("id") {
            None | Some(Value::Null) => String::new(),
            Some(Value::String(s)) => s.trim().to_string(),
            Some(other) => other.to_string(),
        };
        let mut rec = ResponseRecord::new(id, text);

        match obj.get("items") {
            None | Some(Value::Null) => {}
            Some(Value::Array(items)) => {
                for (k, item) in items.iter().enumerate() {
                    let column = format!("items[{k}]");
                    match item {
                        Value::Null => {}
                        Value::Number(n) => {
                            let v = n.as_i64().filter(|v| (1..=5).contains(v)).ok_or_else(|| {
                                Error::parse(path, line, format!("{column}: item value {n} outside 1..5"))
                            })?;
                            rec.items.push(v as u8);
                        }
                        other => {
                            return Err(Error::parse(path, line, format!("{column}: {other} is not an integer")))
                        }
                    }
                }
            }
            Some(_) => return Err(Error::parse(path, line, "`items` must be an array")),
        }
        match obj.get("score") {
            None | Some(Value::Null) => {}
            Some(v) => {
                rec.score = Some(
                    v.as_f64()
                        .filter(|s| s.is_finite())
                        .ok_or_else(|| Error::parse(path, line, "`score` must be a finite number"))?,
                )
            }
        }
        if let Some(g) = obj.get("gender") {
            let g = g.as_str().unwrap_or("");
            rec.gender = g
                .parse()
                .map_err(|m: String| Error::parse(path, line, format!("gender: {m}")))?;
        }
        if let Some(f) = obj.get("job_family").and_then(Value::as_str) {
            rec.job_family = f.trim().to_string();
        }
        for (k, v) in obj {
            if let Some(name) = k.strip_prefix("x_") {
                if v.is_null() {
                    continue;
                }
                let v = v
                    .as_f64()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(path, line, format!("{k} must be a finite number")))?;
                rec.extra.insert(name.to_string(), v);
            }
        }
        records.push(finish_record(rec, path, line, &mut seen)?);
    }
    Ok(Corpus {
        records,
        provenance: Provenance::default(),
    })
}

/// Train/test split parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Result<Self> {
        let s = SplitSpec {
            train_fraction,
            seed,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::config(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        Ok(())
    }

    pub fn train_size(&self, n: usize) -> usize {
        ((self.train_fraction * n as f64).round() as usize).min(n)
    }
}
