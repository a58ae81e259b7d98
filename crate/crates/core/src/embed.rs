//! Pretrained word-embedding tables and averaged document vectors.
//!
//! Text format: one `word c1 c2 ... cd` entry per line, single-space
//! separated. A leading `N d` header line (two integers) is skipped.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::text::TokenStream;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    /// Row-major `words × dimension`.
    vectors: Vec<f64>,
    source: Option<PathBuf>,
}

/// An averaged document vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DocVector {
    pub vector: Vec<f64>,
    /// In-table token occurrences divided by all token occurrences.
    pub coverage: f64,
    /// Set when no token was found in the table; `vector` is then all zeros.
    pub empty: bool,
}

fn is_header(fields: &[&str]) -> bool {
    fields.len() == 2 && fields.iter().all(|f| f.parse::<u64>().is_ok())
}

impl EmbeddingTable {
    pub fn new(dimension: usize, entries: Vec<(String, Vec<f64>)>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::data("embedding dimension must be positive"));
        }
        let mut table = EmbeddingTable {
            dimension,
            words: Vec::with_capacity(entries.len()),
            index: HashMap::with_capacity(entries.len()),
            vectors: Vec::with_capacity(entries.len() * dimension),
            source: None,
        };
        for (word, v) in entries {
            if v.len() != dimension {
                return Err(Error::data(format!(
                    "vector for {word:?} has {} components, expected {dimension}",
                    v.len()
                )));
            }
            table.push(word, &v).map_err(Error::data)?;
        }
        Ok(table)
    }

    fn push(&mut self, word: String, v: &[f64]) -> std::result::Result<(), String> {
        if self.index.contains_key(&word) {
            return Err(format!("duplicate word {word:?}"));
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.vectors.extend_from_slice(v);
        Ok(())
    }

    pub fn parse(content: &str, path: &Path) -> Result<Self> {
        let mut table: Option<EmbeddingTable> = None;
        for (i, line) in content.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(' ').filter(|f| !f.is_empty()).collect();
            if table.is_none() && is_header(&fields) {
                continue;
            }
            if fields.len() < 2 {
                return Err(Error::parse(path, line_no, "expected a word followed by components"));
            }
            let word = fields[0].to_string();
            let comps = fields[1..]
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::parse(path, line_no, format!("non-numeric component {f:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            let t = table.get_or_insert_with(|| EmbeddingTable {
                dimension: comps.len(),
                words: Vec::new(),
                index: HashMap::new(),
                vectors: Vec::new(),
                source: Some(path.to_path_buf()),
            });
            if comps.len() != t.dimension {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("{} components, expected {}", comps.len(), t.dimension),
                ));
            }
            t.push(word, &comps).map_err(|m| Error::parse(path, line_no, m))?;
        }
        table.ok_or_else(|| Error::parse(path, 1, "embedding file has no entries"))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&content, path)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, w) in self.words.iter().enumerate() {
            out.push_str(w);
            for x in self.vector_at(i) {
                write!(out, " {x}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn flat_vectors(&self) -> &[f64] {
        &self.vectors
    }

    pub fn source(&self) -> Option<&Path> {
        self.source.as_deref()
    }

    pub fn with_source(mut self, source: Option<PathBuf>) -> Self {
        self.source = source;
        self
    }

    fn vector_at(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.vector_at(i))
    }

    /// Mean of the vectors of every in-table token occurrence.
    pub fn doc_vector(&self, tokens: &TokenStream) -> DocVector {
        let mut sum = vec![0.0; self.dimension];
        let mut hits = 0usize;
        let mut counts: HashMap<usize, usize> = HashMap::new();
        for t in tokens.iter() {
            if let Some(&i) = self.index.get(t) {
                *counts.entry(i).or_insert(0) += 1;
                hits += 1;
            }
        }
        // sum in table order so the result does not depend on token order
        let mut rows: Vec<(usize, usize)> = counts.into_iter().collect();
        rows.sort_unstable();
        for (i, c) in rows {
            for (s, x) in sum.iter_mut().zip(self.vector_at(i)) {
                *s += c as f64 * x;
            }
        }
        if hits > 0 {
            sum.iter_mut().for_each(|s| *s /= hits as f64);
        }
        DocVector {
            vector: sum,
            coverage: if tokens.is_empty() {
                0.0
            } else {
                hits as f64 / tokens.len() as f64
            },
            empty: hits == 0,
        }
    }
}
