//! Dense and sparse document vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One document's numeric representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureVector {
    Dense(Vec<f64>),
    /// `(position, value)` pairs sorted by position, zeros omitted.
    Sparse { dim: usize, entries: Vec<(u32, f64)> },
}

impl FeatureVector {
    pub fn dim(&self) -> usize {
        match self {
            FeatureVector::Dense(v) => v.len(),
            FeatureVector::Sparse { dim, .. } => *dim,
        }
    }

    pub fn get(&self, i: usize) -> f64 {
        match self {
            FeatureVector::Dense(v) => v[i],
            FeatureVector::Sparse { entries, .. } => entries
                .binary_search_by_key(&(i as u32), |e| e.0)
                .map(|k| entries[k].1)
                .unwrap_or(0.0),
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match self {
            FeatureVector::Dense(v) => v.clone(),
            FeatureVector::Sparse { dim, entries } => {
                let mut v = vec![0.0; *dim];
                for &(i, x) in entries {
                    v[i as usize] = x;
                }
                v
            }
        }
    }

    /// Nonzero entries in ascending position order.
    pub fn nonzeros(&self) -> Vec<(u32, f64)> {
        match self {
            FeatureVector::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, x)| **x != 0.0)
                .map(|(i, x)| (i as u32, *x))
                .collect(),
            FeatureVector::Sparse { entries, .. } => entries.clone(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            FeatureVector::Dense(v) => v.iter().all(|x| x.is_finite()),
            FeatureVector::Sparse { entries, .. } => entries.iter().all(|e| e.1.is_finite()),
        }
    }
}

/// Rows of equal dimension, one per document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    dim: usize,
    rows: Vec<FeatureVector>,
}

impl FeatureMatrix {
    pub fn new(dim: usize, rows: Vec<FeatureVector>) -> Result<Self> {
        if let Some(bad) = rows.iter().position(|r| r.dim() != dim) {
            return Err(Error::data(format!(
                "row {bad} has dimension {}, expected {dim}",
                rows[bad].dim()
            )));
        }
        Ok(FeatureMatrix { dim, rows })
    }

    pub fn from_dense(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        Self::new(dim, rows.into_iter().map(FeatureVector::Dense).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[FeatureVector] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &FeatureVector {
        &self.rows[i]
    }
}
