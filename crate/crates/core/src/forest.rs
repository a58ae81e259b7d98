//! Random-forest regression on variance-reduction splits.
//!
//! Rows are kept as sorted nonzero lists, so split search at a node only
//! touches the nonzeros of the sampled features; the implicit zeros form one
//! group whose count and sum come from the node totals.

use rand::seq::index;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FeatureVector};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    /// `max(1, d / 3)`, the usual regression default.
    #[default]
    Third,
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, dim: usize) -> usize {
        let k = match self {
            MaxFeatures::Third => dim / 3,
            MaxFeatures::Sqrt => (dim as f64).sqrt() as usize,
            MaxFeatures::All => dim,
            MaxFeatures::Count(k) => k,
        };
        k.clamp(1, dim.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForestConfig {
    pub trees: usize,
    pub max_features: MaxFeatures,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            trees: 200,
            max_features: MaxFeatures::Third,
            min_samples_leaf: 5,
            max_depth: None,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf(f64),
    /// `x[feature] <= threshold` goes to `left`.
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn new(nodes: Vec<Node>) -> Result<Self> {
        let n = nodes.len() as u32;
        if n == 0 {
            return Err(Error::ModelFile("tree has no nodes".into()));
        }
        for (i, node) in nodes.iter().enumerate() {
            if let Node::Split { left, right, .. } = *node {
                // children always follow their parent, which rules out cycles
                if left <= i as u32 || right <= i as u32 || left >= n || right >= n {
                    return Err(Error::ModelFile(format!("tree node {i} has invalid children")));
                }
            }
        }
        Ok(Tree { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn predict_dense(&self, x: &[f64]) -> f64 {
        let mut i = 0usize;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let v = x.get(feature as usize).copied().unwrap_or(0.0);
                    i = if v <= threshold { left } else { right } as usize;
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => {
                    1 + walk(nodes, left as usize).max(walk(nodes, right as usize))
                }
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    config: ForestConfig,
    dim: usize,
    y_min: f64,
    y_max: f64,
    trees: Vec<Tree>,
}

type SparseRow = Vec<(u32, f64)>;

fn sparse_rows(x: &FeatureMatrix) -> Vec<SparseRow> {
    x.rows()
        .iter()
        .map(|r| {
            let mut nz = r.nonzeros();
            nz.sort_by_key(|e| e.0);
            nz
        })
        .collect()
}

fn value_at(row: &[(u32, f64)], feature: u32) -> f64 {
    match row.binary_search_by_key(&feature, |e| e.0) {
        Ok(i) => row[i].1,
        Err(_) => 0.0,
    }
}

struct Builder<'a> {
    rows: &'a [SparseRow],
    y: &'a [f64],
    dim: usize,
    mtry: usize,
    min_leaf: usize,
    max_depth: usize,
    rng: seed::Rng,
    nodes: Vec<Node>,
    /// feature -> bucket slot + 1, zero when not sampled at this node
    slot: Vec<u32>,
}

struct Best {
    gain: f64,
    feature: u32,
    threshold: f64,
}

impl Builder<'_> {
    fn build(&mut self, samples: Vec<usize>, depth: usize) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(Node::Leaf(0.0));
        let n = samples.len();
        let mean = samples.iter().map(|&s| self.y[s]).sum::<f64>() / n as f64;
        let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| {
            (a.min(self.y[s]), b.max(self.y[s]))
        });
        if lo == hi || n < 2 * self.min_leaf || depth >= self.max_depth {
            self.nodes[id as usize] = Node::Leaf(mean);
            return id;
        }
        let Some(best) = self.best_split(&samples, mean) else {
            self.nodes[id as usize] = Node::Leaf(mean);
            return id;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = samples
            .into_iter()
            .partition(|&s| value_at(&self.rows[s], best.feature) <= best.threshold);
        let l = self.build(left, depth + 1);
        let r = self.build(right, depth + 1);
        self.nodes[id as usize] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l,
            right: r,
        };
        id
    }

    fn best_split(&mut self, samples: &[usize], mean: f64) -> Option<Best> {
        let mut features: Vec<usize> = index::sample(&mut self.rng, self.dim, self.mtry).into_vec();
        features.sort_unstable();
        for (k, &f) in features.iter().enumerate() {
            self.slot[f] = k as u32 + 1;
        }
        let mut buckets: Vec<Vec<(f64, f64)>> = vec![Vec::new(); features.len()];
        let mut total = 0.0;
        let mut sse = 0.0;
        for &s in samples {
            let yc = self.y[s] - mean;
            total += yc;
            sse += yc * yc;
            for &(f, v) in &self.rows[s] {
                let k = self.slot[f as usize];
                if k > 0 {
                    buckets[k as usize - 1].push((v, yc));
                }
            }
        }
        for &f in &features {
            self.slot[f] = 0;
        }

        let n = samples.len();
        let min_leaf = self.min_leaf;
        let base = total * total / n as f64;
        let tol = 1e-10 * sse;
        let mut best: Option<Best> = None;
        let mut best_gain = tol;
        for (k, bucket) in buckets.iter_mut().enumerate() {
            bucket.sort_by(|a, b| a.0.total_cmp(&b.0));
            let zeros = n - bucket.len();
            let zero_sum = total - bucket.iter().map(|e| e.1).sum::<f64>();
            let split_at = bucket.partition_point(|e| e.0 < 0.0);
            // (value, count, sum) groups in ascending value order
            let mut groups: Vec<(f64, usize, f64)> = Vec::with_capacity(bucket.len() + 1);
            let mut push = |v: f64, c: usize, s: f64| match groups.last_mut() {
                Some(g) if g.0 == v => {
                    g.1 += c;
                    g.2 += s;
                }
                _ => groups.push((v, c, s)),
            };
            for &(v, yc) in &bucket[..split_at] {
                push(v, 1, yc);
            }
            if zeros > 0 {
                push(0.0, zeros, zero_sum);
            }
            for &(v, yc) in &bucket[split_at..] {
                push(v, 1, yc);
            }
            let (mut nl, mut sl) = (0usize, 0.0);
            for w in groups.windows(2) {
                nl += w[0].1;
                sl += w[0].2;
                let nr = n - nl;
                if nl < min_leaf {
                    continue;
                }
                if nr < min_leaf {
                    break;
                }
                let sr = total - sl;
                let gain = sl * sl / nl as f64 + sr * sr / nr as f64 - base;
                if gain > best_gain + if best.is_some() { tol } else { 0.0 } {
                    best_gain = gain;
                    let threshold = w[0].0 + (w[1].0 - w[0].0) / 2.0;
                    // guard against the midpoint rounding onto the upper value
                    let threshold = if threshold < w[1].0 { threshold } else { w[0].0 };
                    best = Some(Best {
                        gain,
                        feature: features[k] as u32,
                        threshold,
                    });
                }
            }
        }
        best.filter(|b| b.gain > 0.0)
    }
}

impl Forest {
    pub fn fit(x: &FeatureMatrix, y: &[f64], config: &ForestConfig, seed: u64) -> Result<Self> {
        let n = x.len();
        if n == 0 || n != y.len() {
            return Err(Error::data(format!(
                "forest needs matching nonempty inputs, got {n} rows and {} targets",
                y.len()
            )));
        }
        if config.trees == 0 || config.min_samples_leaf == 0 {
            return Err(Error::config("forest needs trees >= 1 and min_samples_leaf >= 1"));
        }
        if y.iter().any(|v| !v.is_finite()) || x.rows().iter().any(|r| !r.is_finite()) {
            return Err(Error::data("forest inputs contain non-finite values"));
        }
        let rows = sparse_rows(x);
        let dim = x.dim();
        let mtry = config.max_features.resolve(dim);
        let max_depth = config.max_depth.unwrap_or(usize::MAX);
        let trees: Vec<Tree> = (0..config.trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = seed::rng(seed::derive_indexed(seed, "tree", t as u64));
                let samples: Vec<usize> = if config.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                let mut b = Builder {
                    rows: &rows,
                    y,
                    dim: dim.max(1),
                    mtry,
                    min_leaf: config.min_samples_leaf,
                    max_depth,
                    rng,
                    nodes: Vec::new(),
                    slot: vec![0; dim.max(1)],
                };
                b.build(samples, 0);
                Tree { nodes: b.nodes }
            })
            .collect();
        let y_min = y.iter().copied().fold(f64::INFINITY, f64::min);
        let y_max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        log::debug!("fitted {} trees on {n} rows x {dim} features", trees.len());
        Ok(Forest {
            config: config.clone(),
            dim,
            y_min,
            y_max,
            trees,
        })
    }

    pub fn from_parts(config: ForestConfig, dim: usize, y_min: f64, y_max: f64, trees: Vec<Tree>) -> Result<Self> {
        if trees.is_empty() || !(y_min <= y_max) {
            return Err(Error::ModelFile("forest has no trees or an invalid target range".into()));
        }
        Ok(Forest {
            config,
            dim,
            y_min,
            y_max,
            trees,
        })
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn target_range(&self) -> (f64, f64) {
        (self.y_min, self.y_max)
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    /// Mean of the tree predictions, clamped to the training target range.
    pub fn predict_row(&self, x: &FeatureVector) -> Result<f64> {
        if x.dim() != self.dim {
            return Err(Error::data(format!(
                "feature dimension {} does not match the model's {}",
                x.dim(),
                self.dim
            )));
        }
        let dense = x.to_dense();
        let sum: f64 = self.trees.iter().map(|t| t.predict_dense(&dense)).sum();
        Ok((sum / self.trees.len() as f64).clamp(self.y_min, self.y_max))
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        x.rows().par_iter().map(|r| self.predict_row(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> (FeatureMatrix, Vec<f64>) {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64, (i % 7) as f64, 0.0]).collect();
        let y: Vec<f64> = (0..n).map(|i| (i as f64 / 10.0).sin()).collect();
        (FeatureMatrix::from_dense(rows).unwrap(), y)
    }

    #[test]
    fn resolve_max_features() {
        assert_eq!(MaxFeatures::Third.resolve(2000), 666);
        assert_eq!(MaxFeatures::Third.resolve(2), 1);
        assert_eq!(MaxFeatures::Sqrt.resolve(100), 10);
        assert_eq!(MaxFeatures::All.resolve(7), 7);
        assert_eq!(MaxFeatures::Count(50).resolve(7), 7);
    }

    #[test]
    fn constant_target() {
        let (x, _) = grid(50);
        let y = vec![3.0; 50];
        let f = Forest::fit(&x, &y, &ForestConfig::default(), 1).unwrap();
        assert!(f.trees().iter().all(|t| t.nodes().len() == 1));
        assert!(f.predict(&x).unwrap().iter().all(|&p| p == 3.0));
    }

    #[test]
    fn memorizes_without_bootstrap() {
        let (x, y) = grid(60);
        let cfg = ForestConfig {
            trees: 3,
            max_features: MaxFeatures::All,
            min_samples_leaf: 1,
            bootstrap: false,
            ..Default::default()
        };
        let f = Forest::fit(&x, &y, &cfg, 1).unwrap();
        for (p, t) in f.predict(&x).unwrap().iter().zip(&y) {
            assert!((p - t).abs() < 1e-12);
        }
    }

    #[test]
    fn min_leaf_and_depth_respected() {
        let (x, y) = grid(80);
        let cfg = ForestConfig {
            trees: 5,
            max_depth: Some(2),
            ..Default::default()
        };
        let f = Forest::fit(&x, &y, &cfg, 4).unwrap();
        assert!(f.trees().iter().all(|t| t.depth() <= 2));
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let (x, y) = grid(80);
        let cfg = ForestConfig {
            trees: 10,
            ..Default::default()
        };
        let a = Forest::fit(&x, &y, &cfg, 9).unwrap();
        assert_eq!(a, Forest::fit(&x, &y, &cfg, 9).unwrap());
        assert_ne!(a, Forest::fit(&x, &y, &cfg, 10).unwrap());
    }

    #[test]
    fn sparse_and_dense_agree() {
        let (x, y) = grid(70);
        let sparse = FeatureMatrix::new(
            3,
            x.rows()
                .iter()
                .map(|r| FeatureVector::Sparse {
                    dim: 3,
                    entries: r.nonzeros(),
                })
                .collect(),
        )
        .unwrap();
        let cfg = ForestConfig {
            trees: 8,
            ..Default::default()
        };
        assert_eq!(
            Forest::fit(&x, &y, &cfg, 2).unwrap(),
            Forest::fit(&sparse, &y, &cfg, 2).unwrap()
        );
    }

    #[test]
    fn rejects_bad_input() {
        let (x, y) = grid(10);
        assert!(Forest::fit(&x, &y[..5], &ForestConfig::default(), 1).is_err());
        let mut bad = y.clone();
        bad[0] = f64::NAN;
        assert!(Forest::fit(&x, &bad, &ForestConfig::default(), 1).is_err());
        let f = Forest::fit(&x, &y, &ForestConfig::default(), 1).unwrap();
        assert!(f.predict_row(&FeatureVector::Dense(vec![1.0])).is_err());
    }

    #[test]
    fn tree_validation() {
        assert!(Tree::new(vec![]).is_err());
        let cyc = vec![Node::Split {
            feature: 0,
            threshold: 0.0,
            left: 0,
            right: 0,
        }];
        assert!(Tree::new(cyc).is_err());
    }
}
