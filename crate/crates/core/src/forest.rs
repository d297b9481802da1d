//! Ensembles of guided trees over random feature subspaces.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rayon::prelude::*;

use crate::dataset::{Dataset, SubspaceView};
use crate::engine::{grow_tree, GrowConfig, TreeInstance};
use crate::error::{GrafError, Result};
use crate::rng::stream_rng;

/// How many features each tree sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubspaceRule {
    Log2,
    Sqrt,
    Half,
    All,
    Fixed(usize),
}

impl SubspaceRule {
    /// Resolves the rule for `d` features. Fractional rules round up and are
    /// clamped to `[1, d]`; a fixed size larger than `d` is an error.
    pub fn resolve(self, d: usize) -> Result<usize> {
        if d == 0 {
            return Err(GrafError::Config("no features to subspace".into()));
        }
        let m = match self {
            SubspaceRule::Log2 => (d as f64).log2().ceil() as usize,
            SubspaceRule::Sqrt => (d as f64).sqrt().ceil() as usize,
            SubspaceRule::Half => d.div_ceil(2),
            SubspaceRule::All => d,
            SubspaceRule::Fixed(m) => {
                if m == 0 || m > d {
                    return Err(GrafError::Config(format!(
                        "subspace size {m} outside 1..={d}"
                    )));
                }
                m
            }
        };
        Ok(m.clamp(1, d))
    }
}

impl fmt::Display for SubspaceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubspaceRule::Log2 => f.write_str("log2"),
            SubspaceRule::Sqrt => f.write_str("sqrt"),
            SubspaceRule::Half => f.write_str("half"),
            SubspaceRule::All => f.write_str("all"),
            SubspaceRule::Fixed(m) => write!(f, "{m}"),
        }
    }
}

impl FromStr for SubspaceRule {
    type Err = GrafError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log2" => Ok(SubspaceRule::Log2),
            "sqrt" => Ok(SubspaceRule::Sqrt),
            "half" => Ok(SubspaceRule::Half),
            "all" => Ok(SubspaceRule::All),
            other => other
                .parse::<usize>()
                .map(SubspaceRule::Fixed)
                .map_err(|_| {
                    GrafError::Config(format!(
                        "subspace must be log2, sqrt, half, all or a count, got {other:?}"
                    ))
                }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub subspace: SubspaceRule,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            subspace: SubspaceRule::Half,
            min_samples_split: 2,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self, n_features: usize) -> Result<usize> {
        if self.n_trees == 0 {
            return Err(GrafError::Config("a forest needs at least one tree".into()));
        }
        if self.min_samples_split < 2 {
            return Err(GrafError::Config(format!(
                "min_samples_split must be at least 2, got {}",
                self.min_samples_split
            )));
        }
        self.subspace.resolve(n_features)
    }
}

/// A trained ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    trees: Vec<TreeInstance>,
    config: ForestConfig,
    n_features: usize,
    class_totals: Vec<usize>,
    feature_names: Vec<String>,
    class_names: Vec<String>,
}

/// Trains `config.n_trees` trees on the current rayon pool. Tree `k` draws its
/// subspace and hyperplanes from stream `k` of `config.seed`, so the result
/// does not depend on the pool size.
pub fn train_forest(dataset: &Dataset, config: &ForestConfig) -> Result<Forest> {
    let m = config.validate(dataset.n_features())?;
    let d = dataset.n_features();
    let grow = GrowConfig {
        min_samples_split: config.min_samples_split,
    };
    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(config.seed, k as u64);
            let features = index::sample(&mut rng, d, m).into_vec();
            let sub = SubspaceView::new(features, d)?;
            grow_tree(dataset, &sub, &grow, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Forest {
        trees,
        config: config.clone(),
        n_features: d,
        class_totals: dataset.class_totals().to_vec(),
        feature_names: dataset.feature_names().to_vec(),
        class_names: dataset.class_names().to_vec(),
    })
}

/// Index of the largest value; ties go to the smallest index.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (c, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = c;
        }
    }
    best
}

impl Forest {
    /// Reassembles a forest from stored parts.
    pub fn from_parts(
        trees: Vec<TreeInstance>,
        config: ForestConfig,
        n_features: usize,
        class_totals: Vec<usize>,
        feature_names: Vec<String>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let n_classes = class_totals.len();
        if trees.is_empty() {
            return Err(GrafError::ModelLoad("forest has no trees".into()));
        }
        if feature_names.len() != n_features || class_names.len() != n_classes {
            return Err(GrafError::ModelLoad("feature or class metadata size mismatch".into()));
        }
        for (k, t) in trees.iter().enumerate() {
            if t.n_classes() != n_classes {
                return Err(GrafError::ModelLoad(format!(
                    "tree {k} has {} classes, forest has {n_classes}",
                    t.n_classes()
                )));
            }
            if t.subspace().indices().iter().any(|&j| j >= n_features) {
                return Err(GrafError::ModelLoad(format!(
                    "tree {k} uses a feature outside 0..{n_features}"
                )));
            }
        }
        Ok(Forest {
            trees,
            config,
            n_features,
            class_totals,
            feature_names,
            class_names,
        })
    }

    pub fn trees(&self) -> &[TreeInstance] {
        &self.trees
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.class_totals.len()
    }

    pub fn class_totals(&self) -> &[usize] {
        &self.class_totals
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// The first `n_trees` trees as a forest of their own. Because tree `k`
    /// only depends on the seed and `k`, this equals training with
    /// `n_trees` directly.
    pub fn truncated(&self, n_trees: usize) -> Result<Forest> {
        if n_trees == 0 || n_trees > self.trees.len() {
            return Err(GrafError::Usage(format!(
                "cannot keep {n_trees} of {} trees",
                self.trees.len()
            )));
        }
        let mut out = self.clone();
        out.trees.truncate(n_trees);
        out.config.n_trees = n_trees;
        Ok(out)
    }

    /// `score(c) = sum_k log2(1 + h_k(x, c))` where `h_k` is the posterior of
    /// the leaf `x` reaches in tree `k`.
    pub fn predict_scores(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_features, "sample width mismatch");
        let mut scores = vec![0.0; self.n_classes()];
        for tree in &self.trees {
            for (s, &p) in scores.iter_mut().zip(&tree.traverse(x).posterior) {
                *s += (1.0 + p).log2();
            }
        }
        scores
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.predict_scores(x))
    }

    /// Each tree's own prediction (argmax of its leaf posterior) for `x`.
    pub fn tree_predictions(&self, x: &[f64]) -> Vec<usize> {
        self.trees
            .iter()
            .map(|t| argmax(&t.traverse(x).posterior))
            .collect()
    }

    fn check_width(&self, dataset: &Dataset) -> Result<()> {
        if dataset.n_features() != self.n_features {
            return Err(GrafError::Data(format!(
                "model expects {} features, data has {}",
                self.n_features,
                dataset.n_features()
            )));
        }
        Ok(())
    }

    pub fn predict_dataset(&self, dataset: &Dataset) -> Result<Vec<usize>> {
        self.check_width(dataset)?;
        Ok((0..dataset.n_samples())
            .into_par_iter()
            .map(|i| self.predict(dataset.row(i)))
            .collect())
    }

    /// Per-tree predictions, indexed `[tree][sample]`.
    pub fn tree_predictions_dataset(&self, dataset: &Dataset) -> Result<Vec<Vec<usize>>> {
        self.check_width(dataset)?;
        Ok(self
            .trees
            .par_iter()
            .map(|t| {
                (0..dataset.n_samples())
                    .map(|i| argmax(&t.traverse(dataset.row(i)).posterior))
                    .collect()
            })
            .collect())
    }

    /// Ensemble predictions of every prefix forest of sizes `checkpoints`
    /// (each in `1..=n_trees`), indexed `[checkpoint][sample]`. Scores are
    /// accumulated once, tree by tree, in the same order as
    /// [`predict_scores`](Self::predict_scores).
    pub fn prefix_predictions(
        &self,
        dataset: &Dataset,
        checkpoints: &[usize],
    ) -> Result<Vec<Vec<usize>>> {
        self.check_width(dataset)?;
        if let Some(&bad) = checkpoints
            .iter()
            .find(|&&c| c == 0 || c > self.trees.len())
        {
            return Err(GrafError::Usage(format!(
                "prefix of {bad} trees out of range 1..={}",
                self.trees.len()
            )));
        }
        let per_sample: Vec<Vec<usize>> = (0..dataset.n_samples())
            .into_par_iter()
            .map(|i| {
                let x = dataset.row(i);
                let mut scores = vec![0.0; self.n_classes()];
                let mut at = vec![0; checkpoints.len()];
                for (k, tree) in self.trees.iter().enumerate() {
                    for (s, &p) in scores.iter_mut().zip(&tree.traverse(x).posterior) {
                        *s += (1.0 + p).log2();
                    }
                    for (slot, &c) in at.iter_mut().zip(checkpoints) {
                        if c == k + 1 {
                            *slot = argmax(&scores);
                        }
                    }
                }
                at
            })
            .collect();
        Ok((0..checkpoints.len())
            .map(|c| per_sample.iter().map(|row| row[c]).collect())
            .collect())
    }

    pub fn accuracy(&self, dataset: &Dataset) -> Result<f64> {
        let preds = self.predict_dataset(dataset)?;
        Ok(accuracy(&preds, dataset.labels()))
    }
}

/// Fraction of positions where `predicted` equals `truth`.
pub fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    assert_eq!(predicted.len(), truth.len());
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    hits as f64 / truth.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginReport {
    /// `+1` where the ensemble is right, `-1` where it is wrong.
    pub per_sample: Vec<f64>,
    pub mean: f64,
}

/// Ensemble margin of every labeled sample in `dataset`.
pub fn margin(forest: &Forest, dataset: &Dataset) -> Result<MarginReport> {
    let preds = forest.predict_dataset(dataset)?;
    Ok(margin_from_predictions(&preds, dataset.labels()))
}

/// `mg = 1(H(x) = y) - max_{j != y} 1(H(x) = j)`, which for a single
/// predicted class is `+1` or `-1`.
pub fn margin_from_predictions(predicted: &[usize], truth: &[usize]) -> MarginReport {
    let per_sample: Vec<f64> = predicted
        .iter()
        .zip(truth)
        .map(|(p, t)| if p == t { 1.0 } else { -1.0 })
        .collect();
    let mean = per_sample.iter().sum::<f64>() / per_sample.len().max(1) as f64;
    MarginReport { per_sample, mean }
}
