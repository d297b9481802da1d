//! Per-sample sensitivity and sensitivity-driven subsampling.
//!
//! A leaf's weight count is the number of hyperplanes its tree had drawn when
//! the leaf was finalized; leaves in confused regions are finalized late and
//! score high. Within a leaf the count is divided by each member's rank, then
//! normalized per class and passed through `ln(1 + .)`. Averaging over trees
//! gives the per-sample sensitivity, and normalizing that gives a sampling
//! distribution.

use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::engine::TreeInstance;
use crate::error::{GrafError, Result};
use crate::forest::Forest;
use crate::rng::stream_rng;

/// Weight count `W` of leaf `leaf`.
pub fn partition_weight_count(tree: &TreeInstance, leaf: usize) -> usize {
    tree.leaves()[leaf].weight_count
}

/// Order in which members of one leaf are ranked `1..=|leaf|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RankOrder {
    /// Ascending dataset row index.
    #[default]
    DatasetIndex,
    /// A seeded shuffle per leaf.
    Shuffled { seed: u64 },
}

/// Rank-discounted importance `theta_i = W(leaf(i)) / rank_i` given each
/// sample's leaf and each leaf's weight count.
pub fn ranked_importance_from_leaves<R: Rng + ?Sized>(
    leaf_of: &[usize],
    weight_counts: &[usize],
    order: RankOrder,
    rng: &mut R,
) -> Vec<f64> {
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); weight_counts.len()];
    for (i, &leaf) in leaf_of.iter().enumerate() {
        members[leaf].push(i);
    }
    let mut theta = vec![0.0; leaf_of.len()];
    for (leaf, group) in members.iter_mut().enumerate() {
        if let RankOrder::Shuffled { .. } = order {
            group.shuffle(rng);
        }
        let w = weight_counts[leaf] as f64;
        for (rank, &i) in group.iter().enumerate() {
            theta[i] = w / (rank + 1) as f64;
        }
    }
    theta
}

/// Rank-discounted importance of every row of `dataset` under `tree`, using
/// the leaf each row reaches.
pub fn ranked_importance(
    tree: &TreeInstance,
    dataset: &Dataset,
    order: RankOrder,
    tree_index: u64,
) -> Vec<f64> {
    let leaf_of: Vec<usize> = (0..dataset.n_samples())
        .map(|i| tree.leaf_index(dataset.row(i)))
        .collect();
    let counts: Vec<usize> = tree.leaves().iter().map(|l| l.weight_count).collect();
    let seed = match order {
        RankOrder::DatasetIndex => 0,
        RankOrder::Shuffled { seed } => seed,
    };
    let mut rng = stream_rng(seed, tree_index);
    ranked_importance_from_leaves(&leaf_of, &counts, order, &mut rng)
}

/// `s_i = ln(1 + theta_i / Theta_{y_i})` where `Theta_j` sums `theta` over
/// class `j`. A class whose importances are all zero shares its mass
/// uniformly, i.e. `theta_i / Theta_j := 1 / |class j|`.
pub fn class_normalized_sensitivity(theta: &[f64], labels: &[usize], n_classes: usize) -> Vec<f64> {
    assert_eq!(theta.len(), labels.len());
    let mut mass = vec![0.0; n_classes];
    let mut sizes = vec![0usize; n_classes];
    for (&t, &y) in theta.iter().zip(labels) {
        mass[y] += t;
        sizes[y] += 1;
    }
    theta
        .iter()
        .zip(labels)
        .map(|(&t, &y)| {
            let share = if mass[y] > 0.0 {
                t / mass[y]
            } else {
                1.0 / sizes[y] as f64
            };
            share.ln_1p()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityReport {
    /// Mean sensitivity over trees.
    pub mean: Vec<f64>,
    /// `mean / sum(mean)`.
    pub probabilities: Vec<f64>,
    /// Per-tree sensitivities `[tree][sample]`, when retained.
    pub per_tree: Option<Vec<Vec<f64>>>,
}

impl SensitivityReport {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// Builds a report from mean sensitivities alone.
    pub fn from_mean(mean: Vec<f64>) -> Result<Self> {
        if mean.is_empty() {
            return Err(GrafError::Usage("empty sensitivity report".into()));
        }
        if mean.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(GrafError::Data("sensitivities must be finite and non-negative".into()));
        }
        let total: f64 = mean.iter().sum();
        if total <= 0.0 {
            return Err(GrafError::Data("sensitivities sum to zero".into()));
        }
        let probabilities = mean.iter().map(|s| s / total).collect();
        Ok(SensitivityReport {
            mean,
            probabilities,
            per_tree: None,
        })
    }
}

/// Averages per-tree sensitivities (summed in tree order) and normalizes.
pub fn aggregate(per_tree: Vec<Vec<f64>>, keep_per_tree: bool) -> Result<SensitivityReport> {
    let first = per_tree
        .first()
        .ok_or_else(|| GrafError::Usage("no trees to aggregate".into()))?;
    let n = first.len();
    if per_tree.iter().any(|s| s.len() != n) {
        return Err(GrafError::Usage("per-tree sensitivities differ in length".into()));
    }
    let mut sum = vec![0.0; n];
    for s in &per_tree {
        for (acc, v) in sum.iter_mut().zip(s) {
            *acc += v;
        }
    }
    let l = per_tree.len() as f64;
    let mut report = SensitivityReport::from_mean(sum.into_iter().map(|v| v / l).collect())?;
    if keep_per_tree {
        report.per_tree = Some(per_tree);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SensitivityConfig {
    pub rank: RankOrder,
    pub keep_per_tree: bool,
}

/// Sensitivity of every row of `dataset` under `forest`.
pub fn forest_sensitivity(
    forest: &Forest,
    dataset: &Dataset,
    config: &SensitivityConfig,
) -> Result<SensitivityReport> {
    if dataset.n_features() != forest.n_features() {
        return Err(GrafError::Data(format!(
            "model expects {} features, data has {}",
            forest.n_features(),
            dataset.n_features()
        )));
    }
    if dataset.n_classes() != forest.n_classes() {
        return Err(GrafError::Data(format!(
            "model has {} classes, data has {}",
            forest.n_classes(),
            dataset.n_classes()
        )));
    }
    let per_tree: Vec<Vec<f64>> = forest
        .trees()
        .par_iter()
        .enumerate()
        .map(|(k, tree)| {
            let theta = ranked_importance(tree, dataset, config.rank, k as u64);
            class_normalized_sensitivity(&theta, dataset.labels(), dataset.n_classes())
        })
        .collect();
    aggregate(per_tree, config.keep_per_tree)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SampleMode {
    /// Uniform without replacement.
    Uniform,
    /// Without replacement, proportional to the sensitivity probabilities.
    Weighted,
    /// The most sensitive samples.
    Top,
}

impl fmt::Display for SampleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleMode::Uniform => "uniform",
            SampleMode::Weighted => "weighted",
            SampleMode::Top => "top",
        })
    }
}

impl FromStr for SampleMode {
    type Err = GrafError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(SampleMode::Uniform),
            "weighted" => Ok(SampleMode::Weighted),
            "top" => Ok(SampleMode::Top),
            other => Err(GrafError::Usage(format!(
                "sampling mode must be uniform, weighted or top, got {other:?}"
            ))),
        }
    }
}

/// Number of samples a fraction selects out of `n`: `ceil(fraction * n)`.
pub fn subsample_size(n: usize, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(GrafError::Usage(format!(
            "fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let k = ((fraction * n as f64).ceil() as usize).min(n);
    if k == 0 {
        return Err(GrafError::Usage(format!(
            "fraction {fraction} of {n} samples selects nothing"
        )));
    }
    Ok(k)
}

/// Selects `ceil(fraction * N)` distinct indices. The result lists indices in
/// selection order: draw order for the random modes, decreasing sensitivity
/// for `Top`.
pub fn subsample<R: Rng + ?Sized>(
    report: &SensitivityReport,
    fraction: f64,
    mode: SampleMode,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let n = report.len();
    let k = subsample_size(n, fraction)?;
    Ok(match mode {
        SampleMode::Uniform => index::sample(rng, n, k).into_vec(),
        SampleMode::Weighted => weighted_without_replacement(&report.probabilities, k, rng),
        SampleMode::Top => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| report.mean[b].total_cmp(&report.mean[a]).then(a.cmp(&b)));
            order.truncate(k);
            order
        }
    })
}

/// Efraimidis-Spirakis sampling: each item gets key `ln(u) / w`, and the `k`
/// largest keys win, in key order. Zero-weight items come last.
fn weighted_without_replacement<R: Rng + ?Sized>(
    weights: &[f64],
    k: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
            let key = if w > 0.0 { u.ln() / w } else { f64::NEG_INFINITY };
            (key, i)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().take(k).map(|(_, i)| i).collect()
}
