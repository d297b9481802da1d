//! Experiment harnesses producing tidy result rows: bias-variance sweeps,
//! strength/correlation sweeps, and sensitivity subsampling studies.

use rand::seq::{index, SliceRandom};
use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{GrafError, Result};
use crate::eval::bias_variance::kw_decompose;
use crate::eval::strength::strength_correlation;
use crate::forest::{accuracy, train_forest, ForestConfig, SubspaceRule};
use crate::rng::{mix_seed, stream_rng};
use crate::sensitivity::{forest_sensitivity, subsample, SampleMode, SensitivityConfig};

// Stream tags keeping the experiments' random draws independent.
const SPLIT_STREAM: u64 = 0x5350_4c49_54;
const RESAMPLE_STREAM: u64 = 0x5245_5341_4d50;
const FOREST_STREAM: u64 = 0x464f_5245_5354;

/// Shuffles `0..n` and sets aside `round(n * test_fraction)` rows for testing.
/// Returns `(pool, test)`, both ascending.
pub fn holdout_split(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(GrafError::Config(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n_test = (n as f64 * test_fraction).round() as usize;
    if n_test == 0 || n_test >= n {
        return Err(GrafError::Config(format!(
            "a test fraction of {test_fraction} leaves no train or test rows out of {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(seed, SPLIT_STREAM));
    let mut test = order[..n_test].to_vec();
    let mut pool = order[n_test..].to_vec();
    test.sort_unstable();
    pool.sort_unstable();
    Ok((pool, test))
}

/// Draws `size` rows of `pool` without replacement, ascending.
fn resample(pool: &[usize], size: usize, seed: u64, stream: u64) -> Vec<usize> {
    let mut rng = stream_rng(mix_seed(seed, RESAMPLE_STREAM), stream);
    let mut picked: Vec<usize> = index::sample(&mut rng, pool.len(), size)
        .into_iter()
        .map(|k| pool[k])
        .collect();
    picked.sort_unstable();
    picked
}

#[derive(Debug, Clone, PartialEq)]
pub struct BvConfig {
    pub train_sizes: Vec<usize>,
    pub tree_counts: Vec<usize>,
    pub subspaces: Vec<SubspaceRule>,
    /// Models `R` per configuration.
    pub models: usize,
    pub test_fraction: f64,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for BvConfig {
    fn default() -> Self {
        BvConfig {
            train_sizes: vec![2500],
            tree_counts: vec![100],
            subspaces: vec![SubspaceRule::Half],
            models: 50,
            test_fraction: 0.5,
            min_samples_split: 2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BvRow {
    pub train_size: usize,
    pub n_trees: usize,
    pub subspace: String,
    pub subspace_size: usize,
    pub bias2: f64,
    pub variance: f64,
    pub err: f64,
    pub models: usize,
    pub test_size: usize,
}

/// Bias-variance sweep. Half the data (by default) is held out; each of the
/// `R` models per configuration trains on a without-replacement resample of
/// the rest. Tree counts are read off prefixes of one forest per model.
pub fn bias_variance_experiment(dataset: &Dataset, config: &BvConfig) -> Result<Vec<BvRow>> {
    if config.models < 2 {
        return Err(GrafError::Config("bias-variance needs at least 2 models".into()));
    }
    if config.tree_counts.is_empty() || config.train_sizes.is_empty() || config.subspaces.is_empty()
    {
        return Err(GrafError::Config("every sweep axis needs a value".into()));
    }
    let (pool, test_idx) = holdout_split(dataset.n_samples(), config.test_fraction, config.seed)?;
    if let Some(&size) = config.train_sizes.iter().find(|&&s| s == 0 || s > pool.len()) {
        return Err(GrafError::Config(format!(
            "train size {size} outside 1..={} (rows left after the test split)",
            pool.len()
        )));
    }
    let test = dataset.subset(&test_idx)?;
    let max_trees = *config.tree_counts.iter().max().expect("non-empty");
    let mut rows = Vec::new();
    for (si, &size) in config.train_sizes.iter().enumerate() {
        for &rule in &config.subspaces {
            let m = rule.resolve(dataset.n_features())?;
            // predictions[tree_count][model][sample]
            let mut predictions = vec![Vec::with_capacity(config.models); config.tree_counts.len()];
            for r in 0..config.models {
                let stream = (si * config.models + r) as u64;
                let train = dataset.subset(&resample(&pool, size, config.seed, stream))?;
                let forest = train_forest(
                    &train,
                    &ForestConfig {
                        n_trees: max_trees,
                        subspace: rule,
                        min_samples_split: config.min_samples_split,
                        seed: mix_seed(mix_seed(config.seed, FOREST_STREAM), stream),
                    },
                )?;
                for (slot, p) in predictions
                    .iter_mut()
                    .zip(forest.prefix_predictions(&test, &config.tree_counts)?)
                {
                    slot.push(p);
                }
            }
            for (&n_trees, preds) in config.tree_counts.iter().zip(&predictions) {
                let bv = kw_decompose(preds, test.labels(), dataset.n_classes())?;
                rows.push(BvRow {
                    train_size: size,
                    n_trees,
                    subspace: rule.to_string(),
                    subspace_size: m,
                    bias2: bv.bias2,
                    variance: bv.variance,
                    err: bv.err,
                    models: bv.models,
                    test_size: bv.test_size,
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScConfig {
    pub subspace_sizes: Vec<usize>,
    pub n_trees: usize,
    pub models: usize,
    /// Rows per model drawn from the non-test pool; `None` uses the whole pool.
    pub train_size: Option<usize>,
    pub test_fraction: f64,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for ScConfig {
    fn default() -> Self {
        ScConfig {
            subspace_sizes: (3..=10).collect(),
            n_trees: 100,
            models: 5,
            train_size: None,
            test_fraction: 0.1,
            min_samples_split: 2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScRow {
    pub subspace_size: usize,
    pub strength: f64,
    /// Mean over models where it is defined.
    pub correlation: Option<f64>,
    pub pe_bound: Option<f64>,
    pub sd: f64,
    pub models: usize,
    pub test_size: usize,
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values
        .flatten()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Strength and correlation across subspace sizes, averaged over models.
pub fn strength_correlation_experiment(dataset: &Dataset, config: &ScConfig) -> Result<Vec<ScRow>> {
    if config.models == 0 || config.n_trees < 2 {
        return Err(GrafError::Config(
            "need at least one model of at least two trees".into(),
        ));
    }
    let (pool, test_idx) = holdout_split(dataset.n_samples(), config.test_fraction, config.seed)?;
    let size = config.train_size.unwrap_or(pool.len());
    if size == 0 || size > pool.len() {
        return Err(GrafError::Config(format!(
            "train size {size} outside 1..={}",
            pool.len()
        )));
    }
    let test = dataset.subset(&test_idx)?;
    let mut rows = Vec::with_capacity(config.subspace_sizes.len());
    for &m in &config.subspace_sizes {
        let rule = SubspaceRule::Fixed(m);
        rule.resolve(dataset.n_features())?;
        let mut results = Vec::with_capacity(config.models);
        for r in 0..config.models {
            let train = dataset.subset(&resample(&pool, size, config.seed, r as u64))?;
            let forest = train_forest(
                &train,
                &ForestConfig {
                    n_trees: config.n_trees,
                    subspace: rule,
                    min_samples_split: config.min_samples_split,
                    seed: mix_seed(mix_seed(config.seed, FOREST_STREAM), r as u64),
                },
            )?;
            let per_tree = forest.tree_predictions_dataset(&test)?;
            results.push(strength_correlation(&per_tree, test.labels(), dataset.n_classes())?);
        }
        let n = results.len() as f64;
        rows.push(ScRow {
            subspace_size: m,
            strength: results.iter().map(|r| r.strength).sum::<f64>() / n,
            correlation: mean_defined(results.iter().map(|r| r.correlation)),
            pe_bound: mean_defined(results.iter().map(|r| r.pe_bound)),
            sd: results.iter().map(|r| r.sd).sum::<f64>() / n,
            models: results.len(),
            test_size: test.n_samples(),
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsampleStudyConfig {
    pub fractions: Vec<f64>,
    pub modes: Vec<SampleMode>,
    /// Forest whose leaves define the sensitivities.
    pub sensitivity_forest: ForestConfig,
    /// Forest trained on each subsample.
    pub model_forest: ForestConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsampleRow {
    pub fraction: f64,
    pub mode: String,
    pub selected: usize,
    pub accuracy: f64,
}

/// Trains on sensitivity-guided and uniform subsamples of `train` and scores
/// each model on `test`.
pub fn subsample_study(
    train: &Dataset,
    test: &Dataset,
    config: &SubsampleStudyConfig,
) -> Result<Vec<SubsampleRow>> {
    let forest = train_forest(train, &config.sensitivity_forest)?;
    let report = forest_sensitivity(&forest, train, &SensitivityConfig::default())?;
    let mut rows = Vec::new();
    for (fi, &fraction) in config.fractions.iter().enumerate() {
        for (mi, &mode) in config.modes.iter().enumerate() {
            let mut rng = stream_rng(config.seed, (fi * 16 + mi) as u64);
            let picked = subsample(&report, fraction, mode, &mut rng)?;
            let sub = train.subset(&picked)?;
            let model = train_forest(&sub, &config.model_forest)?;
            let preds = model.predict_dataset(test)?;
            rows.push(SubsampleRow {
                fraction,
                mode: mode.to_string(),
                selected: picked.len(),
                accuracy: accuracy(&preds, test.labels()),
            });
        }
    }
    Ok(rows)
}
