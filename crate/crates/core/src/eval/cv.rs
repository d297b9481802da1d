//! Nested stratified cross-validation: an outer k-fold estimate of test
//! accuracy, with hyperparameters tuned by an inner k-fold search on each
//! outer training split.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{GrafError, Result};
use crate::forest::{accuracy, train_forest, ForestConfig, SubspaceRule};
use crate::rng::{mix_seed, stream_rng};

#[derive(Debug, Clone, PartialEq)]
pub struct TuningGrid {
    pub n_trees: Vec<usize>,
    pub subspace: Vec<SubspaceRule>,
    pub min_samples_split: Vec<usize>,
}

impl TuningGrid {
    /// Estimators {100, 200, 500, 1000, 2000}, subspace {log2, sqrt, half,
    /// all}, minimum split size 2 to 5.
    pub fn standard() -> Self {
        TuningGrid {
            n_trees: vec![100, 200, 500, 1000, 2000],
            subspace: vec![
                SubspaceRule::Log2,
                SubspaceRule::Sqrt,
                SubspaceRule::Half,
                SubspaceRule::All,
            ],
            min_samples_split: vec![2, 3, 4, 5],
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_trees.is_empty() || self.subspace.is_empty() || self.min_samples_split.is_empty()
        {
            return Err(GrafError::Config("every tuning grid axis needs a value".into()));
        }
        if self.n_trees.contains(&0) {
            return Err(GrafError::Config("tree counts must be positive".into()));
        }
        if self.min_samples_split.iter().any(|&s| s < 2) {
            return Err(GrafError::Config("minimum split sizes must be at least 2".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n_trees.len() * self.subspace.len() * self.min_samples_split.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub outer_folds: usize,
    pub inner_folds: usize,
    pub grid: TuningGrid,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            outer_folds: 4,
            inner_folds: 5,
            grid: TuningGrid::standard(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChosenParams {
    pub n_trees: usize,
    pub subspace: String,
    pub min_samples_split: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub accuracy: f64,
    pub inner_accuracy: f64,
    pub chosen: ChosenParams,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub folds: Vec<FoldResult>,
    pub mean_accuracy: f64,
    pub warnings: Vec<String>,
}

/// Assigns each sample a fold in `0..k` so every fold holds either
/// `floor(n_c / k)` or `ceil(n_c / k)` members of each class `c`.
pub fn stratified_folds<R: Rng + ?Sized>(
    labels: &[usize],
    n_classes: usize,
    k: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &y) in labels.iter().enumerate() {
        by_class[y].push(i);
    }
    let mut fold = vec![0; labels.len()];
    let mut next = 0;
    for members in &mut by_class {
        members.shuffle(rng);
        for &i in members.iter() {
            fold[i] = next % k;
            next += 1;
        }
    }
    fold
}

fn split_by_fold(fold: &[usize], f: usize) -> (Vec<usize>, Vec<usize>) {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, &g) in fold.iter().enumerate() {
        if g == f {
            test.push(i);
        } else {
            train.push(i);
        }
    }
    (train, test)
}

fn stratification_warnings(dataset: &Dataset, fold: &[usize], k: usize, scope: &str) -> Vec<String> {
    let mut warnings = Vec::new();
    for (c, &total) in dataset.class_totals().iter().enumerate() {
        if total > 0 && total < k {
            let present = (0..k)
                .filter(|&f| (0..fold.len()).any(|i| fold[i] == f && dataset.label(i) == c))
                .count();
            warnings.push(format!(
                "{scope}: class {} has {total} samples and is absent from {} of {k} folds",
                dataset.class_names()[c],
                k - present
            ));
        }
    }
    warnings
}

/// Mean inner-fold accuracy of every grid point, in grid order
/// (tree count, then subspace rule, then minimum split size).
fn tune(
    train: &Dataset,
    config: &CvConfig,
    seed: u64,
    warnings: &mut Vec<String>,
) -> Result<Vec<(ChosenParams, f64)>> {
    let grid = &config.grid;
    let k = config.inner_folds;
    let fold = stratified_folds(train.labels(), train.n_classes(), k, &mut stream_rng(seed, 0));
    warnings.extend(stratification_warnings(train, &fold, k, "inner folds"));
    let max_trees = *grid.n_trees.iter().max().expect("validated grid");

    let mut totals = vec![0.0; grid.len()];
    for f in 0..k {
        let (tr, te) = split_by_fold(&fold, f);
        if tr.is_empty() || te.is_empty() {
            return Err(GrafError::Usage(format!(
                "inner fold {f} is empty; need at least {k} training samples"
            )));
        }
        let inner_train = train.subset(&tr)?;
        let inner_test = train.subset(&te)?;
        for (si, &rule) in grid.subspace.iter().enumerate() {
            for (mi, &min_split) in grid.min_samples_split.iter().enumerate() {
                let forest = train_forest(
                    &inner_train,
                    &ForestConfig {
                        n_trees: max_trees,
                        subspace: rule,
                        min_samples_split: min_split,
                        seed: mix_seed(seed, 1 + f as u64),
                    },
                )?;
                let preds = forest.prefix_predictions(&inner_test, &grid.n_trees)?;
                for (ti, p) in preds.iter().enumerate() {
                    let slot = (ti * grid.subspace.len() + si) * grid.min_samples_split.len() + mi;
                    totals[slot] += accuracy(p, inner_test.labels());
                }
            }
        }
    }
    let mut out = Vec::with_capacity(grid.len());
    for &n_trees in &grid.n_trees {
        for rule in &grid.subspace {
            for &min_split in &grid.min_samples_split {
                out.push(ChosenParams {
                    n_trees,
                    subspace: rule.to_string(),
                    min_samples_split: min_split,
                });
            }
        }
    }
    Ok(out
        .into_iter()
        .zip(totals)
        .map(|(p, t)| (p, t / k as f64))
        .collect())
}

/// Runs the nested protocol. The grid point with the best mean inner
/// accuracy wins; ties go to the earliest point in grid order.
pub fn cv_protocol(dataset: &Dataset, config: &CvConfig) -> Result<CvReport> {
    config.grid.validate()?;
    if config.outer_folds < 2 || config.inner_folds < 2 {
        return Err(GrafError::Config("cross-validation needs at least 2 folds".into()));
    }
    for rule in &config.grid.subspace {
        rule.resolve(dataset.n_features())?;
    }
    let k = config.outer_folds;
    let fold = stratified_folds(
        dataset.labels(),
        dataset.n_classes(),
        k,
        &mut stream_rng(config.seed, 0),
    );
    let mut warnings = stratification_warnings(dataset, &fold, k, "outer folds");
    let mut folds = Vec::with_capacity(k);
    for f in 0..k {
        let (tr, te) = split_by_fold(&fold, f);
        if tr.is_empty() || te.is_empty() {
            return Err(GrafError::Usage(format!(
                "outer fold {f} is empty; need at least {k} samples"
            )));
        }
        let train = dataset.subset(&tr)?;
        let test = dataset.subset(&te)?;
        let fold_seed = mix_seed(config.seed, 1000 + f as u64);
        let scored = tune(&train, config, fold_seed, &mut warnings)?;
        let (chosen, inner_accuracy) = scored
            .into_iter()
            .fold(None::<(ChosenParams, f64)>, |best, cur| match best {
                Some(b) if b.1 >= cur.1 => Some(b),
                _ => Some(cur),
            })
            .expect("grid is non-empty");
        let forest = train_forest(
            &train,
            &ForestConfig {
                n_trees: chosen.n_trees,
                subspace: chosen.subspace.parse()?,
                min_samples_split: chosen.min_samples_split,
                seed: fold_seed,
            },
        )?;
        let acc = forest.accuracy(&test)?;
        folds.push(FoldResult {
            fold: f,
            train_size: tr.len(),
            test_size: te.len(),
            accuracy: acc,
            inner_accuracy,
            chosen,
        });
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    let mean_accuracy = folds.iter().map(|r| r.accuracy).sum::<f64>() / k as f64;
    Ok(CvReport {
        folds,
        mean_accuracy,
        warnings,
    })
}
