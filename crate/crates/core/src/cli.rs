//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::dataset::Dataset;
use crate::datagen::{generate, GenKind, GenSpec};
use crate::error::{GrafError, Result};
use crate::eval::{
    bias_variance_experiment, cv_protocol, strength_correlation_experiment, BvConfig, CvConfig,
    ScConfig, TuningGrid,
};
use crate::forest::{accuracy, train_forest, ForestConfig, SubspaceRule};
use crate::io;
use crate::rng::stream_rng;
use crate::sensitivity::{forest_sensitivity, subsample, RankOrder, SampleMode, SensitivityConfig};

/// Points a bare `A..B` train-size range expands to.
const DEFAULT_RANGE_POINTS: usize = 6;

#[derive(Debug, Parser)]
#[command(name = "graf", version, about = "Guided random forests: train, predict, evaluate and subsample")]
pub struct Cli {
    /// Worker threads for training and search; results do not depend on it.
    #[arg(long, global = true, env = "GRAF_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a forest and save it as JSON.
    Train(TrainArgs),
    /// Predict classes for a CSV file.
    Predict(PredictArgs),
    /// Nested stratified cross-validation with hyperparameter tuning.
    EvalCv(EvalCvArgs),
    /// Bias-variance decomposition across train sizes, tree counts and subspaces.
    EvalBv(EvalBvArgs),
    /// Strength and correlation across subspace sizes.
    EvalSc(EvalScArgs),
    /// Per-sample sensitivities of a trained forest.
    Sensitivity(SensitivityArgs),
    /// Select rows from a sensitivity report.
    Subsample(SubsampleArgs),
    /// Generate a synthetic dataset.
    Datagen(DatagenArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    /// Name of the label column.
    #[arg(long, default_value = io::DEFAULT_LABEL_COLUMN)]
    label: String,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 100)]
    trees: usize,
    /// log2, sqrt, half, all, or a feature count.
    #[arg(long, default_value = "half")]
    subspace: SubspaceRule,
    #[arg(long, default_value_t = 2)]
    min_split: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Train only on the rows listed in this index file.
    #[arg(long)]
    rows: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Label column; defaults to the one the model was trained with.
    #[arg(long)]
    label: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalCvArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Use the standard tuning grid (the default when no grid flag is given).
    #[arg(long, conflicts_with_all = ["trees", "subspace", "min_split"])]
    grid_default: bool,
    /// Tree counts to tune over, e.g. `100,200` or `100..500:100`.
    #[arg(long)]
    trees: Option<String>,
    /// Subspace rules to tune over, comma separated.
    #[arg(long)]
    subspace: Option<String>,
    #[arg(long)]
    min_split: Option<String>,
    #[arg(long, default_value_t = 4)]
    outer_folds: usize,
    #[arg(long, default_value_t = 5)]
    inner_folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalBvArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Train sizes: `A..B` (six even points), `A..B:STEP`, or a list.
    #[arg(long, default_value = "2500")]
    train_sizes: String,
    #[arg(long, default_value = "100")]
    trees: String,
    #[arg(long, default_value = "half")]
    subspace: String,
    #[arg(long, default_value_t = 50)]
    models: usize,
    #[arg(long, default_value_t = 0.5)]
    test_fraction: f64,
    #[arg(long, default_value_t = 2)]
    min_split: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalScArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Subspace sizes: `A..B`, `A..B:STEP`, or a list.
    #[arg(long, default_value = "3..10")]
    subspace_range: String,
    #[arg(long, default_value_t = 100)]
    trees: usize,
    #[arg(long, default_value_t = 5)]
    models: usize,
    /// Rows per model from the non-test pool; defaults to the whole pool.
    #[arg(long)]
    train_size: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    test_fraction: f64,
    #[arg(long, default_value_t = 2)]
    min_split: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SensitivityArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    label: Option<String>,
    /// Rank samples within a leaf by a seeded shuffle instead of row order.
    #[arg(long)]
    shuffle_rank: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SubsampleArgs {
    #[arg(long)]
    sens: PathBuf,
    #[arg(long, value_parser = parse_fraction)]
    fraction: f64,
    #[arg(long, default_value = "weighted")]
    mode: SampleMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DatagenArgs {
    #[arg(long)]
    kind: GenKind,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    classes: usize,
    /// Mixture dimension; patterns are 2-D.
    #[arg(long, default_value_t = 10)]
    features: usize,
    #[arg(long, default_value_t = 10)]
    centroids: usize,
    /// Pie sectors; defaults to 4 for two classes, else one per class.
    #[arg(long)]
    sectors: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Parses `A..B` (inclusive; `bare_points` evenly spaced values when given,
/// otherwise every integer), `A..B:STEP`, or a comma-separated list.
pub fn parse_usize_range(s: &str, bare_points: Option<usize>) -> Result<Vec<usize>> {
    let bad = || GrafError::Usage(format!("cannot parse range {s:?}"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let Some((a, rest)) = s.split_once("..") else {
        return s.split(',').map(num).collect();
    };
    let (b, step) = match rest.split_once(':') {
        Some((b, st)) => (num(b)?, Some(num(st)?)),
        None => (num(rest)?, None),
    };
    let a = num(a)?;
    if b < a || step == Some(0) {
        return Err(bad());
    }
    Ok(match (step, bare_points) {
        (Some(st), _) => (a..=b).step_by(st).collect(),
        (None, Some(p)) if p >= 2 && b - a + 1 > p => {
            let mut v: Vec<usize> = (0..p)
                .map(|i| a + ((b - a) as f64 * i as f64 / (p - 1) as f64).round() as usize)
                .collect();
            v.dedup();
            v
        }
        (None, _) => (a..=b).collect(),
    })
}

fn parse_fraction(s: &str) -> std::result::Result<f64, String> {
    let f: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if f > 0.0 && f <= 1.0 {
        Ok(f)
    } else {
        Err(format!("fraction must lie in (0, 1], got {f}"))
    }
}

fn parse_rules(s: &str) -> Result<Vec<SubspaceRule>> {
    s.split(',').map(|t| t.trim().parse()).collect()
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code: 0 success, 2 usage, 3 data, 4 internal.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("graf: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(GrafError::Usage("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| GrafError::Invariant(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(cli.command))
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::EvalCv(a) => eval_cv(a),
        Command::EvalBv(a) => eval_bv(a),
        Command::EvalSc(a) => eval_sc(a),
        Command::Sensitivity(a) => sensitivity(a),
        Command::Subsample(a) => subsample_cmd(a),
        Command::Datagen(a) => datagen(a),
    }
}

fn load(a: &DataArgs) -> Result<Dataset> {
    io::load_csv(&a.data, Some(&a.label))
}

fn train(a: TrainArgs) -> Result<()> {
    let full = load(&a.data)?;
    let dataset = match &a.rows {
        Some(p) => full.subset(&io::read_indices(p)?)?,
        None => full,
    };
    let forest = train_forest(
        &dataset,
        &ForestConfig {
            n_trees: a.trees,
            subspace: a.subspace,
            min_samples_split: a.min_split,
            seed: a.seed,
        },
    )?;
    io::save_model_with_label(&forest, &a.data.label, &a.out)?;
    println!(
        "trained {} trees on {} rows; train accuracy {:.6}",
        forest.trees().len(),
        dataset.n_samples(),
        forest.accuracy(&dataset)?
    );
    Ok(())
}

fn predict(a: PredictArgs) -> Result<()> {
    let model = io::read_model(&a.model)?;
    let forest = &model.forest;
    let label = a.label.unwrap_or(model.label_column.clone());
    let table = io::load_for_forest(&a.data, &label, forest)?;
    let scores: Vec<Vec<f64>> = (0..table.n_rows)
        .map(|i| forest.predict_scores(table.row(i)))
        .collect();
    let predicted: Vec<usize> = scores.iter().map(|s| crate::forest::argmax(s)).collect();
    io::write_predictions(forest, &table, &predicted, &scores, &a.out)?;
    match &table.labels {
        Some(truth) => println!(
            "predicted {} rows; accuracy {:.6}",
            table.n_rows,
            accuracy(&predicted, truth)
        ),
        None => println!("predicted {} rows", table.n_rows),
    }
    Ok(())
}

fn eval_cv(a: EvalCvArgs) -> Result<()> {
    let dataset = load(&a.data)?;
    let standard = TuningGrid::standard();
    let grid = TuningGrid {
        n_trees: match &a.trees {
            Some(s) => parse_usize_range(s, None)?,
            None => standard.n_trees,
        },
        subspace: match &a.subspace {
            Some(s) => parse_rules(s)?,
            None => standard.subspace,
        },
        min_samples_split: match &a.min_split {
            Some(s) => parse_usize_range(s, None)?,
            None => standard.min_samples_split,
        },
    };
    let report = cv_protocol(
        &dataset,
        &CvConfig {
            outer_folds: a.outer_folds,
            inner_folds: a.inner_folds,
            grid,
            seed: a.seed,
        },
    )?;
    io::write_json(&report, &a.out)?;
    println!("mean accuracy {:.6} over {} folds", report.mean_accuracy, report.folds.len());
    Ok(())
}

fn eval_bv(a: EvalBvArgs) -> Result<()> {
    let dataset = load(&a.data)?;
    let rows = bias_variance_experiment(
        &dataset,
        &BvConfig {
            train_sizes: parse_usize_range(&a.train_sizes, Some(DEFAULT_RANGE_POINTS))?,
            tree_counts: parse_usize_range(&a.trees, None)?,
            subspaces: parse_rules(&a.subspace)?,
            models: a.models,
            test_fraction: a.test_fraction,
            min_samples_split: a.min_split,
            seed: a.seed,
        },
    )?;
    io::write_records(&rows, &a.out)?;
    println!("wrote {} configurations", rows.len());
    Ok(())
}

fn eval_sc(a: EvalScArgs) -> Result<()> {
    let dataset = load(&a.data)?;
    let rows = strength_correlation_experiment(
        &dataset,
        &ScConfig {
            subspace_sizes: parse_usize_range(&a.subspace_range, None)?,
            n_trees: a.trees,
            models: a.models,
            train_size: a.train_size,
            test_fraction: a.test_fraction,
            min_samples_split: a.min_split,
            seed: a.seed,
        },
    )?;
    io::write_records(&rows, &a.out)?;
    println!("wrote {} subspace sizes", rows.len());
    Ok(())
}

fn sensitivity(a: SensitivityArgs) -> Result<()> {
    let model = io::read_model(&a.model)?;
    let forest = &model.forest;
    let label = a.label.unwrap_or(model.label_column.clone());
    let table = io::load_for_forest(&a.data, &label, forest)?;
    if table.labels.is_none() {
        return Err(GrafError::Data(format!(
            "{}: sensitivities need the label column {label:?}",
            a.data.display()
        )));
    }
    let dataset = table.into_dataset()?;
    let rank = if a.shuffle_rank {
        RankOrder::Shuffled { seed: a.seed }
    } else {
        RankOrder::DatasetIndex
    };
    let report = forest_sensitivity(
        forest,
        &dataset,
        &SensitivityConfig {
            rank,
            keep_per_tree: false,
        },
    )?;
    io::write_sensitivity(&report, &dataset, &a.out)?;
    println!("wrote sensitivities for {} rows", report.len());
    Ok(())
}

fn subsample_cmd(a: SubsampleArgs) -> Result<()> {
    let report = io::read_sensitivity(&a.sens)?;
    let picked = subsample(&report, a.fraction, a.mode, &mut stream_rng(a.seed, 0))?;
    io::write_indices(&picked, &a.out)?;
    println!("selected {} of {} rows", picked.len(), report.len());
    Ok(())
}

fn datagen(a: DatagenArgs) -> Result<()> {
    let spec = GenSpec {
        kind: a.kind,
        n_samples: a.n,
        n_features: if a.kind.is_pattern() { 2 } else { a.features },
        n_centroids: a.centroids,
        n_classes: a.classes,
        sectors: a.sectors,
        seed: a.seed,
    };
    let dataset = generate(&spec)?;
    io::write_dataset(&dataset, &a.out)?;
    println!("wrote {} rows of {} data", dataset.n_samples(), a.kind);
    Ok(())
}
