//! Train a forest on a synthetic mixture, then score a held-out split.
//!
//! cargo run --release --example train_predict

use graf::datagen::{generate, GenSpec};
use graf::eval::holdout_split;
use graf::forest::{accuracy, margin, train_forest, ForestConfig, SubspaceRule};

fn main() -> graf::error::Result<()> {
    let data = generate(&GenSpec::rbf(3000, 10, 10, 3, 1))?;
    let (train_idx, test_idx) = holdout_split(data.n_samples(), 0.3, 7)?;
    let train = data.subset(&train_idx)?;
    let test = data.subset(&test_idx)?;

    let forest = train_forest(
        &train,
        &ForestConfig {
            n_trees: 100,
            subspace: SubspaceRule::Half,
            min_samples_split: 2,
            seed: 42,
        },
    )?;

    let predicted = forest.predict_dataset(&test)?;
    println!("trees: {}", forest.trees().len());
    println!(
        "mean leaves per tree: {:.1}",
        forest.trees().iter().map(|t| t.leaves().len()).sum::<usize>() as f64 / forest.trees().len() as f64
    );
    println!("test accuracy: {:.4}", accuracy(&predicted, test.labels()));
    println!("test margin: {:.4}", margin(&forest, &test)?.mean);

    let x = test.row(0);
    let scores = forest.predict_scores(x);
    println!("scores for the first test row: {scores:.3?} -> class {}", forest.predict(x));
    Ok(())
}
