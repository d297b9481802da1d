//! Bias and variance of the forest's 0-1 loss as the number of trees grows.
//!
//! cargo run --release --example bias_variance

use graf::datagen::{generate, GenSpec};
use graf::eval::{bias_variance_experiment, BvConfig};
use graf::forest::SubspaceRule;

fn main() -> graf::error::Result<()> {
    let data = generate(&GenSpec::rbf(3000, 10, 10, 2, 3))?;
    let rows = bias_variance_experiment(
        &data,
        &BvConfig {
            train_sizes: vec![500, 1000],
            tree_counts: vec![1, 5, 25, 100],
            subspaces: vec![SubspaceRule::Half],
            models: 10,
            test_fraction: 0.5,
            min_samples_split: 2,
            seed: 0,
        },
    )?;
    println!("{:>6} {:>5} {:>8} {:>8} {:>8}", "train", "trees", "bias2", "var", "err");
    for r in rows {
        println!(
            "{:>6} {:>5} {:>8.4} {:>8.4} {:>8.4}",
            r.train_size, r.n_trees, r.bias2, r.variance, r.err
        );
    }
    Ok(())
}
