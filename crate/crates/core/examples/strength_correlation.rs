//! Strength, correlation and the resulting error bound across subspace sizes.
//!
//! cargo run --release --example strength_correlation

use graf::datagen::{generate, GenSpec};
use graf::eval::{strength_correlation_experiment, ScConfig};

fn main() -> graf::error::Result<()> {
    let data = generate(&GenSpec::rbf(2500, 10, 10, 2, 5))?;
    let rows = strength_correlation_experiment(
        &data,
        &ScConfig {
            subspace_sizes: (2..=10).step_by(2).collect(),
            n_trees: 50,
            models: 2,
            train_size: Some(1000),
            test_fraction: 0.2,
            min_samples_split: 2,
            seed: 0,
        },
    )?;
    println!("{:>3} {:>9} {:>9} {:>9}", "M", "strength", "corr", "bound");
    let show = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
    for r in rows {
        println!(
            "{:>3} {:>9.4} {:>9} {:>9}",
            r.subspace_size,
            r.strength,
            show(r.correlation),
            show(r.pe_bound)
        );
    }
    Ok(())
}
