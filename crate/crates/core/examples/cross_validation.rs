//! Nested stratified cross-validation over a small tuning grid.
//!
//! cargo run --release --example cross_validation

use graf::datagen::{generate, GenSpec};
use graf::eval::{cv_protocol, CvConfig, TuningGrid};
use graf::forest::SubspaceRule;

fn main() -> graf::error::Result<()> {
    let data = generate(&GenSpec::rbf(600, 8, 6, 3, 11))?;
    let report = cv_protocol(
        &data,
        &CvConfig {
            grid: TuningGrid {
                n_trees: vec![20, 60],
                subspace: vec![SubspaceRule::Sqrt, SubspaceRule::Half],
                min_samples_split: vec![2, 4],
            },
            ..CvConfig::default()
        },
    )?;
    for f in &report.folds {
        println!(
            "fold {}: {} trees, subspace {}, min split {} -> accuracy {:.4} (inner {:.4})",
            f.fold, f.chosen.n_trees, f.chosen.subspace, f.chosen.min_samples_split, f.accuracy, f.inner_accuracy
        );
    }
    println!("mean outer accuracy: {:.4}", report.mean_accuracy);
    for w in &report.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
