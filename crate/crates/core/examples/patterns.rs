//! The synthetic generators, with class shares and a single-tree fit.
//!
//! cargo run --release --example patterns

use graf::datagen::{generate, GenKind, GenSpec};
use graf::forest::{train_forest, ForestConfig, SubspaceRule};

fn main() -> graf::error::Result<()> {
    let specs = [
        GenSpec::rbf(1000, 10, 10, 2, 0),
        GenSpec::pattern(GenKind::Circles, 1000, 4, 0),
        GenSpec::pattern(GenKind::Pie, 1000, 2, 0),
        GenSpec::pattern(GenKind::Xor, 1000, 2, 0),
        GenSpec::pattern(GenKind::Xor, 1000, 4, 0),
    ];
    for spec in specs {
        let data = generate(&spec)?;
        let tree = train_forest(
            &data,
            &ForestConfig {
                n_trees: 1,
                subspace: SubspaceRule::All,
                min_samples_split: 2,
                seed: 0,
            },
        )?;
        println!(
            "{:<8} C={} d={:<2} class sizes {:?}, one tree: {} hyperplanes, {} leaves",
            spec.kind.to_string(),
            spec.n_classes,
            data.n_features(),
            data.class_totals(),
            tree.trees()[0].hyperplanes().len(),
            tree.trees()[0].leaves().len()
        );
    }
    Ok(())
}
