//! Sample sensitivities on a pattern dataset, and training on subsamples
//! chosen by sensitivity versus uniformly.
//!
//! cargo run --release --example sensitivity_subsample

use graf::datagen::{boundary_distances, generate, GenKind, GenSpec};
use graf::eval::{subsample_study, SubsampleStudyConfig};
use graf::forest::{train_forest, ForestConfig, SubspaceRule};
use graf::sensitivity::{forest_sensitivity, SampleMode, SensitivityConfig};

fn main() -> graf::error::Result<()> {
    let spec = GenSpec::pattern(GenKind::Circles, 2000, 2, 1);
    let train = generate(&spec)?;
    let test = generate(&GenSpec { seed: 2, ..spec.clone() })?;
    let all = ForestConfig {
        n_trees: 100,
        subspace: SubspaceRule::All,
        min_samples_split: 2,
        seed: 0,
    };

    let forest = train_forest(&train, &all)?;
    let report = forest_sensitivity(&forest, &train, &SensitivityConfig::default())?;
    let dist = boundary_distances(&spec, &train)?;
    let mut order: Vec<usize> = (0..train.n_samples()).collect();
    order.sort_by(|&a, &b| report.mean[b].total_cmp(&report.mean[a]));
    let top = &order[..order.len() / 10];
    let mean = |ix: &[usize]| ix.iter().map(|&i| dist[i]).sum::<f64>() / ix.len() as f64;
    println!("mean boundary distance, top 10% by sensitivity: {:.4}", mean(top));
    println!("mean boundary distance, all samples:           {:.4}", mean(&order));

    let rows = subsample_study(
        &train,
        &test,
        &SubsampleStudyConfig {
            fractions: vec![0.1, 0.25, 0.5],
            modes: vec![SampleMode::Top, SampleMode::Weighted, SampleMode::Uniform],
            sensitivity_forest: all.clone(),
            model_forest: ForestConfig { seed: 1, ..all },
            seed: 3,
        },
    )?;
    for r in rows {
        println!("{:>5.2} {:>8} {:>5} rows  accuracy {:.4}", r.fraction, r.mode, r.selected, r.accuracy);
    }
    Ok(())
}
