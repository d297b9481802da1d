//! Save a forest as JSON, load it back, and check predictions match exactly.
//!
//! cargo run --release --example model_roundtrip

use graf::datagen::{generate, GenSpec};
use graf::forest::{train_forest, ForestConfig};
use graf::io::{read_model, save_model};

fn main() -> graf::error::Result<()> {
    let data = generate(&GenSpec::rbf(500, 5, 5, 3, 9))?;
    let forest = train_forest(&data, &ForestConfig { n_trees: 20, ..ForestConfig::default() })?;

    let path = std::env::temp_dir().join("graf_example_model.json");
    save_model(&forest, &path)?;
    let loaded = read_model(&path)?;
    let same = (0..data.n_samples()).all(|i| {
        let (a, b) = (forest.predict_scores(data.row(i)), loaded.forest.predict_scores(data.row(i)));
        a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits())
    });
    println!("wrote {} ({} bytes)", path.display(), std::fs::metadata(&path).map_or(0, |m| m.len()));
    println!("classes: {:?}", loaded.forest.class_names());
    println!("identical scores on all {} rows: {same}", data.n_samples());
    std::fs::remove_file(&path).ok();
    Ok(())
}
