//! Reading and writing models, datasets and report tables.

mod csv;
mod model;

pub use self::csv::{
    load_csv, load_for_forest, read_indices, read_sensitivity, read_table, write_dataset,
    write_indices, write_json, write_predictions, write_records, write_sensitivity, LabelMapping,
    Table, DEFAULT_LABEL_COLUMN,
};
pub use self::model::{
    load_model, model_from_str, model_to_string, read_model, save_model, save_model_with_label,
    LoadedModel, ModelEnvelope, FORMAT_VERSION,
};
