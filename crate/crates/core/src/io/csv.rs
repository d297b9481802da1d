//! CSV datasets and report tables.
//!
//! Row numbers in error messages are file line numbers, so the header is
//! row 1 and the first data row is row 2.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{GrafError, Result};
use crate::forest::Forest;
use crate::sensitivity::SensitivityReport;

pub const DEFAULT_LABEL_COLUMN: &str = "label";

/// A parsed feature table whose label column may be absent.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub feature_names: Vec<String>,
    /// Row-major values.
    pub features: Vec<f64>,
    pub n_rows: usize,
    /// Zero-based class indices, when the label column is present.
    pub labels: Option<Vec<usize>>,
    /// Label strings in class-index order.
    pub class_names: Vec<String>,
}

impl Table {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_features();
        &self.features[i * d..(i + 1) * d]
    }

    /// Converts to a dataset; fails when the table has no labels.
    pub fn into_dataset(self) -> Result<Dataset> {
        let labels = self
            .labels
            .ok_or_else(|| GrafError::Data("table has no label column".into()))?;
        let d = self.feature_names.len();
        Dataset::new(self.features, d, labels, self.class_names.len())?
            .with_feature_names(self.feature_names)?
            .with_class_names(self.class_names)
    }
}

/// How label strings become class indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LabelMapping<'a> {
    /// Assign indices by order of first appearance.
    FirstAppearance,
    /// Use a stored class list; unseen labels are errors.
    Fixed(&'a [String]),
}

fn csv_error(path: &Path, row: usize, column: &str, message: impl Into<String>) -> GrafError {
    GrafError::Csv {
        path: path.to_path_buf(),
        row,
        column: column.to_string(),
        message: message.into(),
    }
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| GrafError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn headers(path: &Path, rdr: &mut csv::Reader<File>) -> Result<Vec<String>> {
    let h = rdr
        .headers()
        .map_err(|e| csv_error(path, 1, "", e.to_string()))?;
    if h.is_empty() || (h.len() == 1 && h[0].is_empty()) {
        return Err(csv_error(path, 1, "", "file is empty"));
    }
    Ok(h.iter().map(str::to_string).collect())
}

/// Reads a table. With `require_label` the label column must exist.
pub fn read_table(
    path: impl AsRef<Path>,
    label_column: &str,
    mapping: LabelMapping<'_>,
    require_label: bool,
) -> Result<Table> {
    let path = path.as_ref();
    let mut rdr = reader(path)?;
    let header = headers(path, &mut rdr)?;
    let label_at = header.iter().position(|h| h == label_column);
    if label_at.is_none() && require_label {
        return Err(csv_error(
            path,
            1,
            label_column,
            format!("label column {label_column:?} not found"),
        ));
    }
    let feature_cols: Vec<usize> = (0..header.len()).filter(|&j| Some(j) != label_at).collect();
    if feature_cols.is_empty() {
        return Err(csv_error(path, 1, "", "no feature columns"));
    }
    let mut class_names: Vec<String> = match mapping {
        LabelMapping::FirstAppearance => Vec::new(),
        LabelMapping::Fixed(names) => names.to_vec(),
    };
    let mut features = Vec::new();
    let mut labels = label_at.map(|_| Vec::new());
    let mut n_rows = 0;
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line() as usize);
            csv_error(path, row, "", e.to_string())
        })?;
        let row = record.position().map_or(n_rows + 2, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(csv_error(
                path,
                row,
                "",
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        for &j in &feature_cols {
            let cell = &record[j];
            if cell.is_empty() {
                return Err(csv_error(path, row, &header[j], "missing value"));
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| csv_error(path, row, &header[j], format!("{cell:?} is not a number")))?;
            if !v.is_finite() {
                return Err(csv_error(path, row, &header[j], format!("{cell:?} is not finite")));
            }
            features.push(v);
        }
        if let (Some(j), Some(labels)) = (label_at, labels.as_mut()) {
            let cell = &record[j];
            if cell.is_empty() {
                return Err(csv_error(path, row, &header[j], "missing label"));
            }
            let class = match class_names.iter().position(|c| c == cell) {
                Some(c) => c,
                None => match mapping {
                    LabelMapping::FirstAppearance => {
                        class_names.push(cell.to_string());
                        class_names.len() - 1
                    }
                    LabelMapping::Fixed(_) => {
                        return Err(csv_error(
                            path,
                            row,
                            &header[j],
                            format!("label {cell:?} was not seen in training"),
                        ))
                    }
                },
            };
            labels.push(class);
        }
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(csv_error(path, 2, "", "no data rows"));
    }
    Ok(Table {
        feature_names: feature_cols.iter().map(|&j| header[j].clone()).collect(),
        features,
        n_rows,
        labels,
        class_names,
    })
}

/// Reads a labeled dataset; labels become classes by order of first
/// appearance, and the label strings become the class names.
pub fn load_csv(path: impl AsRef<Path>, label_column: Option<&str>) -> Result<Dataset> {
    read_table(
        path,
        label_column.unwrap_or(DEFAULT_LABEL_COLUMN),
        LabelMapping::FirstAppearance,
        true,
    )?
    .into_dataset()
}

/// Reads data for a trained forest: widths must match and labels, when
/// present, must be among the forest's classes.
pub fn load_for_forest(path: impl AsRef<Path>, label_column: &str, forest: &Forest) -> Result<Table> {
    let path = path.as_ref();
    let table = read_table(path, label_column, LabelMapping::Fixed(forest.class_names()), false)?;
    if table.n_features() != forest.n_features() {
        return Err(GrafError::Data(format!(
            "{}: {} feature columns but the model expects {}",
            path.display(),
            table.n_features(),
            forest.n_features()
        )));
    }
    Ok(table)
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| GrafError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn write_err(path: &Path) -> impl Fn(csv::Error) -> GrafError + '_ {
    move |e| match e.into_kind() {
        csv::ErrorKind::Io(io) => GrafError::io(path, io),
        other => GrafError::Invariant(format!("{}: {other:?}", path.display())),
    }
}

/// Writes `dataset` with a header row and a trailing `label` column holding
/// the class names.
pub fn write_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    let err = write_err(path);
    let mut header: Vec<&str> = dataset.feature_names().iter().map(String::as_str).collect();
    header.push(DEFAULT_LABEL_COLUMN);
    w.write_record(&header).map_err(&err)?;
    for i in 0..dataset.n_samples() {
        let mut rec: Vec<String> = dataset.row(i).iter().map(f64::to_string).collect();
        rec.push(dataset.class_names()[dataset.label(i)].clone());
        w.write_record(&rec).map_err(&err)?;
    }
    w.flush().map_err(|e| GrafError::io(path, e))
}

/// Writes one CSV row per serializable record, with a header from the field
/// names. `None` fields are written empty.
pub fn write_records<T: Serialize>(rows: &[T], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    let err = write_err(path);
    for r in rows {
        w.serialize(r).map_err(&err)?;
    }
    w.flush().map_err(|e| GrafError::io(path, e))
}

#[derive(Serialize)]
struct SensitivityRow<'a> {
    index: usize,
    label: &'a str,
    mean_sensitivity: f64,
    probability: f64,
}

/// Columns: `index, label, mean_sensitivity, probability`.
pub fn write_sensitivity(report: &SensitivityReport, dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    if report.len() != dataset.n_samples() {
        return Err(GrafError::Usage(format!(
            "{} sensitivities for {} samples",
            report.len(),
            dataset.n_samples()
        )));
    }
    let rows: Vec<SensitivityRow> = (0..report.len())
        .map(|i| SensitivityRow {
            index: i,
            label: &dataset.class_names()[dataset.label(i)],
            mean_sensitivity: report.mean[i],
            probability: report.probabilities[i],
        })
        .collect();
    write_records(&rows, path)
}

/// Reads the `mean_sensitivity` column of a sensitivity file. Rows must be
/// listed by ascending `index` starting at 0.
pub fn read_sensitivity(path: impl AsRef<Path>) -> Result<SensitivityReport> {
    let path = path.as_ref();
    let cols = read_numeric_columns(path, &["index", "mean_sensitivity"])?;
    for (i, &idx) in cols[0].iter().enumerate() {
        if idx != i as f64 {
            return Err(csv_error(path, i + 2, "index", format!("expected index {i}")));
        }
    }
    let mean = cols.into_iter().nth(1).expect("two columns");
    SensitivityReport::from_mean(mean).map_err(|e| match e {
        GrafError::Data(m) => GrafError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn read_numeric_columns(path: &Path, names: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = reader(path)?;
    let header = headers(path, &mut rdr)?;
    let at: Vec<usize> = names
        .iter()
        .map(|n| {
            header
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| csv_error(path, 1, n, format!("column {n:?} not found")))
        })
        .collect::<Result<_>>()?;
    let mut out = vec![Vec::new(); names.len()];
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line() as usize);
            csv_error(path, row, "", e.to_string())
        })?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        for (k, &j) in at.iter().enumerate() {
            let cell = record.get(j).unwrap_or("");
            if cell.is_empty() {
                return Err(csv_error(path, row, names[k], "missing value"));
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| csv_error(path, row, names[k], format!("{cell:?} is not a number")))?;
            out[k].push(v);
        }
    }
    if out[0].is_empty() {
        return Err(csv_error(path, 2, "", "no data rows"));
    }
    Ok(out)
}

#[derive(Serialize)]
struct IndexRow {
    index: usize,
}

/// One `index` column, in the given order.
pub fn write_indices(indices: &[usize], path: impl AsRef<Path>) -> Result<()> {
    let rows: Vec<IndexRow> = indices.iter().map(|&index| IndexRow { index }).collect();
    write_records(&rows, path)
}

pub fn read_indices(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let col = read_numeric_columns(path, &["index"])?.remove(0);
    col.iter()
        .enumerate()
        .map(|(i, &v)| {
            if v >= 0.0 && v.fract() == 0.0 && v < usize::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(csv_error(path, i + 2, "index", format!("{v} is not a row index")))
            }
        })
        .collect()
}

/// Columns: `index, predicted, score_<class>...`. `predicted` holds class
/// names.
pub fn write_predictions(
    forest: &Forest,
    table: &Table,
    predicted: &[usize],
    scores: &[Vec<f64>],
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    let err = write_err(path);
    let mut header = vec!["index".to_string(), "predicted".to_string()];
    header.extend(forest.class_names().iter().map(|c| format!("score_{c}")));
    w.write_record(&header).map_err(&err)?;
    for i in 0..table.n_rows {
        let mut rec = vec![i.to_string(), forest.class_names()[predicted[i]].clone()];
        rec.extend(scores[i].iter().map(f64::to_string));
        w.write_record(&rec).map_err(&err)?;
    }
    w.flush().map_err(|e| GrafError::io(path, e))
}

/// Writes `value` as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path: PathBuf = path.as_ref().to_path_buf();
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| GrafError::Invariant(format!("json serialization: {e}")))?;
    s.push('\n');
    std::fs::write(&path, s).map_err(|e| GrafError::io(path, e))
}
