//! Labeled sample matrices and feature subspaces.
//!
//! Class labels are stored as zero-based indices `0..n_classes`. The
//! human-facing names (`class_names`) default to `"1".."C"`, and are replaced
//! by the original label strings when a dataset is read from CSV.

use crate::error::{GrafError, Result};

/// A dense, row-major `N x d` feature matrix with one class label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n_samples: usize,
    n_features: usize,
    labels: Vec<usize>,
    n_classes: usize,
    class_totals: Vec<usize>,
    feature_names: Vec<String>,
    class_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from a row-major feature buffer.
    ///
    /// `n_classes` may exceed the number of classes actually present, which
    /// happens for subsets of a larger labeled pool; absent classes simply have
    /// a zero total.
    pub fn new(
        features: Vec<f64>,
        n_features: usize,
        labels: Vec<usize>,
        n_classes: usize,
    ) -> Result<Self> {
        if n_features == 0 {
            return Err(GrafError::Data("dataset needs at least one feature".into()));
        }
        if labels.is_empty() {
            return Err(GrafError::Data("dataset needs at least one sample".into()));
        }
        if n_classes == 0 {
            return Err(GrafError::Data("dataset needs at least one class".into()));
        }
        if features.len() != labels.len() * n_features {
            return Err(GrafError::Data(format!(
                "feature buffer has {} values, expected {} rows x {} features",
                features.len(),
                labels.len(),
                n_features
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(GrafError::Data(format!(
                "non-finite feature value at row {}, feature {}",
                pos / n_features + 1,
                pos % n_features + 1
            )));
        }
        let mut class_totals = vec![0; n_classes];
        for (i, &y) in labels.iter().enumerate() {
            if y >= n_classes {
                return Err(GrafError::Data(format!(
                    "label {} of row {} is outside 0..{}",
                    y,
                    i + 1,
                    n_classes
                )));
            }
            class_totals[y] += 1;
        }
        let n_samples = labels.len();
        Ok(Dataset {
            features,
            n_samples,
            n_features,
            labels,
            n_classes,
            class_totals,
            feature_names: (1..=n_features).map(|j| format!("x{j}")).collect(),
            class_names: (1..=n_classes).map(|c| c.to_string()).collect(),
        })
    }

    /// Builds a dataset from row vectors; the class count is `max(label) + 1`.
    pub fn from_rows(rows: &[Vec<f64>], labels: &[usize]) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(GrafError::Data(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let n_features = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != n_features) {
            return Err(GrafError::Data(format!(
                "row {} has {} features, expected {}",
                bad + 1,
                rows[bad].len(),
                n_features
            )));
        }
        let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
        Dataset::new(rows.concat(), n_features, labels.to_vec(), n_classes)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_features {
            return Err(GrafError::Data(format!(
                "{} feature names for {} features",
                names.len(),
                self.n_features
            )));
        }
        self.feature_names = names;
        Ok(self)
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_classes {
            return Err(GrafError::Data(format!(
                "{} class names for {} classes",
                names.len(),
                self.n_classes
            )));
        }
        self.class_names = names;
        Ok(self)
    }

    #[inline]
    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    #[inline]
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    #[inline]
    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    #[inline]
    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    /// Per-class sample counts `N_c`.
    pub fn class_totals(&self) -> &[usize] {
        &self.class_totals
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// Rows selected by `indices`, in the given order. Class count and names
    /// are kept so predictions stay comparable with the parent dataset.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        if indices.is_empty() {
            return Err(GrafError::Usage("cannot take an empty subset".into()));
        }
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.n_samples {
                return Err(GrafError::Usage(format!(
                    "subset index {i} out of range for {} samples",
                    self.n_samples
                )));
            }
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        let mut out = Dataset::new(features, self.n_features, labels, self.n_classes)?;
        out.feature_names = self.feature_names.clone();
        out.class_names = self.class_names.clone();
        Ok(out)
    }
}

/// A sorted set of distinct feature indices (zero-based) a tree works in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubspaceView {
    indices: Vec<usize>,
}

impl SubspaceView {
    pub fn new(mut indices: Vec<usize>, n_features: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(GrafError::Usage("subspace must contain a feature".into()));
        }
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(GrafError::Usage("subspace has duplicate features".into()));
        }
        if let Some(&last) = indices.last() {
            if last >= n_features {
                return Err(GrafError::Usage(format!(
                    "subspace feature {last} out of range for {n_features} features"
                )));
            }
        }
        Ok(SubspaceView { indices })
    }

    /// Every feature of a `d`-dimensional space.
    pub fn full(n_features: usize) -> Self {
        SubspaceView {
            indices: (0..n_features).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Writes the restriction of `row` to this subspace into `out`.
    #[inline]
    pub fn restrict_into(&self, row: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.indices.iter().map(|&j| row[j]));
    }

    pub fn restrict(&self, row: &[f64]) -> Vec<f64> {
        self.indices.iter().map(|&j| row[j]).collect()
    }
}
