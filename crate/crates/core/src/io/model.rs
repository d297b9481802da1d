//! Versioned JSON persistence for trained forests.
//!
//! The document is canonical: keys appear in a fixed order and floats are
//! written in shortest round-trip form, so saving a loaded model reproduces
//! the original bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::SubspaceView;
use crate::engine::{Hyperplane, LeafCode, LeafRecord, Node, NodeKind, PartitionState, TreeInstance};
use crate::error::{GrafError, Result};
use crate::forest::{Forest, ForestConfig};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigRecord {
    n_trees: usize,
    subspace: String,
    min_samples_split: usize,
    seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassRecord {
    name: String,
    train_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HyperplaneRecord {
    step: usize,
    weights: Vec<f64>,
    bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    parent: Option<usize>,
    bit: Option<u8>,
    /// Set on split nodes.
    step: Option<usize>,
    children: Option<[usize; 2]>,
    /// Set on leaf nodes.
    leaf: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LeafRecordOut {
    code: String,
    samples: Vec<usize>,
    class_counts: Vec<usize>,
    posterior: Vec<f64>,
    weight_count: usize,
    created_step: usize,
    state: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeRecord {
    features: Vec<usize>,
    hyperplanes: Vec<HyperplaneRecord>,
    nodes: Vec<NodeRecord>,
    leaves: Vec<LeafRecordOut>,
}

/// The on-disk model document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelEnvelope {
    format_version: u32,
    config: ConfigRecord,
    label_column: String,
    feature_names: Vec<String>,
    classes: Vec<ClassRecord>,
    trees: Vec<TreeRecord>,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

/// A forest together with the label column name of its training file.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedModel {
    pub forest: Forest,
    pub label_column: String,
}

fn tree_record(tree: &TreeInstance) -> TreeRecord {
    TreeRecord {
        features: tree.subspace().indices().to_vec(),
        hyperplanes: tree
            .hyperplanes()
            .iter()
            .enumerate()
            .map(|(k, h)| HyperplaneRecord {
                step: k + 1,
                weights: h.weights().to_vec(),
                bias: h.bias(),
            })
            .collect(),
        nodes: tree
            .nodes()
            .iter()
            .map(|n| {
                let (step, children, leaf) = match n.kind {
                    NodeKind::Split { step, children } => (Some(step), Some(children), None),
                    NodeKind::Leaf { leaf } => (None, None, Some(leaf)),
                };
                NodeRecord {
                    parent: n.parent,
                    bit: n.bit.map(u8::from),
                    step,
                    children,
                    leaf,
                }
            })
            .collect(),
        leaves: tree
            .leaves()
            .iter()
            .map(|l| LeafRecordOut {
                code: l.code.to_string(),
                samples: l.sample_indices.clone(),
                class_counts: l.class_counts.clone(),
                posterior: l.posterior.clone(),
                weight_count: l.weight_count,
                created_step: l.created_step,
                state: l.state.as_str().to_string(),
            })
            .collect(),
    }
}

impl ModelEnvelope {
    pub fn from_forest(forest: &Forest, label_column: &str) -> Self {
        let c = forest.config();
        ModelEnvelope {
            format_version: FORMAT_VERSION,
            config: ConfigRecord {
                n_trees: c.n_trees,
                subspace: c.subspace.to_string(),
                min_samples_split: c.min_samples_split,
                seed: c.seed,
            },
            label_column: label_column.to_string(),
            feature_names: forest.feature_names().to_vec(),
            classes: forest
                .class_names()
                .iter()
                .zip(forest.class_totals())
                .map(|(name, &train_count)| ClassRecord {
                    name: name.clone(),
                    train_count,
                })
                .collect(),
            trees: forest.trees().iter().map(tree_record).collect(),
        }
    }

    pub fn into_model(self) -> Result<LoadedModel> {
        if self.format_version != FORMAT_VERSION {
            return Err(GrafError::IncompatibleVersion {
                found: self.format_version,
                supported: FORMAT_VERSION,
            });
        }
        let n_features = self.feature_names.len();
        let n_classes = self.classes.len();
        let config = ForestConfig {
            n_trees: self.config.n_trees,
            subspace: self
                .config
                .subspace
                .parse()
                .map_err(|e| GrafError::ModelLoad(format!("config.subspace: {e}")))?,
            min_samples_split: self.config.min_samples_split,
            seed: self.config.seed,
        };
        if config.n_trees != self.trees.len() {
            return Err(GrafError::ModelLoad(format!(
                "config.n_trees is {} but {} trees are stored",
                config.n_trees,
                self.trees.len()
            )));
        }
        let trees = self
            .trees
            .into_iter()
            .enumerate()
            .map(|(k, t)| {
                build_tree(t, n_features, n_classes)
                    .map_err(|e| GrafError::ModelLoad(format!("trees[{k}]: {}", strip(e))))
            })
            .collect::<Result<Vec<_>>>()?;
        let (class_names, class_totals) = self
            .classes
            .into_iter()
            .map(|c| (c.name, c.train_count))
            .unzip();
        let forest = Forest::from_parts(
            trees,
            config,
            n_features,
            class_totals,
            self.feature_names,
            class_names,
        )?;
        Ok(LoadedModel {
            forest,
            label_column: self.label_column,
        })
    }

    /// Canonical text: pretty-printed JSON with a trailing newline.
    pub fn to_canonical_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| GrafError::Invariant(format!("model serialization: {e}")))?;
        s.push('\n');
        Ok(s)
    }
}

fn strip(e: GrafError) -> String {
    match e {
        GrafError::ModelLoad(m) => m,
        other => other.to_string(),
    }
}

fn build_tree(t: TreeRecord, n_features: usize, n_classes: usize) -> Result<TreeInstance> {
    let bad = |msg: String| GrafError::ModelLoad(msg);
    let subspace = SubspaceView::new(t.features, n_features).map_err(|e| bad(format!("features: {e}")))?;
    let hyperplanes = t
        .hyperplanes
        .into_iter()
        .enumerate()
        .map(|(k, h)| {
            if h.step != k + 1 {
                return Err(bad(format!("hyperplanes[{k}] has step {}, expected {}", h.step, k + 1)));
            }
            Hyperplane::from_parts(h.weights, h.bias).map_err(|e| bad(format!("hyperplanes[{k}]: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let nodes = t
        .nodes
        .into_iter()
        .enumerate()
        .map(|(i, n)| {
            let bit = match n.bit {
                None => None,
                Some(0) => Some(false),
                Some(1) => Some(true),
                Some(b) => return Err(bad(format!("nodes[{i}].bit is {b}, expected 0 or 1"))),
            };
            let kind = match (n.step, n.children, n.leaf) {
                (Some(step), Some(children), None) => NodeKind::Split { step, children },
                (None, None, Some(leaf)) => NodeKind::Leaf { leaf },
                _ => {
                    return Err(bad(format!(
                        "nodes[{i}] must carry either step and children or a leaf"
                    )))
                }
            };
            Ok(Node {
                parent: n.parent,
                bit,
                kind,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let leaves = t
        .leaves
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            Ok(LeafRecord {
                code: l
                    .code
                    .parse::<LeafCode>()
                    .map_err(|e| bad(format!("leaves[{i}].code: {e}")))?,
                sample_indices: l.samples,
                class_counts: l.class_counts,
                posterior: l.posterior,
                weight_count: l.weight_count,
                created_step: l.created_step,
                state: PartitionState::parse(&l.state)
                    .ok_or_else(|| bad(format!("leaves[{i}].state {:?} is unknown", l.state)))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    TreeInstance::from_parts(subspace, hyperplanes, nodes, leaves, n_classes)
}

fn parse_error(origin: &str, e: serde_json::Error) -> GrafError {
    GrafError::ModelLoad(format!(
        "{origin}: line {}, column {}: {e}",
        e.line(),
        e.column()
    ))
}

/// Serializes a forest to its canonical JSON text.
pub fn model_to_string(forest: &Forest, label_column: &str) -> Result<String> {
    ModelEnvelope::from_forest(forest, label_column).to_canonical_string()
}

/// Parses model text. `origin` names the source in error messages.
pub fn model_from_str(text: &str, origin: &str) -> Result<LoadedModel> {
    let probe: VersionProbe = serde_json::from_str(text).map_err(|e| parse_error(origin, e))?;
    if probe.format_version != FORMAT_VERSION {
        return Err(GrafError::IncompatibleVersion {
            found: probe.format_version,
            supported: FORMAT_VERSION,
        });
    }
    let envelope: ModelEnvelope = serde_json::from_str(text).map_err(|e| parse_error(origin, e))?;
    envelope.into_model().map_err(|e| match e {
        GrafError::ModelLoad(m) => GrafError::ModelLoad(format!("{origin}: {m}")),
        other => other,
    })
}

/// Writes `forest` with the default label column name `label`.
pub fn save_model(forest: &Forest, path: impl AsRef<Path>) -> Result<()> {
    save_model_with_label(forest, "label", path)
}

pub fn save_model_with_label(forest: &Forest, label_column: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = model_to_string(forest, label_column)?;
    fs::write(path, text).map_err(|e| GrafError::io(path, e))
}

pub fn read_model(path: impl AsRef<Path>) -> Result<LoadedModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| GrafError::io(path, e))?;
    model_from_str(&text, &path.display().to_string())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Forest> {
    read_model(path).map(|m| m.forest)
}
