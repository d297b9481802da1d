use std::fmt;

use crate::dataset::{Dataset, SubspaceView};
use crate::engine::hyperplane::Hyperplane;
use crate::engine::impurity::posterior_from_counts;
use crate::engine::PartitionState;
use crate::error::{GrafError, Result};

/// Variable-length leaf code: one bit per hyperplane that actually split the
/// partition on the way from the root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct LeafCode(Vec<bool>);

impl LeafCode {
    pub fn new(bits: Vec<bool>) -> Self {
        LeafCode(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn child(&self, bit: bool) -> LeafCode {
        let mut bits = Vec::with_capacity(self.0.len() + 1);
        bits.extend_from_slice(&self.0);
        bits.push(bit);
        LeafCode(bits)
    }
}

impl fmt::Display for LeafCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for LeafCode {
    type Err = GrafError;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(GrafError::Data(format!("invalid code character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(LeafCode)
    }
}

/// A finalized partition of the training set.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafRecord {
    pub code: LeafCode,
    /// Training rows in this leaf, ascending.
    pub sample_indices: Vec<usize>,
    pub class_counts: Vec<usize>,
    pub posterior: Vec<f64>,
    /// Number of hyperplanes the tree had drawn when this leaf was finalized.
    pub weight_count: usize,
    pub created_step: usize,
    pub state: PartitionState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// Split by hyperplane number `step` (1-based); `children[b]` takes bit `b`.
    Split { step: usize, children: [usize; 2] },
    Leaf { leaf: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Node {
    pub parent: Option<usize>,
    /// Bit emitted on the edge from the parent.
    pub bit: Option<bool>,
    pub kind: NodeKind,
}

/// One grown tree: a subspace, the hyperplanes drawn in order, and the node
/// tree recording which hyperplane split which partition.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeInstance {
    subspace: SubspaceView,
    hyperplanes: Vec<Hyperplane>,
    nodes: Vec<Node>,
    leaves: Vec<LeafRecord>,
    n_classes: usize,
}

impl TreeInstance {
    /// Assembles a tree from parts, validating the structure.
    pub fn from_parts(
        subspace: SubspaceView,
        hyperplanes: Vec<Hyperplane>,
        nodes: Vec<Node>,
        leaves: Vec<LeafRecord>,
        n_classes: usize,
    ) -> Result<Self> {
        let tree = TreeInstance {
            subspace,
            hyperplanes,
            nodes,
            leaves,
            n_classes,
        };
        tree.validate()?;
        Ok(tree)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GrafError::ModelLoad(msg));
        if self.nodes.is_empty() {
            return bad("tree has no nodes".into());
        }
        if self.nodes[0].parent.is_some() {
            return bad("node 0 must be the root".into());
        }
        let m = self.subspace.len();
        for (k, h) in self.hyperplanes.iter().enumerate() {
            if h.n_dims() != m {
                return bad(format!(
                    "hyperplane {} has {} weights for a {m}-feature subspace",
                    k + 1,
                    h.n_dims()
                ));
            }
        }
        let mut leaf_seen = vec![false; self.leaves.len()];
        let mut reached = vec![false; self.nodes.len()];
        // Walk from the root so every node is reachable exactly once and step
        // indices increase along each path.
        let mut stack = vec![(0usize, 0usize)];
        while let Some((id, min_step)) = stack.pop() {
            if reached[id] {
                return bad(format!("node {id} reached twice"));
            }
            reached[id] = true;
            match self.nodes[id].kind {
                NodeKind::Split { step, children } => {
                    if step == 0 || step > self.hyperplanes.len() || step <= min_step {
                        return bad(format!("node {id} has invalid split step {step}"));
                    }
                    for (b, &c) in children.iter().enumerate() {
                        if c >= self.nodes.len()
                            || self.nodes[c].parent != Some(id)
                            || self.nodes[c].bit != Some(b == 1)
                        {
                            return bad(format!("node {id} has inconsistent child {c}"));
                        }
                        stack.push((c, step));
                    }
                }
                NodeKind::Leaf { leaf } => {
                    if leaf >= self.leaves.len() || leaf_seen[leaf] {
                        return bad(format!("node {id} references invalid leaf {leaf}"));
                    }
                    leaf_seen[leaf] = true;
                }
            }
        }
        if let Some(id) = reached.iter().position(|r| !r) {
            return bad(format!("node {id} is unreachable from the root"));
        }
        if let Some(l) = leaf_seen.iter().position(|s| !s) {
            return bad(format!("leaf {l} is not referenced by any node"));
        }
        for (l, leaf) in self.leaves.iter().enumerate() {
            if leaf.posterior.len() != self.n_classes || leaf.class_counts.len() != self.n_classes
            {
                return bad(format!("leaf {l} has wrong class dimension"));
            }
            if leaf.posterior.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return bad(format!("leaf {l} has an invalid posterior"));
            }
        }
        Ok(())
    }

    pub fn subspace(&self) -> &SubspaceView {
        &self.subspace
    }

    pub fn hyperplanes(&self) -> &[Hyperplane] {
        &self.hyperplanes
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn leaves(&self) -> &[LeafRecord] {
        &self.leaves
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Index of the leaf reached by a full-width sample `x`.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let sub = self.subspace.indices();
        let mut node = 0;
        loop {
            match self.nodes[node].kind {
                NodeKind::Leaf { leaf } => return leaf,
                NodeKind::Split { step, children } => {
                    let h = &self.hyperplanes[step - 1];
                    node = children[usize::from(h.score_indexed(x, sub) > 0.0)];
                }
            }
        }
    }

    /// Descends from the root to the leaf containing `x` (full width).
    pub fn traverse(&self, x: &[f64]) -> &LeafRecord {
        &self.leaves[self.leaf_index(x)]
    }

    /// `(step, bit)` pairs on the path from the root to leaf `leaf`.
    pub fn leaf_path(&self, leaf: usize) -> Vec<(usize, bool)> {
        let mut node = self
            .nodes
            .iter()
            .position(|n| n.kind == NodeKind::Leaf { leaf })
            .expect("leaf is referenced by a node");
        let mut path = Vec::new();
        while let (Some(parent), Some(bit)) = (self.nodes[node].parent, self.nodes[node].bit) {
            if let NodeKind::Split { step, .. } = self.nodes[parent].kind {
                path.push((step, bit));
            }
            node = parent;
        }
        path.reverse();
        path
    }

    /// Recomputes every leaf's class counts and posterior from `dataset`,
    /// whose rows are the ones the leaves index.
    pub fn recompute_posteriors(&mut self, dataset: &Dataset) -> Result<()> {
        if dataset.n_classes() != self.n_classes {
            return Err(GrafError::Usage(format!(
                "dataset has {} classes, tree has {}",
                dataset.n_classes(),
                self.n_classes
            )));
        }
        for leaf in &mut self.leaves {
            let mut counts = vec![0; self.n_classes];
            for &i in &leaf.sample_indices {
                if i >= dataset.n_samples() {
                    return Err(GrafError::Usage(format!(
                        "leaf member {i} out of range for {} samples",
                        dataset.n_samples()
                    )));
                }
                counts[dataset.label(i)] += 1;
            }
            leaf.posterior = posterior_from_counts(&counts, dataset.class_totals());
            leaf.class_counts = counts;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn code_round_trip_text() {
        let c: LeafCode = "0110".parse().unwrap();
        assert_eq!(c.bits(), &[false, true, true, false]);
        assert_eq!(c.to_string(), "0110");
        assert!("01x".parse::<LeafCode>().is_err());
        assert_eq!(LeafCode::default().to_string(), "");
    }

    fn leaf(code: &str, members: Vec<usize>, posterior: Vec<f64>) -> LeafRecord {
        LeafRecord {
            code: code.parse().unwrap(),
            sample_indices: members,
            class_counts: vec![0; posterior.len()],
            posterior,
            weight_count: 1,
            created_step: 1,
            state: PartitionState::Pure,
        }
    }

    fn depth_one() -> TreeInstance {
        let nodes = vec![
            Node {
                parent: None,
                bit: None,
                kind: NodeKind::Split {
                    step: 1,
                    children: [1, 2],
                },
            },
            Node {
                parent: Some(0),
                bit: Some(false),
                kind: NodeKind::Leaf { leaf: 0 },
            },
            Node {
                parent: Some(0),
                bit: Some(true),
                kind: NodeKind::Leaf { leaf: 1 },
            },
        ];
        TreeInstance::from_parts(
            SubspaceView::full(2),
            vec![Hyperplane::from_parts(vec![1.0, 0.0], -0.5).unwrap()],
            nodes,
            vec![
                leaf("0", vec![0], vec![1.0, 0.0]),
                leaf("1", vec![1], vec![0.0, 1.0]),
            ],
            2,
        )
        .unwrap()
    }

    #[test]
    fn boundary_goes_to_bit_zero() {
        let t = depth_one();
        assert_eq!(t.leaf_index(&[0.5, 3.0]), 0);
        assert_eq!(t.leaf_index(&[0.5000001, 3.0]), 1);
        assert_eq!(t.leaf_path(1), vec![(1, true)]);
    }

    #[test]
    fn single_leaf_tree_always_reached() {
        let t = TreeInstance::from_parts(
            SubspaceView::full(1),
            vec![],
            vec![Node {
                parent: None,
                bit: None,
                kind: NodeKind::Leaf { leaf: 0 },
            }],
            vec![leaf("", vec![0, 1], vec![1.0])],
            1,
        )
        .unwrap();
        for x in [-1e9, 0.0, 42.0] {
            assert_eq!(t.traverse(&[x]).sample_indices, vec![0, 1]);
        }
        assert!(t.leaf_path(0).is_empty());
    }

    #[test]
    fn rejects_broken_structure() {
        let t = depth_one();
        let mut nodes = t.nodes().to_vec();
        nodes[2].bit = Some(false);
        assert!(TreeInstance::from_parts(
            t.subspace().clone(),
            t.hyperplanes().to_vec(),
            nodes,
            t.leaves().to_vec(),
            2
        )
        .is_err());

        let mut nodes = t.nodes().to_vec();
        nodes[0].kind = NodeKind::Split {
            step: 2,
            children: [1, 2],
        };
        assert!(TreeInstance::from_parts(
            t.subspace().clone(),
            t.hyperplanes().to_vec(),
            nodes,
            t.leaves().to_vec(),
            2
        )
        .is_err());
    }
}
