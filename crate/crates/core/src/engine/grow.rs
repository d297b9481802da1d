use rand::Rng;

use crate::dataset::{Dataset, SubspaceView};
use crate::engine::hyperplane::{Hyperplane, PartitionStats};
use crate::engine::impurity::{impurity_unchecked, posterior_from_counts};
use crate::engine::tree::{LeafCode, LeafRecord, Node, NodeKind, TreeInstance};
use crate::engine::PartitionState;
use crate::error::{GrafError, Result};

/// Draws attempted on the most impure partition before it is declared
/// unsplittable.
pub const MAX_DRAW_ATTEMPTS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrowConfig {
    /// Partitions smaller than this are not split further.
    pub min_samples_split: usize,
}

impl Default for GrowConfig {
    fn default() -> Self {
        GrowConfig {
            min_samples_split: 2,
        }
    }
}

/// One partition divided by one hyperplane.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitRecord {
    pub step: usize,
    /// Whether this partition was the one the hyperplane was drawn for.
    pub source: bool,
    pub parent_impurity: f64,
    pub child_impurity: [f64; 2],
    pub child_sizes: [usize; 2],
}

/// Diagnostics collected while growing a tree.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GrowthTrace {
    pub splits: Vec<SplitRecord>,
    /// Samples covered by live partitions after each applied hyperplane.
    pub coverage: Vec<usize>,
    /// Partitions given up on after [`MAX_DRAW_ATTEMPTS`] failed draws.
    pub exhausted: usize,
}

struct Active {
    node: usize,
    members: Vec<usize>,
    counts: Vec<usize>,
    impurity: f64,
    created_step: usize,
    code: LeafCode,
}

struct Builder<'a> {
    proj: Vec<f64>,
    m: usize,
    labels: &'a [usize],
    class_totals: &'a [usize],
    n_classes: usize,
    min_split: usize,
    nodes: Vec<Node>,
    leaves: Vec<LeafRecord>,
}

impl Builder<'_> {
    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.proj[i * self.m..(i + 1) * self.m]
    }

    fn counts(&self, members: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &i in members {
            counts[self.labels[i]] += 1;
        }
        counts
    }

    fn is_constant(&self, members: &[usize]) -> bool {
        let first = self.row(members[0]);
        members[1..].iter().all(|&i| self.row(i) == first)
    }

    fn state_of(&self, members: &[usize], impurity: f64) -> PartitionState {
        if impurity == 0.0 {
            PartitionState::Pure
        } else if members.len() < self.min_split || self.is_constant(members) {
            PartitionState::Unsplittable
        } else {
            PartitionState::Impure
        }
    }

    fn finalize(&mut self, part: Active, state: PartitionState, step: usize) {
        let leaf = self.leaves.len();
        self.nodes[part.node].kind = NodeKind::Leaf { leaf };
        self.leaves.push(LeafRecord {
            posterior: posterior_from_counts(&part.counts, self.class_totals),
            code: part.code,
            sample_indices: part.members,
            class_counts: part.counts,
            weight_count: step,
            created_step: part.created_step,
            state,
        });
    }

    fn splits(&self, h: &Hyperplane, members: &[usize]) -> bool {
        let mut seen = [false; 2];
        for &i in members {
            seen[usize::from(h.score(self.row(i)) > 0.0)] = true;
            if seen[0] && seen[1] {
                return true;
            }
        }
        false
    }
}

/// Index of the most impure partition; ties go to the oldest.
fn most_impure(active: &[Active]) -> usize {
    let mut best = 0;
    for (k, a) in active.iter().enumerate().skip(1) {
        let b = &active[best];
        if a.impurity > b.impurity
            || (a.impurity == b.impurity && a.created_step < b.created_step)
        {
            best = k;
        }
    }
    best
}

/// Grows one tree over `sub`, drawing hyperplanes with `rng`.
pub fn grow_tree<R: Rng + ?Sized>(
    dataset: &Dataset,
    sub: &SubspaceView,
    config: &GrowConfig,
    rng: &mut R,
) -> Result<TreeInstance> {
    grow_tree_traced(dataset, sub, config, rng).map(|(tree, _)| tree)
}

/// [`grow_tree`], also returning per-split diagnostics.
pub fn grow_tree_traced<R: Rng + ?Sized>(
    dataset: &Dataset,
    sub: &SubspaceView,
    config: &GrowConfig,
    rng: &mut R,
) -> Result<(TreeInstance, GrowthTrace)> {
    if config.min_samples_split < 2 {
        return Err(GrafError::Config(format!(
            "min_samples_split must be at least 2, got {}",
            config.min_samples_split
        )));
    }
    if let Some(&j) = sub.indices().iter().find(|&&j| j >= dataset.n_features()) {
        return Err(GrafError::Usage(format!(
            "subspace feature {j} out of range for {} features",
            dataset.n_features()
        )));
    }
    let n = dataset.n_samples();
    let m = sub.len();
    let mut proj = Vec::with_capacity(n * m);
    for i in 0..n {
        proj.extend(sub.indices().iter().map(|&j| dataset.row(i)[j]));
    }
    let mut b = Builder {
        proj,
        m,
        labels: dataset.labels(),
        class_totals: dataset.class_totals(),
        n_classes: dataset.n_classes(),
        min_split: config.min_samples_split,
        nodes: vec![Node {
            parent: None,
            bit: None,
            kind: NodeKind::Leaf { leaf: usize::MAX },
        }],
        leaves: Vec::new(),
    };
    let mut trace = GrowthTrace::default();

    let members: Vec<usize> = (0..n).collect();
    let counts = b.counts(&members);
    let z = impurity_unchecked(&counts, b.class_totals);
    let root = Active {
        node: 0,
        members,
        counts,
        impurity: z,
        created_step: 0,
        code: LeafCode::default(),
    };
    let mut active = Vec::new();
    match b.state_of(&root.members, z) {
        PartitionState::Impure => active.push(root),
        state => b.finalize(root, state, 0),
    }

    let mut step = 0;
    let mut hyperplanes = Vec::new();
    let mut finalized_members = n - active.iter().map(|a| a.members.len()).sum::<usize>();
    let mut bits = Vec::new();
    while !active.is_empty() {
        let w = most_impure(&active);
        let stats = PartitionStats::from_fn(&active[w].members, m, |i, j| b.proj[i * m + j])?;
        let plane = (0..MAX_DRAW_ATTEMPTS)
            .map(|_| Hyperplane::draw(&stats, rng))
            .find(|h| b.splits(h, &active[w].members));
        let Some(h) = plane else {
            let part = active.remove(w);
            finalized_members += part.members.len();
            b.finalize(part, PartitionState::Unsplittable, step);
            trace.exhausted += 1;
            continue;
        };
        step += 1;

        let mut next = Vec::with_capacity(active.len() + 1);
        for (k, part) in active.into_iter().enumerate() {
            bits.clear();
            bits.extend(part.members.iter().map(|&i| h.score(b.row(i)) > 0.0));
            let ones = bits.iter().filter(|&&x| x).count();
            if ones == 0 || ones == bits.len() {
                next.push(part);
                continue;
            }
            let mut sides: [Vec<usize>; 2] = [
                Vec::with_capacity(bits.len() - ones),
                Vec::with_capacity(ones),
            ];
            for (&i, &bit) in part.members.iter().zip(&bits) {
                sides[usize::from(bit)].push(i);
            }
            let first_child = b.nodes.len();
            b.nodes[part.node].kind = NodeKind::Split {
                step,
                children: [first_child, first_child + 1],
            };
            let mut child_impurity = [0.0; 2];
            let [zero, one] = sides;
            for (bit, members) in [(false, zero), (true, one)] {
                let node = b.nodes.len();
                b.nodes.push(Node {
                    parent: Some(part.node),
                    bit: Some(bit),
                    kind: NodeKind::Leaf { leaf: usize::MAX },
                });
                let counts = b.counts(&members);
                let z = impurity_unchecked(&counts, b.class_totals);
                child_impurity[usize::from(bit)] = z;
                let state = b.state_of(&members, z);
                let child = Active {
                    node,
                    members,
                    counts,
                    impurity: z,
                    created_step: step,
                    code: part.code.child(bit),
                };
                if state == PartitionState::Impure {
                    next.push(child);
                } else {
                    finalized_members += child.members.len();
                    b.finalize(child, state, step);
                }
            }
            trace.splits.push(SplitRecord {
                step,
                source: k == w,
                parent_impurity: part.impurity,
                child_impurity,
                child_sizes: [bits.len() - ones, ones],
            });
        }
        active = next;
        hyperplanes.push(h);

        let covered = finalized_members + active.iter().map(|a| a.members.len()).sum::<usize>();
        debug_assert_eq!(covered, n);
        trace.coverage.push(covered);
    }

    let tree = TreeInstance::from_parts(
        sub.clone(),
        hyperplanes,
        b.nodes,
        b.leaves,
        dataset.n_classes(),
    )
    .map_err(|e| GrafError::Invariant(format!("grown tree failed validation: {e}")))?;
    Ok((tree, trace))
}
