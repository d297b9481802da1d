//! Growth of a single tree by globally extended random hyperplanes.
//!
//! A tree starts with one partition holding every training sample. At each
//! step the most impure partition supplies the statistics for a new random
//! hyperplane, and that hyperplane is then applied to *every* impure
//! partition, not only the one it was drawn for. Partitions it leaves on one
//! side are not split and emit no bit at that step, so leaf codes have
//! variable length. Growth stops once no partition is both impure and
//! splittable.

mod grow;
mod hyperplane;
mod impurity;
mod tree;

pub use grow::{grow_tree, grow_tree_traced, GrowConfig, GrowthTrace, SplitRecord, MAX_DRAW_ATTEMPTS};
pub use hyperplane::{partition_stats, Hyperplane, PartitionStats, RANGE_EPSILON};
pub use impurity::{impurity, posterior_from_counts};
pub use tree::{LeafCode, LeafRecord, Node, NodeKind, TreeInstance};

/// Where a partition stands in the growth loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PartitionState {
    /// Mixed classes and still eligible for splitting.
    Impure,
    /// A single class.
    Pure,
    /// Mixed classes but terminal: every subspace feature is constant, the
    /// partition is below the minimum split size, or no drawn hyperplane
    /// managed to divide it.
    Unsplittable,
}

impl PartitionState {
    pub fn as_str(self) -> &'static str {
        match self {
            PartitionState::Impure => "impure",
            PartitionState::Pure => "pure",
            PartitionState::Unsplittable => "unsplittable",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "impure" => Some(PartitionState::Impure),
            "pure" => Some(PartitionState::Pure),
            "unsplittable" => Some(PartitionState::Unsplittable),
            _ => None,
        }
    }
}

/// A set of training rows sharing one code.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub sample_indices: Vec<usize>,
    pub state: PartitionState,
    /// Hyperplane count at creation (0 for the root).
    pub created_step: usize,
    /// Hyperplane count when the partition stopped being impure.
    pub finalized_step: Option<usize>,
}

impl Partition {
    /// The root partition over `n` samples.
    pub fn root(n: usize) -> Self {
        Partition {
            sample_indices: (0..n).collect(),
            state: PartitionState::Impure,
            created_step: 0,
            finalized_step: None,
        }
    }
}

/// Upper bound on the cells `height` affine hyperplanes can cut an
/// `m`-dimensional space into: `sum_{i=0}^{m} C(height, i)`. Saturates.
pub fn partition_count_bound(height: usize, m: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for i in 0..=m.min(height) {
        if i > 0 {
            binom = binom.saturating_mul((height - i + 1) as u128) / i as u128;
        }
        total = total.saturating_add(binom);
    }
    total
}
