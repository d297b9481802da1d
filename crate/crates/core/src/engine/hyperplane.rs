use rand::Rng;

use crate::dataset::{Dataset, SubspaceView};
use crate::engine::Partition;
use crate::error::{GrafError, Result};

/// Relative half-width trimmed off each end of a feature's range before
/// drawing a weight from it.
pub const RANGE_EPSILON: f64 = 1e-9;

/// Per-feature minimum, maximum and mean of a partition's members, restricted
/// to a subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionStats {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub mean: Vec<f64>,
}

impl PartitionStats {
    /// Computes the statistics of `members`, where `value(i, j)` returns
    /// feature `j` (subspace-local) of sample `i`.
    pub fn from_fn<F>(members: &[usize], n_dims: usize, value: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> f64,
    {
        let (&first, rest) = members
            .split_first()
            .ok_or_else(|| GrafError::Usage("statistics of an empty partition".into()))?;
        let mut min: Vec<f64> = (0..n_dims).map(|j| value(first, j)).collect();
        let mut max = min.clone();
        let mut sum = min.clone();
        for &i in rest {
            for j in 0..n_dims {
                let v = value(i, j);
                if v < min[j] {
                    min[j] = v;
                }
                if v > max[j] {
                    max[j] = v;
                }
                sum[j] += v;
            }
        }
        let n = members.len() as f64;
        // Rounding can push a mean outside [min, max], or off a constant value.
        let mean = sum
            .iter()
            .zip(min.iter().zip(&max))
            .map(|(&s, (&lo, &hi))| if lo == hi { lo } else { (s / n).clamp(lo, hi) })
            .collect();
        Ok(PartitionStats { min, max, mean })
    }

    pub fn n_dims(&self) -> usize {
        self.min.len()
    }

    /// True when every feature takes a single value across the partition.
    pub fn is_constant(&self) -> bool {
        self.min.iter().zip(&self.max).all(|(lo, hi)| lo == hi)
    }
}

/// Statistics of `part`'s members over the features in `sub`.
pub fn partition_stats(
    dataset: &Dataset,
    part: &Partition,
    sub: &SubspaceView,
) -> Result<PartitionStats> {
    let idx = sub.indices();
    PartitionStats::from_fn(&part.sample_indices, idx.len(), |i, j| {
        dataset.row(i)[idx[j]]
    })
}

/// An affine split `w . x + bias` over a tree's subspace, centered on the
/// mean of the partition it was drawn for.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    weights: Vec<f64>,
    bias: f64,
}

impl Hyperplane {
    /// Builds the hyperplane through `mean`: `bias = -sum_j w_j * mean_j`.
    pub fn through_mean(weights: Vec<f64>, mean: &[f64]) -> Result<Self> {
        if weights.len() != mean.len() {
            return Err(GrafError::Usage(format!(
                "{} weights for a {}-dimensional mean",
                weights.len(),
                mean.len()
            )));
        }
        let bias = -dot(&weights, mean);
        Hyperplane::from_parts(weights, bias)
    }

    /// Rebuilds a stored hyperplane.
    pub fn from_parts(weights: Vec<f64>, bias: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(GrafError::Usage("hyperplane needs at least one weight".into()));
        }
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(GrafError::Data("hyperplane has a non-finite coefficient".into()));
        }
        Ok(Hyperplane { weights, bias })
    }

    /// Draws each weight uniformly from the partition's trimmed feature range
    /// and centers the plane on the partition mean. A feature whose range
    /// collapses gets weight `min_j`; it then contributes nothing to any
    /// member's score.
    pub fn draw<R: Rng + ?Sized>(stats: &PartitionStats, rng: &mut R) -> Self {
        let weights: Vec<f64> = stats
            .min
            .iter()
            .zip(&stats.max)
            .map(|(&lo, &hi)| {
                let eps = RANGE_EPSILON * (hi - lo).abs().max(1.0);
                let (a, b) = (lo + eps, hi - eps);
                if a < b {
                    rng.random_range(a..b)
                } else {
                    lo
                }
            })
            .collect();
        let bias = -dot(&weights, &stats.mean);
        Hyperplane { weights, bias }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn n_dims(&self) -> usize {
        self.weights.len()
    }

    /// `w . x + bias` for a sample already restricted to the subspace.
    ///
    /// The dot product is accumulated in the same order as the bias, so the
    /// source partition's mean scores exactly zero.
    #[inline]
    pub fn score(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }

    /// Same as [`score`](Self::score) on a full-width sample, reading only
    /// the subspace features. Bit-identical to scoring the restricted row.
    #[inline]
    pub fn score_indexed(&self, x: &[f64], sub: &[usize]) -> f64 {
        let mut acc = 0.0;
        for (w, &j) in self.weights.iter().zip(sub) {
            acc += w * x[j];
        }
        acc + self.bias
    }

    /// 1 iff the score is strictly positive.
    #[inline]
    pub fn assign_bit(&self, x: &[f64]) -> bool {
        self.score(x) > 0.0
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn stats_of(rows: &[[f64; 2]]) -> PartitionStats {
        let members: Vec<usize> = (0..rows.len()).collect();
        PartitionStats::from_fn(&members, 2, |i, j| rows[i][j]).unwrap()
    }

    #[test]
    fn stats_two_points() {
        let s = stats_of(&[[0.0, 2.0], [4.0, 6.0]]);
        assert_eq!(s.min, vec![0.0, 2.0]);
        assert_eq!(s.max, vec![4.0, 6.0]);
        assert_eq!(s.mean, vec![2.0, 4.0]);
    }

    #[test]
    fn stats_singleton() {
        let s = stats_of(&[[3.0, 3.0]]);
        assert_eq!(s.min, s.max);
        assert_eq!(s.mean, vec![3.0, 3.0]);
        assert!(s.is_constant());
    }

    #[test]
    fn stats_constant_feature() {
        let s = stats_of(&[[1.0, 1.0], [1.0, 5.0], [1.0, 9.0]]);
        assert_eq!(s.min, vec![1.0, 1.0]);
        assert_eq!(s.max, vec![1.0, 9.0]);
        assert_eq!(s.mean, vec![1.0, 5.0]);
        assert!(!s.is_constant());
    }

    #[test]
    fn stats_constant_mean_is_exact() {
        // 0.1 * 3 / 3 != 0.1 in floating point; the mean must still equal it.
        let s = stats_of(&[[0.1, 0.0], [0.1, 1.0], [0.1, 2.0]]);
        assert_eq!(s.mean[0], 0.1);
    }

    #[test]
    fn stats_empty_is_usage_error() {
        let err = PartitionStats::from_fn(&[], 2, |_, _| 0.0).unwrap_err();
        assert!(matches!(err, GrafError::Usage(_)));
    }

    #[test]
    fn bias_from_mean() {
        let h = Hyperplane::through_mean(vec![0.4, 0.7], &[0.5, 0.5]).unwrap();
        assert!((h.bias() - (-0.55)).abs() < 1e-15);
        let h = Hyperplane::through_mean(vec![2.0, 1.0], &[0.5, 1.0]).unwrap();
        assert_eq!(h.bias(), -2.0);
    }

    #[test]
    fn constant_partition_draws_non_dichotomizing_plane() {
        let s = stats_of(&[[3.0, 3.0], [3.0, 3.0]]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let h = Hyperplane::draw(&s, &mut rng);
        assert_eq!(h.weights(), &[3.0, 3.0]);
        assert_eq!(h.bias(), -18.0);
        assert_eq!(h.score(&[3.0, 3.0]), 0.0);
        assert!(!h.assign_bit(&[3.0, 3.0]));
    }

    #[test]
    fn drawn_weights_inside_trimmed_range() {
        let s = stats_of(&[[0.0, -5.0], [1.0, 5.0], [0.5, 0.0]]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let h = Hyperplane::draw(&s, &mut rng);
            assert!(h.weights()[0] > 0.0 && h.weights()[0] < 1.0);
            assert!(h.weights()[1] > -5.0 && h.weights()[1] < 5.0);
            let expected = -(h.weights()[0] * s.mean[0] + h.weights()[1] * s.mean[1]);
            assert!((h.bias() - expected).abs() <= 1e-9 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn strict_bit_convention() {
        let h = Hyperplane::from_parts(vec![1.0, 0.0], -0.5).unwrap();
        assert!(h.assign_bit(&[1.0, 7.0]));
        assert!(!h.assign_bit(&[0.5, 7.0]));
        let h = Hyperplane::through_mean(vec![2.0, 1.0], &[0.5, 1.0]).unwrap();
        assert!(!h.assign_bit(&[0.5, 1.0]));
    }

    #[test]
    fn indexed_score_matches_restricted_score() {
        let h = Hyperplane::from_parts(vec![0.3, -1.7, 2.2], 0.123).unwrap();
        let full = [9.0, 0.1, 4.0, -3.3, 0.7];
        let sub = [1, 3, 4];
        let restricted: Vec<f64> = sub.iter().map(|&j| full[j]).collect();
        assert_eq!(h.score(&restricted), h.score_indexed(&full, &sub));
    }

    #[test]
    fn rejects_non_finite_parts() {
        assert!(Hyperplane::from_parts(vec![f64::INFINITY], 0.0).is_err());
        assert!(Hyperplane::from_parts(vec![1.0], f64::NAN).is_err());
        assert!(Hyperplane::from_parts(vec![], 0.0).is_err());
    }
}
