//! Class-frequency normalized impurity and leaf posteriors.

use crate::error::{GrafError, Result};

/// Impurity `Z` of a partition with per-class member counts `counts`, given
/// the per-class totals `N_c` of the training set:
///
/// `Z = (1 - sum_c r_c^2 / (sum_c r_c)^2) * n` with `r_c = counts_c / N_c`.
///
/// Zero exactly when a single class is present.
pub fn impurity(counts: &[usize], class_totals: &[usize]) -> Result<f64> {
    if counts.len() != class_totals.len() {
        return Err(GrafError::Usage(format!(
            "{} class counts for {} class totals",
            counts.len(),
            class_totals.len()
        )));
    }
    if counts.iter().all(|&c| c == 0) {
        return Err(GrafError::Usage("impurity of an empty partition".into()));
    }
    if let Some(c) = (0..counts.len()).find(|&c| counts[c] > class_totals[c]) {
        return Err(GrafError::Usage(format!(
            "partition holds {} samples of class {} but the class total is {}",
            counts[c], c, class_totals[c]
        )));
    }
    Ok(impurity_unchecked(counts, class_totals))
}

/// [`impurity`] without argument validation; the engine's hot path.
#[inline]
pub(crate) fn impurity_unchecked(counts: &[usize], class_totals: &[usize]) -> f64 {
    let mut n = 0usize;
    let mut present = 0usize;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for (&k, &total) in counts.iter().zip(class_totals) {
        if k == 0 {
            continue;
        }
        n += k;
        present += 1;
        let r = k as f64 / total as f64;
        sum += r;
        sum_sq += r * r;
    }
    if present <= 1 {
        return 0.0;
    }
    (1.0 - sum_sq / (sum * sum)) * n as f64
}

/// Imbalance-corrected class posterior of a leaf.
///
/// Within-leaf class fractions are reweighted by `IF_c = N / N_c` and
/// renormalized. Classes absent from the training set get zero weight.
pub fn posterior_from_counts(counts: &[usize], class_totals: &[usize]) -> Vec<f64> {
    let n_leaf: usize = counts.iter().sum();
    let n_total: usize = class_totals.iter().sum();
    let weighted: Vec<f64> = counts
        .iter()
        .zip(class_totals)
        .map(|(&k, &total)| {
            if total == 0 || k == 0 {
                0.0
            } else {
                let frac = k as f64 / n_leaf as f64;
                let factor = n_total as f64 / total as f64;
                frac * factor
            }
        })
        .collect();
    let norm: f64 = weighted.iter().sum();
    weighted.into_iter().map(|w| w / norm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_partition_has_zero_impurity() {
        assert_eq!(impurity(&[10, 0], &[100, 100]).unwrap(), 0.0);
        assert_eq!(impurity(&[0, 1], &[3, 1]).unwrap(), 0.0);
    }

    #[test]
    fn balanced_mixture() {
        let z = impurity(&[10, 10], &[100, 100]).unwrap();
        assert!((z - 10.0).abs() < 1e-12);
    }

    #[test]
    fn skewed_mixture() {
        let z = impurity(&[30, 10], &[100, 100]).unwrap();
        assert!((z - 15.0).abs() < 1e-12);
    }

    #[test]
    fn empty_partition_rejected() {
        assert!(matches!(
            impurity(&[0, 0], &[5, 5]),
            Err(GrafError::Usage(_))
        ));
        assert!(impurity(&[3, 0], &[2, 5]).is_err());
    }

    #[test]
    fn one_hot_posterior() {
        assert_eq!(posterior_from_counts(&[5, 0], &[10, 90]), vec![1.0, 0.0]);
    }

    #[test]
    fn imbalance_reweighting() {
        let f = posterior_from_counts(&[1, 1], &[80, 20]);
        assert!((f[0] - 0.2).abs() < 1e-12);
        assert!((f[1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn balanced_reweighting_is_identity() {
        let f = posterior_from_counts(&[3, 7], &[50, 50]);
        assert!((f[0] - 0.3).abs() < 1e-12);
        assert!((f[1] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn absent_class_gets_zero() {
        let f = posterior_from_counts(&[2, 0, 2], &[4, 0, 4]);
        assert_eq!(f, vec![0.5, 0.0, 0.5]);
    }
}
