use crate::error::{GrafError, Result};

/// Tolerance below zero tolerated on the sampling-corrected bias term before
/// it is flagged.
pub const NEGATIVE_BIAS_TOLERANCE: f64 = 1e-12;

/// Kohavi-Wolpert style 0-1 loss decomposition over `R` models.
#[derive(Debug, Clone, PartialEq)]
pub struct BvResult {
    pub bias2: f64,
    pub variance: f64,
    pub err: f64,
    pub models: usize,
    pub test_size: usize,
    /// Set when `bias2` fell below `-NEGATIVE_BIAS_TOLERANCE`.
    pub negative_bias_flag: bool,
}

/// Decomposes the predictions `predictions[r][i]` of `R >= 2` models on a
/// test set with labels `truth`:
///
/// - `p_ij = (1/R) sum_r 1(yhat_ri = j)`
/// - `bias2 = (1/N_t) sum_i sum_j ((1(y_i = j) - p_ij)^2 - p_ij (1 - p_ij) / (R - 1))`
/// - `variance = 1 - (1/N_t) sum_i sum_j p_ij^2`
/// - `err = (1/R) sum_r (1 - accuracy_r)`
pub fn kw_decompose(
    predictions: &[Vec<usize>],
    truth: &[usize],
    n_classes: usize,
) -> Result<BvResult> {
    let r = predictions.len();
    if r < 2 {
        return Err(GrafError::Usage(format!(
            "bias-variance decomposition needs at least 2 models, got {r}"
        )));
    }
    let nt = truth.len();
    if nt == 0 {
        return Err(GrafError::Usage("empty test set".into()));
    }
    if predictions.iter().any(|p| p.len() != nt) {
        return Err(GrafError::Usage("prediction rows differ from test size".into()));
    }
    if predictions
        .iter()
        .flatten()
        .chain(truth)
        .any(|&c| c >= n_classes)
    {
        return Err(GrafError::Usage(format!("class index outside 0..{n_classes}")));
    }

    let rf = r as f64;
    let mut votes = vec![0usize; n_classes];
    let mut bias_sum = 0.0;
    let mut sq_sum = 0.0;
    for i in 0..nt {
        votes.iter_mut().for_each(|v| *v = 0);
        for model in predictions {
            votes[model[i]] += 1;
        }
        for (j, &v) in votes.iter().enumerate() {
            let p = v as f64 / rf;
            let target = if truth[i] == j { 1.0 } else { 0.0 };
            bias_sum += (target - p) * (target - p) - p * (1.0 - p) / (rf - 1.0);
            sq_sum += p * p;
        }
    }
    let ntf = nt as f64;
    let bias2 = bias_sum / ntf;
    let variance = 1.0 - sq_sum / ntf;
    let err = predictions
        .iter()
        .map(|model| {
            let hits = model.iter().zip(truth).filter(|(p, t)| p == t).count();
            1.0 - hits as f64 / ntf
        })
        .sum::<f64>()
        / rf;
    Ok(BvResult {
        bias2,
        variance,
        err,
        models: r,
        test_size: nt,
        negative_bias_flag: bias2 < -NEGATIVE_BIAS_TOLERANCE,
    })
}
