use crate::error::{GrafError, Result};

/// Strength and correlation of an ensemble on a labeled test set.
#[derive(Debug, Clone, PartialEq)]
pub struct ScResult {
    /// Mean raw margin `s` in `[-1, 1]`.
    pub strength: f64,
    /// `None` when `sd == 0`.
    pub correlation: Option<f64>,
    /// `rho (1 - s^2) / s^2`; `None` unless `s > 0` and `sd > 0`.
    pub pe_bound: Option<f64>,
    pub sd: f64,
    pub margins: Vec<f64>,
}

/// Most-voted class other than `truth`, ties to the smallest index; `None`
/// when there is no other class.
fn top_wrong_class(votes: &[usize], truth: usize) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (j, &v) in votes.iter().enumerate() {
        if j == truth {
            continue;
        }
        if best.is_none_or(|b| v > votes[b]) {
            best = Some(j);
        }
    }
    best
}

/// Computes strength, correlation and the generalization bound from
/// per-tree predictions `per_tree[t][i]`:
///
/// - `p_i` = vote share of the true class minus the largest vote share of any
///   other class
/// - `acc_t`, `sec_t` = how often tree `t` predicts the truth / the
///   ensemble's most-voted wrong class
/// - `sd = (1/T) sum_t sqrt(acc_t + sec_t - acc_t^2 - sec_t^2)`
/// - `s = mean p_i`, `rho = (mean p_i^2 - s^2) / sd^2`
pub fn strength_correlation(
    per_tree: &[Vec<usize>],
    truth: &[usize],
    n_classes: usize,
) -> Result<ScResult> {
    let t = per_tree.len();
    if t < 2 {
        return Err(GrafError::Usage(format!(
            "strength and correlation need at least 2 trees, got {t}"
        )));
    }
    let nt = truth.len();
    if nt == 0 {
        return Err(GrafError::Usage("empty test set".into()));
    }
    if per_tree.iter().any(|p| p.len() != nt) {
        return Err(GrafError::Usage("prediction rows differ from test size".into()));
    }
    if per_tree.iter().flatten().chain(truth).any(|&c| c >= n_classes) {
        return Err(GrafError::Usage(format!("class index outside 0..{n_classes}")));
    }

    let tf = t as f64;
    let mut margins = Vec::with_capacity(nt);
    let mut wrong = Vec::with_capacity(nt);
    let mut votes = vec![0usize; n_classes];
    for i in 0..nt {
        votes.iter_mut().for_each(|v| *v = 0);
        for tree in per_tree {
            votes[tree[i]] += 1;
        }
        let y = truth[i];
        let j = top_wrong_class(&votes, y);
        let other = j.map_or(0.0, |j| votes[j] as f64 / tf);
        margins.push(votes[y] as f64 / tf - other);
        wrong.push(j);
    }

    let ntf = nt as f64;
    let sd = per_tree
        .iter()
        .map(|tree| {
            let mut acc = 0usize;
            let mut sec = 0usize;
            for i in 0..nt {
                if tree[i] == truth[i] {
                    acc += 1;
                }
                if Some(tree[i]) == wrong[i] {
                    sec += 1;
                }
            }
            let acc = acc as f64 / ntf;
            let sec = sec as f64 / ntf;
            (acc + sec - acc * acc - sec * sec).max(0.0).sqrt()
        })
        .sum::<f64>()
        / tf;
    let strength = margins.iter().sum::<f64>() / ntf;
    let second_moment = margins.iter().map(|p| p * p).sum::<f64>() / ntf;
    let correlation = (sd > 0.0).then(|| (second_moment - strength * strength) / (sd * sd));
    let pe_bound = match correlation {
        Some(rho) if strength > 0.0 => Some(rho * (1.0 - strength * strength) / (strength * strength)),
        _ => None,
    };
    Ok(ScResult {
        strength,
        correlation,
        pe_bound,
        sd,
        margins,
    })
}
