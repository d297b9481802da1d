//! Shared fixtures and brute-force reference implementations.
//!
//! The reference functions are written from the formulas directly, without
//! reusing any library arithmetic, and serve as oracles for the library.

#![allow(dead_code)]

use graf::dataset::Dataset;
use graf::engine::{NodeKind, TreeInstance};
use graf::forest::Forest;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

/// Random dataset: `n` rows of `d` features uniform in `[-1, 1]`, labels
/// i.i.d. uniform over `c` classes. Continuous features make duplicate rows
/// (and so label conflicts) impossible in practice.
pub fn random_dataset<R: Rng>(rng: &mut R, n: usize, d: usize, c: usize) -> Dataset {
    let features: Vec<f64> = (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
    Dataset::new(features, d, labels, c).unwrap()
}

pub fn bf_impurity(counts: &[usize], totals: &[usize]) -> f64 {
    let mut sum_r = 0.0;
    let mut sum_r2 = 0.0;
    let mut size = 0usize;
    for c in 0..counts.len() {
        if counts[c] == 0 {
            continue;
        }
        let r = counts[c] as f64 / totals[c] as f64;
        sum_r += r;
        sum_r2 += r.powi(2);
        size += counts[c];
    }
    (1.0 - sum_r2 * sum_r.powi(-2)) * size as f64
}

pub fn bf_posterior(counts: &[usize], totals: &[usize]) -> Vec<f64> {
    let n_leaf: usize = counts.iter().sum();
    let n_all: usize = totals.iter().sum();
    let weighted: Vec<f64> = (0..counts.len())
        .map(|c| {
            if counts[c] == 0 {
                0.0
            } else {
                let f_hat = counts[c] as f64 / n_leaf as f64;
                let imbalance = n_all as f64 / totals[c] as f64;
                f_hat * imbalance
            }
        })
        .collect();
    let z: f64 = weighted.iter().sum();
    weighted.iter().map(|w| w / z).collect()
}

/// Leaf reached by `x`, found by walking the node table by hand.
pub fn bf_leaf(tree: &TreeInstance, x: &[f64]) -> usize {
    let sub = tree.subspace().indices();
    let mut node = 0;
    loop {
        match tree.nodes()[node].kind {
            NodeKind::Leaf { leaf } => return leaf,
            NodeKind::Split { step, children } => {
                let h = &tree.hyperplanes()[step - 1];
                let mut z = 0.0;
                for (k, &j) in sub.iter().enumerate() {
                    z += h.weights()[k] * x[j];
                }
                z += h.bias();
                node = if z > 0.0 { children[1] } else { children[0] };
            }
        }
    }
}

pub fn bf_scores(forest: &Forest, x: &[f64]) -> Vec<f64> {
    let mut scores = vec![0.0; forest.n_classes()];
    for tree in forest.trees() {
        let leaf = &tree.leaves()[bf_leaf(tree, x)];
        for (c, s) in scores.iter_mut().enumerate() {
            *s += (1.0 + leaf.posterior[c]).log2();
        }
    }
    scores
}

/// Mean sensitivity per training row, from each tree's stored leaf
/// membership, ranking members by ascending row index.
pub fn bf_sensitivity(forest: &Forest, dataset: &Dataset) -> (Vec<f64>, Vec<f64>) {
    let n = dataset.n_samples();
    let c = dataset.n_classes();
    let mut mean = vec![0.0; n];
    for tree in forest.trees() {
        let mut theta = vec![0.0; n];
        for leaf in tree.leaves() {
            let mut members = leaf.sample_indices.clone();
            members.sort();
            for (r, &i) in members.iter().enumerate() {
                theta[i] = leaf.weight_count as f64 / (r + 1) as f64;
            }
        }
        let mut class_mass = vec![0.0; c];
        let mut class_size = vec![0usize; c];
        for i in 0..n {
            class_mass[dataset.label(i)] += theta[i];
            class_size[dataset.label(i)] += 1;
        }
        for i in 0..n {
            let y = dataset.label(i);
            let ratio = if class_mass[y] > 0.0 {
                theta[i] / class_mass[y]
            } else {
                1.0 / class_size[y] as f64
            };
            mean[i] += (1.0 + ratio).ln();
        }
    }
    for m in mean.iter_mut() {
        *m /= forest.trees().len() as f64;
    }
    let total: f64 = mean.iter().sum();
    let prob = mean.iter().map(|m| m / total).collect();
    (mean, prob)
}

/// `(bias2, variance, err)` for `preds[model][sample]`.
pub fn bf_kw(preds: &[Vec<usize>], truth: &[usize], c: usize) -> (f64, f64, f64) {
    let r = preds.len();
    let nt = truth.len();
    let mut bias2 = 0.0;
    let mut sum_p2 = 0.0;
    for i in 0..nt {
        for j in 0..c {
            let mut hits = 0;
            for model in preds {
                if model[i] == j {
                    hits += 1;
                }
            }
            let p = hits as f64 / r as f64;
            let indicator = if truth[i] == j { 1.0 } else { 0.0 };
            bias2 += (indicator - p).powi(2) - p * (1.0 - p) / (r as f64 - 1.0);
            sum_p2 += p * p;
        }
    }
    let mut err = 0.0;
    for model in preds {
        let correct = (0..nt).filter(|&i| model[i] == truth[i]).count();
        err += 1.0 - correct as f64 / nt as f64;
    }
    (bias2 / nt as f64, 1.0 - sum_p2 / nt as f64, err / r as f64)
}

/// `(s, rho, sd)` for `per_tree[tree][sample]`; `rho` is `None` when `sd = 0`.
pub fn bf_strength(per_tree: &[Vec<usize>], truth: &[usize], c: usize) -> (f64, Option<f64>, f64) {
    let t = per_tree.len();
    let nt = truth.len();
    let share = |i: usize, j: usize| {
        per_tree.iter().filter(|pred| pred[i] == j).count() as f64 / t as f64
    };
    let mut p = vec![0.0; nt];
    let mut second = vec![0usize; nt];
    for i in 0..nt {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..c {
            if j == truth[i] {
                continue;
            }
            let v = share(i, j);
            if best.map_or(true, |(_, b)| v > b) {
                best = Some((j, v));
            }
        }
        let (j, v) = best.unwrap();
        second[i] = j;
        p[i] = share(i, truth[i]) - v;
    }
    let mut sd = 0.0;
    for pred in per_tree {
        let acc = (0..nt).filter(|&i| pred[i] == truth[i]).count() as f64 / nt as f64;
        let sec = (0..nt).filter(|&i| pred[i] == second[i]).count() as f64 / nt as f64;
        sd += (acc + sec - acc * acc - sec * sec).sqrt();
    }
    sd /= t as f64;
    let s = p.iter().sum::<f64>() / nt as f64;
    let mean_p2 = p.iter().map(|v| v * v).sum::<f64>() / nt as f64;
    let rho = if sd > 0.0 { Some((mean_p2 - s * s) / (sd * sd)) } else { None };
    (s, rho, sd)
}

/// Spearman rank correlation; tied values share their mean rank.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut order: Vec<usize> = (0..v.len()).collect();
        order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < order.len() {
            let mut j = i;
            while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[order[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
