//! Acceptance criteria. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line; the process fails if any criterion does.

mod common;

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::index;
use rand::Rng;

use common::*;
use graf::dataset::{Dataset, SubspaceView};
use graf::datagen::{boundary_distances, generate, GenKind, GenSpec};
use graf::engine::{grow_tree_traced, impurity, posterior_from_counts, GrowConfig, SplitRecord};
use graf::eval::{
    bias_variance_experiment, kw_decompose, strength_correlation, strength_correlation_experiment,
    subsample_study, BvConfig, ScConfig, SubsampleStudyConfig,
};
use graf::forest::{train_forest, ForestConfig, SubspaceRule};
use graf::io;
use graf::rng::stream_rng;
use graf::sensitivity::{forest_sensitivity, SampleMode, SensitivityConfig};

const ORACLE_TOL: f64 = 1e-12;
const PATTERNS: [GenKind; 3] = [GenKind::Circles, GenKind::Pie, GenKind::Xor];
const PATTERN_CLASSES: [usize; 2] = [2, 4];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

struct PurityRuns {
    datasets: usize,
    trees: usize,
    impure_leaves: usize,
    imperfect_fits: usize,
    rebuilt_mismatches: usize,
    splits: Vec<SplitRecord>,
    elapsed: Duration,
}

/// Fifty random datasets, each fitted by a five-tree forest using every
/// feature. Each tree is regrown with tracing from the same per-tree stream
/// to collect split diagnostics.
fn purity_runs() -> PurityRuns {
    let start = Instant::now();
    let mut runs = PurityRuns {
        datasets: 50,
        trees: 0,
        impure_leaves: 0,
        imperfect_fits: 0,
        rebuilt_mismatches: 0,
        splits: Vec::new(),
        elapsed: Duration::ZERO,
    };
    let mut meta = rng(1);
    for k in 0..runs.datasets as u64 {
        let n = meta.random_range(20..=500);
        let d = meta.random_range(1..=10);
        let c = meta.random_range(2..=4);
        let ds = random_dataset(&mut rng(1000 + k), n, d, c);
        let config = ForestConfig {
            n_trees: 5,
            subspace: SubspaceRule::All,
            min_samples_split: 2,
            seed: k,
        };
        let forest = train_forest(&ds, &config).unwrap();
        for (t, tree) in forest.trees().iter().enumerate() {
            runs.trees += 1;
            for leaf in tree.leaves() {
                let present = leaf.class_counts.iter().filter(|&&n| n > 0).count();
                if present != 1 || impurity(&leaf.class_counts, ds.class_totals()).unwrap() != 0.0 {
                    runs.impure_leaves += 1;
                }
            }
            let mut r = stream_rng(k, t as u64);
            let feats = index::sample(&mut r, d, d).into_vec();
            let sub = SubspaceView::new(feats, d).unwrap();
            let (again, trace) = grow_tree_traced(&ds, &sub, &GrowConfig::default(), &mut r).unwrap();
            if &again != tree {
                runs.rebuilt_mismatches += 1;
            }
            runs.splits.extend(trace.splits);
        }
        if forest.accuracy(&ds).unwrap() != 1.0 {
            runs.imperfect_fits += 1;
        }
    }
    runs.elapsed = start.elapsed();
    runs
}

fn criterion_1() -> Outcome {
    let r = purity_runs();
    let pass = r.impure_leaves == 0
        && r.imperfect_fits == 0
        && r.rebuilt_mismatches == 0
        && r.elapsed < Duration::from_secs(10);
    outcome(
        pass,
        format!(
            "{} datasets, {} trees: {} impure leaves, {} datasets below train accuracy 1.0, {:.2?}",
            r.datasets, r.trees, r.impure_leaves, r.imperfect_fits, r.elapsed
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let mut failures: Vec<String> = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok && !failures.iter().any(|f| f == name) {
            failures.push(name.to_string());
        }
    };
    let trials = 200;

    for _ in 0..trials {
        let c = r.random_range(2..=5);
        let totals: Vec<usize> = (0..c).map(|_| r.random_range(1..=50)).collect();
        let mut counts: Vec<usize> = totals.iter().map(|&t| r.random_range(0..=t)).collect();
        if counts.iter().all(|&x| x == 0) {
            counts[0] = 1;
        }
        check("impurity", close(impurity(&counts, &totals).unwrap(), bf_impurity(&counts, &totals), ORACLE_TOL));
        let got = posterior_from_counts(&counts, &totals);
        let want = bf_posterior(&counts, &totals);
        check("posterior", got.iter().zip(&want).all(|(a, b)| close(*a, *b, ORACLE_TOL)));
    }

    for k in 0..trials as u64 {
        let n = r.random_range(5..=40);
        let d = r.random_range(1..=4);
        let c = r.random_range(2..=3);
        let ds = random_dataset(&mut rng(20_000 + k), n, d, c);
        let rule = [SubspaceRule::Log2, SubspaceRule::Sqrt, SubspaceRule::Half, SubspaceRule::All]
            [r.random_range(0..4)];
        let forest = train_forest(
            &ds,
            &ForestConfig {
                n_trees: r.random_range(1..=5),
                subspace: rule,
                min_samples_split: r.random_range(2..=4),
                seed: k,
            },
        )
        .unwrap();
        let x: Vec<f64> = (0..d).map(|_| r.random_range(-1.5..1.5)).collect();
        let got = forest.predict_scores(&x);
        let want = bf_scores(&forest, &x);
        check("prediction scores", got.iter().zip(&want).all(|(a, b)| close(*a, *b, ORACLE_TOL)));

        let report = forest_sensitivity(&forest, &ds, &SensitivityConfig::default()).unwrap();
        let (mean, prob) = bf_sensitivity(&forest, &ds);
        check(
            "sensitivity",
            report.mean.iter().zip(&mean).all(|(a, b)| close(*a, *b, ORACLE_TOL))
                && report.probabilities.iter().zip(&prob).all(|(a, b)| close(*a, *b, ORACLE_TOL)),
        );
    }

    for _ in 0..trials {
        let models = r.random_range(2..=4);
        let nt = r.random_range(1..=6);
        let c = r.random_range(2..=3);
        let truth: Vec<usize> = (0..nt).map(|_| r.random_range(0..c)).collect();
        let preds: Vec<Vec<usize>> = (0..models)
            .map(|_| (0..nt).map(|_| r.random_range(0..c)).collect())
            .collect();
        let got = kw_decompose(&preds, &truth, c).unwrap();
        let (b, v, e) = bf_kw(&preds, &truth, c);
        check(
            "bias-variance",
            close(got.bias2, b, ORACLE_TOL) && close(got.variance, v, ORACLE_TOL) && close(got.err, e, ORACLE_TOL),
        );

        let got = strength_correlation(&preds, &truth, c).unwrap();
        let (s, rho, sd) = bf_strength(&preds, &truth, c);
        let rho_ok = match (got.correlation, rho) {
            (Some(a), Some(b)) => close(a, b, ORACLE_TOL),
            (None, None) => true,
            _ => false,
        };
        let bound_ok = match got.pe_bound {
            Some(pe) => s > 0.0 && sd > 0.0 && close(pe, rho.unwrap() * (1.0 - s * s) / (s * s), ORACLE_TOL),
            None => !(s > 0.0 && sd > 0.0),
        };
        check(
            "strength/correlation",
            close(got.strength, s, ORACLE_TOL) && close(got.sd, sd, ORACLE_TOL) && rho_ok && bound_ok,
        );
    }

    if failures.is_empty() {
        outcome(true, format!("6 formulas x {trials} random inputs agree with brute force to {ORACLE_TOL:e}"))
    } else {
        outcome(false, format!("mismatches in: {}", failures.join(", ")))
    }
}

fn criterion_3() -> Outcome {
    let r = purity_runs();
    let mut violations = 0;
    let mut worst = 0.0f64;
    for s in &r.splits {
        let deficit = s.parent_impurity - (s.child_impurity[0] + s.child_impurity[1]);
        if deficit < -1e-9 {
            violations += 1;
            worst = worst.min(deficit);
        }
    }
    outcome(
        violations == 0,
        format!(
            "{} splits, {violations} with Z(parent) < Z(child0) + Z(child1) - 1e-9 (worst deficit {worst:.4})",
            r.splits.len()
        ),
    )
}

fn rbf_data(seed: u64) -> Dataset {
    generate(&GenSpec::rbf(6000, 10, 10, 2, seed)).unwrap()
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let counts = [2, 10, 50, 100, 200];
    let seeds = [1u64, 2, 3];
    let mut err = vec![0.0; counts.len()];
    for &seed in &seeds {
        let rows = bias_variance_experiment(
            &rbf_data(seed),
            &BvConfig {
                train_sizes: vec![2000],
                tree_counts: counts.to_vec(),
                subspaces: vec![SubspaceRule::Half],
                models: 10,
                test_fraction: 1.0 / 3.0,
                min_samples_split: 2,
                seed,
            },
        )
        .unwrap();
        for (slot, row) in err.iter_mut().zip(&rows) {
            assert_eq!(row.test_size, 2000);
            *slot += row.err / seeds.len() as f64;
        }
    }
    let elapsed = start.elapsed();
    let at = |l: usize| err[counts.iter().position(|&c| c == l).unwrap()];
    let pass = at(100) <= at(2) && (at(100) - at(200)).abs() <= 0.01 && elapsed < Duration::from_secs(300);
    let curve: Vec<String> = counts.iter().zip(&err).map(|(l, e)| format!("{l}:{e:.4}")).collect();
    outcome(pass, format!("mean err by trees [{}], {elapsed:.2?}", curve.join(" ")))
}

fn criterion_5() -> Outcome {
    let sizes: Vec<usize> = (3..=10).collect();
    let seeds = [1u64, 2, 3];
    let mut s = vec![0.0; sizes.len()];
    let mut rho = vec![0.0; sizes.len()];
    for &seed in &seeds {
        let rows = strength_correlation_experiment(
            &rbf_data(seed),
            &ScConfig {
                subspace_sizes: sizes.clone(),
                n_trees: 100,
                models: 3,
                train_size: Some(2000),
                test_fraction: 1.0 / 3.0,
                min_samples_split: 2,
                seed,
            },
        )
        .unwrap();
        for (k, row) in rows.iter().enumerate() {
            s[k] += row.strength / seeds.len() as f64;
            rho[k] += row.correlation.unwrap_or(f64::NAN) / seeds.len() as f64;
        }
    }
    let m: Vec<f64> = sizes.iter().map(|&v| v as f64).collect();
    let (rs, rr) = (spearman(&m, &s), spearman(&m, &rho));
    outcome(
        rs > 0.0 && rr > 0.0,
        format!(
            "Spearman(s, M) = {rs:.3}, Spearman(rho, M) = {rr:.3}; s by M {:?}, rho by M {:?}",
            s.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>(),
            rho.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
    )
}

fn pattern_forest(seed: u64) -> ForestConfig {
    ForestConfig {
        n_trees: 200,
        subspace: SubspaceRule::All,
        min_samples_split: 2,
        seed,
    }
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in PATTERNS {
        for c in PATTERN_CLASSES {
            let (mut top, mut uniform) = (0.0, 0.0);
            for seed in 0..10u64 {
                let train = generate(&GenSpec::pattern(kind, 2000, c, seed)).unwrap();
                let test = generate(&GenSpec::pattern(kind, 2000, c, 10_000 + seed)).unwrap();
                let rows = subsample_study(
                    &train,
                    &test,
                    &SubsampleStudyConfig {
                        fractions: vec![0.25],
                        modes: vec![SampleMode::Top, SampleMode::Uniform],
                        sensitivity_forest: pattern_forest(seed),
                        model_forest: pattern_forest(seed + 1),
                        seed,
                    },
                )
                .unwrap();
                top += rows[0].accuracy / 10.0;
                uniform += rows[1].accuracy / 10.0;
            }
            pass &= top >= uniform;
            parts.push(format!("{kind}/{c}: top {top:.4} vs uniform {uniform:.4}"));
        }
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(300);
    outcome(pass, format!("{}; {elapsed:.2?}", parts.join("; ")))
}

fn criterion_7() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in PATTERNS {
        for c in PATTERN_CLASSES {
            let mut wins = 0;
            for seed in 0..10u64 {
                let spec = GenSpec::pattern(kind, 2000, c, seed);
                let ds = generate(&spec).unwrap();
                let forest = train_forest(&ds, &pattern_forest(seed)).unwrap();
                let report = forest_sensitivity(&forest, &ds, &SensitivityConfig::default()).unwrap();
                let dist = boundary_distances(&spec, &ds).unwrap();
                let (mut near, mut n_near, mut far, mut n_far) = (0.0, 0, 0.0, 0);
                for (s, d) in report.mean.iter().zip(&dist) {
                    if *d <= 0.1 {
                        near += s;
                        n_near += 1;
                    } else {
                        far += s;
                        n_far += 1;
                    }
                }
                if n_near > 0 && n_far > 0 && near / n_near as f64 > far / n_far as f64 {
                    wins += 1;
                }
            }
            pass &= wins >= 9;
            parts.push(format!("{kind}/{c}: {wins}/10"));
        }
    }
    outcome(pass, format!("seeds with boundary mean above interior mean: {}", parts.join(", ")))
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut mismatches = 0;
    let mut resave_differs = 0;
    let mut r = rng(8);
    for (k, classes) in [2usize, 3, 5].into_iter().enumerate() {
        let ds = generate(&GenSpec::rbf(400, 6, 12, classes, k as u64)).unwrap();
        let forest = train_forest(
            &ds,
            &ForestConfig {
                n_trees: 25,
                subspace: SubspaceRule::Sqrt,
                min_samples_split: 2,
                seed: k as u64,
            },
        )
        .unwrap();
        let path = dir.path().join(format!("m{k}.graf.json"));
        io::save_model(&forest, &path).unwrap();
        let loaded = io::load_model(&path).unwrap();
        for _ in 0..1000 {
            let x: Vec<f64> = (0..6).map(|_| r.random_range(-3.0..3.0)).collect();
            let (a, b) = (forest.predict_scores(&x), loaded.predict_scores(&x));
            if a.iter().zip(&b).any(|(u, v)| u.to_bits() != v.to_bits()) || forest.predict(&x) != loaded.predict(&x) {
                mismatches += 1;
            }
        }
        let again = dir.path().join(format!("m{k}.again.json"));
        io::save_model(&loaded, &again).unwrap();
        if fs::read(&path).unwrap() != fs::read(&again).unwrap() {
            resave_differs += 1;
        }
    }
    outcome(
        mismatches == 0 && resave_differs == 0,
        format!("3 models x 1000 inputs: {mismatches} prediction mismatches, {resave_differs} re-saves differ"),
    )
}

fn graf(dir: &Path, threads: Option<&str>, env_threads: Option<&str>, args: &[&str]) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_graf"));
    cmd.current_dir(dir).args(args).env_remove("GRAF_THREADS");
    if let Some(t) = threads {
        cmd.args(["--threads", t]);
    }
    if let Some(t) = env_threads {
        cmd.env("GRAF_THREADS", t);
    }
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "graf {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
}

fn pipeline(dir: &Path, threads: Option<&str>, env_threads: Option<&str>) -> Vec<(String, Vec<u8>)> {
    let run = |args: &[&str]| graf(dir, threads, env_threads, args);
    run(&["datagen", "--kind", "rbf", "--n", "600", "--features", "5", "--centroids", "6", "--classes", "3", "--seed", "4", "--out", "d.csv"]);
    run(&["datagen", "--kind", "pie", "--n", "400", "--classes", "4", "--seed", "5", "--out", "p.csv"]);
    run(&["train", "--data", "d.csv", "--trees", "40", "--subspace", "sqrt", "--seed", "7", "--out", "m.graf.json"]);
    run(&["predict", "--model", "m.graf.json", "--data", "d.csv", "--out", "pred.csv"]);
    run(&["train", "--data", "p.csv", "--trees", "50", "--subspace", "all", "--seed", "8", "--out", "pm.graf.json"]);
    run(&["sensitivity", "--model", "pm.graf.json", "--data", "p.csv", "--out", "sens.csv"]);
    run(&["subsample", "--sens", "sens.csv", "--fraction", "0.25", "--mode", "weighted", "--seed", "9", "--out", "idx.csv"]);
    run(&["train", "--data", "p.csv", "--rows", "idx.csv", "--trees", "30", "--subspace", "all", "--seed", "10", "--out", "sub.graf.json"]);
    run(&["predict", "--model", "sub.graf.json", "--data", "p.csv", "--out", "subpred.csv"]);
    run(&["eval-bv", "--data", "d.csv", "--train-sizes", "100..200:100", "--trees", "2,10", "--subspace", "half,all", "--models", "3", "--seed", "11", "--out", "bv.csv"]);
    run(&["eval-sc", "--data", "d.csv", "--subspace-range", "2..4", "--trees", "10", "--models", "2", "--seed", "12", "--out", "sc.csv"]);
    run(&["eval-cv", "--data", "p.csv", "--trees", "5,10", "--subspace", "sqrt,all", "--min-split", "2,3", "--seed", "13", "--out", "cv.json"]);
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn criterion_9() -> Outcome {
    let runs: Vec<(&str, Option<&str>, Option<&str>)> = vec![
        ("--threads 1", Some("1"), None),
        ("--threads 1 again", Some("1"), None),
        ("--threads 4", Some("4"), None),
        ("GRAF_THREADS=3", None, Some("3")),
        ("GRAF_THREADS=2 --threads 1", Some("1"), Some("2")),
    ];
    let mut outputs = Vec::new();
    for (_, flag, env) in &runs {
        let dir = tempfile::tempdir().unwrap();
        outputs.push(pipeline(dir.path(), *flag, *env));
    }
    let differing: Vec<&str> = runs
        .iter()
        .zip(&outputs)
        .skip(1)
        .filter(|(_, o)| **o != outputs[0])
        .map(|((name, _, _), _)| *name)
        .collect();
    outcome(
        differing.is_empty() && outputs[0].len() == 12,
        if differing.is_empty() {
            format!("{} output files identical across {} runs", outputs[0].len(), runs.len())
        } else {
            format!("outputs differ from the first run for: {}", differing.join(", "))
        },
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("purity termination", criterion_1),
        ("formula oracles", criterion_2),
        ("monotone impurity", criterion_3),
        ("bias-variance saturation in tree count", criterion_4),
        ("strength and correlation trends in subspace size", criterion_5),
        ("top-sensitivity subsample vs uniform", criterion_6),
        ("sensitivity concentrates at class boundaries", criterion_7),
        ("model round trip", criterion_8),
        ("CLI determinism across runs and thread counts", criterion_9),
    ];
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let id = format!("criterion {}", k + 1);
        if let Some(f) = &filter {
            if !id.ends_with(&format!(" {f}")) && !name.contains(f.as_str()) {
                continue;
            }
        }
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!(
            "{id} {} {name}: {}",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
