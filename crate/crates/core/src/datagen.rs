//! Synthetic datasets: a Gaussian centroid mixture and three 2-D patterns
//! (concentric circles, pie sectors, XOR quadrants).

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dataset::Dataset;
use crate::error::{GrafError, Result};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GenKind {
    Rbf,
    Circles,
    Pie,
    Xor,
}

impl GenKind {
    pub fn is_pattern(self) -> bool {
        self != GenKind::Rbf
    }
}

impl fmt::Display for GenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GenKind::Rbf => "rbf",
            GenKind::Circles => "circles",
            GenKind::Pie => "pie",
            GenKind::Xor => "xor",
        })
    }
}

impl FromStr for GenKind {
    type Err = GrafError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rbf" => Ok(GenKind::Rbf),
            "circles" => Ok(GenKind::Circles),
            "pie" => Ok(GenKind::Pie),
            "xor" => Ok(GenKind::Xor),
            _ => Err(GrafError::Usage(format!(
                "unknown dataset kind {s:?} (expected rbf, circles, pie or xor)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n_samples: usize,
    /// Dimension of the mixture; patterns are always 2-D.
    pub n_features: usize,
    pub n_centroids: usize,
    pub n_classes: usize,
    /// Angular sectors of the pie; `None` means 4 for two classes and one
    /// per class otherwise.
    pub sectors: Option<usize>,
    pub seed: u64,
}

impl GenSpec {
    pub fn rbf(n_samples: usize, n_features: usize, n_centroids: usize, n_classes: usize, seed: u64) -> Self {
        GenSpec {
            kind: GenKind::Rbf,
            n_samples,
            n_features,
            n_centroids,
            n_classes,
            sectors: None,
            seed,
        }
    }

    pub fn pattern(kind: GenKind, n_samples: usize, n_classes: usize, seed: u64) -> Self {
        GenSpec {
            kind,
            n_samples,
            n_features: 2,
            n_centroids: 0,
            n_classes,
            sectors: None,
            seed,
        }
    }

    pub fn pie_sectors(&self) -> usize {
        self.sectors
            .unwrap_or(if self.n_classes == 2 { 4 } else { self.n_classes })
    }
}

/// Generates the dataset described by `spec`.
pub fn generate(spec: &GenSpec) -> Result<Dataset> {
    match spec.kind {
        GenKind::Rbf => gen_rbf(spec),
        _ => gen_pattern(spec),
    }
}

/// Centroid mixture: centroids uniform in `[-1, 1]^d` with classes assigned
/// round-robin, radii uniform in `[0.05, 0.4)`, and mixture weights uniform
/// then normalized. Each sample is its centroid plus isotropic Gaussian
/// noise with standard deviation equal to the radius.
pub fn gen_rbf(spec: &GenSpec) -> Result<Dataset> {
    if spec.kind != GenKind::Rbf {
        return Err(GrafError::Usage(format!("{} is not a mixture kind", spec.kind)));
    }
    if spec.n_classes < 2 {
        return Err(GrafError::Usage("need at least 2 classes".into()));
    }
    if spec.n_centroids < spec.n_classes {
        return Err(GrafError::Usage(format!(
            "{} centroids cannot cover {} classes",
            spec.n_centroids, spec.n_classes
        )));
    }
    if spec.n_samples == 0 || spec.n_features == 0 {
        return Err(GrafError::Usage("need at least one sample and one feature".into()));
    }
    let d = spec.n_features;
    let mut rng = stream_rng(spec.seed, 0);
    let centroids: Vec<Vec<f64>> = (0..spec.n_centroids)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let radii: Vec<f64> = (0..spec.n_centroids)
        .map(|_| rng.random_range(0.05..0.4))
        .collect();
    let weights: Vec<f64> = (0..spec.n_centroids).map(|_| rng.random::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    let chooser = if total > 0.0 {
        WeightedIndex::new(weights.iter().map(|w| w / total))
    } else {
        WeightedIndex::new(vec![1.0; spec.n_centroids])
    }
    .map_err(|e| GrafError::Invariant(format!("mixture weights: {e}")))?;

    let mut features = Vec::with_capacity(spec.n_samples * d);
    let mut labels = Vec::with_capacity(spec.n_samples);
    for _ in 0..spec.n_samples {
        let k = chooser.sample(&mut rng);
        for &c in &centroids[k] {
            let z: f64 = rng.sample(StandardNormal);
            features.push(c + radii[k] * z);
        }
        labels.push(k % spec.n_classes);
    }
    Dataset::new(features, d, labels, spec.n_classes)
}

/// 2-D patterns. Circles: angle uniform, radius uniform in `[0, 1)`, class by
/// equal-width annulus. Pie: uniform in the unit disc, class = sector index
/// mod the class count. XOR: uniform in `[-1, 1]^2`; with two classes the
/// class is the quadrant parity, with four it is the quadrant.
pub fn gen_pattern(spec: &GenSpec) -> Result<Dataset> {
    if !spec.kind.is_pattern() {
        return Err(GrafError::Usage(format!("{} is not a pattern kind", spec.kind)));
    }
    if spec.n_samples == 0 {
        return Err(GrafError::Usage("need at least one sample".into()));
    }
    let sectors = spec.pie_sectors();
    let n_classes = spec.n_classes;
    check_pattern(spec.kind, n_classes, sectors)?;
    let mut rng = stream_rng(spec.seed, 1);
    let mut features = Vec::with_capacity(spec.n_samples * 2);
    let mut labels = Vec::with_capacity(spec.n_samples);
    for _ in 0..spec.n_samples {
        let (x, y) = match spec.kind {
            GenKind::Circles => {
                let r: f64 = rng.random();
                let t = rng.random_range(0.0..TAU);
                (r * t.cos(), r * t.sin())
            }
            GenKind::Pie => {
                let r = rng.random::<f64>().sqrt();
                let t = rng.random_range(0.0..TAU);
                (r * t.cos(), r * t.sin())
            }
            _ => (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        };
        features.extend([x, y]);
        labels.push(pattern_label(spec.kind, x, y, n_classes, sectors)?);
    }
    Dataset::new(features, 2, labels, n_classes)
}

fn check_pattern(kind: GenKind, n_classes: usize, sectors: usize) -> Result<()> {
    if n_classes < 2 {
        return Err(GrafError::Usage("patterns need at least 2 classes".into()));
    }
    match kind {
        GenKind::Xor if n_classes != 2 && n_classes != 4 => Err(GrafError::Usage(format!(
            "xor supports 2 or 4 classes, got {n_classes}"
        ))),
        GenKind::Pie if sectors < n_classes => Err(GrafError::Usage(format!(
            "{sectors} pie sectors cannot hold {n_classes} classes"
        ))),
        GenKind::Rbf => Err(GrafError::Usage("rbf is not a pattern kind".into())),
        _ => Ok(()),
    }
}

/// Angle of `(x, y)` in `[0, 2pi)`.
fn angle(x: f64, y: f64) -> f64 {
    let t = y.atan2(x);
    if t < 0.0 {
        t + TAU
    } else {
        t
    }
}

/// Zero-based class of the point `(x, y)` under a pattern's geometry.
/// `sectors` is only read for the pie.
pub fn pattern_label(kind: GenKind, x: f64, y: f64, n_classes: usize, sectors: usize) -> Result<usize> {
    check_pattern(kind, n_classes, sectors)?;
    Ok(match kind {
        GenKind::Circles => {
            let r = x.hypot(y);
            ((r * n_classes as f64) as usize).min(n_classes - 1)
        }
        GenKind::Pie => {
            let width = TAU / sectors as f64;
            let s = ((angle(x, y) / width) as usize).min(sectors - 1);
            s % n_classes
        }
        GenKind::Xor => {
            let (east, north) = (x >= 0.0, y >= 0.0);
            if n_classes == 2 {
                usize::from(east != north)
            } else {
                match (east, north) {
                    (true, true) => 0,
                    (false, true) => 1,
                    (false, false) => 2,
                    (true, false) => 3,
                }
            }
        }
        GenKind::Rbf => unreachable!("rejected by check_pattern"),
    })
}

/// Euclidean distance from `(x, y)` to the nearest boundary separating two
/// different classes of the pattern.
pub fn boundary_distance(kind: GenKind, x: f64, y: f64, n_classes: usize, sectors: usize) -> Result<f64> {
    check_pattern(kind, n_classes, sectors)?;
    Ok(match kind {
        GenKind::Circles => {
            let r = x.hypot(y);
            (1..n_classes)
                .map(|k| (r - k as f64 / n_classes as f64).abs())
                .fold(f64::INFINITY, f64::min)
        }
        GenKind::Pie => {
            let r = x.hypot(y);
            let t = angle(x, y);
            let width = TAU / sectors as f64;
            (0..sectors)
                .filter(|&j| j % n_classes != (j + sectors - 1) % sectors % n_classes)
                .map(|j| {
                    let mut delta = (t - j as f64 * width).abs() % TAU;
                    if delta > PI {
                        delta = TAU - delta;
                    }
                    if delta >= FRAC_PI_2 {
                        r
                    } else {
                        r * delta.sin()
                    }
                })
                .fold(f64::INFINITY, f64::min)
        }
        GenKind::Xor => x.abs().min(y.abs()),
        GenKind::Rbf => unreachable!("rejected by check_pattern"),
    })
}

/// [`boundary_distance`] for every row of a pattern dataset built from `spec`.
pub fn boundary_distances(spec: &GenSpec, dataset: &Dataset) -> Result<Vec<f64>> {
    if dataset.n_features() != 2 {
        return Err(GrafError::Usage("boundary distances need 2-D data".into()));
    }
    let sectors = spec.pie_sectors();
    (0..dataset.n_samples())
        .map(|i| {
            let r = dataset.row(i);
            boundary_distance(spec.kind, r[0], r[1], spec.n_classes, sectors)
        })
        .collect()
}
