//! Synthetic dataset generation: Gaussian class clusters with centers on a
//! sphere, standardized on the train split, written as diff-able CSV files
//! plus a manifest of the generator parameters.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use qse_core::training::{LabeledDataset, Sample};

/// Generator parameters; also the manifest contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub n_classes: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub feature_dim: usize,
    /// Radius of the sphere the class centers are drawn on. Zero makes every
    /// class identically distributed.
    pub separation: f64,
    pub seed: u64,
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_classes < 2 {
            bail!("dataset.n_classes: need at least 2 classes");
        }
        if self.train_per_class == 0 || self.test_per_class == 0 {
            bail!("dataset.train_per_class/test_per_class: must be positive");
        }
        if self.feature_dim == 0 {
            bail!("dataset.feature_dim: must be positive");
        }
        if !(self.separation >= 0.0) {
            bail!("dataset.separation: must be >= 0");
        }
        Ok(())
    }
}

/// Draws the dataset: seeded class centers, unit-variance features, then a
/// z-score transform fitted on the train split and applied to both splits.
pub fn generate(spec: &DatasetSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = StandardNormal;
    let dim = spec.feature_dim;

    let centers: Vec<Vec<f64>> = (0..spec.n_classes)
        .map(|_| {
            let raw: Vec<f64> = (0..dim).map(|_| normal.sample(&mut rng)).collect();
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
            raw.into_iter().map(|v| v / norm * spec.separation).collect()
        })
        .collect();

    let mut draw_split = |per_class: usize| -> Vec<Sample> {
        let mut samples = Vec::with_capacity(per_class * spec.n_classes);
        for (label, center) in centers.iter().enumerate() {
            for _ in 0..per_class {
                let features = center
                    .iter()
                    .map(|c| {
                        let noise: f64 = normal.sample(&mut rng);
                        c + noise
                    })
                    .collect();
                samples.push(Sample { features, label });
            }
        }
        samples
    };
    let mut train = draw_split(spec.train_per_class);
    let mut test = draw_split(spec.test_per_class);

    // Standardize with train statistics.
    let n = train.len() as f64;
    let mut mean = vec![0.0; dim];
    for s in &train {
        for (m, v) in mean.iter_mut().zip(&s.features) {
            *m += v / n;
        }
    }
    let mut var = vec![0.0; dim];
    for s in &train {
        for (vd, (v, m)) in var.iter_mut().zip(s.features.iter().zip(&mean)) {
            *vd += (v - m) * (v - m) / n;
        }
    }
    let std: Vec<f64> = var.into_iter().map(|v| v.sqrt().max(1e-12)).collect();
    for split in [&mut train, &mut test] {
        for s in split.iter_mut() {
            for ((v, m), sd) in s.features.iter_mut().zip(&mean).zip(&std) {
                *v = (*v - m) / sd;
            }
        }
    }

    Ok(LabeledDataset { feature_dim: dim, n_classes: spec.n_classes, train, test })
}

fn split_to_csv(samples: &[Sample], dim: usize) -> String {
    let mut out = String::from("label");
    for d in 0..dim {
        out.push_str(&format!(",f{d}"));
    }
    out.push('\n');
    for s in samples {
        out.push_str(&s.label.to_string());
        for v in &s.features {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

/// Writes `train.csv`, `test.csv` and `manifest.toml` into `dir`.
pub fn write_dataset(dataset: &LabeledDataset, spec: &DatasetSpec, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("train.csv"), split_to_csv(&dataset.train, dataset.feature_dim))?;
    fs::write(dir.join("test.csv"), split_to_csv(&dataset.test, dataset.feature_dim))?;
    let manifest = toml::to_string(spec).context("serializing manifest")?;
    fs::write(dir.join("manifest.toml"), manifest)?;
    Ok(())
}

fn parse_split(text: &str, path: &Path) -> Result<(Vec<Sample>, usize)> {
    let mut lines = text.lines();
    let header = lines.next().with_context(|| format!("{}: empty file", path.display()))?;
    let dim = header.split(',').count() - 1;
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let label: usize = fields
            .next()
            .unwrap_or_default()
            .parse()
            .with_context(|| format!("{}: bad label on row {}", path.display(), i + 2))?;
        let features: Vec<f64> = fields
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("{}: bad feature on row {}", path.display(), i + 2))?;
        if features.len() != dim {
            bail!("{}: row {} has {} features, expected {dim}", path.display(), i + 2, features.len());
        }
        samples.push(Sample { features, label });
    }
    Ok((samples, dim))
}

/// Reads a dataset previously produced by [`write_dataset`].
pub fn read_dataset(dir: &Path) -> Result<LabeledDataset> {
    let train_path = dir.join("train.csv");
    let test_path = dir.join("test.csv");
    let train_text = fs::read_to_string(&train_path)
        .with_context(|| format!("reading {}", train_path.display()))?;
    let test_text = fs::read_to_string(&test_path)
        .with_context(|| format!("reading {}", test_path.display()))?;
    let (train, dim) = parse_split(&train_text, &train_path)?;
    let (test, test_dim) = parse_split(&test_text, &test_path)?;
    if dim != test_dim {
        bail!("train and test splits disagree on feature dimension");
    }
    let n_classes = train
        .iter()
        .chain(&test)
        .map(|s| s.label + 1)
        .max()
        .context("dataset has no samples")?;
    let dataset = LabeledDataset { feature_dim: dim, n_classes, train, test };
    dataset.validate().map_err(|e| anyhow::anyhow!(e.to_string()))?;
    Ok(dataset)
}
