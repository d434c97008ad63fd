use std::path::Path;

use anyhow::Result;

use crate::config::{check_version, load_config, resolve_seed, GenDataConfig};
use crate::datagen::{generate, write_dataset, DatasetSpec};

pub fn run(config_path: &Path, seed_override: Option<u64>, out: &Path) -> Result<()> {
    let doc: GenDataConfig = load_config(config_path)?;
    check_version(doc.version)?;
    let seed = resolve_seed(doc.seed, seed_override)?;
    let spec = DatasetSpec {
        n_classes: doc.dataset.n_classes,
        train_per_class: doc.dataset.train_per_class,
        test_per_class: doc.dataset.test_per_class,
        feature_dim: doc.dataset.feature_dim,
        separation: doc.dataset.separation,
        seed,
    };
    let dataset = generate(&spec)?;
    write_dataset(&dataset, &spec, out)?;
    log::info!(
        "wrote {} train / {} test samples to {}",
        dataset.train.len(),
        dataset.test.len(),
        out.display()
    );
    println!(
        "gen-data: {} classes x ({} train + {} test), dim {} -> {}",
        spec.n_classes,
        spec.train_per_class,
        spec.test_per_class,
        spec.feature_dim,
        out.display()
    );
    Ok(())
}
