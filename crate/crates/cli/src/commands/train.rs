use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qse_core::ansatz::RotationAxis;
use qse_core::checkpoint::save_model;
use qse_core::model::{init_classical, init_hybrid, Model};
use qse_core::training::{train, AdamHyper, TrainConfig};
use qse_core::ExecPolicy;

use crate::config::{check_version, load_config, resolve_seed, Family, RotationStart, TrainDoc};
use crate::datagen::read_dataset;

pub fn run(config_path: &Path, seed_override: Option<u64>, out: &Path, policy: ExecPolicy) -> Result<()> {
    let doc: TrainDoc = load_config(config_path)?;
    check_version(doc.version)?;
    let seed = resolve_seed(doc.seed, seed_override)?;

    let data_dir = if doc.data.dir.is_relative() {
        config_path.parent().unwrap_or(Path::new(".")).join(&doc.data.dir)
    } else {
        doc.data.dir.clone()
    };
    let dataset = read_dataset(&data_dir)?;
    if dataset.feature_dim < doc.model.n_qubits {
        bail!(
            "model.n_qubits {} exceeds the dataset feature dimension {}",
            doc.model.n_qubits,
            dataset.feature_dim
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = match doc.model.family {
        Family::Classical => {
            init_classical(dataset.feature_dim, doc.model.n_qubits, dataset.n_classes, &mut rng)
        }
        Family::Hybrid => init_hybrid(
            dataset.feature_dim,
            doc.model.n_qubits,
            doc.model.depth,
            dataset.n_classes,
            doc.model.use_skip,
            match doc.model.first_rotation {
                RotationStart::Y => RotationAxis::Y,
                RotationStart::Z => RotationAxis::Z,
            },
            &mut rng,
        )?,
    };

    let config = TrainConfig {
        epochs: doc.training.epochs,
        batch_size: doc.training.batch_size,
        seed,
        adam: AdamHyper {
            learning_rate: doc.training.learning_rate,
            beta1: doc.training.beta1,
            beta2: doc.training.beta2,
            epsilon: doc.training.epsilon,
        },
    };
    let history = train(&mut model, &dataset, &config, policy)?;

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut metrics = String::from("epoch,train_loss,test_top1_error\n");
    for epoch in &history {
        metrics.push_str(&format!("{},{},{}\n", epoch.epoch, epoch.train_loss, epoch.test_error));
    }
    fs::write(out.join("metrics.csv"), metrics)?;

    let final_error = history.last().map(|e| e.test_error).unwrap_or(1.0);
    let family_label = match (&model, doc.model.use_skip) {
        (Model::Classical(_), _) => "classical",
        (Model::Hybrid(_), false) => "hybrid",
        (Model::Hybrid(_), true) => "hybrid_skip",
    };
    let result = format!(
        "family,n_qubits,depth,use_skip,final_test_error\n{},{},{},{},{}\n",
        family_label,
        doc.model.n_qubits,
        if matches!(doc.model.family, Family::Hybrid) { doc.model.depth } else { 0 },
        doc.model.use_skip,
        final_error
    );
    fs::write(out.join("result.csv"), result)?;
    save_model(&model, &out.join("checkpoint.qsec"))?;

    println!(
        "train: {family_label} width {} -> final test top-1 error {final_error:.4} ({} epochs)",
        doc.model.n_qubits, doc.training.epochs
    );
    Ok(())
}
