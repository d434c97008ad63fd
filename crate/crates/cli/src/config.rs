//! Config schemas for the experiment commands. Every document carries a
//! `version` and a `seed` (the `--seed` flag overrides the latter); unknown
//! fields are rejected with the offending path in the error.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Deserialize;

pub const SCHEMA_VERSION: u32 = 1;

pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

pub fn resolve_seed(config_seed: Option<u64>, override_seed: Option<u64>) -> Result<u64> {
    override_seed
        .or(config_seed)
        .context("a seed is mandatory: set `seed` in the config or pass --seed")
}

pub fn check_version(version: u32) -> Result<()> {
    if version != SCHEMA_VERSION {
        bail!("config version {version} unsupported (expected {SCHEMA_VERSION})");
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenDataConfig {
    pub version: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    pub dataset: DatasetSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub n_classes: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub feature_dim: usize,
    pub separation: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainDoc {
    pub version: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    pub data: DataSection,
    pub model: ModelSection,
    #[serde(default)]
    pub training: TrainingSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub dir: std::path::PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Classical,
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationStart {
    Y,
    Z,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub family: Family,
    /// Qubit count; doubles as the classical baseline's hidden width so the
    /// two families stay width-matched.
    pub n_qubits: usize,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default)]
    pub use_skip: bool,
    #[serde(default = "default_rotation")]
    pub first_rotation: RotationStart,
}

fn default_depth() -> usize {
    8
}
fn default_rotation() -> RotationStart {
    RotationStart::Y
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSection {
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

impl Default for TrainingSection {
    fn default() -> Self {
        Self {
            epochs: default_epochs(),
            batch_size: default_batch(),
            learning_rate: default_lr(),
            beta1: default_beta1(),
            beta2: default_beta2(),
            epsilon: default_epsilon(),
        }
    }
}

fn default_epochs() -> usize {
    100
}
fn default_batch() -> usize {
    32
}
fn default_lr() -> f64 {
    1e-3
}
fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_epsilon() -> f64 {
    1e-8
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradcheckDoc {
    pub version: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub gradcheck: GradcheckSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradcheckSection {
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default = "default_qubit_choices")]
    pub qubit_choices: Vec<usize>,
    #[serde(default = "default_depth_choices")]
    pub depth_choices: Vec<usize>,
    #[serde(default = "default_feature_dim")]
    pub feature_dim: usize,
    #[serde(default = "default_classes")]
    pub n_classes: usize,
    #[serde(default = "default_tol_rel")]
    pub tolerance_rel: f64,
    #[serde(default = "default_tol_abs")]
    pub tolerance_abs: f64,
    /// Verification self-test: flips the sign of the analytic circuit-angle
    /// gradients on the first instance; the command must then exit nonzero.
    #[serde(default)]
    pub negative_control: bool,
}

impl Default for GradcheckSection {
    fn default() -> Self {
        Self {
            instances: default_instances(),
            qubit_choices: default_qubit_choices(),
            depth_choices: default_depth_choices(),
            feature_dim: default_feature_dim(),
            n_classes: default_classes(),
            tolerance_rel: default_tol_rel(),
            tolerance_abs: default_tol_abs(),
            negative_control: false,
        }
    }
}

fn default_instances() -> usize {
    50
}
fn default_qubit_choices() -> Vec<usize> {
    vec![2, 4, 6]
}
fn default_depth_choices() -> Vec<usize> {
    vec![1, 2, 4]
}
fn default_feature_dim() -> usize {
    8
}
fn default_classes() -> usize {
    3
}
fn default_tol_rel() -> f64 {
    1e-5
}
fn default_tol_abs() -> f64 {
    1e-7
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutVerifyDoc {
    pub version: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub cut_verify: CutVerifySection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutVerifySection {
    #[serde(default = "default_single")]
    pub single_cut_circuits: usize,
    #[serde(default = "default_double")]
    pub double_cut_circuits: usize,
    #[serde(default = "default_max_qubits")]
    pub max_qubits: usize,
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
    #[serde(default = "default_cut_tol")]
    pub tolerance: f64,
}

impl Default for CutVerifySection {
    fn default() -> Self {
        Self {
            single_cut_circuits: default_single(),
            double_cut_circuits: default_double(),
            max_qubits: default_max_qubits(),
            max_depth: default_max_depth(),
            tolerance: default_cut_tol(),
        }
    }
}

fn default_single() -> usize {
    100
}
fn default_double() -> usize {
    50
}
fn default_max_qubits() -> usize {
    6
}
fn default_max_depth() -> usize {
    4
}
fn default_cut_tol() -> f64 {
    1e-9
}
