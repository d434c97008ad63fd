//! Model checkpoint file format.
//!
//! Binary layout, all integers and floats little-endian:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "QSEC"
//! 4       4     format version (u32) = 1
//! 8       1     family: 0 = classical, 1 = hybrid
//! 9       1     use_skip (hybrid only, else 0)
//! 10      1     first rotation axis: 0 = Y, 1 = Z (hybrid only, else 0)
//! 11      1     reserved = 0
//! 12      4     feature_dim (u32)
//! 16      4     width (u32): qubit count / hidden width
//! 20      4     depth (u32): variational layers (classical: 0)
//! 24      4     n_classes (u32)
//! 28      8     parameter count (u64)
//! 36      8×N   parameters (f64), flat order documented in [`crate::model`]
//! ```

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use crate::ansatz::{AnsatzParams, AnsatzSpec, RotationAxis};
use crate::error::{CoreError, Result};
use crate::model::{ClassicalBaseline, HybridClassifier, LinearLayer, Model};

const MAGIC: &[u8; 4] = b"QSEC";
const VERSION: u32 = 1;

fn io_err(err: io::Error) -> CoreError {
    CoreError::InvalidArgument(format!("checkpoint io: {err}"))
}

pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    let (family, use_skip, first_rotation, feature_dim, width, depth, n_classes) = match model {
        Model::Classical(m) => (0u8, 0u8, 0u8, m.hidden.in_dim, m.hidden.out_dim, 0, m.readout.out_dim),
        Model::Hybrid(m) => (
            1,
            m.use_skip as u8,
            match m.ansatz_spec.first_rotation {
                RotationAxis::Y => 0,
                RotationAxis::Z => 1,
            },
            m.projection.in_dim,
            m.ansatz_spec.n_qubits,
            m.ansatz_spec.depth,
            m.readout.out_dim,
        ),
    };
    out.push(family);
    out.push(use_skip);
    out.push(first_rotation);
    out.push(0);
    for dim in [feature_dim, width, depth, n_classes] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    let params = model.params_flat();
    out.extend_from_slice(&(params.len() as u64).to_le_bytes());
    for value in &params {
        out.extend_from_slice(&value.to_le_bytes());
    }
    File::create(path).map_err(io_err)?.write_all(&out).map_err(io_err)
}

pub fn load_model(path: &Path) -> Result<Model> {
    let mut bytes = Vec::new();
    File::open(path).map_err(io_err)?.read_to_end(&mut bytes).map_err(io_err)?;
    if bytes.len() < 36 || &bytes[0..4] != MAGIC {
        return Err(CoreError::InvalidArgument("not a checkpoint file".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(CoreError::InvalidArgument(format!(
            "unsupported checkpoint version {version}"
        )));
    }
    let family = bytes[8];
    let use_skip = bytes[9] != 0;
    let first_rotation = if bytes[10] == 0 { RotationAxis::Y } else { RotationAxis::Z };
    let read_u32 = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    let feature_dim = read_u32(12);
    let width = read_u32(16);
    let depth = read_u32(20);
    let n_classes = read_u32(24);
    let param_count = u64::from_le_bytes(bytes[28..36].try_into().unwrap()) as usize;
    if bytes.len() != 36 + 8 * param_count {
        return Err(CoreError::InvalidArgument(format!(
            "checkpoint declares {param_count} parameters but holds {} bytes of data",
            bytes.len() - 36
        )));
    }
    let params: Vec<f64> = bytes[36..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();

    let mut model = match family {
        0 => Model::Classical(ClassicalBaseline {
            hidden: LinearLayer::zeros(feature_dim, width),
            readout: LinearLayer::zeros(width, n_classes),
        }),
        1 => {
            let spec = AnsatzSpec::new(width, depth, first_rotation)?;
            Model::Hybrid(HybridClassifier {
                projection: LinearLayer::zeros(feature_dim, width),
                ansatz_spec: spec,
                ansatz_params: AnsatzParams::zeros(&spec),
                readout: LinearLayer::zeros(width, n_classes),
                use_skip,
            })
        }
        other => {
            return Err(CoreError::InvalidArgument(format!(
                "unknown model family tag {other}"
            )))
        }
    };
    model.set_params_flat(&params)?;
    Ok(model)
}
