//! Trainable classifiers: a hybrid model (linear projection → variational
//! circuit → optional additive skip → linear readout) and a width-matched
//! two-layer MLP baseline with tanh, plus the cross-entropy loss and exact
//! gradients for both.
//!
//! Flat parameter order (used by the optimizer, the gradient vector, the
//! finite-difference oracles and the checkpoint format):
//! - hybrid: projection weights (row-major), projection bias, circuit angles
//!   (layer-major), readout weights, readout bias;
//! - classical: hidden weights, hidden bias, readout weights, readout bias.

use rand::Rng;

use crate::ansatz::{self, AnsatzParams, AnsatzSpec, RotationAxis};
use crate::error::{CoreError, Result};
use crate::exec::ExecPolicy;

/// Dense affine map `y = W x + b` with row-major weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LinearLayer {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self { in_dim, out_dim, weights: vec![0.0; in_dim * out_dim], bias: vec![0.0; out_dim] }
    }

    /// Uniform init scaled by 1/√in_dim, drawn in flat parameter order.
    pub fn init<R: Rng>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (in_dim as f64).sqrt();
        let weights = (0..in_dim * out_dim).map(|_| rng.gen_range(-bound..bound)).collect();
        let bias = (0..out_dim).map(|_| rng.gen_range(-bound..bound)).collect();
        Self { in_dim, out_dim, weights, bias }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.bias.clone();
        for (row, out_v) in out.iter_mut().enumerate() {
            let w = &self.weights[row * self.in_dim..(row + 1) * self.in_dim];
            *out_v += w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>();
        }
        out
    }

    /// `W^T d` for a cotangent over the outputs.
    fn backward_input(&self, d_out: &[f64]) -> Vec<f64> {
        let mut d_in = vec![0.0; self.in_dim];
        for (row, d) in d_out.iter().enumerate() {
            let w = &self.weights[row * self.in_dim..(row + 1) * self.in_dim];
            for (d_x, w) in d_in.iter_mut().zip(w) {
                *d_x += w * d;
            }
        }
        d_in
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

/// Projection → ansatz → optional skip → readout.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridClassifier {
    pub projection: LinearLayer,
    pub ansatz_spec: AnsatzSpec,
    pub ansatz_params: AnsatzParams,
    pub readout: LinearLayer,
    pub use_skip: bool,
}

impl HybridClassifier {
    pub fn init<R: Rng>(
        feature_dim: usize,
        spec: AnsatzSpec,
        n_classes: usize,
        use_skip: bool,
        rng: &mut R,
    ) -> Self {
        let projection = LinearLayer::init(feature_dim, spec.n_qubits, rng);
        let mut ansatz_params = AnsatzParams::zeros(&spec);
        for angle in ansatz_params.angles_mut() {
            *angle = rng.gen_range(-0.1..0.1);
        }
        let readout = LinearLayer::init(spec.n_qubits, n_classes, rng);
        Self { projection, ansatz_spec: spec, ansatz_params, readout, use_skip }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.projection.in_dim {
            return Err(CoreError::InvalidArgument(format!(
                "expected {} features, got {}",
                self.projection.in_dim,
                x.len()
            )));
        }
        Ok(())
    }
}

/// Two-layer MLP with tanh; the hidden width matches the hybrid model's
/// qubit count for fair comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalBaseline {
    pub hidden: LinearLayer,
    pub readout: LinearLayer,
}

impl ClassicalBaseline {
    pub fn init<R: Rng>(feature_dim: usize, width: usize, n_classes: usize, rng: &mut R) -> Self {
        Self {
            hidden: LinearLayer::init(feature_dim, width, rng),
            readout: LinearLayer::init(width, n_classes, rng),
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.hidden.in_dim {
            return Err(CoreError::InvalidArgument(format!(
                "expected {} features, got {}",
                self.hidden.in_dim,
                x.len()
            )));
        }
        Ok(())
    }
}

/// Class scores of the hybrid model.
pub fn forward_hybrid(model: &HybridClassifier, x: &[f64]) -> Result<Vec<f64>> {
    model.check_input(x)?;
    let projected = model.projection.forward(x);
    let measured = ansatz::forward(&model.ansatz_spec, &model.ansatz_params, &projected)?;
    let readout_in: Vec<f64> = if model.use_skip {
        measured.iter().zip(&projected).map(|(m, p)| m + p).collect()
    } else {
        measured
    };
    Ok(model.readout.forward(&readout_in))
}

/// Class scores of the classical baseline.
pub fn forward_classical(model: &ClassicalBaseline, x: &[f64]) -> Result<Vec<f64>> {
    model.check_input(x)?;
    let hidden: Vec<f64> = model.hidden.forward(x).into_iter().map(f64::tanh).collect();
    Ok(model.readout.forward(&hidden))
}

/// Softmax probabilities, computed with max-subtraction.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// `−log softmax(logits)[label]`.
pub fn cross_entropy(logits: &[f64], label: usize) -> Result<f64> {
    if label >= logits.len() {
        return Err(CoreError::InvalidArgument(format!(
            "label {label} out of range for {} classes",
            logits.len()
        )));
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_sum: f64 = logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    Ok(log_sum + max - logits[label])
}

/// Either trainable model family behind one parameter-vector interface.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Classical(ClassicalBaseline),
    Hybrid(HybridClassifier),
}

impl Model {
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Model::Classical(m) => forward_classical(m, x),
            Model::Hybrid(m) => forward_hybrid(m, x),
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            Model::Classical(m) => m.readout.out_dim,
            Model::Hybrid(m) => m.readout.out_dim,
        }
    }

    pub fn feature_dim(&self) -> usize {
        match self {
            Model::Classical(m) => m.hidden.in_dim,
            Model::Hybrid(m) => m.projection.in_dim,
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            Model::Classical(m) => m.hidden.param_count() + m.readout.param_count(),
            Model::Hybrid(m) => {
                m.projection.param_count()
                    + m.ansatz_spec.n_angles()
                    + m.readout.param_count()
            }
        }
    }

    /// Copies all parameters into one vector in the documented flat order.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        match self {
            Model::Classical(m) => {
                out.extend_from_slice(&m.hidden.weights);
                out.extend_from_slice(&m.hidden.bias);
                out.extend_from_slice(&m.readout.weights);
                out.extend_from_slice(&m.readout.bias);
            }
            Model::Hybrid(m) => {
                out.extend_from_slice(&m.projection.weights);
                out.extend_from_slice(&m.projection.bias);
                out.extend_from_slice(m.ansatz_params.angles());
                out.extend_from_slice(&m.readout.weights);
                out.extend_from_slice(&m.readout.bias);
            }
        }
        out
    }

    /// Writes a flat parameter vector back into the model.
    pub fn set_params_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(CoreError::InvalidArgument(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                flat.len()
            )));
        }
        let mut cursor = 0;
        let mut fill = |dst: &mut [f64]| {
            dst.copy_from_slice(&flat[cursor..cursor + dst.len()]);
            cursor += dst.len();
        };
        match self {
            Model::Classical(m) => {
                fill(&mut m.hidden.weights);
                fill(&mut m.hidden.bias);
                fill(&mut m.readout.weights);
                fill(&mut m.readout.bias);
            }
            Model::Hybrid(m) => {
                fill(&mut m.projection.weights);
                fill(&mut m.projection.bias);
                fill(m.ansatz_params.angles_mut());
                fill(&mut m.readout.weights);
                fill(&mut m.readout.bias);
            }
        }
        Ok(())
    }

    /// Cross-entropy loss of one sample and its gradient over the flat
    /// parameter vector.
    ///
    /// The hybrid projection gradient flows both through the embedding angles
    /// (shift rule) and, with the skip connection, through the additive skip
    /// path; linear-layer derivatives are analytic.
    pub fn loss_and_grad(
        &self,
        x: &[f64],
        label: usize,
        policy: ExecPolicy,
    ) -> Result<(f64, Vec<f64>)> {
        match self {
            Model::Classical(m) => {
                m.check_input(x)?;
                let hidden: Vec<f64> = m.hidden.forward(x).into_iter().map(f64::tanh).collect();
                let logits = m.readout.forward(&hidden);
                let loss = cross_entropy(&logits, label)?;
                let mut d_logits = softmax(&logits);
                d_logits[label] -= 1.0;
                let d_hidden = m.readout.backward_input(&d_logits);
                let d_pre: Vec<f64> =
                    d_hidden.iter().zip(&hidden).map(|(d, h)| d * (1.0 - h * h)).collect();

                let mut grad = Vec::with_capacity(self.param_count());
                push_outer(&mut grad, &d_pre, x);
                grad.extend_from_slice(&d_pre);
                push_outer(&mut grad, &d_logits, &hidden);
                grad.extend_from_slice(&d_logits);
                Ok((loss, grad))
            }
            Model::Hybrid(m) => {
                m.check_input(x)?;
                let projected = m.projection.forward(x);
                let measured = ansatz::forward(&m.ansatz_spec, &m.ansatz_params, &projected)?;
                let readout_in: Vec<f64> = if m.use_skip {
                    measured.iter().zip(&projected).map(|(v, p)| v + p).collect()
                } else {
                    measured
                };
                let logits = m.readout.forward(&readout_in);
                let loss = cross_entropy(&logits, label)?;
                let mut d_logits = softmax(&logits);
                d_logits[label] -= 1.0;
                let d_readout_in = m.readout.backward_input(&d_logits);

                let jacobian =
                    ansatz::parameter_shift_grad(&m.ansatz_spec, &m.ansatz_params, &projected, policy)?;
                let (d_angles, d_embed) = jacobian.backprop(&d_readout_in);
                let d_projected: Vec<f64> = if m.use_skip {
                    d_embed.iter().zip(&d_readout_in).map(|(e, s)| e + s).collect()
                } else {
                    d_embed
                };

                let mut grad = Vec::with_capacity(self.param_count());
                push_outer(&mut grad, &d_projected, x);
                grad.extend_from_slice(&d_projected);
                grad.extend_from_slice(&d_angles);
                push_outer(&mut grad, &d_logits, &readout_in);
                grad.extend_from_slice(&d_logits);
                Ok((loss, grad))
            }
        }
    }
}

fn push_outer(grad: &mut Vec<f64>, rows: &[f64], cols: &[f64]) {
    for r in rows {
        for c in cols {
            grad.push(r * c);
        }
    }
}

/// Convenience constructors with the documented initialization scheme.
pub fn init_hybrid<R: Rng>(
    feature_dim: usize,
    n_qubits: usize,
    depth: usize,
    n_classes: usize,
    use_skip: bool,
    first_rotation: RotationAxis,
    rng: &mut R,
) -> Result<Model> {
    let spec = AnsatzSpec::new(n_qubits, depth, first_rotation)?;
    Ok(Model::Hybrid(HybridClassifier::init(feature_dim, spec, n_classes, use_skip, rng)))
}

pub fn init_classical<R: Rng>(
    feature_dim: usize,
    width: usize,
    n_classes: usize,
    rng: &mut R,
) -> Model {
    Model::Classical(ClassicalBaseline::init(feature_dim, width, n_classes, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b}");
    }

    #[test]
    fn skip_with_zero_angles_is_affine_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spec = AnsatzSpec::new(4, 3, RotationAxis::Y).unwrap();
        let mut model = HybridClassifier::init(6, spec, 3, true, &mut rng);
        model.ansatz_params = AnsatzParams::zeros(&spec);
        let x: Vec<f64> = (0..6).map(|i| 0.3 * i as f64 - 0.7).collect();
        let logits = forward_hybrid(&model, &x).unwrap();
        let expected = model.readout.forward(&model.projection.forward(&x));
        for (a, b) in logits.iter().zip(&expected) {
            assert_close(*a, *b, 1e-12);
        }
    }

    #[test]
    fn zero_readout_weights_give_bias_logits() {
        let spec = AnsatzSpec::new(2, 1, RotationAxis::Y).unwrap();
        let mut model = HybridClassifier {
            projection: LinearLayer::zeros(3, 2),
            ansatz_spec: spec,
            ansatz_params: AnsatzParams::zeros(&spec),
            readout: LinearLayer::zeros(2, 4),
            use_skip: false,
        };
        model.readout.bias = vec![1.0, -2.0, 0.5, 3.0];
        let logits = forward_hybrid(&model, &[0.4, 0.5, 0.6]).unwrap();
        assert_eq!(logits, vec![1.0, -2.0, 0.5, 3.0]);
    }

    #[test]
    fn classical_zero_hidden_gives_readout_bias() {
        let mut model = ClassicalBaseline {
            hidden: LinearLayer::zeros(3, 2),
            readout: LinearLayer::zeros(2, 2),
        };
        model.readout.bias = vec![0.25, -0.75];
        let logits = forward_classical(&model, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(logits, vec![0.25, -0.75]);
    }

    #[test]
    fn classical_identity_layers_compute_tanh() {
        let mut model = ClassicalBaseline {
            hidden: LinearLayer::zeros(2, 2),
            readout: LinearLayer::zeros(2, 2),
        };
        model.hidden.weights = vec![1.0, 0.0, 0.0, 1.0];
        model.readout.weights = vec![1.0, 0.0, 0.0, 1.0];
        let logits = forward_classical(&model, &[0.3, -1.2]).unwrap();
        assert_close(logits[0], 0.3f64.tanh(), 1e-15);
        assert_close(logits[1], (-1.2f64).tanh(), 1e-15);
    }

    #[test]
    fn cross_entropy_uniform_and_saturated() {
        let uniform = vec![0.5; 10];
        assert_close(cross_entropy(&uniform, 3).unwrap(), 10f64.ln(), 1e-12);
        let mut saturated = vec![0.0; 5];
        saturated[2] = 30.0;
        assert!(cross_entropy(&saturated, 2).unwrap() < 1e-9);
        assert_close(cross_entropy(&[1.0, 2.0], 0).unwrap(), (1.0 + std::f64::consts::E).ln(), 1e-10);
        assert!(cross_entropy(&[0.0, 0.0], 2).is_err());
    }

    #[test]
    fn params_flat_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let model = init_hybrid(5, 3, 2, 4, true, RotationAxis::Y, &mut rng).unwrap();
        let flat = model.params_flat();
        let mut copy = model.clone();
        copy.set_params_flat(&vec![0.0; flat.len()]).unwrap();
        assert_ne!(copy.params_flat(), flat);
        copy.set_params_flat(&flat).unwrap();
        assert_eq!(copy, model);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let label = 1;
        for model in [
            init_classical(5, 4, 3, &mut rng),
            init_hybrid(5, 4, 2, 3, false, RotationAxis::Y, &mut rng).unwrap(),
            init_hybrid(5, 4, 2, 3, true, RotationAxis::Y, &mut rng).unwrap(),
        ] {
            let (_, grad) = model.loss_and_grad(&x, label, ExecPolicy::default()).unwrap();
            let flat = model.params_flat();
            let h = 1e-5;
            for k in 0..flat.len() {
                let mut probe = model.clone();
                let mut plus = flat.clone();
                plus[k] += h;
                probe.set_params_flat(&plus).unwrap();
                let loss_plus = cross_entropy(&probe.forward(&x).unwrap(), label).unwrap();
                let mut minus = flat.clone();
                minus[k] -= h;
                probe.set_params_flat(&minus).unwrap();
                let loss_minus = cross_entropy(&probe.forward(&x).unwrap(), label).unwrap();
                let fd = (loss_plus - loss_minus) / (2.0 * h);
                let diff = (grad[k] - fd).abs();
                let tol = 1e-7 + 1e-5 * fd.abs();
                assert!(diff < tol, "param {k}: analytic {} vs fd {fd}", grad[k]);
            }
        }
    }

    #[test]
    fn zero_readout_weights_zero_ansatz_gradients_without_skip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut model = init_hybrid(4, 3, 2, 2, false, RotationAxis::Y, &mut rng).unwrap();
        if let Model::Hybrid(m) = &mut model {
            m.readout.weights.iter_mut().for_each(|w| *w = 0.0);
        }
        let (_, grad) = model
            .loss_and_grad(&[0.2, -0.4, 0.6, 0.1], 0, ExecPolicy::default())
            .unwrap();
        // Angle block sits between the projection and readout parameters.
        let proj_params = 4 * 3 + 3;
        let n_angles = 3 * 2;
        for k in proj_params..proj_params + n_angles {
            assert_eq!(grad[k], 0.0);
        }
    }
}
