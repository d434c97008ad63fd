//! The variational circuit template: per-qubit angle embedding (H then RZ)
//! followed by brick-wall entangling layers with alternating RY/RZ rotations.
//!
//! Layer structure, for layer index `l`:
//! - even `l`: CNOT(0,1), CNOT(2,3), … (full pairs only, no wrap-around),
//! - odd `l`: CNOT(1,2), CNOT(3,4), … (shifted pairs),
//! - then one rotation per qubit; the axis alternates per layer starting from
//!   `first_rotation`.

use crate::error::{CoreError, Result};
use crate::exec::ExecPolicy;
use crate::statevector::{expectation_z, run_circuit, Circuit, Gate, Statevector};

use std::f64::consts::FRAC_PI_2;

/// Rotation axis of a variational layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationAxis {
    Y,
    Z,
}

/// Shape of the ansatz: width, number of variational layers, and which
/// rotation axis the first layer uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    pub depth: usize,
    pub first_rotation: RotationAxis,
}

impl AnsatzSpec {
    pub fn new(n_qubits: usize, depth: usize, first_rotation: RotationAxis) -> Result<Self> {
        if n_qubits == 0 {
            return Err(CoreError::InvalidArgument("ansatz needs at least one qubit".into()));
        }
        if depth == 0 {
            return Err(CoreError::InvalidArgument("ansatz depth must be >= 1".into()));
        }
        Ok(Self { n_qubits, depth, first_rotation })
    }

    /// Number of trainable circuit angles.
    pub fn n_angles(&self) -> usize {
        self.depth * self.n_qubits
    }

    fn axis_for_layer(&self, layer: usize) -> RotationAxis {
        let flip = layer % 2 == 1;
        match (self.first_rotation, flip) {
            (RotationAxis::Y, false) | (RotationAxis::Z, true) => RotationAxis::Y,
            (RotationAxis::Z, false) | (RotationAxis::Y, true) => RotationAxis::Z,
        }
    }

    fn cnot_pairs(&self, layer: usize) -> Vec<(usize, usize)> {
        let start = layer % 2;
        (start..self.n_qubits)
            .step_by(2)
            .filter_map(|c| (c + 1 < self.n_qubits).then_some((c, c + 1)))
            .collect()
    }
}

/// Trainable angles, indexed `(layer, qubit)` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzParams {
    angles: Vec<f64>,
}

impl AnsatzParams {
    pub fn zeros(spec: &AnsatzSpec) -> Self {
        Self { angles: vec![0.0; spec.n_angles()] }
    }

    pub fn from_angles(spec: &AnsatzSpec, angles: Vec<f64>) -> Result<Self> {
        if angles.len() != spec.n_angles() {
            return Err(CoreError::InvalidArgument(format!(
                "expected {} angles, got {}",
                spec.n_angles(),
                angles.len()
            )));
        }
        Ok(Self { angles })
    }

    pub fn angle(&self, spec: &AnsatzSpec, layer: usize, qubit: usize) -> f64 {
        self.angles[layer * spec.n_qubits + qubit]
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn angles_mut(&mut self) -> &mut [f64] {
        &mut self.angles
    }
}

/// Per-qubit feature embedding: `H(q)` then `RZ(q, x[q])`, in qubit order.
pub fn build_embedding(spec: &AnsatzSpec, x: &[f64]) -> Result<Circuit> {
    if x.len() != spec.n_qubits {
        return Err(CoreError::InvalidArgument(format!(
            "embedding expects {} inputs, got {}",
            spec.n_qubits,
            x.len()
        )));
    }
    let mut circuit = Circuit::new(spec.n_qubits);
    for (q, &angle) in x.iter().enumerate() {
        circuit.push(Gate::H(q));
        circuit.push(Gate::Rz(q, angle));
    }
    Ok(circuit)
}

/// One variational layer: the layer's CNOT brick followed by one rotation per
/// qubit.
pub fn build_layer(spec: &AnsatzSpec, layer_index: usize, layer_angles: &[f64]) -> Result<Circuit> {
    if layer_index >= spec.depth {
        return Err(CoreError::InvalidArgument(format!(
            "layer {layer_index} out of range for depth {}",
            spec.depth
        )));
    }
    if layer_angles.len() != spec.n_qubits {
        return Err(CoreError::InvalidArgument(format!(
            "layer expects {} angles, got {}",
            spec.n_qubits,
            layer_angles.len()
        )));
    }
    let mut circuit = Circuit::new(spec.n_qubits);
    for (control, target) in spec.cnot_pairs(layer_index) {
        circuit.push(Gate::Cnot { control, target });
    }
    let axis = spec.axis_for_layer(layer_index);
    for (q, &angle) in layer_angles.iter().enumerate() {
        circuit.push(match axis {
            RotationAxis::Y => Gate::Ry(q, angle),
            RotationAxis::Z => Gate::Rz(q, angle),
        });
    }
    Ok(circuit)
}

/// Full circuit: embedding then all variational layers.
pub fn build_circuit(spec: &AnsatzSpec, params: &AnsatzParams, x: &[f64]) -> Result<Circuit> {
    if params.angles.len() != spec.n_angles() {
        return Err(CoreError::InvalidArgument("parameter count mismatch".into()));
    }
    let mut circuit = build_embedding(spec, x)?;
    for layer in 0..spec.depth {
        let start = layer * spec.n_qubits;
        let layer_circuit = build_layer(spec, layer, &params.angles[start..start + spec.n_qubits])?;
        circuit.extend(&layer_circuit);
    }
    Ok(circuit)
}

/// Evaluates the ansatz on |0…0⟩ and returns the measurement vector ⟨Z_q⟩.
pub fn forward(spec: &AnsatzSpec, params: &AnsatzParams, x: &[f64]) -> Result<Vec<f64>> {
    let circuit = build_circuit(spec, params, x)?;
    let (state, _) = run_circuit(&circuit, &Statevector::zero(spec.n_qubits))?;
    (0..spec.n_qubits).map(|q| expectation_z(&state, q)).collect()
}

/// Exact Jacobian of the measurement vector.
///
/// Rows are outputs (one per qubit). Columns are the circuit angles in
/// `(layer, qubit)` order followed by the input angles in qubit order.
#[derive(Debug, Clone)]
pub struct Jacobian {
    n_outputs: usize,
    n_angle_cols: usize,
    n_input_cols: usize,
    /// Column-major: `data[col][row]`.
    columns: Vec<Vec<f64>>,
}

impl Jacobian {
    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn n_columns(&self) -> usize {
        self.n_angle_cols + self.n_input_cols
    }

    /// d⟨Z_output⟩ / d angle(layer, qubit).
    pub fn wrt_angle(&self, spec: &AnsatzSpec, output: usize, layer: usize, qubit: usize) -> f64 {
        self.columns[layer * spec.n_qubits + qubit][output]
    }

    /// d⟨Z_output⟩ / d x[qubit].
    pub fn wrt_input(&self, output: usize, qubit: usize) -> f64 {
        self.columns[self.n_angle_cols + qubit][output]
    }

    /// For a cotangent `dm` over the outputs, accumulates gradients of the
    /// circuit angles and of the input angles: returns
    /// `(dm^T J_angles, dm^T J_inputs)`.
    pub fn backprop(&self, dm: &[f64]) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(dm.len(), self.n_outputs);
        let dot = |col: &Vec<f64>| col.iter().zip(dm).map(|(j, d)| j * d).sum::<f64>();
        let d_angles = self.columns[..self.n_angle_cols].iter().map(dot).collect();
        let d_inputs = self.columns[self.n_angle_cols..].iter().map(dot).collect();
        (d_angles, d_inputs)
    }
}

/// Gradient of every output with respect to every circuit angle and every
/// input angle via the shift rule `g = [f(θ+π/2) − f(θ−π/2)] / 2`, exact for
/// the RY/RZ generators used here.
///
/// Shifted evaluations reuse the unshifted prefix state of each parameterized
/// gate and may run concurrently; columns are assembled in stable parameter
/// order.
pub fn parameter_shift_grad(
    spec: &AnsatzSpec,
    params: &AnsatzParams,
    x: &[f64],
    policy: ExecPolicy,
) -> Result<Jacobian> {
    let circuit = build_circuit(spec, params, x)?;
    let n = spec.n_qubits;

    // Gate position of every differentiable angle, in column order: layer
    // rotations first (layer-major), then the embedding RZs.
    let mut gate_of_column = Vec::with_capacity(spec.n_angles() + n);
    let mut rotations_seen = 0usize;
    let mut embedding_rz = vec![0usize; n];
    let mut layer_rotation = vec![0usize; spec.n_angles()];
    for (pos, gate) in circuit.gates.iter().enumerate() {
        match gate {
            Gate::Rz(q, _) if pos < 2 * n => embedding_rz[*q] = pos,
            Gate::Ry(q, _) | Gate::Rz(q, _) => {
                let layer = rotations_seen / n;
                debug_assert_eq!(rotations_seen % n, *q);
                layer_rotation[layer * n + q] = pos;
                rotations_seen += 1;
            }
            _ => {}
        }
    }
    gate_of_column.extend_from_slice(&layer_rotation);
    gate_of_column.extend_from_slice(&embedding_rz);

    // One forward pass, snapshotting the state right before each
    // parameterized gate. Snapshot index == gate position.
    let mut snapshots: Vec<Option<Statevector>> = vec![None; circuit.gates.len()];
    let mut needs_snapshot = vec![false; circuit.gates.len()];
    for &pos in &gate_of_column {
        needs_snapshot[pos] = true;
    }
    let mut state = Statevector::zero(n);
    for (pos, &gate) in circuit.gates.iter().enumerate() {
        if needs_snapshot[pos] {
            snapshots[pos] = Some(state.clone());
        }
        state.apply_gate_in_place(gate)?;
    }

    let columns = policy.try_map_indexed(gate_of_column.len(), |col| {
        let pos = gate_of_column[col];
        let prefix = snapshots[pos].as_ref().expect("snapshot exists");
        let mut shifted_outputs = [Vec::new(), Vec::new()];
        for (slot, delta) in [FRAC_PI_2, -FRAC_PI_2].into_iter().enumerate() {
            let mut work = prefix.clone();
            let shifted = match circuit.gates[pos] {
                Gate::Ry(q, theta) => Gate::Ry(q, theta + delta),
                Gate::Rz(q, theta) => Gate::Rz(q, theta + delta),
                other => unreachable!("non-rotation gate {other:?} marked differentiable"),
            };
            work.apply_gate_in_place(shifted)?;
            for &gate in &circuit.gates[pos + 1..] {
                work.apply_gate_in_place(gate)?;
            }
            shifted_outputs[slot] = (0..n)
                .map(|q| expectation_z(&work, q))
                .collect::<Result<Vec<f64>>>()?;
        }
        Ok((0..n)
            .map(|q| (shifted_outputs[0][q] - shifted_outputs[1][q]) / 2.0)
            .collect::<Vec<f64>>())
    })?;

    Ok(Jacobian {
        n_outputs: n,
        n_angle_cols: spec.n_angles(),
        n_input_cols: n,
        columns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b}");
    }

    #[test]
    fn embedding_gate_list() {
        let spec = AnsatzSpec::new(2, 1, RotationAxis::Y).unwrap();
        let circuit = build_embedding(&spec, &[0.5, -1.2]).unwrap();
        assert_eq!(
            circuit.gates,
            vec![Gate::H(0), Gate::Rz(0, 0.5), Gate::H(1), Gate::Rz(1, -1.2)]
        );
    }

    #[test]
    fn embedding_z_expectation_is_zero() {
        let spec = AnsatzSpec::new(1, 1, RotationAxis::Y).unwrap();
        for x in [0.0, std::f64::consts::PI] {
            let circuit = build_embedding(&spec, &[x]).unwrap();
            let (state, _) = run_circuit(&circuit, &Statevector::zero(1)).unwrap();
            assert_close(expectation_z(&state, 0).unwrap(), 0.0, 1e-12);
        }
        // Same ⟨Z⟩ but different statevectors: the phase differs.
        let (a, _) = run_circuit(
            &build_embedding(&spec, &[0.0]).unwrap(),
            &Statevector::zero(1),
        )
        .unwrap();
        let (b, _) = run_circuit(
            &build_embedding(&spec, &[std::f64::consts::PI]).unwrap(),
            &Statevector::zero(1),
        )
        .unwrap();
        assert!(a.amplitudes() != b.amplitudes());
    }

    #[test]
    fn layer_even_pairs_then_rotations() {
        let spec = AnsatzSpec::new(4, 2, RotationAxis::Y).unwrap();
        let layer = build_layer(&spec, 0, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(
            layer.gates,
            vec![
                Gate::Cnot { control: 0, target: 1 },
                Gate::Cnot { control: 2, target: 3 },
                Gate::Ry(0, 0.1),
                Gate::Ry(1, 0.2),
                Gate::Ry(2, 0.3),
                Gate::Ry(3, 0.4),
            ]
        );
    }

    #[test]
    fn layer_odd_shifted_pairs() {
        let spec = AnsatzSpec::new(4, 2, RotationAxis::Y).unwrap();
        let layer = build_layer(&spec, 1, &[0.0; 4]).unwrap();
        assert_eq!(
            layer.gates,
            vec![
                Gate::Cnot { control: 1, target: 2 },
                Gate::Rz(0, 0.0),
                Gate::Rz(1, 0.0),
                Gate::Rz(2, 0.0),
                Gate::Rz(3, 0.0),
            ]
        );
    }

    #[test]
    fn degenerate_width_has_no_shifted_pairs() {
        let spec = AnsatzSpec::new(2, 2, RotationAxis::Y).unwrap();
        let layer = build_layer(&spec, 1, &[0.0, 0.0]).unwrap();
        assert!(layer.gates.iter().all(|g| !matches!(g, Gate::Cnot { .. })));
        assert_eq!(layer.gates.len(), 2);
    }

    #[test]
    fn gate_count_formula() {
        for (n, depth) in [(2, 3), (4, 8), (5, 4)] {
            let spec = AnsatzSpec::new(n, depth, RotationAxis::Y).unwrap();
            let params = AnsatzParams::zeros(&spec);
            let x = vec![0.1; n];
            let circuit = build_circuit(&spec, &params, &x).unwrap();
            let pairs: usize = (0..depth).map(|l| spec.cnot_pairs(l).len()).sum();
            assert_eq!(circuit.gates.len(), 2 * n + pairs + depth * n);
        }
    }

    #[test]
    fn single_qubit_closed_form() {
        // H, RZ(x), RY(θ) on |0⟩ gives ⟨Z⟩ = −sin θ · cos x.
        let spec = AnsatzSpec::new(1, 1, RotationAxis::Y).unwrap();
        for (theta, x) in [(0.3, 0.9), (1.2, -0.4), (-0.7, 2.0)] {
            let params = AnsatzParams::from_angles(&spec, vec![theta]).unwrap();
            let out = forward(&spec, &params, &[x]).unwrap();
            assert_close(out[0], -theta.sin() * x.cos(), 1e-12);
        }
    }

    #[test]
    fn zero_params_give_zero_outputs() {
        for n in [2, 3, 4] {
            let spec = AnsatzSpec::new(n, 3, RotationAxis::Y).unwrap();
            let params = AnsatzParams::zeros(&spec);
            let x: Vec<f64> = (0..n).map(|i| 0.3 * i as f64 - 0.5).collect();
            let out = forward(&spec, &params, &x).unwrap();
            for v in out {
                assert_close(v, 0.0, 1e-12);
            }
        }
    }

    #[test]
    fn forward_outputs_bounded() {
        let spec = AnsatzSpec::new(4, 8, RotationAxis::Y).unwrap();
        let angles: Vec<f64> = (0..spec.n_angles()).map(|i| (i as f64) * 0.37 - 3.0).collect();
        let params = AnsatzParams::from_angles(&spec, angles).unwrap();
        let out = forward(&spec, &params, &[12.0, -55.3, 0.0, 7.7]).unwrap();
        for v in out {
            assert!(v.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn forward_is_deterministic() {
        let spec = AnsatzSpec::new(3, 2, RotationAxis::Z).unwrap();
        let params = AnsatzParams::from_angles(&spec, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        let x = [0.7, -0.2, 1.9];
        let a = forward(&spec, &params, &x).unwrap();
        let b = forward(&spec, &params, &x).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn shift_rule_matches_closed_form() {
        let spec = AnsatzSpec::new(1, 1, RotationAxis::Y).unwrap();
        let (theta, x) = (0.8, 0.35);
        let params = AnsatzParams::from_angles(&spec, vec![theta]).unwrap();
        let jac = parameter_shift_grad(&spec, &params, &[x], ExecPolicy::default()).unwrap();
        assert_close(jac.wrt_angle(&spec, 0, 0, 0), -theta.cos() * x.cos(), 1e-12);
        assert_close(jac.wrt_input(0, 0), theta.sin() * x.sin(), 1e-12);
    }

    #[test]
    fn serial_and_parallel_jacobians_are_bit_identical() {
        let spec = AnsatzSpec::new(4, 2, RotationAxis::Y).unwrap();
        let angles: Vec<f64> = (0..spec.n_angles()).map(|i| 0.21 * i as f64 - 0.4).collect();
        let params = AnsatzParams::from_angles(&spec, angles).unwrap();
        let x = [0.3, -0.8, 1.1, 0.05];
        let serial = parameter_shift_grad(&spec, &params, &x, ExecPolicy::serial()).unwrap();
        let parallel = parameter_shift_grad(&spec, &params, &x, ExecPolicy::default()).unwrap();
        assert_eq!(serial.columns, parallel.columns);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let spec = AnsatzSpec::new(3, 1, RotationAxis::Y).unwrap();
        let params = AnsatzParams::zeros(&spec);
        assert!(forward(&spec, &params, &[0.0, 0.0]).is_err());
        assert!(build_embedding(&spec, &[1.0; 4]).is_err());
        assert!(build_layer(&spec, 1, &[0.0; 3]).is_err());
    }
}
