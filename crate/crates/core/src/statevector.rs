//! Dense statevector simulation of few-qubit circuits.
//!
//! Conventions, fixed once for the whole workspace:
//! - qubit 0 indexes the least significant bit of the amplitude array
//!   (little-endian),
//! - `RZ(θ) = diag(e^{-iθ/2}, e^{+iθ/2})`,
//! - `RY(θ) = [[cos θ/2, -sin θ/2], [sin θ/2, cos θ/2]]`,
//! - `H = (1/√2)[[1, 1], [1, -1]]`.
//!
//! Global phase is never normalized away; every observable-level contract is
//! phase-insensitive.

use num_complex::Complex64;

use crate::error::{CoreError, Result};

/// Pauli axis, used for measurement bases, preparations and observables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Eigenvalue sign of a Pauli eigenstate or measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// A single circuit operation.
///
/// All gates except `MeasureCollapse` are unitary. `Prepare` assumes its wire
/// is in |0⟩ (fresh or freshly reset) and applies the unitary taking |0⟩ to
/// the requested Pauli eigenstate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H(usize),
    Ry(usize, f64),
    Rz(usize, f64),
    Cnot { control: usize, target: usize },
    Prepare { qubit: usize, basis: Pauli, sign: Sign },
    MeasureCollapse { qubit: usize, basis: Pauli, outcome: Sign },
}

impl Gate {
    /// Largest qubit index the gate touches.
    pub fn max_qubit(&self) -> usize {
        match *self {
            Gate::H(q) | Gate::Ry(q, _) | Gate::Rz(q, _) => q,
            Gate::Cnot { control, target } => control.max(target),
            Gate::Prepare { qubit, .. } | Gate::MeasureCollapse { qubit, .. } => qubit,
        }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, Gate::MeasureCollapse { .. })
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        if let Gate::Cnot { control, target } = self {
            if control == target {
                return Err(CoreError::InvalidCircuit(format!(
                    "cnot control and target coincide on qubit {control}"
                )));
            }
        }
        if self.max_qubit() >= n_qubits {
            return Err(CoreError::InvalidCircuit(format!(
                "gate {self:?} references qubit {} but the state has {n_qubits} qubits",
                self.max_qubit()
            )));
        }
        Ok(())
    }
}

/// An ordered list of gates over `n_qubits` wires.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, gates: Vec::new() }
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    pub fn extend(&mut self, other: &Circuit) {
        self.gates.extend_from_slice(&other.gates);
    }

    /// Checks every gate index against `n_qubits`.
    pub fn validate(&self) -> Result<()> {
        for gate in &self.gates {
            gate.validate(self.n_qubits)?;
        }
        Ok(())
    }
}

/// Full complex amplitude vector of an `n_qubits` pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// |0…0⟩ on `n_qubits` wires.
    pub fn zero(n_qubits: usize) -> Self {
        assert!(n_qubits >= 1, "statevector needs at least one qubit");
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amplitudes }
    }

    /// Computational basis state with the given little-endian index.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        assert!(index < 1 << n_qubits, "basis index out of range");
        let mut state = Self::zero(n_qubits);
        state.amplitudes[0] = Complex64::new(0.0, 0.0);
        state.amplitudes[index] = Complex64::new(1.0, 0.0);
        state
    }

    /// Builds a state from raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(CoreError::InvalidArgument(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        Ok(Self { n_qubits: len.trailing_zeros() as usize, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// True for the flagged all-zero state returned by a zero-probability
    /// measurement branch.
    pub fn is_null(&self) -> bool {
        self.amplitudes.iter().all(|a| a.re == 0.0 && a.im == 0.0)
    }

    fn apply_single_qubit(&mut self, qubit: usize, m: [[Complex64; 2]; 2]) {
        let step = 1 << qubit;
        let amps = &mut self.amplitudes;
        for block in (0..amps.len()).step_by(2 * step) {
            for offset in 0..step {
                let i = block + offset;
                let j = i | step;
                let a = amps[i];
                let b = amps[j];
                amps[i] = m[0][0] * a + m[0][1] * b;
                amps[j] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let cmask = 1 << control;
        let tmask = 1 << target;
        for i in 0..self.amplitudes.len() {
            if i & cmask != 0 && i & tmask == 0 {
                self.amplitudes.swap(i, i | tmask);
            }
        }
    }

    /// Applies `gate` in place and returns its branch weight (1 for unitary
    /// gates, the branch probability for `MeasureCollapse`).
    pub fn apply_gate_in_place(&mut self, gate: Gate) -> Result<f64> {
        gate.validate(self.n_qubits)?;
        match gate {
            Gate::H(q) => self.apply_single_qubit(q, hadamard()),
            Gate::Ry(q, theta) => self.apply_single_qubit(q, rotation_y(theta)),
            Gate::Rz(q, theta) => self.apply_single_qubit(q, rotation_z(theta)),
            Gate::Cnot { control, target } => self.apply_cnot(control, target),
            Gate::Prepare { qubit, basis, sign } => {
                for m in preparation_sequence(basis, sign) {
                    self.apply_single_qubit(qubit, m);
                }
            }
            Gate::MeasureCollapse { qubit, basis, outcome } => {
                self.apply_single_qubit(qubit, projector(basis, outcome));
                let weight = self.norm_sqr();
                if weight == 0.0 {
                    // Flagged zero state: the branch is impossible.
                    return Ok(0.0);
                }
                let inv = 1.0 / weight.sqrt();
                for a in &mut self.amplitudes {
                    *a *= inv;
                }
                return Ok(weight);
            }
        }
        Ok(1.0)
    }
}

fn hadamard() -> [[Complex64; 2]; 2] {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

fn rotation_y(theta: f64) -> [[Complex64; 2]; 2] {
    let c = Complex64::new((theta / 2.0).cos(), 0.0);
    let s = Complex64::new((theta / 2.0).sin(), 0.0);
    [[c, -s], [s, c]]
}

fn rotation_z(theta: f64) -> [[Complex64; 2]; 2] {
    let zero = Complex64::new(0.0, 0.0);
    [
        [Complex64::from_polar(1.0, -theta / 2.0), zero],
        [zero, Complex64::from_polar(1.0, theta / 2.0)],
    ]
}

/// Rank-1 projector onto the ±1 eigenstate of a Pauli axis.
fn projector(basis: Pauli, outcome: Sign) -> [[Complex64; 2]; 2] {
    let half = Complex64::new(0.5, 0.0);
    let s = outcome.value();
    match basis {
        Pauli::Z => {
            let zero = Complex64::new(0.0, 0.0);
            let one = Complex64::new(1.0, 0.0);
            match outcome {
                Sign::Plus => [[one, zero], [zero, zero]],
                Sign::Minus => [[zero, zero], [zero, one]],
            }
        }
        Pauli::X => [
            [half, half * s],
            [half * s, half],
        ],
        Pauli::Y => [
            [half, Complex64::new(0.0, -0.5 * s)],
            [Complex64::new(0.0, 0.5 * s), half],
        ],
    }
}

/// Unitary sequence taking |0⟩ to the requested Pauli eigenstate
/// (up to global phase).
fn preparation_sequence(basis: Pauli, sign: Sign) -> Vec<[[Complex64; 2]; 2]> {
    use std::f64::consts::{FRAC_PI_2, PI};
    match (basis, sign) {
        (Pauli::Z, Sign::Plus) => vec![],
        (Pauli::Z, Sign::Minus) => vec![rotation_y(PI)],
        (Pauli::X, Sign::Plus) => vec![hadamard()],
        (Pauli::X, Sign::Minus) => vec![rotation_y(PI), hadamard()],
        (Pauli::Y, Sign::Plus) => vec![hadamard(), rotation_z(FRAC_PI_2)],
        (Pauli::Y, Sign::Minus) => vec![hadamard(), rotation_z(-FRAC_PI_2)],
    }
}

/// Applies one gate to a state, returning the new state and the branch weight.
pub fn apply_gate(state: &Statevector, gate: Gate) -> Result<(Statevector, f64)> {
    let mut next = state.clone();
    let weight = next.apply_gate_in_place(gate)?;
    Ok((next, weight))
}

/// Runs every gate in order. The total weight is the product of branch
/// weights (1 for purely unitary circuits).
pub fn run_circuit(circuit: &Circuit, initial: &Statevector) -> Result<(Statevector, f64)> {
    if circuit.n_qubits != initial.n_qubits() {
        return Err(CoreError::InvalidCircuit(format!(
            "circuit over {} qubits applied to a {}-qubit state",
            circuit.n_qubits,
            initial.n_qubits()
        )));
    }
    let mut state = initial.clone();
    let mut total = 1.0;
    for &gate in &circuit.gates {
        let weight = state.apply_gate_in_place(gate)?;
        total *= weight;
        if total == 0.0 {
            // Every later branch weight is irrelevant; keep the flagged state.
            return Ok((state, 0.0));
        }
    }
    Ok((state, total))
}

/// ⟨Z_qubit⟩ of a normalized state.
pub fn expectation_z(state: &Statevector, qubit: usize) -> Result<f64> {
    if qubit >= state.n_qubits() {
        return Err(CoreError::InvalidArgument(format!(
            "qubit {qubit} out of range for {} qubits",
            state.n_qubits()
        )));
    }
    let mask = 1 << qubit;
    let mut value = 0.0;
    for (i, a) in state.amplitudes().iter().enumerate() {
        let p = a.norm_sqr();
        value += if i & mask == 0 { p } else { -p };
    }
    Ok(value)
}

/// Expectation of a tensor product of Pauli factors on distinct qubits.
///
/// An empty factor list is the identity observable (always 1 on a normalized
/// state).
pub fn expectation_pauli_product(state: &Statevector, factors: &[(usize, Pauli)]) -> Result<f64> {
    for (i, (q, _)) in factors.iter().enumerate() {
        if *q >= state.n_qubits() {
            return Err(CoreError::InvalidArgument(format!(
                "observable qubit {q} out of range for {} qubits",
                state.n_qubits()
            )));
        }
        if factors[i + 1..].iter().any(|(other, _)| other == q) {
            return Err(CoreError::InvalidArgument(format!(
                "observable lists qubit {q} more than once"
            )));
        }
    }
    // φ = (⊗P) ψ, then ⟨ψ|φ⟩. The result of a Hermitian observable is real;
    // the imaginary part only carries rounding noise.
    let mut phi = state.amplitudes().to_vec();
    for &(q, p) in factors {
        let mask = 1 << q;
        match p {
            Pauli::Z => {
                for (i, a) in phi.iter_mut().enumerate() {
                    if i & mask != 0 {
                        *a = -*a;
                    }
                }
            }
            Pauli::X => {
                for i in 0..phi.len() {
                    if i & mask == 0 {
                        phi.swap(i, i | mask);
                    }
                }
            }
            Pauli::Y => {
                for i in 0..phi.len() {
                    if i & mask == 0 {
                        let lo = phi[i];
                        let hi = phi[i | mask];
                        // Y = [[0, -i], [i, 0]]
                        phi[i] = Complex64::new(0.0, -1.0) * hi;
                        phi[i | mask] = Complex64::new(0.0, 1.0) * lo;
                    }
                }
            }
        }
    }
    let value: Complex64 = state
        .amplitudes()
        .iter()
        .zip(&phi)
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(value.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b}");
    }

    #[test]
    fn hadamard_on_zero() {
        let (state, weight) = apply_gate(&Statevector::zero(1), Gate::H(0)).unwrap();
        assert_eq!(weight, 1.0);
        assert_close(state.amplitudes()[0].re, FRAC_1_SQRT_2, 1e-15);
        assert_close(state.amplitudes()[1].re, FRAC_1_SQRT_2, 1e-15);
    }

    #[test]
    fn cnot_truth_table() {
        // |10⟩ in little-endian writing |q0 q1⟩: qubit 0 set → index 1.
        let input = Statevector::basis(2, 0b01);
        let (state, weight) = apply_gate(&input, Gate::Cnot { control: 0, target: 1 }).unwrap();
        assert_eq!(weight, 1.0);
        assert_close(state.amplitudes()[0b11].re, 1.0, 1e-15);
    }

    #[test]
    fn measure_collapse_born_rule() {
        let (plus, _) = apply_gate(&Statevector::zero(1), Gate::H(0)).unwrap();
        let (state, weight) = apply_gate(
            &plus,
            Gate::MeasureCollapse { qubit: 0, basis: Pauli::Z, outcome: Sign::Plus },
        )
        .unwrap();
        assert_close(weight, 0.5, 1e-12);
        assert_close(state.amplitudes()[0].re, 1.0, 1e-12);
        assert_close(state.amplitudes()[1].norm(), 0.0, 1e-12);
    }

    #[test]
    fn measure_branch_weights_sum_to_one() {
        let mut circuit = Circuit::new(2);
        circuit.push(Gate::H(0));
        circuit.push(Gate::Ry(1, 0.7));
        circuit.push(Gate::Cnot { control: 0, target: 1 });
        let (state, _) = run_circuit(&circuit, &Statevector::zero(2)).unwrap();
        for basis in [Pauli::X, Pauli::Y, Pauli::Z] {
            let (_, w_plus) = apply_gate(
                &state,
                Gate::MeasureCollapse { qubit: 1, basis, outcome: Sign::Plus },
            )
            .unwrap();
            let (_, w_minus) = apply_gate(
                &state,
                Gate::MeasureCollapse { qubit: 1, basis, outcome: Sign::Minus },
            )
            .unwrap();
            assert_close(w_plus + w_minus, 1.0, 1e-12);
        }
    }

    #[test]
    fn zero_probability_branch_is_flagged() {
        let (state, weight) = apply_gate(
            &Statevector::zero(1),
            Gate::MeasureCollapse { qubit: 0, basis: Pauli::Z, outcome: Sign::Minus },
        )
        .unwrap();
        assert_eq!(weight, 0.0);
        assert!(state.is_null());
    }

    #[test]
    fn empty_circuit_is_identity() {
        let input = Statevector::basis(2, 0b10);
        let (state, weight) = run_circuit(&Circuit::new(2), &input).unwrap();
        assert_eq!(weight, 1.0);
        assert_eq!(state.amplitudes(), input.amplitudes());
    }

    #[test]
    fn bell_state_preparation() {
        let mut circuit = Circuit::new(2);
        circuit.push(Gate::H(0));
        circuit.push(Gate::Cnot { control: 0, target: 1 });
        let (state, weight) = run_circuit(&circuit, &Statevector::zero(2)).unwrap();
        assert_eq!(weight, 1.0);
        assert_close(state.amplitudes()[0b00].re, FRAC_1_SQRT_2, 1e-15);
        assert_close(state.amplitudes()[0b11].re, FRAC_1_SQRT_2, 1e-15);
        assert_close(state.amplitudes()[0b01].norm(), 0.0, 1e-15);
        assert_close(state.amplitudes()[0b10].norm(), 0.0, 1e-15);
    }

    #[test]
    fn expectation_z_eigenstates() {
        assert_close(expectation_z(&Statevector::zero(1), 0).unwrap(), 1.0, 1e-15);
        let (plus, _) = apply_gate(&Statevector::zero(1), Gate::H(0)).unwrap();
        assert_close(expectation_z(&plus, 0).unwrap(), 0.0, 1e-15);
    }

    #[test]
    fn expectation_z_after_ry_is_cosine() {
        for theta in [0.3, 1.1, 2.7] {
            let (state, _) = apply_gate(&Statevector::zero(1), Gate::Ry(0, theta)).unwrap();
            assert_close(expectation_z(&state, 0).unwrap(), theta.cos(), 1e-12);
        }
    }

    #[test]
    fn bell_correlations() {
        let mut circuit = Circuit::new(2);
        circuit.push(Gate::H(0));
        circuit.push(Gate::Cnot { control: 0, target: 1 });
        let (bell, _) = run_circuit(&circuit, &Statevector::zero(2)).unwrap();
        let zz = expectation_pauli_product(&bell, &[(0, Pauli::Z), (1, Pauli::Z)]).unwrap();
        let xx = expectation_pauli_product(&bell, &[(0, Pauli::X), (1, Pauli::X)]).unwrap();
        assert_close(zz, 1.0, 1e-12);
        assert_close(xx, 1.0, 1e-12);
    }

    #[test]
    fn separable_state_single_factor() {
        let mut circuit = Circuit::new(2);
        circuit.push(Gate::H(0));
        let (state, _) = run_circuit(&circuit, &Statevector::zero(2)).unwrap();
        let z0 = expectation_pauli_product(&state, &[(0, Pauli::Z)]).unwrap();
        assert_close(z0, 0.0, 1e-15);
    }

    #[test]
    fn expectation_z_matches_pauli_product_exactly() {
        let mut circuit = Circuit::new(3);
        circuit.push(Gate::H(0));
        circuit.push(Gate::Ry(1, 1.3));
        circuit.push(Gate::Rz(2, -0.4));
        circuit.push(Gate::Cnot { control: 0, target: 2 });
        let (state, _) = run_circuit(&circuit, &Statevector::zero(3)).unwrap();
        for q in 0..3 {
            let direct = expectation_z(&state, q).unwrap();
            let product = expectation_pauli_product(&state, &[(q, Pauli::Z)]).unwrap();
            assert_eq!(direct, product);
        }
    }

    #[test]
    fn duplicate_observable_qubit_rejected() {
        let state = Statevector::zero(2);
        let err = expectation_pauli_product(&state, &[(0, Pauli::Z), (0, Pauli::X)]);
        assert!(matches!(err, Err(CoreError::InvalidArgument(_))));
    }

    #[test]
    fn out_of_range_gate_rejected() {
        let mut state = Statevector::zero(2);
        let err = state.apply_gate_in_place(Gate::H(2));
        assert!(matches!(err, Err(CoreError::InvalidCircuit(_))));
        let err = state.apply_gate_in_place(Gate::Cnot { control: 1, target: 1 });
        assert!(matches!(err, Err(CoreError::InvalidCircuit(_))));
    }

    #[test]
    fn prepared_eigenstates_have_unit_expectation() {
        for basis in [Pauli::X, Pauli::Y, Pauli::Z] {
            for sign in [Sign::Plus, Sign::Minus] {
                let mut state = Statevector::zero(1);
                state
                    .apply_gate_in_place(Gate::Prepare { qubit: 0, basis, sign })
                    .unwrap();
                let value = expectation_pauli_product(&state, &[(0, basis)]).unwrap();
                assert_close(value, sign.value(), 1e-12);
            }
        }
    }
}
