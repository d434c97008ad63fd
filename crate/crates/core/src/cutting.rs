//! Widthwise circuit partitioning: wire cuts (measure-and-prepare) and CNOT
//! gate cuts (local single-qubit substitution), subcircuit enumeration,
//! independent execution and exact linear-combination reconstruction.
//!
//! A wire cut expands into the 8-term Pauli identity
//! `ρ = 1/2 Σ_P Tr(Pρ)·P` with each Pauli split into its eigen-projectors:
//! the upstream side carries a signed measurement (both collapse outcomes are
//! executed and combined with their outcome sign), the downstream side a
//! fresh eigenstate preparation. Coefficient magnitudes sum to 4.
//!
//! A CNOT gate cut reduces to a controlled-Z by Hadamard conjugation of the
//! target and expands the CZ channel into 6 local terms (rotations, Z flips
//! and signed Z measurements) with coefficient magnitudes summing to 3.

use crate::error::{CoreError, Result};
use crate::exec::ExecPolicy;
use crate::statevector::{
    expectation_pauli_product, run_circuit, Circuit, Gate, Pauli, Sign, Statevector,
};

use std::f64::consts::{FRAC_PI_2, PI};

/// Cut the wire of `qubit` immediately after the gate at `gate_index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WireCut {
    pub gate_index: usize,
    pub qubit: usize,
}

/// Cut locations; every gate cut must reference a CNOT.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CutPlan {
    pub wire_cuts: Vec<WireCut>,
    pub gate_cuts: Vec<usize>,
}

impl CutPlan {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Total combinations the plan expands into: 8 per wire cut, 6 per gate
    /// cut.
    pub fn combination_count(&self) -> usize {
        8usize.pow(self.wire_cuts.len() as u32) * 6usize.pow(self.gate_cuts.len() as u32)
    }

    pub fn validate(&self, circuit: &Circuit) -> Result<()> {
        for (i, cut) in self.wire_cuts.iter().enumerate() {
            if cut.gate_index >= circuit.gates.len() {
                return Err(CoreError::InvalidPlan(format!(
                    "wire cut after gate {} but the circuit has {} gates",
                    cut.gate_index,
                    circuit.gates.len()
                )));
            }
            if cut.qubit >= circuit.n_qubits {
                return Err(CoreError::InvalidPlan(format!(
                    "wire cut on qubit {} but the circuit has {} qubits",
                    cut.qubit, circuit.n_qubits
                )));
            }
            if self.wire_cuts[i + 1..].contains(cut) {
                return Err(CoreError::InvalidPlan(format!("duplicate wire cut {cut:?}")));
            }
        }
        for (i, &index) in self.gate_cuts.iter().enumerate() {
            if index >= circuit.gates.len() {
                return Err(CoreError::InvalidPlan(format!(
                    "gate cut at {} but the circuit has {} gates",
                    index,
                    circuit.gates.len()
                )));
            }
            if !matches!(circuit.gates[index], Gate::Cnot { .. }) {
                return Err(CoreError::InvalidPlan(format!(
                    "gate cut at {index} does not reference a CNOT (found {:?})",
                    circuit.gates[index]
                )));
            }
            if self.gate_cuts[i + 1..].contains(&index) {
                return Err(CoreError::InvalidPlan(format!("duplicate gate cut at {index}")));
            }
        }
        Ok(())
    }
}

/// One variant of a wire cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WireCutTerm {
    pub coefficient: f64,
    /// Signed measurement basis on the upstream wire end; `None` traces the
    /// wire out (identity observable).
    pub measure: Option<Pauli>,
    pub prepare_basis: Pauli,
    pub prepare_sign: Sign,
}

/// Single-qubit substitution op used by gate-cut terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalOp {
    H,
    Rz(f64),
    /// Z measurement whose both outcomes are executed; the outcome sign is
    /// folded into the subcircuit instance weight.
    SignMeasureZ,
}

/// One variant of a CNOT gate cut.
#[derive(Debug, Clone, PartialEq)]
pub struct GateCutTerm {
    pub coefficient: f64,
    pub control_ops: Vec<LocalOp>,
    pub target_ops: Vec<LocalOp>,
}

fn wire_cut_terms() -> Vec<WireCutTerm> {
    let mut terms = vec![
        WireCutTerm {
            coefficient: 0.5,
            measure: None,
            prepare_basis: Pauli::Z,
            prepare_sign: Sign::Plus,
        },
        WireCutTerm {
            coefficient: 0.5,
            measure: None,
            prepare_basis: Pauli::Z,
            prepare_sign: Sign::Minus,
        },
    ];
    for basis in [Pauli::X, Pauli::Y, Pauli::Z] {
        terms.push(WireCutTerm {
            coefficient: 0.5,
            measure: Some(basis),
            prepare_basis: basis,
            prepare_sign: Sign::Plus,
        });
        terms.push(WireCutTerm {
            coefficient: -0.5,
            measure: Some(basis),
            prepare_basis: basis,
            prepare_sign: Sign::Minus,
        });
    }
    terms
}

fn gate_cut_terms() -> Vec<GateCutTerm> {
    use LocalOp::{Rz, SignMeasureZ, H};
    // CZ = e^{iπ/4} (RZ(π/2) ⊗ RZ(π/2)) · e^{iπ/4 Z⊗Z}; the exponential's
    // channel splits into identity, Z⊗Z and four signed-measurement cross
    // terms, each with magnitude 1/2. Trailing RZ(π/2) corrections are fused
    // into the listed rotations (Z ≡ RZ(π) as a channel). The target side is
    // conjugated by H to turn the CZ back into the CNOT being replaced.
    vec![
        GateCutTerm {
            coefficient: 0.5,
            control_ops: vec![Rz(FRAC_PI_2)],
            target_ops: vec![H, Rz(FRAC_PI_2), H],
        },
        GateCutTerm {
            coefficient: 0.5,
            control_ops: vec![Rz(3.0 * FRAC_PI_2)],
            target_ops: vec![H, Rz(3.0 * FRAC_PI_2), H],
        },
        GateCutTerm {
            coefficient: 0.5,
            control_ops: vec![],
            target_ops: vec![H, SignMeasureZ, Rz(FRAC_PI_2), H],
        },
        GateCutTerm {
            coefficient: -0.5,
            control_ops: vec![Rz(PI)],
            target_ops: vec![H, SignMeasureZ, Rz(FRAC_PI_2), H],
        },
        GateCutTerm {
            coefficient: 0.5,
            control_ops: vec![SignMeasureZ, Rz(FRAC_PI_2)],
            target_ops: vec![],
        },
        GateCutTerm {
            coefficient: -0.5,
            control_ops: vec![SignMeasureZ, Rz(FRAC_PI_2)],
            target_ops: vec![H, Rz(PI), H],
        },
    ]
}

/// The 8 variants a wire cut expands into.
pub fn expand_wire_cut(circuit: &Circuit, cut: WireCut) -> Result<Vec<WireCutTerm>> {
    CutPlan { wire_cuts: vec![cut], gate_cuts: vec![] }.validate(circuit)?;
    Ok(wire_cut_terms())
}

/// The 6 variants a CNOT gate cut expands into.
pub fn expand_gate_cut(circuit: &Circuit, gate_index: usize) -> Result<Vec<GateCutTerm>> {
    CutPlan { wire_cuts: vec![], gate_cuts: vec![gate_index] }.validate(circuit)?;
    Ok(gate_cut_terms())
}

/// One executable fragment variant.
#[derive(Debug, Clone)]
pub struct SubcircuitInstance {
    pub fragment: usize,
    /// Product of the outcome signs assigned to this instance's signed
    /// measurements.
    pub sign: f64,
    pub circuit: Circuit,
    /// Observable restricted to this fragment, over fragment-local qubits.
    pub observable: Vec<(usize, Pauli)>,
}

/// All fragment variants of one cut-term combination.
#[derive(Debug, Clone)]
pub struct CombinationGroup {
    /// Product of the combination's term coefficients.
    pub coefficient: f64,
    pub instances: Vec<SubcircuitInstance>,
}

/// Result of expanding a circuit under a plan.
#[derive(Debug, Clone)]
pub struct CutExpansion {
    pub n_fragments: usize,
    /// Wire-segment count of each fragment.
    pub fragment_widths: Vec<usize>,
    /// Fragment holding the final wire segment of each original qubit.
    pub fragment_of_qubit: Vec<usize>,
    pub groups: Vec<CombinationGroup>,
}

// Internal skeleton: the circuit rewritten over wire segments, with cut sites
// left symbolic so each combination can substitute its term.
enum Slot {
    Fixed(SegGate),
    WireCutSite { ordinal: usize, upstream: usize, downstream: usize },
    GateCutSite { ordinal: usize, control: usize, target: usize },
}

// A gate with qubit indices remapped to wire segments.
#[derive(Clone, Copy)]
enum SegGate {
    Single(usize, SingleKind),
    Cnot { control: usize, target: usize },
}

#[derive(Clone, Copy)]
enum SingleKind {
    H,
    Ry(f64),
    Rz(f64),
    Prepare(Pauli, Sign),
    MeasureCollapse(Pauli, Sign),
}

struct Skeleton {
    slots: Vec<Slot>,
    n_segments: usize,
    final_segment: Vec<usize>,
}

fn build_skeleton(circuit: &Circuit, plan: &CutPlan) -> Skeleton {
    let n = circuit.n_qubits;
    let mut segment: Vec<usize> = (0..n).collect();
    let mut n_segments = n;
    let mut slots = Vec::with_capacity(circuit.gates.len() + plan.wire_cuts.len());
    for (index, gate) in circuit.gates.iter().enumerate() {
        if let Some(ordinal) = plan.gate_cuts.iter().position(|&g| g == index) {
            let (control, target) = match *gate {
                Gate::Cnot { control, target } => (segment[control], segment[target]),
                _ => unreachable!("plan validated"),
            };
            slots.push(Slot::GateCutSite { ordinal, control, target });
        } else {
            let seg_gate = match *gate {
                Gate::H(q) => SegGate::Single(segment[q], SingleKind::H),
                Gate::Ry(q, t) => SegGate::Single(segment[q], SingleKind::Ry(t)),
                Gate::Rz(q, t) => SegGate::Single(segment[q], SingleKind::Rz(t)),
                Gate::Prepare { qubit, basis, sign } => {
                    SegGate::Single(segment[qubit], SingleKind::Prepare(basis, sign))
                }
                Gate::MeasureCollapse { qubit, basis, outcome } => {
                    SegGate::Single(segment[qubit], SingleKind::MeasureCollapse(basis, outcome))
                }
                Gate::Cnot { control, target } => {
                    SegGate::Cnot { control: segment[control], target: segment[target] }
                }
            };
            slots.push(Slot::Fixed(seg_gate));
        }
        for (ordinal, cut) in plan.wire_cuts.iter().enumerate() {
            if cut.gate_index == index {
                let upstream = segment[cut.qubit];
                let downstream = n_segments;
                n_segments += 1;
                segment[cut.qubit] = downstream;
                slots.push(Slot::WireCutSite { ordinal, upstream, downstream });
            }
        }
    }
    Skeleton { slots, n_segments, final_segment: segment }
}

// Minimal union-find over segment ids.
struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        if self.0[x] != x {
            let root = self.find(self.0[x]);
            self.0[x] = root;
        }
        self.0[x]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

// Template gates per fragment: concrete, or a signed-measurement branch point.
#[derive(Clone, Copy)]
enum TemplateGate {
    Concrete(Gate),
    Branch { qubit: usize, basis: Pauli },
}

/// Expands `circuit` under `plan` into one group per cut-term combination.
///
/// Within a group, every fragment contributes one instance per assignment of
/// outcomes to its signed measurements; those instances carry the product of
/// outcome signs. The group order and the instance order inside a group are
/// stable, so reductions over them are deterministic.
pub fn enumerate_subcircuits(
    circuit: &Circuit,
    plan: &CutPlan,
    observable: &[(usize, Pauli)],
) -> Result<CutExpansion> {
    circuit.validate()?;
    plan.validate(circuit)?;
    for (i, (q, _)) in observable.iter().enumerate() {
        if *q >= circuit.n_qubits {
            return Err(CoreError::InvalidArgument(format!(
                "observable qubit {q} out of range"
            )));
        }
        if observable[i + 1..].iter().any(|(other, _)| other == q) {
            return Err(CoreError::InvalidArgument(format!(
                "observable lists qubit {q} more than once"
            )));
        }
    }

    let skeleton = build_skeleton(circuit, plan);

    // Fragments: connected components over segments, linked by surviving
    // CNOTs. Cut sites never link. An empty plan keeps the original circuit
    // as one fragment, so its single instance reproduces the uncut
    // expectation unchanged even when the circuit happens to be disconnected.
    let mut uf = UnionFind::new(skeleton.n_segments);
    if plan.wire_cuts.is_empty() && plan.gate_cuts.is_empty() {
        for seg in 1..skeleton.n_segments {
            uf.union(0, seg);
        }
    }
    for slot in &skeleton.slots {
        if let Slot::Fixed(SegGate::Cnot { control, target }) = slot {
            uf.union(*control, *target);
        }
    }
    let mut fragment_of_segment = vec![usize::MAX; skeleton.n_segments];
    let mut local_index = vec![usize::MAX; skeleton.n_segments];
    let mut fragment_widths = Vec::new();
    for seg in 0..skeleton.n_segments {
        let root = uf.find(seg);
        if fragment_of_segment[root] == usize::MAX {
            fragment_of_segment[root] = fragment_widths.len();
            fragment_widths.push(0);
        }
        let fragment = fragment_of_segment[root];
        fragment_of_segment[seg] = fragment;
        local_index[seg] = fragment_widths[fragment];
        fragment_widths[fragment] += 1;
    }
    let n_fragments = fragment_widths.len();

    // Observable factors land on the final segment of their qubit.
    let mut fragment_observables: Vec<Vec<(usize, Pauli)>> = vec![Vec::new(); n_fragments];
    for &(q, p) in observable {
        let seg = skeleton.final_segment[q];
        fragment_observables[fragment_of_segment[seg]].push((local_index[seg], p));
    }

    let fragment_of_qubit: Vec<usize> = (0..circuit.n_qubits)
        .map(|q| fragment_of_segment[skeleton.final_segment[q]])
        .collect();

    let wire_terms = wire_cut_terms();
    let gate_terms = gate_cut_terms();
    let n_wire = plan.wire_cuts.len();
    let n_gate = plan.gate_cuts.len();
    let total = plan.combination_count();

    let mut groups = Vec::with_capacity(total);
    for combination in 0..total {
        // Mixed-radix digits: wire cuts first (plan order), then gate cuts;
        // the last cut varies fastest.
        let mut rem = combination;
        let mut gate_digits = vec![0usize; n_gate];
        for d in (0..n_gate).rev() {
            gate_digits[d] = rem % 6;
            rem /= 6;
        }
        let mut wire_digits = vec![0usize; n_wire];
        for d in (0..n_wire).rev() {
            wire_digits[d] = rem % 8;
            rem /= 8;
        }

        let mut coefficient = 1.0;
        for &d in &wire_digits {
            coefficient *= wire_terms[d].coefficient;
        }
        for &d in &gate_digits {
            coefficient *= gate_terms[d].coefficient;
        }

        // Build one template per fragment.
        let mut templates: Vec<Vec<TemplateGate>> = vec![Vec::new(); n_fragments];
        let push_local_ops =
            |templates: &mut Vec<Vec<TemplateGate>>, seg: usize, ops: &[LocalOp]| {
                let fragment = fragment_of_segment[seg];
                let q = local_index[seg];
                for op in ops {
                    templates[fragment].push(match op {
                        LocalOp::H => TemplateGate::Concrete(Gate::H(q)),
                        LocalOp::Rz(theta) => TemplateGate::Concrete(Gate::Rz(q, *theta)),
                        LocalOp::SignMeasureZ => TemplateGate::Branch { qubit: q, basis: Pauli::Z },
                    });
                }
            };

        for slot in &skeleton.slots {
            match slot {
                Slot::Fixed(SegGate::Single(seg, kind)) => {
                    let fragment = fragment_of_segment[*seg];
                    let q = local_index[*seg];
                    let gate = match *kind {
                        SingleKind::H => Gate::H(q),
                        SingleKind::Ry(t) => Gate::Ry(q, t),
                        SingleKind::Rz(t) => Gate::Rz(q, t),
                        SingleKind::Prepare(basis, sign) => Gate::Prepare { qubit: q, basis, sign },
                        SingleKind::MeasureCollapse(basis, outcome) => {
                            Gate::MeasureCollapse { qubit: q, basis, outcome }
                        }
                    };
                    templates[fragment].push(TemplateGate::Concrete(gate));
                }
                Slot::Fixed(SegGate::Cnot { control, target }) => {
                    let fragment = fragment_of_segment[*control];
                    debug_assert_eq!(fragment, fragment_of_segment[*target]);
                    templates[fragment].push(TemplateGate::Concrete(Gate::Cnot {
                        control: local_index[*control],
                        target: local_index[*target],
                    }));
                }
                Slot::WireCutSite { ordinal, upstream, downstream } => {
                    let term = &wire_terms[wire_digits[*ordinal]];
                    if let Some(basis) = term.measure {
                        templates[fragment_of_segment[*upstream]].push(TemplateGate::Branch {
                            qubit: local_index[*upstream],
                            basis,
                        });
                    }
                    templates[fragment_of_segment[*downstream]].push(TemplateGate::Concrete(
                        Gate::Prepare {
                            qubit: local_index[*downstream],
                            basis: term.prepare_basis,
                            sign: term.prepare_sign,
                        },
                    ));
                }
                Slot::GateCutSite { ordinal, control, target } => {
                    let term = &gate_terms[gate_digits[*ordinal]];
                    push_local_ops(&mut templates, *control, &term.control_ops);
                    push_local_ops(&mut templates, *target, &term.target_ops);
                }
            }
        }

        // Expand each fragment's signed measurements into outcome branches.
        let mut instances = Vec::new();
        for (fragment, template) in templates.iter().enumerate() {
            let branch_count = template
                .iter()
                .filter(|g| matches!(g, TemplateGate::Branch { .. }))
                .count();
            for assignment in 0..(1usize << branch_count) {
                let mut gates = Vec::with_capacity(template.len());
                let mut sign = 1.0;
                let mut branch = 0;
                for tg in template {
                    match tg {
                        TemplateGate::Concrete(g) => gates.push(*g),
                        TemplateGate::Branch { qubit, basis } => {
                            let outcome = if assignment >> branch & 1 == 0 {
                                Sign::Plus
                            } else {
                                sign = -sign;
                                Sign::Minus
                            };
                            gates.push(Gate::MeasureCollapse {
                                qubit: *qubit,
                                basis: *basis,
                                outcome,
                            });
                            branch += 1;
                        }
                    }
                }
                instances.push(SubcircuitInstance {
                    fragment,
                    sign,
                    circuit: Circuit { n_qubits: fragment_widths[fragment], gates },
                    observable: fragment_observables[fragment].clone(),
                });
            }
        }

        groups.push(CombinationGroup { coefficient, instances });
    }

    Ok(CutExpansion {
        n_fragments,
        fragment_widths,
        fragment_of_qubit,
        groups,
    })
}

/// Executes one fragment variant: the fragment circuit from |0…0⟩, returning
/// the accumulated branch weight and the observable expectation.
pub trait FragmentExecutor: Sync {
    fn execute(&self, circuit: &Circuit, observable: &[(usize, Pauli)]) -> Result<(f64, f64)>;
}

/// Exact dense-statevector executor.
#[derive(Debug, Clone, Copy, Default)]
pub struct StatevectorExecutor;

impl FragmentExecutor for StatevectorExecutor {
    fn execute(&self, circuit: &Circuit, observable: &[(usize, Pauli)]) -> Result<(f64, f64)> {
        let (state, weight) = run_circuit(circuit, &Statevector::zero(circuit.n_qubits))?;
        if weight == 0.0 {
            return Ok((0.0, 0.0));
        }
        let expectation = expectation_pauli_product(&state, observable)?;
        Ok((weight, expectation))
    }
}

/// Per-combination fragment values ready for reconstruction: for each group,
/// one value per fragment (the signed, weight-folded sum over that fragment's
/// instances).
pub fn execute_groups<E: FragmentExecutor>(
    expansion: &CutExpansion,
    executor: &E,
    policy: ExecPolicy,
) -> Result<Vec<Vec<f64>>> {
    policy.try_map_indexed(expansion.groups.len(), |g| {
        let group = &expansion.groups[g];
        let mut values = vec![0.0; expansion.n_fragments];
        for instance in &group.instances {
            let (weight, expectation) = executor
                .execute(&instance.circuit, &instance.observable)
                .map_err(|source| CoreError::ExecutorFailure {
                    combination: g,
                    source: Box::new(source),
                })?;
            values[instance.fragment] += instance.sign * weight * expectation;
        }
        Ok(values)
    })
}

/// Linear-combination reconstruction: Σ over combinations of the coefficient
/// times the product of fragment values, summed in stable combination order.
pub fn reconstruct(expansion: &CutExpansion, fragment_values: &[Vec<f64>]) -> Result<f64> {
    if fragment_values.len() != expansion.groups.len() {
        return Err(CoreError::IncompleteResults(format!(
            "{} combinations expected, {} provided",
            expansion.groups.len(),
            fragment_values.len()
        )));
    }
    let mut total = 0.0;
    for (group, values) in expansion.groups.iter().zip(fragment_values) {
        if values.len() != expansion.n_fragments {
            return Err(CoreError::IncompleteResults(format!(
                "{} fragment values expected, {} provided",
                expansion.n_fragments,
                values.len()
            )));
        }
        total += group.coefficient * values.iter().product::<f64>();
    }
    Ok(total)
}

/// Enumerates, executes every fragment variant through `executor`, and
/// reconstructs the observable expectation of the uncut circuit on |0…0⟩.
///
/// The result is independent of execution interleaving: group values are
/// reduced in stable combination order.
pub fn execute_cut<E: FragmentExecutor>(
    circuit: &Circuit,
    plan: &CutPlan,
    observable: &[(usize, Pauli)],
    executor: &E,
    policy: ExecPolicy,
) -> Result<f64> {
    let expansion = enumerate_subcircuits(circuit, plan, observable)?;
    let values = execute_groups(&expansion, executor, policy)?;
    reconstruct(&expansion, &values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uncut_expectation(circuit: &Circuit, observable: &[(usize, Pauli)]) -> f64 {
        let (state, weight) = run_circuit(circuit, &Statevector::zero(circuit.n_qubits)).unwrap();
        weight * expectation_pauli_product(&state, observable).unwrap()
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b}");
    }

    #[test]
    fn wire_cut_term_bookkeeping() {
        let mut circuit = Circuit::new(1);
        circuit.push(Gate::Rz(0, 0.0));
        let terms = expand_wire_cut(&circuit, WireCut { gate_index: 0, qubit: 0 }).unwrap();
        assert_eq!(terms.len(), 8);
        let magnitude: f64 = terms.iter().map(|t| t.coefficient.abs()).sum();
        assert_close(magnitude, 4.0, 1e-15);
    }

    #[test]
    fn gate_cut_term_bookkeeping() {
        let mut circuit = Circuit::new(2);
        circuit.push(Gate::H(0));
        circuit.push(Gate::Cnot { control: 0, target: 1 });
        let terms = expand_gate_cut(&circuit, 1).unwrap();
        assert_eq!(terms.len(), 6);
        let magnitude: f64 = terms.iter().map(|t| t.coefficient.abs()).sum();
        assert_close(magnitude, 3.0, 1e-15);
    }

    #[test]
    fn gate_cut_requires_cnot() {
        let mut circuit = Circuit::new(2);
        circuit.push(Gate::H(0));
        let err = expand_gate_cut(&circuit, 0);
        assert!(matches!(err, Err(CoreError::InvalidPlan(_))));
    }

    #[test]
    fn identity_wire_cut_reproduces_z() {
        // Single idle wire, literal identity gate so the cut has a location.
        let mut circuit = Circuit::new(1);
        circuit.push(Gate::Rz(0, 0.0));
        let plan = CutPlan { wire_cuts: vec![WireCut { gate_index: 0, qubit: 0 }], gate_cuts: vec![] };
        let value = execute_cut(
            &circuit,
            &plan,
            &[(0, Pauli::Z)],
            &StatevectorExecutor,
            ExecPolicy::default(),
        )
        .unwrap();
        assert_close(value, 1.0, 1e-12);
    }

    #[test]
    fn identity_wire_cut_reproduces_x_on_plus_state() {
        let mut circuit = Circuit::new(1);
        circuit.push(Gate::H(0));
        let plan = CutPlan { wire_cuts: vec![WireCut { gate_index: 0, qubit: 0 }], gate_cuts: vec![] };
        let value = execute_cut(
            &circuit,
            &plan,
            &[(0, Pauli::X)],
            &StatevectorExecutor,
            ExecPolicy::default(),
        )
        .unwrap();
        assert_close(value, 1.0, 1e-12);
    }

    #[test]
    fn bell_gate_cut_reproduces_correlations() {
        let mut circuit = Circuit::new(2);
        circuit.push(Gate::H(0));
        circuit.push(Gate::Cnot { control: 0, target: 1 });
        let plan = CutPlan { wire_cuts: vec![], gate_cuts: vec![1] };
        for observable in [
            vec![(0, Pauli::Z), (1, Pauli::Z)],
            vec![(0, Pauli::X), (1, Pauli::X)],
        ] {
            let value = execute_cut(
                &circuit,
                &plan,
                &observable,
                &StatevectorExecutor,
                ExecPolicy::default(),
            )
            .unwrap();
            assert_close(value, 1.0, 1e-9);
        }
    }

    #[test]
    fn combination_counts() {
        let mut circuit = Circuit::new(2);
        circuit.push(Gate::H(0));
        circuit.push(Gate::Cnot { control: 0, target: 1 });
        circuit.push(Gate::Ry(1, 0.4));
        let plan = CutPlan {
            wire_cuts: vec![WireCut { gate_index: 0, qubit: 0 }],
            gate_cuts: vec![1],
        };
        assert_eq!(plan.combination_count(), 48);
        let expansion = enumerate_subcircuits(&circuit, &plan, &[(1, Pauli::Z)]).unwrap();
        assert_eq!(expansion.groups.len(), 48);
        // Fig-4-shaped bookkeeping: one wire and two gates cut.
        let two_gate = CutPlan {
            wire_cuts: vec![WireCut { gate_index: 0, qubit: 0 }],
            gate_cuts: vec![1, 1],
        };
        assert_eq!(two_gate.combination_count(), 288);
    }

    #[test]
    fn empty_plan_matches_uncut_bit_for_bit() {
        let mut circuit = Circuit::new(3);
        circuit.push(Gate::H(0));
        circuit.push(Gate::Ry(1, 0.9));
        circuit.push(Gate::Cnot { control: 0, target: 1 });
        circuit.push(Gate::Cnot { control: 1, target: 2 });
        circuit.push(Gate::Rz(2, -0.3));
        let observable = [(0, Pauli::Z), (2, Pauli::X)];
        let direct = uncut_expectation(&circuit, &observable);
        let value = execute_cut(
            &circuit,
            &CutPlan::empty(),
            &observable,
            &StatevectorExecutor,
            ExecPolicy::default(),
        )
        .unwrap();
        assert_eq!(value, direct);
    }

    #[test]
    fn empty_plan_on_disconnected_circuit_stays_exact() {
        // Qubit 2 never entangles with the rest; the empty plan must still
        // execute the original circuit as a single instance.
        let mut circuit = Circuit::new(3);
        circuit.push(Gate::Ry(0, 0.4));
        circuit.push(Gate::Cnot { control: 0, target: 1 });
        circuit.push(Gate::Ry(2, 1.3));
        circuit.push(Gate::Rz(2, -0.6));
        let observable = [(1, Pauli::Z), (2, Pauli::X)];
        let expansion = enumerate_subcircuits(&circuit, &CutPlan::empty(), &observable).unwrap();
        assert_eq!(expansion.n_fragments, 1);
        assert_eq!(expansion.groups.len(), 1);
        assert_eq!(expansion.groups[0].instances.len(), 1);
        assert_eq!(expansion.groups[0].instances[0].circuit, circuit);
        let direct = uncut_expectation(&circuit, &observable);
        let value = execute_cut(
            &circuit,
            &CutPlan::empty(),
            &observable,
            &StatevectorExecutor,
            ExecPolicy::default(),
        )
        .unwrap();
        assert_eq!(value, direct);
    }

    #[test]
    fn gate_cut_splits_bridging_cnot_into_half_width_fragments() {
        // 2n qubits entangled inside each half, one bridging CNOT across.
        let n = 3;
        let mut circuit = Circuit::new(2 * n);
        for q in 0..2 * n {
            circuit.push(Gate::Ry(q, 0.3 + 0.1 * q as f64));
        }
        for q in 0..n - 1 {
            circuit.push(Gate::Cnot { control: q, target: q + 1 });
            circuit.push(Gate::Cnot { control: n + q, target: n + q + 1 });
        }
        let bridge = circuit.gates.len();
        circuit.push(Gate::Cnot { control: n - 1, target: n });
        let plan = CutPlan { wire_cuts: vec![], gate_cuts: vec![bridge] };
        let expansion =
            enumerate_subcircuits(&circuit, &plan, &[(0, Pauli::Z), (2 * n - 1, Pauli::Z)]).unwrap();
        assert_eq!(expansion.n_fragments, 2);
        assert_eq!(expansion.fragment_widths, vec![n, n]);
        let values = execute_groups(&expansion, &StatevectorExecutor, ExecPolicy::default()).unwrap();
        let reconstructed = reconstruct(&expansion, &values).unwrap();
        let direct = uncut_expectation(&circuit, &[(0, Pauli::Z), (2 * n - 1, Pauli::Z)]);
        assert_close(reconstructed, direct, 1e-9);
    }

    #[test]
    fn serial_and_parallel_execution_identical() {
        let mut circuit = Circuit::new(3);
        circuit.push(Gate::H(0));
        circuit.push(Gate::Cnot { control: 0, target: 1 });
        circuit.push(Gate::Ry(2, 1.1));
        circuit.push(Gate::Cnot { control: 1, target: 2 });
        let plan = CutPlan {
            wire_cuts: vec![WireCut { gate_index: 1, qubit: 1 }],
            gate_cuts: vec![3],
        };
        let observable = [(0, Pauli::Z), (2, Pauli::Z)];
        let serial = execute_cut(
            &circuit,
            &plan,
            &observable,
            &StatevectorExecutor,
            ExecPolicy::serial(),
        )
        .unwrap();
        let parallel = execute_cut(
            &circuit,
            &plan,
            &observable,
            &StatevectorExecutor,
            ExecPolicy::default(),
        )
        .unwrap();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn missing_results_rejected() {
        let mut circuit = Circuit::new(1);
        circuit.push(Gate::Rz(0, 0.0));
        let plan = CutPlan { wire_cuts: vec![WireCut { gate_index: 0, qubit: 0 }], gate_cuts: vec![] };
        let expansion = enumerate_subcircuits(&circuit, &plan, &[(0, Pauli::Z)]).unwrap();
        let err = reconstruct(&expansion, &[]);
        assert!(matches!(err, Err(CoreError::IncompleteResults(_))));
    }
}
