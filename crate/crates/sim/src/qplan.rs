//! Fitting a quantum deployment unit onto a quantum node: direct execution
//! when the circuit width fits, otherwise widthwise cutting with the cut
//! counts of the brick-wall circuit template.

use crate::error::{Result, SimError};
use crate::types::{NodeSpec, Unit, UnitKind};

/// How a quantum unit executes on a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantumExecution {
    Direct,
    Cut { wire_cuts: u32, gate_cuts: u32, fragment_width: u32, combinations: u64 },
}

impl QuantumExecution {
    pub fn combinations(self) -> u64 {
        match self {
            QuantumExecution::Direct => 1,
            QuantumExecution::Cut { combinations, .. } => combinations,
        }
    }
}

/// Decides direct vs cut execution of `unit` on `node`.
///
/// Cutting places fragment boundaries every `max_qubits` wires. The template
/// circuit entangles neighbors in a brick-wall pattern, so a boundary after
/// wire `b` is crossed once per layer of matching parity: gate-cutting those
/// CNOTs splits the unit into fragments of width at most `max_qubits`.
/// Single-qubit nodes cannot host any two-qubit fragment, so widths above one
/// are infeasible there.
pub fn plan_quantum_execution(unit: &Unit, node: &NodeSpec) -> Result<QuantumExecution> {
    if unit.kind != UnitKind::QuantumWidthwise {
        return Err(SimError::InvalidArgument(format!(
            "unit {} is not quantum-widthwise capable",
            unit.id
        )));
    }
    if !node.resource.is_quantum() {
        return Err(SimError::InvalidArgument(format!(
            "node {} is not a quantum resource",
            node.id
        )));
    }
    let width = unit.width;
    let max = node.max_qubits;
    if width <= max {
        return Ok(QuantumExecution::Direct);
    }
    if max < 2 {
        return Err(SimError::InfeasibleUnit(format!(
            "unit {} of width {width} cannot fragment onto node {} with max_qubits {max}",
            unit.id, node.id
        )));
    }
    let even_layers = unit.depth.div_ceil(2);
    let odd_layers = unit.depth / 2;
    let mut gate_cuts: u32 = 0;
    let mut boundary = max - 1;
    while boundary < width - 1 {
        gate_cuts += if boundary % 2 == 0 { even_layers } else { odd_layers };
        boundary += max;
    }
    let combinations = 6u64.checked_pow(gate_cuts).ok_or_else(|| {
        SimError::InfeasibleUnit(format!(
            "unit {} on node {}: {gate_cuts} gate cuts overflow the combination count",
            unit.id, node.id
        ))
    })?;
    Ok(QuantumExecution::Cut { wire_cuts: 0, gate_cuts, fragment_width: max, combinations })
}

/// Cut execution takes `combinations / min(parallelism, combinations)` times
/// the base service time; direct execution takes the base time.
pub fn quantum_service_scale(execution: QuantumExecution, cluster_parallelism: u32) -> f64 {
    let combinations = execution.combinations();
    let parallel = (cluster_parallelism.max(1) as u64).min(combinations);
    combinations as f64 / parallel as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{CapacityClass, Domain, Grade, Resource, Stage};
    use std::collections::BTreeMap;

    fn quantum_unit(width: u32, depth: u32) -> Unit {
        Unit {
            id: "embed".into(),
            kind: UnitKind::QuantumWidthwise,
            domains: vec![Domain::Fog],
            resources: vec![Resource::Qpu, Resource::Mqpu],
            output_stage: Stage::QuantumReady,
            quality_gain: 0.4,
            width,
            depth,
        }
    }

    fn quantum_node(max_qubits: u32, parallelism: u32) -> NodeSpec {
        NodeSpec {
            id: "fog-mqpu-0".into(),
            domain: Domain::Fog,
            resource: Resource::Mqpu,
            grade: Grade::Mobile,
            capacity: CapacityClass::Low,
            service_ms: BTreeMap::new(),
            max_qubits,
            outage_rate_per_hour: 0.0,
            outage_duration_ms: 0.0,
            energy_budget: 0.0,
            cluster_parallelism: parallelism,
            client: None,
        }
    }

    #[test]
    fn width_within_capacity_runs_direct() {
        let plan = plan_quantum_execution(&quantum_unit(4, 2), &quantum_node(4, 1)).unwrap();
        assert_eq!(plan, QuantumExecution::Direct);
    }

    #[test]
    fn oversized_unit_is_cut_to_fragments() {
        // Width 4 on a 2-qubit device: one boundary after wire 1 (odd), so the
        // odd layer's shifted CNOT is the only crossing at depth 2.
        let plan = plan_quantum_execution(&quantum_unit(4, 2), &quantum_node(2, 1)).unwrap();
        match plan {
            QuantumExecution::Cut { gate_cuts, fragment_width, combinations, .. } => {
                assert_eq!(gate_cuts, 1);
                assert_eq!(fragment_width, 2);
                assert_eq!(combinations, 6);
            }
            other => panic!("expected cut mode, got {other:?}"),
        }
    }

    #[test]
    fn single_qubit_device_cannot_fragment() {
        let err = plan_quantum_execution(&quantum_unit(10, 2), &quantum_node(1, 1));
        assert!(matches!(err, Err(SimError::InfeasibleUnit(_))));
    }

    #[test]
    fn parallelism_divides_cut_service_time() {
        let plan = plan_quantum_execution(&quantum_unit(4, 2), &quantum_node(2, 1)).unwrap();
        assert_eq!(quantum_service_scale(plan, 1), 6.0);
        assert_eq!(quantum_service_scale(plan, 3), 2.0);
        assert_eq!(quantum_service_scale(plan, 100), 1.0);
        assert_eq!(quantum_service_scale(QuantumExecution::Direct, 4), 1.0);
    }
}
