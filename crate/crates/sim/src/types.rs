//! Domain vocabulary of the continuum: nodes, service-level objectives,
//! requests, deployment-unit graphs and warm-start steps.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Edge,
    Fog,
    Cloud,
}

impl Domain {
    pub fn label(self) -> &'static str {
        match self {
            Domain::Edge => "edge",
            Domain::Fog => "fog",
            Domain::Cloud => "cloud",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resource {
    Cpu,
    Tpu,
    Gpu,
    Qpu,
    Mqpu,
}

impl Resource {
    pub fn is_quantum(self) -> bool {
        matches!(self, Resource::Qpu | Resource::Mqpu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grade {
    Mobile,
    Server,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityClass {
    VeryLow,
    Low,
    Medium,
    High,
    Unlimited,
}

/// One continuum node. Service times are per deployment unit / warm-start
/// stage, in mean milliseconds, scaled by request payload.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub id: String,
    pub domain: Domain,
    pub resource: Resource,
    pub grade: Grade,
    pub capacity: CapacityClass,
    pub service_ms: BTreeMap<String, f64>,
    /// Quantum nodes only.
    pub max_qubits: u32,
    pub outage_rate_per_hour: f64,
    pub outage_duration_ms: f64,
    /// Edge nodes only; warm-start steps drain it.
    pub energy_budget: f64,
    /// Co-located device count available for parallel subcircuit execution.
    pub cluster_parallelism: u32,
    /// Warm-start scenarios: which client this edge node belongs to.
    pub client: Option<String>,
}

impl NodeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.resource.is_quantum() && self.max_qubits == 0 {
            return Err(SimError::InvalidConfig(format!(
                "node {}: quantum resource requires max_qubits >= 1",
                self.id
            )));
        }
        if self.resource == Resource::Mqpu && self.grade != Grade::Mobile {
            return Err(SimError::InvalidConfig(format!(
                "node {}: mqpu is mobile-grade hardware",
                self.id
            )));
        }
        if self.cluster_parallelism == 0 {
            return Err(SimError::InvalidConfig(format!(
                "node {}: cluster_parallelism must be >= 1",
                self.id
            )));
        }
        if self.energy_budget > 0.0 && self.domain != Domain::Edge {
            return Err(SimError::InvalidConfig(format!(
                "node {}: energy budgets apply to edge nodes only",
                self.id
            )));
        }
        Ok(())
    }
}

/// Per-request service-level objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SloSpec {
    pub latency_budget_ms: f64,
    /// Abstract expected solution quality / warm-start intensity in [0, 1].
    pub quality_target: f64,
    pub quantum_optional: bool,
}

impl SloSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.latency_budget_ms > 0.0) {
            return Err(SimError::InvalidConfig("latency_budget_ms must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.quality_target) {
            return Err(SimError::InvalidConfig("quality_target must be in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Representation a request currently carries; transitions only move forward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    RawClassical,
    NeuralFeatures,
    QuantumReady,
    Classified,
}

/// A simulated inference request.
#[derive(Debug, Clone, PartialEq)]
pub struct Request {
    pub id: u64,
    pub client_id: String,
    pub arrival_time_ms: f64,
    pub slo: SloSpec,
    pub stage: Stage,
    /// Abstract size driving transfer and service scaling.
    pub payload_size: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitKind {
    ClassicalDepthwise,
    QuantumWidthwise,
}

/// One deployment unit of the partition graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Unit {
    pub id: String,
    pub kind: UnitKind,
    pub domains: Vec<Domain>,
    pub resources: Vec<Resource>,
    pub output_stage: Stage,
    /// Contribution to the abstract solution quality.
    pub quality_gain: f64,
    /// Quantum units: circuit width and variational depth.
    pub width: u32,
    pub depth: u32,
}

/// Directed deployment-unit graph with branch alternatives.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PartitionGraph {
    pub units: Vec<Unit>,
    /// edges[i] lists the alternative successors of unit i.
    pub edges: Vec<Vec<usize>>,
}

impl PartitionGraph {
    pub fn unit_index(&self, id: &str) -> Option<usize> {
        self.units.iter().position(|u| u.id == id)
    }

    pub fn source(&self) -> Result<usize> {
        let mut has_incoming = vec![false; self.units.len()];
        for next in self.edges.iter().flatten() {
            has_incoming[*next] = true;
        }
        let sources: Vec<usize> =
            (0..self.units.len()).filter(|&u| !has_incoming[u]).collect();
        match sources.as_slice() {
            [one] => Ok(*one),
            [] => Err(SimError::InvalidConfig("partition graph has no source unit".into())),
            many => Err(SimError::InvalidConfig(format!(
                "partition graph has {} source units; exactly one is required",
                many.len()
            ))),
        }
    }

    /// Acyclicity, a single source, and every unit on a path to a classified
    /// sink.
    pub fn validate(&self) -> Result<()> {
        if self.units.is_empty() {
            return Err(SimError::InvalidConfig("partition graph has no units".into()));
        }
        // Kahn's algorithm for the cycle check.
        let mut indegree = vec![0usize; self.units.len()];
        for next in self.edges.iter().flatten() {
            indegree[*next] += 1;
        }
        let mut ready: Vec<usize> =
            (0..self.units.len()).filter(|&u| indegree[u] == 0).collect();
        let mut visited = 0;
        while let Some(u) = ready.pop() {
            visited += 1;
            for &next in &self.edges[u] {
                indegree[next] -= 1;
                if indegree[next] == 0 {
                    ready.push(next);
                }
            }
        }
        if visited != self.units.len() {
            return Err(SimError::InvalidConfig("partition graph contains a cycle".into()));
        }
        let source = self.source()?;

        // Reachability from the source and to a sink.
        let mut reachable = vec![false; self.units.len()];
        let mut stack = vec![source];
        while let Some(u) = stack.pop() {
            if std::mem::replace(&mut reachable[u], true) {
                continue;
            }
            stack.extend(self.edges[u].iter().copied());
        }
        for (u, unit) in self.units.iter().enumerate() {
            if !reachable[u] {
                return Err(SimError::InvalidConfig(format!(
                    "unit {} is unreachable from the source",
                    unit.id
                )));
            }
            if self.edges[u].is_empty() && unit.output_stage != Stage::Classified {
                return Err(SimError::InvalidConfig(format!(
                    "sink unit {} does not classify",
                    unit.id
                )));
            }
            if unit.kind == UnitKind::QuantumWidthwise {
                if unit.width == 0 {
                    return Err(SimError::InvalidConfig(format!(
                        "quantum unit {} needs a circuit width",
                        unit.id
                    )));
                }
                if !unit.resources.iter().all(|r| r.is_quantum()) {
                    return Err(SimError::InvalidConfig(format!(
                        "quantum unit {} lists a non-quantum resource",
                        unit.id
                    )));
                }
            }
        }
        Ok(())
    }

    /// Greatest total quality gain achievable on a source→sink path that
    /// avoids quantum units; `None` when no quantum-free path exists.
    pub fn classical_path_quality(&self) -> Option<f64> {
        let source = self.source().ok()?;
        // Memoized DFS over the DAG.
        fn best(graph: &PartitionGraph, u: usize, memo: &mut Vec<Option<Option<f64>>>) -> Option<f64> {
            if graph.units[u].kind == UnitKind::QuantumWidthwise {
                return None;
            }
            if let Some(cached) = memo[u] {
                return cached;
            }
            let gain = graph.units[u].quality_gain;
            let result = if graph.edges[u].is_empty() {
                Some(gain)
            } else {
                graph.edges[u]
                    .iter()
                    .filter_map(|&next| best(graph, next, memo))
                    .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
                    .map(|suffix| gain + suffix)
            };
            memo[u] = Some(result);
            result
        }
        let mut memo = vec![None; self.units.len()];
        best(self, source, &mut memo)
    }
}

/// Warm-start step categories, named by input/output representation
/// (C classical, N neural, Q quantum-ready).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum StepKind {
    C2Q,
    Q2Q,
    Q2C,
    C2N,
    N2Q,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Classical,
    Neural,
    QuantumReady,
}

impl StepKind {
    pub fn input(self) -> DataFormat {
        match self {
            StepKind::C2Q | StepKind::C2N => DataFormat::Classical,
            StepKind::N2Q => DataFormat::Neural,
            StepKind::Q2Q | StepKind::Q2C => DataFormat::QuantumReady,
        }
    }

    pub fn output(self) -> DataFormat {
        match self {
            StepKind::C2N => DataFormat::Neural,
            StepKind::Q2C => DataFormat::Classical,
            StepKind::C2Q | StepKind::N2Q | StepKind::Q2Q => DataFormat::QuantumReady,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StepKind::C2Q => "C2Q",
            StepKind::Q2Q => "Q2Q",
            StepKind::Q2C => "Q2C",
            StepKind::C2N => "C2N",
            StepKind::N2Q => "N2Q",
        }
    }
}

/// One warm-start pipeline step.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmStartStep {
    pub kind: StepKind,
    pub resource: Resource,
    pub intensity_gain: f64,
    pub service_ms: f64,
    pub energy_cost: f64,
}

/// Chain compatibility: each step's output format feeds the next step's
/// input; the first step consumes the request's classical representation.
pub fn validate_pipeline(steps: &[WarmStartStep]) -> Result<()> {
    let mut format = DataFormat::Classical;
    for (i, step) in steps.iter().enumerate() {
        if step.kind.input() != format {
            return Err(SimError::InvalidPipeline(format!(
                "step {i} ({}) expects {:?} input but the chain carries {:?}",
                step.kind.label(),
                step.kind.input(),
                format
            )));
        }
        if !(0.0..=1.0).contains(&step.intensity_gain) {
            return Err(SimError::InvalidPipeline(format!(
                "step {i}: intensity_gain must be in [0, 1]"
            )));
        }
        format = step.kind.output();
    }
    Ok(())
}
