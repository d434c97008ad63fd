//! SLO-aware placement policy: greedy minimum predicted completion over
//! feasible placements, with the quantum branch handling of the inference
//! flow (skip the quantum stage when it is optional and infeasible, forward
//! to the cloud when it is mandatory, reject when even that fails).

use crate::error::{Result, SimError};
use crate::qplan::{plan_quantum_execution, quantum_service_scale, QuantumExecution};
use crate::types::{Domain, NodeSpec, Request, Unit, UnitKind};

/// Symmetric inter-domain transfer times; payload adds a linear term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferModel {
    pub edge_fog_ms: f64,
    pub fog_cloud_ms: f64,
    pub edge_cloud_ms: f64,
    pub intra_ms: f64,
    pub per_payload_ms: f64,
}

impl TransferModel {
    pub fn time(&self, from: Domain, to: Domain, payload: f64) -> f64 {
        use Domain::{Cloud, Edge, Fog};
        let base = match (from, to) {
            (Edge, Fog) | (Fog, Edge) => self.edge_fog_ms,
            (Fog, Cloud) | (Cloud, Fog) => self.fog_cloud_ms,
            (Edge, Cloud) | (Cloud, Edge) => self.edge_cloud_ms,
            _ => return self.intra_ms,
        };
        base + self.per_payload_ms * payload
    }
}

/// Scheduler-visible view of one node.
#[derive(Debug, Clone, Copy)]
pub struct NodeView<'a> {
    pub spec: &'a NodeSpec,
    /// Earliest time a service slot frees up (now, if idle or unlimited).
    pub earliest_free_ms: f64,
    pub outaged: bool,
}

/// Scheduler-visible cluster state.
#[derive(Debug, Clone, Copy)]
pub struct ClusterState<'a> {
    pub now_ms: f64,
    /// Sorted by node id; indices identify nodes.
    pub nodes: &'a [NodeView<'a>],
    pub transfer: &'a TransferModel,
}

impl ClusterState<'_> {
    fn check(&self) -> Result<()> {
        if !self.now_ms.is_finite() {
            return Err(SimError::Integrity("clock is not finite".into()));
        }
        for view in self.nodes {
            if !view.earliest_free_ms.is_finite() {
                return Err(SimError::Integrity(format!(
                    "node {} has a non-finite queue horizon",
                    view.spec.id
                )));
            }
        }
        Ok(())
    }
}

/// A concrete placement choice.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    /// Index into the alternatives slice passed to [`route`].
    pub alternative: usize,
    /// Node index in the cluster state.
    pub node: usize,
    pub transfer_ms: f64,
    pub service_ms: f64,
    pub predicted_completion_ms: f64,
    pub execution: Option<QuantumExecution>,
    pub forwarded_to_cloud: bool,
    pub within_budget: bool,
    /// Quantum alternatives existed but the quality target was already met by
    /// the classical path.
    pub qnn_bypassed: bool,
}

/// Outcome of one routing decision.
#[derive(Debug, Clone, PartialEq)]
pub enum RouteDecision {
    Place(Placement),
    /// Advance past the quantum stage. `forced` distinguishes an
    /// infeasibility skip (quantum wanted, none feasible, SLO allows it)
    /// from a quality-met bypass.
    SkipQnn { forced: bool },
    Reject { reason: String },
    /// No node can serve any classical alternative.
    NoNode { reason: String },
}

struct Candidate {
    alternative: usize,
    node: usize,
    transfer_ms: f64,
    service_ms: f64,
    predicted_ms: f64,
    execution: Option<QuantumExecution>,
}

fn candidates_for<'a>(
    request: &Request,
    from: Domain,
    alternatives: &[(usize, &'a Unit)],
    cluster: &ClusterState<'_>,
    quantum: bool,
) -> Result<Vec<Candidate>> {
    let mut out = Vec::new();
    for (alt_pos, (_, unit)) in alternatives.iter().enumerate() {
        if (unit.kind == UnitKind::QuantumWidthwise) != quantum {
            continue;
        }
        for (node_index, view) in cluster.nodes.iter().enumerate() {
            let spec = view.spec;
            if view.outaged
                || !unit.domains.contains(&spec.domain)
                || !unit.resources.contains(&spec.resource)
            {
                continue;
            }
            let Some(&base_ms) = spec.service_ms.get(&unit.id) else {
                continue;
            };
            let execution = if quantum {
                match plan_quantum_execution(unit, spec) {
                    Ok(execution) => Some(execution),
                    Err(SimError::InfeasibleUnit(_)) => continue,
                    Err(other) => return Err(other),
                }
            } else {
                None
            };
            let scale = execution
                .map(|e| quantum_service_scale(e, spec.cluster_parallelism))
                .unwrap_or(1.0);
            let transfer_ms = cluster.transfer.time(from, spec.domain, request.payload_size);
            let service_ms = base_ms * request.payload_size * scale;
            let start = (cluster.now_ms + transfer_ms).max(view.earliest_free_ms);
            out.push(Candidate {
                alternative: alt_pos,
                node: node_index,
                transfer_ms,
                service_ms,
                predicted_ms: start + service_ms,
                execution,
            });
        }
    }
    Ok(out)
}

fn pick_best(candidates: Vec<Candidate>) -> Option<Candidate> {
    // Minimum predicted completion; ties break toward the lowest node id,
    // which is the node index since the cluster is sorted by id.
    candidates.into_iter().min_by(|a, b| {
        a.predicted_ms
            .total_cmp(&b.predicted_ms)
            .then(a.node.cmp(&b.node))
    })
}

/// Routes a request standing at `from` toward one of the alternative next
/// units.
///
/// `classical_path_quality` is the best quality reachable without any
/// quantum unit (`None` when every path goes through one); the quantum stage
/// is wanted whenever the request's quality target exceeds it.
pub fn route(
    request: &Request,
    from: Domain,
    alternatives: &[(usize, &Unit)],
    cluster: &ClusterState<'_>,
    classical_path_quality: Option<f64>,
) -> Result<RouteDecision> {
    cluster.check()?;
    if alternatives.is_empty() {
        return Err(SimError::Integrity("routing with no alternative units".into()));
    }
    let deadline = request.arrival_time_ms + request.slo.latency_budget_ms;
    let has_quantum =
        alternatives.iter().any(|(_, u)| u.kind == UnitKind::QuantumWidthwise);
    let has_classical =
        alternatives.iter().any(|(_, u)| u.kind != UnitKind::QuantumWidthwise);
    let wants_qnn = classical_path_quality
        .map_or(true, |q| request.slo.quality_target > q + 1e-12);

    if has_quantum && wants_qnn {
        let candidates = candidates_for(request, from, alternatives, cluster, true)?;
        let feasible: Vec<Candidate> =
            candidates.into_iter().filter(|c| c.predicted_ms <= deadline).collect();
        if let Some(best) = pick_best(feasible) {
            return Ok(RouteDecision::Place(Placement {
                alternative: best.alternative,
                node: best.node,
                transfer_ms: best.transfer_ms,
                service_ms: best.service_ms,
                predicted_completion_ms: best.predicted_ms,
                execution: best.execution,
                forwarded_to_cloud: false,
                within_budget: true,
                qnn_bypassed: false,
            }));
        }
        if request.slo.quantum_optional {
            return Ok(RouteDecision::SkipQnn { forced: true });
        }
        // Mandatory quantum stage: forward to the cloud even over budget.
        let cloud: Vec<Candidate> = candidates_for(request, from, alternatives, cluster, true)?
            .into_iter()
            .filter(|c| cluster.nodes[c.node].spec.domain == Domain::Cloud)
            .collect();
        return match pick_best(cloud) {
            Some(best) => Ok(RouteDecision::Place(Placement {
                alternative: best.alternative,
                node: best.node,
                transfer_ms: best.transfer_ms,
                service_ms: best.service_ms,
                predicted_completion_ms: best.predicted_ms,
                execution: best.execution,
                forwarded_to_cloud: true,
                within_budget: best.predicted_ms <= deadline,
                qnn_bypassed: false,
            })),
            None => Ok(RouteDecision::Reject {
                reason: "quantum stage mandatory but no quantum node available".into(),
            }),
        };
    }

    if has_quantum && !wants_qnn && !has_classical {
        // Quality already met: hop over the quantum stage.
        return Ok(RouteDecision::SkipQnn { forced: false });
    }

    let candidates = candidates_for(request, from, alternatives, cluster, false)?;
    if candidates.is_empty() {
        return Ok(RouteDecision::NoNode {
            reason: "no available node serves any alternative unit".into(),
        });
    }
    let (feasible, infeasible): (Vec<Candidate>, Vec<Candidate>) =
        candidates.into_iter().partition(|c| c.predicted_ms <= deadline);
    let within_budget = !feasible.is_empty();
    let best = pick_best(if within_budget { feasible } else { infeasible })
        .expect("candidate list is non-empty");
    Ok(RouteDecision::Place(Placement {
        alternative: best.alternative,
        node: best.node,
        transfer_ms: best.transfer_ms,
        service_ms: best.service_ms,
        predicted_completion_ms: best.predicted_ms,
        execution: best.execution,
        forwarded_to_cloud: false,
        within_budget,
        qnn_bypassed: has_quantum && !wants_qnn,
    }))
}
