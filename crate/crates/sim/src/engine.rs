//! Deterministic discrete-event engine for the inference flow and the
//! warm-start scenarios.
//!
//! Events are ordered by (time, insertion sequence); every data-dependent
//! iteration runs over id-sorted nodes, so identical scenarios and seeds
//! produce identical traces byte for byte.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SimError};
use crate::qplan::{plan_quantum_execution, quantum_service_scale};
use crate::routing::{route, ClusterState, NodeView, RouteDecision, TransferModel};
use crate::trace::{metrics_from_trace, Metrics, Trace};
use crate::types::{
    CapacityClass, Domain, NodeSpec, PartitionGraph, Request, SloSpec, Stage, Unit, UnitKind,
    WarmStartStep,
};
use crate::warmstart::{apply_warmstart_chain, ChainPlan};

/// Slot counts per capacity class; 0 means unlimited.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CapacitySlots {
    pub very_low: u32,
    pub low: u32,
    pub medium: u32,
    pub high: u32,
    pub unlimited: u32,
}

impl Default for CapacitySlots {
    fn default() -> Self {
        Self { very_low: 1, low: 2, medium: 4, high: 8, unlimited: 0 }
    }
}

impl CapacitySlots {
    pub fn slots_for(&self, class: CapacityClass) -> u32 {
        match class {
            CapacityClass::VeryLow => self.very_low,
            CapacityClass::Low => self.low,
            CapacityClass::Medium => self.medium,
            CapacityClass::High => self.high,
            CapacityClass::Unlimited => self.unlimited,
        }
    }
}

/// One request to simulate.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkItem {
    pub arrival_ms: f64,
    pub client_id: String,
    pub slo: SloSpec,
    pub payload: f64,
}

/// Warm-start scenario description: the registered pipeline, fog fallback
/// steps, and the final quantum task executed at the cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmstartSpec {
    pub steps: Vec<WarmStartStep>,
    pub fallback: Vec<WarmStartStep>,
    pub final_task: Unit,
}

/// A node's unavailability window (already merged with overlapping windows).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageWindow {
    pub node: usize,
    pub start_ms: f64,
    pub end_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    Inference,
    Warmstart,
}

/// A validated, fully materialized scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub mode: SimMode,
    /// Sorted ascending by node id.
    pub nodes: Vec<NodeSpec>,
    pub capacity: CapacitySlots,
    pub transfer: TransferModel,
    pub graph: Option<PartitionGraph>,
    pub warmstart: Option<WarmstartSpec>,
    pub workload: Vec<WorkItem>,
    pub outages: Vec<OutageWindow>,
    pub seed: u64,
    pub service_jitter: bool,
    /// Monitoring granularity: per-hop routing records are emitted for every
    /// k-th request only (1 = all).
    pub trace_sample_rate: u64,
}

/// Merges overlapping or touching unavailability windows per node.
pub fn merge_outages(mut windows: Vec<OutageWindow>) -> Vec<OutageWindow> {
    windows.sort_by(|a, b| {
        a.node
            .cmp(&b.node)
            .then(a.start_ms.total_cmp(&b.start_ms))
            .then(a.end_ms.total_cmp(&b.end_ms))
    });
    let mut merged: Vec<OutageWindow> = Vec::new();
    for w in windows {
        match merged.last_mut() {
            Some(last) if last.node == w.node && w.start_ms <= last.end_ms => {
                last.end_ms = last.end_ms.max(w.end_ms);
            }
            _ => merged.push(w),
        }
    }
    merged
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum UnitRef {
    Graph(usize),
    WarmStep(usize),
    WarmFinal,
}

#[derive(Debug, Clone)]
enum EventKind {
    Arrival { req: usize },
    TransferDone { req: usize, node: usize, unit: UnitRef, generation: u32 },
    ServiceStart { req: usize, node: usize, unit: UnitRef, generation: u32 },
    ServiceDone { req: usize, node: usize, unit: UnitRef, generation: u32 },
    OutageStart { node: usize, end_ms: f64 },
    OutageEnd { node: usize },
}

struct Event {
    time_ms: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.time_ms.total_cmp(&other.time_ms).then(self.seq.cmp(&other.seq))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Terminal {
    Classified,
    Rejected,
    Failed,
}

struct RequestRt {
    item: WorkItem,
    stage: Stage,
    location: Domain,
    /// Last completed graph unit.
    current_unit: Option<usize>,
    generation: u32,
    pending_node: Option<usize>,
    terminal: Option<Terminal>,
    warm: Option<WarmRt>,
}

struct WarmRt {
    plan: ChainPlan,
    next: usize,
}

struct NodeRt {
    /// Free-at times per slot; `None` = unlimited capacity.
    slots: Option<Vec<f64>>,
    outaged: bool,
}

impl NodeRt {
    fn earliest_free(&self, now: f64) -> f64 {
        match &self.slots {
            None => now,
            Some(slots) => slots.iter().cloned().fold(f64::INFINITY, f64::min).max(now),
        }
    }

    fn reserve(&mut self, now: f64, duration: f64) -> f64 {
        match &mut self.slots {
            None => now,
            Some(slots) => {
                let mut best = 0;
                for i in 1..slots.len() {
                    if slots[i] < slots[best] {
                        best = i;
                    }
                }
                let start = slots[best].max(now);
                slots[best] = start + duration;
                start
            }
        }
    }

    fn reset_until(&mut self, time: f64) {
        if let Some(slots) = &mut self.slots {
            for s in slots.iter_mut() {
                *s = time;
            }
        }
    }
}

struct Engine<'a> {
    scenario: &'a Scenario,
    heap: BinaryHeap<Reverse<Event>>,
    seq: u64,
    now: f64,
    trace: Trace,
    requests: Vec<RequestRt>,
    nodes: Vec<NodeRt>,
    energy: Vec<f64>,
    classical_quality: Option<f64>,
}

impl<'a> Engine<'a> {
    fn new(scenario: &'a Scenario) -> Result<Self> {
        let nodes = scenario
            .nodes
            .iter()
            .map(|spec| {
                let count = scenario.capacity.slots_for(spec.capacity);
                NodeRt {
                    slots: (count > 0).then(|| vec![0.0; count as usize]),
                    outaged: false,
                }
            })
            .collect();
        let energy = scenario.nodes.iter().map(|n| n.energy_budget).collect();
        let classical_quality =
            scenario.graph.as_ref().and_then(|g| g.classical_path_quality());
        Ok(Self {
            scenario,
            heap: BinaryHeap::new(),
            seq: 0,
            now: 0.0,
            trace: Trace::default(),
            requests: Vec::new(),
            nodes,
            energy,
            classical_quality,
        })
    }

    fn push(&mut self, time_ms: f64, kind: EventKind) {
        let seq = self.seq;
        self.seq += 1;
        self.heap.push(Reverse(Event { time_ms, seq, kind }));
    }

    fn node_id(&self, node: usize) -> &str {
        &self.scenario.nodes[node].id
    }

    fn request_view(&self, req: usize) -> Request {
        let rt = &self.requests[req];
        Request {
            id: req as u64,
            client_id: rt.item.client_id.clone(),
            arrival_time_ms: rt.item.arrival_ms,
            slo: rt.item.slo,
            stage: rt.stage,
            payload_size: rt.item.payload,
        }
    }

    fn sampled(&self, req: usize) -> bool {
        req as u64 % self.scenario.trace_sample_rate.max(1) == 0
    }

    /// Deterministic service jitter independent of event interleaving.
    fn jitter(&self, req: usize, salt: u64) -> f64 {
        if !self.scenario.service_jitter {
            return 1.0;
        }
        let key = self
            .scenario
            .seed
            .wrapping_mul(0x9E3779B97F4A7C15)
            .wrapping_add((req as u64) << 17)
            .wrapping_add(salt);
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        let u: f64 = rng.gen_range(0.0..1.0);
        -(1.0 - u).ln()
    }

    fn service_duration(&self, req: usize, node: usize, unit: UnitRef) -> Result<f64> {
        let spec = &self.scenario.nodes[node];
        let payload = self.requests[req].item.payload;
        let (base, scale, salt) = match unit {
            UnitRef::Graph(u) => {
                let graph_unit = &self.scenario.graph.as_ref().unwrap().units[u];
                let base = *spec.service_ms.get(&graph_unit.id).ok_or_else(|| {
                    SimError::Integrity(format!(
                        "node {} has no service time for unit {}",
                        spec.id, graph_unit.id
                    ))
                })?;
                let scale = if graph_unit.kind == UnitKind::QuantumWidthwise {
                    let plan = plan_quantum_execution(graph_unit, spec)?;
                    quantum_service_scale(plan, spec.cluster_parallelism)
                } else {
                    1.0
                };
                (base * payload, scale, u as u64)
            }
            UnitRef::WarmStep(i) => {
                let rt = self.requests[req].warm.as_ref().expect("warm request");
                (rt.plan.placements[i].service_ms, 1.0, 1000 + i as u64)
            }
            UnitRef::WarmFinal => {
                let task = &self.scenario.warmstart.as_ref().unwrap().final_task;
                let base = *spec.service_ms.get(&task.id).ok_or_else(|| {
                    SimError::Integrity(format!(
                        "node {} has no service time for the final task",
                        spec.id
                    ))
                })?;
                let plan = plan_quantum_execution(task, spec)?;
                (base * payload, quantum_service_scale(plan, spec.cluster_parallelism), 2000)
            }
        };
        Ok(base * scale * self.jitter(req, salt))
    }

    fn unit_label(&self, unit: UnitRef) -> String {
        match unit {
            UnitRef::Graph(u) => self.scenario.graph.as_ref().unwrap().units[u].id.clone(),
            UnitRef::WarmStep(_) => "warm".into(),
            UnitRef::WarmFinal => self.scenario.warmstart.as_ref().unwrap().final_task.id.clone(),
        }
    }

    fn current_alternatives(&self, req: usize) -> Vec<usize> {
        let graph = self.scenario.graph.as_ref().expect("inference mode");
        match self.requests[req].current_unit {
            None => vec![graph.source().expect("validated graph")],
            Some(u) => graph.edges[u].clone(),
        }
    }

    fn finish(&mut self, req: usize, terminal: Terminal) {
        self.requests[req].terminal = Some(terminal);
        self.requests[req].pending_node = None;
    }

    fn classify(&mut self, req: usize, node: usize) {
        let latency = self.now - self.requests[req].item.arrival_ms;
        let violated = latency > self.requests[req].item.slo.latency_budget_ms + 1e-9;
        let detail = format!(
            "latency={latency:.3} slo={}",
            if violated { "violated" } else { "ok" }
        );
        let node_id = self.node_id(node).to_string();
        self.trace.push(self.now, "classified", node_id, req.to_string(), detail);
        self.finish(req, Terminal::Classified);
    }

    fn fail(&mut self, req: usize, reason: &str) {
        self.trace
            .push(self.now, "failed", "", req.to_string(), format!("reason={reason}"));
        self.finish(req, Terminal::Failed);
    }

    fn route_hop(&mut self, req: usize, alternatives: Vec<usize>) -> Result<()> {
        if alternatives.is_empty() {
            self.fail(req, "no_successor_unit");
            return Ok(());
        }
        let graph = self.scenario.graph.as_ref().expect("inference mode");
        let alt_units: Vec<(usize, &Unit)> =
            alternatives.iter().map(|&u| (u, &graph.units[u])).collect();
        let views: Vec<NodeView> = self
            .scenario
            .nodes
            .iter()
            .zip(&self.nodes)
            .map(|(spec, rt)| NodeView {
                spec,
                earliest_free_ms: rt.earliest_free(self.now),
                outaged: rt.outaged,
            })
            .collect();
        let cluster = ClusterState { now_ms: self.now, nodes: &views, transfer: &self.scenario.transfer };
        let request = self.request_view(req);
        let decision = route(&request, self.requests[req].location, &alt_units, &cluster, self.classical_quality)?;
        match decision {
            RouteDecision::Place(p) => {
                let unit_index = alternatives[p.alternative];
                let node_id = self.node_id(p.node).to_string();
                if self.sampled(req) {
                    self.trace.push(
                        self.now,
                        "route",
                        node_id.clone(),
                        req.to_string(),
                        format!(
                            "unit={} predicted={:.3}",
                            graph.units[unit_index].id, p.predicted_completion_ms
                        ),
                    );
                }
                if p.forwarded_to_cloud {
                    self.trace.push(
                        self.now,
                        "forward_cloud",
                        node_id,
                        req.to_string(),
                        format!("unit={}", graph.units[unit_index].id),
                    );
                }
                if p.qnn_bypassed {
                    self.trace.push(
                        self.now,
                        "qnn_bypass",
                        "",
                        req.to_string(),
                        "reason=quality_met".to_string(),
                    );
                }
                let generation = self.requests[req].generation;
                self.push(
                    self.now + p.transfer_ms,
                    EventKind::TransferDone {
                        req,
                        node: p.node,
                        unit: UnitRef::Graph(unit_index),
                        generation,
                    },
                );
            }
            RouteDecision::SkipQnn { forced } => {
                if forced {
                    self.trace.push(
                        self.now,
                        "skip_qnn",
                        "",
                        req.to_string(),
                        "reason=no_feasible_quantum_node".to_string(),
                    );
                } else {
                    self.trace.push(
                        self.now,
                        "qnn_bypass",
                        "",
                        req.to_string(),
                        "reason=quality_met".to_string(),
                    );
                }
                // Advance past the quantum alternatives.
                let mut successors: Vec<usize> = alternatives
                    .iter()
                    .filter(|&&u| graph.units[u].kind == UnitKind::QuantumWidthwise)
                    .flat_map(|&u| graph.edges[u].iter().copied())
                    .collect();
                successors.sort_unstable();
                successors.dedup();
                return self.route_hop(req, successors);
            }
            RouteDecision::Reject { reason } => {
                self.trace.push(
                    self.now,
                    "reject",
                    "",
                    req.to_string(),
                    format!("reason={}", reason.replace(' ', "_")),
                );
                self.finish(req, Terminal::Rejected);
            }
            RouteDecision::NoNode { reason } => {
                self.fail(req, &reason.replace(' ', "_"));
            }
        }
        Ok(())
    }

    fn proceed_warm(&mut self, req: usize) -> Result<()> {
        let next = self.requests[req].warm.as_ref().expect("warm request").next;
        let placements_len =
            self.requests[req].warm.as_ref().unwrap().plan.placements.len();
        let generation = self.requests[req].generation;
        if next < placements_len {
            let placement = self.requests[req].warm.as_ref().unwrap().plan.placements[next].clone();
            let transfer = self.scenario.transfer.time(
                self.requests[req].location,
                self.scenario.nodes[placement.node].domain,
                self.requests[req].item.payload,
            );
            self.push(
                self.now + transfer,
                EventKind::TransferDone {
                    req,
                    node: placement.node,
                    unit: UnitRef::WarmStep(next),
                    generation,
                },
            );
            return Ok(());
        }
        // Final quantum task at the cloud: minimum predicted completion,
        // ties toward the lowest node id.
        let task = &self.scenario.warmstart.as_ref().unwrap().final_task;
        let payload = self.requests[req].item.payload;
        let transfer =
            self.scenario.transfer.time(self.requests[req].location, Domain::Cloud, payload);
        let mut best: Option<(f64, usize)> = None;
        for (i, (spec, rt)) in self.scenario.nodes.iter().zip(&self.nodes).enumerate() {
            if rt.outaged
                || spec.domain != Domain::Cloud
                || !task.resources.contains(&spec.resource)
            {
                continue;
            }
            let Some(&base) = spec.service_ms.get(&task.id) else { continue };
            let Ok(plan) = plan_quantum_execution(task, spec) else { continue };
            let duration = base * payload * quantum_service_scale(plan, spec.cluster_parallelism);
            let start = (self.now + transfer).max(rt.earliest_free(self.now));
            let predicted = start + duration;
            if best.map_or(true, |(t, _)| predicted < t) {
                best = Some((predicted, i));
            }
        }
        match best {
            Some((_, node)) => {
                self.push(
                    self.now + transfer,
                    EventKind::TransferDone { req, node, unit: UnitRef::WarmFinal, generation },
                );
            }
            None => self.fail(req, "no_cloud_quantum_node"),
        }
        Ok(())
    }

    fn handle_arrival(&mut self, req: usize) -> Result<()> {
        let client = self.requests[req].item.client_id.clone();
        self.trace.push(self.now, "arrival", client.clone(), req.to_string(), "");
        match self.scenario.mode {
            SimMode::Inference => {
                let alts = self.current_alternatives(req);
                self.route_hop(req, alts)
            }
            SimMode::Warmstart => {
                let ws = self.scenario.warmstart.as_ref().expect("warmstart mode");
                let quality_target = self.requests[req].item.slo.quality_target;
                let plan = apply_warmstart_chain(
                    &self.scenario.nodes,
                    &mut self.energy,
                    &client,
                    &ws.steps,
                    &ws.fallback,
                    quality_target,
                );
                match plan {
                    Ok(plan) => {
                        if !plan.reached_target {
                            self.trace.push(
                                self.now,
                                "quality_shortfall",
                                "",
                                req.to_string(),
                                format!("target={quality_target:.3}"),
                            );
                        }
                        self.requests[req].warm = Some(WarmRt { plan, next: 0 });
                        self.proceed_warm(req)
                    }
                    Err(SimError::InfeasibleUnit(reason)) => {
                        self.fail(req, &reason.replace(' ', "_"));
                        Ok(())
                    }
                    Err(other) => Err(other),
                }
            }
        }
    }

    fn handle_transfer_done(&mut self, req: usize, node: usize, unit: UnitRef, generation: u32) -> Result<()> {
        if self.requests[req].terminal.is_some() || self.requests[req].generation != generation {
            return Ok(());
        }
        let from = self.requests[req].location;
        let to = self.scenario.nodes[node].domain;
        let node_id = self.node_id(node).to_string();
        self.trace.push(
            self.now,
            "transfer_done",
            node_id,
            req.to_string(),
            format!(
                "from={} to={} payload={:.3}",
                from.label(),
                to.label(),
                self.requests[req].item.payload
            ),
        );
        if self.nodes[node].outaged {
            self.trace.push(
                self.now,
                "reroute",
                self.node_id(node).to_string(),
                req.to_string(),
                "reason=outage_on_arrival".to_string(),
            );
            return self.redispatch(req);
        }
        self.requests[req].location = to;
        let duration = self.service_duration(req, node, unit)?;
        let start = self.nodes[node].reserve(self.now, duration);
        self.requests[req].pending_node = Some(node);
        self.push(start, EventKind::ServiceStart { req, node, unit, generation });
        self.push(start + duration, EventKind::ServiceDone { req, node, unit, generation });
        Ok(())
    }

    fn handle_service_start(&mut self, req: usize, node: usize, unit: UnitRef, generation: u32) {
        if self.requests[req].terminal.is_some() || self.requests[req].generation != generation {
            return;
        }
        let node_id = self.node_id(node).to_string();
        if let UnitRef::WarmStep(i) = unit {
            let placement = &self.requests[req].warm.as_ref().unwrap().plan.placements[i];
            let detail = format!(
                "kind={} domain={} intensity={:.3}",
                placement.kind.label(),
                placement.domain.label(),
                placement.cumulative_intensity
            );
            self.trace.push(self.now, "warm_step", node_id.clone(), req.to_string(), detail);
        }
        if self.sampled(req) {
            let label = self.unit_label(unit);
            self.trace.push(self.now, "service_start", node_id, req.to_string(), format!("unit={label}"));
        }
    }

    fn handle_service_done(&mut self, req: usize, node: usize, unit: UnitRef, generation: u32) -> Result<()> {
        if self.requests[req].terminal.is_some() || self.requests[req].generation != generation {
            return Ok(());
        }
        self.requests[req].pending_node = None;
        let node_id = self.node_id(node).to_string();
        match unit {
            UnitRef::Graph(u) => {
                let graph = self.scenario.graph.as_ref().expect("inference mode");
                let graph_unit = &graph.units[u];
                let kind = if graph_unit.kind == UnitKind::QuantumWidthwise {
                    "quantum"
                } else {
                    "classical"
                };
                self.trace.push(
                    self.now,
                    "service_done",
                    node_id.clone(),
                    req.to_string(),
                    format!("unit={} kind={kind}", graph_unit.id),
                );
                if graph_unit.output_stage < self.requests[req].stage {
                    return Err(SimError::Integrity(format!(
                        "unit {} would move request {req} backwards",
                        graph_unit.id
                    )));
                }
                self.requests[req].stage = graph_unit.output_stage;
                self.requests[req].current_unit = Some(u);
                if graph_unit.output_stage == Stage::Classified {
                    self.classify(req, node);
                    Ok(())
                } else {
                    let alts = self.current_alternatives(req);
                    self.route_hop(req, alts)
                }
            }
            UnitRef::WarmStep(i) => {
                self.trace.push(
                    self.now,
                    "service_done",
                    node_id,
                    req.to_string(),
                    format!(
                        "unit=warm:{} kind=warm",
                        self.requests[req].warm.as_ref().unwrap().plan.placements[i]
                            .kind
                            .label()
                    ),
                );
                self.requests[req].warm.as_mut().unwrap().next = i + 1;
                self.proceed_warm(req)
            }
            UnitRef::WarmFinal => {
                let task_id = self.scenario.warmstart.as_ref().unwrap().final_task.id.clone();
                self.trace.push(
                    self.now,
                    "service_done",
                    node_id,
                    req.to_string(),
                    format!("unit={task_id} kind=quantum"),
                );
                self.classify(req, node);
                Ok(())
            }
        }
    }

    /// Re-dispatches a request whose placement was invalidated by an outage.
    fn redispatch(&mut self, req: usize) -> Result<()> {
        self.requests[req].generation += 1;
        self.requests[req].pending_node = None;
        match self.scenario.mode {
            SimMode::Inference => {
                let alts = self.current_alternatives(req);
                self.route_hop(req, alts)
            }
            SimMode::Warmstart => {
                // Re-place the pending step on the next available node of the
                // same domain, escalating fog → cloud if needed.
                let next = self.requests[req].warm.as_ref().unwrap().next;
                if next >= self.requests[req].warm.as_ref().unwrap().plan.placements.len() {
                    return self.proceed_warm(req);
                }
                let placement = self.requests[req].warm.as_ref().unwrap().plan.placements[next].clone();
                let step_resource = {
                    let ws = self.scenario.warmstart.as_ref().unwrap();
                    let all: Vec<&WarmStartStep> = ws.steps.iter().chain(&ws.fallback).collect();
                    all.get(placement.step_index).map(|s| s.resource)
                };
                let Some(resource) = step_resource else {
                    self.fail(req, "warm_step_lost");
                    return Ok(());
                };
                let domains = [placement.domain, Domain::Fog, Domain::Cloud];
                for domain in domains {
                    if let Some(node) = self.scenario.nodes.iter().enumerate().position(|(i, n)| {
                        n.domain == domain && n.resource == resource && !self.nodes[i].outaged
                    }) {
                        let warm = self.requests[req].warm.as_mut().unwrap();
                        warm.plan.placements[next].node = node;
                        warm.plan.placements[next].domain = domain;
                        return self.proceed_warm(req);
                    }
                }
                self.fail(req, "no_node_after_outage");
                Ok(())
            }
        }
    }

    fn handle_outage_start(&mut self, node: usize, end_ms: f64) -> Result<()> {
        self.nodes[node].outaged = true;
        self.nodes[node].reset_until(end_ms);
        let node_id = self.node_id(node).to_string();
        self.trace.push(self.now, "outage_start", node_id.clone(), "", format!("until={end_ms:.3}"));
        let victims: Vec<usize> = self
            .requests
            .iter()
            .enumerate()
            .filter(|(_, r)| r.terminal.is_none() && r.pending_node == Some(node))
            .map(|(i, _)| i)
            .collect();
        for req in victims {
            self.trace.push(
                self.now,
                "reroute",
                node_id.clone(),
                req.to_string(),
                "reason=outage".to_string(),
            );
            self.redispatch(req)?;
        }
        Ok(())
    }

    fn run(mut self) -> Result<(Trace, Metrics)> {
        // Topology preamble so metrics can normalize utilization; an empty
        // workload keeps an empty trace.
        if !self.scenario.workload.is_empty() {
            for (spec, rt) in self.scenario.nodes.iter().zip(&self.nodes) {
                let slots = match &rt.slots {
                    None => "unlimited".to_string(),
                    Some(v) => v.len().to_string(),
                };
                self.trace.push(
                    0.0,
                    "node_info",
                    spec.id.clone(),
                    "",
                    format!("domain={} resource={:?} slots={slots}", spec.domain.label(), spec.resource)
                        .to_lowercase(),
                );
            }
        }
        for window in &self.scenario.outages {
            self.push(window.start_ms, EventKind::OutageStart { node: window.node, end_ms: window.end_ms });
            self.push(window.end_ms, EventKind::OutageEnd { node: window.node });
        }
        for item in &self.scenario.workload {
            self.requests.push(RequestRt {
                item: item.clone(),
                stage: Stage::RawClassical,
                location: Domain::Edge,
                current_unit: None,
                generation: 0,
                pending_node: None,
                terminal: None,
                warm: None,
            });
        }
        for req in 0..self.requests.len() {
            let time = self.requests[req].item.arrival_ms;
            self.push(time, EventKind::Arrival { req });
        }

        while let Some(Reverse(event)) = self.heap.pop() {
            if event.time_ms < self.now - 1e-9 {
                return Err(SimError::Integrity("event time regressed".into()));
            }
            self.now = self.now.max(event.time_ms);
            match event.kind {
                EventKind::Arrival { req } => self.handle_arrival(req)?,
                EventKind::TransferDone { req, node, unit, generation } => {
                    self.handle_transfer_done(req, node, unit, generation)?
                }
                EventKind::ServiceStart { req, node, unit, generation } => {
                    self.handle_service_start(req, node, unit, generation)
                }
                EventKind::ServiceDone { req, node, unit, generation } => {
                    self.handle_service_done(req, node, unit, generation)?
                }
                EventKind::OutageStart { node, end_ms } => self.handle_outage_start(node, end_ms)?,
                EventKind::OutageEnd { node } => {
                    self.nodes[node].outaged = false;
                    let node_id = self.node_id(node).to_string();
                    self.trace.push(self.now, "outage_end", node_id, "", "");
                }
            }
        }

        for (i, r) in self.requests.iter().enumerate() {
            if r.terminal.is_none() {
                return Err(SimError::Integrity(format!("request {i} never terminated")));
            }
        }
        let metrics = metrics_from_trace(&self.trace);
        Ok((self.trace, metrics))
    }
}

/// Schedules an unavailability window for a node; overlapping windows merge
/// into one interval when the simulation runs.
pub fn inject_outage(
    scenario: &mut Scenario,
    node_id: &str,
    at_ms: f64,
    duration_ms: f64,
) -> Result<()> {
    let node = scenario
        .nodes
        .iter()
        .position(|n| n.id == node_id)
        .ok_or_else(|| SimError::InvalidArgument(format!("unknown node {node_id}")))?;
    scenario.outages.push(OutageWindow { node, start_ms: at_ms, end_ms: at_ms + duration_ms });
    Ok(())
}

/// Validates the scenario and runs it to completion.
pub fn simulate(scenario: &Scenario) -> Result<(Trace, Metrics)> {
    for pair in scenario.nodes.windows(2) {
        if pair[0].id >= pair[1].id {
            return Err(SimError::InvalidConfig("nodes must be sorted by unique id".into()));
        }
    }
    for node in &scenario.nodes {
        node.validate()?;
    }
    match scenario.mode {
        SimMode::Inference => {
            let graph = scenario
                .graph
                .as_ref()
                .ok_or_else(|| SimError::InvalidConfig("inference mode needs a partition graph".into()))?;
            graph.validate()?;
        }
        SimMode::Warmstart => {
            let ws = scenario
                .warmstart
                .as_ref()
                .ok_or_else(|| SimError::InvalidConfig("warmstart mode needs a pipeline".into()))?;
            crate::types::validate_pipeline(&ws.steps)?;
            if ws.final_task.kind != UnitKind::QuantumWidthwise {
                return Err(SimError::InvalidConfig("the final task must be quantum".into()));
            }
        }
    }
    for item in &scenario.workload {
        item.slo.validate()?;
    }
    for window in &scenario.outages {
        if window.node >= scenario.nodes.len() || window.end_ms < window.start_ms {
            return Err(SimError::InvalidConfig("malformed outage window".into()));
        }
    }
    let mut merged = scenario.clone();
    merged.outages = merge_outages(scenario.outages.clone());
    Engine::new(&merged)?.run()
}
