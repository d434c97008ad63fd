//! Versioned TOML schema for the simulator: topology, transfer model,
//! partition graph, warm-start pipeline, workload and outages in one
//! human-readable document.
//!
//! ```toml
//! version = 1
//! mode = "inference"          # or "warmstart"
//! seed = 42                   # overridable by the caller
//!
//! [capacity_slots]            # optional; 0 = unlimited
//! very_low = 1
//! low = 2
//! medium = 4
//! high = 8
//! unlimited = 0
//!
//! [transfer]
//! edge_fog_ms = 2.0
//! fog_cloud_ms = 3.0
//! edge_cloud_ms = 5.0
//! intra_ms = 0.0
//! per_payload_ms = 0.0
//!
//! [[nodes]]
//! id = "fog-gpu-0"
//! domain = "fog"              # edge | fog | cloud
//! resource = "gpu"            # cpu | tpu | gpu | qpu | mqpu
//! grade = "server"            # mobile | server
//! capacity = "high"           # very_low | low | medium | high | unlimited
//! max_qubits = 0              # quantum nodes only
//! cluster_parallelism = 1
//! energy_budget = 0.0         # edge nodes only
//! outage_rate_per_hour = 0.0  # stochastic outages, seeded
//! outage_duration_ms = 0.0
//! client = "c1"               # warm-start scenarios: owning client
//! [nodes.service_ms]          # per deployment unit
//! extract = 10.0
//!
//! [[graph.units]]             # inference mode
//! id = "extract"
//! kind = "classical_depthwise"
//! domains = ["fog", "cloud"]
//! resources = ["gpu"]
//! output_stage = "neural_features"
//! quality_gain = 0.5
//! width = 0                   # quantum units: circuit width
//! depth = 0                   # quantum units: variational depth
//!
//! [[graph.edges]]
//! from = "extract"
//! to = ["embed", "classify"]  # branch alternatives
//!
//! [warmstart]                 # warm-start mode
//! [[warmstart.steps]]
//! kind = "C2N"
//! resource = "tpu"
//! intensity_gain = 0.4
//! service_ms = 5.0
//! energy_cost = 1.0
//! [warmstart.final_task]
//! id = "task"
//! resources = ["qpu"]
//! width = 4
//! depth = 2
//! service_ms = 20.0           # cloud nodes inherit this entry
//!
//! [[workload.requests]]       # explicit request list …
//! arrival_ms = 0.0
//! client = "c1"
//! latency_budget_ms = 100.0
//! quality_target = 0.5
//! quantum_optional = true
//! payload = 1.0
//!
//! [workload.generator]        # … or a seeded generator
//! count = 1000
//! interarrival_ms = 5.0
//! client = "gen"
//! latency_budget_ms = 100.0
//! quality_target = 0.5
//! quantum_optional = true
//! payload = 1.0
//!
//! [[outages]]
//! node = "fog-gpu-0"
//! at_ms = 50.0
//! duration_ms = 100.0
//!
//! [monitoring]
//! trace_sample_rate = 1       # per-hop routing records for every k-th request
//! service_jitter = false      # exponential service jitter, seeded
//! horizon_ms = 0.0            # stochastic outage horizon (0 = auto)
//! ```

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::engine::{
    merge_outages, CapacitySlots, OutageWindow, Scenario, SimMode, WarmstartSpec, WorkItem,
};
use crate::error::{Result, SimError};
use crate::routing::TransferModel;
use crate::types::{
    CapacityClass, Domain, Grade, NodeSpec, PartitionGraph, Resource, SloSpec, Stage, StepKind,
    Unit, UnitKind, WarmStartStep,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub version: u32,
    pub mode: ModeField,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub capacity_slots: Option<CapacitySlotsField>,
    pub transfer: TransferField,
    pub nodes: Vec<NodeField>,
    #[serde(default)]
    pub graph: Option<GraphField>,
    #[serde(default)]
    pub warmstart: Option<WarmstartField>,
    #[serde(default)]
    pub workload: WorkloadField,
    #[serde(default)]
    pub outages: Vec<OutageField>,
    #[serde(default)]
    pub monitoring: MonitoringField,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeField {
    Inference,
    Warmstart,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacitySlotsField {
    #[serde(default = "default_very_low")]
    pub very_low: u32,
    #[serde(default = "default_low")]
    pub low: u32,
    #[serde(default = "default_medium")]
    pub medium: u32,
    #[serde(default = "default_high")]
    pub high: u32,
    #[serde(default)]
    pub unlimited: u32,
}

fn default_very_low() -> u32 {
    1
}
fn default_low() -> u32 {
    2
}
fn default_medium() -> u32 {
    4
}
fn default_high() -> u32 {
    8
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferField {
    pub edge_fog_ms: f64,
    pub fog_cloud_ms: f64,
    pub edge_cloud_ms: f64,
    #[serde(default)]
    pub intra_ms: f64,
    #[serde(default)]
    pub per_payload_ms: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeField {
    pub id: String,
    pub domain: Domain,
    pub resource: Resource,
    pub grade: Grade,
    pub capacity: CapacityClass,
    #[serde(default)]
    pub service_ms: BTreeMap<String, f64>,
    #[serde(default)]
    pub max_qubits: u32,
    #[serde(default)]
    pub outage_rate_per_hour: f64,
    #[serde(default)]
    pub outage_duration_ms: f64,
    #[serde(default)]
    pub energy_budget: f64,
    #[serde(default = "default_parallelism")]
    pub cluster_parallelism: u32,
    #[serde(default)]
    pub client: Option<String>,
}

fn default_parallelism() -> u32 {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphField {
    pub units: Vec<UnitField>,
    #[serde(default)]
    pub edges: Vec<EdgeField>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitField {
    pub id: String,
    pub kind: UnitKind,
    pub domains: Vec<Domain>,
    pub resources: Vec<Resource>,
    pub output_stage: Stage,
    #[serde(default)]
    pub quality_gain: f64,
    #[serde(default)]
    pub width: u32,
    #[serde(default)]
    pub depth: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeField {
    pub from: String,
    pub to: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarmstartField {
    pub steps: Vec<StepField>,
    #[serde(default)]
    pub fallback_steps: Vec<StepField>,
    pub final_task: FinalTaskField,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepField {
    pub kind: StepKind,
    pub resource: Resource,
    pub intensity_gain: f64,
    pub service_ms: f64,
    #[serde(default)]
    pub energy_cost: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinalTaskField {
    pub id: String,
    pub resources: Vec<Resource>,
    pub width: u32,
    pub depth: u32,
    pub service_ms: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadField {
    #[serde(default)]
    pub requests: Vec<RequestField>,
    #[serde(default)]
    pub generator: Option<GeneratorField>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestField {
    pub arrival_ms: f64,
    pub client: String,
    pub latency_budget_ms: f64,
    #[serde(default)]
    pub quality_target: f64,
    #[serde(default)]
    pub quantum_optional: bool,
    #[serde(default = "default_payload")]
    pub payload: f64,
}

fn default_payload() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorField {
    pub count: u64,
    pub interarrival_ms: f64,
    /// Draw exponential interarrival times instead of a fixed spacing.
    #[serde(default)]
    pub poisson: bool,
    pub client: String,
    pub latency_budget_ms: f64,
    #[serde(default)]
    pub quality_target: f64,
    #[serde(default)]
    pub quantum_optional: bool,
    #[serde(default = "default_payload")]
    pub payload: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutageField {
    pub node: String,
    pub at_ms: f64,
    pub duration_ms: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitoringField {
    #[serde(default = "default_sample_rate")]
    pub trace_sample_rate: u64,
    #[serde(default)]
    pub service_jitter: bool,
    #[serde(default)]
    pub horizon_ms: f64,
}

fn default_sample_rate() -> u64 {
    1
}

/// Parses the document and materializes a runnable scenario. `seed_override`
/// (e.g. from a command line) wins over the document's seed.
pub fn load_scenario(text: &str, seed_override: Option<u64>) -> Result<Scenario> {
    let doc: ConfigDoc =
        toml::from_str(text).map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    if doc.version != SCHEMA_VERSION {
        return Err(SimError::InvalidConfig(format!(
            "config version {} unsupported (expected {SCHEMA_VERSION})",
            doc.version
        )));
    }
    let seed = seed_override.or(doc.seed).ok_or_else(|| {
        SimError::InvalidConfig("a seed is mandatory (config `seed` or override)".into())
    })?;

    let mut nodes: Vec<NodeSpec> = doc
        .nodes
        .into_iter()
        .map(|n| NodeSpec {
            id: n.id,
            domain: n.domain,
            resource: n.resource,
            grade: n.grade,
            capacity: n.capacity,
            service_ms: n.service_ms,
            max_qubits: n.max_qubits,
            outage_rate_per_hour: n.outage_rate_per_hour,
            outage_duration_ms: n.outage_duration_ms,
            energy_budget: n.energy_budget,
            cluster_parallelism: n.cluster_parallelism,
            client: n.client,
        })
        .collect();
    nodes.sort_by(|a, b| a.id.cmp(&b.id));
    for pair in nodes.windows(2) {
        if pair[0].id == pair[1].id {
            return Err(SimError::InvalidConfig(format!("duplicate node id {}", pair[0].id)));
        }
    }

    let graph = match doc.graph {
        None => None,
        Some(g) => {
            let units: Vec<Unit> = g
                .units
                .into_iter()
                .map(|u| Unit {
                    id: u.id,
                    kind: u.kind,
                    domains: u.domains,
                    resources: u.resources,
                    output_stage: u.output_stage,
                    quality_gain: u.quality_gain,
                    width: u.width,
                    depth: u.depth,
                })
                .collect();
            let mut edges = vec![Vec::new(); units.len()];
            for edge in g.edges {
                let from = units.iter().position(|u| u.id == edge.from).ok_or_else(|| {
                    SimError::InvalidConfig(format!("graph.edges: unknown unit {}", edge.from))
                })?;
                for to_id in edge.to {
                    let to = units.iter().position(|u| u.id == to_id).ok_or_else(|| {
                        SimError::InvalidConfig(format!("graph.edges: unknown unit {to_id}"))
                    })?;
                    edges[from].push(to);
                }
            }
            Some(PartitionGraph { units, edges })
        }
    };

    let warmstart = match doc.warmstart {
        None => None,
        Some(w) => {
            let to_step = |s: StepField| WarmStartStep {
                kind: s.kind,
                resource: s.resource,
                intensity_gain: s.intensity_gain,
                service_ms: s.service_ms,
                energy_cost: s.energy_cost,
            };
            let final_task = Unit {
                id: w.final_task.id.clone(),
                kind: UnitKind::QuantumWidthwise,
                domains: vec![Domain::Cloud],
                resources: w.final_task.resources.clone(),
                output_stage: Stage::Classified,
                quality_gain: 0.0,
                width: w.final_task.width,
                depth: w.final_task.depth,
            };
            // Cloud quantum nodes inherit the final task's service entry
            // unless the config pins one per node.
            for node in nodes.iter_mut() {
                if node.domain == Domain::Cloud
                    && w.final_task.resources.contains(&node.resource)
                {
                    node.service_ms
                        .entry(w.final_task.id.clone())
                        .or_insert(w.final_task.service_ms);
                }
            }
            Some(WarmstartSpec {
                steps: w.steps.into_iter().map(to_step).collect(),
                fallback: w.fallback_steps.into_iter().map(to_step).collect(),
                final_task,
            })
        }
    };

    let mut workload: Vec<WorkItem> = doc
        .workload
        .requests
        .iter()
        .map(|r| WorkItem {
            arrival_ms: r.arrival_ms,
            client_id: r.client.clone(),
            slo: SloSpec {
                latency_budget_ms: r.latency_budget_ms,
                quality_target: r.quality_target,
                quantum_optional: r.quantum_optional,
            },
            payload: r.payload,
        })
        .collect();
    if let Some(g) = &doc.workload.generator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5_5A5A_C3C3_3C3C);
        let mut t = 0.0;
        for _ in 0..g.count {
            let gap = if g.poisson {
                let u: f64 = rng.gen_range(0.0..1.0);
                -(1.0 - u).ln() * g.interarrival_ms
            } else {
                g.interarrival_ms
            };
            t += gap;
            workload.push(WorkItem {
                arrival_ms: t,
                client_id: g.client.clone(),
                slo: SloSpec {
                    latency_budget_ms: g.latency_budget_ms,
                    quality_target: g.quality_target,
                    quantum_optional: g.quantum_optional,
                },
                payload: g.payload,
            });
        }
    }
    // An empty workload is legal: the run produces an empty trace.
    workload.sort_by(|a, b| a.arrival_ms.total_cmp(&b.arrival_ms));

    let mut outages = Vec::new();
    for o in &doc.outages {
        let node = nodes.iter().position(|n| n.id == o.node).ok_or_else(|| {
            SimError::InvalidConfig(format!("outages: unknown node {}", o.node))
        })?;
        outages.push(OutageWindow {
            node,
            start_ms: o.at_ms,
            end_ms: o.at_ms + o.duration_ms,
        });
    }
    // Stochastic outages from per-node rates, drawn from a dedicated stream.
    let horizon = if doc.monitoring.horizon_ms > 0.0 {
        doc.monitoring.horizon_ms
    } else {
        workload.last().map(|w| w.arrival_ms + 10_000.0).unwrap_or(0.0)
    };
    for (i, node) in nodes.iter().enumerate() {
        if node.outage_rate_per_hour <= 0.0 || node.outage_duration_ms <= 0.0 {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0xB0B0_F0F0 + i as u64));
        let rate_per_ms = node.outage_rate_per_hour / 3_600_000.0;
        let mut t = 0.0;
        loop {
            let u: f64 = rng.gen_range(0.0..1.0);
            t += -(1.0 - u).ln() / rate_per_ms;
            if t >= horizon {
                break;
            }
            outages.push(OutageWindow {
                node: i,
                start_ms: t,
                end_ms: t + node.outage_duration_ms,
            });
        }
    }

    let capacity = doc
        .capacity_slots
        .map(|c| CapacitySlots {
            very_low: c.very_low,
            low: c.low,
            medium: c.medium,
            high: c.high,
            unlimited: c.unlimited,
        })
        .unwrap_or_default();

    Ok(Scenario {
        mode: match doc.mode {
            ModeField::Inference => SimMode::Inference,
            ModeField::Warmstart => SimMode::Warmstart,
        },
        nodes,
        capacity,
        transfer: TransferModel {
            edge_fog_ms: doc.transfer.edge_fog_ms,
            fog_cloud_ms: doc.transfer.fog_cloud_ms,
            edge_cloud_ms: doc.transfer.edge_cloud_ms,
            intra_ms: doc.transfer.intra_ms,
            per_payload_ms: doc.transfer.per_payload_ms,
        },
        graph,
        warmstart,
        workload,
        outages: merge_outages(outages),
        seed,
        service_jitter: doc.monitoring.service_jitter,
        trace_sample_rate: doc.monitoring.trace_sample_rate.max(1),
    })
}
