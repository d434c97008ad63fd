//! Hierarchical warm-start chaining: each pipeline step runs on the most
//! client-proximal domain whose resource and energy budget permit it, until
//! the cumulative intensity reaches the quality target; the final quantum
//! task then runs in the cloud.

use crate::error::{Result, SimError};
use crate::types::{validate_pipeline, DataFormat, Domain, NodeSpec, StepKind, WarmStartStep};

/// Where one executed step landed.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPlacement {
    /// Index into the concatenation of pipeline then fallback steps.
    pub step_index: usize,
    pub kind: StepKind,
    pub domain: Domain,
    /// Node index in the id-sorted node list.
    pub node: usize,
    pub service_ms: f64,
    pub cumulative_intensity: f64,
}

/// Chain execution plan: the placements actually executed plus whether the
/// quality target was reached before the final quantum task.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainPlan {
    pub placements: Vec<StepPlacement>,
    pub reached_target: bool,
}

fn place_in_domain(
    nodes: &[NodeSpec],
    domain: Domain,
    step: &WarmStartStep,
    client_id: Option<&str>,
    energy_remaining: &[f64],
) -> Option<usize> {
    nodes.iter().enumerate().position(|(i, n)| {
        n.domain == domain
            && n.resource == step.resource
            && client_id.map_or(true, |c| n.client.as_deref() == Some(c))
            && (domain != Domain::Edge || energy_remaining[i] >= step.energy_cost)
    })
}

/// Plans the warm-start chain of one request.
///
/// `energy_remaining` (indexed like `nodes`) is drained by the edge steps
/// this call places. Steps after the target is reached are skipped; if the
/// pipeline ends short of the target, fallback steps are inserted at the fog
/// until it is met or they run out.
pub fn apply_warmstart_chain(
    nodes: &[NodeSpec],
    energy_remaining: &mut [f64],
    client_id: &str,
    pipeline: &[WarmStartStep],
    fallback: &[WarmStartStep],
    quality_target: f64,
) -> Result<ChainPlan> {
    validate_pipeline(pipeline)?;
    if energy_remaining.len() != nodes.len() {
        return Err(SimError::Integrity("energy ledger does not match node list".into()));
    }

    let mut placements = Vec::new();
    let mut cumulative = 0.0;
    let mut format = DataFormat::Classical;
    let mut step_counter = 0;

    let mut run_step = |step: &WarmStartStep,
                        fog_only: bool,
                        placements: &mut Vec<StepPlacement>,
                        cumulative: &mut f64,
                        energy_remaining: &mut [f64]|
     -> Result<()> {
        let edge_pick = (!fog_only)
            .then(|| place_in_domain(nodes, Domain::Edge, step, Some(client_id), energy_remaining))
            .flatten();
        let (domain, node) = if let Some(node) = edge_pick {
            energy_remaining[node] -= step.energy_cost;
            (Domain::Edge, node)
        } else if let Some(node) =
            place_in_domain(nodes, Domain::Fog, step, None, energy_remaining)
        {
            (Domain::Fog, node)
        } else if let Some(node) = (!fog_only)
            .then(|| place_in_domain(nodes, Domain::Cloud, step, None, energy_remaining))
            .flatten()
        {
            (Domain::Cloud, node)
        } else {
            return Err(SimError::InfeasibleUnit(format!(
                "no node can host warm-start step {} ({:?})",
                step.kind.label(),
                step.resource
            )));
        };
        *cumulative += step.intensity_gain;
        placements.push(StepPlacement {
            step_index: step_counter,
            kind: step.kind,
            domain,
            node,
            service_ms: step.service_ms,
            cumulative_intensity: *cumulative,
        });
        step_counter += 1;
        Ok(())
    };

    for step in pipeline {
        if cumulative >= quality_target {
            break;
        }
        run_step(step, false, &mut placements, &mut cumulative, energy_remaining)?;
        format = step.kind.output();
    }

    for step in fallback {
        if cumulative >= quality_target {
            break;
        }
        if step.kind.input() != format {
            return Err(SimError::InvalidPipeline(format!(
                "fallback step {} expects {:?} input but the chain carries {:?}",
                step.kind.label(),
                step.kind.input(),
                format
            )));
        }
        run_step(step, true, &mut placements, &mut cumulative, energy_remaining)?;
        format = step.kind.output();
    }

    Ok(ChainPlan { placements, reached_target: cumulative >= quality_target })
}
