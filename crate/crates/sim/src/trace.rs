//! Event trace and the metrics derived from it.
//!
//! Trace lines are `time,event,node,request,detail` with millisecond times at
//! fixed three-decimal precision; metrics are computed from the trace text
//! alone and rendered as a flat `metric,key,value` table.

use std::collections::BTreeMap;

/// One trace record.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub time_ms: f64,
    pub event: &'static str,
    pub node: String,
    pub request: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn push(
        &mut self,
        time_ms: f64,
        event: &'static str,
        node: impl Into<String>,
        request: impl Into<String>,
        detail: impl Into<String>,
    ) {
        let node = node.into();
        let request = request.into();
        let detail = detail.into();
        self.events.push(TraceEvent {
            time_ms,
            event,
            node: if node.is_empty() { "-".into() } else { node },
            request: if request.is_empty() { "-".into() } else { request },
            detail: if detail.is_empty() { "-".into() } else { detail },
        });
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&format!(
                "{:.3},{},{},{},{}\n",
                e.time_ms, e.event, e.node, e.request, e.detail
            ));
        }
        out
    }
}

/// Aggregates over one run, as a flat table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics {
    pub rows: Vec<(String, String, String)>,
}

impl Metrics {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,key,value\n");
        for (metric, key, value) in &self.rows {
            out.push_str(&format!("{metric},{key},{value}\n"));
        }
        out
    }

    pub fn get(&self, metric: &str, key: &str) -> Option<&str> {
        self.rows
            .iter()
            .find(|(m, k, _)| m == metric && k == key)
            .map(|(_, _, v)| v.as_str())
    }
}

fn detail_field<'a>(detail: &'a str, key: &str) -> Option<&'a str> {
    detail
        .split(' ')
        .find_map(|part| part.strip_prefix(key).and_then(|rest| rest.strip_prefix('=')))
}

/// Nearest-rank percentile of an ascending-sorted slice.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = ((q / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Computes every aggregate from the trace records alone.
pub fn metrics_from_trace(trace: &Trace) -> Metrics {
    let mut arrived = 0u64;
    let mut classified = 0u64;
    let mut rejected = 0u64;
    let mut failed = 0u64;
    let mut violations = 0u64;
    let mut qnn_executions = 0u64;
    let mut qnn_skips = 0u64;
    let mut latencies = Vec::new();
    let mut inter_domain_payload = 0.0;
    let mut busy: BTreeMap<String, f64> = BTreeMap::new();
    let mut slots: BTreeMap<String, f64> = BTreeMap::new();
    let mut service_started: BTreeMap<(String, String), f64> = BTreeMap::new();
    let mut makespan = 0.0f64;

    for e in &trace.events {
        makespan = makespan.max(e.time_ms);
        match e.event {
            "node_info" => {
                let count: f64 = match detail_field(&e.detail, "slots") {
                    Some("unlimited") | None => 1.0,
                    Some(v) => v.parse().unwrap_or(1.0),
                };
                slots.insert(e.node.clone(), count.max(1.0));
            }
            "arrival" => arrived += 1,
            "classified" => {
                classified += 1;
                if let Some(latency) = detail_field(&e.detail, "latency").and_then(|v| v.parse().ok())
                {
                    latencies.push(latency);
                }
                if detail_field(&e.detail, "slo") == Some("violated") {
                    violations += 1;
                }
            }
            "reject" => {
                rejected += 1;
                violations += 1;
            }
            "failed" => failed += 1,
            "skip_qnn" => qnn_skips += 1,
            "service_start" => {
                service_started.insert((e.node.clone(), e.request.clone()), e.time_ms);
            }
            "service_done" => {
                if let Some(start) = service_started.remove(&(e.node.clone(), e.request.clone())) {
                    *busy.entry(e.node.clone()).or_insert(0.0) += e.time_ms - start;
                }
                if detail_field(&e.detail, "kind") == Some("quantum") {
                    qnn_executions += 1;
                }
            }
            "transfer_done" => {
                let from = detail_field(&e.detail, "from");
                let to = detail_field(&e.detail, "to");
                if from.is_some() && from != to {
                    if let Some(payload) =
                        detail_field(&e.detail, "payload").and_then(|v| v.parse::<f64>().ok())
                    {
                        inter_domain_payload += payload;
                    }
                }
            }
            _ => {}
        }
    }

    latencies.sort_by(f64::total_cmp);
    let mut rows = Vec::new();
    let mut push = |metric: &str, key: &str, value: String| {
        rows.push((metric.to_string(), key.to_string(), value));
    };
    push("requests", "arrived", arrived.to_string());
    push("requests", "classified", classified.to_string());
    push("requests", "rejected", rejected.to_string());
    push("requests", "failed", failed.to_string());
    push("latency_ms", "p50", format!("{:.3}", percentile(&latencies, 50.0)));
    push("latency_ms", "p95", format!("{:.3}", percentile(&latencies, 95.0)));
    push("latency_ms", "p99", format!("{:.3}", percentile(&latencies, 99.0)));
    push("latency_ms", "max", format!("{:.3}", latencies.last().copied().unwrap_or(0.0)));
    push("slo", "violations", violations.to_string());
    push("qnn", "executions", qnn_executions.to_string());
    push("qnn", "skips", qnn_skips.to_string());
    push("transfer", "inter_domain_payload", format!("{inter_domain_payload:.3}"));
    for (node, busy_ms) in &busy {
        let capacity = slots.get(node).copied().unwrap_or(1.0) * makespan;
        let utilization = if capacity > 0.0 { busy_ms / capacity } else { 0.0 };
        push("utilization", node, format!("{utilization:.6}"));
    }
    Metrics { rows }
}
