//! Deterministic discrete-event simulation of hybrid inference across the
//! edge-fog-cloud continuum: SLO-aware routing with an optional quantum
//! embedding stage, widthwise cut planning for undersized quantum nodes,
//! hierarchical warm-start chaining, and trace-derived metrics.

pub mod config;
pub mod engine;
pub mod error;
pub mod qplan;
pub mod routing;
pub mod trace;
pub mod types;
pub mod warmstart;

pub use engine::{inject_outage, simulate, Scenario, SimMode};
pub use error::{Result, SimError};
pub use trace::{metrics_from_trace, Metrics, Trace};
