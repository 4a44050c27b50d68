//! Deterministic discrete-event simulation of cache poisoning against NDN
//! routers, with and without interest-key binding.

mod engine;
mod metrics;
mod scenario;
mod topology;

use thiserror::Error;

pub use engine::{run, run_traced, Trace, TraceEvent, TraceKind};
pub use metrics::{
    cdf_csv, consumers_csv, metrics_cdf, summary_json, write_outputs, ConsumerRecord, Metrics, OccupancySample,
    Outcome, RouterRecord, Summary,
};
pub use scenario::{load_scenario, BootstrapMethod, Mode, Scenario};
pub use topology::{load_topology, AdversaryRole, Link, Node, NodeId, NodeKind, Route, Service, Topology};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("cannot read {0}: {1}")]
    Io(String, String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid topology: {0}")]
    Topology(String),
    #[error("invalid scenario: {0}")]
    Scenario(String),
}
