//! Discrete-time cluster simulation driven by a traffic series.
//!
//! Each tick: finished tasks leave, queued tasks and then new arrivals are
//! dispatched, an optional rebalancing pass migrates tasks, and every
//! server's instantaneous utilization is recorded. Every `window` ticks the
//! recorded utilizations are averaged and turned into an
//! [`ImbalanceReport`](crate::metrics::ImbalanceReport).

mod arrivals;
mod cluster;
mod policy;
mod scenario;
mod task;

pub use arrivals::{arrivals_from_traffic, ArrivalStreams};
pub use cluster::{ClusterState, Migration, TaskCounters};
pub use policy::{Policy, PolicyKind};
pub use scenario::{
    cv_isl_tot_final_half, depth_for_horizon, mean_isl_tot_final_quarter, reference_cluster,
    run_scenario, simulate, ScenarioConfig, ScenarioOutcome, TrafficSource, WindowReport,
    DEFAULT_ARRIVAL_SCALE, DEFAULT_CALIBRATION_BUDGET, DEFAULT_HORIZON, DEFAULT_WINDOW,
    MIN_HORIZON,
};
pub use task::{DemandDistribution, DemandParams, ServiceClass, Task};
