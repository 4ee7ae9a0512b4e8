//! Simulation scenarios, replication harness and real-data procedures.

pub mod benchmark;
pub mod datasets;
pub mod ise;
pub mod loglik;
pub mod replications;
pub mod scenarios;
pub mod sweep;

pub use benchmark::{cpu_benchmark, BenchmarkRow};
pub use ise::{integrated_squared_error, IseOutcome};
pub use loglik::{avg_loglik_crossval, LoglikConfig, LoglikRow};
pub use replications::{run_ise_replications, select_bandwidths, ReplicationConfig, ReplicationReport, Selector};
pub use scenarios::{scenario_density, scenario_sample, ScenarioId};
pub use sweep::{sensitivity_sweep, SweepRow};
