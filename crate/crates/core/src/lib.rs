//! Deterministic 2D simulator for particle robot swarms.

// `!(a < b)` is used on purpose in validation so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod env;
pub mod episode;
pub mod metrics;
pub mod physics;
pub mod policy;
pub mod protocol;
pub mod render;
pub mod scenario;
pub mod vec2;

pub use bench::{run_benchmark, BenchmarkMatrix, BenchmarkReport, Execution};
pub use env::{Action, EnvError, Observation, ParticleEnv, StepResult};
pub use episode::{run_episode, EpisodeError, EpisodeOptions};
pub use metrics::{compute_metrics, MetricsReport, TrajectoryLog};
pub use physics::{PhysicsError, PhysicsParams, WorldState};
pub use policy::{Policy, PolicySpec, WavePolicyParams};
pub use scenario::{ScenarioConfig, ScenarioError, TaskKind};
pub use vec2::Vec2;
