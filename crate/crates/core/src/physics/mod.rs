//! Fixed-timestep dynamics for expansion-disc robots.

mod contact;
mod forces;
mod params;
mod step;
mod world;

use thiserror::Error;

pub use contact::resolve_contacts;
pub use forces::{ground_friction, pairwise_magnetic_force};
pub use params::{validate_physics_params, PhysicsParams};
pub use step::{step_world, StepDiagnostics};
pub use world::{
    apply_actuation_command, Actuation, Command, DynamicObject, RobotBody, Segment, StaticObstacle, WorldState,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhysicsError {
    #[error("FrictionDominates: magnetic force {magnetic} does not exceed per-robot friction {friction}")]
    FrictionDominates { magnetic: f64, friction: f64 },
    #[error("CohesionDominates: magnetic force {magnetic} is not below swarm friction bound {upper_bound}")]
    CohesionDominates { magnetic: f64, upper_bound: f64 },
    #[error("invalid physics parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: &'static str },
    #[error("a swarm needs at least one robot")]
    NoRobots,
    #[error("CommandLengthMismatch: expected {expected} commands, got {got}")]
    CommandLengthMismatch { expected: usize, got: usize },
    #[error("invalid world: {0}")]
    InvalidWorld(String),
}

impl PhysicsError {
    /// Stable variant name, used in diagnostics and wire replies.
    pub fn code(&self) -> &'static str {
        match self {
            PhysicsError::FrictionDominates { .. } => "FrictionDominates",
            PhysicsError::CohesionDominates { .. } => "CohesionDominates",
            PhysicsError::InvalidParam { .. } => "InvalidParam",
            PhysicsError::NoRobots => "NoRobots",
            PhysicsError::CommandLengthMismatch { .. } => "CommandLengthMismatch",
            PhysicsError::InvalidWorld(_) => "InvalidWorld",
        }
    }
}
