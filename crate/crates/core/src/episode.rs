//! Closed-loop rollouts of a named policy.

use thiserror::Error;

use crate::env::{EnvError, ParticleEnv};
use crate::metrics::{compute_metrics_with, MetricsError, MetricsReport, RobotSnapshot, ScoreSpec, TrajectoryLog};
use crate::policy::{PolicyError, PolicySpec};
use crate::scenario::ScenarioConfig;

#[derive(Debug, Error)]
pub enum EpisodeError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("PolicyInvalid: {0}")]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl EpisodeError {
    /// True when the failure is a rejected configuration rather than a
    /// runtime fault.
    pub fn is_validation(&self) -> bool {
        matches!(self, EpisodeError::Env(EnvError::Config(_)) | EpisodeError::Policy(_))
    }
}

/// Knobs that change what is recorded, never what is simulated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EpisodeOptions {
    pub record_robots: bool,
}

/// Seed for the random policy, kept off the spawn-jitter stream.
pub fn policy_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

/// Resets the environment with `seed`, drives it with `policy` until the
/// episode ends, and scores the agent trajectory.
pub fn run_episode(
    config: &ScenarioConfig,
    policy: &PolicySpec,
    seed: u64,
    options: EpisodeOptions,
) -> Result<(TrajectoryLog, MetricsReport), EpisodeError> {
    policy.validate(&config.physics)?;
    let mut env = ParticleEnv::new(config.clone())?;
    let (_, info) = env.reset(seed)?;
    let mut controller = policy.instantiate(policy_seed(seed));
    let mut log = TrajectoryLog::new(config, info.agent_position);
    let start = info.agent_position;

    let mut frames = Vec::new();
    if options.record_robots {
        frames.push(RobotSnapshot::capture(env.world().expect("reset world")));
    }
    loop {
        let world = env.world().expect("reset world");
        let commands = controller.act(world, config.goal, world.step_count);
        let result = env.step_commands(&commands)?;
        log.push(result.info.agent_position, result.reward);
        if options.record_robots {
            frames.push(RobotSnapshot::capture(env.world().expect("reset world")));
        }
        if result.terminated || result.truncated {
            break;
        }
    }
    if options.record_robots {
        log.per_robot = Some(frames);
    }
    let report = compute_metrics_with(&log, start, config.goal, &ScoreSpec::from_config(config))?;
    Ok((log, report))
}
