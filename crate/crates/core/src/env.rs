//! Episodic reset/step interface around a simulated world.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::physics::{step_world, Command, PhysicsError, WorldState};
use crate::scenario::{build_scenario_seeded, ScenarioConfig, ScenarioError, TaskKind};
use crate::vec2::Vec2;

/// Largest swarm for which the integer action encoding is accepted.
pub const MAX_DISCRETE_ROBOTS: usize = 30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("NotReset: call reset before step")]
    NotReset,
    #[error("EpisodeOver: the episode has ended, call reset")]
    EpisodeOver,
    #[error("ActionLengthMismatch: expected {expected} entries, got {got}")]
    ActionLengthMismatch { expected: usize, got: usize },
    #[error("OutOfRange: {0}")]
    OutOfRange(String),
    #[error(transparent)]
    Config(#[from] ScenarioError),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
}

impl EnvError {
    pub fn code(&self) -> &'static str {
        match self {
            EnvError::NotReset => "NotReset",
            EnvError::EpisodeOver => "EpisodeOver",
            EnvError::ActionLengthMismatch { .. } => "ActionLengthMismatch",
            EnvError::OutOfRange(_) => "OutOfRange",
            EnvError::Config(e) => e.code(),
            EnvError::Physics(e) => e.code(),
        }
    }
}

/// Joint command for the swarm.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Action {
    Discrete(u64),
    Binary(Vec<u8>),
}

/// Bits of `value`, least-significant bit first: entry `i` is robot `i`.
pub fn decode_action(value: u64, n: usize) -> Result<Vec<u8>, EnvError> {
    if n > 64 || (n < 64 && value >> n != 0) {
        return Err(EnvError::OutOfRange(format!("action {value} does not fit in {n} bits")));
    }
    Ok((0..n).map(|i| ((value >> i) & 1) as u8).collect())
}

/// Inverse of [`decode_action`].
pub fn encode_action(bits: &[u8]) -> Result<u64, EnvError> {
    if bits.len() > 64 {
        return Err(EnvError::OutOfRange(format!("{} robots do not fit in 64 bits", bits.len())));
    }
    bits.iter().enumerate().try_fold(0u64, |acc, (i, &b)| match b {
        0 => Ok(acc),
        1 => Ok(acc | (1 << i)),
        _ => Err(EnvError::OutOfRange(format!("entry {i} is {b}, expected 0 or 1"))),
    })
}

impl Action {
    /// Per-robot commands for a swarm of `n`.
    pub fn to_commands(&self, n: usize) -> Result<Vec<Command>, EnvError> {
        let bits = match self {
            Action::Discrete(v) => {
                if n > MAX_DISCRETE_ROBOTS {
                    return Err(EnvError::OutOfRange(format!(
                        "discrete actions need at most {MAX_DISCRETE_ROBOTS} robots, swarm has {n}"
                    )));
                }
                decode_action(*v, n)?
            }
            Action::Binary(bits) => {
                if bits.len() != n {
                    return Err(EnvError::ActionLengthMismatch {
                        expected: n,
                        got: bits.len(),
                    });
                }
                if let Some((i, b)) = bits.iter().enumerate().find(|(_, &b)| b > 1) {
                    return Err(EnvError::OutOfRange(format!("entry {i} is {b}, expected 0 or 1")));
                }
                bits.clone()
            }
        };
        Ok(bits.into_iter().map(|b| Command::from_bit(b == 1)).collect())
    }

    pub fn from_commands(commands: &[Command]) -> Self {
        Action::Binary(commands.iter().map(|c| c.as_bit()).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectState {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub robot_x: Vec<f64>,
    pub robot_y: Vec<f64>,
    pub robot_vx: Vec<f64>,
    pub robot_vy: Vec<f64>,
    pub object_state: Option<ObjectState>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub robot_goal_distance: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub robot_expansion: Option<Vec<f64>>,
}

impl Observation {
    pub fn from_world(world: &WorldState, config: &ScenarioConfig) -> Self {
        let robots = &world.robots;
        Self {
            robot_x: robots.iter().map(|r| r.position.x).collect(),
            robot_y: robots.iter().map(|r| r.position.y).collect(),
            robot_vx: robots.iter().map(|r| r.velocity.x).collect(),
            robot_vy: robots.iter().map(|r| r.velocity.y).collect(),
            object_state: world.object.as_ref().map(|o| ObjectState {
                x: o.position.x,
                y: o.position.y,
                vx: o.velocity.x,
                vy: o.velocity.y,
            }),
            robot_goal_distance: config
                .observe_goal_distance
                .then(|| robots.iter().map(|r| r.position.distance(config.goal)).collect()),
            robot_expansion: config
                .observe_expansion
                .then(|| robots.iter().map(|r| r.expansion(&config.physics)).collect()),
        }
    }

    /// `x ‖ y ‖ vx ‖ vy ‖ object(x, y, vx, vy) ‖ goal distance ‖ expansion`,
    /// skipping absent parts.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.robot_x.len() * 4 + 4);
        out.extend_from_slice(&self.robot_x);
        out.extend_from_slice(&self.robot_y);
        out.extend_from_slice(&self.robot_vx);
        out.extend_from_slice(&self.robot_vy);
        if let Some(o) = &self.object_state {
            out.extend_from_slice(&[o.x, o.y, o.vx, o.vy]);
        }
        if let Some(d) = &self.robot_goal_distance {
            out.extend_from_slice(d);
        }
        if let Some(e) = &self.robot_expansion {
            out.extend_from_slice(e);
        }
        out
    }
}

/// Flattened observation length for a config.
pub fn observation_dim(config: &ScenarioConfig) -> usize {
    let n = config.n_robots;
    4 * n
        + if config.task.has_object() { 4 } else { 0 }
        + if config.observe_goal_distance { n } else { 0 }
        + if config.observe_expansion { n } else { 0 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub agent_position: Vec2,
    pub step_count: u64,
    pub center_of_mass: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub info: StepInfo,
}

/// Goal and shaping threshold of the piecewise progress reward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardSpec {
    pub goal: Vec2,
    pub threshold_d: f64,
    /// Floor for the goal distance in the near-goal branch.
    pub goal_tolerance: f64,
}

impl RewardSpec {
    pub fn from_config(config: &ScenarioConfig) -> Self {
        Self {
            goal: config.goal,
            threshold_d: config.reward_threshold_d,
            goal_tolerance: config.goal_tolerance,
        }
    }
}

/// Progress of the agent toward the goal between two steps.
///
/// Far from the goal this is the displacement projected on the direction
/// from `prev` to the goal. Within `threshold_d` it is scaled by
/// `d / distance`, with the distance floored at `goal_tolerance`.
pub fn compute_reward(prev: Vec2, curr: Vec2, spec: &RewardSpec) -> f64 {
    let displacement = curr - prev;
    if displacement.length() == 0.0 {
        return 0.0;
    }
    // |disp| cos(theta)
    let progress = displacement.project_onto(spec.goal - prev);
    let remaining = spec.goal.distance(curr);
    if remaining > spec.threshold_d {
        progress
    } else {
        progress * spec.threshold_d / remaining.max(spec.goal_tolerance)
    }
}

/// Reward-bearing point: swarm center of mass, or the object center when
/// there is one to manipulate.
pub fn agent_position(world: &WorldState, task: TaskKind) -> Vec2 {
    match (task, &world.object) {
        (TaskKind::ObjectManip, Some(o)) => o.position,
        _ => world.center_of_mass(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    AwaitingReset,
    Active,
    Done,
}

/// One simulated episode at a time.
#[derive(Debug, Clone)]
pub struct ParticleEnv {
    config: ScenarioConfig,
    world: Option<WorldState>,
    phase: Phase,
}

impl ParticleEnv {
    pub fn new(config: ScenarioConfig) -> Result<Self, EnvError> {
        config.validate()?;
        Ok(Self {
            config,
            world: None,
            phase: Phase::AwaitingReset,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn world(&self) -> Option<&WorldState> {
        self.world.as_ref()
    }

    pub fn is_done(&self) -> bool {
        self.phase == Phase::Done
    }

    pub fn observation_dim(&self) -> usize {
        observation_dim(&self.config)
    }

    /// Starts a new episode; `seed` drives the spawn jitter.
    pub fn reset(&mut self, seed: u64) -> Result<(Observation, StepInfo), EnvError> {
        let world = build_scenario_seeded(&self.config, seed)?;
        let obs = Observation::from_world(&world, &self.config);
        let info = self.info(&world);
        self.world = Some(world);
        self.phase = Phase::Active;
        Ok((obs, info))
    }

    /// Replaces the config and resets.
    pub fn reset_with(&mut self, config: ScenarioConfig, seed: u64) -> Result<(Observation, StepInfo), EnvError> {
        config.validate()?;
        self.config = config;
        self.reset(seed)
    }

    pub fn step(&mut self, action: &Action) -> Result<StepResult, EnvError> {
        match self.phase {
            Phase::AwaitingReset => return Err(EnvError::NotReset),
            Phase::Done => return Err(EnvError::EpisodeOver),
            Phase::Active => {}
        }
        let n = self.config.n_robots;
        let commands = action.to_commands(n)?;
        self.step_commands(&commands)
    }

    pub fn step_commands(&mut self, commands: &[Command]) -> Result<StepResult, EnvError> {
        match self.phase {
            Phase::AwaitingReset => return Err(EnvError::NotReset),
            Phase::Done => return Err(EnvError::EpisodeOver),
            Phase::Active => {}
        }
        let config = &self.config;
        let world = self.world.as_mut().ok_or(EnvError::NotReset)?;
        if commands.len() != world.robots.len() {
            return Err(EnvError::ActionLengthMismatch {
                expected: world.robots.len(),
                got: commands.len(),
            });
        }
        let before = agent_position(world, config.task);
        step_world(world, commands, &config.physics)?;
        let after = agent_position(world, config.task);
        let reward = compute_reward(before, after, &RewardSpec::from_config(config));

        let at_goal = config.goal.distance(after) <= config.goal_tolerance;
        let terminated = at_goal && !config.run_to_horizon;
        let truncated = !terminated && world.step_count >= config.horizon;
        let observation = Observation::from_world(world, config);
        let info = self.info(self.world.as_ref().expect("world present"));
        if terminated || truncated {
            self.phase = Phase::Done;
        }
        Ok(StepResult {
            observation,
            reward,
            terminated,
            truncated,
            info,
        })
    }

    fn info(&self, world: &WorldState) -> StepInfo {
        StepInfo {
            agent_position: agent_position(world, self.config.task),
            step_count: world.step_count,
            center_of_mass: world.center_of_mass(),
        }
    }
}
