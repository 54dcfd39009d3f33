//! Trajectory logs, locomotion metrics, and their CSV forms.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::physics::{Actuation, WorldState};
use crate::scenario::ScenarioConfig;
use crate::vec2::Vec2;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("EmptyTrajectory: trajectory has no positions")]
    EmptyTrajectory,
    #[error("LengthMismatch: {positions} positions for {rewards} rewards (need exactly one more position)")]
    LengthMismatch { positions: usize, rewards: usize },
    #[error("BadCsv: line {line}: {reason}")]
    BadCsv { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One robot's state at one logged step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotSnapshot {
    pub robot_id: usize,
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
    pub state: Actuation,
    pub responsive: bool,
}

impl RobotSnapshot {
    pub fn capture(world: &WorldState) -> Vec<RobotSnapshot> {
        world
            .robots
            .iter()
            .map(|r| RobotSnapshot {
                robot_id: r.id,
                position: r.position,
                velocity: r.velocity,
                radius: r.radius,
                state: r.actuation,
                responsive: r.responsive,
            })
            .collect()
    }
}

/// Everything recorded over one episode. Index 0 of every per-step list is
/// the state right after reset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryLog {
    pub agent_positions: Vec<Vec2>,
    pub rewards: Vec<f64>,
    pub per_robot: Option<Vec<Vec<RobotSnapshot>>>,
    pub config_digest: String,
}

impl TrajectoryLog {
    pub fn new(config: &ScenarioConfig, initial: Vec2) -> Self {
        Self {
            agent_positions: vec![initial],
            rewards: Vec::new(),
            per_robot: None,
            config_digest: config_digest(config),
        }
    }

    pub fn push(&mut self, position: Vec2, reward: f64) {
        self.agent_positions.push(position);
        self.rewards.push(reward);
    }

    pub fn steps(&self) -> usize {
        self.rewards.len()
    }

    pub fn check(&self) -> Result<(), MetricsError> {
        if self.agent_positions.is_empty() {
            return Err(MetricsError::EmptyTrajectory);
        }
        if self.agent_positions.len() != self.rewards.len() + 1 {
            return Err(MetricsError::LengthMismatch {
                positions: self.agent_positions.len(),
                rewards: self.rewards.len(),
            });
        }
        Ok(())
    }
}

/// Hex SHA-256 of the config's canonical JSON encoding.
pub fn config_digest(config: &ScenarioConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub total_distance: f64,
    pub net_displacement: f64,
    /// Signed length of the net displacement along start -> goal.
    pub projected_displacement: f64,
    pub score_j: f64,
    /// Whether the agent came within the goal tolerance at any logged step.
    pub success: bool,
    pub steps: u64,
}

/// How the score and success flag are computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreSpec {
    pub gamma: f64,
    pub goal_tolerance: f64,
    /// `sum r_{k+1} gamma^k` instead of `sum r_{k+1} gamma^(T-k-1)`.
    pub conventional_discount: bool,
}

impl ScoreSpec {
    pub fn from_config(config: &ScenarioConfig) -> Self {
        Self {
            gamma: config.gamma,
            goal_tolerance: config.goal_tolerance,
            conventional_discount: config.conventional_discount,
        }
    }
}

impl Default for ScoreSpec {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            goal_tolerance: 1.0,
            conventional_discount: false,
        }
    }
}

/// Discounted return. By default the last reward carries weight 1 and
/// earlier ones are discounted more.
pub fn discounted_score(rewards: &[f64], gamma: f64, conventional: bool) -> f64 {
    if conventional {
        let mut weight = 1.0;
        let mut sum = 0.0;
        for r in rewards {
            sum += r * weight;
            weight *= gamma;
        }
        sum
    } else {
        // Horner form of sum_k r_{k+1} gamma^(T-k-1)
        rewards.iter().fold(0.0, |acc, r| acc * gamma + r)
    }
}

pub fn compute_metrics(traj: &TrajectoryLog, start: Vec2, goal: Vec2, gamma: f64) -> Result<MetricsReport, MetricsError> {
    compute_metrics_with(
        traj,
        start,
        goal,
        &ScoreSpec {
            gamma,
            ..ScoreSpec::default()
        },
    )
}

pub fn compute_metrics_with(
    traj: &TrajectoryLog,
    start: Vec2,
    goal: Vec2,
    spec: &ScoreSpec,
) -> Result<MetricsReport, MetricsError> {
    traj.check()?;
    let positions = &traj.agent_positions;
    let total_distance = positions.windows(2).map(|w| w[1].distance(w[0])).sum();
    let net = positions[positions.len() - 1] - positions[0];
    let success = positions.iter().any(|p| p.distance(goal) <= spec.goal_tolerance);
    Ok(MetricsReport {
        total_distance,
        net_displacement: net.length(),
        projected_displacement: net.project_onto(goal - start),
        score_j: discounted_score(&traj.rewards, spec.gamma, spec.conventional_discount),
        success,
        steps: traj.steps() as u64,
    })
}

pub const TRAJECTORY_HEADER: &str = "step,agent_x,agent_y,reward";
pub const ROBOTS_HEADER: &str = "step,robot_id,x,y,vx,vy,radius,state,responsive";

/// Writes `step,agent_x,agent_y,reward`. Step 0 is the reset state and has
/// an empty reward. Floats use the shortest text that parses back to the
/// same value.
pub fn write_trajectory_csv<W: Write>(traj: &TrajectoryLog, mut out: W) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for (step, p) in traj.agent_positions.iter().enumerate() {
        match step.checked_sub(1).and_then(|k| traj.rewards.get(k)) {
            Some(r) => writeln!(out, "{step},{:?},{:?},{r:?}", p.x, p.y)?,
            None => writeln!(out, "{step},{:?},{:?},", p.x, p.y)?,
        }
    }
    out.flush()
}

pub fn write_robots_csv<W: Write>(frames: &[Vec<RobotSnapshot>], mut out: W) -> io::Result<()> {
    writeln!(out, "{ROBOTS_HEADER}")?;
    for (step, frame) in frames.iter().enumerate() {
        for r in frame {
            writeln!(
                out,
                "{step},{},{:?},{:?},{:?},{:?},{:?},{},{}",
                r.robot_id,
                r.position.x,
                r.position.y,
                r.velocity.x,
                r.velocity.y,
                r.radius,
                r.state.as_str(),
                r.responsive
            )?;
        }
    }
    out.flush()
}

/// Parses a trajectory CSV into agent positions and rewards.
pub fn read_trajectory_csv<R: BufRead>(input: R) -> Result<(Vec<Vec2>, Vec<f64>), MetricsError> {
    let mut positions = Vec::new();
    let mut rewards = Vec::new();
    let mut lines = input.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim_end() != TRAJECTORY_HEADER {
        return Err(MetricsError::BadCsv {
            line: 1,
            reason: format!("expected header `{TRAJECTORY_HEADER}`"),
        });
    }
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: String| MetricsError::BadCsv { line: line_no, reason };
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != 4 {
            return Err(bad(format!("expected 4 fields, got {}", fields.len())));
        }
        let step: usize = fields[0].parse().map_err(|e| bad(format!("step: {e}")))?;
        if step != positions.len() {
            return Err(bad(format!("expected step {}, got {step}", positions.len())));
        }
        let x: f64 = fields[1].parse().map_err(|e| bad(format!("agent_x: {e}")))?;
        let y: f64 = fields[2].parse().map_err(|e| bad(format!("agent_y: {e}")))?;
        positions.push(Vec2::new(x, y));
        if step > 0 {
            rewards.push(fields[3].parse().map_err(|e| bad(format!("reward: {e}")))?);
        }
    }
    Ok((positions, rewards))
}

/// Parses a per-robot CSV back into frames indexed by step.
pub fn read_robots_csv<R: BufRead>(input: R) -> Result<Vec<Vec<RobotSnapshot>>, MetricsError> {
    let mut frames: Vec<Vec<RobotSnapshot>> = Vec::new();
    let mut lines = input.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim_end() != ROBOTS_HEADER {
        return Err(MetricsError::BadCsv {
            line: 1,
            reason: format!("expected header `{ROBOTS_HEADER}`"),
        });
    }
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: String| MetricsError::BadCsv { line: line_no, reason };
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != 9 {
            return Err(bad(format!("expected 9 fields, got {}", fields.len())));
        }
        let num = |i: usize| -> Result<f64, MetricsError> {
            fields[i]
                .parse::<f64>()
                .map_err(|e| bad(format!("field {i}: {e}")))
        };
        let step: usize = fields[0].parse().map_err(|e| bad(format!("step: {e}")))?;
        let robot_id: usize = fields[1].parse().map_err(|e| bad(format!("robot_id: {e}")))?;
        let state = Actuation::parse(fields[7]).ok_or_else(|| bad(format!("unknown state `{}`", fields[7])))?;
        let responsive: bool = fields[8].parse().map_err(|e| bad(format!("responsive: {e}")))?;
        let snap = RobotSnapshot {
            robot_id,
            position: Vec2::new(num(2)?, num(3)?),
            velocity: Vec2::new(num(4)?, num(5)?),
            radius: num(6)?,
            state,
            responsive,
        };
        if step < frames.len().saturating_sub(1) {
            return Err(bad(format!("step {step} appears after step {}", frames.len() - 1)));
        }
        while frames.len() <= step {
            frames.push(Vec::new());
        }
        frames[step].push(snap);
    }
    Ok(frames)
}
