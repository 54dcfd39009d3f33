//! Reference controllers: the longitudinal wave, seeded random bits, and
//! an always-contracted baseline.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::physics::{Command, PhysicsParams, WorldState};
use crate::vec2::Vec2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("wave period {period} must be at least two actuation times ({min} env steps)")]
    PeriodTooShort { period: u32, min: u32 },
    #[error("wavelength must be finite and positive, got {0}")]
    BadWavelength(f64),
    #[error("direction_sign must be +1 or -1, got {0}")]
    BadDirection(i8),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WavePolicyParams {
    /// Env steps per expansion/contraction cycle.
    #[serde(rename = "period_p")]
    pub period: u32,
    /// Spatial period of the phase, in LU of goal distance.
    #[serde(rename = "wavelength_lambda")]
    pub wavelength: f64,
    /// +1 sends the phase wave away from the goal.
    pub direction_sign: i8,
}

impl Default for WavePolicyParams {
    fn default() -> Self {
        Self {
            period: 30,
            wavelength: 16.0,
            direction_sign: 1,
        }
    }
}

impl WavePolicyParams {
    pub fn validate(&self, physics: &PhysicsParams) -> Result<(), PolicyError> {
        let min = 2 * physics.tau_act;
        if self.period < min {
            return Err(PolicyError::PeriodTooShort {
                period: self.period,
                min,
            });
        }
        if !(self.wavelength.is_finite() && self.wavelength > 0.0) {
            return Err(PolicyError::BadWavelength(self.wavelength));
        }
        if self.direction_sign != 1 && self.direction_sign != -1 {
            return Err(PolicyError::BadDirection(self.direction_sign));
        }
        Ok(())
    }

    /// Phase of a robot at goal distance `distance` at env step `t`.
    pub fn phase(&self, distance: f64, t: u64) -> f64 {
        TAU * t as f64 / f64::from(self.period) - f64::from(self.direction_sign) * TAU * distance / self.wavelength
    }

    pub fn command_at(&self, distance: f64, t: u64) -> Command {
        Command::from_bit(self.phase(distance, t).sin() > 0.0)
    }
}

/// Wave command for every robot: expand while the sine of its phase is
/// strictly positive.
pub fn wave_action(world: &WorldState, goal: Vec2, t: u64, params: &WavePolicyParams) -> Vec<Command> {
    world
        .robots
        .iter()
        .map(|r| params.command_at(goal.distance(r.position), t))
        .collect()
}

/// Seeded stream of fair bits.
#[derive(Debug, Clone)]
pub struct RandomPolicyState {
    rng: ChaCha8Rng,
}

impl RandomPolicyState {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

pub fn random_action(state: &mut RandomPolicyState, n: usize) -> Vec<Command> {
    (0..n).map(|_| Command::from_bit(state.rng.gen::<bool>())).collect()
}

/// Named policy selection as written in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PolicySpec {
    Wave {
        #[serde(flatten)]
        params: WavePolicyParams,
    },
    Random,
    AllContract,
}

impl Default for PolicySpec {
    fn default() -> Self {
        PolicySpec::Wave {
            params: WavePolicyParams::default(),
        }
    }
}

impl PolicySpec {
    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::Wave { .. } => "wave",
            PolicySpec::Random => "random",
            PolicySpec::AllContract => "all-contract",
        }
    }

    /// Default spec for a policy name.
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "wave" => PolicySpec::default(),
            "random" => PolicySpec::Random,
            "all-contract" => PolicySpec::AllContract,
            _ => return None,
        })
    }

    pub fn validate(&self, physics: &PhysicsParams) -> Result<(), PolicyError> {
        match self {
            PolicySpec::Wave { params } => params.validate(physics),
            PolicySpec::Random | PolicySpec::AllContract => Ok(()),
        }
    }

    /// A runnable controller; `seed` only matters for the random policy.
    pub fn instantiate(&self, seed: u64) -> Policy {
        match self {
            PolicySpec::Wave { params } => Policy::Wave(*params),
            PolicySpec::Random => Policy::Random(RandomPolicyState::new(seed)),
            PolicySpec::AllContract => Policy::AllContract,
        }
    }
}

/// One per episode, so the RNG state is kept inline.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
pub enum Policy {
    Wave(WavePolicyParams),
    Random(RandomPolicyState),
    AllContract,
}

impl Policy {
    pub fn act(&mut self, world: &WorldState, goal: Vec2, t: u64) -> Vec<Command> {
        match self {
            Policy::Wave(params) => wave_action(world, goal, t, params),
            Policy::Random(state) => random_action(state, world.robots.len()),
            Policy::AllContract => vec![Command::Contract; world.robots.len()],
        }
    }
}
