use serde::{Deserialize, Serialize};

use super::PhysicsError;

/// Constants of the disc-robot dynamics.
///
/// Field names on the wire keep the short symbols used in config files
/// (`r_c`, `r_e`, `f_mag`, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsParams {
    /// Substep length in seconds.
    pub dt: f64,
    pub substeps_per_env_step: u32,
    #[serde(rename = "r_c")]
    pub contracted_radius: f64,
    #[serde(rename = "r_e")]
    pub expanded_radius: f64,
    /// Env steps needed for one full expansion or contraction.
    pub tau_act: u32,
    pub mu: f64,
    pub gravity_g: f64,
    #[serde(rename = "f_mag")]
    pub magnetic_force: f64,
    #[serde(rename = "g_max")]
    pub magnetic_cutoff: f64,
    pub restitution: f64,
    pub baumgarte_beta: f64,
    pub slop: f64,
    pub velocity_epsilon: f64,
    #[serde(rename = "mass")]
    pub robot_mass: f64,
    pub solver_iterations: u32,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self {
            dt: 0.05,
            substeps_per_env_step: 4,
            contracted_radius: 1.0,
            expanded_radius: 1.5,
            tau_act: 5,
            mu: 0.1,
            gravity_g: 9.8,
            magnetic_force: 3.0,
            magnetic_cutoff: 1.0,
            restitution: 0.0,
            baumgarte_beta: 0.2,
            slop: 0.01,
            velocity_epsilon: 1e-3,
            robot_mass: 1.0,
            solver_iterations: 16,
        }
    }
}

impl PhysicsParams {
    /// Coulomb limit for a body of the given mass.
    #[inline]
    pub fn friction_limit(&self, mass: f64) -> f64 {
        self.mu * mass * self.gravity_g
    }

    /// Radius change per substep while actuating.
    #[inline]
    pub fn radius_rate_per_substep(&self) -> f64 {
        (self.expanded_radius - self.contracted_radius)
            / (f64::from(self.tau_act) * f64::from(self.substeps_per_env_step))
    }

    /// Length of one env step in seconds.
    #[inline]
    pub fn env_step_seconds(&self) -> f64 {
        self.dt * f64::from(self.substeps_per_env_step)
    }

    /// Checks positivity/range constraints, then the adhesion ordering for
    /// a swarm of `n_robots` identical robots.
    pub fn validate(&self, n_robots: usize) -> Result<(), PhysicsError> {
        self.validate_ranges()?;
        if n_robots == 0 {
            return Err(PhysicsError::NoRobots);
        }
        let f_f = self.friction_limit(self.robot_mass);
        let upper = (n_robots as f64 - 1.0) * f_f;
        if !(f_f < self.magnetic_force) {
            return Err(PhysicsError::FrictionDominates {
                magnetic: self.magnetic_force,
                friction: f_f,
            });
        }
        if !(self.magnetic_force < upper) {
            return Err(PhysicsError::CohesionDominates {
                magnetic: self.magnetic_force,
                upper_bound: upper,
            });
        }
        Ok(())
    }

    fn validate_ranges(&self) -> Result<(), PhysicsError> {
        let positive = [
            ("dt", self.dt),
            ("r_c", self.contracted_radius),
            ("r_e", self.expanded_radius),
            ("mu", self.mu),
            ("gravity_g", self.gravity_g),
            ("f_mag", self.magnetic_force),
            ("g_max", self.magnetic_cutoff),
            ("baumgarte_beta", self.baumgarte_beta),
            ("slop", self.slop),
            ("velocity_epsilon", self.velocity_epsilon),
            ("mass", self.robot_mass),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(PhysicsError::InvalidParam {
                    name,
                    reason: "must be finite and positive",
                });
            }
        }
        if self.substeps_per_env_step == 0 {
            return Err(PhysicsError::InvalidParam {
                name: "substeps_per_env_step",
                reason: "must be positive",
            });
        }
        if self.tau_act == 0 {
            return Err(PhysicsError::InvalidParam {
                name: "tau_act",
                reason: "must be positive",
            });
        }
        if self.solver_iterations == 0 {
            return Err(PhysicsError::InvalidParam {
                name: "solver_iterations",
                reason: "must be positive",
            });
        }
        if !(0.0..1.0).contains(&self.restitution) {
            return Err(PhysicsError::InvalidParam {
                name: "restitution",
                reason: "must lie in [0, 1)",
            });
        }
        if !(self.baumgarte_beta <= 1.0) {
            return Err(PhysicsError::InvalidParam {
                name: "baumgarte_beta",
                reason: "must not exceed 1",
            });
        }
        if !(self.contracted_radius < self.expanded_radius) {
            return Err(PhysicsError::InvalidParam {
                name: "r_e",
                reason: "must exceed r_c",
            });
        }
        if !(self.slop < self.contracted_radius / 10.0) {
            return Err(PhysicsError::InvalidParam {
                name: "slop",
                reason: "must be below r_c / 10",
            });
        }
        Ok(())
    }
}

/// Free-function form of [`PhysicsParams::validate`].
pub fn validate_physics_params(params: &PhysicsParams, n_robots: usize) -> Result<(), PhysicsError> {
    params.validate(n_robots)
}
