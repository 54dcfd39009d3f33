//! Magnetic adhesion between robots and Coulomb ground friction.

use super::{PhysicsParams, RobotBody};
use crate::vec2::Vec2;

/// Constant-magnitude attraction between two robots whose surface gap lies
/// in `[0, g_max]`. Overlapping pairs are left to the contact solver and
/// coincident centers produce no force.
pub fn pairwise_magnetic_force(a: &RobotBody, b: &RobotBody, params: &PhysicsParams) -> (Vec2, Vec2) {
    magnetic_force_between(a.position, a.radius, b.position, b.radius, params)
}

pub(crate) fn magnetic_force_between(
    pa: Vec2,
    ra: f64,
    pb: Vec2,
    rb: f64,
    params: &PhysicsParams,
) -> (Vec2, Vec2) {
    let delta = pb - pa;
    let dist = delta.length();
    if dist == 0.0 {
        return (Vec2::ZERO, Vec2::ZERO);
    }
    let gap = dist - (ra + rb);
    if !(0.0..=params.magnetic_cutoff).contains(&gap) {
        return (Vec2::ZERO, Vec2::ZERO);
    }
    let on_a = delta * (params.magnetic_force / dist);
    (on_a, -on_a)
}

/// Coulomb friction with a single coefficient for the static and kinetic
/// regimes. Below `velocity_epsilon` the body is treated as resting and
/// friction cancels as much of `applied_force` as the limit allows.
pub fn ground_friction(velocity: Vec2, applied_force: Vec2, mass: f64, params: &PhysicsParams) -> Vec2 {
    let limit = params.friction_limit(mass);
    let speed = velocity.length();
    if speed > params.velocity_epsilon {
        return velocity * (-limit / speed);
    }
    let applied = applied_force.length();
    if applied <= limit {
        -applied_force
    } else {
        applied_force * (-limit / applied)
    }
}
