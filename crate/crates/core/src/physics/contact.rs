//! Sequential-impulse contact solver for discs and thick segments.
//!
//! Contacts carry a speculative separation so that growing discs push
//! their neighbours apart through velocity (momentum conserving), while
//! leftover overlap is removed afterwards by a positional projection that
//! does not touch velocities.

use super::{PhysicsParams, WorldState};
use crate::vec2::Vec2;

/// Speed (LU/s) below which a body on the ground counts as resting. One
/// substep of unbalanced force above the friction limit exceeds it, so it
/// never stops a body that is genuinely sliding.
const REST_SPEED: f64 = 1e-6;

#[derive(Debug, Clone)]
pub(crate) struct SolverBody {
    pub position: Vec2,
    pub velocity: Vec2,
    pub inv_mass: f64,
    pub radius: f64,
    /// Radius change applied this substep (before solving).
    pub growth: f64,
    /// Largest ground-friction impulse this substep (`mu m g dt`).
    pub friction_cap: f64,
    friction_impulse: Vec2,
}

impl SolverBody {
    #[inline]
    fn mass(&self) -> f64 {
        1.0 / self.inv_mass
    }
}

#[derive(Debug, Clone, Copy)]
enum Other {
    Body(usize),
    /// Closest point on a static segment plus the segment half-thickness.
    Static { obstacle: usize, segment: usize, half_thickness: f64 },
}

#[derive(Debug, Clone)]
struct Contact {
    a: usize,
    other: Other,
    normal: Vec2,
    target: f64,
    effective_inv_mass: f64,
    impulse: f64,
}

/// Bodies gathered from a world: robots first (by id), then the object.
pub(crate) struct ContactSolver<'w> {
    pub bodies: Vec<SolverBody>,
    world: &'w WorldState,
    contacts: Vec<Contact>,
}

impl<'w> ContactSolver<'w> {
    pub fn gather(world: &'w WorldState) -> Self {
        let mut bodies: Vec<SolverBody> = world
            .robots
            .iter()
            .map(|r| SolverBody {
                position: r.position,
                velocity: r.velocity,
                inv_mass: 1.0 / r.mass,
                radius: r.radius,
                growth: 0.0,
                friction_cap: 0.0,
                friction_impulse: Vec2::ZERO,
            })
            .collect();
        if let Some(o) = &world.object {
            bodies.push(SolverBody {
                position: o.position,
                velocity: o.velocity,
                inv_mass: 1.0 / o.mass,
                radius: o.radius,
                growth: 0.0,
                friction_cap: 0.0,
                friction_impulse: Vec2::ZERO,
            });
        }
        Self {
            bodies,
            world,
            contacts: Vec::new(),
        }
    }

    /// Separation excluding overlap that existed before this substep's
    /// radius growth. Pre-existing overlap is left to the position pass.
    fn speculative_gap(center_distance: f64, radii_now: f64, growth: f64) -> f64 {
        let gap_now = center_distance - radii_now;
        let gap_before = gap_now + growth;
        if gap_before >= 0.0 {
            gap_now
        } else {
            -growth
        }
    }

    /// Builds the contact list in deterministic order: body pairs
    /// lexicographically, then body/obstacle/segment triples.
    pub fn build_contacts(&mut self, params: &PhysicsParams) {
        self.contacts.clear();
        let dt = params.dt;
        let margin = params.magnetic_cutoff;
        let n = self.bodies.len();
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (&self.bodies[i], &self.bodies[j]);
                let delta = b.position - a.position;
                let dist = delta.length();
                if dist == 0.0 {
                    continue;
                }
                let radii = a.radius + b.radius;
                if dist - radii >= margin {
                    continue;
                }
                let normal = delta / dist;
                let gap = Self::speculative_gap(dist, radii, a.growth + b.growth);
                let vn0 = normal.dot(b.velocity - a.velocity);
                self.contacts.push(Contact {
                    a: i,
                    other: Other::Body(j),
                    normal,
                    target: Self::target_velocity(gap, vn0, dt, params.restitution),
                    effective_inv_mass: a.inv_mass + b.inv_mass,
                    impulse: 0.0,
                });
            }
        }
        for i in 0..n {
            let a = &self.bodies[i];
            for (oi, obstacle) in self.world.obstacles.iter().enumerate() {
                let half = obstacle.thickness / 2.0;
                for (si, seg) in obstacle.segments.iter().enumerate() {
                    let q = seg.closest_point(a.position);
                    let delta = q - a.position;
                    let dist = delta.length();
                    if dist == 0.0 {
                        continue;
                    }
                    let radii = a.radius + half;
                    if dist - radii >= margin {
                        continue;
                    }
                    let normal = delta / dist;
                    let gap = Self::speculative_gap(dist, radii, a.growth);
                    let vn0 = normal.dot(-a.velocity);
                    self.contacts.push(Contact {
                        a: i,
                        other: Other::Static {
                            obstacle: oi,
                            segment: si,
                            half_thickness: half,
                        },
                        normal,
                        target: Self::target_velocity(gap, vn0, dt, params.restitution),
                        effective_inv_mass: a.inv_mass,
                        impulse: 0.0,
                    });
                }
            }
        }
    }

    fn target_velocity(gap: f64, vn0: f64, dt: f64, restitution: f64) -> f64 {
        let speculative = -gap / dt;
        if gap <= 0.0 && vn0 < 0.0 {
            speculative.max(-restitution * vn0)
        } else {
            speculative
        }
    }

    /// Sets each body's ground-friction budget for a substep of `dt`.
    pub fn enable_ground_friction(&mut self, params: &PhysicsParams) {
        for b in &mut self.bodies {
            b.friction_cap = params.friction_limit(b.mass()) * params.dt;
        }
    }

    /// Sequential impulses: clamped normal impulses per contact, then a
    /// Coulomb ground-friction impulse per body bounded by its budget.
    /// Returns the total impulse exchanged with static geometry and the
    /// ground (external to the swarm).
    pub fn solve_velocities(&mut self, iterations: u32) -> Vec2 {
        for b in &mut self.bodies {
            b.friction_impulse = Vec2::ZERO;
        }
        for _ in 0..iterations {
            for c in &mut self.contacts {
                let va = self.bodies[c.a].velocity;
                let vb = match c.other {
                    Other::Body(j) => self.bodies[j].velocity,
                    Other::Static { .. } => Vec2::ZERO,
                };
                let vn = c.normal.dot(vb - va);
                let lambda = (c.target - vn) / c.effective_inv_mass;
                let accumulated = (c.impulse + lambda).max(0.0);
                let delta = accumulated - c.impulse;
                c.impulse = accumulated;
                if delta == 0.0 {
                    continue;
                }
                let p = c.normal * delta;
                let inv_a = self.bodies[c.a].inv_mass;
                self.bodies[c.a].velocity -= p * inv_a;
                if let Other::Body(j) = c.other {
                    let inv_b = self.bodies[j].inv_mass;
                    self.bodies[j].velocity += p * inv_b;
                }
            }
            for b in &mut self.bodies {
                if b.friction_cap == 0.0 {
                    continue;
                }
                let wanted = b.friction_impulse - b.velocity * b.mass();
                let len = wanted.length();
                let clamped = if len > b.friction_cap {
                    wanted * (b.friction_cap / len)
                } else {
                    wanted
                };
                let delta = clamped - b.friction_impulse;
                b.friction_impulse = clamped;
                b.velocity += delta * b.inv_mass;
            }
        }
        // Completes static friction: the truncated iteration leaves resting
        // bodies with ~1e-9 LU/s of residual velocity, enough to creep.
        for b in &mut self.bodies {
            if b.friction_cap > 0.0 && b.velocity.length() < REST_SPEED {
                b.friction_impulse -= b.velocity * b.mass();
                b.velocity = Vec2::ZERO;
            }
        }
        let walls = self
            .contacts
            .iter()
            .filter(|c| matches!(c.other, Other::Static { .. }))
            .fold(Vec2::ZERO, |acc, c| acc - c.normal * c.impulse);
        self.bodies.iter().fold(walls, |acc, b| acc + b.friction_impulse)
    }

    /// Baumgarte-style projection of positions for overlap beyond `slop`.
    pub fn correct_positions(&mut self, params: &PhysicsParams) {
        let beta = params.baumgarte_beta;
        let slop = params.slop;
        for _ in 0..params.solver_iterations {
            for c in &self.contacts {
                match c.other {
                    Other::Body(j) => {
                        let (a, b) = (&self.bodies[c.a], &self.bodies[j]);
                        let delta = b.position - a.position;
                        let dist = delta.length();
                        if dist == 0.0 {
                            continue;
                        }
                        let pen = a.radius + b.radius - dist;
                        if pen <= slop {
                            continue;
                        }
                        let normal = delta / dist;
                        let step = beta * (pen - slop) / c.effective_inv_mass;
                        let (ia, ib) = (a.inv_mass, b.inv_mass);
                        self.bodies[c.a].position -= normal * (step * ia);
                        self.bodies[j].position += normal * (step * ib);
                    }
                    Other::Static {
                        obstacle,
                        segment,
                        half_thickness,
                    } => {
                        let seg = self.world.obstacles[obstacle].segments[segment];
                        let a = &self.bodies[c.a];
                        let q = seg.closest_point(a.position);
                        let delta = q - a.position;
                        let dist = delta.length();
                        if dist == 0.0 {
                            continue;
                        }
                        let pen = a.radius + half_thickness - dist;
                        if pen <= slop {
                            continue;
                        }
                        let normal = delta / dist;
                        let step = beta * (pen - slop);
                        self.bodies[c.a].position -= normal * step;
                    }
                }
            }
        }
    }

    pub fn momentum(&self) -> Vec2 {
        self.bodies
            .iter()
            .fold(Vec2::ZERO, |acc, b| acc + b.velocity * b.mass())
    }

    /// Copies positions and velocities back into the world.
    pub fn into_updates(self) -> Vec<(Vec2, Vec2)> {
        self.bodies.into_iter().map(|b| (b.position, b.velocity)).collect()
    }
}

/// Removes approaching normal velocity at every touching or overlapping
/// contact, then projects out overlap beyond `slop`. Robot radii are
/// treated as fixed.
pub fn resolve_contacts(world: &mut WorldState, params: &PhysicsParams) {
    let updates = {
        let mut solver = ContactSolver::gather(world);
        solver.build_contacts(params);
        solver.solve_velocities(params.solver_iterations);
        solver.correct_positions(params);
        solver.into_updates()
    };
    write_back(world, &updates);
}

pub(crate) fn write_back(world: &mut WorldState, updates: &[(Vec2, Vec2)]) {
    let n = world.robots.len();
    for (robot, &(p, v)) in world.robots.iter_mut().zip(updates) {
        robot.position = p;
        robot.velocity = v;
    }
    if let Some(o) = world.object.as_mut() {
        let (p, v) = updates[n];
        o.position = p;
        o.velocity = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::RobotBody;

    fn pair(x0: f64, x1: f64) -> WorldState {
        let p = PhysicsParams::default();
        WorldState::new(vec![
            RobotBody::contracted(0, Vec2::new(x0, 0.0), &p),
            RobotBody::contracted(1, Vec2::new(x1, 0.0), &p),
        ])
    }

    #[test]
    fn separated_bodies_untouched() {
        let p = PhysicsParams::default();
        let mut w = pair(0.0, 5.0);
        w.robots[0].velocity = Vec2::new(0.3, 0.0);
        let before = w.clone();
        resolve_contacts(&mut w, &p);
        assert_eq!(w, before);
    }

    #[test]
    fn inelastic_head_on_equalizes_normal_velocity() {
        let p = PhysicsParams::default();
        let mut w = pair(0.0, 2.0);
        w.robots[0].velocity = Vec2::new(1.0, 0.0);
        w.robots[1].velocity = Vec2::new(-1.0, 0.0);
        resolve_contacts(&mut w, &p);
        let va = w.robots[0].velocity.x;
        let vb = w.robots[1].velocity.x;
        assert!((va - vb).abs() < 1e-12, "{va} vs {vb}");
        assert!((va + vb).abs() < 1e-12);
    }

    #[test]
    fn overlap_is_projected_out() {
        let p = PhysicsParams::default();
        let mut w = pair(0.0, 1.8);
        for _ in 0..p.substeps_per_env_step {
            resolve_contacts(&mut w, &p);
        }
        let d = w.robots[0].position.distance(w.robots[1].position);
        assert!(d >= 2.0 - 2.0 * p.slop, "distance {d}");
        // projection only: no velocity injected
        assert_eq!(w.robots[0].velocity, Vec2::ZERO);
    }

    #[test]
    fn speculative_gap_ignores_old_overlap() {
        assert_eq!(ContactSolver::speculative_gap(2.0, 2.0, 0.0), 0.0);
        assert_eq!(ContactSolver::speculative_gap(1.9, 2.0, 0.05), -0.05);
        assert!((ContactSolver::speculative_gap(2.0, 2.05, 0.05) + 0.05).abs() < 1e-15);
        assert_eq!(ContactSolver::speculative_gap(2.5, 2.0, 0.0), 0.5);
    }
}
