use super::contact::{write_back, ContactSolver};
use super::forces::magnetic_force_between;
use super::{Command, PhysicsError, PhysicsParams, WorldState};
use crate::vec2::Vec2;

/// Per-env-step solver statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepDiagnostics {
    /// Largest per-substep norm of the summed internal (magnetic + contact)
    /// impulses. Zero up to rounding when Newton's third law holds.
    pub max_internal_impulse: f64,
    /// Deepest overlap left after the final substep.
    pub max_penetration: f64,
}

/// Advances the world by one env step.
pub fn step_world(
    world: &mut WorldState,
    commands: &[Command],
    params: &PhysicsParams,
) -> Result<StepDiagnostics, PhysicsError> {
    if commands.len() != world.robots.len() {
        return Err(PhysicsError::CommandLengthMismatch {
            expected: world.robots.len(),
            got: commands.len(),
        });
    }
    for (robot, &command) in world.robots.iter_mut().zip(commands) {
        robot.apply_command(command, params);
    }
    let mut diagnostics = StepDiagnostics::default();
    for _ in 0..params.substeps_per_env_step {
        let imbalance = substep(world, params);
        diagnostics.max_internal_impulse = diagnostics.max_internal_impulse.max(imbalance);
    }
    world.step_count += 1;
    diagnostics.max_penetration = world.max_penetration();
    Ok(diagnostics)
}

fn substep(world: &mut WorldState, params: &PhysicsParams) -> f64 {
    let dt = params.dt;
    let growth: Vec<f64> = world
        .robots
        .iter_mut()
        .map(|r| r.advance_radius(params))
        .collect();

    let updates = {
        let mut solver = ContactSolver::gather(world);
        for (body, g) in solver.bodies.iter_mut().zip(&growth) {
            body.growth = *g;
        }

        // Magnetic adhesion acts between robots only.
        let n_robots = world.robots.len();
        let mut applied = vec![Vec2::ZERO; solver.bodies.len()];
        for i in 0..n_robots {
            for j in (i + 1)..n_robots {
                let (a, b) = (&solver.bodies[i], &solver.bodies[j]);
                let (fa, fb) = magnetic_force_between(a.position, a.radius, b.position, b.radius, params);
                applied[i] += fa;
                applied[j] += fb;
            }
        }

        let momentum_before = solver.momentum();
        for (body, force) in solver.bodies.iter_mut().zip(&applied) {
            body.velocity += *force * (body.inv_mass * dt);
        }

        solver.build_contacts(params);
        solver.enable_ground_friction(params);
        let external = solver.solve_velocities(params.solver_iterations);
        let internal = solver.momentum() - momentum_before - external;

        for body in &mut solver.bodies {
            body.position += body.velocity * dt;
        }
        solver.correct_positions(params);
        (solver.into_updates(), internal.length())
    };
    write_back(world, &updates.0);
    updates.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{Actuation, RobotBody};

    fn params() -> PhysicsParams {
        PhysicsParams::default()
    }

    #[test]
    fn wrong_command_length() {
        let p = params();
        let mut w = WorldState::new(vec![RobotBody::contracted(0, Vec2::ZERO, &p)]);
        let err = step_world(&mut w, &[], &p).unwrap_err();
        assert_eq!(err, PhysicsError::CommandLengthMismatch { expected: 1, got: 0 });
    }

    #[test]
    fn resting_contracted_world_only_advances_counter() {
        let p = params();
        let robots = vec![
            RobotBody::contracted(0, Vec2::new(0.0, 0.0), &p),
            RobotBody::contracted(1, Vec2::new(2.0, 0.0), &p),
            RobotBody::contracted(2, Vec2::new(10.0, 3.0), &p),
        ];
        let mut w = WorldState::new(robots);
        let before = w.clone();
        let cmds = vec![Command::Contract; 3];
        for _ in 0..20 {
            step_world(&mut w, &cmds, &p).unwrap();
        }
        let mut expected = before;
        expected.step_count = 20;
        assert_eq!(w, expected);
    }

    #[test]
    fn isolated_robot_expands_in_place() {
        let p = params();
        let start = Vec2::new(3.0, -2.0);
        let mut w = WorldState::new(vec![RobotBody::contracted(0, start, &p)]);
        step_world(&mut w, &[Command::Expand], &p).unwrap();
        assert_eq!(w.robots[0].actuation, Actuation::Expanding);
        assert!(w.robots[0].radius > p.contracted_radius);
        for _ in 0..10 {
            step_world(&mut w, &[Command::Expand], &p).unwrap();
        }
        assert_eq!(w.robots[0].position, start);
        assert_eq!(w.robots[0].actuation, Actuation::IdleExpanded);
        assert_eq!(w.robots[0].radius, p.expanded_radius);
    }

    #[test]
    fn expanding_neighbour_pushes_pair_symmetrically() {
        let p = params();
        let mut w = WorldState::new(vec![
            RobotBody::contracted(0, Vec2::new(-1.0, 0.0), &p),
            RobotBody::contracted(1, Vec2::new(1.0, 0.0), &p),
        ]);
        let com = w.center_of_mass();
        for _ in 0..10 {
            step_world(&mut w, &[Command::Expand, Command::Contract], &p).unwrap();
        }
        assert!(w.robots[0].position.x < -1.0);
        assert!(w.robots[1].position.x > 1.0);
        let shift_left = -1.0 - w.robots[0].position.x;
        let shift_right = w.robots[1].position.x - 1.0;
        assert!((shift_left - shift_right).abs() < 1e-12);
        assert!(w.center_of_mass().distance(com) < 1e-12);
    }
}
