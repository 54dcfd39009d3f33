use partbot::env::{decode_action, encode_action, ParticleEnv};
use partbot::metrics::{compute_metrics_with, discounted_score, ScoreSpec, TrajectoryLog};
use partbot::physics::{step_world, Command, PhysicsParams, RobotBody, Segment, WorldState};
use partbot::scenario::{build_scenario_seeded, ScenarioConfig, TaskKind};
use partbot::vec2::Vec2;
use proptest::prelude::*;

fn task_strategy() -> impl Strategy<Value = TaskKind> {
    prop::sample::select(TaskKind::ALL.to_vec())
}

fn commands_from_bits(bits: u64, n: usize) -> Vec<Command> {
    (0..n).map(|i| Command::from_bit(bits >> (i % 64) & 1 == 1)).collect()
}

// ---- reflections used by the mirror test -------------------------------

#[derive(Debug, Clone, Copy)]
enum Mirror {
    FlipX,
    SwapXY,
}

fn reflect(m: Mirror, v: Vec2) -> Vec2 {
    match m {
        Mirror::FlipX => Vec2::new(-v.x, v.y),
        Mirror::SwapXY => Vec2::new(v.y, v.x),
    }
}

fn reflect_world(m: Mirror, w: &WorldState) -> WorldState {
    let mut out = w.clone();
    for r in &mut out.robots {
        r.position = reflect(m, r.position);
        r.velocity = reflect(m, r.velocity);
    }
    if let Some(o) = &mut out.object {
        o.position = reflect(m, o.position);
        o.velocity = reflect(m, o.velocity);
    }
    for obs in &mut out.obstacles {
        for s in &mut obs.segments {
            *s = Segment::new(reflect(m, s.a), reflect(m, s.b));
        }
    }
    out
}

fn mirror_divergence(m: Mirror, original: &WorldState, mirrored: &WorldState) -> f64 {
    let mut worst: f64 = 0.0;
    for (a, b) in original.robots.iter().zip(&mirrored.robots) {
        worst = worst.max(reflect(m, a.position).distance(b.position));
    }
    if let (Some(a), Some(b)) = (&original.object, &mirrored.object) {
        worst = worst.max(reflect(m, a.position).distance(b.position));
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn mirror_symmetry(task in task_strategy(), seed in 0u64..1000, script in prop::collection::vec(any::<u64>(), 150), swap in any::<bool>()) {
        let m = if swap { Mirror::SwapXY } else { Mirror::FlipX };
        let cfg = ScenarioConfig::for_task(task);
        let mut world = build_scenario_seeded(&cfg, seed).unwrap();
        let mut mirrored = reflect_world(m, &world);
        for bits in script {
            let cmds = commands_from_bits(bits, world.robots.len());
            step_world(&mut world, &cmds, &cfg.physics).unwrap();
            step_world(&mut mirrored, &cmds, &cfg.physics).unwrap();
            let d = mirror_divergence(m, &world, &mirrored);
            prop_assert!(d < 1e-6, "divergence {d} at step {}", world.step_count);
        }
    }

    #[test]
    fn quiescence(task in task_strategy(), seed in 0u64..1000) {
        let cfg = ScenarioConfig::for_task(task);
        let mut env = ParticleEnv::new(cfg.clone()).unwrap();
        env.reset(seed).unwrap();
        let start = env.world().unwrap().clone();
        let cmds = vec![Command::Contract; cfg.n_robots];
        for _ in 0..150 {
            env.step_commands(&cmds).unwrap();
        }
        let end = env.world().unwrap();
        prop_assert_eq!(end.center_of_mass(), start.center_of_mass());
        if let (Some(a), Some(b)) = (&end.object, &start.object) {
            prop_assert!(a.position.distance(b.position) < 1e-12);
        }
    }

    #[test]
    fn contact_bounds_hold_under_any_commands(task in task_strategy(), seed in 0u64..1000, script in prop::collection::vec(any::<u64>(), 200)) {
        let cfg = ScenarioConfig::for_task(task);
        let mut world = build_scenario_seeded(&cfg, seed).unwrap();
        let slop = cfg.physics.slop;
        prop_assert!(world.max_penetration() <= 2.0 * slop);
        for bits in script {
            let cmds = commands_from_bits(bits, world.robots.len());
            let diag = step_world(&mut world, &cmds, &cfg.physics).unwrap();
            prop_assert!(diag.max_penetration <= 2.0 * slop, "penetration {}", diag.max_penetration);
            prop_assert!(diag.max_internal_impulse < 1e-9, "impulse imbalance {}", diag.max_internal_impulse);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn lone_robot_never_moves(x in -50.0f64..50.0, y in -50.0f64..50.0, script in prop::collection::vec(any::<bool>(), 500)) {
        let p = PhysicsParams::default();
        let start = Vec2::new(x, y);
        let mut w = WorldState::new(vec![RobotBody::contracted(0, start, &p)]);
        for bit in script {
            step_world(&mut w, &[Command::from_bit(bit)], &p).unwrap();
        }
        prop_assert!(w.center_of_mass().distance(start) < 1e-9);
    }
}

// ---- metrics ------------------------------------------------------------

fn point() -> impl Strategy<Value = (f64, f64)> {
    (-100.0f64..100.0, -100.0f64..100.0)
}

/// Independent re-derivation from the raw log: the projection goes through
/// the angle between the two vectors rather than a normalized dot product.
fn oracle(positions: &[Vec2], rewards: &[f64], goal: Vec2, gamma: f64) -> (f64, f64, f64, f64) {
    let mut total = 0.0;
    for k in 1..positions.len() {
        let dx = positions[k].x - positions[k - 1].x;
        let dy = positions[k].y - positions[k - 1].y;
        total += (dx * dx + dy * dy).sqrt();
    }
    let (fx, fy) = (positions[positions.len() - 1].x - positions[0].x, positions[positions.len() - 1].y - positions[0].y);
    let net = (fx * fx + fy * fy).sqrt();
    let (gx, gy) = (goal.x - positions[0].x, goal.y - positions[0].y);
    let projected = if net == 0.0 || (gx == 0.0 && gy == 0.0) {
        0.0
    } else {
        let theta = fy.atan2(fx) - gy.atan2(gx);
        net * theta.cos()
    };
    let t = rewards.len() as i32;
    let score = rewards.iter().enumerate().map(|(k, r)| r * gamma.powi(t - k as i32 - 1)).sum();
    (total, net, projected, score)
}

proptest! {
    #[test]
    fn metric_ordering_and_oracle(points in prop::collection::vec(point(), 1..60), goal in point(), gamma in 0.5f64..=1.0, seed in any::<u64>()) {
        let positions: Vec<Vec2> = points.iter().map(|&(x, y)| Vec2::new(x, y)).collect();
        let rewards: Vec<f64> = (0..positions.len() - 1).map(|k| ((seed >> (k % 64)) & 7) as f64 - 3.5).collect();
        let goal = Vec2::new(goal.0, goal.1);
        let log = TrajectoryLog { agent_positions: positions.clone(), rewards: rewards.clone(), per_robot: None, config_digest: String::new() };
        let spec = ScoreSpec { gamma, ..ScoreSpec::default() };
        let m = compute_metrics_with(&log, positions[0], goal, &spec).unwrap();

        prop_assert!(m.projected_displacement.abs() <= m.net_displacement + 1e-9);
        prop_assert!(m.net_displacement <= m.total_distance + 1e-9);

        let (total, net, projected, score) = oracle(&positions, &rewards, goal, gamma);
        let tol = |x: f64| 1e-9 * (1.0 + x.abs());
        prop_assert!((m.total_distance - total).abs() <= tol(total));
        prop_assert!((m.net_displacement - net).abs() <= tol(net));
        prop_assert!((m.projected_displacement - projected).abs() <= 1e-8 * (1.0 + net));
        prop_assert!((m.score_j - score).abs() <= 1e-9 * (1.0 + score.abs()) * rewards.len() as f64);
    }

    #[test]
    fn unit_gamma_score_is_plain_sum(rewards in prop::collection::vec(-10.0f64..10.0, 0..100)) {
        let plain: f64 = rewards.iter().sum();
        prop_assert!((discounted_score(&rewards, 1.0, false) - plain).abs() < 1e-9);
        prop_assert!((discounted_score(&rewards, 1.0, true) - plain).abs() < 1e-9);
    }

    #[test]
    fn action_codec_round_trips(n in 1usize..=30, raw in any::<u64>()) {
        let value = raw & ((1u64 << n) - 1);
        let bits = decode_action(value, n).unwrap();
        prop_assert_eq!(bits.len(), n);
        for (i, &b) in bits.iter().enumerate() {
            prop_assert_eq!(u64::from(b), (value / 2u64.pow(i as u32)) % 2);
        }
        prop_assert_eq!(encode_action(&bits).unwrap(), value);
        prop_assert!(decode_action(value | (1u64 << n), n).is_err());
    }
}
