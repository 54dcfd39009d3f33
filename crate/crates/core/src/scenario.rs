//! Initial worlds for the four benchmark tasks.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::physics::{step_world, Command, DynamicObject, PhysicsError, PhysicsParams, RobotBody, Segment, StaticObstacle, WorldState};
use crate::vec2::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    SimpleNav,
    ObstacleNav,
    UnresponsiveNav,
    ObjectManip,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] = [
        TaskKind::SimpleNav,
        TaskKind::ObstacleNav,
        TaskKind::UnresponsiveNav,
        TaskKind::ObjectManip,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::SimpleNav => "simple_nav",
            TaskKind::ObstacleNav => "obstacle_nav",
            TaskKind::UnresponsiveNav => "unresponsive_nav",
            TaskKind::ObjectManip => "object_manip",
        }
    }

    pub fn has_object(self) -> bool {
        self == TaskKind::ObjectManip
    }
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything needed to build and score an episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub task: TaskKind,
    pub n_robots: usize,
    /// Center-to-center distance between grid neighbours.
    pub grid_spacing: f64,
    /// Grid center.
    pub start: Vec2,
    pub goal: Vec2,
    pub reward_threshold_d: f64,
    #[serde(rename = "horizon_t")]
    pub horizon: u64,
    pub gamma: f64,
    pub goal_tolerance: f64,
    /// Keep stepping after the goal is reached (fixed-length evaluation).
    pub run_to_horizon: bool,
    /// Score with `sum r_{k+1} gamma^k` instead of the reversed exponent.
    pub conventional_discount: bool,
    pub n_dead: usize,
    pub dead_seed: u64,
    /// Clear width between the two gate walls.
    pub gate_opening: f64,
    /// Gate center relative to `start`.
    pub gate_offset: Vec2,
    pub gate_thickness: f64,
    /// Half-length of the gate line; the walls run from the opening out to here.
    pub arena_half_width: f64,
    pub object_radius: f64,
    pub object_mass: f64,
    /// Uniform per-axis perturbation of spawn positions, drawn from `seed`.
    pub spawn_jitter: f64,
    /// Cap on all-contract steps used to let the spawn grid come to rest;
    /// 0 keeps the raw grid.
    pub settle_steps: u32,
    pub observe_goal_distance: bool,
    pub observe_expansion: bool,
    pub physics: PhysicsParams,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            task: TaskKind::SimpleNav,
            n_robots: 25,
            grid_spacing: 2.1,
            start: Vec2::ZERO,
            goal: Vec2::new(0.0, 40.0),
            reward_threshold_d: 5.0,
            horizon: 2500,
            gamma: 0.99,
            goal_tolerance: 1.0,
            run_to_horizon: true,
            conventional_discount: false,
            n_dead: 5,
            dead_seed: 0,
            gate_opening: 6.0,
            gate_offset: Vec2::new(0.0, 20.0),
            gate_thickness: 1.0,
            arena_half_width: 30.0,
            object_radius: 2.0,
            object_mass: 2.0,
            spawn_jitter: 0.05,
            settle_steps: 300,
            observe_goal_distance: false,
            observe_expansion: false,
            physics: PhysicsParams::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("GateTooNarrow: gate opening {opening} must exceed one expanded robot width {min}")]
    GateTooNarrow { opening: f64, min: f64 },
    #[error("GateTooWide: gate opening {opening} must be below the grid width {max}")]
    GateTooWide { opening: f64, max: f64 },
    #[error("GatePlacement: {0}")]
    GatePlacement(String),
    #[error("DeadCountInvalid: n_dead = {n_dead} must lie strictly between 0 and {n_robots}")]
    DeadCountInvalid { n_dead: usize, n_robots: usize },
    #[error("BadHorizon: horizon_t must be positive")]
    BadHorizon,
    #[error("BadGamma: gamma = {0} must lie in (0, 1]")]
    BadGamma(f64),
    #[error("GoalEqualsStart: goal and start coincide")]
    GoalEqualsStart,
    #[error("BadGrid: {0}")]
    BadGrid(String),
    #[error("BadValue: {0}")]
    BadValue(String),
    #[error("PhysicsInvalid: {0}")]
    PhysicsInvalid(#[from] PhysicsError),
    #[error("SpawnUnsettled: no spawn came to rest within settle_steps = {settle_steps} in {attempts} attempts (raise settle_steps, use spawn_jitter > 0, or set settle_steps = 0 for the raw grid)")]
    SpawnUnsettled { settle_steps: u32, attempts: u32 },
}

impl ScenarioError {
    pub fn code(&self) -> &'static str {
        match self {
            ScenarioError::GateTooNarrow { .. } => "GateTooNarrow",
            ScenarioError::GateTooWide { .. } => "GateTooWide",
            ScenarioError::GatePlacement(_) => "GatePlacement",
            ScenarioError::DeadCountInvalid { .. } => "DeadCountInvalid",
            ScenarioError::BadHorizon => "BadHorizon",
            ScenarioError::BadGamma(_) => "BadGamma",
            ScenarioError::GoalEqualsStart => "GoalEqualsStart",
            ScenarioError::BadGrid(_) => "BadGrid",
            ScenarioError::BadValue(_) => "BadValue",
            ScenarioError::PhysicsInvalid(_) => "PhysicsInvalid",
            ScenarioError::SpawnUnsettled { .. } => "SpawnUnsettled",
        }
    }
}

impl ScenarioConfig {
    /// Defaults for a given task.
    pub fn for_task(task: TaskKind) -> Self {
        Self {
            task,
            ..Default::default()
        }
    }

    pub fn grid_columns(&self) -> usize {
        (self.n_robots as f64).sqrt().ceil() as usize
    }

    /// Center-to-center span of the spawn grid.
    pub fn grid_width(&self) -> f64 {
        (self.grid_columns().saturating_sub(1)) as f64 * self.grid_spacing
    }

    /// Unit vector from start to goal.
    pub fn heading(&self) -> Vec2 {
        (self.goal - self.start).normalize_or_zero()
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.physics.validate(self.n_robots)?;
        let finite = [
            ("grid_spacing", self.grid_spacing),
            ("reward_threshold_d", self.reward_threshold_d),
            ("goal_tolerance", self.goal_tolerance),
        ];
        for (name, v) in finite {
            if !(v.is_finite() && v > 0.0) {
                return Err(ScenarioError::BadValue(format!("{name} must be finite and positive")));
            }
        }
        if !(self.spawn_jitter.is_finite() && self.spawn_jitter >= 0.0) {
            return Err(ScenarioError::BadValue("spawn_jitter must be finite and non-negative".into()));
        }
        if !(self.start.is_finite() && self.goal.is_finite()) {
            return Err(ScenarioError::BadValue("start and goal must be finite".into()));
        }
        if self.horizon == 0 {
            return Err(ScenarioError::BadHorizon);
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(ScenarioError::BadGamma(self.gamma));
        }
        if self.goal == self.start {
            return Err(ScenarioError::GoalEqualsStart);
        }
        // Axis neighbours close by at most 2 * jitter; diagonal ones start sqrt(2) farther apart.
        let min_spacing = 2.0 * self.physics.contracted_radius + 2.0 * self.spawn_jitter;
        if !(self.grid_spacing >= min_spacing - 1e-12) {
            return Err(ScenarioError::BadGrid(format!(
                "grid_spacing {} must be at least {min_spacing} so robots do not overlap at spawn",
                self.grid_spacing
            )));
        }
        match self.task {
            TaskKind::SimpleNav => {}
            TaskKind::ObstacleNav => self.validate_gate()?,
            TaskKind::UnresponsiveNav => {
                if self.n_dead == 0 || self.n_dead >= self.n_robots {
                    return Err(ScenarioError::DeadCountInvalid {
                        n_dead: self.n_dead,
                        n_robots: self.n_robots,
                    });
                }
            }
            TaskKind::ObjectManip => {
                if !(self.object_radius.is_finite() && self.object_radius > 0.0) {
                    return Err(ScenarioError::BadValue("object_radius must be positive".into()));
                }
                if !(self.object_mass.is_finite() && self.object_mass > 0.0) {
                    return Err(ScenarioError::BadValue("object_mass must be positive".into()));
                }
            }
        }
        Ok(())
    }

    fn validate_gate(&self) -> Result<(), ScenarioError> {
        let min = 2.0 * self.physics.expanded_radius;
        let max = self.grid_width();
        if !(self.gate_opening > min) {
            return Err(ScenarioError::GateTooNarrow {
                opening: self.gate_opening,
                min,
            });
        }
        if !(self.gate_opening < max) {
            return Err(ScenarioError::GateTooWide {
                opening: self.gate_opening,
                max,
            });
        }
        if !(self.gate_thickness.is_finite() && self.gate_thickness > 0.0) {
            return Err(ScenarioError::GatePlacement("gate_thickness must be positive".into()));
        }
        if !(self.arena_half_width > self.gate_opening / 2.0 + self.gate_thickness) {
            return Err(ScenarioError::GatePlacement(
                "arena_half_width leaves no room for the walls".into(),
            ));
        }
        let along = self.gate_offset.dot(self.heading());
        let travel = (self.goal - self.start).length();
        // Farthest robot surface from the grid center, along any direction.
        let half_extent = std::f64::consts::SQRT_2 * self.grid_width() / 2.0
            + self.physics.expanded_radius
            + self.spawn_jitter * 2.0;
        if !(along - self.gate_thickness / 2.0 > half_extent) {
            return Err(ScenarioError::GatePlacement(format!(
                "gate at {along} along the start-goal line overlaps the spawn grid (needs > {half_extent})"
            )));
        }
        if !(along < travel) {
            return Err(ScenarioError::GatePlacement("gate must lie before the goal".into()));
        }
        Ok(())
    }
}

/// Free-function form of [`ScenarioConfig::validate`].
pub fn validate_config(config: &ScenarioConfig) -> Result<(), ScenarioError> {
    config.validate()
}

/// Indices of unresponsive robots, sorted ascending. Depends only on its
/// arguments.
pub fn choose_dead_robots(dead_seed: u64, n_robots: usize, n_dead: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(dead_seed);
    let mut picked = sample(&mut rng, n_robots, n_dead.min(n_robots)).into_vec();
    picked.sort_unstable();
    picked
}

/// Grid slot positions (row-major, rows advancing toward the goal),
/// centered on `start` and rotated so rows face the goal.
fn grid_positions(config: &ScenarioConfig) -> Vec<Vec2> {
    let cols = config.grid_columns();
    let rows = config.n_robots.div_ceil(cols);
    let forward = config.heading();
    let right = -forward.perp();
    let half_c = (cols as f64 - 1.0) / 2.0;
    let half_r = (rows as f64 - 1.0) / 2.0;
    (0..config.n_robots)
        .map(|k| {
            let (c, r) = ((k % cols) as f64, (k / cols) as f64);
            config.start + right * ((c - half_c) * config.grid_spacing) + forward * ((r - half_r) * config.grid_spacing)
        })
        .collect()
}

/// Builds the initial world for `config` using `config.seed` for spawn jitter.
pub fn build_scenario(config: &ScenarioConfig) -> Result<WorldState, ScenarioError> {
    build_scenario_seeded(config, config.seed)
}

/// Builds the initial world, drawing spawn jitter from `seed`. A jittered
/// spawn that does not come to rest within `settle_steps`, or that is not
/// an exact all-contract fixed point once the task bodies are added, is
/// discarded and redrawn from the same stream.
pub fn build_scenario_seeded(config: &ScenarioConfig, seed: u64) -> Result<WorldState, ScenarioError> {
    config.validate()?;
    let params = &config.physics;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slots = grid_positions(config);
    let attempts = if config.spawn_jitter > 0.0 { SPAWN_ATTEMPTS } else { 1 };
    let mut settled = None;
    for _ in 0..attempts {
        let robots: Vec<RobotBody> = slots
            .iter()
            .enumerate()
            .map(|(id, &p)| {
                let jitter = if config.spawn_jitter > 0.0 {
                    Vec2::new(
                        rng.gen_range(-config.spawn_jitter..=config.spawn_jitter),
                        rng.gen_range(-config.spawn_jitter..=config.spawn_jitter),
                    )
                } else {
                    Vec2::ZERO
                };
                RobotBody::contracted(id, p + jitter, params)
            })
            .collect();
        let mut world = WorldState::new(robots);
        if !settle(&mut world, config)? {
            continue;
        }
        match config.task {
            TaskKind::SimpleNav => {}
            TaskKind::ObstacleNav => world.obstacles = gate_walls(config),
            TaskKind::UnresponsiveNav => {
                for idx in choose_dead_robots(config.dead_seed, config.n_robots, config.n_dead) {
                    world.robots[idx].responsive = false;
                }
            }
            TaskKind::ObjectManip => world.object = Some(place_object(config, &world)),
        }
        // Adding the object changes the contact set, which can shift how
        // the resting load is shared; only a true fixed point is accepted.
        if config.settle_steps == 0 || is_fixed_point(&world, config)? {
            settled = Some(world);
            break;
        }
    }
    settled.ok_or(ScenarioError::SpawnUnsettled {
        settle_steps: config.settle_steps,
        attempts,
    })
}

/// Whether one all-contract step leaves every body exactly where it is.
fn is_fixed_point(world: &WorldState, config: &ScenarioConfig) -> Result<bool, ScenarioError> {
    let mut next = world.clone();
    step_world(&mut next, &vec![Command::Contract; world.robots.len()], &config.physics)?;
    let robots_still = next
        .robots
        .iter()
        .zip(&world.robots)
        .all(|(a, b)| a.position == b.position && a.velocity == Vec2::ZERO);
    let object_still = match (&next.object, &world.object) {
        (Some(a), Some(b)) => a.position == b.position && a.velocity == Vec2::ZERO,
        _ => true,
    };
    Ok(robots_still && object_still)
}

/// Lets the freshly spawned, contracted swarm latch together under magnetic
/// adhesion until every robot is at rest, then translates it so the center
/// of mass sits exactly on `start`. Episodes therefore begin from a static
/// equilibrium instead of a transient collapse. Returns whether the swarm
/// came to rest; `settle_steps = 0` skips settling and always succeeds.
fn settle(world: &mut WorldState, config: &ScenarioConfig) -> Result<bool, ScenarioError> {
    if config.settle_steps == 0 {
        return Ok(true);
    }
    let commands = vec![Command::Contract; world.robots.len()];
    let mut at_rest = false;
    for _ in 0..config.settle_steps {
        step_world(world, &commands, &config.physics)?;
        if world.robots.iter().all(|r| r.velocity.length() < SETTLED_SPEED) {
            at_rest = true;
            break;
        }
    }
    if !at_rest {
        return Ok(false);
    }
    let shift = config.start - world.center_of_mass();
    for r in &mut world.robots {
        r.velocity = Vec2::ZERO;
        r.position += shift;
    }
    world.step_count = 0;
    Ok(true)
}

/// Speed below which a settling robot counts as stopped.
const SETTLED_SPEED: f64 = 1e-12;

/// Spawn draws per seed before giving up. Roughly a third of default
/// spawns keep sliding past 300 settling steps, so running out is
/// practically impossible.
const SPAWN_ATTEMPTS: u32 = 32;

/// Two thick walls across the start-goal line leaving a gap of
/// `gate_opening` centered on `start + gate_offset`.
pub fn gate_walls(config: &ScenarioConfig) -> Vec<StaticObstacle> {
    let forward = config.heading();
    let across = -forward.perp();
    let center = config.start + config.gate_offset;
    let half_t = config.gate_thickness / 2.0;
    // capsule end caps extend half a thickness beyond each endpoint
    let inner = config.gate_opening / 2.0 + half_t;
    let outer = config.arena_half_width;
    [1.0, -1.0]
        .into_iter()
        .map(|side| StaticObstacle {
            segments: vec![Segment::new(center + across * (side * inner), center + across * (side * outer))],
            thickness: config.gate_thickness,
        })
        .collect()
}

/// Object on the start-goal line, tangent to the nearest robot on the
/// goal-facing side of the swarm.
fn place_object(config: &ScenarioConfig, world: &WorldState) -> DynamicObject {
    let forward = config.heading();
    let reach = config.physics.contracted_radius + config.object_radius;
    let mut along = 0.0_f64;
    for r in &world.robots {
        let rel = r.position - config.start;
        let proj = rel.dot(forward);
        let lateral = (rel - forward * proj).length();
        if lateral < reach {
            along = along.max(proj + (reach * reach - lateral * lateral).sqrt());
        }
    }
    DynamicObject {
        position: config.start + forward * along,
        velocity: Vec2::ZERO,
        radius: config.object_radius,
        mass: config.object_mass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        for task in TaskKind::ALL {
            assert_eq!(ScenarioConfig::for_task(task).validate(), Ok(()), "{task}");
        }
    }

    #[test]
    fn simple_nav_grid_centered_on_start() {
        let cfg = ScenarioConfig {
            spawn_jitter: 0.0,
            settle_steps: 0,
            ..Default::default()
        };
        let world = build_scenario(&cfg).unwrap();
        assert_eq!(world.robots.len(), 25);
        assert_eq!(cfg.grid_columns(), 5);
        assert!(world.center_of_mass().distance(cfg.start) < 1e-12);
        for r in &world.robots {
            assert_eq!(r.radius, cfg.physics.contracted_radius);
            assert_eq!(r.velocity, Vec2::ZERO);
            assert!(r.responsive);
        }
        // 5 x 5 lattice at 2.1: columns at -4.2 .. 4.2
        let xs: Vec<f64> = world.robots.iter().take(5).map(|r| r.position.x).collect();
        for (x, want) in xs.iter().zip([-4.2, -2.1, 0.0, 2.1, 4.2]) {
            assert!((x - want).abs() < 1e-12);
        }
    }

    #[test]
    fn settled_spawn_is_at_rest_and_centered() {
        let cfg = ScenarioConfig::default();
        let world = build_scenario_seeded(&cfg, 4).unwrap();
        assert_eq!(world.step_count, 0);
        assert!(world.center_of_mass().distance(cfg.start) < 1e-12);
        assert!(world.robots.iter().all(|r| r.velocity == Vec2::ZERO));
        assert!(world.max_penetration() <= 2.0 * cfg.physics.slop);
        // latched: every robot touches at least one neighbour
        for a in &world.robots {
            let touching = world
                .robots
                .iter()
                .any(|b| b.id != a.id && a.position.distance(b.position) < a.radius + b.radius + 1e-3);
            assert!(touching, "robot {} floats free", a.id);
        }
    }

    #[test]
    fn gate_bounds_follow_robot_and_grid_width() {
        // 2 * r_e = 3 < 6 < 8.4 = 4 * 2.1
        let cfg = ScenarioConfig::for_task(TaskKind::ObstacleNav);
        assert!((cfg.grid_width() - 8.4).abs() < 1e-12);
        assert!(cfg.validate().is_ok());
        let narrow = ScenarioConfig {
            gate_opening: 2.0,
            ..cfg.clone()
        };
        assert_eq!(narrow.validate().unwrap_err().code(), "GateTooNarrow");
        let wide = ScenarioConfig {
            gate_opening: 8.4,
            ..cfg.clone()
        };
        assert_eq!(wide.validate().unwrap_err().code(), "GateTooWide");
        let inside = ScenarioConfig {
            gate_offset: Vec2::new(0.0, 3.0),
            ..cfg
        };
        assert_eq!(inside.validate().unwrap_err().code(), "GatePlacement");
    }

    #[test]
    fn gate_leaves_requested_opening() {
        let cfg = ScenarioConfig::for_task(TaskKind::ObstacleNav);
        let world = build_scenario(&cfg).unwrap();
        assert_eq!(world.obstacles.len(), 2);
        let inner: Vec<Vec2> = world.obstacles.iter().map(|o| o.segments[0].a).collect();
        let clear = inner[0].distance(inner[1]) - cfg.gate_thickness;
        assert!((clear - cfg.gate_opening).abs() < 1e-12);
        // walls are perpendicular to the start-goal line
        for o in &world.obstacles {
            let s = o.segments[0];
            assert!((s.b - s.a).dot(cfg.heading()).abs() < 1e-12);
        }
    }

    #[test]
    fn dead_count_bounds() {
        let cfg = ScenarioConfig::for_task(TaskKind::UnresponsiveNav);
        let all = ScenarioConfig { n_dead: 25, ..cfg.clone() };
        assert_eq!(all.validate().unwrap_err().code(), "DeadCountInvalid");
        let none = ScenarioConfig { n_dead: 0, ..cfg };
        assert_eq!(none.validate().unwrap_err().code(), "DeadCountInvalid");
    }

    #[test]
    fn dead_selection_is_pure() {
        let a = choose_dead_robots(7, 25, 5);
        assert_eq!(a, choose_dead_robots(7, 25, 5));
        assert_eq!(a.len(), 5);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        let cfg = ScenarioConfig {
            dead_seed: 7,
            ..ScenarioConfig::for_task(TaskKind::UnresponsiveNav)
        };
        let world = build_scenario(&cfg).unwrap();
        let dead: Vec<usize> = world.robots.iter().filter(|r| !r.responsive).map(|r| r.id).collect();
        assert_eq!(dead, a);
    }

    #[test]
    fn object_is_tangent_and_ahead() {
        let cfg = ScenarioConfig::for_task(TaskKind::ObjectManip);
        let world = build_scenario(&cfg).unwrap();
        let obj = world.object.as_ref().unwrap();
        let nearest = world
            .robots
            .iter()
            .map(|r| r.position.distance(obj.position))
            .fold(f64::INFINITY, f64::min);
        assert!((nearest - (cfg.physics.contracted_radius + cfg.object_radius)).abs() < 1e-9);
        let com = world.center_of_mass();
        let t_obj = (obj.position - cfg.start).dot(cfg.heading());
        let t_com = (com - cfg.start).dot(cfg.heading());
        assert!(t_obj > t_com && t_obj < (cfg.goal - cfg.start).length());
    }

    #[test]
    fn other_validation_errors() {
        let c = ScenarioConfig { horizon: 0, ..Default::default() };
        assert_eq!(c.validate().unwrap_err().code(), "BadHorizon");
        let c = ScenarioConfig { gamma: 0.0, ..Default::default() };
        assert_eq!(c.validate().unwrap_err().code(), "BadGamma");
        let c = ScenarioConfig { goal: Vec2::ZERO, ..Default::default() };
        assert_eq!(c.validate().unwrap_err().code(), "GoalEqualsStart");
        let c = ScenarioConfig { grid_spacing: 1.9, ..Default::default() };
        assert_eq!(c.validate().unwrap_err().code(), "BadGrid");
        let c = ScenarioConfig { n_robots: 2, ..Default::default() };
        assert_eq!(c.validate().unwrap_err().code(), "PhysicsInvalid");
    }

    #[test]
    fn non_square_counts_fill_rows() {
        let cfg = ScenarioConfig { n_robots: 7, ..Default::default() };
        let world = build_scenario(&cfg).unwrap();
        assert_eq!(world.robots.len(), 7);
        assert_eq!(cfg.grid_columns(), 3);
    }

    #[test]
    fn rotated_heading_keeps_layout() {
        let cfg = ScenarioConfig {
            goal: Vec2::new(40.0, 0.0),
            spawn_jitter: 0.0,
            settle_steps: 0,
            ..ScenarioConfig::for_task(TaskKind::ObjectManip)
        };
        let world = build_scenario(&cfg).unwrap();
        let obj = world.object.unwrap();
        assert!(obj.position.y.abs() < 1e-12 && obj.position.x > 4.2);
    }

    #[test]
    fn exact_grid_cannot_be_settled() {
        // the symmetric grid keeps sliding, and without jitter there is
        // nothing to redraw
        let cfg = ScenarioConfig {
            spawn_jitter: 0.0,
            ..ScenarioConfig::default()
        };
        let err = build_scenario(&cfg).unwrap_err();
        assert_eq!(err.code(), "SpawnUnsettled");
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = ScenarioConfig::for_task(TaskKind::ObstacleNav);
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("\"horizon_t\":2500"));
        assert!(text.contains("\"task\":\"obstacle_nav\""));
        let back: ScenarioConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        let partial: ScenarioConfig = serde_json::from_str(r#"{"task":"object_manip","n_robots":16}"#).unwrap();
        assert_eq!(partial.n_robots, 16);
        assert_eq!(partial.goal, ScenarioConfig::default().goal);
    }
}
