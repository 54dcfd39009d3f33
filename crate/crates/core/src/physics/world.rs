use serde::{Deserialize, Serialize};

use super::{PhysicsError, PhysicsParams};
use crate::vec2::Vec2;

/// Actuation latch of a single robot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Actuation {
    IdleContracted,
    Expanding,
    IdleExpanded,
    Contracting,
}

impl Actuation {
    pub fn is_idle(self) -> bool {
        matches!(self, Actuation::IdleContracted | Actuation::IdleExpanded)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Actuation::IdleContracted => "idle_contracted",
            Actuation::Expanding => "expanding",
            Actuation::IdleExpanded => "idle_expanded",
            Actuation::Contracting => "contracting",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "idle_contracted" => Actuation::IdleContracted,
            "expanding" => Actuation::Expanding,
            "idle_expanded" => Actuation::IdleExpanded,
            "contracting" => Actuation::Contracting,
            _ => return None,
        })
    }
}

/// Per-robot command for one env step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Contract,
    Expand,
}

impl Command {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Command::Expand
        } else {
            Command::Contract
        }
    }

    pub fn as_bit(self) -> u8 {
        match self {
            Command::Contract => 0,
            Command::Expand => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotBody {
    pub id: usize,
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
    pub target_radius: f64,
    pub actuation: Actuation,
    pub responsive: bool,
    pub mass: f64,
}

impl RobotBody {
    /// A contracted robot at rest.
    pub fn contracted(id: usize, position: Vec2, params: &PhysicsParams) -> Self {
        Self {
            id,
            position,
            velocity: Vec2::ZERO,
            radius: params.contracted_radius,
            target_radius: params.contracted_radius,
            actuation: Actuation::IdleContracted,
            responsive: true,
            mass: params.robot_mass,
        }
    }

    /// Expansion fraction in [0, 1].
    pub fn expansion(&self, params: &PhysicsParams) -> f64 {
        ((self.radius - params.contracted_radius)
            / (params.expanded_radius - params.contracted_radius))
            .clamp(0.0, 1.0)
    }

    /// Latches a new actuation if the robot is idle, responsive, and the
    /// command asks for the other extreme. Anything else is ignored.
    pub fn apply_command(&mut self, command: Command, params: &PhysicsParams) {
        if !self.responsive {
            return;
        }
        match (self.actuation, command) {
            (Actuation::IdleContracted, Command::Expand) => {
                self.actuation = Actuation::Expanding;
                self.target_radius = params.expanded_radius;
            }
            (Actuation::IdleExpanded, Command::Contract) => {
                self.actuation = Actuation::Contracting;
                self.target_radius = params.contracted_radius;
            }
            _ => {}
        }
    }

    /// Moves the radius one substep toward its target and returns the
    /// signed change. Lands exactly on the target and goes idle on arrival.
    pub(crate) fn advance_radius(&mut self, params: &PhysicsParams) -> f64 {
        let rate = params.radius_rate_per_substep();
        // absorbs accumulated rounding so arrival takes exactly tau_act env steps
        let snap = rate * 1e-6;
        let before = self.radius;
        match self.actuation {
            Actuation::Expanding => {
                let next = self.radius + rate;
                if next >= self.target_radius - snap {
                    self.radius = self.target_radius;
                    self.actuation = Actuation::IdleExpanded;
                } else {
                    self.radius = next;
                }
            }
            Actuation::Contracting => {
                let next = self.radius - rate;
                if next <= self.target_radius + snap {
                    self.radius = self.target_radius;
                    self.actuation = Actuation::IdleContracted;
                } else {
                    self.radius = next;
                }
            }
            Actuation::IdleContracted | Actuation::IdleExpanded => {}
        }
        self.radius - before
    }
}

/// Free-function form of [`RobotBody::apply_command`].
pub fn apply_actuation_command(robot: &RobotBody, command: Command, params: &PhysicsParams) -> RobotBody {
    let mut next = robot.clone();
    next.apply_command(command, params);
    next
}

/// Passive disc pushed around by the swarm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicObject {
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

impl Segment {
    pub fn new(a: Vec2, b: Vec2) -> Self {
        Self { a, b }
    }

    /// Closest point on the segment to `p`.
    pub fn closest_point(&self, p: Vec2) -> Vec2 {
        let ab = self.b - self.a;
        let len2 = ab.length_squared();
        if len2 == 0.0 {
            return self.a;
        }
        let t = ((p - self.a).dot(ab) / len2).clamp(0.0, 1.0);
        self.a + ab * t
    }
}

/// Immovable wall made of thick segments (capsules).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticObstacle {
    pub segments: Vec<Segment>,
    pub thickness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub robots: Vec<RobotBody>,
    pub object: Option<DynamicObject>,
    pub obstacles: Vec<StaticObstacle>,
    pub step_count: u64,
}

impl WorldState {
    pub fn new(robots: Vec<RobotBody>) -> Self {
        Self {
            robots,
            object: None,
            obstacles: Vec::new(),
            step_count: 0,
        }
    }

    /// Mass-weighted center of all robots, responsive or not.
    pub fn center_of_mass(&self) -> Vec2 {
        let mut total = 0.0;
        let mut acc = Vec2::ZERO;
        for r in &self.robots {
            acc += r.position * r.mass;
            total += r.mass;
        }
        if total > 0.0 {
            acc / total
        } else {
            Vec2::ZERO
        }
    }

    /// Deepest overlap between any two bodies, including obstacles.
    pub fn max_penetration(&self) -> f64 {
        let mut worst = 0.0_f64;
        let discs = self.discs();
        for i in 0..discs.len() {
            for j in (i + 1)..discs.len() {
                let (pa, ra) = discs[i];
                let (pb, rb) = discs[j];
                worst = worst.max(ra + rb - pa.distance(pb));
            }
            for obstacle in &self.obstacles {
                for seg in &obstacle.segments {
                    let (p, r) = discs[i];
                    let q = seg.closest_point(p);
                    worst = worst.max(r + obstacle.thickness / 2.0 - p.distance(q));
                }
            }
        }
        worst
    }

    fn discs(&self) -> Vec<(Vec2, f64)> {
        let mut out: Vec<(Vec2, f64)> = self.robots.iter().map(|r| (r.position, r.radius)).collect();
        if let Some(o) = &self.object {
            out.push((o.position, o.radius));
        }
        out
    }

    /// Structural checks: ids in order, finite state, radius bounds,
    /// and the unresponsive-robot contract.
    pub fn validate(&self, params: &PhysicsParams) -> Result<(), PhysicsError> {
        for (idx, r) in self.robots.iter().enumerate() {
            if r.id != idx {
                return Err(PhysicsError::InvalidWorld(format!(
                    "robot at index {idx} has id {}",
                    r.id
                )));
            }
            if !(r.position.is_finite() && r.velocity.is_finite() && r.radius.is_finite()) {
                return Err(PhysicsError::InvalidWorld(format!("robot {idx} has non-finite state")));
            }
            if !(r.mass > 0.0) {
                return Err(PhysicsError::InvalidWorld(format!("robot {idx} has non-positive mass")));
            }
            if r.radius < params.contracted_radius || r.radius > params.expanded_radius {
                return Err(PhysicsError::InvalidWorld(format!("robot {idx} radius out of range")));
            }
            if !r.responsive && (r.actuation != Actuation::IdleContracted || r.radius != params.contracted_radius) {
                return Err(PhysicsError::InvalidWorld(format!(
                    "unresponsive robot {idx} must be idle and contracted"
                )));
            }
        }
        if let Some(o) = &self.object {
            if !(o.radius > 0.0 && o.mass > 0.0) {
                return Err(PhysicsError::InvalidWorld("object radius and mass must be positive".into()));
            }
            if !(o.position.is_finite() && o.velocity.is_finite()) {
                return Err(PhysicsError::InvalidWorld("object has non-finite state".into()));
            }
        }
        for obstacle in &self.obstacles {
            if obstacle.segments.is_empty() {
                return Err(PhysicsError::InvalidWorld("obstacle without segments".into()));
            }
            if obstacle.segments.iter().any(|s| !(s.a.is_finite() && s.b.is_finite())) {
                return Err(PhysicsError::InvalidWorld("obstacle endpoint is not finite".into()));
            }
        }
        Ok(())
    }
}
