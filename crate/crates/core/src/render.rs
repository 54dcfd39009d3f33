//! Top-down PPM snapshots of a world, for inspection only.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::RobotSnapshot;
use crate::physics::{Actuation, DynamicObject, PhysicsParams, RobotBody, StaticObstacle, WorldState};
use crate::vec2::Vec2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("BadCamera: {0}")]
    BadCamera(String),
}

/// Orthographic top-down camera. `center: None` means "look at the goal".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Camera {
    pub center: Option<Vec2>,
    /// Pixels per LU.
    pub scale: f64,
    pub width: u32,
    pub height: u32,
}

impl Default for Camera {
    fn default() -> Self {
        Self {
            center: None,
            scale: 6.0,
            width: 640,
            height: 640,
        }
    }
}

impl Camera {
    pub fn validate(&self) -> Result<(), RenderError> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(RenderError::BadCamera(format!("scale must be positive, got {}", self.scale)));
        }
        if self.width == 0 || self.height == 0 {
            return Err(RenderError::BadCamera("width and height must be positive".into()));
        }
        if let Some(c) = self.center {
            if !c.is_finite() {
                return Err(RenderError::BadCamera("center must be finite".into()));
            }
        }
        Ok(())
    }
}

pub type Rgb = [u8; 3];

pub const BACKGROUND: Rgb = [255, 255, 255];
pub const CONTRACTED: Rgb = [120, 170, 220];
pub const ACTUATING: Rgb = [60, 110, 190];
pub const EXPANDED: Rgb = [20, 50, 130];
pub const UNRESPONSIVE: Rgb = [150, 150, 150];
pub const OBSTACLE: Rgb = [30, 30, 30];
pub const OBJECT: Rgb = [230, 140, 30];
pub const GOAL: Rgb = [210, 30, 30];

fn robot_shade(r: &RobotBody) -> Rgb {
    if !r.responsive {
        return UNRESPONSIVE;
    }
    match r.actuation {
        Actuation::IdleContracted => CONTRACTED,
        Actuation::IdleExpanded => EXPANDED,
        Actuation::Expanding | Actuation::Contracting => ACTUATING,
    }
}

/// RGB raster, row-major from the top-left pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl Image {
    fn filled(width: u32, height: u32, color: Rgb) -> Self {
        let pixels = color.repeat(width as usize * height as usize);
        Self { width, height, pixels }
    }

    pub fn get(&self, x: u32, y: u32) -> Rgb {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    fn put(&mut self, x: i64, y: i64, color: Rgb) {
        if x < 0 || y < 0 || x >= i64::from(self.width) || y >= i64::from(self.height) {
            return;
        }
        let i = 3 * (y as usize * self.width as usize + x as usize);
        self.pixels[i..i + 3].copy_from_slice(&color);
    }

    pub fn write_ppm<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "P6\n{} {}\n255\n", self.width, self.height)?;
        out.write_all(&self.pixels)?;
        out.flush()
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(self.pixels.len() + 32);
        self.write_ppm(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }
}

struct Projection {
    center: Vec2,
    scale: f64,
    half_w: f64,
    half_h: f64,
}

impl Projection {
    fn new(camera: &Camera, goal: Vec2) -> Self {
        Self {
            center: camera.center.unwrap_or(goal),
            scale: camera.scale,
            half_w: f64::from(camera.width) / 2.0,
            half_h: f64::from(camera.height) / 2.0,
        }
    }

    /// Pixel whose top-left corner region contains the world point; image y grows downward.
    fn to_pixel(&self, p: Vec2) -> (i64, i64) {
        let x = self.half_w + (p.x - self.center.x) * self.scale;
        let y = self.half_h - (p.y - self.center.y) * self.scale;
        (x.floor() as i64, y.floor() as i64)
    }

    fn to_world(&self, px: i64, py: i64) -> Vec2 {
        Vec2::new(
            self.center.x + (px as f64 + 0.5 - self.half_w) / self.scale,
            self.center.y - (py as f64 + 0.5 - self.half_h) / self.scale,
        )
    }
}

/// Filled disc of integer pixel radius `round(scale * r)` around the pixel
/// containing the center.
fn draw_disc(img: &mut Image, proj: &Projection, center: Vec2, radius: f64, color: Rgb) {
    let (cx, cy) = proj.to_pixel(center);
    let r = (proj.scale * radius).round() as i64;
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                img.put(cx + dx, cy + dy, color);
            }
        }
    }
}

fn draw_obstacle(img: &mut Image, proj: &Projection, obstacle: &StaticObstacle) {
    let half = obstacle.thickness / 2.0;
    for seg in &obstacle.segments {
        let lo = Vec2::new(seg.a.x.min(seg.b.x) - half, seg.a.y.max(seg.b.y) + half);
        let hi = Vec2::new(seg.a.x.max(seg.b.x) + half, seg.a.y.min(seg.b.y) - half);
        let (x0, y0) = proj.to_pixel(lo);
        let (x1, y1) = proj.to_pixel(hi);
        let x0 = x0.max(0);
        let y0 = y0.max(0);
        let x1 = x1.min(i64::from(img.width) - 1);
        let y1 = y1.min(i64::from(img.height) - 1);
        for py in y0..=y1 {
            for px in x0..=x1 {
                let w = proj.to_world(px, py);
                if w.distance(seg.closest_point(w)) <= half {
                    img.put(px, py, OBSTACLE);
                }
            }
        }
    }
}

fn draw_goal(img: &mut Image, proj: &Projection, goal: Vec2) {
    let (gx, gy) = proj.to_pixel(goal);
    let arm = (proj.scale * 1.5).round().max(3.0) as i64;
    for d in -arm..=arm {
        img.put(gx + d, gy, GOAL);
        img.put(gx, gy + d, GOAL);
    }
}

/// Paints obstacles, the goal marker, the object, then robots (in id order).
pub fn rasterize_frame(world: &WorldState, goal: Vec2, camera: &Camera) -> Result<Image, RenderError> {
    camera.validate()?;
    let proj = Projection::new(camera, goal);
    let mut img = Image::filled(camera.width, camera.height, BACKGROUND);
    for obstacle in &world.obstacles {
        draw_obstacle(&mut img, &proj, obstacle);
    }
    draw_goal(&mut img, &proj, goal);
    if let Some(object) = &world.object {
        draw_disc(&mut img, &proj, object.position, object.radius, OBJECT);
    }
    for robot in &world.robots {
        draw_disc(&mut img, &proj, robot.position, robot.radius, robot_shade(robot));
    }
    Ok(img)
}

/// Rebuilds a drawable world from one logged per-robot frame.
pub fn world_from_snapshots(
    frame: &[RobotSnapshot],
    params: &PhysicsParams,
    obstacles: Vec<StaticObstacle>,
    object: Option<DynamicObject>,
) -> WorldState {
    let robots = frame
        .iter()
        .map(|s| RobotBody {
            position: s.position,
            velocity: s.velocity,
            radius: s.radius,
            actuation: s.state,
            responsive: s.responsive,
            ..RobotBody::contracted(s.robot_id, s.position, params)
        })
        .collect();
    let mut world = WorldState::new(robots);
    world.obstacles = obstacles;
    world.object = object;
    world
}
