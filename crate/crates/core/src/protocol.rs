//! Newline-delimited JSON protocol so out-of-process agents can drive an
//! environment. One session per connection, one reply line per request.

use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::thread;

use serde_json::{json, Map, Value};

use crate::env::{observation_dim, Action, EnvError, ParticleEnv, MAX_DISCRETE_ROBOTS};
use crate::render::{rasterize_frame, Camera};
use crate::scenario::ScenarioConfig;

/// Non-JSON lines tolerated per session; the next one closes it.
pub const MAX_BAD_JSON: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionPhase {
    AwaitingReset,
    Active,
    Closed,
}

/// Where `render` requests write frames and how they are framed.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionOptions {
    pub render_dir: PathBuf,
    pub camera: Camera,
}

impl Default for SessionOptions {
    fn default() -> Self {
        Self {
            render_dir: std::env::temp_dir().join(format!("partbot-frames-{}", std::process::id())),
            camera: Camera::default(),
        }
    }
}

#[derive(Debug)]
pub struct Session {
    config: ScenarioConfig,
    env: Option<ParticleEnv>,
    phase: SessionPhase,
    bad_json: u32,
    frames: u64,
    options: SessionOptions,
}

/// A reply line and whether the session ends after it is sent.
#[derive(Debug, Clone, PartialEq)]
pub struct Reply {
    pub line: String,
    pub close: bool,
}

impl Reply {
    fn ok(value: Value) -> Self {
        Self {
            line: value.to_string(),
            close: false,
        }
    }

    fn error(code: &str, message: impl Into<String>) -> Self {
        Self {
            line: json!({"error": {"code": code, "message": message.into()}}).to_string(),
            close: false,
        }
    }
}

/// Wire code for an environment error.
pub fn env_error_code(e: &EnvError) -> &'static str {
    match e {
        EnvError::NotReset => "not_reset",
        EnvError::EpisodeOver => "episode_over",
        EnvError::ActionLengthMismatch { .. } => "bad_action_length",
        EnvError::OutOfRange(_) => "action_out_of_range",
        EnvError::Config(_) | EnvError::Physics(_) => "bad_config",
    }
}

fn env_error(e: EnvError) -> Reply {
    Reply::error(env_error_code(&e), e.to_string())
}

fn parse_action(value: Option<&Value>) -> Result<Action, Reply> {
    let bad = |m: &str| Reply::error("action_out_of_range", m);
    match value {
        Some(Value::Number(n)) => n
            .as_u64()
            .map(Action::Discrete)
            .ok_or_else(|| bad("integer action must be a non-negative integer")),
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(i, v)| match v.as_u64() {
                Some(b @ (0 | 1)) => Ok(b as u8),
                _ => Err(bad(&format!("entry {i} must be 0 or 1"))),
            })
            .collect::<Result<Vec<u8>, Reply>>()
            .map(Action::Binary),
        Some(_) => Err(bad("action must be an integer or an array of 0/1")),
        None => Err(bad("missing field `action`")),
    }
}

fn parse_config(value: Option<&Value>, fallback: &ScenarioConfig) -> Result<ScenarioConfig, Reply> {
    let config = match value {
        None | Some(Value::Null) => fallback.clone(),
        Some(v) => serde_json::from_value::<ScenarioConfig>(v.clone())
            .map_err(|e| Reply::error("bad_config", format!("ConfigParse: {e}")))?,
    };
    config
        .validate()
        .map_err(|e| Reply::error("bad_config", e.to_string()))?;
    Ok(config)
}

impl Session {
    pub fn new(options: SessionOptions) -> Self {
        Self {
            config: ScenarioConfig::default(),
            env: None,
            phase: SessionPhase::AwaitingReset,
            bad_json: 0,
            frames: 0,
            options,
        }
    }

    pub fn phase(&self) -> SessionPhase {
        self.phase
    }

    fn cmd_reset(&mut self, msg: &Map<String, Value>) -> Reply {
        let config = match parse_config(msg.get("config"), &self.config) {
            Ok(c) => c,
            Err(reply) => return reply,
        };
        let seed = match msg.get("seed") {
            None | Some(Value::Null) => config.seed,
            Some(v) => match v.as_u64() {
                Some(s) => s,
                None => return Reply::error("bad_config", "seed must be a non-negative integer"),
            },
        };
        let mut env = match ParticleEnv::new(config.clone()) {
            Ok(env) => env,
            Err(e) => return env_error(e),
        };
        match env.reset(seed) {
            Ok((obs, info)) => {
                self.config = config;
                self.env = Some(env);
                self.phase = SessionPhase::Active;
                Reply::ok(json!({"obs": obs.flatten(), "info": info}))
            }
            Err(e) => env_error(e),
        }
    }

    fn cmd_step(&mut self, msg: &Map<String, Value>) -> Reply {
        let Some(env) = self.env.as_mut() else {
            return env_error(EnvError::NotReset);
        };
        if env.is_done() {
            return env_error(EnvError::EpisodeOver);
        }
        let action = match parse_action(msg.get("action")) {
            Ok(a) => a,
            Err(reply) => return reply,
        };
        match env.step(&action) {
            Ok(r) => Reply::ok(json!({
                "obs": r.observation.flatten(),
                "reward": r.reward,
                "terminated": r.terminated,
                "truncated": r.truncated,
                "info": r.info,
            })),
            Err(e) => env_error(e),
        }
    }

    fn cmd_render(&mut self, msg: &Map<String, Value>) -> Reply {
        let Some(world) = self.env.as_ref().and_then(|e| e.world()) else {
            return env_error(EnvError::NotReset);
        };
        let path = match msg.get("path").and_then(Value::as_str) {
            Some(p) => PathBuf::from(p),
            None => self.options.render_dir.join(format!("frame_{:06}.ppm", self.frames)),
        };
        let image = match rasterize_frame(world, self.config.goal, &self.options.camera) {
            Ok(img) => img,
            Err(e) => return Reply::error("bad_config", e.to_string()),
        };
        let written = path
            .parent()
            .map_or(Ok(()), |dir| if dir.as_os_str().is_empty() { Ok(()) } else { fs::create_dir_all(dir) })
            .and_then(|()| fs::write(&path, image.to_ppm()));
        match written {
            Ok(()) => {
                self.frames += 1;
                Reply::ok(json!({"path": path.to_string_lossy()}))
            }
            Err(e) => Reply::error("render_failed", format!("{}: {e}", path.display())),
        }
    }

    fn cmd_spec(&self, msg: &Map<String, Value>) -> Reply {
        let config = match parse_config(msg.get("config"), &self.config) {
            Ok(c) => c,
            Err(reply) => return reply,
        };
        let n = config.n_robots;
        let discrete = (n <= MAX_DISCRETE_ROBOTS).then(|| 1u64 << n);
        Reply::ok(json!({
            "obs_dim": observation_dim(&config),
            "n_robots": n,
            "action": {"multi_binary": n, "discrete": discrete},
            "horizon_t": config.horizon,
        }))
    }

    /// Handles one request line.
    pub fn handle_message(&mut self, line: &str) -> Reply {
        if self.phase == SessionPhase::Closed {
            return Reply {
                close: true,
                ..Reply::error("closed", "session is closed")
            };
        }
        let value: Value = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(e) => {
                self.bad_json += 1;
                let mut reply = Reply::error("bad_json", format!("{e} (strike {} of {MAX_BAD_JSON})", self.bad_json));
                if self.bad_json >= MAX_BAD_JSON {
                    self.phase = SessionPhase::Closed;
                    reply.close = true;
                }
                return reply;
            }
        };
        let Value::Object(msg) = value else {
            return Reply::error("unknown_cmd", "request must be a JSON object with a `cmd` field");
        };
        match msg.get("cmd").and_then(Value::as_str) {
            Some("reset") => self.cmd_reset(&msg),
            Some("step") => self.cmd_step(&msg),
            Some("render") => self.cmd_render(&msg),
            Some("spec") => self.cmd_spec(&msg),
            Some("close") => {
                self.phase = SessionPhase::Closed;
                self.env = None;
                Reply {
                    line: json!({"closed": true}).to_string(),
                    close: true,
                }
            }
            Some(other) => Reply::error("unknown_cmd", format!("unknown cmd `{other}`")),
            None => Reply::error("unknown_cmd", "missing string field `cmd`"),
        }
    }
}

/// Serves one session over a line stream until `close`, too many bad
/// lines, or end of input.
pub fn serve_lines<R: BufRead, W: Write>(session: &mut Session, input: R, mut output: W) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        let request = line.trim_end_matches('\r');
        if request.trim().is_empty() {
            continue;
        }
        let reply = session.handle_message(request);
        output.write_all(reply.line.as_bytes())?;
        output.write_all(b"\n")?;
        output.flush()?;
        if reply.close {
            break;
        }
    }
    Ok(())
}

fn serve_connection(stream: TcpStream, options: SessionOptions) -> io::Result<()> {
    let reader = BufReader::new(stream.try_clone()?);
    let mut session = Session::new(options);
    serve_lines(&mut session, reader, BufWriter::new(stream))
}

/// Accepts connections forever, one thread and one session per connection.
/// Each session renders into its own numbered subdirectory.
pub fn serve_tcp(listener: TcpListener, options: SessionOptions) -> io::Result<()> {
    for (k, stream) in listener.incoming().enumerate() {
        let stream = stream?;
        let opts = SessionOptions {
            render_dir: options.render_dir.join(format!("session_{k:04}")),
            ..options.clone()
        };
        thread::spawn(move || {
            if let Err(e) = serve_connection(stream, opts) {
                eprintln!("session {k}: {e}");
            }
        });
    }
    Ok(())
}
