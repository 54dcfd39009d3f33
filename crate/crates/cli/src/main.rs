mod config;

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use partbot::bench::{run_benchmark, write_report_csv, Execution};
use partbot::episode::{run_episode, EpisodeOptions};
use partbot::metrics::{read_robots_csv, read_trajectory_csv, write_robots_csv, write_trajectory_csv};
use partbot::physics::DynamicObject;
use partbot::protocol::{serve_lines, serve_tcp, Session, SessionOptions};
use partbot::render::{rasterize_frame, world_from_snapshots};
use partbot::scenario::{gate_walls, TaskKind};
use partbot::vec2::Vec2;
use serde_json::json;

/// How a command failed; decides the exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unreadable files, malformed JSON, unknown override keys.
    Usage(String),
    /// A well-formed configuration that violates a model constraint.
    Validation(String),
    /// Anything that went wrong after validation (I/O, mostly).
    Runtime(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Runtime(_) => 1,
            Failure::Validation(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Validation(m) | Failure::Runtime(m) => m,
        }
    }
}

fn io_failure(context: impl std::fmt::Display) -> impl FnOnce(io::Error) -> Failure {
    move |e| Failure::Runtime(format!("{context}: {e}"))
}

#[derive(Debug, Parser)]
#[command(name = "partbot", version, about = "Particle robot swarm simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one episode and write trajectory.csv, robots.csv and metrics.json.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// wave, random or all-contract.
        #[arg(long)]
        policy: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Dot-path override, e.g. `physics.mu=0.2`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run a benchmark matrix and write report.csv and report.json.
    Bench {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Serve the line protocol on a TCP port or on stdin/stdout.
    #[command(group(ArgGroup::new("transport").required(true).args(["port", "stdio"])))]
    Serve {
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        stdio: bool,
    },
    /// Render PPM frames from a per-robot trajectory CSV.
    Render {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

fn create_file(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(io_failure(path.display()))
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(io_failure(dir.display()))
}

fn cmd_run(
    config: Option<&Path>,
    policy: Option<&str>,
    seed: Option<u64>,
    out: &Path,
    overrides: &[String],
) -> Result<(), Failure> {
    let cfg = config::load_run_config(config, policy, overrides)?;
    let seed = seed.unwrap_or(cfg.scenario.seed);
    let (log, report) = run_episode(&cfg.scenario, &cfg.policy, seed, EpisodeOptions { record_robots: true }).map_err(|e| {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    })?;

    create_dir(out)?;
    let traj_path = out.join("trajectory.csv");
    write_trajectory_csv(&log, create_file(&traj_path)?).map_err(io_failure(traj_path.display()))?;
    let robots_path = out.join("robots.csv");
    let frames = log.per_robot.as_deref().unwrap_or_default();
    write_robots_csv(frames, create_file(&robots_path)?).map_err(io_failure(robots_path.display()))?;
    let metrics = json!({
        "task": cfg.scenario.task,
        "policy": cfg.policy.name(),
        "seed": seed,
        "config_digest": log.config_digest,
        "metrics": report,
    });
    let metrics_path = out.join("metrics.json");
    let mut w = create_file(&metrics_path)?;
    serde_json::to_writer_pretty(&mut w, &metrics)
        .map_err(io::Error::from)
        .and_then(|()| writeln!(w))
        .and_then(|()| w.flush())
        .map_err(io_failure(metrics_path.display()))?;
    eprintln!(
        "{} {} seed {seed}: projected {:.3} LU, net {:.3} LU, total {:.3} LU over {} steps",
        cfg.scenario.task,
        cfg.policy.name(),
        report.projected_displacement,
        report.net_displacement,
        report.total_distance,
        report.steps
    );
    Ok(())
}

fn cmd_bench(matrix: &Path, out: &Path, overrides: &[String]) -> Result<(), Failure> {
    let matrix = config::load_matrix(matrix, overrides)?;
    let report = run_benchmark(&matrix, Execution::default()).map_err(|e| Failure::Runtime(e.to_string()))?;
    create_dir(out)?;
    let csv_path = out.join("report.csv");
    write_report_csv(&report, create_file(&csv_path)?).map_err(io_failure(csv_path.display()))?;
    let json_path = out.join("report.json");
    let mut w = create_file(&json_path)?;
    serde_json::to_writer_pretty(&mut w, &report)
        .map_err(io::Error::from)
        .and_then(|()| writeln!(w))
        .and_then(|()| w.flush())
        .map_err(io_failure(json_path.display()))?;
    eprintln!("{} episodes, {} rows", report.episodes.len(), report.rows.len());
    Ok(())
}

fn cmd_serve(port: Option<u16>, stdio: bool) -> Result<(), Failure> {
    if stdio {
        let mut session = Session::new(SessionOptions::default());
        let stdin = io::stdin();
        serve_lines(&mut session, stdin.lock(), io::stdout().lock()).map_err(io_failure("stdio"))
    } else {
        let port = port.expect("clap enforces one transport");
        let listener = std::net::TcpListener::bind(("127.0.0.1", port)).map_err(|e| Failure::Usage(format!("cannot bind port {port}: {e}")))?;
        let addr = listener.local_addr().map_err(io_failure("listener"))?;
        eprintln!("listening on {addr}");
        serve_tcp(listener, SessionOptions::default()).map_err(io_failure("accept"))
    }
}

fn cmd_render(traj: &Path, out: &Path, config: Option<&Path>, overrides: &[String]) -> Result<(), Failure> {
    let cfg = config::load_run_config(config, None, overrides)?;
    let file = File::open(traj).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", traj.display())))?;
    let frames = read_robots_csv(BufReader::new(file)).map_err(|e| Failure::Usage(format!("{}: {e}", traj.display())))?;

    let scenario = &cfg.scenario;
    let obstacles = if scenario.task == TaskKind::ObstacleNav {
        gate_walls(scenario)
    } else {
        Vec::new()
    };
    // The object is only logged as the agent position in the sibling trajectory file.
    let object_track: Option<Vec<Vec2>> = if scenario.task.has_object() {
        let sibling = traj.with_file_name("trajectory.csv");
        match File::open(&sibling) {
            Ok(f) => Some(
                read_trajectory_csv(BufReader::new(f))
                    .map_err(|e| Failure::Usage(format!("{}: {e}", sibling.display())))?
                    .0,
            ),
            Err(_) => None,
        }
    } else {
        None
    };

    create_dir(out)?;
    let camera = cfg.render.camera();
    let mut index = String::new();
    for (step, frame) in frames.iter().enumerate().step_by(cfg.render.every as usize) {
        let object = object_track.as_ref().and_then(|t| t.get(step)).map(|&p| DynamicObject {
            position: p,
            velocity: Vec2::ZERO,
            radius: scenario.object_radius,
            mass: scenario.object_mass,
        });
        let world = world_from_snapshots(frame, &scenario.physics, obstacles.clone(), object);
        let image = rasterize_frame(&world, scenario.goal, &camera).map_err(|e| Failure::Validation(e.to_string()))?;
        let name = format!("frame_{step:06}.ppm");
        let path = out.join(&name);
        fs::write(&path, image.to_ppm()).map_err(io_failure(path.display()))?;
        index.push_str(&name);
        index.push('\n');
    }
    let index_path = out.join("index.txt");
    fs::write(&index_path, index).map_err(io_failure(index_path.display()))?;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            config,
            policy,
            seed,
            out,
            overrides,
        } => cmd_run(config.as_deref(), policy.as_deref(), seed, &out, &overrides),
        Command::Bench { matrix, out, overrides } => cmd_bench(&matrix, &out, &overrides),
        Command::Serve { port, stdio } => cmd_serve(port, stdio),
        Command::Render {
            traj,
            out,
            config,
            overrides,
        } => cmd_render(&traj, &out, config.as_deref(), &overrides),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version are not failures
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
