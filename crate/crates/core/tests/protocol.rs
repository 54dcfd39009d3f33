use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::thread;

use partbot::env::{Action, ParticleEnv};
use partbot::policy::{wave_action, WavePolicyParams};
use partbot::protocol::{serve_lines, serve_tcp, Session, SessionOptions, SessionPhase};
use partbot::scenario::{ScenarioConfig, TaskKind};
use serde_json::{json, Value};

fn session() -> Session {
    let dir = tempfile::tempdir().unwrap().keep();
    Session::new(SessionOptions {
        render_dir: dir,
        ..SessionOptions::default()
    })
}

fn send(s: &mut Session, msg: Value) -> Value {
    serde_json::from_str(&s.handle_message(&msg.to_string()).line).unwrap()
}

fn error_code(v: &Value) -> Option<&str> {
    v.get("error")?.get("code")?.as_str()
}

fn reset(s: &mut Session, config: &ScenarioConfig, seed: u64) -> Value {
    send(s, json!({"cmd": "reset", "config": config, "seed": seed}))
}

#[test]
fn step_before_reset_is_rejected() {
    let mut s = session();
    let r = send(&mut s, json!({"cmd": "step", "action": [0, 1]}));
    assert_eq!(error_code(&r), Some("not_reset"));
    assert_eq!(s.phase(), SessionPhase::AwaitingReset);
    let r = send(&mut s, json!({"cmd": "render"}));
    assert_eq!(error_code(&r), Some("not_reset"));
}

#[test]
fn reset_returns_four_n_observation() {
    let mut s = session();
    let r = reset(&mut s, &ScenarioConfig::default(), 0);
    assert_eq!(r["obs"].as_array().unwrap().len(), 100);
    assert_eq!(r["info"]["step_count"], 0);
    let manip = ScenarioConfig::for_task(TaskKind::ObjectManip);
    let r = reset(&mut s, &manip, 0);
    assert_eq!(r["obs"].as_array().unwrap().len(), 104);
}

#[test]
fn action_errors_keep_the_session() {
    let mut s = session();
    reset(&mut s, &ScenarioConfig::default(), 0);
    let r = send(&mut s, json!({"cmd": "step", "action": [0, 1]}));
    assert_eq!(error_code(&r), Some("bad_action_length"));
    let r = send(&mut s, json!({"cmd": "step", "action": vec![2; 25]}));
    assert_eq!(error_code(&r), Some("action_out_of_range"));
    let r = send(&mut s, json!({"cmd": "step", "action": -1}));
    assert_eq!(error_code(&r), Some("action_out_of_range"));
    let r = send(&mut s, json!({"cmd": "step", "action": "expand"}));
    assert_eq!(error_code(&r), Some("action_out_of_range"));
    let r = send(&mut s, json!({"cmd": "step", "action": 1u64 << 25}));
    assert_eq!(error_code(&r), Some("action_out_of_range"));
    // the session is still usable
    let r = send(&mut s, json!({"cmd": "step", "action": 0}));
    assert_eq!(r["info"]["step_count"], 1);
    assert_eq!(r["terminated"], false);
}

#[test]
fn unknown_and_malformed_commands() {
    let mut s = session();
    assert_eq!(error_code(&send(&mut s, json!({"cmd": "fly"}))), Some("unknown_cmd"));
    assert_eq!(error_code(&send(&mut s, json!({"action": 0}))), Some("unknown_cmd"));
    assert_eq!(error_code(&send(&mut s, json!([1, 2]))), Some("unknown_cmd"));
}

#[test]
fn bad_config_is_reported() {
    let mut s = session();
    let cfg = ScenarioConfig {
        gate_opening: 2.0,
        ..ScenarioConfig::for_task(TaskKind::ObstacleNav)
    };
    let r = reset(&mut s, &cfg, 0);
    assert_eq!(error_code(&r), Some("bad_config"));
    assert!(r["error"]["message"].as_str().unwrap().contains("GateTooNarrow"));
    let r = send(&mut s, json!({"cmd": "reset", "config": {"n_robots": 25, "warp": 9}}));
    assert_eq!(error_code(&r), Some("bad_config"));
    assert_eq!(s.phase(), SessionPhase::AwaitingReset);
}

#[test]
fn three_bad_lines_close_the_session() {
    let mut s = session();
    for strike in 1..=3 {
        let reply = s.handle_message("not json {");
        let v: Value = serde_json::from_str(&reply.line).unwrap();
        assert_eq!(error_code(&v), Some("bad_json"));
        assert_eq!(reply.close, strike == 3);
    }
    assert_eq!(s.phase(), SessionPhase::Closed);
}

#[test]
fn episode_over_after_horizon() {
    let mut s = session();
    let cfg = ScenarioConfig {
        horizon: 2,
        ..ScenarioConfig::default()
    };
    reset(&mut s, &cfg, 0);
    send(&mut s, json!({"cmd": "step", "action": 0}));
    let r = send(&mut s, json!({"cmd": "step", "action": 0}));
    assert_eq!(r["truncated"], true);
    let r = send(&mut s, json!({"cmd": "step", "action": 0}));
    assert_eq!(error_code(&r), Some("episode_over"));
    // reset revives the session
    let r = send(&mut s, json!({"cmd": "reset", "seed": 1}));
    assert!(r.get("obs").is_some());
}

#[test]
fn spec_reports_dimensions() {
    let mut s = session();
    let r = send(&mut s, json!({"cmd": "spec"}));
    assert_eq!(r["obs_dim"], 100);
    assert_eq!(r["action"]["multi_binary"], 25);
    assert_eq!(r["action"]["discrete"], 1u64 << 25);
    let big = ScenarioConfig {
        n_robots: 36,
        ..ScenarioConfig::default()
    };
    let r = send(&mut s, json!({"cmd": "spec", "config": big}));
    assert_eq!(r["obs_dim"], 144);
    assert!(r["action"]["discrete"].is_null());
}

#[test]
fn render_writes_a_ppm() {
    let mut s = session();
    reset(&mut s, &ScenarioConfig::default(), 0);
    let r = send(&mut s, json!({"cmd": "render"}));
    let path = r["path"].as_str().unwrap();
    let bytes = std::fs::read(path).unwrap();
    assert!(bytes.starts_with(b"P6\n640 640\n255\n"));
    assert!(path.ends_with("frame_000000.ppm"));
}

#[test]
fn close_ends_the_session() {
    let mut s = session();
    let reply = s.handle_message(r#"{"cmd":"close"}"#);
    assert!(reply.close);
    assert_eq!(s.phase(), SessionPhase::Closed);
}

/// Scripted wave episode through the protocol versus the same actions
/// in-process: observations and rewards must agree to 1e-12.
#[test]
fn protocol_is_transparent() {
    let cfg = ScenarioConfig::default();
    let seed = 5;
    let wave = WavePolicyParams::default();

    let mut env = ParticleEnv::new(cfg.clone()).unwrap();
    env.reset(seed).unwrap();
    let mut s = session();
    let first = reset(&mut s, &cfg, seed);
    assert_eq!(first["obs"].as_array().unwrap().len(), 100);

    for t in 0..200u64 {
        let cmds = wave_action(env.world().unwrap(), cfg.goal, t, &wave);
        let action = Action::from_commands(&cmds);
        let local = env.step(&action).unwrap();
        let remote = send(&mut s, json!({"cmd": "step", "action": action}));
        let remote_obs: Vec<f64> = serde_json::from_value(remote["obs"].clone()).unwrap();
        let local_obs = local.observation.flatten();
        assert_eq!(remote_obs.len(), local_obs.len());
        for (a, b) in remote_obs.iter().zip(&local_obs) {
            assert!((a - b).abs() <= 1e-12, "step {t}: {a} vs {b}");
        }
        let remote_reward = remote["reward"].as_f64().unwrap();
        assert!((remote_reward - local.reward).abs() <= 1e-12);
    }
}

#[test]
fn stdio_stream_preserves_order() {
    let input = [
        r#"{"cmd":"spec"}"#,
        r#"{"cmd":"step","action":0}"#,
        "",
        r#"{"cmd":"reset","seed":0}"#,
        r#"{"cmd":"close"}"#,
        r#"{"cmd":"spec"}"#,
    ]
    .join("\n");
    let mut out = Vec::new();
    let mut s = session();
    serve_lines(&mut s, input.as_bytes(), &mut out).unwrap();
    let replies: Vec<Value> = String::from_utf8(out)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(replies.len(), 4, "blank line skipped, nothing after close");
    assert!(replies[0].get("obs_dim").is_some());
    assert_eq!(error_code(&replies[1]), Some("not_reset"));
    assert!(replies[2].get("obs").is_some());
    assert_eq!(replies[3]["closed"], true);
}

#[test]
fn tcp_sessions_are_isolated() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let dir = tempfile::tempdir().unwrap().keep();
    thread::spawn(move || {
        serve_tcp(
            listener,
            SessionOptions {
                render_dir: dir,
                ..SessionOptions::default()
            },
        )
    });

    let talk = move |lines: Vec<String>| {
        let stream = TcpStream::connect(addr).unwrap();
        let mut writer = stream.try_clone().unwrap();
        let mut reader = BufReader::new(stream);
        lines
            .into_iter()
            .map(|l| {
                writer.write_all(l.as_bytes()).unwrap();
                writer.write_all(b"\n").unwrap();
                let mut reply = String::new();
                reader.read_line(&mut reply).unwrap();
                serde_json::from_str::<Value>(&reply).unwrap()
            })
            .collect::<Vec<_>>()
    };

    let a = thread::spawn(move || {
        talk(vec![
            json!({"cmd": "reset", "seed": 0}).to_string(),
            json!({"cmd": "step", "action": 0}).to_string(),
        ])
    });
    let b = thread::spawn(move || talk(vec![json!({"cmd": "step", "action": 0}).to_string()]));
    let a = a.join().unwrap();
    let b = b.join().unwrap();
    assert_eq!(a[1]["info"]["step_count"], 1);
    assert_eq!(error_code(&b[0]), Some("not_reset"));
}
