//! The CLI's single JSON config document: `scenario`, `physics`, `policy`
//! and `render` sections, layered as defaults < file < `--policy` < `--set`.

use std::fs;
use std::path::Path;

use partbot::bench::{BenchmarkMatrix, MatrixEntry};
use partbot::physics::PhysicsParams;
use partbot::policy::PolicySpec;
use partbot::render::Camera;
use partbot::scenario::ScenarioConfig;
use partbot::vec2::Vec2;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::Failure;

pub const SECTIONS: [&str; 4] = ["scenario", "physics", "policy", "render"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderSection {
    pub center: Option<Vec2>,
    pub scale: f64,
    pub width: u32,
    pub height: u32,
    /// Render every n-th logged step.
    pub every: u64,
}

impl Default for RenderSection {
    fn default() -> Self {
        let cam = Camera::default();
        Self {
            center: cam.center,
            scale: cam.scale,
            width: cam.width,
            height: cam.height,
            every: 50,
        }
    }
}

impl RenderSection {
    pub fn camera(&self) -> Camera {
        Camera {
            center: self.center,
            scale: self.scale,
            width: self.width,
            height: self.height,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub policy: PolicySpec,
    pub render: RenderSection,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("config types serialize")
}

fn default_document() -> Map<String, Value> {
    let mut scenario = to_value(&ScenarioConfig::default());
    scenario.as_object_mut().expect("object").remove("physics");
    let mut doc = Map::new();
    doc.insert("scenario".into(), scenario);
    doc.insert("physics".into(), to_value(&PhysicsParams::default()));
    doc.insert("policy".into(), to_value(&PolicySpec::default()));
    doc.insert("render".into(), to_value(&RenderSection::default()));
    doc
}

/// Recursively overlays `over` onto `base`. New keys are kept so the
/// typed decode can reject them by name.
fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn policy_defaults(name: &str) -> Result<Value, Failure> {
    PolicySpec::from_name(name)
        .map(|p| to_value(&p))
        .ok_or_else(|| Failure::Validation(format!("PolicyInvalid: unknown policy `{name}` (expected wave, random or all-contract)")))
}

/// Replaces the policy section with the named policy's defaults overlaid by
/// whatever the file said, if the file named the same policy.
fn layer_policy(doc: &mut Map<String, Value>, file_policy: Option<Value>, cli_policy: Option<&str>) -> Result<(), Failure> {
    let file_name = file_policy
        .as_ref()
        .and_then(|p| p.get("name"))
        .and_then(Value::as_str)
        .map(str::to_owned);
    let name = cli_policy
        .map(str::to_owned)
        .or(file_name.clone())
        .unwrap_or_else(|| "wave".to_owned());
    let mut policy = policy_defaults(&name)?;
    if let Some(fp) = file_policy {
        if file_name.as_deref().is_none_or(|n| n == name) {
            merge(&mut policy, fp);
        }
    }
    doc.insert("policy".into(), policy);
    Ok(())
}

pub fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{} is not valid JSON: {e}", path.display())))
}

fn check_sections(doc: &Map<String, Value>, allowed: &[&str], path: &Path) -> Result<(), Failure> {
    for key in doc.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Failure::Validation(format!(
                "ConfigParse: {}: unknown section `{key}` (expected one of {})",
                path.display(),
                allowed.join(", ")
            )));
        }
    }
    Ok(())
}

/// Applies one `a.b.c=value` override. The path must already exist.
pub fn apply_override(doc: &mut Map<String, Value>, assignment: &str) -> Result<(), Failure> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Failure::Usage(format!("--set expects key=value, got `{assignment}`")))?;
    let keys: Vec<&str> = path.split('.').collect();
    let (last, parents) = keys.split_last().expect("split yields at least one item");
    let unknown = || Failure::Usage(format!("--set: unknown config key `{path}`"));
    let mut node = doc;
    for key in parents {
        node = node.get_mut(*key).and_then(Value::as_object_mut).ok_or_else(unknown)?;
    }
    let slot = node.get_mut(*last).ok_or_else(unknown)?;
    *slot = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
    Ok(())
}

fn decode<T: for<'de> Deserialize<'de>>(section: &str, value: Value) -> Result<T, Failure> {
    serde_json::from_value(value).map_err(|e| Failure::Validation(format!("ConfigParse: section `{section}`: {e}")))
}

fn build_scenario_config(doc: &mut Map<String, Value>) -> Result<ScenarioConfig, Failure> {
    let mut scenario = doc.remove("scenario").unwrap_or(Value::Object(Map::new()));
    if let Some(obj) = scenario.as_object_mut() {
        if obj.contains_key("physics") {
            return Err(Failure::Validation(
                "ConfigParse: physics parameters belong in the top-level `physics` section".into(),
            ));
        }
        obj.insert("physics".into(), doc.remove("physics").unwrap_or(Value::Null));
    }
    decode("scenario", scenario)
}

/// Resolves the `run`/`render` config document. `path: None` means all
/// defaults.
pub fn load_run_config(path: Option<&Path>, cli_policy: Option<&str>, overrides: &[String]) -> Result<RunConfig, Failure> {
    let mut doc = default_document();
    let mut file_policy = None;
    if let Some(p) = path {
        let file = read_json(p)?;
        let Value::Object(mut file) = file else {
            return Err(Failure::Validation(format!("ConfigParse: {} must hold a JSON object", p.display())));
        };
        check_sections(&file, &SECTIONS, p)?;
        file_policy = file.remove("policy");
        let mut merged = Value::Object(doc);
        merge(&mut merged, Value::Object(file));
        doc = match merged {
            Value::Object(m) => m,
            _ => unreachable!(),
        };
    }
    layer_policy(&mut doc, file_policy, cli_policy)?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let policy: PolicySpec = decode("policy", doc.remove("policy").unwrap_or(Value::Null))?;
    let render: RenderSection = decode("render", doc.remove("render").unwrap_or(Value::Null))?;
    let scenario = build_scenario_config(&mut doc)?;
    scenario.validate().map_err(|e| Failure::Validation(e.to_string()))?;
    policy
        .validate(&scenario.physics)
        .map_err(|e| Failure::Validation(format!("PolicyInvalid: {e}")))?;
    render
        .camera()
        .validate()
        .map_err(|e| Failure::Validation(e.to_string()))?;
    if render.every == 0 {
        return Err(Failure::Validation("BadValue: render.every must be positive".into()));
    }
    Ok(RunConfig { scenario, policy, render })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryDoc {
    task: partbot::scenario::TaskKind,
    policy: Value,
    seeds: Vec<u64>,
}

/// Resolves a benchmark matrix document: optional `scenario` and `physics`
/// sections shared by every entry, plus `entries` of `{task, policy, seeds}`.
/// A policy may be a bare name or an object with a `name`.
pub fn load_matrix(path: &Path, overrides: &[String]) -> Result<BenchmarkMatrix, Failure> {
    let Value::Object(mut file) = read_json(path)? else {
        return Err(Failure::Validation(format!("ConfigParse: {} must hold a JSON object", path.display())));
    };
    check_sections(&file, &["scenario", "physics", "entries"], path)?;
    let entries = file.remove("entries").unwrap_or(Value::Array(Vec::new()));
    let mut doc = default_document();
    doc.remove("policy");
    doc.remove("render");
    let mut merged = Value::Object(doc);
    merge(&mut merged, Value::Object(file));
    let Value::Object(mut doc) = merged else { unreachable!() };
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let base = build_scenario_config(&mut doc)?;

    let docs: Vec<EntryDoc> = decode("entries", entries)?;
    let mut out = Vec::with_capacity(docs.len());
    for e in docs {
        let policy_value = match e.policy {
            Value::String(name) => policy_defaults(&name)?,
            Value::Object(obj) => {
                let name = obj
                    .get("name")
                    .and_then(Value::as_str)
                    .ok_or_else(|| Failure::Validation("ConfigParse: entry policy needs a `name`".into()))?;
                let mut v = policy_defaults(name)?;
                merge(&mut v, Value::Object(obj));
                v
            }
            other => return Err(Failure::Validation(format!("ConfigParse: bad entry policy {other}"))),
        };
        out.push(MatrixEntry {
            task: e.task,
            policy: decode("entries.policy", policy_value)?,
            seeds: e.seeds,
        });
    }
    let matrix = BenchmarkMatrix { base, entries: out };
    matrix.validate().map_err(|e| Failure::Validation(e.to_string()))?;
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let cfg = load_run_config(None, None, &[]).unwrap();
        assert_eq!(cfg.scenario, ScenarioConfig::default());
        assert_eq!(cfg.policy, PolicySpec::default());
    }

    #[test]
    fn overrides_hit_existing_keys_only() {
        let cfg = load_run_config(
            None,
            None,
            &["physics.mu=0.2".into(), "scenario.task=obstacle_nav".into(), "policy.direction_sign=-1".into()],
        )
        .unwrap();
        assert_eq!(cfg.scenario.physics.mu, 0.2);
        assert_eq!(cfg.scenario.task.as_str(), "obstacle_nav");
        match cfg.policy {
            PolicySpec::Wave { params } => assert_eq!(params.direction_sign, -1),
            other => panic!("{other:?}"),
        }
        assert!(matches!(load_run_config(None, None, &["physics.warp=1".into()]), Err(Failure::Usage(_))));
        assert!(matches!(load_run_config(None, None, &["nonsense".into()]), Err(Failure::Usage(_))));
    }

    #[test]
    fn cli_policy_replaces_file_policy_params() {
        let cfg = load_run_config(None, Some("random"), &[]).unwrap();
        assert_eq!(cfg.policy, PolicySpec::Random);
        assert!(matches!(load_run_config(None, Some("ppo"), &[]), Err(Failure::Validation(_))));
    }

    #[test]
    fn validation_errors_are_named() {
        let err = load_run_config(None, None, &["scenario.task=obstacle_nav".into(), "scenario.gate_opening=2".into()])
            .unwrap_err();
        match err {
            Failure::Validation(m) => assert!(m.contains("GateTooNarrow"), "{m}"),
            other => panic!("{other:?}"),
        }
    }
}
