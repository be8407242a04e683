use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use jsonschema::{Registry, Validator};
use mediatrix_core::pipeline;
use mediatrix_core::scenario::{bundled, Scenario};
use serde_json::Value;

const BASE: &str = "json-schema:///";

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn registry() -> &'static Registry<'static> {
    static REGISTRY: OnceLock<Registry<'static>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        Registry::new()
            .add(format!("{BASE}scenario.schema.json"), schema("scenario.schema.json"))
            .unwrap()
            .prepare()
            .unwrap()
    })
}

fn validator(name: &str) -> Validator {
    jsonschema::options()
        .with_base_uri(BASE)
        .with_registry(registry())
        .build(&schema(name))
        .unwrap()
}

fn assert_valid(v: &Validator, doc: &Value, what: &str) {
    let errors: Vec<String> = v
        .iter_errors(doc)
        .map(|e| format!("{} at {}", e, e.instance_path()))
        .collect();
    assert!(errors.is_empty(), "{what}: {errors:#?}");
}

fn toml_to_json(text: &str) -> Value {
    let t: toml::Value = toml::from_str(text).unwrap();
    serde_json::to_value(t).unwrap()
}

#[test]
fn bundled_scenarios_match_schema() {
    let v = validator("scenario.schema.json");
    for (name, text) in bundled() {
        assert_valid(&v, &toml_to_json(text), name);
    }
}

#[test]
fn scenario_schema_rejects_bad_configs() {
    let v = validator("scenario.schema.json");
    let base = toml_to_json(bundled().next().unwrap().1);
    let mut unknown = base.clone();
    unknown["surprise"] = Value::from(1);
    assert!(!v.is_valid(&unknown));
    let mut negative = base.clone();
    negative["tracer"] = serde_json::json!({ "step": -0.1 });
    assert!(!v.is_valid(&negative));
    let mut kind = base;
    kind["surface"]["kind"] = Value::from("torus");
    assert!(!v.is_valid(&kind));
}

#[test]
fn run_outputs_match_schemas() {
    let curve = validator("curve.schema.json");
    let analysis = validator("analysis.schema.json");
    let manifest = validator("manifest.schema.json");
    let read = |p: &Path| -> Value { serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap() };
    for name in ["sphere_poles", "cigar_poles"] {
        let scenario = Scenario::bundled(name).unwrap();
        let text = mediatrix_core::scenario::bundled_source(name).unwrap();
        let result = pipeline::compute(&scenario).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let m = pipeline::write_outputs(&scenario, text, &result, dir.path()).unwrap();
        assert_valid(&curve, &read(&dir.path().join("curve.json")), "curve.json");
        assert_valid(&manifest, &read(&dir.path().join("manifest.json")), "manifest.json");
        let reports: Vec<&String> = m.files.iter().filter(|f| f.starts_with("analysis/")).collect();
        assert_eq!(reports.len(), scenario.analyses.len());
        for rel in reports {
            assert_valid(&analysis, &read(&dir.path().join(rel)), rel);
        }
    }
}
