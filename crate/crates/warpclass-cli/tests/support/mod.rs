//! Test support: spawning the binary and a small JSON Schema validator
//! covering the subset the shipped schemas use (type, enum, properties,
//! required, additionalProperties, items).
//!
//! Shared between test binaries; not every binary uses every helper.
#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_warpclass"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawning warpclass")
}

pub fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

pub fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON: {e}\n--- stdout ---\n{}\n--- stderr ---\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

pub fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(name);
    serde_json::from_str(&std::fs::read_to_string(&path).expect("reading schema"))
        .expect("parsing schema")
}

pub fn assert_valid(schema: &Value, instance: &Value) {
    if let Err(msg) = validate_at(schema, instance, "$") {
        panic!("schema violation: {msg}\ninstance: {instance}");
    }
}

fn validate_at(schema: &Value, instance: &Value, path: &str) -> Result<(), String> {
    if let Some(allowed) = schema.get("enum").and_then(Value::as_array) {
        if !allowed.contains(instance) {
            return Err(format!("{path}: {instance} not in enum {allowed:?}"));
        }
        return Ok(());
    }
    if let Some(ty) = schema.get("type").and_then(Value::as_str) {
        let ok = match ty {
            "object" => instance.is_object(),
            "array" => instance.is_array(),
            "string" => instance.is_string(),
            "number" => instance.is_number(),
            "integer" => instance.is_i64() || instance.is_u64(),
            "boolean" => instance.is_boolean(),
            other => return Err(format!("{path}: unsupported schema type `{other}`")),
        };
        if !ok {
            return Err(format!("{path}: expected {ty}, got {instance}"));
        }
    }
    if let Some(obj) = instance.as_object() {
        let props = schema.get("properties").and_then(Value::as_object);
        if let Some(required) = schema.get("required").and_then(Value::as_array) {
            for key in required {
                let key = key.as_str().unwrap();
                if !obj.contains_key(key) {
                    return Err(format!("{path}: missing required `{key}`"));
                }
            }
        }
        let additional_ok = schema
            .get("additionalProperties")
            .and_then(Value::as_bool)
            .unwrap_or(true);
        for (key, value) in obj {
            match props.and_then(|p| p.get(key)) {
                Some(sub) => validate_at(sub, value, &format!("{path}.{key}"))?,
                None if additional_ok => {}
                None => return Err(format!("{path}: unexpected property `{key}`")),
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), instance.as_array()) {
        for (i, v) in arr.iter().enumerate() {
            validate_at(items, v, &format!("{path}[{i}]"))?;
        }
    }
    Ok(())
}

/// A short sinh table (domain [0, 3]) that forces inconclusive verdicts.
pub fn write_short_table(path: &Path) {
    let mut rows = String::from("t,sigma,dsigma\n");
    for i in 0..=60 {
        let t = i as f64 * 0.05;
        rows.push_str(&format!("{},{},{}\n", t, t.sinh(), t.cosh()));
    }
    std::fs::write(path, rows).unwrap();
}
