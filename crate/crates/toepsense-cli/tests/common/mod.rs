//! Helpers shared by the CLI and acceptance suites: spawning the binary
//! with a clean environment, and a validator for the subset of JSON Schema
//! used by the shipped schema file.

// Each test target compiles its own copy; not every target uses every helper.
#![allow(dead_code)]

use std::process::{Command, Output};

use serde_json::Value;

pub fn toepsense(args: &[&str]) -> Output {
    toepsense_with_env(args, &[])
}

pub fn toepsense_with_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_toepsense"));
    cmd.args(args);
    for key in ["TOEPSENSE_PRIME", "TOEPSENSE_TRIALS", "TOEPSENSE_SEED"] {
        cmd.env_remove(key);
    }
    for (key, value) in env {
        cmd.env(key, value);
    }
    cmd.output().expect("binary runs")
}

pub fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process exited")
}

pub fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

pub fn published_schema() -> Value {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../docs/toepsense.schema.json"
    );
    serde_json::from_str(&std::fs::read_to_string(path).expect("schema file present"))
        .expect("schema file parses")
}

/// Validates `value` against the subset of JSON Schema the published file
/// uses: `$ref` into `$defs`, `oneOf`, `enum`, `type` (single or list),
/// `properties`, `required`, `items`, and `additionalProperties`.
pub fn validate_schema(root: &Value, value: &Value) -> Result<(), String> {
    check(root, root, value, "$")
}

fn resolve<'a>(root: &'a Value, reference: &str) -> &'a Value {
    let path = reference
        .strip_prefix("#/")
        .unwrap_or_else(|| panic!("unsupported reference {reference}"));
    let mut node = root;
    for segment in path.split('/') {
        node = node
            .get(segment)
            .unwrap_or_else(|| panic!("dangling reference {reference}"));
    }
    node
}

fn type_matches(ty: &str, value: &Value) -> bool {
    match ty {
        "object" => value.is_object(),
        "array" => value.is_array(),
        "string" => value.is_string(),
        "boolean" => value.is_boolean(),
        "null" => value.is_null(),
        "integer" => value.as_i64().is_some() || value.as_u64().is_some(),
        "number" => value.is_number(),
        other => panic!("unsupported type keyword {other}"),
    }
}

fn check(root: &Value, schema: &Value, value: &Value, path: &str) -> Result<(), String> {
    let Some(obj) = schema.as_object() else {
        return Ok(());
    };
    if let Some(reference) = obj.get("$ref").and_then(Value::as_str) {
        return check(root, resolve(root, reference), value, path);
    }
    if let Some(options) = obj.get("oneOf").and_then(Value::as_array) {
        let mut errors = Vec::new();
        for option in options {
            match check(root, option, value, path) {
                Ok(()) => return Ok(()),
                Err(e) => errors.push(e),
            }
        }
        return Err(format!("{path}: no oneOf branch matched ({errors:?})"));
    }
    if let Some(allowed) = obj.get("enum").and_then(Value::as_array) {
        if !allowed.contains(value) {
            return Err(format!("{path}: {value} not one of {allowed:?}"));
        }
    }
    if let Some(ty) = obj.get("type") {
        let ok = match ty {
            Value::String(s) => type_matches(s, value),
            Value::Array(list) => list
                .iter()
                .any(|t| type_matches(t.as_str().expect("type name"), value)),
            other => panic!("unsupported type spec {other}"),
        };
        if !ok {
            return Err(format!("{path}: expected type {ty}, got {value}"));
        }
    }
    if let Some(required) = obj.get("required").and_then(Value::as_array) {
        let map = value
            .as_object()
            .ok_or_else(|| format!("{path}: expected an object"))?;
        for key in required {
            let key = key.as_str().expect("required key");
            if !map.contains_key(key) {
                return Err(format!("{path}: missing required field {key:?}"));
            }
        }
    }
    let properties = obj.get("properties").and_then(Value::as_object);
    if let (Some(props), Some(map)) = (properties, value.as_object()) {
        for (key, sub) in props {
            if let Some(v) = map.get(key) {
                check(root, sub, v, &format!("{path}.{key}"))?;
            }
        }
    }
    if let Some(additional) = obj.get("additionalProperties") {
        if let Some(map) = value.as_object() {
            for (key, v) in map {
                if properties.is_some_and(|p| p.contains_key(key)) {
                    continue;
                }
                match additional {
                    Value::Bool(true) => {}
                    Value::Bool(false) => {
                        return Err(format!("{path}: unexpected field {key:?}"));
                    }
                    sub => check(root, sub, v, &format!("{path}.{key}"))?,
                }
            }
        }
    }
    if let Some(items) = obj.get("items") {
        if let Some(list) = value.as_array() {
            for (i, v) in list.iter().enumerate() {
                check(root, items, v, &format!("{path}[{i}]"))?;
            }
        }
    }
    Ok(())
}
