//! Validation for the JSON Schema subset used by the shipped report schemas:
//! `type` (single or list), `properties`, `required`,
//! `additionalProperties: false`, `items`, `enum`, `minimum`, `minItems`
//! and local `$ref` into `definitions`.

use serde_json::Value;

pub const BENCH: &str = include_str!("../../../docs/schemas/bench.schema.json");
pub const FLOPS: &str = include_str!("../../../docs/schemas/flops.schema.json");
pub const TRAIN: &str = include_str!("../../../docs/schemas/train.schema.json");
pub const VERIFY: &str = include_str!("../../../docs/schemas/verify.schema.json");

/// Every violation as `path: message`; empty when `value` conforms.
pub fn validate(value: &Value, schema: &Value) -> Vec<String> {
    let mut errors = Vec::new();
    check(value, schema, schema, "$", &mut errors);
    errors
}

pub fn validate_str(value: &Value, schema: &str) -> Vec<String> {
    match serde_json::from_str::<Value>(schema) {
        Ok(s) => validate(value, &s),
        Err(e) => vec![format!("schema does not parse: {e}")],
    }
}

fn type_matches(value: &Value, ty: &str) -> bool {
    match ty {
        "object" => value.is_object(),
        "array" => value.is_array(),
        "string" => value.is_string(),
        "boolean" => value.is_boolean(),
        "null" => value.is_null(),
        "number" => value.is_number(),
        "integer" => value.as_u64().is_some() || value.as_i64().is_some(),
        _ => false,
    }
}

fn resolve<'a>(schema: &'a Value, root: &'a Value) -> Option<&'a Value> {
    match schema.get("$ref").and_then(Value::as_str) {
        Some(r) => {
            let name = r.strip_prefix("#/definitions/")?;
            root.get("definitions")?.get(name)
        }
        None => Some(schema),
    }
}

fn check(value: &Value, schema: &Value, root: &Value, path: &str, errors: &mut Vec<String>) {
    let Some(schema) = resolve(schema, root) else {
        errors.push(format!("{path}: unresolvable $ref"));
        return;
    };
    if let Some(ty) = schema.get("type") {
        let ok = match ty {
            Value::String(t) => type_matches(value, t),
            Value::Array(ts) => ts.iter().filter_map(Value::as_str).any(|t| type_matches(value, t)),
            _ => false,
        };
        if !ok {
            errors.push(format!("{path}: expected type {ty}, got {value}"));
            return;
        }
    }
    if let Some(options) = schema.get("enum").and_then(Value::as_array) {
        if !options.contains(value) {
            errors.push(format!("{path}: {value} not in {options:?}"));
        }
    }
    if let (Some(min), Some(v)) = (schema.get("minimum").and_then(Value::as_f64), value.as_f64()) {
        if v < min {
            errors.push(format!("{path}: {v} below minimum {min}"));
        }
    }
    if let Value::Object(map) = value {
        let props = schema.get("properties").and_then(Value::as_object);
        for key in schema.get("required").and_then(Value::as_array).into_iter().flatten() {
            if let Some(k) = key.as_str() {
                if !map.contains_key(k) {
                    errors.push(format!("{path}: missing required property '{k}'"));
                }
            }
        }
        for (k, v) in map {
            match props.and_then(|p| p.get(k)) {
                Some(sub) => check(v, sub, root, &format!("{path}.{k}"), errors),
                None if schema.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    errors.push(format!("{path}: unexpected property '{k}'"));
                }
                None => {}
            }
        }
    }
    if let Value::Array(items) = value {
        if let Some(min) = schema.get("minItems").and_then(Value::as_u64) {
            if (items.len() as u64) < min {
                errors.push(format!("{path}: {} items, need at least {min}", items.len()));
            }
        }
        if let Some(item_schema) = schema.get("items") {
            for (i, item) in items.iter().enumerate() {
                check(item, item_schema, root, &format!("{path}[{i}]"), errors);
            }
        }
    }
}
