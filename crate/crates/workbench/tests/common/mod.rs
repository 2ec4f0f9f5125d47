#![allow(dead_code)]

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

pub const API_SCHEMA: &str = include_str!("../../../../docs/api.schema.json");
pub const ARCH_SCHEMA: &str = include_str!("../../../../docs/architecture.schema.json");

pub struct Reply {
    pub status: StatusCode,
    pub bytes: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.bytes)
            .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&self.bytes)))
    }

    pub fn code(&self) -> String {
        self.json()["error"]["code"]
            .as_str()
            .unwrap_or_default()
            .to_string()
    }
}

pub async fn call(app: &Router, method: &str, uri: &str, body: Option<&str>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    if body.is_some() {
        req = req.header("content-type", "application/json");
    }
    let req = req
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp
        .into_body()
        .collect()
        .await
        .unwrap()
        .to_bytes()
        .to_vec();
    Reply { status, bytes }
}

/// Validates `value` against one `$defs` entry of the API schema.
pub fn conforms(def: &str, value: &Value) {
    let mut schema: Value = serde_json::from_str(API_SCHEMA).unwrap();
    schema["$ref"] = Value::String(format!("#/$defs/{def}"));
    let v = jsonschema::validator_for(&schema).expect("schema compiles");
    if let Err(e) = v.validate(value) {
        panic!("{def} payload does not match schema: {e}\n{value:#}");
    }
}

pub fn conforms_architecture(value: &Value) {
    let schema: Value = serde_json::from_str(ARCH_SCHEMA).unwrap();
    let v = jsonschema::validator_for(&schema).expect("schema compiles");
    if let Err(e) = v.validate(value) {
        panic!("architecture does not match schema: {e}");
    }
}

pub fn error_conforms(r: &Reply) {
    conforms("error", &r.json());
}
