#![allow(dead_code)]

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use reqprio_core::Project;
use reqprio_service::api::router;
use reqprio_service::store::ProjectStore;
use serde_json::Value;
use tower::ServiceExt;

pub struct TestServer {
    pub dir: tempfile::TempDir,
    pub store: Arc<ProjectStore>,
    pub app: Router,
}

impl TestServer {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let store = Arc::new(ProjectStore::open(dir.path()).unwrap());
        let app = router(store.clone());
        Self { dir, store, app }
    }

    pub fn with(projects: &[(&str, Project)]) -> Self {
        let s = Self::new();
        for (id, p) in projects {
            s.store.create(id, p.clone()).unwrap();
        }
        s
    }

    pub async fn call(&self, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        call(&self.app, method, uri, body).await
    }
}

pub async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}
