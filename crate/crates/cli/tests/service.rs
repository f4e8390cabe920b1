use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;
use windform_cli::service::{router, AppState};
use windform_core::config::{Project, ProjectConfig};

fn app(out: &Path) -> Router {
    let assets = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../assets");
    let text = json!({
        "terrain": {"synthetic": {"kind": "hills", "amplitude": 2, "waves": 2, "size": 40, "resolution": 16}},
        "field": {"stations": "fig1_stations.csv", "grid": {"cols": 16, "rows": 16}},
        "swarms": [{"name": "live", "n": 30, "seed": 7, "spawn": [[0.3, 0.3], [0.7, 0.7]], "steps": 1}],
        "output_dir": out
    })
    .to_string();
    let cfg = ProjectConfig::from_json(&text, &assets).unwrap();
    router(Arc::new(AppState::new(Project::load(cfg).unwrap())))
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, value)
}

async fn create(app: &Router, body: Value) -> String {
    let (status, v) = call(app, Method::POST, "/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    v["session_id"].as_str().unwrap().to_string()
}

fn stroke() -> Value {
    json!({"points": [[615500, 9531500], [618000, 9532500], [621000, 9533500]], "duration_s": 2.0, "weight": 1.5})
}

#[tokio::test]
async fn create_stroke_run_state() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app(tmp.path());
    let id = create(&app, json!({})).await;

    let (status, v) = call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/strokes"),
        Some(stroke()),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v["track_index"], 0);
    assert_eq!(v["revision"], 1);

    let (status, v) = call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/run"),
        Some(json!({"steps": 5})),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v["step_index"], 5);

    let (status, s) = call(&app, Method::GET, &format!("/sessions/{id}/state"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(s["step_index"], 5);
    assert_eq!(s["running"], false);
    assert_eq!(s["agents"].as_array().unwrap().len(), 30);
    assert_eq!(s["attractors"].as_array().unwrap().len(), 1);
    assert_eq!(s["digest"].as_str().unwrap().len(), 64);

    let (status, v) = call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/export"),
        Some(json!({"kind": "trails"})),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{v}");
    let path = v["paths"][0].as_str().unwrap();
    assert!(Path::new(path).exists());

    let (status, _) = call(&app, Method::DELETE, &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::NO_CONTENT);
    let (status, _) = call(&app, Method::GET, &format!("/sessions/{id}/state"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn errors_map_to_status_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app(tmp.path());
    let (status, v) = call(&app, Method::GET, "/sessions/nope/state", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(v["error"].is_string());

    let id = create(&app, json!({"seed": 3})).await;
    let (status, v) = call(
        &app,
        Method::PATCH,
        &format!("/sessions/{id}/params"),
        Some(json!({"v_max": -1.0})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let fields: Vec<&str> = v["fields"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f.as_str().unwrap())
        .collect();
    assert!(fields.iter().any(|f| f.starts_with("params.v_max")), "{v}");

    let (status, _) = call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/run"),
        Some(json!({"steps": 0})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/strokes"),
        Some(json!({"points": []})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = call(
        &app,
        Method::POST,
        "/sessions",
        Some(json!({"scenario": "missing"})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn busy_while_running() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app(tmp.path());
    let id = create(&app, json!({})).await;

    let runner = {
        let app = app.clone();
        let uri = format!("/sessions/{id}/run");
        tokio::spawn(async move { call(&app, Method::POST, &uri, Some(json!({"steps": 3000}))).await })
    };
    let mut seen = false;
    for _ in 0..500 {
        let (_, s) = call(&app, Method::GET, &format!("/sessions/{id}/state"), None).await;
        if s["running"] == true {
            seen = true;
            break;
        }
        tokio::time::sleep(Duration::from_millis(2)).await;
    }
    assert!(seen, "run never observed in progress");
    let (status, _) = call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/run"),
        Some(json!({"steps": 1})),
    )
    .await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = call(&app, Method::DELETE, &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);

    // Commands during a run are queued, not rejected.
    let (status, _) = call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/strokes"),
        Some(stroke()),
    )
    .await;
    assert_eq!(status, StatusCode::OK);

    let (status, v) = runner.await.unwrap();
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["step_index"], 3000);
    let (_, log) = call(&app, Method::GET, &format!("/sessions/{id}/log"), None).await;
    let step = log["log"][0]["step"].as_u64().unwrap();
    assert!(step > 0 && step <= 3000, "{log}");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn stream_sends_one_event_per_step() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app(tmp.path());
    let id = create(&app, json!({})).await;

    let req = Request::get(format!("/sessions/{id}/stream"))
        .body(Body::empty())
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    assert_eq!(res.status(), StatusCode::OK);
    let mut body = res.into_body();

    let mut text = String::new();
    let mut ran = false;
    let mut ids = Vec::new();
    let deadline = tokio::time::Instant::now() + Duration::from_secs(30);
    while ids.len() < 4 {
        let frame = tokio::time::timeout_at(deadline, body.frame())
            .await
            .expect("stream stalled");
        let Some(Ok(frame)) = frame else { break };
        if let Ok(data) = frame.into_data() {
            text.push_str(std::str::from_utf8(&data).unwrap());
        }
        while let Some(end) = text.find("\n\n") {
            let event: String = text.drain(..end + 2).collect();
            if event.contains("event: state") {
                let id_line = event.lines().find(|l| l.starts_with("id: ")).unwrap();
                ids.push(id_line[4..].parse::<u64>().unwrap());
            }
        }
        if !ran && !ids.is_empty() {
            ran = true;
            let (status, _) = call(
                &app,
                Method::POST,
                &format!("/sessions/{id}/run"),
                Some(json!({"steps": 3})),
            )
            .await;
            assert_eq!(status, StatusCode::OK);
        }
    }
    assert_eq!(ids, [0, 1, 2, 3]);
}

#[tokio::test]
async fn replaying_the_log_reproduces_the_digest() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app(tmp.path());

    let a = create(&app, json!({"seed": 11})).await;
    call(
        &app,
        Method::POST,
        &format!("/sessions/{a}/run"),
        Some(json!({"steps": 10})),
    )
    .await;
    call(
        &app,
        Method::POST,
        &format!("/sessions/{a}/strokes"),
        Some(stroke()),
    )
    .await;
    call(
        &app,
        Method::POST,
        &format!("/sessions/{a}/run"),
        Some(json!({"steps": 15})),
    )
    .await;
    call(
        &app,
        Method::PATCH,
        &format!("/sessions/{a}/params"),
        Some(json!({"w_align": 2.0})),
    )
    .await;
    call(
        &app,
        Method::POST,
        &format!("/sessions/{a}/run"),
        Some(json!({"steps": 20})),
    )
    .await;
    let (_, log) = call(&app, Method::GET, &format!("/sessions/{a}/log"), None).await;
    let (_, sa) = call(&app, Method::GET, &format!("/sessions/{a}/state"), None).await;

    let b = create(&app, json!({"seed": 11})).await;
    let mut at = 0u64;
    for entry in log["log"].as_array().unwrap() {
        let step = entry["step"].as_u64().unwrap();
        if step > at {
            call(
                &app,
                Method::POST,
                &format!("/sessions/{b}/run"),
                Some(json!({"steps": step - at})),
            )
            .await;
            at = step;
        }
        let mut cmd = entry["command"].clone();
        let kind = cmd.as_object_mut().unwrap().remove("kind").unwrap();
        let (status, v) = match kind.as_str().unwrap() {
            "stroke" => call(&app, Method::POST, &format!("/sessions/{b}/strokes"), Some(cmd)).await,
            _ => call(&app, Method::PATCH, &format!("/sessions/{b}/params"), Some(cmd)).await,
        };
        assert_eq!(status, StatusCode::OK, "{v}");
    }
    call(
        &app,
        Method::POST,
        &format!("/sessions/{b}/run"),
        Some(json!({"steps": 45 - at})),
    )
    .await;
    let (_, sb) = call(&app, Method::GET, &format!("/sessions/{b}/state"), None).await;
    assert_eq!(sa["step_index"], 45);
    assert_eq!(sa["digest"], sb["digest"]);
}
