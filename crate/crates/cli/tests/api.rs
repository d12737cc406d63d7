use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use egt_cli::server::{router, AppState};
use egt_cli::session::{read_records, LogRecord, Session};
use egt_core::fixtures::{TWO_STACKS_PLAN, TWO_STACKS_SCENE};
use egt_core::resolver::resolve_directive;
use egt_core::scene::SceneFile;
use egt_core::{EgtConfig, Eci, InteractionContext, Vec3};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> Router {
    router(AppState::new(EgtConfig::default(), None))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap_or(Value::Null) };
    (status, v)
}

fn setup(generator: &str) -> Value {
    json!({
        "scene": serde_json::from_str::<Value>(TWO_STACKS_SCENE).unwrap(),
        "plan": serde_json::from_str::<Value>(TWO_STACKS_PLAN).unwrap(),
        "generator": generator,
    })
}

async fn create(app: &Router) -> String {
    let (status, v) = call(app, "POST", "/sessions", Some(setup("egt"))).await;
    assert_eq!(status, StatusCode::CREATED);
    v["id"].as_str().unwrap().to_string()
}

/// Centre of the target region, computed by the resolver from the state the
/// server reports.
async fn oracle_target(app: &Router, id: &str) -> Vec3 {
    let (_, state) = call(app, "GET", &format!("/sessions/{id}"), None).await;
    let scene = serde_json::from_value::<SceneFile>(state["scene"].clone()).unwrap().into_scene().unwrap();
    let ctx: InteractionContext = serde_json::from_value(state["context"].clone()).unwrap();
    let eci: Eci = serde_json::from_value(state["pending"]["narration"]["alternatives"][0]["eci"].clone()).unwrap();
    resolve_directive(&eci, &scene, &ctx, &EgtConfig::default().field).unwrap().target.unwrap().argmax
}

fn action(directive_id: &str, at: Vec3) -> Value {
    json!({ "directiveId": directive_id, "placedAt": [at.x, at.y, at.z], "responseTimeMs": 4200 })
}

#[tokio::test]
async fn create_then_show() {
    let app = app();
    let (status, v) = call(&app, "POST", "/sessions", Some(setup("egt"))).await;
    assert_eq!(status, StatusCode::CREATED);
    assert!(v["scene"]["table"].is_object());
    let id = v["id"].as_str().unwrap();
    let (status, s) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(s["cursor"], 0);
    assert_eq!(s["totalSteps"], 6);
    assert_eq!(s["pending"], Value::Null);
}

#[tokio::test]
async fn step_does_not_advance_until_the_action() {
    let app = app();
    let id = create(&app).await;
    let (status, first) = call(&app, "POST", &format!("/sessions/{id}/step"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(first["directive"], "Put a block on the table.");
    assert!(!first["alternatives"].as_array().unwrap().is_empty());
    let (_, again) = call(&app, "POST", &format!("/sessions/{id}/step"), None).await;
    assert_eq!(first, again);
    let (_, s) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(s["cursor"], 0);
}

#[tokio::test]
async fn placement_at_the_oracle_target_is_accurate() {
    let app = app();
    let id = create(&app).await;
    let (_, step) = call(&app, "POST", &format!("/sessions/{id}/step"), None).await;
    let did = step["directiveId"].as_str().unwrap().to_string();
    let at = oracle_target(&app, &id).await;
    let (status, out) = call(&app, "POST", &format!("/sessions/{id}/action"), Some(action(&did, at))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(out, json!({ "accurate": true, "nextAvailable": true }));
    let (_, s) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(s["cursor"], 1);
    assert!(s["context"]["last_acted"].is_string());

    // the next directive uses the task context
    let (_, step) = call(&app, "POST", &format!("/sessions/{id}/step"), None).await;
    assert_eq!(step["directive"], "Put a block on top of it.");
}

#[tokio::test]
async fn far_placement_is_inaccurate_but_advances() {
    let app = app();
    let id = create(&app).await;
    call(&app, "POST", &format!("/sessions/{id}/step"), None).await;
    let (_, step) = call(&app, "POST", &format!("/sessions/{id}/step"), None).await;
    let did = step["directiveId"].as_str().unwrap().to_string();
    let at = oracle_target(&app, &id).await;
    call(&app, "POST", &format!("/sessions/{id}/action"), Some(action(&did, at))).await;
    let (_, step) = call(&app, "POST", &format!("/sessions/{id}/step"), None).await;
    let did = step["directiveId"].as_str().unwrap().to_string();
    // "on top of it" answered with a block in the far corner
    let (status, out) =
        call(&app, "POST", &format!("/sessions/{id}/action"), Some(action(&did, Vec3::new(4.5, 0.5, 4.5)))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(out["accurate"], false);
    let (_, log) = call(&app, "GET", &format!("/sessions/{id}/log"), None).await;
    assert_eq!(log.as_array().unwrap().len(), 2);
    assert_eq!(log[1]["accurate"], false);
}

#[tokio::test]
async fn out_of_order_actions_conflict() {
    let app = app();
    let id = create(&app).await;
    let at = Vec3::new(-3.5, 0.5, -1.5);
    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/action"), Some(action(&format!("{id}-0"), at))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (_, step) = call(&app, "POST", &format!("/sessions/{id}/step"), None).await;
    let did = step["directiveId"].as_str().unwrap().to_string();
    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/action"), Some(action("other", at))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/action"), Some(action(&did, at))).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/action"), Some(action(&did, at))).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn validation_errors_are_400() {
    let app = app();
    let (status, _) = call(&app, "POST", "/sessions", Some(json!({ "scene": {}, "plan": { "steps": [] } }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let overlapping = json!({
        "scene": { "table": { "width": 5, "depth": 5 }, "blocks": [
            { "id": "a", "pos": [0, 0.5, 0], "color": "red" },
            { "id": "b", "pos": [0.2, 0.5, 0], "color": "red" }
        ] },
        "plan": { "steps": [] }
    });
    let (status, _) = call(&app, "POST", "/sessions", Some(overlapping)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let id = create(&app).await;
    let (_, step) = call(&app, "POST", &format!("/sessions/{id}/step"), None).await;
    let did = step["directiveId"].as_str().unwrap();
    for bad in [
        json!({ "directiveId": did, "placedAt": [0, 0.5], "responseTimeMs": 100 }),
        json!({ "directiveId": did, "placedAt": [0, 0.5, 0], "responseTimeMs": -1 }),
        json!({ "directiveId": did, "placedAt": [0, 0.5, 0], "responseTimeMs": 100, "speechDurationMs": -5 }),
        json!({ "placedAt": [0, 0.5, 0], "responseTimeMs": 100 }),
    ] {
        let (status, _) = call(&app, "POST", &format!("/sessions/{id}/action"), Some(bad.clone())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{bad}");
    }
}

#[tokio::test]
async fn unknown_session_is_404() {
    let app = app();
    for (m, uri) in [("GET", "/sessions/nope"), ("POST", "/sessions/nope/step"), ("GET", "/sessions/nope/log")] {
        assert_eq!(call(&app, m, uri, None).await.0, StatusCode::NOT_FOUND);
    }
    let body = action("x", Vec3::new(0.0, 0.5, 0.0));
    assert_eq!(call(&app, "POST", "/sessions/nope/action", Some(body)).await.0, StatusCode::NOT_FOUND);
}

/// Runs the whole fixture plan, placing each block at the oracle target.
async fn run_plan(app: &Router, id: &str) -> Vec<String> {
    let mut spoken = Vec::new();
    loop {
        let (status, step) = call(app, "POST", &format!("/sessions/{id}/step"), None).await;
        if status == StatusCode::CONFLICT {
            break;
        }
        assert_eq!(status, StatusCode::OK, "{step}");
        spoken.push(step["directive"].as_str().unwrap().to_string());
        let did = step["directiveId"].as_str().unwrap().to_string();
        let at = oracle_target(app, id).await;
        let (_, out) = call(app, "POST", &format!("/sessions/{id}/action"), Some(action(&did, at))).await;
        assert_eq!(out["accurate"], true);
        assert_eq!(out["nextAvailable"], spoken.len() < 6);
    }
    spoken
}

#[tokio::test]
async fn whole_plan_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(AppState::new(EgtConfig::default(), Some(dir.path().to_path_buf())));
    let id = create(&app).await;
    let spoken = run_plan(&app, &id).await;
    assert_eq!(spoken.len(), 6);
    assert_eq!(spoken[5], "Add one more.");
    let (_, log) = call(&app, "GET", &format!("/sessions/{id}/log"), None).await;
    assert_eq!(log.as_array().unwrap().len(), 6);
    assert_eq!(log[0]["response_time"], 4.2);

    let records = read_records(&dir.path().join(format!("{id}.jsonl"))).unwrap();
    assert_eq!(records.len(), 1 + 2 * 6);
    let cfg = EgtConfig::default();
    let replayed = Session::replay(&records, &cfg).unwrap();
    assert_eq!(replayed.cursor, 6);
    let (_, state) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(serde_json::to_value(&replayed.ctx).unwrap(), state["context"]);

    // a directive depends only on the steps before it
    for k in 1..records.len() {
        let prefix = Session::replay(&records[..k], &cfg).unwrap();
        let acted = records[..k].iter().filter(|r| matches!(r, LogRecord::Action { .. })).count();
        assert_eq!(prefix.cursor, acted);
    }
    let mut tampered = records.clone();
    if let LogRecord::Directive { surface, .. } = &mut tampered[3] {
        *surface = "Put a block somewhere.".into();
    }
    assert!(Session::replay(&tampered, &cfg).is_err());
}

#[tokio::test]
async fn naive_sessions_run_too() {
    let app = app();
    let (_, v) = call(&app, "POST", "/sessions", Some(setup("naive"))).await;
    let id = v["id"].as_str().unwrap();
    let (status, step) = call(&app, "POST", &format!("/sessions/{id}/step"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(step["alternatives"].as_array().unwrap().len(), 1);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn sessions_run_concurrently() {
    let app = app();
    let ids: Vec<String> = create_many(&app, 4).await;
    let tasks: Vec<_> = ids
        .into_iter()
        .map(|id| {
            let app = app.clone();
            tokio::spawn(async move { run_plan(&app, &id).await })
        })
        .collect();
    let mut results = Vec::new();
    for t in tasks {
        results.push(t.await.unwrap());
    }
    assert!(results.windows(2).all(|w| w[0] == w[1]));
}

async fn create_many(app: &Router, n: usize) -> Vec<String> {
    let mut ids = Vec::new();
    for _ in 0..n {
        ids.push(create(app).await);
    }
    ids
}
