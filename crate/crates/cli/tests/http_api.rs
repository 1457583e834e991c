mod common;

use std::path::Path;
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use pddlforge::generators::{fixture_suite, MASHED_ITEM_FEEDBACK};
use pddlforge::llm::{LlmError, Message, ReplayTransport, Transport, TransportMode};
use pddlforge::workspace::{Project, ProjectConfig};
use pddlforge_cli::api::router;
use pddlforge_cli::service::Service;
use serde_json::{json, Value};
use tower::ServiceExt;

use common::{constructed, project_copy};

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::String(String::from_utf8_lossy(&bytes).into()));
    (status, value)
}

fn app_for(root: &Path) -> Router {
    router(Arc::new(Service::new(root)), None)
}

#[tokio::test]
async fn empty_project_lists_no_actions() {
    let dir = tempfile::tempdir().unwrap();
    let config = ProjectConfig::new("empty", "Nothing yet.", TransportMode::Scripted { responses: vec![] });
    Project::init(dir.path(), config).unwrap();
    let app = app_for(dir.path());
    let (status, body) = call(&app, Method::GET, "/v1/actions", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!([]));
    let (status, body) = call(&app, Method::GET, "/v1/project", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["hasDomain"], json!(false));
    assert_eq!(body["transport"], json!("scripted"));
    let (status, body) = call(&app, Method::GET, "/v1/actions/stack", None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["code"], json!("no-domain"));
}

#[tokio::test]
async fn action_detail_and_error_statuses() {
    let dir = constructed("blocksworld");
    let app = app_for(dir.path());

    let (status, list) = call(&app, Method::GET, "/v1/actions", None).await;
    assert_eq!(status, StatusCode::OK);
    let names: Vec<&str> = list.as_array().unwrap().iter().map(|a| a["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["pick-up", "put-down", "stack", "unstack"]);
    assert!(list.as_array().unwrap().iter().all(|a| a["clean"] == json!(true)));

    let (status, detail) = call(&app, Method::GET, "/v1/actions/stack", None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(detail["pddl"].as_str().unwrap().starts_with("(:action stack"));
    assert!(detail["nl"].as_str().unwrap().starts_with("Action: stack\nParameters:\n"));
    assert_eq!(detail["revisions"], json!([]));

    let (status, err) = call(&app, Method::GET, "/v1/actions/fly", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["code"], json!("unknown-action"));

    let (status, err) = call(&app, Method::POST, "/v1/actions/fly/feedback", Some(json!({"text": "x"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["code"], json!("unknown-action"));

    let req = Request::post("/v1/validate").body(Body::from("{not json")).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::UNPROCESSABLE_ENTITY);

    let (status, err) = call(&app, Method::POST, "/v1/plan", Some(json!({"instruction": "stack them", "colour": 1}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["code"], json!("invalid-payload"));

    let (status, err) = call(&app, Method::POST, "/v1/validate", Some(json!({"plan": "(pick-up", "task": "blocksworld-01"}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["code"], json!("invalid-plan"));

    let (status, err) = call(&app, Method::POST, "/v1/plan", Some(json!({"task": "blocksworld-99"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["code"], json!("unknown-task"));

    let (status, _) = call(&app, Method::GET, "/v2/actions", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn validation_highlights_the_failing_step() {
    let dir = constructed("blocksworld");
    let app = app_for(dir.path());
    let plan = "(pick-up b2)\n(pick-up b3)\n(stack b3 b2)\n";
    let (status, report) = call(&app, Method::POST, "/v1/validate", Some(json!({"plan": plan, "task": "blocksworld-01"}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(report["verdict"], json!("invalid"));
    let f = &report["failures"][0];
    assert_eq!(f["step"], json!(2));
    assert_eq!(f["kind"], json!("unmet-precondition"));
    let unmet: Vec<&str> = f["unmet"].as_array().unwrap().iter().map(|l| l.as_str().unwrap()).collect();
    assert!(unmet.contains(&"(arm-empty)"), "{unmet:?}");
    assert_eq!(report["not_evaluated"], json!([3]));

    let (status, loc) = call(&app, Method::POST, "/v1/localize", Some(json!({"plan": plan, "task": "blocksworld-01"}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(loc["failing_step"], json!(2));
    assert_eq!(loc["suspect_actions"], json!(["pick-up"]));
}

#[tokio::test]
async fn plan_returns_validated_result_and_logs_the_run() {
    let dir = constructed("logistics");
    let app = app_for(dir.path());
    let (status, body) = call(&app, Method::POST, "/v1/plan", Some(json!({"task": "logistics-01"}))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["result"]["outcome"]["kind"], json!("plan"));
    assert_eq!(body["validation"]["verdict"], json!("valid"));
    let (_, runs) = call(&app, Method::GET, "/v1/runs", None).await;
    assert_eq!(runs.as_array().unwrap().len(), 1);
    assert_eq!(runs[0]["taskId"], json!("logistics-01"));
    assert_eq!(runs[0]["outcome"], json!("plan"));
}

#[tokio::test]
async fn rejected_goal_translation_is_reported() {
    let dir = constructed("household");
    let bad = fixture_suite("household")
        .into_iter()
        .find(|t| t.seeded_bad_translation)
        .expect("one seeded rejection");
    let app = app_for(dir.path());
    let (status, err) = call(&app, Method::POST, "/v1/plan", Some(json!({"task": bad.id}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["code"], json!("untranslatable-goal"));
    assert!(err["detail"]["reply"].as_str().unwrap().contains("freshly-"));
}

#[tokio::test]
async fn mashed_item_feedback_adds_the_delete_effect() {
    let dir = constructed("household");
    let app = app_for(dir.path());
    let (status, body) = call(
        &app,
        Method::POST,
        "/v1/actions/mash/feedback",
        Some(json!({ "text": MASHED_ITEM_FEEDBACK })),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let added: Vec<&str> = body["revision"]["diff"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|l| l["op"] == json!("+"))
        .map(|l| l["text"].as_str().unwrap().trim())
        .collect();
    assert_eq!(added, ["(not (pickupable ?o))"]);
    assert_eq!(body["event"]["source"], json!("human"));
    assert_eq!(body["audit"]["clean"], json!(true));

    let (_, detail) = call(&app, Method::GET, "/v1/actions/mash", None).await;
    assert_eq!(detail["revisions"].as_array().unwrap().len(), 1);
    assert!(detail["pddl"].as_str().unwrap().contains("(not (pickupable ?o))"));
    let (_, report) = call(&app, Method::GET, "/v1/report", None).await;
    assert_eq!(report["ledger"]["totalHumanMessages"], json!(1));
}

/// Replays the cassette, but holds each reply until the test releases it.
struct Gated {
    inner: ReplayTransport,
    entered: Mutex<Sender<()>>,
    release: Mutex<Receiver<()>>,
}

impl Transport for Gated {
    fn complete(&self, messages: &[Message]) -> Result<String, LlmError> {
        self.entered.lock().unwrap().send(()).unwrap();
        self.release.lock().unwrap().recv_timeout(Duration::from_secs(20)).unwrap();
        self.inner.complete(messages)
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn second_feedback_on_the_same_action_conflicts() {
    let dir = constructed("household");
    let (entered_tx, entered_rx) = channel();
    let (release_tx, release_rx) = channel();
    let gated = Gated {
        inner: ReplayTransport::open(&dir.path().join("cassettes/replay.jsonl")).unwrap(),
        entered: Mutex::new(entered_tx),
        release: Mutex::new(release_rx),
    };
    let svc = Service::new(dir.path()).with_transport(Arc::new(gated));
    let app = router(Arc::new(svc), None);

    let first = {
        let app = app.clone();
        tokio::spawn(async move {
            call(&app, Method::POST, "/v1/actions/mash/feedback", Some(json!({ "text": MASHED_ITEM_FEEDBACK }))).await
        })
    };
    tokio::task::spawn_blocking(move || entered_rx.recv_timeout(Duration::from_secs(20)).unwrap())
        .await
        .unwrap();

    let (status, err) = call(&app, Method::POST, "/v1/actions/mash/feedback", Some(json!({ "text": "again" }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["code"], json!("revision-in-flight"));
    let (_, list) = call(&app, Method::GET, "/v1/actions", None).await;
    let mash = list.as_array().unwrap().iter().find(|a| a["name"] == json!("mash")).unwrap();
    assert_eq!(mash["inFlight"], json!(true));

    release_tx.send(()).unwrap();
    let (status, body) = first.await.unwrap();
    assert_eq!(status, StatusCode::OK, "{body}");
    let (_, list) = call(&app, Method::GET, "/v1/actions", None).await;
    assert!(list.as_array().unwrap().iter().all(|a| a["inFlight"] == json!(false)));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn events_long_poll_wakes_on_change() {
    let dir = constructed("logistics");
    let app = app_for(dir.path());

    let started = Instant::now();
    let (status, page) = call(&app, Method::GET, "/v1/events?since=0&timeout_ms=50", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(page, json!({"latest": 0, "changes": []}));
    assert!(started.elapsed() >= Duration::from_millis(50));

    let waiter = {
        let app = app.clone();
        tokio::spawn(async move { call(&app, Method::GET, "/v1/events?since=0&timeout_ms=20000", None).await })
    };
    tokio::time::sleep(Duration::from_millis(100)).await;
    let started = Instant::now();
    let (status, _) = call(&app, Method::POST, "/v1/plan", Some(json!({"task": "logistics-02"}))).await;
    assert_eq!(status, StatusCode::OK);
    let (status, page) = waiter.await.unwrap();
    assert_eq!(status, StatusCode::OK);
    assert!(started.elapsed() < Duration::from_secs(10));
    assert_eq!(page["latest"], json!(1));
    assert_eq!(page["changes"], json!([{"seq": 1, "kind": "run", "task": "logistics-02"}]));

    let (_, page) = call(&app, Method::GET, "/v1/events?since=1&timeout_ms=0", None).await;
    assert_eq!(page["changes"], json!([]));
    let (status, err) = call(&app, Method::GET, "/v1/events?since=soon", None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["code"], json!("invalid-payload"));
}

#[tokio::test]
async fn static_directory_is_served_beside_the_api() {
    let dir = project_copy("blocksworld");
    let site = tempfile::tempdir().unwrap();
    std::fs::write(site.path().join("index.html"), "<!doctype html><title>console</title>").unwrap();
    std::fs::write(site.path().join("app.js"), "console.log(1)").unwrap();
    let app = router(Arc::new(Service::new(dir.path())), Some(site.path()));

    let (status, body) = call(&app, Method::GET, "/", None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(body.as_str().unwrap().contains("<title>console</title>"));
    let (status, body) = call(&app, Method::GET, "/app.js", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!("console.log(1)"));
    let (status, _) = call(&app, Method::GET, "/missing.css", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, body) = call(&app, Method::GET, "/v1/actions", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!([]));
    let (status, err) = call(&app, Method::GET, "/v1/nothing", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["code"], json!("not-found"));
}
