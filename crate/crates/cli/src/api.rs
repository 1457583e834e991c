//! HTTP front end under `/v1`. Handlers only decode requests, call the
//! [`Service`] on a blocking thread and encode the result.
//!
//! | method | path                        | payload                     |
//! |--------|-----------------------------|-----------------------------|
//! | GET    | /v1/project                 | ProjectSummary              |
//! | GET    | /v1/actions                 | [ActionSummary]             |
//! | GET    | /v1/actions/{name}          | ActionDetail                |
//! | POST   | /v1/actions/{name}/feedback | FeedbackResponse            |
//! | GET    | /v1/audit                   | AuditReport                 |
//! | POST   | /v1/validate                | ValidationReport            |
//! | POST   | /v1/localize                | Localization                |
//! | POST   | /v1/plan                    | PlanResponse                |
//! | POST   | /v1/llm-plan                | LoopOutcome                 |
//! | GET    | /v1/runs                    | [RunRecord]                 |
//! | GET    | /v1/report                  | Report                      |
//! | GET    | /v1/events?since&timeout_ms | ChangePage (long poll)      |
//!
//! Errors are [`ApiError`] bodies with the status from [`ApiError::status`].

use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use crate::service::{ApiError, FeedbackRequest, PlanRequest, Service, ValidateRequest};

/// Upper bound on one long-poll wait.
pub const MAX_POLL: Duration = Duration::from_secs(30);
const DEFAULT_POLL_MS: u64 = 25_000;

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

async fn blocking<T, F>(svc: Arc<Service>, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&Service) -> Result<T, ApiError> + Send + 'static,
{
    match tokio::task::spawn_blocking(move || f(&svc)).await {
        Ok(r) => r.map(Json),
        Err(e) => Err(ApiError::new("internal", e.to_string())),
    }
}

fn decode<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::new("invalid-payload", e.to_string()))
}

/// Router for one project. With `static_dir`, unmatched paths are served
/// from that directory (the built console).
pub fn router(svc: Arc<Service>, static_dir: Option<&Path>) -> Router {
    let v1 = Router::new()
        .route("/project", get(project))
        .route("/actions", get(actions))
        .route("/actions/{name}", get(action))
        .route("/actions/{name}/feedback", post(feedback))
        .route("/audit", get(audit))
        .route("/validate", post(validate))
        .route("/localize", post(localize))
        .route("/plan", post(plan))
        .route("/llm-plan", post(llm_plan))
        .route("/runs", get(runs))
        .route("/report", get(report))
        .route("/events", get(events))
        .fallback(|| async { ApiError::new("not-found", "no such endpoint") });
    let app = Router::new().nest("/v1", v1).with_state(svc);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.fallback(|| async { ApiError::new("not-found", "no such endpoint") }),
    }
}

async fn project(State(svc): State<Arc<Service>>) -> impl IntoResponse {
    blocking(svc, |s| s.summary()).await
}

async fn actions(State(svc): State<Arc<Service>>) -> impl IntoResponse {
    blocking(svc, |s| s.list_actions()).await
}

async fn action(State(svc): State<Arc<Service>>, UrlPath(name): UrlPath<String>) -> impl IntoResponse {
    blocking(svc, move |s| s.action(&name)).await
}

async fn feedback(State(svc): State<Arc<Service>>, UrlPath(name): UrlPath<String>, body: Bytes) -> impl IntoResponse {
    let req: FeedbackRequest = decode(&body)?;
    blocking(svc, move |s| s.feedback(&name, req)).await
}

async fn audit(State(svc): State<Arc<Service>>) -> impl IntoResponse {
    blocking(svc, |s| s.audit()).await
}

async fn validate(State(svc): State<Arc<Service>>, body: Bytes) -> impl IntoResponse {
    let req: ValidateRequest = decode(&body)?;
    blocking(svc, move |s| s.validate(&req)).await
}

async fn localize(State(svc): State<Arc<Service>>, body: Bytes) -> impl IntoResponse {
    let req: ValidateRequest = decode(&body)?;
    blocking(svc, move |s| s.localize(&req)).await
}

async fn plan(State(svc): State<Arc<Service>>, body: Bytes) -> impl IntoResponse {
    let req: PlanRequest = decode(&body)?;
    blocking(svc, move |s| s.plan(&req)).await
}

async fn llm_plan(State(svc): State<Arc<Service>>, body: Bytes) -> impl IntoResponse {
    let req: PlanRequest = decode(&body)?;
    blocking(svc, move |s| s.llm_plan(&req)).await
}

async fn runs(State(svc): State<Arc<Service>>) -> impl IntoResponse {
    blocking(svc, |s| s.runs()).await
}

async fn report(State(svc): State<Arc<Service>>) -> impl IntoResponse {
    blocking(svc, |s| s.report()).await
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default)]
struct EventsQuery {
    since: u64,
    timeout_ms: Option<u64>,
}

async fn events(State(svc): State<Arc<Service>>, q: Result<Query<EventsQuery>, QueryRejection>) -> impl IntoResponse {
    let Query(q) = q.map_err(|e| ApiError::new("invalid-payload", e.body_text()))?;
    let wait = Duration::from_millis(q.timeout_ms.unwrap_or(DEFAULT_POLL_MS)).min(MAX_POLL);
    Ok::<_, ApiError>(Json(svc.feed.wait(q.since, wait).await))
}
