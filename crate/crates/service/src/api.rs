//! HTTP/JSON interface: classify, ingest, review queue, renditions, audit
//! and health.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router as HttpRouter};
use chrono::{DateTime, Utc};
use serde::Deserialize;
use serde_json::json;

use crate::audit;
use crate::review::{LabelRequest, ReviewError};
use crate::router::{ClassifyError, IngestError, InputProblem, Problem, Router};

/// Header carrying the static API token, when one is configured.
pub const TOKEN_HEADER: &str = "x-api-token";

/// Largest accepted upload.
pub const MAX_BODY_BYTES: usize = 256 * 1024 * 1024;

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

fn input_status(p: &InputProblem) -> StatusCode {
    match p {
        InputProblem::NotDicom(_) => StatusCode::UNSUPPORTED_MEDIA_TYPE,
        InputProblem::Malformed(_) => StatusCode::BAD_REQUEST,
    }
}

impl From<ClassifyError> for ApiError {
    fn from(e: ClassifyError) -> Self {
        let status = match &e {
            ClassifyError::BackendNotLoaded => StatusCode::SERVICE_UNAVAILABLE,
            ClassifyError::Input(p) => input_status(p),
            ClassifyError::Backend(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

impl From<IngestError> for ApiError {
    fn from(e: IngestError) -> Self {
        let status = match &e {
            IngestError::BackendNotLoaded | IngestError::Degraded | IngestError::AuditWrite(_) => {
                StatusCode::SERVICE_UNAVAILABLE
            }
            IngestError::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

impl From<ReviewError> for ApiError {
    fn from(e: ReviewError) -> Self {
        let status = match &e {
            ReviewError::UnknownItem(_) => StatusCode::NOT_FOUND,
            ReviewError::NotPending { .. } | ReviewError::SameReader => StatusCode::CONFLICT,
            ReviewError::EmptyReader => StatusCode::BAD_REQUEST,
            ReviewError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

fn require_body(body: &Bytes) -> Result<(), ApiError> {
    if body.is_empty() {
        return Err(ApiError(
            StatusCode::BAD_REQUEST,
            "empty request body".into(),
        ));
    }
    Ok(())
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> T + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))
}

async fn healthz() -> &'static str {
    "ok"
}

async fn classify(State(router): State<Arc<Router>>, body: Bytes) -> Result<Response, ApiError> {
    require_body(&body)?;
    let c = blocking(move || router.classify(&body)).await??;
    Ok(Json(c).into_response())
}

async fn ingest(State(router): State<Arc<Router>>, body: Bytes) -> Result<Response, ApiError> {
    require_body(&body)?;
    let done = blocking(move || router.ingest(&body, None)).await??;
    let (status, error) = match &done.problem {
        None => (StatusCode::OK, None),
        Some(Problem::Input(p)) => (input_status(p), Some(p.message().to_string())),
        Some(Problem::Backend(m)) => (StatusCode::INTERNAL_SERVER_ERROR, Some(m.clone())),
        Some(Problem::Delivery(m)) => (StatusCode::BAD_GATEWAY, Some(m.clone())),
    };
    let mut body = serde_json::to_value(&done.decision)
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    if let Some(msg) = error {
        body["error"] = json!(msg);
    }
    Ok((status, Json(body)).into_response())
}

async fn review_queue(State(router): State<Arc<Router>>) -> Response {
    Json(router.review().open_items()).into_response()
}

async fn label(
    State(router): State<Arc<Router>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let req: LabelRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError(StatusCode::BAD_REQUEST, format!("invalid label: {e}")))?;
    let item = blocking(move || router.review().label(&id, &req)).await??;
    Ok(Json(item).into_response())
}

async fn image(
    State(router): State<Arc<Router>>,
    Path(file): Path<String>,
) -> Result<Response, ApiError> {
    let id = file
        .strip_suffix(".png")
        .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("no image {file}")))?
        .to_string();
    let missing = ApiError(StatusCode::NOT_FOUND, format!("no image for {id}"));
    let png = blocking(move || router.image_png(&id))
        .await?
        .ok_or(missing)?;
    let png = png.map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

#[derive(Debug, Deserialize)]
struct AuditQuery {
    since: Option<String>,
}

async fn audit_log(
    State(router): State<Arc<Router>>,
    Query(q): Query<AuditQuery>,
) -> Result<Response, ApiError> {
    let since = q
        .since
        .map(|s| {
            DateTime::parse_from_rfc3339(&s)
                .map(|t| t.with_timezone(&Utc))
                .map_err(|e| ApiError(StatusCode::BAD_REQUEST, format!("bad since {s:?}: {e}")))
        })
        .transpose()?;
    let path = router.audit_path().to_path_buf();
    let replay = blocking(move || audit::replay(&path))
        .await?
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    let records: Vec<_> = replay
        .records
        .into_iter()
        .filter(|r| since.is_none_or(|t| r.ts >= t))
        .collect();
    Ok(Json(records).into_response())
}

async fn check_token(
    State(token): State<Option<String>>,
    headers: HeaderMap,
    req: Request,
    next: Next,
) -> Response {
    if let Some(expected) = token {
        let given = headers.get(TOKEN_HEADER).and_then(|v| v.to_str().ok());
        if given != Some(expected.as_str()) {
            return ApiError(
                StatusCode::UNAUTHORIZED,
                "missing or wrong API token".into(),
            )
            .into_response();
        }
    }
    next.run(req).await
}

pub fn app(router: Arc<Router>) -> HttpRouter {
    let token = router.config().api_token.clone();
    let v1 = HttpRouter::new()
        .route("/classify", post(classify))
        .route("/ingest", post(ingest))
        .route("/review/queue", get(review_queue))
        .route("/review/:id/label", post(label))
        .route("/images/:file", get(image))
        .route("/audit", get(audit_log))
        .route_layer(middleware::from_fn_with_state(token, check_token));
    HttpRouter::new()
        .route("/healthz", get(healthz))
        .nest("/v1", v1)
        .layer(axum::extract::DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(router)
}
