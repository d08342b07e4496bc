//! Stateless JSON-over-HTTP front end.
//!
//! | method | path             | body                                  | response              |
//! |--------|------------------|---------------------------------------|-----------------------|
//! | POST   | `/api/render`    | render request or bare score          | `audio/wav`           |
//! | GET    | `/api/params`    | `?req=<base64url>[&format=binary]`    | synthesis parameters  |
//! | POST   | `/api/extract`   | `{ "params": {...}, "score": {...} }` | score with expression |
//! | POST   | `/api/roundtrip` | params request                        | recovery report       |
//! | POST   | `/api/sweep`     | params request                        | `text/csv`            |
//! | GET    | `/api/health`    |                                       | `{"status":"ok"}`     |
//! | GET    | `/api/defaults`  |                                       | default configuration |
//!
//! Render bodies are JSON or multipart. Multipart bodies carry a `request`
//! part (JSON) and an optional `ir` part with a raw impulse response. Render responses point at the matching
//! parameter dump through the `X-Params-URL` header; the URL embeds the whole
//! request, so the server keeps no state between calls.
//!
//! Malformed input yields 400, input that parses but is semantically invalid
//! yields 422. Error bodies are `{"error": "<message>"}`.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, FromRequest, Multipart, Query, Request, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;
use tower_http::services::ServeDir;

use super::params_file::{read_params_text, write_params_binary, write_params_text};
use super::request::{
    extract_document, load_impulse_response, roundtrip, sweep_all, ParamsRequest, RenderRequest,
};
use super::score_file::{from_json_with_path, score_from_document, ScoreDocument};
use crate::error::Error;
use crate::metrics::{sweeps_to_csv, SpectralLossConfig};
use crate::performance::PerformanceModelConfig;
use crate::score::NormalizationSpec;

const MAX_BODY_BYTES: usize = 64 << 20;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Maximum renders running at once.
    pub workers: usize,
    /// Directory served at `/` (the editor bundle).
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            static_dir: None,
        }
    }
}

#[derive(Clone)]
struct AppState {
    workers: Arc<Semaphore>,
}

struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            e if e.is_semantic() => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError {
            status,
            message: e.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        log::debug!("{}: {}", self.status, self.message);
        (
            self.status,
            Json(serde_json::json!({ "error": self.message })),
        )
            .into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Runs `f` on the blocking pool once a worker slot is free.
async fn run_blocking<T, F>(state: &AppState, f: F) -> ApiResult<T>
where
    F: FnOnce() -> crate::Result<T> + Send + 'static,
    T: Send + 'static,
{
    let permit = state
        .workers
        .clone()
        .acquire_owned()
        .await
        .map_err(|_| ApiError {
            status: StatusCode::SERVICE_UNAVAILABLE,
            message: "service is shutting down".into(),
        })?;
    let out = tokio::task::spawn_blocking(move || {
        let _permit = permit;
        f()
    })
    .await
    .map_err(|e| ApiError {
        status: StatusCode::INTERNAL_SERVER_ERROR,
        message: format!("worker failed: {e}"),
    })?;
    Ok(out?)
}

fn parse_json<T: for<'de> Deserialize<'de>>(body: &[u8]) -> ApiResult<T> {
    let text = std::str::from_utf8(body).map_err(|_| ApiError::bad_request("body is not UTF-8"))?;
    Ok(from_json_with_path(text)?)
}

/// A full render request, or a bare score document.
fn parse_render_request(body: &[u8]) -> ApiResult<RenderRequest> {
    let text = std::str::from_utf8(body).map_err(|_| ApiError::bad_request("body is not UTF-8"))?;
    Ok(RenderRequest::parse(text)?)
}

pub fn params_url(req: &ParamsRequest) -> String {
    let json = serde_json::to_vec(req).expect("request serializes");
    format!("/api/params?req={}", URL_SAFE_NO_PAD.encode(json))
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

#[derive(Serialize)]
struct Defaults {
    noise_seed: u64,
    config: PerformanceModelConfig,
    normalization: NormalizationSpec,
    spectral_loss: SpectralLossConfig,
}

async fn defaults() -> Json<Defaults> {
    Json(Defaults {
        noise_seed: 0,
        config: PerformanceModelConfig::default(),
        normalization: NormalizationSpec::default(),
        spectral_loss: SpectralLossConfig::default(),
    })
}

async fn read_render_body(req: Request) -> ApiResult<(RenderRequest, Option<Vec<f64>>)> {
    let is_multipart = req
        .headers()
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("multipart/form-data"));
    if !is_multipart {
        let body = Bytes::from_request(req, &())
            .await
            .map_err(|e| ApiError::bad_request(e.body_text()))?;
        return Ok((parse_render_request(&body)?, None));
    }
    let mut form = Multipart::from_request(req, &())
        .await
        .map_err(|e| ApiError::bad_request(e.body_text()))?;
    let mut request = None;
    let mut ir = None;
    while let Some(field) = form
        .next_field()
        .await
        .map_err(|e| ApiError::bad_request(e.body_text()))?
    {
        let name = field.name().unwrap_or_default().to_string();
        let data = field
            .bytes()
            .await
            .map_err(|e| ApiError::bad_request(e.body_text()))?;
        match name.as_str() {
            "request" => request = Some(parse_render_request(&data)?),
            "ir" => ir = Some(load_impulse_response(&data)?),
            other => {
                return Err(ApiError::bad_request(format!(
                    "unexpected form field `{other}`"
                )))
            }
        }
    }
    let request = request.ok_or_else(|| ApiError::bad_request("missing form field `request`"))?;
    Ok((request, ir))
}

async fn render(State(state): State<AppState>, req: Request) -> ApiResult<Response> {
    let (request, ir) = read_render_body(req).await?;
    if ir.is_none() && request.reverb_path().is_some() {
        return Err(ApiError::bad_request(
            "reverb: file paths are not accepted over HTTP, upload the impulse response as form field `ir`",
        ));
    }
    let url = params_url(&request.params_request());
    let format = request.sample_format();
    let (wav, clamps) = run_blocking(&state, move || {
        let out = request.render(ir)?;
        Ok((out.wav(format), out.report.clamps.len()))
    })
    .await?;
    let mut resp = (StatusCode::OK, wav).into_response();
    let headers = resp.headers_mut();
    headers.insert(header::CONTENT_TYPE, HeaderValue::from_static("audio/wav"));
    headers.insert(
        "x-params-url",
        HeaderValue::from_str(&url).expect("ascii url"),
    );
    headers.insert("x-clamp-count", HeaderValue::from(clamps));
    Ok(resp)
}

#[derive(Deserialize)]
struct ParamsQuery {
    req: String,
    #[serde(default)]
    format: Option<String>,
}

async fn params(
    State(state): State<AppState>,
    Query(q): Query<ParamsQuery>,
) -> ApiResult<Response> {
    let json = URL_SAFE_NO_PAD
        .decode(q.req.trim_end_matches('='))
        .map_err(|e| ApiError::bad_request(format!("req: invalid base64url: {e}")))?;
    let request: ParamsRequest = parse_json(&json)?;
    let binary = match q.format.as_deref() {
        None | Some("text") | Some("json") => false,
        Some("binary") => true,
        Some(other) => {
            return Err(ApiError::bad_request(format!(
                "format: unknown value `{other}`"
            )))
        }
    };
    let (params, _) = run_blocking(&state, move || request.generate()).await?;
    Ok(if binary {
        (
            [(header::CONTENT_TYPE, "application/octet-stream")],
            write_params_binary(&params),
        )
            .into_response()
    } else {
        (
            [(header::CONTENT_TYPE, "application/json")],
            write_params_text(&params),
        )
            .into_response()
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExtractRequest {
    params: serde_json::Value,
    score: ScoreDocument,
    #[serde(default)]
    normalization: NormalizationSpec,
}

async fn extract(State(state): State<AppState>, body: Bytes) -> ApiResult<Json<ScoreDocument>> {
    let req: ExtractRequest = parse_json(&body)?;
    let doc = run_blocking(&state, move || {
        req.normalization.validate()?;
        let params = read_params_text(&req.params.to_string()).map_err(|e| match e {
            Error::Format(m) => Error::Format(format!("params.{m}")),
            e => e,
        })?;
        let score = score_from_document(req.score)?;
        extract_document(&params, &score, &req.normalization)
    })
    .await?;
    Ok(Json(doc))
}

fn prepare(req: &ParamsRequest) -> crate::Result<super::score_file::Score> {
    req.config.validate()?;
    req.normalization.validate()?;
    score_from_document(req.score.clone())
}

async fn roundtrip_handler(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let req: ParamsRequest = parse_json(&body)?;
    let report = run_blocking(&state, move || {
        let score = prepare(&req)?;
        roundtrip(&score, &req.config, &req.normalization)
    })
    .await?;
    Ok(Json(report).into_response())
}

async fn sweep(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let req: ParamsRequest = parse_json(&body)?;
    let csv = run_blocking(&state, move || {
        let score = prepare(&req)?;
        Ok(sweeps_to_csv(&sweep_all(
            &score,
            &req.config,
            &req.normalization,
        )?))
    })
    .await?;
    Ok(([(header::CONTENT_TYPE, "text/csv")], csv).into_response())
}

pub fn router(cfg: &ServiceConfig) -> Router {
    let state = AppState {
        workers: Arc::new(Semaphore::new(cfg.workers.max(1))),
    };
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/defaults", get(defaults))
        .route("/api/render", post(render))
        .route("/api/params", get(params))
        .route("/api/extract", post(extract))
        .route("/api/roundtrip", post(roundtrip_handler))
        .route("/api/sweep", post(sweep))
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(state);
    match &cfg.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Serves on an already bound listener until the task is dropped.
pub async fn serve(listener: tokio::net::TcpListener, cfg: &ServiceConfig) -> std::io::Result<()> {
    axum::serve(listener, router(cfg)).await
}

/// Binds `addr` and serves forever on a fresh multi-threaded runtime.
pub fn run(addr: SocketAddr, cfg: ServiceConfig) -> crate::Result<()> {
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        log::info!(
            "listening on http://{} with {} workers",
            listener.local_addr()?,
            cfg.workers
        );
        serve(listener, &cfg).await
    })?;
    Ok(())
}
