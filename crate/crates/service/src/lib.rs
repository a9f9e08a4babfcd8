//! Self-hosted HTTP service: `POST /v1/classify`, `GET /v1/health`,
//! `POST /v1/reload`.

pub mod api;
pub mod config;
pub mod log;

use std::path::Path;
use std::sync::{Arc, RwLock};
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderValue, Method as HttpMethod, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use newsxplain::explain::{explain, ExplainError};
use newsxplain::models::{load_artifact, LoadedModel, ModelArtifact, TextClassifier};
use newsxplain::Label;
use thiserror::Error;
use tokio::net::TcpListener;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub use api::{ApiError, ClassifyRequest, ClassifyResponse, ErrorCode, Health, MAX_TEXT_CHARS};
pub use config::{CorsPolicy, ServiceConfig};
pub use log::{LogRecord, RequestLog};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Artifact(#[from] newsxplain::models::ArtifactError),
    #[error("no model path configured")]
    NoModelPath,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// A model ready to serve, with the identity reported by `/v1/health`.
pub struct ServedModel {
    pub model_id: String,
    pub format_version: u32,
    pub model: LoadedModel,
}

impl ServedModel {
    pub fn from_artifact(artifact: &ModelArtifact) -> Result<Self, ServiceError> {
        Ok(ServedModel {
            model_id: artifact.model_id(),
            format_version: artifact.format_version,
            model: artifact.load_model()?,
        })
    }
}

/// Shared service state. The current model sits behind an `Arc` that is
/// swapped whole on reload, so a request sees either the old or the new
/// model, never a mix.
pub struct AppState {
    slot: RwLock<Option<Arc<ServedModel>>>,
    config: ServiceConfig,
    log: RequestLog,
}

impl AppState {
    pub fn new(config: ServiceConfig, log: RequestLog) -> Self {
        AppState {
            slot: RwLock::new(None),
            config,
            log,
        }
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn current(&self) -> Option<Arc<ServedModel>> {
        self.slot.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    /// Replace the served model; returns the new model id.
    pub fn install(&self, artifact: &ModelArtifact) -> Result<String, ServiceError> {
        let served = Arc::new(ServedModel::from_artifact(artifact)?);
        let id = served.model_id.clone();
        *self.slot.write().unwrap_or_else(|e| e.into_inner()) = Some(served);
        Ok(id)
    }

    pub fn load_from(&self, path: &Path) -> Result<String, ServiceError> {
        self.install(&load_artifact(path)?)
    }

    /// Re-read the configured `model_path`.
    pub fn reload(&self) -> Result<String, ServiceError> {
        let path = self
            .config
            .model_path
            .as_deref()
            .ok_or(ServiceError::NoModelPath)?;
        self.load_from(path)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    let cors = cors_layer(&state.config.cors);
    Router::new()
        .route("/v1/classify", post(classify))
        .route("/v1/health", get(health))
        .route("/v1/reload", post(reload))
        .layer(cors)
        .with_state(state)
}

fn cors_layer(policy: &CorsPolicy) -> CorsLayer {
    let origin = match policy {
        CorsPolicy::Any => AllowOrigin::any(),
        CorsPolicy::Origins(_) => {
            let policy = policy.clone();
            AllowOrigin::predicate(move |origin: &HeaderValue, _| {
                origin.to_str().is_ok_and(|o| policy.allows(o))
            })
        }
    };
    CorsLayer::new()
        .allow_origin(origin)
        .allow_methods([HttpMethod::GET, HttpMethod::POST, HttpMethod::OPTIONS])
        .allow_headers([header::CONTENT_TYPE])
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Score one request against `served`. Pure apart from timing.
pub fn classify_with(
    served: &ServedModel,
    req: &ClassifyRequest,
    default_budget: usize,
    seed: u64,
) -> Result<ClassifyResponse, ApiError> {
    let start = Instant::now();
    let (p_fake, explanation) = if req.explain {
        let e = explain(
            &served.model,
            &req.text,
            req.budget.unwrap_or(default_budget),
            seed,
        )
        .map_err(|e| match e {
            ExplainError::EmptyText => ApiError::new(ErrorCode::EmptyText, e.to_string()),
            other => ApiError::new(ErrorCode::Internal, other.to_string()),
        })?;
        (e.p_fake, Some(e))
    } else {
        (served.model.predict_proba(&req.text), None)
    };
    Ok(ClassifyResponse {
        label: Label::from_probability(p_fake),
        p_fake,
        model_id: served.model_id.clone(),
        explanation,
        elapsed_ms: elapsed_ms(start),
    })
}

async fn classify(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let start = Instant::now();
    let outcome = async {
        let req = api::parse_request(&body)?;
        let served = state
            .current()
            .ok_or_else(|| ApiError::new(ErrorCode::ModelNotLoaded, "no model is loaded"))?;
        let (budget, seed) = (state.config.explain_budget, state.config.seed);
        let req_for_log = req.clone();
        let resp = tokio::task::spawn_blocking(move || classify_with(&served, &req, budget, seed))
            .await
            .map_err(|e| ApiError::new(ErrorCode::Internal, e.to_string()))??;
        Ok::<_, ApiError>((req_for_log, resp))
    }
    .await;
    let mut record;
    let response = match outcome {
        Ok((req, resp)) => {
            record = LogRecord::new("/v1/classify", 200, elapsed_ms(start));
            record.text_length = Some(req.text.chars().count());
            record.label = Some(resp.label.to_string());
            record.method = resp
                .explanation
                .as_ref()
                .map(|e| e.method.as_str().to_string());
            if state.config.log_text {
                record.text = Some(req.text);
            }
            (StatusCode::OK, Json(resp)).into_response()
        }
        Err(err) => {
            record = LogRecord::new(
                "/v1/classify",
                err.code.status().as_u16(),
                elapsed_ms(start),
            );
            err.into_response()
        }
    };
    state.log.write(&record);
    response
}

fn health_doc(state: &AppState) -> (StatusCode, Json<Health>) {
    match state.current() {
        Some(m) => (
            StatusCode::OK,
            Json(Health {
                status: "ok".to_string(),
                model_id: Some(m.model_id.clone()),
                format_version: Some(m.format_version),
            }),
        ),
        None => (
            StatusCode::SERVICE_UNAVAILABLE,
            Json(Health {
                status: "model_not_loaded".to_string(),
                model_id: None,
                format_version: None,
            }),
        ),
    }
}

async fn health(State(state): State<Arc<AppState>>) -> impl IntoResponse {
    health_doc(&state)
}

async fn reload(State(state): State<Arc<AppState>>) -> Response {
    let start = Instant::now();
    let worker = state.clone();
    let result = tokio::task::spawn_blocking(move || worker.reload()).await;
    let response = match result {
        Ok(Ok(_)) => health_doc(&state).into_response(),
        Ok(Err(e)) => ApiError::new(ErrorCode::ReloadFailed, e.to_string()).into_response(),
        Err(e) => ApiError::new(ErrorCode::Internal, e.to_string()).into_response(),
    };
    state.log.write(&LogRecord::new(
        "/v1/reload",
        response.status().as_u16(),
        elapsed_ms(start),
    ));
    response
}

/// Serve on an already bound listener until `shutdown` resolves.
pub async fn serve_on<F>(
    listener: TcpListener,
    state: Arc<AppState>,
    shutdown: F,
) -> Result<(), ServiceError>
where
    F: std::future::Future<Output = ()> + Send + 'static,
{
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await?;
    Ok(())
}

/// Load the configured model (if any), bind, and serve until Ctrl-C.
pub async fn serve(config: ServiceConfig, log: RequestLog) -> Result<(), ServiceError> {
    let state = Arc::new(AppState::new(config, log));
    if state.config.model_path.is_some() {
        state.reload()?;
    }
    let listener = TcpListener::bind(state.config.bind_addr).await?;
    serve_on(listener, state, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
}
