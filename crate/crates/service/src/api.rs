//! HTTP routes under `/v1`.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Body;
use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::Response;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;

use crate::bundle::{Bundle, BundleError};
use crate::error::ApiError;
use crate::queries::{self, AnalogyRequest, PathRequest};

pub const DIGEST_HEADER: &str = "x-bundle-digest";
const DEFAULT_K: usize = 20;

/// The bundle currently being served. Requests take a snapshot; `reload`
/// replaces it whole.
#[derive(Debug)]
pub struct AppState {
    bundle: RwLock<Arc<Bundle>>,
    source: Option<PathBuf>,
}

pub type SharedState = Arc<AppState>;

impl AppState {
    pub fn new(bundle: Bundle) -> SharedState {
        Arc::new(AppState {
            bundle: RwLock::new(Arc::new(bundle)),
            source: None,
        })
    }

    /// Loads the manifest at `path`; later reloads read it again.
    pub fn from_manifest(path: PathBuf) -> Result<SharedState, BundleError> {
        let bundle = Bundle::load(&path)?;
        Ok(Arc::new(AppState {
            bundle: RwLock::new(Arc::new(bundle)),
            source: Some(path),
        }))
    }

    pub fn snapshot(&self) -> Arc<Bundle> {
        self.bundle.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn replace(&self, bundle: Bundle) {
        *self.bundle.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(bundle);
    }

    /// Rebuilds from the manifest and swaps it in. On failure the old bundle
    /// keeps serving. Returns the new digest.
    pub fn reload(&self) -> Result<String, BundleError> {
        let Some(path) = &self.source else {
            return Ok(self.snapshot().digest.clone());
        };
        let bundle = Bundle::load(path)?;
        let digest = bundle.digest.clone();
        self.replace(bundle);
        Ok(digest)
    }
}

fn respond<T: Serialize>(bundle: &Bundle, result: Result<T, ApiError>) -> Response {
    let (status, body) = match result {
        Ok(v) => (StatusCode::OK, serde_json::to_vec(&v)),
        Err(e) => (e.status(), serde_json::to_vec(&e)),
    };
    let (status, body) = match body {
        Ok(b) => (status, b),
        Err(e) => (
            StatusCode::INTERNAL_SERVER_ERROR,
            serde_json::to_vec(&ApiError::internal(e.to_string())).unwrap_or_default(),
        ),
    };
    let mut resp = Response::new(Body::from(body));
    *resp.status_mut() = status;
    let headers = resp.headers_mut();
    headers.insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
    if let Ok(v) = HeaderValue::from_str(&bundle.digest) {
        headers.insert(DIGEST_HEADER, v);
    }
    resp
}

type Params = Result<Query<HashMap<String, String>>, QueryRejection>;

fn params(p: Params) -> Result<HashMap<String, String>, ApiError> {
    p.map(|Query(m)| m).map_err(|e| ApiError::bad_request(e.body_text()))
}

fn body<T>(b: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    b.map(|Json(v)| v).map_err(|e| ApiError::bad_request(e.body_text()))
}

fn segment(p: Result<Path<String>, PathRejection>) -> Result<String, ApiError> {
    p.map(|Path(v)| v).map_err(|e| ApiError::bad_request(e.body_text()))
}

fn usize_param(m: &HashMap<String, String>, key: &str, default: usize) -> Result<usize, ApiError> {
    match m.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| ApiError::bad_request(format!("`{key}` must be a non-negative integer, got `{v}`"))),
    }
}

async fn search(State(s): State<SharedState>, p: Params) -> Response {
    let b = s.snapshot();
    let r = params(p).and_then(|m| {
        let q = m.get("q").map(String::as_str).unwrap_or("");
        queries::search_concepts(&b, q)
    });
    respond(&b, r)
}

async fn concept(State(s): State<SharedState>, id: Result<Path<String>, PathRejection>) -> Response {
    let b = s.snapshot();
    respond(&b, segment(id).and_then(|id| queries::concept_detail(&b, &id)))
}

async fn neighbors(State(s): State<SharedState>, id: Result<Path<String>, PathRejection>, p: Params) -> Response {
    let b = s.snapshot();
    let r = segment(id).and_then(|id| {
        let k = usize_param(&params(p)?, "k", 10)?;
        queries::neighbors(&b, &id, k)
    });
    respond(&b, r)
}

async fn analogy(State(s): State<SharedState>, req: Result<Json<AnalogyRequest>, JsonRejection>) -> Response {
    let b = s.snapshot();
    respond(&b, body(req).and_then(|r| queries::run_analogy(&b, &r)))
}

async fn path(State(s): State<SharedState>, req: Result<Json<PathRequest>, JsonRejection>) -> Response {
    let b = s.snapshot();
    respond(&b, body(req).and_then(|r| queries::shortest_path(&b, &r)))
}

async fn centrality(State(s): State<SharedState>, p: Params) -> Response {
    let b = s.snapshot();
    let r = params(p).and_then(|m| {
        let measure = queries::parse_measure(m.get("measure").map(String::as_str))?;
        let k = usize_param(&m, "k", DEFAULT_K)?;
        queries::centrality(&b, measure, k)
    });
    respond(&b, r)
}

async fn odds(State(s): State<SharedState>, p: Params) -> Response {
    let b = s.snapshot();
    let r = params(p).and_then(|m| {
        let measure = queries::parse_measure(m.get("measure").map(String::as_str))?;
        let ks = queries::parse_ks(m.get("ks").map(String::as_str))?;
        queries::odds(&b, measure, &ks)
    });
    respond(&b, r)
}

async fn axes(State(s): State<SharedState>) -> Response {
    let b = s.snapshot();
    respond(&b, Ok(queries::list_axes(&b)))
}

async fn projection(State(s): State<SharedState>, name: Result<Path<String>, PathRejection>, p: Params) -> Response {
    let b = s.snapshot();
    let r = segment(name).and_then(|name| {
        let m = params(p)?;
        queries::projection(&b, &name, m.get("discipline").map(String::as_str))
    });
    respond(&b, r)
}

async fn map2d(State(s): State<SharedState>) -> Response {
    let b = s.snapshot();
    respond(&b, Ok(&b.map2d))
}

async fn fallback(State(s): State<SharedState>) -> Response {
    let b = s.snapshot();
    respond::<()>(&b, Err(ApiError::no_route("no such endpoint")))
}

pub fn router(state: SharedState) -> Router {
    let v1 = Router::new()
        .route("/concepts", get(search))
        .route("/concepts/{id}", get(concept))
        .route("/neighbors/{id}", get(neighbors))
        .route("/analogy", post(analogy))
        .route("/path", post(path))
        .route("/centrality", get(centrality))
        .route("/odds", get(odds))
        .route("/axes", get(axes))
        .route("/axes/{name}/projection", get(projection))
        .route("/map2d", get(map2d));
    Router::new()
        .nest("/v1", v1)
        .fallback(fallback)
        .method_not_allowed_fallback(fallback)
        .with_state(state)
}

/// Binds `addr` and serves until ctrl-c. On unix, SIGHUP reloads the bundle.
pub async fn serve(state: SharedState, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("serving bundle {} on {}", state.snapshot().digest, listener.local_addr()?);
    #[cfg(unix)]
    {
        let s = state.clone();
        tokio::spawn(async move {
            let Ok(mut hup) = tokio::signal::unix::signal(tokio::signal::unix::SignalKind::hangup()) else {
                return;
            };
            while hup.recv().await.is_some() {
                let s = s.clone();
                match tokio::task::spawn_blocking(move || s.reload()).await {
                    Ok(Ok(d)) => log::info!("reloaded bundle {d}"),
                    Ok(Err(e)) => log::error!("reload failed, keeping current bundle: {e}"),
                    Err(e) => log::error!("reload task failed: {e}"),
                }
            }
        });
    }
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
