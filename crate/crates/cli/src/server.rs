//! Read-only HTTP API over the classification kernel: point classification,
//! slice images, Julia renders, and the explorer page at `/`.
//!
//! Responses depend only on the query and the server configuration. Image
//! responses are cached in a small LRU keyed by the resolved parameters, and
//! at most `heavy_jobs` renders run at once; further renders get 503.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use altjulia_core::{
    classify, render_filled_julia_with, Axis4, AxisRange, CancelToken, ConnectivityClass, Error as CoreError,
    IterationConfig, MapParams, Palette, Parallelism, Sampler, SliceSpec, Viewport, DEFAULT_MAX, DEFAULT_MIN,
};
use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, HeaderName, HeaderValue, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use lru::LruCache;
use serde_json::json;
use tokio::sync::Semaphore;
use tower_http::services::ServeDir;

use crate::cli::parse_fixed;
use crate::png_out;

pub const DEFAULT_RES_CAP: u32 = 2048;
pub const DEFAULT_CACHE_SIZE: usize = 128;
pub const DEFAULT_HEAVY_JOBS: usize = 2;
/// Upper bound on the `iters` query parameter.
pub const ITERS_CAP: u32 = 100_000;

const DEFAULT_SLICE_RES: u32 = 256;
const DEFAULT_JULIA_RES: u32 = 512;
const DEFAULT_JULIA_HALF_WIDTH: f64 = 2.0;

const EXPLORER_PAGE: &str = include_str!("explorer.html");

#[derive(Debug, Clone)]
pub struct ServerConfig {
    /// Largest accepted image side.
    pub res_cap: u32,
    pub cache_size: usize,
    /// Concurrent slice/julia renders.
    pub heavy_jobs: usize,
    /// Static UI bundle served at `/`; an embedded page is used when unset.
    pub ui_dir: Option<PathBuf>,
    /// Iteration settings used when a request does not override them.
    pub config: IterationConfig,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            res_cap: DEFAULT_RES_CAP,
            cache_size: DEFAULT_CACHE_SIZE,
            heavy_jobs: DEFAULT_HEAVY_JOBS,
            ui_dir: None,
            config: IterationConfig::default(),
        }
    }
}

#[derive(Clone)]
struct CachedImage {
    headers: Vec<(&'static str, String)>,
    body: Bytes,
}

impl IntoResponse for CachedImage {
    fn into_response(self) -> Response {
        let mut response = (
            [(header::CONTENT_TYPE, HeaderValue::from_static("image/png"))],
            self.body,
        )
            .into_response();
        let map = response.headers_mut();
        let mut exposed = Vec::new();
        for (name, value) in self.headers {
            map.insert(
                HeaderName::from_static(name),
                HeaderValue::from_str(&value).expect("header values are ASCII"),
            );
            exposed.push(name);
        }
        if !exposed.is_empty() {
            map.insert(
                header::ACCESS_CONTROL_EXPOSE_HEADERS,
                HeaderValue::from_str(&exposed.join(", ")).expect("header names are ASCII"),
            );
        }
        response
    }
}

struct AppState {
    settings: ServerConfig,
    cache: Mutex<LruCache<String, CachedImage>>,
    heavy: Arc<Semaphore>,
}

impl AppState {
    fn cached(&self, key: &str) -> Option<CachedImage> {
        self.cache.lock().expect("cache lock").get(key).cloned()
    }

    fn store(&self, key: String, image: CachedImage) {
        self.cache.lock().expect("cache lock").put(key, image);
    }
}

#[derive(Debug)]
pub enum ApiError {
    BadRequest(String),
    Busy,
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, message) = match self {
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, m),
            ApiError::Busy => (
                StatusCode::SERVICE_UNAVAILABLE,
                "render capacity exhausted, retry later".into(),
            ),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, m),
        };
        let mut response = (status, Json(json!({ "error": message }))).into_response();
        if status == StatusCode::SERVICE_UNAVAILABLE {
            response
                .headers_mut()
                .insert(header::RETRY_AFTER, HeaderValue::from_static("1"));
        }
        response
    }
}

impl From<CoreError> for ApiError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::Cancelled => ApiError::Busy,
            CoreError::Io { .. } | CoreError::Sidecar { .. } | CoreError::ThreadPool(_) => {
                ApiError::Internal(err.to_string())
            }
            _ => ApiError::BadRequest(err.to_string()),
        }
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Typed access to the raw query map.
struct QueryArgs<'a>(&'a HashMap<String, String>);

impl QueryArgs<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn float(&self, key: &str) -> ApiResult<Option<f64>> {
        self.raw(key)
            .map(|text| match text.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(ApiError::BadRequest(format!(
                    "parameter {key} must be a finite decimal number, got {text:?}"
                ))),
            })
            .transpose()
    }

    fn float_req(&self, key: &str) -> ApiResult<f64> {
        self.float(key)?
            .ok_or_else(|| ApiError::BadRequest(format!("missing parameter {key}")))
    }

    fn float_or(&self, key: &str, default: f64) -> ApiResult<f64> {
        Ok(self.float(key)?.unwrap_or(default))
    }

    fn uint_or(&self, key: &str, default: u32, cap: u32) -> ApiResult<u32> {
        let Some(text) = self.raw(key) else {
            return Ok(default);
        };
        match text.trim().parse::<u32>() {
            Ok(v) if (1..=cap).contains(&v) => Ok(v),
            _ => Err(ApiError::BadRequest(format!(
                "parameter {key} must be an integer in 1..={cap}, got {text:?}"
            ))),
        }
    }

    fn params(&self) -> ApiResult<MapParams> {
        Ok(MapParams::from_parts(
            self.float_req("c1re")?,
            self.float_req("c1im")?,
            self.float_req("c2re")?,
            self.float_req("c2im")?,
        ))
    }

    fn config(&self, base: &IterationConfig) -> ApiResult<IterationConfig> {
        let config = IterationConfig {
            max_quartic_iters: self.uint_or("iters", base.max_quartic_iters, ITERS_CAP)?,
            ..*base
        };
        config.validate()?;
        Ok(config)
    }

    fn fixed(&self, key: &str) -> ApiResult<(Axis4, f64)> {
        let text = self
            .raw(key)
            .ok_or_else(|| ApiError::BadRequest(format!("missing parameter {key}")))?;
        parse_fixed(text).map_err(|e| ApiError::BadRequest(format!("parameter {key}: {e}")))
    }
}

/// Cancels the token when the request future is dropped, e.g. because the
/// client went away; workers notice at the next row boundary.
struct CancelOnDrop(CancelToken);

impl Drop for CancelOnDrop {
    fn drop(&mut self) {
        self.0.cancel();
    }
}

/// Runs one render on the blocking pool under a heavy-job permit, with
/// response caching by `key`.
async fn heavy_render<F>(state: &AppState, key: String, job: F) -> ApiResult<CachedImage>
where
    F: FnOnce(CancelToken) -> Result<CachedImage, CoreError> + Send + 'static,
{
    if let Some(hit) = state.cached(&key) {
        return Ok(hit);
    }
    let permit = state.heavy.clone().try_acquire_owned().map_err(|_| ApiError::Busy)?;
    let guard = CancelOnDrop(CancelToken::new());
    let token = guard.0.clone();
    let image = tokio::task::spawn_blocking(move || {
        let _permit = permit;
        job(token)
    })
    .await
    .map_err(|e| ApiError::Internal(format!("render task failed: {e}")))??;
    drop(guard);
    state.store(key, image.clone());
    Ok(image)
}

async fn health(State(state): State<Arc<AppState>>) -> Json<serde_json::Value> {
    let s = &state.settings;
    Json(json!({
        "name": "altjulia",
        "version": env!("CARGO_PKG_VERSION"),
        "status": "ok",
        "res_cap": s.res_cap,
        "cache_size": s.cache_size,
        "heavy_jobs": s.heavy_jobs,
        "config": s.config,
    }))
}

async fn classify_point(
    State(state): State<Arc<AppState>>,
    Query(query): Query<HashMap<String, String>>,
) -> ApiResult<Json<serde_json::Value>> {
    let q = QueryArgs(&query);
    let params = q.params()?;
    let config = q.config(&state.settings.config)?;
    config.check_override(&params)?;
    let result = classify(&params, &config);
    Ok(Json(json!({
        "class": result.class.name(),
        "locus": result.class.locus(),
        "fate_zero": result.fate_zero,
        "fate_crit": result.fate_crit,
        "period": result.period(),
        "low_confidence": result.low_confidence,
        "params": {
            "c1re": params.c1.re, "c1im": params.c1.im,
            "c2re": params.c2.re, "c2im": params.c2.im,
        },
        "config": config,
    })))
}

fn slice_headers(spec: &SliceSpec, counts: [usize; 3], low_confidence: u64) -> Vec<(&'static str, String)> {
    let fixed = spec
        .fixed
        .iter()
        .map(|(axis, v)| format!("{axis}:{v}"))
        .collect::<Vec<_>>()
        .join(",");
    vec![
        ("x-slice-fixed", fixed),
        ("x-slice-x-axis", spec.x.axis.to_string()),
        ("x-slice-x-min", spec.x.min.to_string()),
        ("x-slice-x-max", spec.x.max.to_string()),
        ("x-slice-y-axis", spec.y.axis.to_string()),
        ("x-slice-y-min", spec.y.min.to_string()),
        ("x-slice-y-max", spec.y.max.to_string()),
        ("x-slice-width", spec.x.res.to_string()),
        ("x-slice-height", spec.y.res.to_string()),
        // pixel (col, row) is the cell centre x = xmin + (col + 0.5) * dx,
        // y = ymax - (row + 0.5) * dy
        ("x-slice-orientation", "top-row-is-y-max".into()),
        (
            "x-slice-counts",
            format!("cl={},dl={},tdl={}", counts[0], counts[1], counts[2]),
        ),
        ("x-slice-low-confidence", low_confidence.to_string()),
    ]
}

async fn slice_image(
    State(state): State<Arc<AppState>>,
    Query(query): Query<HashMap<String, String>>,
) -> ApiResult<CachedImage> {
    let q = QueryArgs(&query);
    let cap = state.settings.res_cap;
    let fixed = [q.fixed("fix1")?, q.fixed("fix2")?];
    if fixed[0].0 == fixed[1].0 {
        return Err(ApiError::BadRequest(format!("axis {} is fixed twice", fixed[0].0)));
    }
    let res = q.uint_or("res", DEFAULT_SLICE_RES.min(cap), cap)?;
    let min = q.float_or("min", DEFAULT_MIN)?;
    let max = q.float_or("max", DEFAULT_MAX)?;
    let free = Axis4::complement(&[fixed[0].0, fixed[1].0]);
    let spec = SliceSpec {
        fixed,
        x: AxisRange::new(free[0], q.float_or("xmin", min)?, q.float_or("xmax", max)?, res),
        y: AxisRange::new(free[1], q.float_or("ymin", min)?, q.float_or("ymax", max)?, res),
    };
    spec.validate()?;
    let config = q.config(&state.settings.config)?;
    config.check_override_for_bound(spec.max_radius_bound())?;

    let key = format!(
        "slice|{}:{}|{}:{}|x={}..{}|y={}..{}|res={res}|iters={}",
        spec.fixed[0].0,
        spec.fixed[0].1,
        spec.fixed[1].0,
        spec.fixed[1].1,
        spec.x.min,
        spec.x.max,
        spec.y.min,
        spec.y.max,
        config.max_quartic_iters
    );
    heavy_render(&state, key, move |token| {
        let grid = Sampler::new()
            .parallelism(Parallelism::Global)
            .cancel_token(token)
            .slice2d(&spec, &config)?;
        let counts = [
            grid.count(ConnectivityClass::Connected),
            grid.count(ConnectivityClass::Disconnected),
            grid.count(ConnectivityClass::TotallyDisconnected),
        ];
        Ok(CachedImage {
            headers: slice_headers(&spec, counts, grid.low_confidence_count),
            body: Bytes::from(png_out::slice_png(&grid, &Palette::default())),
        })
    })
    .await
}

async fn julia_image(
    State(state): State<Arc<AppState>>,
    Query(query): Query<HashMap<String, String>>,
) -> ApiResult<CachedImage> {
    let q = QueryArgs(&query);
    let cap = state.settings.res_cap;
    let params = q.params()?;
    let center = altjulia_core::Complex64::new(q.float_or("cre", 0.0)?, q.float_or("cim", 0.0)?);
    let half_width = q.float_or("hw", DEFAULT_JULIA_HALF_WIDTH)?;
    let res = q.uint_or("res", DEFAULT_JULIA_RES.min(cap), cap)?;
    let viewport = Viewport::square(center, half_width, res);
    viewport.validate()?;
    let config = q.config(&state.settings.config)?;
    config.check_override(&params)?;

    let key = format!(
        "julia|{}|{}|{}|{}|{}|{}|{}|{}|{}",
        params.c1.re,
        params.c1.im,
        params.c2.re,
        params.c2.im,
        center.re,
        center.im,
        half_width,
        res,
        config.max_quartic_iters
    );
    heavy_render(&state, key, move |token| {
        let grid = render_filled_julia_with(&params, &viewport, &config, Parallelism::Global, Some(&token))?;
        Ok(CachedImage {
            headers: vec![
                ("x-julia-interior-count", grid.interior_count().to_string()),
                ("x-julia-width", grid.width_px.to_string()),
                ("x-julia-height", grid.height_px.to_string()),
            ],
            body: Bytes::from(png_out::julia_png(&grid, crate::JULIA_INTERIOR, &crate::JULIA_GRADIENT)),
        })
    })
    .await
}

/// Builds the application router. Cache size and render concurrency below
/// one are raised to one.
pub fn router(settings: ServerConfig) -> Router {
    let cache_size = NonZeroUsize::new(settings.cache_size).unwrap_or(NonZeroUsize::MIN);
    let heavy = Arc::new(Semaphore::new(settings.heavy_jobs.max(1)));
    let ui_dir = settings.ui_dir.clone();
    let state = Arc::new(AppState {
        settings,
        cache: Mutex::new(LruCache::new(cache_size)),
        heavy,
    });
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/classify", get(classify_point))
        .route("/api/slice", get(slice_image))
        .route("/api/julia", get(julia_image))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(EXPLORER_PAGE) })),
    }
}

/// Serves until Ctrl-C.
pub async fn serve(addr: SocketAddr, settings: ServerConfig) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("altjulia listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(settings))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
