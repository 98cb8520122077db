//! HTTP routes.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use decompose_core::geometry::HullMesh;
use decompose_core::simplify::palette_hull;
use decompose_core::{
    collect_pixel_colors, composite_stack, decode_png, encode_png, recolor, remove_color,
    simplify_palette, Color, ColorCloud, ColorMode, Error, LayerStack, OrderedPalette,
    PaletteDocument, SimplifyParams, SolveOptions,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use uuid::Uuid;

use crate::error::{ApiError, ApiResult};
use crate::export::{render_preview, stack_zip};
use crate::jobs::{run_job, Job, JobState};
use crate::session::{AppState, Session};

/// Most points returned for the scatter view of the color cloud.
pub const CLOUD_SAMPLE_LIMIT: usize = 50_000;

pub fn router(state: AppState) -> Router {
    let limit = state.config().max_upload_bytes;
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/palette", post(compute_palette))
        .route("/sessions/{id}/palette/colors/{index}", delete(delete_color))
        .route("/sessions/{id}/jobs", post(create_job))
        .route("/sessions/{id}/jobs/{jid}", get(job_status))
        .route("/sessions/{id}/jobs/{jid}/previews/latest", get(latest_preview))
        .route("/sessions/{id}/jobs/{jid}/cancel", post(cancel_job))
        .route("/sessions/{id}/jobs/{jid}/result", get(job_result))
        .route("/sessions/{id}/jobs/{jid}/recolor", post(recolor_job))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(state)
}

fn parse_id(raw: &str, what: &str) -> ApiResult<Uuid> {
    Uuid::parse_str(raw).map_err(|_| ApiError::not_found(what))
}

fn session(state: &AppState, raw: &str) -> ApiResult<Arc<Session>> {
    state
        .session(parse_id(raw, "session")?)
        .ok_or_else(|| ApiError::not_found("session"))
}

fn job(session: &Session, raw: &str) -> ApiResult<Arc<Job>> {
    session
        .job(parse_id(raw, "job")?)
        .ok_or_else(|| ApiError::not_found("job"))
}

/// Parses a JSON body; an empty body means "all defaults".
fn json_body<T: DeserializeOwned + Default>(body: &[u8]) -> ApiResult<T> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| ApiError::unprocessable("invalid_body", e.to_string()))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))
}

fn ensure_idle(session: &Session) -> ApiResult<()> {
    match session.state.lock().unwrap().running_job() {
        Some(job) => Err(ApiError::conflict(
            "job_running",
            format!("job {} is still running", job.id),
        )),
        None => Ok(()),
    }
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let (image, cloud, raw) = blocking(move || -> Result<_, Error> {
        let image = decode_png(&body)?;
        let cloud = collect_pixel_colors(&image)?;
        Ok((image, cloud, body))
    })
    .await??;
    let session = state.insert(Session::new(image, cloud));
    if let Some(dir) = state.session_dir(session.id) {
        std::fs::create_dir_all(&dir)
            .and_then(|_| std::fs::write(dir.join("image.png"), &raw))
            .map_err(|e| ApiError::internal(e.to_string()))?;
    }
    let body = json!({
        "session_id": session.id,
        "width": session.image.width(),
        "height": session.image.height(),
        "mode": session.image.mode(),
        "distinct_colors": session.cloud.len(),
    });
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

#[derive(Debug, Serialize)]
pub struct CloudSample {
    /// Straight RGB colors.
    pub colors: Vec<Color>,
    pub counts: Vec<u64>,
}

/// Count-weighted systematic sample of at most `limit` distinct colors;
/// deterministic.
pub fn cloud_sample(cloud: &ColorCloud, limit: usize) -> CloudSample {
    let (points, counts) = cloud.opaque_colors();
    let to_color = |p: &decompose_core::geometry::Vec3| -> Color {
        [p.x, p.y, p.z].map(|c| c.round().clamp(0.0, 255.0) as u8)
    };
    if points.len() <= limit {
        return CloudSample {
            colors: points.iter().map(to_color).collect(),
            counts,
        };
    }
    let total: u64 = counts.iter().sum();
    let stride = total as f64 / limit as f64;
    let mut sample = CloudSample {
        colors: Vec::with_capacity(limit),
        counts: Vec::with_capacity(limit),
    };
    let (mut next, mut cumulative) = (stride / 2.0, 0u64);
    for (p, &n) in points.iter().zip(&counts) {
        cumulative += n;
        let mut hits = 0;
        while next < cumulative as f64 {
            hits += 1;
            next += stride;
        }
        if hits > 0 {
            sample.colors.push(to_color(p));
            sample.counts.push(hits);
        }
    }
    sample
}

#[derive(Debug, Serialize)]
struct PaletteBody {
    #[serde(flatten)]
    palette: PaletteDocument,
    /// Hull of the palette colors, for visualization.
    simplified_hull: Option<HullMesh>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_hull: Option<Option<HullMesh>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cloud_sample: Option<CloudSample>,
}

async fn compute_palette(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<PaletteBody>> {
    let session = session(&state, &id)?;
    let params: SimplifyParams = json_body(&body)?;
    params.validate()?;
    let _ops = session.ops.lock().await;
    ensure_idle(&session)?;

    let worker = Arc::clone(&session);
    let (result, exact_hull, sample) = blocking(move || {
        let result = simplify_palette(&worker.cloud, &params)
            .map(|r| (r, params));
        (result, worker.exact_hull(), cloud_sample(&worker.cloud, CLOUD_SAMPLE_LIMIT))
    })
    .await?;
    let (result, params) = result?;
    let doc = PaletteDocument::new(&result.palette, Some(params), Some(result.diagnostics));
    session.state.lock().unwrap().palette = Some(doc.clone());
    Ok(Json(PaletteBody {
        simplified_hull: palette_hull(&result.palette).map(|p| p.mesh()),
        palette: doc,
        exact_hull: Some(exact_hull),
        cloud_sample: Some(sample),
    }))
}

async fn delete_color(
    State(state): State<AppState>,
    Path((id, index)): Path<(String, usize)>,
) -> ApiResult<Json<PaletteBody>> {
    let session = session(&state, &id)?;
    let _ops = session.ops.lock().await;
    ensure_idle(&session)?;
    let mut st = session.state.lock().unwrap();
    let current = st
        .palette
        .as_ref()
        .ok_or_else(|| ApiError::conflict("no_palette", "compute a palette first"))?;
    let edited = remove_color(&current.palette()?, index).map_err(|e| match e {
        Error::IndexOutOfRange { .. } => ApiError::new(StatusCode::NOT_FOUND, "index_out_of_range", e.to_string()),
        other => other.into(),
    })?;
    let doc = PaletteDocument::new(&edited, current.params.clone(), None);
    st.palette = Some(doc.clone());
    Ok(Json(PaletteBody {
        simplified_hull: palette_hull(&edited).map(|p| p.mesh()),
        palette: doc,
        exact_hull: None,
        cloud_sample: None,
    }))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct JobRequest {
    order: Vec<usize>,
    #[serde(default)]
    background_index: Option<usize>,
    #[serde(default)]
    options: SolveOptions,
}

#[derive(Debug, Serialize)]
struct JobBody {
    job_id: Uuid,
    #[serde(flatten)]
    state: JobState,
    order: Vec<usize>,
    options: SolveOptions,
    preview_count: usize,
}

fn job_body(job: &Job) -> JobBody {
    JobBody {
        job_id: job.id,
        state: job.state(),
        order: job.order.clone(),
        options: job.options.clone(),
        preview_count: job.preview_count(),
    }
}

async fn create_job(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Response> {
    let session = session(&state, &id)?;
    let request: JobRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError::unprocessable("invalid_body", e.to_string()))?;
    request.options.validate()?;
    let _ops = session.ops.lock().await;

    let job = {
        let mut st = session.state.lock().unwrap();
        if let Some(running) = st.running_job() {
            return Err(ApiError::conflict(
                "job_running",
                format!("job {} is still running", running.id),
            ));
        }
        let doc = st
            .palette
            .as_ref()
            .ok_or_else(|| ApiError::conflict("no_palette", "compute a palette first"))?;
        let mode = session.image.mode();
        match (mode, request.background_index) {
            (ColorMode::Rgb, Some(bg)) if request.order.first() != Some(&bg) => {
                return Err(ApiError::unprocessable(
                    "invalid_parameter",
                    "background_index must be the first entry of order",
                ))
            }
            (ColorMode::RgbaPremultiplied, Some(_)) => {
                return Err(ApiError::unprocessable(
                    "invalid_parameter",
                    "images with alpha have a transparent background; omit background_index",
                ))
            }
            _ => {}
        }
        let palette = OrderedPalette::from_palette(&doc.palette()?, &request.order, mode)?;
        let job = Arc::new(Job::new(
            request.order,
            palette,
            request.options,
            doc.params.clone(),
        ));
        st.jobs.insert(job.id, Arc::clone(&job));
        st.active_job = Some(Arc::clone(&job));
        job
    };

    let persist = state
        .session_dir(session.id)
        .map(|d| d.join("jobs").join(job.id.to_string()));
    tokio::spawn(run_job(
        Arc::clone(&job),
        Arc::clone(&session.image),
        session.image_hash.clone(),
        Arc::clone(&state.0.workers),
        persist,
    ));
    Ok((StatusCode::ACCEPTED, Json(job_body(&job))).into_response())
}

async fn job_status(
    State(state): State<AppState>,
    Path((id, jid)): Path<(String, String)>,
) -> ApiResult<Json<JobBody>> {
    let session = session(&state, &id)?;
    let job = job(&session, &jid)?;
    Ok(Json(job_body(&job)))
}

async fn latest_preview(
    State(state): State<AppState>,
    Path((id, jid)): Path<(String, String)>,
) -> ApiResult<Response> {
    let session = session(&state, &id)?;
    let job = job(&session, &jid)?;
    let preview = job
        .latest_preview()
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "no_preview", "no preview yet"))?;
    let body = blocking(move || {
        let stack = LayerStack::new(
            job.palette.clone(),
            preview.alphas.clone(),
            String::new(),
            job.options.clone(),
        )?;
        render_preview(&preview, &stack)
    })
    .await??;
    Ok(Json(body).into_response())
}

async fn cancel_job(
    State(state): State<AppState>,
    Path((id, jid)): Path<(String, String)>,
) -> ApiResult<Response> {
    let session = session(&state, &id)?;
    let job = job(&session, &jid)?;
    if !job.cancel() {
        return Err(ApiError::conflict(
            "job_finished",
            "the job already finished and cannot be cancelled",
        ));
    }
    Ok((StatusCode::ACCEPTED, Json(job_body(&job))).into_response())
}

fn finished_stack(job: &Job) -> ApiResult<Arc<LayerStack>> {
    match (job.state(), job.result()) {
        (JobState::Done, Some(stack)) => Ok(stack),
        (state, _) => Err(ApiError::conflict(
            "job_not_done",
            format!("job is {}", serde_json::to_value(&state).unwrap()["state"]),
        )),
    }
}

async fn job_result(
    State(state): State<AppState>,
    Path((id, jid)): Path<(String, String)>,
) -> ApiResult<Response> {
    let session = session(&state, &id)?;
    let job = job(&session, &jid)?;
    let stack = finished_stack(&job)?;
    let bytes = blocking(move || stack_zip(&stack)).await??;
    Ok((
        [
            (header::CONTENT_TYPE, "application/zip".to_string()),
            (
                header::CONTENT_DISPOSITION,
                format!("attachment; filename=\"layers-{}.zip\"", job.id),
            ),
        ],
        bytes,
    )
        .into_response())
}

#[derive(Debug, Deserialize)]
struct RecolorRequest {
    layer_index: usize,
    new_color: Vec<i64>,
}

fn parse_color(raw: &[i64]) -> ApiResult<Color> {
    match raw {
        [r, g, b] if [r, g, b].iter().all(|c| (0..=255).contains(*c)) => {
            Ok([*r as u8, *g as u8, *b as u8])
        }
        _ => Err(ApiError::unprocessable(
            "invalid_color",
            format!("new_color must be three integers in 0..=255, got {raw:?}"),
        )),
    }
}

async fn recolor_job(
    State(state): State<AppState>,
    Path((id, jid)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult<Response> {
    let session = session(&state, &id)?;
    let job = job(&session, &jid)?;
    let request: RecolorRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError::unprocessable("invalid_body", e.to_string()))?;
    let color = parse_color(&request.new_color)?;
    let stack = finished_stack(&job)?;
    let png = blocking(move || {
        let edited = recolor(&stack, request.layer_index, color)?;
        encode_png(&composite_stack(&edited))
    })
    .await??;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}
