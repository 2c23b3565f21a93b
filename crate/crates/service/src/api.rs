//! Routes, request/response schemas and the JSON error mapping.

use axum::extract::rejection::JsonRejection;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{middleware, Json, Router};
use healthrec_core::classifiers::FORMAT_VERSION;
use healthrec_core::dataset::fnv1a64;
use healthrec_core::recommender::{collaborative_recommend, recommend, CollaborativeRanking};
use healthrec_core::{predict, Error, ModelKind, Prediction, RecommendationBundle, SymptomVector, TrainedModel};
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use crate::state::AppState;

pub const MAX_BODY_BYTES: usize = 64 * 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
    pub model_kind: ModelKind,
    pub class_count: usize,
    pub vocab_size: usize,
    pub format_version: u32,
    /// Every kind selectable with `"model"`.
    pub models: Vec<ModelKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymptomsResponse {
    pub symptoms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictRequest {
    pub symptoms: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionEntry {
    pub disease: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictResponse {
    pub predictions: Vec<PredictionEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unknown_ignored: Option<Vec<String>>,
}

impl PredictResponse {
    pub fn new(prediction: &Prediction, class_names: &[String], unknown_ignored: Option<Vec<String>>) -> Self {
        Self {
            predictions: prediction
                .ranked
                .iter()
                .map(|r| PredictionEntry {
                    disease: class_names[r.class_id].clone(),
                    probability: r.probability,
                })
                .collect(),
            unknown_ignored,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendResponse {
    pub results: Vec<RecommendationBundle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unknown_ignored: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unknown: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic_id: Option<String>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, detail: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                error: error.into(),
                detail: detail.into(),
                unknown: None,
                diagnostic_id: None,
            },
        }
    }

    fn bad_request(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", detail)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        if r.status() == StatusCode::PAYLOAD_TOO_LARGE {
            return Self::new(
                StatusCode::PAYLOAD_TOO_LARGE,
                "payload_too_large",
                format!("request body exceeds {MAX_BODY_BYTES} bytes"),
            );
        }
        Self::bad_request(r.body_text())
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::MissingKbEntry(ref disease) => {
                let id = format!("kb-{:016x}", fnv1a64(disease.as_bytes()));
                tracing::error!(diagnostic_id = %id, "{e}");
                let mut err = Self::new(StatusCode::INTERNAL_SERVER_ERROR, "kb_missing", e.to_string());
                err.body.diagnostic_id = Some(id);
                err
            }
            Error::UnknownSymptoms(names) => unknown_symptoms(names),
            other => {
                let detail = other.to_string();
                let id = format!("err-{:016x}", fnv1a64(detail.as_bytes()));
                tracing::error!(diagnostic_id = %id, "{detail}");
                let mut err = Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", detail);
                err.body.diagnostic_id = Some(id);
                err
            }
        }
    }
}

fn unknown_symptoms(names: Vec<String>) -> ApiError {
    let mut err = ApiError::new(
        StatusCode::UNPROCESSABLE_ENTITY,
        "unknown_symptoms",
        format!("unknown symptoms: {}", names.join(", ")),
    );
    err.body.unknown = Some(names);
    err
}

struct Query<'a> {
    model: &'a TrainedModel,
    x: SymptomVector,
    top_k: usize,
    unknown_ignored: Option<Vec<String>>,
}

fn parse_query<'a>(state: &'a AppState, req: &PredictRequest) -> Result<Query<'a>, ApiError> {
    let s = &state.0;
    if req.symptoms.is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "empty_symptoms", "symptom list is empty"));
    }
    let kind = match &req.model {
        None => s.default_kind,
        Some(name) => name.parse::<ModelKind>().map_err(|e| ApiError::new(
            StatusCode::BAD_REQUEST,
            "unknown_model",
            e.to_string(),
        ))?,
    };
    let model = s.models.get(&kind).ok_or_else(|| {
        let loaded: Vec<&str> = s.models.keys().map(|k| k.as_str()).collect();
        ApiError::new(
            StatusCode::BAD_REQUEST,
            "unknown_model",
            format!("model kind {kind} is not loaded (available: {})", loaded.join(", ")),
        )
    })?;
    let top_k = req.top_k.unwrap_or(s.top_k);
    if top_k == 0 {
        return Err(ApiError::bad_request("top_k must be at least 1"));
    }
    let (x, unknown) = s.vocabulary.encode_lenient(&req.symptoms);
    let unknown_ignored = match (unknown.is_empty(), s.ignore_unknown) {
        (true, _) => None,
        (false, true) => Some(unknown),
        (false, false) => return Err(unknown_symptoms(unknown)),
    };
    Ok(Query {
        model,
        x,
        top_k,
        unknown_ignored,
    })
}

async fn health(State(state): State<AppState>) -> Json<HealthResponse> {
    let s = &state.0;
    let model = &s.models[&s.default_kind];
    Json(HealthResponse {
        status: "ok".into(),
        model_kind: s.default_kind,
        class_count: model.n_classes(),
        vocab_size: s.vocabulary.len(),
        format_version: FORMAT_VERSION,
        models: s.models.keys().copied().collect(),
    })
}

async fn symptoms(State(state): State<AppState>) -> Json<SymptomsResponse> {
    Json(SymptomsResponse {
        symptoms: state.0.vocabulary.names().to_vec(),
    })
}

async fn predict_handler(
    State(state): State<AppState>,
    body: Result<Json<PredictRequest>, JsonRejection>,
) -> Result<Json<PredictResponse>, ApiError> {
    let Json(req) = body?;
    let q = parse_query(&state, &req)?;
    let prediction = predict(q.model, &q.x, Some(q.top_k))?;
    Ok(Json(PredictResponse::new(&prediction, &q.model.class_names, q.unknown_ignored)))
}

async fn recommend_handler(
    State(state): State<AppState>,
    body: Result<Json<PredictRequest>, JsonRejection>,
) -> Result<Json<RecommendResponse>, ApiError> {
    let Json(req) = body?;
    let q = parse_query(&state, &req)?;
    let s = &state.0;
    let prediction = predict(q.model, &q.x, Some(q.top_k))?;
    let ranking: Option<CollaborativeRanking> = match &s.profiles {
        Some(store) if !store.is_empty() => Some(collaborative_recommend(&q.x, store, s.metric, store.len())?),
        _ => None,
    };
    let results = recommend(&prediction, &s.kb, &q.model.class_names, s.kb_mode, ranking.as_ref())?;
    Ok(Json(RecommendResponse {
        results,
        unknown_ignored: q.unknown_ignored,
    }))
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

/// Rewrites framework error responses without a JSON body (405, 413 from a
/// raw body limit and the like) into `{error, detail}`.
async fn json_errors(response: Response) -> Response {
    let status = response.status();
    if !(status.is_client_error() || status.is_server_error()) {
        return response;
    }
    let is_json = response
        .headers()
        .get(header::CONTENT_TYPE)
        .is_some_and(|v| v.as_bytes().starts_with(b"application/json"));
    if is_json {
        return response;
    }
    let error = match status {
        StatusCode::METHOD_NOT_ALLOWED => "method_not_allowed",
        StatusCode::PAYLOAD_TOO_LARGE => "payload_too_large",
        StatusCode::NOT_FOUND => "not_found",
        s if s.is_server_error() => "internal",
        _ => "bad_request",
    };
    let body = ErrorBody {
        error: error.into(),
        detail: status.canonical_reason().unwrap_or("error").to_string(),
        unknown: None,
        diagnostic_id: None,
    };
    let mut out = (status, Json(body)).into_response();
    for (name, value) in response.headers() {
        if name != header::CONTENT_TYPE && name != header::CONTENT_LENGTH {
            out.headers_mut().insert(name.clone(), value.clone());
        }
    }
    out
}

fn cors(origins: &[String]) -> Option<CorsLayer> {
    if origins.is_empty() {
        return None;
    }
    let layer = CorsLayer::new()
        .allow_methods([Method::GET, Method::POST, Method::OPTIONS])
        .allow_headers([header::CONTENT_TYPE]);
    if origins.iter().any(|o| o == "*") {
        return Some(layer.allow_origin(Any));
    }
    let values: Vec<HeaderValue> = origins.iter().filter_map(|o| o.parse().ok()).collect();
    Some(layer.allow_origin(AllowOrigin::list(values)))
}

pub fn router(state: AppState) -> Router {
    let origins = state.0.cors_allowed_origins.clone();
    let app = Router::new()
        .route("/api/health", get(health))
        .route("/api/symptoms", get(symptoms))
        .route("/api/predict", post(predict_handler))
        .route("/api/recommend", post(recommend_handler))
        .fallback(not_found)
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .layer(middleware::map_response(json_errors))
        .with_state(state);
    match cors(&origins) {
        Some(layer) => app.layer(layer),
        None => app,
    }
}
