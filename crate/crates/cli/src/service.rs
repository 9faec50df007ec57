//! Stateless prediction service over an immutable bundle.

use std::sync::Arc;

use amr_core::data_model::{CellError, FeatureKind, PatientRecord, RawValue};
use amr_core::model::ModelKind;
use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::bundle::TrainedModelBundle;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictRequest {
    pub features: Map<String, Value>,
}

#[derive(Debug, Default, Deserialize)]
pub struct PredictQuery {
    pub model: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyPrediction {
    pub family: String,
    pub model: ModelKind,
    pub probability: f64,
    pub predicted: String,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictResponse {
    pub families: Vec<FamilyPrediction>,
    /// Schema features absent or null in the request, in schema order.
    pub missing: Vec<String>,
}

/// A rejected request: HTTP status, message and the offending field if any.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
    pub field: Option<String>,
}

impl ApiError {
    fn unprocessable(field: &str, message: String) -> Self {
        Self {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            message,
            field: Some(field.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = match self.field {
            Some(f) => json!({ "error": self.message, "field": f }),
            None => json!({ "error": self.message }),
        };
        (self.status, Json(body)).into_response()
    }
}

/// Validates a request against the bundle schema and scores every family.
pub fn predict(
    bundle: &TrainedModelBundle,
    features: &Map<String, Value>,
    model: Option<ModelKind>,
) -> Result<PredictResponse, ApiError> {
    let schema = &bundle.schema;
    if let Some(unknown) = features.keys().find(|k| schema.feature_index(k).is_none()) {
        return Err(ApiError::unprocessable(unknown, format!("unknown feature `{unknown}`")));
    }
    let mut values = Vec::with_capacity(schema.features().len());
    let mut missing = Vec::new();
    for (i, def) in schema.features().iter().enumerate() {
        let raw = match features.get(&def.name) {
            None | Some(Value::Null) => RawValue::Missing,
            Some(Value::Number(n)) => RawValue::Number(n.as_f64().unwrap_or(f64::NAN)),
            Some(Value::String(s)) => RawValue::Text(s.clone()),
            Some(other) => {
                return Err(ApiError::unprocessable(
                    &def.name,
                    format!("`{}` must be a number, a string or null, got {other}", def.name),
                ))
            }
        };
        let cell = schema.parse_cell(i, &raw).map_err(|e| {
            let message = match (e, &def.kind) {
                (CellError::BadNumeric, _) => format!("`{}` must be a finite number", def.name),
                (CellError::UnknownLevel, kind) => format!(
                    "`{}` must be one of {}",
                    def.name,
                    match kind {
                        FeatureKind::Numeric => String::new(),
                        k => k.levels().join(", "),
                    }
                ),
            };
            ApiError::unprocessable(&def.name, message)
        })?;
        if cell.is_missing() {
            missing.push(def.name.clone());
        }
        values.push(cell);
    }
    let record = PatientRecord {
        values,
        labels: vec![None; schema.targets().len()],
    };
    let row = bundle.encode(&record);
    let threshold = bundle.threshold();

    let mut families = Vec::with_capacity(bundle.families.len());
    for f in &bundle.families {
        let (kind, probability) = match bundle.predict(f, model, &row) {
            Some(Ok(p)) => p,
            Some(Err(e)) => {
                return Err(ApiError {
                    status: StatusCode::INTERNAL_SERVER_ERROR,
                    message: e.to_string(),
                    field: None,
                })
            }
            None => {
                let kind = model.expect("serving model always exists");
                return Err(ApiError::unprocessable(
                    "model",
                    format!("no {kind} model was trained for {}", f.family),
                ));
            }
        };
        families.push(FamilyPrediction {
            family: f.family.clone(),
            model: kind,
            probability,
            predicted: if probability >= threshold { "R" } else { "S" }.to_string(),
            threshold,
        });
    }
    Ok(PredictResponse { families, missing })
}

type Shared = Arc<TrainedModelBundle>;

async fn schema_handler(State(bundle): State<Shared>) -> Json<Value> {
    Json(serde_json::to_value(&bundle.schema).expect("schema serializes"))
}

async fn health_handler(State(bundle): State<Shared>) -> Json<Value> {
    Json(json!({ "status": "ok", "format_version": bundle.format_version }))
}

async fn metrics_handler(State(bundle): State<Shared>) -> Json<Value> {
    let families: Vec<Value> = bundle
        .families
        .iter()
        .map(|f| {
            let models: Vec<&_> = bundle.metadata.metrics.iter().filter(|m| m.family == f.family).collect();
            json!({ "family": f.family, "serving": f.serving, "models": models })
        })
        .collect();
    Json(json!({
        "families": families,
        "folds": bundle.metadata.folds,
        "seed": bundle.metadata.seed,
        "threshold": bundle.threshold(),
        "n_records": bundle.metadata.n_records,
    }))
}

async fn predict_handler(
    State(bundle): State<Shared>,
    Query(query): Query<PredictQuery>,
    body: Bytes,
) -> Result<Json<PredictResponse>, ApiError> {
    let model = match query.model.as_deref() {
        None | Some("") => None,
        Some(m) => Some(m.parse::<ModelKind>().map_err(|e| ApiError::unprocessable("model", e))?),
    };
    let request: PredictRequest = serde_json::from_slice(&body).map_err(|e| {
        if e.is_data() {
            ApiError {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                message: e.to_string(),
                field: None,
            }
        } else {
            ApiError {
                status: StatusCode::BAD_REQUEST,
                message: format!("malformed JSON: {e}"),
                field: None,
            }
        }
    })?;
    predict(&bundle, &request.features, model).map(Json)
}

pub fn router(bundle: Arc<TrainedModelBundle>) -> Router {
    Router::new()
        .route("/schema", get(schema_handler))
        .route("/health", get(health_handler))
        .route("/metrics", get(metrics_handler))
        .route("/predict", post(predict_handler))
        .with_state(bundle)
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(bundle: TrainedModelBundle, addr: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("serving on http://{}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(bundle))).await
}
