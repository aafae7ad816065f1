use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use mailalias_core::{RawAddress, ValidationMode};
use serde::Deserialize;

use crate::app::{parse_viewer, App, IssueBody};
use crate::error::ServiceError;

type Shared = State<Arc<App>>;
type ApiResult = Result<Response, ServiceError>;

pub fn router(app: Arc<App>) -> Router {
    Router::new()
        .route("/aliases", post(issue).get(list))
        .route("/aliases/{handle}", get(show))
        .route("/aliases/{handle}/revoke", post(revoke))
        .route("/aliases/{handle}/attribution", get(attribution))
        .route("/validate", post(validate))
        .route("/parcels/intake", post(intake))
        .route("/parcels/{id}", get(parcel))
        .route("/parcels/{id}/dispatch", post(dispatch))
        .route("/parcels/{id}/deliver", post(deliver))
        .route("/parcels/{id}/return", post(return_parcel))
        .route("/parcels/{id}/tracking", get(tracking))
        .with_state(app)
}

fn ok<T: serde::Serialize>(v: T) -> ApiResult {
    Ok(Json(v).into_response())
}

/// A single record when `count` is omitted, otherwise a list.
async fn issue(State(app): Shared, Json(body): Json<IssueBody>) -> ApiResult {
    let mut views = app.issue(&body)?;
    let resp = if body.count.is_none() {
        Json(views.remove(0)).into_response()
    } else {
        Json(views).into_response()
    };
    Ok((StatusCode::CREATED, resp).into_response())
}

#[derive(Deserialize)]
struct ListQuery {
    short_code: Option<String>,
}

async fn list(State(app): Shared, Query(q): Query<ListQuery>) -> ApiResult {
    match q.short_code {
        Some(code) => ok(app.by_short_code(&code)?),
        None => ok(app.list()),
    }
}

async fn show(State(app): Shared, Path(handle): Path<String>) -> ApiResult {
    ok(app.get(&handle)?)
}

async fn revoke(State(app): Shared, Path(handle): Path<String>) -> ApiResult {
    ok(app.revoke(&handle)?)
}

async fn attribution(State(app): Shared, Path(handle): Path<String>) -> ApiResult {
    ok(app.attribution(&handle)?)
}

#[derive(Deserialize)]
struct ValidateBody {
    address: RawAddress,
    mode: Option<ValidationMode>,
}

async fn validate(State(app): Shared, Json(body): Json<ValidateBody>) -> ApiResult {
    ok(app.validate(body.address, body.mode)?)
}

#[derive(Deserialize)]
struct IntakeBody {
    sender: String,
    label: RawAddress,
}

async fn intake(State(app): Shared, Json(body): Json<IntakeBody>) -> ApiResult {
    let parcel = app.intake(&body.sender, body.label)?;
    Ok((StatusCode::CREATED, Json(parcel)).into_response())
}

async fn parcel(State(app): Shared, Path(id): Path<String>) -> ApiResult {
    ok(app.parcel(&id)?)
}

async fn dispatch(State(app): Shared, Path(id): Path<String>) -> ApiResult {
    ok(app.dispatch(&id)?)
}

async fn deliver(State(app): Shared, Path(id): Path<String>) -> ApiResult {
    ok(app.deliver(&id)?)
}

async fn return_parcel(State(app): Shared, Path(id): Path<String>) -> ApiResult {
    ok(app.return_parcel(&id)?)
}

#[derive(Deserialize)]
struct TrackingQuery {
    viewer: Option<String>,
}

/// Defaults to the merchant view, the most restrictive one.
async fn tracking(State(app): Shared, Path(id): Path<String>, Query(q): Query<TrackingQuery>) -> ApiResult {
    let viewer = parse_viewer(q.viewer.as_deref().unwrap_or("merchant"))?;
    ok(app.tracking(&id, viewer)?)
}
