//! JSON API used by the ballot-builder UI.
//!
//! `POST /tally` takes `{"election", "ballots", "profiles"?}` and returns the
//! same report bytes as `liquid tally`. `POST /normalize` takes
//! `{"ballot", "election"}` and returns exact shares and balloon heights.
//! `GET /methods` lists methods and quota rules. Requests share nothing but
//! the optional preloaded election.

use crate::{run_tally, CliError};
use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use liquid_core::model::{Ballot, Election, Method, Profiles, QuotaRule};
use liquid_core::report::{normalize_json, render};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::json;
use std::sync::Arc;

#[derive(Default)]
struct AppState {
    election: Option<Election>,
}

/// Routes, with `election` used by `/tally` requests that omit one.
pub fn router(election: Option<Election>) -> Router {
    Router::new()
        .route("/tally", post(tally))
        .route("/normalize", post(normalize))
        .route("/methods", get(methods))
        .with_state(Arc::new(AppState { election }))
}

pub async fn serve(port: u16, election: Option<Election>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(election)).await
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error_response(e: CliError) -> Response {
    let status = match e {
        CliError::Input(_) => StatusCode::BAD_REQUEST,
        CliError::Invariant(_) => StatusCode::INTERNAL_SERVER_ERROR,
    };
    json_response(status, render(&json!({"error": e.to_string()})))
}

fn parse<T: DeserializeOwned>(body: &[u8]) -> Result<T, CliError> {
    serde_json::from_slice(body).map_err(|e| CliError::Input(format!("request body: {e}")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TallyRequest {
    #[serde(default)]
    election: Option<Election>,
    ballots: Vec<Ballot>,
    #[serde(default)]
    profiles: Profiles,
}

async fn tally(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let run = || {
        let req: TallyRequest = parse(&body)?;
        let election = req
            .election
            .or_else(|| state.election.clone())
            .ok_or_else(|| CliError::Input("no election given and none preloaded".into()))?;
        run_tally(election, &req.ballots, &req.profiles)
    };
    match run() {
        Ok(out) => json_response(StatusCode::OK, out.report),
        Err(e) => error_response(e),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NormalizeRequest {
    ballot: Ballot,
    election: Election,
}

async fn normalize(body: Bytes) -> Response {
    let run = || {
        let req: NormalizeRequest = parse(&body)?;
        Ok::<_, CliError>(render(&normalize_json(&req.ballot, &req.election)?))
    };
    match run() {
        Ok(text) => json_response(StatusCode::OK, text),
        Err(e) => error_response(e),
    }
}

async fn methods() -> Response {
    let body = json!({
        "methods": Method::ALL.iter().map(|m| json!({
            "name": m.name(),
            "ballot": if m.is_ranked() { "ranking" } else { "parts" },
            "rounds": m.is_transferable(),
            "default_quota_rule": m.is_transferable().then(|| m.default_quota_rule().name()),
        })).collect::<Vec<_>>(),
        "quota_rules": QuotaRule::ALL.iter().map(|q| q.name()).collect::<Vec<_>>(),
    });
    json_response(StatusCode::OK, render(&body))
}
