//! HTTP/JSON session API over `evlog`.
//!
//! A session holds one uploaded event table plus the analyst's current
//! choices (case identifier, classifier) and filter stack. Every edit
//! recomputes the result from scratch; results are cached per
//! (case identifier, classifier, stack) and the cache is dropped whenever a
//! choice changes.
//!
//! | method | path | body | response |
//! |---|---|---|---|
//! | POST | `/v1/tables` | CSV (query: `delimiter`, `time_format`, `time_column`) | `{session_id, events, report}` |
//! | GET | `/v1/sessions/{id}` | | `{session_id, events, report, choices, stack}` |
//! | PUT | `/v1/sessions/{id}/choices` | `{case_id, classifier}` | result |
//! | PUT | `/v1/sessions/{id}/stack` | `{steps: [...]}` | result |
//! | GET | `/v1/sessions/{id}/result` | | result |
//! | DELETE | `/v1/sessions/{id}` | | 204 |
//!
//! Errors are `{"error": {"code", "message", "step"?}}` with status 400
//! (unparseable upload), 404 (unknown session), 409 (no choices yet) or 422
//! (invalid choice or stack).

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex as StdMutex};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use evlog::{
    apply_stack, attribute_names, extract_log, inspect, parse_csv, simple_log, AttributeReport,
    Classifier, CsvProfile, EventTable, FilterStack, StepStats, TimeFormat,
};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::Mutex;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

#[derive(Clone, Debug)]
pub struct Config {
    /// Upload size cap in bytes.
    pub max_body_bytes: usize,
    /// Sessions unused for this long are dropped.
    pub idle_timeout: Duration,
    /// Allowed browser origin; `None` allows any.
    pub cors_origin: Option<String>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            max_body_bytes: 32 * 1024 * 1024,
            idle_timeout: Duration::from_secs(60 * 60),
            cors_origin: None,
        }
    }
}

// ---- errors ----

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    step: Option<usize>,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            step: None,
        }
    }

    fn no_session(id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "unknown_session", format!("no session {id}"))
    }

    /// Maps a library error; `status` applies to data errors.
    fn from_lib(status: StatusCode, e: evlog::Error) -> Self {
        use evlog::Error as E;
        let code = match &e {
            E::InvalidEvent { .. } => "invalid_event",
            E::MissingSharedAttribute { .. } => "missing_shared_attribute",
            E::IndexMismatch { .. } => "index_mismatch",
            E::NoSharedAttribute => "no_shared_attribute",
            E::MissingTimeColumn(_) => "missing_time_column",
            E::UnparseableTimestamp { .. } => "unparseable_timestamp",
            E::MissingTimestamp { .. } => "missing_timestamp",
            E::RowWithOnlyTime { .. } => "row_with_only_time",
            E::Csv(_) => "csv",
            E::InvalidProfile(_) => "invalid_profile",
            E::UnknownAttribute(_) => "unknown_attribute",
            E::TimeAsCaseId => "time_as_case_id",
            E::MissingActivityAttribute(_) => "missing_activity_attribute",
            E::EmptyEventSet => "empty_event_set",
            E::InvalidClassifier(_) => "invalid_classifier",
            E::InvalidLog(_) => "invalid_log",
            E::PredicateArity { .. } => "predicate_arity",
            E::StackSchema { .. } => "stack_schema",
            E::Step { .. } => "step_failed",
        };
        let step = match &e {
            E::StackSchema { step, .. } => *step,
            E::Step { step, .. } => Some(*step),
            _ => None,
        };
        ApiError {
            status,
            code,
            message: e.to_string(),
            step,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut error = json!({"code": self.code, "message": self.message});
        if let Some(step) = self.step {
            error["step"] = json!(step);
        }
        (self.status, Json(json!({ "error": error }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

// ---- sessions ----

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Choices {
    pub case_id: String,
    pub classifier: Classifier,
}

#[derive(Debug)]
struct Session {
    table: EventTable,
    report: AttributeReport,
    choices: Option<Choices>,
    stack: FilterStack,
    cache: HashMap<String, Bytes>,
}

struct Slot {
    session: Arc<Mutex<Session>>,
    last_used: Instant,
}

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<StdMutex<HashMap<String, Slot>>>,
    config: Arc<Config>,
}

impl AppState {
    pub fn new(config: Config) -> Self {
        AppState {
            sessions: Arc::default(),
            config: Arc::new(config),
        }
    }

    fn insert(&self, session: Session) -> String {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let slot = Slot {
            session: Arc::new(Mutex::new(session)),
            last_used: Instant::now(),
        };
        self.sessions.lock().unwrap().insert(id.clone(), slot);
        id
    }

    fn get(&self, id: &str) -> ApiResult<Arc<Mutex<Session>>> {
        let mut sessions = self.sessions.lock().unwrap();
        let expired = match sessions.get(id) {
            None => return Err(ApiError::no_session(id)),
            Some(slot) => slot.last_used.elapsed() > self.config.idle_timeout,
        };
        if expired {
            sessions.remove(id);
            return Err(ApiError::no_session(id));
        }
        let slot = sessions.get_mut(id).expect("checked above");
        slot.last_used = Instant::now();
        Ok(slot.session.clone())
    }

    fn remove(&self, id: &str) -> bool {
        self.sessions.lock().unwrap().remove(id).is_some()
    }

    /// Drops idle sessions; returns how many were removed.
    pub fn sweep(&self) -> usize {
        let timeout = self.config.idle_timeout;
        let mut sessions = self.sessions.lock().unwrap();
        let before = sessions.len();
        sessions.retain(|_, slot| slot.last_used.elapsed() <= timeout);
        before - sessions.len()
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }
}

// ---- response bodies ----

#[derive(Serialize)]
struct UploadView<'a> {
    session_id: &'a str,
    events: usize,
    report: &'a AttributeReport,
}

#[derive(Serialize)]
struct SessionView<'a> {
    session_id: &'a str,
    events: usize,
    report: &'a AttributeReport,
    choices: &'a Option<Choices>,
    stack: &'a FilterStack,
}

#[derive(Serialize)]
struct ClassView {
    label: String,
    count: usize,
    color: usize,
}

#[derive(Serialize)]
struct VariantView {
    count: usize,
    trace: Vec<String>,
    colors: Vec<usize>,
}

/// Everything the explorer needs to render one state of the analysis.
#[derive(Serialize)]
struct ResultView<'a> {
    case_id: &'a str,
    classifier: &'a Classifier,
    stack: &'a FilterStack,
    steps: Vec<StepStats>,
    cases: usize,
    events: usize,
    uncorrelated: usize,
    /// Event classes by color index (most frequent first).
    alphabet: Vec<ClassView>,
    /// Variants by count, then labels.
    variants: Vec<VariantView>,
    warnings: Vec<String>,
}

fn check_choices(session: &Session, choices: &Choices) -> ApiResult<()> {
    let unprocessable = |e| ApiError::from_lib(StatusCode::UNPROCESSABLE_ENTITY, e);
    if choices.case_id == evlog::model::TIME {
        return Err(unprocessable(evlog::Error::TimeAsCaseId));
    }
    let names = attribute_names(&session.table);
    for name in std::iter::once(&choices.case_id).chain(choices.classifier.attrs()) {
        if !names.contains(name) {
            return Err(unprocessable(evlog::Error::UnknownAttribute(name.clone())));
        }
    }
    Ok(())
}

fn compute(session: &Session, choices: &Choices) -> ApiResult<Bytes> {
    let unprocessable = |e| ApiError::from_lib(StatusCode::UNPROCESSABLE_ENTITY, e);
    let log = extract_log(&session.table, &choices.case_id).map_err(unprocessable)?;
    let outcome = apply_stack(&log, &session.stack).map_err(unprocessable)?;
    let cl = &choices.classifier;
    let simple = simple_log(&outcome.log, cl);

    let ranked = simple.alphabet_by_frequency();
    let color: HashMap<&evlog::EventClass, usize> =
        ranked.iter().enumerate().map(|(i, (c, _))| (*c, i)).collect();
    let alphabet = ranked
        .iter()
        .enumerate()
        .map(|(i, (c, n))| ClassView {
            label: cl.label(c),
            count: *n,
            color: i,
        })
        .collect();
    let variants = simple
        .sorted_variants(cl.separator())
        .into_iter()
        .map(|(v, n)| VariantView {
            count: n,
            trace: v.iter().map(|c| cl.label(c)).collect(),
            colors: v.iter().map(|c| color[c]).collect(),
        })
        .collect();

    let view = ResultView {
        case_id: &choices.case_id,
        classifier: cl,
        stack: &session.stack,
        steps: outcome.stats,
        cases: outcome.log.num_cases(),
        events: outcome.log.num_events(),
        uncorrelated: log.uncorrelated(),
        alphabet,
        variants,
        warnings: session.report.case_id_warnings(&choices.case_id),
    };
    let body = serde_json::to_vec(&view).expect("result view serializes");
    Ok(Bytes::from(body))
}

/// Cached result for the session's current state.
fn result(session: &mut Session) -> ApiResult<Response> {
    let Some(choices) = session.choices.clone() else {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "no_choices",
            "choose a case identifier and a classifier first",
        ));
    };
    let key = format!(
        "{}\u{0}{}\u{0}{}",
        choices.case_id,
        serde_json::to_string(&choices.classifier).expect("classifier serializes"),
        session.stack.to_json()
    );
    let body = match session.cache.get(&key) {
        Some(body) => body.clone(),
        None => {
            let body = compute(session, &choices)?;
            session.cache.insert(key, body.clone());
            body
        }
    };
    Ok(([(header::CONTENT_TYPE, HeaderValue::from_static("application/json"))], body).into_response())
}

// ---- handlers ----

#[derive(Debug, Default, Deserialize)]
struct UploadParams {
    delimiter: Option<char>,
    time_format: Option<String>,
    time_column: Option<String>,
}

async fn upload(
    State(state): State<AppState>,
    Query(params): Query<UploadParams>,
    body: Bytes,
) -> ApiResult<Response> {
    let bad = |e| ApiError::from_lib(StatusCode::BAD_REQUEST, e);
    if body.iter().all(u8::is_ascii_whitespace) {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "empty_body", "request body is empty"));
    }
    let mut profile = CsvProfile::default();
    if let Some(d) = params.delimiter {
        profile.delimiter = d;
    }
    if let Some(f) = params.time_format {
        profile.timestamp_formats = vec![f.parse::<TimeFormat>().map_err(bad)?];
    }
    if let Some(c) = params.time_column {
        profile.time_column = c;
    }
    let table = parse_csv(body.as_ref(), &profile).map_err(bad)?;
    let report = inspect(&table);
    let events = table.len();
    let view_report = report.clone();
    let id = state.insert(Session {
        table,
        report,
        choices: None,
        stack: FilterStack::default(),
        cache: HashMap::new(),
    });
    let view = UploadView {
        session_id: &id,
        events,
        report: &view_report,
    };
    Ok((StatusCode::OK, Json(serde_json::to_value(&view).expect("serializes"))).into_response())
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let session = state.get(&id)?;
    let session = session.lock().await;
    let view = SessionView {
        session_id: &id,
        events: session.table.len(),
        report: &session.report,
        choices: &session.choices,
        stack: &session.stack,
    };
    Ok(Json(serde_json::to_value(&view).expect("serializes")).into_response())
}

async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    if state.remove(&id) {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::no_session(&id))
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_json", e.to_string()))
}

async fn put_choices(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Response> {
    let session = state.get(&id)?;
    let choices: Choices = parse_json(&body)?;
    let mut session = session.lock().await;
    check_choices(&session, &choices)?;
    if session.choices.as_ref() != Some(&choices) {
        session.choices = Some(choices);
        session.cache.clear();
    }
    result(&mut session)
}

async fn put_stack(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Response> {
    let session = state.get(&id)?;
    let value: serde_json::Value = parse_json(&body)?;
    let stack = FilterStack::from_value(value)
        .map_err(|e| ApiError::from_lib(StatusCode::UNPROCESSABLE_ENTITY, e))?;
    let mut session = session.lock().await;
    if session.choices.is_none() {
        return result(&mut session);
    }
    let previous = std::mem::replace(&mut session.stack, stack);
    match result(&mut session) {
        Ok(response) => Ok(response),
        Err(e) => {
            // keep the last stack that evaluated
            session.stack = previous;
            Err(e)
        }
    }
}

async fn get_result(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let session = state.get(&id)?;
    let mut session = session.lock().await;
    result(&mut session)
}

pub fn router(state: AppState) -> Router {
    let origin = match &state.config.cors_origin {
        Some(o) => AllowOrigin::exact(HeaderValue::from_str(o).unwrap_or(HeaderValue::from_static("null"))),
        None => AllowOrigin::any(),
    };
    let cors = CorsLayer::new()
        .allow_origin(origin)
        .allow_methods([Method::GET, Method::POST, Method::PUT, Method::DELETE])
        .allow_headers(Any);
    let limit = state.config.max_body_bytes;
    Router::new()
        .route("/v1/tables", post(upload))
        .route("/v1/sessions/{id}", get(get_session).delete(delete_session))
        .route("/v1/sessions/{id}/choices", put(put_choices))
        .route("/v1/sessions/{id}/stack", put(put_stack))
        .route("/v1/sessions/{id}/result", get(get_result))
        .layer(DefaultBodyLimit::max(limit))
        .layer(cors)
        .with_state(state)
}

/// Serves the API until the process is stopped. Idle sessions are swept
/// once a minute.
pub async fn serve(addr: SocketAddr, config: Config) -> std::io::Result<()> {
    let state = AppState::new(config);
    let sweeper = state.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            sweeper.sweep();
        }
    });
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}
