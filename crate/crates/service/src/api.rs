//! JSON-over-HTTP interface to a [`ProjectStore`].

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use reqprio_core::engine::{check_dependencies, ordering_problem, PrioritySource};
use reqprio_core::{
    prioritize, ConflictSet, DependencyError, Diagnosis, DimensionId, Error, Mode, Project, Repair, RequirementId,
    StakeholderId, UtilityError, Violation,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::report::{apply_repair, ranking_rows, RankingRow};
use crate::store::{ProjectStore, StoreError};

pub const DEFAULT_PAGE_SIZE: usize = 20;
pub const MAX_PAGE_SIZE: usize = 1000;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    extra: Option<(&'static str, Value)>,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self { status, code, message: message.into(), extra: None }
    }

    fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    fn invalid(violations: Vec<Violation>) -> Self {
        let message = match violations.first() {
            Some(v) => format!("{} violation(s); first at `{}`: {v}", violations.len(), v.path()),
            None => "invalid".into(),
        };
        Self {
            extra: Some(("violations", serde_json::to_value(&violations).unwrap_or_default())),
            ..Self::bad_request("invalid_project", message)
        }
    }

    pub fn status(&self) -> StatusCode {
        self.status
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "code": self.code, "message": self.message });
        if let Some((k, v)) = self.extra {
            body[k] = v;
        }
        (self.status, Json(body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let message = e.to_string();
        match e {
            StoreError::NotFound(_) => Self::new(StatusCode::NOT_FOUND, "project_not_found", message),
            StoreError::AlreadyExists(_) => Self::new(StatusCode::CONFLICT, "project_exists", message),
            StoreError::BadId(_) => Self::bad_request("invalid_project_id", message),
            StoreError::Conflict { current, .. } => Self {
                extra: Some(("current_version", json!(current))),
                ..Self::new(StatusCode::CONFLICT, "version_conflict", message)
            },
            StoreError::Invalid(v) => Self::invalid(v),
            StoreError::Corrupt { .. } | StoreError::NoRoot(_) | StoreError::Io(_) => {
                Self::new(StatusCode::INTERNAL_SERVER_ERROR, "store_error", message)
            }
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::Invalid(v) => Self::invalid(v),
            Error::NoRequirements => Self::bad_request("no_requirements", message),
            Error::Model(_) => Self::bad_request("parse_error", message),
            Error::Utility(UtilityError::UnknownStakeholder(_)) => {
                Self::new(StatusCode::NOT_FOUND, "stakeholder_not_found", message)
            }
            Error::Utility(UtilityError::StakeholderRequired(_)) => Self::bad_request("stakeholder_required", message),
            Error::Utility(_) => Self::bad_request("cannot_rank", message),
            Error::Dependency(DependencyError::CyclicDependencies { .. }) => {
                Self::bad_request("cyclic_dependencies", message)
            }
            Error::Dependency(DependencyError::InvalidDiagnosis(_)) => Self::bad_request("invalid_diagnosis", message),
            Error::Dependency(_) => Self::bad_request("invalid_dependencies", message),
        }
    }
}

/// Parses a request body, reporting the path of the offending field.
fn parse<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    let de = &mut serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ApiError {
            extra: Some(("path", json!(path))),
            ..ApiError::bad_request("malformed_body", format!("at `{path}`: {}", e.inner()))
        }
    })
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> ApiResult<T> {
    q.map(|Query(t)| t).map_err(|e| ApiError::bad_request("invalid_query", e.body_text()))
}

type Store = Arc<ProjectStore>;
type ApiResult<T> = Result<T, ApiError>;

/// Runs blocking store work off the async executor.
async fn blocking<T, F>(store: &Store, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&ProjectStore) -> ApiResult<T> + Send + 'static,
{
    let store = store.clone();
    tokio::task::spawn_blocking(move || f(&store))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

pub fn router(store: Arc<ProjectStore>) -> Router {
    use axum::routing::post;
    Router::new()
        .route("/projects", get(list_projects).post(create_project))
        .route("/projects/{id}", get(get_project).put(replace_project))
        .route(
            "/projects/{id}/stakeholders/{sid}/evaluations",
            post(merge_evaluations).put(replace_evaluations),
        )
        .route("/projects/{id}/ranking", get(ranking))
        .route("/projects/{id}/consistency", get(consistency))
        .route("/projects/{id}/repair", get(preview_repair).post(commit_repair))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint") })
        .with_state(store)
}

async fn list_projects(State(store): State<Store>) -> ApiResult<Json<Value>> {
    let list = blocking(&store, |s| Ok(s.list()?)).await?;
    Ok(Json(json!({ "projects": list })))
}

#[derive(Deserialize)]
struct CreateProject {
    id: String,
    project: Project,
}

async fn create_project(State(store): State<Store>, body: Bytes) -> ApiResult<(StatusCode, Json<Project>)> {
    let req: CreateProject = parse(&body)?;
    let project = blocking(&store, move |s| Ok(s.create(&req.id, req.project)?)).await?;
    Ok((StatusCode::CREATED, Json(project)))
}

async fn get_project(State(store): State<Store>, Path(id): Path<String>) -> ApiResult<Json<Project>> {
    Ok(Json(blocking(&store, move |s| Ok(s.load(&id)?)).await?))
}

/// The body is a full project document whose `version` must match the stored one.
async fn replace_project(State(store): State<Store>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Project>> {
    let new: Project = parse(&body)?;
    let project = blocking(&store, move |s| {
        Ok(s.update(&id, new.version, |p| {
            let changed = *p != new;
            *p = new;
            Ok(changed)
        })?)
    })
    .await?;
    Ok(Json(project))
}

#[derive(Deserialize)]
struct EvaluationEntry {
    requirement: RequirementId,
    dimension: DimensionId,
    /// `null` deletes the evaluation.
    value: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EvaluationUpdate {
    version: u64,
    #[serde(default)]
    evaluations: Vec<EvaluationEntry>,
    dimension_weights: Option<BTreeMap<DimensionId, Option<f64>>>,
    dimension_expertise: Option<BTreeMap<DimensionId, Option<f64>>>,
    requirement_weights: Option<BTreeMap<RequirementId, Option<f64>>>,
}

impl EvaluationUpdate {
    /// Range checks with paths into the request body.
    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (i, e) in self.evaluations.iter().enumerate() {
            if let Some(v) = e.value.filter(|v| !(*v >= 0.0 && v.is_finite())) {
                out.push(Violation::NegativeValue { path: format!("evaluations[{i}].value"), value: v });
            }
        }
        fn check<K: std::fmt::Display>(out: &mut Vec<Violation>, name: &str, m: &Option<BTreeMap<K, Option<f64>>>) {
            for (k, v) in m.iter().flatten() {
                if let Some(v) = v.filter(|v| !(*v >= 0.0 && v.is_finite())) {
                    out.push(Violation::NegativeValue { path: format!("{name}.{k}"), value: v });
                }
            }
        }
        check(&mut out, "dimension_weights", &self.dimension_weights);
        check(&mut out, "dimension_expertise", &self.dimension_expertise);
        check(&mut out, "requirement_weights", &self.requirement_weights);
        out
    }
}

fn merge_map<K: Ord>(target: &mut BTreeMap<K, f64>, update: Option<BTreeMap<K, Option<f64>>>, replace: bool) {
    let Some(update) = update else {
        if replace {
            target.clear();
        }
        return;
    };
    if replace {
        target.clear();
    }
    for (k, v) in update {
        match v {
            Some(v) => {
                target.insert(k, v);
            }
            None => {
                target.remove(&k);
            }
        }
    }
}

async fn update_evaluations(store: Store, id: String, sid: String, body: Bytes, replace: bool) -> ApiResult<Json<Project>> {
    let update: EvaluationUpdate = parse(&body)?;
    let violations = update.violations();
    if !violations.is_empty() {
        return Err(ApiError::invalid(violations));
    }
    let project = blocking(&store, move |s| {
        let sid = StakeholderId::from(sid);
        let mut missing = false;
        let result = s.update(&id, update.version, |p| {
            let before = p.clone();
            let Some(st) = p.stakeholder_mut(&sid) else {
                missing = true;
                return Ok(false);
            };
            merge_map(&mut st.dimension_weights, update.dimension_weights, replace);
            merge_map(&mut st.dimension_expertise, update.dimension_expertise, replace);
            merge_map(&mut st.requirement_weights, update.requirement_weights, replace);
            if replace {
                p.evaluations.clear_stakeholder(&sid);
            }
            for e in update.evaluations {
                match e.value {
                    Some(v) => {
                        p.evaluations.insert(e.dimension, e.requirement, sid.clone(), v);
                    }
                    None => {
                        p.evaluations.remove(&e.dimension, &e.requirement, &sid);
                    }
                }
            }
            Ok(*p != before)
        });
        if missing {
            return Err(ApiError::new(
                StatusCode::NOT_FOUND,
                "stakeholder_not_found",
                format!("unknown stakeholder `{sid}`"),
            ));
        }
        Ok(result?)
    })
    .await?;
    Ok(Json(project))
}

async fn merge_evaluations(
    State(store): State<Store>,
    Path((id, sid)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult<Json<Project>> {
    update_evaluations(store, id, sid, body, false).await
}

async fn replace_evaluations(
    State(store): State<Store>,
    Path((id, sid)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult<Json<Project>> {
    update_evaluations(store, id, sid, body, true).await
}

#[derive(Deserialize)]
struct ModeQuery {
    mode: Option<String>,
    stakeholder: Option<StakeholderId>,
}

impl ModeQuery {
    fn mode(&self) -> ApiResult<Mode> {
        parse_mode(&self.mode)
    }
}

fn parse_mode(mode: &Option<String>) -> ApiResult<Mode> {
    match mode {
        None => Ok(Mode::Group),
        Some(m) => m.parse().map_err(|e: String| ApiError::bad_request("invalid_mode", e)),
    }
}

#[derive(Serialize)]
pub struct RankingBody {
    pub project: String,
    pub version: u64,
    pub mode: Mode,
    pub stakeholder: Option<StakeholderId>,
    pub rows: Vec<RankingRow>,
}

async fn ranking(
    State(store): State<Store>,
    Path(id): Path<String>,
    q: Result<Query<ModeQuery>, QueryRejection>,
) -> ApiResult<Json<RankingBody>> {
    let q = query(q)?;
    let mode = q.mode()?;
    blocking(&store, move |s| {
        let p = s.load(&id)?;
        let ranking = prioritize(&p, mode, q.stakeholder.as_ref())?;
        Ok(Json(RankingBody { project: id, version: p.version, mode, stakeholder: q.stakeholder, rows: ranking_rows(&ranking) }))
    })
    .await
}

#[derive(Deserialize)]
struct ConsistencyQuery {
    mode: Option<String>,
    stakeholder: Option<StakeholderId>,
    #[serde(default)]
    offset: usize,
    limit: Option<usize>,
}

#[derive(Serialize)]
struct ConsistencyBody {
    version: u64,
    source: PrioritySource,
    order: Vec<RequirementId>,
    consistent: bool,
    conflicts: Vec<ConflictSet>,
    diagnoses: Vec<Diagnosis>,
    offset: usize,
    limit: usize,
    has_more: bool,
}

async fn consistency(
    State(store): State<Store>,
    Path(id): Path<String>,
    q: Result<Query<ConsistencyQuery>, QueryRejection>,
) -> ApiResult<Json<ConsistencyBody>> {
    let q = query(q)?;
    let mode = parse_mode(&q.mode)?;
    let limit = q.limit.unwrap_or(DEFAULT_PAGE_SIZE);
    if limit == 0 || limit > MAX_PAGE_SIZE {
        return Err(ApiError::bad_request("invalid_query", format!("limit must be between 1 and {MAX_PAGE_SIZE}")));
    }
    blocking(&store, move |s| {
        let p = s.load(&id)?;
        let want = q.offset.saturating_add(limit).saturating_add(1);
        let check = check_dependencies(&p, mode, q.stakeholder.as_ref(), want)?;
        let has_more = check.diagnoses.len() > q.offset + limit;
        let diagnoses = check.diagnoses.into_iter().skip(q.offset).take(limit).collect();
        Ok(Json(ConsistencyBody {
            version: p.version,
            source: check.source,
            order: check.order,
            consistent: check.consistent,
            conflicts: check.conflicts,
            diagnoses,
            offset: q.offset,
            limit,
            has_more,
        }))
    })
    .await
}

#[derive(Deserialize)]
struct RepairQuery {
    mode: Option<String>,
    stakeholder: Option<StakeholderId>,
    /// Comma-separated prioritization labels, e.g. `p2,p5`.
    diagnosis: Option<String>,
}

#[derive(Serialize)]
struct RepairPreview {
    version: u64,
    consistent: bool,
    current_order: Vec<RequirementId>,
    repair: Option<Repair>,
}

async fn preview_repair(
    State(store): State<Store>,
    Path(id): Path<String>,
    q: Result<Query<RepairQuery>, QueryRejection>,
) -> ApiResult<Json<RepairPreview>> {
    let q = query(q)?;
    let mode = parse_mode(&q.mode)?;
    blocking(&store, move |s| {
        let p = s.load(&id)?;
        let pp = ordering_problem(&p, mode, q.stakeholder.as_ref())?;
        if pp.problem.is_fully_consistent() {
            return Ok(Json(RepairPreview { version: p.version, consistent: true, current_order: pp.order, repair: None }));
        }
        let diagnosis = match &q.diagnosis {
            Some(l) => {
                let labels: Vec<&str> = l.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
                pp.problem.diagnosis_from_labels(&labels).map_err(Error::from)?
            }
            None => pp.problem.diagnoses(1).remove(0),
        };
        let repair = pp.problem.repair(&diagnosis, &pp.utilities).map_err(Error::from)?;
        Ok(Json(RepairPreview { version: p.version, consistent: false, current_order: pp.order, repair: Some(repair) }))
    })
    .await
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RepairRequest {
    version: u64,
    diagnosis: Option<Vec<String>>,
    mode: Option<Mode>,
    stakeholder: Option<StakeholderId>,
}

#[derive(Serialize)]
struct RepairResult {
    applied: bool,
    repair: Option<Repair>,
    project: Project,
}

async fn commit_repair(State(store): State<Store>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<RepairResult>> {
    let req: RepairRequest = parse(&body)?;
    blocking(&store, move |s| {
        let mut outcome: Result<Option<Repair>, Error> = Ok(None);
        let project = s.update(&id, req.version, |p| {
            outcome = apply_repair(p, req.mode.unwrap_or(Mode::Group), req.stakeholder.as_ref(), req.diagnosis.as_deref());
            Ok(matches!(outcome, Ok(Some(_))))
        })?;
        let repair = outcome?;
        Ok(Json(RepairResult { applied: repair.is_some(), repair, project }))
    })
    .await
}
