use std::collections::BTreeSet;
use std::time::Instant;

use axum::extract::{Multipart, Path, State};
use axum::http::StatusCode;
use axum::Json;
use provex::bench::{gen_minitpch, illustration1, read_relation, table1};
use provex::catalog::{Catalog, RelationKind};
use provex::engine::{Database, RelationInstance};
use provex::explore::{PlanMode, Prepared, Session};
use provex::hybrid::{Objective, PlanOptions};
use provex::ir::parse_program;
use provex::provgen::Strategy;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::ApiError;
use crate::{AppState, Entry};

type ApiResult = Result<Json<Value>, ApiError>;
type Created = Result<(StatusCode, Json<Value>), ApiError>;

fn reply(start: Instant, strategy: Option<Strategy>, mut body: Value) -> Json<Value> {
    let obj = body.as_object_mut().expect("object body");
    obj.insert("elapsed_us".into(), json!(start.elapsed().as_micros() as u64));
    obj.insert("strategy".into(), json!(strategy.map(|s| s.name())));
    Json(body)
}

fn relation_json(rel: &RelationInstance) -> Value {
    json!({
        "name": rel.name(),
        "attributes": rel.attributes(),
        "rows": rel.rows().iter().map(|r| r.iter().map(|v| v.to_json()).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

fn dataset_json(id: &str, db: &Database) -> Value {
    json!({
        "dataset": id,
        "relations": db.relations().map(|r| json!({ "name": r.name(), "rows": r.len() })).collect::<Vec<_>>(),
    })
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

/// Multipart: a `catalog` field plus one CSV per base relation, named by the
/// field name or by the file name without `.csv`.
pub async fn upload_dataset(State(state): State<AppState>, mut form: Multipart) -> Created {
    let start = Instant::now();
    let mut catalog_text = None;
    let mut files = Vec::new();
    while let Some(field) = form
        .next_field()
        .await
        .map_err(|e| ApiError::bad_request(format!("multipart: {e}")))?
    {
        let name = field
            .file_name()
            .map(|f| f.trim_end_matches(".csv").to_string())
            .filter(|f| !f.is_empty() && f != "catalog.txt")
            .or_else(|| field.name().map(str::to_string))
            .unwrap_or_default();
        let is_catalog = field.name() == Some("catalog") || field.file_name() == Some(provex::bench::CATALOG_FILE);
        let bytes = field
            .bytes()
            .await
            .map_err(|e| ApiError::bad_request(format!("multipart: {e}")))?;
        if is_catalog {
            catalog_text = Some(String::from_utf8(bytes.to_vec()).map_err(|_| ApiError::bad_request("catalog is not UTF-8"))?);
        } else {
            files.push((name, bytes));
        }
    }
    let catalog_text = catalog_text.ok_or_else(|| ApiError::bad_request("missing `catalog` field"))?;
    let db = blocking(move || {
        let catalog = Catalog::parse(&catalog_text)?;
        let mut db = Database::new(catalog.clone());
        for entry in catalog.entries().filter(|e| e.kind == RelationKind::Base) {
            let (_, bytes) = files
                .iter()
                .find(|(n, _)| n == &entry.name)
                .ok_or_else(|| ApiError::bad_request(format!("missing CSV for `{}`", entry.name)))?;
            db.insert(read_relation(&catalog, &entry.name, bytes.as_ref())?)?;
        }
        if let Some((extra, _)) = files.iter().find(|(n, _)| catalog.get(n).is_none()) {
            return Err(ApiError::bad_request(format!("`{extra}` is not in the catalog")));
        }
        Ok(db)
    })
    .await?;
    let body = dataset_json(&state.add_dataset(db.clone()), &db);
    Ok((StatusCode::CREATED, reply(start, None, body)))
}

#[derive(Debug, Deserialize)]
pub struct FixtureRequest {
    name: String,
    #[serde(default)]
    scale: Option<[usize; 3]>,
    #[serde(default)]
    seed: Option<u64>,
}

/// Built-in data: `table1`, `illustration1`, or `minitpch` with a scale.
pub async fn fixture_dataset(State(state): State<AppState>, Json(req): Json<FixtureRequest>) -> Created {
    let start = Instant::now();
    let db = match req.name.as_str() {
        "table1" => table1(),
        "illustration1" => illustration1(),
        "minitpch" => {
            let [c, o, l] = req.scale.unwrap_or([10, 40, 160]);
            if c == 0 || o == 0 || l == 0 {
                return Err(ApiError::bad_request("scale counts must be at least 1"));
            }
            blocking(move || Ok(gen_minitpch(c, o, l, req.seed.unwrap_or(1)))).await?
        }
        other => return Err(ApiError::bad_request(format!("unknown fixture `{other}`"))),
    };
    let body = dataset_json(&state.add_dataset(db.clone()), &db);
    Ok((StatusCode::CREATED, reply(start, None, body)))
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum PlanSpec {
    /// `auto` or `none`.
    Mode(String),
    /// Occurrences whose keys are materialized.
    Explicit(Vec<String>),
}

#[derive(Debug, Deserialize)]
pub struct CreateSession {
    dataset: String,
    program: String,
    strategy: String,
    #[serde(default)]
    plan: Option<PlanSpec>,
    #[serde(default)]
    objective: Option<String>,
}

fn occurrences_json(session: &Session) -> Value {
    json!(session.occurrences())
}

pub async fn create_session(State(state): State<AppState>, Json(req): Json<CreateSession>) -> Created {
    let start = Instant::now();
    state.evict_idle();
    let db = state.dataset(&req.dataset)?;
    let strategy: Strategy = req.strategy.parse()?;
    let mut options = PlanOptions::default();
    if let Some(o) = &req.objective {
        options.objective = o.parse::<Objective>()?;
    }
    let (session, dataset) = blocking(move || {
        let program = parse_program(&req.program, db.catalog())?;
        let mode = match &req.plan {
            None => PlanMode::Auto,
            Some(PlanSpec::Mode(m)) => match m.to_ascii_lowercase().as_str() {
                "auto" => PlanMode::Auto,
                "none" => PlanMode::None,
                other => return Err(ApiError::bad_request(format!("unknown plan mode `{other}`"))),
            },
            Some(PlanSpec::Explicit(names)) => PlanMode::Explicit(
                names
                    .iter()
                    .map(|n| program.resolve_occurrence(n))
                    .collect::<Result<BTreeSet<_>, _>>()?,
            ),
        };
        let prepared = Prepared::new(program, &db, strategy, &mode, &options)?;
        Ok((Session::from_prepared(prepared), req.dataset))
    })
    .await?;
    let id = uuid::Uuid::new_v4().simple().to_string();
    let body = json!({
        "session": id,
        "dataset": dataset,
        "result": relation_json(session.result()),
        "occurrences": occurrences_json(&session),
        "plan": session.prepared().plan_report(),
        "oq_us": session.prepared().oq_us(),
    });
    state.sessions.lock().unwrap().insert(
        id,
        std::sync::Arc::new(tokio::sync::Mutex::new(Entry {
            session,
            dataset,
            last_used: Instant::now(),
        })),
    );
    Ok((StatusCode::CREATED, reply(start, Some(strategy), body)))
}

pub async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let start = Instant::now();
    let slot = state.session(&id)?;
    let mut entry = slot.lock().await;
    entry.last_used = Instant::now();
    let s = &entry.session;
    let body = json!({
        "session": id,
        "dataset": entry.dataset,
        "result": relation_json(s.result()),
        "selection": s.selection().map(|sel| relation_json(sel.instance())),
    });
    Ok(reply(start, Some(s.prepared().strategy()), body))
}

pub async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let start = Instant::now();
    let slot = state
        .sessions
        .lock()
        .unwrap()
        .remove(&id)
        .ok_or_else(|| ApiError::not_found("session", &id))?;
    let strategy = slot.lock().await.session.prepared().strategy();
    Ok(reply(start, Some(strategy), json!({ "session": id, "deleted": true })))
}

/// Cells may be JSON strings or numbers; they are matched as literals.
#[derive(Debug, Deserialize)]
pub struct SelectRows {
    rows: Vec<Vec<Value>>,
}

fn literal(v: &Value) -> Result<String, ApiError> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(ApiError::bad_request(format!("row cells must be strings or numbers, got {other}"))),
    }
}

pub async fn select(State(state): State<AppState>, Path(id): Path<String>, Json(req): Json<SelectRows>) -> ApiResult {
    let start = Instant::now();
    let tuples = req
        .rows
        .iter()
        .map(|r| r.iter().map(literal).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let slot = state.session(&id)?;
    let mut entry = slot.lock().await;
    entry.last_used = Instant::now();
    let n = entry.session.select_rows(&tuples)?;
    Ok(reply(start, Some(entry.session.prepared().strategy()), json!({ "session": id, "selected": n })))
}

pub async fn get_provenance(State(state): State<AppState>, Path((id, occurrence)): Path<(String, String)>) -> ApiResult {
    let start = Instant::now();
    let slot = state.session(&id)?;
    let mut entry = slot.lock_owned().await;
    entry.last_used = Instant::now();
    let (body, strategy) = blocking(move || {
        let s = &entry.session;
        let occ = s.resolve(&occurrence)?;
        let (rows, stats) = s.provenance(&occurrence)?;
        Ok((
            json!({
                "session": id,
                "occurrence": occ.to_string(),
                "provenance": relation_json(&rows),
                "stats": stats,
            }),
            s.prepared().strategy(),
        ))
    })
    .await?;
    Ok(reply(start, Some(strategy), body))
}

pub async fn list_occurrences(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let start = Instant::now();
    let slot = state.session(&id)?;
    let mut entry = slot.lock().await;
    entry.last_used = Instant::now();
    let body = json!({ "session": id, "occurrences": occurrences_json(&entry.session) });
    Ok(reply(start, Some(entry.session.prepared().strategy()), body))
}

pub async fn get_plan(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let start = Instant::now();
    let slot = state.session(&id)?;
    let mut entry = slot.lock().await;
    entry.last_used = Instant::now();
    let p = entry.session.prepared();
    let body = json!({
        "session": id,
        "plan": p.plan_report(),
        "rk_rows": p.rk().map(|r| r.len()),
    });
    Ok(reply(start, Some(p.strategy()), body))
}
