//! Python module `reqprio`.

use std::collections::{BTreeMap, BTreeSet};

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use reqprio_core::engine::check_dependencies;
use reqprio_core::oss::{self, ingest_tracker_export};
use reqprio_core::utility::{group_weight as weight_of_group, utility_single};
use reqprio_core::{fixtures, validate_project, DimensionId, Mode, Project, StakeholderId};
use serde::Serialize;

create_exception!(reqprio, ReqprioError, PyValueError);

fn err(e: impl std::fmt::Display) -> PyErr {
    ReqprioError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn mode(name: &str) -> PyResult<Mode> {
    name.parse().map_err(err)
}

/// A requirements prioritization project.
#[pyclass(name = "Project", module = "reqprio")]
pub struct PyProject {
    inner: Project,
}

#[pymethods]
impl PyProject {
    #[new]
    fn new() -> Self {
        Self { inner: Project::default() }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Project::from_json(text).map(|inner| Self { inner }).map_err(err)
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| err(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn version(&self) -> u64 {
        self.inner.version
    }

    #[getter]
    fn requirement_ids(&self) -> Vec<String> {
        self.inner.requirement_ids().map(|r| r.to_string()).collect()
    }

    #[getter]
    fn stakeholder_ids(&self) -> Vec<String> {
        self.inner.stakeholders.iter().map(|s| s.id.to_string()).collect()
    }

    /// Rescales each stakeholder's dimension weights to sum to one.
    fn normalize_weights(&mut self) {
        self.inner.normalize_weights();
    }

    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        validate(py, self)
    }

    #[pyo3(signature = (mode = "group", stakeholder = None))]
    fn prioritize(&self, mode: &str, stakeholder: Option<String>) -> PyResult<Vec<(String, f64, u32)>> {
        prioritize(self, mode, stakeholder)
    }

    #[pyo3(signature = (mode = "group", stakeholder = None, limit = 10))]
    fn diagnose<'py>(
        &self,
        py: Python<'py>,
        mode: &str,
        stakeholder: Option<String>,
        limit: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        diagnose(py, self, mode, stakeholder, limit)
    }

    fn __repr__(&self) -> String {
        format!(
            "Project(name={:?}, requirements={}, stakeholders={})",
            self.inner.name,
            self.inner.requirements.len(),
            self.inner.stakeholders.len()
        )
    }
}

/// Ranks the project's requirements; returns `(id, utility, rank)` tuples
/// from best to worst.
#[pyfunction]
#[pyo3(signature = (project, mode = "group", stakeholder = None))]
fn prioritize(project: &PyProject, mode: &str, stakeholder: Option<String>) -> PyResult<Vec<(String, f64, u32)>> {
    let sid = stakeholder.map(StakeholderId::from);
    let ranking = reqprio_core::prioritize(&project.inner, self::mode(mode)?, sid.as_ref()).map_err(err)?;
    Ok(ranking.rows().into_iter().map(|(r, u, k)| (r.to_string(), u, k)).collect())
}

/// Invariant violations as a list of dicts with `code` and `path`.
#[pyfunction]
fn validate<'py>(py: Python<'py>, project: &PyProject) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &validate_project(&project.inner))
}

/// Conflicts, diagnoses and a repair of the prioritization against the dependencies.
#[pyfunction]
#[pyo3(signature = (project, mode = "group", stakeholder = None, limit = 10))]
fn diagnose<'py>(
    py: Python<'py>,
    project: &PyProject,
    mode: &str,
    stakeholder: Option<String>,
    limit: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let sid = stakeholder.map(StakeholderId::from);
    let check = check_dependencies(&project.inner, self::mode(mode)?, sid.as_ref(), limit).map_err(err)?;
    to_py(py, &check)
}

/// Keyword similarity between a stakeholder's profile and a requirement.
#[pyfunction]
fn expertise(project: &PyProject, requirement: &str, stakeholder: &str) -> PyResult<f64> {
    let p = &project.inner;
    let r = p.requirement(&requirement.into()).ok_or_else(|| err(format!("unknown requirement `{requirement}`")))?;
    let s = p.stakeholder(&stakeholder.into()).ok_or_else(|| err(format!("unknown stakeholder `{stakeholder}`")))?;
    Ok(oss::expertise(r, s).value)
}

#[pyfunction]
fn jaccard(a: BTreeSet<String>, b: BTreeSet<String>) -> f64 {
    oss::jaccard(&a, &b)
}

/// Weighted sum of per-dimension contributions; both maps need the same keys.
#[pyfunction]
fn utility(contributions: BTreeMap<String, f64>, weights: BTreeMap<String, f64>) -> PyResult<f64> {
    let key = |m: BTreeMap<String, f64>| m.into_iter().map(|(k, v)| (DimensionId::from(k), v)).collect();
    utility_single(&key(contributions), &key(weights)).map_err(err)
}

/// Expertise-weighted mean of the stakeholders' weights for `dimension`.
#[pyfunction]
fn group_weight(project: &PyProject, dimension: &str) -> PyResult<f64> {
    weight_of_group(&dimension.into(), &project.inner.stakeholders).map_err(err)
}

/// Builds a project from an issue-tracker export (JSON text).
#[pyfunction]
fn ingest(export: &str) -> PyResult<PyProject> {
    let mut inner = Project::default();
    ingest_tracker_export(export).map_err(err)?.merge_into(&mut inner);
    Ok(PyProject { inner })
}

/// One of the bundled example projects: `single-user`, `group`, `bugzilla`
/// or `dependencies`.
#[pyfunction]
fn example(name: &str) -> PyResult<PyProject> {
    let inner = match name {
        "single-user" => fixtures::single_user_project(),
        "group" => fixtures::group_project(),
        "bugzilla" => fixtures::bugzilla_project(),
        "dependencies" => fixtures::dependency_project(),
        other => return Err(err(format!("no example named `{other}`"))),
    };
    Ok(PyProject { inner })
}

#[pymodule]
fn reqprio(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ReqprioError", m.py().get_type::<ReqprioError>())?;
    m.add_class::<PyProject>()?;
    m.add_function(wrap_pyfunction!(prioritize, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(diagnose, m)?)?;
    m.add_function(wrap_pyfunction!(expertise, m)?)?;
    m.add_function(wrap_pyfunction!(jaccard, m)?)?;
    m.add_function(wrap_pyfunction!(utility, m)?)?;
    m.add_function(wrap_pyfunction!(group_weight, m)?)?;
    m.add_function(wrap_pyfunction!(ingest, m)?)?;
    m.add_function(wrap_pyfunction!(example, m)?)?;
    Ok(())
}
