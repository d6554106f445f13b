//! Structural validation of a project. Violations are values, not errors: the
//! caller decides whether to reject, report or repair.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ConstraintKind, DimensionId, DimensionSource, Project, RequirementId, StakeholderId};

/// Tolerance on the "weights sum to one" rule.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum Violation {
    #[error("{path}: identifier is empty")]
    EmptyId { path: String },
    #[error("{path}: duplicate identifier `{id}`")]
    DuplicateId { path: String, id: String },
    #[error("{path}: unknown requirement `{id}`")]
    UnknownRequirement { path: String, id: RequirementId },
    #[error("{path}: unknown stakeholder `{id}`")]
    UnknownStakeholder { path: String, id: StakeholderId },
    #[error("{path}: unknown dimension `{id}`")]
    UnknownDimension { path: String, id: DimensionId },
    #[error("{path}: value {value} is negative")]
    NegativeValue { path: String, value: f64 },
    #[error("{path}: {value} is outside [0, 1]")]
    OutOfRange { path: String, value: f64 },
    #[error("{path}: weights of stakeholder `{stakeholder}` sum to {sum}, expected 1")]
    WeightSumViolation { path: String, stakeholder: StakeholderId, sum: f64 },
    #[error("{path}: keyword `{keyword}` must be non-empty and lowercase")]
    InvalidKeyword { path: String, keyword: String },
    #[error("{path}: requirement `{requirement}` lacks a count for metric dimension `{dimension}`")]
    MissingMetric { path: String, requirement: RequirementId, dimension: DimensionId },
    #[error("{path}: requirement `{requirement}` is ordered before itself")]
    SelfDependency { path: String, requirement: RequirementId },
    #[error("{path}: dependencies must have kind DEP")]
    NotADependency { path: String },
    #[error("{path}: stored prioritization must list every requirement exactly once")]
    NotAPermutation { path: String },
}

impl Violation {
    pub fn path(&self) -> &str {
        match self {
            Violation::EmptyId { path }
            | Violation::DuplicateId { path, .. }
            | Violation::UnknownRequirement { path, .. }
            | Violation::UnknownStakeholder { path, .. }
            | Violation::UnknownDimension { path, .. }
            | Violation::NegativeValue { path, .. }
            | Violation::OutOfRange { path, .. }
            | Violation::WeightSumViolation { path, .. }
            | Violation::InvalidKeyword { path, .. }
            | Violation::MissingMetric { path, .. }
            | Violation::SelfDependency { path, .. }
            | Violation::NotADependency { path }
            | Violation::NotAPermutation { path } => path,
        }
    }
}

fn check_keyword(path: String, k: &str, out: &mut Vec<Violation>) {
    if k.is_empty() || k.chars().any(|c| c.is_uppercase()) {
        out.push(Violation::InvalidKeyword { path, keyword: k.to_owned() });
    }
}

fn check_unit(path: String, value: f64, out: &mut Vec<Violation>) {
    if !(0.0..=1.0).contains(&value) {
        out.push(Violation::OutOfRange { path, value });
    }
}

/// Returns every invariant violation in `project`; an empty list means valid.
pub fn validate_project(project: &Project) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut req_ids = BTreeSet::new();
    for (i, r) in project.requirements.iter().enumerate() {
        let path = format!("requirements[{i}].id");
        if r.id.as_str().is_empty() {
            out.push(Violation::EmptyId { path });
        } else if !req_ids.insert(&r.id) {
            out.push(Violation::DuplicateId { path, id: r.id.to_string() });
        }
        for k in &r.keywords {
            check_keyword(format!("requirements[{i}].keywords"), k, &mut out);
        }
        for k in &r.component_tags {
            check_keyword(format!("requirements[{i}].component_tags"), k, &mut out);
        }
    }

    let mut dim_ids = BTreeSet::new();
    for (i, d) in project.dimensions.iter().enumerate() {
        let path = format!("dimensions[{i}].id");
        if d.id.as_str().is_empty() {
            out.push(Violation::EmptyId { path });
        } else if !dim_ids.insert(&d.id) {
            out.push(Violation::DuplicateId { path, id: d.id.to_string() });
        }
        if d.multiplier.is_nan() || d.multiplier < 0.0 {
            out.push(Violation::NegativeValue { path: format!("dimensions[{i}].multiplier"), value: d.multiplier });
        }
    }

    for (i, r) in project.requirements.iter().enumerate() {
        for d in r.metrics.keys() {
            if !dim_ids.contains(d) {
                out.push(Violation::UnknownDimension { path: format!("requirements[{i}].metrics.{d}"), id: d.clone() });
            }
        }
        for d in project.dimensions.iter().filter(|d| d.source == DimensionSource::Metric) {
            if !r.metrics.contains_key(&d.id) {
                out.push(Violation::MissingMetric {
                    path: format!("requirements[{i}].metrics"),
                    requirement: r.id.clone(),
                    dimension: d.id.clone(),
                });
            }
        }
    }

    let mut stakeholder_ids = BTreeSet::new();
    for (i, s) in project.stakeholders.iter().enumerate() {
        let path = format!("stakeholders[{i}].id");
        if s.id.as_str().is_empty() {
            out.push(Violation::EmptyId { path });
        } else if !stakeholder_ids.insert(&s.id) {
            out.push(Violation::DuplicateId { path, id: s.id.to_string() });
        }
        for k in &s.profile_keywords {
            check_keyword(format!("stakeholders[{i}].profile_keywords"), k, &mut out);
        }
        for (d, w) in &s.dimension_weights {
            let path = format!("stakeholders[{i}].dimension_weights.{d}");
            if !dim_ids.contains(d) {
                out.push(Violation::UnknownDimension { path: path.clone(), id: d.clone() });
            }
            check_unit(path, *w, &mut out);
        }
        if !s.dimension_weights.is_empty() {
            let sum: f64 = s.dimension_weights.values().sum();
            if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
                out.push(Violation::WeightSumViolation {
                    path: format!("stakeholders[{i}].dimension_weights"),
                    stakeholder: s.id.clone(),
                    sum,
                });
            }
        }
        for (d, e) in &s.dimension_expertise {
            let path = format!("stakeholders[{i}].dimension_expertise.{d}");
            if !dim_ids.contains(d) {
                out.push(Violation::UnknownDimension { path: path.clone(), id: d.clone() });
            }
            check_unit(path, *e, &mut out);
        }
        for (r, w) in &s.requirement_weights {
            let path = format!("stakeholders[{i}].requirement_weights.{r}");
            if !req_ids.contains(r) {
                out.push(Violation::UnknownRequirement { path: path.clone(), id: r.clone() });
            }
            check_unit(path, *w, &mut out);
        }
    }

    for (i, (key, value)) in project.evaluations.iter().enumerate() {
        let path = format!("evaluations[{i}]");
        if !dim_ids.contains(&key.dimension) {
            out.push(Violation::UnknownDimension { path: format!("{path}.dimension"), id: key.dimension.clone() });
        }
        if !req_ids.contains(&key.requirement) {
            out.push(Violation::UnknownRequirement { path: format!("{path}.requirement"), id: key.requirement.clone() });
        }
        if !stakeholder_ids.contains(&key.stakeholder) {
            out.push(Violation::UnknownStakeholder { path: format!("{path}.stakeholder"), id: key.stakeholder.clone() });
        }
        if value.is_nan() || value < 0.0 {
            out.push(Violation::NegativeValue { path: format!("{path}.value"), value });
        }
    }

    let mut labels = BTreeSet::new();
    for (i, c) in project.dependencies.iter().enumerate() {
        let path = format!("dependencies[{i}]");
        if c.kind != ConstraintKind::Dep {
            out.push(Violation::NotADependency { path: format!("{path}.kind") });
        }
        if !c.label.is_empty() && !labels.insert(&c.label) {
            out.push(Violation::DuplicateId { path: format!("{path}.label"), id: c.label.clone() });
        }
        for (field, id) in [("before", &c.before), ("after", &c.after)] {
            if !req_ids.contains(id) {
                out.push(Violation::UnknownRequirement { path: format!("{path}.{field}"), id: id.clone() });
            }
        }
        if c.before == c.after {
            out.push(Violation::SelfDependency { path, requirement: c.before.clone() });
        }
    }

    if let Some(p) = &project.prioritization {
        for (i, id) in p.order.iter().enumerate() {
            if !req_ids.contains(id) {
                out.push(Violation::UnknownRequirement { path: format!("prioritization.order[{i}]"), id: id.clone() });
            }
        }
        let listed: BTreeSet<_> = p.order.iter().collect();
        if listed.len() != p.order.len() || listed != req_ids {
            out.push(Violation::NotAPermutation { path: "prioritization.order".into() });
        }
    }

    out
}
