use thiserror::Error;

use crate::model::{DimensionId, RequirementId, StakeholderId};
use crate::validate::Violation;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("parse error at `{path}` (line {line}, column {column}): {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
}

#[derive(Debug, Error, PartialEq)]
pub enum UtilityError {
    #[error("dimension sets differ: missing weights for {missing_weights:?}, missing contributions for {missing_contributions:?}")]
    DimensionMismatch { missing_weights: Vec<DimensionId>, missing_contributions: Vec<DimensionId> },
    #[error("no evaluation of requirement `{requirement}` on dimension `{dimension}`")]
    NoEvaluation { dimension: DimensionId, requirement: RequirementId },
    #[error("stakeholder group is empty")]
    EmptyGroup,
    #[error("nothing to rank")]
    EmptyInput,
    #[error("requirement `{requirement}` has no metric `{dimension}`")]
    MissingMetric { requirement: RequirementId, dimension: DimensionId },
    #[error("unknown stakeholder `{0}`")]
    UnknownStakeholder(StakeholderId),
    #[error("dimension `{0}` is not a metric dimension")]
    NotAMetric(DimensionId),
    #[error("project has {0} stakeholders; name the one to prioritize for")]
    StakeholderRequired(usize),
}

#[derive(Debug, Error, PartialEq)]
pub enum DependencyError {
    #[error("dependencies form a cycle: {}", format_cycle(.cycle))]
    CyclicDependencies { cycle: Vec<RequirementId> },
    #[error("constraint `{label}` references unknown requirement `{requirement}`")]
    UnknownRequirement { label: String, requirement: RequirementId },
    #[error("constraint `{label}` orders `{requirement}` before itself")]
    SelfLoop { label: String, requirement: RequirementId },
    #[error("constraint `{label}` has the wrong kind for its position")]
    WrongKind { label: String },
    #[error("invalid diagnosis: {0}")]
    InvalidDiagnosis(String),
}

fn format_cycle(cycle: &[RequirementId]) -> String {
    let mut s: Vec<&str> = cycle.iter().map(|r| r.as_str()).collect();
    if let Some(first) = cycle.first() {
        s.push(first.as_str());
    }
    s.join(" < ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Utility(#[from] UtilityError),
    #[error(transparent)]
    Dependency(#[from] DependencyError),
    #[error("project is invalid ({} violations)", .0.len())]
    Invalid(Vec<Violation>),
    #[error("no requirements")]
    NoRequirements,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
