//! Utility-based requirements prioritization.
//!
//! * [`utility`] ranks requirements for one stakeholder or a group by
//!   weighted sums of per-dimension contributions.
//! * [`oss`] ranks issue-tracker items for a contributor from activity counts
//!   and keyword-similarity expertise.
//! * [`dependency`] checks a prioritization against fixed dependencies and
//!   computes minimal conflicts, minimal diagnoses and repaired orders.

pub mod dependency;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod model;
pub mod oss;
pub mod utility;
pub mod validate;

pub use dependency::{ConflictSet, Diagnosis, OrderingProblem, Repair};
pub use engine::{check_dependencies, prioritize, Mode};
pub use error::{DependencyError, Error, ModelError, Result, UtilityError};
pub use model::{
    ConstraintKind, DimensionId, DimensionSource, EvaluationSet, InterestDimension, PrecedenceConstraint,
    Prioritization, Project, Ranking, Requirement, RequirementId, Stakeholder, StakeholderId,
};
pub use validate::{validate_project, Violation};
