//! Mode dispatch shared by the CLI, the HTTP service and the Python bindings.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dependency::{blocking_factors, order_to_constraints, ConflictSet, Diagnosis, OrderingProblem, Repair};
use crate::error::{Error, Result, UtilityError};
use crate::model::{DimensionId, InterestDimension, Project, Ranking, RequirementId, StakeholderId};
use crate::validate::validate_project;
use crate::{oss, utility};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Single,
    Group,
    Oss,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "single" => Ok(Mode::Single),
            "group" => Ok(Mode::Group),
            "oss" => Ok(Mode::Oss),
            other => Err(format!("unknown mode `{other}` (expected single, group or oss)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Single => "single",
            Mode::Group => "group",
            Mode::Oss => "oss",
        })
    }
}

fn check(project: &Project) -> Result<()> {
    let violations = validate_project(project);
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    if project.requirements.is_empty() {
        return Err(Error::NoRequirements);
    }
    Ok(())
}

/// Validates `project` and ranks its requirements under `mode`.
pub fn prioritize(project: &Project, mode: Mode, stakeholder: Option<&StakeholderId>) -> Result<Ranking> {
    check(project)?;
    rank_unchecked(project, mode, stakeholder)
}

fn rank_unchecked(project: &Project, mode: Mode, stakeholder: Option<&StakeholderId>) -> Result<Ranking> {
    Ok(match mode {
        Mode::Single => utility::single_report(project, stakeholder)?.ranking,
        Mode::Group => utility::group_report(project)?.ranking,
        Mode::Oss => {
            let s = stakeholder.ok_or(UtilityError::StakeholderRequired(project.stakeholders.len()))?;
            oss::recommend(project, s)?
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrioritySource {
    /// The project's stored prioritization.
    Stored,
    /// A ranking computed from the project's utilities.
    Computed,
}

/// The prioritization to check against the dependencies, with the utilities
/// used to break ties when re-sorting.
#[derive(Debug, Clone)]
pub struct PrioritizedProblem {
    pub source: PrioritySource,
    pub order: Vec<RequirementId>,
    pub utilities: BTreeMap<RequirementId, f64>,
    pub problem: OrderingProblem,
}

/// Uses the stored prioritization when the project has one, otherwise ranks
/// the project under `mode`. A stored order carries no utilities; earlier
/// positions are treated as more useful.
pub fn ordering_problem(project: &Project, mode: Mode, stakeholder: Option<&StakeholderId>) -> Result<PrioritizedProblem> {
    check(project)?;
    let (source, order, utilities) = match &project.prioritization {
        Some(p) => {
            let n = p.order.len();
            let utilities = p.order.iter().enumerate().map(|(i, r)| (r.clone(), (n - i) as f64)).collect();
            (PrioritySource::Stored, p.order.clone(), utilities)
        }
        None => {
            let ranking = rank_unchecked(project, mode, stakeholder)?;
            (PrioritySource::Computed, ranking.order, ranking.utilities)
        }
    };
    let problem = OrderingProblem::new(
        project.requirement_ids().cloned(),
        project.dependencies.clone(),
        order_to_constraints(&order),
    )?;
    Ok(PrioritizedProblem { source, order, utilities, problem })
}

#[derive(Debug, Clone, Serialize)]
pub struct DependencyCheck {
    pub source: PrioritySource,
    pub order: Vec<RequirementId>,
    pub consistent: bool,
    pub conflicts: Vec<ConflictSet>,
    pub diagnoses: Vec<Diagnosis>,
    /// Repair for the first diagnosis, when inconsistent.
    pub repair: Option<Repair>,
}

/// Conflicts, up to `limit` diagnoses and a repair for the first one.
pub fn check_dependencies(
    project: &Project,
    mode: Mode,
    stakeholder: Option<&StakeholderId>,
    limit: usize,
) -> Result<DependencyCheck> {
    let pp = ordering_problem(project, mode, stakeholder)?;
    let consistent = pp.problem.is_fully_consistent();
    let (conflicts, diagnoses) =
        if consistent { (Vec::new(), Vec::new()) } else { (pp.problem.minimal_conflicts(), pp.problem.diagnoses(limit)) };
    let repair = diagnoses.first().map(|d| pp.problem.repair(d, &pp.utilities)).transpose()?;
    Ok(DependencyCheck { source: pp.source, order: pp.order, consistent, conflicts, diagnoses, repair })
}

/// Adds (or refreshes) a metric dimension holding each requirement's
/// blocking factor under the project's dependencies.
pub fn apply_blocking_factor(project: &mut Project, dimension: impl Into<DimensionId>) -> Result<()> {
    let dimension = dimension.into();
    let factors = blocking_factors(&project.dependencies)?;
    for r in &mut project.requirements {
        let n = factors.get(&r.id).copied().unwrap_or(0) as u64;
        r.metrics.insert(dimension.clone(), n);
    }
    if project.dimension(&dimension).is_none() {
        project.dimensions.push(InterestDimension::metric(dimension));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::Prioritization;

    #[test]
    fn modes_parse_and_print() {
        for m in [Mode::Single, Mode::Group, Mode::Oss] {
            assert_eq!(m.to_string().parse::<Mode>().unwrap(), m);
        }
        assert!("ahp".parse::<Mode>().is_err());
    }

    #[test]
    fn empty_project_has_no_requirements() {
        assert!(matches!(prioritize(&Project::default(), Mode::Group, None), Err(Error::NoRequirements)));
    }

    #[test]
    fn invalid_project_is_rejected() {
        let mut p = fixtures::single_user_project();
        p.evaluations.insert("profit", "r9", "s1", 1.0);
        assert!(matches!(prioritize(&p, Mode::Single, None), Err(Error::Invalid(v)) if v.len() == 1));
    }

    #[test]
    fn oss_needs_a_stakeholder() {
        let p = fixtures::bugzilla_project();
        assert!(prioritize(&p, Mode::Oss, None).is_err());
        let r = prioritize(&p, Mode::Oss, Some(&"s1".into())).unwrap();
        assert_eq!(r.order[0].as_str(), "r1");
    }

    #[test]
    fn stored_prioritization_is_checked() {
        let check = check_dependencies(&fixtures::dependency_project(), Mode::Group, None, 10).unwrap();
        assert_eq!(check.source, PrioritySource::Stored);
        assert!(!check.consistent);
        assert_eq!(check.conflicts.len(), 1);
        assert_eq!(check.diagnoses[0].labels(), ["p2"]);
        let repair = check.repair.unwrap();
        let order: Vec<&str> = repair.replacement_order.iter().map(|r| r.as_str()).collect();
        assert_eq!(order, ["r3", "r1", "r2", "r4", "r5", "r6"]);
    }

    #[test]
    fn computed_ranking_checked_against_dependencies() {
        let mut p = fixtures::single_user_project();
        // ranking is r1, r3, r2; require r2 first
        p.dependencies.push(crate::model::PrecedenceConstraint::dep("d", "r2", "r1"));
        let check = check_dependencies(&p, Mode::Single, None, 10).unwrap();
        assert_eq!(check.source, PrioritySource::Computed);
        assert!(!check.consistent);
        let labels: Vec<Vec<&str>> = check.diagnoses.iter().map(|d| d.labels()).collect();
        assert_eq!(labels, vec![vec!["p1"], vec!["p2"]]);
        let repair = check.repair.unwrap();
        let order: Vec<&str> = repair.replacement_order.iter().map(|r| r.as_str()).collect();
        assert_eq!(order, ["r3", "r2", "r1"]);
    }

    #[test]
    fn consistent_stored_order() {
        let mut p = fixtures::dependency_project();
        p.prioritization = Some(Prioritization {
            order: ["r3", "r1", "r2", "r4", "r5", "r6"].into_iter().map(Into::into).collect(),
            note: String::new(),
        });
        let check = check_dependencies(&p, Mode::Group, None, 10).unwrap();
        assert!(check.consistent);
        assert!(check.diagnoses.is_empty() && check.repair.is_none());
    }

    #[test]
    fn blocking_factor_dimension() {
        let mut p = fixtures::dependency_project();
        apply_blocking_factor(&mut p, "blocking").unwrap();
        let r3 = p.requirement(&"r3".into()).unwrap();
        assert_eq!(r3.metrics[&DimensionId::from("blocking")], 2);
        assert_eq!(p.requirement(&"r6".into()).unwrap().metrics[&DimensionId::from("blocking")], 0);
        assert_eq!(validate_project(&p), vec![]);
    }
}
