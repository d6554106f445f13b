//! Output shapes shared by the CLI and the HTTP API.

use std::fmt::Write;

use reqprio_core::engine::{ordering_problem, DependencyCheck};
use reqprio_core::{Mode, Prioritization, Project, Ranking, Repair, RequirementId, StakeholderId};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingRow {
    pub id: RequirementId,
    pub utility: f64,
    pub rank: u32,
}

pub fn ranking_rows(ranking: &Ranking) -> Vec<RankingRow> {
    ranking.rows().into_iter().map(|(id, utility, rank)| RankingRow { id, utility, rank }).collect()
}

/// Ranking table: one row per requirement, utilities to four decimals.
pub fn ranking_table(rows: &[RankingRow]) -> String {
    let width = rows.iter().map(|r| r.id.as_str().len()).max().unwrap_or(0).max("requirement".len());
    let mut out = format!("{:<width$}  {:>12}  {:>4}\n", "requirement", "utility", "rank");
    for r in rows {
        let _ = writeln!(out, "{:<width$}  {:>12.4}  {:>4}", r.id.as_str(), r.utility, r.rank);
    }
    out
}

fn joined(order: &[RequirementId]) -> String {
    order.iter().map(|r| r.as_str()).collect::<Vec<_>>().join(" ")
}

fn constraint_list<'a>(cs: impl IntoIterator<Item = &'a reqprio_core::PrecedenceConstraint>) -> String {
    let parts: Vec<String> = cs.into_iter().map(|c| c.to_string()).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Human-readable dependency report.
pub fn dependency_report(check: &DependencyCheck) -> String {
    let source = match check.source {
        reqprio_core::engine::PrioritySource::Stored => "stored",
        reqprio_core::engine::PrioritySource::Computed => "computed",
    };
    let mut out = format!("prioritization ({source}): {}\n", joined(&check.order));
    if check.consistent {
        out.push_str("consistent\n");
        return out;
    }
    out.push_str("inconsistent\nconflicts:\n");
    for c in &check.conflicts {
        let _ = writeln!(out, "  {}", constraint_list(&c.constraints));
    }
    out.push_str("diagnoses:\n");
    for (i, d) in check.diagnoses.iter().enumerate() {
        let _ = writeln!(out, "  {}. {}", i + 1, constraint_list(&d.constraints));
    }
    if let Some(r) = &check.repair {
        let _ = writeln!(out, "repaired order: {}", joined(&r.replacement_order));
        if !r.flipped_constraints.is_empty() {
            let _ = writeln!(out, "flipped: {}", constraint_list(&r.flipped_constraints));
        }
    }
    out
}

/// Note stored with a repaired prioritization.
pub fn repair_note(repair: &Repair) -> String {
    let removed: Vec<String> = repair.diagnosis.constraints.iter().map(|c| c.to_string()).collect();
    format!("repaired by removing {}", removed.join(", "))
}

/// Replaces the project's prioritization by a repaired one. `labels` picks
/// the diagnosis to delete; without it the first diagnosis is used. Returns
/// `None` and leaves the project alone when it is already consistent.
pub fn apply_repair(
    project: &mut Project,
    mode: Mode,
    stakeholder: Option<&StakeholderId>,
    labels: Option<&[String]>,
) -> reqprio_core::Result<Option<Repair>> {
    let pp = ordering_problem(project, mode, stakeholder)?;
    if pp.problem.is_fully_consistent() {
        return Ok(None);
    }
    let diagnosis = match labels {
        Some(l) => pp.problem.diagnosis_from_labels(l)?,
        None => pp.problem.diagnoses(1).remove(0),
    };
    let repair = pp.problem.repair(&diagnosis, &pp.utilities)?;
    project.prioritization =
        Some(Prioritization { order: repair.replacement_order.clone(), note: repair_note(&repair) });
    Ok(Some(repair))
}
