//! Multi-attribute utility: weighted sums of per-dimension contributions for a
//! single stakeholder or for a group whose evaluations and weights are
//! aggregated first.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::UtilityError;
use crate::model::{
    DimensionId, DimensionSource, EvaluationSet, Project, Ranking, Requirement, RequirementId, Stakeholder,
    StakeholderId,
};

/// Utilities closer than this share a rank.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// `Σ_d contribution(d) · weight(d)`. Both maps must cover the same dimensions.
pub fn utility_single(
    contribution: &BTreeMap<DimensionId, f64>,
    weights: &BTreeMap<DimensionId, f64>,
) -> Result<f64, UtilityError> {
    let missing_weights: Vec<_> = contribution.keys().filter(|d| !weights.contains_key(*d)).cloned().collect();
    let missing_contributions: Vec<_> = weights.keys().filter(|d| !contribution.contains_key(*d)).cloned().collect();
    if !missing_weights.is_empty() || !missing_contributions.is_empty() {
        return Err(UtilityError::DimensionMismatch { missing_weights, missing_contributions });
    }
    Ok(contribution.iter().map(|(d, c)| c * weights[d]).fold(0.0, |a, x| a + x))
}

/// Mean of `eval(d, r, s)` over the stakeholders in `group` that evaluated
/// `(d, r)`. Stakeholders without an evaluation are left out of both the sum
/// and the count.
pub fn group_contribution(
    evals: &EvaluationSet,
    requirement: &RequirementId,
    dimension: &DimensionId,
    group: &[StakeholderId],
) -> Result<f64, UtilityError> {
    let (sum, n) = group
        .iter()
        .filter_map(|s| evals.get(dimension, requirement, s))
        .fold((0.0, 0usize), |(sum, n), v| (sum + v, n + 1));
    if n == 0 {
        return Err(UtilityError::NoEvaluation { dimension: dimension.clone(), requirement: requirement.clone() });
    }
    Ok(sum / n as f64)
}

/// `Σ_s w(d,s) · expertise(d,s) / |S|`.
///
/// Divides by the group size rather than by the total expertise, so a group
/// with low expertise on `d` deflates that dimension's weight.
pub fn group_weight(dimension: &DimensionId, group: &[Stakeholder]) -> Result<f64, UtilityError> {
    if group.is_empty() {
        return Err(UtilityError::EmptyGroup);
    }
    let total: f64 = group.iter().map(|s| s.weight(dimension) * s.expertise(dimension)).fold(0.0, |a, x| a + x);
    Ok(total / group.len() as f64)
}

/// Group utility of one requirement over manually evaluated dimensions.
pub fn utility_group(
    requirement: &RequirementId,
    dimensions: &[DimensionId],
    group: &[Stakeholder],
    evals: &EvaluationSet,
) -> Result<f64, UtilityError> {
    if group.is_empty() {
        return Err(UtilityError::EmptyGroup);
    }
    let ids: Vec<StakeholderId> = group.iter().map(|s| s.id.clone()).collect();
    dimensions.iter().try_fold(0.0, |acc, d| {
        Ok(acc + group_contribution(evals, requirement, d, &ids)? * group_weight(d, group)?)
    })
}

/// Competition ranking by descending utility.
///
/// Requirements are grouped with the first (highest) utility of their group
/// when within [`TIE_TOLERANCE`] of it; a group of `k` items at rank `n` pushes
/// the next group to rank `n + k`. Ties are listed in ascending id order.
pub fn rank(utilities: &BTreeMap<RequirementId, f64>) -> Result<Ranking, UtilityError> {
    if utilities.is_empty() {
        return Err(UtilityError::EmptyInput);
    }
    let mut sorted: Vec<(&RequirementId, f64)> = utilities.iter().map(|(r, u)| (r, *u)).collect();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let mut order = Vec::with_capacity(sorted.len());
    let mut ranks = BTreeMap::new();
    let mut start = 0;
    while start < sorted.len() {
        let leader = sorted[start].1;
        let end = sorted[start..]
            .iter()
            .position(|(_, u)| (leader - u).abs() > TIE_TOLERANCE)
            .map_or(sorted.len(), |off| start + off);
        let mut tied: Vec<&RequirementId> = sorted[start..end].iter().map(|(r, _)| *r).collect();
        tied.sort();
        let rank = start as u32 + 1;
        for r in tied {
            ranks.insert(r.clone(), rank);
            order.push(r.clone());
        }
        start = end;
    }
    Ok(Ranking { utilities: utilities.clone(), ranks, order })
}

/// Utilities together with the contributions and weights they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityReport {
    pub utilities: BTreeMap<RequirementId, f64>,
    pub contributions: BTreeMap<RequirementId, BTreeMap<DimensionId, f64>>,
    pub weights: BTreeMap<DimensionId, f64>,
    pub ranking: Ranking,
}

impl UtilityReport {
    fn from_parts(
        contributions: BTreeMap<RequirementId, BTreeMap<DimensionId, f64>>,
        weights: BTreeMap<DimensionId, f64>,
    ) -> Result<Self, UtilityError> {
        let utilities = contributions
            .iter()
            .map(|(r, c)| Ok((r.clone(), utility_single(c, &weights)?)))
            .collect::<Result<BTreeMap<_, _>, UtilityError>>()?;
        let ranking = rank(&utilities)?;
        Ok(Self { utilities, contributions, weights, ranking })
    }

    /// Largest gap between a reported utility and the dot product of its
    /// reported contributions and weights.
    pub fn max_recompute_error(&self) -> f64 {
        self.utilities
            .iter()
            .map(|(r, u)| {
                let dot: f64 = self.contributions[r].iter().map(|(d, c)| c * self.weights[d]).fold(0.0, |a, x| a + x);
                (dot - u).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn metric_contribution(r: &Requirement, d: &DimensionId) -> Result<f64, UtilityError> {
    r.metrics
        .get(d)
        .map(|v| *v as f64)
        .ok_or_else(|| UtilityError::MissingMetric { requirement: r.id.clone(), dimension: d.clone() })
}

/// One stakeholder's evaluations and weights. Without an explicit
/// stakeholder the project must have exactly one.
pub fn single_report(project: &Project, stakeholder: Option<&StakeholderId>) -> Result<UtilityReport, UtilityError> {
    let s = match stakeholder {
        Some(id) => project.stakeholder(id).ok_or_else(|| UtilityError::UnknownStakeholder(id.clone()))?,
        None => match project.stakeholders.as_slice() {
            [only] => only,
            all => return Err(UtilityError::StakeholderRequired(all.len())),
        },
    };
    let weights = project.dimensions.iter().map(|d| (d.id.clone(), s.weight(&d.id))).collect();
    let mut contributions = BTreeMap::new();
    for r in &project.requirements {
        let mut per_dim = BTreeMap::new();
        for d in &project.dimensions {
            let c = match d.source {
                DimensionSource::Manual => project.evaluations.get(&d.id, &r.id, &s.id).ok_or_else(|| {
                    UtilityError::NoEvaluation { dimension: d.id.clone(), requirement: r.id.clone() }
                })?,
                DimensionSource::Metric => metric_contribution(r, &d.id)?,
            };
            per_dim.insert(d.id.clone(), c);
        }
        contributions.insert(r.id.clone(), per_dim);
    }
    UtilityReport::from_parts(contributions, weights)
}

/// Aggregated evaluations and expertise-weighted weights over every
/// stakeholder of the project.
pub fn group_report(project: &Project) -> Result<UtilityReport, UtilityError> {
    let group = &project.stakeholders;
    let ids: Vec<StakeholderId> = group.iter().map(|s| s.id.clone()).collect();
    let weights = project
        .dimensions
        .iter()
        .map(|d| Ok((d.id.clone(), group_weight(&d.id, group)?)))
        .collect::<Result<BTreeMap<_, _>, UtilityError>>()?;
    let mut contributions = BTreeMap::new();
    for r in &project.requirements {
        let mut per_dim = BTreeMap::new();
        for d in &project.dimensions {
            let c = match d.source {
                DimensionSource::Manual => group_contribution(&project.evaluations, &r.id, &d.id, &ids)?,
                DimensionSource::Metric => metric_contribution(r, &d.id)?,
            };
            per_dim.insert(d.id.clone(), c);
        }
        contributions.insert(r.id.clone(), per_dim);
    }
    UtilityReport::from_parts(contributions, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn dims(pairs: &[(&str, f64)]) -> BTreeMap<DimensionId, f64> {
        pairs.iter().map(|(d, v)| ((*d).into(), *v)).collect()
    }

    fn ids(xs: &[&str]) -> Vec<StakeholderId> {
        xs.iter().map(|s| (*s).into()).collect()
    }

    #[test]
    fn single_utility_matches_static_weight_table() {
        let w = dims(&[("profit", 0.3), ("risk", 0.5), ("effort", 0.2)]);
        let r1 = dims(&[("profit", 10.0), ("risk", 7.0), ("effort", 2.0)]);
        let r2 = dims(&[("profit", 5.0), ("risk", 2.0), ("effort", 3.0)]);
        assert!((utility_single(&r1, &w).unwrap() - 6.9).abs() < 1e-9);
        assert!((utility_single(&r2, &w).unwrap() - 3.1).abs() < 1e-9);
        let zero = dims(&[("profit", 0.0), ("risk", 0.0), ("effort", 0.0)]);
        assert_eq!(utility_single(&r1, &zero).unwrap(), 0.0);
    }

    #[test]
    fn single_utility_names_missing_dimensions() {
        let w = dims(&[("profit", 0.3), ("cost", 0.7)]);
        let c = dims(&[("profit", 1.0), ("risk", 2.0)]);
        let err = utility_single(&c, &w).unwrap_err();
        assert_eq!(
            err,
            UtilityError::DimensionMismatch {
                missing_weights: vec!["risk".into()],
                missing_contributions: vec!["cost".into()],
            }
        );
    }

    #[test]
    fn group_contribution_averages() {
        let p = fixtures::group_project();
        let all = ids(&["s1", "s2", "s3"]);
        let c = group_contribution(&p.evaluations, &"r1".into(), &"profit".into(), &all).unwrap();
        assert!((c - 3.0).abs() < 1e-12);
        let c = group_contribution(&p.evaluations, &"r3".into(), &"effort".into(), &all).unwrap();
        assert!((c - 13.0 / 3.0).abs() < 1e-12);
        let c = group_contribution(&p.evaluations, &"r3".into(), &"effort".into(), &ids(&["s2"])).unwrap();
        assert_eq!(c, 6.0);
    }

    #[test]
    fn missing_evaluations_leave_the_mean() {
        let mut p = fixtures::group_project();
        p.evaluations.remove(&"profit".into(), &"r1".into(), &"s1".into());
        let c = group_contribution(&p.evaluations, &"r1".into(), &"profit".into(), &ids(&["s1", "s2", "s3"])).unwrap();
        assert_eq!(c, 2.0);
        let err = group_contribution(&p.evaluations, &"r1".into(), &"profit".into(), &ids(&["s1"])).unwrap_err();
        assert!(matches!(err, UtilityError::NoEvaluation { .. }));
    }

    #[test]
    fn group_weights() {
        let p = fixtures::group_project();
        let g = &p.stakeholders;
        assert!((group_weight(&"profit".into(), g).unwrap() - 1.4 / 3.0).abs() < 1e-12);
        assert!((group_weight(&"risk".into(), g).unwrap() - 0.4).abs() < 1e-12);
        assert!((group_weight(&"effort".into(), g).unwrap() - 0.4 / 3.0).abs() < 1e-12);
        assert_eq!(group_weight(&"profit".into(), &[]), Err(UtilityError::EmptyGroup));

        let mut zero = g.clone();
        for s in &mut zero {
            s.dimension_expertise.insert("profit".into(), 0.0);
        }
        assert_eq!(group_weight(&"profit".into(), &zero).unwrap(), 0.0);
    }

    #[test]
    fn group_utilities_from_unrounded_formulas() {
        let p = fixtures::group_project();
        let d: Vec<DimensionId> = p.dimensions.iter().map(|d| d.id.clone()).collect();
        // exact fractions 137/45, 152/45 and 46/15
        for (r, expected) in [("r1", 137.0 / 45.0), ("r2", 152.0 / 45.0), ("r3", 46.0 / 15.0)] {
            let u = utility_group(&r.into(), &d, &p.stakeholders, &p.evaluations).unwrap();
            assert!((u - expected).abs() < 1e-9, "{r}: {u}");
        }
    }

    #[test]
    fn constant_evaluations_scale_weight_sum() {
        let mut p = fixtures::group_project();
        let mut evals = EvaluationSet::new();
        for (k, _) in p.evaluations.iter() {
            evals.insert(k.dimension.clone(), k.requirement.clone(), k.stakeholder.clone(), 4.0);
        }
        p.evaluations = evals;
        let d: Vec<DimensionId> = p.dimensions.iter().map(|d| d.id.clone()).collect();
        let wsum: f64 = d.iter().map(|x| group_weight(x, &p.stakeholders).unwrap()).sum();
        let u = utility_group(&"r2".into(), &d, &p.stakeholders, &p.evaluations).unwrap();
        assert!((u - 4.0 * wsum).abs() < 1e-12);
    }

    #[test]
    fn ranking_examples() {
        let r = rank(&dims_r(&[("r1", 6.9), ("r2", 3.1), ("r3", 6.6)])).unwrap();
        assert_eq!(r.order, vec!["r1".into(), "r3".into(), "r2".into()] as Vec<RequirementId>);
        assert_eq!(r.ranks[&RequirementId::from("r2")], 3);

        let r = rank(&dims_r(&[("r1", 3.03), ("r2", 3.57), ("r3", 3.03)])).unwrap();
        assert_eq!(ranks(&r), vec![("r2", 1), ("r1", 2), ("r3", 2)]);

        let r = rank(&dims_r(&[("only", -1.0)])).unwrap();
        assert_eq!(ranks(&r), vec![("only", 1)]);

        assert_eq!(rank(&BTreeMap::new()), Err(UtilityError::EmptyInput));
    }

    #[test]
    fn near_ties_share_rank_and_sort_by_id() {
        let r = rank(&dims_r(&[("b", 1.0 + 5e-10), ("a", 1.0), ("c", 0.5), ("d", 0.5)])).unwrap();
        assert_eq!(ranks(&r), vec![("a", 1), ("b", 1), ("c", 3), ("d", 3)]);
    }

    fn dims_r(pairs: &[(&str, f64)]) -> BTreeMap<RequirementId, f64> {
        pairs.iter().map(|(d, v)| ((*d).into(), *v)).collect()
    }

    fn ranks(r: &Ranking) -> Vec<(&str, u32)> {
        r.order.iter().map(|id| (id.as_str(), r.ranks[id])).collect()
    }

    #[test]
    fn reports_for_paper_projects() {
        let single = single_report(&fixtures::single_user_project(), None).unwrap();
        assert_eq!(ranks(&single.ranking), vec![("r1", 1), ("r3", 2), ("r2", 3)]);
        assert!(single.max_recompute_error() < 1e-9);

        let group = group_report(&fixtures::group_project()).unwrap();
        assert_eq!(group.ranking.order[0].as_str(), "r2");
        assert!(group.max_recompute_error() < 1e-9);

        let err = single_report(&fixtures::group_project(), None).unwrap_err();
        assert_eq!(err, UtilityError::StakeholderRequired(3));
    }

    #[test]
    fn metric_dimensions_use_counts() {
        let mut p = fixtures::single_user_project();
        p.dimensions.push(crate::model::InterestDimension::metric("blocker"));
        p.stakeholders[0].dimension_weights.insert("profit".into(), 0.2);
        p.stakeholders[0].dimension_weights.insert("blocker".into(), 0.1);
        for (r, n) in p.requirements.iter_mut().zip([0, 10, 0]) {
            r.metrics.insert("blocker".into(), n);
        }
        let rep = single_report(&p, None).unwrap();
        assert!((rep.utilities[&RequirementId::from("r2")] - (1.0 + 1.0 + 0.6 + 1.0)).abs() < 1e-9);
    }
}
