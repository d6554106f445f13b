//! Open-source scenario: contributions are raw issue-tracker activity counts
//! and a contributor's weight for an issue is the keyword similarity between
//! their profile and the issue.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, UtilityError};
use crate::model::{
    DimensionId, DimensionSource, InterestDimension, Project, Ranking, Requirement, RequirementId, Stakeholder,
    StakeholderId,
};
use crate::utility::rank;

/// Activity dimensions read from an issue tracker.
pub const TRACKER_DIMENSIONS: [&str; 4] = ["cc", "gerrit", "blocker", "comments"];

/// Ordered set of metric dimensions summed by the personal utility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDimensionSet(Vec<InterestDimension>);

impl MetricDimensionSet {
    pub fn new(dimensions: Vec<InterestDimension>) -> Result<Self, UtilityError> {
        if let Some(d) = dimensions.iter().find(|d| d.source != DimensionSource::Metric) {
            return Err(UtilityError::NotAMetric(d.id.clone()));
        }
        Ok(Self(dimensions))
    }

    /// `cc`, `gerrit`, `blocker`, `comments`.
    pub fn tracker() -> Self {
        Self(TRACKER_DIMENSIONS.iter().map(|d| InterestDimension::metric(*d)).collect())
    }

    /// Every metric dimension of `project`, in declaration order.
    pub fn of_project(project: &Project) -> Self {
        Self(project.dimensions.iter().filter(|d| d.source == DimensionSource::Metric).cloned().collect())
    }

    pub fn dimensions(&self) -> &[InterestDimension] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertiseScore {
    pub stakeholder: StakeholderId,
    pub requirement: RequirementId,
    pub value: f64,
}

/// Raw activity count of `requirement` on `dimension`, unnormalized.
pub fn metric_contribution(requirement: &Requirement, dimension: &DimensionId) -> Result<f64, UtilityError> {
    requirement
        .metrics
        .get(dimension)
        .map(|n| *n as f64)
        .ok_or_else(|| UtilityError::MissingMetric { requirement: requirement.id.clone(), dimension: dimension.clone() })
}

/// Jaccard similarity of two keyword sets; two empty sets score 0.
pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Similarity between a stakeholder profile and the requirement's keywords
/// together with its tracker meta-information.
pub fn expertise(requirement: &Requirement, stakeholder: &Stakeholder) -> ExpertiseScore {
    let issue: BTreeSet<String> = requirement.keywords.union(&requirement.component_tags).cloned().collect();
    ExpertiseScore {
        stakeholder: stakeholder.id.clone(),
        requirement: requirement.id.clone(),
        value: jaccard(&issue, &stakeholder.profile_keywords),
    }
}

/// Where `weight(r, s)` comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RequirementWeight {
    Supplied(f64),
    Expertise,
}

impl RequirementWeight {
    /// The stakeholder's supplied weight for `requirement` if any, else expertise.
    pub fn for_pair(requirement: &Requirement, stakeholder: &Stakeholder) -> Self {
        stakeholder
            .requirement_weights
            .get(&requirement.id)
            .map_or(RequirementWeight::Expertise, |w| RequirementWeight::Supplied(*w))
    }

    fn resolve(self, requirement: &Requirement, stakeholder: &Stakeholder) -> f64 {
        match self {
            RequirementWeight::Supplied(w) => w,
            RequirementWeight::Expertise => expertise(requirement, stakeholder).value,
        }
    }
}

/// `(Σ_d multiplier(d) · count(r, d)) · weight(r, s)`.
pub fn personal_utility(
    requirement: &Requirement,
    stakeholder: &Stakeholder,
    dimensions: &MetricDimensionSet,
    weight: RequirementWeight,
) -> Result<f64, UtilityError> {
    let activity = activity(requirement, dimensions)?;
    Ok(activity * weight.resolve(requirement, stakeholder))
}

fn activity(requirement: &Requirement, dimensions: &MetricDimensionSet) -> Result<f64, UtilityError> {
    dimensions
        .dimensions()
        .iter()
        .try_fold(0.0, |acc, d| Ok(acc + d.multiplier * metric_contribution(requirement, &d.id)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OssReport {
    pub stakeholder: StakeholderId,
    /// Summed (multiplied) activity per requirement.
    pub activity: BTreeMap<RequirementId, f64>,
    pub weights: BTreeMap<RequirementId, f64>,
    pub ranking: Ranking,
}

/// Personal utilities of every requirement for one stakeholder.
pub fn oss_report(project: &Project, stakeholder: &StakeholderId) -> Result<OssReport, UtilityError> {
    let s = project.stakeholder(stakeholder).ok_or_else(|| UtilityError::UnknownStakeholder(stakeholder.clone()))?;
    let dims = MetricDimensionSet::of_project(project);
    let mut activity_map = BTreeMap::new();
    let mut weights = BTreeMap::new();
    let mut utilities = BTreeMap::new();
    for r in &project.requirements {
        let a = activity(r, &dims)?;
        let w = RequirementWeight::for_pair(r, s).resolve(r, s);
        activity_map.insert(r.id.clone(), a);
        weights.insert(r.id.clone(), w);
        utilities.insert(r.id.clone(), a * w);
    }
    let ranking = rank(&utilities)?;
    Ok(OssReport { stakeholder: s.id.clone(), activity: activity_map, weights, ranking })
}

pub fn recommend(project: &Project, stakeholder: &StakeholderId) -> Result<Ranking, UtilityError> {
    oss_report(project, stakeholder).map(|r| r.ranking)
}

/// Tokens dropped by [`extract_keywords`] regardless of length.
pub const STOPWORDS: &[&str] = &[
    "a", "about", "after", "all", "also", "an", "and", "any", "are", "as", "at", "be", "been", "before", "but", "by",
    "can", "cannot", "could", "does", "doesn", "don", "for", "from", "had", "has", "have", "how", "if", "in", "into",
    "is", "it", "its", "not", "of", "on", "onto", "or", "our", "should", "some", "than", "that", "the", "their",
    "then", "there", "this", "those", "to", "too", "very", "was", "were", "what", "when", "where", "which", "while",
    "who", "why", "will", "with", "would", "you", "your",
];

pub const MIN_KEYWORD_LEN: usize = 3;

/// Lowercases, splits on non-alphanumerics, drops tokens shorter than
/// [`MIN_KEYWORD_LEN`] characters and drops [`STOPWORDS`].
pub fn extract_keywords(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .map(str::to_lowercase)
        .filter(|t| t.chars().count() >= MIN_KEYWORD_LEN && !STOPWORDS.contains(&t.as_str()))
        .collect()
}

/// Issue id as exported by a tracker; numbers and strings are both accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IssueRef {
    Number(u64),
    Text(String),
}

impl std::fmt::Display for IssueRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IssueRef::Number(n) => write!(f, "{n}"),
            IssueRef::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportedIssue {
    pub id: IssueRef,
    #[serde(default)]
    pub summary: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub component: String,
    #[serde(default)]
    pub cc: Vec<String>,
    #[serde(default)]
    pub gerrit_changes: u64,
    /// Issues that cannot proceed until this one is resolved.
    #[serde(default)]
    pub blocks: Vec<IssueRef>,
    #[serde(default)]
    pub comment_count: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IssueExport {
    #[serde(default)]
    pub issues: Vec<ExportedIssue>,
}

/// Requirements and metric dimensions derived from a tracker export.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProjectFragment {
    pub requirements: Vec<Requirement>,
    pub dimensions: Vec<InterestDimension>,
}

impl ProjectFragment {
    pub fn is_empty(&self) -> bool {
        self.requirements.is_empty() && self.dimensions.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fragment serialization is infallible")
    }

    /// Adds missing dimensions and inserts or replaces requirements by id.
    pub fn merge_into(self, project: &mut Project) {
        for d in self.dimensions {
            if project.dimension(&d.id).is_none() {
                project.dimensions.push(d);
            }
        }
        for r in self.requirements {
            match project.requirements.iter_mut().find(|x| x.id == r.id) {
                Some(slot) => *slot = r,
                None => project.requirements.push(r),
            }
        }
    }
}

fn component_tag(component: &str) -> Option<String> {
    let tag = component.split_whitespace().collect::<Vec<_>>().join("-").to_lowercase();
    (!tag.is_empty()).then_some(tag)
}

impl From<&ExportedIssue> for Requirement {
    fn from(issue: &ExportedIssue) -> Self {
        let mut keywords = extract_keywords(&issue.summary);
        keywords.extend(extract_keywords(&issue.component));
        let counts = [
            ("cc", issue.cc.len() as u64),
            ("gerrit", issue.gerrit_changes),
            ("blocker", issue.blocks.len() as u64),
            ("comments", issue.comment_count),
        ];
        Requirement {
            id: issue.id.to_string().into(),
            title: issue.summary.clone(),
            description: issue.description.clone(),
            keywords,
            metrics: counts.into_iter().map(|(d, n)| (d.into(), n)).collect(),
            component_tags: component_tag(&issue.component).into_iter().collect(),
        }
    }
}

impl From<&IssueExport> for ProjectFragment {
    fn from(export: &IssueExport) -> Self {
        if export.issues.is_empty() {
            return ProjectFragment::default();
        }
        ProjectFragment {
            requirements: export.issues.iter().map(Requirement::from).collect(),
            dimensions: MetricDimensionSet::tracker().0,
        }
    }
}

/// Parses an issue export document. Unknown fields are ignored.
pub fn ingest_tracker_export(text: &str) -> Result<ProjectFragment, ModelError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let export: IssueExport = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ModelError::Parse { path, line: inner.line(), column: inner.column(), message: inner.to_string() }
    })?;
    Ok(ProjectFragment::from(&export))
}
