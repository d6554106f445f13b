//! Domain types shared by every engine: requirements, stakeholders, interest
//! dimensions, the evaluation tensor and precedence constraints.
//!
//! Values are plain data. They are built once (usually by deserializing a
//! project file) and then only read; edits produce new values.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ModelError;

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl std::borrow::Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

string_id!(
    /// Identifier of a requirement (an issue, a bug, a feature request).
    RequirementId
);
string_id!(StakeholderId);
string_id!(
    /// Identifier of an interest dimension such as `profit` or `comments`.
    DimensionId
);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Requirement {
    pub id: RequirementId,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub keywords: BTreeSet<String>,
    /// Raw interaction counts per metric dimension.
    #[serde(default)]
    pub metrics: BTreeMap<DimensionId, u64>,
    /// Tracker meta-information (component names and similar).
    #[serde(default)]
    pub component_tags: BTreeSet<String>,
}

impl Requirement {
    pub fn new(id: impl Into<RequirementId>) -> Self {
        Self {
            id: id.into(),
            title: String::new(),
            description: String::new(),
            keywords: BTreeSet::new(),
            metrics: BTreeMap::new(),
            component_tags: BTreeSet::new(),
        }
    }

    pub fn with_metric(mut self, dimension: impl Into<DimensionId>, count: u64) -> Self {
        self.metrics.insert(dimension.into(), count);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DimensionSource {
    /// Contributions come from stakeholder evaluations.
    Manual,
    /// Contributions come from a requirement's metric counts.
    Metric,
}

fn one() -> f64 {
    1.0
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterestDimension {
    pub id: DimensionId,
    #[serde(default)]
    pub name: String,
    pub source: DimensionSource,
    /// Scales a metric count before summation in the open-source model.
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub multiplier: f64,
}

impl InterestDimension {
    pub fn manual(id: impl Into<DimensionId>) -> Self {
        let id = id.into();
        Self { name: id.to_string(), id, source: DimensionSource::Manual, multiplier: 1.0 }
    }

    pub fn metric(id: impl Into<DimensionId>) -> Self {
        let id = id.into();
        Self { name: id.to_string(), id, source: DimensionSource::Metric, multiplier: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stakeholder {
    pub id: StakeholderId,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub profile_keywords: BTreeSet<String>,
    #[serde(default)]
    pub dimension_weights: BTreeMap<DimensionId, f64>,
    /// Per-dimension expertise; absent entries count as 1.0.
    #[serde(default)]
    pub dimension_expertise: BTreeMap<DimensionId, f64>,
    /// Externally supplied per-requirement weights for the open-source model.
    /// When present for a requirement they replace keyword-similarity expertise.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub requirement_weights: BTreeMap<RequirementId, f64>,
}

impl Stakeholder {
    pub fn new(id: impl Into<StakeholderId>) -> Self {
        let id = id.into();
        Self {
            name: id.to_string(),
            id,
            profile_keywords: BTreeSet::new(),
            dimension_weights: BTreeMap::new(),
            dimension_expertise: BTreeMap::new(),
            requirement_weights: BTreeMap::new(),
        }
    }

    /// Weight `w(d,s)`; a dimension the stakeholder did not weigh counts as 0.
    pub fn weight(&self, dimension: &DimensionId) -> f64 {
        self.dimension_weights.get(dimension).copied().unwrap_or(0.0)
    }

    pub fn expertise(&self, dimension: &DimensionId) -> f64 {
        self.dimension_expertise.get(dimension).copied().unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EvaluationKey {
    pub dimension: DimensionId,
    pub requirement: RequirementId,
    pub stakeholder: StakeholderId,
}

/// One cell of the evaluation tensor as it appears in project files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub dimension: DimensionId,
    pub requirement: RequirementId,
    pub stakeholder: StakeholderId,
    pub value: f64,
}

/// Sparse tensor `eval(d, r, s)`. A missing entry means no evaluation was given.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvaluationSet {
    entries: BTreeMap<EvaluationKey, f64>,
}

impl EvaluationSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(
        &mut self,
        dimension: impl Into<DimensionId>,
        requirement: impl Into<RequirementId>,
        stakeholder: impl Into<StakeholderId>,
        value: f64,
    ) -> Option<f64> {
        let key = EvaluationKey {
            dimension: dimension.into(),
            requirement: requirement.into(),
            stakeholder: stakeholder.into(),
        };
        self.entries.insert(key, value)
    }

    pub fn remove(
        &mut self,
        dimension: &DimensionId,
        requirement: &RequirementId,
        stakeholder: &StakeholderId,
    ) -> Option<f64> {
        let key = EvaluationKey {
            dimension: dimension.clone(),
            requirement: requirement.clone(),
            stakeholder: stakeholder.clone(),
        };
        self.entries.remove(&key)
    }

    pub fn get(
        &self,
        dimension: &DimensionId,
        requirement: &RequirementId,
        stakeholder: &StakeholderId,
    ) -> Option<f64> {
        let key = EvaluationKey {
            dimension: dimension.clone(),
            requirement: requirement.clone(),
            stakeholder: stakeholder.clone(),
        };
        self.entries.get(&key).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EvaluationKey, f64)> {
        self.entries.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Drops every evaluation given by `stakeholder`.
    pub fn clear_stakeholder(&mut self, stakeholder: &StakeholderId) {
        self.entries.retain(|k, _| &k.stakeholder != stakeholder);
    }
}

impl Serialize for EvaluationSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let list: Vec<Evaluation> = self
            .entries
            .iter()
            .map(|(k, v)| Evaluation {
                dimension: k.dimension.clone(),
                requirement: k.requirement.clone(),
                stakeholder: k.stakeholder.clone(),
                value: *v,
            })
            .collect();
        list.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for EvaluationSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let list = Vec::<Evaluation>::deserialize(deserializer)?;
        Ok(list.into_iter().collect())
    }
}

impl FromIterator<Evaluation> for EvaluationSet {
    fn from_iter<I: IntoIterator<Item = Evaluation>>(iter: I) -> Self {
        let mut set = EvaluationSet::new();
        for e in iter {
            set.insert(e.dimension, e.requirement, e.stakeholder, e.value);
        }
        set
    }
}

/// Utilities, competition ranks and the resulting order of a prioritization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub utilities: BTreeMap<RequirementId, f64>,
    pub ranks: BTreeMap<RequirementId, u32>,
    /// Descending utility; tied requirements in ascending id order.
    pub order: Vec<RequirementId>,
}

impl Ranking {
    /// `(id, utility, rank)` rows in ranking order.
    pub fn rows(&self) -> Vec<(RequirementId, f64, u32)> {
        self.order
            .iter()
            .map(|id| (id.clone(), self.utilities[id], self.ranks[id]))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConstraintKind {
    /// Fixed dependency; never deleted by a diagnosis.
    Dep,
    /// Derived from a prioritization; may be deleted.
    Prio,
}

fn dep_kind() -> ConstraintKind {
    ConstraintKind::Dep
}

/// Strict ordering statement `before < after`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecedenceConstraint {
    pub before: RequirementId,
    pub after: RequirementId,
    #[serde(default = "dep_kind")]
    pub kind: ConstraintKind,
    #[serde(default)]
    pub label: String,
}

impl PrecedenceConstraint {
    pub fn dep(label: impl Into<String>, before: impl Into<RequirementId>, after: impl Into<RequirementId>) -> Self {
        Self { before: before.into(), after: after.into(), kind: ConstraintKind::Dep, label: label.into() }
    }

    pub fn prio(label: impl Into<String>, before: impl Into<RequirementId>, after: impl Into<RequirementId>) -> Self {
        Self { before: before.into(), after: after.into(), kind: ConstraintKind::Prio, label: label.into() }
    }
}

impl fmt::Display for PrecedenceConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} < {}", self.label, self.before, self.after)
    }
}

/// A stored ordering of requirements that overrides the computed ranking when
/// dependencies are checked, e.g. after a repair was accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prioritization {
    pub order: Vec<RequirementId>,
    #[serde(default)]
    pub note: String,
}

/// Everything needed to prioritize one project. This is the project file format.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Project {
    /// Optimistic-concurrency version maintained by the project store.
    #[serde(default)]
    pub version: u64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    #[serde(default)]
    pub requirements: Vec<Requirement>,
    #[serde(default)]
    pub stakeholders: Vec<Stakeholder>,
    #[serde(default)]
    pub dimensions: Vec<InterestDimension>,
    #[serde(default)]
    pub evaluations: EvaluationSet,
    #[serde(default)]
    pub dependencies: Vec<PrecedenceConstraint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prioritization: Option<Prioritization>,
}

impl Project {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            ModelError::Parse { path, line: inner.line(), column: inner.column(), message: inner.to_string() }
        })
    }

    /// Canonical pretty JSON. Identical projects always serialize to identical bytes.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("project serialization is infallible")
    }

    pub fn requirement(&self, id: &RequirementId) -> Option<&Requirement> {
        self.requirements.iter().find(|r| &r.id == id)
    }

    pub fn stakeholder(&self, id: &StakeholderId) -> Option<&Stakeholder> {
        self.stakeholders.iter().find(|s| &s.id == id)
    }

    pub fn stakeholder_mut(&mut self, id: &StakeholderId) -> Option<&mut Stakeholder> {
        self.stakeholders.iter_mut().find(|s| &s.id == id)
    }

    pub fn dimension(&self, id: &DimensionId) -> Option<&InterestDimension> {
        self.dimensions.iter().find(|d| &d.id == id)
    }

    pub fn requirement_ids(&self) -> impl Iterator<Item = &RequirementId> {
        self.requirements.iter().map(|r| &r.id)
    }

    /// Rescales each stakeholder's dimension weights to sum to 1. Stakeholders
    /// without weights (or with an all-zero vector) are left untouched.
    pub fn normalize_weights(&mut self) {
        for s in &mut self.stakeholders {
            let sum: f64 = s.dimension_weights.values().sum();
            if sum > 0.0 && sum.is_finite() {
                for w in s.dimension_weights.values_mut() {
                    *w /= sum;
                }
            }
        }
    }
}
