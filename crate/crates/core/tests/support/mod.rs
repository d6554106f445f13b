//! Brute-force reference implementations and random project generators.
//! Shared with the service crate's acceptance suite.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::prelude::*;
use reqprio_core::model::{
    DimensionId, EvaluationSet, InterestDimension, PrecedenceConstraint, Project, Requirement, RequirementId,
    Stakeholder,
};

/// All permutations of `0..n`, built by inserting each element at every position.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for k in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                (0..=p.len()).map(move |i| {
                    let mut q = p.clone();
                    q.insert(i, k);
                    q
                })
            })
            .collect();
    }
    out
}

/// Some permutation of `0..n` satisfies every edge `a before b`.
pub fn satisfiable(n: usize, edges: &[(usize, usize)], perms: &[Vec<usize>]) -> bool {
    perms.iter().any(|perm| {
        let mut pos = vec![0; n];
        for (i, &v) in perm.iter().enumerate() {
            pos[v] = i;
        }
        edges.iter().all(|&(a, b)| pos[a] < pos[b])
    })
}

/// Small ordering problem over requirements `0..n` with edges as index pairs.
#[derive(Debug, Clone)]
pub struct SmallProblem {
    pub n: usize,
    pub deps: Vec<(usize, usize)>,
    pub prio: Vec<(usize, usize)>,
}

impl SmallProblem {
    pub fn id(i: usize) -> RequirementId {
        RequirementId::new(format!("r{i}"))
    }

    pub fn requirement_ids(&self) -> Vec<RequirementId> {
        (0..self.n).map(Self::id).collect()
    }

    pub fn dep_constraints(&self) -> Vec<PrecedenceConstraint> {
        self.deps
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| PrecedenceConstraint::dep(format!("dep{}", i + 1), Self::id(a), Self::id(b)))
            .collect()
    }

    pub fn prio_constraints(&self) -> Vec<PrecedenceConstraint> {
        self.prio
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| PrecedenceConstraint::prio(format!("p{}", i + 1), Self::id(a), Self::id(b)))
            .collect()
    }

    /// Consistency of DEP plus the prioritization subset encoded in `mask`.
    pub fn consistent_mask(&self, mask: u32, perms: &[Vec<usize>]) -> bool {
        let mut edges = self.deps.clone();
        edges.extend(self.prio.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, e)| *e));
        satisfiable(self.n, &edges, perms)
    }

    /// Minimal inconsistent subsets of the prioritization, as sorted index lists.
    pub fn brute_conflicts(&self, perms: &[Vec<usize>]) -> Vec<Vec<usize>> {
        let m = self.prio.len();
        let inconsistent: Vec<u32> = (0..1u32 << m).filter(|&s| !self.consistent_mask(s, perms)).collect();
        let mut out: Vec<Vec<usize>> = inconsistent
            .iter()
            .filter(|&&s| !inconsistent.iter().any(|&t| t != s && t & s == t))
            .map(|&s| bits(s, m))
            .collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    /// Minimal subsets whose deletion restores consistency.
    pub fn brute_diagnoses(&self, perms: &[Vec<usize>]) -> Vec<Vec<usize>> {
        let m = self.prio.len();
        let full = (1u32 << m) - 1;
        let fixes: Vec<u32> = (0..1u32 << m).filter(|&d| self.consistent_mask(full & !d, perms)).collect();
        if fixes.contains(&0) {
            return Vec::new();
        }
        let mut out: Vec<Vec<usize>> = fixes
            .iter()
            .filter(|&&d| !fixes.iter().any(|&t| t != d && t & d == t))
            .map(|&d| bits(d, m))
            .collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }
}

pub fn bits(mask: u32, m: usize) -> Vec<usize> {
    (0..m).filter(|i| mask & (1 << i) != 0).collect()
}

/// Minimal hitting sets of `sets` over elements `0..m`.
pub fn minimal_hitting_sets(sets: &[Vec<usize>], m: usize) -> Vec<Vec<usize>> {
    if sets.is_empty() {
        return Vec::new();
    }
    let hits: Vec<u32> = (0..1u32 << m)
        .filter(|&h| sets.iter().all(|s| s.iter().any(|&e| h & (1 << e) != 0)))
        .collect();
    let mut out: Vec<Vec<usize>> = hits
        .iter()
        .filter(|&&h| !hits.iter().any(|&t| t != h && t & h == t))
        .map(|&h| bits(h, m))
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Random problem with acyclic dependencies: at most `max_deps` dependency
/// edges and `max_prio` prioritization edges over `2..=max_n` requirements.
/// Half the time the prioritization is the chain of a random order.
pub fn random_problem(rng: &mut impl Rng, max_n: usize, max_prio: usize, max_deps: usize) -> SmallProblem {
    let n = rng.gen_range(2..=max_n);
    let perms = permutations(n);
    let mut deps = Vec::new();
    for _ in 0..rng.gen_range(0..=max_deps) {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b {
            continue;
        }
        deps.push((a, b));
        if !satisfiable(n, &deps, &perms) {
            deps.pop();
        }
    }
    let prio = if rng.gen_bool(0.5) {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        order.windows(2).map(|w| (w[0], w[1])).take(max_prio).collect()
    } else {
        (0..rng.gen_range(0..=max_prio))
            .filter_map(|_| {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(0..n);
                (a != b).then_some((a, b))
            })
            .collect()
    };
    SmallProblem { n, deps, prio }
}

/// Direct triple loop over dimensions, stakeholders and evaluations.
pub fn reference_group_utility(project: &Project, requirement: &RequirementId) -> f64 {
    let m = project.stakeholders.len() as f64;
    let mut utility = 0.0;
    for d in &project.dimensions {
        let mut weight = 0.0;
        for s in &project.stakeholders {
            weight += s.dimension_weights.get(&d.id).copied().unwrap_or(0.0)
                * s.dimension_expertise.get(&d.id).copied().unwrap_or(1.0);
        }
        weight /= m;
        let mut sum = 0.0;
        let mut count = 0.0;
        for s in &project.stakeholders {
            if let Some(v) = project.evaluations.get(&d.id, requirement, &s.id) {
                sum += v;
                count += 1.0;
            }
        }
        utility += sum / count * weight;
    }
    utility
}

/// Random dense project with manual dimensions; every stakeholder evaluates
/// every requirement and has weights summing to one.
pub fn random_project(rng: &mut impl Rng, max_requirements: usize, stakeholders: usize, dimensions: usize) -> Project {
    let n = rng.gen_range(1..=max_requirements);
    let dims: Vec<DimensionId> = (0..dimensions).map(|i| DimensionId::new(format!("d{i}"))).collect();
    let mut project = Project {
        requirements: (0..n).map(|i| Requirement::new(format!("r{i}"))).collect(),
        dimensions: dims.iter().map(|d| InterestDimension::manual(d.clone())).collect(),
        evaluations: EvaluationSet::new(),
        ..Project::default()
    };
    for si in 0..stakeholders {
        let mut s = Stakeholder::new(format!("s{si}"));
        let raw: Vec<f64> = (0..dimensions).map(|_| rng.gen_range(1..=10) as f64).collect();
        let total: f64 = raw.iter().sum();
        let mut weights: BTreeMap<DimensionId, f64> = dims.iter().cloned().zip(raw.iter().map(|w| w / total)).collect();
        // fold rounding error into the last weight so the sum is exactly representable near 1
        let sum: f64 = weights.values().sum();
        *weights.get_mut(dims.last().unwrap()).unwrap() += 1.0 - sum;
        s.dimension_weights = weights;
        if rng.gen_bool(0.5) {
            s.dimension_expertise = dims.iter().map(|d| (d.clone(), rng.gen_range(0..=10) as f64 / 10.0)).collect();
        }
        for r in &project.requirements {
            for d in &dims {
                project.evaluations.insert(d.clone(), r.id.clone(), s.id.clone(), rng.gen_range(0..=10) as f64);
            }
        }
        project.stakeholders.push(s);
    }
    project
}
