//! Dependency-aware repair of prioritizations.
//!
//! A prioritization is turned into a chain of `PRIO` precedence constraints and
//! checked against fixed `DEP` constraints. Strict precedence constraints are
//! satisfiable by some total order iff their digraph is acyclic, so consistency
//! is a topological-sort check.
//!
//! Conflicts are minimal subsets of the prioritization that contradict the
//! dependencies (found with QuickXPlain, dependencies acting as background).
//! Diagnoses are minimal subsets whose deletion restores consistency, found
//! breadth-first in a hitting-set tree that computes conflicts on demand.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashSet, VecDeque};

use serde::Serialize;

use crate::error::DependencyError;
use crate::model::{ConstraintKind, PrecedenceConstraint, Ranking, RequirementId};

/// Chain of adjacent-pair constraints over `order`, labeled `p1`, `p2`, ...
pub fn order_to_constraints(order: &[RequirementId]) -> Vec<PrecedenceConstraint> {
    order
        .windows(2)
        .enumerate()
        .map(|(i, w)| PrecedenceConstraint::prio(format!("p{}", i + 1), w[0].clone(), w[1].clone()))
        .collect()
}

pub fn ranking_to_constraints(ranking: &Ranking) -> Vec<PrecedenceConstraint> {
    order_to_constraints(&ranking.order)
}

/// A minimal subset of the prioritization that is inconsistent with the dependencies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConflictSet {
    /// Positions in the prioritization, ascending.
    pub positions: Vec<usize>,
    pub constraints: Vec<PrecedenceConstraint>,
}

/// A minimal subset of the prioritization whose deletion restores consistency.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnosis {
    pub positions: Vec<usize>,
    pub constraints: Vec<PrecedenceConstraint>,
}

impl ConflictSet {
    pub fn labels(&self) -> Vec<&str> {
        self.constraints.iter().map(|c| c.label.as_str()).collect()
    }
}

impl Diagnosis {
    pub fn labels(&self) -> Vec<&str> {
        self.constraints.iter().map(|c| c.label.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Repair {
    pub diagnosis: Diagnosis,
    pub replacement_order: Vec<RequirementId>,
    /// Inverted deleted constraints that hold in `replacement_order`.
    pub flipped_constraints: Vec<PrecedenceConstraint>,
}

/// Requirements, fixed dependencies and a prioritization to check against them.
#[derive(Debug, Clone)]
pub struct OrderingProblem {
    requirements: Vec<RequirementId>,
    index: BTreeMap<RequirementId, usize>,
    dependencies: Vec<PrecedenceConstraint>,
    prioritization: Vec<PrecedenceConstraint>,
    dep_edges: Vec<(usize, usize)>,
    prio_edges: Vec<(usize, usize)>,
}

impl OrderingProblem {
    /// Fails when a constraint names an unknown requirement, orders a
    /// requirement before itself, has the wrong kind, or when the dependencies
    /// alone are cyclic (they are never relaxed).
    pub fn new(
        requirements: impl IntoIterator<Item = RequirementId>,
        dependencies: Vec<PrecedenceConstraint>,
        prioritization: Vec<PrecedenceConstraint>,
    ) -> Result<Self, DependencyError> {
        let requirements: Vec<RequirementId> =
            requirements.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let index: BTreeMap<RequirementId, usize> =
            requirements.iter().enumerate().map(|(i, r)| (r.clone(), i)).collect();

        let edges = |constraints: &[PrecedenceConstraint], kind| {
            constraints
                .iter()
                .map(|c| {
                    if c.kind != kind {
                        return Err(DependencyError::WrongKind { label: c.label.clone() });
                    }
                    if c.before == c.after {
                        return Err(DependencyError::SelfLoop { label: c.label.clone(), requirement: c.before.clone() });
                    }
                    let lookup = |r: &RequirementId| {
                        index.get(r).copied().ok_or_else(|| DependencyError::UnknownRequirement {
                            label: c.label.clone(),
                            requirement: r.clone(),
                        })
                    };
                    Ok((lookup(&c.before)?, lookup(&c.after)?))
                })
                .collect::<Result<Vec<_>, _>>()
        };
        let dep_edges = edges(&dependencies, ConstraintKind::Dep)?;
        let prio_edges = edges(&prioritization, ConstraintKind::Prio)?;

        if let Some(cycle) = find_cycle(requirements.len(), &dep_edges) {
            return Err(DependencyError::CyclicDependencies {
                cycle: cycle.into_iter().map(|i| requirements[i].clone()).collect(),
            });
        }
        Ok(Self { requirements, index, dependencies, prioritization, dep_edges, prio_edges })
    }

    /// Prioritization taken from the ranking's order.
    pub fn from_ranking(
        requirements: impl IntoIterator<Item = RequirementId>,
        dependencies: Vec<PrecedenceConstraint>,
        ranking: &Ranking,
    ) -> Result<Self, DependencyError> {
        Self::new(requirements, dependencies, ranking_to_constraints(ranking))
    }

    pub fn requirements(&self) -> &[RequirementId] {
        &self.requirements
    }

    pub fn dependencies(&self) -> &[PrecedenceConstraint] {
        &self.dependencies
    }

    pub fn prioritization(&self) -> &[PrecedenceConstraint] {
        &self.prioritization
    }

    /// True iff some total order satisfies every dependency and the
    /// prioritization constraints at `active` positions.
    pub fn is_consistent(&self, active: &[usize]) -> bool {
        topological_order(
            self.requirements.len(),
            self.dep_edges.iter().copied().chain(active.iter().map(|&i| self.prio_edges[i])),
            |_, _| Ordering::Equal,
        )
        .is_some()
    }

    pub fn is_fully_consistent(&self) -> bool {
        self.is_consistent(&(0..self.prioritization.len()).collect::<Vec<_>>())
    }

    /// A minimal conflict among `candidates`, or `None` if they are consistent
    /// with the dependencies.
    fn quick_xplain(&self, candidates: &[usize]) -> Option<Vec<usize>> {
        if self.is_consistent(candidates) {
            return None;
        }
        let mut conflict = self.qx(&[], false, candidates);
        conflict.sort_unstable();
        Some(conflict)
    }

    fn qx(&self, background: &[usize], has_delta: bool, candidates: &[usize]) -> Vec<usize> {
        if has_delta && !self.is_consistent(background) {
            return Vec::new();
        }
        if candidates.len() == 1 {
            return candidates.to_vec();
        }
        let (c1, c2) = candidates.split_at(candidates.len() / 2);
        let d2 = self.qx(&[background, c1].concat(), !c1.is_empty(), c2);
        let d1 = self.qx(&[background, &d2].concat(), !d2.is_empty(), c1);
        [d1, d2].concat()
    }

    /// Breadth-first hitting-set tree. Returns every conflict computed along
    /// the way and the minimal diagnoses of the levels explored. Exploration
    /// stops after the first level at which `limit` diagnoses are known.
    fn hitting_set_tree(&self, limit: usize) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
        let all: Vec<usize> = (0..self.prioritization.len()).collect();
        let mut conflicts: Vec<Vec<usize>> = Vec::new();
        let mut diagnoses: Vec<Vec<usize>> = Vec::new();
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut level: Vec<Vec<usize>> = vec![Vec::new()];

        while !level.is_empty() {
            let mut found = Vec::new();
            let mut next = Vec::new();
            for path in level {
                if diagnoses.iter().any(|d| is_subset(d, &path)) {
                    continue;
                }
                let label = match conflicts.iter().find(|c| is_disjoint(c, &path)) {
                    Some(c) => c.clone(),
                    None => {
                        let remaining: Vec<usize> = all.iter().copied().filter(|i| path.binary_search(i).is_err()).collect();
                        match self.quick_xplain(&remaining) {
                            Some(c) => {
                                conflicts.push(c.clone());
                                c
                            }
                            None => {
                                found.push(path);
                                continue;
                            }
                        }
                    }
                };
                for element in label {
                    let mut child = path.clone();
                    let at = child.binary_search(&element).unwrap_err();
                    child.insert(at, element);
                    if seen.insert(child.clone()) {
                        next.push(child);
                    }
                }
            }
            found.sort();
            diagnoses.extend(found);
            if diagnoses.len() >= limit {
                diagnoses.truncate(limit);
                break;
            }
            level = next;
        }
        (conflicts, diagnoses)
    }

    fn conflict_set(&self, positions: Vec<usize>) -> ConflictSet {
        let constraints = positions.iter().map(|&i| self.prioritization[i].clone()).collect();
        ConflictSet { positions, constraints }
    }

    fn diagnosis(&self, positions: Vec<usize>) -> Diagnosis {
        let constraints = positions.iter().map(|&i| self.prioritization[i].clone()).collect();
        Diagnosis { positions, constraints }
    }

    /// Every minimal conflict, smallest first; empty iff consistent.
    pub fn minimal_conflicts(&self) -> Vec<ConflictSet> {
        let (mut conflicts, _) = self.hitting_set_tree(usize::MAX);
        conflicts.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        conflicts.dedup();
        conflicts.into_iter().map(|c| self.conflict_set(c)).collect()
    }

    /// Up to `limit` minimal diagnoses, by ascending cardinality and then by
    /// position in the prioritization. A consistent problem has none.
    pub fn diagnoses(&self, limit: usize) -> Vec<Diagnosis> {
        if limit == 0 || self.is_fully_consistent() {
            return Vec::new();
        }
        let (_, diagnoses) = self.hitting_set_tree(limit);
        diagnoses.into_iter().map(|d| self.diagnosis(d)).collect()
    }

    /// Resolves prioritization labels (e.g. `["p2"]`) into a diagnosis.
    pub fn diagnosis_from_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<Diagnosis, DependencyError> {
        let mut positions = labels
            .iter()
            .map(|l| {
                self.prioritization.iter().position(|c| c.label == l.as_ref()).ok_or_else(|| {
                    DependencyError::InvalidDiagnosis(format!("no prioritization constraint labeled `{}`", l.as_ref()))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        positions.sort_unstable();
        positions.dedup();
        Ok(self.diagnosis(positions))
    }

    /// Deletes the diagnosis and re-sorts topologically. Among requirements
    /// that are free at the same time the one with higher utility goes first,
    /// then the smaller id. Requirements without a utility sort last.
    pub fn repair(
        &self,
        diagnosis: &Diagnosis,
        utilities: &BTreeMap<RequirementId, f64>,
    ) -> Result<Repair, DependencyError> {
        for (&pos, c) in diagnosis.positions.iter().zip(&diagnosis.constraints) {
            if self.prioritization.get(pos) != Some(c) {
                return Err(DependencyError::InvalidDiagnosis(format!("`{c}` is not part of this prioritization")));
            }
        }
        let active: Vec<usize> =
            (0..self.prioritization.len()).filter(|i| !diagnosis.positions.contains(i)).collect();
        let utility: Vec<f64> = self
            .requirements
            .iter()
            .map(|r| utilities.get(r).copied().unwrap_or(f64::NEG_INFINITY))
            .collect();
        let order = topological_order(
            self.requirements.len(),
            self.dep_edges.iter().copied().chain(active.iter().map(|&i| self.prio_edges[i])),
            |a, b| utility[a].total_cmp(&utility[b]).then_with(|| b.cmp(&a)),
        )
        .ok_or_else(|| DependencyError::InvalidDiagnosis("deleting it does not restore consistency".into()))?;

        let mut position = vec![0; order.len()];
        for (p, &r) in order.iter().enumerate() {
            position[r] = p;
        }
        let flipped_constraints = diagnosis
            .positions
            .iter()
            .filter(|&&i| {
                let (a, b) = self.prio_edges[i];
                position[b] < position[a]
            })
            .map(|&i| {
                let c = &self.prioritization[i];
                PrecedenceConstraint::prio(format!("{}-flip", c.label), c.after.clone(), c.before.clone())
            })
            .collect();
        Ok(Repair {
            diagnosis: diagnosis.clone(),
            replacement_order: order.into_iter().map(|i| self.requirements[i].clone()).collect(),
            flipped_constraints,
        })
    }

    /// Number of constraints from the dependencies and the `active`
    /// prioritization positions that `order` violates.
    pub fn violations(&self, order: &[RequirementId], active: &[usize]) -> usize {
        let pos: BTreeMap<&RequirementId, usize> = order.iter().enumerate().map(|(i, r)| (r, i)).collect();
        self.dependencies
            .iter()
            .chain(active.iter().map(|&i| &self.prioritization[i]))
            .filter(|c| match (pos.get(&c.before), pos.get(&c.after)) {
                (Some(a), Some(b)) => a >= b,
                _ => true,
            })
            .count()
    }

    pub fn index_of(&self, requirement: &RequirementId) -> Option<usize> {
        self.index.get(requirement).copied()
    }
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    small.iter().all(|x| big.binary_search(x).is_ok())
}

fn is_disjoint(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_err())
}

// Kahn's algorithm. `prefer(a, b) == Greater` means `a` is emitted before `b`
// when both are free.
fn topological_order<F>(n: usize, edges: impl Iterator<Item = (usize, usize)>, prefer: F) -> Option<Vec<usize>>
where
    F: Fn(usize, usize) -> Ordering,
{
    let mut succ = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for (a, b) in edges {
        succ[a].push(b);
        indegree[b] += 1;
    }
    let mut ready: BinaryHeap<HeapEntry<'_, F>> = BinaryHeap::new();
    for (i, d) in indegree.iter().enumerate() {
        if *d == 0 {
            ready.push(HeapEntry { node: i, prefer: &prefer });
        }
    }
    let mut order = Vec::with_capacity(n);
    while let Some(HeapEntry { node, .. }) = ready.pop() {
        order.push(node);
        for &next in &succ[node] {
            indegree[next] -= 1;
            if indegree[next] == 0 {
                ready.push(HeapEntry { node: next, prefer: &prefer });
            }
        }
    }
    (order.len() == n).then_some(order)
}

struct HeapEntry<'a, F> {
    node: usize,
    prefer: &'a F,
}

impl<F: Fn(usize, usize) -> Ordering> PartialEq for HeapEntry<'_, F> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<F: Fn(usize, usize) -> Ordering> Eq for HeapEntry<'_, F> {}

impl<F: Fn(usize, usize) -> Ordering> PartialOrd for HeapEntry<'_, F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<F: Fn(usize, usize) -> Ordering> Ord for HeapEntry<'_, F> {
    fn cmp(&self, other: &Self) -> Ordering {
        // node index breaks remaining ties: smaller index first
        (self.prefer)(self.node, other.node).then_with(|| other.node.cmp(&self.node))
    }
}

/// A directed cycle in the graph, if any, as the list of its nodes.
fn find_cycle(n: usize, edges: &[(usize, usize)]) -> Option<Vec<usize>> {
    let mut succ = vec![Vec::new(); n];
    for &(a, b) in edges {
        succ[a].push(b);
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let mut mark = vec![Mark::New; n];
    for start in 0..n {
        if mark[start] != Mark::New {
            continue;
        }
        // (node, next successor index)
        let mut stack = vec![(start, 0usize)];
        mark[start] = Mark::Active;
        while let Some(&mut (node, ref mut i)) = stack.last_mut() {
            if let Some(&next) = succ[node].get(*i) {
                *i += 1;
                match mark[next] {
                    Mark::New => {
                        mark[next] = Mark::Active;
                        stack.push((next, 0));
                    }
                    Mark::Active => {
                        let from = stack.iter().position(|(v, _)| *v == next).expect("active node is on the stack");
                        return Some(stack[from..].iter().map(|(v, _)| *v).collect());
                    }
                    Mark::Done => {}
                }
            } else {
                mark[node] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}

/// Number of distinct requirements that transitively wait for `requirement`.
pub fn blocking_factor(
    dependencies: &[PrecedenceConstraint],
    requirement: &RequirementId,
) -> Result<usize, DependencyError> {
    Ok(blocking_factors(dependencies)?.get(requirement).copied().unwrap_or(0))
}

/// [`blocking_factor`] of every requirement named by `dependencies`.
pub fn blocking_factors(
    dependencies: &[PrecedenceConstraint],
) -> Result<BTreeMap<RequirementId, usize>, DependencyError> {
    let ids: Vec<RequirementId> = dependencies
        .iter()
        .flat_map(|c| [c.before.clone(), c.after.clone()])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<&RequirementId, usize> = ids.iter().enumerate().map(|(i, r)| (r, i)).collect();
    let edges: Vec<(usize, usize)> = dependencies.iter().map(|c| (index[&c.before], index[&c.after])).collect();
    if let Some(cycle) = find_cycle(ids.len(), &edges) {
        return Err(DependencyError::CyclicDependencies { cycle: cycle.into_iter().map(|i| ids[i].clone()).collect() });
    }
    let mut succ = vec![Vec::new(); ids.len()];
    for (a, b) in edges {
        succ[a].push(b);
    }
    let mut out = BTreeMap::new();
    for (start, id) in ids.iter().enumerate() {
        let mut seen = vec![false; ids.len()];
        let mut queue = VecDeque::from([start]);
        let mut count = 0;
        while let Some(v) = queue.pop_front() {
            for &w in &succ[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        out.insert(id.clone(), count);
    }
    Ok(out)
}
