//! Small reference projects: the single-user, group, issue-tracker and
//! dependency scenarios used throughout the tests and the README.

use crate::model::{
    InterestDimension, PrecedenceConstraint, Prioritization, Project, Requirement, Stakeholder,
};

const TRADE_OFF: [&str; 3] = ["profit", "risk", "effort"];

/// Three requirements evaluated by one stakeholder on profit, risk and effort.
pub fn single_user_project() -> Project {
    let mut p = Project {
        name: "single-user".into(),
        dimensions: TRADE_OFF.iter().map(|d| InterestDimension::manual(*d)).collect(),
        requirements: ["r1", "r2", "r3"].into_iter().map(Requirement::new).collect(),
        ..Project::default()
    };
    let mut s = Stakeholder::new("s1");
    for (d, w) in TRADE_OFF.iter().zip([0.3, 0.5, 0.2]) {
        s.dimension_weights.insert((*d).into(), w);
    }
    p.stakeholders.push(s);
    let table = [[10.0, 5.0, 4.0], [7.0, 2.0, 8.0], [2.0, 3.0, 7.0]];
    for (d, row) in TRADE_OFF.iter().zip(table) {
        for (r, v) in ["r1", "r2", "r3"].iter().zip(row) {
            p.evaluations.insert(*d, *r, "s1", v);
        }
    }
    p
}

/// Three stakeholders evaluating and weighting the same three requirements.
pub fn group_project() -> Project {
    let mut p = Project {
        name: "group".into(),
        dimensions: TRADE_OFF.iter().map(|d| InterestDimension::manual(*d)).collect(),
        requirements: ["r1", "r2", "r3"].into_iter().map(Requirement::new).collect(),
        ..Project::default()
    };
    let weights = [[0.5, 0.3, 0.2], [0.3, 0.6, 0.1], [0.6, 0.3, 0.1]];
    for (sid, w) in ["s1", "s2", "s3"].iter().zip(weights) {
        let mut s = Stakeholder::new(*sid);
        for (d, v) in TRADE_OFF.iter().zip(w) {
            s.dimension_weights.insert((*d).into(), v);
        }
        p.stakeholders.push(s);
    }
    // evals[requirement][dimension][stakeholder]
    let evals = [
        [[5.0, 2.0, 2.0], [3.0, 3.0, 4.0], [2.0, 3.0, 2.0]],
        [[5.0, 1.0, 2.0], [2.0, 5.0, 6.0], [3.0, 4.0, 2.0]],
        [[2.0, 2.0, 6.0], [3.0, 2.0, 2.0], [5.0, 6.0, 2.0]],
    ];
    for (r, per_dim) in ["r1", "r2", "r3"].iter().zip(evals) {
        for (d, per_s) in TRADE_OFF.iter().zip(per_dim) {
            for (s, v) in ["s1", "s2", "s3"].iter().zip(per_s) {
                p.evaluations.insert(*d, *r, *s, v);
            }
        }
    }
    p
}

pub use crate::oss::TRACKER_DIMENSIONS;

/// Three bugs with tracker activity counts and one contributor whose
/// per-bug weights are supplied directly.
pub fn bugzilla_project() -> Project {
    let counts = [[5, 3, 2, 2], [2, 3, 3, 3], [2, 4, 2, 2]];
    let requirements = ["r1", "r2", "r3"]
        .iter()
        .zip(counts)
        .map(|(id, c)| {
            TRACKER_DIMENSIONS
                .iter()
                .zip(c)
                .fold(Requirement::new(*id), |r, (d, n)| r.with_metric(*d, n))
        })
        .collect();
    let mut s = Stakeholder::new("s1");
    for (r, w) in ["r1", "r2", "r3"].iter().zip([0.5, 0.3, 0.2]) {
        s.requirement_weights.insert((*r).into(), w);
    }
    Project {
        name: "bugzilla".into(),
        dimensions: TRACKER_DIMENSIONS.iter().map(|d| InterestDimension::metric(*d)).collect(),
        requirements,
        stakeholders: vec![s],
        ..Project::default()
    }
}

/// Six requirements prioritized r1..r6 while r3 must precede r1 and r2.
pub fn dependency_project() -> Project {
    let ids = ["r1", "r2", "r3", "r4", "r5", "r6"];
    Project {
        name: "dependencies".into(),
        requirements: ids.into_iter().map(Requirement::new).collect(),
        dependencies: vec![
            PrecedenceConstraint::dep("dep1", "r3", "r1"),
            PrecedenceConstraint::dep("dep2", "r3", "r2"),
        ],
        prioritization: Some(Prioritization {
            order: ids.into_iter().map(Into::into).collect(),
            note: String::new(),
        }),
        ..Project::default()
    }
}
