mod support;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use reqprio_core::model::DimensionId;
use reqprio_core::utility::{group_report, rank, single_report, utility_group};
use reqprio_core::{validate_project, RequirementId};
use support::{random_project, reference_group_utility};

fn dimension_ids(p: &reqprio_core::Project) -> Vec<DimensionId> {
    p.dimensions.iter().map(|d| d.id.clone()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_projects_are_valid(seed in any::<u64>()) {
        let p = random_project(&mut StdRng::seed_from_u64(seed), 5, 4, 4);
        prop_assert_eq!(validate_project(&p), vec![]);
    }

    #[test]
    fn group_utility_matches_triple_loop(seed in any::<u64>()) {
        let p = random_project(&mut StdRng::seed_from_u64(seed), 5, 4, 4);
        let dims = dimension_ids(&p);
        for r in &p.requirements {
            let u = utility_group(&r.id, &dims, &p.stakeholders, &p.evaluations).unwrap();
            prop_assert!((u - reference_group_utility(&p, &r.id)).abs() < 1e-9);
        }
    }

    #[test]
    fn reports_recompute_from_contributions(seed in any::<u64>()) {
        let p = random_project(&mut StdRng::seed_from_u64(seed), 5, 4, 4);
        prop_assert!(group_report(&p).unwrap().max_recompute_error() < 1e-9);
        let s = p.stakeholders[0].id.clone();
        prop_assert!(single_report(&p, Some(&s)).unwrap().max_recompute_error() < 1e-9);
    }

    #[test]
    fn positive_weight_scaling_keeps_ranks(seed in any::<u64>(), c in 0.01f64..100.0) {
        let p = random_project(&mut StdRng::seed_from_u64(seed), 5, 4, 4);
        let base = group_report(&p).unwrap();
        let mut scaled = p.clone();
        for s in &mut scaled.stakeholders {
            s.dimension_weights.values_mut().for_each(|w| *w *= c);
        }
        let after = group_report(&scaled).unwrap();
        for (r, u) in &base.utilities {
            prop_assert!((after.utilities[r] - c * u).abs() <= 1e-9 * (1.0 + c * u.abs()));
        }
        prop_assert_eq!(after.ranking.ranks, base.ranking.ranks);
    }

    #[test]
    fn stakeholder_order_is_irrelevant(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let p = random_project(&mut rng, 5, 4, 4);
        let mut shuffled = p.clone();
        rand::seq::SliceRandom::shuffle(&mut shuffled.stakeholders[..], &mut rng);
        let dims = dimension_ids(&p);
        for r in &p.requirements {
            let a = utility_group(&r.id, &dims, &p.stakeholders, &p.evaluations).unwrap();
            let b = utility_group(&r.id, &dims, &shuffled.stakeholders, &shuffled.evaluations).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }
        prop_assert_eq!(group_report(&p).unwrap().ranking.ranks, group_report(&shuffled).unwrap().ranking.ranks);
    }

    #[test]
    fn raising_an_evaluation_raises_utility(seed in any::<u64>(), bump in 0.5f64..5.0) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut p = random_project(&mut rng, 5, 4, 4);
        for s in &mut p.stakeholders {
            // strictly positive weights and expertise
            s.dimension_expertise.clear();
            s.dimension_weights.values_mut().for_each(|w| *w = 0.25);
        }
        let base = group_report(&p).unwrap();
        let r = p.requirements[rng.gen_range(0..p.requirements.len())].id.clone();
        let d = p.dimensions[rng.gen_range(0..p.dimensions.len())].id.clone();
        let s = p.stakeholders[rng.gen_range(0..p.stakeholders.len())].id.clone();
        let old = p.evaluations.get(&d, &r, &s).unwrap();
        p.evaluations.insert(d, r.clone(), s, old + bump);
        let after = group_report(&p).unwrap();
        prop_assert!(after.utilities[&r] > base.utilities[&r]);
        prop_assert!(after.ranking.ranks[&r] <= base.ranking.ranks[&r]);
    }

    #[test]
    fn competition_ranking(values in prop::collection::vec(0u8..5, 1..10)) {
        let utilities: BTreeMap<RequirementId, f64> =
            values.iter().enumerate().map(|(i, v)| (RequirementId::new(format!("r{i:02}")), *v as f64)).collect();
        let ranking = rank(&utilities).unwrap();
        for (r, u) in &utilities {
            let better = utilities.values().filter(|x| *x > u).count() as u32;
            prop_assert_eq!(ranking.ranks[r], better + 1);
        }
        for w in ranking.order.windows(2) {
            let (a, b) = (utilities[&w[0]], utilities[&w[1]]);
            prop_assert!(a > b || (a == b && w[0] < w[1]));
        }
    }
}
