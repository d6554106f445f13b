mod support;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use reqprio_core::{fixtures, validate_project, Project};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn project_json_round_trips(seed in any::<u64>()) {
        let p = support::random_project(&mut StdRng::seed_from_u64(seed), 6, 4, 4);
        let back = Project::from_json(&p.to_json()).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(back.to_json(), p.to_json());
    }
}

#[test]
fn bundled_data_files_match_fixtures() {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data");
    let cases = [
        ("single-user.json", fixtures::single_user_project()),
        ("group.json", fixtures::group_project()),
        ("bugzilla.json", fixtures::bugzilla_project()),
        ("dependencies.json", fixtures::dependency_project()),
    ];
    for (file, expected) in cases {
        let text = std::fs::read_to_string(format!("{data}/{file}")).unwrap();
        let p = Project::from_json(&text).unwrap();
        assert_eq!(p, expected, "{file}");
        assert_eq!(validate_project(&p), vec![], "{file}");
    }
}
