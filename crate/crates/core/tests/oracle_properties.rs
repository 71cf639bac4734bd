mod common;

use common::suite;

#[test]
fn random_cases_match_the_reference() {
    let summary = suite::run(1000..1120).unwrap_or_else(|m| panic!("{m}"));
    println!("{summary:?}");
    assert_eq!(summary.cases, 120);
    assert!(summary.nonempty_selections > 80, "{summary:?}");
    assert!(summary.multi_rule > 30, "{summary:?}");
}
