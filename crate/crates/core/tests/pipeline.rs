//! Learn and predict against a naive reimplementation on small random instances.

mod common;

#[test]
fn learn_and_predict_match_naive_reference() {
    let report = common::bruteforce_equivalence(50);
    assert_eq!(report.mismatches, 0, "{report:?}");
    assert_eq!(report.instances, 50);
    assert!(report.threshold_instances > 0 && report.wta_instances > 0);
}
