//! Golden-file pins: the JSON report and the kernel CSV for the smallest
//! configuration are frozen verbatim, so any drift in computed values,
//! serialization, or record layout shows up as a diff.

use bkfourier::checks::{self, Category, GroupSel, JobConfig};
use bkfourier::groups::GroupKind;
use bkfourier::report::Report;

fn sl2_q3_config() -> JobConfig {
    JobConfig {
        groups: vec![GroupSel::Sl2],
        qs: Some(vec![3]),
        checks: Category::ALL.to_vec(),
        matrix_cap: 4096,
        stack_q_limit: 7,
        threads: 0,
        export_dir: None,
    }
}

#[test]
fn report_json_matches_golden() {
    let mut rep = checks::run(&sl2_q3_config()).unwrap();
    for r in &mut rep.records {
        r.wall_ms = 0;
    }
    let want: Report = serde_json::from_str(include_str!("golden/report_sl2_q3.json")).unwrap();
    assert_eq!(rep, want);
    // The serialized form itself is pinned too (modulo a trailing newline).
    assert_eq!(
        rep.to_json().trim_end(),
        include_str!("golden/report_sl2_q3.json").trim_end()
    );
}

#[test]
fn sl2_q3_kernel_csv_matches_golden() {
    let csv = checks::stack_kernel_csv(GroupKind::Sl2, 3, 4096).unwrap();
    assert_eq!(csv, include_str!("golden/sl2_q3_kernel.csv"));
}
