//! Every shipped plan file must parse and validate.

use linimp::bench::ExperimentPlan;
use std::path::PathBuf;

#[test]
fn shipped_plans_are_valid() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../plans");
    let mut seen = 0;
    let required = [
        "ordre1_EDO",
        "ordre2_EDO",
        "ordre1_NLS1Dsoliton",
        "ordre2_NLS1Dsoliton",
        "ordre2_NLS2D",
        "ordre1_chaleur",
        "NRJdecay_chaleur",
    ];
    let mut names = Vec::new();
    for entry in std::fs::read_dir(&dir).expect("plans directory") {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        let plan = ExperimentPlan::from_toml_file(&path)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(
            plan.name,
            path.file_stem().unwrap().to_str().unwrap(),
            "plan name must match its file name"
        );
        names.push(plan.name.clone());
        seen += 1;
    }
    for r in required {
        assert!(names.iter().any(|n| n == r), "missing plan {r}");
    }
    assert!(seen >= required.len());
}

#[test]
fn full_scale_plans_are_marked_expensive() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../plans");
    for stem in ["ordre2_NLS1Dsoliton_full", "ordre2_NLS2D_full"] {
        let plan = ExperimentPlan::from_toml_file(&dir.join(format!("{stem}.toml"))).unwrap();
        assert!(plan.expensive, "{stem} must be expensive");
    }
}
