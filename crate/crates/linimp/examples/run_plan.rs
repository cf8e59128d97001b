//! Run any shipped benchmark plan through the library API and write the
//! CSV/JSON/gnuplot outputs.
//!
//! Run with: cargo run --release --example run_plan -- [plan-name]
//! (default plan: ordre1_chaleur)

use linimp::bench::{run_convergence, write_outputs, ExperimentPlan};
use std::path::{Path, PathBuf};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "ordre1_chaleur".into());
    let plan_path = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../plans/{name}.toml"));
    let plan = ExperimentPlan::from_toml_file(&plan_path).unwrap();
    if plan.expensive {
        eprintln!("note: '{name}' is a publication-scale plan and may take a long time");
    }
    let report = run_convergence(&plan, true).unwrap();
    for cell in &report.cells {
        match &cell.failure {
            None => println!(
                "{:16} h={:.4e}  err={:.4e}  ({:.2}s)",
                cell.method, cell.h, cell.error, cell.seconds
            ),
            Some(f) => println!("{:16} h={:.4e}  FAILED: {f}", cell.method, cell.h),
        }
    }
    for s in &report.slopes {
        if let Some(v) = s.slope {
            println!("{:16} slope {v:.3}", s.method);
        }
    }
    let dir = PathBuf::from("bench-out").join(&plan.name);
    write_outputs(&report, &dir).unwrap();
    println!("wrote {}", dir.display());
}
