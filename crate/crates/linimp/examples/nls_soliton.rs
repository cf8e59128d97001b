//! Order-2 comparison on the 1D cubic NLS soliton: linearly implicit methods
//! (uniform and Gauss nodes) against Crank-Nicolson and Strang splitting.
//! Errors are measured against a same-grid fine-step Gauss reference so the
//! spatial discretization floor does not mask the time-stepping error.
//!
//! Run with: cargo run --release --example nls_soliton

use linimp::bench::{run_convergence, ExperimentPlan};
use std::path::Path;

fn main() {
    let plan_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../plans/ordre2_NLS1Dsoliton.toml");
    let plan = ExperimentPlan::from_toml_file(&plan_path).unwrap();
    println!("plan '{}': {} methods x {} step sizes", plan.name, plan.methods.len(), plan.h.len());
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
    println!();
    for s in &report.slopes {
        match s.slope {
            Some(v) => println!("{:16} slope {v:.3}", s.method),
            None => println!("{:16} slope unavailable", s.method),
        }
    }
    println!("\n(the Gauss-node variant superconverges beyond order 2 on finer grids)");
}
