//! Construct a method from scratch: collocation tableau on chosen nodes plus
//! the auxiliary recurrence (D, theta) realizing a prescribed spectrum, with
//! the consistency relation checked at several step sizes.
//!
//! Run with: cargo run --example tableau_and_lift

use linimp::collocation::{build_tableau, verify_order_conditions, Mode, NodeSet};
use linimp::lift::{check_consistency, solve_placement, SpectrumSpec};
use linimp::rational::rat;
use num_complex::Complex64;

fn main() {
    // Uniform nodes, rational spectrum: the exact rational path is available.
    let nodes = NodeSet::uniform(2);
    let tableau = build_tableau(&nodes, Mode::ExactRational).unwrap();
    println!("tableau (uniform, s=2):\n{}\n", tableau.to_json());
    let order = verify_order_conditions(&tableau, 4);
    println!("order conditions satisfied up to {:?}\n", order);

    let spectrum = SpectrumSpec::from_rational(vec![rat(1, 2), rat(-1, 2)]).unwrap();
    let lift = solve_placement(&nodes, &spectrum).unwrap();
    println!("lift (lambda = 1/2, -1/2):\n{}\n", lift.to_json());
    let report = check_consistency(&lift, &nodes, &[1.0, 0.1, 0.01]);
    println!("consistency: pass={} residuals={:?}\n", report.pass, report.residuals);

    // A complex conjugation-closed spectrum on Gauss nodes: float path.
    let nodes = NodeSet::gauss(3);
    let spectrum = SpectrumSpec::new(vec![
        Complex64::new(0.2, 0.0),
        Complex64::new(0.1, 0.4),
        Complex64::new(0.1, -0.4),
    ])
    .unwrap();
    let lift = solve_placement(&nodes, &spectrum).unwrap();
    println!("lift (gauss s=3, complex spectrum):\n{}", lift.to_json());
    println!(
        "spectral radius {:.4}, stability {:?}",
        lift.spectral_radius(),
        lift.stability
    );
}
