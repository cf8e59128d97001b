//! NLS on the 2D composite (non-rectangular) domain: domain bookkeeping and
//! a small convergence run comparing the Gauss-node order-2 method with
//! Crank-Nicolson and Strang splitting.
//!
//! Run with: cargo run --release --example nls_2d_domain

use linimp::bench::fit_slope;
use linimp::collocation::NodeSet;
use linimp::integrator::{integrate, GammaInit, IntegrateOptions};
use linimp::method::LinearlyImplicitMethod;
use linimp::problems::{nls_2d, CompositeGrid2D};
use linimp::reference::{integrate_reference, RefMethod};
use linimp::scalar::weighted_l2_dist;

fn main() {
    for j in [5, 10, 50] {
        println!(
            "J = {j:3}: {} unknowns",
            CompositeGrid2D::unknown_count_formula(2, 3, j)
        );
    }

    let problem = nls_2d(5);
    println!("\nrunning J = 5 ({} unknowns), T = 0.5", problem.dim());
    let t_final = 0.5;
    let hs: Vec<f64> = (0..4).map(|k| 1.25e-3 / f64::powi(2.0, k)).collect();
    let (_, uref) =
        integrate_reference(RefMethod::Gauss(5), &problem, hs.last().unwrap() / 10.0, t_final, 2)
            .unwrap();
    for name in ["linimp:2:gauss", "crank-nicolson", "strang"] {
        let mut pts = Vec::new();
        for &h in &hs {
            let u = match name {
                "linimp:2:gauss" => integrate(
                    &LinearlyImplicitMethod::order2(NodeSet::gauss(2)),
                    &problem,
                    GammaInit::BackwardReference,
                    h,
                    t_final,
                    &IntegrateOptions::default(),
                )
                .unwrap()
                .state
                .u,
                _ => integrate_reference(name.parse::<RefMethod>().unwrap(), &problem, h, t_final, 2)
                    .unwrap()
                    .1,
            };
            let e = weighted_l2_dist(&u, &uref, problem.weight);
            println!("{name:16} h={h:.4e}  err={e:.4e}");
            pts.push((h, e));
        }
        if let Ok((s, _)) = fit_slope(&pts) {
            println!("{name:16} slope {s:.3}\n");
        }
    }
}
