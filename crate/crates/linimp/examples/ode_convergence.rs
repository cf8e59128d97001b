//! Convergence study of the preset methods (orders 1, 2, 4, 6) on the scalar
//! ODE u' = -u - u^2 with exact gamma initialization.
//!
//! Run with: cargo run --release --example ode_convergence

use linimp::bench::fit_slope;
use linimp::collocation::NodeSet;
use linimp::integrator::{integrate_observed, GammaInit, IntegrateOptions};
use linimp::method::LinearlyImplicitMethod;
use linimp::problems::scalar_ode;

fn main() {
    let problem = scalar_ode(1.0 / 3.0);
    let cases: Vec<(String, LinearlyImplicitMethod, f64)> = vec![
        ("linimp:1".into(), LinearlyImplicitMethod::order1(), 1.0),
        (
            "linimp:2:uniform".into(),
            LinearlyImplicitMethod::order2(NodeSet::uniform(2)),
            2.0,
        ),
        (
            "linimp:2:gauss".into(),
            LinearlyImplicitMethod::order2(NodeSet::gauss(2)),
            2.0,
        ),
        (
            "linimp:4".into(),
            LinearlyImplicitMethod::order4(NodeSet::uniform(4)),
            4.0,
        ),
        (
            "linimp:6".into(),
            LinearlyImplicitMethod::order6(NodeSet::uniform(6)),
            6.0,
        ),
    ];
    let t_final = 2.0;
    for (name, method, nominal) in &cases {
        let mut pts = Vec::new();
        let (h0, levels) = match *nominal as usize {
            6 => (0.4, 5),
            4 => (0.025, 5),
            _ => (0.05, 6),
        };
        for k in 0..levels {
            let h = h0 / f64::powi(2.0, k);
            let mut max_err: f64 = 0.0;
            let exact = problem.exact.clone().unwrap();
            let res = integrate_observed(
                method,
                &problem,
                GammaInit::Exact,
                h,
                t_final,
                &IntegrateOptions::default(),
                &mut |state| {
                    let e = (state.u[0] - exact(state.t)[0]).abs();
                    max_err = max_err.max(e);
                },
            )
            .unwrap();
            let _ = res;
            pts.push((h, max_err));
            println!("{name:18} h={h:.3e}  max_err={max_err:.3e}");
        }
        match fit_slope(&pts) {
            Ok((slope, resid)) => {
                println!("{name:18} slope={slope:.3} (nominal {nominal}) residual={resid:.2}\n")
            }
            Err(e) => println!("{name:18} slope unavailable: {e}\n"),
        }
    }
}
