//! Comparison integrators: explicit/implicit Euler, implicit midpoint, RK2,
//! Crank–Nicolson, Lie and Strang splitting with Cayley linear substeps, and
//! a fully implicit Gauss collocation method used as the reference-solution
//! generator (5 stages, order 10).
//!
//! Implicit equations are solved by semi-implicit fixed-point iteration: the
//! linear part is folded into a banded factorization computed once per run
//! (the step size is constant), and only the nonlinear term is iterated.

use crate::band::{BandLu, BandMatrix};
use crate::collocation::{build_tableau, CollocationTableau, Mode, NodeSet};
use crate::error::LinimpError;
use crate::integrator::Trajectory;
use crate::problem::EvolutionProblem;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug)]
pub struct NewtonConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            tolerance: 1e-13,
            max_iterations: 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefMethod {
    EulerExplicit,
    EulerImplicit,
    Midpoint,
    Rk2,
    CrankNicolson,
    Lie,
    Strang,
    /// Gauss collocation with the given stage count (5 stages = order 10).
    Gauss(usize),
}

impl std::str::FromStr for RefMethod {
    type Err = LinimpError;
    fn from_str(s: &str) -> Result<Self, LinimpError> {
        match s {
            "euler-exp" => Ok(RefMethod::EulerExplicit),
            "euler-imp" => Ok(RefMethod::EulerImplicit),
            "midpoint" => Ok(RefMethod::Midpoint),
            "rk2" => Ok(RefMethod::Rk2),
            "crank-nicolson" => Ok(RefMethod::CrankNicolson),
            "lie" => Ok(RefMethod::Lie),
            "strang" => Ok(RefMethod::Strang),
            "gauss10" => Ok(RefMethod::Gauss(5)),
            other => Err(LinimpError::InvalidPlan(format!(
                "unknown reference method '{other}'"
            ))),
        }
    }
}

/// (I + dt/2 L)(I - dt/2 L)^{-1}, the Cayley approximation of e^{dt L}.
/// Unitary when L is skew-adjoint (the NLS case).
pub struct Cayley<S: Scalar> {
    plus: BandMatrix<S>,
    lu: BandLu<S>,
}

impl<S: Scalar> Cayley<S> {
    pub fn new(l: &BandMatrix<S>, dt: f64) -> Result<Self, LinimpError> {
        let mut plus = l.map(|v| v.scale(dt / 2.0));
        let mut minus = l.map(|v| v.scale(-dt / 2.0));
        for i in 0..l.n() {
            plus.add_to(i, i, S::one());
            minus.add_to(i, i, S::one());
        }
        Ok(Cayley {
            plus,
            lu: minus.lu()?,
        })
    }

    pub fn apply(&self, v: &[S]) -> Vec<S> {
        self.lu.solve(&self.plus.matvec(v))
    }
}

/// Fixed-point loop x <- g(x); converges when the linear stiffness has been
/// folded into g and h times the nonlinear Lipschitz constant is small.
fn fixed_point<S: Scalar>(
    mut x: Vec<S>,
    cfg: &NewtonConfig,
    mut g: impl FnMut(&[S]) -> Vec<S>,
) -> Result<Vec<S>, LinimpError> {
    for _ in 0..cfg.max_iterations {
        let next = g(&x);
        let scale = 1.0 + crate::scalar::max_norm(&next);
        let diff = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (*a - *b).modulus())
            .fold(0.0, f64::max);
        x = next;
        if !x.iter().all(|v| v.is_finite_val()) {
            return Err(LinimpError::NonlinearSolveFailure(
                "iterate diverged to non-finite values".into(),
            ));
        }
        if diff <= cfg.tolerance * scale {
            return Ok(x);
        }
    }
    Err(LinimpError::NonlinearSolveFailure(format!(
        "no convergence within {} iterations",
        cfg.max_iterations
    )))
}

/// Fully implicit Gauss collocation stepper with the coupled stage system
/// pre-factored: (I - h A (x) L) X = stack(u) + h (A (x) I) (N(U) ∘ U).
pub struct GaussStepper<'p, S: Scalar> {
    problem: &'p EvolutionProblem<S>,
    tableau: CollocationTableau,
    lu: BandLu<S>,
    h: f64,
    cfg: NewtonConfig,
}

impl<'p, S: Scalar> GaussStepper<'p, S> {
    pub fn new(
        problem: &'p EvolutionProblem<S>,
        stages: usize,
        h: f64,
        cfg: NewtonConfig,
    ) -> Result<Self, LinimpError> {
        let tableau = build_tableau(&NodeSet::gauss(stages), Mode::Float)?;
        let s = stages;
        let n = problem.dim();
        let l = &problem.linear;
        let mut sys = BandMatrix::<S>::zeros(s * n, s * l.kl() + (s - 1), s * l.ku() + (s - 1));
        for row in 0..s * n {
            sys.set(row, row, S::one());
        }
        for i in 0..s {
            for j in 0..s {
                let haij = h * tableau.a[i][j];
                if haij == 0.0 {
                    continue;
                }
                for (k, kp, v) in l.entries() {
                    if v != S::zero() {
                        sys.add_to(k * s + i, kp * s + j, v.scale(-haij));
                    }
                }
            }
        }
        Ok(GaussStepper {
            problem,
            tableau,
            lu: sys.lu()?,
            h,
            cfg,
        })
    }

    pub fn step(&self, u: &[S]) -> Result<Vec<S>, LinimpError> {
        let s = self.tableau.s();
        let n = u.len();
        let mut x0 = vec![S::zero(); s * n];
        for k in 0..n {
            for i in 0..s {
                x0[k * s + i] = u[k];
            }
        }
        let x = fixed_point(x0, &self.cfg, |x| {
            // nonlinear part of each stage: w_j = N(U_j) ∘ U_j
            let mut w = vec![vec![S::zero(); n]; s];
            for (j, wj) in w.iter_mut().enumerate() {
                let uj: Vec<S> = (0..n).map(|k| x[k * s + j]).collect();
                let nj = self.problem.multiplier(&uj);
                for k in 0..n {
                    wj[k] = nj[k] * uj[k];
                }
            }
            let mut rhs = vec![S::zero(); s * n];
            for k in 0..n {
                for i in 0..s {
                    let mut acc = u[k];
                    for (j, wj) in w.iter().enumerate() {
                        acc += wj[k].scale(self.h * self.tableau.a[i][j]);
                    }
                    rhs[k * s + i] = acc;
                }
            }
            self.lu.solve(&rhs)
        })?;
        let mut out = u.to_vec();
        for i in 0..s {
            let ui: Vec<S> = (0..n).map(|k| x[k * s + i]).collect();
            let fi = self.problem.rhs(&ui);
            let hb = self.h * self.tableau.b[i];
            for (ok, fk) in out.iter_mut().zip(&fi) {
                *ok += fk.scale(hb);
            }
        }
        Ok(out)
    }
}

/// Integrate from `u0` over the signed time span with `n_sub` Gauss substeps.
/// Used by the gamma initialization strategies and by reference generation.
pub fn gauss_segment<S: Scalar>(
    problem: &EvolutionProblem<S>,
    u0: &[S],
    span: f64,
    n_sub: usize,
) -> Result<Vec<S>, LinimpError> {
    let h = span / n_sub as f64;
    let stepper = GaussStepper::new(problem, 5, h, NewtonConfig::default())?;
    let mut u = u0.to_vec();
    for _ in 0..n_sub {
        u = stepper.step(&u)?;
    }
    Ok(u)
}

/// Run a reference method with constant step h over [0, T]; returns the
/// decimated trajectory and the final state.
pub fn integrate_reference<S: Scalar>(
    method: RefMethod,
    problem: &EvolutionProblem<S>,
    h: f64,
    t_final: f64,
    max_snapshots: usize,
) -> Result<(Trajectory<S>, Vec<S>), LinimpError> {
    assert!(h > 0.0 && t_final > 0.0);
    let cfg = NewtonConfig::default();
    let n_steps = (t_final / h).round().max(1.0) as usize;
    let l = &problem.linear;

    // Strang is run as its conjugation with Lie: e^{ihB/2} Lie^k e^{-ihB/2},
    // with every exponential in Cayley form.
    let (pre, post): (Option<Cayley<S>>, Option<Cayley<S>>) = if method == RefMethod::Strang {
        (Some(Cayley::new(l, -h / 2.0)?), Some(Cayley::new(l, h / 2.0)?))
    } else {
        (None, None)
    };

    let mut stepper = make_stepper(method, problem, h, cfg)?;

    let mut u = problem.initial.clone();
    if let Some(c) = &pre {
        u = c.apply(&u);
    }
    let stride = (n_steps + 1).div_ceil(max_snapshots).max(1);
    let mut traj = Trajectory::default();
    let unconjugate = |v: &[S]| -> Vec<S> {
        match &post {
            Some(c) => c.apply(v),
            None => v.to_vec(),
        }
    };
    traj.times.push(0.0);
    traj.states.push(unconjugate(&u));
    for step in 1..=n_steps {
        u = stepper(&u)?;
        if u.iter().any(|v| !v.is_finite_val()) {
            return Err(LinimpError::BlowupDetected { step });
        }
        if step % stride == 0 || step == n_steps {
            traj.times.push(step as f64 * h);
            traj.states.push(unconjugate(&u));
        }
    }
    let final_u = unconjugate(&u);
    Ok((traj, final_u))
}

type StepFn<'a, S> = Box<dyn FnMut(&[S]) -> Result<Vec<S>, LinimpError> + 'a>;

fn make_stepper<'a, S: Scalar>(
    method: RefMethod,
    problem: &'a EvolutionProblem<S>,
    h: f64,
    cfg: NewtonConfig,
) -> Result<StepFn<'a, S>, LinimpError> {
    let l = &problem.linear;
    let identity_minus = |dt: f64| -> Result<BandLu<S>, LinimpError> {
        let mut m = l.map(|v| v.scale(-dt));
        for i in 0..l.n() {
            m.add_to(i, i, S::one());
        }
        m.lu()
    };
    Ok(match method {
        RefMethod::EulerExplicit => Box::new(move |u: &[S]| {
            let f = problem.rhs(u);
            Ok(u.iter().zip(f).map(|(ui, fi)| *ui + fi.scale(h)).collect())
        }),
        RefMethod::Rk2 => Box::new(move |u: &[S]| {
            // c = (0, 1/2), b = (0, 1)
            let k1 = problem.rhs(u);
            let mid: Vec<S> = u
                .iter()
                .zip(k1)
                .map(|(ui, ki)| *ui + ki.scale(h / 2.0))
                .collect();
            let k2 = problem.rhs(&mid);
            Ok(u.iter().zip(k2).map(|(ui, ki)| *ui + ki.scale(h)).collect())
        }),
        RefMethod::EulerImplicit => {
            let lu = identity_minus(h)?;
            Box::new(move |u: &[S]| {
                // (I - hL) u+ = u + h N(u+) ∘ u+
                fixed_point(u.to_vec(), &cfg, |x| {
                    let nx = problem.multiplier(x);
                    let rhs: Vec<S> = u
                        .iter()
                        .zip(nx.iter().zip(x))
                        .map(|(ui, (ni, xi))| *ui + (*ni * *xi).scale(h))
                        .collect();
                    lu.solve(&rhs)
                })
            })
        }
        RefMethod::Midpoint => {
            let lu = identity_minus(h / 2.0)?;
            Box::new(move |u: &[S]| {
                // v = (u + u+)/2 solves (I - h/2 L) v = u + h/2 N(v) ∘ v
                let v = fixed_point(u.to_vec(), &cfg, |x| {
                    let nx = problem.multiplier(x);
                    let rhs: Vec<S> = u
                        .iter()
                        .zip(nx.iter().zip(x))
                        .map(|(ui, (ni, xi))| *ui + (*ni * *xi).scale(h / 2.0))
                        .collect();
                    lu.solve(&rhs)
                })?;
                Ok(v.iter().zip(u).map(|(vi, ui)| vi.scale(2.0) - *ui).collect())
            })
        }
        RefMethod::CrankNicolson => {
            // (I - h/2 L) u+ = (I + h/2 L) u + h gbar(u, u+), with the
            // Delfour–Fortin–Payre average
            // gbar = (N(u+) + N(u))/2 ∘ (u + u+)/2.
            let lu = identity_minus(h / 2.0)?;
            let mut plus = l.map(|v| v.scale(h / 2.0));
            for i in 0..l.n() {
                plus.add_to(i, i, S::one());
            }
            Box::new(move |u: &[S]| {
                let nu = problem.multiplier(u);
                let base = plus.matvec(u);
                fixed_point(u.to_vec(), &cfg, |x| {
                    let nx = problem.multiplier(x);
                    let rhs: Vec<S> = (0..u.len())
                        .map(|k| {
                            let navg = (nu[k] + nx[k]).scale(0.5);
                            let uavg = (u[k] + x[k]).scale(0.5);
                            base[k] + (navg * uavg).scale(h)
                        })
                        .collect();
                    lu.solve(&rhs)
                })
            })
        }
        RefMethod::Lie | RefMethod::Strang => {
            let split = problem.split.clone().ok_or_else(|| {
                LinimpError::InvalidPlan(format!(
                    "problem '{}' has no splitting flows",
                    problem.name
                ))
            })?;
            let cayley = if split.exact_linear_flow.is_none() {
                Some(Cayley::new(l, h)?)
            } else {
                None
            };
            Box::new(move |u: &[S]| {
                // linear substep first: Phi_h ∘ e^{hL}
                let mut v = match (&split.exact_linear_flow, &cayley) {
                    (Some(f), _) => f(h, u),
                    (None, Some(c)) => c.apply(u),
                    (None, None) => unreachable!(),
                };
                (split.nonlinear_flow)(h, &mut v);
                Ok(v)
            })
        }
        RefMethod::Gauss(stages) => {
            let stepper = GaussStepper::new(problem, stages, h, cfg)?;
            Box::new(move |u: &[S]| stepper.step(u))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::weighted_l2_norm;
    use num_complex::Complex64;
    use std::sync::Arc;

    fn scalar_ode(u0: f64) -> EvolutionProblem<f64> {
        let mut p = EvolutionProblem::new(
            "ode",
            BandMatrix::<f64>::scalar(-1.0),
            Arc::new(|u: &[f64], out: &mut [f64]| out[0] = -u[0]),
            vec![u0],
        );
        p.exact = Some(Arc::new(move |t: f64| {
            vec![1.0 / ((1.0 / u0 + 1.0) * t.exp() - 1.0)]
        }));
        p.split = Some(crate::problem::SplitProblem {
            nonlinear_flow: Arc::new(|h: f64, v: &mut [f64]| {
                for x in v {
                    *x /= 1.0 + h * *x;
                }
            }),
            exact_linear_flow: Some(Arc::new(|h: f64, v: &[f64]| {
                v.iter().map(|x| x * (-h).exp()).collect()
            })),
        });
        p
    }

    #[test]
    fn implicit_euler_linear_closed_form() {
        // u' = lambda u: step is u / (1 - h lambda)
        let lam = -2.5;
        let p = EvolutionProblem::new(
            "lin",
            BandMatrix::<f64>::scalar(lam),
            Arc::new(|_: &[f64], out: &mut [f64]| out[0] = 0.0),
            vec![1.0],
        );
        let (_, u) = integrate_reference(RefMethod::EulerImplicit, &p, 0.1, 0.1, 10).unwrap();
        assert!((u[0] - 1.0 / (1.0 - 0.1 * lam)).abs() < 1e-14);
    }

    #[test]
    fn gauss_matches_stability_function_on_linear_problem() {
        use nalgebra::{DMatrix, DVector};
        let lam = -1.3;
        let p = EvolutionProblem::new(
            "lin",
            BandMatrix::<f64>::scalar(lam),
            Arc::new(|_: &[f64], out: &mut [f64]| out[0] = 0.0),
            vec![1.0],
        );
        let h = 0.2;
        let stepper = GaussStepper::new(&p, 5, h, NewtonConfig::default()).unwrap();
        let got = stepper.step(&[1.0]).unwrap()[0];
        let t = build_tableau(&NodeSet::gauss(5), Mode::Float).unwrap();
        let amat = DMatrix::from_fn(5, 5, |i, j| t.a[i][j]);
        let z = h * lam;
        let stages = (DMatrix::identity(5, 5) - amat * z)
            .lu()
            .solve(&DVector::from_element(5, 1.0))
            .unwrap();
        let r = 1.0 + z * t.b.iter().zip(stages.iter()).map(|(b, x)| b * x).sum::<f64>();
        assert!((got - r).abs() < 1e-13);
    }

    #[test]
    fn gauss_scalar_ode_accuracy() {
        let p = scalar_ode(1.0 / 3.0);
        let u = gauss_segment(&p, &p.initial, 0.5, 500).unwrap();
        let exact = p.exact_at(0.5).unwrap();
        assert!((u[0] - exact[0]).abs() < 1e-12);
    }

    #[test]
    fn gauss_step_is_reversible() {
        let p = scalar_ode(0.9);
        let fwd = gauss_segment(&p, &p.initial, 0.05, 1).unwrap();
        let back = gauss_segment(&p, &fwd, -0.05, 1).unwrap();
        assert!((back[0] - p.initial[0]).abs() < 1e-12);
    }

    #[test]
    fn cayley_is_unitary_for_skew_generator() {
        // L = i B with B real symmetric: Cayley map preserves the L2 norm
        let n = 64;
        let b = BandMatrix::<f64>::second_difference(n, 0.1);
        let l = b.map(|v| Complex64::new(0.0, v));
        let c = Cayley::new(&l, 0.05).unwrap();
        let v: Vec<Complex64> = (0..n)
            .map(|k| Complex64::new((k as f64 * 0.3).sin(), (k as f64 * 0.7).cos()))
            .collect();
        let w = c.apply(&v);
        assert!((weighted_l2_norm(&w, 0.1) - weighted_l2_norm(&v, 0.1)).abs() < 1e-12);
    }

    #[test]
    fn ode_reference_orders() {
        // explicit Euler ~ order 1, midpoint / rk2 / CN ~ order 2 on the ODE
        let p = scalar_ode(0.9);
        let err = |m: RefMethod, h: f64| -> f64 {
            let (_, u) = integrate_reference(m, &p, h, 1.0, 2).unwrap();
            (u[0] - p.exact_at(1.0).unwrap()[0]).abs()
        };
        for (m, order) in [
            (RefMethod::EulerExplicit, 1.0),
            (RefMethod::EulerImplicit, 1.0),
            (RefMethod::Lie, 1.0),
            (RefMethod::Midpoint, 2.0),
            (RefMethod::Rk2, 2.0),
            (RefMethod::CrankNicolson, 2.0),
            (RefMethod::Strang, 2.0),
        ] {
            let e1 = err(m, 0.01);
            let e2 = err(m, 0.005);
            let slope = (e1 / e2).log2();
            assert!(
                (slope - order).abs() < 0.25,
                "{m:?}: slope {slope} vs {order}"
            );
        }
    }

    #[test]
    fn lie_without_nonlinearity_is_pure_linear_substep() {
        let mut p = scalar_ode(0.5);
        p.split = Some(crate::problem::SplitProblem {
            nonlinear_flow: Arc::new(|_h: f64, _v: &mut [f64]| {}),
            exact_linear_flow: None,
        });
        let h = 0.2;
        let (_, u) = integrate_reference(RefMethod::Lie, &p, h, h, 2).unwrap();
        let c = Cayley::new(&p.linear, h).unwrap();
        let want = c.apply(&p.initial);
        assert!((u[0] - want[0]).abs() < 1e-14);
    }

    #[test]
    fn strang_single_step_matches_triple_product() {
        let p = scalar_ode(0.9);
        let h = 0.05;
        let (_, got) = integrate_reference(RefMethod::Strang, &p, h, h, 2).unwrap();
        // direct e^{hL/2} Phi_h e^{hL/2} with Cayley halves
        let c_half = Cayley::new(&p.linear, h / 2.0).unwrap();
        let split = p.split.clone().unwrap();
        // Strang runs Lie inside the conjugation; Lie's linear substep uses
        // the exact flow here, so mirror that: e^{+h/2} (Cayley), exact e^{-h},
        // nonlinear, e^{+h/2} (Cayley) ... the conjugated form is
        // C(h/2) ∘ [exactLin(h) ∘ NL(h)] ∘ C(-h/2)
        let c_mhalf = Cayley::new(&p.linear, -h / 2.0).unwrap();
        let mut v = c_mhalf.apply(&p.initial);
        v = (split.exact_linear_flow.as_ref().unwrap())(h, &v);
        (split.nonlinear_flow)(h, &mut v);
        let want = c_half.apply(&v);
        assert!((got[0] - want[0]).abs() < 1e-13);
    }

    #[test]
    fn nls_pointwise_flow_preserves_modulus() {
        let q = 4.0;
        let flow = move |h: f64, v: &mut [Complex64]| {
            for x in v.iter_mut() {
                *x *= Complex64::new(0.0, h * q * x.norm_sqr()).exp();
            }
        };
        let mut v = vec![Complex64::new(0.3, -0.7), Complex64::new(1.2, 0.1)];
        let before: Vec<f64> = v.iter().map(|x| x.norm()).collect();
        flow(0.37, &mut v);
        for (x, b) in v.iter().zip(before) {
            assert!((x.norm() - b).abs() < 1e-15);
        }
    }
}
