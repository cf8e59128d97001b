//! Experiment driver: declarative convergence/timing plans, slope fitting,
//! CSV/JSON/gnuplot output.

use crate::error::LinimpError;
use crate::integrator::{integrate, integrate_observed, GammaInit, IntegrateOptions};
use crate::method::LinearlyImplicitMethod;
use crate::problem::EvolutionProblem;
use crate::problems::{heat_1d, nls_1d, nls_2d, scalar_ode, Grid1D};
use crate::reference::{integrate_reference, RefMethod};
use crate::scalar::{weighted_l2_dist, Scalar};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::Instant;

/// Problem selector with parameters, as written in plan files.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "id")]
pub enum ProblemSpec {
    #[serde(rename = "ode-scalar")]
    OdeScalar { u0: f64 },
    #[serde(rename = "nls-1d")]
    Nls1d { points: usize, q: f64 },
    #[serde(rename = "nls-2d")]
    Nls2d {
        #[serde(rename = "J")]
        j: usize,
    },
    #[serde(rename = "heat-1d")]
    Heat1d { points: usize },
}

/// A built problem, over whichever scalar field it lives on.
pub enum AnyProblem {
    Real(EvolutionProblem<f64>),
    Complex(EvolutionProblem<Complex64>),
}

impl ProblemSpec {
    pub fn build(&self) -> AnyProblem {
        match *self {
            ProblemSpec::OdeScalar { u0 } => AnyProblem::Real(scalar_ode(u0)),
            ProblemSpec::Nls1d { points, q } => {
                AnyProblem::Complex(nls_1d(Grid1D::new(-50.0, 50.0, points), q))
            }
            ProblemSpec::Nls2d { j } => AnyProblem::Complex(nls_2d(j)),
            ProblemSpec::Heat1d { points } => {
                AnyProblem::Real(heat_1d(Grid1D::new(-50.0, 50.0, points)))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorMetric {
    /// Max over recorded steps of the max-norm error vs the exact solution
    /// (the ODE figures' metric; requires an exact solution).
    MaxOverSteps,
    /// Weighted L2 error at final time, vs the exact solution when available
    /// and a fine-step Gauss reference otherwise.
    #[default]
    FinalL2,
}

/// Declarative description of one convergence/timing experiment.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct ExperimentPlan {
    pub name: String,
    pub problem: ProblemSpec,
    pub methods: Vec<String>,
    /// Step sizes, strictly decreasing; at least 3 for slope fitting.
    pub h: Vec<f64>,
    pub t_final: f64,
    #[serde(default = "default_gamma_init")]
    pub gamma_init: String,
    #[serde(default)]
    pub error_metric: ErrorMetric,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub expensive: bool,
    /// Step size of the Gauss reference run; defaults to min(h)/10.
    #[serde(default)]
    pub reference_h: Option<f64>,
    /// Measure errors against the Gauss reference even when the problem has
    /// an exact solution (use when the spatial discretization error floor
    /// would mask the time-stepping error).
    #[serde(default)]
    pub reference_metric: bool,
}

fn default_gamma_init() -> String {
    "exact".into()
}

fn default_repetitions() -> usize {
    3
}

impl ExperimentPlan {
    pub fn from_toml_file(path: &Path) -> Result<Self, LinimpError> {
        let text = std::fs::read_to_string(path)?;
        let plan: ExperimentPlan = toml::from_str(&text)
            .map_err(|e| LinimpError::InvalidPlan(format!("{}: {e}", path.display())))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), LinimpError> {
        if !self.h.windows(2).all(|w| w[1] < w[0]) {
            return Err(LinimpError::InvalidPlan(
                "h schedule must be strictly decreasing".into(),
            ));
        }
        if self.h.len() < 3 && !self.methods.is_empty() {
            return Err(LinimpError::InvalidPlan(
                "need at least 3 h levels for slope fitting".into(),
            ));
        }
        if self.error_metric == ErrorMetric::MaxOverSteps {
            let has_exact = match self.problem.build() {
                AnyProblem::Real(p) => p.exact.is_some(),
                AnyProblem::Complex(p) => p.exact.is_some(),
            };
            if !has_exact {
                return Err(LinimpError::InvalidPlan(
                    "max-over-steps metric requires an exact solution".into(),
                ));
            }
        }
        if let (Some(h_ref), Some(h_min)) = (self.reference_h, self.h.last()) {
            if h_ref >= *h_min {
                return Err(LinimpError::InvalidPlan(
                    "reference_h must be smaller than the finest h".into(),
                ));
            }
        }
        self.gamma_init.parse::<GammaInit>()?;
        Ok(())
    }

    fn gamma_init(&self) -> GammaInit {
        self.gamma_init.parse().expect("validated")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CellResult {
    pub method: String,
    pub h: f64,
    pub error: f64,
    pub seconds: f64,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MethodSlope {
    pub method: String,
    pub slope: Option<f64>,
    pub residual: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub plan: String,
    pub cells: Vec<CellResult>,
    pub slopes: Vec<MethodSlope>,
}

impl ConvergenceReport {
    pub fn slope_of(&self, method: &str) -> Option<f64> {
        self.slopes
            .iter()
            .find(|s| s.method == method)
            .and_then(|s| s.slope)
    }

    pub fn errors_of(&self, method: &str) -> Vec<(f64, f64)> {
        self.cells
            .iter()
            .filter(|c| c.method == method && c.failure.is_none())
            .map(|c| (c.h, c.error))
            .collect()
    }
}

/// Run one (method, h) cell and return the measured error.
fn run_cell<S: Scalar>(
    problem: &EvolutionProblem<S>,
    method: &str,
    gamma_init: GammaInit,
    h: f64,
    t_final: f64,
    metric: ErrorMetric,
    reference: Option<&[S]>,
) -> Result<f64, LinimpError> {
    let opts = IntegrateOptions::default();
    if method.starts_with("linimp") || method == "besse" {
        let m = if method == "besse" {
            LinearlyImplicitMethod::besse()
        } else {
            LinearlyImplicitMethod::parse(method)?
        };
        match metric {
            ErrorMetric::MaxOverSteps => {
                let exact = problem.exact.clone().ok_or(LinimpError::MissingExactSolution)?;
                let mut max_err: f64 = 0.0;
                integrate_observed(&m, problem, gamma_init, h, t_final, &opts, &mut |st| {
                    let target = exact(st.t);
                    let e = st
                        .u
                        .iter()
                        .zip(&target)
                        .map(|(a, b)| (*a - *b).modulus())
                        .fold(0.0, f64::max);
                    max_err = max_err.max(e);
                })?;
                Ok(max_err)
            }
            ErrorMetric::FinalL2 => {
                let r = integrate(&m, problem, gamma_init, h, t_final, &opts)?;
                final_l2_error(problem, &r.state.u, r.state.t, reference)
            }
        }
    } else {
        let rm: RefMethod = method.parse()?;
        let (traj, u_final) = integrate_reference(rm, problem, h, t_final, 100_000)?;
        match metric {
            ErrorMetric::MaxOverSteps => {
                let exact = problem.exact.clone().ok_or(LinimpError::MissingExactSolution)?;
                let mut max_err: f64 = 0.0;
                for (t, u) in traj.times.iter().zip(&traj.states) {
                    let target = exact(*t);
                    let e = u
                        .iter()
                        .zip(&target)
                        .map(|(a, b)| (*a - *b).modulus())
                        .fold(0.0, f64::max);
                    max_err = max_err.max(e);
                }
                Ok(max_err)
            }
            ErrorMetric::FinalL2 => {
                let t_end = *traj.times.last().unwrap();
                final_l2_error(problem, &u_final, t_end, reference)
            }
        }
    }
}

fn final_l2_error<S: Scalar>(
    problem: &EvolutionProblem<S>,
    u: &[S],
    t: f64,
    reference: Option<&[S]>,
) -> Result<f64, LinimpError> {
    let target = match (reference, &problem.exact) {
        (Some(r), _) => r.to_vec(),
        (None, Some(f)) => f(t),
        (None, None) => return Err(LinimpError::MissingExactSolution),
    };
    Ok(weighted_l2_dist(u, &target, problem.weight))
}

/// Compute the reference final state when the metric needs one (final-time L2
/// without an exact solution): one Gauss-10 run at h_ref <= min(h)/10.
fn maybe_reference<S: Scalar>(
    plan: &ExperimentPlan,
    problem: &EvolutionProblem<S>,
) -> Result<Option<Vec<S>>, LinimpError> {
    if plan.error_metric != ErrorMetric::FinalL2
        || (problem.exact.is_some() && !plan.reference_metric)
    {
        return Ok(None);
    }
    let h_min = plan.h.last().copied().unwrap();
    let h_ref = plan.reference_h.unwrap_or(h_min / 10.0);
    let (_, u) = integrate_reference(RefMethod::Gauss(5), problem, h_ref, plan.t_final, 2)?;
    Ok(Some(u))
}

/// Execute every (method, h) cell of the plan; cell failures are recorded and
/// the run continues. Cells run in parallel when `parallel` is set.
pub fn run_convergence(plan: &ExperimentPlan, parallel: bool) -> Result<ConvergenceReport, LinimpError> {
    plan.validate()?;
    match plan.problem.build() {
        AnyProblem::Real(p) => run_convergence_typed(plan, &p, parallel),
        AnyProblem::Complex(p) => run_convergence_typed(plan, &p, parallel),
    }
}

fn run_convergence_typed<S: Scalar>(
    plan: &ExperimentPlan,
    problem: &EvolutionProblem<S>,
    parallel: bool,
) -> Result<ConvergenceReport, LinimpError> {
    let reference = maybe_reference(plan, problem)?;
    let cells_spec: Vec<(String, f64)> = plan
        .methods
        .iter()
        .flat_map(|m| plan.h.iter().map(move |&h| (m.clone(), h)))
        .collect();
    let gamma_init = plan.gamma_init();
    let run_one = |(method, h): &(String, f64)| -> CellResult {
        let t0 = Instant::now();
        match run_cell(
            problem,
            method,
            gamma_init,
            *h,
            plan.t_final,
            plan.error_metric,
            reference.as_deref(),
        ) {
            Ok(error) => CellResult {
                method: method.clone(),
                h: *h,
                error,
                seconds: t0.elapsed().as_secs_f64(),
                failure: None,
            },
            Err(e) => CellResult {
                method: method.clone(),
                h: *h,
                error: f64::NAN,
                seconds: t0.elapsed().as_secs_f64(),
                failure: Some(e.to_string()),
            },
        }
    };
    let cells: Vec<CellResult> = if parallel {
        cells_spec.par_iter().map(run_one).collect()
    } else {
        cells_spec.iter().map(run_one).collect()
    };
    let slopes = plan
        .methods
        .iter()
        .map(|m| {
            let pts: Vec<(f64, f64)> = cells
                .iter()
                .filter(|c| &c.method == m && c.failure.is_none())
                .map(|c| (c.h, c.error))
                .collect();
            match fit_slope(&pts) {
                Ok((slope, residual)) => MethodSlope {
                    method: m.clone(),
                    slope: Some(slope),
                    residual: Some(residual),
                },
                Err(_) => MethodSlope {
                    method: m.clone(),
                    slope: None,
                    residual: None,
                },
            }
        })
        .collect();
    Ok(ConvergenceReport {
        plan: plan.name.clone(),
        cells,
        slopes,
    })
}

/// Timing study: median wall-clock over >= 3 repetitions per cell, run
/// sequentially (no co-scheduled work), pairs sorted by error.
pub fn run_timing(plan: &ExperimentPlan) -> Result<ConvergenceReport, LinimpError> {
    plan.validate()?;
    let reps = plan.repetitions.max(3);
    let base = run_convergence(plan, false)?;
    let mut cells = Vec::with_capacity(base.cells.len());
    for cell in &base.cells {
        if cell.failure.is_some() {
            cells.push(cell.clone());
            continue;
        }
        let mut times = vec![cell.seconds];
        for _ in 1..reps {
            let single = ExperimentPlan {
                methods: vec![cell.method.clone()],
                h: vec![cell.h],
                ..plan.clone()
            };
            // bypass the >=3-levels validation: time the one cell directly
            match single.problem.build() {
                AnyProblem::Real(p) => {
                    let t0 = Instant::now();
                    let _ = run_cell(
                        &p,
                        &cell.method,
                        plan.gamma_init(),
                        cell.h,
                        plan.t_final,
                        plan.error_metric,
                        None,
                    );
                    times.push(t0.elapsed().as_secs_f64());
                }
                AnyProblem::Complex(p) => {
                    let t0 = Instant::now();
                    let _ = run_cell(
                        &p,
                        &cell.method,
                        plan.gamma_init(),
                        cell.h,
                        plan.t_final,
                        plan.error_metric,
                        None,
                    );
                    times.push(t0.elapsed().as_secs_f64());
                }
            }
        }
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = times[times.len() / 2];
        cells.push(CellResult {
            seconds: median,
            ..cell.clone()
        });
    }
    cells.sort_by(|a, b| {
        a.error
            .partial_cmp(&b.error)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(ConvergenceReport {
        plan: base.plan,
        cells,
        slopes: base.slopes,
    })
}

/// Write report.csv, report.json and one gnuplot-friendly .dat per method.
pub fn write_outputs(report: &ConvergenceReport, dir: &Path) -> Result<(), LinimpError> {
    std::fs::create_dir_all(dir)?;
    let mut csv = String::from("method,h,error,seconds,failure\n");
    for c in &report.cells {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            c.method,
            c.h,
            c.error,
            c.seconds,
            c.failure.clone().unwrap_or_default()
        ));
    }
    std::fs::write(dir.join("report.csv"), csv)?;
    std::fs::write(
        dir.join("report.json"),
        serde_json::to_string_pretty(report).expect("serializable"),
    )?;
    let methods: Vec<&String> = {
        let mut seen = Vec::new();
        for c in &report.cells {
            if !seen.contains(&&c.method) {
                seen.push(&c.method);
            }
        }
        seen
    };
    for m in methods {
        let mut dat = String::from("# h error seconds\n");
        for c in report.cells.iter().filter(|c| &c.method == m) {
            dat.push_str(&format!("{} {} {}\n", c.h, c.error, c.seconds));
        }
        let fname = format!("{}.dat", m.replace(':', "_"));
        std::fs::write(dir.join(fname), dat)?;
    }
    Ok(())
}

/// Ordinary least squares slope of log10(error) vs log10(h), ignoring
/// non-finite errors and errors at the double-precision floor (1e-14).
pub fn fit_slope(points: &[(f64, f64)]) -> Result<(f64, f64), LinimpError> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(h, e)| h.is_finite() && e.is_finite() && *e > 1e-14 && *h > 0.0)
        .map(|&(h, e)| (h.log10(), e.log10()))
        .collect();
    if usable.len() < 3 {
        return Err(LinimpError::InsufficientData);
    }
    let n = usable.len() as f64;
    let sx: f64 = usable.iter().map(|(x, _)| x).sum();
    let sy: f64 = usable.iter().map(|(_, y)| y).sum();
    let sxx: f64 = usable.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = usable.iter().map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let residual = usable
        .iter()
        .map(|(x, y)| (y - (slope * x + intercept)).abs())
        .fold(0.0, f64::max);
    Ok((slope, residual))
}
