//! Command-line front end: print collocation tableaus and lift operators,
//! integrate the built-in problems, and run declarative benchmark plans.

use clap::{Args, Parser, Subcommand};
use linimp::bench::{run_convergence, run_timing, write_outputs, AnyProblem, ExperimentPlan, ProblemSpec};
use linimp::collocation::{build_tableau, Mode, NodeSet};
use linimp::integrator::{integrate_observed, GammaInit, IntegrateOptions};
use linimp::lift::{check_consistency, solve_placement, SpectrumSpec};
use linimp::method::LinearlyImplicitMethod;
use linimp::problem::EvolutionProblem;
use linimp::rational::parse_rational;
use linimp::reference::{integrate_reference, RefMethod};
use linimp::scalar::{weighted_l2_dist, Scalar};
use num_complex::Complex64;
use std::error::Error;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "linimp", about = "Linearly implicit time integrators", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the collocation Runge-Kutta tableau for a node set as JSON.
    Tableau {
        /// Nodes: "uniform:<s>", "gauss:<s>", or a comma list like "1/3,2/3,1"
        #[arg(long)]
        nodes: String,
        /// Use exact rational arithmetic (requires rational nodes)
        #[arg(long)]
        exact: bool,
    },
    /// Build the auxiliary recurrence (D, theta, y) for a prescribed spectrum.
    Lift {
        #[arg(long)]
        nodes: String,
        /// Eigenvalues of D: comma list of rationals or complex "a+bi" entries
        #[arg(long)]
        lambda: String,
        /// Require the exact rational construction
        #[arg(long)]
        exact: bool,
    },
    /// Integrate a built-in problem and write a per-step CSV.
    Integrate(IntegrateArgs),
    /// Benchmark plans.
    Bench {
        #[command(subcommand)]
        command: BenchCommand,
    },
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Run a TOML experiment plan and write report.csv/report.json/*.dat.
    Run {
        plan: PathBuf,
        /// Output directory (default: bench-out/<plan name>)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for parallel cells (0 = sequential)
        #[arg(long, default_value_t = 0)]
        parallel: usize,
        /// Run plans marked expensive = true
        #[arg(long)]
        include_expensive: bool,
        /// Median-of-repetitions timing study instead of a plain run
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Args)]
struct IntegrateArgs {
    /// Problem: ode-scalar | nls-1d | nls-2d | heat-1d
    #[arg(long)]
    problem: String,
    /// Method: "linimp:<order>[:gauss|uniform]", "besse", or a reference
    /// method (euler-exp, euler-imp, midpoint, rk2, crank-nicolson, lie,
    /// strang, gauss10)
    #[arg(long)]
    method: String,
    #[arg(long)]
    h: f64,
    #[arg(long = "T")]
    t_final: f64,
    /// exact | at-zero | backward-reference | forward-bootstrap
    #[arg(long, default_value = "at-zero")]
    gamma_init: String,
    /// CSV output path; a JSON run manifest is written alongside
    #[arg(long)]
    out: Option<PathBuf>,
    /// Initial value for ode-scalar
    #[arg(long, default_value_t = 1.0 / 3.0)]
    u0: f64,
    /// Interior grid points for nls-1d / heat-1d
    #[arg(long, default_value_t = 1023)]
    points: usize,
    /// Nonlinearity strength for nls-1d
    #[arg(long, default_value_t = 4.0)]
    q: f64,
    /// Subdivision parameter for the nls-2d composite domain
    #[arg(long, short = 'J', default_value_t = 10)]
    j: usize,
}

fn parse_nodes(spec: &str) -> Result<NodeSet, Box<dyn Error>> {
    if let Some(s) = spec.strip_prefix("uniform:") {
        return Ok(NodeSet::uniform(s.parse()?));
    }
    if let Some(s) = spec.strip_prefix("gauss:") {
        return Ok(NodeSet::gauss(s.parse()?));
    }
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let rationals: Option<Vec<_>> = parts.iter().map(|p| parse_rational(p)).collect();
    if let Some(r) = rationals {
        return Ok(NodeSet::from_rational(r)?);
    }
    let floats: Result<Vec<f64>, _> = parts.iter().map(|p| p.parse()).collect();
    Ok(NodeSet::new(floats?)?)
}

/// Parse "a", "a/b", "a+bi", "a-bi", "bi" into a complex number; returns the
/// rational form too when the entry is purely real rational.
fn parse_lambda_entry(s: &str) -> Result<(Complex64, Option<num_rational::BigRational>), Box<dyn Error>> {
    let s = s.trim();
    if let Some(r) = parse_rational(s) {
        let f = num_traits::ToPrimitive::to_f64(&r).ok_or("rational out of range")?;
        return Ok((Complex64::new(f, 0.0), Some(r)));
    }
    if let Some(body) = s.strip_suffix('i') {
        // split at the last +/- that is not a leading sign or exponent sign
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let c = bytes[k] as char;
            if (c == '+' || c == '-') && !matches!(bytes[k - 1] as char, 'e' | 'E') {
                split = Some(k);
                break;
            }
        }
        let (re, im) = match split {
            Some(k) => {
                let re: f64 = body[..k].parse()?;
                let imtxt = &body[k..];
                let im: f64 = if imtxt == "+" || imtxt == "-" {
                    format!("{imtxt}1").parse()?
                } else {
                    imtxt.parse()?
                };
                (re, im)
            }
            None => (0.0, body.parse()?),
        };
        return Ok((Complex64::new(re, im), None));
    }
    Ok((Complex64::new(s.parse()?, 0.0), None))
}

fn parse_spectrum(spec: &str) -> Result<SpectrumSpec, Box<dyn Error>> {
    let entries: Result<Vec<_>, _> = spec.split(',').map(parse_lambda_entry).collect();
    let entries = entries?;
    let rationals: Option<Vec<_>> = entries.iter().map(|(_, r)| r.clone()).collect();
    if let Some(r) = rationals {
        return Ok(SpectrumSpec::from_rational(r)?);
    }
    Ok(SpectrumSpec::new(entries.into_iter().map(|(c, _)| c).collect())?)
}

fn run_integrate_typed<S: Scalar>(
    problem: &EvolutionProblem<S>,
    args: &IntegrateArgs,
) -> Result<serde_json::Value, Box<dyn Error>> {
    let t_start = std::time::Instant::now();
    let mut rows: Vec<(usize, f64, Option<f64>, Vec<f64>)> = Vec::new();
    let energy_names: Vec<String> = problem.energies.iter().map(|e| e.name.clone()).collect();
    let n_steps = (args.t_final / args.h).round() as usize;
    let stride = (n_steps / 10_000).max(1);
    let final_u: Vec<S>;
    let final_t: f64;
    if args.method.starts_with("linimp") || args.method == "besse" {
        let m = if args.method == "besse" {
            LinearlyImplicitMethod::besse()
        } else {
            LinearlyImplicitMethod::parse(&args.method)?
        };
        let gamma_init: GammaInit = args.gamma_init.parse()?;
        let result = integrate_observed(
            &m,
            problem,
            gamma_init,
            args.h,
            args.t_final,
            &IntegrateOptions::default(),
            &mut |st| {
                if st.step_index % stride != 0 && st.t < args.t_final {
                    return;
                }
                let err = problem
                    .exact
                    .as_ref()
                    .map(|f| weighted_l2_dist(&st.u, &f(st.t), problem.weight));
                let energies = problem
                    .energies
                    .iter()
                    .map(|e| (e.eval)(&st.u, &st.gamma[0]))
                    .collect();
                rows.push((st.step_index, st.t, err, energies));
            },
        )?;
        final_u = result.state.u;
        final_t = result.state.t;
    } else {
        let rm: RefMethod = args.method.parse()?;
        let (traj, u) = integrate_reference(rm, problem, args.h, args.t_final, 10_001)?;
        for (k, (t, u)) in traj.times.iter().zip(&traj.states).enumerate() {
            let err = problem
                .exact
                .as_ref()
                .map(|f| weighted_l2_dist(u, &f(*t), problem.weight));
            let g = problem.multiplier(u);
            let energies = problem.energies.iter().map(|e| (e.eval)(u, &g)).collect();
            rows.push((k * stride, *t, err, energies));
        }
        final_t = *traj.times.last().unwrap();
        final_u = u;
    }
    let seconds = t_start.elapsed().as_secs_f64();
    let final_error = problem
        .exact
        .as_ref()
        .map(|f| weighted_l2_dist(&final_u, &f(final_t), problem.weight));

    if let Some(out) = &args.out {
        let mut csv = String::from("step,t,error");
        for name in &energy_names {
            csv.push(',');
            csv.push_str(name);
        }
        csv.push('\n');
        for (step, t, err, energies) in &rows {
            csv.push_str(&format!(
                "{step},{t},{}",
                err.map(|e| e.to_string()).unwrap_or_default()
            ));
            for e in energies {
                csv.push_str(&format!(",{e}"));
            }
            csv.push('\n');
        }
        std::fs::write(out, csv)?;
    }
    Ok(serde_json::json!({
        "problem": problem.name,
        "dimension": problem.dim(),
        "method": args.method,
        "h": args.h,
        "t_final": args.t_final,
        "gamma_init": args.gamma_init,
        "steps": n_steps,
        "seconds": seconds,
        "final_error": final_error,
        "csv": args.out.as_ref().map(|p| p.display().to_string()),
    }))
}

fn main() -> Result<(), Box<dyn Error>> {
    let cli = Cli::parse();
    match cli.command {
        Command::Tableau { nodes, exact } => {
            let nodes = parse_nodes(&nodes)?;
            let mode = if exact { Mode::ExactRational } else { Mode::Float };
            let tableau = build_tableau(&nodes, mode)?;
            println!("{}", serde_json::to_string_pretty(&tableau.to_json())?);
        }
        Command::Lift { nodes, lambda, exact } => {
            let nodes = parse_nodes(&nodes)?;
            let spectrum = parse_spectrum(&lambda)?;
            if exact && (nodes.exact().is_none() || spectrum.exact().is_none()) {
                return Err("exact mode requires rational nodes and a rational spectrum".into());
            }
            let lift = solve_placement(&nodes, &spectrum)?;
            if exact && lift.exact.is_none() {
                return Err("exact construction unavailable for these inputs".into());
            }
            let mut json = lift.to_json();
            let report = check_consistency(&lift, &nodes, &[1.0, 0.1, 0.01]);
            json["consistency"] = serde_json::json!({
                "pass": report.pass,
                "residuals": report.residuals,
            });
            println!("{}", serde_json::to_string_pretty(&json)?);
        }
        Command::Integrate(args) => {
            let spec = match args.problem.as_str() {
                "ode-scalar" => ProblemSpec::OdeScalar { u0: args.u0 },
                "nls-1d" => ProblemSpec::Nls1d {
                    points: args.points,
                    q: args.q,
                },
                "nls-2d" => ProblemSpec::Nls2d { j: args.j },
                "heat-1d" => ProblemSpec::Heat1d { points: args.points },
                other => return Err(format!("unknown problem '{other}'").into()),
            };
            let manifest = match spec.build() {
                AnyProblem::Real(p) => run_integrate_typed(&p, &args)?,
                AnyProblem::Complex(p) => run_integrate_typed(&p, &args)?,
            };
            println!("{}", serde_json::to_string_pretty(&manifest)?);
            if let Some(out) = &args.out {
                let json_path = out.with_extension("json");
                std::fs::write(&json_path, serde_json::to_string_pretty(&manifest)?)?;
            }
        }
        Command::Bench { command } => match command {
            BenchCommand::Run {
                plan,
                out,
                parallel,
                include_expensive,
                timing,
            } => {
                let plan = ExperimentPlan::from_toml_file(&plan)?;
                if plan.expensive && !include_expensive {
                    eprintln!(
                        "plan '{}' is marked expensive; pass --include-expensive to run it",
                        plan.name
                    );
                    std::process::exit(2);
                }
                if parallel > 0 {
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(parallel)
                        .build_global()
                        .ok();
                }
                let report = if timing {
                    run_timing(&plan)?
                } else {
                    run_convergence(&plan, parallel > 0)?
                };
                for slope in &report.slopes {
                    match slope.slope {
                        Some(s) => println!("{:<20} slope {:.3}", slope.method, s),
                        None => println!("{:<20} slope unavailable", slope.method),
                    }
                }
                let dir = out.unwrap_or_else(|| PathBuf::from("bench-out").join(&plan.name));
                write_outputs(&report, &dir)?;
                println!("wrote {}", dir.display());
            }
        },
    }
    Ok(())
}
