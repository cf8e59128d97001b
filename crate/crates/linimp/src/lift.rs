//! Construction of the auxiliary-variable recurrence data (D, theta) from
//! collocation nodes and a prescribed spectrum, plus stability classification.
//!
//! The recurrence gamma_{n+c} = D gamma_{n-1+c} + theta N(u_n) is consistent of
//! order s when V_c = D V_{c-1} + Theta holds for the Vandermonde matrices of
//! the node grids. Prescribing the spectrum of D reduces, after similarity to
//! M - Y with M the polynomial shift matrix, to an s x s linear system whose
//! row k evaluates fixed integer polynomials at 1/(1 - lambda_k).

use crate::collocation::NodeSet;
use crate::error::LinimpError;
use crate::rational::{rat_to_f64, solve_rational, Rational};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::Serialize;

/// Prescribed spectrum for the recurrence matrix D.
#[derive(Clone, Debug)]
pub struct SpectrumSpec {
    lambda: Vec<Complex64>,
    exact: Option<Vec<Rational>>,
}

impl SpectrumSpec {
    /// Validates distinctness, lambda != 1 and closure under conjugation.
    pub fn new(lambda: Vec<Complex64>) -> Result<Self, LinimpError> {
        if lambda.is_empty() {
            return Err(LinimpError::InvalidSpectrum("empty spectrum".into()));
        }
        for (i, a) in lambda.iter().enumerate() {
            if (a - Complex64::new(1.0, 0.0)).norm() < 1e-12 {
                return Err(LinimpError::InvalidSpectrum("lambda = 1 is excluded".into()));
            }
            for b in lambda.iter().skip(i + 1) {
                if (a - b).norm() < 1e-12 {
                    return Err(LinimpError::InvalidSpectrum(format!(
                        "repeated eigenvalue {a}"
                    )));
                }
            }
        }
        // conjugation closure: every lambda's conjugate must appear
        for a in &lambda {
            if !lambda.iter().any(|b| (b - a.conj()).norm() < 1e-10) {
                return Err(LinimpError::NonRealResult);
            }
        }
        Ok(SpectrumSpec {
            lambda,
            exact: None,
        })
    }

    /// Real rational spectrum; enables the exact-rational construction.
    pub fn from_rational(lambda: Vec<Rational>) -> Result<Self, LinimpError> {
        let floats: Vec<Complex64> = lambda
            .iter()
            .map(|r| Complex64::new(rat_to_f64(r), 0.0))
            .collect();
        let mut spec = SpectrumSpec::new(floats)?;
        spec.exact = Some(lambda);
        Ok(spec)
    }

    pub fn s(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda(&self) -> &[Complex64] {
        &self.lambda
    }

    pub fn exact(&self) -> Option<&[Rational]> {
        self.exact.as_deref()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Stability {
    #[serde(rename = "strongly-stable")]
    StronglyStable,
    #[serde(rename = "stable")]
    Stable,
    #[serde(rename = "unstable")]
    Unstable,
}

/// The recurrence data: matrix D with the prescribed spectrum, vector theta,
/// and the intermediate placement solution y (kept for introspection since
/// published coefficient tables report y).
#[derive(Clone, Debug)]
pub struct LiftOperator {
    pub nodes: NodeSet,
    pub lambda: SpectrumSpec,
    pub d: DMatrix<f64>,
    pub theta: Vec<f64>,
    pub y: Vec<f64>,
    pub stability: Stability,
    pub exact: Option<ExactLift>,
}

#[derive(Clone, Debug)]
pub struct ExactLift {
    pub d: Vec<Vec<Rational>>,
    pub theta: Vec<Rational>,
    pub y: Vec<Rational>,
}

impl LiftOperator {
    pub fn s(&self) -> usize {
        self.theta.len()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.d
            .complex_eigenvalues()
            .iter()
            .map(|e| e.norm())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let d_rows: Vec<Vec<f64>> = (0..self.s())
            .map(|i| (0..self.s()).map(|j| self.d[(i, j)]).collect())
            .collect();
        serde_json::json!({
            "c": self.nodes.c(),
            "lambda": self.lambda.lambda().iter().map(|z| vec![z.re, z.im]).collect::<Vec<_>>(),
            "y": self.y,
            "theta": self.theta,
            "D": d_rows,
            "rho": self.spectral_radius(),
            "stability": self.stability,
        })
    }
}

/// Vandermonde matrices of the two node grids together with the polynomial
/// shift matrix M = (V_{c-1})^{-1} V_c and its strictly upper part U = I - M.
#[derive(Clone, Debug)]
pub struct VandermondeBundle {
    pub v_c: DMatrix<f64>,
    pub v_cm1: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub u: DMatrix<f64>,
}

impl VandermondeBundle {
    pub fn new(nodes: &NodeSet) -> Self {
        let s = nodes.s();
        let v_c = vandermonde(nodes.c(), 0.0, 1.0);
        let v_cm1 = vandermonde(nodes.c(), -1.0, 1.0);
        let m = pascal_shift(s);
        let u = DMatrix::identity(s, s) - &m;
        VandermondeBundle { v_c, v_cm1, m, u }
    }
}

/// V^h with entries ((c_i + shift) h)^{j-1}.
pub fn vandermonde(c: &[f64], shift: f64, h: f64) -> DMatrix<f64> {
    let s = c.len();
    DMatrix::from_fn(s, s, |i, j| ((c[i] + shift) * h).powi(j as i32))
}

/// Matrix of P(X) -> P(X+1) in the monomial basis: binomial coefficients
/// above the diagonal. Independent of the node set.
pub fn pascal_shift(s: usize) -> DMatrix<f64> {
    DMatrix::from_fn(s, s, |i, j| {
        if j >= i {
            binomial(j, i) as f64
        } else {
            0.0
        }
    })
}

fn binomial(n: usize, k: usize) -> i128 {
    if k > n {
        return 0;
    }
    let mut acc: i128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as i128 / (i + 1) as i128;
    }
    acc
}

/// Integer coefficient arrays (ascending powers) of the placement polynomials
/// P_1..P_s: P_j(z) = sum_p z^{p+1} (U^p)_{1j}, with deg P_j = j.
pub fn placement_polynomials(s: usize) -> Vec<Vec<i128>> {
    // powers of the strictly upper-triangular integer matrix U = I - M
    let u: Vec<Vec<i128>> = (0..s)
        .map(|i| {
            (0..s)
                .map(|j| {
                    if j > i {
                        -binomial(j, i)
                    } else if j == i {
                        0
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect();
    let mut u_pow: Vec<Vec<i128>> = (0..s)
        .map(|i| (0..s).map(|j| i128::from(i == j)).collect())
        .collect();
    let mut polys = vec![vec![0i128; s + 1]; s];
    for p in 0..s {
        for (j, poly) in polys.iter_mut().enumerate() {
            poly[p + 1] = u_pow[0][j];
        }
        if p + 1 < s {
            // u_pow <- u_pow * u
            let mut next = vec![vec![0i128; s]; s];
            for i in 0..s {
                for k in 0..s {
                    if u_pow[i][k] == 0 {
                        continue;
                    }
                    for j in 0..s {
                        next[i][j] += u_pow[i][k] * u[k][j];
                    }
                }
            }
            u_pow = next;
        }
    }
    // trim trailing zeros so deg P_j = j
    for (j, poly) in polys.iter_mut().enumerate() {
        poly.truncate(j + 2);
        debug_assert!(*poly.last().unwrap() != 0, "leading coefficient vanished");
    }
    polys
}

fn eval_poly_complex(poly: &[i128], z: Complex64) -> Complex64 {
    let mut acc = Complex64::zero();
    for &coef in poly.iter().rev() {
        acc = acc * z + Complex64::new(coef as f64, 0.0);
    }
    acc
}

/// Solve the placement system for y, then assemble theta and D.
///
/// Row k of the system is (P_1(1/(1-lambda_k)), ..., P_s(1/(1-lambda_k))) with
/// right-hand side all ones. Since the spectrum is closed under conjugation,
/// each conjugate pair contributes two equivalent real equations (the real and
/// imaginary parts of either complex row), so the solve is realified: y comes
/// out exactly real by construction.
pub fn solve_placement(nodes: &NodeSet, spec: &SpectrumSpec) -> Result<LiftOperator, LinimpError> {
    let s = nodes.s();
    if spec.s() != s {
        return Err(LinimpError::InvalidSpectrum(format!(
            "spectrum size {} does not match stage count {}",
            spec.s(),
            s
        )));
    }
    let polys = placement_polynomials(s);
    let mut mat = DMatrix::<f64>::zeros(s, s);
    let mut rhs = DVector::<f64>::zeros(s);
    let mut row = 0;
    for lam in spec.lambda() {
        // one representative per conjugate pair; eigenvalues real up to the
        // spectrum's conjugation tolerance stand alone
        let real_tol = 1e-10 * (1.0 + lam.norm());
        let is_pair = lam.im > real_tol;
        if lam.im < -real_tol {
            continue;
        }
        if row + if is_pair { 2 } else { 1 } > s {
            return Err(LinimpError::InvalidSpectrum(
                "spectrum is not closed under complex conjugation".into(),
            ));
        }
        let z = Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - lam);
        for j in 0..s {
            let v = eval_poly_complex(&polys[j], z);
            mat[(row, j)] = v.re;
            if is_pair {
                mat[(row + 1, j)] = v.im;
            }
        }
        rhs[row] = 1.0;
        row += if is_pair { 2 } else { 1 };
    }
    if row != s {
        return Err(LinimpError::InvalidSpectrum(
            "spectrum is not closed under complex conjugation".into(),
        ));
    }
    let y_v = mat.lu().solve(&rhs).ok_or(LinimpError::SingularSystem)?;
    let y: Vec<f64> = y_v.iter().copied().collect();
    finish_lift(nodes, spec, y, exact_lift(nodes, spec)?)
}

/// Exact-rational construction; requires rational nodes and a real rational
/// spectrum. Returns None when either is unavailable.
fn exact_lift(nodes: &NodeSet, spec: &SpectrumSpec) -> Result<Option<ExactLift>, LinimpError> {
    let (Some(c), Some(lambda)) = (nodes.exact(), spec.exact()) else {
        return Ok(None);
    };
    let s = c.len();
    let polys = placement_polynomials(s);
    let mut mat = vec![vec![Rational::zero(); s]; s];
    for (k, lam) in lambda.iter().enumerate() {
        let z = Rational::one() / (Rational::one() - lam);
        for j in 0..s {
            let mut acc = Rational::zero();
            for &coef in polys[j].iter().rev() {
                acc = acc * &z + Rational::from_integer(coef.into());
            }
            mat[k][j] = acc;
        }
    }
    let y = solve_rational(mat, vec![Rational::one(); s])?;
    // theta_i = sum_j (c_i - 1)^{j-1} y_j
    let mut theta = vec![Rational::zero(); s];
    for i in 0..s {
        let base = &c[i] - Rational::one();
        let mut pow = Rational::one();
        for yj in &y {
            theta[i] += &pow * yj;
            pow *= &base;
        }
    }
    // D solves D V_{c-1} = V_c - Theta; column k of D^T solves
    // V_{c-1}^T (D^T e_k) = (V_c - Theta)^T e_k, i.e. row k of V_c - Theta.
    let vc = |i: usize, j: usize| -> Rational {
        let mut pow = Rational::one();
        for _ in 0..j {
            pow *= &c[i];
        }
        pow
    };
    let vcm1 = |i: usize, j: usize| -> Rational {
        let base = &c[i] - Rational::one();
        let mut pow = Rational::one();
        for _ in 0..j {
            pow *= &base;
        }
        pow
    };
    let mut d = vec![vec![Rational::zero(); s]; s];
    for k in 0..s {
        let a: Vec<Vec<Rational>> = (0..s)
            .map(|j| (0..s).map(|i| vcm1(i, j)).collect())
            .collect();
        let b: Vec<Rational> = (0..s)
            .map(|j| {
                let mut v = vc(k, j);
                if j == 0 {
                    v -= &theta[k];
                }
                v
            })
            .collect();
        d[k] = solve_rational(a, b)?;
    }
    Ok(Some(ExactLift { d, theta, y }))
}

fn finish_lift(
    nodes: &NodeSet,
    spec: &SpectrumSpec,
    y: Vec<f64>,
    exact: Option<ExactLift>,
) -> Result<LiftOperator, LinimpError> {
    let s = nodes.s();
    let bundle = VandermondeBundle::new(nodes);
    // Theta = V_{c-1} Y has first column V_{c-1} y and zeros elsewhere
    let theta: Vec<f64> = (0..s)
        .map(|i| (0..s).map(|j| bundle.v_cm1[(i, j)] * y[j]).sum())
        .collect();
    // D = (V_c - Theta) V_{c-1}^{-1}
    let mut lhs = bundle.v_c.clone();
    for i in 0..s {
        lhs[(i, 0)] -= theta[i];
    }
    let vcm1_t_lu = bundle.v_cm1.transpose().lu();
    let d_t = vcm1_t_lu
        .solve(&lhs.transpose())
        .ok_or(LinimpError::SingularSystem)?;
    let d = d_t.transpose();
    let stability = classify_stability(&d);
    Ok(LiftOperator {
        nodes: nodes.clone(),
        lambda: spec.clone(),
        d,
        theta,
        y,
        stability,
        exact,
    })
}

/// Spectral-radius classification with a rank test for defective modulus-1
/// eigenvalues (which break power boundedness).
pub fn classify_stability(d: &DMatrix<f64>) -> Stability {
    let tol = 1e-10;
    let eigs = d.complex_eigenvalues();
    let rho = eigs.iter().map(|e| e.norm()).fold(0.0, f64::max);
    if rho < 1.0 - tol {
        return Stability::StronglyStable;
    }
    if rho > 1.0 + tol {
        return Stability::Unstable;
    }
    let s = d.nrows();
    let dc = d.map(|v| Complex64::new(v, 0.0));
    let mut checked: Vec<Complex64> = Vec::new();
    for e in eigs.iter().filter(|e| (e.norm() - 1.0).abs() <= tol) {
        if checked.iter().any(|c| (c - e).norm() < 1e-9) {
            continue;
        }
        checked.push(*e);
        let algebraic = eigs.iter().filter(|f| (*f - e).norm() < 1e-9).count();
        let shifted = &dc - DMatrix::from_diagonal_element(s, s, *e);
        let rank = shifted.svd(false, false).rank(1e-8);
        let geometric = s - rank;
        if geometric < algebraic {
            return Stability::Unstable;
        }
    }
    Stability::Stable
}

/// Residuals of the order-s consistency relation V_c^h = D V_{c-1}^h + Theta
/// at the sampled step sizes.
#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub residuals: Vec<(f64, f64)>,
    pub pass: bool,
}

pub fn check_consistency(
    lift: &LiftOperator,
    nodes: &NodeSet,
    h_samples: &[f64],
) -> ConsistencyReport {
    let s = nodes.s();
    let mut residuals = Vec::with_capacity(h_samples.len());
    let mut pass = true;
    for &h in h_samples {
        let v_c = vandermonde(nodes.c(), 0.0, h);
        let v_cm1 = vandermonde(nodes.c(), -1.0, h);
        let mut resid = &v_c - &lift.d * &v_cm1;
        for i in 0..s {
            resid[(i, 0)] -= lift.theta[i];
        }
        let r = resid.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if r > 1e-12 * f64::max(1.0, h.powi(s as i32 - 1)) {
            pass = false;
        }
        residuals.push((h, r));
    }
    ConsistencyReport { residuals, pass }
}
