//! Collocation Runge--Kutta tableaux generated from arbitrary distinct nodes
//! by exact integration of the Lagrange basis polynomials.

use crate::error::LinimpError;
use crate::rational::{rat, rat_to_f64, Rational};
use num_traits::{One, Zero};
use serde::Serialize;

/// Strictly increasing collocation nodes in [0, 1].
///
/// Nodes may carry an exact rational representation, which enables the
/// exact-rational tableau and lift constructions.
#[derive(Clone, Debug)]
pub struct NodeSet {
    c: Vec<f64>,
    exact: Option<Vec<Rational>>,
}

impl NodeSet {
    pub fn new(c: Vec<f64>) -> Result<Self, LinimpError> {
        if c.is_empty() {
            return Err(LinimpError::DegenerateNodes);
        }
        let increasing = c.windows(2).all(|w| w[0] < w[1]);
        if !increasing || c[0] < 0.0 || *c.last().unwrap() > 1.0 {
            return Err(LinimpError::DegenerateNodes);
        }
        Ok(NodeSet { c, exact: None })
    }

    pub fn from_rational(c: Vec<Rational>) -> Result<Self, LinimpError> {
        let floats: Vec<f64> = c.iter().map(rat_to_f64).collect();
        let mut ns = NodeSet::new(floats)?;
        ns.exact = Some(c);
        Ok(ns)
    }

    /// Uniform subdivision of [0, 1] with `s` nodes: 0, 1/(s-1), ..., 1.
    /// For `s = 1` the single node is 1 (implicit Euler placement).
    pub fn uniform(s: usize) -> Self {
        if s == 1 {
            return NodeSet::from_rational(vec![rat(1, 1)]).unwrap();
        }
        let c: Vec<Rational> = (0..s).map(|i| rat(i as i64, (s - 1) as i64)).collect();
        NodeSet::from_rational(c).unwrap()
    }

    /// Gauss nodes: roots of the shifted Legendre polynomial of degree `s`.
    pub fn gauss(s: usize) -> Self {
        let c = gauss_nodes(s);
        NodeSet::new(c).unwrap()
    }

    pub fn s(&self) -> usize {
        self.c.len()
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn exact(&self) -> Option<&[Rational]> {
        self.exact.as_deref()
    }
}

/// Roots of the Legendre polynomial of degree `s`, mapped to [0, 1],
/// computed by Newton iteration to ~1e-15.
pub fn gauss_nodes(s: usize) -> Vec<f64> {
    let mut roots = Vec::with_capacity(s);
    for i in 0..s {
        // Chebyshev-style initial guess on [-1, 1]
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (s as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(s, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        roots.push(0.5 * (1.0 + x));
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// A collocation Runge--Kutta tableau. `a[i][j]` integrates the j-th Lagrange
/// polynomial from 0 to `c_i`; `b` integrates over [0, 1].
#[derive(Clone, Debug)]
pub struct CollocationTableau {
    pub nodes: NodeSet,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub exact: Option<ExactTableau>,
}

/// Exact-rational companion of a tableau (available when all nodes are rational).
#[derive(Clone, Debug)]
pub struct ExactTableau {
    pub a: Vec<Vec<Rational>>,
    pub b: Vec<Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Float,
    ExactRational,
}

#[derive(Serialize)]
struct TableauJson {
    s: usize,
    c: Vec<f64>,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl CollocationTableau {
    pub fn s(&self) -> usize {
        self.b.len()
    }

    /// Max row sum of |a_ij| — enters the stage-solve well-posedness guard.
    pub fn a_norm_inf(&self) -> f64 {
        self.a
            .iter()
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Stiffly accurate tableaux satisfy c_s = 1 and b = last row of A.
    pub fn is_stiffly_accurate(&self, tol: f64) -> bool {
        let s = self.s();
        (self.nodes.c()[s - 1] - 1.0).abs() <= tol
            && self.a[s - 1]
                .iter()
                .zip(&self.b)
                .all(|(aij, bi)| (aij - bi).abs() <= tol)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(TableauJson {
            s: self.s(),
            c: self.nodes.c().to_vec(),
            a: self.a.clone(),
            b: self.b.clone(),
        })
        .unwrap()
    }
}

/// Build the collocation tableau for the given nodes.
///
/// The Lagrange basis polynomials are expanded to monomial coefficients by
/// convolving linear factors and integrated term by term. Exact mode requires
/// every node to be rational and produces exactly reduced coefficients.
pub fn build_tableau(nodes: &NodeSet, mode: Mode) -> Result<CollocationTableau, LinimpError> {
    let s = nodes.s();
    match mode {
        Mode::ExactRational => {
            let c = nodes.exact().ok_or_else(|| {
                LinimpError::ModeMismatch("nodes have no exact rational representation".into())
            })?;
            let mut a = vec![vec![Rational::zero(); s]; s];
            let mut b = vec![Rational::zero(); s];
            for j in 0..s {
                let poly = lagrange_poly_rational(c, j)?;
                for i in 0..s {
                    a[i][j] = integrate_poly_rational(&poly, &c[i]);
                }
                b[j] = integrate_poly_rational(&poly, &Rational::one());
            }
            let af = a
                .iter()
                .map(|row| row.iter().map(rat_to_f64).collect())
                .collect();
            let bf = b.iter().map(rat_to_f64).collect();
            Ok(CollocationTableau {
                nodes: nodes.clone(),
                a: af,
                b: bf,
                exact: Some(ExactTableau { a, b }),
            })
        }
        Mode::Float => {
            let c = nodes.c();
            let mut a = vec![vec![0.0; s]; s];
            let mut b = vec![0.0; s];
            for j in 0..s {
                let poly = lagrange_poly_float(c, j)?;
                for i in 0..s {
                    a[i][j] = integrate_poly_float(&poly, c[i]);
                }
                b[j] = integrate_poly_float(&poly, 1.0);
            }
            Ok(CollocationTableau {
                nodes: nodes.clone(),
                a,
                b,
                exact: None,
            })
        }
    }
}

/// Monomial coefficients (ascending) of the j-th Lagrange polynomial.
fn lagrange_poly_float(c: &[f64], j: usize) -> Result<Vec<f64>, LinimpError> {
    let mut poly = vec![1.0];
    let mut denom = 1.0;
    for (k, &ck) in c.iter().enumerate() {
        if k == j {
            continue;
        }
        // multiply by (tau - c_k)
        let mut next = vec![0.0; poly.len() + 1];
        for (p, &coef) in poly.iter().enumerate() {
            next[p] -= coef * ck;
            next[p + 1] += coef;
        }
        poly = next;
        denom *= c[j] - ck;
        if denom == 0.0 {
            return Err(LinimpError::DegenerateNodes);
        }
    }
    for coef in &mut poly {
        *coef /= denom;
    }
    Ok(poly)
}

fn lagrange_poly_rational(c: &[Rational], j: usize) -> Result<Vec<Rational>, LinimpError> {
    let mut poly = vec![Rational::one()];
    let mut denom = Rational::one();
    for (k, ck) in c.iter().enumerate() {
        if k == j {
            continue;
        }
        let mut next = vec![Rational::zero(); poly.len() + 1];
        for (p, coef) in poly.iter().enumerate() {
            next[p] -= coef * ck;
            next[p + 1] += coef;
        }
        poly = next;
        let d = &c[j] - ck;
        if d.is_zero() {
            return Err(LinimpError::DegenerateNodes);
        }
        denom *= d;
    }
    Ok(poly.into_iter().map(|coef| coef / &denom).collect())
}

fn integrate_poly_float(poly: &[f64], upper: f64) -> f64 {
    let mut acc = 0.0;
    let mut x_pow = upper;
    for (p, &coef) in poly.iter().enumerate() {
        acc += coef * x_pow / (p as f64 + 1.0);
        x_pow *= upper;
    }
    acc
}

fn integrate_poly_rational(poly: &[Rational], upper: &Rational) -> Rational {
    let mut acc = Rational::zero();
    let mut x_pow = upper.clone();
    for (p, coef) in poly.iter().enumerate() {
        acc += coef * &x_pow / rat((p + 1) as i64, 1);
        x_pow *= upper;
    }
    acc
}

/// Result of checking the quadrature order conditions sum b_i c_i^{j-1} = 1/j.
#[derive(Clone, Debug, Serialize)]
pub struct OrderReport {
    /// Residual |sum b_i c_i^{j-1} - 1/j| for each j = 1..k_max.
    pub residuals: Vec<f64>,
    /// Largest k with all residuals up to k below tolerance.
    pub order: usize,
}

pub fn verify_order_conditions(t: &CollocationTableau, k_max: usize) -> OrderReport {
    let tol = 1e-10;
    let c = t.nodes.c();
    let mut residuals = Vec::with_capacity(k_max);
    let mut order = 0;
    let mut still_ok = true;
    for j in 1..=k_max {
        let sum: f64 = t
            .b
            .iter()
            .zip(c)
            .map(|(bi, ci)| bi * ci.powi(j as i32 - 1))
            .sum();
        let resid = (sum - 1.0 / j as f64).abs();
        residuals.push(resid);
        if still_ok && resid <= tol {
            order = j;
        } else {
            still_ok = false;
        }
    }
    OrderReport { residuals, order }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn uniform_two_point_tableau() {
        // c = (0, 1) -> A = [[0,0],[1/2,1/2]], b = (1/2, 1/2)
        let t = build_tableau(&NodeSet::uniform(2), Mode::ExactRational).unwrap();
        let e = t.exact.as_ref().unwrap();
        assert_eq!(e.a[0], vec![rat(0, 1), rat(0, 1)]);
        assert_eq!(e.a[1], vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(e.b, vec![rat(1, 2), rat(1, 2)]);
    }

    #[test]
    fn gauss_two_point_tableau() {
        let t = build_tableau(&NodeSet::gauss(2), Mode::Float).unwrap();
        let r3 = 3f64.sqrt();
        assert!(close(t.a[0][0], 0.25, 1e-14));
        assert!(close(t.a[0][1], 0.25 - r3 / 6.0, 1e-14));
        assert!(close(t.a[1][0], 0.25 + r3 / 6.0, 1e-14));
        assert!(close(t.a[1][1], 0.25, 1e-14));
        assert!(close(t.b[0], 0.5, 1e-14));
        assert!(close(t.b[1], 0.5, 1e-14));
    }

    #[test]
    fn order_four_tableau_row_two() {
        let nodes =
            NodeSet::from_rational(vec![rat(0, 1), rat(1, 3), rat(2, 3), rat(1, 1)]).unwrap();
        let t = build_tableau(&nodes, Mode::ExactRational).unwrap();
        let e = t.exact.as_ref().unwrap();
        assert_eq!(
            e.a[1],
            vec![rat(1, 8), rat(19, 72), rat(-5, 72), rat(1, 72)]
        );
        assert_eq!(e.b, vec![rat(1, 8), rat(3, 8), rat(3, 8), rat(1, 8)]);
    }

    #[test]
    fn single_node_implicit_euler() {
        let t = build_tableau(&NodeSet::uniform(1), Mode::ExactRational).unwrap();
        let e = t.exact.as_ref().unwrap();
        assert_eq!(e.a[0][0], rat(1, 1));
        assert_eq!(e.b[0], rat(1, 1));
        assert_eq!(verify_order_conditions(&t, 4).order, 1);
    }

    #[test]
    fn order_six_uniform_exact_entry() {
        let t = build_tableau(&NodeSet::uniform(6), Mode::ExactRational).unwrap();
        let e = t.exact.as_ref().unwrap();
        assert_eq!(e.a[1][1], rat(1427, 7200));
        assert_eq!(e.b[0], rat(19, 288));
        assert_eq!(e.b[2], rat(25, 144));
    }

    #[test]
    fn quadrature_orders() {
        let gauss = build_tableau(&NodeSet::gauss(2), Mode::Float).unwrap();
        assert_eq!(verify_order_conditions(&gauss, 6).order, 4);
        let uniform = build_tableau(&NodeSet::uniform(2), Mode::Float).unwrap();
        assert_eq!(verify_order_conditions(&uniform, 6).order, 2);
    }

    #[test]
    fn row_sums_equal_nodes() {
        for nodes in [
            NodeSet::uniform(4),
            NodeSet::gauss(3),
            NodeSet::gauss(5),
            NodeSet::new(vec![0.1, 0.35, 0.62, 0.9, 1.0]).unwrap(),
        ] {
            let t = build_tableau(&nodes, Mode::Float).unwrap();
            for (row, ci) in t.a.iter().zip(nodes.c()) {
                let sum: f64 = row.iter().sum();
                assert!(close(sum, *ci, 1e-13), "row sum {} vs {}", sum, ci);
            }
        }
    }

    #[test]
    fn exact_and_float_modes_agree() {
        for nodes in [
            NodeSet::uniform(1),
            NodeSet::uniform(2),
            NodeSet::from_rational(vec![rat(0, 1), rat(1, 3), rat(2, 3), rat(1, 1)]).unwrap(),
            NodeSet::uniform(6),
        ] {
            let tf = build_tableau(&nodes, Mode::Float).unwrap();
            let te = build_tableau(&nodes, Mode::ExactRational).unwrap();
            for i in 0..nodes.s() {
                assert!(close(tf.b[i], te.b[i], 1e-13));
                for j in 0..nodes.s() {
                    assert!(close(tf.a[i][j], te.a[i][j], 1e-13));
                }
            }
        }
    }

    #[test]
    fn degenerate_nodes_rejected() {
        assert!(NodeSet::new(vec![0.3, 0.3]).is_err());
        assert!(NodeSet::new(vec![0.5, 0.2]).is_err());
        assert!(NodeSet::new(vec![-0.1, 0.5]).is_err());
        assert!(NodeSet::new(vec![0.5, 1.2]).is_err());
    }

    #[test]
    fn exact_mode_requires_rational_nodes() {
        let nodes = NodeSet::gauss(2);
        assert!(matches!(
            build_tableau(&nodes, Mode::ExactRational),
            Err(LinimpError::ModeMismatch(_))
        ));
    }

    #[test]
    fn gauss_nodes_match_closed_forms() {
        let c2 = gauss_nodes(2);
        let r3 = 3f64.sqrt();
        assert!(close(c2[0], 0.5 - r3 / 6.0, 1e-15));
        assert!(close(c2[1], 0.5 + r3 / 6.0, 1e-15));
        let c3 = gauss_nodes(3);
        let r15 = 15f64.sqrt();
        assert!(close(c3[0], 0.5 - r15 / 10.0, 1e-15));
        assert!(close(c3[1], 0.5, 1e-15));
        assert!(close(c3[2], 0.5 + r15 / 10.0, 1e-15));
    }
}
