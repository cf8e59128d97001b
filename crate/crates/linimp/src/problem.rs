//! The evolution problem abstraction: du/dt = L u + N(u) u with a banded
//! linear part and a diagonal (pointwise) nonlinear multiplier.

use crate::band::BandMatrix;
use crate::error::LinimpError;
use crate::scalar::Scalar;
use std::sync::Arc;

pub type MultiplierFn<S> = Arc<dyn Fn(&[S], &mut [S]) + Send + Sync>;
pub type ExactFn<S> = Arc<dyn Fn(f64) -> Vec<S> + Send + Sync>;
pub type EnergyFn<S> = Arc<dyn Fn(&[S], &[S]) -> f64 + Send + Sync>;
pub type PointwiseFlow<S> = Arc<dyn Fn(f64, &mut [S]) + Send + Sync>;
pub type LinearFlow<S> = Arc<dyn Fn(f64, &[S]) -> Vec<S> + Send + Sync>;

/// Substep flows for splitting methods: the exact pointwise flow of the
/// nonlinear subproblem v' = N(v) v, and optionally an exact linear flow
/// (when absent, the linear substep uses the Cayley approximation of e^{hL}).
#[derive(Clone)]
pub struct SplitProblem<S> {
    pub nonlinear_flow: PointwiseFlow<S>,
    pub exact_linear_flow: Option<LinearFlow<S>>,
}

/// Named functional of (u, gamma), e.g. the discrete relaxation energy of the
/// nonlinear heat scheme.
#[derive(Clone)]
pub struct EnergyFunctional<S> {
    pub name: String,
    pub eval: EnergyFn<S>,
}

/// A semilinear evolution problem in the form du/dt = L u + N(u) u, where
/// N(u) is a length-N vector acting diagonally.
#[derive(Clone)]
pub struct EvolutionProblem<S: Scalar> {
    pub name: String,
    pub linear: BandMatrix<S>,
    pub nonlinear: MultiplierFn<S>,
    pub exact: Option<ExactFn<S>>,
    pub initial: Vec<S>,
    /// Quadrature weight of the discrete L2 inner product (dx in 1D, dx^2 in
    /// 2D, 1 for plain ODE systems).
    pub weight: f64,
    /// Whether running a reference method backwards in time is meaningful
    /// (false for parabolic problems).
    pub reversible: bool,
    pub energies: Vec<EnergyFunctional<S>>,
    /// Substep flows for Lie/Strang splitting, when the problem admits them.
    pub split: Option<SplitProblem<S>>,
}

impl<S: Scalar> EvolutionProblem<S> {
    pub fn new(
        name: impl Into<String>,
        linear: BandMatrix<S>,
        nonlinear: MultiplierFn<S>,
        initial: Vec<S>,
    ) -> Self {
        assert_eq!(linear.n(), initial.len());
        EvolutionProblem {
            name: name.into(),
            linear,
            nonlinear,
            exact: None,
            initial,
            weight: 1.0,
            reversible: true,
            energies: Vec::new(),
            split: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.linear.n()
    }

    /// gamma = N(u).
    pub fn multiplier(&self, u: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); u.len()];
        (self.nonlinear)(u, &mut out);
        out
    }

    /// Full right-hand side f(u) = L u + N(u) ∘ u.
    pub fn rhs(&self, u: &[S]) -> Vec<S> {
        let mut f = self.linear.matvec(u);
        let g = self.multiplier(u);
        for ((fi, gi), ui) in f.iter_mut().zip(g).zip(u) {
            *fi += gi * *ui;
        }
        f
    }

    pub fn exact_at(&self, t: f64) -> Result<Vec<S>, LinimpError> {
        match &self.exact {
            Some(f) => Ok(f(t)),
            None => Err(LinimpError::MissingExactSolution),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> EvolutionProblem<f64> {
        // u' = -u - u^2: L = -1, N(u) = -u
        EvolutionProblem::new(
            "toy",
            BandMatrix::<f64>::scalar(-1.0),
            Arc::new(|u: &[f64], out: &mut [f64]| out[0] = -u[0]),
            vec![1.0 / 3.0],
        )
    }

    #[test]
    fn rhs_combines_linear_and_nonlinear() {
        let p = toy();
        let f = p.rhs(&[0.5]);
        assert!((f[0] - (-0.5 - 0.25)).abs() < 1e-15);
    }

    #[test]
    fn exact_missing_is_reported() {
        assert!(matches!(
            toy().exact_at(0.0),
            Err(LinimpError::MissingExactSolution)
        ));
    }
}
