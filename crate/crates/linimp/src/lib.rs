//! Linearly implicit one-step methods of arbitrary order for semilinear
//! evolution equations du/dt = L u + N(u) u.
//!
//! The method family couples a collocation Runge–Kutta tableau with an
//! explicit recurrence propagating approximations of the nonlinear multiplier
//! N(u) between staggered node grids; each step then costs one banded linear
//! solve, with no nonlinear iterations. The recurrence matrix's spectrum is
//! prescribed by the user, giving control over the damping of multiplier
//! errors (strong stability).
//!
//! Modules:
//! - [`collocation`]: node sets and collocation tableaus (float and exact
//!   rational modes);
//! - [`lift`]: the (D, theta) recurrence construction from nodes and a
//!   prescribed spectrum, with stability classification;
//! - [`method`]: preset methods of orders 1, 2, 4 and 6;
//! - [`integrator`]: the three-stage time stepper;
//! - [`reference`]: comparison integrators (Euler, midpoint, RK2,
//!   Crank–Nicolson, Lie/Strang splitting, Gauss reference);
//! - [`problems`]: the scalar ODE, 1D/2D NLS and nonlinear heat instances;
//! - [`bench`]: convergence/timing experiment driver.

pub mod band;
pub mod bench;
pub mod collocation;
pub mod error;
pub mod integrator;
pub mod lift;
pub mod method;
pub mod problem;
pub mod problems;
pub mod rational;
pub mod reference;
pub mod scalar;

pub use error::LinimpError;
