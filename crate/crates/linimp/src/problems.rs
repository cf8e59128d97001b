//! Concrete problem instances: the scalar ODE u' = -u - u^2, 1D NLS with its
//! zero-speed soliton, 2D NLS on a composite (L-shaped) domain, and the 1D
//! nonlinear heat equation with its discrete relaxation energy.

use crate::band::BandMatrix;
use crate::problem::{EnergyFunctional, EvolutionProblem, SplitProblem};
use num_complex::Complex64;
use std::sync::Arc;

/// Uniform 1D grid of interior points with homogeneous Dirichlet boundaries.
#[derive(Clone, Copy, Debug)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_interior: usize,
    pub dx: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_interior: usize) -> Self {
        assert!(x_max > x_min && n_interior > 0);
        Grid1D {
            x_min,
            x_max,
            n_interior,
            dx: (x_max - x_min) / (n_interior + 1) as f64,
        }
    }

    /// Coordinate of interior point k (k = 0 is the first point inside x_min).
    pub fn x(&self, k: usize) -> f64 {
        self.x_min + (k + 1) as f64 * self.dx
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_interior).map(|k| self.x(k))
    }
}

/// u' = -u - u^2 split as L = -1, N(u) = -u, with the closed-form solution
/// u(t) = 1 / ((1/u0 + 1) e^t - 1) for u0 > 0.
pub fn scalar_ode(u0: f64) -> EvolutionProblem<f64> {
    assert!(u0 > 0.0);
    let mut p = EvolutionProblem::new(
        "ode-scalar",
        BandMatrix::<f64>::scalar(-1.0),
        Arc::new(|u: &[f64], out: &mut [f64]| {
            for (o, v) in out.iter_mut().zip(u) {
                *o = -v;
            }
        }),
        vec![u0],
    );
    p.exact = Some(Arc::new(move |t: f64| {
        vec![1.0 / ((1.0 / u0 + 1.0) * t.exp() - 1.0)]
    }));
    // exact subflows of u' = -u and u' = -u^2
    p.split = Some(SplitProblem {
        nonlinear_flow: Arc::new(|h: f64, v: &mut [f64]| {
            for x in v {
                *x /= 1.0 + h * *x;
            }
        }),
        exact_linear_flow: Some(Arc::new(|h: f64, v: &[f64]| {
            let e = (-h).exp();
            v.iter().map(|x| x * e).collect()
        })),
    });
    p
}

/// Pointwise flow of v' = i q |v|^2 v (modulus is conserved, so the phase
/// rotation is exact).
fn nls_pointwise_flow(q: f64) -> Arc<dyn Fn(f64, &mut [Complex64]) + Send + Sync> {
    Arc::new(move |h: f64, v: &mut [Complex64]| {
        for x in v.iter_mut() {
            *x *= Complex64::new(0.0, h * q * x.norm_sqr()).exp();
        }
    })
}

/// Focusing 1D NLS i du/dt = -u'' - q|u|^2 u on the grid, i.e.
/// du/dt = i B u + i q |u|^2 u, with the zero-speed soliton
/// u(t, x) = sqrt(2a/q) sech(sqrt(a) x) e^{iat}, a = q^2/16, attached.
pub fn nls_1d(grid: Grid1D, q: f64) -> EvolutionProblem<Complex64> {
    assert!(q > 0.0);
    let a = q * q / 16.0;
    let b = BandMatrix::<f64>::second_difference(grid.n_interior, grid.dx);
    let l = b.map(|v| Complex64::new(0.0, v));
    let soliton = move |t: f64| -> Vec<Complex64> {
        let amp = (2.0 * a / q).sqrt();
        let phase = Complex64::new(0.0, a * t).exp();
        grid.points()
            .map(|x| phase * amp / (a.sqrt() * x).cosh())
            .collect()
    };
    let mut p = EvolutionProblem::new(
        "nls-1d",
        l,
        Arc::new(move |u: &[Complex64], out: &mut [Complex64]| {
            for (o, v) in out.iter_mut().zip(u) {
                *o = Complex64::new(0.0, q * v.norm_sqr());
            }
        }),
        soliton(0.0),
    );
    p.exact = Some(Arc::new(soliton));
    p.weight = grid.dx;
    p.split = Some(SplitProblem {
        nonlinear_flow: nls_pointwise_flow(q),
        exact_linear_flow: None,
    });
    p
}

/// The composite 2D domain: a p_x x p_y rectangle of unit cells with the
/// top-right cell removed, discretized with J points per unit length and
/// homogeneous Dirichlet conditions on the whole composite boundary.
#[derive(Clone, Debug)]
pub struct CompositeGrid2D {
    pub p_x: usize,
    pub p_y: usize,
    pub j: usize,
    pub dx: f64,
    /// index[jy][ix] = Some(unknown index) for active interior nodes.
    index: Vec<Vec<Option<usize>>>,
    /// coords[k] = (ix, jy) of unknown k, row-major from the bottom-left.
    coords: Vec<(usize, usize)>,
}

impl CompositeGrid2D {
    pub fn new(p_x: usize, p_y: usize, j: usize) -> Self {
        assert!(j >= 2 && p_x >= 1 && p_y >= 2);
        let nx = p_x * j;
        let ny = p_y * j;
        let dx = 1.0 / j as f64;
        let active = |ix: usize, jy: usize| -> bool {
            ix > 0 && ix < nx && jy > 0 && jy < ny && !(ix >= (p_x - 1) * j && jy >= (p_y - 1) * j)
        };
        let mut index = vec![vec![None; nx + 1]; ny + 1];
        let mut coords = Vec::new();
        for jy in 0..=ny {
            for ix in 0..=nx {
                if active(ix, jy) {
                    index[jy][ix] = Some(coords.len());
                    coords.push((ix, jy));
                }
            }
        }
        CompositeGrid2D {
            p_x,
            p_y,
            j,
            dx,
            index,
            coords,
        }
    }

    /// Closed-form unknown count: ((p_y-1)J - 1)(p_x J - 1) + J((p_x-1)J - 1).
    pub fn unknown_count_formula(p_x: usize, p_y: usize, j: usize) -> usize {
        ((p_y - 1) * j - 1) * (p_x * j - 1) + j * ((p_x - 1) * j - 1)
    }

    pub fn n_unknowns(&self) -> usize {
        self.coords.len()
    }

    pub fn coord(&self, k: usize) -> (f64, f64) {
        let (ix, jy) = self.coords[k];
        (ix as f64 * self.dx, jy as f64 * self.dx)
    }

    /// Five-point Laplacian with Dirichlet conditions on the composite
    /// boundary (inactive neighbors contribute nothing).
    pub fn laplacian(&self) -> BandMatrix<f64> {
        let n = self.n_unknowns();
        let w = 1.0 / (self.dx * self.dx);
        // widest index jump between vertically adjacent unknowns
        let mut band = 1;
        for (k, &(ix, jy)) in self.coords.iter().enumerate() {
            if let Some(up) = self.index[jy + 1][ix] {
                band = band.max(up - k);
            }
        }
        let mut m = BandMatrix::<f64>::zeros(n, band, band);
        for (k, &(ix, jy)) in self.coords.iter().enumerate() {
            m.set(k, k, -4.0 * w);
            let neighbors = [
                (ix.wrapping_sub(1), jy),
                (ix + 1, jy),
                (ix, jy.wrapping_sub(1)),
                (ix, jy + 1),
            ];
            for (nx, ny) in neighbors {
                if let Some(row) = self.index.get(ny).and_then(|r| r.get(nx)) {
                    if let Some(kp) = row {
                        m.set(k, *kp, w);
                    }
                }
            }
        }
        m
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p_x": self.p_x,
            "p_y": self.p_y,
            "J": self.j,
            "dx": self.dx,
            "n_unknowns": self.n_unknowns(),
        })
    }
}

/// Focusing 2D NLS i du/dt = -Lap u - |u|^2 u on the composite domain with
/// initial datum sin(2 pi x) sin(2 pi y) e^{2 i pi x}. No exact solution;
/// reference runs use the Gauss integrator.
pub fn nls_2d(j: usize) -> EvolutionProblem<Complex64> {
    let grid = CompositeGrid2D::new(2, 3, j);
    let lap = grid.laplacian();
    let l = lap.map(|v| Complex64::new(0.0, v));
    let tau = 2.0 * std::f64::consts::PI;
    let initial: Vec<Complex64> = (0..grid.n_unknowns())
        .map(|k| {
            let (x, y) = grid.coord(k);
            Complex64::new(0.0, tau * x).exp() * ((tau * x).sin() * (tau * y).sin())
        })
        .collect();
    let mut p = EvolutionProblem::new(
        "nls-2d",
        l,
        Arc::new(|u: &[Complex64], out: &mut [Complex64]| {
            for (o, v) in out.iter_mut().zip(u) {
                *o = Complex64::new(0.0, v.norm_sqr());
            }
        }),
        initial,
    );
    p.weight = grid.dx * grid.dx;
    p.split = Some(SplitProblem {
        nonlinear_flow: nls_pointwise_flow(1.0),
        exact_linear_flow: None,
    });
    p
}

/// Discrete relaxation energy of the nonlinear heat scheme:
/// E_rlx(u, g) = -1/2 <u, Bu> - 1/2 <g, u∘u> + 1/4 <g, g>
/// with <v, w> = dx * sum v(k) w(k).
pub fn heat_energy(b: &BandMatrix<f64>, dx: f64, u: &[f64], g: &[f64]) -> f64 {
    let bu = b.matvec(u);
    let mut ubu = 0.0;
    let mut gu2 = 0.0;
    let mut gg = 0.0;
    for k in 0..u.len() {
        ubu += u[k] * bu[k];
        gu2 += g[k] * u[k] * u[k];
        gg += g[k] * g[k];
    }
    dx * (-0.5 * ubu - 0.5 * gu2 + 0.25 * gg)
}

/// Residual of the per-step energy identity of the heat relaxation scheme:
/// (1/h)||u_{n+1}-u_n||^2 + (3/4)||g_{n+1/2}-g_{n-1/2}||^2
///   + E_rlx(u_{n+1}, g_{n+1/2}) - E_rlx(u_n, g_{n-1/2}) = 0.
#[allow(clippy::too_many_arguments)]
pub fn heat_energy_identity_residual(
    b: &BandMatrix<f64>,
    dx: f64,
    u_n: &[f64],
    u_next: &[f64],
    g_prev: &[f64],
    g_next: &[f64],
    h: f64,
) -> f64 {
    let du2: f64 = u_n
        .iter()
        .zip(u_next)
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        * dx;
    let dg2: f64 = g_prev
        .iter()
        .zip(g_next)
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        * dx;
    let e0 = heat_energy(b, dx, u_n, g_prev);
    let e1 = heat_energy(b, dx, u_next, g_next);
    (du2 / h + 0.75 * dg2 + e1 - e0).abs()
}

/// Nonlinear heat equation du/dt = u'' + u^3 split as L = B, N(u) = u∘u, with
/// the nonnegative initial datum 0.5 cos(pi x / (x_max - x_min)) and the
/// relaxation energy attached. Not time-reversible.
pub fn heat_1d(grid: Grid1D) -> EvolutionProblem<f64> {
    let b = BandMatrix::<f64>::second_difference(grid.n_interior, grid.dx);
    let width = grid.x_max - grid.x_min;
    let mid = 0.5 * (grid.x_min + grid.x_max);
    let initial: Vec<f64> = grid
        .points()
        .map(|x| 0.5 * (std::f64::consts::PI * (x - mid) / width).cos())
        .collect();
    let mut p = EvolutionProblem::new(
        "heat-1d",
        b.clone(),
        Arc::new(|u: &[f64], out: &mut [f64]| {
            for (o, v) in out.iter_mut().zip(u) {
                *o = v * v;
            }
        }),
        initial,
    );
    p.weight = grid.dx;
    p.reversible = false;
    let dx = grid.dx;
    let b_energy = b;
    p.energies.push(EnergyFunctional {
        name: "E_rlx".into(),
        eval: Arc::new(move |u: &[f64], g: &[f64]| heat_energy(&b_energy, dx, u, g)),
    });
    // exact pointwise flow of v' = v^3: v(h) = v0 / sqrt(1 - 2 h v0^2)
    p.split = Some(SplitProblem {
        nonlinear_flow: Arc::new(|h: f64, v: &mut [f64]| {
            for x in v.iter_mut() {
                let d = 1.0 - 2.0 * h * *x * *x;
                *x = if d > 0.0 { *x / d.sqrt() } else { f64::INFINITY };
            }
        }),
        exact_linear_flow: None,
    });
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_ode_closed_form() {
        let p = scalar_ode(1.0 / 3.0);
        assert!((p.exact_at(0.0).unwrap()[0] - 1.0 / 3.0).abs() < 1e-15);
        let want = 1.0 / (4.0 * (2.0f64).exp() - 1.0);
        assert!((p.exact_at(2.0).unwrap()[0] - want).abs() < 1e-15);
        let p9 = scalar_ode(0.9);
        let want9 = 1.0 / ((1.0 / 0.9 + 1.0) * (2.0f64).exp() - 1.0);
        assert!((p9.exact_at(2.0).unwrap()[0] - want9).abs() < 1e-15);
    }

    #[test]
    fn soliton_shape_and_modulus() {
        let grid = Grid1D::new(-50.0, 50.0, 1023);
        let p = nls_1d(grid, 4.0);
        // a = 1, amplitude sqrt(1/2) at x = 0
        let u0 = p.exact_at(0.0).unwrap();
        let peak = u0.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!((peak - (0.5f64).sqrt()).abs() < 1e-4);
        // modulus is time-independent
        let u1 = p.exact_at(0.7).unwrap();
        for (a, b) in u0.iter().zip(&u1) {
            assert!((a.norm() - b.norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn second_difference_extreme_eigenvalue() {
        // eigenvector sin(n pi k/(n+1)) with |lambda| = (2 - 2cos(n pi/(n+1)))/dx^2,
        // within 1% of 4/dx^2 on a fine grid
        let n = 1000;
        let dx = 0.1;
        let b = BandMatrix::<f64>::second_difference(n, dx);
        let theta = n as f64 * std::f64::consts::PI / (n + 1) as f64;
        let lam = -(2.0 - 2.0 * theta.cos()) / (dx * dx);
        let v: Vec<f64> = (1..=n).map(|k| (k as f64 * theta).sin()).collect();
        let bv = b.matvec(&v);
        for (bk, vk) in bv.iter().zip(&v) {
            assert!((bk - lam * vk).abs() < 1e-9);
        }
        assert!((lam.abs() - 4.0 / (dx * dx)).abs() < 0.01 * 4.0 / (dx * dx));
    }

    #[test]
    fn composite_count_matches_formula_and_brute_force() {
        assert_eq!(CompositeGrid2D::unknown_count_formula(2, 3, 50), 12251);
        for j in 2..=20 {
            let g = CompositeGrid2D::new(2, 3, j);
            assert_eq!(
                g.n_unknowns(),
                CompositeGrid2D::unknown_count_formula(2, 3, j),
                "J = {j}"
            );
        }
    }

    #[test]
    fn composite_laplacian_is_symmetric() {
        let g = CompositeGrid2D::new(2, 3, 6);
        let m = g.laplacian();
        for (i, j, v) in m.entries() {
            assert_eq!(v, m.get(j, i), "asymmetry at ({i},{j})");
        }
    }

    #[test]
    fn nls_2d_initial_datum_boundary_compatible() {
        // u0 vanishes wherever sin(2 pi x) sin(2 pi y) = 0, in particular on
        // all half-integer lines; check nodes adjacent to the removed cell
        let p = nls_2d(8);
        assert_eq!(p.dim(), CompositeGrid2D::unknown_count_formula(2, 3, 8));
        let g = CompositeGrid2D::new(2, 3, 8);
        for k in 0..g.n_unknowns() {
            let (x, y) = g.coord(k);
            let expected = ((2.0 * std::f64::consts::PI * x).sin()
                * (2.0 * std::f64::consts::PI * y).sin())
            .abs();
            if expected < 1e-14 {
                assert!(p.initial[k].norm() < 1e-14);
            }
        }
    }

    #[test]
    fn heat_energy_values() {
        let grid = Grid1D::new(-50.0, 50.0, 63);
        let b = BandMatrix::<f64>::second_difference(grid.n_interior, grid.dx);
        let zero = vec![0.0; 63];
        assert_eq!(heat_energy(&b, grid.dx, &zero, &zero), 0.0);
        // with g = u∘u: E = -1/2 <u,Bu> - 1/4 <u∘u, u∘u>
        let u: Vec<f64> = grid.points().map(|x| (x / 20.0).cos()).collect();
        let g: Vec<f64> = u.iter().map(|v| v * v).collect();
        let bu = b.matvec(&u);
        let want = grid.dx
            * (-0.5 * u.iter().zip(&bu).map(|(a, c)| a * c).sum::<f64>()
                - 0.25 * g.iter().map(|v| v * v).sum::<f64>());
        assert!((heat_energy(&b, grid.dx, &u, &g) - want).abs() < 1e-12);
    }

    #[test]
    fn heat_initial_is_nonnegative_and_bounded() {
        let p = heat_1d(Grid1D::new(-50.0, 50.0, 127));
        assert!(p.initial.iter().all(|&v| (0.0..=0.5).contains(&v)));
        let peak = p.initial.iter().cloned().fold(0.0, f64::max);
        assert!((peak - 0.5).abs() < 1e-3);
    }
}
