//! A ready-to-run linearly implicit method: collocation tableau plus the
//! auxiliary recurrence data (D, theta), with the published presets.

use crate::collocation::{build_tableau, CollocationTableau, Mode, NodeSet};
use crate::error::LinimpError;
use crate::lift::{solve_placement, LiftOperator, SpectrumSpec};
use crate::rational::rat;
use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct LinearlyImplicitMethod {
    pub name: String,
    pub tableau: CollocationTableau,
    pub lift: LiftOperator,
}

impl LinearlyImplicitMethod {
    pub fn new(
        name: impl Into<String>,
        nodes: NodeSet,
        spectrum: SpectrumSpec,
        mode: Mode,
    ) -> Result<Self, LinimpError> {
        let tableau = build_tableau(&nodes, mode)?;
        let lift = solve_placement(&nodes, &spectrum)?;
        Ok(LinearlyImplicitMethod {
            name: name.into(),
            tableau,
            lift,
        })
    }

    pub fn s(&self) -> usize {
        self.tableau.s()
    }

    /// Order-1 method of the published first-order example: c = 1, lambda = 1/2.
    pub fn order1() -> Self {
        let nodes = NodeSet::uniform(1);
        let spec = SpectrumSpec::from_rational(vec![rat(1, 2)]).unwrap();
        Self::new("linimp:1", nodes, spec, Mode::Float).unwrap()
    }

    /// Relaxation method (Besse): c = 1/2, lambda = -1. Stable, not strongly.
    pub fn besse() -> Self {
        let nodes = NodeSet::from_rational(vec![rat(1, 2)]).unwrap();
        let spec = SpectrumSpec::from_rational(vec![rat(-1, 1)]).unwrap();
        Self::new("besse", nodes, spec, Mode::Float).unwrap()
    }

    /// Strongly stable midpoint variant used for the heat equation:
    /// c = 1/2, lambda = 1/2.
    pub fn heat_relaxation() -> Self {
        let nodes = NodeSet::from_rational(vec![rat(1, 2)]).unwrap();
        let spec = SpectrumSpec::from_rational(vec![rat(1, 2)]).unwrap();
        Self::new("heat-relaxation", nodes, spec, Mode::Float).unwrap()
    }

    /// Order-2 method: lambda = (1/2, -1/2) on the given nodes.
    pub fn order2(nodes: NodeSet) -> Self {
        let spec = SpectrumSpec::from_rational(vec![rat(1, 2), rat(-1, 2)]).unwrap();
        Self::new("linimp:2", nodes, spec, Mode::Float).unwrap()
    }

    /// Order-4 method: lambda = (0, 1/4, 1/2, 3/4) on the given nodes
    /// (the published coefficients use uniform nodes).
    pub fn order4(nodes: NodeSet) -> Self {
        assert_eq!(nodes.s(), 4);
        let spec =
            SpectrumSpec::from_rational(vec![rat(0, 1), rat(1, 4), rat(1, 2), rat(3, 4)]).unwrap();
        Self::new("linimp:4", nodes, spec, Mode::Float).unwrap()
    }

    /// Order-6 method: lambda_k = exp(i (k-1) pi / 3) / 2, the sixth roots of
    /// unity scaled to radius 1/2.
    pub fn order6(nodes: NodeSet) -> Self {
        assert_eq!(nodes.s(), 6);
        let lambda: Vec<Complex64> = (0..6)
            .map(|k| {
                let phi = k as f64 * std::f64::consts::FRAC_PI_3;
                Complex64::new(0.5 * phi.cos(), 0.5 * phi.sin())
            })
            .collect();
        let spec = SpectrumSpec::new(lambda).unwrap();
        Self::new("linimp:6", nodes, spec, Mode::Float).unwrap()
    }

    /// Parse a method name of the form `linimp:<order>[:gauss|uniform]`.
    /// Supported orders are the published presets 1, 2, 4 and 6; node choice
    /// defaults to uniform (the published tables).
    pub fn parse(spec: &str) -> Result<Self, LinimpError> {
        let mut parts = spec.split(':');
        if parts.next() != Some("linimp") {
            return Err(LinimpError::InvalidPlan(format!(
                "unknown method spec '{spec}'"
            )));
        }
        let order: usize = parts
            .next()
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| LinimpError::InvalidPlan(format!("bad order in '{spec}'")))?;
        let node_kind = parts.next().unwrap_or("uniform");
        if parts.next().is_some() {
            return Err(LinimpError::InvalidPlan(format!(
                "trailing fields in '{spec}'"
            )));
        }
        let nodes = match node_kind {
            "uniform" => NodeSet::uniform(order),
            "gauss" => NodeSet::gauss(order),
            other => {
                return Err(LinimpError::InvalidPlan(format!(
                    "unknown node family '{other}'"
                )))
            }
        };
        let mut m = match order {
            1 => {
                if node_kind == "gauss" {
                    Self::heat_relaxation()
                } else {
                    Self::order1()
                }
            }
            2 => Self::order2(nodes),
            4 => Self::order4(nodes),
            6 => Self::order6(nodes),
            other => {
                return Err(LinimpError::InvalidPlan(format!(
                    "no preset spectrum for order {other}; supported: 1, 2, 4, 6"
                )))
            }
        };
        m.name = spec.to_string();
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lift::Stability;

    #[test]
    fn presets_construct_and_are_stable() {
        for m in [
            LinearlyImplicitMethod::order1(),
            LinearlyImplicitMethod::heat_relaxation(),
            LinearlyImplicitMethod::order2(NodeSet::uniform(2)),
            LinearlyImplicitMethod::order2(NodeSet::gauss(2)),
            LinearlyImplicitMethod::order4(NodeSet::uniform(4)),
            LinearlyImplicitMethod::order6(NodeSet::uniform(6)),
        ] {
            assert_eq!(m.lift.stability, Stability::StronglyStable, "{}", m.name);
            assert!(m.lift.spectral_radius() < 1.0);
        }
        assert_eq!(
            LinearlyImplicitMethod::besse().lift.stability,
            Stability::Stable
        );
    }

    #[test]
    fn order6_published_coefficients() {
        let m = LinearlyImplicitMethod::order6(NodeSet::uniform(6));
        let want_y = [
            6.0,
            2783.0 / 320.0,
            1239.0 / 256.0,
            659.0 / 512.0,
            43.0 / 256.0,
            21.0 / 2560.0,
        ];
        let want_theta = [
            65.0 / 64.0,
            193389.0 / 125000.0,
            1133667.0 / 500000.0,
            1608733.0 / 500000.0,
            1111047.0 / 250000.0,
            6.0,
        ];
        for i in 0..6 {
            assert!(
                (m.lift.y[i] - want_y[i]).abs() < 1e-11 * want_y[i].abs().max(1.0),
                "y[{i}] = {} want {}",
                m.lift.y[i],
                want_y[i]
            );
            assert!(
                (m.lift.theta[i] - want_theta[i]).abs() < 1e-11 * want_theta[i].abs().max(1.0),
                "theta[{i}] = {} want {}",
                m.lift.theta[i],
                want_theta[i]
            );
        }
        // published tableau spot checks
        assert!((m.tableau.a[1][1] - 1427.0 / 7200.0).abs() < 1e-13);
        let want_b = [
            19.0 / 288.0,
            25.0 / 96.0,
            25.0 / 144.0,
            25.0 / 144.0,
            25.0 / 96.0,
            19.0 / 288.0,
        ];
        for i in 0..6 {
            assert!((m.tableau.b[i] - want_b[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn parse_specs() {
        assert_eq!(LinearlyImplicitMethod::parse("linimp:4").unwrap().s(), 4);
        assert_eq!(
            LinearlyImplicitMethod::parse("linimp:2:gauss").unwrap().s(),
            2
        );
        assert!(LinearlyImplicitMethod::parse("linimp:3").is_err());
        assert!(LinearlyImplicitMethod::parse("rk4").is_err());
        assert!(LinearlyImplicitMethod::parse("linimp:2:foo").is_err());
    }
}
