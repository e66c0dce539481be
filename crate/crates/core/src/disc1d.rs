//! Central finite differences for the 1D convection-diffusion equation on a
//! moving mesh.
//!
//! All three schemes share the diagonal mass M_j = (h_{j+1} + h_j) / 2 and
//! differ only in how the mesh-motion convection term is discretized:
//!
//! * [`Scheme1D::Conservative`]: flux (b - x') u at half points.
//! * [`Scheme1D::NonconservativeHalfpoint`]: x' u_xi averaged over the two
//!   half points; algebraically the same operator as the conservative form.
//! * [`Scheme1D::TwoCell`]: x'_j (u_{j+1} - u_{j-1}) / 2; dissipative only
//!   under a mesh-speed condition, checked at construction.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::integrator::BcStrategy;
use crate::integrator::{BoundaryNode, SemiDiscreteSystem};
use crate::linops::{DiagonalMatrix, SparseMatrix};
use crate::mesh1d::MovingMesh1D;
use crate::problems::Problem1D;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme1D {
    Conservative,
    #[serde(alias = "halfpoint")]
    NonconservativeHalfpoint,
    TwoCell,
}

/// A violation of the two-cell mesh-speed condition
/// x'_j - x'_{j-1} <= 4 a_{j-1/2} / h_j.
#[derive(Clone, Debug, PartialEq)]
pub struct SpeedConditionViolation {
    pub cell: usize,
    pub t: f64,
    pub speed_jump: f64,
    pub bound: f64,
}

/// Semi-discrete system on the interior nodes 1..J_max-1.
#[derive(Clone)]
pub struct System1D {
    problem: Problem1D,
    mesh: MovingMesh1D,
    scheme: Scheme1D,
    bc: BcStrategy,
    violations: Vec<SpeedConditionViolation>,
}

pub fn build_conservative(
    problem: &Problem1D,
    mesh: MovingMesh1D,
    bc: BcStrategy,
) -> Result<System1D> {
    System1D::new(problem, mesh, Scheme1D::Conservative, bc)
}

pub fn build_nonconservative_halfpoint(
    problem: &Problem1D,
    mesh: MovingMesh1D,
    bc: BcStrategy,
) -> Result<System1D> {
    System1D::new(problem, mesh, Scheme1D::NonconservativeHalfpoint, bc)
}

pub fn build_twocell(problem: &Problem1D, mesh: MovingMesh1D, bc: BcStrategy) -> Result<System1D> {
    System1D::new(problem, mesh, Scheme1D::TwoCell, bc)
}

/// Worst margin of the coefficient condition
/// c_j + (b_{j+1/2} - b_{j-1/2}) / (h_{j+1} + h_j) >= 0 over interior nodes.
pub fn check_coef_condition_1d(problem: &Problem1D, mesh: &MovingMesh1D, t: f64) -> f64 {
    let x = mesh.positions(t);
    let j_max = x.len() - 1;
    (1..j_max)
        .map(|j| {
            let bp = (problem.b)(0.5 * (x[j] + x[j + 1]), t);
            let bm = (problem.b)(0.5 * (x[j - 1] + x[j]), t);
            let m = 0.5 * (x[j + 1] - x[j - 1]);
            (problem.c)(x[j], t) + 0.5 * (bp - bm) / m
        })
        .fold(f64::INFINITY, f64::min)
}

/// Coefficient alpha of the extrapolated boundary value
/// u_0 = g + alpha (u_1 - g), alpha = (x_0 - x_l) / (x_1 - x_l).
pub fn extrapolation_coefficient(x0: f64, x1: f64, xl: f64, width: f64, t: f64) -> Result<f64> {
    let gap = x1 - xl;
    if gap.abs() < 1e-12 * width {
        return Err(Error::DegenerateExtrapolation { t, gap });
    }
    Ok((x0 - xl) / gap)
}

impl System1D {
    pub fn new(
        problem: &Problem1D,
        mesh: MovingMesh1D,
        scheme: Scheme1D,
        bc: BcStrategy,
    ) -> Result<Self> {
        let grid = mesh.grid();
        for &t in grid.times() {
            problem.domain.width(t)?;
        }
        let mut sys = Self {
            problem: problem.clone(),
            mesh,
            scheme,
            bc,
            violations: Vec::new(),
        };
        if scheme == Scheme1D::TwoCell {
            sys.violations = sys.speed_condition_violations();
            if let Some(v) = sys.violations.first() {
                warn!(
                    "two-cell speed condition fails at {} (cell, time) pairs, first at cell {} t = {}",
                    sys.violations.len(),
                    v.cell,
                    v.t
                );
            }
        }
        let worst = sys
            .mesh
            .grid()
            .times()
            .iter()
            .map(|&t| check_coef_condition_1d(&sys.problem, &sys.mesh, t))
            .fold(f64::INFINITY, f64::min);
        if worst < 0.0 {
            warn!("coefficient condition fails on this mesh (worst margin {worst:e})");
        }
        Ok(sys)
    }

    pub fn mesh(&self) -> &MovingMesh1D {
        &self.mesh
    }

    pub fn problem(&self) -> &Problem1D {
        &self.problem
    }

    pub fn scheme(&self) -> Scheme1D {
        self.scheme
    }

    /// Two-cell speed-condition violations found at the grid levels.
    pub fn speed_condition_violations_found(&self) -> &[SpeedConditionViolation] {
        &self.violations
    }

    /// Checks x'_j - x'_{j-1} <= 4 a_{j-1/2} / h_j for j = 1..J_max at both
    /// ends of every interval, using that interval's speeds.
    fn speed_condition_violations(&self) -> Vec<SpeedConditionViolation> {
        let grid = self.mesh.grid();
        let j_max = self.mesh.j_max();
        let mut out = Vec::new();
        for n in 0..grid.steps() {
            let dt = grid.dt(n);
            let (x0, x1) = (self.mesh.level(n), self.mesh.level(n + 1));
            let v: Vec<f64> = x0.iter().zip(x1).map(|(a, b)| (b - a) / dt).collect();
            for (t, x) in [(grid.t(n), x0), (grid.t(n + 1), x1)] {
                for j in 1..=j_max {
                    let h = x[j] - x[j - 1];
                    let bound = 4.0 * (self.problem.a)(0.5 * (x[j] + x[j - 1]), t) / h;
                    let jump = v[j] - v[j - 1];
                    if jump > bound {
                        out.push(SpeedConditionViolation {
                            cell: j,
                            t,
                            speed_jump: jump,
                            bound,
                        });
                    }
                }
            }
        }
        out
    }

    /// Stiffness rows over the full node set: `rows[i] = [A_{j,j-1},
    /// A_{j,j}, A_{j,j+1}]` for interior node j = i + 1.
    pub fn operator_rows(&self, t: f64) -> Vec<[f64; 3]> {
        let p = &self.problem;
        let x = self.mesh.positions(t);
        let v = self.mesh.speeds(t);
        let j_max = x.len() - 1;
        let mut rows = Vec::with_capacity(j_max - 1);
        for j in 1..j_max {
            let (hm, hp) = (x[j] - x[j - 1], x[j + 1] - x[j]);
            let (xm, xp) = (0.5 * (x[j - 1] + x[j]), 0.5 * (x[j] + x[j + 1]));
            let (am, ap) = ((p.a)(xm, t), (p.a)(xp, t));
            let (bm, bp) = ((p.b)(xm, t), (p.b)(xp, t));
            let mass = 0.5 * (hp + hm);
            let c = (p.c)(x[j], t);
            let (vm, vp) = (0.5 * (v[j - 1] + v[j]), 0.5 * (v[j] + v[j + 1]));

            let mut lower = am / hm;
            let mut upper = ap / hp;
            let mut diag = -ap / hp - am / hm - mass * c;
            match self.scheme {
                Scheme1D::Conservative => {
                    let hdot = (v[j + 1] - v[j]) + (v[j] - v[j - 1]);
                    upper -= 0.5 * (bp - vp);
                    lower += 0.5 * (bm - vm);
                    diag += -0.5 * hdot - 0.5 * (bp - vp) + 0.5 * (bm - vm);
                }
                Scheme1D::NonconservativeHalfpoint => {
                    upper += -0.5 * bp + 0.5 * vp;
                    lower += 0.5 * bm - 0.5 * vm;
                    diag += -0.5 * bp + 0.5 * bm - 0.5 * vp + 0.5 * vm;
                }
                Scheme1D::TwoCell => {
                    upper += -0.5 * bp + 0.5 * v[j];
                    lower += 0.5 * bm - 0.5 * v[j];
                    diag += -0.5 * bp + 0.5 * bm;
                }
            }
            rows.push([lower, diag, upper]);
        }
        rows
    }
}

impl SemiDiscreteSystem for System1D {
    fn dim(&self) -> usize {
        self.mesh.j_max() - 1
    }

    fn mass_diag(&self, t: f64) -> Result<DiagonalMatrix> {
        let x = self.mesh.positions(t);
        let m = DiagonalMatrix(
            (1..x.len() - 1)
                .map(|j| 0.5 * (x[j + 1] - x[j - 1]))
                .collect(),
        );
        m.check_positive(t)?;
        Ok(m)
    }

    fn dsqrtmass_diag(&self, t: f64) -> Vec<f64> {
        let x = self.mesh.positions(t);
        let v = self.mesh.speeds(t);
        (1..x.len() - 1)
            .map(|j| {
                let hsum = x[j + 1] - x[j - 1];
                let hdot = v[j + 1] - v[j - 1];
                std::f64::consts::SQRT_2 / 4.0 * hdot / hsum.sqrt()
            })
            .collect()
    }

    fn stiffness(&self, t: f64) -> SparseMatrix {
        let rows = self.operator_rows(t);
        let l = rows.len();
        let mut trip = Vec::with_capacity(3 * l);
        for (i, r) in rows.iter().enumerate() {
            if i > 0 {
                trip.push((i, i - 1, r[0]));
            }
            trip.push((i, i, r[1]));
            if i + 1 < l {
                trip.push((i, i + 1, r[2]));
            }
        }
        SparseMatrix::from_triplets(l, l, &trip).expect("tridiagonal indices are in range")
    }

    fn source(&self, t: f64) -> Vec<f64> {
        let x = self.mesh.positions(t);
        (1..x.len() - 1)
            .map(|j| 0.5 * (x[j + 1] - x[j - 1]) * (self.problem.f)(x[j], t))
            .collect()
    }

    fn boundary(&self, t: f64) -> Result<Vec<BoundaryNode>> {
        let rows = self.operator_rows(t);
        let l = rows.len();
        let d = &self.problem.domain;
        let (xl, xr) = ((d.xl)(t), (d.xr)(t));
        let mut left = BoundaryNode {
            value: (self.problem.g)(xl, t),
            coupling: vec![(0, rows[0][0])],
            extrapolation: None,
        };
        let mut right = BoundaryNode {
            value: (self.problem.g)(xr, t),
            coupling: vec![(l - 1, rows[l - 1][2])],
            extrapolation: None,
        };
        if self.bc == BcStrategy::MovingDomainExtrapolated {
            let x = self.mesh.positions(t);
            let j_max = x.len() - 1;
            let width = d.width(t)?;
            left.extrapolation = Some((0, extrapolation_coefficient(x[0], x[1], xl, width, t)?));
            right.extrapolation = Some((
                l - 1,
                extrapolation_coefficient(x[j_max], x[j_max - 1], xr, width, t)?,
            ));
        }
        Ok(vec![left, right])
    }

    fn bc_strategy(&self) -> BcStrategy {
        self.bc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::integrator::certify_dissipativity;
    use std::f64::consts::PI;

    fn uniform(j_max: usize) -> MovingMesh1D {
        let grid = TimeGrid::uniform(1.0, 0.25).unwrap();
        let nodes: Vec<f64> = (0..=j_max).map(|j| j as f64 * PI / j_max as f64).collect();
        MovingMesh1D::fixed(grid, &nodes).unwrap()
    }

    #[test]
    fn single_interior_node() {
        let p = Problem1D::constant(1.0, 0.0, 0.0, 0.0, PI);
        let sys = build_conservative(&p, uniform(2), BcStrategy::ApproxPoints).unwrap();
        assert_eq!(sys.dim(), 1);
        assert!((sys.mass_diag(0.1).unwrap().0[0] - PI / 2.0).abs() < 1e-15);
        assert!((sys.stiffness(0.1).get(0, 0) + 4.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn constant_convection_is_skew() {
        let p = Problem1D::constant(0.0, 1.0, 0.0, 0.0, PI);
        let sys = build_conservative(&p, uniform(4), BcStrategy::ApproxPoints).unwrap();
        let a = sys.stiffness(0.3).to_dense();
        assert!((a.clone() + a.transpose()).abs().max() < 1e-15);
        let cert = certify_dissipativity(&sys, &[0.0, 0.5]).unwrap();
        assert!(cert.iter().all(|&c| c <= 1e-12));
    }

    #[test]
    fn static_mesh_schemes_coincide() {
        let p = Problem1D::constant(1.3, 0.7, 0.2, 0.0, PI);
        let a = build_conservative(&p, uniform(6), BcStrategy::ApproxPoints).unwrap();
        let b = build_nonconservative_halfpoint(&p, uniform(6), BcStrategy::ApproxPoints).unwrap();
        let c = build_twocell(&p, uniform(6), BcStrategy::ApproxPoints).unwrap();
        assert_eq!(a.operator_rows(0.4), b.operator_rows(0.4));
        assert_eq!(a.operator_rows(0.4), c.operator_rows(0.4));
    }

    #[test]
    fn coefficient_condition_margins() {
        let mesh = uniform(8);
        let p = Problem1D::constant(1.0, 2.0, 0.0, 0.0, PI);
        assert!(check_coef_condition_1d(&p, &mesh, 0.0).abs() < 1e-15);
        let mut q = p.clone();
        q.b = std::sync::Arc::new(|x, _| x);
        assert!((check_coef_condition_1d(&q, &mesh, 0.0) - 0.5).abs() < 1e-12);
        q.b = std::sync::Arc::new(|x, _| -x);
        assert!((check_coef_condition_1d(&q, &mesh, 0.0) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn collapsing_cell_violates_speed_condition() {
        let grid = TimeGrid::fixed_steps(0.01, 1).unwrap();
        let x0 = vec![0.0, 0.25, 0.5, 0.75, 1.0];
        let mut x1 = x0.clone();
        // node 2 moves right at speed 20: cell 2 stretches far faster than 4 a / h
        x1[2] = 0.7;
        let mesh = MovingMesh1D::new(grid, vec![x0, x1]).unwrap();
        let p = Problem1D::constant(0.01, 0.0, 0.0, 0.0, 1.0);
        let sys = build_twocell(&p, mesh, BcStrategy::ApproxPoints).unwrap();
        let v = sys.speed_condition_violations_found();
        assert!(!v.is_empty());
        assert!(v.iter().all(|w| w.cell == 2));
    }

    #[test]
    fn extrapolation_reduces_on_fixed_domain() {
        assert_eq!(
            extrapolation_coefficient(0.0, 0.1, 0.0, 1.0, 0.0).unwrap(),
            0.0
        );
        assert!(matches!(
            extrapolation_coefficient(0.0, 1e-15, 0.0, 1.0, 0.0),
            Err(Error::DegenerateExtrapolation { .. })
        ));
    }

    #[test]
    fn boundary_couplings_follow_rows() {
        let mut p = Problem1D::constant(1.0, 0.5, 0.0, 0.0, PI);
        p.g = std::sync::Arc::new(|x, _| 1.0 + x);
        let sys = build_conservative(&p, uniform(5), BcStrategy::ApproxPoints).unwrap();
        let rows = sys.operator_rows(0.2);
        let b = sys.boundary(0.2).unwrap();
        assert_eq!(b[0].coupling, vec![(0, rows[0][0])]);
        assert_eq!(b[1].coupling, vec![(3, rows[3][2])]);
        assert_eq!(b[0].value, 1.0);
        assert!((b[1].value - 1.0 - PI).abs() < 1e-15);
        let f = sys.load(0.2).unwrap();
        assert!((f[0] - rows[0][0]).abs() < 1e-15);
    }
}
