//! Central finite differences for the 2D convection-diffusion equation on a
//! structured moving mesh.
//!
//! Convection fluxes live at the half points (j +- 1/2, k) and (j, k +- 1/2)
//! with GCL-consistent metrics and speeds; diffusion fluxes live at the cell
//! centers. The mass is the nodal Jacobian. Interior unknowns are ordered
//! row-major with j fastest.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::integrator::BcStrategy;
use crate::integrator::{BoundaryNode, SemiDiscreteSystem, Snapshot};
use crate::linops::{DiagonalMatrix, SparseMatrix};
use crate::mesh2d::{MeshState2D, MovingMesh2D};
use crate::problems::Problem2D;

/// Source of the J' u term in the stiffness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianRate {
    /// Flux form built from half-point metrics and speeds.
    #[default]
    Gcl,
    /// (J(t_n) - J(t_{n-1})) / dt_{n-1}, lagging one interval; zero on the
    /// first interval. Breaks dissipativity on fast meshes.
    BackwardDifference,
}

#[derive(Clone)]
pub struct System2D {
    problem: Problem2D,
    mesh: MovingMesh2D,
    bc: BcStrategy,
    rate: JacobianRate,
    boundary_nodes: Vec<(usize, usize)>,
    /// Full node index to boundary slot.
    boundary_slot: Vec<Option<usize>>,
}

pub fn build_system_2d(
    problem: &Problem2D,
    mesh: MovingMesh2D,
    bc: BcStrategy,
) -> Result<System2D> {
    build_system_2d_with(problem, mesh, bc, JacobianRate::Gcl)
}

pub fn build_system_2d_with(
    problem: &Problem2D,
    mesh: MovingMesh2D,
    bc: BcStrategy,
    rate: JacobianRate,
) -> Result<System2D> {
    if bc == BcStrategy::MovingDomainExtrapolated {
        return Err(Error::InvalidConfig(
            "boundary extrapolation needs a moving 1D domain; 2D domains are fixed".into(),
        ));
    }
    let boundary_nodes = mesh.boundary_nodes();
    let w = mesh.j_max() + 1;
    let mut boundary_slot = vec![None; w * (mesh.k_max() + 1)];
    for (slot, &(j, k)) in boundary_nodes.iter().enumerate() {
        boundary_slot[k * w + j] = Some(slot);
    }
    let sys = System2D {
        problem: problem.clone(),
        mesh,
        bc,
        rate,
        boundary_nodes,
        boundary_slot,
    };
    let worst = sys
        .mesh
        .grid()
        .times()
        .iter()
        .map(|&t| check_coef_condition_2d(&sys.problem, &sys.mesh, t))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if worst < 0.0 {
        warn!("2D coefficient condition fails on this mesh (worst margin {worst:e})");
    }
    Ok(sys)
}

fn mid(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1))
}

/// Worst margin over interior nodes of
/// J c + (1/2) [differences of metric-weighted b across the node] >= 0.
pub fn check_coef_condition_2d(problem: &Problem2D, mesh: &MovingMesh2D, t: f64) -> Result<f64> {
    let st = mesh.state(t)?;
    let mut worst = f64::INFINITY;
    for k in 1..st.k_max() {
        for j in 1..st.j_max() {
            let flux_xi = |jj: usize| -> Result<f64> {
                let (mx, my) = st.metric_xi_half(jj, k)?;
                let (x, y) = mid(st.pos(jj - 1, k), st.pos(jj, k));
                let (b1, b2) = (problem.b)(x, y, t);
                Ok(mx * b1 + my * b2)
            };
            let flux_eta = |kk: usize| -> Result<f64> {
                let (mx, my) = st.metric_eta_half(j, kk)?;
                let (x, y) = mid(st.pos(j, kk - 1), st.pos(j, kk));
                let (b1, b2) = (problem.b)(x, y, t);
                Ok(mx * b1 + my * b2)
            };
            let (x, y) = st.pos(j, k);
            let margin = st.jacobian_node(j, k)? * (problem.c)(x, y, t)
                + 0.5 * (flux_xi(j + 1)? - flux_xi(j)?)
                + 0.5 * (flux_eta(k + 1)? - flux_eta(k)?);
            worst = worst.min(margin);
        }
    }
    Ok(worst)
}

/// Interior operator plus per-boundary-node couplings at one time.
struct Assembly {
    stiffness: SparseMatrix,
    couplings: Vec<Vec<(usize, f64)>>,
}

impl System2D {
    pub fn mesh(&self) -> &MovingMesh2D {
        &self.mesh
    }

    pub fn problem(&self) -> &Problem2D {
        &self.problem
    }

    pub fn jacobian_rate(&self) -> JacobianRate {
        self.rate
    }

    /// Boundary nodes in the order used by [`SemiDiscreteSystem::boundary`].
    pub fn boundary_nodes(&self) -> &[(usize, usize)] {
        &self.boundary_nodes
    }

    fn interior_dims(&self) -> (usize, usize) {
        (self.mesh.j_max() - 1, self.mesh.k_max() - 1)
    }

    /// Interior index of node (j, k), both in 1..max.
    pub fn interior_index(&self, j: usize, k: usize) -> usize {
        (k - 1) * (self.mesh.j_max() - 1) + (j - 1)
    }

    fn state(&self, t: f64) -> MeshState2D {
        self.mesh
            .state(t)
            .expect("system times stay inside the mesh grid")
    }

    fn jacobian_rate_at(&self, st: &MeshState2D, j: usize, k: usize, t: f64) -> f64 {
        match self.rate {
            JacobianRate::Gcl => st.jacobian_dot(j, k).expect("interior node"),
            JacobianRate::BackwardDifference => {
                let grid = self.mesh.grid();
                let n = grid.interval(t);
                if n == 0 {
                    return 0.0;
                }
                let now = self
                    .mesh
                    .jacobian_node(j, k, grid.t(n))
                    .expect("interior node");
                let before = self
                    .mesh
                    .jacobian_node(j, k, grid.t(n - 1))
                    .expect("interior node");
                (now - before) / grid.dt(n - 1)
            }
        }
    }

    /// Stiffness rows over the full node set as (interior row, full node, value).
    pub fn full_operator(&self, t: f64) -> Vec<(usize, usize, f64)> {
        let st = self.state(t);
        let p = &self.problem;
        let (jm, km) = (st.j_max(), st.k_max());
        let w = jm + 1;
        let node = |j: usize, k: usize| k * w + j;
        let mut out = Vec::with_capacity(25 * (jm - 1) * (km - 1));

        for k in 1..km {
            for j in 1..jm {
                let row = self.interior_index(j, k);
                let here = node(j, k);
                let (x, y) = st.pos(j, k);
                let jac = st.jacobian_node(j, k).expect("interior node");
                let jdot = self.jacobian_rate_at(&st, j, k, t);
                out.push((row, here, -jdot - (p.c)(x, y, t) * jac));

                // convection through the east/west half points
                let q_xi = |jj: usize| {
                    let (mx, my) = st.metric_xi_half(jj, k).expect("xi stencil in range");
                    let (vx, vy) = st.speed_xi_half(jj, k).expect("xi stencil in range");
                    let (bx, by) = mid(st.pos(jj - 1, k), st.pos(jj, k));
                    let (b1, b2) = (p.b)(bx, by, t);
                    mx * (b1 - vx) + my * (b2 - vy)
                };
                let (qe, qw) = (q_xi(j + 1), q_xi(j));
                out.push((row, here, -0.5 * qe + 0.5 * qw));
                out.push((row, node(j + 1, k), -0.5 * qe));
                out.push((row, node(j - 1, k), 0.5 * qw));

                let q_eta = |kk: usize| {
                    let (mx, my) = st.metric_eta_half(j, kk).expect("eta stencil in range");
                    let (vx, vy) = st.speed_eta_half(j, kk).expect("eta stencil in range");
                    let (bx, by) = mid(st.pos(j, kk - 1), st.pos(j, kk));
                    let (b1, b2) = (p.b)(bx, by, t);
                    mx * (b1 - vx) + my * (b2 - vy)
                };
                let (qn, qs) = (q_eta(k + 1), q_eta(k));
                out.push((row, here, -0.5 * qn + 0.5 * qs));
                out.push((row, node(j, k + 1), -0.5 * qn));
                out.push((row, node(j, k - 1), 0.5 * qs));
            }
        }

        // diffusion, cell by cell; corners ordered SW, SE, NW, NE
        const D_XI: [f64; 4] = [-1.0, 1.0, -1.0, 1.0];
        const D_ETA: [f64; 4] = [-1.0, -1.0, 1.0, 1.0];
        for k0 in 1..=km {
            for j0 in 1..=jm {
                let corners = [(j0 - 1, k0 - 1), (j0, k0 - 1), (j0 - 1, k0), (j0, k0)];
                let cell = self.cell_metrics_raw(&st, j0, k0);
                let mut cx = 0.0;
                let mut cy = 0.0;
                for &(j, k) in &corners {
                    let (x, y) = st.pos(j, k);
                    cx += 0.25 * x;
                    cy += 0.25 * y;
                }
                let s = (p.a)(cx, cy, t) / (2.0 * cell.4);
                let alpha = s * (cell.0 * cell.0 + cell.1 * cell.1);
                let beta = s * (cell.0 * cell.2 + cell.1 * cell.3);
                let gamma = s * (cell.2 * cell.2 + cell.3 * cell.3);
                for (c, &(j, k)) in corners.iter().enumerate() {
                    if j == 0 || k == 0 || j == jm || k == km {
                        continue;
                    }
                    let row = self.interior_index(j, k);
                    for (d, &(jd, kd)) in corners.iter().enumerate() {
                        let p1 = alpha * D_XI[d] + beta * D_ETA[d];
                        let p2 = beta * D_XI[d] + gamma * D_ETA[d];
                        out.push((row, node(jd, kd), -0.5 * (D_XI[c] * p1 + D_ETA[c] * p2)));
                    }
                }
            }
        }
        out
    }

    /// Cell-center metrics without the positivity check.
    fn cell_metrics_raw(&self, st: &MeshState2D, j: usize, k: usize) -> (f64, f64, f64, f64, f64) {
        let (p00, p10, p01, p11) = (
            st.pos(j - 1, k - 1),
            st.pos(j, k - 1),
            st.pos(j - 1, k),
            st.pos(j, k),
        );
        let x_eta = 0.5 * (p11.0 - p10.0 + p01.0 - p00.0);
        let y_eta = 0.5 * (p11.1 - p10.1 + p01.1 - p00.1);
        let x_xi = 0.5 * (p11.0 - p01.0 + p10.0 - p00.0);
        let y_xi = 0.5 * (p11.1 - p01.1 + p10.1 - p00.1);
        let (xi_x, xi_y, eta_x, eta_y) = (y_eta, -x_eta, -y_xi, x_xi);
        (xi_x, xi_y, eta_x, eta_y, xi_x * eta_y - xi_y * eta_x)
    }

    fn assemble(&self, t: f64) -> Assembly {
        let (nj, nk) = self.interior_dims();
        let l = nj * nk;
        let w = self.mesh.j_max() + 1;
        let mut trip = Vec::new();
        let mut couplings = vec![Vec::new(); self.boundary_nodes.len()];
        for (row, full, v) in self.full_operator(t) {
            match self.boundary_slot[full] {
                Some(slot) => couplings[slot].push((row, v)),
                None => {
                    let (j, k) = (full % w, full / w);
                    trip.push((row, self.interior_index(j, k), v));
                }
            }
        }
        let stiffness =
            SparseMatrix::from_triplets(l, l, &trip).expect("stencil indices are in range");
        Assembly {
            stiffness,
            couplings,
        }
    }

    fn boundary_from(&self, t: f64, couplings: Vec<Vec<(usize, f64)>>) -> Vec<BoundaryNode> {
        let st = self.state(t);
        self.boundary_nodes
            .iter()
            .zip(couplings)
            .map(|(&(j, k), coupling)| {
                let (x, y) = st.pos(j, k);
                BoundaryNode {
                    value: (self.problem.g)(x, y, t),
                    coupling,
                    extrapolation: None,
                }
            })
            .collect()
    }
}

impl SemiDiscreteSystem for System2D {
    fn dim(&self) -> usize {
        let (nj, nk) = self.interior_dims();
        nj * nk
    }

    fn mass_diag(&self, t: f64) -> Result<DiagonalMatrix> {
        let st = self.mesh.state(t)?;
        st.check_untangled(t)?;
        let (jm, km) = (st.j_max(), st.k_max());
        let mut m = Vec::with_capacity(self.dim());
        for k in 1..km {
            for j in 1..jm {
                m.push(st.jacobian_node(j, k)?);
            }
        }
        Ok(DiagonalMatrix(m))
    }

    fn dsqrtmass_diag(&self, t: f64) -> Vec<f64> {
        let st = self.state(t);
        let (jm, km) = (st.j_max(), st.k_max());
        let mut out = Vec::with_capacity(self.dim());
        for k in 1..km {
            for j in 1..jm {
                let jac = st.jacobian_node(j, k).expect("interior node");
                out.push(st.jacobian_dot(j, k).expect("interior node") / (2.0 * jac.sqrt()));
            }
        }
        out
    }

    fn stiffness(&self, t: f64) -> SparseMatrix {
        self.assemble(t).stiffness
    }

    fn source(&self, t: f64) -> Vec<f64> {
        let st = self.state(t);
        let (jm, km) = (st.j_max(), st.k_max());
        let mut out = Vec::with_capacity(self.dim());
        for k in 1..km {
            for j in 1..jm {
                let (x, y) = st.pos(j, k);
                out.push(
                    st.jacobian_node(j, k).expect("interior node") * (self.problem.f)(x, y, t),
                );
            }
        }
        out
    }

    fn boundary(&self, t: f64) -> Result<Vec<BoundaryNode>> {
        let asm = self.assemble(t);
        Ok(self.boundary_from(t, asm.couplings))
    }

    fn bc_strategy(&self) -> BcStrategy {
        self.bc
    }

    fn snapshot(&self, t: f64) -> Result<Snapshot> {
        let mass = self.mass_diag(t)?;
        let asm = self.assemble(t);
        Ok(Snapshot {
            mass,
            dsqrtmass: self.dsqrtmass_diag(t),
            stiffness: asm.stiffness,
            source: self.source(t),
            boundary: self.boundary_from(t, asm.couplings),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::problems::Rect;
    use std::sync::Arc;

    fn cartesian(n: usize, h: f64) -> MovingMesh2D {
        let grid = TimeGrid::uniform(1.0, 0.5).unwrap();
        MovingMesh2D::from_generator(grid, n, n, |j, k, _| (j as f64 * h, k as f64 * h)).unwrap()
    }

    fn rect(l: f64) -> Rect {
        Rect {
            x0: 0.0,
            x1: l,
            y0: 0.0,
            y1: l,
        }
    }

    #[test]
    fn constants_are_annihilated() {
        let p = Problem2D::constant(1.0, (0.0, 0.0), 0.0, rect(5.0));
        let sys = build_system_2d(&p, cartesian(5, 1.0), BcStrategy::ApproxPoints).unwrap();
        let mut row_sum = vec![0.0; sys.dim()];
        for (r, _, v) in sys.full_operator(0.2) {
            row_sum[r] += v;
        }
        assert!(row_sum.iter().all(|s| s.abs() < 1e-14));
    }

    #[test]
    fn static_mesh_mass_is_cell_area() {
        let p = Problem2D::constant(1.0, (0.0, 0.0), 0.0, rect(1.0));
        let sys = build_system_2d(&p, cartesian(4, 0.25), BcStrategy::ApproxPoints).unwrap();
        let m = sys.mass_diag(0.0).unwrap();
        assert!(m.0.iter().all(|v| (v - 0.0625).abs() < 1e-15));
        assert!(sys.dsqrtmass_diag(0.3).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn coefficient_condition_margins() {
        let mesh = cartesian(6, 0.5);
        let mut p = Problem2D::constant(1.0, (0.0, 0.0), 0.0, rect(3.0));
        assert_eq!(check_coef_condition_2d(&p, &mesh, 0.0).unwrap(), 0.0);
        p.b = Arc::new(|x, y, _| (x, y));
        assert!(check_coef_condition_2d(&p, &mesh, 0.0).unwrap() > 0.0);
        p.b = Arc::new(|x, y, _| (-x, -y));
        assert!(check_coef_condition_2d(&p, &mesh, 0.0).unwrap() < 0.0);
    }

    #[test]
    fn extrapolation_rejected() {
        let p = Problem2D::constant(1.0, (0.0, 0.0), 0.0, rect(1.0));
        assert!(
            build_system_2d(&p, cartesian(3, 0.5), BcStrategy::MovingDomainExtrapolated).is_err()
        );
    }
}
