//! Finite-difference solvers for linear convection-diffusion equations on
//! moving meshes, integrated in time with a sqrt(M)-transformed
//! Gauss-Legendre collocation scheme of order 2m.
//!
//! The spatial builders ([`disc1d`], [`disc2d`]) produce a
//! [`SemiDiscreteSystem`] M(t) u' = A(t) u + f(t) with diagonal M. When the
//! symmetric part of A + sqrt(M) d sqrt(M)/dt is negative semi-definite,
//! [`integrate`] keeps the discrete energy (v^n)^T v^n nonincreasing for
//! every step size.

pub mod disc1d;
pub mod disc2d;
pub mod error;
pub mod grid;
pub mod harness;
pub mod integrator;
pub mod linops;
pub mod mesh1d;
pub mod mesh2d;
pub mod problems;
pub mod quadrature;

pub use disc1d::{
    build_conservative, build_nonconservative_halfpoint, build_twocell, Scheme1D, System1D,
};
pub use disc2d::{build_system_2d, JacobianRate, System2D};
pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use harness::{convergence, run, stability_stress, ErrorReport, RunConfig, SweepMode};
pub use integrator::{
    assemble_b, certify_dissipativity, integrate, integrate_with, step_backward_euler,
    step_collocation, BcStrategy, BoundaryNode, IntegrateOptions, SemiDiscreteSystem,
    SolutionHistory,
};
pub use linops::{max_symmetric_eig, solve_sparse, DiagonalMatrix, SparseMatrix};
pub use mesh1d::MovingMesh1D;
pub use mesh2d::MovingMesh2D;
pub use quadrature::{build_scheme, gauss_nodes, CollocationScheme};
