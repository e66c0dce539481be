//! Time integration of M(t) u' = A(t) u + f(t) with diagonal M.
//!
//! The system is rewritten in v = sqrt(M) u as v' = B(t) v + sqrt(M)^-1 f
//! with B = sqrt(M)^-1 (A + sqrt(M) d sqrt(M)/dt) sqrt(M)^-1. When
//! A + sqrt(M) d sqrt(M)/dt is negative semi-definite so is B, and Gauss
//! collocation applied to the v-system gives (v^{n+1})^T v^{n+1} <=
//! (v^n)^T v^n for every step size.
//!
//! Dirichlet boundary nodes never enter the algebraic system. Their values
//! are carried per step as a degree-m polynomial on the interpolation nodes
//! and enter the interior rows through the stiffness couplings; the
//! [`BcStrategy`] decides where that polynomial is pinned to the data.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linops::{max_symmetric_eig, solve_sparse, DiagonalMatrix, SparseMatrix};
use crate::quadrature::CollocationScheme;

/// Relative per-step tolerance on energy growth.
pub const ENERGY_TOLERANCE: f64 = 1e-12;

/// Certificate tolerance relative to the largest stiffness entry.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-9;

/// Where Dirichlet data is imposed within a collocation step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum BcStrategy {
    /// Boundary values match g at the Gauss collocation times.
    #[serde(rename = "gauss", alias = "gauss_points")]
    GaussPoints,
    /// Boundary values match g at the interpolation nodes, including t_{n+1}.
    #[default]
    #[serde(rename = "approx", alias = "approx_points")]
    ApproxPoints,
    /// Linear extrapolation from the physical boundary through the first
    /// interior node, imposed at the interpolation nodes.
    #[serde(rename = "extrap", alias = "moving_domain_extrapolated")]
    MovingDomainExtrapolated,
}

/// A Dirichlet node eliminated from the interior system, evaluated at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryNode {
    /// Boundary data g at this time.
    pub value: f64,
    /// Interior rows coupled to this node with their stiffness coefficients.
    pub coupling: Vec<(usize, f64)>,
    /// `(interior index, alpha)`: the node value is
    /// `(1 - alpha) * value + alpha * u[interior index]`.
    pub extrapolation: Option<(usize, f64)>,
}

/// Everything the integrator needs from a system at one time.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub mass: DiagonalMatrix,
    pub dsqrtmass: Vec<f64>,
    pub stiffness: SparseMatrix,
    /// Interior forcing M f, without boundary contributions.
    pub source: Vec<f64>,
    pub boundary: Vec<BoundaryNode>,
}

/// Semi-discrete system M(t) u' = A(t) u + f(t) with diagonal mass.
///
/// Evaluators must be pure: the integrator may call them in any order and
/// from several threads.
pub trait SemiDiscreteSystem: Sync {
    fn dim(&self) -> usize;

    /// Entries of M(t).
    fn mass_diag(&self, t: f64) -> Result<DiagonalMatrix>;

    /// Entries of d sqrt(M)/dt.
    fn dsqrtmass_diag(&self, t: f64) -> Vec<f64>;

    /// A(t) restricted to interior unknowns.
    fn stiffness(&self, t: f64) -> SparseMatrix;

    /// Interior forcing M f without boundary contributions.
    fn source(&self, t: f64) -> Vec<f64>;

    /// Eliminated Dirichlet nodes. The node set must not depend on t.
    fn boundary(&self, _t: f64) -> Result<Vec<BoundaryNode>> {
        Ok(Vec::new())
    }

    fn bc_strategy(&self) -> BcStrategy {
        BcStrategy::ApproxPoints
    }

    /// f(t) with boundary data folded in pointwise.
    fn load(&self, t: f64) -> Result<Vec<f64>> {
        let mut f = self.source(t);
        for node in self.boundary(t)? {
            for (row, c) in node.coupling {
                f[row] += c * node.value;
            }
        }
        Ok(f)
    }

    fn snapshot(&self, t: f64) -> Result<Snapshot> {
        Ok(Snapshot {
            mass: self.mass_diag(t)?,
            dsqrtmass: self.dsqrtmass_diag(t),
            stiffness: self.stiffness(t),
            source: self.source(t),
            boundary: self.boundary(t)?,
        })
    }
}

/// B = sqrt(M)^-1 (A + sqrt(M) d sqrt(M)/dt) sqrt(M)^-1 from a snapshot.
fn transformed_operator(snap: &Snapshot, t: f64) -> Result<(SparseMatrix, Vec<f64>)> {
    snap.mass.check_positive(t)?;
    let s = snap.mass.sqrt();
    let inv = s.recip();
    let diag: Vec<f64> =
        s.0.iter()
            .zip(&snap.dsqrtmass)
            .map(|(a, b)| a * b)
            .collect();
    let b = snap.stiffness.add_diagonal(&diag).scale(&inv.0, &inv.0);
    Ok((b, s.0))
}

pub fn assemble_b(sys: &dyn SemiDiscreteSystem, t: f64) -> Result<SparseMatrix> {
    let snap = sys.snapshot(t)?;
    Ok(transformed_operator(&snap, t)?.0)
}

/// A(t) + sqrt(M) d sqrt(M)/dt, the operator whose symmetric part must be
/// negative semi-definite.
pub fn dissipation_operator(sys: &dyn SemiDiscreteSystem, t: f64) -> Result<SparseMatrix> {
    let m = sys.mass_diag(t)?;
    m.check_positive(t)?;
    let s = m.sqrt();
    let diag: Vec<f64> =
        s.0.iter()
            .zip(sys.dsqrtmass_diag(t))
            .map(|(a, b)| a * b)
            .collect();
    Ok(sys.stiffness(t).add_diagonal(&diag))
}

/// Largest eigenvalue of the symmetric part of A + sqrt(M) d sqrt(M)/dt at
/// each sampled time.
pub fn certify_dissipativity(sys: &dyn SemiDiscreteSystem, times: &[f64]) -> Result<Vec<f64>> {
    times
        .iter()
        .map(|&t| max_symmetric_eig(&dissipation_operator(sys, t)?))
        .collect()
}

/// Certificate threshold at time t: 1e-9 times the largest stiffness entry.
pub fn certificate_threshold(sys: &dyn SemiDiscreteSystem, t: f64) -> f64 {
    CERTIFICATE_TOLERANCE * sys.stiffness(t).max_abs()
}

/// One backward Euler step of the transformed system.
pub fn step_backward_euler(
    sys: &dyn SemiDiscreteSystem,
    t_n: f64,
    dt: f64,
    v_n: &[f64],
) -> Result<Vec<f64>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "step size must be positive, got {dt}"
        )));
    }
    let t1 = t_n + dt;
    let snap = sys.snapshot(t1)?;
    let (b, s) = transformed_operator(&snap, t1)?;
    let l = sys.dim();
    let mut t = Vec::with_capacity(b.nnz() + l);
    t.extend((0..l).map(|i| (i, i, 1.0)));
    t.extend(b.triplets().map(|(i, j, v)| (i, j, -dt * v)));
    let lhs = SparseMatrix::from_triplets(l, l, &t)?;
    let f = sys.load(t1)?;
    let rhs: Vec<f64> = (0..l).map(|i| v_n[i] + dt * f[i] / s[i]).collect();
    solve_sparse(&lhs, &rhs)
}

/// Result of one collocation step.
#[derive(Clone, Debug)]
pub struct StepOutput {
    pub v_next: Vec<f64>,
    /// Stage values at the interpolation nodes, `stages[0] = v_n`.
    pub stages: Vec<Vec<f64>>,
    /// Boundary node values at t_{n+1}.
    pub boundary_next: Vec<f64>,
}

/// Boundary values on the interpolation nodes for one node, given the
/// interior stage values (already converted to u).
fn boundary_stage_values(
    strategy: BcStrategy,
    scheme: &CollocationScheme,
    b0: f64,
    g_tilde: &[BoundaryNode],
    g_gauss: &[f64],
    u_anchor: &[Option<f64>],
) -> Vec<f64> {
    let m = scheme.m;
    match strategy {
        BcStrategy::GaussPoints => {
            // degree-m polynomial through b0 at 0 matching g at the Gauss points
            let lmat = DMatrix::from_fn(m, m, |j, k| scheme.l[j][k + 1]);
            let rhs = nalgebra::DVector::from_fn(m, |j, _| g_gauss[j] - scheme.l[j][0] * b0);
            let sol = lmat
                .lu()
                .solve(&rhs)
                .expect("Lagrange collocation matrix is nonsingular");
            std::iter::once(b0).chain(sol.iter().copied()).collect()
        }
        BcStrategy::ApproxPoints | BcStrategy::MovingDomainExtrapolated => {
            let mut out = Vec::with_capacity(m + 1);
            out.push(b0);
            for k in 1..=m {
                let node = &g_tilde[k - 1];
                let val = match (strategy, node.extrapolation, u_anchor[k - 1]) {
                    (BcStrategy::MovingDomainExtrapolated, Some((_, alpha)), Some(u)) => {
                        (1.0 - alpha) * node.value + alpha * u
                    }
                    _ => node.value,
                };
                out.push(val);
            }
            out
        }
    }
}

/// One step of m-point Gauss-Legendre collocation on the transformed
/// system.
///
/// `boundary_n` holds the boundary node values at t_n (empty when the
/// system has no eliminated nodes).
pub fn step_collocation(
    sys: &dyn SemiDiscreteSystem,
    scheme: &CollocationScheme,
    t_n: f64,
    dt: f64,
    v_n: &[f64],
    boundary_n: &[f64],
) -> Result<StepOutput> {
    if !(dt > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "step size must be positive, got {dt}"
        )));
    }
    let l = sys.dim();
    let m = scheme.m;
    if v_n.len() != l {
        return Err(Error::DimensionMismatch(format!(
            "state has length {}, system {l}",
            v_n.len()
        )));
    }
    let strategy = sys.bc_strategy();

    // Gauss-time operators
    let mut gauss = Vec::with_capacity(m);
    for &rho in &scheme.rho {
        let t = t_n + rho * dt;
        let snap = sys.snapshot(t)?;
        let (b, s) = transformed_operator(&snap, t)?;
        gauss.push((snap, b, s));
    }
    let nb = gauss[0].0.boundary.len();
    if boundary_n.len() != nb {
        return Err(Error::DimensionMismatch(format!(
            "{} boundary values for {nb} boundary nodes",
            boundary_n.len()
        )));
    }

    // boundary data at the interpolation nodes k = 1..m
    let needs_tilde = nb > 0 && strategy != BcStrategy::GaussPoints;
    let mut tilde_nodes: Vec<Vec<BoundaryNode>> = Vec::new();
    let mut tilde_sqrt_mass: Vec<Vec<f64>> = Vec::new();
    if needs_tilde {
        for &r in &scheme.rho_tilde[1..] {
            let t = t_n + r * dt;
            tilde_nodes.push(sys.boundary(t)?);
            if strategy == BcStrategy::MovingDomainExtrapolated {
                let mass = sys.mass_diag(t)?;
                mass.check_positive(t)?;
                tilde_sqrt_mass.push(mass.sqrt().0);
            }
        }
    }
    let extrapolating = strategy == BcStrategy::MovingDomainExtrapolated;

    let idx = |node: usize, stage: usize| node * m + (stage - 1);
    let n_unknowns = l * m;
    let mut trip: Vec<(usize, usize, f64)> = Vec::new();
    let mut rhs = vec![0.0; n_unknowns];

    for (j, (snap, b, s)) in gauss.iter().enumerate() {
        let lj = &scheme.l[j];
        let dj = &scheme.d[j];
        for k in 1..=m {
            let dk = dj[k] / dt;
            for r in 0..l {
                trip.push((idx(r, j + 1), idx(r, k), dk));
            }
            if lj[k] != 0.0 {
                for (r, c, v) in b.triplets() {
                    trip.push((idx(r, j + 1), idx(c, k), -lj[k] * v));
                }
            }
        }

        // known forcing
        let mut forcing = snap.source.clone();
        for (bi, node) in snap.boundary.iter().enumerate() {
            let known = match strategy {
                BcStrategy::GaussPoints => node.value,
                _ => {
                    let mut acc = lj[0] * boundary_n[bi];
                    for k in 1..=m {
                        let tn = &tilde_nodes[k - 1][bi];
                        let alpha = match (extrapolating, tn.extrapolation) {
                            (true, Some((_, a))) => a,
                            _ => 0.0,
                        };
                        acc += lj[k] * (1.0 - alpha) * tn.value;
                    }
                    acc
                }
            };
            for &(row, c) in &node.coupling {
                forcing[row] += c * known;
            }
            if extrapolating {
                for k in 1..=m {
                    let tn = &tilde_nodes[k - 1][bi];
                    if let Some((anchor, alpha)) = tn.extrapolation {
                        if alpha == 0.0 || lj[k] == 0.0 {
                            continue;
                        }
                        let scale = lj[k] * alpha / tilde_sqrt_mass[k - 1][anchor];
                        for &(row, c) in &node.coupling {
                            trip.push((idx(row, j + 1), idx(anchor, k), -c * scale / s[row]));
                        }
                    }
                }
            }
        }
        let bv0 = b.mul_vec(v_n);
        for r in 0..l {
            rhs[idx(r, j + 1)] = forcing[r] / s[r] - dj[0] / dt * v_n[r] + lj[0] * bv0[r];
        }
    }

    let stage_matrix = SparseMatrix::from_triplets(n_unknowns, n_unknowns, &trip)?;
    let sol = solve_sparse(&stage_matrix, &rhs)?;
    let mut stages = Vec::with_capacity(m + 1);
    stages.push(v_n.to_vec());
    for k in 1..=m {
        stages.push((0..l).map(|i| sol[idx(i, k)]).collect::<Vec<_>>());
    }

    let mut boundary_next = Vec::with_capacity(nb);
    for bi in 0..nb {
        let g_gauss: Vec<f64> = gauss
            .iter()
            .map(|(snap, _, _)| snap.boundary[bi].value)
            .collect();
        let (g_tilde, anchors): (Vec<BoundaryNode>, Vec<Option<f64>>) = if needs_tilde {
            (1..=m)
                .map(|k| {
                    let node = tilde_nodes[k - 1][bi].clone();
                    let u = match (extrapolating, node.extrapolation) {
                        (true, Some((a, _))) => Some(stages[k][a] / tilde_sqrt_mass[k - 1][a]),
                        _ => None,
                    };
                    (node, u)
                })
                .unzip()
        } else {
            (Vec::new(), Vec::new())
        };
        let values = boundary_stage_values(
            strategy,
            scheme,
            boundary_n[bi],
            &g_tilde,
            &g_gauss,
            &anchors,
        );
        boundary_next.push(values[m]);
    }

    Ok(StepOutput {
        v_next: stages[m].clone(),
        stages,
        boundary_next,
    })
}

/// Recorded solution of an integration run.
#[derive(Clone, Debug)]
pub struct SolutionHistory {
    pub grid: TimeGrid,
    /// Interior nodal values u^n per level.
    pub u: Vec<Vec<f64>>,
    /// Boundary node values per level.
    pub boundary: Vec<Vec<f64>>,
    /// (v^n)^T v^n = (u^n)^T M(t_n) u^n per level.
    pub energy: Vec<f64>,
    /// Whether the energy monitor was active.
    pub monitored: bool,
    /// Steps n with E_{n+1} > E_n (1 + 1e-12), when monitored.
    pub energy_violations: Vec<usize>,
    /// Stage values per step, when requested.
    pub stages: Option<Vec<Vec<Vec<f64>>>>,
}

impl SolutionHistory {
    /// Energy monotonicity, or `None` when the monitor was off.
    pub fn energy_monotone(&self) -> Option<bool> {
        self.monitored.then(|| self.energy_violations.is_empty())
    }

    pub fn final_u(&self) -> &[f64] {
        self.u.last().unwrap()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct IntegrateOptions {
    /// The caller declares f = 0 and g = 0; energy growth is flagged.
    pub monitor_energy: bool,
    pub keep_stages: bool,
}

fn energy(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

pub fn integrate(
    sys: &dyn SemiDiscreteSystem,
    grid: &TimeGrid,
    scheme: &CollocationScheme,
    u0: &[f64],
    monitor: bool,
) -> Result<SolutionHistory> {
    integrate_with(
        sys,
        grid,
        scheme,
        u0,
        IntegrateOptions {
            monitor_energy: monitor,
            keep_stages: false,
        },
    )
}

pub fn integrate_with(
    sys: &dyn SemiDiscreteSystem,
    grid: &TimeGrid,
    scheme: &CollocationScheme,
    u0: &[f64],
    opts: IntegrateOptions,
) -> Result<SolutionHistory> {
    let l = sys.dim();
    if u0.len() != l {
        return Err(Error::DimensionMismatch(format!(
            "u0 has length {}, system {l}",
            u0.len()
        )));
    }
    let t0 = grid.t(0);
    let mass0 = sys.mass_diag(t0)?;
    mass0.check_positive(t0)?;
    let mut v = mass0.sqrt().mul_vec(u0);
    let mut b: Vec<f64> = sys.boundary(t0)?.iter().map(|n| n.value).collect();

    let mut hist = SolutionHistory {
        grid: grid.clone(),
        u: vec![u0.to_vec()],
        boundary: vec![b.clone()],
        energy: vec![energy(&v)],
        monitored: opts.monitor_energy,
        energy_violations: Vec::new(),
        stages: opts.keep_stages.then(Vec::new),
    };
    for n in 0..grid.steps() {
        let out = step_collocation(sys, scheme, grid.t(n), grid.dt(n), &v, &b).map_err(|e| {
            Error::StepFailure {
                step: n,
                source: Box::new(e),
            }
        })?;
        v = out.v_next;
        b = out.boundary_next;
        let t1 = grid.t(n + 1);
        let mass = sys.mass_diag(t1)?;
        mass.check_positive(t1)?;
        let u: Vec<f64> = v
            .iter()
            .zip(&mass.0)
            .map(|(vi, mi)| vi / mi.sqrt())
            .collect();
        let e = energy(&v);
        if opts.monitor_energy && e > hist.energy[n] * (1.0 + ENERGY_TOLERANCE) {
            log::warn!("energy increased at step {n}: {} -> {e}", hist.energy[n]);
            hist.energy_violations.push(n);
        }
        hist.energy.push(e);
        hist.u.push(u);
        hist.boundary.push(b.clone());
        if let Some(st) = hist.stages.as_mut() {
            st.push(out.stages);
        }
    }
    Ok(hist)
}
