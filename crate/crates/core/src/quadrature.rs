//! Gauss-Legendre rules on (0, 1) and the Lagrange machinery behind the
//! collocation time integrator.
//!
//! A step of the m-point scheme represents the solution on [t_n, t_n + dt] as
//! a degree-m polynomial through the interpolation nodes `rho_tilde`
//! (0, the m-1 interior Gauss points, 1) and collocates the ODE at the m
//! Gauss points `rho`. The matrices `l` and `d` hold the Lagrange basis and
//! its derivative evaluated at the collocation points.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Largest supported number of collocation points.
pub const MAX_ORDER: usize = 10;

/// Evaluates the Legendre polynomial P_n and its derivative at x in [-1, 1].
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1); nodes are strictly inside (-1, 1)
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes and weights of the m-point Gauss-Legendre rule mapped to (0, 1).
///
/// Initial guesses come from the eigenvalues of the symmetric tridiagonal
/// Jacobi matrix of the Legendre recurrence; each root is then polished by
/// Newton iteration on P_m.
pub fn gauss_nodes(m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if m == 0 || m > MAX_ORDER {
        return Err(Error::InvalidOrder(m));
    }
    let mut jacobi = DMatrix::<f64>::zeros(m, m);
    for k in 1..m {
        let kf = k as f64;
        let beta = kf / (4.0 * kf * kf - 1.0).sqrt();
        jacobi[(k - 1, k)] = beta;
        jacobi[(k, k - 1)] = beta;
    }
    let mut guesses: Vec<f64> = SymmetricEigen::new(jacobi)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    guesses.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for mut x in guesses {
        for _ in 0..100 {
            let (p, dp) = legendre(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(m, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes.push(0.5 * (x + 1.0));
        weights.push(0.5 * w);
    }
    // exact symmetry about 1/2
    for i in 0..m / 2 {
        let j = m - 1 - i;
        let r = 0.5 * (nodes[i] + 1.0 - nodes[j]);
        nodes[i] = r;
        nodes[j] = 1.0 - r;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.5;
    }
    Ok((nodes, weights))
}

/// Value of the k-th Lagrange basis polynomial on `nodes` at `x`.
pub fn lagrange_basis(nodes: &[f64], k: usize, x: f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != k)
        .map(|(_, &xi)| (x - xi) / (nodes[k] - xi))
        .product()
}

/// Derivative of the k-th Lagrange basis polynomial on `nodes` at `x`.
pub fn lagrange_basis_derivative(nodes: &[f64], k: usize, x: f64) -> f64 {
    let mut sum = 0.0;
    for i in (0..nodes.len()).filter(|&i| i != k) {
        let mut term = 1.0 / (nodes[k] - nodes[i]);
        for p in (0..nodes.len()).filter(|&p| p != k && p != i) {
            term *= (x - nodes[p]) / (nodes[k] - nodes[p]);
        }
        sum += term;
    }
    sum
}

/// The m-point Gauss-Legendre collocation scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct CollocationScheme {
    pub m: usize,
    /// Collocation points in (0, 1).
    pub rho: Vec<f64>,
    /// Quadrature weights associated with `rho`.
    pub weights: Vec<f64>,
    /// Interpolation nodes: 0, the m-1 interior Gauss points, 1.
    pub rho_tilde: Vec<f64>,
    /// `l[j][k]` is the k-th basis polynomial at `rho[j]`.
    pub l: Vec<Vec<f64>>,
    /// `d[j][k]` is the derivative of the k-th basis polynomial at `rho[j]`.
    pub d: Vec<Vec<f64>>,
}

impl CollocationScheme {
    pub fn new(m: usize) -> Result<Self> {
        let (rho, weights) = gauss_nodes(m)?;
        let mut rho_tilde = Vec::with_capacity(m + 1);
        rho_tilde.push(0.0);
        if m > 1 {
            rho_tilde.extend(gauss_nodes(m - 1)?.0);
        }
        rho_tilde.push(1.0);

        let l = rho
            .iter()
            .map(|&r| (0..=m).map(|k| lagrange_basis(&rho_tilde, k, r)).collect())
            .collect();
        let d = rho
            .iter()
            .map(|&r| {
                (0..=m)
                    .map(|k| lagrange_basis_derivative(&rho_tilde, k, r))
                    .collect()
            })
            .collect();
        Ok(Self {
            m,
            rho,
            weights,
            rho_tilde,
            l,
            d,
        })
    }

    /// Temporal order of accuracy, 2m.
    pub fn order(&self) -> usize {
        2 * self.m
    }

    /// Interpolation basis evaluated at an arbitrary point of the unit step.
    pub fn interpolation_weights(&self, rho: f64) -> Vec<f64> {
        (0..=self.m)
            .map(|k| lagrange_basis(&self.rho_tilde, k, rho))
            .collect()
    }
}

/// Shorthand for [`CollocationScheme::new`].
pub fn build_scheme(m: usize) -> Result<CollocationScheme> {
    CollocationScheme::new(m)
}
