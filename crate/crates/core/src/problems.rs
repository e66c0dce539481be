//! Problem descriptors and the built-in manufactured-solution examples.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::integrator::{BcStrategy, SolutionHistory};
use crate::mesh1d::MovingMesh1D;
use crate::mesh2d::MovingMesh2D;

/// f(x, t).
pub type Field1 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// f(x, y, t).
pub type Field2 = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
/// (b1, b2)(x, y, t).
pub type VectorField2 = Arc<dyn Fn(f64, f64, f64) -> (f64, f64) + Send + Sync>;
/// x(t).
pub type Path1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

fn constant1(v: f64) -> Field1 {
    Arc::new(move |_, _| v)
}

fn constant2(v: f64) -> Field2 {
    Arc::new(move |_, _, _| v)
}

/// Interval (x_l(t), x_r(t)).
#[derive(Clone)]
pub struct Domain1D {
    pub xl: Path1,
    pub xr: Path1,
    pub moving: bool,
}

impl Domain1D {
    pub fn fixed(xl: f64, xr: f64) -> Self {
        Self {
            xl: Arc::new(move |_| xl),
            xr: Arc::new(move |_| xr),
            moving: false,
        }
    }

    pub fn moving(xl: Path1, xr: Path1) -> Self {
        Self {
            xl,
            xr,
            moving: true,
        }
    }

    pub fn width(&self, t: f64) -> Result<f64> {
        let w = (self.xr)(t) - (self.xl)(t);
        if !(w >= 1e-6) {
            return Err(Error::DegenerateDomain { t, width: w });
        }
        Ok(w)
    }
}

/// u_t + (b u)_x + c u = (a u_x)_x + f on (x_l(t), x_r(t)), u = g on the
/// boundary, u(x, 0) = u0(x).
#[derive(Clone)]
pub struct Problem1D {
    pub a: Field1,
    pub b: Field1,
    pub c: Field1,
    pub f: Field1,
    pub g: Field1,
    pub u0: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub domain: Domain1D,
    /// f and g vanish identically.
    pub homogeneous: bool,
}

impl Problem1D {
    /// Constant coefficients, zero data, on a fixed interval.
    pub fn constant(a: f64, b: f64, c: f64, xl: f64, xr: f64) -> Self {
        Self {
            a: constant1(a),
            b: constant1(b),
            c: constant1(c),
            f: constant1(0.0),
            g: constant1(0.0),
            u0: Arc::new(|_| 0.0),
            domain: Domain1D::fixed(xl, xr),
            homogeneous: true,
        }
    }

    /// Same coefficients and initial data with f = 0 and g = 0.
    pub fn homogeneous(&self) -> Self {
        Self {
            f: constant1(0.0),
            g: constant1(0.0),
            homogeneous: true,
            ..self.clone()
        }
    }

    /// Smallest value of a over `samples` points per axis of the space-time
    /// box [x_l, x_r] x [0, t_end].
    pub fn min_diffusion(&self, t_end: f64, samples: usize) -> f64 {
        let mut lo = f64::INFINITY;
        for i in 0..=samples {
            let t = t_end * i as f64 / samples as f64;
            let (xl, xr) = ((self.domain.xl)(t), (self.domain.xr)(t));
            for k in 0..=samples {
                let x = xl + (xr - xl) * k as f64 / samples as f64;
                lo = lo.min((self.a)(x, t));
            }
        }
        lo
    }
}

/// The rectangle [x0, x1] x [y0, y1].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

/// 2D analogue of [`Problem1D`] on a fixed rectangle.
#[derive(Clone)]
pub struct Problem2D {
    pub a: Field2,
    pub b: VectorField2,
    pub c: Field2,
    pub f: Field2,
    pub g: Field2,
    pub u0: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub domain: Rect,
    pub homogeneous: bool,
}

impl Problem2D {
    pub fn constant(a: f64, b: (f64, f64), c: f64, domain: Rect) -> Self {
        Self {
            a: constant2(a),
            b: Arc::new(move |_, _, _| b),
            c: constant2(c),
            f: constant2(0.0),
            g: constant2(0.0),
            u0: Arc::new(|_, _| 0.0),
            domain,
            homogeneous: true,
        }
    }

    pub fn homogeneous(&self) -> Self {
        Self {
            f: constant2(0.0),
            g: constant2(0.0),
            homogeneous: true,
            ..self.clone()
        }
    }
}

#[derive(Clone)]
pub struct ExactSolution1D(pub Field1);

#[derive(Clone)]
pub struct ExactSolution2D(pub Field2);

impl ExactSolution1D {
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        (self.0)(x, t)
    }
}

impl ExactSolution2D {
    pub fn eval(&self, x: f64, y: f64, t: f64) -> f64 {
        (self.0)(x, y, t)
    }
}

/// Node trajectory generator x(j, J_max, t).
pub type MeshGenerator1D = Arc<dyn Fn(usize, usize, f64) -> f64 + Send + Sync>;
/// Node trajectory generator (x, y)(j, k, J_max, K_max, t).
pub type MeshGenerator2D = Arc<dyn Fn(usize, usize, usize, usize, f64) -> (f64, f64) + Send + Sync>;

/// A 1D test case: problem, exact solution and mesh trajectories.
#[derive(Clone)]
pub struct Example1D {
    pub problem: Problem1D,
    pub exact: ExactSolution1D,
    pub generator: MeshGenerator1D,
    /// Boundary treatment the example requires, if any.
    pub required_bc: Option<BcStrategy>,
}

impl Example1D {
    /// Samples the generator at the grid levels.
    pub fn mesh(&self, grid: TimeGrid, j_max: usize) -> Result<MovingMesh1D> {
        let gen = &self.generator;
        MovingMesh1D::from_generator(grid, j_max, |j, t| gen(j, j_max, t))
    }
}

#[derive(Clone)]
pub struct Example2D {
    pub problem: Problem2D,
    pub exact: ExactSolution2D,
    pub generator: MeshGenerator2D,
}

impl Example2D {
    pub fn mesh(&self, grid: TimeGrid, j_max: usize, k_max: usize) -> Result<MovingMesh2D> {
        let gen = &self.generator;
        MovingMesh2D::from_generator(grid, j_max, k_max, |j, k, t| gen(j, k, j_max, k_max, t))
    }
}

/// Spatial profile of the first example.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    /// u = (2 + sin pi t) sin x, homogeneous boundary data.
    Sin,
    /// u = (2 + sin pi t) cos x, nonhomogeneous boundary data.
    Cos,
}

fn time_factor(t: f64) -> f64 {
    2.0 + (PI * t).sin()
}

fn time_factor_rate(t: f64) -> f64 {
    PI * (PI * t).cos()
}

/// Heat equation on (0, pi) with an oscillating interior mesh
/// x_j = j pi / J + sin(2 j pi / J) sin(omega t) / 4.
pub fn example_5_1(omega: f64, profile: Profile) -> Example1D {
    let shape: fn(f64) -> f64 = match profile {
        Profile::Sin => f64::sin,
        Profile::Cos => f64::cos,
    };
    let exact: Field1 = Arc::new(move |x, t| time_factor(t) * shape(x));
    // u_t - u_xx with u_xx = -u
    let f: Field1 = Arc::new(move |x, t| (time_factor_rate(t) + time_factor(t)) * shape(x));
    let g = exact.clone();
    let problem = Problem1D {
        a: constant1(1.0),
        b: constant1(0.0),
        c: constant1(0.0),
        f,
        g,
        u0: Arc::new(move |x| 2.0 * shape(x)),
        domain: Domain1D::fixed(0.0, PI),
        homogeneous: false,
    };
    let generator: MeshGenerator1D = Arc::new(move |j, j_max, t| {
        if j == 0 {
            return 0.0;
        }
        if j == j_max {
            return PI;
        }
        let xi = j as f64 / j_max as f64;
        xi * PI + 0.25 * (2.0 * PI * xi).sin() * (omega * t).sin()
    });
    Example1D {
        problem,
        exact: ExactSolution1D(exact),
        generator,
        required_bc: None,
    }
}

/// Heat equation on the moving interval x_l = (pi/3) sin(omega t),
/// x_r = pi - (pi/3) sin(omega t) with a mesh uniform between the ends.
pub fn example_5_2(omega: f64) -> Example1D {
    let xl = move |t: f64| PI / 3.0 * (omega * t).sin();
    let xr = move |t: f64| PI - PI / 3.0 * (omega * t).sin();
    let exact: Field1 = Arc::new(move |x, t| {
        let w = xr(t) - xl(t);
        (PI * (x - xl(t)) / w).sin() * time_factor(t)
    });
    let f: Field1 = Arc::new(move |x, t| {
        let w = xr(t) - xl(t);
        let xl_rate = PI / 3.0 * omega * (omega * t).cos();
        let w_rate = -2.0 * PI / 3.0 * omega * (omega * t).cos();
        let theta = PI * (x - xl(t)) / w;
        let theta_rate = PI * (-xl_rate * w - (x - xl(t)) * w_rate) / (w * w);
        let s = time_factor(t);
        let u = theta.sin() * s;
        let u_t = theta.cos() * theta_rate * s + theta.sin() * time_factor_rate(t);
        let u_xx = -(PI / w).powi(2) * u;
        u_t - u_xx
    });
    let g = exact.clone();
    let problem = Problem1D {
        a: constant1(1.0),
        b: constant1(0.0),
        c: constant1(0.0),
        f,
        g,
        u0: Arc::new(|x| 2.0 * x.sin()),
        domain: Domain1D::moving(Arc::new(xl), Arc::new(xr)),
        homogeneous: false,
    };
    let generator: MeshGenerator1D = Arc::new(move |j, j_max, t| {
        let (l, r) = (xl(t), xr(t));
        if j == j_max {
            return r;
        }
        l + (j as f64 / j_max as f64) * (r - l)
    });
    Example1D {
        problem,
        exact: ExactSolution1D(exact),
        generator,
        required_bc: Some(BcStrategy::MovingDomainExtrapolated),
    }
}

/// Heat equation on (0, pi)^2 with the mesh
/// (x, y) = (xi, eta) + 0.2 sin 2xi sin 2eta sin(omega t) (1, 1).
pub fn example_5_3(omega: f64) -> Example2D {
    let exact: Field2 = Arc::new(|x, y, t| time_factor(t) * x.sin() * y.sin());
    let f: Field2 =
        Arc::new(|x, y, t| (time_factor_rate(t) + 2.0 * time_factor(t)) * x.sin() * y.sin());
    let problem = Problem2D {
        a: constant2(1.0),
        b: Arc::new(|_, _, _| (0.0, 0.0)),
        c: constant2(0.0),
        f,
        g: constant2(0.0),
        u0: Arc::new(|x, y| 2.0 * x.sin() * y.sin()),
        domain: Rect {
            x0: 0.0,
            x1: PI,
            y0: 0.0,
            y1: PI,
        },
        homogeneous: false,
    };
    let generator: MeshGenerator2D = Arc::new(move |j, k, j_max, k_max, t| {
        let xi = if j == j_max {
            PI
        } else {
            PI * j as f64 / j_max as f64
        };
        let eta = if k == k_max {
            PI
        } else {
            PI * k as f64 / k_max as f64
        };
        let d = 0.2 * (2.0 * xi).sin() * (2.0 * eta).sin() * (omega * t).sin();
        // the displacement vanishes on the boundary up to rounding; pin it exactly
        let on_boundary = j == 0 || k == 0 || j == j_max || k == k_max;
        if on_boundary {
            (xi, eta)
        } else {
            (xi + d, eta + d)
        }
    });
    Example2D {
        problem,
        exact: ExactSolution2D(exact),
        generator,
    }
}

/// Largest nodal error at level `n`, interior and boundary nodes.
pub fn level_error_1d(
    history: &SolutionHistory,
    exact: &ExactSolution1D,
    mesh: &MovingMesh1D,
    n: usize,
) -> f64 {
    let j_max = mesh.j_max();
    let t = history.grid.t(n);
    let x = mesh.level(n);
    let mut worst: f64 = 0.0;
    for (i, u) in history.u[n].iter().enumerate() {
        worst = worst.max((u - exact.eval(x[i + 1], t)).abs());
    }
    let b = &history.boundary[n];
    if b.len() == 2 {
        worst = worst.max((b[0] - exact.eval(x[0], t)).abs());
        worst = worst.max((b[1] - exact.eval(x[j_max], t)).abs());
    }
    worst
}

/// Largest nodal error over levels n >= 1, interior and boundary nodes.
pub fn max_error_1d(
    history: &SolutionHistory,
    exact: &ExactSolution1D,
    mesh: &MovingMesh1D,
) -> f64 {
    (1..history.u.len()).fold(0.0, |w: f64, n| {
        w.max(level_error_1d(history, exact, mesh, n))
    })
}

/// 2D analogue of [`level_error_1d`]; boundary values follow the system's
/// boundary node order.
pub fn level_error_2d(
    history: &SolutionHistory,
    exact: &ExactSolution2D,
    mesh: &MovingMesh2D,
    n: usize,
) -> f64 {
    let (jm, km) = (mesh.j_max(), mesh.k_max());
    let t = history.grid.t(n);
    let mut worst: f64 = 0.0;
    for k in 1..km {
        for j in 1..jm {
            let (x, y) = mesh.level_node(n, j, k);
            let i = (k - 1) * (jm - 1) + (j - 1);
            worst = worst.max((history.u[n][i] - exact.eval(x, y, t)).abs());
        }
    }
    let boundary_nodes = mesh.boundary_nodes();
    if history.boundary[n].len() == boundary_nodes.len() {
        for (b, &(j, k)) in history.boundary[n].iter().zip(&boundary_nodes) {
            let (x, y) = mesh.level_node(n, j, k);
            worst = worst.max((b - exact.eval(x, y, t)).abs());
        }
    }
    worst
}

pub fn max_error_2d(
    history: &SolutionHistory,
    exact: &ExactSolution2D,
    mesh: &MovingMesh2D,
) -> f64 {
    (1..history.u.len()).fold(0.0, |w: f64, n| {
        w.max(level_error_2d(history, exact, mesh, n))
    })
}
