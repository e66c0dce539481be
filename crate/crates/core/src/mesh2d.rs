//! Two-dimensional structured moving meshes with GCL-consistent metrics.
//!
//! Nodes (j, k), 0 <= j <= J_max, 0 <= k <= K_max, move linearly in time on
//! each grid interval. Metric terms at the half points (j - 1/2, k) and
//! (j, k - 1/2) use 4-point central differences, mesh speeds there use
//! 8-point weighted averages, and the nodal Jacobian is the averaged product
//! of half-point metrics. With these choices the discrete rate of the nodal
//! Jacobian equals the flux form built from the half-point quantities, for
//! any node trajectories.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

/// Mesh speeds at the four half points around node (j, k).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HalfPointSpeeds {
    /// (x', y') at (j - 1/2, k).
    pub west: (f64, f64),
    /// (x', y') at (j + 1/2, k).
    pub east: (f64, f64),
    /// (x', y') at (j, k - 1/2).
    pub south: (f64, f64),
    /// (x', y') at (j, k + 1/2).
    pub north: (f64, f64),
}

/// Metric terms at the half points west and south of node (j, k).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfPointMetrics {
    /// (J xi_x) at (j - 1/2, k).
    pub xi_x: f64,
    /// (J xi_y) at (j - 1/2, k).
    pub xi_y: f64,
    /// (J eta_x) at (j, k - 1/2).
    pub eta_x: f64,
    /// (J eta_y) at (j, k - 1/2).
    pub eta_y: f64,
}

/// Metric terms and Jacobian at the cell center (j - 1/2, k - 1/2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellMetrics {
    pub xi_x: f64,
    pub xi_y: f64,
    pub eta_x: f64,
    pub eta_y: f64,
    pub jacobian: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MovingMesh2D {
    grid: TimeGrid,
    j_max: usize,
    k_max: usize,
    /// `levels[n][k * (j_max + 1) + j]` = (x, y) at t_n.
    levels: Vec<Vec<(f64, f64)>>,
}

impl MovingMesh2D {
    pub fn new(
        grid: TimeGrid,
        j_max: usize,
        k_max: usize,
        levels: Vec<Vec<(f64, f64)>>,
    ) -> Result<Self> {
        if j_max < 2 || k_max < 2 {
            return Err(Error::InvalidConfig(
                "a 2D mesh needs at least 3x3 nodes".into(),
            ));
        }
        if levels.len() != grid.levels() {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinate sets for {} time levels",
                levels.len(),
                grid.levels()
            )));
        }
        let count = (j_max + 1) * (k_max + 1);
        if let Some(n) = levels.iter().position(|l| l.len() != count) {
            return Err(Error::DimensionMismatch(format!(
                "level {n} has {} nodes, expected {count}",
                levels[n].len()
            )));
        }
        let mesh = Self {
            grid,
            j_max,
            k_max,
            levels,
        };
        for n in 0..mesh.grid.levels() {
            mesh.check_level(n)?;
        }
        Ok(mesh)
    }

    pub fn from_generator(
        grid: TimeGrid,
        j_max: usize,
        k_max: usize,
        xy: impl Fn(usize, usize, f64) -> (f64, f64),
    ) -> Result<Self> {
        let levels = grid
            .times()
            .iter()
            .map(|&t| {
                (0..=k_max)
                    .flat_map(|k| (0..=j_max).map(move |j| (j, k)))
                    .map(|(j, k)| xy(j, k, t))
                    .collect()
            })
            .collect();
        Self::new(grid, j_max, k_max, levels)
    }

    /// Reads one line per time level holding x y pairs, k outer and j inner.
    pub fn read_trajectory(
        grid: TimeGrid,
        j_max: usize,
        k_max: usize,
        path: &Path,
    ) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut levels = Vec::new();
        for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let vals = line
                .split_whitespace()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| {
                    Error::InvalidConfig(format!("{}:{}: {e}", path.display(), lineno + 1))
                })?;
            if vals.len() % 2 != 0 {
                return Err(Error::InvalidConfig(format!(
                    "{}:{}: odd number of coordinates",
                    path.display(),
                    lineno + 1
                )));
            }
            levels.push(vals.chunks(2).map(|p| (p[0], p[1])).collect());
        }
        Self::new(grid, j_max, k_max, levels)
    }

    pub fn write_trajectory(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for level in &self.levels {
            let line: Vec<String> = level
                .iter()
                .map(|(x, y)| format!("{x:.17e} {y:.17e}"))
                .collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        out.flush()?;
        Ok(())
    }

    fn check_level(&self, n: usize) -> Result<()> {
        let t = self.grid.t(n);
        let state = MeshState2D {
            j_max: self.j_max,
            k_max: self.k_max,
            pos: self.levels[n].clone(),
            vel: vec![(0.0, 0.0); self.levels[n].len()],
        };
        state.check_untangled(t)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn level_node(&self, n: usize, j: usize, k: usize) -> (f64, f64) {
        self.levels[n][k * (self.j_max + 1) + j]
    }

    /// Boundary nodes in a fixed order: bottom row, top row, then the left
    /// and right columns without corners.
    pub fn boundary_nodes(&self) -> Vec<(usize, usize)> {
        let (jm, km) = (self.j_max, self.k_max);
        let mut out: Vec<(usize, usize)> = (0..=jm).map(|j| (j, 0)).collect();
        out.extend((0..=jm).map(|j| (j, km)));
        for k in 1..km {
            out.push((0, k));
            out.push((jm, k));
        }
        out
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let (t0, t1) = (self.grid.t(0), self.grid.t_end());
        let slack = 1e-12 * (t1 - t0);
        if t < t0 - slack || t > t1 + slack {
            return Err(Error::OutOfRange(format!("time {t} outside [{t0}, {t1}]")));
        }
        Ok(())
    }

    /// Positions and speeds of all nodes at time t.
    pub fn state(&self, t: f64) -> Result<MeshState2D> {
        self.check_time(t)?;
        let n = self.grid.interval(t);
        let s = self.grid.fraction(n, t);
        let dt = self.grid.dt(n);
        let (a, b) = (&self.levels[n], &self.levels[n + 1]);
        let pos = a
            .iter()
            .zip(b)
            .map(|(p0, p1)| (p0.0 + s * (p1.0 - p0.0), p0.1 + s * (p1.1 - p0.1)))
            .collect();
        let vel = a
            .iter()
            .zip(b)
            .map(|(p0, p1)| ((p1.0 - p0.0) / dt, (p1.1 - p0.1) / dt))
            .collect();
        Ok(MeshState2D {
            j_max: self.j_max,
            k_max: self.k_max,
            pos,
            vel,
        })
    }

    pub fn node(&self, j: usize, k: usize, t: f64) -> Result<(f64, f64)> {
        let st = self.state(t)?;
        st.check_node(j, k)?;
        Ok(st.pos(j, k))
    }

    pub fn speed(&self, j: usize, k: usize, t: f64) -> Result<(f64, f64)> {
        let st = self.state(t)?;
        st.check_node(j, k)?;
        Ok(st.vel(j, k))
    }

    pub fn half_point_speeds(&self, j: usize, k: usize, t: f64) -> Result<HalfPointSpeeds> {
        self.state(t)?.half_point_speeds(j, k)
    }

    pub fn half_point_metrics(&self, j: usize, k: usize, t: f64) -> Result<HalfPointMetrics> {
        self.state(t)?.half_point_metrics(j, k)
    }

    pub fn jacobian_node(&self, j: usize, k: usize, t: f64) -> Result<f64> {
        self.state(t)?.jacobian_node(j, k)
    }

    pub fn jacobian_dot(&self, j: usize, k: usize, t: f64) -> Result<f64> {
        self.state(t)?.jacobian_dot(j, k)
    }

    pub fn gcl_residual(&self, j: usize, k: usize, t: f64) -> Result<f64> {
        self.state(t)?.gcl_residual(j, k)
    }

    pub fn halfhalf_metrics(&self, j: usize, k: usize, t: f64) -> Result<CellMetrics> {
        self.state(t)?.halfhalf_metrics(j, k, t)
    }
}

/// A moving mesh frozen at one time: positions and (interval-constant)
/// speeds. All metric formulas live here.
#[derive(Clone, Debug)]
pub struct MeshState2D {
    j_max: usize,
    k_max: usize,
    pos: Vec<(f64, f64)>,
    vel: Vec<(f64, f64)>,
}

fn oob(what: &str, j: usize, k: usize) -> Error {
    Error::OutOfRange(format!("{what} stencil at ({j}, {k}) leaves the mesh"))
}

impl MeshState2D {
    pub fn j_max(&self) -> usize {
        self.j_max
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn pos(&self, j: usize, k: usize) -> (f64, f64) {
        self.pos[k * (self.j_max + 1) + j]
    }

    pub fn vel(&self, j: usize, k: usize) -> (f64, f64) {
        self.vel[k * (self.j_max + 1) + j]
    }

    fn check_node(&self, j: usize, k: usize) -> Result<()> {
        if j > self.j_max || k > self.k_max {
            return Err(Error::OutOfRange(format!(
                "node ({j}, {k}) outside {}x{}",
                self.j_max, self.k_max
            )));
        }
        Ok(())
    }

    /// 8-point average of `f` at (j - 1/2, k); needs 1 <= j <= J_max and
    /// 1 <= k <= K_max - 1.
    fn avg_xi(&self, f: &[(f64, f64)], j: usize, k: usize) -> (f64, f64) {
        let w = self.j_max + 1;
        let at = |j: usize, k: usize| f[k * w + j];
        let terms = [
            (at(j, k - 1), 1.0),
            (at(j - 1, k - 1), 1.0),
            (at(j, k), 2.0),
            (at(j - 1, k), 2.0),
            (at(j, k + 1), 1.0),
            (at(j - 1, k + 1), 1.0),
        ];
        let (sx, sy) = terms
            .iter()
            .fold((0.0, 0.0), |(ax, ay), (p, c)| (ax + c * p.0, ay + c * p.1));
        (sx / 8.0, sy / 8.0)
    }

    /// 8-point average of `f` at (j, k - 1/2); needs 1 <= j <= J_max - 1 and
    /// 1 <= k <= K_max.
    fn avg_eta(&self, f: &[(f64, f64)], j: usize, k: usize) -> (f64, f64) {
        let w = self.j_max + 1;
        let at = |j: usize, k: usize| f[k * w + j];
        let terms = [
            (at(j - 1, k), 1.0),
            (at(j - 1, k - 1), 1.0),
            (at(j, k), 2.0),
            (at(j, k - 1), 2.0),
            (at(j + 1, k), 1.0),
            (at(j + 1, k - 1), 1.0),
        ];
        let (sx, sy) = terms
            .iter()
            .fold((0.0, 0.0), |(ax, ay), (p, c)| (ax + c * p.0, ay + c * p.1));
        (sx / 8.0, sy / 8.0)
    }

    /// ((J xi_x), (J xi_y)) at (j - 1/2, k) from coordinates (or speeds) `f`.
    fn metric_xi(&self, f: &[(f64, f64)], j: usize, k: usize) -> (f64, f64) {
        let w = self.j_max + 1;
        let at = |j: usize, k: usize| f[k * w + j];
        let dx = at(j, k + 1).0 - at(j, k - 1).0 + at(j - 1, k + 1).0 - at(j - 1, k - 1).0;
        let dy = at(j, k + 1).1 - at(j, k - 1).1 + at(j - 1, k + 1).1 - at(j - 1, k - 1).1;
        (0.25 * dy, -0.25 * dx)
    }

    /// ((J eta_x), (J eta_y)) at (j, k - 1/2).
    fn metric_eta(&self, f: &[(f64, f64)], j: usize, k: usize) -> (f64, f64) {
        let w = self.j_max + 1;
        let at = |j: usize, k: usize| f[k * w + j];
        let dx = at(j + 1, k).0 - at(j - 1, k).0 + at(j + 1, k - 1).0 - at(j - 1, k - 1).0;
        let dy = at(j + 1, k).1 - at(j - 1, k).1 + at(j + 1, k - 1).1 - at(j - 1, k - 1).1;
        (-0.25 * dy, 0.25 * dx)
    }

    fn xi_in_range(&self, j: usize, k: usize) -> bool {
        (1..=self.j_max).contains(&j) && (1..self.k_max).contains(&k)
    }

    fn eta_in_range(&self, j: usize, k: usize) -> bool {
        (1..self.j_max).contains(&j) && (1..=self.k_max).contains(&k)
    }

    fn interior(&self, j: usize, k: usize) -> bool {
        (1..self.j_max).contains(&j) && (1..self.k_max).contains(&k)
    }

    /// Mesh speed at (j - 1/2, k).
    pub fn speed_xi_half(&self, j: usize, k: usize) -> Result<(f64, f64)> {
        if !self.xi_in_range(j, k) {
            return Err(oob("half-point speed", j, k));
        }
        Ok(self.avg_xi(&self.vel, j, k))
    }

    /// Mesh speed at (j, k - 1/2).
    pub fn speed_eta_half(&self, j: usize, k: usize) -> Result<(f64, f64)> {
        if !self.eta_in_range(j, k) {
            return Err(oob("half-point speed", j, k));
        }
        Ok(self.avg_eta(&self.vel, j, k))
    }

    /// ((J xi_x), (J xi_y)) at (j - 1/2, k).
    pub fn metric_xi_half(&self, j: usize, k: usize) -> Result<(f64, f64)> {
        if !self.xi_in_range(j, k) {
            return Err(oob("half-point metric", j, k));
        }
        Ok(self.metric_xi(&self.pos, j, k))
    }

    /// ((J eta_x), (J eta_y)) at (j, k - 1/2).
    pub fn metric_eta_half(&self, j: usize, k: usize) -> Result<(f64, f64)> {
        if !self.eta_in_range(j, k) {
            return Err(oob("half-point metric", j, k));
        }
        Ok(self.metric_eta(&self.pos, j, k))
    }

    /// Speeds at the four half points around an interior node.
    pub fn half_point_speeds(&self, j: usize, k: usize) -> Result<HalfPointSpeeds> {
        if !self.interior(j, k) {
            return Err(oob("half-point speed", j, k));
        }
        Ok(HalfPointSpeeds {
            west: self.avg_xi(&self.vel, j, k),
            east: self.avg_xi(&self.vel, j + 1, k),
            south: self.avg_eta(&self.vel, j, k),
            north: self.avg_eta(&self.vel, j, k + 1),
        })
    }

    pub fn half_point_metrics(&self, j: usize, k: usize) -> Result<HalfPointMetrics> {
        let (xi_x, xi_y) = self.metric_xi_half(j, k)?;
        let (eta_x, eta_y) = self.metric_eta_half(j, k)?;
        Ok(HalfPointMetrics {
            xi_x,
            xi_y,
            eta_x,
            eta_y,
        })
    }

    /// Sums of the metric terms across node (j, k), from coordinates or speeds.
    fn metric_sums(&self, f: &[(f64, f64)], j: usize, k: usize) -> [f64; 4] {
        let (a1, b1) = self.metric_xi(f, j + 1, k);
        let (a0, b0) = self.metric_xi(f, j, k);
        let (c1, d1) = self.metric_eta(f, j, k + 1);
        let (c0, d0) = self.metric_eta(f, j, k);
        [a1 + a0, b1 + b0, c1 + c0, d1 + d0]
    }

    /// Product-form nodal Jacobian at an interior node.
    pub fn jacobian_node(&self, j: usize, k: usize) -> Result<f64> {
        if !self.interior(j, k) {
            return Err(oob("nodal Jacobian", j, k));
        }
        let [xx, xy, ex, ey] = self.metric_sums(&self.pos, j, k);
        Ok(0.25 * (xx * ey - xy * ex))
    }

    /// Flux form of the Jacobian rate built from half-point metrics and
    /// speeds.
    pub fn jacobian_dot(&self, j: usize, k: usize) -> Result<f64> {
        if !self.interior(j, k) {
            return Err(oob("Jacobian rate", j, k));
        }
        let (xe, ye) = self.avg_xi(&self.vel, j + 1, k);
        let (xw, yw) = self.avg_xi(&self.vel, j, k);
        let (xn, yn) = self.avg_eta(&self.vel, j, k + 1);
        let (xs, ys) = self.avg_eta(&self.vel, j, k);
        let (axe, aye) = self.metric_xi(&self.pos, j + 1, k);
        let (axw, ayw) = self.metric_xi(&self.pos, j, k);
        let (bxn, byn) = self.metric_eta(&self.pos, j, k + 1);
        let (bxs, bys) = self.metric_eta(&self.pos, j, k);
        Ok(axe * xe - axw * xw + aye * ye - ayw * yw + bxn * xn - bxs * xs + byn * yn - bys * ys)
    }

    /// |d/dt (product-form Jacobian) - flux-form rate|, with the time
    /// derivative taken exactly by the product rule.
    pub fn gcl_residual(&self, j: usize, k: usize) -> Result<f64> {
        let flux = self.jacobian_dot(j, k)?;
        let [xx, xy, ex, ey] = self.metric_sums(&self.pos, j, k);
        let [dxx, dxy, dex, dey] = self.metric_sums(&self.vel, j, k);
        let product = 0.25 * (dxx * ey + xx * dey - dxy * ex - xy * dex);
        Ok((product - flux).abs())
    }

    /// Metrics and Jacobian at the cell center (j - 1/2, k - 1/2), for
    /// 1 <= j <= J_max and 1 <= k <= K_max.
    pub fn halfhalf_metrics(&self, j: usize, k: usize, t: f64) -> Result<CellMetrics> {
        if !((1..=self.j_max).contains(&j) && (1..=self.k_max).contains(&k)) {
            return Err(oob("cell", j, k));
        }
        let (p00, p10, p01, p11) = (
            self.pos(j - 1, k - 1),
            self.pos(j, k - 1),
            self.pos(j - 1, k),
            self.pos(j, k),
        );
        let x_eta = 0.5 * (p11.0 - p10.0 + p01.0 - p00.0);
        let y_eta = 0.5 * (p11.1 - p10.1 + p01.1 - p00.1);
        let x_xi = 0.5 * (p11.0 - p01.0 + p10.0 - p00.0);
        let y_xi = 0.5 * (p11.1 - p01.1 + p10.1 - p00.1);
        let (xi_x, xi_y, eta_x, eta_y) = (y_eta, -x_eta, -y_xi, x_xi);
        let jacobian = xi_x * eta_y - xi_y * eta_x;
        if !(jacobian > 0.0) {
            return Err(Error::TangledMesh {
                cell: format!("({}, {})", j as f64 - 0.5, k as f64 - 0.5),
                t,
                value: jacobian,
            });
        }
        Ok(CellMetrics {
            xi_x,
            xi_y,
            eta_x,
            eta_y,
            jacobian,
        })
    }

    /// Positive cell-center and nodal Jacobians everywhere.
    pub fn check_untangled(&self, t: f64) -> Result<()> {
        for k in 1..=self.k_max {
            for j in 1..=self.j_max {
                self.halfhalf_metrics(j, k, t)?;
            }
        }
        for k in 1..self.k_max {
            for j in 1..self.j_max {
                let jac = self.jacobian_node(j, k)?;
                if !(jac > 0.0) {
                    return Err(Error::TangledMesh {
                        cell: format!("node ({j}, {k})"),
                        t,
                        value: jac,
                    });
                }
            }
        }
        Ok(())
    }
}
