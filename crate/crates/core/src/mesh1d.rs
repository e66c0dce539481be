//! One-dimensional moving meshes, piecewise linear in time.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

/// Node trajectories x_j(t), j = 0..=J_max, given at the time-grid levels.
#[derive(Clone, Debug, PartialEq)]
pub struct MovingMesh1D {
    grid: TimeGrid,
    /// `levels[n][j]` = x_j^n.
    levels: Vec<Vec<f64>>,
}

impl MovingMesh1D {
    pub fn new(grid: TimeGrid, levels: Vec<Vec<f64>>) -> Result<Self> {
        if levels.len() != grid.levels() {
            return Err(Error::DimensionMismatch(format!(
                "{} position rows for {} time levels",
                levels.len(),
                grid.levels()
            )));
        }
        let nodes = levels[0].len();
        if nodes < 3 {
            return Err(Error::InvalidConfig(
                "a 1D mesh needs at least 3 nodes".into(),
            ));
        }
        for (n, row) in levels.iter().enumerate() {
            if row.len() != nodes {
                return Err(Error::DimensionMismatch(format!(
                    "level {n} has {} nodes, expected {nodes}",
                    row.len()
                )));
            }
            // positive widths at both ends of every interval keep h_j(t) > 0 in between
            for j in 1..nodes {
                let h = row[j] - row[j - 1];
                if !(h > 0.0) {
                    return Err(Error::TangledMesh {
                        cell: j.to_string(),
                        t: grid.t(n),
                        value: h,
                    });
                }
            }
        }
        Ok(Self { grid, levels })
    }

    /// Samples `x(j, t)` at the grid levels.
    pub fn from_generator(
        grid: TimeGrid,
        j_max: usize,
        x: impl Fn(usize, f64) -> f64,
    ) -> Result<Self> {
        let levels = grid
            .times()
            .iter()
            .map(|&t| (0..=j_max).map(|j| x(j, t)).collect())
            .collect();
        Self::new(grid, levels)
    }

    /// A mesh that never moves.
    pub fn fixed(grid: TimeGrid, nodes: &[f64]) -> Result<Self> {
        let levels = vec![nodes.to_vec(); grid.levels()];
        Self::new(grid, levels)
    }

    /// Reads one row of whitespace-separated positions per time level.
    pub fn read_trajectory(grid: TimeGrid, path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut levels = Vec::new();
        for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| {
                    Error::InvalidConfig(format!("{}:{}: {e}", path.display(), lineno + 1))
                })?;
            levels.push(row);
        }
        Self::new(grid, levels)
    }

    pub fn write_trajectory(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for row in &self.levels {
            let line: Vec<String> = row.iter().map(|x| format!("{x:.17e}")).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn j_max(&self) -> usize {
        self.levels[0].len() - 1
    }

    /// Positions at level n.
    pub fn level(&self, n: usize) -> &[f64] {
        &self.levels[n]
    }

    fn check_node(&self, j: usize) -> Result<()> {
        if j > self.j_max() {
            return Err(Error::OutOfRange(format!(
                "node {j} > J_max = {}",
                self.j_max()
            )));
        }
        Ok(())
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let (t0, t1) = (self.grid.t(0), self.grid.t_end());
        let slack = 1e-12 * (t1 - t0);
        if t < t0 - slack || t > t1 + slack {
            return Err(Error::OutOfRange(format!("time {t} outside [{t0}, {t1}]")));
        }
        Ok(())
    }

    /// Linear-in-time position x_j(t).
    pub fn position(&self, j: usize, t: f64) -> Result<f64> {
        self.check_node(j)?;
        self.check_time(t)?;
        Ok(self.position_unchecked(j, t))
    }

    /// Constant speed of node j on the interval containing t.
    pub fn speed(&self, j: usize, t: f64) -> Result<f64> {
        self.check_node(j)?;
        self.check_time(t)?;
        Ok(self.speed_unchecked(j, t))
    }

    /// Speed at the half point j + 1/2, for j < J_max.
    pub fn half_speed(&self, j: usize, t: f64) -> Result<f64> {
        self.check_node(j + 1)?;
        self.check_time(t)?;
        Ok(0.5 * (self.speed_unchecked(j, t) + self.speed_unchecked(j + 1, t)))
    }

    /// h_j(t) = x_j(t) - x_{j-1}(t) for 1 <= j <= J_max.
    pub fn cell_width(&self, j: usize, t: f64) -> Result<f64> {
        if j == 0 {
            return Err(Error::OutOfRange("cell index starts at 1".into()));
        }
        let h = self.position(j, t)? - self.position(j - 1, t)?;
        if !(h > 0.0) {
            return Err(Error::TangledMesh {
                cell: j.to_string(),
                t,
                value: h,
            });
        }
        Ok(h)
    }

    /// dh_j/dt, constant on each interval.
    pub fn cell_width_rate(&self, j: usize, t: f64) -> Result<f64> {
        if j == 0 {
            return Err(Error::OutOfRange("cell index starts at 1".into()));
        }
        Ok(self.speed(j, t)? - self.speed(j - 1, t)?)
    }

    /// All positions at time t.
    pub fn positions(&self, t: f64) -> Vec<f64> {
        let n = self.grid.interval(t);
        let s = self.grid.fraction(n, t);
        let (a, b) = (&self.levels[n], &self.levels[n + 1]);
        a.iter().zip(b).map(|(x0, x1)| x0 + s * (x1 - x0)).collect()
    }

    /// All node speeds on the interval containing t.
    pub fn speeds(&self, t: f64) -> Vec<f64> {
        let n = self.grid.interval(t);
        let dt = self.grid.dt(n);
        let (a, b) = (&self.levels[n], &self.levels[n + 1]);
        a.iter().zip(b).map(|(x0, x1)| (x1 - x0) / dt).collect()
    }

    fn position_unchecked(&self, j: usize, t: f64) -> f64 {
        let n = self.grid.interval(t);
        let s = self.grid.fraction(n, t);
        let (x0, x1) = (self.levels[n][j], self.levels[n + 1][j]);
        x0 + s * (x1 - x0)
    }

    fn speed_unchecked(&self, j: usize, t: f64) -> f64 {
        let n = self.grid.interval(t);
        (self.levels[n + 1][j] - self.levels[n][j]) / self.grid.dt(n)
    }
}
