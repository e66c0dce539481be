//! Experiment driver: single runs, convergence sweeps, stability stress
//! tables and CSV output for the built-in examples.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::disc1d::{Scheme1D, System1D};
use crate::disc2d::build_system_2d;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::integrator::{integrate, BcStrategy, SolutionHistory};
use crate::problems::{
    example_5_1, example_5_2, example_5_3, level_error_1d, level_error_2d, Example1D, Example2D,
    Profile,
};
use crate::quadrature::{build_scheme, MAX_ORDER};

/// Built-in example identifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExampleId {
    #[serde(rename = "5.1-sin")]
    Ex51Sin,
    #[serde(rename = "5.1-cos")]
    Ex51Cos,
    #[serde(rename = "5.2")]
    Ex52,
    #[serde(rename = "5.3")]
    Ex53,
}

impl ExampleId {
    pub fn is_2d(self) -> bool {
        self == ExampleId::Ex53
    }
}

impl std::str::FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "5.1-sin" | "5.1" => Ok(ExampleId::Ex51Sin),
            "5.1-cos" => Ok(ExampleId::Ex51Cos),
            "5.2" => Ok(ExampleId::Ex52),
            "5.3" => Ok(ExampleId::Ex53),
            _ => Err(Error::InvalidConfig(format!(
                "unknown example {s:?}; expected 5.1-sin, 5.1-cos, 5.2 or 5.3"
            ))),
        }
    }
}

impl std::fmt::Display for ExampleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ExampleId::Ex51Sin => "5.1-sin",
            ExampleId::Ex51Cos => "5.1-cos",
            ExampleId::Ex52 => "5.2",
            ExampleId::Ex53 => "5.3",
        })
    }
}

/// Spatial discretization choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeChoice {
    Conservative,
    #[serde(alias = "halfpoint")]
    Nonconservative,
    TwoCell,
    #[serde(rename = "2d")]
    TwoD,
}

/// Time step: a fixed value or the coupled rule dt = (pi / J_max)^(1/m).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DtRepr", into = "DtRepr")]
pub enum DtRule {
    Fixed(f64),
    Coupled,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum DtRepr {
    Number(f64),
    Name(String),
}

impl TryFrom<DtRepr> for DtRule {
    type Error = String;

    fn try_from(r: DtRepr) -> std::result::Result<Self, String> {
        match r {
            DtRepr::Number(dt) => Ok(DtRule::Fixed(dt)),
            DtRepr::Name(s) if s == "coupled" => Ok(DtRule::Coupled),
            DtRepr::Name(s) => Err(format!("dt must be a number or \"coupled\", got {s:?}")),
        }
    }
}

impl From<DtRule> for DtRepr {
    fn from(d: DtRule) -> Self {
        match d {
            DtRule::Fixed(dt) => DtRepr::Number(dt),
            DtRule::Coupled => DtRepr::Name("coupled".into()),
        }
    }
}

impl DtRule {
    pub fn resolve(self, j_max: usize, m: usize) -> f64 {
        match self {
            DtRule::Fixed(dt) => dt,
            DtRule::Coupled => (PI / j_max as f64).powf(1.0 / m as f64),
        }
    }
}

fn default_omega() -> f64 {
    2.0 * PI
}

fn default_m() -> usize {
    1
}

fn default_j_max() -> usize {
    40
}

fn default_dt() -> DtRule {
    DtRule::Coupled
}

fn default_t_end() -> f64 {
    1.0
}

/// One experiment. Serialized as a flat JSON object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub example: ExampleId,
    #[serde(default = "default_omega")]
    pub omega: f64,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_j_max")]
    pub j_max: usize,
    /// Defaults to `j_max`; 2D only.
    #[serde(default)]
    pub k_max: Option<usize>,
    #[serde(default = "default_dt")]
    pub dt: DtRule,
    /// Defaults to the example's required strategy, else approximation points.
    #[serde(default)]
    pub bc: Option<BcStrategy>,
    /// Defaults to conservative in 1D and 2d for the 2D example.
    #[serde(default)]
    pub scheme: Option<SchemeChoice>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    /// Per-level summary CSV written by [`run`].
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Zero f and g, keep u0, and monitor the energy.
    #[serde(default)]
    pub homogeneous: bool,
}

impl RunConfig {
    pub fn new(example: ExampleId) -> Self {
        Self {
            example,
            omega: default_omega(),
            m: default_m(),
            j_max: default_j_max(),
            k_max: None,
            dt: default_dt(),
            bc: None,
            scheme: None,
            t_end: default_t_end(),
            output: None,
            homogeneous: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m > MAX_ORDER {
            return Err(Error::InvalidOrder(self.m));
        }
        if self.j_max < 2 || self.k_max.is_some_and(|k| k < 2) {
            return Err(Error::InvalidConfig(
                "j_max and k_max must be at least 2".into(),
            ));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if !self.omega.is_finite() {
            return Err(Error::InvalidConfig("omega must be finite".into()));
        }
        if let DtRule::Fixed(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "dt must be positive, got {dt}"
                )));
            }
        }
        match (self.example.is_2d(), self.scheme) {
            (true, Some(s)) if s != SchemeChoice::TwoD => Err(Error::InvalidConfig(format!(
                "example {} is two-dimensional; scheme must be 2d",
                self.example
            ))),
            (false, Some(SchemeChoice::TwoD)) => Err(Error::InvalidConfig(format!(
                "example {} is one-dimensional; scheme 2d does not apply",
                self.example
            ))),
            _ => Ok(()),
        }
    }

    fn bc_for(&self, required: Option<BcStrategy>) -> BcStrategy {
        match (required, self.bc) {
            (Some(req), Some(bc)) if req != bc => {
                warn!(
                    "example {} requires {req:?}; overriding {bc:?}",
                    self.example
                );
                req
            }
            (Some(req), _) => req,
            (None, bc) => bc.unwrap_or_default(),
        }
    }
}

/// Uniform grid of at least `min_steps` steps of exactly `dt` covering [0, t_end].
pub fn harness_grid(t_end: f64, dt: f64, min_steps: usize) -> Result<TimeGrid> {
    let steps = ((t_end / dt) * (1.0 - 1e-12)).ceil().max(min_steps as f64) as usize;
    TimeGrid::fixed_steps(dt, steps.max(1))
}

enum Case {
    One(Example1D),
    Two(Example2D),
}

fn case(config: &RunConfig) -> Case {
    match config.example {
        ExampleId::Ex51Sin => Case::One(example_5_1(config.omega, Profile::Sin)),
        ExampleId::Ex51Cos => Case::One(example_5_1(config.omega, Profile::Cos)),
        ExampleId::Ex52 => Case::One(example_5_2(config.omega)),
        ExampleId::Ex53 => Case::Two(example_5_3(config.omega)),
    }
}

/// Result of one integration.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub config: RunConfig,
    pub j_max: usize,
    pub k_max: Option<usize>,
    pub dt: f64,
    pub steps: usize,
    /// Max nodal error over levels n >= 1; `None` for homogeneous runs.
    pub max_error: Option<f64>,
    /// Energy monotonicity; `None` unless homogeneous.
    pub energy_monotone: Option<bool>,
    pub max_abs_u: f64,
    pub initial_max_abs_u: f64,
    pub energy: Vec<f64>,
    pub wall_seconds: f64,
    /// Per-level (t, energy, max |u|, max error at that level).
    pub levels: Vec<(f64, f64, f64, Option<f64>)>,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a: f64, x| a.max(x.abs()))
}

/// Integrates `config` at the given resolution and time step.
fn solve(
    config: &RunConfig,
    j_max: usize,
    k_max: usize,
    dt: f64,
    min_steps: usize,
) -> Result<RunSummary> {
    config.validate()?;
    let started = Instant::now();
    let scheme = build_scheme(config.m)?;
    let grid = harness_grid(config.t_end, dt, min_steps)?;
    let monitor = config.homogeneous;
    let (history, per_level_error): (SolutionHistory, Box<dyn Fn(&SolutionHistory, usize) -> f64>) =
        match case(config) {
            Case::One(ex) => {
                let problem = if monitor {
                    ex.problem.homogeneous()
                } else {
                    ex.problem.clone()
                };
                let mesh = ex.mesh(grid.clone(), j_max)?;
                let kind = match config.scheme.unwrap_or(SchemeChoice::Conservative) {
                    SchemeChoice::Conservative => Scheme1D::Conservative,
                    SchemeChoice::Nonconservative => Scheme1D::NonconservativeHalfpoint,
                    SchemeChoice::TwoCell => Scheme1D::TwoCell,
                    SchemeChoice::TwoD => unreachable!("rejected by validate"),
                };
                let bc = config.bc_for(ex.required_bc);
                let sys = System1D::new(&problem, mesh.clone(), kind, bc)?;
                let x0 = mesh.level(0);
                let u0: Vec<f64> = x0[1..j_max].iter().map(|&x| (problem.u0)(x)).collect();
                let h = integrate(&sys, &grid, &scheme, &u0, monitor)?;
                let exact = ex.exact.clone();
                let err = move |h: &SolutionHistory, n: usize| level_error_1d(h, &exact, &mesh, n);
                (h, Box::new(err))
            }
            Case::Two(ex) => {
                let problem = if monitor {
                    ex.problem.homogeneous()
                } else {
                    ex.problem.clone()
                };
                let mesh = ex.mesh(grid.clone(), j_max, k_max)?;
                let bc = config.bc.unwrap_or_default();
                let sys = build_system_2d(&problem, mesh.clone(), bc)?;
                let mut u0 = Vec::with_capacity((j_max - 1) * (k_max - 1));
                for k in 1..k_max {
                    for j in 1..j_max {
                        let (x, y) = mesh.level_node(0, j, k);
                        u0.push((problem.u0)(x, y));
                    }
                }
                let h = integrate(&sys, &grid, &scheme, &u0, monitor)?;
                let exact = ex.exact.clone();
                let err = move |h: &SolutionHistory, n: usize| level_error_2d(h, &exact, &mesh, n);
                (h, Box::new(err))
            }
        };

    let mut levels = Vec::with_capacity(history.u.len());
    let mut max_error: f64 = 0.0;
    for n in 0..history.u.len() {
        let amp = max_abs(&history.u[n]).max(max_abs(&history.boundary[n]));
        let e = (!monitor && n > 0).then(|| per_level_error(&history, n));
        if let Some(e) = e {
            max_error = max_error.max(e);
        }
        levels.push((grid.t(n), history.energy[n], amp, e));
    }
    let max_abs_u = levels.iter().skip(1).fold(0.0, |a: f64, l| a.max(l.2));
    let summary = RunSummary {
        config: config.clone(),
        j_max,
        k_max: config.example.is_2d().then_some(k_max),
        dt,
        steps: grid.steps(),
        max_error: (!monitor).then_some(max_error),
        energy_monotone: history.energy_monotone(),
        max_abs_u,
        initial_max_abs_u: levels[0].2,
        energy: history.energy.clone(),
        wall_seconds: started.elapsed().as_secs_f64(),
        levels,
    };
    info!(
        "{} m={} J={} dt={:.6e}: max error {:?}, monotone {:?}, {:.3}s",
        config.example,
        config.m,
        j_max,
        dt,
        summary.max_error,
        summary.energy_monotone,
        summary.wall_seconds
    );
    Ok(summary)
}

/// Runs one configuration and writes the per-level CSV when `output` is set.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    config.validate()?;
    let k_max = config.k_max.unwrap_or(config.j_max);
    let dt = config.dt.resolve(config.j_max, config.m);
    let summary = solve(config, config.j_max, k_max, dt, 1)?;
    if let Some(path) = &config.output {
        std::fs::write(path, levels_csv(&summary))?;
    }
    Ok(summary)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.16e}"))
}

/// Per-level CSV: `level, t, energy, max_abs_u, max_error`.
pub fn levels_csv(summary: &RunSummary) -> String {
    let mut s = String::from("level,t,energy,max_abs_u,max_error\n");
    for (n, (t, e, a, err)) in summary.levels.iter().enumerate() {
        writeln!(s, "{n},{t:.16e},{e:.16e},{a:.16e},{}", fmt_opt(*err)).unwrap();
    }
    s
}

/// Refinement direction of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// Halve dt per level at fixed J_max.
    Temporal,
    /// Double J_max per level with dt = (pi / J_max)^(1/m).
    Coupled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRow {
    pub level: usize,
    pub j_max: usize,
    pub dt: f64,
    pub max_error: f64,
    /// `None` on the first row.
    pub observed_order: Option<f64>,
    pub energy_monotone: Option<bool>,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub mode: SweepMode,
    pub rows: Vec<ErrorRow>,
}

/// log(e_i / e_{i+1}) / log(r).
pub fn observed_order(e_coarse: f64, e_fine: f64, ratio: f64) -> f64 {
    (e_coarse / e_fine).ln() / ratio.ln()
}

fn fitted_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

impl ErrorReport {
    pub const HEADER: &'static str =
        "level,J_max,dt,max_error,observed_order,energy_monotone,wall_seconds";

    pub fn orders(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.observed_order).collect()
    }

    /// Least-squares slope of -ln(error) against ln(refinement), where the
    /// refinement is 1/dt in temporal sweeps and J_max in coupled ones.
    pub fn fitted_order(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .map(|r| {
                let refine = match self.mode {
                    SweepMode::Temporal => 1.0 / r.dt,
                    SweepMode::Coupled => r.j_max as f64,
                };
                (refine.ln(), -r.max_error.ln())
            })
            .collect();
        fitted_slope(&pts)
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", Self::HEADER);
        for r in &self.rows {
            let mono = r
                .energy_monotone
                .map_or("NA".to_string(), |b| b.to_string());
            writeln!(
                s,
                "{},{},{:.16e},{:.16e},{},{},{:.6}",
                r.level,
                r.j_max,
                r.dt,
                r.max_error,
                fmt_opt(r.observed_order),
                mono,
                r.wall_seconds
            )
            .unwrap();
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Sweeps `levels` refinements from `config`. In temporal mode `config.dt`
/// must be a fixed step. With `parallel` each level runs on its own thread.
pub fn convergence(
    config: &RunConfig,
    mode: SweepMode,
    levels: usize,
    parallel: bool,
) -> Result<ErrorReport> {
    config.validate()?;
    if levels < 3 {
        return Err(Error::InvalidConfig(format!(
            "a sweep needs at least 3 levels, got {levels}"
        )));
    }
    if config.homogeneous {
        return Err(Error::InvalidConfig(
            "convergence sweeps need the exact solution; homogeneous is set".into(),
        ));
    }
    let plan: Vec<(usize, usize, f64)> = match mode {
        SweepMode::Temporal => {
            let DtRule::Fixed(dt0) = config.dt else {
                return Err(Error::InvalidConfig(
                    "temporal sweeps need a fixed starting dt".into(),
                ));
            };
            let k = config.k_max.unwrap_or(config.j_max);
            (0..levels)
                .map(|i| (config.j_max, k, dt0 / 2f64.powi(i as i32)))
                .collect()
        }
        SweepMode::Coupled => (0..levels)
            .map(|i| {
                let j = config.j_max << i;
                (j, j, DtRule::Coupled.resolve(j, config.m))
            })
            .collect(),
    };

    let results: Vec<Result<RunSummary>> = if parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = plan
                .iter()
                .map(|&(j, k, dt)| s.spawn(move || solve(config, j, k, dt, 1)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sweep worker panicked"))
                .collect()
        })
    } else {
        plan.iter()
            .map(|&(j, k, dt)| solve(config, j, k, dt, 1))
            .collect()
    };

    let mut rows: Vec<ErrorRow> = Vec::with_capacity(levels);
    for (i, res) in results.into_iter().enumerate() {
        let s = res?;
        let e = s.max_error.expect("nonhomogeneous run");
        let observed_order = rows.last().map(|prev| {
            let ratio = match mode {
                SweepMode::Temporal => prev.dt / s.dt,
                SweepMode::Coupled => s.j_max as f64 / prev.j_max as f64,
            };
            observed_order(prev.max_error, e, ratio)
        });
        rows.push(ErrorRow {
            level: i,
            j_max: s.j_max,
            dt: s.dt,
            max_error: e,
            observed_order,
            energy_monotone: s.energy_monotone,
            wall_seconds: s.wall_seconds,
        });
    }
    Ok(ErrorReport { mode, rows })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StressRow {
    pub dt: f64,
    pub steps: usize,
    pub max_abs_u: f64,
    pub initial_max_abs_u: f64,
    /// Every level's energy stays below E_0 (1 + 1e-10).
    pub bounded: bool,
    pub energy_monotone: bool,
}

/// Homogeneous runs of `config` at each dt, at least two steps each.
pub fn stability_stress(config: &RunConfig, dt_list: &[f64]) -> Result<Vec<StressRow>> {
    let cfg = RunConfig {
        homogeneous: true,
        ..config.clone()
    };
    cfg.validate()?;
    let k_max = cfg.k_max.unwrap_or(cfg.j_max);
    dt_list
        .iter()
        .map(|&dt| {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "dt must be positive, got {dt}"
                )));
            }
            let s = solve(&cfg, cfg.j_max, k_max, dt, 2)?;
            let e0 = s.energy[0];
            Ok(StressRow {
                dt,
                steps: s.steps,
                max_abs_u: s.max_abs_u,
                initial_max_abs_u: s.initial_max_abs_u,
                bounded: s.energy.iter().all(|&e| e <= e0 * (1.0 + 1e-10)),
                energy_monotone: s.energy_monotone.unwrap_or(false),
            })
        })
        .collect()
}

/// `dt, steps, max_abs_u, initial_max_abs_u, bounded, energy_monotone`.
pub fn stress_csv(rows: &[StressRow]) -> String {
    let mut s = String::from("dt,steps,max_abs_u,initial_max_abs_u,bounded,energy_monotone\n");
    for r in rows {
        writeln!(
            s,
            "{:.16e},{},{:.16e},{:.16e},{},{}",
            r.dt, r.steps, r.max_abs_u, r.initial_max_abs_u, r.bounded, r.energy_monotone
        )
        .unwrap();
    }
    s
}
