//! Browser bindings for the moving-mesh solver. The plain functions are
//! usable natively; the `wasm_*` wrappers are what the page calls.

use movmesh::problems::{example_5_1, example_5_2, example_5_3, Example1D, Profile};
use movmesh::{build_scheme, integrate, BcStrategy, Scheme1D, System1D, TimeGrid};
use wasm_bindgen::prelude::*;

fn example_1d(name: &str, omega: f64) -> Result<Example1D, String> {
    match name {
        "sin" => Ok(example_5_1(omega, Profile::Sin)),
        "cos" => Ok(example_5_1(omega, Profile::Cos)),
        "moving" => Ok(example_5_2(omega)),
        _ => Err(format!("unknown example {name:?}")),
    }
}

fn grid(t_end: f64, steps: usize) -> Result<TimeGrid, String> {
    if steps == 0 || !(t_end > 0.0) {
        return Err("need t_end > 0 and at least one step".into());
    }
    TimeGrid::fixed_steps(t_end / steps as f64, steps).map_err(|e| e.to_string())
}

/// Node positions of a 1D example mesh, level by level, flattened to
/// `(steps + 1) * (j_max + 1)` values.
pub fn mesh_trajectories(
    example: &str,
    omega: f64,
    j_max: usize,
    t_end: f64,
    steps: usize,
) -> Result<Vec<f64>, String> {
    let ex = example_1d(example, omega)?;
    let mesh = ex
        .mesh(grid(t_end, steps)?, j_max)
        .map_err(|e| e.to_string())?;
    Ok((0..=steps).flat_map(|n| mesh.level(n).to_vec()).collect())
}

/// Result of a 1D solve at the final level.
#[wasm_bindgen]
#[derive(Clone, Debug)]
pub struct Solve1D {
    x: Vec<f64>,
    u: Vec<f64>,
    exact: Vec<f64>,
    energy: Vec<f64>,
    max_error: f64,
}

#[wasm_bindgen]
impl Solve1D {
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn u(&self) -> Vec<f64> {
        self.u.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn exact(&self) -> Vec<f64> {
        self.exact.clone()
    }

    /// Discrete energy per level.
    #[wasm_bindgen(getter)]
    pub fn energy(&self) -> Vec<f64> {
        self.energy.clone()
    }

    /// Max nodal error at the final level.
    #[wasm_bindgen(getter)]
    pub fn max_error(&self) -> f64 {
        self.max_error
    }
}

/// Solves a 1D example up to `t_end` with `steps` collocation steps of
/// order 2m. `homogeneous` drops forcing and boundary data.
pub fn solve_1d(
    example: &str,
    omega: f64,
    m: usize,
    j_max: usize,
    t_end: f64,
    steps: usize,
    homogeneous: bool,
) -> Result<Solve1D, String> {
    let ex = example_1d(example, omega)?;
    let problem = if homogeneous {
        ex.problem.homogeneous()
    } else {
        ex.problem.clone()
    };
    let grid = grid(t_end, steps)?;
    let mesh = ex.mesh(grid.clone(), j_max).map_err(|e| e.to_string())?;
    let bc = ex.required_bc.unwrap_or(BcStrategy::ApproxPoints);
    let sys = System1D::new(&problem, mesh.clone(), Scheme1D::Conservative, bc)
        .map_err(|e| e.to_string())?;
    let scheme = build_scheme(m).map_err(|e| e.to_string())?;
    let u0: Vec<f64> = mesh.level(0)[1..j_max]
        .iter()
        .map(|&x| (problem.u0)(x))
        .collect();
    let h = integrate(&sys, &grid, &scheme, &u0, homogeneous).map_err(|e| e.to_string())?;

    let x = mesh.level(steps).to_vec();
    let b = h.boundary.last().unwrap();
    let mut u = Vec::with_capacity(j_max + 1);
    u.push(b[0]);
    u.extend_from_slice(h.final_u());
    u.push(b[1]);
    let t = grid.t_end();
    let exact: Vec<f64> = if homogeneous {
        vec![f64::NAN; x.len()]
    } else {
        x.iter().map(|&xj| ex.exact.eval(xj, t)).collect()
    };
    let max_error = u
        .iter()
        .zip(&exact)
        .fold(0.0, |e: f64, (a, b)| e.max((a - b).abs()));
    Ok(Solve1D {
        x,
        u,
        exact,
        energy: h.energy,
        max_error: if homogeneous { f64::NAN } else { max_error },
    })
}

/// Node coordinates of the 2D example mesh at time t, flattened as
/// x, y pairs with j running fastest.
pub fn mesh_2d(omega: f64, j_max: usize, k_max: usize, t: f64) -> Result<Vec<f64>, String> {
    if j_max < 2 || k_max < 2 {
        return Err("need at least 2 cells per direction".into());
    }
    let ex = example_5_3(omega);
    let mut out = Vec::with_capacity(2 * (j_max + 1) * (k_max + 1));
    for k in 0..=k_max {
        for j in 0..=j_max {
            let (x, y) = (ex.generator)(j, k, j_max, k_max, t);
            out.push(x);
            out.push(y);
        }
    }
    Ok(out)
}

#[wasm_bindgen(js_name = meshTrajectories)]
pub fn wasm_mesh_trajectories(
    example: &str,
    omega: f64,
    j_max: usize,
    t_end: f64,
    steps: usize,
) -> Result<Vec<f64>, JsError> {
    mesh_trajectories(example, omega, j_max, t_end, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = solve1d)]
pub fn wasm_solve_1d(
    example: &str,
    omega: f64,
    m: usize,
    j_max: usize,
    t_end: f64,
    steps: usize,
    homogeneous: bool,
) -> Result<Solve1D, JsError> {
    solve_1d(example, omega, m, j_max, t_end, steps, homogeneous).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = mesh2d)]
pub fn wasm_mesh_2d(omega: f64, j_max: usize, k_max: usize, t: f64) -> Result<Vec<f64>, JsError> {
    mesh_2d(omega, j_max, k_max, t).map_err(|e| JsError::new(&e))
}
