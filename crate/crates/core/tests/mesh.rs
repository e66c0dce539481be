use std::f64::consts::PI;

use movmesh::problems::{example_5_1, example_5_3, Profile};
use movmesh::{
    build_conservative, BcStrategy, Error, MovingMesh1D, MovingMesh2D, SemiDiscreteSystem, TimeGrid,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_mesh_2d(jm: usize, km: usize, steps: usize, amp: f64, seed: u64) -> MovingMesh2D {
    let grid = TimeGrid::fixed_steps(0.1, steps).unwrap();
    let mut rng = StdRng::seed_from_u64(seed);
    let levels = (0..=steps)
        .map(|_| {
            let mut pts = Vec::new();
            for k in 0..=km {
                for j in 0..=jm {
                    let (mut x, mut y) = (j as f64, k as f64);
                    if j > 0 && j < jm && k > 0 && k < km {
                        x += rng.gen_range(-amp..amp);
                        y += rng.gen_range(-amp..amp);
                    }
                    pts.push((x, y));
                }
            }
            pts
        })
        .collect();
    MovingMesh2D::new(grid, jm, km, levels).unwrap()
}

#[test]
fn positions_are_linear_and_speeds_constant() {
    let grid = TimeGrid::fixed_steps(0.5, 2).unwrap();
    let mesh = MovingMesh1D::new(
        grid,
        vec![
            vec![0.0, 1.0, 2.0],
            vec![0.0, 1.5, 2.0],
            vec![0.0, 0.5, 2.0],
        ],
    )
    .unwrap();
    assert!((mesh.position(1, 0.25).unwrap() - 1.25).abs() < 1e-15);
    assert!((mesh.speed(1, 0.1).unwrap() - 1.0).abs() < 1e-15);
    assert!((mesh.speed(1, 0.9).unwrap() + 2.0).abs() < 1e-15);
    assert!((mesh.cell_width(2, 0.75).unwrap() - 1.0).abs() < 1e-15);
    assert!((mesh.cell_width_rate(2, 0.75).unwrap() - 2.0).abs() < 1e-15);
    assert!(mesh.position(3, 0.1).is_err());
    assert!(mesh.position(1, 1.5).is_err());
    assert!(mesh.cell_width(0, 0.1).is_err());
}

#[test]
fn tangled_levels_are_rejected() {
    let grid = TimeGrid::fixed_steps(1.0, 1).unwrap();
    let r = MovingMesh1D::new(grid, vec![vec![0.0, 1.0, 2.0], vec![0.0, 2.5, 2.0]]);
    assert!(matches!(r, Err(Error::TangledMesh { .. })));
}

#[test]
fn sqrt_mass_rate_matches_finite_difference() {
    let ex = example_5_1(20.0 * PI, Profile::Sin);
    let grid = TimeGrid::fixed_steps(0.02, 50).unwrap();
    let sys = build_conservative(
        &ex.problem,
        ex.mesh(grid.clone(), 30).unwrap(),
        BcStrategy::ApproxPoints,
    )
    .unwrap();
    let eps = 1e-6;
    for n in [0, 7, 31, 49] {
        let t = grid.t(n) + 0.37 * grid.dt(n);
        let (a, b) = (
            sys.mass_diag(t + eps).unwrap(),
            sys.mass_diag(t - eps).unwrap(),
        );
        let rate = sys.dsqrtmass_diag(t);
        for i in 0..sys.dim() {
            let fd = (a.0[i].sqrt() - b.0[i].sqrt()) / (2.0 * eps);
            assert!(
                (fd - rate[i]).abs() < 1e-6 * (1.0 + rate[i].abs()),
                "n={n} i={i}"
            );
        }
    }
}

#[test]
fn trajectory_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let grid = TimeGrid::fixed_steps(0.1, 5).unwrap();
    let m1 = example_5_1(2.0 * PI, Profile::Cos)
        .mesh(grid.clone(), 12)
        .unwrap();
    let p1 = dir.path().join("mesh1d.csv");
    m1.write_trajectory(&p1).unwrap();
    let r1 = MovingMesh1D::read_trajectory(grid.clone(), &p1).unwrap();
    for n in 0..grid.levels() {
        assert_eq!(m1.level(n), r1.level(n));
    }
    let m2 = example_5_3(2.0 * PI).mesh(grid.clone(), 6, 5).unwrap();
    let p2 = dir.path().join("mesh2d.csv");
    m2.write_trajectory(&p2).unwrap();
    let r2 = MovingMesh2D::read_trajectory(grid.clone(), 6, 5, &p2).unwrap();
    for n in 0..grid.levels() {
        for k in 0..=5 {
            for j in 0..=6 {
                assert_eq!(m2.level_node(n, j, k), r2.level_node(n, j, k));
            }
        }
    }
    assert!(MovingMesh1D::read_trajectory(TimeGrid::fixed_steps(0.1, 6).unwrap(), &p1).is_err());
}

#[test]
fn static_uniform_jacobian() {
    let grid = TimeGrid::fixed_steps(1.0, 1).unwrap();
    let mesh = example_5_3(0.0).mesh(grid, 8, 8).unwrap();
    let h = PI / 8.0;
    for (j, k) in [(1, 1), (4, 5), (7, 7)] {
        assert!((mesh.jacobian_node(j, k, 0.5).unwrap() - h * h).abs() < 1e-14);
        assert!(mesh.jacobian_dot(j, k, 0.5).unwrap().abs() < 1e-14);
    }
    assert!(mesh.jacobian_node(0, 3, 0.5).is_err());
}

#[test]
fn boundary_nodes_cover_the_ring_once() {
    let grid = TimeGrid::fixed_steps(1.0, 1).unwrap();
    let mesh = example_5_3(1.0).mesh(grid, 5, 4).unwrap();
    let b = mesh.boundary_nodes();
    assert_eq!(b.len(), 2 * 5 + 2 * 4);
    let mut sorted = b.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), b.len());
    assert!(b.iter().all(|&(j, k)| j == 0 || k == 0 || j == 5 || k == 4));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gcl_holds_on_random_meshes(seed in any::<u64>(), jm in 3usize..9, km in 3usize..9, frac in 0.0f64..1.0) {
        let mesh = random_mesh_2d(jm, km, 3, 0.2, seed);
        let t = 0.1 * (1.0 + frac);
        for k in 1..km {
            for j in 1..jm {
                let r = mesh.gcl_residual(j, k, t).unwrap();
                let jd = mesh.jacobian_dot(j, k, t).unwrap();
                prop_assert!(r.abs() <= 1e-12 * (1.0 + jd.abs()));
            }
        }
    }

    #[test]
    fn jacobian_rate_is_time_derivative(seed in any::<u64>(), frac in 0.1f64..0.9) {
        let mesh = random_mesh_2d(6, 5, 3, 0.25, seed);
        let t = 0.1 + 0.1 * frac;
        let eps = 1e-7;
        for k in 1..5 {
            for j in 1..6 {
                let fd = (mesh.jacobian_node(j, k, t + eps).unwrap() - mesh.jacobian_node(j, k, t - eps).unwrap()) / (2.0 * eps);
                let jd = mesh.jacobian_dot(j, k, t).unwrap();
                prop_assert!((fd - jd).abs() < 1e-6 * (1.0 + jd.abs()), "({}, {}): {} vs {}", j, k, fd, jd);
            }
        }
    }
}
