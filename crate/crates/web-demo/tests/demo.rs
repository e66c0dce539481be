use std::f64::consts::PI;

use movmesh_web::{mesh_2d, mesh_trajectories, solve_1d};

#[test]
fn trajectories_have_one_row_per_level() {
    let data = mesh_trajectories("sin", 2.0 * PI, 10, 1.0, 8).unwrap();
    assert_eq!(data.len(), 9 * 11);
    for row in data.chunks(11) {
        assert_eq!(row[0], 0.0);
        assert!((row[10] - PI).abs() < 1e-15);
        assert!(row.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn moving_domain_ends_follow_boundary() {
    let data = mesh_trajectories("moving", 2.0 * PI, 10, 1.0, 4).unwrap();
    // t = 0.25: x_l = pi/3
    let row = &data[11..22];
    assert!((row[0] - PI / 3.0).abs() < 1e-14);
    assert!((row[10] - 2.0 * PI / 3.0).abs() < 1e-14);
}

#[test]
fn unknown_example_is_rejected() {
    assert!(mesh_trajectories("nope", 1.0, 10, 1.0, 4).is_err());
    assert!(solve_1d("sin", 1.0, 0, 10, 1.0, 4, false).is_err());
    assert!(mesh_trajectories("sin", 1.0, 10, 1.0, 0).is_err());
}

#[test]
fn solve_tracks_exact_solution() {
    let r = solve_1d("sin", 2.0 * PI, 1, 40, 1.0, 40, false).unwrap();
    assert_eq!(r.x().len(), 41);
    assert_eq!(r.u().len(), 41);
    assert_eq!(r.energy().len(), 41);
    assert!(r.max_error() < 5e-3, "error {}", r.max_error());
}

#[test]
fn homogeneous_solve_decays() {
    let r = solve_1d("moving", 20.0 * PI, 1, 40, 1.0, 10, true).unwrap();
    let e = r.energy();
    assert!(e.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    assert!(r.max_error().is_nan());
}

#[test]
fn mesh_2d_is_static_at_zero_and_pins_boundary() {
    let j = 8;
    let p = mesh_2d(2.0 * PI, j, j, 0.0).unwrap();
    assert_eq!(p.len(), 2 * 81);
    for k in 0..=j {
        for i in 0..=j {
            let at = 2 * (k * (j + 1) + i);
            assert!((p[at] - PI * i as f64 / j as f64).abs() < 1e-14);
            assert!((p[at + 1] - PI * k as f64 / j as f64).abs() < 1e-14);
        }
    }
    let q = mesh_2d(2.0 * PI, j, j, 0.25).unwrap();
    assert_eq!(q[0], 0.0);
    assert_eq!(q[2 * 80], PI);
    assert!(q.iter().zip(&p).any(|(a, b)| (a - b).abs() > 1e-3));
    assert!(mesh_2d(1.0, 1, 4, 0.0).is_err());
}
