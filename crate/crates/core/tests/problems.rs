use std::f64::consts::PI;

use movmesh::problems::{example_5_1, example_5_2, example_5_3, Example1D, Problem1D, Profile};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const H: f64 = 1e-4;

/// u_t + (b u)_x + c u - (a u_x)_x - f by central differences, fourth
/// order in t for the fast oscillations.
fn residual_1d(ex: &Example1D, x: f64, t: f64) -> f64 {
    let p: &Problem1D = &ex.problem;
    let u = |x: f64, t: f64| ex.exact.eval(x, t);
    let u_t =
        (8.0 * (u(x, t + H) - u(x, t - H)) - (u(x, t + 2.0 * H) - u(x, t - 2.0 * H))) / (12.0 * H);
    let bu = |x: f64| (p.b)(x, t) * u(x, t);
    let flux = |x: f64| (p.a)(x, t) * (u(x + 0.5 * H, t) - u(x - 0.5 * H, t)) / H;
    let conv = (bu(x + H) - bu(x - H)) / (2.0 * H);
    let diff = (flux(x + 0.5 * H) - flux(x - 0.5 * H)) / H;
    u_t + conv + (p.c)(x, t) * u(x, t) - diff - (p.f)(x, t)
}

fn check_example_1d(ex: &Example1D, seed: u64) {
    let mut rng = StdRng::seed_from_u64(seed);
    let d = &ex.problem.domain;
    for _ in 0..100 {
        let t = rng.gen_range(0.01..0.99);
        let (xl, xr) = ((d.xl)(t), (d.xr)(t));
        let x = xl + rng.gen_range(0.01..0.99) * (xr - xl);
        let r = residual_1d(ex, x, t);
        assert!(
            r.abs() < 1e-4 * (1.0 + (ex.problem.f)(x, t).abs()),
            "x={x} t={t}: residual {r}"
        );
    }
    for t in [0.0, 0.3, 0.8] {
        for x in [(d.xl)(t), (d.xr)(t)] {
            assert!(((ex.problem.g)(x, t) - ex.exact.eval(x, t)).abs() < 1e-13);
        }
    }
    for i in 0..=10 {
        let x = (d.xl)(0.0) + i as f64 / 10.0 * ((d.xr)(0.0) - (d.xl)(0.0));
        assert!(((ex.problem.u0)(x) - ex.exact.eval(x, 0.0)).abs() < 1e-13);
    }
}

#[test]
fn heat_examples_solve_their_equations() {
    for omega in [2.0 * PI, 20.0 * PI] {
        check_example_1d(&example_5_1(omega, Profile::Sin), 1);
        check_example_1d(&example_5_1(omega, Profile::Cos), 2);
    }
}

#[test]
fn moving_domain_example_solves_its_equation() {
    for omega in [2.0 * PI, 20.0 * PI] {
        check_example_1d(&example_5_2(omega), 3);
    }
}

#[test]
fn two_dimensional_example_solves_its_equation() {
    let ex = example_5_3(2.0 * PI);
    let p = &ex.problem;
    let u = |x: f64, y: f64, t: f64| ex.exact.eval(x, y, t);
    let mut rng = StdRng::seed_from_u64(4);
    for _ in 0..100 {
        let (x, y, t) = (
            rng.gen_range(0.05..3.1),
            rng.gen_range(0.05..3.1),
            rng.gen_range(0.01..0.99),
        );
        let u_t = (u(x, y, t + H) - u(x, y, t - H)) / (2.0 * H);
        let lap = (u(x + H, y, t) + u(x - H, y, t) + u(x, y + H, t) + u(x, y - H, t)
            - 4.0 * u(x, y, t))
            / (H * H);
        let r = u_t - (p.a)(x, y, t) * lap + (p.c)(x, y, t) * u(x, y, t) - (p.f)(x, y, t);
        assert!(r.abs() < 1e-4, "residual {r}");
    }
    for s in [0.0, 1.0, 2.5] {
        assert!(u(0.0, s, 0.4).abs() < 1e-15 && u(s, 0.0, 0.4).abs() < 1e-15);
        assert!(u(PI, s, 0.4).abs() < 1e-13 && u(s, PI, 0.4).abs() < 1e-13);
    }
}

#[test]
fn moving_domain_mesh_spans_the_domain() {
    let ex = example_5_2(20.0 * PI);
    let d = &ex.problem.domain;
    for t in [0.0, 0.013, 0.5] {
        assert_eq!((ex.generator)(0, 16, t), (d.xl)(t));
        assert_eq!((ex.generator)(16, 16, t), (d.xr)(t));
    }
    assert!(ex.required_bc.is_some());
}

#[test]
fn homogeneous_problem_drops_data() {
    let p = example_5_1(2.0 * PI, Profile::Cos).problem.homogeneous();
    assert!(p.homogeneous);
    assert_eq!((p.f)(0.3, 0.4), 0.0);
    assert_eq!((p.g)(0.0, 0.4), 0.0);
}
