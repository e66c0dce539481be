//! Pass/fail checks for the solver's headline properties at pinned
//! tolerances. Each test prints one line.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use movmesh::disc1d::{build_conservative, build_nonconservative_halfpoint};
use movmesh::disc2d::build_system_2d;
use movmesh::harness::{
    convergence, stability_stress, DtRule, ErrorReport, ExampleId, RunConfig, SweepMode,
};
use movmesh::integrator::{certificate_threshold, certify_dissipativity, ENERGY_TOLERANCE};
use movmesh::linops::DiagonalMatrix;
use movmesh::mesh2d::MovingMesh2D;
use movmesh::problems::{example_5_1, example_5_3, Profile};
use movmesh::{build_scheme, integrate, BcStrategy, SemiDiscreteSystem, SparseMatrix, TimeGrid};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const STRESS_DTS: [f64; 4] = [1e-2, 1e-1, 1.0, 10.0];

fn verdict(n: u32, name: &str, pass: bool, detail: &str, elapsed: Duration, limit: Duration) {
    let in_time = elapsed <= limit;
    let ok = pass && in_time;
    println!(
        "criterion {n:>2} {name}: {} ({detail}; {:.1} s of {} s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    assert!(pass, "criterion {n} ({name}) failed: {detail}");
    assert!(
        in_time,
        "criterion {n} ({name}) exceeded its runtime budget"
    );
}

fn orders_text(r: &ErrorReport) -> String {
    let pairs: Vec<String> = r.orders().iter().map(|o| format!("{o:.2}")).collect();
    format!(
        "fitted {:.3}, pairs [{}]",
        r.fitted_order(),
        pairs.join(", ")
    )
}

/// Systems of the stability criterion: homogeneous 5.1 at two speeds with
/// J_max = 40 and homogeneous 5.3 on a 21 x 21 mesh.
fn stress_configs() -> Vec<RunConfig> {
    let mut out = Vec::new();
    for omega in [2.0 * PI, 20.0 * PI] {
        let mut c = RunConfig::new(ExampleId::Ex51Sin);
        c.omega = omega;
        c.j_max = 40;
        out.push(c);
    }
    let mut c = RunConfig::new(ExampleId::Ex53);
    c.j_max = 20;
    c.k_max = Some(20);
    out.push(c);
    out
}

#[test]
fn criterion_01_unconditional_stability() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut runs = 0;
    for base in stress_configs() {
        for m in 1..=3 {
            let cfg = RunConfig { m, ..base.clone() };
            for row in stability_stress(&cfg, &STRESS_DTS).unwrap() {
                runs += 1;
                if !(row.energy_monotone && row.bounded) {
                    failures.push(format!(
                        "{} omega={:.3} m={m} dt={}",
                        cfg.example, cfg.omega, row.dt
                    ));
                }
            }
        }
    }
    verdict(
        1,
        "unconditional stability",
        failures.is_empty(),
        &format!("{runs} runs, energy tolerance {ENERGY_TOLERANCE:e}, failures {failures:?}"),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_02_dissipativity_certificate() {
    let start = Instant::now();
    let mut worst_ratio = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    let mut checks = 0;
    for base in stress_configs() {
        for &dt in &STRESS_DTS {
            let grid = movmesh::harness::harness_grid(base.t_end, dt, 2).unwrap();
            let t_end = grid.t_end();
            let times: Vec<f64> = (0..20).map(|i| (i as f64 + 0.5) / 20.0 * t_end).collect();
            let sys: Box<dyn SemiDiscreteSystem> = if base.example.is_2d() {
                let ex = example_5_3(base.omega);
                let mesh = ex.mesh(grid, 20, 20).unwrap();
                Box::new(
                    build_system_2d(&ex.problem.homogeneous(), mesh, BcStrategy::ApproxPoints)
                        .unwrap(),
                )
            } else {
                let ex = example_5_1(base.omega, Profile::Sin);
                let mesh = ex.mesh(grid, 40).unwrap();
                Box::new(
                    build_conservative(&ex.problem.homogeneous(), mesh, BcStrategy::ApproxPoints)
                        .unwrap(),
                )
            };
            let eigs = certify_dissipativity(sys.as_ref(), &times).unwrap();
            for (&t, &lam) in times.iter().zip(&eigs) {
                checks += 1;
                let thr = certificate_threshold(sys.as_ref(), t);
                worst_ratio = worst_ratio.max(lam / thr);
                if lam > thr {
                    failures.push(format!(
                        "{} omega={:.3} dt={dt} t={t:.4}: {lam:e}",
                        base.example, base.omega
                    ));
                }
            }
        }
    }
    verdict(
        2,
        "dissipativity certificate",
        failures.is_empty(),
        &format!(
            "{checks} samples, worst eig / threshold {worst_ratio:.3e}, failures {failures:?}"
        ),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

fn random_mesh(seed: u64) -> MovingMesh2D {
    let (jm, km) = (20, 20);
    let grid = TimeGrid::fixed_steps(0.05, 20).unwrap();
    let h = PI / jm as f64;
    let mut rng = StdRng::seed_from_u64(seed);
    let levels = (0..grid.levels())
        .map(|_| {
            let mut pts = Vec::with_capacity((jm + 1) * (km + 1));
            for k in 0..=km {
                for j in 0..=jm {
                    let (mut x, mut y) = (j as f64 * h, k as f64 * h);
                    if j > 0 && j < jm && k > 0 && k < km {
                        x += rng.gen_range(-0.15..0.15) * h;
                        y += rng.gen_range(-0.15..0.15) * h;
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
fn criterion_03_gcl_identity() {
    let start = Instant::now();
    let grid = TimeGrid::fixed_steps(0.05, 20).unwrap();
    let meshes = [
        example_5_3(2.0 * PI).mesh(grid, 20, 20).unwrap(),
        random_mesh(7),
    ];
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    for mesh in &meshes {
        let g = mesh.grid();
        for n in 0..g.steps() {
            for frac in [0.25, 0.5, 0.75] {
                let t = g.t(n) + frac * g.dt(n);
                let st = mesh.state(t).unwrap();
                for k in 1..mesh.k_max() {
                    for j in 1..mesh.j_max() {
                        let r = st.gcl_residual(j, k).unwrap();
                        let jd = st.jacobian_dot(j, k).unwrap();
                        worst = worst.max(r.abs() / (1.0 + jd.abs()));
                        samples += 1;
                    }
                }
            }
        }
    }
    verdict(
        3,
        "GCL identity",
        worst <= 1e-12,
        &format!("{samples} node samples, worst scaled residual {worst:.3e}"),
        start.elapsed(),
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_04_scheme_equivalence() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for (omega, profile) in [
        (2.0 * PI, Profile::Sin),
        (20.0 * PI, Profile::Sin),
        (2.0 * PI, Profile::Cos),
    ] {
        let ex = example_5_1(omega, profile);
        let grid = TimeGrid::fixed_steps(0.01, 100).unwrap();
        let mesh = ex.mesh(grid, 40).unwrap();
        let a = build_conservative(&ex.problem, mesh.clone(), BcStrategy::ApproxPoints).unwrap();
        let b =
            build_nonconservative_halfpoint(&ex.problem, mesh, BcStrategy::ApproxPoints).unwrap();
        for _ in 0..10 {
            let t = rng.gen_range(0.0..1.0);
            let (sa, sb) = (a.stiffness(t), b.stiffness(t));
            let scale = sa.max_abs();
            let da = sa.to_dense();
            let db = sb.to_dense();
            worst = worst.max((da - db).abs().max() / scale);
            for (na, nb) in a
                .boundary(t)
                .unwrap()
                .iter()
                .zip(b.boundary(t).unwrap().iter())
            {
                for (&(ra, ca), &(rb, cb)) in na.coupling.iter().zip(&nb.coupling) {
                    assert_eq!(ra, rb);
                    worst = worst.max((ca - cb).abs() / scale);
                }
            }
        }
    }
    verdict(
        4,
        "scheme equivalence",
        worst <= 1e-13,
        &format!("worst entrywise difference / max|A| {worst:.3e}"),
        start.elapsed(),
        Duration::from_secs(5),
    );
}

#[test]
fn criterion_05_temporal_order() {
    let start = Instant::now();
    let mut cfg = RunConfig::new(ExampleId::Ex51Sin);
    cfg.j_max = 1000;
    cfg.dt = DtRule::Fixed(0.2);
    let r = convergence(&cfg, SweepMode::Temporal, 4, true).unwrap();
    let p = r.fitted_order();
    verdict(
        5,
        "temporal order, m = 1",
        (1.8..=2.2).contains(&p),
        &orders_text(&r),
        start.elapsed(),
        Duration::from_secs(120),
    );
}

fn coupled(
    example: ExampleId,
    omega: f64,
    m: usize,
    j0: usize,
    bc: Option<BcStrategy>,
) -> ErrorReport {
    let mut cfg = RunConfig::new(example);
    cfg.omega = omega;
    cfg.m = m;
    cfg.j_max = j0;
    cfg.bc = bc;
    convergence(&cfg, SweepMode::Coupled, 4, true).unwrap()
}

#[test]
fn criterion_06_coupled_convergence() {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for m in 1..=3 {
        let r = coupled(ExampleId::Ex51Sin, 2.0 * PI, m, 20, None);
        pass &= (1.7..=2.3).contains(&r.fitted_order());
        parts.push(format!("m={m}: {}", orders_text(&r)));
    }
    verdict(
        6,
        "coupled convergence",
        pass,
        &parts.join("; "),
        start.elapsed(),
        Duration::from_secs(300),
    );
}

#[test]
fn criterion_07_boundary_condition_study() {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for m in [2, 3] {
        let g = coupled(
            ExampleId::Ex51Cos,
            2.0 * PI,
            m,
            20,
            Some(BcStrategy::GaussPoints),
        );
        let a = coupled(
            ExampleId::Ex51Cos,
            2.0 * PI,
            m,
            20,
            Some(BcStrategy::ApproxPoints),
        );
        pass &= (0.7..=1.3).contains(&g.fitted_order());
        pass &= (1.7..=2.3).contains(&a.fitted_order());
        parts.push(format!("m={m} gauss: {}", orders_text(&g)));
        parts.push(format!("m={m} approx: {}", orders_text(&a)));
    }
    verdict(
        7,
        "boundary-condition study",
        pass,
        &parts.join("; "),
        start.elapsed(),
        Duration::from_secs(300),
    );
}

#[test]
fn criterion_08_moving_domain() {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for omega in [2.0 * PI, 20.0 * PI] {
        let r = coupled(
            ExampleId::Ex52,
            omega,
            1,
            20,
            Some(BcStrategy::MovingDomainExtrapolated),
        );
        pass &= (1.7..=2.3).contains(&r.fitted_order());
        parts.push(format!("omega={omega:.3}: {}", orders_text(&r)));
    }
    let mut cfg = RunConfig::new(ExampleId::Ex52);
    cfg.omega = 20.0 * PI;
    let mut runs = 0;
    let mut growth = Vec::new();
    for j_max in [20, 40, 80, 160] {
        cfg.j_max = j_max;
        let mut dts = STRESS_DTS.to_vec();
        dts.push(DtRule::Coupled.resolve(j_max, 1));
        for r in stability_stress(&cfg, &dts).unwrap() {
            runs += 1;
            if !(r.bounded && r.energy_monotone) {
                growth.push(format!("J={j_max} dt={}", r.dt));
            }
        }
    }
    pass &= growth.is_empty();
    parts.push(format!(
        "stress omega=62.832 m=1: {runs} runs, energy growth in {growth:?}"
    ));
    verdict(
        8,
        "moving domain",
        pass,
        &parts.join("; "),
        start.elapsed(),
        Duration::from_secs(300),
    );
}

#[test]
fn criterion_09_two_dimensional_convergence() {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for m in [1, 2] {
        let r = coupled(ExampleId::Ex53, 2.0 * PI, m, 10, None);
        pass &= (1.7..=2.3).contains(&r.fitted_order());
        parts.push(format!("m={m}: {}", orders_text(&r)));
    }
    verdict(
        9,
        "2D convergence",
        pass,
        &parts.join("; "),
        start.elapsed(),
        Duration::from_secs(900),
    );
}

/// M(t) u' = a(t) u + s(t) for a scalar unknown with a closed-form solution.
struct Scalar {
    mass: fn(f64) -> f64,
    mass_rate: fn(f64) -> f64,
    a: fn(f64) -> f64,
    exact: fn(f64) -> f64,
    exact_rate: fn(f64) -> f64,
}

impl SemiDiscreteSystem for Scalar {
    fn dim(&self) -> usize {
        1
    }

    fn mass_diag(&self, t: f64) -> movmesh::Result<DiagonalMatrix> {
        Ok(DiagonalMatrix(vec![(self.mass)(t)]))
    }

    fn dsqrtmass_diag(&self, t: f64) -> Vec<f64> {
        vec![(self.mass_rate)(t) / (2.0 * (self.mass)(t).sqrt())]
    }

    fn stiffness(&self, t: f64) -> SparseMatrix {
        SparseMatrix::from_diagonal(&[(self.a)(t)])
    }

    fn source(&self, t: f64) -> Vec<f64> {
        vec![(self.mass)(t) * (self.exact_rate)(t) - (self.a)(t) * (self.exact)(t)]
    }
}

#[test]
fn criterion_10_collocation_order() {
    let start = Instant::now();
    let systems = [
        Scalar {
            mass: |t| 2.0 + t.cos(),
            mass_rate: |t| -t.sin(),
            a: |t| -(1.0 + t),
            exact: |t| (-0.5 * t).exp() * (1.0 + (3.0 * t).sin()),
            exact_rate: |t| {
                (-0.5 * t).exp() * (-0.5 * (1.0 + (3.0 * t).sin()) + 3.0 * (3.0 * t).cos())
            },
        },
        Scalar {
            mass: |t| (0.3 * t).exp(),
            mass_rate: |t| 0.3 * (0.3 * t).exp(),
            a: |t| -2.0 - (2.0 * t).sin(),
            exact: |t| (t * t).cos() + t,
            exact_rate: |t| -2.0 * t * (t * t).sin() + 1.0,
        },
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, sys) in systems.iter().enumerate() {
        for m in 1..=3 {
            let scheme = build_scheme(m).unwrap();
            let steps: Vec<usize> = (1..=4).map(|k| 2usize << k).collect();
            let errors: Vec<f64> = steps
                .iter()
                .map(|&n| {
                    let grid = TimeGrid::fixed_steps(1.0 / n as f64, n).unwrap();
                    let h = integrate(sys, &grid, &scheme, &[(sys.exact)(0.0)], false).unwrap();
                    (1..=n).fold(0.0, |e: f64, i| {
                        e.max((h.u[i][0] - (sys.exact)(grid.t(i))).abs())
                    })
                })
                .collect();
            let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
            let p = orders.iter().copied().fold(f64::INFINITY, f64::min);
            pass &= p >= 2.0 * m as f64 - 0.2;
            let shown: Vec<String> = orders.iter().map(|o| format!("{o:.2}")).collect();
            parts.push(format!("system {} m={m}: [{}]", i + 1, shown.join(", ")));
        }
    }
    verdict(
        10,
        "collocation order",
        pass,
        &parts.join("; "),
        start.elapsed(),
        Duration::from_secs(10),
    );
}
