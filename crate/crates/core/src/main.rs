use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use movmesh::harness::{self, stress_csv, DtRule, ExampleId, RunConfig, SchemeChoice, SweepMode};
use movmesh::BcStrategy;

#[derive(Parser)]
#[command(
    name = "movmesh",
    version,
    about = "Moving-mesh convection-diffusion experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Temporal,
    #[value(alias = "spatial-coupled")]
    Coupled,
}

#[derive(Clone, Copy, ValueEnum)]
enum Bc {
    Gauss,
    Approx,
    Extrap,
}

impl From<Bc> for BcStrategy {
    fn from(b: Bc) -> Self {
        match b {
            Bc::Gauss => BcStrategy::GaussPoints,
            Bc::Approx => BcStrategy::ApproxPoints,
            Bc::Extrap => BcStrategy::MovingDomainExtrapolated,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Conservative,
    Nonconservative,
    Twocell,
}

#[derive(Subcommand)]
enum Command {
    /// Single run from a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Error table over successive refinements.
    Convergence {
        #[arg(long)]
        example: ExampleId,
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        levels: usize,
        #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
        omega: f64,
        #[arg(long, value_enum)]
        bc: Option<Bc>,
        /// 1D scheme; the 2D example always uses the 2D scheme.
        #[arg(long, value_enum)]
        scheme: Option<Scheme>,
        /// Coarsest J_max (temporal mode: fixed J_max).
        #[arg(long)]
        jmax: Option<usize>,
        /// Starting dt for temporal sweeps.
        #[arg(long, default_value_t = 0.2)]
        dt: f64,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        /// Run the levels on separate threads.
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Homogeneous runs at several time steps; reports boundedness.
    Stability {
        #[arg(long)]
        example: ExampleId,
        #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
        omega: f64,
        /// Comma-separated time steps.
        #[arg(long, value_delimiter = ',', required = true)]
        dt: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long)]
        jmax: Option<usize>,
        #[arg(long, value_enum)]
        bc: Option<Bc>,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn execute(cli: Cli) -> movmesh::Result<bool> {
    match cli.command {
        Command::Run { config } => {
            let cfg = RunConfig::from_file(&config)?;
            let s = harness::run(&cfg)?;
            println!("example        {}", cfg.example);
            println!("J_max          {}", s.j_max);
            if let Some(k) = s.k_max {
                println!("K_max          {k}");
            }
            println!("dt             {:.6e} ({} steps)", s.dt, s.steps);
            match s.max_error {
                Some(e) => println!("max_error      {e:.6e}"),
                None => println!("max_error      NA"),
            }
            match s.energy_monotone {
                Some(b) => println!("energy_monotone {b}"),
                None => println!("energy_monotone NA"),
            }
            println!("max_abs_u      {:.6e}", s.max_abs_u);
            println!("wall_seconds   {:.3}", s.wall_seconds);
            Ok(s.energy_monotone != Some(false))
        }
        Command::Convergence {
            example,
            m,
            mode,
            levels,
            omega,
            bc,
            scheme,
            jmax,
            dt,
            t_end,
            parallel,
            out,
        } => {
            let mode = match mode {
                Mode::Temporal => SweepMode::Temporal,
                Mode::Coupled => SweepMode::Coupled,
            };
            let mut cfg = RunConfig::new(example);
            cfg.m = m;
            cfg.omega = omega;
            cfg.bc = bc.map(Into::into);
            cfg.t_end = t_end;
            cfg.scheme = scheme.map(|s| match s {
                Scheme::Conservative => SchemeChoice::Conservative,
                Scheme::Nonconservative => SchemeChoice::Nonconservative,
                Scheme::Twocell => SchemeChoice::TwoCell,
            });
            cfg.j_max = jmax.unwrap_or(match mode {
                SweepMode::Temporal => 1000,
                SweepMode::Coupled => 20,
            });
            cfg.dt = match mode {
                SweepMode::Temporal => DtRule::Fixed(dt),
                SweepMode::Coupled => DtRule::Coupled,
            };
            let report = harness::convergence(&cfg, mode, levels, parallel)?;
            let csv = report.to_csv();
            print!("{csv}");
            eprintln!("fitted order {:.3}", report.fitted_order());
            if let Some(path) = out {
                report.write_csv(&path)?;
            }
            Ok(true)
        }
        Command::Stability {
            example,
            omega,
            dt,
            m,
            jmax,
            bc,
            t_end,
            out,
        } => {
            let mut cfg = RunConfig::new(example);
            cfg.omega = omega;
            cfg.m = m;
            cfg.bc = bc.map(Into::into);
            cfg.t_end = t_end;
            cfg.j_max = jmax.unwrap_or(if example.is_2d() { 20 } else { 40 });
            let rows = harness::stability_stress(&cfg, &dt)?;
            let csv = stress_csv(&rows);
            print!("{csv}");
            if let Some(path) = out {
                std::fs::write(path, &csv)?;
            }
            Ok(rows.iter().all(|r| r.bounded && r.energy_monotone))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("energy growth detected");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
