mod commands;
mod config;
mod error;
mod report_fmt;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use varlift_core::geometry::SectionKind;

use commands::{CheckKind, CommonArgs};

/// Geometric differential control toolkit: residual checks, lifted
/// simulations, and Riccati solves driven by JSON system configs.
#[derive(Parser)]
#[command(name = "varlift", version, disable_help_subcommand = true)]
struct Cli {
    /// Write the bundled example configs into --out (default: current
    /// directory) and exit.
    #[arg(long)]
    examples: bool,

    /// Path to a system config (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output path: CSV trajectory for simulate, directory for --examples.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Residual tolerance (default 1e-8).
    #[arg(long, global = true, value_name = "TOL")]
    tol: Option<f64>,

    /// Override the RNG seed for random sampling.
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,

    /// Sample a uniform grid with this many points per axis.
    #[arg(long, global = true, value_name = "K", conflicts_with = "random")]
    grid: Option<usize>,

    /// Sample this many uniform random points from the domain.
    #[arg(long, global = true, value_name = "COUNT")]
    random: Option<usize>,

    /// Which lifted system to integrate:
    /// base|prolonged|extension|diffham|difflyap.
    #[arg(long, global = true, value_name = "NAME")]
    system: Option<String>,

    /// Final integration time (default 1).
    #[arg(long = "T", global = true, value_name = "T")]
    t_final: Option<f64>,

    /// Fixed integrator step (default 1e-3).
    #[arg(long, global = true, value_name = "DT")]
    dt: Option<f64>,

    #[command(subcommand)]
    cmd: Option<Cmd>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckArg {
    /// Differential Riccati identity, combined with input invariance.
    Riccati,
    /// Input-direction invariance of the metric graph alone.
    InputInvariance,
    /// Differential Lyapunov identity for the input-free drift.
    Lyapunov,
    /// Hamilton-Jacobi-Bellman residual of the generating function.
    Hjb,
    /// Symmetry of the metric Jacobian (closedness of the graph form).
    Integrability,
    /// Lagrangian rank condition for a U/V subbundle.
    Lagrangian,
}

impl CheckArg {
    fn kind(self) -> CheckKind {
        match self {
            CheckArg::Riccati => CheckKind::Riccati,
            CheckArg::InputInvariance => CheckKind::InputInvariance,
            CheckArg::Lyapunov => CheckKind::Lyapunov,
            CheckArg::Hjb => CheckKind::Hjb,
            CheckArg::Integrability => CheckKind::Integrability,
            CheckArg::Lagrangian => CheckKind::Lagrangian,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SectionArg {
    /// Tangent eigen-sections: f(c(x)) vs Dc(x) f(x).
    Right,
    /// Cotangent eigen-sections: transported covector vs section gradient.
    Left,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate an algebraic identity over sampled points and report the
    /// worst residual.
    Check {
        #[arg(value_enum)]
        which: CheckArg,
        /// For `check riccati`, test the Riccati identity only.
        #[arg(long)]
        skip_input_invariance: bool,
    },
    /// Integrate a system with fixed-step RK4, writing a CSV trajectory
    /// and a JSON summary.
    Simulate,
    /// Solve the continuous algebraic Riccati equation by Newton iteration.
    SolveLqr,
    /// Score candidate eigen-sections of the drift field.
    Eigsec {
        #[arg(long, value_enum, default_value = "right")]
        kind: SectionArg,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = CommonArgs {
        config: cli.config,
        tol: cli.tol,
        seed: cli.seed,
        grid: cli.grid,
        random: cli.random,
        out: cli.out,
        system: cli.system,
        t_final: cli.t_final,
        dt: cli.dt,
    };
    let result = if cli.examples {
        commands::cmd_examples(args.out.as_deref())
    } else {
        match cli.cmd {
            Some(Cmd::Check {
                which,
                skip_input_invariance,
            }) => commands::cmd_check(&args, which.kind(), skip_input_invariance),
            Some(Cmd::Simulate) => commands::cmd_simulate(&args),
            Some(Cmd::SolveLqr) => commands::cmd_solve_lqr(&args),
            Some(Cmd::Eigsec { kind }) => {
                let kind = match kind {
                    SectionArg::Right => SectionKind::Right,
                    SectionArg::Left => SectionKind::Left,
                };
                commands::cmd_eigsec(&args, kind)
            }
            None => {
                eprintln!("error: expected a subcommand or --examples (see --help)");
                return ExitCode::from(2);
            }
        }
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
