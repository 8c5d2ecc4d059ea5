//! Command implementations. Each returns the process exit code:
//! 0 pass, 1 checked-and-failed or diverged, 2 usage errors (mapped by the
//! caller from `CliError`).

use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::Serialize;
use varlift_core::geometry::{eigen_section_check, SectionKind};
use varlift_core::geometry::{integrability_residual, lagrangian_check};
use varlift_core::riccati::{
    care_residual, closed_loop_eigenvalues, diff_lyapunov_residual, diff_riccati_residual,
    hjb_residual, input_invariance_residual, solve_care, CareMatrices,
};
use varlift_core::sim::{simulate_system, trajectory_to_csv, InputSignal, SystemKind, Trajectory};
use varlift_core::{report, ResidualReport, SampleRecord};

use crate::config::{resolve_samples, to_dmatrix, SamplesConfig, SystemConfig};
use crate::error::{CliError, CliResult};
use crate::report_fmt::to_json;

/// Shared flag values already extracted from the command line.
pub struct CommonArgs {
    pub config: Option<PathBuf>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub grid: Option<usize>,
    pub random: Option<usize>,
    pub out: Option<PathBuf>,
    pub system: Option<String>,
    pub t_final: Option<f64>,
    pub dt: Option<f64>,
}

impl CommonArgs {
    fn load_config(&self) -> CliResult<SystemConfig> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| CliError::Usage("--config <path> is required".into()))?;
        SystemConfig::load(path)
    }
}

const DEFAULT_ALGEBRAIC_TOL: f64 = 1e-8;
const DEFAULT_DRIFT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Riccati,
    InputInvariance,
    Lyapunov,
    Hjb,
    Integrability,
    Lagrangian,
}

#[derive(Serialize)]
struct ReportEnvelope<'a> {
    #[serde(flatten)]
    report: &'a ResidualReport,
    config: &'a SystemConfig,
}

fn emit_report(report: &ResidualReport, cfg: &SystemConfig) -> CliResult<i32> {
    println!(
        "{}",
        to_json(&ReportEnvelope {
            report,
            config: cfg
        })?
    );
    Ok(if report.pass { 0 } else { 1 })
}

/// Combine two reports taken over the same points into one, keeping the
/// pointwise maximum residual.
fn merge_max(name: &str, a: ResidualReport, b: ResidualReport) -> CliResult<ResidualReport> {
    if a.records.len() != b.records.len() {
        return Err(CliError::Usage(
            "internal: merged reports sampled different points".into(),
        ));
    }
    let records = a
        .records
        .iter()
        .zip(b.records.iter())
        .map(|(ra, rb)| SampleRecord {
            point: ra.point.clone(),
            residual: ra.residual.max(rb.residual),
            gamma: None,
        })
        .collect();
    Ok(ResidualReport::from_records(
        name,
        a.tolerance,
        a.seed,
        records,
    )?)
}

pub fn cmd_check(
    args: &CommonArgs,
    which: CheckKind,
    skip_input_invariance: bool,
) -> CliResult<i32> {
    let mut cfg = args.load_config()?;
    let tol = args.tol.unwrap_or(DEFAULT_ALGEBRAIC_TOL);
    let domain = cfg.domain()?;
    let spec = resolve_samples(&cfg, args.grid, args.random, args.seed);
    cfg.samples = Some(SamplesConfig::from_spec(&spec));
    let points = report::sample_points(&domain, &spec)?;
    let seed = spec.seed();

    let report = match which {
        CheckKind::Riccati => {
            let sys = cfg.system()?;
            let pi = cfg.metric()?;
            let eq_invariance = diff_riccati_residual(&sys, &pi, &points, tol, seed)?;
            if skip_input_invariance || sys.m_in() == 0 {
                eq_invariance
            } else {
                let eq_inputs = input_invariance_residual(&sys, &pi, &points, tol, seed)?;
                merge_max("riccati", eq_invariance, eq_inputs)?
            }
        }
        CheckKind::InputInvariance => {
            let sys = cfg.system()?;
            let pi = cfg.metric()?;
            input_invariance_residual(&sys, &pi, &points, tol, seed)?
        }
        CheckKind::Lyapunov => {
            let sys = cfg.system()?;
            let pi = cfg.metric()?;
            diff_lyapunov_residual(&sys, &pi, &points, tol, seed)?
        }
        CheckKind::Hjb => {
            let sys = cfg.system()?;
            let p = cfg.generating()?;
            hjb_residual(&sys, &p, &points, tol, seed)?
        }
        CheckKind::Integrability => {
            let pi = cfg.metric()?;
            integrability_residual(&pi, &points, tol, seed)?
        }
        CheckKind::Lagrangian => {
            let k = cfg.subbundle()?;
            lagrangian_check(&k, &points, tol, seed)?
        }
    };
    emit_report(&report, &cfg)
}

#[derive(Serialize)]
struct PairingSummary {
    max_drift: f64,
    max_increase: f64,
    /// Slack applied to the nonincreasing flag. The value is an engineering
    /// threshold on integrator error, not a property of the equations.
    slack: f64,
    nonincreasing: bool,
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    command: &'a str,
    system: &'a str,
    t_final: f64,
    dt: f64,
    final_time: f64,
    final_state: Vec<f64>,
    blowup: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pairing: Option<PairingSummary>,
    csv: String,
    config: &'a SystemConfig,
}

fn parse_system_kind(name: &str) -> CliResult<SystemKind> {
    Ok(match name {
        "base" => SystemKind::Base,
        "prolonged" => SystemKind::Prolonged,
        "extension" => SystemKind::Extension,
        "diffham" => SystemKind::DiffHam,
        "difflyap" => SystemKind::DiffLyap,
        other => {
            return Err(CliError::Usage(format!(
                "unknown system `{other}`; expected base|prolonged|extension|diffham|difflyap"
            )))
        }
    })
}

fn stack(parts: &[DVector<f64>]) -> DVector<f64> {
    let len = parts.iter().map(|p| p.len()).sum();
    DVector::from_iterator(len, parts.iter().flat_map(|p| p.iter().copied()))
}

fn pairing_summary(traj: &Trajectory, n: usize, slack: f64) -> Option<PairingSummary> {
    if traj.states.is_empty() || traj.states[0].len() != 3 * n {
        return None;
    }
    let values: Vec<f64> = traj
        .states
        .iter()
        .map(|s| {
            let dx = s.rows(n, n);
            let p = s.rows(2 * n, n);
            p.dot(&dx)
        })
        .collect();
    let v0 = values[0];
    let max_drift = values
        .iter()
        .map(|v| (v - v0).abs())
        .fold(0.0_f64, f64::max);
    let max_increase = values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    Some(PairingSummary {
        max_drift,
        max_increase,
        slack,
        nonincreasing: max_increase <= slack,
    })
}

pub fn cmd_simulate(args: &CommonArgs) -> CliResult<i32> {
    let cfg = args.load_config()?;
    let name = args
        .system
        .as_deref()
        .ok_or_else(|| CliError::Usage("--system <name> is required for simulate".into()))?;
    let kind = parse_system_kind(name)?;
    let out = args
        .out
        .as_ref()
        .ok_or_else(|| CliError::Usage("--out <path> is required for simulate".into()))?;
    let sys = cfg.system()?;
    let n = sys.dim();
    let init = match kind {
        SystemKind::Base => cfg.vector("x0")?,
        SystemKind::Prolonged => stack(&[cfg.vector("x0")?, cfg.vector("dx0")?]),
        SystemKind::Extension => stack(&[cfg.vector("x0")?, cfg.vector("p0")?]),
        SystemKind::DiffHam | SystemKind::DiffLyap => {
            stack(&[cfg.vector("x0")?, cfg.vector("dx0")?, cfg.vector("p0")?])
        }
    };
    let inputs: InputSignal = cfg.input_signal(sys.m_in());
    let t_final = args.t_final.unwrap_or(1.0);
    let dt = args.dt.unwrap_or(1e-3);
    let traj = simulate_system(&sys, kind, &init, &inputs, (0.0, t_final), dt)?;

    std::fs::write(out, trajectory_to_csv(&traj))?;

    let pairing = match kind {
        SystemKind::DiffHam | SystemKind::DiffLyap => {
            pairing_summary(&traj, n, args.tol.unwrap_or(DEFAULT_DRIFT_TOL))
        }
        _ => None,
    };
    let summary = SimulateSummary {
        command: "simulate",
        system: name,
        t_final,
        dt,
        final_time: traj.times.last().copied().unwrap_or(0.0),
        final_state: traj
            .final_state()
            .map(|s| s.as_slice().to_vec())
            .unwrap_or_default(),
        blowup: traj.blowup,
        pairing,
        csv: out.display().to_string(),
        config: &cfg,
    };
    println!("{}", to_json(&summary)?);
    if let Some(t) = traj.blowup {
        eprintln!("integration truncated at t = {t}");
        return Ok(1);
    }
    Ok(0)
}

#[derive(Serialize)]
struct LqrOutput<'a> {
    command: &'a str,
    #[serde(rename = "P")]
    p: Vec<Vec<f64>>,
    residual: f64,
    closed_loop_eigenvalues: Vec<[f64; 2]>,
    config: &'a SystemConfig,
}

/// Probe points used to certify that the configured system is exactly
/// linear before reducing it to matrices.
fn linearization_probes(
    cfg: &SystemConfig,
    args: &CommonArgs,
    n: usize,
) -> CliResult<Vec<DVector<f64>>> {
    if cfg.domain.is_some() {
        let domain = cfg.domain()?;
        let spec = resolve_samples(cfg, args.grid, args.random, args.seed);
        Ok(report::sample_points(&domain, &spec)?)
    } else {
        let mut pts = vec![DVector::zeros(n), DVector::from_element(n, 0.5)];
        for i in 0..n {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            pts.push(e.clone());
            pts.push(-e);
        }
        Ok(pts)
    }
}

pub fn cmd_solve_lqr(args: &CommonArgs) -> CliResult<i32> {
    let cfg = args.load_config()?;
    let cm = match (&cfg.a, &cfg.b, &cfg.c) {
        (Some(a), Some(b), Some(c)) => CareMatrices::new(
            to_dmatrix(a, "A")?,
            to_dmatrix(b, "B")?,
            to_dmatrix(c, "C")?,
        )?,
        (None, None, None) => {
            let sys = cfg.system()?;
            let probes = linearization_probes(&cfg, args, sys.dim())?;
            CareMatrices::from_system(&sys, &probes)?
        }
        _ => {
            return Err(CliError::Usage(
                "explicit linear form needs all of A, B, C".into(),
            ))
        }
    };
    let tol = args.tol.unwrap_or(DEFAULT_ALGEBRAIC_TOL);
    let p = solve_care(&cm, tol, 50)?;
    let residual = care_residual(&cm, &p).norm();
    let eigs = closed_loop_eigenvalues(&cm, &p)
        .into_iter()
        .map(|(re, im)| [re, im])
        .collect();
    let out = LqrOutput {
        command: "solve-lqr",
        p: (0..p.nrows())
            .map(|i| p.row(i).iter().copied().collect())
            .collect(),
        residual,
        closed_loop_eigenvalues: eigs,
        config: &cfg,
    };
    println!("{}", to_json(&out)?);
    Ok(0)
}

pub fn cmd_eigsec(args: &CommonArgs, kind: SectionKind) -> CliResult<i32> {
    let mut cfg = args.load_config()?;
    let tol = args.tol.unwrap_or(DEFAULT_ALGEBRAIC_TOL);
    let f = cfg.drift()?;
    let section = cfg.section_map()?;
    let domain = cfg.domain()?;
    let spec = resolve_samples(&cfg, args.grid, args.random, args.seed);
    cfg.samples = Some(SamplesConfig::from_spec(&spec));
    let points = report::sample_points(&domain, &spec)?;
    let report = eigen_section_check(&f, &section, kind, &points, tol, spec.seed())?;
    emit_report(&report, &cfg)
}

fn example_configs() -> Vec<(&'static str, SystemConfig)> {
    let sq2 = "1.4142135623730951";
    let double_integrator = SystemConfig {
        n: Some(2),
        m: Some(1),
        f: Some(vec!["x2".into(), "0".into()]),
        g: Some(vec![vec!["0".into(), "1".into()]]),
        h: Some(vec!["x1".into()]),
        pi: Some(vec![vec![sq2.into()], vec!["1".into(), sq2.into()]]),
        p_fun: Some(format!("0.5*({sq2}*x1^2 + 2*x1*x2 + {sq2}*x2^2)")),
        section: Some(vec!["1".into(), "0".into()]),
        domain: Some(vec![[-1.0, 1.0], [-1.0, 1.0]]),
        samples: Some(SamplesConfig::Random { count: 64, seed: 7 }),
        x0: Some(vec![1.0, -0.5]),
        dx0: Some(vec![0.5, 0.5]),
        p0: Some(vec![1.2071067811865476, 1.2071067811865476]),
        input: Some(crate::config::InputConfig::Constant(vec![0.0])),
        ..SystemConfig::default()
    };
    let scalar_decay = SystemConfig {
        n: Some(1),
        m: Some(1),
        f: Some(vec!["-x1".into()]),
        g: Some(vec![vec!["1".into()]]),
        h: Some(vec!["x1".into()]),
        pi: Some(vec![vec!["0.41421356237309515".into()]]),
        p_fun: Some("0.20710678118654757*x1^2".into()),
        section: Some(vec!["1".into()]),
        domain: Some(vec![[-2.0, 2.0]]),
        samples: Some(SamplesConfig::Random { count: 64, seed: 7 }),
        x0: Some(vec![1.0]),
        dx0: Some(vec![1.0]),
        p0: Some(vec![0.41421356237309515]),
        input: Some(crate::config::InputConfig::Constant(vec![0.0])),
        ..SystemConfig::default()
    };
    let cubic_decay = SystemConfig {
        n: Some(1),
        m: Some(0),
        f: Some(vec!["-x1^3".into()]),
        g: Some(vec![]),
        h: Some(vec!["x1".into()]),
        pi: Some(vec![vec!["1/(4*x1^2)".into()]]),
        domain: Some(vec![[0.5, 2.0]]),
        samples: Some(SamplesConfig::Grid { per_axis: 9 }),
        x0: Some(vec![1.0]),
        dx0: Some(vec![1.0]),
        p0: Some(vec![0.25]),
        ..SystemConfig::default()
    };
    let rotation = SystemConfig {
        n: Some(2),
        m: Some(0),
        f: Some(vec!["x2".into(), "-x1".into()]),
        g: Some(vec![]),
        h: Some(vec![]),
        pi: Some(vec![vec!["1".into()], vec!["0".into(), "1".into()]]),
        domain: Some(vec![[-1.0, 1.0], [-1.0, 1.0]]),
        samples: Some(SamplesConfig::Grid { per_axis: 5 }),
        x0: Some(vec![1.0, 0.0]),
        dx0: Some(vec![0.3, -0.4]),
        p0: Some(vec![0.3, -0.4]),
        ..SystemConfig::default()
    };
    vec![
        ("double_integrator.json", double_integrator),
        ("scalar_decay.json", scalar_decay),
        ("cubic_decay.json", cubic_decay),
        ("rotation.json", rotation),
    ]
}

/// Write the built-in corpus configs into `dir` and list the paths written.
pub fn cmd_examples(dir: Option<&Path>) -> CliResult<i32> {
    let dir = dir.unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    for (name, cfg) in example_configs() {
        let path = dir.join(name);
        let mut text = serde_json::to_string_pretty(&cfg)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        println!("{}", path.display());
    }
    Ok(0)
}
