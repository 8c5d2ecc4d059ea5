//! Fixed-step RK4 simulation of the composite systems, finite-difference
//! validation of the variational interpretation, pairing monitors, and
//! constraint-drift tests.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::expr::{SmoothMap, SymmetricMatrixField};
use crate::geometry::{whitney_combine, CompleteHamiltonianLift, CompleteLiftVf, WhitneyState};
use crate::systems::ControlAffineSystem;

/// State-component magnitude beyond which integration truncates.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

/// Input signal defined on the whole horizon, sampled left-continuously.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSignal {
    Constant(DVector<f64>),
    /// values[i] holds on [times[i], times[i+1]); before times[0] the first
    /// value is used.
    PiecewiseConstant {
        times: Vec<f64>,
        values: Vec<DVector<f64>>,
    },
    /// Sampled table with the same left-continuous step semantics (no
    /// interpolation).
    SampledTable {
        times: Vec<f64>,
        values: Vec<DVector<f64>>,
    },
}

impl InputSignal {
    pub fn zero(m: usize) -> Self {
        InputSignal::Constant(DVector::zeros(m))
    }

    pub fn dim(&self) -> usize {
        match self {
            InputSignal::Constant(v) => v.len(),
            InputSignal::PiecewiseConstant { values, .. }
            | InputSignal::SampledTable { values, .. } => {
                values.first().map(|v| v.len()).unwrap_or(0)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InputSignal::Constant(_) => Ok(()),
            InputSignal::PiecewiseConstant { times, values }
            | InputSignal::SampledTable { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(Error::Invalid(
                        "input table needs equally many times and values".into(),
                    ));
                }
                if times.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Invalid("input table times must increase".into()));
                }
                let m = values[0].len();
                if values.iter().any(|v| v.len() != m) {
                    return Err(Error::Invalid("input table values differ in length".into()));
                }
                Ok(())
            }
        }
    }

    /// Left-continuous sample: the value at the largest table time ≤ t.
    pub fn sample(&self, t: f64) -> DVector<f64> {
        match self {
            InputSignal::Constant(v) => v.clone(),
            InputSignal::PiecewiseConstant { times, values }
            | InputSignal::SampledTable { times, values } => {
                let idx = match times.binary_search_by(|probe| probe.partial_cmp(&t).unwrap()) {
                    Ok(i) => i,
                    Err(0) => 0,
                    Err(i) => i - 1,
                };
                values[idx].clone()
            }
        }
    }
}

/// Integration result. `outputs` rows are whatever the RHS reports alongside
/// rates (port values); `blowup` records the truncation time if any state
/// component left the finite range.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub outputs: Vec<DVector<f64>>,
    pub state_names: Vec<String>,
    pub output_names: Vec<String>,
    pub blowup: Option<f64>,
}

impl Trajectory {
    pub fn final_state(&self) -> Option<&DVector<f64>> {
        self.states.last()
    }
}

fn state_ok(x: &DVector<f64>) -> bool {
    x.iter()
        .all(|v| v.is_finite() && v.abs() <= BLOWUP_THRESHOLD)
}

/// Classical fixed-step RK4. `rhs(t, state, u)` returns the state rate and
/// the reported outputs; inputs are sampled left-continuously at stage
/// times. Non-finite states truncate the trajectory instead of erroring.
pub fn integrate<F>(
    rhs: F,
    state0: &DVector<f64>,
    inputs: &InputSignal,
    t_span: (f64, f64),
    dt: f64,
) -> Result<Trajectory>
where
    F: Fn(f64, &DVector<f64>, &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)>,
{
    let (t0, t1) = t_span;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Invalid(format!(
            "step size must be positive, got {dt}"
        )));
    }
    if !(t1 > t0 && t0.is_finite() && t1.is_finite()) {
        return Err(Error::Invalid(format!(
            "time span must be finite and increasing, got [{t0}, {t1}]"
        )));
    }
    inputs.validate()?;
    let span = t1 - t0;
    let n_full = ((span / dt) * (1.0 + 1e-12)).floor() as usize;
    let rem = span - n_full as f64 * dt;
    let partial = if rem > 1e-9 * dt { Some(rem) } else { None };

    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        outputs: Vec::new(),
        state_names: Vec::new(),
        output_names: Vec::new(),
        blowup: None,
    };
    let mut x = state0.clone();

    // One evaluation also records the point; NonFinite failures and range
    // violations truncate.
    let eval = |t: f64, x: &DVector<f64>| -> Result<Option<(DVector<f64>, DVector<f64>)>> {
        match rhs(t, x, &inputs.sample(t)) {
            Ok(pair) => Ok(Some(pair)),
            Err(Error::NonFinite { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };

    let total_steps = n_full + partial.map(|_| 1).unwrap_or(0);
    for k in 0..=total_steps {
        let t = if k <= n_full { t0 + k as f64 * dt } else { t1 };
        let t = if k == total_steps && partial.is_some() {
            t1
        } else {
            t
        };
        if !state_ok(&x) {
            traj.blowup = Some(t);
            return Ok(traj);
        }
        let first = match eval(t, &x)? {
            Some(pair) => pair,
            None => {
                traj.blowup = Some(t);
                return Ok(traj);
            }
        };
        traj.times.push(t);
        traj.states.push(x.clone());
        traj.outputs.push(first.1.clone());
        if k == total_steps {
            break;
        }
        let h = if k < n_full { dt } else { partial.unwrap() };
        let k1 = first.0;
        let half = 0.5 * h;
        let s2 = match eval(t + half, &(&x + half * &k1))? {
            Some(p) => p.0,
            None => {
                traj.blowup = Some(t + h);
                return Ok(traj);
            }
        };
        let s3 = match eval(t + half, &(&x + half * &s2))? {
            Some(p) => p.0,
            None => {
                traj.blowup = Some(t + h);
                return Ok(traj);
            }
        };
        let s4 = match eval(t + h, &(&x + h * &s3))? {
            Some(p) => p.0,
            None => {
                traj.blowup = Some(t + h);
                return Ok(traj);
            }
        };
        x = &x + (h / 6.0) * (k1 + 2.0 * s2 + 2.0 * s3 + s4);
    }
    Ok(traj)
}

/// Which composite system to simulate and how its packed state is laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    /// x (n)
    Base,
    /// [x, dx] (2n); inputs [u] or [u, du_var] stacked
    Prolonged,
    /// [x, p] (2n); inputs [u] or [u, du_adj] stacked
    Extension,
    /// [x, dx, p] (3n); inputs u, interconnection closes the rest
    DiffHam,
    /// [x, dx, p] (3n); no inputs
    DiffLyap,
}

impl SystemKind {
    pub fn state_len(&self, n: usize) -> usize {
        match self {
            SystemKind::Base => n,
            SystemKind::Prolonged | SystemKind::Extension => 2 * n,
            SystemKind::DiffHam | SystemKind::DiffLyap => 3 * n,
        }
    }

    pub fn state_names(&self, n: usize) -> Vec<String> {
        let xs = (1..=n).map(|i| format!("x{i}"));
        match self {
            SystemKind::Base => xs.collect(),
            SystemKind::Prolonged => xs.chain((1..=n).map(|i| format!("dx{i}"))).collect(),
            SystemKind::Extension => xs.chain((1..=n).map(|i| format!("p{i}"))).collect(),
            SystemKind::DiffHam | SystemKind::DiffLyap => xs
                .chain((1..=n).map(|i| format!("dx{i}")))
                .chain((1..=n).map(|i| format!("p{i}")))
                .collect(),
        }
    }

    pub fn output_names(&self, m_in: usize, m_out: usize) -> Vec<String> {
        let y = (1..=m_out).map(|j| format!("y{j}"));
        match self {
            SystemKind::Base => y.collect(),
            SystemKind::Prolonged => y.chain((1..=m_out).map(|j| format!("dy_var{j}"))).collect(),
            SystemKind::Extension => y.chain((1..=m_in).map(|j| format!("dy_adj{j}"))).collect(),
            SystemKind::DiffHam | SystemKind::DiffLyap => y
                .chain((1..=m_out).map(|j| format!("dy_var{j}")))
                .chain((1..=m_in).map(|j| format!("dy_adj{j}")))
                .collect(),
        }
    }
}

fn split2(v: &DVector<f64>, n: usize) -> (DVector<f64>, DVector<f64>) {
    (v.rows(0, n).into_owned(), v.rows(n, n).into_owned())
}

fn split3(v: &DVector<f64>, n: usize) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
    (
        v.rows(0, n).into_owned(),
        v.rows(n, n).into_owned(),
        v.rows(2 * n, n).into_owned(),
    )
}

fn stack2(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
}

fn stack3(a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        a.len() + b.len() + c.len(),
        a.iter().chain(b.iter()).chain(c.iter()).copied(),
    )
}

/// Split a possibly stacked input sample into (u, extra channel block).
fn split_input(
    u_all: &DVector<f64>,
    m_in: usize,
    extra: usize,
    what: &str,
) -> Result<(DVector<f64>, DVector<f64>)> {
    if u_all.len() == m_in {
        Ok((u_all.clone(), DVector::zeros(extra)))
    } else if u_all.len() == m_in + extra {
        Ok((
            u_all.rows(0, m_in).into_owned(),
            u_all.rows(m_in, extra).into_owned(),
        ))
    } else {
        Err(Error::Dimension {
            what: what.into(),
            expected: m_in,
            got: u_all.len(),
        })
    }
}

/// Simulate one of the composite systems with a packed initial state.
pub fn simulate_system(
    sys: &ControlAffineSystem,
    kind: SystemKind,
    init: &DVector<f64>,
    inputs: &InputSignal,
    t_span: (f64, f64),
    dt: f64,
) -> Result<Trajectory> {
    let n = sys.dim();
    if init.len() != kind.state_len(n) {
        return Err(Error::Dimension {
            what: "initial state layout".into(),
            expected: kind.state_len(n),
            got: init.len(),
        });
    }
    let m_in = sys.m_in();
    let m_out = sys.m_out();
    let mut traj = match kind {
        SystemKind::Base => integrate(
            |_t, x, u| {
                let (x_dot, y) = sys.base_rhs(x, u)?;
                Ok((x_dot, y))
            },
            init,
            inputs,
            t_span,
            dt,
        )?,
        SystemKind::Prolonged => integrate(
            |_t, s, u_all| {
                let (x, dx) = split2(s, n);
                let (u, du_var) = split_input(u_all, m_in, m_in, "prolonged inputs")?;
                let r = sys.prolonged_rhs(&x, &dx, &u, &du_var)?;
                Ok((stack2(&r.x_dot, &r.dx_dot), stack2(&r.y, &r.dy_var)))
            },
            init,
            inputs,
            t_span,
            dt,
        )?,
        SystemKind::Extension => integrate(
            |_t, s, u_all| {
                let (x, p) = split2(s, n);
                let (u, du_adj) = split_input(u_all, m_in, m_out, "extension inputs")?;
                let r = sys.hamiltonian_extension_rhs(&x, &p, &u, &du_adj)?;
                Ok((stack2(&r.x_dot, &r.p_dot), stack2(&r.y, &r.dy_adj)))
            },
            init,
            inputs,
            t_span,
            dt,
        )?,
        SystemKind::DiffHam => integrate(
            |_t, s, u| {
                let (x, dx, p) = split3(s, n);
                let z = WhitneyState::new(x, dx, p)?;
                let (rate, ports) = sys.diff_hamiltonian_rhs(&z, u)?;
                Ok((
                    stack3(&rate.x_dot, &rate.dx_dot, &rate.p_dot),
                    stack3(&ports.y, &ports.dy_var, &ports.dy_adj),
                ))
            },
            init,
            inputs,
            t_span,
            dt,
        )?,
        SystemKind::DiffLyap => integrate(
            |_t, s, _u| {
                let (x, dx, p) = split3(s, n);
                let z = WhitneyState::new(x, dx, p)?;
                let (rate, ports) = sys.diff_lyapunov_rhs(&z)?;
                Ok((
                    stack3(&rate.x_dot, &rate.dx_dot, &rate.p_dot),
                    stack3(&ports.y, &ports.dy_var, &ports.dy_adj),
                ))
            },
            init,
            inputs,
            t_span,
            dt,
        )?,
    };
    traj.state_names = kind.state_names(n);
    traj.output_names = kind.output_names(m_in, m_out);
    Ok(traj)
}

/// One row of the finite-difference validation table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdRecord {
    pub eps: f64,
    pub error: f64,
}

/// Compare (x_ε(T) − x(T))/ε against the integrated variational flow δx(T)
/// for each ε.
pub fn variational_fd_check(
    sys: &ControlAffineSystem,
    x0: &DVector<f64>,
    v: &DVector<f64>,
    inputs: &InputSignal,
    t_final: f64,
    dt: f64,
    eps_list: &[f64],
) -> Result<Vec<FdRecord>> {
    let n = sys.dim();
    if v.len() != n {
        return Err(Error::Dimension {
            what: "variation direction".into(),
            expected: n,
            got: v.len(),
        });
    }
    let base = simulate_system(sys, SystemKind::Base, x0, inputs, (0.0, t_final), dt)?;
    let base_end = final_state_or_blowup(&base)?;
    let prolonged = simulate_system(
        sys,
        SystemKind::Prolonged,
        &stack2(x0, v),
        inputs,
        (0.0, t_final),
        dt,
    )?;
    let prolonged_end = final_state_or_blowup(&prolonged)?;
    let dx_end = prolonged_end.rows(n, n).into_owned();

    let mut table = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Invalid(format!("eps must be positive, got {eps}")));
        }
        let shifted0 = x0 + eps * v;
        let shifted =
            simulate_system(sys, SystemKind::Base, &shifted0, inputs, (0.0, t_final), dt)?;
        let shifted_end = final_state_or_blowup(&shifted)?;
        let fd = (shifted_end - base_end.clone()) / eps;
        table.push(FdRecord {
            eps,
            error: (fd - &dx_end).norm(),
        });
    }
    Ok(table)
}

fn final_state_or_blowup(traj: &Trajectory) -> Result<DVector<f64>> {
    if let Some(t) = traj.blowup {
        return Err(Error::NonFinite {
            component: format!("trajectory truncated at t = {t}"),
        });
    }
    traj.final_state().cloned().ok_or(Error::NonFinite {
        component: "empty trajectory".into(),
    })
}

/// Empirical convergence orders between consecutive table rows:
/// log(e_i/e_{i+1}) / log(ε_i/ε_{i+1}).
pub fn empirical_orders(table: &[FdRecord]) -> Vec<f64> {
    table
        .windows(2)
        .map(|w| (w[0].error / w[1].error).ln() / (w[0].eps / w[1].eps).ln())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairingMode {
    /// δu = du = 0: pᵀδx is conserved.
    Open,
    /// Interconnection δu = −dy, du = +δy: pᵀδx non-increasing.
    Closed,
}

/// Time series of the pairing ⟨p(t), δx(t)⟩ with its drift diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct PairingSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// max_t |v(t) − v(0)| (conservation metric for open mode).
    pub max_drift: f64,
    /// max over steps of v(t_{k+1}) − v(t_k) (monotonicity metric for
    /// closed mode; ≤ 0 means non-increasing).
    pub max_increase: f64,
    pub blowup: Option<f64>,
}

/// Integrate the joint (x, δx, p) flow and monitor the pairing pᵀδx.
#[allow(clippy::too_many_arguments)]
pub fn pairing_monitor(
    sys: &ControlAffineSystem,
    x0: &DVector<f64>,
    dx0: &DVector<f64>,
    p0: &DVector<f64>,
    inputs: &InputSignal,
    mode: PairingMode,
    t_final: f64,
    dt: f64,
) -> Result<PairingSeries> {
    let n = sys.dim();
    let init = stack3(x0, dx0, p0);
    let traj = match mode {
        PairingMode::Closed => {
            simulate_system(sys, SystemKind::DiffHam, &init, inputs, (0.0, t_final), dt)?
        }
        PairingMode::Open => integrate(
            |_t, s, u| {
                let (x, dx, p) = split3(s, n);
                let zero_in = DVector::zeros(sys.m_in());
                let zero_out = DVector::zeros(sys.m_out());
                let (dx_dot, dy_var) = sys.variational_rhs(&x, &dx, u, &zero_in)?;
                let (p_dot, dy_adj) = sys.adjoint_variational_rhs(&x, &p, u, &zero_out)?;
                let (x_dot, y) = sys.base_rhs(&x, u)?;
                Ok((
                    stack3(&x_dot, &dx_dot, &p_dot),
                    stack3(&y, &dy_var, &dy_adj),
                ))
            },
            &init,
            inputs,
            (0.0, t_final),
            dt,
        )?,
    };
    let mut values = Vec::with_capacity(traj.states.len());
    for s in &traj.states {
        let (_, dx, p) = split3(s, n);
        values.push(p.dot(&dx));
    }
    if values.is_empty() {
        return Err(Error::NonFinite {
            component: "pairing series empty (immediate blow-up)".into(),
        });
    }
    let v0 = values[0];
    let max_drift = values
        .iter()
        .map(|v| (v - v0).abs())
        .fold(0.0_f64, f64::max);
    let max_increase = values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(PairingSeries {
        times: traj.times,
        values,
        max_drift,
        max_increase,
        blowup: traj.blowup,
    })
}

/// Which Whitney-sum field to use for the constraint-drift test.
pub enum DriftField<'a> {
    /// f^c ⊕ X_{H^f} of a plain vector field; inputs are ignored.
    PlainF(&'a SmoothMap),
    /// The differential Hamiltonian field of a system.
    DiffHam(&'a ControlAffineSystem),
}

/// Drift d(t) = ‖p(t) − Π(x(t))δx(t)‖ of the graph constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub max_drift: f64,
    pub blowup: Option<f64>,
}

/// Start on the graph (p0 = Π(x0)δx0), integrate the chosen field, and
/// report the constraint drift over time.
pub fn constraint_drift(
    field: DriftField<'_>,
    pi: &dyn SymmetricMatrixField,
    x0: &DVector<f64>,
    dx0: &DVector<f64>,
    inputs: &InputSignal,
    t_final: f64,
    dt: f64,
) -> Result<DriftSeries> {
    let n = pi.dim();
    if x0.len() != n || dx0.len() != n {
        return Err(Error::Dimension {
            what: "drift initial condition".into(),
            expected: n,
            got: x0.len().min(dx0.len()),
        });
    }
    let p0 = pi.eval(x0)? * dx0;
    let init = stack3(x0, dx0, &p0);
    let traj = match field {
        DriftField::DiffHam(sys) => {
            simulate_system(sys, SystemKind::DiffHam, &init, inputs, (0.0, t_final), dt)?
        }
        DriftField::PlainF(f) => {
            let sum = whitney_combine(
                CompleteLiftVf::new(f.clone())?,
                CompleteHamiltonianLift::new(f.clone())?,
            );
            integrate(
                |_t, s, _u| {
                    let (x, dx, p) = split3(s, n);
                    let z = WhitneyState::new(x, dx, p)?;
                    let r = sum.eval(&z)?;
                    Ok((stack3(&r.x_dot, &r.dx_dot, &r.p_dot), DVector::zeros(0)))
                },
                &init,
                inputs,
                (0.0, t_final),
                dt,
            )?
        }
    };
    let mut values = Vec::with_capacity(traj.states.len());
    for s in &traj.states {
        let (x, dx, p) = split3(s, n);
        values.push((p - pi.eval(&x)? * dx).norm());
    }
    if values.is_empty() {
        return Err(Error::NonFinite {
            component: "drift series empty (immediate blow-up)".into(),
        });
    }
    let max_drift = values.iter().copied().fold(0.0_f64, f64::max);
    Ok(DriftSeries {
        times: traj.times,
        values,
        max_drift,
        blowup: traj.blowup,
    })
}

/// Trajectory rows as CSV: `t,<state names>,<output names>`, floats with 17
/// significant digits.
pub fn trajectory_to_csv(traj: &Trajectory) -> String {
    let mut out = String::new();
    out.push('t');
    for name in traj.state_names.iter().chain(traj.output_names.iter()) {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for k in 0..traj.times.len() {
        out.push_str(&format!("{:.16e}", traj.times[k]));
        for v in traj.states[k].iter().chain(traj.outputs[k].iter()) {
            out.push_str(&format!(",{v:.16e}"));
        }
        out.push('\n');
    }
    out
}
