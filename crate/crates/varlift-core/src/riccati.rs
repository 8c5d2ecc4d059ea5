//! Differential Riccati / Lyapunov / HJB residuals, the linear CARE solver,
//! optimal feedback, and Hessian metrics of generating functions.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::{HessianField, SmoothMap, SymmetricMatrixField};
use crate::geometry::graph_invariance_at;
use crate::report::{ResidualReport, SampleRecord};
use crate::systems::ControlAffineSystem;

/// Matrices of the linear problem AᵀP + PA − PBBᵀP + CᵀC = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CareMatrices {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
}

impl CareMatrices {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension {
                what: "A".into(),
                expected: n,
                got: a.ncols(),
            });
        }
        if b.nrows() != n {
            return Err(Error::Dimension {
                what: "B rows".into(),
                expected: n,
                got: b.nrows(),
            });
        }
        if c.ncols() != n {
            return Err(Error::Dimension {
                what: "C columns".into(),
                expected: n,
                got: c.ncols(),
            });
        }
        Ok(CareMatrices { a, b, c })
    }

    /// Extract (A, B, C) from a system that is exactly linear (verified at
    /// the supplied probe points).
    pub fn from_system(sys: &ControlAffineSystem, probes: &[DVector<f64>]) -> Result<Self> {
        let (a, b, c) = sys.linearize_exact(probes)?;
        CareMatrices::new(a, b, c)
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

/// AᵀP + PA − PBBᵀP + CᵀC.
pub fn care_residual(cm: &CareMatrices, p: &DMatrix<f64>) -> DMatrix<f64> {
    let bbt = &cm.b * cm.b.transpose();
    let ctc = cm.c.transpose() * &cm.c;
    cm.a.transpose() * p + p * &cm.a - p * bbt * p + ctc
}

/// Solve AᵀX + XA = Q by Kronecker vectorization (column-major vec).
pub fn solve_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n || q.nrows() != n || q.ncols() != n {
        return Err(Error::Dimension {
            what: "lyapunov operands".into(),
            expected: n,
            got: a.ncols().max(q.nrows()).max(q.ncols()),
        });
    }
    let id = DMatrix::<f64>::identity(n, n);
    let at = a.transpose();
    // vec(AᵀX) = (I ⊗ Aᵀ) vec(X), vec(XA) = (Aᵀ ⊗ I) vec(X).
    let op = id.kronecker(&at) + at.kronecker(&id);
    let rhs = DVector::from_column_slice(q.as_slice());
    let sol = op.lu().solve(&rhs).ok_or(Error::NonConvergence {
        iters: 0,
        residual: f64::INFINITY,
    })?;
    Ok(DMatrix::from_column_slice(n, n, sol.as_slice()))
}

/// Hurwitz test without eigenvalue machinery: AᵀX + XA = −I must be solvable
/// with symmetric positive-definite X.
pub fn is_hurwitz(a: &DMatrix<f64>) -> bool {
    let n = a.nrows();
    let q = -DMatrix::<f64>::identity(n, n);
    match solve_lyapunov(a, &q) {
        Ok(x) => {
            let sym = (&x + x.transpose()) * 0.5;
            nalgebra::Cholesky::new(sym).is_some()
        }
        Err(_) => false,
    }
}

const INIT_DOUBLINGS: usize = 60;

/// Stabilizing initial iterate P₀ for Newton–Kleinman: zero when A is
/// already Hurwitz, else P₀ = cI (gain cBᵀ) with c doubled; when that gain
/// structurally cannot stabilize, a shifted-Lyapunov (Bass) gain BᵀZ⁻¹ is
/// used with the shift doubled instead.
fn initial_iterate(cm: &CareMatrices) -> Result<DMatrix<f64>> {
    let n = cm.dim();
    if is_hurwitz(&cm.a) {
        return Ok(DMatrix::zeros(n, n));
    }
    let bbt = &cm.b * cm.b.transpose();
    let mut c = 1.0;
    for _ in 0..INIT_DOUBLINGS {
        let closed = &cm.a - c * &bbt;
        if is_hurwitz(&closed) {
            return Ok(c * DMatrix::identity(n, n));
        }
        c *= 2.0;
    }
    let mut beta = 1.0 + cm.a.norm();
    for _ in 0..INIT_DOUBLINGS {
        let shifted = &cm.a + beta * DMatrix::identity(n, n);
        // (A + βI)Z + Z(A + βI)ᵀ = 2BBᵀ, gain K₀ = BᵀZ⁻¹, iterate P₀ = Z⁻¹.
        if let Ok(z) = solve_lyapunov(&shifted.transpose(), &(2.0 * &bbt)) {
            let zs = (&z + z.transpose()) * 0.5;
            if let Some(chol) = nalgebra::Cholesky::new(zs) {
                let p0 = chol.inverse();
                if is_hurwitz(&(&cm.a - &bbt * &p0)) {
                    return Ok(p0);
                }
            }
        }
        beta *= 2.0;
    }
    Err(Error::NotStabilizable {
        doublings: INIT_DOUBLINGS,
    })
}

/// Newton–Kleinman iteration for AᵀP + PA − PBBᵀP + CᵀC = 0; returns the
/// symmetric stabilizing solution with Frobenius residual ≤ tol.
pub fn solve_care(cm: &CareMatrices, tol: f64, max_iter: usize) -> Result<DMatrix<f64>> {
    let bbt = &cm.b * cm.b.transpose();
    let ctc = cm.c.transpose() * &cm.c;
    let mut p = initial_iterate(cm)?;
    let mut residual = care_residual(cm, &p).norm();
    if residual <= tol {
        return Ok(p);
    }
    for k in 1..=max_iter {
        let ak = &cm.a - &bbt * &p;
        let rhs = -&ctc - &p * &bbt * &p;
        let next =
            solve_lyapunov(&ak, &rhs).map_err(|_| Error::NonConvergence { iters: k, residual })?;
        p = (&next + next.transpose()) * 0.5;
        residual = care_residual(cm, &p).norm();
        if residual <= tol {
            return Ok(p);
        }
    }
    Err(Error::NonConvergence {
        iters: max_iter,
        residual,
    })
}

/// Eigenvalues of A − BBᵀP as (re, im) pairs, sorted for reproducible output.
pub fn closed_loop_eigenvalues(cm: &CareMatrices, p: &DMatrix<f64>) -> Vec<(f64, f64)> {
    let closed = &cm.a - &cm.b * cm.b.transpose() * p;
    let mut eigs: Vec<(f64, f64)> = closed
        .complex_eigenvalues()
        .iter()
        .map(|z| (z.re, z.im))
        .collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}

fn output_jacobian(sys: &ControlAffineSystem, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = sys.dim();
    let mut jh = DMatrix::zeros(sys.m_out(), n);
    for (j, hj) in sys.h().iter().enumerate() {
        jh.set_row(j, &hj.gradient(x)?.transpose());
    }
    Ok(jh)
}

fn input_matrix(sys: &ControlAffineSystem, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = sys.dim();
    let mut g = DMatrix::zeros(n, sys.m_in());
    for (j, gj) in sys.g().iter().enumerate() {
        g.set_column(j, &gj.eval(x)?);
    }
    Ok(g)
}

fn check_metric_dim(sys: &ControlAffineSystem, pi: &dyn SymmetricMatrixField) -> Result<()> {
    if pi.dim() != sys.dim() {
        return Err(Error::Dimension {
            what: "metric field".into(),
            expected: sys.dim(),
            got: pi.dim(),
        });
    }
    Ok(())
}

/// Generalized differential Riccati residual per sample:
/// (∂f/∂x)ᵀΠ + Π ∂f/∂x − ΠggᵀΠ + (∂h/∂x)ᵀ∂h/∂x + ∂Π/∂x·f, Frobenius norm.
pub fn diff_riccati_residual(
    sys: &ControlAffineSystem,
    pi: &dyn SymmetricMatrixField,
    samples: &[DVector<f64>],
    tol: f64,
    seed: Option<u64>,
) -> Result<ResidualReport> {
    check_metric_dim(sys, pi)?;
    let mut records = Vec::with_capacity(samples.len());
    for x in samples {
        let r = diff_riccati_matrix(sys, pi, x)?;
        records.push(SampleRecord::new(x, r.norm()));
    }
    ResidualReport::from_records("riccati", tol, seed, records)
}

fn diff_riccati_matrix(
    sys: &ControlAffineSystem,
    pi: &dyn SymmetricMatrixField,
    x: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let jf = sys.f().jacobian(x)?;
    let pim = pi.eval(x)?;
    let g = input_matrix(sys, x)?;
    let jh = output_jacobian(sys, x)?;
    let fv = sys.f().eval(x)?;
    Ok(
        jf.transpose() * &pim + &pim * &jf - &pim * &g * g.transpose() * &pim
            + jh.transpose() * &jh
            + pi.directional(x, &fv)?,
    )
}

/// Input-invariance residual: per sample, the worst channel of
/// (∂g_j/∂x)ᵀΠ + Π ∂g_j/∂x + ∂Π/∂x·g_j over j.
pub fn input_invariance_residual(
    sys: &ControlAffineSystem,
    pi: &dyn SymmetricMatrixField,
    samples: &[DVector<f64>],
    tol: f64,
    seed: Option<u64>,
) -> Result<ResidualReport> {
    check_metric_dim(sys, pi)?;
    let mut records = Vec::with_capacity(samples.len());
    for x in samples {
        let mut worst = 0.0_f64;
        for gj in sys.g() {
            worst = worst.max(graph_invariance_at(pi, gj, x)?.norm());
        }
        records.push(SampleRecord::new(x, worst));
    }
    ResidualReport::from_records("input-invariance", tol, seed, records)
}

/// Differential Lyapunov residual (input-free Riccati, no −ΠggᵀΠ term).
pub fn diff_lyapunov_residual(
    sys: &ControlAffineSystem,
    pi: &dyn SymmetricMatrixField,
    samples: &[DVector<f64>],
    tol: f64,
    seed: Option<u64>,
) -> Result<ResidualReport> {
    if !sys.has_zero_inputs() {
        return Err(Error::NonzeroInput {
            detail: "differential Lyapunov residual needs g = 0".into(),
        });
    }
    check_metric_dim(sys, pi)?;
    let mut records = Vec::with_capacity(samples.len());
    for x in samples {
        let jf = sys.f().jacobian(x)?;
        let pim = pi.eval(x)?;
        let jh = output_jacobian(sys, x)?;
        let fv = sys.f().eval(x)?;
        let r =
            jf.transpose() * &pim + &pim * &jf + jh.transpose() * &jh + pi.directional(x, &fv)?;
        records.push(SampleRecord::new(x, r.norm()));
    }
    ResidualReport::from_records("lyapunov", tol, seed, records)
}

/// Scalar generating function P of a Lagrangian graph p = ∂ᵀP/∂x.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingFunction {
    p: SmoothMap,
}

impl GeneratingFunction {
    pub fn new(p: SmoothMap) -> Result<Self> {
        if p.dim_out() != 1 {
            return Err(Error::Dimension {
                what: "generating function".into(),
                expected: 1,
                got: p.dim_out(),
            });
        }
        Ok(GeneratingFunction { p })
    }

    pub fn parse(src: &str, n: usize) -> Result<Self> {
        GeneratingFunction::new(SmoothMap::parse(&[src], n)?)
    }

    pub fn map(&self) -> &SmoothMap {
        &self.p
    }

    pub fn dim(&self) -> usize {
        self.p.dim_in()
    }

    pub fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.p.gradient(x)
    }
}

/// HJB residual per sample: ∂P/∂x·f − ½ ∂P/∂x ggᵀ ∂ᵀP/∂x + ½ hᵀh.
pub fn hjb_residual(
    sys: &ControlAffineSystem,
    p: &GeneratingFunction,
    samples: &[DVector<f64>],
    tol: f64,
    seed: Option<u64>,
) -> Result<ResidualReport> {
    if p.dim() != sys.dim() {
        return Err(Error::Dimension {
            what: "generating function".into(),
            expected: sys.dim(),
            got: p.dim(),
        });
    }
    let mut records = Vec::with_capacity(samples.len());
    for x in samples {
        let grad = p.gradient(x)?;
        let fv = sys.f().eval(x)?;
        let g = input_matrix(sys, x)?;
        let y = sys.outputs(x)?;
        let gtg = g.transpose() * &grad;
        let r = grad.dot(&fv) - 0.5 * gtg.norm_squared() + 0.5 * y.norm_squared();
        records.push(SampleRecord::new(x, r.abs()));
    }
    ResidualReport::from_records("hjb", tol, seed, records)
}

/// Feedback u(x) = −gᵀ(x)·∂ᵀP/∂x(x).
#[derive(Debug, Clone)]
pub struct OptimalFeedback {
    sys: ControlAffineSystem,
    p: GeneratingFunction,
}

pub fn optimal_feedback(
    sys: &ControlAffineSystem,
    p: &GeneratingFunction,
) -> Result<OptimalFeedback> {
    if p.dim() != sys.dim() {
        return Err(Error::Dimension {
            what: "generating function".into(),
            expected: sys.dim(),
            got: p.dim(),
        });
    }
    Ok(OptimalFeedback {
        sys: sys.clone(),
        p: p.clone(),
    })
}

impl OptimalFeedback {
    pub fn eval(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let g = input_matrix(&self.sys, x)?;
        Ok(-(g.transpose() * self.p.gradient(x)?))
    }
}

/// The Hessian field Π(x) = ∂²P/∂x² of a generating function; integrable by
/// construction.
pub fn hessian_metric(p: &GeneratingFunction) -> Result<HessianField> {
    HessianField::new(p.map().clone())
}
