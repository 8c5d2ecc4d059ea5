//! Lie brackets, Lie derivatives of one-forms, and eigen-section checks.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::expr::SmoothMap;
use crate::report::{ResidualReport, SampleRecord};

fn expect_same_endo(f: &SmoothMap, other: &SmoothMap, what: &str) -> Result<()> {
    if f.dim_in() != f.dim_out() {
        return Err(Error::Dimension {
            what: "vector field".into(),
            expected: f.dim_in(),
            got: f.dim_out(),
        });
    }
    if other.dim_in() != f.dim_in() || other.dim_out() != f.dim_in() {
        return Err(Error::Dimension {
            what: what.into(),
            expected: f.dim_in(),
            got: other.dim_out(),
        });
    }
    Ok(())
}

/// [f, X](x) = ∂X/∂x(x)·f(x) − ∂f/∂x(x)·X(x), the Lie derivative L_f X.
pub fn lie_bracket(f: &SmoothMap, xf: &SmoothMap, x: &DVector<f64>) -> Result<DVector<f64>> {
    expect_same_endo(f, xf, "bracket argument")?;
    let fv = f.eval(x)?;
    let xv = xf.eval(x)?;
    Ok(xf.directional(x, &fv)? - f.directional(x, &xv)?)
}

/// L_f α in the column convention: (∂f/∂x)ᵀα + (∂α/∂x)·f.
pub fn lie_derivative_oneform(
    f: &SmoothMap,
    alpha: &SmoothMap,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    expect_same_endo(f, alpha, "one-form components")?;
    let av = alpha.eval(x)?;
    let fv = f.eval(x)?;
    let jf = f.jacobian(x)?;
    Ok(jf.transpose() * av + alpha.directional(x, &fv)?)
}

/// Which eigen-equation a section should satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectionKind {
    /// L_f S = γS with S a vector field (right eigenvector of ∂f/∂x).
    Right,
    /// L_f α = γα with α a one-form (left eigenvector of ∂f/∂x).
    Left,
}

/// Per-sample least-squares estimate γ̂ = ⟨L_fS, S⟩/⟨S, S⟩ and residual
/// ‖L_fS − γ̂S‖.
pub fn eigen_section_check(
    f: &SmoothMap,
    section: &SmoothMap,
    kind: SectionKind,
    samples: &[DVector<f64>],
    tol: f64,
    seed: Option<u64>,
) -> Result<ResidualReport> {
    let name = match kind {
        SectionKind::Right => "eigsec-right",
        SectionKind::Left => "eigsec-left",
    };
    let mut records = Vec::with_capacity(samples.len());
    for (i, x) in samples.iter().enumerate() {
        let sv = section.eval(x)?;
        let denom = sv.dot(&sv);
        if denom == 0.0 {
            return Err(Error::ZeroSection { index: i });
        }
        let lf = match kind {
            SectionKind::Right => lie_bracket(f, section, x)?,
            SectionKind::Left => lie_derivative_oneform(f, section, x)?,
        };
        let gamma = lf.dot(&sv) / denom;
        let residual = (lf - gamma * &sv).norm();
        records.push(SampleRecord::with_gamma(x, residual, gamma));
    }
    ResidualReport::from_records(name, tol, seed, records)
}
