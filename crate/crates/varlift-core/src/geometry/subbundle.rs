//! Subbundles of TΧ ⊕ T*Χ: the (U, V) representation, Lagrangian checks,
//! integrability of metric fields, and graph invariance under a vector field.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::{MatrixField, SmoothMap, SymmetricMatrixField};
use crate::report::{ResidualReport, SampleRecord};

/// Fiberwise constraint K(x) = {(δx, p) | V(x)p = U(x)δx}.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbundleUV {
    pub u: MatrixField,
    pub v: MatrixField,
}

impl SubbundleUV {
    pub fn new(u: MatrixField, v: MatrixField) -> Result<Self> {
        if u.dim() != v.dim() {
            return Err(Error::Dimension {
                what: "subbundle (U, V)".into(),
                expected: u.dim(),
                got: v.dim(),
            });
        }
        Ok(SubbundleUV { u, v })
    }

    /// Graph subbundle p = Π(x)δx for a symmetric metric: U = Π, V = I.
    pub fn graph_of(pi: &DMatrix<f64>) -> Result<Self> {
        let n = pi.nrows();
        SubbundleUV::new(
            MatrixField::constant(pi)?,
            MatrixField::constant(&DMatrix::identity(n, n))?,
        )
    }
}

// Relative singular-value cutoff for the rank test; scale-free.
const RANK_CUTOFF: f64 = 1e-9;

/// Pointwise Lagrangian test: symmetry ‖VUᵀ − UVᵀ‖_F ≤ tol and full rank of
/// [U V]. Rank failure is reported as an f64::MAX residual so the report's
/// threshold invariant still decides pass/fail.
pub fn lagrangian_check(
    k: &SubbundleUV,
    samples: &[DVector<f64>],
    tol: f64,
    seed: Option<u64>,
) -> Result<ResidualReport> {
    let n = k.u.dim();
    let mut records = Vec::with_capacity(samples.len());
    for x in samples {
        let u = k.u.eval(x)?;
        let v = k.v.eval(x)?;
        let sym_residual = (&v * u.transpose() - &u * v.transpose()).norm();
        let mut stacked = DMatrix::zeros(n, 2 * n);
        stacked.view_mut((0, 0), (n, n)).copy_from(&u);
        stacked.view_mut((0, n), (n, n)).copy_from(&v);
        let sv = stacked.singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let rank_ok = smax > 0.0 && smin > RANK_CUTOFF * smax;
        let residual = if rank_ok { sym_residual } else { f64::MAX };
        records.push(SampleRecord::new(x, residual));
    }
    ResidualReport::from_records("lagrangian", tol, seed, records)
}

/// Max over (i, j, k) of |∂π_jk/∂x_i − ∂π_ik/∂x_j| per sample.
pub fn integrability_residual(
    pi: &dyn SymmetricMatrixField,
    samples: &[DVector<f64>],
    tol: f64,
    seed: Option<u64>,
) -> Result<ResidualReport> {
    let n = pi.dim();
    let mut records = Vec::with_capacity(samples.len());
    for x in samples {
        let mut grads = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                grads.push(pi.entry_gradient(x, i, j)?);
            }
        }
        let grad = |i: usize, j: usize| -> &DVector<f64> { &grads[i * n + j] };
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let diff = (grad(j, k)[i] - grad(i, k)[j]).abs();
                    worst = worst.max(diff);
                }
            }
        }
        records.push(SampleRecord::new(x, worst));
    }
    ResidualReport::from_records("integrability", tol, seed, records)
}

/// One point of the graph-invariance condition for a vector field v:
/// (∂v/∂x)ᵀΠ + Π ∂v/∂x + ∂Π/∂x·v.
pub fn graph_invariance_at(
    pi: &dyn SymmetricMatrixField,
    v: &SmoothMap,
    x: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    if v.dim_in() != pi.dim() || v.dim_out() != pi.dim() {
        return Err(Error::Dimension {
            what: "invariance vector field".into(),
            expected: pi.dim(),
            got: v.dim_out(),
        });
    }
    let jv = v.jacobian(x)?;
    let pim = pi.eval(x)?;
    let vv = v.eval(x)?;
    Ok(jv.transpose() * &pim + &pim * jv + pi.directional(x, &vv)?)
}

/// Frobenius norm of [`graph_invariance_at`] per sample.
pub fn graph_invariance_residual(
    pi: &dyn SymmetricMatrixField,
    v: &SmoothMap,
    samples: &[DVector<f64>],
    tol: f64,
    seed: Option<u64>,
) -> Result<ResidualReport> {
    let mut records = Vec::with_capacity(samples.len());
    for x in samples {
        let r = graph_invariance_at(pi, v, x)?.norm();
        records.push(SampleRecord::new(x, r));
    }
    ResidualReport::from_records("graph-invariance", tol, seed, records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{HessianField, MetricField};
    use approx::assert_relative_eq;
    use nalgebra::dvector;

    fn samples2() -> Vec<DVector<f64>> {
        vec![dvector![0.3, -0.9], dvector![1.2, 0.4], dvector![-1.0, 1.0]]
    }

    #[test]
    fn graph_subbundle_is_lagrangian() {
        let pi = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let k = SubbundleUV::graph_of(&pi).unwrap();
        let r = lagrangian_check(&k, &samples2(), 1e-12, None).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn skew_u_fails_symmetry() {
        let u =
            MatrixField::constant(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])).unwrap();
        let v = MatrixField::constant(&DMatrix::identity(2, 2)).unwrap();
        let k = SubbundleUV::new(u, v).unwrap();
        let r = lagrangian_check(&k, &samples2(), 1e-12, None).unwrap();
        assert!(!r.pass);
        assert_relative_eq!(r.max_residual, 2.0 * 2.0_f64.sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn zero_section_subbundle_passes() {
        let u = MatrixField::constant(&DMatrix::zeros(2, 2)).unwrap();
        let v = MatrixField::constant(&DMatrix::identity(2, 2)).unwrap();
        let k = SubbundleUV::new(u, v).unwrap();
        let r = lagrangian_check(&k, &samples2(), 1e-12, None).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn rank_deficiency_fails() {
        let u = MatrixField::constant(&DMatrix::zeros(2, 2)).unwrap();
        let v = MatrixField::constant(&DMatrix::zeros(2, 2)).unwrap();
        let k = SubbundleUV::new(u, v).unwrap();
        let r = lagrangian_check(&k, &samples2(), 1e-12, None).unwrap();
        assert!(!r.pass);
        assert_eq!(r.max_residual, f64::MAX);
    }

    #[test]
    fn hessian_metric_is_integrable() {
        let p = SmoothMap::parse(&["x1^2*x2"], 2).unwrap();
        let field = HessianField::new(p).unwrap();
        let r = integrability_residual(&field, &samples2(), 1e-10, None).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn counterexample_metric_residual_one() {
        let pi = MetricField::parse(&[vec!["1".into()], vec!["x1".into(), "1".into()]], 2).unwrap();
        let r = integrability_residual(&pi, &samples2(), 1e-8, None).unwrap();
        assert!(!r.pass);
        assert_relative_eq!(r.max_residual, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn constant_metric_integrable() {
        let pi =
            MetricField::constant(&DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0])).unwrap();
        let r = integrability_residual(&pi, &samples2(), 0.0, None).unwrap();
        assert!(r.pass);
        assert_eq!(r.max_residual, 0.0);
    }

    #[test]
    fn invariance_examples() {
        // Π = I, v = −x (n = 1): residual |−1 − 1| = 2.
        let pi = MetricField::constant(&DMatrix::identity(1, 1)).unwrap();
        let v = SmoothMap::parse(&["-x1"], 1).unwrap();
        let r = graph_invariance_residual(&pi, &v, &[dvector![0.4], dvector![-1.0]], 1e-8, None)
            .unwrap();
        assert!(!r.pass);
        assert_relative_eq!(r.max_residual, 2.0, epsilon = 1e-14);

        // Π = 1/(4x1²), v = x1: exact cancellation.
        let pi = MetricField::parse(&[vec!["1/(4*x1^2)".into()]], 1).unwrap();
        let v = SmoothMap::parse(&["x1"], 1).unwrap();
        let r = graph_invariance_residual(
            &pi,
            &v,
            &[dvector![0.5], dvector![1.3], dvector![2.0]],
            1e-14,
            None,
        )
        .unwrap();
        assert!(r.pass);

        // constant Π, constant v → exactly 0.
        let pi = MetricField::constant(&DMatrix::identity(2, 2)).unwrap();
        let v = SmoothMap::parse(&["1", "2"], 2).unwrap();
        let r = graph_invariance_residual(&pi, &v, &samples2(), 0.0, None).unwrap();
        assert!(r.pass);
    }
}
