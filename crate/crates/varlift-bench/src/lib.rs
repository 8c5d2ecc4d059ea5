//! Shared fixtures for the criterion benchmarks.

use nalgebra::{dmatrix, DMatrix, DVector};
use varlift_core::riccati::CareMatrices;
use varlift_core::systems::ControlAffineSystem;
use varlift_core::SmoothMap;

pub fn pendulum_like() -> SmoothMap {
    SmoothMap::parse(&["x2", "-sin(x1) - 0.2*x2"], 2).unwrap()
}

pub fn double_integrator() -> ControlAffineSystem {
    ControlAffineSystem::parse(
        &["x2", "0"],
        &[vec!["0".to_string(), "1".to_string()]],
        &["x1"],
    )
    .unwrap()
}

pub fn nonlinear_system() -> ControlAffineSystem {
    ControlAffineSystem::parse(
        &["x2", "-sin(x1) - 0.2*x2"],
        &[vec!["0".to_string(), "1".to_string()]],
        &["x1"],
    )
    .unwrap()
}

pub fn double_integrator_care() -> CareMatrices {
    CareMatrices::new(
        dmatrix![0.0, 1.0; 0.0, 0.0],
        dmatrix![0.0; 1.0],
        dmatrix![1.0, 0.0],
    )
    .unwrap()
}

/// Chained-mass linear system of dimension n with one input and one output,
/// for scaling the CARE solver benchmark.
pub fn chain_care(n: usize) -> CareMatrices {
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = -0.5;
        if i + 1 < n {
            a[(i, i + 1)] = 1.0;
        }
    }
    let mut b = DMatrix::zeros(n, 1);
    b[(n - 1, 0)] = 1.0;
    let mut c = DMatrix::zeros(1, n);
    c[(0, 0)] = 1.0;
    CareMatrices::new(a, b, c).unwrap()
}

pub fn eval_point() -> DVector<f64> {
    DVector::from_vec(vec![0.7, -0.3])
}
