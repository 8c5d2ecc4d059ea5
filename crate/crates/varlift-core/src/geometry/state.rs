//! Points of the tangent bundle, cotangent bundle, and their Whitney sum.

use nalgebra::DVector;

use crate::error::{Error, Result};

fn check_pair(what: &str, a: &DVector<f64>, b: &DVector<f64>) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            what: what.into(),
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            component: what.into(),
        });
    }
    Ok(())
}

/// (x, δx) on TΧ.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentState {
    pub x: DVector<f64>,
    pub dx: DVector<f64>,
}

impl TangentState {
    pub fn new(x: DVector<f64>, dx: DVector<f64>) -> Result<Self> {
        check_pair("tangent state", &x, &dx)?;
        Ok(TangentState { x, dx })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// (x, p) on T*Χ.
#[derive(Debug, Clone, PartialEq)]
pub struct CotangentState {
    pub x: DVector<f64>,
    pub p: DVector<f64>,
}

impl CotangentState {
    pub fn new(x: DVector<f64>, p: DVector<f64>) -> Result<Self> {
        check_pair("cotangent state", &x, &p)?;
        Ok(CotangentState { x, p })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// (x, δx, p) on TΧ ⊕ T*Χ.
#[derive(Debug, Clone, PartialEq)]
pub struct WhitneyState {
    pub x: DVector<f64>,
    pub dx: DVector<f64>,
    pub p: DVector<f64>,
}

impl WhitneyState {
    pub fn new(x: DVector<f64>, dx: DVector<f64>, p: DVector<f64>) -> Result<Self> {
        check_pair("whitney state (x, dx)", &x, &dx)?;
        check_pair("whitney state (x, p)", &x, &p)?;
        Ok(WhitneyState { x, dx, p })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn tangent(&self) -> TangentState {
        TangentState {
            x: self.x.clone(),
            dx: self.dx.clone(),
        }
    }

    pub fn cotangent(&self) -> CotangentState {
        CotangentState {
            x: self.x.clone(),
            p: self.p.clone(),
        }
    }
}

/// Rate of a bundle point: d/dt of the base and of the fiber coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleRate {
    pub base: DVector<f64>,
    pub fiber: DVector<f64>,
}

/// Rate of a Whitney-sum point (x_dot, dx_dot, p_dot).
#[derive(Debug, Clone, PartialEq)]
pub struct WhitneyRate {
    pub x_dot: DVector<f64>,
    pub dx_dot: DVector<f64>,
    pub p_dot: DVector<f64>,
}
