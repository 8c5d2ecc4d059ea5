//! Lifts of functions and vector fields to TΧ and T*Χ, and the Whitney-sum
//! combination of one tangent and one cotangent field.

use nalgebra::DVector;

use super::state::{BundleRate, CotangentState, TangentState, WhitneyRate, WhitneyState};
use crate::error::{Error, Result};
use crate::expr::SmoothMap;

fn expect_scalar(h: &SmoothMap) -> Result<()> {
    if h.dim_out() != 1 {
        return Err(Error::Dimension {
            what: "lifted function".into(),
            expected: 1,
            got: h.dim_out(),
        });
    }
    Ok(())
}

fn expect_endo(f: &SmoothMap) -> Result<()> {
    if f.dim_out() != f.dim_in() {
        return Err(Error::Dimension {
            what: "vector field".into(),
            expected: f.dim_in(),
            got: f.dim_out(),
        });
    }
    Ok(())
}

/// h^c(x, δx) = ⟨dh(x), δx⟩.
#[derive(Debug, Clone)]
pub struct CompleteLiftFn {
    h: SmoothMap,
}

impl CompleteLiftFn {
    pub fn new(h: SmoothMap) -> Result<Self> {
        expect_scalar(&h)?;
        Ok(CompleteLiftFn { h })
    }

    pub fn eval(&self, s: &TangentState) -> Result<f64> {
        // One dual pass along δx gives ⟨dh, δx⟩ directly.
        Ok(self.h.directional(&s.x, &s.dx)?[0])
    }
}

/// h^v(x, ·) = h(x): constant along fibers, usable on TΧ and T*Χ.
#[derive(Debug, Clone)]
pub struct VerticalLiftFn {
    h: SmoothMap,
}

impl VerticalLiftFn {
    pub fn new(h: SmoothMap) -> Result<Self> {
        expect_scalar(&h)?;
        Ok(VerticalLiftFn { h })
    }

    pub fn eval_base(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.h.eval(x)?[0])
    }

    pub fn eval(&self, s: &TangentState) -> Result<f64> {
        self.eval_base(&s.x)
    }

    pub fn eval_cotangent(&self, s: &CotangentState) -> Result<f64> {
        self.eval_base(&s.x)
    }
}

/// Vector fields on TΧ, evaluated to a (base, fiber) rate.
pub trait TangentVectorField {
    fn eval(&self, s: &TangentState) -> Result<BundleRate>;
}

/// Vector fields on T*Χ, evaluated to a (base, fiber) rate.
pub trait CotangentVectorField {
    fn eval(&self, s: &CotangentState) -> Result<BundleRate>;
}

/// f^c(x, δx) = (f(x), ∂f/∂x(x)·δx).
#[derive(Debug, Clone)]
pub struct CompleteLiftVf {
    f: SmoothMap,
}

impl CompleteLiftVf {
    pub fn new(f: SmoothMap) -> Result<Self> {
        expect_endo(&f)?;
        Ok(CompleteLiftVf { f })
    }
}

impl TangentVectorField for CompleteLiftVf {
    fn eval(&self, s: &TangentState) -> Result<BundleRate> {
        Ok(BundleRate {
            base: self.f.eval(&s.x)?,
            fiber: self.f.directional(&s.x, &s.dx)?,
        })
    }
}

/// f^v(x, δx) = (0, f(x)).
#[derive(Debug, Clone)]
pub struct VerticalLiftVf {
    f: SmoothMap,
}

impl VerticalLiftVf {
    pub fn new(f: SmoothMap) -> Result<Self> {
        expect_endo(&f)?;
        Ok(VerticalLiftVf { f })
    }
}

impl TangentVectorField for VerticalLiftVf {
    fn eval(&self, s: &TangentState) -> Result<BundleRate> {
        Ok(BundleRate {
            base: DVector::zeros(s.dim()),
            fiber: self.f.eval(&s.x)?,
        })
    }
}

/// H^f(x, p) = pᵀf(x).
#[derive(Debug, Clone)]
pub struct HamiltonianFunction {
    f: SmoothMap,
}

impl HamiltonianFunction {
    pub fn new(f: SmoothMap) -> Result<Self> {
        expect_endo(&f)?;
        Ok(HamiltonianFunction { f })
    }

    pub fn eval(&self, s: &CotangentState) -> Result<f64> {
        Ok(s.p.dot(&self.f.eval(&s.x)?))
    }
}

/// X_{H^f}(x, p) = (f(x), −(∂f/∂x)ᵀ(x)·p).
#[derive(Debug, Clone)]
pub struct CompleteHamiltonianLift {
    f: SmoothMap,
}

impl CompleteHamiltonianLift {
    pub fn new(f: SmoothMap) -> Result<Self> {
        expect_endo(&f)?;
        Ok(CompleteHamiltonianLift { f })
    }
}

impl CotangentVectorField for CompleteHamiltonianLift {
    fn eval(&self, s: &CotangentState) -> Result<BundleRate> {
        let jac = self.f.jacobian(&s.x)?;
        Ok(BundleRate {
            base: self.f.eval(&s.x)?,
            fiber: -(jac.transpose() * &s.p),
        })
    }
}

/// X_{h^v}(x, p) = (0, −∂h/∂xᵀ(x)).
#[derive(Debug, Clone)]
pub struct VerticalHamiltonianLift {
    h: SmoothMap,
}

impl VerticalHamiltonianLift {
    pub fn new(h: SmoothMap) -> Result<Self> {
        expect_scalar(&h)?;
        Ok(VerticalHamiltonianLift { h })
    }
}

impl CotangentVectorField for VerticalHamiltonianLift {
    fn eval(&self, s: &CotangentState) -> Result<BundleRate> {
        Ok(BundleRate {
            base: DVector::zeros(s.dim()),
            fiber: -self.h.gradient(&s.x)?,
        })
    }
}

/// Whitney-sum combination of a tangent and a cotangent vector field. The two
/// base components must agree exactly at every evaluation point (they come
/// from identical expressions in every lift combination used here).
pub struct WhitneySum<A, B> {
    tangent: A,
    cotangent: B,
}

pub fn whitney_combine<A: TangentVectorField, B: CotangentVectorField>(
    tangent: A,
    cotangent: B,
) -> WhitneySum<A, B> {
    WhitneySum { tangent, cotangent }
}

impl<A: TangentVectorField, B: CotangentVectorField> WhitneySum<A, B> {
    pub fn eval(&self, z: &WhitneyState) -> Result<WhitneyRate> {
        let t = self.tangent.eval(&z.tangent())?;
        let c = self.cotangent.eval(&z.cotangent())?;
        for i in 0..t.base.len() {
            if t.base[i] != c.base[i] {
                return Err(Error::BaseMismatch {
                    index: i,
                    left: t.base[i],
                    right: c.base[i],
                });
            }
        }
        Ok(WhitneyRate {
            x_dot: t.base,
            dx_dot: t.fiber,
            p_dot: c.fiber,
        })
    }
}
