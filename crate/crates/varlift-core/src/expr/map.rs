//! Smooth maps ℝⁿ → ℝᵏ given componentwise by expressions.

use nalgebra::{DMatrix, DVector};

use super::ast::Expr;
use super::dual::{AdScalar, Dual};
use super::eval::{eval_expr, label_component};
use super::parse::parse;
use crate::error::{Error, Result};

/// A map ℝⁿ → ℝᵏ with each component an expression over `x1..xn`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothMap {
    dim_in: usize,
    components: Vec<Expr>,
}

impl SmoothMap {
    pub fn new(dim_in: usize, components: Vec<Expr>) -> Result<Self> {
        if dim_in == 0 {
            return Err(Error::Invalid("input dimension must be positive".into()));
        }
        if components.is_empty() {
            return Err(Error::Invalid("map needs at least one component".into()));
        }
        for (i, c) in components.iter().enumerate() {
            if c.max_var() > dim_in {
                return Err(Error::Dimension {
                    what: format!("component {i}"),
                    expected: dim_in,
                    got: c.max_var(),
                });
            }
        }
        Ok(SmoothMap { dim_in, components })
    }

    /// Parse each source string as a component over `x1..x{dim_in}`.
    pub fn parse(sources: &[&str], dim_in: usize) -> Result<Self> {
        let components = sources
            .iter()
            .map(|s| parse(s, dim_in))
            .collect::<Result<Vec<_>>>()?;
        SmoothMap::new(dim_in, components)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    /// Single component as a scalar map over the same inputs.
    pub fn component(&self, i: usize) -> Result<SmoothMap> {
        let c = self.components.get(i).ok_or(Error::Dimension {
            what: "component index".into(),
            expected: self.components.len(),
            got: i,
        })?;
        SmoothMap::new(self.dim_in, vec![c.clone()])
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim_in {
            return Err(Error::Dimension {
                what: "evaluation point".into(),
                expected: self.dim_in,
                got,
            });
        }
        Ok(())
    }

    /// Componentwise evaluation over any AD scalar.
    pub fn eval_in<T: AdScalar>(&self, xs: &[T]) -> Result<Vec<T>> {
        self.check_dim(xs.len())?;
        self.components
            .iter()
            .enumerate()
            .map(|(i, c)| label_component(eval_expr(c, xs), &format!("component {i}")))
            .collect()
    }

    /// Jacobian over any AD scalar: rows index components, columns inputs.
    pub fn jacobian_in<T: AdScalar>(&self, xs: &[T]) -> Result<Vec<Vec<T>>> {
        self.check_dim(xs.len())?;
        let n = self.dim_in;
        let k = self.dim_out();
        let mut cols: Vec<Vec<T>> = Vec::with_capacity(n);
        let mut seeded: Vec<Dual<T>> = xs.iter().map(|&x| Dual::new(x, T::from_f64(0.0))).collect();
        for j in 0..n {
            seeded[j].du = T::from_f64(1.0);
            let vals = self.eval_in(&seeded)?;
            cols.push(vals.into_iter().map(|v| v.du).collect());
            seeded[j].du = T::from_f64(0.0);
        }
        let mut rows = vec![Vec::with_capacity(n); k];
        for col in cols {
            for (i, v) in col.into_iter().enumerate() {
                rows[i].push(v);
            }
        }
        Ok(rows)
    }

    /// Gradient of a scalar map over any AD scalar.
    pub fn gradient_in<T: AdScalar>(&self, xs: &[T]) -> Result<Vec<T>> {
        if self.dim_out() != 1 {
            return Err(Error::Dimension {
                what: "gradient target".into(),
                expected: 1,
                got: self.dim_out(),
            });
        }
        Ok(self.jacobian_in(xs)?.remove(0))
    }

    pub fn eval(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let v = self.eval_in(x.as_slice())?;
        for val in &v {
            if !val.is_finite() {
                return Err(Error::NonFinite {
                    component: "map evaluation".into(),
                });
            }
        }
        Ok(DVector::from_vec(v))
    }

    /// Entry (i, j) = ∂m_i/∂x_j.
    pub fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let rows = self.jacobian_in(x.as_slice())?;
        let k = self.dim_out();
        let n = self.dim_in;
        Ok(DMatrix::from_fn(k, n, |i, j| rows[i][j]))
    }

    /// Gradient of a scalar map as a column vector.
    pub fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(DVector::from_vec(self.gradient_in(x.as_slice())?))
    }

    /// Raw 2nd-derivative matrix of a scalar map over any AD scalar
    /// (not yet symmetrized); entry (i, j) = ∂²s/∂x_i∂x_j.
    pub fn hessian_in<T: AdScalar>(&self, xs: &[T]) -> Result<Vec<Vec<T>>> {
        if self.dim_out() != 1 {
            return Err(Error::Dimension {
                what: "hessian target".into(),
                expected: 1,
                got: self.dim_out(),
            });
        }
        self.check_dim(xs.len())?;
        let n = self.dim_in;
        let zero = T::from_f64(0.0);
        let mut h = vec![vec![zero; n]; n];
        let mut seeded: Vec<Dual<T>> = xs.iter().map(|&v| Dual::new(v, zero)).collect();
        for j in 0..n {
            seeded[j].du = T::from_f64(1.0);
            // Gradient computed one dual level up carries column j of the
            // Hessian in its derivative parts.
            let g = self.gradient_in(&seeded)?;
            for (i, gi) in g.into_iter().enumerate() {
                h[i][j] = gi.du;
            }
            seeded[j].du = zero;
        }
        Ok(h)
    }

    /// Hessian of a scalar map, symmetrized as (H + Hᵀ)/2.
    pub fn hessian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let raw = self.hessian_in(x.as_slice())?;
        let n = self.dim_in;
        let h = DMatrix::from_fn(n, n, |i, j| raw[i][j]);
        Ok((&h + h.transpose()) * 0.5)
    }

    /// Directional derivative of the map along `v`: (∂m/∂x)·v in one pass.
    pub fn directional(&self, x: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(x.len())?;
        if v.len() != self.dim_in {
            return Err(Error::Dimension {
                what: "direction".into(),
                expected: self.dim_in,
                got: v.len(),
            });
        }
        let seeded: Vec<Dual<f64>> = x
            .iter()
            .zip(v.iter())
            .map(|(&xi, &vi)| Dual::new(xi, vi))
            .collect();
        let vals = self.eval_in(&seeded)?;
        Ok(DVector::from_iterator(
            vals.len(),
            vals.iter().map(|d| d.du),
        ))
    }
}
