//! Matrix-valued fields over the state space: general square fields,
//! symmetric metric fields Π(x), and Hessian fields of a generating function.

use nalgebra::{DMatrix, DVector};

use super::ast::Expr;
use super::dual::Dual;
use super::eval::{eval_expr, label_component};
use super::map::SmoothMap;
use super::parse::parse;
use crate::error::{Error, Result};

/// A general (not necessarily symmetric) n×n matrix of expressions over x1..xn.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixField {
    n: usize,
    rows: Vec<Vec<Expr>>,
}

impl MatrixField {
    pub fn new(n: usize, rows: Vec<Vec<Expr>>) -> Result<Self> {
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension {
                what: "matrix field grid".into(),
                expected: n,
                got: rows.len(),
            });
        }
        for r in &rows {
            for e in r {
                if e.max_var() > n {
                    return Err(Error::Dimension {
                        what: "matrix field entry".into(),
                        expected: n,
                        got: e.max_var(),
                    });
                }
            }
        }
        Ok(MatrixField { n, rows })
    }

    pub fn parse(rows: &[Vec<String>], n: usize) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|r| r.iter().map(|s| parse(s, n)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        MatrixField::new(n, parsed)
    }

    pub fn constant(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension {
                what: "constant matrix field".into(),
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let n = m.nrows();
        let rows = (0..n)
            .map(|i| (0..n).map(|j| Expr::Num(m[(i, j)])).collect())
            .collect();
        MatrixField::new(n, rows)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn eval(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        if x.len() != self.n {
            return Err(Error::Dimension {
                what: "matrix field point".into(),
                expected: self.n,
                got: x.len(),
            });
        }
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = label_component(
                    eval_expr(&self.rows[i][j], x.as_slice()),
                    &format!("entry ({i},{j})"),
                )?;
            }
        }
        Ok(m)
    }
}

/// Symmetric matrix fields Π(x). The two implementations are expression grids
/// (lower triangle mirrored) and Hessians of a scalar generating function.
pub trait SymmetricMatrixField {
    fn dim(&self) -> usize;

    /// Π(x), symmetric by construction.
    fn eval(&self, x: &DVector<f64>) -> Result<DMatrix<f64>>;

    /// Directional derivative Σ_k ∂π_ij/∂x_k · v_k, entrywise.
    fn directional(&self, x: &DVector<f64>, v: &DVector<f64>) -> Result<DMatrix<f64>>;

    /// Gradient of the single entry π_ij.
    fn entry_gradient(&self, x: &DVector<f64>, i: usize, j: usize) -> Result<DVector<f64>>;
}

/// Symmetric Π(x) stored as its lower triangle of expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    n: usize,
    /// `lower[i]` holds row i, columns 0..=i.
    lower: Vec<Vec<Expr>>,
}

impl MetricField {
    pub fn new(n: usize, lower: Vec<Vec<Expr>>) -> Result<Self> {
        if lower.len() != n {
            return Err(Error::Dimension {
                what: "metric field rows".into(),
                expected: n,
                got: lower.len(),
            });
        }
        for (i, row) in lower.iter().enumerate() {
            if row.len() != i + 1 {
                return Err(Error::Dimension {
                    what: format!("metric field row {i} (lower triangle)"),
                    expected: i + 1,
                    got: row.len(),
                });
            }
            for e in row {
                if e.max_var() > n {
                    return Err(Error::Dimension {
                        what: "metric field entry".into(),
                        expected: n,
                        got: e.max_var(),
                    });
                }
            }
        }
        Ok(MetricField { n, lower })
    }

    pub fn parse(lower: &[Vec<String>], n: usize) -> Result<Self> {
        let parsed = lower
            .iter()
            .map(|r| r.iter().map(|s| parse(s, n)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        MetricField::new(n, parsed)
    }

    /// Constant symmetric matrix as a metric field.
    pub fn constant(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension {
                what: "constant metric".into(),
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let n = m.nrows();
        if (m - m.transpose()).norm() != 0.0 {
            return Err(Error::Invalid("constant metric must be symmetric".into()));
        }
        let lower = (0..n)
            .map(|i| (0..=i).map(|j| Expr::Num(m[(i, j)])).collect())
            .collect();
        MetricField::new(n, lower)
    }

    fn entry(&self, i: usize, j: usize) -> &Expr {
        if i >= j {
            &self.lower[i][j]
        } else {
            &self.lower[j][i]
        }
    }
}

impl SymmetricMatrixField for MetricField {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        if x.len() != self.n {
            return Err(Error::Dimension {
                what: "metric field point".into(),
                expected: self.n,
                got: x.len(),
            });
        }
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..=i {
                let v = label_component(
                    eval_expr(self.entry(i, j), x.as_slice()),
                    &format!("pi({i},{j})"),
                )?;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(m)
    }

    fn directional(&self, x: &DVector<f64>, v: &DVector<f64>) -> Result<DMatrix<f64>> {
        if x.len() != self.n || v.len() != self.n {
            return Err(Error::Dimension {
                what: "metric directional".into(),
                expected: self.n,
                got: x.len().min(v.len()),
            });
        }
        let seeded: Vec<Dual<f64>> = x
            .iter()
            .zip(v.iter())
            .map(|(&xi, &vi)| Dual::new(xi, vi))
            .collect();
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..=i {
                let d = label_component(
                    eval_expr(self.entry(i, j), &seeded),
                    &format!("pi({i},{j})"),
                )?
                .du;
                m[(i, j)] = d;
                m[(j, i)] = d;
            }
        }
        Ok(m)
    }

    fn entry_gradient(&self, x: &DVector<f64>, i: usize, j: usize) -> Result<DVector<f64>> {
        if i >= self.n || j >= self.n {
            return Err(Error::Dimension {
                what: "metric entry index".into(),
                expected: self.n,
                got: i.max(j),
            });
        }
        let mut g = DVector::zeros(self.n);
        let mut seeded: Vec<Dual<f64>> = x.iter().map(|&xi| Dual::new(xi, 0.0)).collect();
        for k in 0..self.n {
            seeded[k].du = 1.0;
            g[k] = label_component(
                eval_expr(self.entry(i, j), &seeded),
                &format!("pi({i},{j})"),
            )?
            .du;
            seeded[k].du = 0.0;
        }
        Ok(g)
    }
}

/// Π(x) = ∂²P/∂x²(x) for a scalar generating function P.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianField {
    p: SmoothMap,
}

impl HessianField {
    pub fn new(p: SmoothMap) -> Result<Self> {
        if p.dim_out() != 1 {
            return Err(Error::Dimension {
                what: "generating function".into(),
                expected: 1,
                got: p.dim_out(),
            });
        }
        Ok(HessianField { p })
    }

    pub fn generating(&self) -> &SmoothMap {
        &self.p
    }
}

impl SymmetricMatrixField for HessianField {
    fn dim(&self) -> usize {
        self.p.dim_in()
    }

    fn eval(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.p.hessian(x)
    }

    fn directional(&self, x: &DVector<f64>, v: &DVector<f64>) -> Result<DMatrix<f64>> {
        let n = self.dim();
        if x.len() != n || v.len() != n {
            return Err(Error::Dimension {
                what: "hessian field directional".into(),
                expected: n,
                got: x.len().min(v.len()),
            });
        }
        let seeded: Vec<Dual<f64>> = x
            .iter()
            .zip(v.iter())
            .map(|(&xi, &vi)| Dual::new(xi, vi))
            .collect();
        let raw = self.p.hessian_in(&seeded)?;
        let h = DMatrix::from_fn(n, n, |i, j| raw[i][j].du);
        Ok((&h + h.transpose()) * 0.5)
    }

    fn entry_gradient(&self, x: &DVector<f64>, i: usize, j: usize) -> Result<DVector<f64>> {
        let n = self.dim();
        if i >= n || j >= n {
            return Err(Error::Dimension {
                what: "hessian field entry index".into(),
                expected: n,
                got: i.max(j),
            });
        }
        let mut g = DVector::zeros(n);
        let mut seeded: Vec<Dual<f64>> = x.iter().map(|&xi| Dual::new(xi, 0.0)).collect();
        for k in 0..n {
            seeded[k].du = 1.0;
            let raw = self.p.hessian_in(&seeded)?;
            // Symmetrized entry, to match eval exactly.
            let sym = (raw[i][j] + raw[j][i]) * Dual::new(0.5, 0.0);
            g[k] = sym.du;
            seeded[k].du = 0.0;
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dvector;

    fn metric2() -> MetricField {
        // Π = [[1, x1],[x1, 1]]
        MetricField::parse(&[vec!["1".into()], vec!["x1".into(), "1".into()]], 2).unwrap()
    }

    #[test]
    fn metric_eval_is_symmetric() {
        let m = metric2().eval(&dvector![3.0, 5.0]).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 3.0, 1.0]));
    }

    #[test]
    fn metric_directional_example() {
        // ∂Π/∂x · v with v = (2, 0) → [[0,2],[2,0]]
        let d = metric2()
            .directional(&dvector![1.0, 1.0], &dvector![2.0, 0.0])
            .unwrap();
        assert_eq!(d, DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 2.0, 0.0]));
    }

    #[test]
    fn constant_metric_directional_zero() {
        let m =
            MetricField::constant(&DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        let d = m
            .directional(&dvector![0.3, -0.8], &dvector![1.0, 4.0])
            .unwrap();
        assert_eq!(d, DMatrix::zeros(2, 2));
    }

    #[test]
    fn hessian_field_of_x1sq_x2() {
        // P = x1²x2 → Π = [[2x2, 2x1],[2x1, 0]]
        let p = SmoothMap::parse(&["x1^2*x2"], 2).unwrap();
        let f = HessianField::new(p).unwrap();
        let m = f.eval(&dvector![1.5, 2.0]).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[4.0, 3.0, 3.0, 0.0]);
        assert_relative_eq!((m - want).norm(), 0.0, epsilon = 1e-12);

        // directional along v = (0, 1) → [[2, 0],[0, 0]]
        let d = f
            .directional(&dvector![1.5, 2.0], &dvector![0.0, 1.0])
            .unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        assert_relative_eq!((d - want).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn hessian_field_entry_gradient_third_partials() {
        // P = x1³x2 → π_00 = 6x1x2, ∂π_00/∂x = (6x2, 6x1)
        let p = SmoothMap::parse(&["x1^3*x2"], 2).unwrap();
        let f = HessianField::new(p).unwrap();
        let g = f.entry_gradient(&dvector![2.0, 3.0], 0, 0).unwrap();
        assert_relative_eq!((g - dvector![18.0, 12.0]).norm(), 0.0, epsilon = 1e-11);
    }

    #[test]
    fn metric_entry_gradient() {
        let g = metric2().entry_gradient(&dvector![1.0, 1.0], 1, 0).unwrap();
        assert_eq!(g, dvector![1.0, 0.0]);
        let g = metric2().entry_gradient(&dvector![1.0, 1.0], 0, 1).unwrap();
        assert_eq!(g, dvector![1.0, 0.0]);
    }

    #[test]
    fn matrix_field_eval() {
        let u = MatrixField::parse(
            &[vec!["0".into(), "1".into()], vec!["-1".into(), "0".into()]],
            2,
        )
        .unwrap();
        let m = u.eval(&dvector![0.0, 0.0]).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
    }
}
