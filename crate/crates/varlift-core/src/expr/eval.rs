//! Expression evaluation, generic over the AD scalar.

use super::ast::{BinOp, Expr, Func};
use super::dual::AdScalar;
use crate::error::{Error, Result};

fn domain(op: &str, value: f64) -> Error {
    Error::Domain {
        component: String::new(),
        op: op.to_string(),
        value,
    }
}

/// Evaluate `e` with the given variable values. Domain checks are taken
/// against the innermost real part, so a dual evaluation fails exactly when
/// the underlying point is outside the domain.
pub fn eval_expr<T: AdScalar>(e: &Expr, vars: &[T]) -> Result<T> {
    Ok(match e {
        Expr::Num(v) => T::from_f64(*v),
        Expr::Var(i) => {
            if *i >= vars.len() {
                return Err(Error::Dimension {
                    what: format!("variable x{}", i + 1),
                    expected: i + 1,
                    got: vars.len(),
                });
            }
            vars[*i]
        }
        Expr::Neg(inner) => -eval_expr(inner, vars)?,
        Expr::Bin(op, a, b) => {
            let lhs = eval_expr(a, vars)?;
            let rhs = eval_expr(b, vars)?;
            match op {
                BinOp::Add => lhs + rhs,
                BinOp::Sub => lhs - rhs,
                BinOp::Mul => lhs * rhs,
                BinOp::Div => {
                    if rhs.primal() == 0.0 {
                        return Err(domain("division by zero", 0.0));
                    }
                    lhs / rhs
                }
            }
        }
        Expr::Pow(base, exp) => {
            let b = eval_expr(base, vars)?;
            let bp = b.primal();
            if bp < 0.0 && exp.fract() != 0.0 {
                return Err(domain("negative base with non-integer exponent", bp));
            }
            if bp == 0.0 && *exp < 0.0 {
                return Err(domain("zero base with negative exponent", bp));
            }
            b.powf_const(*exp)
        }
        Expr::Call(f, arg) => {
            let a = eval_expr(arg, vars)?;
            let ap = a.primal();
            match f {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Tan => a.tan(),
                Func::Exp => a.exp(),
                Func::Ln => {
                    if ap <= 0.0 {
                        return Err(domain("ln of non-positive value", ap));
                    }
                    a.ln()
                }
                Func::Sqrt => {
                    if ap < 0.0 {
                        return Err(domain("sqrt of negative value", ap));
                    }
                    a.sqrt()
                }
                Func::Tanh => a.tanh(),
                Func::Abs => a.abs(),
            }
        }
    })
}

/// Attach a component label to any domain error bubbling out of `eval_expr`.
pub fn label_component<T>(r: Result<T>, label: &str) -> Result<T> {
    r.map_err(|e| match e {
        Error::Domain { op, value, .. } => Error::Domain {
            component: label.to_string(),
            op,
            value,
        },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse::parse;

    #[test]
    fn arithmetic_example() {
        let e = parse("2*x1*x2", 2).unwrap();
        assert_eq!(eval_expr(&e, &[3.0, 4.0]).unwrap(), 24.0);
    }

    #[test]
    fn division_by_exact_zero_is_domain_error() {
        let e = parse("1/x1", 1).unwrap();
        assert!(matches!(eval_expr(&e, &[0.0]), Err(Error::Domain { .. })));
        assert!(eval_expr(&e, &[1e-300]).is_ok());
    }

    #[test]
    fn ln_and_sqrt_domains() {
        let ln = parse("ln(x1)", 1).unwrap();
        assert!(eval_expr(&ln, &[0.0]).is_err());
        assert!(eval_expr(&ln, &[-1.0]).is_err());
        assert!(eval_expr(&ln, &[2.0]).is_ok());
        let sq = parse("sqrt(x1)", 1).unwrap();
        assert!(eval_expr(&sq, &[-0.5]).is_err());
        assert_eq!(eval_expr(&sq, &[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn pow_domain_rules() {
        let e = parse("x1^0.5", 1).unwrap();
        assert!(eval_expr(&e, &[-1.0]).is_err());
        let n = parse("x1^-1", 1).unwrap();
        assert!(eval_expr(&n, &[0.0]).is_err());
        let cube = parse("x1^3", 1).unwrap();
        assert_eq!(eval_expr(&cube, &[-2.0]).unwrap(), -8.0);
    }
}
