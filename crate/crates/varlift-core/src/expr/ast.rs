//! Expression AST and its canonical textual form.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Tanh,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "tanh" => Func::Tanh,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

/// Scalar expression over variables `x1..xn`.
///
/// Exponents are constants folded at parse time, so `Pow` stores an `f64`
/// rather than a subtree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based variable index (`x1` is `Var(0)`).
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Largest variable index used, plus one. Zero for constant expressions.
    pub fn max_var(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(e) => e.max_var(),
            Expr::Bin(_, a, b) => a.max_var().max(b.max_var()),
            Expr::Pow(e, _) => e.max_var(),
            Expr::Call(_, e) => e.max_var(),
        }
    }
}

// Precedence levels used both for printing and parsing:
//   1 add/sub, 2 mul/div, 3 unary minus, 4 power, 5 atoms.
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Pow(..) => 4,
        Expr::Num(v) if *v < 0.0 => 3,
        Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => 5,
    }
}

fn write_child(
    f: &mut fmt::Formatter<'_>,
    child: &Expr,
    parent_prec: u8,
    tight: bool,
) -> fmt::Result {
    // `tight` forces parens at equal precedence (right operand of -, /, and pow bases).
    let need = if tight {
        prec(child) <= parent_prec
    } else {
        prec(child) < parent_prec
    };
    if need {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => {
                if v.fract() == 0.0 && v.abs() < 1e15 {
                    write!(f, "{v:.1}")
                } else {
                    write!(f, "{v}")
                }
            }
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(e) => {
                write!(f, "-")?;
                write_child(f, e, 3, false)
            }
            Expr::Bin(op, a, b) => {
                let (sym, p, tight_rhs) = match op {
                    BinOp::Add => ("+", 1, false),
                    BinOp::Sub => ("-", 1, true),
                    BinOp::Mul => ("*", 2, false),
                    BinOp::Div => ("/", 2, true),
                };
                write_child(f, a, p, false)?;
                write!(f, " {sym} ")?;
                write_child(f, b, p, tight_rhs)
            }
            Expr::Pow(base, e) => {
                write_child(f, base, 4, true)?;
                if *e < 0.0 || e.fract() != 0.0 {
                    write!(f, "^({e})")
                } else {
                    write!(f, "^{e}")
                }
            }
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}
