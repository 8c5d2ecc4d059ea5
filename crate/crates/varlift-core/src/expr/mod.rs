//! Expression language: AST, parser, dual-number evaluation, smooth maps,
//! and matrix-valued fields.

pub mod ast;
pub mod dual;
pub mod eval;
pub mod field;
pub mod map;
pub mod parse;

pub use ast::{BinOp, Expr, Func};
pub use dual::{AdScalar, Dual};
pub use eval::eval_expr;
pub use field::{HessianField, MatrixField, MetricField, SymmetricMatrixField};
pub use map::SmoothMap;
pub use parse::parse;
