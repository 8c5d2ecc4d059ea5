//! Property tests for the expression language: print/parse stability and
//! derivative correctness on random polynomials.

use proptest::prelude::*;
use varlift_core::expr::{parse, BinOp, Expr, Func};
use varlift_core::SmoothMap;

const N_VARS: usize = 3;

fn expr_strategy() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-100.0..100.0f64).prop_map(Expr::Num),
        (0..20i32).prop_map(|k| Expr::Num(k as f64)),
        (0..N_VARS).prop_map(Expr::Var),
    ];
    leaf.prop_recursive(4, 48, 3, |inner| {
        let funcs = [
            Func::Sin,
            Func::Cos,
            Func::Tan,
            Func::Exp,
            Func::Ln,
            Func::Sqrt,
            Func::Tanh,
            Func::Abs,
        ];
        prop_oneof![
            (inner.clone(), inner.clone(), 0u8..4).prop_map(|(a, b, s)| {
                let op = match s {
                    0 => BinOp::Add,
                    1 => BinOp::Sub,
                    2 => BinOp::Mul,
                    _ => BinOp::Div,
                };
                Expr::Bin(op, Box::new(a), Box::new(b))
            }),
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (
                inner.clone(),
                prop_oneof![
                    Just(-3.0),
                    Just(-1.0),
                    Just(-0.5),
                    Just(0.0),
                    Just(0.5),
                    Just(2.0),
                    Just(3.0),
                ]
            )
                .prop_map(|(a, e)| Expr::Pow(Box::new(a), e)),
            (inner, 0usize..8).prop_map(move |(a, k)| Expr::Call(funcs[k], Box::new(a))),
        ]
    })
}

proptest! {
    /// After one print/parse normalization pass, printing and parsing are a
    /// fixed point: parse(print(e)) prints back to the same string and the
    /// same tree.
    #[test]
    fn print_parse_fixed_point(e in expr_strategy()) {
        let s1 = format!("{e}");
        let e1 = parse(&s1, N_VARS).unwrap();
        let s2 = format!("{e1}");
        let e2 = parse(&s2, N_VARS).unwrap();
        prop_assert_eq!(&e1, &e2, "tree changed between round trips: {} vs {}", s1, s2);
        prop_assert_eq!(s2.clone(), format!("{e2}"));
    }

    /// Gradient of a general cubic in two variables matches the hand
    /// derivative exactly (no finite differencing involved).
    #[test]
    fn polynomial_gradient_exact(
        c0 in -5.0..5.0f64,
        c1 in -5.0..5.0f64,
        c2 in -5.0..5.0f64,
        c3 in -5.0..5.0f64,
        c4 in -5.0..5.0f64,
        c5 in -5.0..5.0f64,
        x1 in -1.0..1.0f64,
        x2 in -1.0..1.0f64,
    ) {
        let src = format!("{c0} + {c1}*x1 + {c2}*x2 + {c3}*x1*x2 + {c4}*x1^2 + {c5}*x2^3");
        let m = SmoothMap::parse(&[&src], 2).unwrap();
        let g = m.gradient(&nalgebra::dvector![x1, x2]).unwrap();
        let want1 = c1 + c3 * x2 + 2.0 * c4 * x1;
        let want2 = c2 + c3 * x1 + 3.0 * c5 * x2 * x2;
        prop_assert!((g[0] - want1).abs() <= 1e-12 * (1.0 + want1.abs()));
        prop_assert!((g[1] - want2).abs() <= 1e-12 * (1.0 + want2.abs()));
    }

    /// Values survive the print/parse round trip bit for bit.
    #[test]
    fn roundtrip_preserves_evaluation(e in expr_strategy(), x in prop::collection::vec(-2.0..2.0f64, N_VARS)) {
        let s = format!("{e}");
        let reparsed = parse(&s, N_VARS).unwrap();
        let m1 = SmoothMap::new(N_VARS, vec![reparsed.clone()]);
        prop_assume!(m1.is_ok());
        let m1 = m1.unwrap();
        let m2 = SmoothMap::new(N_VARS, vec![parse(&format!("{reparsed}"), N_VARS).unwrap()]).unwrap();
        let p = nalgebra::DVector::from_vec(x);
        match (m1.eval(&p), m2.eval(&p)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "one side failed: {:?} vs {:?}", a, b),
        }
    }
}
