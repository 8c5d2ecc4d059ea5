//! Recursive-descent parser for the expression grammar.
//!
//! Precedence, loosest to tightest: `+ -`, `* /`, unary `-`, `^`. Binary
//! operators are left-associative; `^` is right-associative and its exponent
//! must be a numeric literal (optionally signed, optionally parenthesized).

use super::ast::{BinOp, Expr, Func};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token with its starting byte offset; `None` at end of input.
    fn next(&mut self) -> Result<Option<(usize, Tok)>> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'0'..=b'9' | b'.' => self.lex_number(start)?,
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                Tok::Ident(s.to_string())
            }
            _ => {
                return Err(Error::Parse {
                    offset: start,
                    message: format!("unexpected character {:?}", char::from(c)),
                })
            }
        };
        Ok(Some((start, tok)))
    }

    fn lex_number(&mut self, start: usize) -> Result<Tok> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.src.len() && (self.src[self.pos] == b'e' || self.src[self.pos] == b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len()
                && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
            {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // Not an exponent suffix after all (e.g. "2e" then something).
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>().map(Tok::Num).map_err(|_| Error::Parse {
            offset: start,
            message: format!("invalid number literal {text:?}"),
        })
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    end: usize,
    n_vars: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.idx).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(_, t)| t.clone());
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn expect_rparen(&mut self) -> Result<()> {
        let off = self.offset();
        match self.bump() {
            Some(Tok::RParen) => Ok(()),
            _ => Err(Error::Parse {
                offset: off,
                message: "expected ')'".into(),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            let inner = self.factor()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if !matches!(self.peek(), Some(Tok::Caret)) {
            return Ok(base);
        }
        self.bump();
        let e = self.exponent()?;
        // Literal base folds to a literal, provided the value stays representable.
        if let Expr::Num(b) = base {
            let v = b.powf(e);
            if v.is_finite() {
                return Ok(Expr::Num(v));
            }
        }
        Ok(Expr::Pow(Box::new(base), e))
    }

    /// Exponent: optionally signed, optionally parenthesized literal; a
    /// further `^` continues the (right-associative) constant tower.
    fn exponent(&mut self) -> Result<f64> {
        let mut sign = 1.0;
        while matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            sign = -sign;
        }
        let off = self.offset();
        let base = match self.bump() {
            Some(Tok::Num(v)) => v,
            Some(Tok::LParen) => {
                let mut inner_sign = 1.0;
                while matches!(self.peek(), Some(Tok::Minus)) {
                    self.bump();
                    inner_sign = -inner_sign;
                }
                let inner_off = self.offset();
                let v = match self.bump() {
                    Some(Tok::Num(v)) => v,
                    _ => {
                        return Err(Error::Parse {
                            offset: inner_off,
                            message: "exponent must be a numeric literal".into(),
                        })
                    }
                };
                self.expect_rparen()?;
                inner_sign * v
            }
            _ => {
                return Err(Error::Parse {
                    offset: off,
                    message: "exponent must be a numeric literal".into(),
                })
            }
        };
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let upper = self.exponent()?;
            return Ok(sign * base.powf(upper));
        }
        Ok(sign * base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let off = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                if let Some(f) = Func::from_name(&name) {
                    match self.bump() {
                        Some(Tok::LParen) => {}
                        _ => {
                            return Err(Error::Parse {
                                offset: self.offset(),
                                message: format!("expected '(' after function {name}"),
                            })
                        }
                    }
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                self.variable(&name, off)
            }
            None => Err(Error::Parse {
                offset: self.end,
                message: "unexpected end of input".into(),
            }),
            Some(t) => Err(Error::Parse {
                offset: off,
                message: format!("unexpected token {t:?}"),
            }),
        }
    }

    fn variable(&self, name: &str, off: usize) -> Result<Expr> {
        let digits = match name.strip_prefix('x') {
            Some(d) if !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()) => d,
            _ => {
                return Err(Error::Parse {
                    offset: off,
                    message: format!("unknown identifier {name:?}"),
                })
            }
        };
        if digits.starts_with('0') {
            return Err(Error::Parse {
                offset: off,
                message: format!("unknown identifier {name:?} (indices start at x1)"),
            });
        }
        let idx: usize = digits.parse().map_err(|_| Error::Parse {
            offset: off,
            message: format!("variable index too large in {name:?}"),
        })?;
        if idx > self.n_vars {
            return Err(Error::Parse {
                offset: off,
                message: format!("variable {name} exceeds dimension {}", self.n_vars),
            });
        }
        Ok(Expr::Var(idx - 1))
    }
}

/// Parse `source` as an expression over `x1..x{n_vars}`.
pub fn parse(source: &str, n_vars: usize) -> Result<Expr> {
    let mut lx = Lexer::new(source);
    let mut toks = Vec::new();
    while let Some(t) = lx.next()? {
        toks.push(t);
    }
    let mut p = Parser {
        toks,
        idx: 0,
        end: source.len(),
        n_vars,
    };
    let e = p.expr()?;
    if p.idx < p.toks.len() {
        return Err(Error::Parse {
            offset: p.offset(),
            message: format!("trailing input starting with {:?}", p.peek().unwrap()),
        });
    }
    Ok(e)
}
