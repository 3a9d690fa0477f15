//! Combinators for assembling expression trees in code.

use super::{Expr, PointwiseFn, Terminal};

pub fn a() -> Expr {
    Expr::Term(Terminal::A)
}

pub fn i() -> Expr {
    Expr::Term(Terminal::I)
}

pub fn j() -> Expr {
    Expr::Term(Terminal::J)
}

pub fn one() -> Expr {
    Expr::Term(Terminal::One)
}

pub fn mm(l: Expr, r: Expr) -> Expr {
    Expr::MatMul(Box::new(l), Box::new(r))
}

pub fn add(l: Expr, r: Expr) -> Expr {
    Expr::Add(Box::new(l), Box::new(r))
}

/// l - r, written as l + (-1)·r.
pub fn sub(l: Expr, r: Expr) -> Expr {
    add(l, smul(-1.0, r))
}

pub fn had(l: Expr, r: Expr) -> Expr {
    Expr::Hadamard(Box::new(l), Box::new(r))
}

pub fn transpose(e: Expr) -> Expr {
    Expr::Transpose(Box::new(e))
}

pub fn trace(e: Expr) -> Expr {
    Expr::Trace(Box::new(e))
}

pub fn diag(e: Expr) -> Expr {
    Expr::Diag(Box::new(e))
}

pub fn smul(c: f64, e: Expr) -> Expr {
    Expr::ScalarMul(c, Box::new(e))
}

pub fn pw(f: PointwiseFn, e: Expr) -> Expr {
    Expr::Pointwise(f, Box::new(e))
}

/// Elementwise indicator (x > 0).
pub fn gtzero(e: Expr) -> Expr {
    pw(PointwiseFn::GtZero, e)
}
