//! A matrix expression language over a graph's standard matrices.
//!
//! Expressions are trees over the terminals `A`, `I`, `J`, `one` and the
//! operations matrix product, addition, Hadamard product, transpose,
//! trace, diagonal embedding, scalar multiplication and pointwise function
//! application. Every well-shaped expression evaluates, against a graph on
//! `n` nodes, to a scalar, a length-`n` column or row vector, or an `n x n`
//! matrix; [`infer_shape`] decides which before any arithmetic runs.
//!
//! Concrete syntax is parenthesized prefix notation, see [`parse_expr`].

pub mod build;
pub mod gen;
mod parse;

pub use parse::{parse_expr, ParseError};

use crate::graph::Graph;
use ndarray::{Array1, Array2};
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use thiserror::Error;

/// Terminal symbols bound to a graph's matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Terminal {
    /// Adjacency matrix.
    A,
    /// Identity matrix.
    I,
    /// All ones except a zero diagonal.
    J,
    /// All-ones column vector.
    One,
}

impl Terminal {
    pub fn name(self) -> &'static str {
        match self {
            Terminal::A => "A",
            Terminal::I => "I",
            Terminal::J => "J",
            Terminal::One => "one",
        }
    }
}

/// The fixed pointwise function registry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PointwiseFn {
    Relu,
    Sign,
    /// x > 0 maps to 1, else 0.
    GtZero,
    /// x^k for small integer k.
    Pow(u8),
    /// x^(-1/2) with the convention x <= 0 maps to 0.
    RecipSqrt,
}

impl PointwiseFn {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "relu" => Some(PointwiseFn::Relu),
            "sign" => Some(PointwiseFn::Sign),
            "gtzero" => Some(PointwiseFn::GtZero),
            "recip_sqrt" => Some(PointwiseFn::RecipSqrt),
            _ => {
                let k = name.strip_prefix("pow")?.parse::<u8>().ok()?;
                (2..=6).contains(&k).then_some(PointwiseFn::Pow(k))
            }
        }
    }

    pub fn name(self) -> String {
        match self {
            PointwiseFn::Relu => "relu".into(),
            PointwiseFn::Sign => "sign".into(),
            PointwiseFn::GtZero => "gtzero".into(),
            PointwiseFn::Pow(k) => format!("pow{k}"),
            PointwiseFn::RecipSqrt => "recip_sqrt".into(),
        }
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            PointwiseFn::Relu => x.max(0.0),
            PointwiseFn::Sign => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            PointwiseFn::GtZero => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            PointwiseFn::Pow(k) => x.powi(k as i32),
            PointwiseFn::RecipSqrt => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 / x.sqrt()
                }
            }
        }
    }
}

/// Expression tree. Scalar literals appear only under [`Expr::ScalarMul`].
#[derive(Clone, Debug)]
pub enum Expr {
    Term(Terminal),
    MatMul(Box<Expr>, Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Hadamard(Box<Expr>, Box<Expr>),
    Transpose(Box<Expr>),
    Trace(Box<Expr>),
    Diag(Box<Expr>),
    ScalarMul(f64, Box<Expr>),
    Pointwise(PointwiseFn, Box<Expr>),
}

// Structural equality; scalar literals compare by bit pattern so that
// Eq and Hash agree.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        use Expr::*;
        match (self, other) {
            (Term(a), Term(b)) => a == b,
            (MatMul(a, b), MatMul(c, d))
            | (Add(a, b), Add(c, d))
            | (Hadamard(a, b), Hadamard(c, d)) => a == c && b == d,
            (Transpose(a), Transpose(b))
            | (Trace(a), Trace(b))
            | (Diag(a), Diag(b)) => a == b,
            (ScalarMul(x, a), ScalarMul(y, b)) => x.to_bits() == y.to_bits() && a == b,
            (Pointwise(f, a), Pointwise(g, b)) => f == g && a == b,
            _ => false,
        }
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        use Expr::*;
        std::mem::discriminant(self).hash(state);
        match self {
            Term(t) => t.hash(state),
            MatMul(a, b) | Add(a, b) | Hadamard(a, b) => {
                a.hash(state);
                b.hash(state);
            }
            Transpose(a) | Trace(a) | Diag(a) => a.hash(state),
            ScalarMul(x, a) => {
                x.to_bits().hash(state);
                a.hash(state);
            }
            Pointwise(f, a) => {
                f.hash(state);
                a.hash(state);
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Term(t) => write!(f, "{}", t.name()),
            Expr::MatMul(a, b) => write!(f, "(mul {a} {b})"),
            Expr::Add(a, b) => write!(f, "(add {a} {b})"),
            Expr::Hadamard(a, b) => write!(f, "(hadamard {a} {b})"),
            Expr::Transpose(a) => write!(f, "(transpose {a})"),
            Expr::Trace(a) => write!(f, "(trace {a})"),
            Expr::Diag(a) => write!(f, "(diag {a})"),
            Expr::ScalarMul(c, a) => write!(f, "(smul {c} {a})"),
            Expr::Pointwise(fun, a) => write!(f, "(f:{} {})", fun.name(), a),
        }
    }
}

/// The four value classes an expression can produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    Scalar,
    ColVec,
    RowVec,
    Matrix,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Shape::Scalar => "scalar",
            Shape::ColVec => "column vector",
            Shape::RowVec => "row vector",
            Shape::Matrix => "matrix",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Error)]
pub enum ShapeError {
    #[error("`{op}` cannot combine {left} with {right} in `{subtree}`")]
    BadCombination {
        op: &'static str,
        left: Shape,
        right: Shape,
        subtree: String,
    },
    #[error("`{op}` cannot take a {operand} in `{subtree}`")]
    BadOperand {
        op: &'static str,
        operand: Shape,
        subtree: String,
    },
}

/// Shape inference following the operand/result closure table.
pub fn infer_shape(e: &Expr) -> Result<Shape, ShapeError> {
    use Shape::*;
    match e {
        Expr::Term(Terminal::One) => Ok(ColVec),
        Expr::Term(_) => Ok(Matrix),
        Expr::MatMul(a, b) => {
            let (sa, sb) = (infer_shape(a)?, infer_shape(b)?);
            match (sa, sb) {
                (Matrix, Matrix) => Ok(Matrix),
                (Matrix, ColVec) => Ok(ColVec),
                (RowVec, Matrix) => Ok(RowVec),
                (RowVec, ColVec) => Ok(Scalar),
                (ColVec, RowVec) => Ok(Matrix),
                // Scalar operands act as scalar multiplication.
                (Scalar, s) | (s, Scalar) => Ok(s),
                _ => Err(ShapeError::BadCombination {
                    op: "mul",
                    left: sa,
                    right: sb,
                    subtree: e.to_string(),
                }),
            }
        }
        Expr::Add(a, b) | Expr::Hadamard(a, b) => {
            let (sa, sb) = (infer_shape(a)?, infer_shape(b)?);
            if sa == sb {
                Ok(sa)
            } else {
                let op = if matches!(e, Expr::Add(..)) {
                    "add"
                } else {
                    "hadamard"
                };
                Err(ShapeError::BadCombination {
                    op,
                    left: sa,
                    right: sb,
                    subtree: e.to_string(),
                })
            }
        }
        Expr::Transpose(a) => Ok(match infer_shape(a)? {
            Matrix => Matrix,
            ColVec => RowVec,
            RowVec => ColVec,
            Scalar => Scalar,
        }),
        Expr::Trace(a) => match infer_shape(a)? {
            Matrix => Ok(Scalar),
            s => Err(ShapeError::BadOperand {
                op: "trace",
                operand: s,
                subtree: e.to_string(),
            }),
        },
        Expr::Diag(a) => match infer_shape(a)? {
            ColVec => Ok(Matrix),
            Scalar => Ok(Scalar),
            s => Err(ShapeError::BadOperand {
                op: "diag",
                operand: s,
                subtree: e.to_string(),
            }),
        },
        Expr::ScalarMul(_, a) | Expr::Pointwise(_, a) => infer_shape(a),
    }
}

/// Evaluation result bound to a graph on `n` nodes.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Scalar(f64),
    ColVec(Array1<f64>),
    RowVec(Array1<f64>),
    Matrix(Array2<f64>),
}

impl Value {
    pub fn shape(&self) -> Shape {
        match self {
            Value::Scalar(_) => Shape::Scalar,
            Value::ColVec(_) => Shape::ColVec,
            Value::RowVec(_) => Shape::RowVec,
            Value::Matrix(_) => Shape::Matrix,
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Value::Scalar(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_colvec(&self) -> Option<&Array1<f64>> {
        match self {
            Value::ColVec(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&Array2<f64>> {
        match self {
            Value::Matrix(m) => Some(m),
            _ => None,
        }
    }

    /// Maximum absolute difference; `None` when shapes differ.
    pub fn max_abs_diff(&self, other: &Value) -> Option<f64> {
        let diff = |xs: &[f64], ys: &[f64]| {
            xs.iter()
                .zip(ys)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max)
        };
        match (self, other) {
            (Value::Scalar(a), Value::Scalar(b)) => Some((a - b).abs()),
            (Value::ColVec(a), Value::ColVec(b)) | (Value::RowVec(a), Value::RowVec(b)) => {
                (a.len() == b.len()).then(|| diff(a.as_slice().unwrap(), b.as_slice().unwrap()))
            }
            (Value::Matrix(a), Value::Matrix(b)) => (a.dim() == b.dim())
                .then(|| diff(a.as_slice().unwrap(), b.as_slice().unwrap())),
            _ => None,
        }
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Value {
        match self {
            Value::Scalar(x) => Value::Scalar(f(*x)),
            Value::ColVec(v) => Value::ColVec(v.mapv(&f)),
            Value::RowVec(v) => Value::RowVec(v.mapv(&f)),
            Value::Matrix(m) => Value::Matrix(m.mapv(&f)),
        }
    }

    fn zip(&self, other: &Value, f: impl Fn(f64, f64) -> f64) -> Value {
        match (self, other) {
            (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(f(*a, *b)),
            (Value::ColVec(a), Value::ColVec(b)) => {
                Value::ColVec(Array1::from_shape_fn(a.len(), |i| f(a[i], b[i])))
            }
            (Value::RowVec(a), Value::RowVec(b)) => {
                Value::RowVec(Array1::from_shape_fn(a.len(), |i| f(a[i], b[i])))
            }
            (Value::Matrix(a), Value::Matrix(b)) => {
                Value::Matrix(Array2::from_shape_fn(a.dim(), |(i, j)| {
                    f(a[[i, j]], b[[i, j]])
                }))
            }
            _ => unreachable!("zip on mismatched shapes rejected by infer_shape"),
        }
    }
}

/// Evaluator bound to one graph, memoizing repeated subtrees.
///
/// Evaluations are pure; reuse one evaluator across many expressions on
/// the same graph to share common subexpressions (the counting formulas
/// and enumerated sentence sets repeat subtrees heavily).
pub struct Evaluator {
    n: usize,
    adj: Array2<f64>,
    memo: HashMap<Expr, Value>,
}

impl Evaluator {
    pub fn new(g: &Graph) -> Self {
        Evaluator {
            n: g.n(),
            adj: g.adjacency().clone(),
            memo: HashMap::new(),
        }
    }

    /// Shape-checks and evaluates.
    pub fn eval(&mut self, e: &Expr) -> Result<Value, ShapeError> {
        infer_shape(e)?;
        Ok(self.eval_unchecked(e))
    }

    fn eval_unchecked(&mut self, e: &Expr) -> Value {
        if let Some(v) = self.memo.get(e) {
            return v.clone();
        }
        let out = match e {
            Expr::Term(Terminal::A) => Value::Matrix(self.adj.clone()),
            Expr::Term(Terminal::I) => Value::Matrix(Array2::eye(self.n)),
            Expr::Term(Terminal::J) => {
                let mut m = Array2::ones((self.n, self.n));
                for i in 0..self.n {
                    m[[i, i]] = 0.0;
                }
                Value::Matrix(m)
            }
            Expr::Term(Terminal::One) => Value::ColVec(Array1::ones(self.n)),
            Expr::MatMul(a, b) => {
                let (va, vb) = (self.eval_unchecked(a), self.eval_unchecked(b));
                match (va, vb) {
                    (Value::Matrix(m), Value::Matrix(p)) => Value::Matrix(m.dot(&p)),
                    (Value::Matrix(m), Value::ColVec(v)) => Value::ColVec(m.dot(&v)),
                    (Value::RowVec(v), Value::Matrix(m)) => Value::RowVec(v.dot(&m)),
                    (Value::RowVec(v), Value::ColVec(w)) => Value::Scalar(v.dot(&w)),
                    (Value::ColVec(v), Value::RowVec(w)) => Value::Matrix(
                        Array2::from_shape_fn((self.n, self.n), |(i, j)| v[i] * w[j]),
                    ),
                    (Value::Scalar(s), x) | (x, Value::Scalar(s)) => x.map(|t| s * t),
                    _ => unreachable!("mul on mismatched shapes rejected by infer_shape"),
                }
            }
            Expr::Add(a, b) => {
                let (va, vb) = (self.eval_unchecked(a), self.eval_unchecked(b));
                va.zip(&vb, |x, y| x + y)
            }
            Expr::Hadamard(a, b) => {
                let (va, vb) = (self.eval_unchecked(a), self.eval_unchecked(b));
                va.zip(&vb, |x, y| x * y)
            }
            Expr::Transpose(a) => match self.eval_unchecked(a) {
                Value::Matrix(m) => Value::Matrix(m.t().to_owned()),
                Value::ColVec(v) => Value::RowVec(v),
                Value::RowVec(v) => Value::ColVec(v),
                s @ Value::Scalar(_) => s,
            },
            Expr::Trace(a) => match self.eval_unchecked(a) {
                Value::Matrix(m) => Value::Scalar(m.diag().sum()),
                _ => unreachable!("trace on non-matrix rejected by infer_shape"),
            },
            Expr::Diag(a) => match self.eval_unchecked(a) {
                Value::ColVec(v) => Value::Matrix(Array2::from_diag(&v)),
                s @ Value::Scalar(_) => s,
                _ => unreachable!("diag on row vector or matrix rejected by infer_shape"),
            },
            Expr::ScalarMul(c, a) => self.eval_unchecked(a).map(|x| c * x),
            Expr::Pointwise(f, a) => self.eval_unchecked(a).map(|x| f.apply(x)),
        };
        self.memo.insert(e.clone(), out.clone());
        out
    }
}

/// One-shot evaluation of an expression against a graph.
pub fn eval(e: &Expr, g: &Graph) -> Result<Value, ShapeError> {
    Evaluator::new(g).eval(e)
}
