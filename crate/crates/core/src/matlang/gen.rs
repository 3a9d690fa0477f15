//! Random well-shaped expression generation, used by the shape-soundness
//! sweeps and the equivariance tests.

use super::{Expr, PointwiseFn, Shape, Terminal};
use rand::prelude::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Draws an expression whose inferred shape is `target`.
///
/// `depth` bounds the tree height; at depth 0 a minimal expression of the
/// requested shape is produced. The generator only emits combinations the
/// shape system accepts, so evaluating its output must succeed.
pub fn random_expr<R: Rng + ?Sized>(rng: &mut R, target: Shape, depth: usize) -> Expr {
    if depth == 0 {
        return base(rng, target);
    }
    let rec = |rng: &mut R, s: Shape, d: usize| Box::new(random_expr(rng, s, d));
    let d = depth - 1;
    match target {
        Shape::Matrix => match rng.random_range(0..9) {
            0 => Expr::MatMul(rec(rng, Shape::Matrix, d), rec(rng, Shape::Matrix, d)),
            1 => Expr::MatMul(rec(rng, Shape::ColVec, d), rec(rng, Shape::RowVec, d)),
            2 => Expr::MatMul(rec(rng, Shape::Scalar, d), rec(rng, Shape::Matrix, d)),
            3 => Expr::Add(rec(rng, Shape::Matrix, d), rec(rng, Shape::Matrix, d)),
            4 => Expr::Hadamard(rec(rng, Shape::Matrix, d), rec(rng, Shape::Matrix, d)),
            5 => Expr::Transpose(rec(rng, Shape::Matrix, d)),
            6 => Expr::Diag(rec(rng, Shape::ColVec, d)),
            7 => Expr::ScalarMul(literal(rng), rec(rng, Shape::Matrix, d)),
            _ => Expr::Pointwise(pointwise(rng), rec(rng, Shape::Matrix, d)),
        },
        Shape::ColVec => match rng.random_range(0..8) {
            0 => Expr::MatMul(rec(rng, Shape::Matrix, d), rec(rng, Shape::ColVec, d)),
            1 => Expr::MatMul(rec(rng, Shape::ColVec, d), rec(rng, Shape::Scalar, d)),
            2 => Expr::MatMul(rec(rng, Shape::Scalar, d), rec(rng, Shape::ColVec, d)),
            3 => Expr::Add(rec(rng, Shape::ColVec, d), rec(rng, Shape::ColVec, d)),
            4 => Expr::Hadamard(rec(rng, Shape::ColVec, d), rec(rng, Shape::ColVec, d)),
            5 => Expr::Transpose(rec(rng, Shape::RowVec, d)),
            6 => Expr::ScalarMul(literal(rng), rec(rng, Shape::ColVec, d)),
            _ => Expr::Pointwise(pointwise(rng), rec(rng, Shape::ColVec, d)),
        },
        Shape::RowVec => match rng.random_range(0..7) {
            0 => Expr::MatMul(rec(rng, Shape::RowVec, d), rec(rng, Shape::Matrix, d)),
            1 => Expr::MatMul(rec(rng, Shape::Scalar, d), rec(rng, Shape::RowVec, d)),
            2 => Expr::Add(rec(rng, Shape::RowVec, d), rec(rng, Shape::RowVec, d)),
            3 => Expr::Hadamard(rec(rng, Shape::RowVec, d), rec(rng, Shape::RowVec, d)),
            4 => Expr::Transpose(rec(rng, Shape::ColVec, d)),
            5 => Expr::ScalarMul(literal(rng), rec(rng, Shape::RowVec, d)),
            _ => Expr::Pointwise(pointwise(rng), rec(rng, Shape::RowVec, d)),
        },
        Shape::Scalar => match rng.random_range(0..9) {
            0 => Expr::MatMul(rec(rng, Shape::RowVec, d), rec(rng, Shape::ColVec, d)),
            1 => Expr::MatMul(rec(rng, Shape::Scalar, d), rec(rng, Shape::Scalar, d)),
            2 => Expr::Add(rec(rng, Shape::Scalar, d), rec(rng, Shape::Scalar, d)),
            3 => Expr::Hadamard(rec(rng, Shape::Scalar, d), rec(rng, Shape::Scalar, d)),
            4 => Expr::Trace(rec(rng, Shape::Matrix, d)),
            5 => Expr::Diag(rec(rng, Shape::Scalar, d)),
            6 => Expr::Transpose(rec(rng, Shape::Scalar, d)),
            7 => Expr::ScalarMul(literal(rng), rec(rng, Shape::Scalar, d)),
            _ => Expr::Pointwise(pointwise(rng), rec(rng, Shape::Scalar, d)),
        },
    }
}

fn base<R: Rng + ?Sized>(rng: &mut R, target: Shape) -> Expr {
    let matrix_term = |rng: &mut R| {
        let t = [Terminal::A, Terminal::I, Terminal::J]
            .choose(rng)
            .copied()
            .unwrap();
        Expr::Term(t)
    };
    match target {
        Shape::Matrix => matrix_term(rng),
        Shape::ColVec => Expr::Term(Terminal::One),
        Shape::RowVec => Expr::Transpose(Box::new(Expr::Term(Terminal::One))),
        Shape::Scalar => Expr::Trace(Box::new(matrix_term(rng))),
    }
}

fn literal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Small magnitudes keep deep random products finite.
    let v: f64 = rng.random_range(-2.0..2.0);
    (v * 4.0).round() / 4.0
}

fn pointwise<R: Rng + ?Sized>(rng: &mut R) -> PointwiseFn {
    *[
        PointwiseFn::Relu,
        PointwiseFn::Sign,
        PointwiseFn::GtZero,
        PointwiseFn::Pow(2),
        PointwiseFn::RecipSqrt,
    ]
    .choose(rng)
    .unwrap()
}

/// Outcome of the shape-soundness sweep.
#[derive(Clone, Debug, Serialize)]
pub struct ShapeSoundnessReport {
    /// Random well-shaped expressions whose evaluated shape was compared
    /// with the inferred one.
    pub expressions: usize,
    /// Grammar-enumerated sentences run through shape inference.
    pub sentences: usize,
    pub violations: Vec<String>,
    pub passed: bool,
}

/// Evaluates `expressions` random well-shaped expressions over seeded
/// random graphs and checks the result shape against the inferred shape;
/// then runs every preset grammar's enumerated sentences through shape
/// inference.
pub fn verify_shapes(seed: u64, expressions: usize) -> ShapeSoundnessReport {
    let mut violations = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes = [Shape::Scalar, Shape::ColVec, Shape::RowVec, Shape::Matrix];
    for k in 0..expressions {
        let n = 3 + k % 6;
        let g = crate::graph::erdos_renyi(n, 0.5, seed.wrapping_add(k as u64))
            .expect("sweep parameters are valid");
        let target = shapes[k % shapes.len()];
        let depth = 1 + k % 5;
        let e = random_expr(&mut rng, target, depth);
        match crate::matlang::eval(&e, &g) {
            Ok(v) if v.shape() == target => {}
            Ok(v) => violations.push(format!(
                "`{e}` inferred {target:?} but evaluated to {:?}",
                v.shape()
            )),
            Err(err) => violations.push(format!("`{e}` failed to evaluate: {err}")),
        }
    }
    let mut sentences = 0;
    for name in crate::cfg::PRESET_NAMES {
        let grammar = crate::cfg::preset(name).expect("preset names are valid");
        let set = crate::cfg::enumerate_sentences(&grammar, 3, 300);
        for s in &set.sentences {
            sentences += 1;
            if let Err(err) = crate::matlang::infer_shape(s) {
                violations.push(format!("{name}: `{s}`: {err}"));
            }
        }
    }
    ShapeSoundnessReport {
        expressions,
        sentences,
        passed: violations.is_empty(),
        violations,
    }
}
