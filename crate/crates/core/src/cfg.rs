//! Context-free grammars over matrix expressions.
//!
//! A grammar's right-hand sides are expression templates whose holes are
//! grammar variables; a derived sentence is the expression obtained by
//! filling every hole. Depth counts rule applications along a derivation
//! path: a sentence has depth d when it is derivable with at most d nested
//! applications (equivalently, in d parallel rewriting rounds).
//!
//! Enumeration is breadth-first per variable: the sentences new at each
//! depth are sorted lexicographically by their printed form, and every
//! variable's retained set is capped at the requested limit, so deeper
//! sentences are built from the retained prefix. The order is fully
//! deterministic.

use crate::graph::Graph;
use crate::matlang::{infer_shape, Evaluator, Expr, Shape, ShapeError};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CfgError {
    #[error("unknown grammar preset `{0}`")]
    UnknownPreset(String),
    #[error("sentence `{sentence}` has {shape} shape; fingerprints need scalars or column vectors")]
    SentenceShape { sentence: String, shape: Shape },
    #[error("sentence `{sentence}` failed shape inference: {source}")]
    IllShaped {
        sentence: String,
        source: ShapeError,
    },
}

/// A right-hand-side template: an expression skeleton whose leaves are
/// grammar variables or terminal expressions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Template {
    Var(usize),
    Term(usize),
    MatMul(Box<Template>, Box<Template>),
    Hadamard(Box<Template>, Box<Template>),
    Diag(Box<Template>),
    Transpose(Box<Template>),
}

impl Template {
    fn v(i: usize) -> Template {
        Template::Var(i)
    }

    fn t(i: usize) -> Template {
        Template::Term(i)
    }

    fn mm(l: Template, r: Template) -> Template {
        Template::MatMul(Box::new(l), Box::new(r))
    }

    fn had(l: Template, r: Template) -> Template {
        Template::Hadamard(Box::new(l), Box::new(r))
    }

    fn diag(e: Template) -> Template {
        Template::Diag(Box::new(e))
    }
}

/// A context-free grammar whose terminals are matrix expressions.
#[derive(Clone, Debug)]
pub struct Grammar {
    name: String,
    variables: Vec<String>,
    /// Terminal symbols as (display name, materialized expression).
    terminals: Vec<(String, Expr)>,
    /// Productions per variable, in declaration order.
    productions: Vec<Vec<Template>>,
    start: usize,
}

impl Grammar {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn terminals(&self) -> impl Iterator<Item = &str> {
        self.terminals.iter().map(|(n, _)| n.as_str())
    }

    pub fn start_variable(&self) -> &str {
        &self.variables[self.start]
    }

    pub fn production_count(&self, var: &str) -> Option<usize> {
        let idx = self.variables.iter().position(|v| v == var)?;
        Some(self.productions[idx].len())
    }

    /// An MPNN-style grammar over arbitrary convolution supports:
    /// Vc -> C1 Vc | ... | Ck Vc | one.
    pub fn mpnn_supports(supports: Vec<(String, Expr)>) -> Grammar {
        let mut terminals: Vec<(String, Expr)> = supports;
        terminals.push(("one".into(), crate::matlang::build::one()));
        let one_idx = terminals.len() - 1;
        let mut prods: Vec<Template> = (0..one_idx)
            .map(|k| Template::mm(Template::t(k), Template::v(0)))
            .collect();
        prods.push(Template::t(one_idx));
        Grammar {
            name: "mpnn".into(),
            variables: vec!["Vc".into()],
            terminals,
            productions: vec![prods],
            start: 0,
        }
    }

    fn template_text(&self, t: &Template) -> String {
        match t {
            Template::Var(i) => self.variables[*i].clone(),
            Template::Term(i) => self.terminals[*i].0.clone(),
            Template::MatMul(l, r) => {
                format!("{} {}", self.template_text(l), self.template_text(r))
            }
            Template::Hadamard(l, r) => {
                format!("({} (.) {})", self.template_text(l), self.template_text(r))
            }
            Template::Diag(e) => format!("diag({})", self.template_text(e)),
            Template::Transpose(e) => format!("{}^T", self.template_text(e)),
        }
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (vi, prods) in self.productions.iter().enumerate() {
            let rhs: Vec<String> = prods.iter().map(|t| self.template_text(t)).collect();
            writeln!(f, "{} -> {}", self.variables[vi], rhs.join(" | "))?;
        }
        Ok(())
    }
}

fn gcn_support() -> Expr {
    use crate::matlang::build::*;
    use crate::matlang::PointwiseFn;
    // diag((A+I) one)^(-1/2) (A+I) diag((A+I) one)^(-1/2); the pointwise
    // reciprocal square root maps the off-diagonal zeros to zero.
    let a_hat = add(a(), i());
    let d_hat = diag(mm(a_hat.clone(), one()));
    let d_inv_sqrt = pw(PointwiseFn::RecipSqrt, d_hat);
    mm(mm(d_inv_sqrt.clone(), a_hat), d_inv_sqrt)
}

/// Builds one of the named preset grammars.
///
/// Available: `rgl1`, `gl1_full`, `gcn`, `gnnml1`, `rgl3`, `gl3_full`,
/// `ppgn`.
pub fn preset(name: &str) -> Result<Grammar, CfgError> {
    use crate::matlang::build as b;
    use Template as T;
    let term_a = ("A".to_string(), b::a());
    let term_one = ("one".to_string(), b::one());
    let g = match name {
        // Vc -> diag(Vc) Vc | A Vc | one
        "rgl1" => Grammar {
            name: "rgl1".into(),
            variables: vec!["Vc".into()],
            terminals: vec![term_a, term_one],
            productions: vec![vec![
                T::mm(T::diag(T::v(0)), T::v(0)),
                T::mm(T::t(0), T::v(0)),
                T::t(1),
            ]],
            start: 0,
        },
        // S -> Vr Vc | diag(S) | S S
        // Vc -> M Vc | Vr^T | Vc S | one
        // Vr -> Vr M | Vc^T | S Vr
        // M  -> M M | M^T | diag(Vc) | Vc Vr | A
        "gl1_full" => Grammar {
            name: "gl1_full".into(),
            variables: vec!["S".into(), "Vc".into(), "Vr".into(), "M".into()],
            terminals: vec![term_a, term_one],
            productions: vec![
                vec![
                    T::mm(T::v(2), T::v(1)),
                    T::diag(T::v(0)),
                    T::mm(T::v(0), T::v(0)),
                ],
                vec![
                    T::mm(T::v(3), T::v(1)),
                    T::Transpose(Box::new(T::v(2))),
                    T::mm(T::v(1), T::v(0)),
                    T::t(1),
                ],
                vec![
                    T::mm(T::v(2), T::v(3)),
                    T::Transpose(Box::new(T::v(1))),
                    T::mm(T::v(0), T::v(2)),
                ],
                vec![
                    T::mm(T::v(3), T::v(3)),
                    T::Transpose(Box::new(T::v(3))),
                    T::diag(T::v(1)),
                    T::mm(T::v(1), T::v(2)),
                    T::t(0),
                ],
            ],
            start: 0,
        },
        // Vc -> C Vc | one, with C the degree-normalized adjacency.
        "gcn" => Grammar {
            name: "gcn".into(),
            variables: vec!["Vc".into()],
            terminals: vec![("C".into(), gcn_support()), term_one],
            productions: vec![vec![T::mm(T::t(0), T::v(0)), T::t(1)]],
            start: 0,
        },
        // Vc -> (Vc (.) Vc) | A Vc | one
        "gnnml1" => Grammar {
            name: "gnnml1".into(),
            variables: vec!["Vc".into()],
            terminals: vec![term_a, term_one],
            productions: vec![vec![
                T::had(T::v(0), T::v(0)),
                T::mm(T::t(0), T::v(0)),
                T::t(1),
            ]],
            start: 0,
        },
        // Vc -> M Vc | one
        // M  -> (M (.) M) | M M | diag(Vc) | A
        "rgl3" => Grammar {
            name: "rgl3".into(),
            variables: vec!["Vc".into(), "M".into()],
            terminals: vec![term_a, term_one],
            productions: vec![
                vec![T::mm(T::v(1), T::v(0)), T::t(1)],
                vec![
                    T::had(T::v(1), T::v(1)),
                    T::mm(T::v(1), T::v(1)),
                    T::diag(T::v(0)),
                    T::t(0),
                ],
            ],
            start: 0,
        },
        // The unreduced L3 grammar with Hadamard rules on every level.
        "gl3_full" => Grammar {
            name: "gl3_full".into(),
            variables: vec!["S".into(), "Vc".into(), "Vr".into(), "M".into()],
            terminals: vec![term_a, term_one],
            productions: vec![
                vec![
                    T::mm(T::v(2), T::v(1)),
                    T::diag(T::v(0)),
                    T::mm(T::v(0), T::v(0)),
                    T::had(T::v(0), T::v(0)),
                ],
                vec![
                    T::had(T::v(1), T::v(1)),
                    T::mm(T::v(3), T::v(1)),
                    T::Transpose(Box::new(T::v(2))),
                    T::mm(T::v(1), T::v(0)),
                    T::t(1),
                ],
                vec![
                    T::had(T::v(2), T::v(2)),
                    T::mm(T::v(2), T::v(3)),
                    T::Transpose(Box::new(T::v(1))),
                    T::mm(T::v(0), T::v(2)),
                ],
                vec![
                    T::had(T::v(3), T::v(3)),
                    T::mm(T::v(3), T::v(3)),
                    T::Transpose(Box::new(T::v(3))),
                    T::diag(T::v(1)),
                    T::mm(T::v(1), T::v(2)),
                    T::t(0),
                ],
            ],
            start: 0,
        },
        // M -> M M | diag(one) | (M (.) I) | (M (.) J) | A
        "ppgn" => {
            let terminals = vec![
                ("A".to_string(), b::a()),
                ("I".to_string(), b::i()),
                ("J".to_string(), b::j()),
                ("one".to_string(), b::one()),
            ];
            Grammar {
                name: "ppgn".into(),
                variables: vec!["M".into()],
                terminals,
                productions: vec![vec![
                    T::mm(T::v(0), T::v(0)),
                    T::diag(T::t(3)),
                    T::had(T::v(0), T::t(1)),
                    T::had(T::v(0), T::t(2)),
                    T::t(0),
                ]],
                start: 0,
            }
        }
        other => return Err(CfgError::UnknownPreset(other.to_string())),
    };
    Ok(g)
}

/// All preset names, in documentation order.
pub const PRESET_NAMES: [&str; 7] = [
    "rgl1", "gl1_full", "gcn", "gnnml1", "rgl3", "gl3_full", "ppgn",
];

/// A deduplicated, deterministically ordered set of derived sentences.
#[derive(Clone, Debug)]
pub struct SentenceSet {
    pub grammar: String,
    pub depth: usize,
    pub sentences: Vec<Expr>,
}

impl SentenceSet {
    pub fn texts(&self) -> Vec<String> {
        self.sentences.iter().map(|e| e.to_string()).collect()
    }
}

/// Enumerates the distinct sentences derivable from the start variable
/// within `depth` rule applications along any derivation path, truncated
/// to `limit` per variable.
pub fn enumerate_sentences(g: &Grammar, depth: usize, limit: usize) -> SentenceSet {
    assert!(depth >= 1, "depth must be at least 1");
    assert!(limit >= 1, "limit must be at least 1");
    let nvars = g.variables.len();
    // retained[v]: printed form -> expression, insertion capped at limit.
    let mut retained: Vec<BTreeMap<String, Expr>> = vec![BTreeMap::new(); nvars];
    // ordered[v]: breadth-first enumeration order.
    let mut ordered: Vec<Vec<Expr>> = vec![Vec::new(); nvars];

    for _ in 1..=depth {
        let full: Vec<bool> = retained.iter().map(|r| r.len() >= limit).collect();
        if full.iter().all(|&f| f) {
            break;
        }
        // New candidates per variable, keyed (and so ordered) by printed
        // form; each map is bounded to the slots left so memory stays
        // O(limit) even when a level's raw product is huge.
        let mut level: Vec<BTreeMap<String, Expr>> = vec![BTreeMap::new(); nvars];
        for v in 0..nvars {
            if full[v] {
                continue;
            }
            let bound = limit - retained[v].len();
            for prod in &g.productions[v] {
                expand(prod, g, &retained, &mut |e| {
                    let key = e.to_string();
                    if retained[v].contains_key(&key) || level[v].contains_key(&key) {
                        return;
                    }
                    // Keep only the lexicographically smallest `bound` keys.
                    if level[v].len() >= bound {
                        match level[v].last_key_value() {
                            Some((last, _)) if key < *last => {
                                level[v].pop_last();
                            }
                            _ => return,
                        }
                    }
                    level[v].insert(key, e);
                });
            }
        }
        let mut changed = false;
        for v in 0..nvars {
            for (key, e) in std::mem::take(&mut level[v]) {
                retained[v].insert(key, e.clone());
                ordered[v].push(e);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    SentenceSet {
        grammar: g.name.clone(),
        depth,
        sentences: std::mem::take(&mut ordered[g.start]),
    }
}

/// Instantiates `t` with every combination of previously retained
/// sentences for its variable holes.
fn expand(
    t: &Template,
    g: &Grammar,
    retained: &[BTreeMap<String, Expr>],
    emit: &mut impl FnMut(Expr),
) {
    let mut holes = Vec::new();
    collect_holes(t, &mut holes);
    if holes.iter().any(|&v| retained[v].is_empty()) {
        return;
    }
    let choices: Vec<Vec<&Expr>> = holes
        .iter()
        .map(|&v| retained[v].values().collect())
        .collect();
    let mut picks = vec![0usize; holes.len()];
    loop {
        let filled: Vec<&Expr> = picks.iter().zip(&choices).map(|(&p, c)| c[p]).collect();
        let mut cursor = 0;
        emit(instantiate(t, g, &filled, &mut cursor));
        // Advance the mixed-radix counter over hole fillings.
        let mut k = holes.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            picks[k] += 1;
            if picks[k] < choices[k].len() {
                break;
            }
            picks[k] = 0;
        }
    }
}

fn collect_holes(t: &Template, out: &mut Vec<usize>) {
    match t {
        Template::Var(v) => out.push(*v),
        Template::Term(_) => {}
        Template::MatMul(l, r) | Template::Hadamard(l, r) => {
            collect_holes(l, out);
            collect_holes(r, out);
        }
        Template::Diag(e) | Template::Transpose(e) => collect_holes(e, out),
    }
}

fn instantiate(t: &Template, g: &Grammar, filled: &[&Expr], cursor: &mut usize) -> Expr {
    match t {
        Template::Var(_) => {
            let e = filled[*cursor].clone();
            *cursor += 1;
            e
        }
        Template::Term(i) => g.terminals[*i].1.clone(),
        Template::MatMul(l, r) => {
            let le = instantiate(l, g, filled, cursor);
            let re = instantiate(r, g, filled, cursor);
            Expr::MatMul(Box::new(le), Box::new(re))
        }
        Template::Hadamard(l, r) => {
            let le = instantiate(l, g, filled, cursor);
            let re = instantiate(r, g, filled, cursor);
            Expr::Hadamard(Box::new(le), Box::new(re))
        }
        Template::Diag(e) => Expr::Diag(Box::new(instantiate(e, g, filled, cursor))),
        Template::Transpose(e) => Expr::Transpose(Box::new(instantiate(e, g, filled, cursor))),
    }
}

/// Canonical permutation-invariant value of one sentence on one graph:
/// scalars as a singleton, column vectors sorted ascending.
fn canonical_value(e: &Expr, ev: &mut Evaluator) -> Result<Vec<f64>, CfgError> {
    let shape = infer_shape(e).map_err(|source| CfgError::IllShaped {
        sentence: e.to_string(),
        source,
    })?;
    match shape {
        Shape::Scalar | Shape::ColVec => {}
        s => {
            return Err(CfgError::SentenceShape {
                sentence: e.to_string(),
                shape: s,
            })
        }
    }
    let value = ev.eval(e).expect("shape already checked");
    Ok(match value {
        crate::matlang::Value::Scalar(x) => vec![x],
        crate::matlang::Value::ColVec(v) => {
            let mut xs = v.to_vec();
            xs.sort_by(|a, b| a.partial_cmp(b).expect("finite sentence values"));
            xs
        }
        _ => unreachable!("shape restricted above"),
    })
}

/// Evaluates every sentence on `g` and concatenates the canonical values
/// in enumeration order.
pub fn fingerprint(g: &Graph, sentences: &SentenceSet) -> Result<Vec<f64>, CfgError> {
    let mut ev = Evaluator::new(g);
    let mut out = Vec::new();
    for s in &sentences.sentences {
        out.extend(canonical_value(s, &mut ev)?);
    }
    Ok(out)
}

/// Verdict of a sentence-based comparison of two graphs.
#[derive(Clone, Debug, Serialize)]
pub struct SentenceVerdict {
    pub grammar: String,
    pub depth: usize,
    pub distinguished: bool,
    /// First sentence whose canonical values differ; absent when the
    /// graphs agree on every enumerated sentence or differ in size.
    pub witness: Option<String>,
    pub sentences_checked: usize,
}

/// Default per-variable sentence cap used by the command-line driver.
pub const DEFAULT_SENTENCE_LIMIT: usize = 2000;

/// Compares two graphs on every enumerated sentence, with tolerance 1e-9.
/// Graphs of different sizes are trivially distinguished.
pub fn distinguish_by_sentences(
    g1: &Graph,
    g2: &Graph,
    grammar: &Grammar,
    depth: usize,
    limit: usize,
) -> Result<SentenceVerdict, CfgError> {
    if g1.n() != g2.n() {
        return Ok(SentenceVerdict {
            grammar: grammar.name.clone(),
            depth,
            distinguished: true,
            witness: None,
            sentences_checked: 0,
        });
    }
    let set = enumerate_sentences(grammar, depth, limit);
    let mut ev1 = Evaluator::new(g1);
    let mut ev2 = Evaluator::new(g2);
    for (checked, s) in set.sentences.iter().enumerate() {
        let v1 = canonical_value(s, &mut ev1)?;
        let v2 = canonical_value(s, &mut ev2)?;
        let differs =
            v1.len() != v2.len() || v1.iter().zip(&v2).any(|(x, y)| (x - y).abs() > 1e-9);
        if differs {
            return Ok(SentenceVerdict {
                grammar: grammar.name.clone(),
                depth,
                distinguished: true,
                witness: Some(s.to_string()),
                sentences_checked: checked + 1,
            });
        }
    }
    Ok(SentenceVerdict {
        grammar: grammar.name.clone(),
        depth,
        distinguished: false,
        witness: None,
        sentences_checked: set.sentences.len(),
    })
}
