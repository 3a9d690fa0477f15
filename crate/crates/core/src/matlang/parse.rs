//! S-expression reader for the expression language.
//!
//! ```text
//! expr  := "(" op expr* ")" | atom
//! atom  := A | I | J | one
//! op    := mul | add | hadamard | transpose | trace | diag
//!        | smul <literal> | f:<name>
//! ```

use super::{Expr, PointwiseFn, Terminal};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("empty input")]
    Empty,
    #[error("unbalanced parenthesis at {line}:{col}")]
    Unbalanced { line: usize, col: usize },
    #[error("unexpected token `{token}` at {line}:{col}")]
    Unexpected {
        token: String,
        line: usize,
        col: usize,
    },
    #[error("unknown symbol `{symbol}` at {line}:{col}")]
    UnknownSymbol {
        symbol: String,
        line: usize,
        col: usize,
    },
    #[error("unknown pointwise function `{name}` at {line}:{col}")]
    UnknownPointwise {
        name: String,
        line: usize,
        col: usize,
    },
    #[error("`{op}` expects {expected} argument(s), found {found}, at {line}:{col}")]
    WrongArity {
        op: String,
        expected: usize,
        found: usize,
        line: usize,
        col: usize,
    },
    #[error("invalid scalar literal `{text}` at {line}:{col}")]
    BadNumber {
        text: String,
        line: usize,
        col: usize,
    },
    #[error("trailing input at {line}:{col}")]
    Trailing { line: usize, col: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    LParen,
    RParen,
    Atom(String),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Token,
    line: usize,
    col: usize,
}

fn tokenize(text: &str) -> Vec<Spanned> {
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut atom: Option<(String, usize, usize)> = None;
    for ch in text.chars() {
        let is_delim = ch == '(' || ch == ')' || ch.is_whitespace();
        if is_delim {
            if let Some((s, l, c)) = atom.take() {
                out.push(Spanned {
                    tok: Token::Atom(s),
                    line: l,
                    col: c,
                });
            }
        }
        match ch {
            '(' => out.push(Spanned {
                tok: Token::LParen,
                line,
                col,
            }),
            ')' => out.push(Spanned {
                tok: Token::RParen,
                line,
                col,
            }),
            c if c.is_whitespace() => {}
            c => match atom {
                Some((ref mut s, _, _)) => s.push(c),
                None => atom = Some((c.to_string(), line, col)),
            },
        }
        if ch == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    if let Some((s, l, c)) = atom {
        out.push(Spanned {
            tok: Token::Atom(s),
            line: l,
            col: c,
        });
    }
    out
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn end_pos(&self) -> (usize, usize) {
        self.toks
            .last()
            .map(|s| (s.line, s.col + 1))
            .unwrap_or((1, 1))
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let Some(t) = self.next() else {
            let (line, col) = self.end_pos();
            return Err(ParseError::Unbalanced { line, col });
        };
        match t.tok {
            Token::Atom(s) => atom_expr(&s, t.line, t.col),
            Token::RParen => Err(ParseError::Unexpected {
                token: ")".into(),
                line: t.line,
                col: t.col,
            }),
            Token::LParen => self.form(t.line, t.col),
        }
    }

    /// Parses the body of a parenthesized form; the opening paren is consumed.
    fn form(&mut self, line: usize, col: usize) -> Result<Expr, ParseError> {
        let Some(head) = self.next() else {
            return Err(ParseError::Unbalanced { line, col });
        };
        let (op, op_line, op_col) = match head.tok {
            Token::Atom(s) => (s, head.line, head.col),
            Token::LParen | Token::RParen => {
                let token = if head.tok == Token::LParen { "(" } else { ")" };
                return Err(ParseError::Unexpected {
                    token: token.into(),
                    line: head.line,
                    col: head.col,
                });
            }
        };

        if op == "smul" {
            let Some(lit) = self.next() else {
                let (l, c) = self.end_pos();
                return Err(ParseError::Unbalanced { line: l, col: c });
            };
            let Token::Atom(text) = lit.tok else {
                return Err(ParseError::Unexpected {
                    token: "(".into(),
                    line: lit.line,
                    col: lit.col,
                });
            };
            let value: f64 = text.parse().map_err(|_| ParseError::BadNumber {
                text: text.clone(),
                line: lit.line,
                col: lit.col,
            })?;
            let args = self.args(&op, op_line, op_col, 1)?;
            let [arg] = <[Expr; 1]>::try_from(args).unwrap();
            return Ok(Expr::ScalarMul(value, Box::new(arg)));
        }

        if let Some(name) = op.strip_prefix("f:") {
            let f = PointwiseFn::from_name(name).ok_or_else(|| ParseError::UnknownPointwise {
                name: name.to_string(),
                line: op_line,
                col: op_col,
            })?;
            let args = self.args(&op, op_line, op_col, 1)?;
            let [arg] = <[Expr; 1]>::try_from(args).unwrap();
            return Ok(Expr::Pointwise(f, Box::new(arg)));
        }

        let arity = match op.as_str() {
            "mul" | "add" | "hadamard" => 2,
            "transpose" | "trace" | "diag" => 1,
            _ => {
                return Err(ParseError::UnknownSymbol {
                    symbol: op,
                    line: op_line,
                    col: op_col,
                })
            }
        };
        let args = self.args(&op, op_line, op_col, arity)?;
        Ok(match (op.as_str(), args.len()) {
            ("mul", 2) => {
                let [l, r] = <[Expr; 2]>::try_from(args).unwrap();
                Expr::MatMul(Box::new(l), Box::new(r))
            }
            ("add", 2) => {
                let [l, r] = <[Expr; 2]>::try_from(args).unwrap();
                Expr::Add(Box::new(l), Box::new(r))
            }
            ("hadamard", 2) => {
                let [l, r] = <[Expr; 2]>::try_from(args).unwrap();
                Expr::Hadamard(Box::new(l), Box::new(r))
            }
            ("transpose", 1) => Expr::Transpose(Box::new(args.into_iter().next().unwrap())),
            ("trace", 1) => Expr::Trace(Box::new(args.into_iter().next().unwrap())),
            ("diag", 1) => Expr::Diag(Box::new(args.into_iter().next().unwrap())),
            _ => unreachable!("arity checked above"),
        })
    }

    /// Collects exactly `expected` argument expressions up to the closing paren.
    fn args(
        &mut self,
        op: &str,
        line: usize,
        col: usize,
        expected: usize,
    ) -> Result<Vec<Expr>, ParseError> {
        let mut out = Vec::new();
        loop {
            match self.peek() {
                None => {
                    let (l, c) = self.end_pos();
                    return Err(ParseError::Unbalanced { line: l, col: c });
                }
                Some(s) if s.tok == Token::RParen => {
                    self.pos += 1;
                    if out.len() != expected {
                        return Err(ParseError::WrongArity {
                            op: op.into(),
                            expected,
                            found: out.len(),
                            line,
                            col,
                        });
                    }
                    return Ok(out);
                }
                Some(_) => {
                    if out.len() == expected {
                        let s = self.peek().unwrap();
                        return Err(ParseError::WrongArity {
                            op: op.into(),
                            expected,
                            found: expected + 1,
                            line: s.line,
                            col: s.col,
                        });
                    }
                    out.push(self.expr()?);
                }
            }
        }
    }
}

fn atom_expr(s: &str, line: usize, col: usize) -> Result<Expr, ParseError> {
    match s {
        "A" => Ok(Expr::Term(Terminal::A)),
        "I" => Ok(Expr::Term(Terminal::I)),
        "J" => Ok(Expr::Term(Terminal::J)),
        "one" => Ok(Expr::Term(Terminal::One)),
        _ => Err(ParseError::UnknownSymbol {
            symbol: s.to_string(),
            line,
            col,
        }),
    }
}

/// Parses one expression; the whole input must be consumed.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(text);
    if toks.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if let Some(extra) = p.peek() {
        return Err(ParseError::Trailing {
            line: extra.line,
            col: extra.col,
        });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matlang::build::*;

    #[test]
    fn parses_simple_product() {
        let e = parse_expr("(mul A one)").unwrap();
        assert_eq!(e, mm(a(), one()));
    }

    #[test]
    fn parses_trace_sentence() {
        let e =
            parse_expr("(mul (transpose one) (mul (hadamard A (diag one)) one))").unwrap();
        let expected = mm(transpose(one()), mm(had(a(), diag(one())), one()));
        assert_eq!(e, expected);
    }

    #[test]
    fn unbalanced_paren_reports_position() {
        match parse_expr("(diag (mul A one)") {
            Err(ParseError::Unbalanced { line: 1, col: 18 }) => {}
            other => panic!("expected unbalanced error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_symbol_and_pointwise() {
        assert_eq!(
            parse_expr("(mul B one)"),
            Err(ParseError::UnknownSymbol {
                symbol: "B".into(),
                line: 1,
                col: 6
            })
        );
        assert!(matches!(
            parse_expr("(f:tanh A)"),
            Err(ParseError::UnknownPointwise { .. })
        ));
    }

    #[test]
    fn arity_errors() {
        assert!(matches!(
            parse_expr("(mul A)"),
            Err(ParseError::WrongArity {
                expected: 2,
                found: 1,
                ..
            })
        ));
        assert!(matches!(
            parse_expr("(trace A A)"),
            Err(ParseError::WrongArity { .. })
        ));
    }

    #[test]
    fn scalar_literals() {
        let e = parse_expr("(smul -1.5 A)").unwrap();
        assert_eq!(e, smul(-1.5, a()));
        assert!(matches!(
            parse_expr("(smul x A)"),
            Err(ParseError::BadNumber { .. })
        ));
    }

    #[test]
    fn trailing_input_rejected() {
        assert!(matches!(
            parse_expr("A one"),
            Err(ParseError::Trailing { .. })
        ));
    }

    #[test]
    fn print_parse_round_trip() {
        let exprs = [
            mm(a(), one()),
            smul(-0.5, had(a(), mm(a(), a()))),
            pw(crate::matlang::PointwiseFn::Pow(3), diag(mm(a(), one()))),
            sub(trace(mm(a(), a())), trace(a())),
            transpose(mm(transpose(one()), a())),
        ];
        for e in exprs {
            let printed = e.to_string();
            let back = parse_expr(&printed).unwrap();
            assert_eq!(back, e, "round trip through `{printed}`");
        }
    }
}
