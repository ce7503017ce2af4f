//! Syntax trees for terms over `{+, ×, −, exp}` with Gaussian-rational
//! constants, together with the parser and printer for the ASCII grammar
//!
//! ```text
//! term  := sum
//! sum   := prod (('+' | '-') prod)*
//! prod  := unary ('*' unary)*
//! unary := '-' unary | atom
//! atom  := const | ident | 'exp' '(' term ')' | '(' term ')'
//! const := rational | rational 'i' | '(' '-'? rational ('+' | '-') rational 'i' ')'
//! ```
//!
//! Binary minus desugars to `Add(a, Neg(b))`. The optional leading `-` in
//! the parenthesized constant form lets every Gaussian rational print as a
//! single literal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::gaussian::GaussianRational;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(GaussianRational),
    Var(String),
    Add(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
    Neg(Box<Term>),
    Exp(Box<Term>),
}

impl Term {
    pub fn constant(c: GaussianRational) -> Term {
        Term::Const(c)
    }

    pub fn int(n: i64) -> Term {
        Term::Const(GaussianRational::from_int(n))
    }

    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(Term::Neg(Box::new(b))))
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::Mul(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Term) -> Term {
        Term::Neg(Box::new(a))
    }

    pub fn exp(a: Term) -> Term {
        Term::Exp(Box::new(a))
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Const(_) | Term::Var(_) => 1,
            Term::Neg(a) | Term::Exp(a) => 1 + a.size(),
            Term::Add(a, b) | Term::Mul(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Enumeration weight: node count plus the bit sizes of all constants.
    pub fn weight(&self) -> u64 {
        match self {
            Term::Const(c) => 1 + c.bit_size(),
            Term::Var(_) => 1,
            Term::Neg(a) | Term::Exp(a) => 1 + a.weight(),
            Term::Add(a, b) | Term::Mul(a, b) => 1 + a.weight() + b.weight(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Const(_) => {}
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Neg(a) | Term::Exp(a) => a.collect_vars(out),
            Term::Add(a, b) | Term::Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Constants occurring in the term, deduplicated and sorted.
    pub fn constants(&self) -> BTreeSet<GaussianRational> {
        fn walk(t: &Term, out: &mut BTreeSet<GaussianRational>) {
            match t {
                Term::Const(c) => {
                    out.insert(c.clone());
                }
                Term::Var(_) => {}
                Term::Neg(a) | Term::Exp(a) => walk(a, out),
                Term::Add(a, b) | Term::Mul(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut out);
        out
    }

    /// Simultaneous substitution. Unbound variables are left in place.
    pub fn substitute(&self, bind: &BTreeMap<String, Term>) -> Term {
        match self {
            Term::Const(_) => self.clone(),
            Term::Var(v) => bind.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Neg(a) => Term::neg(a.substitute(bind)),
            Term::Exp(a) => Term::exp(a.substitute(bind)),
            Term::Add(a, b) => Term::add(a.substitute(bind), b.substitute(bind)),
            Term::Mul(a, b) => Term::mul(a.substitute(bind), b.substitute(bind)),
        }
    }

    /// Substitution of constant values, the common case of fixing a point.
    pub fn substitute_values(&self, point: &BTreeMap<String, GaussianRational>) -> Term {
        let bind = point
            .iter()
            .map(|(k, v)| (k.clone(), Term::Const(v.clone())))
            .collect();
        self.substitute(&bind)
    }

    pub fn parse(text: &str) -> Result<Term, ParseError> {
        parse(text)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

impl std::str::FromStr for Term {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Term, ParseError> {
        parse(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unknown character {ch:?} at position {pos}")]
    UnknownChar { ch: char, pos: usize },
    #[error("syntax error at position {pos}: expected {expected}")]
    Syntax { pos: usize, expected: &'static str },
    #[error("malformed constant at position {pos}: {reason}")]
    MalformedConstant { pos: usize, reason: &'static str },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num { value: BigRational, imag: bool },
    Ident(String),
    Exp,
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '+' => {
                out.push((Tok::Plus, start));
                i += 1;
            }
            '-' => {
                out.push((Tok::Minus, start));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, start));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, start));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, start));
                i += 1;
            }
            '0'..='9' => {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let num: String = chars[start..i].iter().collect();
                let num: BigInt = num.parse().expect("digits");
                let mut den = BigInt::from(1);
                if i < chars.len() && chars[i] == '/' {
                    i += 1;
                    let ds = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    if ds == i {
                        return Err(ParseError::MalformedConstant {
                            pos: start,
                            reason: "missing denominator",
                        });
                    }
                    let d: String = chars[ds..i].iter().collect();
                    den = d.parse().expect("digits");
                    if den.is_zero() {
                        return Err(ParseError::MalformedConstant {
                            pos: start,
                            reason: "zero denominator",
                        });
                    }
                }
                let mut imag = false;
                if i < chars.len()
                    && chars[i] == 'i'
                    && !(i + 1 < chars.len() && is_ident_continue(chars[i + 1]))
                {
                    imag = true;
                    i += 1;
                } else if i < chars.len() && is_ident_continue(chars[i]) {
                    return Err(ParseError::MalformedConstant {
                        pos: start,
                        reason: "number runs into an identifier",
                    });
                }
                out.push((
                    Tok::Num {
                        value: BigRational::new(num, den),
                        imag,
                    },
                    start,
                ));
            }
            c if is_ident_start(c) => {
                while i < chars.len() && is_ident_continue(chars[i]) {
                    i += 1;
                }
                let name: String = chars[start..i].iter().collect();
                if name == "exp" {
                    out.push((Tok::Exp, start));
                } else {
                    out.push((Tok::Ident(name), start));
                }
            }
            '/' => {
                return Err(ParseError::MalformedConstant {
                    pos: start,
                    reason: "'/' only appears inside rational constants",
                })
            }
            other => return Err(ParseError::UnknownChar { ch: other, pos: start }),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.at + k).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn expect(&mut self, tok: Tok, expected: &'static str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.at += 1;
            Ok(())
        } else {
            Err(ParseError::Syntax {
                pos: self.pos(),
                expected,
            })
        }
    }

    fn sum(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.prod()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.at += 1;
                    let rhs = self.prod()?;
                    acc = Term::add(acc, rhs);
                }
                Some(Tok::Minus) => {
                    self.at += 1;
                    let rhs = self.prod()?;
                    acc = Term::sub(acc, rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn prod(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(&Tok::Star) {
            self.at += 1;
            let rhs = self.unary()?;
            acc = Term::mul(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Term, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.at += 1;
            return Ok(Term::neg(self.unary()?));
        }
        self.atom()
    }

    /// Recognizes `( -? rational (+|-) rational i )` starting at the cursor.
    fn paren_constant(&self) -> Option<(GaussianRational, usize)> {
        let mut k = 1;
        let mut negate_re = false;
        if self.peek_at(k) == Some(&Tok::Minus) {
            negate_re = true;
            k += 1;
        }
        let re = match self.peek_at(k) {
            Some(Tok::Num { value, imag: false }) => value.clone(),
            _ => return None,
        };
        let negate_im = match self.peek_at(k + 1) {
            Some(Tok::Plus) => false,
            Some(Tok::Minus) => true,
            _ => return None,
        };
        let im = match self.peek_at(k + 2) {
            Some(Tok::Num { value, imag: true }) => value.clone(),
            _ => return None,
        };
        if self.peek_at(k + 3) != Some(&Tok::RParen) {
            return None;
        }
        let re = if negate_re { -re } else { re };
        let im = if negate_im { -im } else { im };
        Some((GaussianRational::new(re, im), k + 4))
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num { value, imag }) => {
                self.at += 1;
                let c = if imag {
                    GaussianRational::new(BigRational::zero(), value)
                } else {
                    GaussianRational::from_real(value)
                };
                Ok(Term::Const(c))
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                Ok(Term::Var(name))
            }
            Some(Tok::Exp) => {
                self.at += 1;
                self.expect(Tok::LParen, "'(' after exp")?;
                let inner = self.sum()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Term::exp(inner))
            }
            Some(Tok::LParen) => {
                if let Some((c, len)) = self.paren_constant() {
                    self.at += len;
                    return Ok(Term::Const(c));
                }
                self.at += 1;
                let inner = self.sum()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            _ => Err(ParseError::Syntax {
                pos: self.pos(),
                expected: "a constant, identifier, exp(...) or '('",
            }),
        }
    }
}

pub fn parse(text: &str) -> Result<Term, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: text.chars().count(),
    };
    let t = p.sum()?;
    if p.at != p.toks.len() {
        return Err(ParseError::Syntax {
            pos: p.pos(),
            expected: "end of input",
        });
    }
    Ok(t)
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Level {
    Sum,
    Prod,
    Unary,
}

/// Prints a term in the grammar above; `parse(print(t)) == t` for every term.
pub fn print(t: &Term) -> String {
    let mut out = String::new();
    write_term(t, Level::Sum, &mut out);
    out
}

fn is_bare_imaginary(t: &Term) -> bool {
    matches!(t, Term::Const(c) if c.re.is_zero() && !c.im.is_negative())
}

fn write_term(t: &Term, level: Level, out: &mut String) {
    match t {
        Term::Const(c) => out.push_str(&c.to_literal()),
        Term::Var(v) => out.push_str(v),
        Term::Exp(a) => {
            out.push_str("exp(");
            write_term(a, Level::Sum, out);
            out.push(')');
        }
        Term::Neg(a) => {
            out.push('-');
            write_term(a, Level::Unary, out);
        }
        Term::Mul(a, b) => {
            let wrap = level > Level::Prod;
            if wrap {
                out.push('(');
            }
            write_term(a, Level::Prod, out);
            out.push('*');
            write_term(b, Level::Unary, out);
            if wrap {
                out.push(')');
            }
        }
        Term::Add(a, b) => {
            let wrap = level > Level::Sum;
            if wrap {
                out.push('(');
            }
            write_term(a, Level::Sum, out);
            let (op, rhs) = match b.as_ref() {
                Term::Neg(inner) => ('-', inner.as_ref()),
                other => ('+', other),
            };
            out.push(op);
            // `(1+2i)` must not be read back as a single constant
            if is_bare_imaginary(rhs) {
                out.push('(');
                write_term(rhs, Level::Sum, out);
                out.push(')');
            } else {
                write_term(rhs, Level::Prod, out);
            }
            if wrap {
                out.push(')');
            }
        }
    }
}
