//! The clause stream: one zero-freeness clause per candidate `Q`, plus the
//! clause saying `P` vanishes identically.
//!
//! Rendered clauses use the term grammar with quantifier sugar:
//!
//! ```text
//! formula := group (" & " group)*
//! group   := "(" ("E" | "A") " (" vars ") in Q^" m " : " atom (" & " atom)* ")"
//! vars    := ident ("," ident)*        (empty when m = 0)
//! atom    := term " = 0" | term " != 0"
//! ```
//!
//! `E` ranges over rational tuples existentially, `A` universally. Terms
//! print without spaces, so `" & "` and `" : "` are unambiguous separators.

use std::fmt;

use thiserror::Error;

use crate::budget::EnumerationBudget;
use crate::calculus::flatness_numerator;
use crate::epoly::canonicalize;
use crate::term::{ParseError, Term};
use crate::zerofree::{constant_pool, find_witness, restrict, Point};

use super::enumerate::{enumerate_terms, TermStream};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Clause {
    /// `(A ȳ : P = 0)`.
    IdenticallyZero { rendered: String },
    /// `(E ȳ : P ≠ 0) & (A ȳ : N₁ = 0 & … & Nₘ = 0)` for the `index`-th
    /// enumerated `Q`, with `Nᵢ` the flatness numerators.
    ZeroFree {
        index: usize,
        q: Term,
        numerators: Vec<Term>,
        rendered: String,
    },
}

impl Clause {
    pub fn rendered(&self) -> &str {
        match self {
            Clause::IdenticallyZero { rendered } | Clause::ZeroFree { rendered, .. } => rendered,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantifier {
    Exists,
    ForAll,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Zero,
    Nonzero,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    pub quantifier: Quantifier,
    pub vars: Vec<String>,
    pub atoms: Vec<(Term, Relation)>,
}

/// A conjunction of quantified groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formula(pub Vec<Group>);

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            let q = match g.quantifier {
                Quantifier::Exists => "E",
                Quantifier::ForAll => "A",
            };
            write!(f, "({q} ({}) in Q^{} : ", g.vars.join(","), g.vars.len())?;
            for (j, (t, r)) in g.atoms.iter().enumerate() {
                if j > 0 {
                    f.write_str(" & ")?;
                }
                let rel = match r {
                    Relation::Zero => "=",
                    Relation::Nonzero => "!=",
                };
                write!(f, "{t} {rel} 0")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("malformed formula at byte {pos}: expected {expected}")]
    Syntax { pos: usize, expected: &'static str },
    #[error("bad term in formula: {0}")]
    Term(#[from] ParseError),
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

impl Cursor<'_> {
    fn eat(&mut self, lit: &'static str) -> Result<(), FormulaError> {
        if self.s[self.pos..].starts_with(lit) {
            self.pos += lit.len();
            Ok(())
        } else {
            Err(FormulaError::Syntax {
                pos: self.pos,
                expected: lit,
            })
        }
    }

    fn until(&mut self, stop: char) -> Result<&str, FormulaError> {
        let rest = &self.s[self.pos..];
        let end = rest.find(stop).ok_or(FormulaError::Syntax {
            pos: self.pos,
            expected: "closing delimiter",
        })?;
        self.pos += end;
        Ok(&rest[..end])
    }

    fn group_body(&mut self) -> Result<&str, FormulaError> {
        let start = self.pos;
        let mut depth = 0usize;
        for (i, c) in self.s[start..].char_indices() {
            match c {
                '(' => depth += 1,
                ')' if depth == 0 => {
                    self.pos = start + i;
                    return Ok(&self.s[start..start + i]);
                }
                ')' => depth -= 1,
                _ => {}
            }
        }
        Err(FormulaError::Syntax {
            pos: self.s.len(),
            expected: ")",
        })
    }
}

/// Parses a rendered clause back into its structure.
pub fn parse_formula(text: &str) -> Result<Formula, FormulaError> {
    let mut c = Cursor { s: text, pos: 0 };
    let mut groups = Vec::new();
    loop {
        c.eat("(")?;
        let quantifier = if c.eat("E").is_ok() {
            Quantifier::Exists
        } else {
            c.eat("A")?;
            Quantifier::ForAll
        };
        c.eat(" (")?;
        let vars: Vec<String> = match c.until(')')? {
            "" => Vec::new(),
            list => list.split(',').map(str::to_string).collect(),
        };
        c.eat(") in Q^")?;
        let m_pos = c.pos;
        let m: usize = c.until(' ')?.parse().map_err(|_| FormulaError::Syntax {
            pos: m_pos,
            expected: "dimension",
        })?;
        if m != vars.len() {
            return Err(FormulaError::Syntax {
                pos: m_pos,
                expected: "dimension matching the variable list",
            });
        }
        c.eat(" : ")?;
        let body_pos = c.pos;
        let body = c.group_body()?;
        let mut atoms = Vec::new();
        for atom in body.split(" & ") {
            let (t, r) = if let Some(t) = atom.strip_suffix(" != 0") {
                (t, Relation::Nonzero)
            } else if let Some(t) = atom.strip_suffix(" = 0") {
                (t, Relation::Zero)
            } else {
                return Err(FormulaError::Syntax {
                    pos: body_pos,
                    expected: "\"= 0\" or \"!= 0\"",
                });
            };
            atoms.push((Term::parse(t)?, r));
        }
        c.eat(")")?;
        groups.push(Group {
            quantifier,
            vars,
            atoms,
        });
        if c.pos == text.len() {
            return Ok(Formula(groups));
        }
        c.eat(" & ")?;
    }
}

/// Stream of clauses for `P(x̄, ȳ)`: the identically-zero clause, then
/// one clause per candidate `Q` in enumeration order.
pub struct ClauseStream {
    p: Term,
    p_canon: crate::epoly::EPoly,
    y_vars: Vec<String>,
    candidates: TermStream,
    next_index: usize,
    started: bool,
}

impl ClauseStream {
    fn zero_free(&self, index: usize, q: Term) -> Clause {
        let q_canon = canonicalize(&q);
        let numerators: Vec<Term> = self
            .y_vars
            .iter()
            .map(|y| flatness_numerator(&self.p_canon, &q_canon, y).to_term())
            .collect();
        let universal = if numerators.is_empty() {
            vec![(Term::int(0), Relation::Zero)]
        } else {
            numerators.iter().map(|n| (n.clone(), Relation::Zero)).collect()
        };
        let formula = Formula(vec![
            Group {
                quantifier: Quantifier::Exists,
                vars: self.y_vars.clone(),
                atoms: vec![(self.p.clone(), Relation::Nonzero)],
            },
            Group {
                quantifier: Quantifier::ForAll,
                vars: self.y_vars.clone(),
                atoms: universal,
            },
        ]);
        Clause::ZeroFree {
            index,
            q,
            numerators,
            rendered: formula.to_string(),
        }
    }

    /// Skips ahead so that the next clause is the `index`-th zero-freeness
    /// clause.
    pub fn restart_at(mut self, index: usize) -> ClauseStream {
        self.started = true;
        while self.next_index < index && self.candidates.next().is_some() {
            self.next_index += 1;
        }
        self
    }
}

impl Iterator for ClauseStream {
    type Item = Clause;

    fn next(&mut self) -> Option<Clause> {
        if !self.started {
            self.started = true;
            let formula = Formula(vec![Group {
                quantifier: Quantifier::ForAll,
                vars: self.y_vars.clone(),
                atoms: vec![(self.p.clone(), Relation::Zero)],
            }]);
            return Some(Clause::IdenticallyZero {
                rendered: formula.to_string(),
            });
        }
        let q = self.candidates.next()?;
        let index = self.next_index;
        self.next_index += 1;
        Some(self.zero_free(index, q))
    }
}

/// The clause stream for `P`, with candidates over `x̄ ∪ ȳ` and the
/// constants of `P` plus 0 and 1.
pub fn emit_clauses(p: &Term, x_vars: &[String], y_vars: &[String], budget: &EnumerationBudget) -> ClauseStream {
    let mut vars = x_vars.to_vec();
    vars.extend(y_vars.iter().cloned());
    ClauseStream {
        p: p.clone(),
        p_canon: canonicalize(p),
        y_vars: y_vars.to_vec(),
        candidates: enumerate_terms(&vars, &constant_pool(p, &[]), budget.max_weight),
        next_index: 0,
        started: false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClauseVerdict {
    Holds,
    Fails,
    Unknown,
}

/// Evaluates a clause at `x̄ = ā`.
///
/// Universal parts use the structural zero test after substituting `ā`;
/// the existential part searches for a certified nonzero value of `P`.
pub fn clause_holds(clause: &Clause, p: &Term, point: &Point, budget: &EnumerationBudget) -> ClauseVerdict {
    let restricted = restrict(p, point);
    match clause {
        Clause::IdenticallyZero { .. } => {
            if restricted.is_zero() {
                ClauseVerdict::Holds
            } else {
                ClauseVerdict::Fails
            }
        }
        Clause::ZeroFree { numerators, .. } => {
            if !numerators.iter().all(|n| restrict(n, point).is_zero()) {
                return ClauseVerdict::Fails;
            }
            if restricted.is_zero() {
                return ClauseVerdict::Fails;
            }
            // quantified variables absent from P do not affect the witness
            let y_vars: Vec<String> = restricted.free_vars().into_iter().collect();
            match find_witness(&restricted, &y_vars, budget) {
                Some(_) => ClauseVerdict::Holds,
                None => ClauseVerdict::Unknown,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::GaussianRational;
    use crate::term::parse;
    use crate::zerofree::bind;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn rendering_examples() {
        let p = parse("exp(y)-x").unwrap();
        let b = EnumerationBudget::default().with_weight(3);
        let clauses: Vec<Clause> = emit_clauses(&p, &names(&["x"]), &names(&["y"]), &b).collect();
        assert_eq!(clauses[0].rendered(), "(A (y) in Q^1 : exp(y)-x = 0)");
        let c = clauses
            .iter()
            .find(|c| matches!(c, Clause::ZeroFree { q, .. } if *q == Term::var("y")))
            .unwrap();
        assert_eq!(c.rendered(), "(E (y) in Q^1 : exp(y)-x != 0) & (A (y) in Q^1 : x = 0)");
    }

    #[test]
    fn rendered_formulas_reparse() {
        let p = parse("exp(y1*x)+y2-x").unwrap();
        let b = EnumerationBudget::default().with_weight(3);
        for c in emit_clauses(&p, &names(&["x"]), &names(&["y1", "y2"]), &b) {
            let f = parse_formula(c.rendered()).unwrap();
            assert_eq!(f.to_string(), c.rendered());
            if let Clause::ZeroFree { numerators, .. } = &c {
                let parsed: Vec<Term> = f.0[1].atoms.iter().map(|(t, _)| t.clone()).collect();
                assert_eq!(&parsed, numerators);
            }
        }
        let f = parse_formula("(E () in Q^0 : 1 != 0) & (A () in Q^0 : 0 = 0)").unwrap();
        assert!(f.0[0].vars.is_empty());
        assert!(parse_formula("(E (y) in Q^2 : y != 0)").is_err());
        assert!(parse_formula("(E (y) in Q^1 : y < 0)").is_err());
    }

    #[test]
    fn restart_matches_the_tail() {
        let p = parse("exp(y)-x").unwrap();
        let b = EnumerationBudget::default().with_weight(3);
        let all: Vec<Clause> = emit_clauses(&p, &names(&["x"]), &names(&["y"]), &b).collect();
        let tail: Vec<Clause> = emit_clauses(&p, &names(&["x"]), &names(&["y"]), &b).restart_at(10).collect();
        assert_eq!(&all[11..], &tail[..]);
    }

    #[test]
    fn holds_examples() {
        let p = parse("exp(y)-x").unwrap();
        let b = EnumerationBudget::default().with_weight(3);
        let clause = emit_clauses(&p, &names(&["x"]), &names(&["y"]), &b)
            .find(|c| matches!(c, Clause::ZeroFree { q, .. } if *q == Term::var("y")))
            .unwrap();
        let at = |v: i64| bind(&names(&["x"]), &[GaussianRational::from_int(v)]);
        assert_eq!(clause_holds(&clause, &p, &at(0), &b), ClauseVerdict::Holds);
        assert_eq!(clause_holds(&clause, &p, &at(1), &b), ClauseVerdict::Fails);

        let p = parse("x*exp(y)").unwrap();
        let zero_clause = emit_clauses(&p, &names(&["x"]), &names(&["y"]), &b).next().unwrap();
        assert_eq!(clause_holds(&zero_clause, &p, &at(0), &b), ClauseVerdict::Holds);
        assert_eq!(clause_holds(&zero_clause, &p, &at(2), &b), ClauseVerdict::Fails);
    }
}
