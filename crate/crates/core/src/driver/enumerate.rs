//! Weight-ordered enumeration of terms over a fixed alphabet.

use std::collections::BTreeSet;

use crate::gaussian::GaussianRational;
use crate::term::Term;

/// Every term over `vars` and `constants` exactly once, by ascending
/// [`Term::weight`] and, within a weight, in the structural order of
/// `Term`.
///
/// Levels are materialized one weight at a time and kept, since each level
/// is built from all lighter ones.
pub struct TermStream {
    vars: Vec<String>,
    constants: Vec<GaussianRational>,
    max_weight: u64,
    levels: Vec<Vec<Term>>,
    weight: u64,
    pos: usize,
}

impl TermStream {
    pub fn new(vars: &[String], constants: &[GaussianRational], max_weight: u64) -> TermStream {
        let vars: BTreeSet<String> = vars.iter().cloned().collect();
        let constants: BTreeSet<GaussianRational> = constants.iter().cloned().collect();
        TermStream {
            vars: vars.into_iter().collect(),
            constants: constants.into_iter().collect(),
            max_weight,
            levels: vec![Vec::new()],
            weight: 0,
            pos: 0,
        }
    }

    fn build_level(&self, w: u64) -> Vec<Term> {
        let mut out = Vec::new();
        if w == 1 {
            out.extend(self.vars.iter().map(|v| Term::var(v)));
        }
        out.extend(
            self.constants
                .iter()
                .filter(|c| 1 + c.bit_size() == w)
                .map(|c| Term::Const(c.clone())),
        );
        if w >= 2 {
            for t in &self.levels[(w - 1) as usize] {
                out.push(Term::neg(t.clone()));
                out.push(Term::exp(t.clone()));
            }
        }
        if w >= 3 {
            for wa in 1..(w - 1) {
                let wb = w - 1 - wa;
                for a in &self.levels[wa as usize] {
                    for b in &self.levels[wb as usize] {
                        out.push(Term::add(a.clone(), b.clone()));
                        out.push(Term::mul(a.clone(), b.clone()));
                    }
                }
            }
        }
        out.sort();
        out
    }
}

impl Iterator for TermStream {
    type Item = Term;

    fn next(&mut self) -> Option<Term> {
        loop {
            if let Some(t) = self.levels[self.weight as usize].get(self.pos) {
                self.pos += 1;
                return Some(t.clone());
            }
            if self.weight >= self.max_weight {
                return None;
            }
            self.weight += 1;
            self.pos = 0;
            let level = self.build_level(self.weight);
            self.levels.push(level);
        }
    }
}

pub fn enumerate_terms(vars: &[String], constants: &[GaussianRational], max_weight: u64) -> TermStream {
    TermStream::new(vars, constants, max_weight)
}
