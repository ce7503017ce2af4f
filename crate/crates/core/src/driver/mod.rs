//! Membership decisions, clause emission and certificates.
//!
//! [`decide_membership`] interleaves the two semi-decisions: candidate
//! checks for a zero-freeness certificate and zero-hunting jobs. Jobs run in
//! parallel chunks, but the winner is always the first success in the fixed
//! interleaved order, so the verdict does not depend on scheduling.

pub mod certificate;
pub mod clauses;
pub mod enumerate;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

pub use certificate::{parse_certificate, render_verdict, verify, VerifyError};
pub use clauses::{clause_holds, emit_clauses, parse_formula, Clause, ClauseVerdict, Formula};
pub use enumerate::{enumerate_terms, TermStream};

use crate::budget::EnumerationBudget;
use crate::gaussian::GaussianRational;
use crate::numerics::eval_exact;
use crate::rootcert::{attempt, HasZeroCertificate, ZeroJob, ZeroJobs};
use crate::term::Term;
use crate::zerofree::{check_roles, restrict, FactorError, Point, RoleError, ZeroFreeCertificate, ZeroFreeSearch};

/// Which limits ran out before either side produced a certificate.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BudgetReport {
    pub weight_exhausted: bool,
    pub height_exhausted: bool,
    pub timed_out: bool,
}

impl BudgetReport {
    pub fn exhausted(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.weight_exhausted {
            out.push("weight");
        }
        if self.height_exhausted {
            out.push("height");
        }
        if self.timed_out {
            out.push("timeout");
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    In(HasZeroCertificate),
    NotIn(ZeroFreeCertificate),
    InIdenticallyZero,
    Unknown(BudgetReport),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::In(_) => "IN",
            Verdict::NotIn(_) => "NOT_IN",
            Verdict::InIdenticallyZero => "IN_IDENTICALLY_ZERO",
            Verdict::Unknown(_) => "UNKNOWN",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error(transparent)]
    Roles(#[from] RoleError),
    #[error(transparent)]
    Factor(#[from] FactorError),
}

/// Knobs of a decision run beyond the budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub budget: EnumerationBudget,
    /// Added to the constants of `P`, 0 and 1 in the candidate alphabet.
    pub extra_constants: Vec<GaussianRational>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl From<EnumerationBudget> for SearchOptions {
    fn from(budget: EnumerationBudget) -> Self {
        SearchOptions {
            budget,
            extra_constants: Vec::new(),
            threads: None,
        }
    }
}

const CROSS_CHECK_SEED: u64 = 0x7a65_726f_7465_7374;

/// Whether `P(ā, ·)` vanishes identically.
///
/// # Panics
/// If the structural test says zero but an exact evaluation at a sampled
/// rational tuple does not; that would mean canonical forms are broken.
pub fn check_identically_zero(p: &Term, point: &Point, y_vars: &[String]) -> Result<bool, RoleError> {
    check_roles(&[p], point, y_vars)?;
    let zero = restrict(p, point).is_zero();
    if zero {
        let mut rng = ChaCha8Rng::seed_from_u64(CROSS_CHECK_SEED);
        for _ in 0..3 {
            let mut at = point.clone();
            for y in y_vars {
                at.insert(y.clone(), GaussianRational::from_ratio(rng.gen_range(-9..=9), rng.gen_range(1..=4)));
            }
            let v = eval_exact(p, &at).expect("roles checked");
            assert!(v.is_zero(), "structural zero of {p} is nonzero at {at:?}");
        }
    }
    Ok(zero)
}

enum Job {
    Candidate(Term),
    Zero(ZeroJob),
}

/// Jobs evaluated together before the ordered merge.
const CHUNK: usize = 32;

/// Decides whether `P(ā, ȳ) = 0` has a solution, with default options.
pub fn decide_membership(
    p: &Term,
    point: &Point,
    y_vars: &[String],
    budget: &EnumerationBudget,
) -> Result<Verdict, DecideError> {
    decide_with(p, point, y_vars, &SearchOptions::from(budget.clone()))
}

pub fn decide_with(p: &Term, point: &Point, y_vars: &[String], opts: &SearchOptions) -> Result<Verdict, DecideError> {
    match opts.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("thread pool");
            pool.install(|| decide_inner(p, point, y_vars, opts))
        }
        None => decide_inner(p, point, y_vars, opts),
    }
}

fn decide_inner(p: &Term, point: &Point, y_vars: &[String], opts: &SearchOptions) -> Result<Verdict, DecideError> {
    if check_identically_zero(p, point, y_vars)? {
        return Ok(Verdict::InIdenticallyZero);
    }
    let budget = &opts.budget;
    let start = Instant::now();
    let search = ZeroFreeSearch::new(p, point, y_vars, &opts.extra_constants, budget)?;
    let restricted = search.restricted().clone();
    let mut candidates = search.candidates();
    let mut zeros = ZeroJobs::new(y_vars, budget.max_height);
    let mut report = BudgetReport::default();
    loop {
        let mut chunk = Vec::with_capacity(CHUNK);
        while chunk.len() < CHUNK && !(report.weight_exhausted && report.height_exhausted) {
            if !report.weight_exhausted {
                match candidates.next() {
                    Some(q) => chunk.push(Job::Candidate(q)),
                    None => report.weight_exhausted = true,
                }
            }
            if !report.height_exhausted {
                match zeros.next() {
                    Some(j) => chunk.push(Job::Zero(j)),
                    None => report.height_exhausted = true,
                }
            }
        }
        if chunk.is_empty() {
            return Ok(Verdict::Unknown(report));
        }
        let outcomes: Vec<Option<Verdict>> = chunk
            .par_iter()
            .map(|job| match job {
                Job::Candidate(q) => (search.passes_condition_ii(q) && search.witness().is_some())
                    .then(|| search.certify(q).map(Verdict::NotIn)),
                Job::Zero(z) => attempt(&restricted, z, budget.max_bits).map(|c| Ok(Verdict::In(c))),
            })
            .map(|r| r.transpose().map_err(DecideError::from))
            .collect::<Result<_, _>>()?;
        if let Some(v) = outcomes.into_iter().flatten().next() {
            return Ok(v);
        }
        if start.elapsed() >= budget.timeout {
            report.timed_out = true;
            return Ok(Verdict::Unknown(report));
        }
    }
}
