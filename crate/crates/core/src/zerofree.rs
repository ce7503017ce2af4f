//! Zero-freeness certificates.
//!
//! For a fixed `ā`, `P(ā, ȳ)` has no zeros exactly when there is a term `Q`
//! over the same parameters such that
//!
//! * (i) `P(ā, q̄) ≠ 0` for some rational `q̄`, and
//! * (ii) every flatness numerator `∂ᵢP − P·∂ᵢQ` vanishes identically at `ā`.
//!
//! Then `P(ā, ȳ) = c·exp(Q(ā, ȳ))` with `c = P(ā, 0̄) / exp(Q(ā, 0̄))`. Condition
//! (ii) is checked structurally on canonical forms; condition (i) by a search
//! over rational tuples of increasing height with a certified nonzero value.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::budget::EnumerationBudget;
use crate::calculus::{derivative, flatness_numerator};
use crate::driver::enumerate::{enumerate_terms, TermStream};
use crate::epoly::{canonicalize, EPoly, ExpConstant, ZeroRegime};
use crate::gaussian::{rational_tuples, GaussianRational};
use crate::numerics::{certify_nonzero, NonzeroVerdict, Precision};
use crate::term::Term;

/// Assignment of Gaussian-rational values to variables.
pub type Point = BTreeMap<String, GaussianRational>;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RoleError {
    #[error("variable {0} is listed both as a parameter and as a quantified variable")]
    Clash(String),
    #[error("variable {0} is neither assigned a value nor quantified")]
    Unassigned(String),
}

/// Checks that `x̄` (the keys of `point`) and `ȳ` are disjoint and together
/// cover the free variables of every given term.
pub fn check_roles(terms: &[&Term], point: &Point, y_vars: &[String]) -> Result<(), RoleError> {
    if let Some(v) = y_vars.iter().find(|v| point.contains_key(*v)) {
        return Err(RoleError::Clash(v.clone()));
    }
    let ys: BTreeSet<&String> = y_vars.iter().collect();
    for t in terms {
        if let Some(v) = t.free_vars().into_iter().find(|v| !point.contains_key(v) && !ys.contains(v)) {
            return Err(RoleError::Unassigned(v));
        }
    }
    Ok(())
}

/// `ȳ ↦ q̄` as a point.
pub fn bind(y_vars: &[String], values: &[GaussianRational]) -> Point {
    y_vars.iter().cloned().zip(values.iter().cloned()).collect()
}

fn real_point(y_vars: &[String], values: &[BigRational]) -> Point {
    y_vars
        .iter()
        .cloned()
        .zip(values.iter().map(|r| GaussianRational::from_real(r.clone())))
        .collect()
}

/// A rational tuple where `P(ā, ·)` is certifiably nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub at: Vec<BigRational>,
    pub value: ExpConstant,
    pub precision: Precision,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateResult {
    pub condition_ii_holds: bool,
    pub condition_i_witness: Option<Witness>,
    pub identically_zero: bool,
    /// Grounds for the negative structural verdicts in this result.
    pub regime: ZeroRegime,
}

/// `P(ā, ȳ)` in canonical form.
pub fn restrict(p: &Term, point: &Point) -> EPoly {
    canonicalize(p).substitute_values(point)
}

/// Searches rational tuples by height for a certified nonzero value.
pub fn find_witness(
    restricted: &EPoly,
    y_vars: &[String],
    budget: &EnumerationBudget,
) -> Option<Witness> {
    if restricted.is_zero() {
        return None;
    }
    for q in rational_tuples(y_vars.len(), budget.max_height) {
        let value = restricted
            .substitute_values(&real_point(y_vars, &q))
            .as_constant()
            .expect("all variables bound");
        if let NonzeroVerdict::Nonzero(precision) = certify_nonzero(&value, budget.max_bits) {
            return Some(Witness {
                at: q,
                value,
                precision,
            });
        }
    }
    None
}

/// Evaluates conditions (i) and (ii) for one candidate `Q`.
pub fn check_candidate(
    p: &Term,
    point: &Point,
    q: &Term,
    y_vars: &[String],
    budget: &EnumerationBudget,
) -> Result<CandidateResult, RoleError> {
    check_roles(&[p, q], point, y_vars)?;
    let p_canon = canonicalize(p);
    let q_canon = canonicalize(q);
    let mut regime = ZeroRegime::Unconditional;
    let mut condition_ii_holds = true;
    for y in y_vars {
        let n = flatness_numerator(&p_canon, &q_canon, y).substitute_values(point);
        let (zero, r) = n.zero_test();
        regime = regime.max(r);
        if !zero {
            condition_ii_holds = false;
            break;
        }
    }
    let restricted = p_canon.substitute_values(point);
    let (identically_zero, r) = restricted.zero_test();
    regime = regime.max(r);
    let condition_i_witness = find_witness(&restricted, y_vars, budget);
    Ok(CandidateResult {
        condition_ii_holds,
        condition_i_witness,
        identically_zero,
        regime,
    })
}

/// One exact cross-multiplied identity
/// `P(ā, q̄)·exp(Q(ā, 0̄)) = P(ā, 0̄)·exp(Q(ā, q̄))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Checkpoint {
    pub at: Vec<BigRational>,
    pub lhs: ExpConstant,
    pub rhs: ExpConstant,
}

/// Evidence that `P(ā, ȳ) = c·exp(Q(ā, ȳ))` with `c ≠ 0`.
///
/// The constant `c` is reported as the pair `(P(ā, 0̄), Q(ā, 0̄))`, meaning
/// `c = P(ā, 0̄) / exp(Q(ā, 0̄))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroFreeCertificate {
    pub term: Term,
    pub point: Point,
    pub y_vars: Vec<String>,
    pub q: Term,
    pub witness: Witness,
    pub c_value: ExpConstant,
    pub c_exponent: ExpConstant,
    pub checkpoints: Vec<Checkpoint>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FactorError {
    #[error(transparent)]
    Roles(#[from] RoleError),
    #[error("candidate does not satisfy conditions (i) and (ii)")]
    Precondition,
    #[error("factor identity failed at {0:?}; canonical forms are inconsistent")]
    IdentityFailure(Vec<BigRational>),
}

const CHECKPOINT_SEED: u64 = 0x6578_707a_6572_6f00;

/// Up to `count` distinct tuples; with no coordinates there is only one.
fn sample_points(m: usize, count: usize) -> Vec<Vec<BigRational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(CHECKPOINT_SEED);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count * 64 {
        if out.len() == count {
            break;
        }
        let at: Vec<BigRational> = (0..m)
            .map(|_| {
                let n: i64 = rng.gen_range(-12..=12);
                let d: i64 = rng.gen_range(1..=6);
                BigRational::new(n.into(), d.into())
            })
            .collect();
        if seen.insert(at.clone()) {
            out.push(at);
        }
    }
    out
}

fn build_certificate(
    p: &Term,
    point: &Point,
    q: &Term,
    y_vars: &[String],
    restricted: &EPoly,
    witness: Witness,
    sample_count: usize,
) -> Result<ZeroFreeCertificate, FactorError> {
    let q_restricted = restrict(q, point);
    let origin = real_point(y_vars, &vec![BigRational::from_integer(0.into()); y_vars.len()]);
    let value_at = |e: &EPoly, at: &Point| e.substitute_values(at).as_constant().expect("bound");
    let c_value = value_at(restricted, &origin);
    let c_exponent = value_at(&q_restricted, &origin);
    let mut checkpoints = Vec::with_capacity(sample_count);
    for at in sample_points(y_vars.len(), sample_count) {
        let pt = real_point(y_vars, &at);
        let lhs = value_at(restricted, &pt).mul(&c_exponent.exp());
        let rhs = c_value.mul(&value_at(&q_restricted, &pt).exp());
        if lhs != rhs {
            return Err(FactorError::IdentityFailure(at));
        }
        checkpoints.push(Checkpoint { at, lhs, rhs });
    }
    Ok(ZeroFreeCertificate {
        term: p.clone(),
        point: point.clone(),
        y_vars: y_vars.to_vec(),
        q: q.clone(),
        witness,
        c_value,
        c_exponent,
        checkpoints,
    })
}

/// Packages a passing candidate as a certificate, recording `sample_count`
/// exact identity checks at pseudo-random rational tuples.
pub fn hr_factor(
    p: &Term,
    point: &Point,
    q: &Term,
    y_vars: &[String],
    sample_count: usize,
    budget: &EnumerationBudget,
) -> Result<ZeroFreeCertificate, FactorError> {
    let result = check_candidate(p, point, q, y_vars, budget)?;
    let witness = match result {
        CandidateResult {
            condition_ii_holds: true,
            condition_i_witness: Some(w),
            ..
        } => w,
        _ => return Err(FactorError::Precondition),
    };
    build_certificate(p, point, q, y_vars, &restrict(p, point), witness, sample_count)
}

/// Number of identity checkpoints recorded in search results.
pub const DEFAULT_CHECKPOINTS: usize = 8;

/// State shared by the candidate checks of one `(P, ā)` search.
///
/// Candidate checks are pure and may run on several threads; the witness
/// does not depend on the candidate and is computed at most once.
pub struct ZeroFreeSearch {
    term: Term,
    point: Point,
    y_vars: Vec<String>,
    restricted: EPoly,
    partials: Vec<EPoly>,
    pool: Vec<GaussianRational>,
    budget: EnumerationBudget,
    witness: OnceLock<Option<Witness>>,
}

/// Constants of `p` together with 0 and 1 and any extras.
pub fn constant_pool(p: &Term, extra: &[GaussianRational]) -> Vec<GaussianRational> {
    let mut pool: BTreeSet<GaussianRational> = p.constants();
    pool.insert(GaussianRational::zero());
    pool.insert(GaussianRational::one());
    pool.extend(extra.iter().cloned());
    pool.into_iter().collect()
}

impl ZeroFreeSearch {
    pub fn new(
        p: &Term,
        point: &Point,
        y_vars: &[String],
        extra_constants: &[GaussianRational],
        budget: &EnumerationBudget,
    ) -> Result<ZeroFreeSearch, RoleError> {
        check_roles(&[p], point, y_vars)?;
        let restricted = restrict(p, point);
        let partials = y_vars.iter().map(|y| derivative(&restricted, y)).collect();
        Ok(ZeroFreeSearch {
            term: p.clone(),
            point: point.clone(),
            y_vars: y_vars.to_vec(),
            restricted,
            partials,
            pool: constant_pool(p, extra_constants),
            budget: budget.clone(),
            witness: OnceLock::new(),
        })
    }

    pub fn restricted(&self) -> &EPoly {
        &self.restricted
    }

    /// Candidates `Q` over `x̄ ∪ ȳ` and the constant pool, lightest first.
    pub fn candidates(&self) -> TermStream {
        let mut vars: Vec<String> = self.point.keys().cloned().collect();
        vars.extend(self.y_vars.iter().cloned());
        enumerate_terms(&vars, &self.pool, self.budget.max_weight)
    }

    /// Condition (ii) for `q`, using `∂ᵢ(P(ā,·)) − P(ā,·)·∂ᵢ(Q(ā,·))`.
    pub fn passes_condition_ii(&self, q: &Term) -> bool {
        let q_restricted = restrict(q, &self.point);
        self.y_vars.iter().zip(&self.partials).all(|(y, dp)| {
            dp.sub(&self.restricted.mul(&derivative(&q_restricted, y)))
                .is_zero()
        })
    }

    pub fn witness(&self) -> Option<&Witness> {
        self.witness
            .get_or_init(|| find_witness(&self.restricted, &self.y_vars, &self.budget))
            .as_ref()
    }

    pub fn certify(&self, q: &Term) -> Result<ZeroFreeCertificate, FactorError> {
        let witness = self.witness().cloned().ok_or(FactorError::Precondition)?;
        if !self.passes_condition_ii(q) {
            return Err(FactorError::Precondition);
        }
        build_certificate(
            &self.term,
            &self.point,
            q,
            &self.y_vars,
            &self.restricted,
            witness,
            DEFAULT_CHECKPOINTS,
        )
    }
}

/// The first candidate in enumeration order that passes both conditions,
/// packaged as a certificate; `None` when the weight budget runs out.
pub fn search_zerofree(
    p: &Term,
    point: &Point,
    y_vars: &[String],
    budget: &EnumerationBudget,
) -> Result<Option<ZeroFreeCertificate>, FactorError> {
    let search = ZeroFreeSearch::new(p, point, y_vars, &[], budget)?;
    if search.restricted().is_zero() {
        return Ok(None);
    }
    for q in search.candidates() {
        if search.passes_condition_ii(&q) {
            if search.witness().is_none() {
                return Ok(None);
            }
            return search.certify(&q).map(Some);
        }
    }
    Ok(None)
}
