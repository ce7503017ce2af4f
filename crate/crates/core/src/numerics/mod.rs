//! Rigorous numerics: dyadic interval enclosures of terms and exponential
//! constants, exact evaluation at Gaussian-rational points, and the
//! refinement loop that certifies a value is nonzero.

mod dyadic;
mod interval;

use std::collections::BTreeMap;

use thiserror::Error;

pub use dyadic::{Dyadic, Round};
pub use interval::{pi_enclosure, ComplexInterval, Interval, Precision};

use crate::epoly::{canonicalize, EPoly, ExpConstant};
use crate::gaussian::GaussianRational;
use crate::term::Term;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum NumericError {
    #[error("variable {0} is not bound")]
    Unbound(String),
    #[error("exponent out of range; the enclosure would be unbounded")]
    Overflow,
}

/// Evaluates `t` over a box of complex intervals.
pub fn eval_interval(
    t: &Term,
    env: &BTreeMap<String, ComplexInterval>,
    p: Precision,
) -> Result<ComplexInterval, NumericError> {
    Ok(match t {
        Term::Const(c) => ComplexInterval::from_gaussian(c, p),
        Term::Var(v) => env
            .get(v)
            .cloned()
            .ok_or_else(|| NumericError::Unbound(v.clone()))?,
        Term::Add(a, b) => eval_interval(a, env, p)?.add(&eval_interval(b, env, p)?, p),
        Term::Mul(a, b) => eval_interval(a, env, p)?.mul(&eval_interval(b, env, p)?, p),
        Term::Neg(a) => eval_interval(a, env, p)?.neg(),
        Term::Exp(a) => eval_interval(a, env, p)?.exp(p)?,
    })
}

/// Enclosure of the value of `t` at a Gaussian-rational point.
pub fn eval_enclosure(
    t: &Term,
    point: &BTreeMap<String, GaussianRational>,
    p: Precision,
) -> Result<ComplexInterval, NumericError> {
    let env = point
        .iter()
        .map(|(k, v)| (k.clone(), ComplexInterval::from_gaussian(v, p)))
        .collect();
    eval_interval(t, &env, p)
}

/// Enclosure of an exponential constant.
pub fn enclose_constant(c: &ExpConstant, p: Precision) -> Result<ComplexInterval, NumericError> {
    let mut acc = ComplexInterval::zero();
    for (gamma, g) in c.entries() {
        let coeff = ComplexInterval::from_gaussian(g, p);
        let term = if gamma.is_zero() {
            coeff
        } else {
            coeff.mul(&enclose_constant(gamma, p)?.exp(p)?, p)
        };
        acc = acc.add(&term, p);
    }
    Ok(acc)
}

/// Enclosure of a canonical form over a box.
pub fn enclose_epoly(
    e: &EPoly,
    env: &BTreeMap<String, ComplexInterval>,
    p: Precision,
) -> Result<ComplexInterval, NumericError> {
    let mut acc = ComplexInterval::zero();
    for (key, part) in e.entries() {
        let mut sum = ComplexInterval::zero();
        for (m, c) in part.entries() {
            let mut prod = enclose_constant(c, p)?;
            for (v, k) in m.powers() {
                let x = env.get(v).ok_or_else(|| NumericError::Unbound(v.clone()))?;
                for _ in 0..*k {
                    prod = prod.mul(x, p);
                }
            }
            sum = sum.add(&prod, p);
        }
        if !key.is_zero() {
            sum = sum.mul(&enclose_epoly(key, env, p)?.exp(p)?, p);
        }
        acc = acc.add(&sum, p);
    }
    Ok(acc)
}

/// The exact value of `t` at a point, as an element of the constant ring.
pub fn eval_exact(
    t: &Term,
    point: &BTreeMap<String, GaussianRational>,
) -> Result<ExpConstant, NumericError> {
    if let Some(v) = t.free_vars().into_iter().find(|v| !point.contains_key(v)) {
        return Err(NumericError::Unbound(v));
    }
    let value = canonicalize(&t.substitute_values(point));
    Ok(value
        .as_constant()
        .expect("a variable-free canonical form is a constant"))
}

/// Outcome of [`certify_nonzero`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NonzeroVerdict {
    Zero,
    /// An enclosure at this precision excludes zero.
    Nonzero(Precision),
    Inconclusive,
}

/// Refinement schedule: 32, 64, 128, … bits, ending exactly at `max_p`.
pub fn precision_schedule(max_p: Precision) -> Vec<Precision> {
    let mut out = Vec::new();
    let mut p = Precision::new(32);
    while p < max_p {
        out.push(p);
        p = p.doubled();
    }
    out.push(max_p);
    out
}

/// Decides `c ≠ 0` by the structural test and a refinement loop.
pub fn certify_nonzero(c: &ExpConstant, max_p: Precision) -> NonzeroVerdict {
    if c.is_zero() {
        return NonzeroVerdict::Zero;
    }
    for p in precision_schedule(max_p) {
        match enclose_constant(c, p) {
            Ok(enc) if !enc.contains_zero() => return NonzeroVerdict::Nonzero(p),
            _ => {}
        }
    }
    NonzeroVerdict::Inconclusive
}
