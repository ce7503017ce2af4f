//! Canonical normal forms `p₁·exp(s₁) + … + p_k·exp(s_k)`.
//!
//! An [`EPoly`] maps exponent keys `s` to polynomial parts `p`. Exponent
//! keys are themselves canonical `EPoly`s whose constant part is zero: when
//! an exponential `exp(c + s)` is formed, the constant `c` is pulled out into
//! the coefficient ring as the formal factor `E(c) = exp(c)`. Two keys that
//! differ by a constant therefore cannot coexist, and summands with equal
//! keys are merged, so the number of keys is the minimal `k`.
//!
//! Coefficients live in the group ring of `(ExpConstant, +)` over the
//! Gaussian rationals: an [`ExpConstant`] is a finite sum `Σ gⱼ·E(γⱼ)` with
//! `γⱼ` again an `ExpConstant` and `E(γ)·E(δ) = E(γ+δ)`, `E(0) = 1`. Variable
//! free canonical forms are exactly the `ExpConstant`s.
//!
//! All orders are total and structural (size first, then lexicographic), so
//! canonical forms are unique byte for byte and equality of canonical forms
//! is the equality test.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{Signed, Zero};

use crate::gaussian::GaussianRational;
use crate::term::Term;

fn merge_into<K: Ord + Clone, V>(
    dst: &mut BTreeMap<K, V>,
    key: K,
    value: V,
    add: impl Fn(&V, &V) -> V,
    is_zero: impl Fn(&V) -> bool,
) {
    match dst.get(&key) {
        Some(old) => {
            let sum = add(old, &value);
            if is_zero(&sum) {
                dst.remove(&key);
            } else {
                dst.insert(key, sum);
            }
        }
        None => {
            if !is_zero(&value) {
                dst.insert(key, value);
            }
        }
    }
}

/// Element of the exact constant ring `ℚ(i)[E(ExpConstant)]`.
///
/// The map sends an exponent constant `γ` (standing for the factor `exp(γ)`)
/// to its Gaussian-rational multiplier. The plain rational part sits at the
/// key `0`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExpConstant {
    size: usize,
    terms: BTreeMap<ExpConstant, GaussianRational>,
}

/// Coefficients of polynomial parts are exponential constants.
pub type Coefficient = ExpConstant;

impl ExpConstant {
    fn from_map(terms: BTreeMap<ExpConstant, GaussianRational>) -> Self {
        let size = terms.keys().map(|k| 1 + k.size).sum();
        ExpConstant { size, terms }
    }

    pub fn zero() -> Self {
        ExpConstant::from_map(BTreeMap::new())
    }

    pub fn one() -> Self {
        ExpConstant::from_gaussian(GaussianRational::one())
    }

    pub fn from_gaussian(g: GaussianRational) -> Self {
        let mut terms = BTreeMap::new();
        if !g.is_zero() {
            terms.insert(ExpConstant::zero(), g);
        }
        ExpConstant::from_map(terms)
    }

    pub fn from_int(n: i64) -> Self {
        ExpConstant::from_gaussian(GaussianRational::from_int(n))
    }

    /// The formal exponential `E(γ)`.
    pub fn exp_of(gamma: ExpConstant) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(gamma, GaussianRational::one());
        ExpConstant::from_map(terms)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .is_some_and(|(k, g)| k.is_zero() && g.is_one())
    }

    /// Structural size, the first component of the key order.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entries(&self) -> impl Iterator<Item = (&ExpConstant, &GaussianRational)> {
        self.terms.iter()
    }

    /// The value as a plain Gaussian rational, if no `E(γ)` with `γ ≠ 0`
    /// occurs.
    pub fn as_gaussian(&self) -> Option<GaussianRational> {
        match self.terms.len() {
            0 => Some(GaussianRational::zero()),
            1 => {
                let (k, g) = self.terms.iter().next()?;
                k.is_zero().then(|| g.clone())
            }
            _ => None,
        }
    }

    /// True when every exponent constant is a plain Gaussian rational, the
    /// regime in which distinct keys are provably independent.
    pub fn is_unnested(&self) -> bool {
        self.terms.keys().all(|k| k.as_gaussian().is_some())
    }

    pub fn add(&self, other: &ExpConstant) -> ExpConstant {
        let mut terms = self.terms.clone();
        for (k, g) in &other.terms {
            merge_into(&mut terms, k.clone(), g.clone(), |a, b| a + b, |g| g.is_zero());
        }
        ExpConstant::from_map(terms)
    }

    pub fn neg(&self) -> ExpConstant {
        let terms = self.terms.iter().map(|(k, g)| (k.clone(), -g)).collect();
        ExpConstant::from_map(terms)
    }

    pub fn sub(&self, other: &ExpConstant) -> ExpConstant {
        self.add(&other.neg())
    }

    pub fn scale(&self, g: &GaussianRational) -> ExpConstant {
        if g.is_zero() {
            return ExpConstant::zero();
        }
        let terms = self.terms.iter().map(|(k, v)| (k.clone(), v * g)).collect();
        ExpConstant::from_map(terms)
    }

    pub fn mul(&self, other: &ExpConstant) -> ExpConstant {
        let mut terms = BTreeMap::new();
        for (k1, g1) in &self.terms {
            for (k2, g2) in &other.terms {
                merge_into(&mut terms, k1.add(k2), g1 * g2, |a, b| a + b, |g| g.is_zero());
            }
        }
        ExpConstant::from_map(terms)
    }

    /// `exp(self)` as the formal factor `E(self)`.
    pub fn exp(&self) -> ExpConstant {
        ExpConstant::exp_of(self.clone())
    }

    pub fn to_term(&self) -> Term {
        let mut acc: Option<Term> = None;
        for (gamma, g) in &self.terms {
            let body = if gamma.is_zero() {
                None
            } else {
                Some(Term::exp(gamma.to_term()))
            };
            acc = Some(push_summand(acc, scaled(g, body)));
        }
        acc.unwrap_or_else(|| Term::int(0))
    }
}

impl fmt::Debug for ExpConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_constant(self))
    }
}

impl fmt::Display for ExpConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

/// A power product of variables; the empty map is the unit monomial.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    degree: u32,
    powers: BTreeMap<String, u32>,
}

impl Monomial {
    pub fn unit() -> Self {
        Monomial {
            degree: 0,
            powers: BTreeMap::new(),
        }
    }

    pub fn var(name: &str) -> Self {
        Monomial {
            degree: 1,
            powers: BTreeMap::from([(name.to_string(), 1)]),
        }
    }

    pub fn from_powers(powers: BTreeMap<String, u32>) -> Self {
        let powers: BTreeMap<String, u32> = powers.into_iter().filter(|(_, e)| *e > 0).collect();
        let degree = powers.values().sum();
        Monomial { degree, powers }
    }

    pub fn is_unit(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn powers(&self) -> &BTreeMap<String, u32> {
        &self.powers
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut powers = self.powers.clone();
        for (v, e) in &other.powers {
            *powers.entry(v.clone()).or_insert(0) += e;
        }
        Monomial {
            degree: self.degree + other.degree,
            powers,
        }
    }

    /// `∂/∂v` as `(multiplier, monomial)`; `None` when `v` does not occur.
    pub fn derivative(&self, v: &str) -> Option<(u32, Monomial)> {
        let e = *self.powers.get(v)?;
        let mut powers = self.powers.clone();
        if e == 1 {
            powers.remove(v);
        } else {
            powers.insert(v.to_string(), e - 1);
        }
        Some((
            e,
            Monomial {
                degree: self.degree - 1,
                powers,
            },
        ))
    }

    fn to_term(&self) -> Option<Term> {
        let mut acc: Option<Term> = None;
        for (v, e) in &self.powers {
            for _ in 0..*e {
                acc = Some(match acc {
                    None => Term::var(v),
                    Some(t) => Term::mul(t, Term::var(v)),
                });
            }
        }
        acc
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_monomial(self))
    }
}

/// An exp-free polynomial with exponential-constant coefficients.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PolyPart {
    size: usize,
    terms: BTreeMap<Monomial, Coefficient>,
}

impl PolyPart {
    fn from_map(terms: BTreeMap<Monomial, Coefficient>) -> Self {
        let size = terms
            .iter()
            .map(|(m, c)| 1 + m.degree as usize + c.size)
            .sum();
        PolyPart { size, terms }
    }

    pub fn zero() -> Self {
        PolyPart::from_map(BTreeMap::new())
    }

    pub fn constant(c: Coefficient) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::unit(), c);
        }
        PolyPart::from_map(terms)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Monomial, &Coefficient)> {
        self.terms.iter()
    }

    pub fn constant_coefficient(&self) -> Coefficient {
        self.terms
            .get(&Monomial::unit())
            .cloned()
            .unwrap_or_else(Coefficient::zero)
    }

    pub fn add(&self, other: &PolyPart) -> PolyPart {
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            merge_into(&mut terms, m.clone(), c.clone(), |a, b| a.add(b), |c| c.is_zero());
        }
        PolyPart::from_map(terms)
    }

    pub fn neg(&self) -> PolyPart {
        PolyPart::from_map(self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect())
    }

    pub fn mul(&self, other: &PolyPart) -> PolyPart {
        let mut terms = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                merge_into(&mut terms, m1.mul(m2), c1.mul(c2), |a, b| a.add(b), |c| c.is_zero());
            }
        }
        PolyPart::from_map(terms)
    }

    fn to_term(&self) -> Term {
        let mut acc: Option<Term> = None;
        for (m, c) in &self.terms {
            acc = Some(push_summand(acc, coefficient_times(c, m.to_term())));
        }
        acc.unwrap_or_else(|| Term::int(0))
    }
}

impl fmt::Debug for PolyPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_polypart(self))
    }
}

/// Canonical exponential polynomial: exponent key `s` ↦ polynomial part `p`.
///
/// The key `0` carries the exp-free part; every other key is structurally
/// nonzero and has zero constant part.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EPoly {
    size: usize,
    terms: BTreeMap<EPoly, PolyPart>,
}

/// Which independence result a structural zero test relied on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ZeroRegime {
    /// Only exponentials of Gaussian rationals occur as constants; a nonzero
    /// verdict is unconditional.
    Unconditional,
    /// Nested exponential constants occur; a nonzero verdict assumes
    /// Schanuel-type independence.
    SchanuelConditional,
}

impl EPoly {
    fn from_map(terms: BTreeMap<EPoly, PolyPart>) -> Self {
        let size = terms.iter().map(|(k, p)| 1 + k.size + p.size).sum();
        EPoly { size, terms }
    }

    pub fn zero() -> Self {
        EPoly::from_map(BTreeMap::new())
    }

    pub fn one() -> Self {
        EPoly::constant(ExpConstant::one())
    }

    pub fn constant(c: ExpConstant) -> Self {
        EPoly::from_part(EPoly::zero(), PolyPart::constant(c))
    }

    pub fn gaussian(g: GaussianRational) -> Self {
        EPoly::constant(ExpConstant::from_gaussian(g))
    }

    pub fn var(name: &str) -> Self {
        let part = PolyPart::from_map(BTreeMap::from([(Monomial::var(name), ExpConstant::one())]));
        EPoly::from_part(EPoly::zero(), part)
    }

    fn from_part(key: EPoly, part: PolyPart) -> Self {
        let mut terms = BTreeMap::new();
        if !part.is_zero() {
            terms.insert(key, part);
        }
        EPoly::from_map(terms)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `k`, the number of distinct exponentials (the exp-free part counts
    /// as `exp(0)`).
    pub fn num_exponentials(&self) -> usize {
        self.terms.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&EPoly, &PolyPart)> {
        self.terms.iter()
    }

    /// Exponent keys other than `0`.
    pub fn exponent_keys(&self) -> impl Iterator<Item = &EPoly> {
        self.terms.keys().filter(|k| !k.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The structural zero test together with the regime that grounds a
    /// negative answer.
    pub fn zero_test(&self) -> (bool, ZeroRegime) {
        let regime = if self.is_unnested() {
            ZeroRegime::Unconditional
        } else {
            ZeroRegime::SchanuelConditional
        };
        (self.is_zero(), regime)
    }

    fn is_unnested(&self) -> bool {
        self.terms.iter().all(|(k, p)| {
            k.is_unnested() && p.terms.values().all(|c| c.is_unnested())
        })
    }

    /// The coefficient of the unit monomial in the exp-free part.
    pub fn constant_part(&self) -> ExpConstant {
        self.terms
            .get(&EPoly::zero())
            .map(PolyPart::constant_coefficient)
            .unwrap_or_else(ExpConstant::zero)
    }

    /// The value if no variable occurs.
    pub fn as_constant(&self) -> Option<ExpConstant> {
        match self.terms.len() {
            0 => Some(ExpConstant::zero()),
            1 => {
                let (k, p) = self.terms.iter().next()?;
                if !k.is_zero() || p.terms.len() != 1 {
                    return None;
                }
                let (m, c) = p.terms.iter().next()?;
                m.is_unit().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (k, p) in &self.terms {
            out.extend(k.free_vars());
            for m in p.terms.keys() {
                out.extend(m.powers.keys().cloned());
            }
        }
        out
    }

    pub fn add(&self, other: &EPoly) -> EPoly {
        let mut terms = self.terms.clone();
        for (k, p) in &other.terms {
            merge_into(&mut terms, k.clone(), p.clone(), |a, b| a.add(b), |p| p.is_zero());
        }
        EPoly::from_map(terms)
    }

    pub fn neg(&self) -> EPoly {
        EPoly::from_map(self.terms.iter().map(|(k, p)| (k.clone(), p.neg())).collect())
    }

    pub fn sub(&self, other: &EPoly) -> EPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &EPoly) -> EPoly {
        let mut terms = BTreeMap::new();
        for (k1, p1) in &self.terms {
            for (k2, p2) in &other.terms {
                merge_into(&mut terms, k1.add(k2), p1.mul(p2), |a, b| a.add(b), |p| p.is_zero());
            }
        }
        EPoly::from_map(terms)
    }

    /// `exp(a) = E(c)·exp(a − c)` where `c` is the constant part of `a`.
    pub fn exp(&self) -> EPoly {
        let c = self.constant_part();
        let rest = self.sub(&EPoly::constant(c.clone()));
        let factor = c.exp();
        if rest.is_zero() {
            EPoly::constant(factor)
        } else {
            EPoly::from_part(rest, PolyPart::constant(factor))
        }
    }

    /// Scalar multiple by an exponential constant.
    pub fn scale(&self, c: &ExpConstant) -> EPoly {
        self.mul(&EPoly::constant(c.clone()))
    }

    /// Simultaneous substitution of canonical forms for variables, computed
    /// through the ring operations.
    pub fn substitute(&self, bind: &BTreeMap<String, EPoly>) -> EPoly {
        if bind.is_empty() {
            return self.clone();
        }
        let mut acc = EPoly::zero();
        for (k, p) in &self.terms {
            let mut part = EPoly::zero();
            for (m, c) in &p.terms {
                let mut prod = EPoly::constant(c.clone());
                for (v, e) in &m.powers {
                    let base = bind.get(v).cloned().unwrap_or_else(|| EPoly::var(v));
                    for _ in 0..*e {
                        prod = prod.mul(&base);
                    }
                }
                part = part.add(&prod);
            }
            let factor = if k.is_zero() {
                EPoly::one()
            } else {
                k.substitute(bind).exp()
            };
            acc = acc.add(&part.mul(&factor));
        }
        acc
    }

    pub fn substitute_values(&self, point: &BTreeMap<String, GaussianRational>) -> EPoly {
        let bind = point
            .iter()
            .map(|(k, v)| (k.clone(), EPoly::gaussian(v.clone())))
            .collect();
        self.substitute(&bind)
    }

    /// A term whose canonical form is `self`.
    pub fn to_term(&self) -> Term {
        let mut acc: Option<Term> = None;
        for (key, part) in &self.terms {
            let summand = if key.is_zero() {
                part.to_term()
            } else {
                let e = Term::exp(key.to_term());
                match single_entry(part) {
                    Some((m, c)) => {
                        let body = match m.to_term() {
                            Some(mt) => Term::mul(mt, e),
                            None => e,
                        };
                        coefficient_times(c, Some(body))
                    }
                    None => Term::mul(part.to_term(), e),
                }
            };
            acc = Some(push_summand(acc, summand));
        }
        acc.unwrap_or_else(|| Term::int(0))
    }
}

impl fmt::Debug for EPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize(self))
    }
}

impl fmt::Display for EPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

fn single_entry(p: &PolyPart) -> Option<(&Monomial, &Coefficient)> {
    if p.terms.len() == 1 {
        p.terms.iter().next()
    } else {
        None
    }
}

fn is_negative_real(g: &GaussianRational) -> bool {
    g.im.is_zero() && g.re.is_negative()
}

/// `g · body`, with `body = None` meaning 1; negative reals become `Neg`.
fn scaled(g: &GaussianRational, body: Option<Term>) -> Term {
    if is_negative_real(g) {
        return Term::neg(scaled(&-g, body));
    }
    match body {
        None => Term::Const(g.clone()),
        Some(b) if g.is_one() => b,
        Some(b) => Term::mul(Term::Const(g.clone()), b),
    }
}

fn coefficient_times(c: &Coefficient, body: Option<Term>) -> Term {
    if c.terms.len() == 1 {
        let (gamma, g) = c.terms.iter().next().expect("one entry");
        let body = match (gamma.is_zero(), body) {
            (true, b) => b,
            (false, None) => Some(Term::exp(gamma.to_term())),
            (false, Some(b)) => Some(Term::mul(Term::exp(gamma.to_term()), b)),
        };
        return scaled(g, body);
    }
    match body {
        None => c.to_term(),
        Some(b) => Term::mul(c.to_term(), b),
    }
}

fn push_summand(acc: Option<Term>, t: Term) -> Term {
    match acc {
        None => t,
        Some(a) => match t {
            Term::Neg(inner) => Term::Add(Box::new(a), Box::new(Term::Neg(inner))),
            other => Term::add(a, other),
        },
    }
}

/// Bottom-up conversion of a term to its canonical form.
pub fn canonicalize(t: &Term) -> EPoly {
    match t {
        Term::Const(c) => EPoly::gaussian(c.clone()),
        Term::Var(v) => EPoly::var(v),
        Term::Add(a, b) => canonicalize(a).add(&canonicalize(b)),
        Term::Mul(a, b) => canonicalize(a).mul(&canonicalize(b)),
        Term::Neg(a) => canonicalize(a).neg(),
        Term::Exp(a) => canonicalize(a).exp(),
    }
}

// Serialization
//
//   constant := '{' (literal '*E' constant (',' literal '*E' constant)*)? '}'
//   monomial := '1' | ident '^' n ('.' ident '^' n)*
//   part     := '<' monomial ':' constant (';' monomial ':' constant)* '>'
//   epoly    := '[' (part '*exp' epoly (',' part '*exp' epoly)*)? ']'
//
// Entries appear in key order, so the text is a function of the value.

pub fn serialize_constant(c: &ExpConstant) -> String {
    let mut out = String::new();
    write_constant(c, &mut out);
    out
}

fn write_constant(c: &ExpConstant, out: &mut String) {
    out.push('{');
    for (i, (gamma, g)) in c.terms.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&g.to_literal());
        out.push_str("*E");
        write_constant(gamma, out);
    }
    out.push('}');
}

fn serialize_monomial(m: &Monomial) -> String {
    if m.is_unit() {
        return "1".to_string();
    }
    m.powers
        .iter()
        .map(|(v, e)| format!("{v}^{e}"))
        .collect::<Vec<_>>()
        .join(".")
}

fn serialize_polypart(p: &PolyPart) -> String {
    let mut out = String::new();
    write_polypart(p, &mut out);
    out
}

fn write_polypart(p: &PolyPart, out: &mut String) {
    out.push('<');
    for (i, (m, c)) in p.terms.iter().enumerate() {
        if i > 0 {
            out.push(';');
        }
        out.push_str(&serialize_monomial(m));
        out.push(':');
        write_constant(c, out);
    }
    out.push('>');
}

pub fn serialize(e: &EPoly) -> String {
    let mut out = String::new();
    write_epoly(e, &mut out);
    out
}

fn write_epoly(e: &EPoly, out: &mut String) {
    out.push('[');
    for (i, (k, p)) in e.terms.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write_polypart(p, out);
        out.push_str("*exp");
        write_epoly(k, out);
    }
    out.push(']');
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed serialization at byte {pos}: {reason}")]
pub struct DeserializeError {
    pub pos: usize,
    pub reason: &'static str,
}

struct Reader<'a> {
    s: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn fail<T>(&self, reason: &'static str) -> Result<T, DeserializeError> {
        Err(DeserializeError { pos: self.at, reason })
    }

    fn eat(&mut self, lit: &str) -> Result<(), DeserializeError> {
        if self.s[self.at..].starts_with(lit.as_bytes()) {
            self.at += lit.len();
            Ok(())
        } else {
            self.fail("unexpected token")
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.at).copied()
    }

    fn constant(&mut self) -> Result<ExpConstant, DeserializeError> {
        self.eat("{")?;
        let mut terms = BTreeMap::new();
        if self.peek() == Some(b'}') {
            self.at += 1;
            return Ok(ExpConstant::from_map(terms));
        }
        loop {
            let rest = &self.s[self.at..];
            let Some(star) = rest.windows(2).position(|w| w == b"*E") else {
                return self.fail("missing '*E'");
            };
            let lit = std::str::from_utf8(&rest[..star]).map_err(|_| DeserializeError {
                pos: self.at,
                reason: "invalid utf-8",
            })?;
            let g = match crate::term::parse(lit) {
                Ok(Term::Const(g)) if !g.is_zero() => g,
                _ => return self.fail("bad coefficient literal"),
            };
            self.at += star + 2;
            let key = self.constant()?;
            if terms.insert(key, g).is_some() {
                return self.fail("duplicate key");
            }
            match self.peek() {
                Some(b',') => self.at += 1,
                Some(b'}') => {
                    self.at += 1;
                    break;
                }
                _ => return self.fail("expected ',' or '}'"),
            }
        }
        Ok(ExpConstant::from_map(terms))
    }

    fn ident(&mut self) -> Result<String, DeserializeError> {
        let start = self.at;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.at += 1;
            } else {
                break;
            }
        }
        if start == self.at {
            return self.fail("expected identifier");
        }
        Ok(String::from_utf8_lossy(&self.s[start..self.at]).into_owned())
    }

    fn monomial(&mut self) -> Result<Monomial, DeserializeError> {
        if self.peek() == Some(b'1') {
            self.at += 1;
            return Ok(Monomial::unit());
        }
        let mut powers = BTreeMap::new();
        loop {
            let v = self.ident()?;
            self.eat("^")?;
            let start = self.at;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.at += 1;
            }
            let e: u32 = std::str::from_utf8(&self.s[start..self.at])
                .ok()
                .and_then(|d| d.parse().ok())
                .filter(|e| *e > 0)
                .ok_or(DeserializeError {
                    pos: start,
                    reason: "bad exponent",
                })?;
            powers.insert(v, e);
            if self.peek() == Some(b'.') {
                self.at += 1;
            } else {
                break;
            }
        }
        Ok(Monomial::from_powers(powers))
    }

    fn polypart(&mut self) -> Result<PolyPart, DeserializeError> {
        self.eat("<")?;
        let mut terms = BTreeMap::new();
        if self.peek() == Some(b'>') {
            return self.fail("empty polynomial part");
        }
        loop {
            let m = self.monomial()?;
            self.eat(":")?;
            let c = self.constant()?;
            if c.is_zero() || terms.insert(m, c).is_some() {
                return self.fail("zero or duplicate monomial");
            }
            match self.peek() {
                Some(b';') => self.at += 1,
                Some(b'>') => {
                    self.at += 1;
                    break;
                }
                _ => return self.fail("expected ';' or '>'"),
            }
        }
        Ok(PolyPart::from_map(terms))
    }

    fn epoly(&mut self) -> Result<EPoly, DeserializeError> {
        self.eat("[")?;
        let mut terms = BTreeMap::new();
        if self.peek() == Some(b']') {
            self.at += 1;
            return Ok(EPoly::from_map(terms));
        }
        loop {
            let p = self.polypart()?;
            self.eat("*exp")?;
            let k = self.epoly()?;
            if terms.insert(k, p).is_some() {
                return self.fail("duplicate exponent key");
            }
            match self.peek() {
                Some(b',') => self.at += 1,
                Some(b']') => {
                    self.at += 1;
                    break;
                }
                _ => return self.fail("expected ',' or ']'"),
            }
        }
        Ok(EPoly::from_map(terms))
    }
}

/// Parses the output of [`serialize`]. The result is re-serialized and
/// compared so only canonical text is accepted.
pub fn deserialize(text: &str) -> Result<EPoly, DeserializeError> {
    let mut r = Reader {
        s: text.as_bytes(),
        at: 0,
    };
    let e = r.epoly()?;
    if r.at != text.len() || serialize(&e) != text {
        return Err(DeserializeError {
            pos: r.at,
            reason: "not in canonical form",
        });
    }
    Ok(e)
}

pub fn deserialize_constant(text: &str) -> Result<ExpConstant, DeserializeError> {
    let mut r = Reader {
        s: text.as_bytes(),
        at: 0,
    };
    let c = r.constant()?;
    if r.at != text.len() || serialize_constant(&c) != text {
        return Err(DeserializeError {
            pos: r.at,
            reason: "not in canonical form",
        });
    }
    Ok(c)
}
