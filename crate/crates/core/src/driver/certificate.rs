//! Text form of verdicts and an independent replay check.
//!
//! A certificate is a `VERDICT <label>` line followed by two-space indented
//! `key=value` lines, always in the order below. Blank lines and lines
//! starting with `#` are ignored when reading.
//!
//! Common keys:
//!
//! | key | value |
//! |-----|-------|
//! | `term` | `P` in the term grammar |
//! | `x`, `y` | comma-separated variable names, possibly empty |
//! | `at.<x>` | Gaussian-rational literal assigned to each parameter |
//!
//! `NOT_IN` adds `q`, `witness.<y>` (rationals), `witness.value` and
//! `c.value` / `c.exponent` (serialized constants), `witness.bits`, and for
//! each checkpoint `k` the keys `checkpoint.<k>.at` (comma-separated
//! rationals), `checkpoint.<k>.lhs`, `checkpoint.<k>.rhs`.
//!
//! `IN` adds `kind=exact` with `zero.<y>` literals, or `kind=winding` with
//! `fixed.<y>` literals, `free`, `rect.re` and `rect.im` (`lo,hi` as exact
//! dyadic rationals), `winding` and `bits`.
//!
//! `IN_IDENTICALLY_ZERO` adds nothing. `UNKNOWN` adds `exhausted` and the
//! budget as `budget.weight`, `budget.height`, `budget.bits`; it is never a
//! valid certificate.
//!
//! Constants are written in the serialization of the canonical-form module:
//!
//! ```text
//! constant := '{' (literal '*E' constant (',' literal '*E' constant)*)? '}'
//! monomial := '1' | ident '^' n ('.' ident '^' n)*
//! part     := '<' monomial ':' constant (';' monomial ':' constant)* '>'
//! epoly    := '[' (part '*exp' epoly (',' part '*exp' epoly)*)? ']'
//! ```
//!
//! where `literal` is one Gaussian-rational constant of the term grammar.
//! `{}` is 0 and `{1*E{}}` is 1.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::budget::EnumerationBudget;
use crate::calculus::flatness_numerator;
use crate::epoly::{canonicalize, deserialize_constant, serialize_constant, ExpConstant};
use crate::gaussian::GaussianRational;
use crate::numerics::{certify_nonzero, eval_exact, Dyadic, Interval, NonzeroVerdict, Precision, Round};
use crate::rootcert::{winding_of, HasZeroCertificate, Rectangle};
use crate::term::Term;
use crate::zerofree::{check_roles, restrict, Checkpoint, Point, Witness, ZeroFreeCertificate};

use super::{BudgetReport, Verdict};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("missing key {0}")]
    Missing(String),
    #[error("bad value for {key}: {reason}")]
    Value { key: String, reason: String },
    #[error("UNKNOWN verdicts carry no certificate")]
    NoCertificate,
    #[error("certificate does not replay: {0}")]
    Invalid(String),
}

/// A parsed certificate: the question and the claimed verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub term: Term,
    pub x_vars: Vec<String>,
    pub y_vars: Vec<String>,
    pub point: Point,
    pub verdict: Verdict,
    /// Present only for `UNKNOWN`.
    pub budget: Option<EnumerationBudget>,
}

fn rationals(v: &[BigRational]) -> String {
    v.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(",")
}

fn dyadic_pair(i: &Interval) -> String {
    format!("{},{}", i.lo().to_rational(), i.hi().to_rational())
}

/// Renders a verdict and its certificate.
pub fn render_verdict(
    p: &Term,
    x_vars: &[String],
    y_vars: &[String],
    point: &Point,
    verdict: &Verdict,
    budget: &EnumerationBudget,
) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: &str| {
        let _ = writeln!(s, "  {k}={v}");
    };
    let head = format!("VERDICT {}\n", verdict.label());
    kv("term", &p.to_string());
    kv("x", &x_vars.join(","));
    kv("y", &y_vars.join(","));
    for x in x_vars {
        if let Some(v) = point.get(x) {
            kv(&format!("at.{x}"), &v.to_literal());
        }
    }
    match verdict {
        Verdict::NotIn(c) => {
            kv("q", &c.q.to_string());
            for (y, r) in c.y_vars.iter().zip(&c.witness.at) {
                kv(&format!("witness.{y}"), &r.to_string());
            }
            kv("witness.value", &serialize_constant(&c.witness.value));
            kv("witness.bits", &c.witness.precision.bits().to_string());
            kv("c.value", &serialize_constant(&c.c_value));
            kv("c.exponent", &serialize_constant(&c.c_exponent));
            for (k, cp) in c.checkpoints.iter().enumerate() {
                kv(&format!("checkpoint.{k}.at"), &rationals(&cp.at));
                kv(&format!("checkpoint.{k}.lhs"), &serialize_constant(&cp.lhs));
                kv(&format!("checkpoint.{k}.rhs"), &serialize_constant(&cp.rhs));
            }
        }
        Verdict::In(HasZeroCertificate::ExactRationalZero { point: z }) => {
            kv("kind", "exact");
            for (y, v) in z {
                kv(&format!("zero.{y}"), &v.to_literal());
            }
        }
        Verdict::In(HasZeroCertificate::WindingZero {
            fixed,
            free_var,
            rect,
            winding,
            precision,
        }) => {
            kv("kind", "winding");
            for (y, v) in fixed {
                kv(&format!("fixed.{y}"), &v.to_literal());
            }
            kv("free", free_var);
            kv("rect.re", &dyadic_pair(rect.re()));
            kv("rect.im", &dyadic_pair(rect.im()));
            kv("winding", &winding.to_string());
            kv("bits", &precision.bits().to_string());
        }
        Verdict::InIdenticallyZero => {}
        Verdict::Unknown(r) => {
            kv("exhausted", &r.exhausted().join(","));
            kv("budget.weight", &budget.max_weight.to_string());
            kv("budget.height", &budget.max_height.to_string());
            kv("budget.bits", &budget.max_bits.bits().to_string());
        }
    }
    head + &s
}

struct Fields {
    map: BTreeMap<String, String>,
}

impl Fields {
    fn get(&self, k: &str) -> Result<&str, VerifyError> {
        self.map
            .get(k)
            .map(String::as_str)
            .ok_or_else(|| VerifyError::Missing(k.to_string()))
    }

    fn parsed<T>(&self, k: &str, f: impl FnOnce(&str) -> Result<T, String>) -> Result<T, VerifyError> {
        f(self.get(k)?).map_err(|reason| VerifyError::Value {
            key: k.to_string(),
            reason,
        })
    }

    fn with_prefix(&self, prefix: &str) -> Vec<(&str, &str)> {
        self.map
            .iter()
            .filter_map(|(k, v)| k.strip_prefix(prefix).map(|rest| (rest, v.as_str())))
            .collect()
    }
}

fn term(s: &str) -> Result<Term, String> {
    Term::parse(s).map_err(|e| e.to_string())
}

fn gaussian(s: &str) -> Result<GaussianRational, String> {
    let t = term(s)?;
    if !t.free_vars().is_empty() {
        return Err("not a constant".into());
    }
    canonicalize(&t)
        .as_constant()
        .and_then(|c| c.as_gaussian())
        .ok_or_else(|| "not a Gaussian rational".into())
}

fn rational(s: &str) -> Result<BigRational, String> {
    BigRational::from_str(s).map_err(|e| e.to_string())
}

fn rational_list(s: &str) -> Result<Vec<BigRational>, String> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(rational).collect()
}

fn constant(s: &str) -> Result<ExpConstant, String> {
    deserialize_constant(s).map_err(|e| e.to_string())
}

fn bits(s: &str) -> Result<Precision, String> {
    let b: u32 = s.parse().map_err(|e: std::num::ParseIntError| e.to_string())?;
    if b < 8 {
        return Err("precision below 8 bits".into());
    }
    Ok(Precision::new(b))
}

fn exact_dyadic(r: &BigRational) -> Result<Dyadic, String> {
    let bits = (r.numer().bits() + r.denom().bits() + 8) as u32;
    let d = Dyadic::from_rational(r, bits, Round::Down);
    if &d.to_rational() == r {
        Ok(d)
    } else {
        Err(format!("{r} is not dyadic"))
    }
}

fn interval(s: &str) -> Result<Interval, String> {
    let v = rational_list(s)?;
    if v.len() != 2 || v[0] > v[1] {
        return Err("expected lo,hi".into());
    }
    Ok(Interval::new(exact_dyadic(&v[0])?, exact_dyadic(&v[1])?))
}

fn names(s: &str) -> Vec<String> {
    if s.is_empty() {
        Vec::new()
    } else {
        s.split(',').map(str::to_string).collect()
    }
}

fn literal_map(entries: Vec<(&str, &str)>, key: &str) -> Result<Point, VerifyError> {
    entries
        .into_iter()
        .map(|(k, v)| {
            gaussian(v).map(|g| (k.to_string(), g)).map_err(|reason| VerifyError::Value {
                key: format!("{key}.{k}"),
                reason,
            })
        })
        .collect()
}

/// Reads the text form back.
pub fn parse_certificate(text: &str) -> Result<Certificate, VerifyError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (_, head) = lines.next().ok_or(VerifyError::Parse {
        line: 1,
        reason: "empty certificate".into(),
    })?;
    let label = head.strip_prefix("VERDICT ").ok_or(VerifyError::Parse {
        line: 1,
        reason: "expected VERDICT line".into(),
    })?;
    let mut map = BTreeMap::new();
    for (i, l) in lines {
        let body = l.strip_prefix("  ").ok_or(VerifyError::Parse {
            line: i + 1,
            reason: "expected two-space indent".into(),
        })?;
        let (k, v) = body.split_once('=').ok_or(VerifyError::Parse {
            line: i + 1,
            reason: "expected key=value".into(),
        })?;
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(VerifyError::Parse {
                line: i + 1,
                reason: format!("duplicate key {k}"),
            });
        }
    }
    let f = Fields { map };
    let p = f.parsed("term", term)?;
    let x_vars = names(f.get("x")?);
    let y_vars = names(f.get("y")?);
    let point = literal_map(f.with_prefix("at."), "at")?;
    let mut budget = None;
    let verdict = match label.trim() {
        "NOT_IN" => {
            let at = y_vars
                .iter()
                .map(|y| f.parsed(&format!("witness.{y}"), rational))
                .collect::<Result<Vec<_>, _>>()?;
            let mut checkpoints = Vec::new();
            while f.map.contains_key(&format!("checkpoint.{}.at", checkpoints.len())) {
                let k = checkpoints.len();
                checkpoints.push(Checkpoint {
                    at: f.parsed(&format!("checkpoint.{k}.at"), rational_list)?,
                    lhs: f.parsed(&format!("checkpoint.{k}.lhs"), constant)?,
                    rhs: f.parsed(&format!("checkpoint.{k}.rhs"), constant)?,
                });
            }
            Verdict::NotIn(ZeroFreeCertificate {
                term: p.clone(),
                point: point.clone(),
                y_vars: y_vars.clone(),
                q: f.parsed("q", term)?,
                witness: Witness {
                    at,
                    value: f.parsed("witness.value", constant)?,
                    precision: f.parsed("witness.bits", bits)?,
                },
                c_value: f.parsed("c.value", constant)?,
                c_exponent: f.parsed("c.exponent", constant)?,
                checkpoints,
            })
        }
        "IN" => match f.get("kind")? {
            "exact" => Verdict::In(HasZeroCertificate::ExactRationalZero {
                point: literal_map(f.with_prefix("zero."), "zero")?,
            }),
            "winding" => {
                let rect = Rectangle::new(f.parsed("rect.re", interval)?, f.parsed("rect.im", interval)?)
                    .map_err(|e| VerifyError::Value {
                        key: "rect".into(),
                        reason: e.to_string(),
                    })?;
                Verdict::In(HasZeroCertificate::WindingZero {
                    fixed: literal_map(f.with_prefix("fixed."), "fixed")?,
                    free_var: f.get("free")?.to_string(),
                    rect,
                    winding: f.parsed("winding", |s| s.parse::<u64>().map_err(|e| e.to_string()))?,
                    precision: f.parsed("bits", bits)?,
                })
            }
            other => {
                return Err(VerifyError::Value {
                    key: "kind".into(),
                    reason: format!("unknown kind {other}"),
                })
            }
        },
        "IN_IDENTICALLY_ZERO" => Verdict::InIdenticallyZero,
        "UNKNOWN" => {
            let ex: BTreeSet<String> = names(f.get("exhausted")?).into_iter().collect();
            let int = |s: &str| s.parse::<u64>().map_err(|e| e.to_string());
            budget = Some(EnumerationBudget {
                max_weight: f.parsed("budget.weight", int)?,
                max_height: f.parsed("budget.height", int)?,
                max_bits: f.parsed("budget.bits", bits)?,
                ..EnumerationBudget::default()
            });
            Verdict::Unknown(BudgetReport {
                weight_exhausted: ex.contains("weight"),
                height_exhausted: ex.contains("height"),
                timed_out: ex.contains("timeout"),
            })
        }
        other => {
            return Err(VerifyError::Parse {
                line: 1,
                reason: format!("unknown verdict {other}"),
            })
        }
    };
    Ok(Certificate {
        term: p,
        x_vars,
        y_vars,
        point,
        verdict,
        budget,
    })
}

fn invalid(msg: impl Into<String>) -> VerifyError {
    VerifyError::Invalid(msg.into())
}

fn merged(a: &Point, b: &Point) -> Point {
    a.iter().chain(b).map(|(k, v)| (k.clone(), v.clone())).collect()
}

fn real_point(y_vars: &[String], values: &[BigRational]) -> Point {
    y_vars
        .iter()
        .cloned()
        .zip(values.iter().map(|r| GaussianRational::from_real(r.clone())))
        .collect()
}

fn exact(t: &Term, at: &Point) -> Result<ExpConstant, VerifyError> {
    eval_exact(t, at).map_err(|e| invalid(e.to_string()))
}

fn verify_zero_free(c: &ZeroFreeCertificate) -> Result<(), VerifyError> {
    check_roles(&[&c.term, &c.q], &c.point, &c.y_vars).map_err(|e| invalid(e.to_string()))?;
    let p = canonicalize(&c.term);
    let q = canonicalize(&c.q);
    for y in &c.y_vars {
        if !flatness_numerator(&p, &q, y).substitute_values(&c.point).is_zero() {
            return Err(invalid(format!("flatness numerator for {y} does not vanish")));
        }
    }
    if c.witness.at.len() != c.y_vars.len() {
        return Err(invalid("witness has the wrong arity"));
    }
    let at = merged(&c.point, &real_point(&c.y_vars, &c.witness.at));
    if exact(&c.term, &at)? != c.witness.value {
        return Err(invalid("witness value does not match P at the witness"));
    }
    if !matches!(certify_nonzero(&c.witness.value, c.witness.precision), NonzeroVerdict::Nonzero(_)) {
        return Err(invalid("witness value not certified nonzero"));
    }
    let origin = merged(&c.point, &real_point(&c.y_vars, &vec![BigRational::zero(); c.y_vars.len()]));
    if exact(&c.term, &origin)? != c.c_value || exact(&c.q, &origin)? != c.c_exponent {
        return Err(invalid("c-pair does not match P and Q at the origin"));
    }
    let e0 = c.c_exponent.exp();
    for (k, cp) in c.checkpoints.iter().enumerate() {
        if cp.at.len() != c.y_vars.len() {
            return Err(invalid(format!("checkpoint {k} has the wrong arity")));
        }
        let at = merged(&c.point, &real_point(&c.y_vars, &cp.at));
        let lhs = exact(&c.term, &at)?.mul(&e0);
        let rhs = c.c_value.mul(&exact(&c.q, &at)?.exp());
        if lhs != rhs || lhs != cp.lhs || rhs != cp.rhs {
            return Err(invalid(format!("checkpoint {k} fails")));
        }
    }
    Ok(())
}

fn verify_has_zero(p: &Term, point: &Point, y_vars: &[String], c: &HasZeroCertificate) -> Result<(), VerifyError> {
    let ys: BTreeSet<&String> = y_vars.iter().collect();
    match c {
        HasZeroCertificate::ExactRationalZero { point: z } => {
            if z.keys().collect::<BTreeSet<_>>() != ys {
                return Err(invalid("zero does not assign every quantified variable"));
            }
            if !exact(p, &merged(point, z))?.is_zero() {
                return Err(invalid("P is not zero at the claimed point"));
            }
        }
        HasZeroCertificate::WindingZero {
            fixed,
            free_var,
            rect,
            winding,
            precision,
        } => {
            let mut covered: BTreeSet<&String> = fixed.keys().collect();
            if !covered.insert(free_var) || covered != ys {
                return Err(invalid("fixed and free coordinates do not partition the quantified variables"));
            }
            if *winding == 0 {
                return Err(invalid("winding must be positive"));
            }
            let f = restrict(p, &merged(point, fixed));
            match winding_of(&f, rect, *precision) {
                Ok(Some(w)) if w == *winding as i64 => {}
                Ok(Some(w)) => return Err(invalid(format!("boundary winding is {w}, not {winding}"))),
                Ok(None) => return Err(invalid("zero not excluded on the boundary")),
                Err(e) => return Err(invalid(e.to_string())),
            }
        }
    }
    Ok(())
}

/// Replays a certificate from its text alone, recomputing every claim.
/// Returns the verdict label on success.
pub fn verify(text: &str) -> Result<&'static str, VerifyError> {
    let c = parse_certificate(text)?;
    if c.x_vars.iter().collect::<BTreeSet<_>>() != c.point.keys().collect::<BTreeSet<_>>() {
        return Err(invalid("parameters and assignments differ"));
    }
    check_roles(&[&c.term], &c.point, &c.y_vars).map_err(|e| invalid(e.to_string()))?;
    match &c.verdict {
        Verdict::NotIn(z) => verify_zero_free(z)?,
        Verdict::In(h) => verify_has_zero(&c.term, &c.point, &c.y_vars, h)?,
        Verdict::InIdenticallyZero => {
            if !restrict(&c.term, &c.point).is_zero() {
                return Err(invalid("P does not vanish identically"));
            }
        }
        Verdict::Unknown(_) => return Err(VerifyError::NoCertificate),
    }
    Ok(c.verdict.label())
}
