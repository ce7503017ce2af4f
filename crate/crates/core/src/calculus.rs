//! Partial derivatives of canonical forms and the flatness numerators
//! `Nᵥ = ∂ᵥP − P·∂ᵥQ`.
//!
//! `∂ᵥ(P / exp(Q)) = Nᵥ / exp(Q)`, and `exp(Q)` never vanishes, so the
//! quotient vanishes identically exactly when `Nᵥ` does. The quotient itself
//! is never formed.

use crate::epoly::{EPoly, ExpConstant};
use crate::gaussian::GaussianRational;

/// `∂a/∂v` in canonical form.
pub fn derivative(a: &EPoly, v: &str) -> EPoly {
    let mut acc = EPoly::zero();
    for (key, part) in a.entries() {
        let mut dpart = EPoly::zero();
        let mut whole = EPoly::zero();
        for (m, c) in part.entries() {
            let mono = monomial_epoly(m, c);
            whole = whole.add(&mono);
            if let Some((mult, dm)) = m.derivative(v) {
                let c = c.scale(&GaussianRational::from_int(i64::from(mult)));
                dpart = dpart.add(&monomial_epoly(&dm, &c));
            }
        }
        if key.is_zero() {
            acc = acc.add(&dpart);
        } else {
            // d(p·exp(s)) = (p' + p·s')·exp(s)
            let e = key.exp();
            let ds = derivative(key, v);
            acc = acc.add(&dpart.add(&whole.mul(&ds)).mul(&e));
        }
    }
    acc
}

fn monomial_epoly(m: &crate::epoly::Monomial, c: &ExpConstant) -> EPoly {
    let mut prod = EPoly::constant(c.clone());
    for (name, e) in m.powers() {
        let x = EPoly::var(name);
        for _ in 0..*e {
            prod = prod.mul(&x);
        }
    }
    prod
}

/// `∂ᵥP − P·∂ᵥQ`, the numerator of `∂ᵥ(P / exp(Q))` over `exp(Q)`.
pub fn flatness_numerator(p: &EPoly, q: &EPoly, v: &str) -> EPoly {
    derivative(p, v).sub(&p.mul(&derivative(q, v)))
}

/// `numerator / exp(denominator_exponent)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatnessFraction {
    pub numerator: EPoly,
    pub denominator_exponent: EPoly,
}

impl FlatnessFraction {
    pub fn new(p: &EPoly, q: &EPoly, v: &str) -> Self {
        FlatnessFraction {
            numerator: flatness_numerator(p, q, v),
            denominator_exponent: q.clone(),
        }
    }

    pub fn vanishes_identically(&self) -> bool {
        self.numerator.is_zero()
    }
}
