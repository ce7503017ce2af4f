use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use num_rational::BigRational;

use super::dyadic::{Dyadic, Round};
use super::NumericError;
use crate::gaussian::GaussianRational;

/// Working precision in bits. Always at least 8.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Precision(u32);

impl Precision {
    pub const MIN_BITS: u32 = 8;

    pub fn new(bits: u32) -> Precision {
        Precision(bits.max(Self::MIN_BITS))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn doubled(self) -> Precision {
        Precision(self.0.saturating_mul(2))
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision(64)
    }
}

/// Arguments of `exp`, `sin` and `cos` are limited to `|x| < 2^24`.
const MAX_ARG_EXPONENT: i64 = 24;

/// Closed interval `[lo, hi]` with dyadic endpoints.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Dyadic,
    hi: Dyadic,
}

impl Interval {
    pub fn new(lo: Dyadic, hi: Dyadic) -> Interval {
        assert!(lo <= hi, "inverted interval");
        Interval { lo, hi }
    }

    pub fn point(x: Dyadic) -> Interval {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn zero() -> Interval {
        Interval::point(Dyadic::zero())
    }

    pub fn from_rational(r: &BigRational, p: Precision) -> Interval {
        Interval {
            lo: Dyadic::from_rational(r, p.bits(), Round::Down),
            hi: Dyadic::from_rational(r, p.bits(), Round::Up),
        }
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    pub fn midpoint(&self) -> Dyadic {
        self.lo.add(&self.hi).shift(-1)
    }

    pub fn contains_zero(&self) -> bool {
        self.lo.signum() <= 0 && self.hi.signum() >= 0
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_rational(&self, x: &BigRational) -> bool {
        &self.lo.to_rational() <= x && x <= &self.hi.to_rational()
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Upper bound on `|x|` over the interval.
    pub fn mag(&self) -> Dyadic {
        self.lo.abs().max(self.hi.abs())
    }

    /// Lower bound on `|x|` over the interval.
    pub fn mig(&self) -> Dyadic {
        if self.contains_zero() {
            Dyadic::zero()
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    fn rounded(lo: Dyadic, hi: Dyadic, p: Precision) -> Interval {
        Interval {
            lo: lo.round(p.bits(), Round::Down),
            hi: hi.round(p.bits(), Round::Up),
        }
    }

    pub fn add(&self, other: &Interval, p: Precision) -> Interval {
        Interval::rounded(self.lo.add(&other.lo), self.hi.add(&other.hi), p)
    }

    pub fn sub(&self, other: &Interval, p: Precision) -> Interval {
        Interval::rounded(self.lo.sub(&other.hi), self.hi.sub(&other.lo), p)
    }

    pub fn neg(&self) -> Interval {
        Interval {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
        }
    }

    pub fn mul(&self, other: &Interval, p: Precision) -> Interval {
        let products = [
            self.lo.mul(&other.lo),
            self.lo.mul(&other.hi),
            self.hi.mul(&other.lo),
            self.hi.mul(&other.hi),
        ];
        let lo = products.iter().min().expect("four products").clone();
        let hi = products.iter().max().expect("four products").clone();
        Interval::rounded(lo, hi, p)
    }

    pub fn sqr(&self, p: Precision) -> Interval {
        let a = self.lo.mul(&self.lo);
        let b = self.hi.mul(&self.hi);
        let hi = a.clone().max(b.clone());
        let lo = if self.contains_zero() { Dyadic::zero() } else { a.min(b) };
        Interval::rounded(lo, hi, p)
    }

    /// Division by a positive integer.
    pub fn div_int(&self, k: u64, p: Precision) -> Interval {
        Interval {
            lo: self.lo.div_int(k, p.bits(), Round::Down),
            hi: self.hi.div_int(k, p.bits(), Round::Up),
        }
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    /// Widens by `r ≥ 0` on both sides.
    pub fn inflate(&self, r: &Dyadic) -> Interval {
        Interval {
            lo: self.lo.sub(r),
            hi: self.hi.add(r),
        }
    }

    fn clamp_unit(&self) -> Interval {
        let one = Dyadic::one();
        let m1 = one.neg();
        let lo = self.lo.clone().max(m1.clone()).min(one.clone());
        let hi = self.hi.clone().min(one).max(m1);
        Interval { lo, hi }
    }

    fn check_range(&self) -> Result<(), NumericError> {
        if self.mag().magnitude_exponent() > MAX_ARG_EXPONENT {
            Err(NumericError::Overflow)
        } else {
            Ok(())
        }
    }

    pub fn exp(&self, p: Precision) -> Result<Interval, NumericError> {
        self.check_range()?;
        let lo = exp_point(&self.lo, p).lo;
        let hi = exp_point(&self.hi, p).hi;
        Ok(Interval { lo, hi })
    }

    /// `(sin x, cos x)` over the interval.
    pub fn sin_cos(&self, p: Precision) -> Result<(Interval, Interval), NumericError> {
        self.check_range()?;
        let unit = Interval::new(Dyadic::from_int(-1), Dyadic::one());
        if self.width() > Dyadic::from_int(4) {
            return Ok((unit.clone(), unit));
        }
        let w = Precision::new(p.bits() + 16);
        let half_pi = pi_enclosure(w).div_int(2, w);
        let k = (self.midpoint().to_f64() / std::f64::consts::FRAC_PI_2).round() as i64;
        let r = self.sub(&half_pi.mul(&Interval::point(Dyadic::from_int(k)), w), w);
        let (s, c) = sin_cos_reduced(&r, w);
        let (sin, cos) = match k.rem_euclid(4) {
            0 => (s, c),
            1 => (c, s.neg()),
            2 => (s.neg(), c.neg()),
            _ => (c.neg(), s),
        };
        Ok((sin.clamp_unit(), cos.clamp_unit()))
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.17e}, {:.17e}]", self.lo.to_f64(), self.hi.to_f64())
    }
}

/// Enclosure of `e^x` for a single dyadic `x` with `|x| < 2^24`.
fn exp_point(x: &Dyadic, p: Precision) -> Interval {
    if x.is_zero() {
        return Interval::point(Dyadic::one());
    }
    // scale so that |r| ≤ 1/4, then square back up
    let squarings = (x.magnitude_exponent() + 2).max(0);
    let w = Precision::new(p.bits() + squarings as u32 + 16);
    let r = Interval::point(x.shift(-squarings));
    let mut sum = Interval::point(Dyadic::one());
    let mut term = Interval::point(Dyadic::one());
    let eps = Dyadic::pow2(-(i64::from(w.bits()) + 2));
    let mut k = 1u64;
    loop {
        term = term.mul(&r, w).div_int(k, w);
        if term.mag() < eps {
            break;
        }
        sum = sum.add(&term, w);
        k += 1;
    }
    // tail Σ_{j≥k} |r|^j/j! ≤ 2·|r^k/k!| since consecutive ratios are ≤ 1/2
    let tail = term.mag().shift(1);
    let mut acc = sum.inflate(&tail);
    for _ in 0..squarings {
        acc = acc.sqr(w);
    }
    Interval::rounded(acc.lo, acc.hi, p)
}

/// Taylor enclosures of `sin r` and `cos r` with Lagrange remainders.
fn sin_cos_reduced(r: &Interval, w: Precision) -> (Interval, Interval) {
    let m = r.mag();
    let r2 = r.sqr(w);
    let eps = Dyadic::pow2(-(i64::from(w.bits()) + 2));
    let mut sin = r.clone();
    let mut cos = Interval::point(Dyadic::one());
    let mut sin_term = r.clone();
    let mut cos_term = Interval::point(Dyadic::one());
    // mpow = m^n / n! rounded up, tracking the degree n of the last term
    let mut mpow = m.clone();
    let mut n: u64 = 1;
    loop {
        // cos term of degree n+1, sin term of degree n+2
        cos_term = cos_term.mul(&r2, w).div_int(n * (n + 1), w).neg();
        cos = cos.add(&cos_term, w);
        sin_term = sin_term.mul(&r2, w).div_int((n + 1) * (n + 2), w).neg();
        sin = sin.add(&sin_term, w);
        mpow = mpow
            .mul(&m)
            .mul(&m)
            .div_int((n + 1) * (n + 2), w.bits(), Round::Up);
        n += 2;
        if mpow < eps && n > 3 {
            break;
        }
    }
    // cos is summed to degree n-1 (remainder ≤ m^n/n! = mpow) and sin to
    // degree n (remainder ≤ m^{n+1}/(n+1)! ≤ mpow, as m < n+1 here)
    let rem = mpow.round(w.bits(), Round::Up);
    (sin.inflate(&rem), cos.inflate(&rem))
}

fn atan_inv(n: u64, w: Precision) -> Interval {
    // atan(1/n) = Σ (-1)^k / ((2k+1) n^(2k+1)), alternating with decreasing terms
    let n2 = u128::from(n) * u128::from(n);
    let mut power = BigRational::new(1.into(), n.into());
    let mut sum = Interval::zero();
    let eps = Dyadic::pow2(-(i64::from(w.bits()) + 4));
    let mut k: u64 = 0;
    loop {
        let term = &power / BigRational::from_integer((2 * k + 1).into());
        let t = Interval::from_rational(&term, w);
        if t.hi < eps {
            return sum.inflate(&t.hi);
        }
        sum = if k % 2 == 0 { sum.add(&t, w) } else { sum.sub(&t, w) };
        power /= BigRational::from_integer(n2.into());
        k += 1;
    }
}

fn compute_pi(w: Precision) -> Interval {
    let inner = Precision::new(w.bits() + 8);
    let a = atan_inv(5, inner).mul(&Interval::point(Dyadic::from_int(16)), inner);
    let b = atan_inv(239, inner).mul(&Interval::point(Dyadic::from_int(4)), inner);
    let pi = a.sub(&b, inner);
    Interval::rounded(pi.lo, pi.hi, w)
}

static PI_CACHE: OnceLock<RwLock<HashMap<u32, Interval>>> = OnceLock::new();

/// Enclosure of π at the given precision, computed once per precision.
///
/// Concurrent initializers may both compute the value; they produce the
/// same interval, so the race is benign.
pub fn pi_enclosure(p: Precision) -> Interval {
    let cache = PI_CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(v) = cache.read().expect("pi cache poisoned").get(&p.bits()) {
        return v.clone();
    }
    let v = compute_pi(p);
    cache
        .write()
        .expect("pi cache poisoned")
        .entry(p.bits())
        .or_insert(v)
        .clone()
}

/// Rectangle `re × im` in the complex plane.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ComplexInterval {
    pub re: Interval,
    pub im: Interval,
}

impl ComplexInterval {
    pub fn new(re: Interval, im: Interval) -> ComplexInterval {
        ComplexInterval { re, im }
    }

    pub fn from_gaussian(g: &GaussianRational, p: Precision) -> ComplexInterval {
        ComplexInterval {
            re: Interval::from_rational(&g.re, p),
            im: Interval::from_rational(&g.im, p),
        }
    }

    pub fn zero() -> ComplexInterval {
        ComplexInterval::new(Interval::zero(), Interval::zero())
    }

    pub fn one() -> ComplexInterval {
        ComplexInterval::new(Interval::point(Dyadic::one()), Interval::zero())
    }

    pub fn contains_zero(&self) -> bool {
        self.re.contains_zero() && self.im.contains_zero()
    }

    pub fn contains_gaussian(&self, g: &GaussianRational) -> bool {
        self.re.contains_rational(&g.re) && self.im.contains_rational(&g.im)
    }

    pub fn intersects(&self, other: &ComplexInterval) -> bool {
        self.re.intersects(&other.re) && self.im.intersects(&other.im)
    }

    pub fn is_subset_of(&self, other: &ComplexInterval) -> bool {
        self.re.is_subset_of(&other.re) && self.im.is_subset_of(&other.im)
    }

    /// The larger of the two side lengths.
    pub fn width(&self) -> Dyadic {
        self.re.width().max(self.im.width())
    }

    pub fn add(&self, other: &ComplexInterval, p: Precision) -> ComplexInterval {
        ComplexInterval::new(self.re.add(&other.re, p), self.im.add(&other.im, p))
    }

    pub fn sub(&self, other: &ComplexInterval, p: Precision) -> ComplexInterval {
        ComplexInterval::new(self.re.sub(&other.re, p), self.im.sub(&other.im, p))
    }

    pub fn neg(&self) -> ComplexInterval {
        ComplexInterval::new(self.re.neg(), self.im.neg())
    }

    pub fn mul(&self, other: &ComplexInterval, p: Precision) -> ComplexInterval {
        let re = self.re.mul(&other.re, p).sub(&self.im.mul(&other.im, p), p);
        let im = self.re.mul(&other.im, p).add(&self.im.mul(&other.re, p), p);
        ComplexInterval::new(re, im)
    }

    pub fn exp(&self, p: Precision) -> Result<ComplexInterval, NumericError> {
        if self.im.is_zero_point() {
            return Ok(ComplexInterval::new(self.re.exp(p)?, Interval::zero()));
        }
        let modulus = self.re.exp(p)?;
        let (sin, cos) = self.im.sin_cos(p)?;
        Ok(ComplexInterval::new(modulus.mul(&cos, p), modulus.mul(&sin, p)))
    }
}

impl Interval {
    fn is_zero_point(&self) -> bool {
        self.lo.is_zero() && self.hi.is_zero()
    }
}

impl fmt::Debug for ComplexInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} + {:?}i", self.re, self.im)
    }
}
