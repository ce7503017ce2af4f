//! Exact Gaussian rationals, the constant field of the term language.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// A complex number `re + im·i` with rational parts.
///
/// Both parts are kept in lowest terms with positive denominators (this is
/// what `BigRational` guarantees), so derived equality is value equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussianRational { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        GaussianRational::new(BigRational::from_integer(n.into()), BigRational::zero())
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        GaussianRational::new(BigRational::new(num.into(), den.into()), BigRational::zero())
    }

    pub fn from_real(re: BigRational) -> Self {
        GaussianRational::new(re, BigRational::zero())
    }

    pub fn imag_unit() -> Self {
        GaussianRational::new(BigRational::zero(), BigRational::one())
    }

    pub fn zero() -> Self {
        GaussianRational::from_int(0)
    }

    pub fn one() -> Self {
        GaussianRational::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// Height used by the witness enumerations: the largest absolute value
    /// among the numerators and denominators of both parts.
    pub fn height(&self) -> BigInt {
        let parts = [
            self.re.numer().abs(),
            self.re.denom().clone(),
            self.im.numer().abs(),
            self.im.denom().clone(),
        ];
        parts.into_iter().max().unwrap_or_else(BigInt::one)
    }

    /// Bit size charged by the term enumeration: `bits(n) - 1` (floored at
    /// zero) summed over numerators and denominators, so that 0, ±1 and ±i
    /// cost nothing.
    pub fn bit_size(&self) -> u64 {
        fn cost(n: &BigInt) -> u64 {
            n.bits().saturating_sub(1)
        }
        cost(self.re.numer()) + cost(self.re.denom()) + cost(self.im.numer()) + cost(self.im.denom())
    }

    /// Canonical textual form, re-parsable by the term grammar as a single
    /// constant: `3/2`, `3/2i`, `(1-2i)`, `(-1+0i)`.
    pub fn to_literal(&self) -> String {
        let re_neg = self.re.is_negative();
        if self.im.is_zero() && !re_neg {
            return self.re.to_string();
        }
        if self.re.is_zero() && !self.im.is_negative() {
            return format!("{}i", self.im);
        }
        let sign = if self.im.is_negative() { '-' } else { '+' };
        format!("({}{}{}i)", self.re, sign, self.im.abs())
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let norm = &self.re * &self.re + &self.im * &self.im;
        Some(GaussianRational::new(&self.re / &norm, -&self.im / &norm))
    }

    pub fn conj(&self) -> Self {
        GaussianRational::new(self.re.clone(), -self.im.clone())
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_literal())
    }
}

impl Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re.clone(), -self.im.clone())
    }
}

impl Add for GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: GaussianRational) -> GaussianRational {
        &self + &rhs
    }
}

impl Mul for GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: GaussianRational) -> GaussianRational {
        &self * &rhs
    }
}

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        -&self
    }
}

/// Rationals of height exactly `h` (`max(|p|, q)` in lowest terms), ordered
/// by absolute value with the positive value first. Height 1 also yields 0.
pub fn rationals_of_height(h: u64) -> Vec<BigRational> {
    let mut out = Vec::new();
    if h == 0 {
        return out;
    }
    if h == 1 {
        out.push(BigRational::zero());
    }
    let mut pos = Vec::new();
    for q in 1..=h {
        for p in 1..=h {
            if p.max(q) != h || num_integer::gcd(p, q) != 1 {
                continue;
            }
            pos.push(BigRational::new(BigInt::from(p), BigInt::from(q)));
        }
    }
    pos.sort();
    for r in pos {
        out.push(r.clone());
        out.push(-r);
    }
    out
}

/// Gaussian rationals whose height is exactly `h`, real ones first.
pub fn gaussian_rationals_of_height(h: u64) -> Vec<GaussianRational> {
    let mut out = Vec::new();
    let mut lower: Vec<BigRational> = Vec::new();
    for k in 1..h {
        lower.extend(rationals_of_height(k));
    }
    let exact = rationals_of_height(h);
    // (exact, any<=h) and (lower, exact), real parts varying slowest
    let mut all_upto: Vec<BigRational> = lower.clone();
    all_upto.extend(exact.iter().cloned());
    for re in &exact {
        for im in &all_upto {
            out.push(GaussianRational::new(re.clone(), im.clone()));
        }
    }
    for re in &lower {
        for im in &exact {
            out.push(GaussianRational::new(re.clone(), im.clone()));
        }
    }
    out.sort_by(|a, b| {
        let ka = (!a.is_real(), a.im.abs(), a.re.abs());
        let kb = (!b.is_real(), b.im.abs(), b.re.abs());
        ka.cmp(&kb).then_with(|| b.cmp(a))
    });
    out
}


/// Lazily enumerates `m`-tuples by ascending maximum height.
///
/// `levels[h - 1]` holds the values of height exactly `h`. Within a height
/// the tuples come in lexicographic order of their positions in the
/// flattened level list, which makes the order a fixed function of the
/// levels.
pub struct TuplesByHeight<T> {
    flat: Vec<T>,
    bounds: Vec<usize>,
    m: usize,
    level: usize,
    odometer: Vec<usize>,
    started: bool,
    done: bool,
}

impl<T: Clone> TuplesByHeight<T> {
    pub fn new(levels: Vec<Vec<T>>, m: usize) -> Self {
        let mut flat = Vec::new();
        let mut bounds = Vec::new();
        for l in levels {
            flat.extend(l);
            bounds.push(flat.len());
        }
        let done = bounds.is_empty() && m > 0;
        TuplesByHeight {
            flat,
            bounds,
            m,
            level: 0,
            odometer: vec![0; m],
            started: false,
            done,
        }
    }

    fn advance(&mut self) -> bool {
        let n = self.bounds[self.level];
        for i in (0..self.m).rev() {
            self.odometer[i] += 1;
            if self.odometer[i] < n {
                return true;
            }
            self.odometer[i] = 0;
        }
        false
    }
}

impl<T: Clone> Iterator for TuplesByHeight<T> {
    type Item = Vec<T>;

    fn next(&mut self) -> Option<Vec<T>> {
        if self.done {
            return None;
        }
        if self.m == 0 {
            self.done = true;
            return Some(Vec::new());
        }
        loop {
            if !self.started {
                self.started = true;
            } else if !self.advance() {
                self.level += 1;
                if self.level >= self.bounds.len() {
                    self.done = true;
                    return None;
                }
                self.odometer = vec![0; self.m];
            }
            let lower = if self.level == 0 { 0 } else { self.bounds[self.level - 1] };
            if self.bounds[self.level] == lower {
                continue;
            }
            if self.odometer.iter().any(|&i| i >= lower) {
                return Some(self.odometer.iter().map(|&i| self.flat[i].clone()).collect());
            }
        }
    }
}

/// Rational `m`-tuples of height at most `max_height`, lowest heights first.
pub fn rational_tuples(m: usize, max_height: u64) -> TuplesByHeight<BigRational> {
    TuplesByHeight::new((1..=max_height).map(rationals_of_height).collect(), m)
}

/// Gaussian-rational `m`-tuples of height at most `max_height`.
pub fn gaussian_tuples(m: usize, max_height: u64) -> TuplesByHeight<GaussianRational> {
    TuplesByHeight::new((1..=max_height).map(gaussian_rationals_of_height).collect(), m)
}

#[cfg(test)]
mod tuple_tests {
    use super::*;

    #[test]
    fn tuples_cover_each_tuple_once_in_height_order() {
        let tuples: Vec<_> = rational_tuples(2, 3).collect();
        let n = (1..=3).map(|h| rationals_of_height(h).len()).sum::<usize>();
        assert_eq!(tuples.len(), n * n);
        let set: std::collections::BTreeSet<_> = tuples.iter().cloned().collect();
        assert_eq!(set.len(), tuples.len());
        let heights: Vec<BigInt> = tuples
            .iter()
            .map(|t| t.iter().map(|r| GaussianRational::from_real(r.clone()).height()).max().unwrap())
            .collect();
        assert!(heights.windows(2).all(|w| w[0] <= w[1]));
        assert!(tuples[0].iter().all(|r| r.is_zero()));
    }

    #[test]
    fn empty_tuple_once() {
        assert_eq!(rational_tuples(0, 3).count(), 1);
        assert_eq!(gaussian_tuples(1, 1).count(), 9);
    }
}
