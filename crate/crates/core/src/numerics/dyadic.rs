use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Direction of a rounding step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
}

/// The exact value `mantissa · 2^exponent`.
///
/// Kept normalized: the mantissa is odd, or zero with exponent zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
}

impl Dyadic {
    pub fn new(mantissa: BigInt, exponent: i64) -> Dyadic {
        if mantissa.is_zero() {
            return Dyadic::zero();
        }
        let tz = mantissa.trailing_zeros().unwrap_or(0);
        Dyadic {
            mantissa: mantissa >> tz,
            exponent: exponent + tz as i64,
        }
    }

    pub fn zero() -> Dyadic {
        Dyadic {
            mantissa: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Dyadic {
        Dyadic::from_int(1)
    }

    pub fn from_int(n: i64) -> Dyadic {
        Dyadic::new(BigInt::from(n), 0)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Dyadic {
        Dyadic::new(BigInt::one(), e)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mantissa.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// Position just above the leading bit: `|self| < 2^magnitude_exponent`.
    pub fn magnitude_exponent(&self) -> i64 {
        if self.is_zero() {
            i64::MIN / 4
        } else {
            self.exponent + self.mantissa.bits() as i64
        }
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
        }
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic {
            mantissa: -&self.mantissa,
            exponent: self.exponent,
        }
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as usize;
        let b = &other.mantissa << (other.exponent - e) as usize;
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mantissa * &other.mantissa, self.exponent + other.exponent)
    }

    /// Exact multiplication by `2^k`.
    pub fn shift(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mantissa: self.mantissa.clone(),
            exponent: self.exponent + k,
        }
    }

    /// Rounds to at most `bits` significant bits in the given direction.
    pub fn round(&self, bits: u32, dir: Round) -> Dyadic {
        let len = self.mantissa.bits();
        if len <= u64::from(bits) {
            return self.clone();
        }
        let drop = (len - u64::from(bits)) as usize;
        let m = match dir {
            Round::Down => &self.mantissa >> drop,
            Round::Up => -((-&self.mantissa) >> drop),
        };
        Dyadic::new(m, self.exponent + drop as i64)
    }

    /// `self / k` rounded to `bits` significant bits.
    pub fn div_int(&self, k: u64, bits: u32, dir: Round) -> Dyadic {
        assert!(k > 0, "division by zero");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let kb = BigInt::from(k);
        let shift = (i64::from(bits) + kb.bits() as i64 + 2 - self.mantissa.bits() as i64).max(0);
        let num = &self.mantissa << shift as usize;
        let (q, r) = num.div_mod_floor(&kb);
        let q = if dir == Round::Up && !r.is_zero() { q + 1 } else { q };
        Dyadic::new(q, self.exponent - shift).round(bits, dir)
    }

    /// A rational rounded to `bits` significant bits.
    pub fn from_rational(r: &BigRational, bits: u32, dir: Round) -> Dyadic {
        let n = r.numer();
        let d = r.denom();
        if n.is_zero() {
            return Dyadic::zero();
        }
        let shift = i64::from(bits) + d.bits() as i64 + 2 - n.bits() as i64;
        let (num, den, e) = if shift >= 0 {
            (n << shift as usize, d.clone(), -shift)
        } else {
            (n.clone(), d.clone(), 0)
        };
        let (q, rem) = num.div_mod_floor(&den);
        let q = if dir == Round::Up && !rem.is_zero() { q + 1 } else { q };
        Dyadic::new(q, e).round(bits, dir)
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa << self.exponent as usize)
        } else {
            BigRational::new(self.mantissa.clone(), BigInt::one() << (-self.exponent) as usize)
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        // keep 64 leading bits so huge mantissas do not overflow the cast
        let len = self.mantissa.bits() as i64;
        let drop = (len - 64).max(0);
        let m = (&self.mantissa >> drop as usize).to_f64().unwrap_or(f64::NAN);
        let e = self.exponent + drop;
        m * 2f64.powi(e.clamp(-2000, 2000) as i32)
    }

    /// Exact conversion of a finite float.
    pub fn from_f64(x: f64) -> Dyadic {
        assert!(x.is_finite());
        if x == 0.0 {
            return Dyadic::zero();
        }
        let bits = x.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = (bits & ((1u64 << 52) - 1)) as i64;
        let (m, e) = if exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1i64 << 52), exp - 1075)
        };
        let m = if x < 0.0 { -m } else { m };
        Dyadic::new(BigInt::from(m), e)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Dyadic) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Dyadic) -> Ordering {
        self.sub(other).signum().cmp(&0)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mantissa, self.exponent)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_rational())
    }
}
