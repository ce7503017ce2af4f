//! Generators and independent oracles shared by the integration tests.
//!
//! The oracles deliberately avoid the crate's numerics: exp and π are
//! computed as truncated series over exact rationals, and winding numbers
//! by integrating f'/f with hardware floats.

#![allow(dead_code)]

use std::collections::BTreeMap;

use expzero::gaussian::GaussianRational;
use expzero::term::Term;
use num_bigint::BigInt;
pub use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn constant_pool() -> Vec<GaussianRational> {
    vec![
        GaussianRational::zero(),
        GaussianRational::one(),
        GaussianRational::from_int(2),
        GaussianRational::from_ratio(1, 2),
        GaussianRational::from_ratio(-3, 2),
        GaussianRational::imag_unit(),
        GaussianRational::one() + GaussianRational::imag_unit(),
    ]
}

/// A random term with at most `nodes` nodes and at most `exp_depth` nested
/// exponentials.
pub fn random_term(r: &mut ChaCha8Rng, nodes: u32, vars: &[&str], exp_depth: u32) -> Term {
    if nodes <= 1 {
        return if r.gen_bool(0.55) {
            Term::var(vars[r.gen_range(0..vars.len())])
        } else {
            let pool = constant_pool();
            Term::Const(pool[r.gen_range(0..pool.len())].clone())
        };
    }
    let choice = if nodes == 2 { r.gen_range(0..4) } else { r.gen_range(0..10) };
    match choice {
        0 | 1 => Term::neg(random_term(r, nodes - 1, vars, exp_depth)),
        2 | 3 if exp_depth > 0 => Term::exp(random_term(r, nodes - 1, vars, exp_depth - 1)),
        2 | 3 => Term::neg(random_term(r, nodes - 1, vars, exp_depth)),
        k => {
            let left = r.gen_range(1..nodes - 1);
            let right = nodes - 1 - left;
            let a = random_term(r, left, vars, exp_depth);
            let b = random_term(r, right, vars, exp_depth);
            if k % 2 == 0 {
                Term::add(a, b)
            } else {
                Term::mul(a, b)
            }
        }
    }
}

/// A random term whose weight is at most `max_weight`.
pub fn random_term_of_weight(r: &mut ChaCha8Rng, max_weight: u64, vars: &[&str]) -> Term {
    loop {
        let nodes = r.gen_range(1..=max_weight as u32);
        let t = random_term(r, nodes, vars, 2);
        if t.weight() <= max_weight {
            return t;
        }
    }
}

pub fn random_rational(r: &mut ChaCha8Rng, num: i64, den: i64) -> BigRational {
    BigRational::new(r.gen_range(-num..=num).into(), r.gen_range(1..=den).into())
}

pub fn random_gaussian(r: &mut ChaCha8Rng) -> GaussianRational {
    GaussianRational::new(random_rational(r, 6, 4), random_rational(r, 6, 4))
}

pub fn point(pairs: &[(&str, GaussianRational)]) -> BTreeMap<String, GaussianRational> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

pub fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// Complex numbers with exact rational parts.
#[derive(Clone, Debug, PartialEq)]
pub struct QC {
    pub re: BigRational,
    pub im: BigRational,
}

impl QC {
    pub fn new(re: BigRational, im: BigRational) -> QC {
        QC { re, im }
    }

    fn mul(&self, o: &QC) -> QC {
        QC {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

/// `Σ_{k<terms} z^k / k!`, exact.
pub fn series_exp(z: &QC, terms: usize) -> QC {
    let mut sum = QC::new(BigRational::one(), BigRational::zero());
    let mut power = sum.clone();
    for k in 1..terms {
        power = power.mul(z);
        let kk = BigRational::from_integer(BigInt::from(k));
        power = QC::new(&power.re / &kk, &power.im / &kk);
        sum = QC::new(&sum.re + &power.re, &sum.im + &power.im);
    }
    sum
}

fn arctan_inv(n: i64, terms: usize) -> BigRational {
    let n = BigInt::from(n);
    let mut sum = BigRational::zero();
    for k in 0..terms {
        let d = BigInt::from(2 * k + 1) * num_traits::pow(n.clone(), 2 * k + 1);
        let t = BigRational::new(BigInt::one(), d);
        if k % 2 == 0 {
            sum += t;
        } else {
            sum -= t;
        }
    }
    sum
}

/// π from Machin's formula, error below `5^-(2·terms)`.
pub fn series_pi(terms: usize) -> BigRational {
    BigRational::from_integer(16.into()) * arctan_inv(5, terms) - BigRational::from_integer(4.into()) * arctan_inv(239, terms)
}

pub fn close(a: &BigRational, b: &BigRational, tol: &BigRational) -> bool {
    (a - b).abs() <= *tol
}

pub type ComplexFn = fn(Complex64) -> Complex64;

/// `(1/2πi) ∮ f'/f` along the counterclockwise boundary of
/// `[x0,x1]×[y0,y1]`, composite Simpson with `n` panels per edge.
pub fn contour_winding(f: ComplexFn, df: ComplexFn, rect: [f64; 4], n: usize) -> f64 {
    let [x0, x1, y0, y1] = rect;
    let corners = [
        Complex64::new(x0, y0),
        Complex64::new(x1, y0),
        Complex64::new(x1, y1),
        Complex64::new(x0, y1),
    ];
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..4 {
        let a = corners[k];
        let b = corners[(k + 1) % 4];
        let h = (b - a) / (2 * n) as f64;
        let g = |z: Complex64| df(z) / f(z);
        let mut s = g(a) + g(b);
        for j in 1..2 * n {
            let w = if j % 2 == 1 { 4.0 } else { 2.0 };
            s += g(a + h * j as f64) * w;
        }
        total += s * h / 3.0;
    }
    (total / Complex64::new(0.0, 2.0 * std::f64::consts::PI)).re
}

use expzero::calculus::derivative;
use expzero::epoly::EPoly;
use expzero::numerics::{enclose_epoly, ComplexInterval, Dyadic, Interval, NumericError, Precision};

fn point_env(at: &BTreeMap<String, GaussianRational>, p: Precision) -> BTreeMap<String, ComplexInterval> {
    at.iter()
        .map(|(k, v)| (k.clone(), ComplexInterval::from_gaussian(v, p)))
        .collect()
}

/// Outcome of one finite-difference comparison.
#[derive(Debug)]
pub struct FdCheck {
    pub agrees: bool,
    /// `sup |∂²P|/2` over the step segment: the recorded slope constant.
    pub slope_bound: f64,
    /// Upper bound on `|∂_v P(q)|`.
    pub derivative_mag: f64,
}

/// Compares `(P(q + h·e_v) − P(q))/h` with `∂_v P(q)`, `h = 2^-k`, allowing
/// the Taylor remainder `h · sup|∂²P|/2` over the segment.
pub fn finite_difference(
    p: &EPoly,
    v: &str,
    at: &BTreeMap<String, GaussianRational>,
    k: i64,
    prec: Precision,
) -> Result<FdCheck, NumericError> {
    let h = BigRational::new(BigInt::one(), BigInt::one() << k as usize);
    let mut shifted = at.clone();
    let base = at[v].clone();
    shifted.insert(v.to_string(), base.clone() + GaussianRational::from_real(h));
    let f0 = enclose_epoly(p, &point_env(at, prec), prec)?;
    let f1 = enclose_epoly(p, &point_env(&shifted, prec), prec)?;
    let scale = ComplexInterval::new(Interval::point(Dyadic::pow2(k)), Interval::zero());
    let fd = f1.sub(&f0, prec).mul(&scale, prec);
    let d = enclose_epoly(&derivative(p, v), &point_env(at, prec), prec)?;
    let mut seg = point_env(at, prec);
    let b = ComplexInterval::from_gaussian(&base, prec);
    let re = b.re.hull(&b.re.add(&Interval::point(Dyadic::pow2(-k)), prec));
    seg.insert(v.to_string(), ComplexInterval::new(re, b.im.clone()));
    let m = enclose_epoly(&derivative(&derivative(p, v), v), &seg, prec)?;
    let half_sup = m.re.mag().add(&m.im.mag()).shift(-1);
    let tol = half_sup.shift(-k);
    let widened = ComplexInterval::new(d.re.inflate(&tol), d.im.inflate(&tol));
    Ok(FdCheck {
        agrees: widened.intersects(&fd),
        slope_bound: half_sup.to_f64(),
        derivative_mag: d.re.mag().add(&d.im.mag()).to_f64(),
    })
}

/// One entry of the fixed winding corpus: the term, its float twin and
/// derivative for the contour oracle, and the rectangle in quarters.
pub struct WindingCase {
    pub term: &'static str,
    pub f: ComplexFn,
    pub df: ComplexFn,
    pub quarters: [i64; 4],
}

impl WindingCase {
    pub fn rect(&self) -> expzero::rootcert::Rectangle {
        let d = |q: i64| Dyadic::from_int(q).shift(-2);
        let [a, b, c, e] = self.quarters;
        expzero::rootcert::Rectangle::from_corners(d(a), d(b), d(c), d(e)).unwrap()
    }

    pub fn float_rect(&self) -> [f64; 4] {
        self.quarters.map(|q| q as f64 / 4.0)
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn winding_corpus() -> Vec<WindingCase> {
    let case = |term, f: ComplexFn, df: ComplexFn, quarters| WindingCase { term, f, df, quarters };
    vec![
        // ln 2, twice: once on its own and once as exp(y) - x at x = 2
        case("exp(y)-2", |z| z.exp() - 2.0, |z| z.exp(), [2, 4, -2, 2]),
        case("exp(y)-2", |z| z.exp() - 2.0, |z| z.exp(), [-2, 2, -2, 2]),
        // exp(y1) + exp(y2) on the slice y1 = 0
        case("exp(0)+exp(y)", |z| z.exp() + 1.0, |z| z.exp(), [-2, 2, 10, 14]),
        case("exp(y)+1", |z| z.exp() + 1.0, |z| z.exp(), [-4, 4, -4, 4]),
        case("exp(y)-1", |z| z.exp() - 1.0, |z| z.exp(), [-2, 2, -2, 2]),
        case("exp(y)-1", |z| z.exp() - 1.0, |z| z.exp(), [4, 8, -4, 4]),
        case("exp(y)-1", |z| z.exp() - 1.0, |z| z.exp(), [-4, 4, 20, 28]),
        case("exp(2*y)-1", |z| (z * 2.0).exp() - 1.0, |z| (z * 2.0).exp() * 2.0, [-2, 2, -2, 14]),
        case("y*y+1", |z| z * z + 1.0, |z| z * 2.0, [-4, 4, 0, 8]),
        case("y*y+1", |z| z * z + 1.0, |z| z * 2.0, [-4, 4, -8, 0]),
        case("y*y+1", |z| z * z + 1.0, |z| z * 2.0, [-8, 8, -8, 8]),
        case("y*y*y-y", |z| z * z * z - z, |z| z * z * 3.0 - 1.0, [-8, 8, -2, 2]),
        case("y*y*y*y-1", |z| z * z * z * z - 1.0, |z| z * z * z * 4.0, [-7, 7, -7, 7]),
        case("(y-1/2)*(y-1/2)", |z| (z - 0.5) * (z - 0.5), |z| (z - 0.5) * 2.0, [0, 4, -2, 2]),
        case("y*exp(y)", |z| z * z.exp(), |z| (z + 1.0) * z.exp(), [-4, 4, -4, 4]),
        case("exp(y)+y", |z| z.exp() + z, |z| z.exp() + 1.0, [-4, 0, -2, 2]),
        case("exp(y)*exp(y)-exp(y)", |z| (z * 2.0).exp() - z.exp(), |z| (z * 2.0).exp() * 2.0 - z.exp(), [-4, 4, -4, 4]),
        case("exp(1i*y)-1", |z| (z * c(0.0, 1.0)).exp() - 1.0, |z| (z * c(0.0, 1.0)).exp() * c(0.0, 1.0), [20, 28, -4, 4]),
        case("y-(1+1i)", |z| z - c(1.0, 1.0), |_| c(1.0, 0.0), [2, 6, 2, 6]),
        case("y*y-2", |z| z * z - 2.0, |z| z * 2.0, [4, 8, -4, 4]),
    ]
}
