mod common;

use std::collections::BTreeMap;

use common::{close, point, random_gaussian, random_rational, random_term_of_weight, rng, series_exp, series_pi, QC};
use expzero::epoly::{canonicalize, ExpConstant};
use expzero::gaussian::GaussianRational;
use expzero::numerics::{
    certify_nonzero, enclose_constant, eval_enclosure, eval_exact, pi_enclosure, ComplexInterval, Dyadic, Interval,
    NonzeroVerdict, NumericError, Precision, Round,
};
use expzero::term::Term;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn contains(i: &Interval, x: &BigRational, slack: &BigRational) -> bool {
    &i.lo().to_rational() - slack <= *x && *x <= &i.hi().to_rational() + slack
}

#[test]
fn exp_of_one_encloses_e() {
    let e = series_exp(&QC::new(BigRational::one(), BigRational::zero()), 60).re;
    // the truncation error is below 1/60!, far under the enclosure widths used
    let slack = BigRational::new(BigInt::one(), BigInt::from(10).pow(70));
    for bits in [16, 64, 200] {
        let p = Precision::new(bits);
        let z = ComplexInterval::new(Interval::point(Dyadic::one()), Interval::zero()).exp(p).unwrap();
        assert!(contains(&z.re, &e, &slack), "{bits} bits");
        assert!(z.im.contains_zero());
        assert!(z.width().to_f64() < 2f64.powi(3 - bits as i32));
    }
}

#[test]
fn e_to_the_seven_tenths_minus_two() {
    let oracle = series_exp(&QC::new(q(7, 10), BigRational::zero()), 60).re - q(2, 1);
    assert!(close(&oracle, &q(1375, 100000), &q(1, 100000)));
    let t = Term::parse("exp(y)-2").unwrap();
    let at = point(&[("y", GaussianRational::from_ratio(7, 10))]);
    let slack = BigRational::new(BigInt::one(), BigInt::from(10).pow(60));
    for bits in [32, 100] {
        let z = eval_enclosure(&t, &at, Precision::new(bits)).unwrap();
        assert!(contains(&z.re, &oracle, &slack));
        assert!(!z.contains_zero());
    }
}

#[test]
fn exp_of_i_pi_is_minus_one() {
    let pi = series_pi(40);
    let minus_one = q(-1, 1);
    let rough = ComplexInterval::new(
        Interval::zero(),
        Interval::new(
            Dyadic::from_rational(&q(31415, 10000), 40, Round::Down),
            Dyadic::from_rational(&q(31416, 10000), 40, Round::Up),
        ),
    );
    let z = rough.exp(Precision::new(64)).unwrap();
    assert!(contains(&z.re, &minus_one, &BigRational::zero()));
    let p = Precision::new(128);
    let pe = pi_enclosure(p);
    assert!(contains(&pe, &pi, &BigRational::zero()));
    assert!(pe.width().to_f64() < 1e-30);
    let z = ComplexInterval::new(Interval::zero(), pe).exp(p).unwrap();
    assert!(contains(&z.re, &minus_one, &BigRational::zero()));
    assert!(z.width().to_f64() < 1e-30);
    // the series oracle agrees at the same point
    let scale = BigInt::from(10).pow(20);
    let pi_20 = BigRational::new((pi * BigRational::from_integer(scale.clone())).floor().to_integer(), scale);
    let s = series_exp(&QC::new(BigRational::zero(), pi_20), 60);
    assert!(close(&s.re, &minus_one, &q(1, 1_000_000_000)));
}

#[test]
fn overflow_is_reported() {
    let huge = ComplexInterval::new(Interval::zero(), Interval::point(Dyadic::pow2(40)));
    assert_eq!(huge.exp(Precision::default()), Err(NumericError::Overflow));
}

#[test]
fn refinement_is_monotone() {
    let mut r = rng(31);
    for _ in 0..100 {
        let t = random_term_of_weight(&mut r, 9, &["x", "y"]);
        let at = point(&[("x", random_gaussian(&mut r)), ("y", random_gaussian(&mut r))]);
        let mut prev: Option<Dyadic> = None;
        for bits in [16, 32, 64, 128, 256] {
            let Ok(z) = eval_enclosure(&t, &at, Precision::new(bits)) else { break };
            if let Some(w) = &prev {
                assert!(z.width() <= *w, "{t} at {bits} bits");
            }
            prev = Some(z.width());
        }
    }
}

#[test]
fn exact_and_numeric_values_agree() {
    let mut r = rng(32);
    for _ in 0..150 {
        let t = random_term_of_weight(&mut r, 9, &["x", "y"]);
        let at = point(&[("x", random_gaussian(&mut r)), ("y", random_gaussian(&mut r))]);
        let exact = eval_exact(&t, &at).unwrap();
        let as_term = exact.to_term();
        for bits in [32, 96] {
            let p = Precision::new(bits);
            if let (Ok(a), Ok(b), Ok(c)) = (
                eval_enclosure(&t, &at, p),
                eval_enclosure(&as_term, &BTreeMap::new(), p),
                enclose_constant(&exact, p),
            ) {
                assert!(a.intersects(&b) && a.intersects(&c), "{t}");
            }
        }
    }
}

#[test]
fn enclosures_contain_sampled_images() {
    let mut r = rng(33);
    for _ in 0..60 {
        let t = random_term_of_weight(&mut r, 8, &["y"]);
        let lo = random_rational(&mut r, 4, 2);
        let width = q(1, 8);
        let lo_d = Dyadic::from_rational(&lo, 30, Round::Down);
        let hi_d = lo_d.add(&Dyadic::from_rational(&width, 30, Round::Up));
        let mut env = BTreeMap::new();
        env.insert(
            "y".to_string(),
            ComplexInterval::new(Interval::new(lo_d.clone(), hi_d.clone()), Interval::point(Dyadic::pow2(-3))),
        );
        let Ok(boxed) = expzero::numerics::eval_interval(&t, &env, Precision::new(48)) else { continue };
        for k in 0..=8 {
            let y = lo_d.to_rational() + (hi_d.to_rational() - lo_d.to_rational()) * q(k, 8);
            let at = point(&[("y", GaussianRational::new(y, q(1, 8)))]);
            let fine = eval_enclosure(&t, &at, Precision::new(128)).unwrap();
            assert!(fine.intersects(&boxed), "{t}");
        }
    }
}

#[test]
fn constructed_zeros_are_never_certified_nonzero() {
    let e1 = ExpConstant::from_int(1).exp();
    let zeros = [
        e1.sub(&e1),
        e1.mul(&ExpConstant::from_int(-1).exp()).sub(&ExpConstant::one()),
        canonicalize(&Term::parse("exp(1+1i)-exp(1)*exp(1i)").unwrap()).as_constant().unwrap(),
    ];
    for z in &zeros {
        assert_eq!(certify_nonzero(z, Precision::new(512)), NonzeroVerdict::Zero);
    }
    let near = ExpConstant::from_gaussian(GaussianRational::new(q(2718281828, 1000000000), BigRational::zero()));
    assert!(matches!(certify_nonzero(&e1.sub(&near), Precision::new(256)), NonzeroVerdict::Nonzero(p) if p.bits() >= 32));
}

#[test]
fn pi_cache_is_consistent_across_threads() {
    let handles: Vec<_> = (0..8)
        .map(|i| std::thread::spawn(move || pi_enclosure(Precision::new(64 + 32 * (i % 3)))))
        .collect();
    let got: Vec<Interval> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    for (i, g) in got.iter().enumerate() {
        assert_eq!(g, &pi_enclosure(Precision::new(64 + 32 * (i as u32 % 3))));
    }
}
