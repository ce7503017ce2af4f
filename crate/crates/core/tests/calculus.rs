mod common;

use common::{finite_difference, point, random_rational, random_term_of_weight, rng};
use expzero::calculus::{derivative, flatness_numerator, FlatnessFraction};
use expzero::epoly::{canonicalize, EPoly};
use expzero::gaussian::GaussianRational;
use expzero::numerics::Precision;
use expzero::term::Term;

const VARS: [&str; 2] = ["x", "y"];

fn c(s: &str) -> EPoly {
    canonicalize(&Term::parse(s).unwrap())
}

#[test]
fn structural_rules_on_random_inputs() {
    let mut r = rng(21);
    for _ in 0..500 {
        let a = canonicalize(&random_term_of_weight(&mut r, 9, &VARS));
        let b = canonicalize(&random_term_of_weight(&mut r, 9, &VARS));
        for v in VARS {
            let (da, db) = (derivative(&a, v), derivative(&b, v));
            assert_eq!(derivative(&a.add(&b), v), da.add(&db));
            assert_eq!(derivative(&a.mul(&b), v), a.mul(&db).add(&b.mul(&da)));
            assert_eq!(derivative(&a.exp(), v), da.mul(&a.exp()));
            assert_eq!(flatness_numerator(&a, &b, v), da.sub(&a.mul(&db)));
        }
    }
}

#[test]
fn derivative_examples() {
    assert_eq!(derivative(&c("y*y"), "y"), c("2*y"));
    assert_eq!(derivative(&c("exp(y)"), "y"), c("exp(y)"));
    assert_eq!(derivative(&c("exp(x*y)"), "x"), c("y*exp(x*y)"));
    assert_eq!(derivative(&c("exp(x*y)"), "z"), EPoly::zero());
    assert!(flatness_numerator(&c("exp(x*y)"), &c("x*y"), "y").is_zero());
    assert_eq!(flatness_numerator(&c("exp(y)-x"), &c("y"), "y"), c("x"));
    let p = c("x*exp(y*y)+y");
    assert_eq!(flatness_numerator(&p, &EPoly::zero(), "y"), derivative(&p, "y"));
    assert!(FlatnessFraction::new(&c("exp(x*y)"), &c("x*y"), "y").vanishes_identically());
}

#[test]
fn finite_differences_agree() {
    let mut r = rng(22);
    let mut checked = 0;
    while checked < 100 {
        let t = random_term_of_weight(&mut r, 8, &VARS);
        let p = canonicalize(&t);
        let at = point(&VARS.map(|v| (v, GaussianRational::from_real(random_rational(&mut r, 2, 3)))));
        for k in [8, 12] {
            let fd = finite_difference(&p, "y", &at, k, Precision::new(128)).unwrap();
            assert!(fd.agrees, "{t} at {at:?}, h=2^-{k}, slope bound {}", fd.slope_bound);
            // the allowance h·C must be small next to the derivative itself
            let allowance = fd.slope_bound * (-(k as f64)).exp2();
            assert!(allowance < 0.05 * fd.derivative_mag.max(1.0), "{t}: allowance {allowance}");
        }
        checked += 1;
    }
}
