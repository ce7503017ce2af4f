mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use common::{names, point, random_term_of_weight, rng};
use expzero::budget::EnumerationBudget;
use expzero::driver::{clause_holds, decide_membership, emit_clauses, enumerate_terms, Clause, ClauseVerdict, Verdict};
use expzero::gaussian::GaussianRational;
use expzero::numerics::{eval_exact, Precision};
use expzero::rootcert::search_zero;
use expzero::term::Term;
use expzero::zerofree::{restrict, search_zerofree, Point};
use num_rational::BigRational;

fn g(re: i64, im: i64) -> GaussianRational {
    GaussianRational::new(BigRational::from_integer(re.into()), BigRational::from_integer(im.into()))
}

fn small_budget() -> EnumerationBudget {
    EnumerationBudget {
        max_weight: 3,
        max_height: 2,
        max_bits: Precision::new(128),
        timeout: Duration::from_secs(2),
    }
}

fn sample_points() -> Vec<GaussianRational> {
    vec![g(0, 0), g(1, 0), g(-1, 0), GaussianRational::from_ratio(1, 2), g(0, 1), g(2, 0)]
}

fn corpus() -> Vec<(Term, Point)> {
    let mut out = Vec::new();
    let named = ["exp(y)-x", "exp(x*y)", "x*exp(y)", "exp(y)+x*y", "exp(exp(y))-x", "y*y-x", "exp(y)*x+1"];
    for p in named {
        for a in sample_points() {
            out.push((Term::parse(p).unwrap(), point(&[("x", a)])));
        }
    }
    let mut r = rng(41);
    for _ in 0..30 {
        let t = random_term_of_weight(&mut r, 7, &["x", "y"]);
        let a = sample_points()[out.len() % 6].clone();
        out.push((t, point(&[("x", a)])));
    }
    out
}

#[test]
fn no_point_gets_both_certificates() {
    let y = names(&["y"]);
    let b = small_budget();
    let (mut free, mut zero) = (0, 0);
    for (p, at) in corpus() {
        let f = search_zerofree(&p, &at, &y, &b).unwrap();
        let z = search_zero(&p, &at, &y, &b).unwrap();
        assert!(f.is_none() || z.is_none(), "{p} at {at:?}");
        free += f.is_some() as usize;
        zero += z.is_some() as usize;
    }
    // both sides are actually exercised
    assert!(free >= 10 && zero >= 10, "{free} zero-free, {zero} with zeros");
}

#[test]
fn zero_free_verdicts_never_vanish_at_samples() {
    let y = names(&["y"]);
    let b = small_budget();
    let mut r = rng(42);
    for (p, at) in corpus() {
        if search_zerofree(&p, &at, &y, &b).unwrap().is_some() {
            for _ in 0..5 {
                let mut full = at.clone();
                full.insert("y".into(), common::random_gaussian(&mut r));
                assert!(!eval_exact(&p, &full).unwrap().is_zero(), "{p} at {full:?}");
            }
        }
    }
}

#[test]
fn exp_free_points_use_q_zero_or_nothing() {
    let y = names(&["y"]);
    let b = small_budget();
    for p in ["1", "x+2", "x*x+1"] {
        let c = search_zerofree(&Term::parse(p).unwrap(), &point(&[("x", g(1, 0))]), &y, &b).unwrap();
        assert_eq!(c.unwrap().q, Term::int(0), "{p}");
    }
    for p in ["y", "y*y+x", "x*y-1", "y*y*y-2*y"] {
        let c = search_zerofree(&Term::parse(p).unwrap(), &point(&[("x", g(1, 0))]), &y, &b).unwrap();
        assert!(c.is_none(), "{p}");
    }
}

#[test]
fn verdicts_agree_with_clauses() {
    let (x, y) = (names(&["x"]), names(&["y"]));
    let b = EnumerationBudget::default().with_weight(3);
    for p in ["exp(y)-x", "exp(x*y)", "x*exp(y)", "y*y-x"] {
        let p = Term::parse(p).unwrap();
        let clauses: Vec<Clause> = emit_clauses(&p, &x, &y, &b).collect();
        for a in [g(0, 0), g(1, 0), g(2, 0), g(0, 1)] {
            let at = point(&[("x", a)]);
            let verdict = decide_membership(&p, &at, &y, &b).unwrap();
            let holding: Vec<&Clause> = clauses
                .iter()
                .filter(|c| matches!(c, Clause::ZeroFree { .. }))
                .filter(|c| clause_holds(c, &p, &at, &b) == ClauseVerdict::Holds)
                .collect();
            match &verdict {
                Verdict::NotIn(cert) => {
                    assert!(!holding.is_empty(), "{p} at {at:?}");
                    let q_clause = clauses.iter().find(|c| matches!(c, Clause::ZeroFree { q, .. } if q == &cert.q));
                    assert_eq!(clause_holds(q_clause.unwrap(), &p, &at, &b), ClauseVerdict::Holds);
                }
                Verdict::In(_) | Verdict::InIdenticallyZero => assert!(holding.is_empty(), "{p} at {at:?}"),
                Verdict::Unknown(_) => panic!("{p} at {at:?} undecided"),
            }
            let z = clauses.iter().find(|c| matches!(c, Clause::IdenticallyZero { .. })).unwrap();
            let expect = if verdict == Verdict::InIdenticallyZero { ClauseVerdict::Holds } else { ClauseVerdict::Fails };
            assert_eq!(clause_holds(z, &p, &at, &b), expect, "{p} at {at:?}");
        }
    }
}

#[test]
fn restricted_zero_matches_identically_zero_verdict() {
    let y = names(&["y"]);
    for (p, at) in corpus().into_iter().take(20) {
        let v = decide_membership(&p, &at, &y, &small_budget()).unwrap();
        assert_eq!(v == Verdict::InIdenticallyZero, restrict(&p, &at).is_zero(), "{p}");
    }
}

// --- enumeration ---

fn alphabet() -> (Vec<String>, Vec<GaussianRational>) {
    (names(&["x", "y"]), vec![g(0, 0), g(1, 0), GaussianRational::from_ratio(1, 2), g(2, 0)])
}

fn leaf_weights(vars: &[String], constants: &[GaussianRational]) -> Vec<u64> {
    let mut w: Vec<u64> = vars.iter().map(|_| 1).collect();
    w.extend(constants.iter().map(|c| Term::Const(c.clone()).weight()));
    w
}

/// count(w) = leaves(w) + 2·count(w−1) + 2·Σ_{a+b=w−1} count(a)·count(b)
fn counts(leaves: &[u64], max: usize) -> Vec<u128> {
    let mut c = vec![0u128; max + 1];
    for w in 1..=max {
        let mut n = leaves.iter().filter(|&&l| l == w as u64).count() as u128;
        n += 2 * c[w - 1];
        for a in 1..w.saturating_sub(1) {
            n += 2 * c[a] * c[w - 1 - a];
        }
        c[w] = n;
    }
    c
}

#[test]
fn counts_per_weight_match_the_recursion() {
    let (v, k) = alphabet();
    let expected = counts(&leaf_weights(&v, &k), 7);
    let mut got: BTreeMap<u64, u128> = BTreeMap::new();
    for t in enumerate_terms(&v, &k, 7) {
        *got.entry(t.weight()).or_default() += 1;
    }
    for w in 1..=7 {
        assert_eq!(got.get(&(w as u64)).copied().unwrap_or(0), expected[w], "weight {w}");
    }
}

#[test]
fn prefix_equals_brute_force_closure() {
    let (v, k) = alphabet();
    let mut all: BTreeSet<Term> = v.iter().map(|n| Term::var(n)).collect();
    all.extend(k.iter().map(|c| Term::Const(c.clone())));
    all.retain(|t| t.weight() <= 4);
    loop {
        let before = all.len();
        let snapshot: Vec<Term> = all.iter().cloned().collect();
        for a in &snapshot {
            all.insert(Term::neg(a.clone()));
            all.insert(Term::exp(a.clone()));
            for b in &snapshot {
                all.insert(Term::add(a.clone(), b.clone()));
                all.insert(Term::mul(a.clone(), b.clone()));
            }
        }
        all.retain(|t| t.weight() <= 4);
        if all.len() == before {
            break;
        }
    }
    let stream: Vec<Term> = enumerate_terms(&v, &k, 4).collect();
    let as_set: BTreeSet<Term> = stream.iter().cloned().collect();
    assert_eq!(as_set.len(), stream.len(), "duplicates in the stream");
    assert_eq!(as_set, all);
}

#[test]
fn enumeration_is_deterministic() {
    let (v, k) = alphabet();
    let a: Vec<Term> = enumerate_terms(&v, &k, 5).collect();
    let mut k2 = k.clone();
    k2.reverse();
    let b: Vec<Term> = enumerate_terms(&v, &k2, 5).collect();
    assert_eq!(a, b);
}
