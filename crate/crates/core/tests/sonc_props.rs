mod common;

use common::{ev, rng};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use symsage::sage::Bound;
use symsage::sonc::{self, OrthantSign};
use symsage::{ExponentVector, Flavor, Signomial};

const TOL: f64 = 1e-9;

/// Bivariate or trivariate polynomial with even corners and a few mixed inner terms.
fn random_polynomial(r: &mut ChaCha8Rng, n: usize) -> Signomial {
    let deg = 2 * r.random_range(2..=3i64);
    let mut f = Signomial::new(n, Flavor::Polynomial);
    for j in 0..n {
        let mut e = vec![0; n];
        e[j] = deg;
        f.add_term(ev(&e), r.random_range(0.5..2.0)).unwrap();
    }
    f.add_term(ExponentVector::zeros(n), r.random_range(0.0..2.0)).unwrap();
    for _ in 0..r.random_range(1..=3) {
        let e: Vec<i64> = loop {
            let e: Vec<i64> = (0..n).map(|_| r.random_range(0..deg)).collect();
            if e.iter().sum::<i64>() < deg && e.iter().any(|&v| v > 0) {
                break e;
            }
        };
        let c = r.random_range(0.2..2.0) * if r.random_bool(0.5) { 1.0 } else { -1.0 };
        f.add_term(ev(&e), c).unwrap();
    }
    f
}

fn value(b: &Bound) -> f64 {
    match b {
        Bound::Finite(v) => *v,
        Bound::Unbounded => f64::NEG_INFINITY,
    }
}

fn le(a: f64, b: f64) -> bool {
    a <= b + 1e-6 * (1.0 + b.abs())
}

#[test]
fn tilde_bound_lies_below_every_orthant() {
    let mut r = rng(91);
    let mut dominated = 0;
    for trial in 0..40 {
        let f = random_polynomial(&mut r, 2 + trial % 2);
        let out = sonc::sonc_bound_with_orthants(&f, TOL).unwrap();
        let sonc = value(&out.bound);
        let min = out.orthant_bounds.iter().map(|o| value(&o.bound)).fold(f64::INFINITY, f64::min);
        for o in &out.orthant_bounds {
            assert!(le(sonc, value(&o.bound)), "{f}: {sonc} vs {:?} {:?}", o.omega, o.bound);
        }
        if let Some(omega) = &out.dominating_orthant {
            dominated += 1;
            assert_eq!(sonc::reflect(&f, omega).unwrap(), sonc::tilde(&f).unwrap());
            if sonc.is_finite() {
                assert!((sonc - min).abs() <= 1e-6 * (1.0 + min.abs()), "{f}: {sonc} vs {min}");
            } else {
                assert_eq!(min, f64::NEG_INFINITY);
            }
        } else {
            assert!(OrthantSign::all(f.n()).iter().all(|w| sonc::reflect(&f, w).unwrap() != sonc::tilde(&f).unwrap()));
        }
        // The bound is a global lower bound on ℝⁿ.
        if sonc.is_finite() {
            let compiled = f.compile();
            for _ in 0..2000 {
                let x: Vec<f64> = (0..f.n()).map(|_| r.random_range(-3.0..3.0)).collect();
                let v = compiled.eval_unchecked(&x);
                assert!(v >= sonc - 1e-8 * (1.0 + compiled.magnitude(&x)), "{f} at {x:?}");
            }
        }
    }
    assert!(dominated > 5);
}

#[test]
fn even_polynomials_are_dominated_by_the_positive_orthant() {
    let mut r = rng(92);
    for _ in 0..30 {
        let mut f = Signomial::new(2, Flavor::Polynomial);
        f.add_term(ev(&[4, 0]), 1.0).unwrap();
        f.add_term(ev(&[0, 4]), 1.0).unwrap();
        f.add_term(ev(&[2, 2]), r.random_range(-2.0..2.0)).unwrap();
        f.add_term(ev(&[2, 0]), r.random_range(-2.0..2.0)).unwrap();
        assert_eq!(sonc::orthant_dominated(&f).unwrap(), Some(OrthantSign::positive(2)));
    }
}

#[test]
fn parity_solution_agrees_with_exhaustive_search() {
    let mut r = rng(93);
    for _ in 0..200 {
        let n = r.random_range(1..=4);
        let mut f = Signomial::new(n, Flavor::Polynomial);
        for _ in 0..r.random_range(1..=5) {
            let e: Vec<i64> = (0..n).map(|_| r.random_range(0..4)).collect();
            f.add_term(ev(&e), r.random_range(-2.0..2.0)).unwrap();
        }
        let target = sonc::tilde(&f).unwrap();
        let exhaustive = OrthantSign::all(n).into_iter().any(|w| sonc::reflect(&f, &w).unwrap() == target);
        let solved = sonc::orthant_dominated(&f).unwrap();
        assert_eq!(solved.is_some(), exhaustive, "{f}");
        if let Some(w) = solved {
            assert_eq!(sonc::reflect(&f, &w).unwrap(), target);
        }
    }
}
