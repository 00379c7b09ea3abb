//! Solver bounds against the closed-form reference families.

use symsage::reference::{self, quadratic_polynomial, quartic_polynomial};
use symsage::sage::Bound;
use symsage::sonc::sonc_bound;
use symsage::{ExponentVector, Flavor, Signomial};

fn poly(n: usize, terms: &[(Vec<i64>, f64)]) -> Signomial {
    Signomial::from_terms(n, Flavor::Polynomial, terms.iter().map(|(e, c)| (ExponentVector::from_ints(e), *c))).unwrap()
}

fn agrees(solver: Bound, reference: Bound) -> bool {
    match (solver, reference) {
        (Bound::Finite(s), Bound::Finite(r)) => (s - r).abs() <= 1e-6f64.max(1e-4 * r.abs()),
        (Bound::Unbounded, Bound::Unbounded) => true,
        _ => false,
    }
}

#[test]
fn quadratic_family_including_threshold_edges() {
    for n in [2usize, 3, 4] {
        let t = 2.0 / (n - 1) as f64;
        for b in [-2.5, -t, -0.5 * t, 0.0, 0.7 * t, t, 1.5, 3.0] {
            for a in [-3.0, 0.0, 0.5, 2.0] {
                let r = reference::quadratic_reference(n, a, b).unwrap();
                let s = sonc_bound(&poly(n, &quadratic_polynomial(n, a, b)), 1e-9).unwrap();
                assert!(agrees(s.bound, r.f_relax), "n={n} a={a} b={b}: solver {} vs {}", s.bound, r.f_relax);
            }
        }
    }
}

#[test]
fn quartic_family() {
    for a in [-3.0, -2.0, -1.0, 0.0, 4.0, 10.0, 22.0, 30.0] {
        for b in [0.0, 1.0, 2.0] {
            let r = reference::quartic_reference(a, b);
            let s = sonc_bound(&poly(2, &quartic_polynomial(a, b)), 1e-9).unwrap();
            assert!(agrees(s.bound, r.f_relax), "a={a} b={b}: solver {} vs {}", s.bound, r.f_relax);
        }
    }
}

#[test]
fn gap_family() {
    for row in reference::gap_growth(&[8, 9, 16]).unwrap() {
        let terms: Vec<(Vec<i64>, f64)> = reference::gap_polynomial(row.k).iter().map(|(e, c)| (e.to_vec(), *c)).collect();
        let s = sonc_bound(&poly(2, &terms), 1e-9).unwrap();
        assert!(agrees(s.bound, Bound::Finite(row.f_sonc)), "k={}: {}", row.k, s.bound);
    }
}
