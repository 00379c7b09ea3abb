mod common;

use common::{affine_weights, affinely_independent, ev, rng};
use num_traits::{Signed, Zero};
use rand::Rng;
use symsage::geometry::{self, HullStatus, HullWitness};
use symsage::{ExponentVector, Rational};

fn random_support(r: &mut impl Rng, n: usize, m: usize) -> Vec<ExponentVector> {
    let mut pts: Vec<ExponentVector> = (0..m).map(|_| ev(&(0..n).map(|_| r.random_range(0..4)).collect::<Vec<i64>>())).collect();
    pts.sort();
    pts.dedup();
    pts
}

/// Every subset of size ≥ 2 that is affinely independent with `beta` strictly inside.
fn brute_circuits(support: &[ExponentVector], beta: &ExponentVector) -> Vec<Vec<ExponentVector>> {
    let others: Vec<ExponentVector> = support.iter().filter(|p| *p != beta).cloned().collect();
    let mut out = Vec::new();
    for mask in 1u32..(1 << others.len()) {
        let subset: Vec<ExponentVector> = (0..others.len()).filter(|i| mask & (1 << i) != 0).map(|i| others[i].clone()).collect();
        if subset.len() < 2 || subset.len() > beta.dim() + 1 || !affinely_independent(&subset) {
            continue;
        }
        if let Some(w) = affine_weights(beta, &subset) {
            if w.iter().all(Signed::is_positive) {
                out.push(subset);
            }
        }
    }
    out.sort();
    out
}

#[test]
fn circuits_match_brute_force_and_are_exact() {
    let mut r = rng(11);
    let mut total = 0;
    for trial in 0..150 {
        let n = 1 + trial % 3;
        let m = r.random_range(3..=8);
        let support = random_support(&mut r, n, m);
        let beta = if trial % 4 == 0 {
            support[r.random_range(0..support.len())].clone()
        } else {
            ev(&(0..n).map(|_| r.random_range(1..3)).collect::<Vec<i64>>())
        };
        let found = geometry::enumerate_circuits(&support, &beta, geometry::DEFAULT_CIRCUIT_CAP).unwrap();
        for c in &found {
            let sum: Rational = c.positive_support.iter().map(|(_, w)| w.clone()).sum();
            assert_eq!(sum, Rational::from_integer(1.into()));
            let mut bary = ExponentVector::zeros(n);
            for (a, w) in &c.positive_support {
                bary = bary.add(&a.scale(w));
            }
            assert_eq!(bary, beta);
        }
        let mut got: Vec<Vec<ExponentVector>> =
            found.iter().map(|c| c.positive_support.iter().map(|(a, _)| a.clone()).collect()).collect();
        for g in got.iter_mut() {
            g.sort();
        }
        got.sort();
        assert_eq!(got, brute_circuits(&support, &beta), "support {support:?} beta {beta}");
        total += got.len();
    }
    assert!(total > 100, "{total}");
}

#[test]
fn separating_functionals_separate() {
    let mut r = rng(12);
    let mut outside = 0;
    for trial in 0..300 {
        let n = 1 + trial % 3;
        let m = r.random_range(2..=6);
        let support = random_support(&mut r, n, m);
        let p = ev(&(0..n).map(|_| r.random_range(-1..5)).collect::<Vec<i64>>());
        let with_origin = trial % 2 == 0;
        let hm = geometry::hull_locate(&p, &support, with_origin).unwrap();
        match (&hm.status, &hm.witness) {
            (HullStatus::Outside, HullWitness::Separating { functional, offset }) => {
                outside += 1;
                let dot = |e: &ExponentVector| -> Rational { e.coords().iter().zip(functional).map(|(a, b)| a * b).sum() };
                let max_g = support.iter().map(&dot).max().unwrap();
                let max_g = if with_origin { max_g.max(Rational::zero()) } else { max_g };
                assert!(dot(&p) > max_g);
                assert!(dot(&p) > *offset && *offset >= max_g);
            }
            (HullStatus::Outside, _) => panic!("outside without separating functional"),
            (_, HullWitness::Barycentric { origin, weights }) => {
                let mut sum = origin.clone().unwrap_or_else(Rational::zero);
                let mut comb = ExponentVector::zeros(n);
                for (g, w) in support.iter().zip(weights) {
                    assert!(!w.is_negative());
                    comb = comb.add(&g.scale(w));
                    sum += w;
                }
                assert_eq!(sum, Rational::from_integer(1.into()));
                assert_eq!(comb, p);
            }
            _ => panic!("member without barycentric witness"),
        }
    }
    assert!(outside > 30);
}
