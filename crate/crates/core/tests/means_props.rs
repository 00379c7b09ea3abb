mod common;

use std::collections::BTreeMap;

use common::{all_perms, rng};
use rand::Rng;
use symsage::means::{self, Partition};
use symsage::ExponentVector;

fn partitions_up_to(weight: u32) -> Vec<Partition> {
    (1..=weight).flat_map(Partition::all_of).collect()
}

#[test]
fn means_are_orbit_averages_over_all_permutations() {
    for n in 1..=4usize {
        let perms = all_perms(n);
        let fact = perms.len() as f64;
        for alpha in partitions_up_to(5).into_iter().filter(|p| p.len() <= n) {
            let e = alpha.to_exponent(n).unwrap();
            let mut counts: BTreeMap<ExponentVector, u32> = BTreeMap::new();
            for p in &perms {
                *counts.entry(e.permuted(p)).or_default() += 1;
            }
            let m = means::monomial_symmetric(&alpha, n, true).unwrap();
            assert_eq!(m.len(), counts.len());
            for (g, k) in &counts {
                let expected = *k as f64 / fact;
                assert!((m.coefficient(g) - expected).abs() <= 4.0 * f64::EPSILON * expected, "{alpha} at {g}");
            }
            assert!((m.evaluate(&vec![1.0; n]).unwrap() - 1.0).abs() <= 1e-14);
            let unnormalized = means::monomial_symmetric(&alpha, n, false).unwrap();
            assert_eq!(unnormalized.evaluate(&vec![1.0; n]).unwrap(), counts.len() as f64);
        }
    }
}

#[test]
fn muirhead_certificates_are_sound_and_attained() {
    let mut r = rng(111);
    let all = partitions_up_to(5);
    let mut checked = 0;
    for lambda in &all {
        for mu in &all {
            if mu.weight() > lambda.weight() {
                continue;
            }
            let needed = lambda.len().max(mu.len());
            for n in needed.max(lambda.len())..=(lambda.weight() as usize + 2).min(needed + 2) {
                let c = if lambda.weight() == mu.weight() { r.random_range(0.2..=1.0) } else { r.random_range(0.2..3.0) };
                let Some(cert) = means::muirhead_certificate(lambda, mu, c, n).unwrap() else { continue };
                let f = means::monomial_symmetric(lambda, n, true)
                    .unwrap()
                    .minus(&means::monomial_symmetric(mu, n, true).unwrap().scaled(c))
                    .unwrap()
                    .compile();
                checked += 1;
                let samples = if checked % 10 == 0 { 10_000 } else { 500 };
                for _ in 0..samples {
                    let x: Vec<f64> = (0..n).map(|_| r.random_range(0.01..2.0)).collect();
                    let v = f.eval_unchecked(&x) - cert.delta;
                    assert!(v >= -1e-9, "{lambda} vs {mu}, c = {c}, n = {n}: {v} at {x:?}");
                }
                if let Some(t0) = cert.t0 {
                    let at = f.eval_unchecked(&vec![t0; n]);
                    assert!((at - cert.delta).abs() <= 1e-10 * (1.0 + at.abs()), "{lambda} vs {mu}");
                    assert!((cert.verified_bound - cert.delta).abs() <= 1e-9 * (1.0 + cert.delta.abs()));
                }
            }
        }
    }
    assert!(checked > 100, "{checked}");
}

#[test]
fn star_dominance_orders() {
    let n = 6;
    let all = partitions_up_to(6);
    let star = |l: &Partition, m: &Partition| means::dominates_star_partitions(l, m, n).unwrap();
    let mut equal_pairs = 0;
    for l in &all {
        assert!(star(l, l));
        for m in &all {
            let s = star(l, m);
            if s {
                assert!(means::weakly_submajorized(m, l), "{m} ⪯* {l} but not ≺_w");
            }
            if l.weight() == m.weight() {
                equal_pairs += 1;
                assert_eq!(s, means::dominates(l, m).unwrap(), "{l} vs {m}");
            }
        }
    }
    assert_eq!(equal_pairs, 209);
    let small = partitions_up_to(4);
    for a in &small {
        for b in &small {
            if !star(a, b) {
                continue;
            }
            for c in &small {
                if star(b, c) {
                    assert!(star(a, c), "{a} ⪰* {b} ⪰* {c}");
                }
            }
        }
    }
}

#[test]
fn submajorization_does_not_imply_star_dominance() {
    let lambda = Partition::parse("4,2,1").unwrap();
    let mu = Partition::parse("3,3,0").unwrap();
    assert!(means::weakly_submajorized(&mu, &lambda));
    assert!(!means::dominates_star_partitions(&lambda, &mu, 3).unwrap());
    assert!(means::muirhead_certificate(&lambda, &mu, 1.0, 3).unwrap().is_none());
}
