mod common;

use common::{all_perms, random_signomial, random_symmetric, rng, worst_relative};
use rand::Rng;
use symsage::sage::{self, Bound};
use symsage::symmetry;
use symsage::{Flavor, SupportSplit};

const TOL: f64 = 1e-9;

fn same(a: Bound, b: Bound, slack: f64) -> bool {
    match (a, b) {
        (Bound::Finite(x), Bound::Finite(y)) => (x - y).abs() <= slack * (1.0 + y.abs()),
        (Bound::Unbounded, Bound::Unbounded) => true,
        _ => false,
    }
}

#[test]
fn bounds_are_sound_monotone_and_relabeling_invariant() {
    let mut r = rng(31);
    let mut finite = 0;
    for trial in 0..60 {
        let n = 1 + trial % 3;
        let f = random_signomial(&mut r, n);
        let res = sage::sage_bound(&f, TOL).unwrap();
        if let Bound::Finite(lam) = res.bound {
            finite += 1;
            let dec = res.decomposition.as_ref().expect("finite bound carries a decomposition");
            let shifted = f.shifted(-lam);
            assert!(dec.reconstruct(n, Flavor::Signomial).unwrap().distance(&shifted) <= 1e-8);
            assert!(worst_relative(&f, lam, 10_000, 2.0, trial as u64) >= -10.0 * TOL, "{f}");
            for comp in &dec.components {
                assert!(worst_relative(&comp.component, 0.0, 2_000, 2.0, trial as u64) >= -10.0 * TOL);
            }
            let step = 1e-3 * (1.0 + lam.abs());
            let below = f.shifted(-(lam - step));
            let above = f.shifted(-(lam + step));
            assert!(sage::is_sage(&below, &SupportSplit::by_sign(&below), TOL).unwrap().is_some());
            assert!(sage::is_sage(&above, &SupportSplit::by_sign(&above), TOL).unwrap().is_none());
        }
        for perm in all_perms(n).iter().skip(1) {
            let other = sage::sage_bound(&f.permuted(perm), TOL).unwrap().bound;
            assert!(same(other, res.bound, 1e-7), "{f}: {other} vs {}", res.bound);
        }
    }
    assert!(finite > 20, "{finite}");
}

#[test]
fn symmetric_instances_shift_covariance_and_orbit_invariance() {
    let mut r = rng(32);
    let mut finite = 0;
    for trial in 0..100 {
        let n = 2 + trial % 2;
        let f = random_symmetric(&mut r, n);
        let base = sage::sage_bound(&f, TOL).unwrap().bound;
        let c = r.random_range(-3.0..3.0);
        let shifted = sage::sage_bound(&f.shifted(c), TOL).unwrap().bound;
        let expected = match base {
            Bound::Finite(v) => Bound::Finite(v + c),
            Bound::Unbounded => Bound::Unbounded,
        };
        assert!(same(shifted, expected, 1e-7), "{f}: shift {c} gave {shifted}, base {base}");
        let perms = all_perms(n);
        let perm = &perms[r.random_range(0..perms.len())];
        assert!(same(sage::sage_bound(&f.permuted(perm), TOL).unwrap().bound, base, 1e-7));
        let (sym, dec) = symmetry::symmetric_sage_bound(&f, TOL).unwrap();
        assert!(same(sym, base, 1e-7), "{f}: symmetric {sym} vs {base}");
        if let Bound::Finite(v) = sym {
            finite += 1;
            let dec = dec.expect("finite bound carries a decomposition");
            assert!(dec.reconstruct().unwrap().distance(&f.shifted(-v)) <= 1e-8);
        }
    }
    assert!(finite > 40, "{finite}");
}
