#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use symsage::exponent::rational_to_f64;
use symsage::{ExponentVector, Flavor, Rational, Signomial};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(p: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(d))
}

pub fn ev(c: &[i64]) -> ExponentVector {
    ExponentVector::from_ints(c)
}

/// Solves `m·x = r` exactly by Gauss–Jordan; `None` unless the solution is unique.
pub fn solve_exact(m: &[Vec<Rational>], r: &[Rational]) -> Option<Vec<Rational>> {
    let rows = m.len();
    let cols = m.first().map_or(0, |row| row.len());
    let mut a: Vec<Vec<Rational>> = m.iter().zip(r).map(|(row, v)| row.iter().cloned().chain([v.clone()]).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..rows).find(|&i| !a[i][col].is_zero()) else { continue };
        a.swap(row, p);
        let inv = Rational::one() / a[row][col].clone();
        for v in a[row].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        for i in 0..rows {
            if i != row && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in 0..=cols {
                    let delta = f.clone() * a[row][j].clone();
                    a[i][j] = a[i][j].clone() - delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if pivots.len() < cols || a[row..].iter().any(|r| !r[cols].is_zero()) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = a[i][cols].clone();
    }
    Some(x)
}

/// Barycentric weights of `p` in `points`, if they are affinely independent.
pub fn affine_weights(p: &ExponentVector, points: &[ExponentVector]) -> Option<Vec<Rational>> {
    let n = p.dim();
    let mut m: Vec<Vec<Rational>> = (0..n).map(|j| points.iter().map(|g| g.coords()[j].clone()).collect()).collect();
    m.push(vec![Rational::one(); points.len()]);
    let mut r = p.coords().to_vec();
    r.push(Rational::one());
    solve_exact(&m, &r)
}

pub fn affinely_independent(points: &[ExponentVector]) -> bool {
    // Independent iff the first point has unique weights (1, 0, …, 0).
    affine_weights(&points[0], points).is_some()
}

/// Random rational in `[lo, hi]` with denominator from `dens`.
pub fn rand_q(r: &mut ChaCha8Rng, lo: i64, hi: i64, dens: &[i64]) -> Rational {
    let d = dens[r.random_range(0..dens.len())];
    q(r.random_range(lo * d..=hi * d), d)
}

pub fn all_perms(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for i in 0..n {
            if !prefix.contains(&i) {
                prefix.push(i);
                go(prefix, n, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), n, &mut out);
    out
}

pub fn orbit(alpha: &[i64]) -> Vec<Vec<i64>> {
    let mut v: Vec<Vec<i64>> = all_perms(alpha.len()).iter().map(|p| p.iter().map(|&i| alpha[i]).collect()).collect();
    v.sort();
    v.dedup();
    v
}

/// Random symmetric signomial: a positive corner orbit `(d, 0, …)`, a positive
/// constant, and one or two negative interior orbits.
pub fn random_symmetric(r: &mut ChaCha8Rng, n: usize) -> Signomial {
    let deg = r.random_range(2..=4i64) * 2;
    let mut f = Signomial::new(n, Flavor::Signomial);
    let mut corner = vec![0i64; n];
    corner[0] = deg;
    let c = r.random_range(0.5..3.0);
    for e in orbit(&corner) {
        f.add_term(ev(&e), c).unwrap();
    }
    f.add_term(ExponentVector::zeros(n), r.random_range(0.0..3.0)).unwrap();
    for _ in 0..r.random_range(1..=2) {
        let mut inner: Vec<i64> = (0..n).map(|_| r.random_range(0..deg)).collect();
        if inner.iter().sum::<i64>() >= deg || inner.iter().all(|&v| v == 0) {
            inner = vec![0; n];
            inner[0] = 1;
        }
        let d = r.random_range(0.2..4.0);
        for e in orbit(&inner) {
            if f.coefficient(&ev(&e)) == 0.0 {
                f.add_term(ev(&e), -d).unwrap();
            }
        }
    }
    f
}

/// Random point with coordinates in `[-s, s]`.
pub fn rand_point(r: &mut ChaCha8Rng, n: usize, s: f64) -> Vec<f64> {
    (0..n).map(|_| r.random_range(-s..s)).collect()
}

/// Smallest value of `f(x) − floor` relative to `1 + Σ|c_α e^{α·x}|` over samples.
pub fn worst_relative(f: &Signomial, floor: f64, samples: usize, scale: f64, seed: u64) -> f64 {
    let compiled = f.compile();
    let mut r = rng(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let x = rand_point(&mut r, f.n(), scale);
        let v = compiled.eval_unchecked(&x) - floor;
        worst = worst.min(v / (1.0 + compiled.magnitude(&x)));
    }
    worst
}

pub fn is_nonneg_rational(v: &Rational) -> bool {
    !v.is_negative()
}

/// Positive corners `2k·eᵢ`, a positive constant and negative points inside.
pub fn random_signomial(r: &mut impl Rng, n: usize) -> Signomial {
    let mut f = Signomial::new(n, Flavor::Signomial);
    for i in 0..n {
        let mut e = vec![0i64; n];
        e[i] = 2 * r.random_range(1..=3);
        f.add_term(ev(&e), r.random_range(0.5..3.0)).unwrap();
    }
    if r.random_bool(0.3) {
        f.add_term(ev(&vec![-2; n]), r.random_range(0.5..2.0)).unwrap();
    }
    f.add_term(ExponentVector::zeros(n), r.random_range(0.0..2.0)).unwrap();
    for _ in 0..r.random_range(1..=3) {
        let e: Vec<i64> = (0..n).map(|_| r.random_range(-1..=2)).collect();
        if f.coefficient(&ev(&e)) == 0.0 {
            f.add_term(ev(&e), -r.random_range(0.2..3.0)).unwrap();
        }
    }
    f
}

pub struct AgeInstance {
    pub c: BTreeMap<ExponentVector, f64>,
    pub beta: ExponentVector,
}

/// Positive support of 2 to 4 points with `β` a strictly positive combination of them.
pub fn age_instance(r: &mut impl Rng, n: usize) -> Option<AgeInstance> {
    let m = r.random_range(2..=4);
    let mut pts: Vec<ExponentVector> =
        (0..m).map(|_| ev(&(0..n).map(|_| r.random_range(-3..=3)).collect::<Vec<i64>>())).collect();
    pts.sort();
    pts.dedup();
    if pts.len() < 2 {
        return None;
    }
    let w: Vec<i64> = pts.iter().map(|_| r.random_range(1..=4)).collect();
    let total: i64 = w.iter().sum();
    let mut beta = ExponentVector::zeros(n);
    for (p, &wi) in pts.iter().zip(&w) {
        beta = beta.add(&p.scale(&q(wi, total)));
    }
    if pts.contains(&beta) {
        return None;
    }
    let c = pts.into_iter().map(|p| (p, r.random_range(0.3..3.0))).collect();
    Some(AgeInstance { c, beta })
}

/// Vertices of `{ν ≥ 0, Σν = 1, Σν(α − β) = 0}`: the normalized circuits.
fn simplex_vertices(inst: &AgeInstance) -> Vec<Vec<f64>> {
    let pts: Vec<&ExponentVector> = inst.c.keys().collect();
    let mut out = Vec::new();
    for mask in 1u32..(1 << pts.len()) {
        let idx: Vec<usize> = (0..pts.len()).filter(|i| mask & (1 << i) != 0).collect();
        let subset: Vec<ExponentVector> = idx.iter().map(|&i| pts[i].clone()).collect();
        if subset.len() < 2 || !affinely_independent(&subset) {
            continue;
        }
        if let Some(w) = affine_weights(&inst.beta, &subset) {
            if w.iter().all(Signed::is_positive) {
                let mut v = vec![0.0; pts.len()];
                for (&i, wi) in idx.iter().zip(&w) {
                    v[i] = rational_to_f64(wi);
                }
                out.push(v);
            }
        }
    }
    out
}

/// `min D(ν, e·c)` over the feasible cone, by exchange descent on the vertex
/// weights of its normalized slice and the closed-form optimal scaling.
pub fn brute_force_entropy_min(inst: &AgeInstance) -> f64 {
    let verts = simplex_vertices(inst);
    let c: Vec<f64> = inst.c.values().copied().collect();
    let k = |theta: &[f64]| -> f64 {
        (0..c.len())
            .map(|a| {
                let nu: f64 = verts.iter().zip(theta).map(|(v, t)| t * v[a]).sum();
                if nu > 0.0 {
                    nu * (nu / (std::f64::consts::E * c[a])).ln()
                } else {
                    0.0
                }
            })
            .sum()
    };
    let mut theta = vec![1.0 / verts.len() as f64; verts.len()];
    for _ in 0..300 {
        let before = k(&theta);
        for i in 0..verts.len() {
            for j in i + 1..verts.len() {
                // Move mass s from i to j, s ∈ [−θ_j, θ_i]; golden section on a convex slice.
                let (mut lo, mut hi) = (-theta[j], theta[i]);
                let g = (5f64.sqrt() - 1.0) / 2.0;
                let at = |s: f64| {
                    let mut t = theta.clone();
                    t[i] -= s;
                    t[j] += s;
                    k(&t)
                };
                for _ in 0..80 {
                    let a = hi - g * (hi - lo);
                    let b = lo + g * (hi - lo);
                    if at(a) <= at(b) {
                        hi = b;
                    } else {
                        lo = a;
                    }
                }
                let s = 0.5 * (lo + hi);
                if at(s) < k(&theta) {
                    theta[i] -= s;
                    theta[j] += s;
                }
            }
        }
        if (before - k(&theta)).abs() < 1e-16 {
            break;
        }
    }
    // D(sν̂) = s·K + s ln s with Σν̂ = 1 is minimized at s = e^{−K−1}.
    -(-k(&theta) - 1.0).exp()
}
