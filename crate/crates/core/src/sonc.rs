//! Polynomial side: the `f̃` construction, orthant domination, the SONC bound
//! through `sig(f̃)`, and probe-based zero-set classification.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::ExponentVector;
use crate::geometry;
use crate::sage::{self, Bound, SageBound, SageDecomposition};
use crate::signomial::{CompiledSignomial, Flavor, Signomial};
use crate::symmetry::SymmetricSageDecomposition;

/// A sign vector `ω ∈ {±1}ⁿ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrthantSign {
    pub omega: Vec<i8>,
}

impl OrthantSign {
    pub fn positive(n: usize) -> Self {
        Self { omega: vec![1; n] }
    }

    /// All `2ⁿ` sign vectors, `+1` first.
    pub fn all(n: usize) -> Vec<Self> {
        (0..1u64 << n)
            .map(|mask| Self { omega: (0..n).map(|j| if mask >> j & 1 == 1 { -1 } else { 1 }).collect() })
            .collect()
    }

    fn sign_of(&self, e: &ExponentVector) -> f64 {
        let odd = e
            .to_naturals()
            .expect("natural exponents")
            .iter()
            .zip(&self.omega)
            .filter(|(k, w)| *k % 2 == 1 && **w < 0)
            .count();
        if odd % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

fn require_polynomial(f: &Signomial) -> Result<()> {
    match f.flavor() {
        Flavor::Polynomial => Ok(()),
        Flavor::Signomial => Err(Error::Precondition("expected a polynomial".into())),
    }
}

/// Keeps even-exponent terms and replaces every other coefficient by `−|c|`.
pub fn tilde(f: &Signomial) -> Result<Signomial> {
    require_polynomial(f)?;
    let mut out = Signomial::new(f.n(), Flavor::Polynomial);
    for (e, &c) in f.terms() {
        out.add_term(e.clone(), if e.is_even() { c } else { -c.abs() })?;
    }
    Ok(out)
}

/// `f^ω(x) = f(ω₁x₁, …, ωₙxₙ)`.
pub fn reflect(f: &Signomial, omega: &OrthantSign) -> Result<Signomial> {
    require_polynomial(f)?;
    if omega.omega.len() != f.n() {
        return Err(Error::DimensionMismatch { expected: f.n(), found: omega.omega.len() });
    }
    let mut out = Signomial::new(f.n(), Flavor::Polynomial);
    for (e, &c) in f.terms() {
        out.add_term(e.clone(), c * omega.sign_of(e))?;
    }
    Ok(out)
}

/// Some `ω` with `f^ω = f̃`, found by solving the parity conditions over GF(2).
pub fn orthant_dominated(f: &Signomial) -> Result<Option<OrthantSign>> {
    require_polynomial(f)?;
    let n = f.n();
    // Row: odd-coordinate mask, required parity of flipped coordinates.
    let mut rows: Vec<(Vec<bool>, bool)> = Vec::new();
    for (e, &c) in f.terms() {
        if e.is_even() {
            continue;
        }
        let mask: Vec<bool> = e.to_naturals().expect("natural exponents").iter().map(|k| k % 2 == 1).collect();
        rows.push((mask, c > 0.0));
    }
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| rows[i].0[col]) else { continue };
        rows.swap(r, p);
        let (pivot_mask, pivot_rhs) = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row.0[col] {
                for (x, y) in row.0.iter_mut().zip(&pivot_mask) {
                    *x ^= *y;
                }
                row.1 ^= pivot_rhs;
            }
        }
        pivots.push(col);
        r += 1;
    }
    if rows[r..].iter().any(|(_, rhs)| *rhs) {
        return Ok(None);
    }
    let mut omega = vec![1i8; n];
    for (i, &col) in pivots.iter().enumerate() {
        if rows[i].1 {
            omega[col] = -1;
        }
    }
    let omega = OrthantSign { omega };
    debug_assert!(reflect(f, &omega).ok() == tilde(f).ok());
    Ok(Some(omega))
}

#[derive(Clone, Debug, Serialize)]
pub struct OrthantBound {
    pub omega: OrthantSign,
    pub bound: Bound,
}

#[derive(Clone, Debug, Serialize)]
pub struct SoncBound {
    /// `sig(f̃)^SAGE`.
    pub bound: Bound,
    pub sage: SageBound,
    /// Set when `f` is orthant dominated, in which case `f^SONC = min_ω sig(f^ω)^SAGE`.
    pub dominating_orthant: Option<OrthantSign>,
    /// `sig(f^ω)^SAGE` per orthant, when requested.
    pub orthant_bounds: Vec<OrthantBound>,
}

/// `f^SONC = sig(f̃)^SAGE`.
pub fn sonc_bound(f: &Signomial, tol: f64) -> Result<SoncBound> {
    let sage = sage::sage_bound(&tilde(f)?.to_signomial(), tol)?;
    Ok(SoncBound { bound: sage.bound, sage, dominating_orthant: orthant_dominated(f)?, orthant_bounds: Vec::new() })
}

/// `sonc_bound` plus `sig(f^ω)^SAGE` for every orthant.
pub fn sonc_bound_with_orthants(f: &Signomial, tol: f64) -> Result<SoncBound> {
    let mut out = sonc_bound(f, tol)?;
    for omega in OrthantSign::all(f.n()) {
        let bound = sage::sage_bound(&reflect(f, &omega)?.to_signomial(), tol)?.bound;
        out.orthant_bounds.push(OrthantBound { omega, bound });
    }
    Ok(out)
}

/// Every non-even point of `support` lies in `conv(even points ∪ {0})`.
pub fn full_dimensionality_check(support: &[ExponentVector]) -> Result<bool> {
    let even: Vec<ExponentVector> = support.iter().filter(|e| e.is_even()).cloned().collect();
    for e in support.iter().filter(|e| !e.is_even()) {
        if !e.is_natural() {
            return Err(Error::NonPolynomialExponent(e.to_string()));
        }
        let mut gens = even.clone();
        gens.push(ExponentVector::zeros(e.dim()));
        if geometry::convex_combination(e, &gens)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZeroSetClass {
    Empty,
    /// The single point `(t0, …, t0)` (for polynomials, in the positive orthant).
    DiagonalPoint { t0: f64 },
    Diagonal,
    /// `{Σ xᵢ = tau}`.
    HyperplaneSum { tau: f64 },
    /// `{Π xᵢ = tau}` in the positive orthant.
    ProductHypersurface { tau: f64 },
    NotClassified { reason: String },
}

/// A certificate that `f` is nonnegative.
#[derive(Clone, Copy, Debug)]
pub enum Certificate<'a> {
    Sage(&'a SageDecomposition),
    Symmetric(&'a SymmetricSageDecomposition),
}

#[derive(Clone, Debug)]
pub struct ProbeOptions {
    pub tol: f64,
    pub seed: u64,
    pub probes: usize,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self { tol: 1e-8, seed: 0, probes: 1000 }
    }
}

/// Classifies the zero set of a certified symmetric nonnegative `f`.
/// Polynomials are classified in the positive orthant through `sig(f)`.
pub fn classify_zero_set(f: &Signomial, certificate: Certificate<'_>, options: &ProbeOptions) -> Result<ZeroSetClass> {
    let sig = f.to_signomial();
    if !sig.is_symmetric(1e-9 * (1.0 + sig.max_abs_coefficient())) {
        return Err(Error::NotSymmetric);
    }
    let rebuilt = match certificate {
        Certificate::Sage(d) => d.reconstruct(sig.n(), Flavor::Signomial)?,
        Certificate::Symmetric(d) => d.reconstruct()?.to_signomial(),
    };
    if rebuilt.distance(&sig) > 1e-6 * (1.0 + sig.max_abs_coefficient()) {
        return Err(Error::Precondition("certificate does not reconstruct f".into()));
    }
    let class = classify_signomial(&sig, options);
    Ok(match (f.flavor(), class) {
        (Flavor::Polynomial, ZeroSetClass::DiagonalPoint { t0 }) => ZeroSetClass::DiagonalPoint { t0: t0.exp() },
        (Flavor::Polynomial, ZeroSetClass::HyperplaneSum { tau }) => ZeroSetClass::ProductHypersurface { tau: tau.exp() },
        (_, other) => other,
    })
}

/// `f/Σ|terms|`, bounded by 1 in absolute value.
fn relative(c: &CompiledSignomial, x: &[f64]) -> f64 {
    let m = c.magnitude(x);
    if m == 0.0 {
        0.0
    } else {
        c.eval_unchecked(x) / m
    }
}

fn golden_min(lo: f64, hi: f64, phi: &dyn Fn(f64) -> f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (phi(x1), phi(x2));
    for _ in 0..200 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = phi(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = phi(x2);
        }
        if b - a < 1e-14 * (1.0 + a.abs()) {
            break;
        }
    }
    let t = 0.5 * (a + b);
    (t, phi(t))
}

/// Global minimum of `phi` over `[lo, hi]` from a grid plus golden refinement.
fn grid_min(lo: f64, hi: f64, steps: usize, phi: &dyn Fn(f64) -> f64) -> (f64, f64) {
    let h = (hi - lo) / steps as f64;
    let (k, _) = (0..=steps)
        .map(|k| (k, phi(lo + h * k as f64)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    let a = (lo + h * k as f64 - h).max(lo);
    let b = (lo + h * k as f64 + h).min(hi);
    golden_min(a, b, phi)
}

fn classify_signomial(f: &Signomial, options: &ProbeOptions) -> ZeroSetClass {
    let n = f.n();
    let c = f.compile();
    let scale = f.max_abs_coefficient().max(f64::MIN_POSITIVE);
    let zero_tol = options.tol;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let diag = |t: f64| vec![t; n];
    let h = f.diagonalize();
    let h_identically_zero = h.terms().values().all(|v| v.abs() <= zero_tol * scale);

    let is_zero = |x: &[f64]| relative(&c, x).abs() <= zero_tol || c.eval_unchecked(x).abs() <= zero_tol * scale;
    let is_positive = |x: &[f64]| c.eval_unchecked(x) > zero_tol * scale.min(1.0).max(c.magnitude(x) * 1e-12);

    let perp = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        loop {
            let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mean = v.iter().sum::<f64>() / n as f64;
            v.iter_mut().for_each(|x| *x -= mean);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-3 {
                return v.into_iter().map(|x| x / norm).collect();
            }
        }
    };

    if h_identically_zero {
        if n == 1 {
            return ZeroSetClass::NotClassified { reason: "f vanishes identically".into() };
        }
        for _ in 0..options.probes {
            let s = rng.random_range(-3.0..3.0);
            if !is_zero(&diag(s)) {
                return ZeroSetClass::NotClassified { reason: format!("h vanishes but f({s}, …) does not") };
            }
            let delta = rng.random_range(0.05..1.0);
            let v = perp(&mut rng);
            let x: Vec<f64> = v.iter().map(|vi| s + delta * vi).collect();
            if !is_positive(&x) {
                return ZeroSetClass::NotClassified { reason: "zero found off the diagonal".into() };
            }
        }
        return ZeroSetClass::Diagonal;
    }

    let hc = h.compile();
    let phi = |t: f64| relative(&hc, &[t]);
    let (t0, _) = grid_min(-30.0, 30.0, 6000, &phi);
    let x0 = diag(t0);
    if !is_zero(&x0) {
        for _ in 0..options.probes {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            if !is_positive(&x) {
                return ZeroSetClass::NotClassified { reason: "no diagonal zero, yet f vanishes at a probe".into() };
            }
        }
        return ZeroSetClass::Empty;
    }
    if n == 1 {
        return ZeroSetClass::DiagonalPoint { t0 };
    }

    let ladder: Vec<f64> = (0..=16).map(|k| 1e-3 * 10f64.powf(k as f64 / 4.0)).collect();
    let mut on_hyperplane = true;
    'outer: for _ in 0..8 {
        let v = perp(&mut rng);
        for &r in &ladder {
            let x: Vec<f64> = v.iter().map(|vi| t0 + r * vi).collect();
            if !is_zero(&x) {
                on_hyperplane = false;
                break 'outer;
            }
        }
    }

    let unit = 1.0 / (n as f64).sqrt();
    for _ in 0..options.probes {
        let delta = rng.random_range(0.05..1.0);
        if on_hyperplane {
            let v = perp(&mut rng);
            let r = rng.random_range(0.0..3.0);
            let x: Vec<f64> = v.iter().map(|vi| t0 + r * vi).collect();
            if !is_zero(&x) {
                return ZeroSetClass::NotClassified { reason: "hyperplane probe is not a zero".into() };
            }
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let off: Vec<f64> = x.iter().map(|xi| xi + sign * delta * unit).collect();
            if !is_positive(&off) {
                return ZeroSetClass::NotClassified { reason: "zero found off the hyperplane".into() };
            }
        } else {
            let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            v.iter_mut().for_each(|x| *x /= norm);
            let off: Vec<f64> = v.iter().map(|vi| t0 + delta * vi).collect();
            if !is_positive(&off) {
                return ZeroSetClass::NotClassified { reason: "zero found away from the diagonal point".into() };
            }
        }
    }
    if on_hyperplane {
        ZeroSetClass::HyperplaneSum { tau: n as f64 * t0 }
    } else {
        ZeroSetClass::DiagonalPoint { t0 }
    }
}

/// Zeros found in one open orthant by ray searches.
#[derive(Clone, Debug, Serialize)]
pub struct OrthantZeros {
    pub omega: OrthantSign,
    pub zeros: Vec<Vec<f64>>,
}

/// Locates zeros of `f` in every open orthant and reports an incompatibility
/// with the SONC zero-set trichotomy (a single diagonal point, the diagonal or
/// `Π|xᵢ| = τ` per orthant).
pub fn sonc_obstruction(f: &Signomial, seed: u64) -> Result<Option<String>> {
    Ok(obstruction_scan(f, seed, 256)?.0)
}

pub fn obstruction_scan(f: &Signomial, seed: u64, rays: usize) -> Result<(Option<String>, Vec<OrthantZeros>)> {
    require_polynomial(f)?;
    let n = f.n();
    let c = f.compile();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = Vec::new();
    let mut reason = None;
    for omega in OrthantSign::all(n) {
        let mut directions: Vec<Vec<f64>> = vec![vec![1.0; n]];
        for _ in 0..rays {
            directions.push((0..n).map(|_| rng.random_range(0.05..1.0)).collect());
        }
        let mut zeros = Vec::new();
        for u in directions {
            let point = |s: f64| -> Vec<f64> { u.iter().zip(&omega.omega).map(|(ui, &w)| w as f64 * ui * s.exp()).collect() };
            let phi = |s: f64| relative(&c, &point(s));
            let (s, value) = grid_min(-7.0, 7.0, 280, &phi);
            if value.abs() <= 1e-9 {
                zeros.push(point(s));
            }
        }
        if reason.is_none() && zeros.len() >= 2 {
            let logs: Vec<Vec<f64>> = zeros.iter().map(|x| x.iter().map(|v| v.abs().ln()).collect()).collect();
            let on_diagonal = logs.iter().all(|y| {
                let mean = y.iter().sum::<f64>() / n as f64;
                y.iter().all(|v| (v - mean).abs() <= 1e-4 * (1.0 + mean.abs()))
            });
            let sums: Vec<f64> = logs.iter().map(|y| y.iter().sum()).collect();
            let spread = sums.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - sums.iter().cloned().fold(f64::INFINITY, f64::min);
            if !on_diagonal && spread > 1e-4 {
                reason = Some(format!(
                    "zeros in orthant {:?} are neither on the diagonal nor on a level set of Π|xᵢ|, so the zero set is outside the SONC trichotomy",
                    omega.omega
                ));
            }
        }
        report.push(OrthantZeros { omega, zeros });
    }
    Ok((reason, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetry;

    fn poly(n: usize, terms: &[(&[i64], f64)]) -> Signomial {
        Signomial::from_int_terms(n, Flavor::Polynomial, terms).unwrap()
    }

    fn ev(c: &[i64]) -> ExponentVector {
        ExponentVector::from_ints(c)
    }

    #[test]
    fn tilde_examples() {
        let f = poly(1, &[(&[3], 1.0), (&[2], 1.0)]);
        assert_eq!(tilde(&f).unwrap(), poly(1, &[(&[3], -1.0), (&[2], 1.0)]));
        let g = poly(2, &[(&[4, 0], 1.0), (&[0, 4], 1.0), (&[2, 2], 3.0), (&[2, 1], -2.0), (&[1, 2], -2.0)]);
        assert_eq!(tilde(&g).unwrap(), g);
    }

    #[test]
    fn domination() {
        let f = poly(2, &[(&[4, 0], 1.0), (&[0, 4], 1.0), (&[2, 2], -2.0), (&[3, 1], 1.0)]);
        let omega = orthant_dominated(&f).unwrap().unwrap();
        assert_eq!(omega.omega, vec![-1, 1]);
        assert_eq!(reflect(&f, &omega).unwrap(), tilde(&f).unwrap());
        let even = poly(2, &[(&[2, 0], 1.0), (&[0, 2], -1.0)]);
        assert_eq!(orthant_dominated(&even).unwrap().unwrap(), OrthantSign::positive(2));
        // x y + x y² + x² y: parities force contradictory flips.
        let bad = poly(2, &[(&[1, 1], 1.0), (&[1, 2], 1.0), (&[2, 1], 1.0), (&[2, 2], 1.0)]);
        assert!(orthant_dominated(&bad).unwrap().is_none());
    }

    #[test]
    fn full_dimensionality() {
        assert!(full_dimensionality_check(&[ev(&[6, 0]), ev(&[0, 6]), ev(&[3, 3])]).unwrap());
        assert!(!full_dimensionality_check(&[ev(&[2, 0]), ev(&[1, 1])]).unwrap());
        assert!(full_dimensionality_check(&[ev(&[2, 0]), ev(&[0, 2])]).unwrap());
    }

    #[test]
    fn quartic_sonc_bound() {
        let f = poly(2, &[(&[4, 0], 1.0), (&[0, 4], 1.0), (&[2, 2], 10.0), (&[2, 1], -2.0), (&[1, 2], -2.0)]);
        let b = sonc_bound(&f, 1e-10).unwrap();
        assert!((b.bound.value() + 0.02).abs() < 1e-7, "{:?}", b.bound);
    }

    fn g_shift(n: usize, gamma: f64) -> Signomial {
        let mut f = Signomial::new(n, Flavor::Signomial);
        for i in 0..n {
            let mut e = vec![0i64; n];
            e[i] = 1;
            f.add_term(ExponentVector::from_ints(&e), (-gamma).exp()).unwrap();
            e[i] = -1;
            f.add_term(ExponentVector::from_ints(&e), gamma.exp()).unwrap();
        }
        f.add_term(ExponentVector::zeros(n), -2.0 * n as f64).unwrap();
        f
    }

    fn certified(f: &Signomial) -> SymmetricSageDecomposition {
        symmetry::is_symmetric_sage(f, &crate::SupportSplit::by_sign(f), 1e-9).unwrap().expect("certified")
    }

    #[test]
    fn zero_set_point() {
        let f = g_shift(3, 0.4);
        let d = certified(&f);
        match classify_zero_set(&f, Certificate::Symmetric(&d), &ProbeOptions::default()).unwrap() {
            ZeroSetClass::DiagonalPoint { t0 } => assert!((t0 - 0.4).abs() < 1e-6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_set_diagonal_and_hyperplane() {
        let n = 3;
        let mut f = Signomial::new(n, Flavor::Signomial);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let mut e = vec![0i64; n];
                    e[i] = 1;
                    e[j] = -1;
                    f.add_term(ExponentVector::from_ints(&e), 1.0).unwrap();
                    f.add_term(ExponentVector::zeros(n), -1.0).unwrap();
                }
            }
        }
        let d = certified(&f);
        assert_eq!(classify_zero_set(&f, Certificate::Symmetric(&d), &ProbeOptions::default()).unwrap(), ZeroSetClass::Diagonal);

        let tau: f64 = 0.9;
        let h = Signomial::from_int_terms(3, Flavor::Signomial, &[(&[1, 1, 1], (-tau).exp()), (&[-1, -1, -1], tau.exp()), (&[0, 0, 0], -2.0)])
            .unwrap();
        let d = certified(&h);
        match classify_zero_set(&h, Certificate::Symmetric(&d), &ProbeOptions::default()).unwrap() {
            ZeroSetClass::HyperplaneSum { tau: t } => assert!((t - tau).abs() < 1e-6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn obstructions() {
        // (1 − x² − y²)²
        let circle = poly(
            2,
            &[(&[0, 0], 1.0), (&[2, 0], -2.0), (&[0, 2], -2.0), (&[4, 0], 1.0), (&[0, 4], 1.0), (&[2, 2], 2.0)],
        );
        assert!(sonc_obstruction(&circle, 1).unwrap().is_some());
        assert!(sonc_obstruction(&poly(1, &[(&[2], 1.0)]), 1).unwrap().is_none());
        let diagonals = poly(2, &[(&[4, 0], 1.0), (&[0, 4], 1.0), (&[2, 2], -2.0)]);
        assert!(sonc_obstruction(&diagonals, 1).unwrap().is_none());
    }
}
