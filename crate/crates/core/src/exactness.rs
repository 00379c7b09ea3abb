//! The diagonal exactness class: symmetric signomials with one positive orbit,
//! negative orbits inside `conv(𝒜 ∪ {0})` and a free constant. For these the
//! SAGE bound equals the global infimum, which is attained on the diagonal.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::age::{self, AgeCertificate};
use crate::error::{Error, Result};
use crate::exponent::{rational_to_f64, serde_q, ExponentVector, Rational};
use crate::geometry::{self, HullStatus, HullWitness};
use crate::signomial::{serialize_coefficients, Flavor, Signomial};
use crate::symmetry::{self, SymmetricPiece, SymmetricSageDecomposition, SymmetrizeMode};

const SYMMETRY_TOL: f64 = 1e-9;

/// Univariate restriction data of a class member, `h(t) = f(t, …, t)`.
#[derive(Clone, Debug, Serialize)]
pub struct DiagonalProfile {
    pub alpha_hat: ExponentVector,
    #[serde(serialize_with = "serde_q::scalar")]
    pub a: Rational,
    pub beta_hats: Vec<ExponentVector>,
    #[serde(serialize_with = "serde_q::vec")]
    pub b: Vec<Rational>,
    pub positive_orbit_size: u128,
    pub negative_orbit_sizes: Vec<u128>,
    pub c: f64,
    pub d: Vec<f64>,
    pub w: f64,
    pub t0: f64,
    pub h_at_t0: f64,
}

impl DiagonalProfile {
    /// `h` as an `n = 1` signomial.
    pub fn diagonalization(&self) -> Signomial {
        let mut h = Signomial::new(1, Flavor::Signomial);
        let one = |q: &Rational| ExponentVector::new(vec![q.clone()]);
        h.add_term(one(&self.a), self.c * self.positive_orbit_size as f64).expect("finite");
        for ((b, d), size) in self.b.iter().zip(&self.d).zip(&self.negative_orbit_sizes) {
            h.add_term(one(b), -d * *size as f64).expect("finite");
        }
        h.add_term(ExponentVector::zeros(1), self.w).expect("finite");
        h
    }
}

/// Data of one `g_i` built from the diagonal minimizer.
#[derive(Clone, Debug, Serialize)]
pub struct OrbitPiece {
    pub beta_hat: ExponentVector,
    pub lambda0: f64,
    #[serde(serialize_with = "serialize_coefficients")]
    pub lambda: BTreeMap<ExponentVector, f64>,
    pub m: f64,
    pub u: f64,
    pub c0: f64,
    #[serde(serialize_with = "serialize_coefficients")]
    pub c_alpha: BTreeMap<ExponentVector, f64>,
    pub g: Signomial,
    pub certificate: AgeCertificate,
    /// `D(ν, e·c)` for `ν = d·λ`, expected to equal `−d`.
    pub entropy: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactnessCertificate {
    pub profile: DiagonalProfile,
    pub pieces: Vec<OrbitPiece>,
    pub minimizer: Vec<f64>,
    pub bound: f64,
    /// Largest coefficient error of `Σ_i Σ_σ σ g_i` against `f − bound`.
    pub reassembly_error: f64,
}

impl ExactnessCertificate {
    pub fn to_symmetric_decomposition(&self, n: usize) -> SymmetricSageDecomposition {
        let pieces = self
            .pieces
            .iter()
            .map(|p| SymmetricPiece {
                beta_hat: p.beta_hat.clone(),
                g: p.g.clone(),
                certificate: p.certificate.clone(),
                cosets: symmetry::orbit_size(&p.beta_hat),
                stabilizer_invariant: true,
            })
            .collect();
        SymmetricSageDecomposition { pieces, remainder: Signomial::new(n, Flavor::Signomial) }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ExactnessDecision {
    Nonnegative { bound: f64, certificate: Box<ExactnessCertificate> },
    NegativeMinimum { bound: f64, certificate: Box<ExactnessCertificate> },
    NotInClass { reason: String, boundary_only: bool },
}

/// Matched class data before the root is known.
#[derive(Clone, Debug)]
pub struct ExactnessClass {
    pub alpha_hat: ExponentVector,
    pub c: f64,
    pub orbits: Vec<(ExponentVector, f64)>,
    pub w: f64,
    /// Which `β̂ᵢ` lie on the boundary (relaxed mode only).
    pub on_boundary: Vec<bool>,
    witnesses: Vec<(Rational, Vec<Rational>)>,
    points: Vec<ExponentVector>,
}

struct Mismatch {
    reason: String,
    boundary_only: bool,
}

fn mismatch(reason: impl Into<String>) -> Mismatch {
    Mismatch { reason: reason.into(), boundary_only: false }
}

fn classify(f: &Signomial, relaxed: bool) -> std::result::Result<ExactnessClass, Mismatch> {
    let n = f.n();
    if !f.is_symmetric(SYMMETRY_TOL * (1.0 + f.max_abs_coefficient())) {
        return Err(mismatch("f is not symmetric"));
    }
    let zero = ExponentVector::zeros(n);
    let mut positive: BTreeMap<ExponentVector, f64> = BTreeMap::new();
    let mut negative: BTreeMap<ExponentVector, f64> = BTreeMap::new();
    for (e, &c) in f.terms() {
        if *e == zero {
            continue;
        }
        let rep = e.sorted_desc();
        let target = if c > 0.0 { &mut positive } else { &mut negative };
        target.entry(rep).or_insert(c);
    }
    if positive.len() != 1 {
        return Err(mismatch(format!("expected one positive orbit, found {}", positive.len())));
    }
    let (alpha_hat, c) = positive.into_iter().next().expect("one orbit");
    let points = symmetry::orbit_points(&alpha_hat);
    let a = alpha_hat.sum();
    if a.is_zero() {
        return Err(mismatch("positive orbit has coordinate sum 0"));
    }
    let mut orbits = Vec::new();
    let mut on_boundary = Vec::new();
    let mut witnesses = Vec::new();
    let mut boundary_blocked = false;
    for (beta, coef) in negative {
        let hull = geometry::hull_locate(&beta, &points, true).map_err(|e| mismatch(e.to_string()))?;
        let interior = hull.status == HullStatus::Interior;
        if !interior {
            let allowed = relaxed
                && hull.status != HullStatus::Outside
                && geometry::minimal_face(&beta, &{
                    let mut g = points.clone();
                    g.push(zero.clone());
                    g
                })
                .ok()
                .flatten()
                .is_some_and(|face| face.indices().len() > 1);
            if !allowed {
                if hull.status != HullStatus::Outside {
                    boundary_blocked = true;
                }
                return Err(Mismatch {
                    reason: format!("{beta} is not in the interior of conv(orbit of {alpha_hat} ∪ {{0}})"),
                    boundary_only: boundary_blocked && !relaxed,
                });
            }
        }
        if beta.sum().is_zero() {
            return Err(mismatch(format!("{beta} has coordinate sum 0")));
        }
        let HullWitness::Barycentric { origin, weights } = hull.witness else {
            return Err(mismatch("missing barycentric witness"));
        };
        witnesses.push((origin.unwrap_or_else(Rational::zero), weights));
        on_boundary.push(!interior);
        orbits.push((beta, -coef));
    }
    if relaxed {
        let edge: f64 = orbits
            .iter()
            .filter(|(b, _)| b.sum() == a)
            .map(|(b, d)| d / c * symmetry::orbit_size(b) as f64)
            .sum();
        if symmetry::orbit_size(&alpha_hat) as f64 - edge <= 0.0 {
            return Err(mismatch("orbits on conv(𝒜) carry too much weight for a unique critical point"));
        }
    }
    Ok(ExactnessClass { alpha_hat, c, orbits, w: f.constant_term(), on_boundary, witnesses, points })
}

/// Class data, or `None` when `f` is not of the required shape.
pub fn match_exactness_class(f: &Signomial, relaxed: bool) -> Option<ExactnessClass> {
    classify(f, relaxed).ok()
}

/// Unique real critical point of a univariate signomial whose derivative has
/// exactly one sign change.
pub fn descartes_root(h: &Signomial) -> Result<f64> {
    if h.n() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: h.n() });
    }
    let deriv: Vec<(f64, f64)> = h
        .terms()
        .iter()
        .map(|(e, &c)| (rational_to_f64(&e.coords()[0]), c))
        .filter(|(e, _)| *e != 0.0)
        .map(|(e, c)| (e, e * c))
        .filter(|(_, c)| *c != 0.0)
        .collect();
    let changes = deriv.windows(2).filter(|w| w[0].1.signum() != w[1].1.signum()).count();
    if changes != 1 {
        return Err(Error::Precondition(format!("h' has {changes} sign changes, expected exactly one")));
    }
    let e_min = deriv.first().expect("two terms").0;
    let e_max = deriv.last().expect("two terms").0;
    // h'(t)·e^{−e_ref·t}, with e_ref chosen so no term overflows.
    let scaled = |t: f64| -> f64 {
        let r = if t >= 0.0 { e_max } else { e_min };
        deriv.iter().map(|(e, c)| c * ((e - r) * t).exp()).sum()
    };
    let sign_hi = deriv.last().expect("nonempty").1.signum();
    let mut lo = -1.0;
    let mut hi = 1.0;
    while scaled(lo).signum() == sign_hi {
        lo *= 2.0;
        if lo < -1e6 {
            return Err(Error::Numerical("could not bracket the critical point".into()));
        }
    }
    while scaled(hi).signum() != sign_hi {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Numerical("could not bracket the critical point".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if scaled(mid).signum() == sign_hi {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    let value = |t: f64| -> (f64, f64, f64) {
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        let mut mag = 0.0f64;
        for (e, c) in &deriv {
            let x = (e * t).exp();
            d1 += c * x;
            d2 += c * e * x;
            mag = mag.max((c * x).abs());
        }
        (d1, d2, mag)
    };
    for _ in 0..8 {
        let (d1, d2, mag) = value(t);
        if d1.abs() <= 1e-12 * mag || d2 == 0.0 {
            break;
        }
        let next = t - d1 / d2;
        if !(next > lo && next < hi) {
            break;
        }
        t = next;
    }
    Ok(t)
}

impl ExactnessClass {
    pub fn profile(&self) -> Result<DiagonalProfile> {
        let mut profile = DiagonalProfile {
            alpha_hat: self.alpha_hat.clone(),
            a: self.alpha_hat.sum(),
            beta_hats: self.orbits.iter().map(|(b, _)| b.clone()).collect(),
            b: self.orbits.iter().map(|(b, _)| b.sum()).collect(),
            positive_orbit_size: symmetry::orbit_size(&self.alpha_hat),
            negative_orbit_sizes: self.orbits.iter().map(|(b, _)| symmetry::orbit_size(b)).collect(),
            c: self.c,
            d: self.orbits.iter().map(|(_, d)| *d).collect(),
            w: self.w,
            t0: 0.0,
            h_at_t0: 0.0,
        };
        let h = profile.diagonalization();
        profile.t0 = descartes_root(&h)?;
        profile.h_at_t0 = h.evaluate(&[profile.t0])?;
        Ok(profile)
    }
}

/// Builds the explicit symmetric SAGE certificate of `f − h(t₀)`.
pub fn build_exactness_certificate(f: &Signomial, relaxed: bool) -> Result<ExactnessCertificate> {
    let class = classify(f, relaxed).map_err(|m| Error::Precondition(m.reason))?;
    certificate_for(f, &class)
}

fn certificate_for(f: &Signomial, class: &ExactnessClass) -> Result<ExactnessCertificate> {
    let n = f.n();
    let profile = class.profile()?;
    let t0 = profile.t0;
    let c = class.c;
    let a = rational_to_f64(&profile.a);
    let size_a = profile.positive_orbit_size as f64;
    let zero = ExponentVector::zeros(n);
    let mut pieces = Vec::new();
    for (i, (beta, d_raw)) in class.orbits.iter().enumerate() {
        // Work with c normalized to 1, rescale at the end.
        let d = d_raw / c;
        let b = rational_to_f64(&profile.b[i]);
        let size_b = profile.negative_orbit_sizes[i] as f64;
        let (origin, weights) = &class.witnesses[i];
        let lambda0 = rational_to_f64(origin);
        let expected0 = (&profile.a - &profile.b[i]) / &profile.a;
        if (origin - &expected0).abs() > Rational::zero() {
            return Err(Error::Numerical(format!("witness for {beta} has origin weight {origin}, expected {expected0}")));
        }
        // Stab(β̂)-average of the witness: mean over each Stab(β̂)-orbit of 𝒜.
        let mut groups: BTreeMap<ExponentVector, Vec<usize>> = BTreeMap::new();
        for (k, p) in class.points.iter().enumerate() {
            groups.entry(symmetry::stabilizer_canonical(p, beta)).or_default().push(k);
        }
        let mut lambda = BTreeMap::new();
        for members in groups.values() {
            let total = members.iter().fold(Rational::zero(), |acc, &k| acc + &weights[k]);
            let mean = rational_to_f64(&total) / members.len() as f64;
            for &k in members {
                lambda.insert(class.points[k].clone(), mean);
            }
        }
        let m = a * size_a / (b * size_b);
        let u = d / m * (t0 * (b - a)).exp();
        let c0 = d * lambda0 * (t0 * b).exp();
        let c_alpha: BTreeMap<ExponentVector, f64> = lambda.iter().map(|(e, l)| (e.clone(), u * m * l)).collect();

        let mut nu_map = BTreeMap::new();
        let mut c_map = BTreeMap::new();
        if lambda0 > 0.0 {
            nu_map.insert(zero.clone(), d * lambda0);
            c_map.insert(zero.clone(), c0);
        }
        for (e, l) in &lambda {
            if *l > 0.0 {
                nu_map.insert(e.clone(), d * l);
                c_map.insert(e.clone(), c_alpha[e]);
            }
        }
        let entropy = age::relative_entropy(&nu_map, &c_map) * c;

        let mut g = Signomial::new(n, f.flavor());
        g.add_term(zero.clone(), c0 * c)?;
        for (e, v) in &c_alpha {
            g.add_term(e.clone(), v * c)?;
        }
        g.add_term(beta.clone(), -d_raw)?;
        let certificate = age::is_age(&g, beta, 1e-8 * (1.0 + g.max_abs_coefficient()))?
            .ok_or_else(|| Error::Numerical(format!("piece for {beta} failed re-verification")))?;
        pieces.push(OrbitPiece {
            beta_hat: beta.clone(),
            lambda0,
            lambda,
            m,
            u,
            c0: c0 * c,
            c_alpha: c_alpha.into_iter().map(|(e, v)| (e, v * c)).collect(),
            g,
            certificate,
            entropy,
        });
    }
    let bound = profile.h_at_t0;
    let mut total = Signomial::new(n, f.flavor());
    for p in &pieces {
        total = total.plus(&symmetry::symmetrize(&p.g, &SymmetrizeMode::CosetsOf(p.beta_hat.clone()), SYMMETRY_TOL)?)?;
    }
    let reassembly_error = total.distance(&f.shifted(-bound));
    Ok(ExactnessCertificate { profile, pieces, minimizer: vec![t0; n], bound, reassembly_error })
}

/// Decides nonnegativity for members of the class through `h(t₀)`.
pub fn exactness_decide(f: &Signomial, relaxed: bool, tol: f64) -> Result<ExactnessDecision> {
    let class = match classify(f, relaxed) {
        Ok(c) => c,
        Err(m) => return Ok(ExactnessDecision::NotInClass { reason: m.reason, boundary_only: m.boundary_only }),
    };
    let certificate = certificate_for(f, &class)?;
    let bound = certificate.bound;
    let scale = 1.0 + f.max_abs_coefficient();
    Ok(if bound >= -tol * scale {
        ExactnessDecision::Nonnegative { bound, certificate: Box::new(certificate) }
    } else {
        ExactnessDecision::NegativeMinimum { bound, certificate: Box::new(certificate) }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hexagon(w: f64) -> Signomial {
        Signomial::from_int_terms(
            3,
            Flavor::Signomial,
            &[
                (&[4, 0, 0], 1.0),
                (&[0, 4, 0], 1.0),
                (&[0, 0, 4], 1.0),
                (&[1, 1, 0], -5.0),
                (&[1, 0, 1], -5.0),
                (&[0, 1, 1], -5.0),
                (&[1, 1, 1], -6.0),
                (&[0, 0, 0], w),
            ],
        )
        .unwrap()
    }

    fn uni(terms: &[(i64, f64)]) -> Signomial {
        let t: Vec<(Vec<i64>, f64)> = terms.iter().map(|&(e, c)| (vec![e], c)).collect();
        let refs: Vec<(&[i64], f64)> = t.iter().map(|(e, c)| (e.as_slice(), *c)).collect();
        Signomial::from_int_terms(1, Flavor::Signomial, &refs).unwrap()
    }

    #[test]
    fn roots() {
        let t = descartes_root(&uni(&[(4, 3.0), (2, -15.0), (3, -6.0)])).unwrap();
        assert!((t - 2.5f64.ln()).abs() < 1e-12);
        assert!(descartes_root(&uni(&[(2, 1.0), (1, -2.0)])).unwrap().abs() < 1e-12);
        let t = descartes_root(&uni(&[(2, 1.0), (1, -1.0)])).unwrap();
        assert!((t.exp() - 0.5).abs() < 1e-12);
        assert!(descartes_root(&uni(&[(2, 1.0), (1, 1.0)])).is_err());
    }

    #[test]
    fn hexagon_needs_relaxed_mode() {
        assert!(match_exactness_class(&hexagon(0.0), false).is_none());
        let decision = exactness_decide(&hexagon(0.0), false, 1e-9).unwrap();
        assert!(matches!(decision, ExactnessDecision::NotInClass { boundary_only: true, .. }));
        let class = match_exactness_class(&hexagon(0.0), true).unwrap();
        assert_eq!(class.orbits.len(), 2);
        assert_eq!(class.on_boundary, vec![true, false]);
    }

    #[test]
    fn hexagon_certificate() {
        let cert = build_exactness_certificate(&hexagon(0.0), true).unwrap();
        assert!((cert.profile.t0 - 2.5f64.ln()).abs() < 1e-10);
        assert!((cert.bound + 1125.0 / 16.0).abs() < 1e-8);
        assert!(cert.reassembly_error < 1e-8, "{}", cert.reassembly_error);
        let us: f64 = cert.pieces.iter().map(|p| p.u).sum();
        assert!((us - 1.0).abs() < 1e-9);
        for (p, d) in cert.pieces.iter().zip(&cert.profile.d) {
            assert!((p.entropy + d).abs() < 1e-8 * d, "{} vs {}", p.entropy, d);
        }
        let dec = cert.to_symmetric_decomposition(3);
        assert!(dec.reconstruct().unwrap().distance(&hexagon(1125.0 / 16.0)) < 1e-8);
    }

    #[test]
    fn hexagon_decisions() {
        let yes = exactness_decide(&hexagon(1125.0 / 16.0), true, 1e-9).unwrap();
        assert!(matches!(yes, ExactnessDecision::Nonnegative { .. }));
        match exactness_decide(&hexagon(70.0), true, 1e-9).unwrap() {
            ExactnessDecision::NegativeMinimum { bound, .. } => assert!((bound + 5.0 / 16.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn two_positive_orbits_do_not_match() {
        let f = Signomial::from_int_terms(
            2,
            Flavor::Signomial,
            &[(&[2, 0], 1.0), (&[0, 2], 1.0), (&[4, 0], 1.0), (&[0, 4], 1.0), (&[1, 1], -1.0)],
        )
        .unwrap();
        assert!(match_exactness_class(&f, true).is_none());
    }

    #[test]
    fn quadratic_mean_example() {
        // m_(2) − m_(1) for n = 2: ½(e^{2x}+e^{2y}) − ½(e^x+e^y), minimum −¼.
        let f = Signomial::from_int_terms(2, Flavor::Signomial, &[(&[2, 0], 0.5), (&[0, 2], 0.5), (&[1, 0], -0.5), (&[0, 1], -0.5)])
            .unwrap();
        assert!(build_exactness_certificate(&f, false).is_err());
        let cert = build_exactness_certificate(&f, true).unwrap();
        assert!((cert.bound + 0.25).abs() < 1e-12);
        assert!((cert.profile.t0.exp() - 0.5).abs() < 1e-12);
        assert!(cert.reassembly_error < 1e-10);
    }
}
