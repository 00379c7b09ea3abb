//! Monomial symmetric polynomials and means, dominance orders, Muirhead
//! certificates and the non-normalized cone sequence.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::age::{self, AgeCertificate};
use crate::error::{Error, Result};
use crate::exactness;
use crate::exponent::{rational_to_f64, ExponentVector, Rational};
use crate::geometry;
use crate::signomial::{serialize_coefficients, Flavor, Signomial};
use crate::sonc;
use crate::symmetry;
use crate::SupportSplit;

/// An integer partition with parts stored in non-increasing order, zeros dropped.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    pub fn new(mut parts: Vec<u32>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self { parts }
    }

    /// Parses `"4,2,0"` or `"(4, 2, 0)"`.
    pub fn parse(text: &str) -> Result<Self> {
        let inner = text.trim().trim_start_matches('(').trim_end_matches(')');
        if inner.trim().is_empty() {
            return Ok(Self::new(Vec::new()));
        }
        let parts = inner
            .split(',')
            .map(|p| p.trim().parse::<u32>().map_err(|_| Error::InvalidPartition(text.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(parts))
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn weight(&self) -> u32 {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Padded with zeros to length `n`.
    pub fn to_exponent(&self, n: usize) -> Result<ExponentVector> {
        if n < self.len() {
            return Err(Error::Precondition(format!("partition {self} has more than {n} parts")));
        }
        let mut coords: Vec<i64> = self.parts.iter().map(|&p| p as i64).collect();
        coords.resize(n, 0);
        Ok(ExponentVector::from_ints(&coords))
    }

    /// All partitions of `weight`.
    pub fn all_of(weight: u32) -> Vec<Partition> {
        fn go(rest: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
            if rest == 0 {
                out.push(Partition::new(prefix.clone()));
                return;
            }
            for p in (1..=rest.min(max)).rev() {
                prefix.push(p);
                go(rest - p, p, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        go(weight, weight, &mut Vec::new(), &mut out);
        out
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `M_α⁽ⁿ⁾`, or the mean `m_α⁽ⁿ⁾ = M_α⁽ⁿ⁾ / |Sₙ·α|` when `normalized`.
pub fn monomial_symmetric(alpha: &Partition, n: usize, normalized: bool) -> Result<Signomial> {
    let e = alpha.to_exponent(n)?;
    let points = symmetry::orbit_points(&e);
    let coef = if normalized { 1.0 / points.len() as f64 } else { 1.0 };
    Signomial::from_terms(n, Flavor::Polynomial, points.into_iter().map(|p| (p, coef)))
}

fn prefix_sums(parts: &[u32], len: usize) -> Vec<u64> {
    let mut acc = 0u64;
    (0..len)
        .map(|i| {
            acc += *parts.get(i).unwrap_or(&0) as u64;
            acc
        })
        .collect()
}

/// Classical dominance `λ ⪰ μ` for partitions of the same weight.
pub fn dominates(lambda: &Partition, mu: &Partition) -> Result<bool> {
    if lambda.weight() != mu.weight() {
        return Err(Error::Precondition(format!("{lambda} and {mu} have different weights")));
    }
    let len = lambda.len().max(mu.len());
    Ok(prefix_sums(&lambda.parts, len).iter().zip(prefix_sums(&mu.parts, len)).all(|(l, m)| *l >= m))
}

/// `λ ⪰* μ`: `μ ∈ conv({0} ∪ Sₙ·λ)`, decided exactly.
pub fn dominates_star(lambda: &ExponentVector, mu: &ExponentVector) -> Result<bool> {
    if lambda.dim() != mu.dim() {
        return Err(Error::DimensionMismatch { expected: lambda.dim(), found: mu.dim() });
    }
    let mut points = symmetry::orbit_points(lambda);
    points.push(ExponentVector::zeros(lambda.dim()));
    Ok(geometry::convex_combination(mu, &points)?.is_some())
}

pub fn dominates_star_partitions(lambda: &Partition, mu: &Partition, n: usize) -> Result<bool> {
    dominates_star(&lambda.to_exponent(n)?, &mu.to_exponent(n)?)
}

/// Weak submajorization `μ ≺_w λ`.
pub fn weakly_submajorized(mu: &Partition, lambda: &Partition) -> bool {
    let len = lambda.len().max(mu.len());
    prefix_sums(&mu.parts, len).iter().zip(prefix_sums(&lambda.parts, len)).all(|(m, l)| *m <= l)
}

#[derive(Clone, Debug, Serialize)]
pub struct MuirheadCertificate {
    pub lambda: Partition,
    pub mu: Partition,
    pub c: f64,
    pub n: usize,
    /// `m_λ − c·m_μ ≥ delta` on the open positive orthant.
    pub delta: f64,
    /// Diagonal equality point (`x₁ = … = xₙ = t0`), when `|λ| > |μ|`.
    pub t0: Option<f64>,
    /// Convex weights on `Sₙ·λ` recombining to `μ`, when `|λ| = |μ|` and `c = 1`.
    #[serde(serialize_with = "serialize_optional_coefficients")]
    pub hlp_weights: Option<BTreeMap<ExponentVector, f64>>,
    /// Independent bound from the verification route.
    pub verified_bound: f64,
    /// AGE certificate of `Σ ζ_α e^α − e^μ` (equal-weight case).
    pub age: Option<AgeCertificate>,
}

fn serialize_optional_coefficients<S: serde::Serializer>(
    v: &Option<BTreeMap<ExponentVector, f64>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(map) => serialize_coefficients(map, s),
        None => s.serialize_none(),
    }
}

/// `δ = −c·((|λ|−|μ|)/|λ|)·(c|μ|/|λ|)^{|μ|/(|λ|−|μ|)}`.
pub fn muirhead_delta(lambda_weight: f64, mu_weight: f64, c: f64) -> f64 {
    let gap = lambda_weight - mu_weight;
    -c * (gap / lambda_weight) * (c * mu_weight / lambda_weight).powf(mu_weight / gap)
}

/// `t0 = (c|μ|/|λ|)^{1/(|λ|−|μ|)}`.
pub fn muirhead_t0(lambda_weight: f64, mu_weight: f64, c: f64) -> f64 {
    (c * mu_weight / lambda_weight).powf(1.0 / (lambda_weight - mu_weight))
}

/// Certificate for `m_λ⁽ⁿ⁾ − c·m_μ⁽ⁿ⁾ ≥ δ`, or `None` when the inequality is
/// not of the generalized Muirhead form.
pub fn muirhead_certificate(lambda: &Partition, mu: &Partition, c: f64, n: usize) -> Result<Option<MuirheadCertificate>> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Precondition(format!("c must be positive, got {c}")));
    }
    let needed = lambda.len().max(mu.len());
    if n < needed || n == 0 {
        return Err(Error::Precondition(format!("n = {n} is smaller than the partition lengths ({needed})")));
    }
    if mu.is_empty() || lambda.is_empty() {
        return Err(Error::Precondition("λ and μ must be nonzero partitions".into()));
    }
    if !dominates_star_partitions(lambda, mu, n)? {
        return Ok(None);
    }
    let (lw, mw) = (lambda.weight() as f64, mu.weight() as f64);
    let lambda_e = lambda.to_exponent(n)?;
    let mu_e = mu.to_exponent(n)?;
    if lambda.weight() > mu.weight() {
        let delta = muirhead_delta(lw, mw, c);
        let t0 = muirhead_t0(lw, mw, c);
        let f = monomial_symmetric(lambda, n, true)?.minus(&monomial_symmetric(mu, n, true)?.scaled(c))?;
        let cert = exactness::build_exactness_certificate(&f.to_signomial(), true)?;
        let scale = 1.0 + delta.abs();
        if (cert.bound - delta).abs() > 1e-9 * scale || (cert.profile.t0.exp() - t0).abs() > 1e-9 * (1.0 + t0) {
            return Err(Error::Numerical(format!(
                "closed form (δ = {delta}, t0 = {t0}) disagrees with the diagonal certificate (δ = {}, t0 = {})",
                cert.bound,
                cert.profile.t0.exp()
            )));
        }
        return Ok(Some(MuirheadCertificate {
            lambda: lambda.clone(),
            mu: mu.clone(),
            c,
            n,
            delta,
            t0: Some(t0),
            hlp_weights: None,
            verified_bound: cert.bound,
            age: None,
        }));
    }
    if c > 1.0 {
        return Ok(None);
    }
    let points = symmetry::orbit_points(&lambda_e);
    let weights = geometry::convex_combination(&mu_e, &points)?
        .ok_or_else(|| Error::Numerical("dominance holds but no convex combination was found".into()))?;
    let zeta: BTreeMap<ExponentVector, f64> = points
        .iter()
        .zip(&weights)
        .filter(|(_, w)| !w.is_zero())
        .map(|(p, w)| (p.clone(), rational_to_f64(w)))
        .collect();
    let total = weights.iter().fold(Rational::zero(), |a, w| a + w);
    debug_assert!(total == Rational::one());
    let age = if lambda == mu {
        None
    } else {
        let mut g = Signomial::from_terms(n, Flavor::Signomial, zeta.iter().map(|(e, &w)| (e.clone(), w)))?;
        g.add_term(mu_e.clone(), -1.0)?;
        Some(
            age::is_age(&g, &mu_e, 1e-9)?
                .ok_or_else(|| Error::Numerical("orbit piece failed the AGE check".into()))?,
        )
    };
    Ok(Some(MuirheadCertificate {
        lambda: lambda.clone(),
        mu: mu.clone(),
        c,
        n,
        delta: 0.0,
        t0: None,
        hlp_weights: (c == 1.0).then_some(zeta),
        verified_bound: 0.0,
        age,
    }))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeSequenceRow {
    pub k: usize,
    /// `(k − 1)·α_min`: the share of each `xᵢ⁶` the pair blocks need.
    pub required: f64,
    pub sonc: bool,
    pub nonnegative: bool,
    /// Membership as decided by the symmetric SAGE solver on `sig(f̃_k)`.
    pub solver_sonc: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeSequenceTable {
    pub alpha: f64,
    pub beta: f64,
    /// Least `α_k` making `α_k(x₁⁶ + x₂⁶) + βx₁³x₂³` nonnegative.
    pub alpha_min: f64,
    pub rows: Vec<ConeSequenceRow>,
    /// Whether `(α, β)` lies in the limit cone `ℝ₊ × {0}`.
    pub in_limit_cone: bool,
}

/// `αM₍₆₎⁽ᵏ⁾ + βM₍₃,₃₎⁽ᵏ⁾` for `k = 2..=k_max`. With `check_solver`, every row is
/// also decided by the symmetric solver.
pub fn cone_sequence_experiment(alpha: f64, beta: f64, k_max: usize, check_solver: bool) -> Result<ConeSequenceTable> {
    if !(alpha >= 0.0) {
        return Err(Error::Precondition(format!("alpha must be nonnegative, got {alpha}")));
    }
    let tol = 1e-9;
    let six = ExponentVector::from_ints(&[6, 0]);
    let circuits = geometry::enumerate_circuits(
        &[six.clone(), ExponentVector::from_ints(&[0, 6])],
        &ExponentVector::from_ints(&[3, 3]),
        geometry::DEFAULT_CIRCUIT_CAP,
    )?;
    let circuit = circuits.first().ok_or_else(|| Error::Numerical("no circuit through (3,3)".into()))?;
    let unit: BTreeMap<ExponentVector, f64> = circuit.positive_support.iter().map(|(e, _)| (e.clone(), 1.0)).collect();
    // The circuit number is homogeneous of degree one in the coefficients.
    let alpha_min = beta.abs() / age::circuit_number(&unit, circuit);

    let mut rows = Vec::new();
    for k in 2..=k_max {
        let required = (k - 1) as f64 * alpha_min;
        let sonc = required <= alpha * (1.0 + 1e-12);
        // αΣyᵢ² + βΣ_{i<j} yᵢyⱼ with yᵢ = xᵢ³ has eigenvalues α − β/2 and α + β(k−1)/2.
        let nonnegative = alpha - beta / 2.0 >= 0.0 && alpha + beta * (k - 1) as f64 / 2.0 >= 0.0;
        let solver_sonc = if check_solver {
            let f = monomial_symmetric(&Partition::new(vec![6]), k, false)?
                .scaled(alpha)
                .plus(&monomial_symmetric(&Partition::new(vec![3, 3]), k, false)?.scaled(beta))?;
            let s = sonc::tilde(&f)?.to_signomial();
            Some(symmetry::is_symmetric_sage(&s, &SupportSplit::by_sign(&s), tol)?.is_some())
        } else {
            None
        };
        rows.push(ConeSequenceRow { k, required, sonc, nonnegative, solver_sonc });
    }
    Ok(ConeSequenceTable { alpha, beta, alpha_min, rows, in_limit_cone: beta == 0.0 })
}
