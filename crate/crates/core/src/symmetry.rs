//! Orbits of the symmetric group acting by coordinate permutation, and the
//! symmetric SAGE decomposition built on them.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::age::{self, AgeCertificate};
use crate::error::{Error, Result};
use crate::exponent::{rational_to_f64, ExponentVector, Rational};
use crate::geometry::{self, CircuitVector};
use crate::sage::{self, Grouping};
use crate::signomial::{serialize_coefficients, Signomial, SupportSplit};

/// Largest dimension for which orbits are materialized point by point.
pub const MAX_MATERIALIZED_N: usize = 12;
/// Default tolerance of invariance checks.
pub const INVARIANCE_TOL: f64 = 1e-9;

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Multiplicities of the distinct coordinates.
fn multiplicities(alpha: &ExponentVector) -> Vec<usize> {
    let mut counts: BTreeMap<&Rational, usize> = BTreeMap::new();
    for c in alpha.coords() {
        *counts.entry(c).or_default() += 1;
    }
    counts.into_values().collect()
}

/// `|Stab α| = ∏ (multiplicity)!`.
pub fn stabilizer_order(alpha: &ExponentVector) -> u128 {
    multiplicities(alpha).into_iter().map(factorial).product()
}

pub fn orbit_size(alpha: &ExponentVector) -> u128 {
    factorial(alpha.dim()) / stabilizer_order(alpha)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitData {
    pub representative: ExponentVector,
    pub orbit_size: u128,
    pub stabilizer_order: u128,
}

impl OrbitData {
    /// One permutation per coset of `Stab(representative)`; entry `j` of a
    /// permutation is the target position of coordinate `j`.
    pub fn coset_representatives(&self) -> Result<Vec<Vec<usize>>> {
        let n = self.representative.dim();
        if n > MAX_MATERIALIZED_N {
            return Err(Error::Precondition(format!("orbits are materialized only for n ≤ {MAX_MATERIALIZED_N}")));
        }
        let rep = self.representative.coords();
        Ok(orbit_points(&self.representative)
            .into_iter()
            .map(|image| {
                // Send coordinate j of the representative to a distinct slot holding the same value.
                let mut used = vec![false; n];
                let mut perm = vec![0; n];
                for (j, value) in rep.iter().enumerate() {
                    let k = (0..n).find(|&k| !used[k] && image.coords()[k] == *value).expect("same multiset");
                    used[k] = true;
                    perm[j] = k;
                }
                perm
            })
            .collect())
    }
}

pub fn orbit(alpha: &ExponentVector) -> OrbitData {
    OrbitData {
        representative: alpha.sorted_desc(),
        orbit_size: orbit_size(alpha),
        stabilizer_order: stabilizer_order(alpha),
    }
}

/// All distinct coordinate permutations of `alpha`, in increasing order.
pub fn orbit_points(alpha: &ExponentVector) -> Vec<ExponentVector> {
    let mut c: Vec<Rational> = alpha.coords().to_vec();
    c.sort();
    let mut out = vec![ExponentVector::new(c.clone())];
    while next_permutation(&mut c) {
        out.push(ExponentVector::new(c.clone()));
    }
    out
}

fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Canonical point of the `Stab(beta)`-orbit of `alpha`: within each block of
/// positions where `beta` is constant, the entries of `alpha` are sorted
/// non-increasingly.
pub fn stabilizer_canonical(alpha: &ExponentVector, beta: &ExponentVector) -> ExponentVector {
    let mut out = alpha.coords().to_vec();
    for block in equal_blocks(beta) {
        let mut vals: Vec<Rational> = block.iter().map(|&j| alpha.coords()[j].clone()).collect();
        vals.sort_by(|a, b| b.cmp(a));
        for (&j, v) in block.iter().zip(vals) {
            out[j] = v;
        }
    }
    ExponentVector::new(out)
}

/// Position classes of equal coordinates.
fn equal_blocks(beta: &ExponentVector) -> Vec<Vec<usize>> {
    let mut groups: BTreeMap<&Rational, Vec<usize>> = BTreeMap::new();
    for (j, c) in beta.coords().iter().enumerate() {
        groups.entry(c).or_default().push(j);
    }
    groups.into_values().collect()
}

/// Transpositions generating `Stab(beta)`.
pub fn stabilizer_generators(beta: &ExponentVector) -> Vec<(usize, usize)> {
    equal_blocks(beta).iter().flat_map(|b| b.windows(2).map(|w| (w[0], w[1])).collect::<Vec<_>>()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymmetrizeMode {
    /// Sum over all of `Sₙ`.
    Full,
    /// Sum over coset representatives of `Sₙ/Stab(β)`.
    CosetsOf(ExponentVector),
}

/// Orbit sum of `g`. Uses `Σ_{σ∈Sₙ} σ e^α = |Stab α| Σ_{γ ∈ Sₙ·α} e^γ`, so no
/// permutation group is enumerated.
pub fn symmetrize(g: &Signomial, mode: &SymmetrizeMode, tol: f64) -> Result<Signomial> {
    let divisor = match mode {
        SymmetrizeMode::Full => 1.0,
        SymmetrizeMode::CosetsOf(beta) => {
            if beta.dim() != g.n() {
                return Err(Error::DimensionMismatch { expected: g.n(), found: beta.dim() });
            }
            if !g.invariant_under(&stabilizer_generators(beta), tol) {
                return Err(Error::NotStabilizerInvariant(beta.to_string()));
            }
            stabilizer_order(beta) as f64
        }
    };
    let mut out = Signomial::new(g.n(), g.flavor());
    for (e, &c) in g.terms() {
        let weight = stabilizer_order(e) as f64 / divisor;
        for p in orbit_points(e) {
            out.add_term(p, c * weight)?;
        }
    }
    Ok(out)
}

/// Sum of `σg` over an explicit list of permutations.
pub fn symmetrize_over(g: &Signomial, perms: &[Vec<usize>]) -> Result<Signomial> {
    let mut out = Signomial::new(g.n(), g.flavor());
    for p in perms {
        out = out.plus(&g.permuted(p))?;
    }
    Ok(out)
}

/// One `g_β̂` of a symmetric decomposition.
#[derive(Clone, Debug, Serialize)]
pub struct SymmetricPiece {
    pub beta_hat: ExponentVector,
    pub g: Signomial,
    pub certificate: AgeCertificate,
    pub cosets: u128,
    pub stabilizer_invariant: bool,
}

/// `f = Σ_β̂ Σ_{ρ ∈ Sₙ/Stab β̂} ρ g_β̂ + remainder`, remainder a symmetric
/// nonnegative monomial sum.
#[derive(Clone, Debug, Serialize)]
pub struct SymmetricSageDecomposition {
    pub pieces: Vec<SymmetricPiece>,
    pub remainder: Signomial,
}

impl SymmetricSageDecomposition {
    pub fn reconstruct(&self) -> Result<Signomial> {
        let mut out = self.remainder.clone();
        for piece in &self.pieces {
            let s = symmetrize(&piece.g, &SymmetrizeMode::CosetsOf(piece.beta_hat.clone()), f64::INFINITY)?;
            out = out.plus(&s)?;
        }
        Ok(out)
    }
}

fn check_symmetric(f: &Signomial, split: &SupportSplit, tol: f64) -> Result<()> {
    if !f.is_symmetric(tol * (1.0 + f.max_abs_coefficient())) {
        return Err(Error::NotSymmetric);
    }
    let pairs: Vec<_> = (1..f.n()).map(|i| (i - 1, i)).collect();
    for set in [&split.positive, &split.negatives] {
        for e in set {
            if pairs.iter().any(|&(i, j)| !set.contains(&e.swapped(i, j))) {
                return Err(Error::NotSymmetric);
            }
        }
    }
    Ok(())
}

/// Symmetric SAGE membership: one Stab-invariant AGE signomial per orbit
/// representative of the negative support.
pub fn is_symmetric_sage(f: &Signomial, split: &SupportSplit, tol: f64) -> Result<Option<SymmetricSageDecomposition>> {
    check_symmetric(f, split, INVARIANCE_TOL)?;
    let Some(solution) = sage::solve_membership(f, split, Grouping::Symmetric, tol)? else {
        return Ok(None);
    };
    solution.into_symmetric(f.n(), tol).map(Some)
}

/// Symmetric SAGE bound `sup{λ : f − λ ∈ C_SAGE}` computed on orbit representatives.
pub fn symmetric_sage_bound(f: &Signomial, tol: f64) -> Result<(sage::Bound, Option<SymmetricSageDecomposition>)> {
    check_symmetric(f, &SupportSplit::by_sign(f), INVARIANCE_TOL)?;
    match sage::solve_bound(f, Grouping::Symmetric, tol)? {
        None => Ok((sage::Bound::Unbounded, None)),
        Some((lambda, solution)) => Ok((sage::Bound::Finite(lambda), Some(solution.into_symmetric(f.n(), tol)?))),
    }
}

/// One circuit share of a `g_β̂`.
#[derive(Clone, Debug, Serialize)]
pub struct CircuitPiece {
    pub circuit: CircuitVector,
    #[serde(serialize_with = "serialize_coefficients")]
    pub coefficients: BTreeMap<ExponentVector, f64>,
    pub negative_coefficient: f64,
    pub circuit_number: f64,
    pub passes: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessConeBlock {
    pub beta_hat: ExponentVector,
    pub pieces: Vec<CircuitPiece>,
    #[serde(serialize_with = "serialize_coefficients")]
    pub remainder: BTreeMap<ExponentVector, f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessConeDecomposition {
    pub blocks: Vec<WitnessConeBlock>,
    pub remainder: Signomial,
}

/// Splits one AGE signomial `g` (negative point `beta`, dual witness `nu`)
/// into circuit pieces plus nonnegative monomials.
pub fn circuit_split(g: &Signomial, beta: &ExponentVector, nu: &BTreeMap<ExponentVector, f64>, cap: usize) -> Result<WitnessConeBlock> {
    let d = -g.coefficient(beta);
    let positive: BTreeMap<ExponentVector, f64> =
        g.terms().iter().filter(|(e, _)| *e != beta).map(|(e, &c)| (e.clone(), c)).collect();
    let mut remainder = positive.clone();
    let mut pieces = Vec::new();
    let total: f64 = nu.values().sum();
    if d <= 0.0 || total <= 0.0 {
        return Ok(WitnessConeBlock { beta_hat: beta.clone(), pieces, remainder });
    }
    let face: Vec<ExponentVector> = nu.iter().filter(|(_, &v)| v > 0.0).map(|(e, _)| e.clone()).collect();
    let circuits = geometry::enumerate_circuits(&face, beta, cap)?;
    let w: BTreeMap<ExponentVector, f64> = nu.iter().map(|(e, &v)| (e.clone(), v / total)).collect();
    let mut residual = w.clone();
    let mut chosen: Vec<(usize, f64)> = Vec::new();
    loop {
        let mass: f64 = residual.values().sum();
        if mass <= 1e-13 {
            break;
        }
        let mut best: Option<(usize, f64)> = None;
        for (k, circ) in circuits.iter().enumerate() {
            let theta = circ
                .positive_support
                .iter()
                .map(|(a, lam)| residual.get(a).copied().unwrap_or(0.0) / rational_to_f64(lam))
                .fold(f64::INFINITY, f64::min);
            if theta > 0.0 && best.is_none_or(|(_, t)| theta > t) {
                best = Some((k, theta));
            }
        }
        let Some((k, theta)) = best else { break };
        if theta <= 1e-15 {
            break;
        }
        for (a, lam) in &circuits[k].positive_support {
            let r = residual.get_mut(a).expect("face point");
            *r = (*r - theta * rational_to_f64(lam)).max(0.0);
        }
        chosen.push((k, theta));
    }
    let theta_total: f64 = chosen.iter().map(|(_, t)| t).sum();
    for (k, theta) in chosen {
        let circ = &circuits[k];
        let mut coefficients = BTreeMap::new();
        for (a, lam) in &circ.positive_support {
            let share = positive[a] * theta * rational_to_f64(lam) / w[a];
            coefficients.insert(a.clone(), share);
            let r = remainder.get_mut(a).expect("positive point");
            *r = (*r - share).max(0.0);
        }
        let piece_d = d * theta / theta_total;
        let number = age::circuit_number(&coefficients, circ);
        let passes = age::circuit_number_test(&coefficients, piece_d * (1.0 - 1e-9), circ);
        pieces.push(CircuitPiece {
            circuit: circ.clone(),
            coefficients,
            negative_coefficient: -piece_d,
            circuit_number: number,
            passes,
        });
    }
    remainder.retain(|_, v| *v > 0.0);
    Ok(WitnessConeBlock { beta_hat: beta.clone(), pieces, remainder })
}

/// Refines a symmetric decomposition of `f` into circuit pieces per `β̂`.
pub fn symmetric_witness_cone_decomposition(
    f: &Signomial,
    split: &SupportSplit,
    tol: f64,
) -> Result<Option<WitnessConeDecomposition>> {
    let Some(dec) = is_symmetric_sage(f, split, tol)? else { return Ok(None) };
    let mut blocks = Vec::new();
    for piece in &dec.pieces {
        blocks.push(circuit_split(&piece.g, &piece.beta_hat, &piece.certificate.nu, geometry::DEFAULT_CIRCUIT_CAP)?);
    }
    Ok(Some(WitnessConeDecomposition { blocks, remainder: dec.remainder }))
}
