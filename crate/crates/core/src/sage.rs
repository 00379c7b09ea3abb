//! SAGE membership and the SAGE lower bound.
//!
//! Both are solved as one relative-entropy program: every negative point `β`
//! owns a block of variables `(c, ν)` on the minimal face of the positive
//! support containing `β`, the blocks share the positive coefficients through
//! coupling constraints, and the bound problem adds the shift `λ` as a
//! variable.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::age::{self, AgeCertificate};
use crate::barrier::{EntropyConstraint, EntropyTerm, LinearConstraint, Options, Program};
use crate::error::{Error, Result};
use crate::exponent::{rational_to_f64, ExponentVector, Rational};
use crate::geometry::{self, HullStatus};
use crate::lp;
use crate::signomial::{serialize_coefficients, Signomial, SupportSplit};
use crate::symmetry::{self, SymmetricPiece, SymmetricSageDecomposition};

/// A lower bound, with `−∞` kept as its own variant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    Finite(f64),
    Unbounded,
}

impl Bound {
    pub fn value(self) -> f64 {
        match self {
            Bound::Finite(v) => v,
            Bound::Unbounded => f64::NEG_INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Bound::Finite(_))
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bound::Finite(v) => s.serialize_f64(*v),
            Bound::Unbounded => s.serialize_str("-inf"),
        }
    }
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bound::Finite(v) => write!(f, "{v}"),
            Bound::Unbounded => write!(f, "-inf"),
        }
    }
}

/// One AGE summand `g_β` with its certificate.
#[derive(Clone, Debug, Serialize)]
pub struct AgeComponent {
    pub beta: ExponentVector,
    pub component: Signomial,
    pub certificate: AgeCertificate,
}

#[derive(Clone, Debug, Serialize)]
pub struct SageDecomposition {
    pub components: Vec<AgeComponent>,
    #[serde(serialize_with = "serialize_coefficients")]
    pub monomial_remainder: BTreeMap<ExponentVector, f64>,
}

impl SageDecomposition {
    /// `Σ_β g_β + remainder`.
    pub fn reconstruct(&self, n: usize, flavor: crate::Flavor) -> Result<Signomial> {
        let mut out = Signomial::from_terms(n, flavor, self.monomial_remainder.iter().map(|(e, &c)| (e.clone(), c)))?;
        for c in &self.components {
            out = out.plus(&c.component)?;
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SageBound {
    pub bound: Bound,
    pub decomposition: Option<SageDecomposition>,
    /// Every negative point lies in the relative interior of `conv(𝒜 ∪ {0})`,
    /// which guarantees a finite bound.
    pub finite_guaranteed: bool,
}

/// Keeps the positive terms whose support (set of nonzero coordinates) is
/// contained in that of `beta`, plus the `beta` term.
pub fn reduce_support(f: &Signomial, beta: &ExponentVector) -> Result<Signomial> {
    if beta.dim() != f.n() {
        return Err(Error::DimensionMismatch { expected: f.n(), found: beta.dim() });
    }
    let allowed = beta.support();
    let mut out = Signomial::new(f.n(), f.flavor());
    for (e, &c) in f.terms() {
        if e == beta {
            out.add_term(e.clone(), c)?;
            continue;
        }
        if !e.is_nonnegative() {
            return Err(Error::NegativeExponent(e.to_string()));
        }
        if c < 0.0 {
            return Err(Error::NegativeCoefficient { exponent: e.to_string(), coef: c });
        }
        if e.support().iter().all(|j| allowed.contains(j)) {
            out.add_term(e.clone(), c)?;
        }
    }
    Ok(out)
}

/// Decides `f ∈ C_SAGE(𝒜, ℬ)` for the given split.
pub fn is_sage(f: &Signomial, split: &SupportSplit, tol: f64) -> Result<Option<SageDecomposition>> {
    match solve_membership(f, split, Grouping::Trivial, tol)? {
        Some(solution) => solution.into_generic(tol).map(Some),
        None => Ok(None),
    }
}

/// `f^SAGE = sup{λ : f − λ ∈ C_SAGE}` with a certifying decomposition of `f − λ̂`.
pub fn sage_bound(f: &Signomial, tol: f64) -> Result<SageBound> {
    let finite_guaranteed = finiteness_hypothesis(f)?;
    match solve_bound(f, Grouping::Trivial, tol)? {
        None => Ok(SageBound { bound: Bound::Unbounded, decomposition: None, finite_guaranteed }),
        Some((lambda, solution)) => {
            let decomposition = solution.into_generic(tol)?;
            Ok(SageBound { bound: Bound::Finite(lambda), decomposition: Some(decomposition), finite_guaranteed })
        }
    }
}

/// Every negative non-constant point in the relative interior of `conv(𝒜 ∪ {0})`.
pub fn finiteness_hypothesis(f: &Signomial) -> Result<bool> {
    let zero = ExponentVector::zeros(f.n());
    let positive: Vec<ExponentVector> = f.terms().iter().filter(|(e, &c)| c > 0.0 && **e != zero).map(|(e, _)| e.clone()).collect();
    for (e, &c) in f.terms() {
        if c < 0.0 && *e != zero {
            if positive.is_empty() {
                return Ok(false);
            }
            let status = geometry::hull_locate(e, &positive, true)?.status;
            if !matches!(status, HullStatus::Interior | HullStatus::RelativeInterior) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// How coefficients are grouped into variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Grouping {
    /// One variable per support point.
    Trivial,
    /// One variable per `Stab(β̂)`-orbit, for `Sₙ`-invariant input.
    Symmetric,
}

impl Grouping {
    fn slot_key(self, e: &ExponentVector) -> ExponentVector {
        match self {
            Grouping::Trivial => e.clone(),
            Grouping::Symmetric => e.sorted_desc(),
        }
    }

    fn atom_key(self, e: &ExponentVector, beta: &ExponentVector) -> ExponentVector {
        match self {
            Grouping::Trivial => e.clone(),
            Grouping::Symmetric => symmetry::stabilizer_canonical(e, beta),
        }
    }

    fn stab(self, e: &ExponentVector) -> f64 {
        match self {
            Grouping::Trivial => 1.0,
            Grouping::Symmetric => symmetry::stabilizer_order(e) as f64,
        }
    }

    fn cosets(self, beta: &ExponentVector) -> u128 {
        match self {
            Grouping::Trivial => 1,
            Grouping::Symmetric => symmetry::orbit_size(beta),
        }
    }

    fn slot_members(self, rep: &ExponentVector) -> Vec<ExponentVector> {
        match self {
            Grouping::Trivial => vec![rep.clone()],
            Grouping::Symmetric => symmetry::orbit_points(rep),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SlotRef {
    Regular(usize),
    /// The constant term in the bound problem, whose capacity depends on `λ`.
    Constant,
}

#[derive(Clone, Debug)]
struct Slot {
    rep: ExponentVector,
    cap: f64,
}

#[derive(Clone, Debug)]
struct Atom {
    slot: SlotRef,
    members: Vec<ExponentVector>,
    mult: f64,
    kappa: f64,
    nu_bar: f64,
    mass: f64,
}

#[derive(Clone, Debug)]
struct Block {
    beta: ExponentVector,
    d: f64,
    atoms: Vec<Atom>,
    rows: Vec<Vec<f64>>,
    cosets: u128,
}

impl Block {
    fn has_constant(&self) -> bool {
        self.atoms.iter().any(|a| a.slot == SlotRef::Constant)
    }
}

struct Reduced {
    n: usize,
    grouping: Grouping,
    scale: f64,
    slots: Vec<Slot>,
    blocks: Vec<Block>,
    /// Block for a negative shifted constant (bound problem only).
    block0: Option<Block>,
    constant: f64,
    /// Declared-negative points with nonnegative coefficients.
    passthrough: Vec<(ExponentVector, f64)>,
}

enum Built {
    Ready(Reduced),
    /// Some negative point has an empty face.
    EmptyFace,
}

fn build(f: &Signomial, split: &SupportSplit, grouping: Grouping, bound_mode: bool) -> Result<Built> {
    let n = f.n();
    let zero = ExponentVector::zeros(n);
    let scale = f.max_abs_coefficient().max(f64::MIN_POSITIVE);
    for e in split.positive.iter().chain(&split.negatives) {
        if e.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: e.dim() });
        }
    }
    for e in f.support() {
        if !split.positive.contains(e) && !split.negatives.contains(e) {
            return Err(Error::NotInSupport(format!("{e} (not covered by the split)")));
        }
    }

    let mut positive_points = Vec::new();
    let mut slots: Vec<Slot> = Vec::new();
    let mut slot_index: BTreeMap<ExponentVector, usize> = BTreeMap::new();
    for e in &split.positive {
        let c = f.coefficient(e);
        if c < 0.0 {
            return Err(Error::NegativeCoefficient { exponent: e.to_string(), coef: c });
        }
        if c == 0.0 || (bound_mode && *e == zero) {
            continue;
        }
        positive_points.push(e.clone());
        let key = grouping.slot_key(e);
        if !slot_index.contains_key(&key) {
            slot_index.insert(key.clone(), slots.len());
            let cap = f.coefficient(&key) / scale;
            slots.push(Slot { rep: key, cap });
        }
    }

    let mut passthrough = Vec::new();
    let mut negatives: Vec<(ExponentVector, f64)> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for e in &split.negatives {
        let c = f.coefficient(e);
        if bound_mode && *e == zero {
            continue;
        }
        if c >= 0.0 {
            if c > 0.0 {
                passthrough.push((e.clone(), c));
            }
            continue;
        }
        let key = grouping.slot_key(e);
        if seen.insert(key.clone()) {
            negatives.push((key.clone(), -f.coefficient(&key) / scale));
        }
    }

    let mut faces_from = positive_points.clone();
    if bound_mode {
        faces_from.push(zero.clone());
    }
    let slot_of = |e: &ExponentVector| -> SlotRef {
        if bound_mode && *e == zero {
            SlotRef::Constant
        } else {
            SlotRef::Regular(slot_index[&grouping.slot_key(e)])
        }
    };

    let mut blocks = Vec::new();
    for (beta, d) in negatives {
        match make_block(&beta, d, &faces_from, grouping, &slot_of)? {
            Some(b) => blocks.push(b),
            None => return Ok(Built::EmptyFace),
        }
    }
    let constant = f.constant_term() / scale;
    let block0 = if bound_mode { make_block(&zero, 0.0, &positive_points, grouping, &slot_of)? } else { None };
    Ok(Built::Ready(Reduced { n, grouping, scale, slots, blocks, block0, constant, passthrough }))
}

fn make_block(
    beta: &ExponentVector,
    d: f64,
    points: &[ExponentVector],
    grouping: Grouping,
    slot_of: &dyn Fn(&ExponentVector) -> SlotRef,
) -> Result<Option<Block>> {
    let Some(face) = geometry::minimal_face(beta, points)? else { return Ok(None) };
    let mut groups: BTreeMap<ExponentVector, Vec<(ExponentVector, Rational)>> = BTreeMap::new();
    for i in face.indices() {
        let p = &points[i];
        groups.entry(grouping.atom_key(p, beta)).or_default().push((p.clone(), face.weights[i].clone()));
    }
    let stab_beta = grouping.stab(beta);
    let mut atoms = Vec::new();
    let mut directions: Vec<Vec<Rational>> = Vec::new();
    for (key, members) in groups {
        let mult = members.len();
        let mass_q = members.iter().fold(Rational::zero(), |acc, (_, w)| acc + w);
        let mass = rational_to_f64(&mass_q);
        let mut dir = vec![Rational::zero(); beta.dim()];
        for (p, _) in &members {
            for (dj, (pj, bj)) in dir.iter_mut().zip(p.coords().iter().zip(beta.coords())) {
                *dj += pj - bj;
            }
        }
        directions.push(dir);
        let rep = grouping.slot_key(&key);
        atoms.push(Atom {
            slot: slot_of(&key),
            members: members.into_iter().map(|(p, _)| p).collect(),
            mult: mult as f64,
            kappa: grouping.stab(&rep) / stab_beta * mult as f64,
            nu_bar: mass / mult as f64,
            mass,
        });
    }
    let rows_q: Vec<Vec<Rational>> =
        (0..beta.dim()).map(|j| directions.iter().map(|d| d[j].clone()).collect()).collect();
    let rows = lp::row_basis(&rows_q).into_iter().map(|j| rows_q[j].iter().map(rational_to_f64).collect()).collect();
    Ok(Some(Block { beta: beta.clone(), d, atoms, rows, cosets: grouping.cosets(beta) }))
}

/// Variable indices of one block.
#[derive(Clone, Debug)]
struct Layout {
    c: Vec<usize>,
    nu: Vec<usize>,
}

struct ProgramBuilder {
    program: Program,
}

impl ProgramBuilder {
    fn new() -> Self {
        Self { program: Program::default() }
    }

    fn var(&mut self, positive: bool) -> usize {
        let i = self.program.dim;
        self.program.dim += 1;
        if positive {
            self.program.positive.push(i);
        }
        i
    }

    fn block(&mut self, b: &Block) -> Layout {
        let mut layout = Layout { c: Vec::new(), nu: Vec::new() };
        for _ in &b.atoms {
            layout.c.push(self.var(true));
            layout.nu.push(self.var(true));
        }
        for row in &b.rows {
            self.program.equalities.push(row.iter().zip(&layout.nu).map(|(&a, &i)| (i, a)).filter(|(_, a)| *a != 0.0).collect());
        }
        layout
    }

    fn entropy(&mut self, b: &Block, layout: &Layout, rhs: f64, rhs_linear: Vec<(usize, f64)>) {
        let terms = b
            .atoms
            .iter()
            .enumerate()
            .map(|(k, a)| EntropyTerm { nu: layout.nu[k], c: layout.c[k], weight: a.mult })
            .collect();
        self.program.entropy.push(EntropyConstraint { terms, rhs, rhs_linear });
    }

    fn coupling(&mut self, r: &Reduced, blocks: &[(&Block, &Layout)]) {
        for (s, slot) in r.slots.iter().enumerate() {
            let coefs: Vec<(usize, f64)> = blocks
                .iter()
                .flat_map(|(b, l)| {
                    b.atoms.iter().enumerate().filter(|(_, a)| a.slot == SlotRef::Regular(s)).map(|(k, a)| (l.c[k], a.kappa))
                })
                .collect();
            if !coefs.is_empty() {
                self.program.linear.push(LinearConstraint { coefs, bound: slot.cap });
            }
        }
    }
}

/// `D(s·ν̄, c)` is minimized at `s = e^{−K}` with value `−e^{−K}`.
fn k_value(b: &Block, c: &[f64]) -> f64 {
    b.atoms.iter().zip(c).map(|(a, &ck)| a.mass * (a.nu_bar / ck).ln()).sum()
}

/// Even shares of each slot among the `(block, atom)` pairs using it.
fn even_shares(r: &Reduced, blocks: &[&Block], caps: &[f64]) -> Vec<Vec<f64>> {
    let mut users = vec![0usize; r.slots.len()];
    for b in blocks {
        for a in &b.atoms {
            if let SlotRef::Regular(s) = a.slot {
                users[s] += 1;
            }
        }
    }
    blocks
        .iter()
        .map(|b| {
            b.atoms
                .iter()
                .map(|a| match a.slot {
                    SlotRef::Regular(s) => caps[s] / (a.kappa * (users[s] + 1) as f64),
                    SlotRef::Constant => f64::NAN,
                })
                .collect()
        })
        .collect()
}

struct PhaseOne {
    sigma: f64,
    c: Vec<Vec<f64>>,
    nu: Vec<Vec<f64>>,
}

/// Minimizes `σ` subject to `D_b ≤ −d_b(1 − σ)` for the given blocks.
fn phase_one(r: &Reduced, blocks: &[&Block]) -> PhaseOne {
    if blocks.is_empty() {
        return PhaseOne { sigma: -1.0, c: Vec::new(), nu: Vec::new() };
    }
    let mut pb = ProgramBuilder::new();
    let layouts: Vec<Layout> = blocks.iter().map(|b| pb.block(b)).collect();
    let sigma = pb.var(false);
    for (b, l) in blocks.iter().zip(&layouts) {
        pb.entropy(b, l, -b.d, vec![(sigma, b.d)]);
    }
    let pairs: Vec<(&Block, &Layout)> = blocks.iter().copied().zip(layouts.iter()).collect();
    pb.coupling(r, &pairs);
    pb.program.objective = vec![(sigma, 1.0)];

    let caps: Vec<f64> = r.slots.iter().map(|s| s.cap).collect();
    let shares = even_shares(r, blocks, &caps);
    let mut z = vec![0.0; pb.program.dim];
    let mut sigma0: f64 = f64::NEG_INFINITY;
    for ((b, l), c) in blocks.iter().zip(&layouts).zip(&shares) {
        let s = (-k_value(b, c)).exp();
        for (k, a) in b.atoms.iter().enumerate() {
            z[l.c[k]] = c[k];
            z[l.nu[k]] = s * a.nu_bar;
        }
        sigma0 = sigma0.max(1.0 - s / b.d);
    }
    z[sigma] = sigma0 + 1.0;
    let out = pb.program.solve(z, &Options::default(), &|z| z[sigma] < -1e-6);
    let c = layouts.iter().map(|l| l.c.iter().map(|&i| out.z[i]).collect()).collect();
    let nu = layouts.iter().map(|l| l.nu.iter().map(|&i| out.z[i]).collect()).collect();
    PhaseOne { sigma: out.z[sigma], c, nu }
}

/// Per-block values extracted from a solved program.
#[derive(Clone, Debug)]
struct BlockValues {
    c: Vec<f64>,
    /// Coefficient placed on `β` (negative, except possibly for block 0).
    beta_coef: f64,
}

/// Raw solution: one `g` per block (on representatives) and per-slot leftovers.
pub(crate) struct Solution {
    grouping: Grouping,
    pieces: Vec<(ExponentVector, Signomial, u128)>,
    remainder: Vec<(ExponentVector, f64)>,
}

fn assemble(r: &Reduced, f: &Signomial, blocks: &[&Block], values: &[BlockValues], constant_left: f64) -> Result<Solution> {
    let mut used = vec![0.0; r.slots.len()];
    let mut pieces = Vec::new();
    for (b, v) in blocks.iter().zip(values) {
        let mut g = Signomial::new(r.n, f.flavor());
        for (a, &c) in b.atoms.iter().zip(&v.c) {
            if let SlotRef::Regular(s) = a.slot {
                used[s] += a.kappa * c;
            }
            for m in &a.members {
                g.add_term(m.clone(), c * r.scale)?;
            }
        }
        g.add_term(b.beta.clone(), v.beta_coef * r.scale)?;
        pieces.push((b.beta.clone(), g, b.cosets));
    }
    let mut remainder = Vec::new();
    for (s, slot) in r.slots.iter().enumerate() {
        let left = (slot.cap - used[s]).max(0.0) * r.scale;
        if left > 0.0 {
            for m in r.grouping.slot_members(&slot.rep) {
                remainder.push((m, left));
            }
        }
    }
    if constant_left > 0.0 {
        remainder.push((ExponentVector::zeros(r.n), constant_left * r.scale));
    }
    remainder.extend(r.passthrough.iter().cloned());
    Ok(Solution { grouping: r.grouping, pieces, remainder })
}

pub(crate) fn solve_membership(f: &Signomial, split: &SupportSplit, grouping: Grouping, tol: f64) -> Result<Option<Solution>> {
    let r = match build(f, split, grouping, false)? {
        Built::Ready(r) => r,
        Built::EmptyFace => return Ok(None),
    };
    let blocks: Vec<&Block> = r.blocks.iter().collect();
    let p1 = phase_one(&r, &blocks);
    let shortfall = blocks.iter().map(|b| b.d * p1.sigma.max(0.0)).fold(0.0, f64::max) * r.scale;
    if shortfall > tol {
        return Ok(None);
    }
    let values: Vec<BlockValues> = blocks.iter().zip(&p1.c).map(|(b, c)| BlockValues { c: c.clone(), beta_coef: -b.d }).collect();
    assemble(&r, f, &blocks, &values, 0.0).map(Some)
}

/// Returns `None` when the bound is `−∞`.
pub(crate) fn solve_bound(f: &Signomial, grouping: Grouping, tol: f64) -> Result<Option<(f64, Solution)>> {
    let split = SupportSplit::by_sign(f);
    let r = match build(f, &split, grouping, true)? {
        Built::Ready(r) => r,
        Built::EmptyFace => return Ok(None),
    };
    let (free, anchored): (Vec<&Block>, Vec<&Block>) = r.blocks.iter().partition(|b| !b.has_constant());
    let p1 = phase_one(&r, &free);
    // Certificate shortfall per unit of relaxation. The extra relaxation
    // granted below is reserved here so the emitted pieces stay within `tol`.
    let unit = free.iter().map(|b| b.d).fold(0.0, f64::max) * r.scale;
    let tight = TIGHT.min(0.1 * tol / unit.max(f64::MIN_POSITIVE));
    if (p1.sigma.max(0.0) + tight) * unit > tol && p1.sigma > -BORDERLINE {
        return Ok(None);
    }
    if p1.sigma <= -BORDERLINE {
        let (lam, solution) = phase_two(&r, f, &free, &anchored, &p1, 0.0)?;
        return Ok(Some((lam * r.scale, solution)));
    }
    // The blocks without a constant are only just feasible. If the bound
    // collapses as their slack shrinks, it is an artifact of the tolerance and
    // the exact answer is −∞.
    let relax = p1.sigma.max(0.0);
    let (lam, solution) = phase_two(&r, f, &free, &anchored, &p1, relax + tight)?;
    let (loose, _) = phase_two(&r, f, &free, &anchored, &p1, relax + BORDERLINE)?;
    if lam < loose - loose.abs().max(1.0) {
        return Ok(None);
    }
    Ok(Some((lam * r.scale, solution)))
}

/// Phase-I margin below which the coefficient-free blocks count as tight.
const BORDERLINE: f64 = 1e-6;
/// Relaxation granted to tight blocks, further capped at a tenth of the
/// certificate tolerance.
const TIGHT: f64 = 1e-10;

/// Maximizes `λ` with the coefficient-free blocks relaxed to `D ≤ −d(1 − relax)`.
fn phase_two(r: &Reduced, f: &Signomial, free: &[&Block], anchored: &[&Block], p1: &PhaseOne, relax: f64) -> Result<(f64, Solution)> {
    let mut pb = ProgramBuilder::new();
    let mut all: Vec<&Block> = free.to_vec();
    all.extend(anchored.iter().copied());
    if let Some(b0) = &r.block0 {
        all.push(b0);
    }
    let layouts: Vec<Layout> = all.iter().map(|b| pb.block(b)).collect();
    let lambda = pb.var(false);
    let nfree = free.len();
    let nanch = anchored.len();
    let constant_users: Vec<(usize, f64)> = all[..nfree + nanch]
        .iter()
        .zip(&layouts)
        .flat_map(|(b, l)| {
            b.atoms.iter().enumerate().filter(|(_, a)| a.slot == SlotRef::Constant).map(|(k, a)| (l.c[k], a.kappa)).collect::<Vec<_>>()
        })
        .collect();
    for (i, (b, l)) in all.iter().zip(&layouts).enumerate() {
        if i < nfree {
            pb.entropy(b, l, -b.d * (1.0 - relax), vec![]);
        } else if i < nfree + nanch {
            pb.entropy(b, l, -b.d, vec![]);
        } else {
            let mut lin = vec![(lambda, -1.0)];
            lin.extend(constant_users.iter().map(|&(i, k)| (i, -k)));
            pb.entropy(b, l, r.constant, lin);
        }
    }
    if r.block0.is_none() {
        let mut coefs = vec![(lambda, 1.0)];
        coefs.extend(constant_users.iter().copied());
        pb.program.linear.push(LinearConstraint { coefs, bound: r.constant });
    }
    let pairs: Vec<(&Block, &Layout)> = all.iter().copied().zip(layouts.iter()).collect();
    pb.coupling(r, &pairs);
    pb.program.objective = vec![(lambda, -1.0)];

    // Starting point.
    let mut z = vec![0.0; pb.program.dim];
    let mut left: Vec<f64> = r.slots.iter().map(|s| s.cap).collect();
    for (k, (b, l)) in free.iter().zip(&layouts).enumerate() {
        // Shrinking c by s raises D by −ln s·Σν; spend half of the slack that
        // `relax` leaves so the other blocks start with something to share.
        let mass: f64 = b.atoms.iter().zip(&p1.nu[k]).map(|(a, nu)| a.mult * nu).sum();
        let shrink = (-0.5 * b.d * (relax - p1.sigma).max(0.0) / mass).exp();
        for (j, a) in b.atoms.iter().enumerate() {
            z[l.c[j]] = p1.c[k][j] * shrink;
            z[l.nu[j]] = p1.nu[k][j];
            if let SlotRef::Regular(s) = a.slot {
                left[s] -= a.kappa * z[l.c[j]];
            }
        }
    }
    let rest: Vec<&Block> = all[nfree..].to_vec();
    let shares = even_shares(r, &rest, &left);
    let mut constant_spent = 0.0;
    for (k, b) in rest.iter().enumerate() {
        let l = &layouts[nfree + k];
        let mut c = shares[k].clone();
        let is_block0 = k >= nanch;
        let s = if is_block0 {
            1.0
        } else {
            let (ci, a0) = b.atoms.iter().enumerate().find(|(_, a)| a.slot == SlotRef::Constant).expect("anchored block");
            let rest_k: f64 = b
                .atoms
                .iter()
                .zip(&c)
                .filter(|(a, _)| a.slot != SlotRef::Constant)
                .map(|(a, &cj)| a.mass * (a.nu_bar / cj).ln())
                .sum();
            let log_c0 = ((2.0 * b.d).ln() + a0.mass * a0.nu_bar.ln() + rest_k) / a0.mass;
            if !log_c0.is_finite() || log_c0 > 600.0 {
                return Err(Error::Numerical(format!("start point for block {} overflows", b.beta)));
            }
            c[ci] = log_c0.exp();
            constant_spent += a0.kappa * c[ci];
            2.0 * b.d
        };
        for (j, a) in b.atoms.iter().enumerate() {
            z[l.c[j]] = c[j];
            z[l.nu[j]] = s * a.nu_bar;
        }
    }
    // The margin scales with the spend so it survives rounding.
    let mut lambda0 = r.constant - constant_spent - (1.0 + 1e-6 * constant_spent.abs());
    if r.block0.is_some() {
        let e0 = pb.program.entropy.last().expect("block 0 constraint");
        lambda0 -= e0.divergence(&z).max(0.0) + 1.0;
    }
    z[lambda] = lambda0;
    if !pb.program.strictly_feasible(&z) {
        return Err(Error::Numerical("could not construct an interior start for the bound problem".into()));
    }
    let out = pb.program.solve(z, &Options::default(), &|_| false);
    let z = out.z;
    let lam = z[lambda];
    let mut values = Vec::new();
    let mut spent = 0.0;
    for (i, (b, l)) in all.iter().zip(&layouts).enumerate() {
        let c: Vec<f64> = l.c.iter().map(|&k| z[k]).collect();
        for (a, &cj) in b.atoms.iter().zip(&c) {
            if a.slot == SlotRef::Constant && i < nfree + nanch {
                spent += a.kappa * cj;
            }
        }
        values.push(BlockValues { c, beta_coef: -b.d });
    }
    let constant_left = r.constant - lam - spent;
    let constant_left = if r.block0.is_some() {
        let last = values.last_mut().expect("block 0 values");
        last.beta_coef = constant_left;
        0.0
    } else {
        constant_left
    };
    let solution = assemble(r, f, &all, &values, constant_left)?;
    Ok((lam, solution))
}

impl Solution {
    pub(crate) fn into_generic(self, tol: f64) -> Result<SageDecomposition> {
        debug_assert_eq!(self.grouping, Grouping::Trivial);
        let mut components = Vec::new();
        for (beta, g, _) in self.pieces {
            let certificate = age::is_age(&g, &beta, tol)?
                .ok_or_else(|| Error::Numerical(format!("component at {beta} failed re-verification")))?;
            components.push(AgeComponent { beta, component: g, certificate });
        }
        let mut monomial_remainder = BTreeMap::new();
        for (e, c) in self.remainder {
            *monomial_remainder.entry(e).or_insert(0.0) += c;
        }
        Ok(SageDecomposition { components, monomial_remainder })
    }

    pub(crate) fn into_symmetric(self, n: usize, tol: f64) -> Result<SymmetricSageDecomposition> {
        let mut pieces = Vec::new();
        let mut flavor = crate::Flavor::Signomial;
        for (beta, g, cosets) in self.pieces {
            flavor = g.flavor();
            let certificate = age::is_age(&g, &beta, tol)?
                .ok_or_else(|| Error::Numerical(format!("piece at {beta} failed re-verification")))?;
            let stabilizer_invariant = g.invariant_under(&symmetry::stabilizer_generators(&beta), symmetry::INVARIANCE_TOL);
            pieces.push(SymmetricPiece { beta_hat: beta, g, certificate, cosets, stabilizer_invariant });
        }
        let remainder = Signomial::from_terms(n, flavor, self.remainder)?;
        Ok(SymmetricSageDecomposition { pieces, remainder })
    }
}
