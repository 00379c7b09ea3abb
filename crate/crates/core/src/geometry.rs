//! Exact convex geometry over exponent supports.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::{serde_q, ExponentVector, Rational};
use crate::lp::{self, LpOutcome};

/// Default largest support handed to circuit enumeration.
pub const DEFAULT_CIRCUIT_CAP: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HullStatus {
    Outside,
    Boundary,
    RelativeInterior,
    Interior,
}

impl HullStatus {
    pub fn is_member(self) -> bool {
        self != HullStatus::Outside
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HullWitness {
    /// Convex weights: `origin` for the adjoined origin, `weights` per generator.
    Barycentric {
        #[serde(serialize_with = "serde_q::option")]
        origin: Option<Rational>,
        #[serde(serialize_with = "serde_q::vec")]
        weights: Vec<Rational>,
    },
    /// `ℓ·p > offset ≥ ℓ·g` for every generator `g`.
    Separating {
        #[serde(serialize_with = "serde_q::vec")]
        functional: Vec<Rational>,
        #[serde(serialize_with = "serde_q::scalar")]
        offset: Rational,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct HullMembership {
    pub status: HullStatus,
    pub witness: HullWitness,
}

/// A normalized simplicial circuit: `β = Σ λ_α α` with `λ > 0`, `Σ λ = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CircuitVector {
    #[serde(serialize_with = "serde_q::pairs")]
    pub positive_support: Vec<(ExponentVector, Rational)>,
    pub negative_point: ExponentVector,
    pub normalized: bool,
}

impl CircuitVector {
    pub fn weights_f64(&self) -> Vec<f64> {
        self.positive_support.iter().map(|(_, w)| crate::exponent::rational_to_f64(w)).collect()
    }
}

/// Minimal face of `conv(generators)` containing `point`.
#[derive(Clone, Debug)]
pub struct Face {
    /// `members[i]` is true when generator `i` lies on the face.
    pub members: Vec<bool>,
    /// Convex weights, strictly positive exactly on the face.
    pub weights: Vec<Rational>,
}

impl Face {
    pub fn indices(&self) -> Vec<usize> {
        (0..self.members.len()).filter(|&i| self.members[i]).collect()
    }

    pub fn is_everything(&self) -> bool {
        self.members.iter().all(|&m| m)
    }
}

fn check_dims(point: &ExponentVector, generators: &[ExponentVector]) -> Result<()> {
    for g in generators {
        if g.dim() != point.dim() {
            return Err(Error::DimensionMismatch { expected: point.dim(), found: g.dim() });
        }
    }
    Ok(())
}

/// Finds the convex combination of `generators` equal to `point` with the
/// largest support, which spans the minimal face containing `point`.
/// Returns `None` when `point` is outside the hull.
pub fn minimal_face(point: &ExponentVector, generators: &[ExponentVector]) -> Result<Option<Face>> {
    check_dims(point, generators)?;
    let k = generators.len();
    let n = point.dim();
    if k == 0 {
        return Ok(None);
    }
    // Columns: μ (k), y (k), s1 (k), s2 (k).
    let cols = 4 * k;
    let zero = Rational::zero();
    let one = Rational::one();
    let mut a = Vec::with_capacity(n + 2 * k);
    let mut b = Vec::with_capacity(n + 2 * k);
    for j in 0..n {
        let mut row = vec![zero.clone(); cols];
        for (g, gen) in generators.iter().enumerate() {
            row[g] = &gen.coords()[j] - &point.coords()[j];
        }
        a.push(row);
        b.push(zero.clone());
    }
    for g in 0..k {
        let mut row = vec![zero.clone(); cols];
        row[g] = one.clone();
        row[k + g] = -one.clone();
        row[2 * k + g] = -one.clone();
        a.push(row);
        b.push(zero.clone());
        let mut row = vec![zero.clone(); cols];
        row[k + g] = one.clone();
        row[3 * k + g] = one.clone();
        a.push(row);
        b.push(one.clone());
    }
    let mut c = vec![zero.clone(); cols];
    for v in c.iter_mut().skip(k).take(k) {
        *v = one.clone();
    }
    let LpOutcome::Optimal { x, value } = lp::maximize(&a, &b, &c) else {
        return Err(Error::Numerical("support LP is always feasible and bounded".into()));
    };
    if value.is_zero() {
        return Ok(None);
    }
    let members: Vec<bool> = (0..k).map(|g| x[k + g] == one).collect();
    let total = x[..k].iter().fold(Rational::zero(), |acc, v| acc + v);
    let weights = x[..k].iter().map(|v| v / &total).collect();
    Ok(Some(Face { members, weights }))
}

/// Some convex combination of `generators` equal to `point`, if any.
pub fn convex_combination(point: &ExponentVector, generators: &[ExponentVector]) -> Result<Option<Vec<Rational>>> {
    check_dims(point, generators)?;
    let k = generators.len();
    let mut a: Vec<Vec<Rational>> = (0..point.dim())
        .map(|j| generators.iter().map(|g| g.coords()[j].clone()).collect())
        .collect();
    let mut b: Vec<Rational> = point.coords().to_vec();
    a.push(vec![Rational::one(); k]);
    b.push(Rational::one());
    Ok(lp::feasible_point(&a, &b, k))
}

/// Dimension of the affine hull.
pub fn affine_dimension(points: &[ExponentVector]) -> usize {
    let Some(first) = points.first() else { return 0 };
    let diffs: Vec<Vec<Rational>> = points[1..].iter().map(|p| p.sub(first).into_coords()).collect();
    lp::row_basis(&diffs).len()
}

/// Dimension of the linear span.
pub fn linear_dimension(points: &[ExponentVector]) -> usize {
    let rows: Vec<Vec<Rational>> = points.iter().map(|p| p.coords().to_vec()).collect();
    lp::row_basis(&rows).len()
}

fn separating_functional(point: &ExponentVector, generators: &[ExponentVector]) -> (Vec<Rational>, Rational) {
    let n = point.dim();
    let k = generators.len();
    // Columns: ℓ⁺ (n), ℓ⁻ (n), s⁺, s⁻, t (k), u (n), v (n).
    let cols = 4 * n + 2 + k;
    let zero = Rational::zero();
    let one = Rational::one();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (g, gen) in generators.iter().enumerate() {
        let mut row = vec![zero.clone(); cols];
        for j in 0..n {
            row[j] = gen.coords()[j].clone();
            row[n + j] = -gen.coords()[j].clone();
        }
        row[2 * n] = -one.clone();
        row[2 * n + 1] = one.clone();
        row[2 * n + 2 + g] = one.clone();
        a.push(row);
        b.push(zero.clone());
    }
    for j in 0..n {
        let mut row = vec![zero.clone(); cols];
        row[j] = one.clone();
        row[2 * n + 2 + k + j] = one.clone();
        a.push(row);
        b.push(one.clone());
        let mut row = vec![zero.clone(); cols];
        row[n + j] = one.clone();
        row[3 * n + 2 + k + j] = one.clone();
        a.push(row);
        b.push(one.clone());
    }
    let mut c = vec![zero.clone(); cols];
    for j in 0..n {
        c[j] = point.coords()[j].clone();
        c[n + j] = -point.coords()[j].clone();
    }
    c[2 * n] = -one.clone();
    c[2 * n + 1] = one.clone();
    let LpOutcome::Optimal { x, .. } = lp::maximize(&a, &b, &c) else {
        unreachable!("separation LP is feasible and bounded");
    };
    let functional: Vec<Rational> = (0..n).map(|j| &x[j] - &x[n + j]).collect();
    let dot = |p: &ExponentVector| {
        p.coords().iter().zip(&functional).fold(Rational::zero(), |acc, (a, l)| acc + a * l)
    };
    let offset = generators.iter().map(dot).max().expect("nonempty generators");
    (functional, offset)
}

/// Locates `point` relative to `conv(generators ∪ {0 if include_origin})`.
pub fn hull_locate(point: &ExponentVector, generators: &[ExponentVector], include_origin: bool) -> Result<HullMembership> {
    if generators.is_empty() && !include_origin {
        return Err(Error::Precondition("hull of an empty generator set".into()));
    }
    let mut gens = generators.to_vec();
    if include_origin {
        gens.push(ExponentVector::zeros(point.dim()));
    }
    let Some(face) = minimal_face(point, &gens)? else {
        let (functional, offset) = separating_functional(point, &gens);
        return Ok(HullMembership { status: HullStatus::Outside, witness: HullWitness::Separating { functional, offset } });
    };
    let status = if face.is_everything() {
        if affine_dimension(&gens) == point.dim() {
            HullStatus::Interior
        } else {
            HullStatus::RelativeInterior
        }
    } else {
        HullStatus::Boundary
    };
    let mut weights = face.weights;
    let origin = if include_origin { weights.pop() } else { None };
    Ok(HullMembership { status, witness: HullWitness::Barycentric { origin, weights } })
}

/// Exact barycentric coordinates of `point` in the affinely independent `simplex`.
pub fn barycentric(point: &ExponentVector, simplex: &[ExponentVector]) -> Option<Vec<Rational>> {
    let n = point.dim();
    let mut m: Vec<Vec<Rational>> = (0..n).map(|j| simplex.iter().map(|g| g.coords()[j].clone()).collect()).collect();
    m.push(vec![Rational::one(); simplex.len()]);
    let mut r = point.coords().to_vec();
    r.push(Rational::one());
    lp::solve_unique(&m, &r)
}

/// All normalized simplicial circuits with negative point `beta` and positive
/// support drawn from `support ∖ {beta}`.
pub fn enumerate_circuits(support: &[ExponentVector], beta: &ExponentVector, cap: usize) -> Result<Vec<CircuitVector>> {
    check_dims(beta, support)?;
    let mut others: Vec<ExponentVector> = support.iter().filter(|p| *p != beta).cloned().collect();
    others.sort();
    others.dedup();
    if others.len() + 1 > cap {
        return Err(Error::CircuitBudget { points: others.len() + 1, cap });
    }
    let max_size = beta.dim() + 1;
    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    extend_circuits(&others, beta, max_size, 0, &mut chosen, &mut out);
    Ok(out)
}

fn extend_circuits(
    points: &[ExponentVector],
    beta: &ExponentVector,
    max_size: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    out: &mut Vec<CircuitVector>,
) {
    for i in start..points.len() {
        chosen.push(i);
        let simplex: Vec<ExponentVector> = chosen.iter().map(|&k| points[k].clone()).collect();
        if affine_dimension(&simplex) + 1 == simplex.len() {
            if simplex.len() >= 2 {
                if let Some(w) = barycentric(beta, &simplex) {
                    if w.iter().all(Signed::is_positive) {
                        out.push(CircuitVector {
                            positive_support: simplex.iter().cloned().zip(w).collect(),
                            negative_point: beta.clone(),
                            normalized: true,
                        });
                    }
                }
            }
            if chosen.len() < max_size {
                extend_circuits(points, beta, max_size, i + 1, chosen, out);
            }
        }
        chosen.pop();
    }
}

/// A circuit usable for polynomials: even positive support, natural negative point.
pub fn sonc_admissible(circuit: &CircuitVector) -> bool {
    circuit.positive_support.iter().all(|(a, _)| a.is_even()) && circuit.negative_point.is_natural()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::{q, qi};

    fn ev(c: &[i64]) -> ExponentVector {
        ExponentVector::from_ints(c)
    }

    fn orbit3(a: [i64; 3]) -> Vec<ExponentVector> {
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut v: Vec<_> = perms.iter().map(|p| ev(&[a[p[0]], a[p[1]], a[p[2]]])).collect();
        v.sort();
        v.dedup();
        v
    }

    #[test]
    fn hexagon_interior_point() {
        let h = hull_locate(&ev(&[2, 1, 1]), &orbit3([0, 2, 4]), true).unwrap();
        assert_eq!(h.status, HullStatus::Interior);
        let HullWitness::Barycentric { origin, weights } = h.witness else { panic!() };
        let total = weights.iter().fold(origin.clone().unwrap(), |a, w| a + w);
        assert_eq!(total, qi(1));
    }

    #[test]
    fn vertex_is_boundary() {
        let gens = orbit3([4, 2, 0]);
        assert_eq!(hull_locate(&ev(&[4, 2, 0]), &gens, false).unwrap().status, HullStatus::Boundary);
    }

    #[test]
    fn outside_with_strict_separation() {
        let gens = orbit3([4, 2, 1]);
        let p = ev(&[3, 3, 0]);
        let h = hull_locate(&p, &gens, true).unwrap();
        assert_eq!(h.status, HullStatus::Outside);
        let HullWitness::Separating { functional, offset } = h.witness else { panic!() };
        let lp: Rational = p.coords().iter().zip(&functional).map(|(a, b)| a * b).sum();
        assert!(lp > offset);
    }

    #[test]
    fn relative_interior_of_a_segment() {
        let h = hull_locate(&ev(&[2, 2]), &[ev(&[4, 0]), ev(&[0, 4])], false).unwrap();
        assert_eq!(h.status, HullStatus::RelativeInterior);
    }

    #[test]
    fn circuits_on_a_line() {
        let support = [ev(&[0]), ev(&[2]), ev(&[4])];
        let cs = enumerate_circuits(&support, &ev(&[2]), DEFAULT_CIRCUIT_CAP).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].positive_support, vec![(ev(&[0]), q(1, 2)), (ev(&[4]), q(1, 2))]);
    }

    #[test]
    fn midpoint_circuit() {
        let support = [ev(&[4, 0]), ev(&[0, 4]), ev(&[2, 2])];
        let cs = enumerate_circuits(&support, &ev(&[2, 2]), DEFAULT_CIRCUIT_CAP).unwrap();
        assert_eq!(cs.len(), 1);
    }

    #[test]
    fn budget_is_enforced() {
        let support: Vec<_> = (0..25).map(|i| ev(&[i])).collect();
        assert!(matches!(enumerate_circuits(&support, &ev(&[3]), 20), Err(Error::CircuitBudget { .. })));
        assert!(enumerate_circuits(&support, &ev(&[3]), 30).is_ok());
    }

    #[test]
    fn admissibility() {
        let c = |pts: &[(&[i64], Rational)], b: &[i64]| CircuitVector {
            positive_support: pts.iter().map(|(e, w)| (ev(e), w.clone())).collect(),
            negative_point: ev(b),
            normalized: true,
        };
        assert!(sonc_admissible(&c(&[(&[4, 0], q(1, 2)), (&[0, 4], q(1, 2))], &[2, 2])));
        assert!(!sonc_admissible(&c(&[(&[3, 0], q(1, 3)), (&[0, 3], q(2, 3))], &[1, 2])));
        assert!(sonc_admissible(&c(&[(&[6, 0], q(1, 2)), (&[0, 6], q(1, 2))], &[3, 3])));
    }
}
