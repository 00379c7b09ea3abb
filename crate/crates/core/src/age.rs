//! AGE membership: nonnegative signomials with at most one negative term.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::{rational_to_f64, ExponentVector, Rational};
use crate::geometry::{self, CircuitVector};
use crate::lp;
use crate::signomial::{serialize_coefficients, Signomial};

/// Gradient tolerance of the dual minimization.
pub const GRADIENT_TOL: f64 = 1e-10;
/// Default membership tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct AgeCertificate {
    pub beta: ExponentVector,
    #[serde(serialize_with = "serialize_coefficients")]
    pub nu: BTreeMap<ExponentVector, f64>,
    pub entropy_value: f64,
    pub slack: f64,
    pub minimizer: Option<Vec<f64>>,
}

/// Result of `inf_x Σ c_α e^{<α−β,x>}`.
#[derive(Clone, Debug)]
pub struct AgeInfimum {
    pub value: f64,
    /// Present only when the infimum is attained.
    pub minimizer: Option<Vec<f64>>,
    /// Dual weights on the face carrying the infimum; `D(ν, e·c) = −value`.
    pub nu: BTreeMap<ExponentVector, f64>,
    /// Support points on the minimal face containing `β`.
    pub face: Vec<ExponentVector>,
}

/// `Σ ν ln(ν/(e·c))` with `0·ln 0 = 0`.
pub fn relative_entropy(nu: &BTreeMap<ExponentVector, f64>, c: &BTreeMap<ExponentVector, f64>) -> f64 {
    nu.iter()
        .filter(|(_, &v)| v > 0.0)
        .map(|(e, &v)| {
            let ce = c.get(e).copied().unwrap_or(0.0);
            if ce <= 0.0 {
                f64::INFINITY
            } else {
                v * ((v / ce).ln() - 1.0)
            }
        })
        .sum()
}

/// Infimum of `Σ c_α e^{<α−β,x>}` over `x ∈ ℝⁿ`.
pub fn age_infimum(c: &BTreeMap<ExponentVector, f64>, beta: &ExponentVector) -> Result<AgeInfimum> {
    for (e, &v) in c {
        if e.dim() != beta.dim() {
            return Err(Error::DimensionMismatch { expected: beta.dim(), found: e.dim() });
        }
        if v < 0.0 {
            return Err(Error::NegativeCoefficient { exponent: e.to_string(), coef: v });
        }
    }
    if c.get(beta).is_some_and(|&v| v != 0.0) {
        return Err(Error::Precondition(format!("{beta} carries a coefficient in the positive part")));
    }
    let points: Vec<ExponentVector> = c.iter().filter(|(e, &v)| v > 0.0 && *e != beta).map(|(e, _)| e.clone()).collect();
    let empty = AgeInfimum { value: 0.0, minimizer: None, nu: BTreeMap::new(), face: Vec::new() };
    if points.is_empty() {
        return Ok(empty);
    }
    let Some(face) = geometry::minimal_face(beta, &points)? else {
        return Ok(empty);
    };
    let on_face: Vec<ExponentVector> = face.indices().into_iter().map(|i| points[i].clone()).collect();
    let coeffs: Vec<f64> = on_face.iter().map(|e| c[e]).collect();
    let (value, x) = minimize_on_face(&on_face, &coeffs, beta)?;
    let nu = on_face
        .iter()
        .zip(&coeffs)
        .map(|(e, &ce)| (e.clone(), ce * e.sub(beta).dot_f64(&x).exp()))
        .collect();
    let minimizer = face.is_everything().then_some(x);
    Ok(AgeInfimum { value, minimizer, nu, face: on_face })
}

/// Orthonormal basis (columns) of the span of the given exact vectors.
pub(crate) fn span_basis(vectors: &[Vec<Rational>], n: usize) -> DMatrix<f64> {
    let picked = lp::row_basis(vectors);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for &i in &picked {
        let mut v = DVector::from_iterator(n, vectors[i].iter().map(rational_to_f64));
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dot(&v);
                v -= b * proj;
            }
        }
        let norm = v.norm();
        basis.push(v / norm);
    }
    if basis.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    DMatrix::from_columns(&basis)
}

/// Minimizes `Σ c_α e^{<α−β,x>}` when `β` lies in the relative interior of the
/// hull of `points`; returns the value and a minimizer in `ℝⁿ`.
fn minimize_on_face(points: &[ExponentVector], coeffs: &[f64], beta: &ExponentVector) -> Result<(f64, Vec<f64>)> {
    let n = beta.dim();
    let diffs: Vec<Vec<Rational>> = points.iter().map(|p| p.sub(beta).into_coords()).collect();
    let q = span_basis(&diffs, n);
    let r = q.ncols();
    let w: Vec<DVector<f64>> = diffs
        .iter()
        .map(|d| q.transpose() * DVector::from_iterator(n, d.iter().map(rational_to_f64)))
        .collect();
    let logc: Vec<f64> = coeffs.iter().map(|c| c.ln()).collect();

    let objective = |z: &DVector<f64>| -> f64 {
        let s: Vec<f64> = logc.iter().zip(&w).map(|(lc, wa)| lc + wa.dot(z)).collect();
        let m = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m + s.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
    };

    let mut z = DVector::zeros(r);
    let mut fz = objective(&z);
    for _ in 0..500 {
        let s: Vec<f64> = logc.iter().zip(&w).map(|(lc, wa)| lc + wa.dot(&z)).collect();
        let m = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = s.iter().map(|v| (v - m).exp()).collect();
        let total: f64 = e.iter().sum();
        let mut g = DVector::zeros(r);
        let mut h = DMatrix::zeros(r, r);
        for (wa, ea) in w.iter().zip(&e) {
            let p = ea / total;
            g += wa * p;
            h += wa * wa.transpose() * p;
        }
        h -= &g * g.transpose();
        if g.amax() <= GRADIENT_TOL * 1e-3 {
            break;
        }
        let step = match h.clone().cholesky() {
            Some(ch) => ch.solve(&(-&g)),
            None => {
                let ridge = h.clone() + DMatrix::identity(r, r) * (1e-12 * (1.0 + h.amax()));
                ridge.lu().solve(&(-&g)).unwrap_or_else(|| -&g)
            }
        };
        let slope = g.dot(&step);
        if slope > -1e-300 {
            break;
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = &z + &step * t;
            let fc = objective(&cand);
            if fc <= fz + 1e-4 * t * slope {
                z = cand;
                fz = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let x = &q * &z;
    Ok((fz.exp(), x.iter().copied().collect()))
}

/// Decides membership of `f` in the AGE cone with negative point `beta`.
pub fn is_age(f: &Signomial, beta: &ExponentVector, tol: f64) -> Result<Option<AgeCertificate>> {
    if beta.dim() != f.n() {
        return Err(Error::DimensionMismatch { expected: f.n(), found: beta.dim() });
    }
    let mut c = BTreeMap::new();
    for (e, &v) in f.terms() {
        if e == beta {
            continue;
        }
        if v < 0.0 {
            return Err(Error::NegativeCoefficient { exponent: e.to_string(), coef: v });
        }
        c.insert(e.clone(), v);
    }
    let c_beta = f.coefficient(beta);
    let inf = age_infimum(&c, beta)?;
    if c_beta + inf.value < -tol {
        return Ok(None);
    }
    let entropy_value = relative_entropy(&inf.nu, &c);
    Ok(Some(AgeCertificate {
        beta: beta.clone(),
        nu: inf.nu,
        entropy_value,
        slack: c_beta - entropy_value,
        minimizer: inf.minimizer,
    }))
}

/// `∏ (c_α/λ_α)^{λ_α}` over the positive support of a circuit.
pub fn circuit_number(c: &BTreeMap<ExponentVector, f64>, circuit: &CircuitVector) -> f64 {
    log_circuit_number(c, circuit).exp()
}

fn log_circuit_number(c: &BTreeMap<ExponentVector, f64>, circuit: &CircuitVector) -> f64 {
    circuit
        .positive_support
        .iter()
        .map(|(a, lam)| {
            let l = rational_to_f64(lam);
            let ca = c.get(a).copied().unwrap_or(0.0);
            if ca <= 0.0 {
                f64::NEG_INFINITY
            } else {
                l * (ca / l).ln()
            }
        })
        .sum()
}

/// True iff the circuit number is at least `d`, compared in log space with a
/// relative slack of `1e-12` so that exact equality cases pass.
pub fn circuit_number_test(c: &BTreeMap<ExponentVector, f64>, d: f64, circuit: &CircuitVector) -> bool {
    if d <= 0.0 {
        return true;
    }
    let lhs = log_circuit_number(c, circuit);
    let rhs = d.ln();
    lhs >= rhs - 1e-12 * (1.0 + rhs.abs())
}
