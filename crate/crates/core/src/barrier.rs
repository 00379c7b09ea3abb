//! Log-barrier interior-point method for relative-entropy programs.
//!
//! Variables `z ∈ ℝᴺ`; minimize `q·z` subject to
//! `z_i > 0` for listed indices, strict linear inequalities, entropy
//! inequalities `Σ w(ν ln(ν/c) − ν) < r + a·z` and homogeneous equalities.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug)]
pub(crate) struct EntropyTerm {
    pub nu: usize,
    pub c: usize,
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct EntropyConstraint {
    pub terms: Vec<EntropyTerm>,
    pub rhs: f64,
    pub rhs_linear: Vec<(usize, f64)>,
}

#[derive(Clone, Debug)]
pub(crate) struct LinearConstraint {
    pub coefs: Vec<(usize, f64)>,
    pub bound: f64,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Program {
    pub dim: usize,
    pub objective: Vec<(usize, f64)>,
    pub positive: Vec<usize>,
    pub linear: Vec<LinearConstraint>,
    pub entropy: Vec<EntropyConstraint>,
    pub equalities: Vec<Vec<(usize, f64)>>,
}

#[derive(Clone, Debug)]
pub(crate) struct Options {
    pub gap_tol: f64,
    pub max_newton: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self { gap_tol: 1e-11, max_newton: 4000 }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Outcome {
    pub z: Vec<f64>,
}

impl EntropyConstraint {
    pub fn divergence(&self, z: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.weight * (z[t.nu] * (z[t.nu] / z[t.c]).ln() - z[t.nu])).sum()
    }

    pub fn slack(&self, z: &[f64]) -> f64 {
        self.rhs + self.rhs_linear.iter().map(|(i, a)| a * z[*i]).sum::<f64>() - self.divergence(z)
    }
}

impl LinearConstraint {
    pub fn slack(&self, z: &[f64]) -> f64 {
        self.bound - self.coefs.iter().map(|(i, a)| a * z[*i]).sum::<f64>()
    }
}

impl Program {
    fn constraint_count(&self) -> usize {
        self.positive.len() + self.linear.len() + self.entropy.len()
    }

    /// Barrier value, or `None` outside the open domain.
    fn barrier(&self, z: &[f64]) -> Option<f64> {
        let mut phi = 0.0;
        for &i in &self.positive {
            if !(z[i] > 0.0) {
                return None;
            }
            phi -= z[i].ln();
        }
        for l in &self.linear {
            let s = l.slack(z);
            if !(s > 0.0) {
                return None;
            }
            phi -= s.ln();
        }
        for e in &self.entropy {
            let s = e.slack(z);
            if !(s > 0.0) || !s.is_finite() {
                return None;
            }
            phi -= s.ln();
        }
        Some(phi)
    }

    pub fn strictly_feasible(&self, z: &[f64]) -> bool {
        self.barrier(z).is_some()
    }

    fn derivatives(&self, z: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.dim;
        let mut g = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        for &i in &self.positive {
            g[i] -= 1.0 / z[i];
            h[(i, i)] += 1.0 / (z[i] * z[i]);
        }
        for l in &self.linear {
            let s = l.slack(z);
            for &(i, a) in &l.coefs {
                g[i] += a / s;
                for &(j, b) in &l.coefs {
                    h[(i, j)] += a * b / (s * s);
                }
            }
        }
        for e in &self.entropy {
            let s = e.slack(z);
            // ∇s as a sparse list.
            let mut grad: Vec<(usize, f64)> = e.rhs_linear.clone();
            for t in &e.terms {
                let (nu, c) = (z[t.nu], z[t.c]);
                grad.push((t.nu, -t.weight * (nu / c).ln()));
                grad.push((t.c, t.weight * nu / c));
            }
            for &(i, a) in &grad {
                g[i] -= a / s;
                for &(j, b) in &grad {
                    h[(i, j)] += a * b / (s * s);
                }
            }
            for t in &e.terms {
                let (nu, c) = (z[t.nu], z[t.c]);
                let w = t.weight / s;
                h[(t.nu, t.nu)] += w / nu;
                h[(t.nu, t.c)] -= w / c;
                h[(t.c, t.nu)] -= w / c;
                h[(t.c, t.c)] += w * nu / (c * c);
            }
        }
        (g, h)
    }

    /// Orthonormal basis (columns) of the null space of the equality rows.
    /// Orthonormal bases of the equality row space and of its complement.
    fn null_space(&self) -> (Vec<DVector<f64>>, DMatrix<f64>) {
        let n = self.dim;
        let mut rows: Vec<DVector<f64>> = Vec::new();
        for row in &self.equalities {
            let mut v = DVector::zeros(n);
            for &(i, a) in row {
                v[i] += a;
            }
            rows.push(v);
        }
        let mut span: Vec<DVector<f64>> = Vec::new();
        for v in rows {
            if let Some(u) = orthonormalize(v, &span) {
                span.push(u);
            }
        }
        let mut null: Vec<DVector<f64>> = Vec::new();
        for i in 0..n {
            if span.len() + null.len() == n {
                break;
            }
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            let both: Vec<DVector<f64>> = span.iter().chain(null.iter()).cloned().collect();
            if let Some(u) = orthonormalize(e, &both) {
                null.push(u);
            }
        }
        if null.is_empty() {
            return (span, DMatrix::zeros(n, 0));
        }
        (span, DMatrix::from_columns(&null))
    }

    /// Minimizes the objective from a strictly feasible start. `stop` is
    /// consulted after every Newton step.
    pub fn solve(&self, start: Vec<f64>, options: &Options, stop: &dyn Fn(&[f64]) -> bool) -> Outcome {
        let n = self.dim;
        let m = self.constraint_count().max(1) as f64;
        let mut q = DVector::zeros(n);
        for &(i, c) in &self.objective {
            q[i] += c;
        }
        let (rows, basis) = if self.equalities.is_empty() { (Vec::new(), DMatrix::identity(n, n)) } else { self.null_space() };
        // Null-space steps drift off the equalities by rounding; pull each
        // accepted iterate back when that keeps it interior.
        let project = |z: Vec<f64>| -> Vec<f64> {
            if rows.is_empty() {
                return z;
            }
            let mut v = DVector::from_vec(z.clone());
            for u in &rows {
                let d = u.dot(&v);
                v -= u * d;
            }
            let v: Vec<f64> = v.iter().copied().collect();
            if self.barrier(&v).is_some() {
                v
            } else {
                z
            }
        };
        let mut z = start;
        debug_assert!(self.strictly_feasible(&z));
        // A start far below the optimum would make the first centering crawl.
        let obj0: f64 = self.objective.iter().map(|&(i, c)| c * z[i]).sum();
        let mut t = (m / (1.0 + obj0.abs())).min(1.0);
        let mut newton_steps = 0;
        loop {
            loop {
                if newton_steps >= options.max_newton {
                    return Outcome { z };
                }
                newton_steps += 1;
                let (gb, hb) = self.derivatives(&z);
                let grad = (&q * t + gb).tr_mul(&basis).transpose();
                let hess = basis.tr_mul(&(&hb * &basis));
                let Some(dy) = solve_spd(hess, &(-&grad)) else { break };
                let decrement = -grad.dot(&dy);
                let dz = &basis * dy;
                // Compare differences: the absolute values t·qᵀz swamp the barrier at large t.
                let phi0 = self.barrier(&z).unwrap_or(f64::INFINITY);
                let mut step = 1.0;
                let mut moved = false;
                let mut decrease = 0.0;
                for _ in 0..80 {
                    let cand: Vec<f64> = z.iter().zip(dz.iter()).map(|(a, b)| a + step * b).collect();
                    if let Some(phi) = self.barrier(&cand) {
                        // Linear part from the realized move, which may round to zero.
                        let moved_lin: f64 = self.objective.iter().map(|&(i, c)| c * (cand[i] - z[i])).sum();
                        let change = t * moved_lin + (phi - phi0);
                        if change <= -0.25 * step * decrement.max(0.0) {
                            z = cand;
                            moved = true;
                            decrease = -change;
                            break;
                        }
                    }
                    step *= 0.5;
                }
                if moved {
                    z = project(z);
                }
                if stop(&z) {
                    return Outcome { z };
                }
                // Tiny steps are fine far from the central path; only stop once
                // they no longer buy a measurable decrease.
                let level = (t * q.dot(&DVector::from_column_slice(&z))).abs() + phi0.abs();
                let stalled = step < 1e-6 && decrease <= 1e-12 * (1.0 + level);
                if !moved || decrement < 1e-10 || stalled {
                    break;
                }
            }
            if m / t < options.gap_tol {
                return Outcome { z };
            }
            t *= 8.0;
        }
    }
}

fn orthonormalize(mut v: DVector<f64>, basis: &[DVector<f64>]) -> Option<DVector<f64>> {
    let original = v.norm();
    for _ in 0..2 {
        for b in basis {
            let proj = b.dot(&v);
            v -= b * proj;
        }
    }
    let norm = v.norm();
    (norm > 1e-10 * original.max(1e-300)).then(|| v / norm)
}

fn solve_spd(h: DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if h.nrows() == 0 {
        return None;
    }
    if let Some(ch) = h.clone().cholesky() {
        let sol = ch.solve(rhs);
        if sol.iter().all(|v| v.is_finite()) {
            return Some(sol);
        }
    }
    let scale = h.amax().max(1e-300);
    let mut reg = h;
    for i in 0..reg.nrows() {
        reg[(i, i)] += 1e-13 * scale;
    }
    reg.lu().solve(rhs).filter(|s| s.iter().all(|v| v.is_finite()))
}
