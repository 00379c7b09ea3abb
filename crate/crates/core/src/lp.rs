//! Dense two-phase simplex over exact rationals with Bland's rule.

use num_traits::{Signed, Zero};

use crate::exponent::Rational;

#[derive(Clone, Debug)]
pub(crate) enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, col: usize, reduced: &mut [Rational]) {
        let p = self.rows[r][col].clone();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v /= &p;
            }
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        if !reduced[col].is_zero() {
            let factor = reduced[col].clone();
            for (v, pv) in reduced.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        self.basis[r] = col;
    }

    /// Reduced costs `c_j − c_B B⁻¹ A_j`, with the last slot holding `−c_B x_B`.
    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut r: Vec<Rational> = cost.to_vec();
        r.push(Rational::zero());
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (v, a) in r.iter_mut().zip(row) {
                if !a.is_zero() {
                    *v -= cb * a;
                }
            }
        }
        r
    }

    /// Runs simplex iterations on columns `< allowed`. Returns false when unbounded.
    fn optimize(&mut self, reduced: &mut [Rational], allowed: usize) -> bool {
        loop {
            let entering = (0..allowed).find(|&j| reduced[j].is_positive());
            let Some(col) = entering else { return true };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, _)) = best else { return false };
            self.pivot(r, col, reduced);
        }
    }
}

/// Maximizes `c·x` subject to `A x = b`, `x ≥ 0`.
pub(crate) fn maximize(a: &[Vec<Rational>], b: &[Rational], c: &[Rational]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    let width = n + m;
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let negate = b[i].is_negative();
        let mut row = Vec::with_capacity(width + 1);
        for j in 0..n {
            row.push(if negate { -a[i][j].clone() } else { a[i][j].clone() });
        }
        for k in 0..m {
            row.push(if k == i { Rational::from_integer(1.into()) } else { Rational::zero() });
        }
        row.push(b[i].abs());
        rows.push(row);
    }
    let mut t = Tableau { rows, basis: (n..n + m).collect(), width };

    let mut phase1_cost = vec![Rational::zero(); width];
    for v in phase1_cost.iter_mut().skip(n) {
        *v = Rational::from_integer((-1).into());
    }
    let mut reduced = t.reduced_costs(&phase1_cost);
    t.optimize(&mut reduced, width);
    let infeasibility = &reduced[width];
    if !infeasibility.is_zero() {
        return LpOutcome::Infeasible;
    }

    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                Some(col) => {
                    let mut scratch = vec![Rational::zero(); width + 1];
                    t.pivot(i, col, &mut scratch);
                }
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    let mut cost = c.to_vec();
    cost.extend(std::iter::repeat_n(Rational::zero(), m));
    let mut reduced = t.reduced_costs(&cost);
    if !t.optimize(&mut reduced, n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &bv) in t.basis.iter().enumerate() {
        if bv < n {
            x[bv] = t.rhs(i).clone();
        }
    }
    let value = x.iter().zip(c).fold(Rational::zero(), |acc, (xi, ci)| acc + xi * ci);
    LpOutcome::Optimal { x, value }
}

/// Feasibility of `A x = b`, `x ≥ 0`, returning a basic solution.
pub(crate) fn feasible_point(a: &[Vec<Rational>], b: &[Rational], n: usize) -> Option<Vec<Rational>> {
    match maximize(a, b, &vec![Rational::zero(); n]) {
        LpOutcome::Optimal { x, .. } => Some(x),
        _ => None,
    }
}

/// Rank of a rational matrix by exact elimination, with the indices of
/// rows forming a basis of the row space (in input order).
pub(crate) fn row_basis(rows: &[Vec<Rational>]) -> Vec<usize> {
    let mut echelon: Vec<(usize, Vec<Rational>)> = Vec::new();
    let mut chosen = Vec::new();
    for (idx, row) in rows.iter().enumerate() {
        let mut v = row.clone();
        for (pc, e) in &echelon {
            if !v[*pc].is_zero() {
                let f = v[*pc].clone() / &e[*pc];
                for (vi, ei) in v.iter_mut().zip(e) {
                    if !ei.is_zero() {
                        *vi -= &f * ei;
                    }
                }
            }
        }
        if let Some(pc) = v.iter().position(|x| !x.is_zero()) {
            echelon.push((pc, v));
            chosen.push(idx);
        }
    }
    chosen
}

/// Solves the square or overdetermined system `M y = r` exactly if consistent
/// with a unique solution.
pub(crate) fn solve_unique(m: &[Vec<Rational>], r: &[Rational]) -> Option<Vec<Rational>> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut aug: Vec<Vec<Rational>> =
        m.iter().zip(r).map(|(row, ri)| row.iter().cloned().chain(std::iter::once(ri.clone())).collect()).collect();
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..cols {
        let Some(p) = (pivot_row..rows).find(|&i| !aug[i][col].is_zero()) else { return None };
        aug.swap(pivot_row, p);
        let pv = aug[pivot_row][col].clone();
        for v in aug[pivot_row].iter_mut() {
            *v /= &pv;
        }
        let prow = aug[pivot_row].clone();
        for (i, row) in aug.iter_mut().enumerate() {
            if i != pivot_row && !row[col].is_zero() {
                let f = row[col].clone();
                for (v, pv) in row.iter_mut().zip(&prow) {
                    if !pv.is_zero() {
                        *v -= &f * pv;
                    }
                }
            }
        }
        pivots.push(col);
        pivot_row += 1;
    }
    if aug[pivot_row..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    Some((0..cols).map(|k| aug[k][cols].clone()).collect())
}
