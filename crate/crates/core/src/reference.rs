//! Closed-form minima and SONC bounds for two symmetric families, kept free of
//! any solver code so they can serve as an independent oracle.
//!
//! Quadratic family: `Σxᵢ² + aΣxᵢ + bΣ_{i<j} xᵢxⱼ` in `n` variables.
//! Quartic family: `x⁴ + y⁴ + a·x²y² − b·(x²y + xy²)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sage::Bound;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReferenceResult {
    pub f_star: Bound,
    pub f_relax: Bound,
    pub case_label: String,
    pub minimizer: Option<Vec<f64>>,
}

impl ReferenceResult {
    fn new(f_star: Bound, f_relax: Bound, case_label: &str, minimizer: Option<Vec<f64>>) -> Self {
        Self { f_star, f_relax, case_label: case_label.to_string(), minimizer }
    }
}

/// `−a²n/den`, reading `den = 0` as the degenerate limit: `0` when `a = 0`,
/// unbounded otherwise.
fn ratio_bound(a: f64, n: f64, den: f64) -> Bound {
    if den > 0.0 {
        Bound::Finite(-a * a * n / den)
    } else if a == 0.0 {
        Bound::Finite(0.0)
    } else {
        Bound::Unbounded
    }
}

pub fn quadratic_reference(n: usize, a: f64, b: f64) -> Result<ReferenceResult> {
    if n < 2 {
        return Err(Error::Precondition(format!("quadratic family needs n ≥ 2, got {n}")));
    }
    let m = (n - 1) as f64;
    let nf = n as f64;
    let threshold = 2.0 / m;
    if b > 2.0 || b < -threshold {
        return Ok(ReferenceResult::new(Bound::Unbounded, Bound::Unbounded, "unbounded", None));
    }
    let den_star = 4.0 + 2.0 * b * m;
    let f_star = ratio_bound(a, nf, den_star);
    let minimizer = (den_star > 0.0).then(|| vec![-a / (2.0 + b * m); n]);
    if b <= 0.0 {
        return Ok(ReferenceResult::new(f_star, f_star, "negative-cross", minimizer));
    }
    if b <= threshold {
        let f_relax = ratio_bound(a, nf, 4.0 - 2.0 * b * m);
        return Ok(ReferenceResult::new(f_star, f_relax, "positive-cross", minimizer));
    }
    Ok(ReferenceResult::new(f_star, Bound::Unbounded, "no-sonc-bound", minimizer))
}

fn quartic_diagonal_min(a: f64, b: f64) -> f64 {
    -27.0 * b.powi(4) / (16.0 * (a + 2.0).powi(3))
}

fn quartic_sonc(a: f64, b: f64) -> f64 {
    -b.powi(4) / (8.0 * a * a)
}

/// Minimum for `a ≥ 22`, attained off the diagonal.
pub fn quartic_large_a_min(a: f64, b: f64) -> f64 {
    let delta = (5.0 + 2.0 * a).sqrt();
    -(a * a + 14.0 * a + 22.0 + 2.0 * (2.0 * a + 5.0) * delta) * b.powi(4)
        / (64.0 * (a - 2.0).powi(3) * (a + 2.0))
}

pub fn quartic_reference(a: f64, b: f64) -> ReferenceResult {
    if a <= -2.0 {
        if a == -2.0 && b == 0.0 {
            return ReferenceResult::new(Bound::Finite(0.0), Bound::Finite(0.0), "degenerate-square", Some(vec![0.0, 0.0]));
        }
        return ReferenceResult::new(Bound::Unbounded, Bound::Unbounded, "unbounded", None);
    }
    let x0 = 3.0 * b / (2.0 * (a + 2.0));
    if a <= 4.0 {
        let v = Bound::Finite(quartic_diagonal_min(a, b));
        return ReferenceResult::new(v, v, "diagonal-exact", Some(vec![x0, x0]));
    }
    let f_relax = Bound::Finite(quartic_sonc(a, b));
    if a <= 22.0 {
        return ReferenceResult::new(Bound::Finite(quartic_diagonal_min(a, b)), f_relax, "diagonal-gap", Some(vec![x0, x0]));
    }
    let delta = (5.0 + 2.0 * a).sqrt();
    let root = ((2.0 * a * a - 36.0 - 22.0 * a - (20.0 + 2.0 * a) * delta) / (a + 2.0)).max(0.0).sqrt();
    let scale = b / (8.0 * (a - 2.0));
    let minimizer = vec![scale * (3.0 + delta + root), scale * (3.0 + delta - root)];
    ReferenceResult::new(Bound::Finite(quartic_large_a_min(a, b)), f_relax, "off-diagonal", Some(minimizer))
}

#[derive(Clone, Debug, Serialize)]
pub struct GapRow {
    pub k: u32,
    pub f_star: f64,
    pub f_sonc: f64,
    /// `f_sonc − f_star`.
    pub gap: f64,
}

/// `f_k = (1/k)(x⁴ + y⁴ + 8x²y² − k(x²y + xy²))`, whose coefficients have
/// sup-norm 1 once `k ≥ 8`.
pub fn gap_growth(ks: &[u32]) -> Result<Vec<GapRow>> {
    ks.iter()
        .map(|&k| {
            if k < 8 {
                return Err(Error::Precondition(format!("gap family needs k ≥ 8, got {k}")));
            }
            let kf = k as f64;
            let f_star = -27.0 * kf.powi(3) / 16000.0;
            let f_sonc = -kf.powi(3) / 512.0;
            Ok(GapRow { k, f_star, f_sonc, gap: f_sonc - f_star })
        })
        .collect()
}

/// The gap family member as `(exponent, coefficient)` pairs.
pub fn gap_polynomial(k: u32) -> Vec<([i64; 2], f64)> {
    let inv = 1.0 / k as f64;
    vec![([4, 0], inv), ([0, 4], inv), ([2, 2], 8.0 * inv), ([2, 1], -1.0), ([1, 2], -1.0)]
}

pub fn quadratic_polynomial(n: usize, a: f64, b: f64) -> Vec<(Vec<i64>, f64)> {
    let mut terms = Vec::new();
    for i in 0..n {
        let mut e = vec![0; n];
        e[i] = 2;
        terms.push((e.clone(), 1.0));
        e[i] = 1;
        terms.push((e, a));
        for j in i + 1..n {
            let mut e = vec![0; n];
            e[i] = 1;
            e[j] = 1;
            terms.push((e, b));
        }
    }
    terms
}

pub fn quartic_polynomial(a: f64, b: f64) -> Vec<(Vec<i64>, f64)> {
    vec![(vec![4, 0], 1.0), (vec![0, 4], 1.0), (vec![2, 2], a), (vec![2, 1], -b), (vec![1, 2], -b)]
}
