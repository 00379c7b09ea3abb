use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::{ExponentVector, Rational};

/// Whether terms are read as `e^{<α,x>}` or as monomials `x^α`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Signomial,
    Polynomial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    #[serde(rename = "exp")]
    pub exponent: ExponentVector,
    #[serde(rename = "coef")]
    pub coefficient: f64,
}

/// Sparse exponential sum (or polynomial) with exact exponents.
///
/// Terms are merged per exponent and zero coefficients are dropped, so the
/// support is always well defined.
#[derive(Clone, Debug, PartialEq)]
pub struct Signomial {
    n: usize,
    flavor: Flavor,
    terms: BTreeMap<ExponentVector, f64>,
}

#[derive(Serialize, Deserialize)]
struct SignomialJson {
    n: usize,
    flavor: Flavor,
    terms: Vec<Term>,
}

/// Partition of a support into points with forced nonnegative coefficients and
/// points whose coefficients are unrestricted.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize)]
pub struct SupportSplit {
    pub positive: BTreeSet<ExponentVector>,
    pub negatives: BTreeSet<ExponentVector>,
}

impl SupportSplit {
    pub fn new(positive: BTreeSet<ExponentVector>, negatives: BTreeSet<ExponentVector>) -> Result<Self> {
        if let Some(p) = positive.intersection(&negatives).next() {
            return Err(Error::Precondition(format!("{p} is both positive and negative")));
        }
        Ok(Self { positive, negatives })
    }

    /// Split by coefficient sign.
    pub fn by_sign(f: &Signomial) -> Self {
        let mut split = Self::default();
        for (e, &c) in &f.terms {
            if c > 0.0 {
                split.positive.insert(e.clone());
            } else {
                split.negatives.insert(e.clone());
            }
        }
        split
    }
}

impl Signomial {
    pub fn new(n: usize, flavor: Flavor) -> Self {
        Self { n, flavor, terms: BTreeMap::new() }
    }

    pub fn from_terms<I>(n: usize, flavor: Flavor, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (ExponentVector, f64)>,
    {
        let mut f = Self::new(n, flavor);
        for (e, c) in terms {
            f.add_term(e, c)?;
        }
        Ok(f)
    }

    /// Convenience constructor from integer exponents.
    pub fn from_int_terms(n: usize, flavor: Flavor, terms: &[(&[i64], f64)]) -> Result<Self> {
        Self::from_terms(n, flavor, terms.iter().map(|(e, c)| (ExponentVector::from_ints(e), *c)))
    }

    pub fn constant(n: usize, flavor: Flavor, c: f64) -> Self {
        let mut f = Self::new(n, flavor);
        f.add_term(ExponentVector::zeros(n), c).expect("constant term is always valid");
        f
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn terms(&self) -> &BTreeMap<ExponentVector, f64> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = &ExponentVector> {
        self.terms.keys()
    }

    pub fn coefficient(&self, e: &ExponentVector) -> f64 {
        self.terms.get(e).copied().unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coefficient(&ExponentVector::zeros(self.n))
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn check_exponent(&self, e: &ExponentVector) -> Result<()> {
        if e.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: e.dim() });
        }
        if self.flavor == Flavor::Polynomial && !e.is_natural() {
            return Err(Error::NonPolynomialExponent(e.to_string()));
        }
        Ok(())
    }

    /// Adds `c·term(e)`, merging with an existing term and pruning zeros.
    pub fn add_term(&mut self, e: ExponentVector, c: f64) -> Result<()> {
        self.check_exponent(&e)?;
        if !c.is_finite() {
            return Err(Error::NonFiniteCoefficient(c));
        }
        let merged = self.coefficient(&e) + c;
        if merged == 0.0 {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, merged);
        }
        Ok(())
    }

    /// Overwrites the coefficient of `e` (removing it when zero).
    pub fn set_term(&mut self, e: ExponentVector, c: f64) -> Result<()> {
        self.check_exponent(&e)?;
        if !c.is_finite() {
            return Err(Error::NonFiniteCoefficient(c));
        }
        if c == 0.0 {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, c);
        }
        Ok(())
    }

    pub fn remove_term(&mut self, e: &ExponentVector) -> Option<f64> {
        self.terms.remove(e)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), c * s)).filter(|(_, c)| *c != 0.0).collect();
        Self { n: self.n, flavor: self.flavor, terms }
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c)?;
        }
        Ok(out)
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.plus(&other.scaled(-1.0))
    }

    /// Adds a constant.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.add_term(ExponentVector::zeros(self.n), c).expect("constant term is always valid");
        out
    }

    /// Relabels variables: coordinate `j` of each exponent moves to `perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let terms = self.terms.iter().map(|(e, &c)| (e.permuted(perm), c)).collect();
        Self { n: self.n, flavor: self.flavor, terms }
    }

    /// Same terms read as a signomial (the substitution `x = e^y`).
    pub fn to_signomial(&self) -> Self {
        Self { n: self.n, flavor: Flavor::Signomial, terms: self.terms.clone() }
    }

    /// Same terms read as a polynomial; fails unless all exponents are natural.
    pub fn to_polynomial(&self) -> Result<Self> {
        for e in self.terms.keys() {
            if !e.is_natural() {
                return Err(Error::NonPolynomialExponent(e.to_string()));
            }
        }
        Ok(Self { n: self.n, flavor: Flavor::Polynomial, terms: self.terms.clone() })
    }

    /// Largest deviation between coefficients of `self` and `other`.
    pub fn distance(&self, other: &Self) -> f64 {
        let keys: BTreeSet<&ExponentVector> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter().map(|e| (self.coefficient(e) - other.coefficient(e)).abs()).fold(0.0, f64::max)
    }

    /// Invariance under the transpositions `(i j)` in `pairs`, within `tol`.
    pub fn invariant_under(&self, pairs: &[(usize, usize)], tol: f64) -> bool {
        pairs.iter().all(|&(i, j)| {
            self.terms.iter().all(|(e, &c)| (self.coefficient(&e.swapped(i, j)) - c).abs() <= tol)
        })
    }

    /// Invariance under all coordinate permutations, within `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let pairs: Vec<_> = (1..self.n).map(|i| (i - 1, i)).collect();
        self.invariant_under(&pairs, tol)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.compile().evaluate(x)
    }

    /// Float snapshot for fast repeated evaluation.
    pub fn compile(&self) -> CompiledSignomial {
        let terms = self.terms.iter().map(|(e, &c)| (e.to_f64(), c)).collect();
        let powers = match self.flavor {
            Flavor::Polynomial => {
                Some(self.terms.keys().map(|e| e.to_naturals().expect("natural exponents")).collect())
            }
            Flavor::Signomial => None,
        };
        CompiledSignomial { n: self.n, terms, powers }
    }

    /// The univariate restriction `h(t) = f(t,…,t)` (after `x = e^y` for polynomials).
    pub fn diagonalize(&self) -> Signomial {
        let mut h = Signomial::new(1, Flavor::Signomial);
        for (e, &c) in &self.terms {
            h.add_term(ExponentVector::new(vec![e.sum()]), c).expect("univariate exponent");
        }
        h
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("serializable")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let doc = SignomialJson {
            n: self.n,
            flavor: self.flavor,
            terms: self.terms.iter().map(|(e, &c)| Term { exponent: e.clone(), coefficient: c }).collect(),
        };
        serde_json::to_value(doc).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SignomialJson = serde_json::from_str(text)?;
        Self::from_terms(doc.n, doc.flavor, doc.terms.into_iter().map(|t| (t.exponent, t.coefficient)))
    }

    pub fn from_json_value(value: serde_json::Value) -> Result<Self> {
        let doc: SignomialJson = serde_json::from_value(value)?;
        Self::from_terms(doc.n, doc.flavor, doc.terms.into_iter().map(|t| (t.exponent, t.coefficient)))
    }
}

impl Serialize for Signomial {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_value().serialize(serializer)
    }
}

impl fmt::Display for Signomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, &c)) in self.terms.iter().enumerate() {
            let sign = if c < 0.0 { "-" } else if k > 0 { "+" } else { "" };
            if k > 0 {
                write!(f, " {sign} ")?;
            } else {
                write!(f, "{sign}")?;
            }
            write!(f, "{}", c.abs())?;
            if e.is_zero() {
                continue;
            }
            match self.flavor {
                Flavor::Signomial => write!(f, "*exp{e}")?,
                Flavor::Polynomial => {
                    for (j, a) in e.coords().iter().enumerate() {
                        if *a == Rational::from_integer(1.into()) {
                            write!(f, "*x{}", j + 1)?;
                        } else if !num_traits::Zero::is_zero(a) {
                            write!(f, "*x{}^{}", j + 1, a)?;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Float form of a signomial for repeated evaluation.
#[derive(Clone, Debug)]
pub struct CompiledSignomial {
    n: usize,
    terms: Vec<(Vec<f64>, f64)>,
    powers: Option<Vec<Vec<u32>>>,
}

impl CompiledSignomial {
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: x.len() });
        }
        Ok(self.eval_unchecked(x))
    }

    pub fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match &self.powers {
            Some(powers) => self
                .terms
                .iter()
                .zip(powers)
                .map(|((_, c), p)| c * p.iter().zip(x).map(|(&k, xi)| xi.powi(k as i32)).product::<f64>())
                .sum(),
            None => self
                .terms
                .iter()
                .map(|(e, c)| c * e.iter().zip(x).map(|(a, xi)| a * xi).sum::<f64>().exp())
                .sum(),
        }
    }

    /// Sum of absolute term values at `x`, a natural scale for residuals.
    pub fn magnitude(&self, x: &[f64]) -> f64 {
        match &self.powers {
            Some(powers) => self
                .terms
                .iter()
                .zip(powers)
                .map(|((_, c), p)| (c * p.iter().zip(x).map(|(&k, xi)| xi.powi(k as i32)).product::<f64>()).abs())
                .sum(),
            None => self
                .terms
                .iter()
                .map(|(e, c)| c.abs() * e.iter().zip(x).map(|(a, xi)| a * xi).sum::<f64>().exp())
                .sum(),
        }
    }
}


/// Serializes an exponent-keyed map as a list of `{"exp", "coef"}` records.
pub(crate) fn serialize_coefficients<S: serde::Serializer>(
    map: &BTreeMap<ExponentVector, f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(map.iter().map(|(e, &c)| Term { exponent: e.clone(), coefficient: c }))
}
