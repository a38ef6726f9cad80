//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Structural checks (homogeneity degrees, skew cancellation, group-law
//! identities) run on [`SparsePoly`] in exact arithmetic. Point evaluation
//! goes through [`CompiledPoly`], a flat `f64` copy of the same terms.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{CarnotError, Result};

pub type Rational = BigRational;

/// Parses `"p/q"`, an integer, or a plain decimal such as `"0.25"`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let err = |m: &str| CarnotError::Parse {
        what: format!("rational {text:?}"),
        message: m.to_string(),
    };
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| err("bad numerator"))?;
        let d: BigInt = den.trim().parse().map_err(|_| err("bad denominator"))?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        let n: BigInt = digits.parse().map_err(|_| err("bad decimal"))?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rational::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    let n: BigInt = s.parse().map_err(|_| err("not a rational"))?;
    Ok(Rational::from_integer(n))
}

/// Exact conversion of a finite double.
pub fn rational_from_f64(v: f64) -> Result<Rational> {
    Rational::from_float(v).ok_or_else(|| CarnotError::invalid(format!("non-finite value {v}")))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Formats as `p/q` (or `p` when integral); inverse of [`parse_rational`].
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn weighted_degree(exps: &[u32], weights: &[u32]) -> u32 {
    exps.iter().zip(weights).map(|(a, s)| a * s).sum()
}

/// A polynomial in `dim` variables; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct SparsePoly {
    dim: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl SparsePoly {
    pub fn zero(dim: usize) -> Self {
        SparsePoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Rational) -> Self {
        Self::monomial(vec![0; dim], c)
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Rational::one())
    }

    /// The coordinate function `x_i` (0-based).
    pub fn var(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Self::monomial(e, Rational::one())
    }

    pub fn monomial(exps: Vec<u32>, coeff: Rational) -> Self {
        let dim = exps.len();
        let mut p = Self::zero(dim);
        p.add_term(exps, coeff);
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exps: &[u32]) -> Rational {
        self.terms.get(exps).cloned().unwrap_or_else(Rational::zero)
    }

    /// Adds `coeff * x^exps`, dropping the entry if it cancels.
    pub fn add_term(&mut self, exps: Vec<u32>, coeff: Rational) {
        assert_eq!(exps.len(), self.dim, "exponent vector length");
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        SparsePoly {
            dim: self.dim,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.dim);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Partial derivative with respect to `x_i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.add_term(e2, c * Rational::from_integer(BigInt::from(e[i])));
        }
        out
    }

    pub fn eval_exact(&self, x: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= num_traits::pow(xi.clone(), k as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// `G`-degree: the largest weighted degree among stored monomials.
    pub fn g_degree(&self, weights: &[u32]) -> Option<u32> {
        self.terms.keys().map(|e| weighted_degree(e, weights)).max()
    }

    /// First monomial whose weighted degree differs from `degree`, if any.
    pub fn homogeneity_witness(&self, weights: &[u32], degree: i64) -> Option<Vec<u32>> {
        self.terms
            .keys()
            .find(|e| weighted_degree(e, weights) as i64 != degree)
            .cloned()
    }

    /// The polynomial `x ↦ p(δ_λ x)`.
    pub fn dilate(&self, lambda: &Rational, weights: &[u32]) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            let d = weighted_degree(e, weights) as usize;
            out.add_term(e.clone(), c * num_traits::pow(lambda.clone(), d));
        }
        out
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), rational_to_f64(c)))
                .collect(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.compile().eval(x)
    }
}

impl fmt::Debug for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", format_rational(c))?;
            for (i, &p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{}", i + 1, p)?,
                }
            }
        }
        Ok(())
    }
}

impl Add for &SparsePoly {
    type Output = SparsePoly;
    fn add(self, rhs: &SparsePoly) -> SparsePoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &SparsePoly {
    type Output = SparsePoly;
    fn sub(self, rhs: &SparsePoly) -> SparsePoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &SparsePoly {
    type Output = SparsePoly;
    fn mul(self, rhs: &SparsePoly) -> SparsePoly {
        assert_eq!(self.dim, rhs.dim, "polynomial dimension mismatch");
        let mut out = SparsePoly::zero(self.dim);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &SparsePoly {
    type Output = SparsePoly;
    fn neg(self) -> SparsePoly {
        self.scale(&-Rational::one())
    }
}

/// Floating-point image of a [`SparsePoly`] used on hot paths.
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledPoly {
    dim: usize,
    terms: Vec<(Vec<u32>, f64)>,
}

impl CompiledPoly {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut t = *c;
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= xi.powi(k as i32);
                }
            }
            acc += t;
        }
        acc
    }

    /// Sum of absolute term values; the natural scale for cancellation checks.
    pub fn eval_abs(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut t = c.abs();
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= xi.abs().powi(k as i32);
                }
            }
            acc += t;
        }
        acc
    }
}

/// All exponent vectors with `1 ≤ ⟨α,σ⟩ ≤ max_degree`, ordered by weighted
/// degree and then lexicographically.
pub fn weighted_monomials(weights: &[u32], max_degree: u32) -> Vec<Vec<u32>> {
    fn rec(weights: &[u32], i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == weights.len() {
            out.push(cur.clone());
            return;
        }
        let mut k = 0;
        while k * weights[i] <= left {
            cur.push(k);
            rec(weights, i + 1, left - k * weights[i], cur, out);
            cur.pop();
            k += 1;
        }
    }
    let mut all = Vec::new();
    rec(weights, 0, max_degree, &mut Vec::new(), &mut all);
    all.retain(|e| e.iter().any(|&k| k > 0));
    all.sort_by_key(|e| (weighted_degree(e, weights), std::cmp::Reverse(e.clone())));
    all
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn parses_rational_forms() {
        assert_eq!(q("-1/2"), Rational::new((-1).into(), 2.into()));
        assert_eq!(q("3"), Rational::from_integer(3.into()));
        assert_eq!(q("0.25"), Rational::new(1.into(), 4.into()));
        assert_eq!(q("-0.5"), Rational::new((-1).into(), 2.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert_eq!(format_rational(&q("6/4")), "3/2");
    }

    #[test]
    fn cancellation_drops_terms() {
        let x = SparsePoly::var(2, 0);
        let d = &x - &x;
        assert!(d.is_zero());
        assert_eq!(d.len(), 0);
    }

    #[test]
    fn derivative_and_degree() {
        // p = x1^2 x2 + 3 x3, weights (1,1,2)
        let mut p = SparsePoly::zero(3);
        p.add_term(vec![2, 1, 0], q("1"));
        p.add_term(vec![0, 0, 1], q("3"));
        assert_eq!(p.g_degree(&[1, 1, 2]), Some(3));
        assert_eq!(p.homogeneity_witness(&[1, 1, 2], 3), Some(vec![0, 0, 1]));
        let d = p.derivative(0);
        assert_eq!(d.coefficient(&[1, 1, 0]), q("2"));
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn dilation_scales_by_weighted_degree() {
        let mut p = SparsePoly::zero(2);
        p.add_term(vec![1, 1], q("1"));
        let d = p.dilate(&q("2"), &[1, 2]);
        assert_eq!(d.coefficient(&[1, 1]), q("8"));
    }

    #[test]
    fn compiled_matches_exact() {
        let x = SparsePoly::var(2, 0);
        let y = SparsePoly::var(2, 1);
        let p = (&(&x * &x) + &y.scale(&q("-1/3"))).pow(2);
        let pt = [q("1/2"), q("-3")];
        let exact = rational_to_f64(&p.eval_exact(&pt));
        assert!((p.compile().eval(&[0.5, -3.0]) - exact).abs() < 1e-14);
    }

    #[test]
    fn monomial_enumeration_counts() {
        // weights (1,1,2), degree <= 6: 49 non-constant monomials
        assert_eq!(weighted_monomials(&[1, 1, 2], 6).len(), 49);
        assert_eq!(weighted_monomials(&[1], 3), vec![vec![1], vec![2], vec![3]]);
    }
}
