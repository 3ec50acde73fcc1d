// Copyright 2026 The polydiff Authors
// SPDX-License-Identifier: Apache-2.0

//! Sparse multivariate polynomials over the reals.
//!
//! Terms are kept in a `BTreeMap` keyed by [`MultiIndex`] under the graded
//! lexicographic order (total degree first, then lexicographic with `x1`
//! largest). Coefficients that become exactly zero are dropped; no epsilon
//! pruning happens implicitly, use [`Polynomial::chop`] for that.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Exponent vector `(k_1, ..., k_d)` of the monomial `x_1^{k_1} ... x_d^{k_d}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// The exponent of the single variable `x_{i+1}` (zero-based `i`).
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn divides(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn product(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `other / self` when `self` divides `other`.
    pub fn quotient_of(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if !self.divides(other) {
            return None;
        }
        Some(MultiIndex(
            other.0.iter().zip(&self.0).map(|(b, a)| b - a).collect(),
        ))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .filter(|(k, _)| **k > 0)
            .map(|(&k, &xi)| xi.powi(k as i32))
            .product()
    }

    /// Underscore-joined exponents, e.g. `2_0_1`. Used as CSV header keys.
    pub fn key(&self) -> String {
        self.0
            .iter()
            .map(|k| k.to_string())
            .collect::<Vec<_>>()
            .join("_")
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &k) in self.0.iter().enumerate() {
            if k == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if k == 1 {
                write!(f, "x{}", i + 1)?;
            } else {
                write!(f, "x{}^{}", i + 1, k)?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

/// A polynomial on `R^dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolynomialRepr", into = "PolynomialRepr")]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::monomial(MultiIndex::zero(dim), c)
    }

    pub fn monomial(index: MultiIndex, c: f64) -> Self {
        let mut p = Polynomial::zero(index.dim());
        p.add_term(index, c);
        p
    }

    /// The coordinate function `x_{i+1}`.
    pub fn variable(dim: usize, i: usize) -> Self {
        Self::monomial(MultiIndex::unit(dim, i), 1.0)
    }

    /// Affine polynomial `c + l^T x`.
    pub fn affine(c: f64, linear: &[f64]) -> Self {
        let dim = linear.len();
        let mut p = Polynomial::constant(dim, c);
        for (i, &l) in linear.iter().enumerate() {
            p.add_term(MultiIndex::unit(dim, i), l);
        }
        p
    }

    /// Builds from `(exponents, coefficient)` pairs; repeated exponents are summed.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut p = Polynomial::zero(dim);
        for (e, c) in terms {
            check_dim(dim, e.len())?;
            p.add_term(MultiIndex(e), c);
        }
        Ok(p)
    }

    /// Parses sums of products such as `0.5*x1^2 - x1*x2 + 3` on `R^dim`.
    /// Variables are `x1..x{dim}`; numbers may use exponent notation.
    pub fn parse(text: &str, dim: usize) -> Result<Self> {
        let err =
            |msg: String| Error::InvalidInput(format!("cannot parse polynomial {text:?}: {msg}"));
        let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        if chars.is_empty() {
            return Err(err("empty input".into()));
        }
        let mut p = Polynomial::zero(dim);
        let mut pos = 0;
        let number = |pos: &mut usize| -> Option<f64> {
            let start = *pos;
            while *pos < chars.len() {
                let c = chars[*pos];
                let exp_sign =
                    (c == '+' || c == '-') && *pos > start && matches!(chars[*pos - 1], 'e' | 'E');
                if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exp_sign {
                    *pos += 1;
                } else {
                    break;
                }
            }
            chars[start..*pos].iter().collect::<String>().parse().ok()
        };
        while pos < chars.len() {
            let mut coeff = 1.0;
            match chars[pos] {
                '+' => pos += 1,
                '-' => {
                    coeff = -1.0;
                    pos += 1;
                }
                _ if pos > 0 => return Err(err(format!("expected '+' or '-' at {pos}"))),
                _ => {}
            }
            let mut exps = vec![0u32; dim];
            let mut factors = 0;
            loop {
                if factors > 0 {
                    if pos < chars.len() && chars[pos] == '*' {
                        pos += 1;
                    } else {
                        break;
                    }
                }
                match chars.get(pos) {
                    Some('x') => {
                        pos += 1;
                        let start = pos;
                        while pos < chars.len() && chars[pos].is_ascii_digit() {
                            pos += 1;
                        }
                        let i: usize = chars[start..pos]
                            .iter()
                            .collect::<String>()
                            .parse()
                            .map_err(|_| err(format!("bad variable at {start}")))?;
                        if i == 0 || i > dim {
                            return Err(err(format!("variable x{i} outside x1..x{dim}")));
                        }
                        let mut k = 1;
                        if chars.get(pos) == Some(&'^') {
                            pos += 1;
                            let start = pos;
                            while pos < chars.len() && chars[pos].is_ascii_digit() {
                                pos += 1;
                            }
                            k = chars[start..pos]
                                .iter()
                                .collect::<String>()
                                .parse()
                                .map_err(|_| err(format!("bad exponent at {start}")))?;
                        }
                        exps[i - 1] += k;
                    }
                    Some(c) if c.is_ascii_digit() || *c == '.' => {
                        let start = pos;
                        coeff *= number(&mut pos)
                            .ok_or_else(|| err(format!("bad number at {start}")))?;
                    }
                    _ => return Err(err(format!("expected a number or variable at {pos}"))),
                }
                factors += 1;
            }
            p.add_term(MultiIndex(exps), coeff);
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total degree; `-1` for the zero polynomial.
    pub fn degree(&self) -> i32 {
        self.terms
            .keys()
            .next_back()
            .map_or(-1, |m| m.degree() as i32)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, index: &MultiIndex) -> f64 {
        self.terms.get(index).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&MultiIndex, f64)> + '_ {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    /// Largest term under the graded lexicographic order.
    pub fn leading_term(&self) -> Option<(&MultiIndex, f64)> {
        self.terms.iter().next_back().map(|(m, &c)| (m, c))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |acc, c| acc.max(c.abs()))
    }

    /// Adds `c * x^index` in place, dropping the term if it cancels exactly.
    pub fn add_term(&mut self, index: MultiIndex, c: f64) {
        debug_assert_eq!(index.dim(), self.dim);
        if c == 0.0 {
            return;
        }
        match self.terms.get_mut(&index) {
            Some(v) => {
                *v += c;
                if *v == 0.0 {
                    self.terms.remove(&index);
                }
            }
            None => {
                self.terms.insert(index, c);
            }
        }
    }

    pub fn try_add(&self, other: &Polynomial) -> Result<Polynomial> {
        check_dim(self.dim, other.dim)?;
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Polynomial) -> Result<Polynomial> {
        check_dim(self.dim, other.dim)?;
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Polynomial) -> Result<Polynomial> {
        check_dim(self.dim, other.dim)?;
        let mut out = Polynomial::zero(self.dim);
        for (m1, &c1) in &self.terms {
            for (m2, &c2) in &other.terms {
                out.add_term(m1.product(m2), c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        if s == 0.0 {
            return Polynomial::zero(self.dim);
        }
        Polynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| (m.clone(), c * s))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut out = Polynomial::constant(self.dim, 1.0);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn try_eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.eval(x))
    }

    /// Evaluates at `x`; panics in debug builds on a length mismatch.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        self.terms.iter().map(|(m, &c)| c * m.eval(x)).sum()
    }

    /// Partial derivative with respect to `x_{i+1}`.
    pub fn derivative(&self, i: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.dim);
        for (m, &c) in &self.terms {
            let k = m.0[i];
            if k == 0 {
                continue;
            }
            let mut e = m.0.clone();
            e[i] -= 1;
            out.add_term(MultiIndex(e), c * k as f64);
        }
        out
    }

    pub fn grad(&self) -> Vec<Polynomial> {
        (0..self.dim).map(|i| self.derivative(i)).collect()
    }

    pub fn hessian(&self) -> Vec<Vec<Polynomial>> {
        let grad = self.grad();
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| grad[i].derivative(j)).collect())
            .collect()
    }

    /// Drops terms with `|c| <= eps`.
    pub fn chop(&self, eps: f64) -> Polynomial {
        Polynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() > eps)
                .map(|(m, &c)| (m.clone(), c))
                .collect(),
        }
    }

    /// Homogeneous component of total degree `k`.
    pub fn homogeneous_part(&self, k: u32) -> Polynomial {
        Polynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == k)
                .map(|(m, &c)| (m.clone(), c))
                .collect(),
        }
    }

    /// Whether some term has a positive exponent on variable `i`.
    pub fn depends_on(&self, i: usize) -> bool {
        self.terms.keys().any(|m| m.0[i] > 0)
    }

    /// Replaces `x_{var+1}` by the polynomial `value`.
    pub fn substitute(&self, var: usize, value: &Polynomial) -> Result<Polynomial> {
        check_dim(self.dim, value.dim)?;
        let mut powers = vec![Polynomial::constant(self.dim, 1.0)];
        let mut out = Polynomial::zero(self.dim);
        for (m, &c) in &self.terms {
            let k = m.0[var] as usize;
            while powers.len() <= k {
                let next = powers.last().unwrap() * value;
                powers.push(next);
            }
            let mut rest = m.0.clone();
            rest[var] = 0;
            let head = Polynomial::monomial(MultiIndex(rest), c);
            out = &out + &(&head * &powers[k]);
        }
        Ok(out)
    }

    /// Keeps the first `new_dim` variables, dropping exponent slots of the rest.
    /// Fails if a dropped variable actually occurs.
    pub fn truncate_dim(&self, new_dim: usize) -> Result<Polynomial> {
        let mut out = Polynomial::zero(new_dim);
        for (m, &c) in &self.terms {
            if m.0[new_dim..].iter().any(|&k| k > 0) {
                return Err(Error::InvalidInput(format!(
                    "polynomial depends on variables beyond x{new_dim}"
                )));
            }
            out.add_term(MultiIndex(m.0[..new_dim].to_vec()), c);
        }
        Ok(out)
    }

    /// Restricts to the variables listed in `vars` (in order), failing if any
    /// other variable occurs.
    pub fn restrict_to(&self, vars: &[usize]) -> Result<Polynomial> {
        let mut out = Polynomial::zero(vars.len());
        for (m, &c) in &self.terms {
            let outside =
                m.0.iter()
                    .enumerate()
                    .any(|(i, &k)| k > 0 && !vars.contains(&i));
            if outside {
                return Err(Error::InvalidInput(
                    "polynomial depends on excluded variables".into(),
                ));
            }
            out.add_term(MultiIndex(vars.iter().map(|&v| m.0[v]).collect()), c);
        }
        Ok(out)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, &c)) in self.terms.iter().rev().enumerate() {
            if k > 0 {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            if m.degree() == 0 {
                write!(f, "{}", c.abs())?;
            } else if c.abs() == 1.0 {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", c.abs())?;
            }
        }
        Ok(())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.try_add(rhs).expect("polynomial dimension mismatch")
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.try_sub(rhs).expect("polynomial dimension mismatch")
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.try_mul(rhs).expect("polynomial dimension mismatch")
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

/// Quotients and remainder of multivariate division.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub quotients: Vec<Polynomial>,
    pub remainder: Polynomial,
}

/// Relative size, in units of machine epsilon, below which a leading
/// coefficient counts as cancelled during division.
const CANCEL_ULPS: f64 = 64.0;

/// Multivariate division of `f` by `divisors` under the graded lexicographic
/// order: `f = sum_k quotients[k] * divisors[k] + remainder`, where no term of
/// the remainder is divisible by a divisor's leading monomial.
pub fn reduce(f: &Polynomial, divisors: &[Polynomial]) -> Result<Reduction> {
    for g in divisors {
        check_dim(f.dim, g.dim)?;
        if g.is_zero() {
            return Err(Error::InvalidInput(
                "division by the zero polynomial".into(),
            ));
        }
    }
    let dim = f.dim;
    let mut work = f.clone();
    let mut quotients = vec![Polynomial::zero(dim); divisors.len()];
    let mut remainder = Polynomial::zero(dim);
    // Largest magnitude seen so far; leading coefficients below roundoff of
    // this scale are cancellation residue and are dropped.
    let mut scale = f.max_abs_coeff();
    while let Some((lm, lc)) = work.leading_term() {
        let lm = lm.clone();
        work.terms.remove(&lm);
        if lc.abs() <= CANCEL_ULPS * f64::EPSILON * scale {
            continue;
        }
        let hit = divisors.iter().enumerate().find_map(|(k, g)| {
            let (glm, glc) = g.leading_term().expect("nonzero divisor");
            glm.quotient_of(&lm).map(|shift| (k, shift, lc / glc))
        });
        match hit {
            Some((k, shift, c)) => {
                quotients[k].add_term(shift.clone(), c);
                // The leading term cancels by construction; subtract the rest.
                for (gm, gc) in divisors[k].terms.iter().rev().skip(1) {
                    scale = scale.max((c * gc).abs());
                    work.add_term(gm.product(&shift), -c * gc);
                }
            }
            None => remainder.add_term(lm, lc),
        }
    }
    Ok(Reduction {
        quotients,
        remainder,
    })
}

/// Finds `h` with `f = h p + sum_i g_i q_i` for `q_i` in `modulus`.
///
/// Division is attempted with `p` tried first and, failing that, with the
/// modulus polynomials tried first. A nonzero remainder in both orders yields
/// [`Error::DivisionFailure`], which means "not certified", not "impossible".
pub fn divide_exact(f: &Polynomial, p: &Polynomial, modulus: &[Polynomial]) -> Result<Polynomial> {
    check_dim(f.dim, p.dim)?;
    if p.is_zero() {
        return Err(Error::InvalidInput(
            "division by the zero polynomial".into(),
        ));
    }
    if f.is_zero() {
        return Ok(Polynomial::zero(f.dim));
    }
    let mut p_first = vec![p.clone()];
    p_first.extend(modulus.iter().cloned());
    let r = reduce(f, &p_first)?;
    if r.remainder.is_zero() {
        return Ok(r.quotients.into_iter().next().unwrap());
    }
    if modulus.is_empty() {
        return Err(Error::DivisionFailure(format!(
            "remainder {} is nonzero",
            r.remainder
        )));
    }
    let mut q_first: Vec<Polynomial> = modulus.to_vec();
    q_first.push(p.clone());
    let r2 = reduce(f, &q_first)?;
    if r2.remainder.is_zero() {
        return Ok(r2.quotients.into_iter().next_back().unwrap());
    }
    Err(Error::DivisionFailure(format!(
        "remainder {} is nonzero modulo the ideal",
        r.remainder
    )))
}

/// Whether `f` reduces to zero modulo `divisors` (after the given chop).
pub fn reduces_to_zero(f: &Polynomial, divisors: &[Polynomial], eps: f64) -> Result<bool> {
    if divisors.is_empty() {
        return Ok(f.chop(eps).is_zero());
    }
    Ok(reduce(f, divisors)?.remainder.chop(eps).is_zero())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermRepr {
    e: Vec<u32>,
    c: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolynomialRepr {
    dim: usize,
    terms: Vec<TermRepr>,
}

impl TryFrom<PolynomialRepr> for Polynomial {
    type Error = String;

    fn try_from(repr: PolynomialRepr) -> std::result::Result<Self, String> {
        if repr.dim == 0 {
            return Err("polynomial dimension must be positive".into());
        }
        let mut p = Polynomial::zero(repr.dim);
        for (k, t) in repr.terms.into_iter().enumerate() {
            if t.e.len() != repr.dim {
                return Err(format!(
                    "term {k}: exponent list has length {}, expected {}",
                    t.e.len(),
                    repr.dim
                ));
            }
            if !t.c.is_finite() {
                return Err(format!("term {k}: coefficient is not finite"));
            }
            let m = MultiIndex(t.e);
            if p.terms.contains_key(&m) {
                return Err(format!("term {k}: duplicate exponent {:?}", m.0));
            }
            if t.c != 0.0 {
                p.terms.insert(m, t.c);
            } else {
                // Keep duplicate detection working for explicit zeros.
                p.terms.insert(m, 0.0);
            }
        }
        p.terms.retain(|_, c| *c != 0.0);
        Ok(p)
    }
}

impl From<Polynomial> for PolynomialRepr {
    fn from(p: Polynomial) -> Self {
        PolynomialRepr {
            dim: p.dim,
            terms: p
                .terms
                .into_iter()
                .map(|(m, c)| TermRepr { e: m.0, c })
                .collect(),
        }
    }
}
