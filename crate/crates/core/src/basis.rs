// Copyright 2026 The polydiff Authors
// SPDX-License-Identifier: Apache-2.0

//! Ordered monomial bases `H(x)` of `Pol_n(E)` and coordinate vectors.
//!
//! Bases are listed by increasing total degree and, within a degree, with
//! `x1` powers first (`1, x1, x2, x1^2, x1*x2, x2^2, ...`). On the unit
//! simplex the last coordinate is eliminated through
//! `x_d = 1 - x_1 - ... - x_{d-1}`, so basis monomials never involve `x_d`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::poly::{MultiIndex, Polynomial};
use crate::statespace::{Family, StateSpace};

#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    dim: usize,
    degree: u32,
    eliminate_last: bool,
    monomials: Vec<MultiIndex>,
    index: HashMap<MultiIndex, usize>,
}

impl Basis {
    pub fn new(state_space: &StateSpace, degree: u32) -> Basis {
        let eliminate_last = matches!(state_space.family(), Family::Simplex { .. });
        Self::build(state_space.dim(), degree, eliminate_last)
    }

    /// Monomial basis of `Pol_n(R^d)`.
    pub fn full(dim: usize, degree: u32) -> Basis {
        Self::build(dim, degree, false)
    }

    fn build(dim: usize, degree: u32, eliminate_last: bool) -> Basis {
        let free = if eliminate_last { dim - 1 } else { dim };
        let mut monomials = Vec::new();
        for k in 0..=degree {
            let mut level = Vec::new();
            compositions(free, k, &mut vec![0; free], 0, &mut level);
            level.sort_by(|a, b| b.cmp(a));
            for e in level {
                let mut full = e;
                full.resize(dim, 0);
                monomials.push(MultiIndex::new(full));
            }
        }
        Self::from_monomials(dim, degree, eliminate_last, monomials)
    }

    fn from_monomials(
        dim: usize,
        degree: u32,
        eliminate_last: bool,
        monomials: Vec<MultiIndex>,
    ) -> Basis {
        let index = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        Basis {
            dim,
            degree,
            eliminate_last,
            monomials,
            index,
        }
    }

    /// Same monomials listed in the order `perm` (entry `k` of the new basis is
    /// entry `perm[k]` of this one).
    pub fn reordered(&self, perm: &[usize]) -> Result<Basis> {
        let mut seen = vec![false; self.len()];
        if perm.len() != self.len()
            || perm
                .iter()
                .any(|&i| i >= self.len() || std::mem::replace(&mut seen[i], true))
        {
            return Err(Error::InvalidInput("not a permutation of the basis".into()));
        }
        let monomials = perm.iter().map(|&i| self.monomials[i].clone()).collect();
        Ok(Self::from_monomials(
            self.dim,
            self.degree,
            self.eliminate_last,
            monomials,
        ))
    }

    /// Number of basis elements `N`.
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn monomials(&self) -> &[MultiIndex] {
        &self.monomials
    }

    pub fn position(&self, m: &MultiIndex) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn eliminates_last(&self) -> bool {
        self.eliminate_last
    }

    /// Canonical representative of `p` on the state space: identity unless
    /// the last variable is eliminated.
    pub fn reduce(&self, p: &Polynomial) -> Result<Polynomial> {
        check_dim(self.dim, p.dim())?;
        if !self.eliminate_last || !p.depends_on(self.dim - 1) {
            return Ok(p.clone());
        }
        let mut rule = vec![-1.0; self.dim];
        rule[self.dim - 1] = 0.0;
        p.substitute(self.dim - 1, &Polynomial::affine(1.0, &rule))
    }

    pub fn to_coordinates(self: &Arc<Self>, p: &Polynomial) -> Result<CoordVector> {
        let entries = self.coordinates(p)?;
        Ok(CoordVector {
            basis: Arc::clone(self),
            entries,
        })
    }

    /// Raw coordinate vector of `p` in this basis.
    pub fn coordinates(&self, p: &Polynomial) -> Result<DVector<f64>> {
        let reduced = self.reduce(p)?;
        if reduced.degree() > self.degree as i32 {
            return Err(Error::DegreeTooHigh {
                degree: reduced.degree(),
                max: self.degree,
            });
        }
        let mut v = DVector::zeros(self.len());
        for (m, c) in reduced.terms() {
            let i = self
                .position(m)
                .expect("reduced monomial of admissible degree is in the basis");
            v[i] = c;
        }
        Ok(v)
    }

    pub fn polynomial(&self, entries: &DVector<f64>) -> Polynomial {
        let mut p = Polynomial::zero(self.dim);
        for (m, &c) in self.monomials.iter().zip(entries.iter()) {
            p.add_term(m.clone(), c);
        }
        p
    }

    /// `H(x)`, the basis evaluated at `x` (ambient coordinates).
    pub fn eval(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.monomials.iter().map(|m| m.eval(x)))
    }

    /// One exponent vector per line, comma separated.
    pub fn dump_csv(&self) -> String {
        let mut out = String::new();
        for m in &self.monomials {
            let line = m
                .exponents()
                .iter()
                .map(|k| k.to_string())
                .collect::<Vec<_>>()
                .join(",");
            let _ = writeln!(out, "{line}");
        }
        out
    }
}

fn compositions(slots: usize, total: u32, cur: &mut Vec<u32>, pos: usize, out: &mut Vec<Vec<u32>>) {
    if slots == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if pos == slots - 1 {
        cur[pos] = total;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    for k in 0..=total {
        cur[pos] = k;
        compositions(slots, total - k, cur, pos + 1, out);
    }
    cur[pos] = 0;
}

/// Coordinates `p⃗` of a polynomial with respect to a basis: `p(x) = H(x)^T p⃗`.
#[derive(Clone, Debug)]
pub struct CoordVector {
    basis: Arc<Basis>,
    entries: DVector<f64>,
}

impl CoordVector {
    pub fn new(basis: Arc<Basis>, entries: DVector<f64>) -> Result<Self> {
        check_dim(basis.len(), entries.len())?;
        Ok(CoordVector { basis, entries })
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn entries(&self) -> &DVector<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DVector<f64> {
        self.entries
    }

    pub fn to_polynomial(&self) -> Polynomial {
        self.basis.polynomial(&self.entries)
    }

    /// `H(x)^T p⃗`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.basis.eval(x).dot(&self.entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statespace::StateSpace;

    fn exps(b: &Basis) -> Vec<Vec<u32>> {
        b.monomials()
            .iter()
            .map(|m| m.exponents().to_vec())
            .collect()
    }

    #[test]
    fn univariate_quadratic() {
        let b = Basis::full(1, 2);
        assert_eq!(exps(&b), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn bivariate_count_and_order() {
        let b = Basis::full(2, 2);
        assert_eq!(b.len(), 6);
        assert_eq!(
            exps(&b),
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
        assert_eq!(Basis::full(3, 4).len(), 35);
    }

    #[test]
    fn simplex_eliminates_last_coordinate() {
        let ss = StateSpace::simplex(2).unwrap();
        let b = Arc::new(Basis::new(&ss, 1));
        assert_eq!(exps(&b), vec![vec![0, 0], vec![1, 0]]);
        let v = b.to_coordinates(&Polynomial::variable(2, 1)).unwrap();
        assert_eq!(v.entries().as_slice(), &[1.0, -1.0]);
        let ss3 = StateSpace::simplex(3).unwrap();
        assert_eq!(Basis::new(&ss3, 3).len(), 10);
    }

    #[test]
    fn coordinates_round_trip() {
        let b = Arc::new(Basis::full(1, 2));
        let x2 = Polynomial::variable(1, 0).pow(2);
        let v = b.to_coordinates(&x2).unwrap();
        assert_eq!(v.entries().as_slice(), &[0.0, 0.0, 1.0]);
        assert_eq!(v.to_polynomial(), x2);
        let z = b.to_coordinates(&Polynomial::zero(1)).unwrap();
        assert!(z.entries().iter().all(|&c| c == 0.0));
        assert!(z.to_polynomial().is_zero());
    }

    #[test]
    fn degree_too_high() {
        let b = Arc::new(Basis::full(1, 2));
        let x3 = Polynomial::variable(1, 0).pow(3);
        assert!(matches!(
            b.to_coordinates(&x3),
            Err(Error::DegreeTooHigh { degree: 3, max: 2 })
        ));
    }

    #[test]
    fn csv_dump() {
        assert_eq!(Basis::full(2, 1).dump_csv(), "0,0\n1,0\n0,1\n");
    }

    #[test]
    fn reordering_checks_permutation() {
        let b = Basis::full(1, 2);
        assert!(b.reordered(&[0, 0, 1]).is_err());
        let r = b.reordered(&[2, 0, 1]).unwrap();
        assert_eq!(r.position(&MultiIndex::new(vec![2])), Some(0));
    }
}
