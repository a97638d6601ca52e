//! Truncated Laurent series in `1/z` and 2×2 matrices of them.
//!
//! A series carries an explicit truncation order `K`: it is known modulo
//! `O(z^{-K-1})`. Every operation propagates the smallest valid order, and
//! reading a coefficient below it is an error rather than a silent zero.
//! Polynomials are series with no truncation (`order() == None`).

use crate::error::{Error, Result};
use crate::ring::{Ring, Scalar};
use num::BigRational;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct LaurentSeries<C> {
    terms: BTreeMap<i64, C>,
    order: Option<i64>,
}

impl<C: Ring> LaurentSeries<C> {
    /// The zero series known modulo `O(z^{-order-1})`.
    pub fn zero(order: i64) -> Self {
        LaurentSeries { terms: BTreeMap::new(), order: Some(order) }
    }

    /// An exact polynomial in `z, 1/z` with no truncation.
    pub fn exact(terms: impl IntoIterator<Item = (i64, C)>) -> Self {
        let mut s = LaurentSeries { terms: BTreeMap::new(), order: None };
        for (p, c) in terms {
            s.add_at(p, &c);
        }
        s
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i64, C)>, order: i64) -> Self {
        let mut s = Self::zero(order);
        for (p, c) in terms {
            if p >= -order {
                s.add_at(p, &c);
            }
        }
        s
    }

    pub fn monomial(c: C, power: i64, order: Option<i64>) -> Self {
        let mut s = LaurentSeries { terms: BTreeMap::new(), order };
        if order.map_or(true, |k| power >= -k) {
            s.add_at(power, &c);
        }
        s
    }

    /// The truncation order `K`, or `None` for an exact polynomial.
    pub fn order(&self) -> Option<i64> {
        self.order
    }

    pub fn is_exact(&self) -> bool {
        self.order.is_none()
    }

    /// Highest power with a non-zero coefficient.
    pub fn lead(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Upper bound for the powers this series may carry, including the
    /// unknown tail; `None` for the exact zero.
    fn lead_bound(&self) -> Option<i64> {
        match (self.lead(), self.order) {
            (Some(l), _) => Some(l),
            (None, Some(k)) => Some(-k - 1),
            (None, None) => None,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &C)> {
        self.terms.iter().map(|(p, c)| (*p, c))
    }

    fn add_at(&mut self, p: i64, c: &C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&p) {
            Some(x) => {
                x.plus_assign(c);
                if x.is_zero() {
                    self.terms.remove(&p);
                }
            }
            None => {
                self.terms.insert(p, c.clone());
            }
        }
    }

    /// Coefficient of `z^p`; errors if `p` lies in the unknown tail.
    pub fn coeff(&self, p: i64) -> Result<C> {
        if let Some(k) = self.order {
            if p < -k {
                return Err(Error::TruncationExhausted { power: p, known: -k });
            }
        }
        Ok(self.terms.get(&p).cloned().unwrap_or_else(C::zero))
    }

    /// Coefficient of `z^p`; panics if `p` lies in the unknown tail.
    pub fn at(&self, p: i64) -> C {
        self.coeff(p).unwrap_or_else(|e| panic!("{e}"))
    }

    /// Drops everything below `z^{-order}`.
    pub fn truncate(&self, order: i64) -> Self {
        let order = self.order.map_or(order, |k| k.min(order));
        LaurentSeries {
            terms: self.terms.range(-order..).map(|(p, c)| (*p, c.clone())).collect(),
            order: Some(order),
        }
    }

    fn min_order(a: Option<i64>, b: Option<i64>) -> Option<i64> {
        match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let order = Self::min_order(self.order, other.order);
        let mut out = LaurentSeries { terms: BTreeMap::new(), order };
        for (p, c) in self.terms.iter().chain(other.terms.iter()) {
            if order.map_or(true, |k| *p >= -k) {
                out.add_at(*p, c);
            }
        }
        out
    }

    pub fn negated(&self) -> Self {
        LaurentSeries {
            terms: self.terms.iter().map(|(p, c)| (*p, c.negated())).collect(),
            order: self.order,
        }
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.negated())
    }

    pub fn times(&self, other: &Self) -> Self {
        let (la, lb) = match (self.lead_bound(), other.lead_bound()) {
            (Some(a), Some(b)) => (a, b),
            _ => return LaurentSeries::exact(std::iter::empty()),
        };
        let order = Self::min_order(self.order.map(|k| k - lb), other.order.map(|k| k - la));
        let mut out = LaurentSeries { terms: BTreeMap::new(), order };
        for (p1, c1) in &self.terms {
            for (p2, c2) in &other.terms {
                let p = p1 + p2;
                if order.map_or(true, |k| p >= -k) {
                    out.add_at(p, &c1.times(c2));
                }
            }
        }
        out
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = LaurentSeries { terms: BTreeMap::new(), order: self.order };
        for (p, x) in &self.terms {
            out.add_at(*p, &x.times(c));
        }
        out
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        LaurentSeries {
            terms: self.terms.iter().map(|(p, c)| (p + k, c.clone())).collect(),
            order: self.order.map(|o| o - k),
        }
    }

    /// The part with powers `z^0` and higher (exact).
    pub fn positive_part(&self) -> Self {
        if let Some(k) = self.order {
            assert!(k >= 0, "positive part requires the z^0 coefficient");
        }
        LaurentSeries {
            terms: self.terms.range(0..).map(|(p, c)| (*p, c.clone())).collect(),
            order: None,
        }
    }

    fn check_unit(&self) -> Result<()> {
        if self.lead() != Some(0) || !self.at(0).minus(&C::one()).is_zero() {
            return Err(Error::WrongLeadingTerm(format!(
                "expected 1 + O(1/z), leading power {:?}",
                self.lead()
            )));
        }
        if self.order.is_none() {
            return Err(Error::WrongLeadingTerm("unit series must carry a truncation order".into()));
        }
        Ok(())
    }

    /// Inverse of a series `1 + O(1/z)`.
    pub fn inverse_unit(&self) -> Result<Self> {
        self.check_unit()?;
        let k = self.order.unwrap();
        let mut inv: Vec<C> = vec![C::one()];
        for i in 1..=k {
            let mut s = C::zero();
            for j in 1..=i {
                if let Some(x) = self.terms.get(&-j) {
                    s.plus_assign(&x.times(&inv[(i - j) as usize]));
                }
            }
            inv.push(s.negated());
        }
        Ok(Self::from_terms(inv.into_iter().enumerate().map(|(i, c)| (-(i as i64), c)), k))
    }
}

impl<C: Scalar> LaurentSeries<C> {
    /// Square root of a series `1 + O(1/z)` normalized to `1 + O(1/z)`.
    ///
    /// Uses the coefficient recurrence `2 s_k = p_k - sum_{0<i<k} s_i s_{k-i}`.
    pub fn sqrt_unit(&self) -> Result<Self> {
        self.check_unit()?;
        let k = self.order.unwrap();
        let half = C::from_rational(&BigRational::new(1.into(), 2.into()));
        let mut s: Vec<C> = vec![C::one()];
        for i in 1..=k {
            let mut acc = self.terms.get(&-i).cloned().unwrap_or_else(C::zero);
            for j in 1..i {
                acc = acc.minus(&s[j as usize].times(&s[(i - j) as usize]));
            }
            s.push(acc.times(&half));
        }
        Ok(Self::from_terms(s.into_iter().enumerate().map(|(i, c)| (-(i as i64), c)), k))
    }

    pub fn map<D: Ring>(&self, f: impl Fn(&C) -> D) -> LaurentSeries<D> {
        let mut out = LaurentSeries { terms: BTreeMap::new(), order: self.order };
        for (p, c) in &self.terms {
            out.add_at(*p, &f(c));
        }
        out
    }
}

/// A 2×2 matrix of Laurent series.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSeries<C> {
    pub e: [[LaurentSeries<C>; 2]; 2],
}

impl<C: Ring> MatrixSeries<C> {
    pub fn new(e: [[LaurentSeries<C>; 2]; 2]) -> Self {
        MatrixSeries { e }
    }

    pub fn entry(&self, i: usize, j: usize) -> &LaurentSeries<C> {
        &self.e[i][j]
    }

    /// The smallest truncation order among the entries.
    pub fn order(&self) -> Option<i64> {
        self.e.iter().flatten().filter_map(|s| s.order()).min()
    }

    fn zip(&self, other: &Self, f: impl Fn(&LaurentSeries<C>, &LaurentSeries<C>) -> LaurentSeries<C>) -> Self {
        let g = |i: usize, j: usize| f(&self.e[i][j], &other.e[i][j]);
        MatrixSeries::new([[g(0, 0), g(0, 1)], [g(1, 0), g(1, 1)]])
    }

    pub fn each(&self, f: impl Fn(&LaurentSeries<C>) -> LaurentSeries<C>) -> Self {
        let g = |i: usize, j: usize| f(&self.e[i][j]);
        MatrixSeries::new([[g(0, 0), g(0, 1)], [g(1, 0), g(1, 1)]])
    }

    pub fn plus(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.plus(b))
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.minus(b))
    }

    pub fn times(&self, other: &Self) -> Self {
        let g = |i: usize, j: usize| {
            self.e[i][0].times(&other.e[0][j]).plus(&self.e[i][1].times(&other.e[1][j]))
        };
        MatrixSeries::new([[g(0, 0), g(0, 1)], [g(1, 0), g(1, 1)]])
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.times(other).minus(&other.times(self))
    }

    pub fn scale_series(&self, s: &LaurentSeries<C>) -> Self {
        self.each(|x| x.times(s))
    }

    pub fn det(&self) -> LaurentSeries<C> {
        self.e[0][0].times(&self.e[1][1]).minus(&self.e[0][1].times(&self.e[1][0]))
    }

    pub fn trace(&self) -> LaurentSeries<C> {
        self.e[0][0].plus(&self.e[1][1])
    }

    pub fn truncate(&self, order: i64) -> Self {
        self.each(|x| x.truncate(order))
    }

    pub fn shift(&self, k: i64) -> Self {
        self.each(|x| x.shift(k))
    }

    /// Coefficient matrix of `z^p`.
    pub fn coeff(&self, p: i64) -> Result<[[C; 2]; 2]> {
        Ok([
            [self.e[0][0].coeff(p)?, self.e[0][1].coeff(p)?],
            [self.e[1][0].coeff(p)?, self.e[1][1].coeff(p)?],
        ])
    }

    /// Highest power present in any entry.
    pub fn lead(&self) -> Option<i64> {
        self.e.iter().flatten().filter_map(|s| s.lead()).max()
    }
}

/// Plain 2×2 matrix over a ring.
pub type Mat2<C> = [[C; 2]; 2];

pub fn mat_mul<C: Ring>(x: &Mat2<C>, y: &Mat2<C>) -> Mat2<C> {
    let g = |i: usize, j: usize| x[i][0].times(&y[0][j]).plus(&x[i][1].times(&y[1][j]));
    [[g(0, 0), g(0, 1)], [g(1, 0), g(1, 1)]]
}

pub fn mat_add_assign<C: Ring>(x: &mut Mat2<C>, y: &Mat2<C>) {
    for i in 0..2 {
        for j in 0..2 {
            x[i][j].plus_assign(&y[i][j]);
        }
    }
}

pub fn mat_neg<C: Ring>(x: &Mat2<C>) -> Mat2<C> {
    [[x[0][0].negated(), x[0][1].negated()], [x[1][0].negated(), x[1][1].negated()]]
}

pub fn mat_is_zero<C: Ring>(x: &Mat2<C>) -> bool {
    x.iter().flatten().all(|c| c.is_zero())
}
