//! Truncated polynomials in the times `t_0, t_1, ...`.
//!
//! A monomial `t_{k_1} ... t_{k_N}` has graded weight `2 sum k_i + N`; a
//! polynomial truncated at level `m` keeps only monomials of weight `<= m`.

use crate::error::{Error, Result};
use crate::ring::{Ring, Scalar};
use num::BigRational;
use std::collections::BTreeMap;

/// A monomial as the sorted multiset of its time indices.
pub type TMonomial = Vec<u32>;

pub fn weight(m: &[u32]) -> usize {
    m.iter().map(|&k| 2 * k as usize + 1).sum()
}

/// Formats a monomial as `t0^3*t1`, or `1` for the empty monomial.
pub fn fmt_monomial(m: &[u32]) -> String {
    if m.is_empty() {
        return "1".into();
    }
    let mut parts = Vec::new();
    let mut i = 0;
    while i < m.len() {
        let k = m[i];
        let e = m[i..].iter().take_while(|&&x| x == k).count();
        parts.push(if e == 1 { format!("t{k}") } else { format!("t{k}^{e}") });
        i += e;
    }
    parts.join("*")
}

/// Multi-indices as semicolon-joined sorted lists, e.g. `0;0;1`.
pub fn fmt_multi_index(m: &[u32]) -> String {
    m.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(";")
}

/// All sorted multi-indices with `min_len <= N` and weight `<= m`.
pub fn multi_indices(m: usize, min_len: usize) -> Vec<TMonomial> {
    fn rec(m: usize, start: u32, cur: &mut Vec<u32>, out: &mut Vec<TMonomial>, min_len: usize) {
        if cur.len() >= min_len {
            out.push(cur.clone());
        }
        let mut k = start;
        while weight(cur) + 2 * k as usize + 1 <= m {
            cur.push(k);
            rec(m, k, cur, out, min_len);
            cur.pop();
            k += 1;
        }
    }
    let mut out = Vec::new();
    rec(m, 0, &mut Vec::new(), &mut out, min_len);
    out.sort_by(|a, b| (weight(a), a.len(), a).cmp(&(weight(b), b.len(), b)));
    out
}

/// `prod_k (multiplicity of k)!` for a sorted multi-index.
pub fn symmetry_factor(m: &[u32]) -> u64 {
    let mut f = 1u64;
    let mut i = 0;
    while i < m.len() {
        let e = m[i..].iter().take_while(|&&x| x == m[i]).count() as u64;
        f *= (1..=e).product::<u64>();
        i += e as usize;
    }
    f
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedTPoly<C> {
    terms: BTreeMap<TMonomial, C>,
    m: usize,
}

impl<C: Ring> TruncatedTPoly<C> {
    pub fn zero(m: usize) -> Self {
        TruncatedTPoly { terms: BTreeMap::new(), m }
    }

    pub fn constant(c: C, m: usize) -> Self {
        let mut p = Self::zero(m);
        p.add(Vec::new(), c);
        p
    }

    /// Truncation level.
    pub fn level(&self) -> usize {
        self.m
    }

    /// Adds `c` to the coefficient of a monomial (indices in any order);
    /// monomials above the truncation level are dropped.
    pub fn add(&mut self, mut mono: TMonomial, c: C) {
        mono.sort_unstable();
        if weight(&mono) > self.m || c.is_zero() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(x) => {
                x.plus_assign(&c);
                if x.is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, c);
            }
        }
    }

    pub fn coeff(&self, mono: &[u32]) -> C {
        let mut k = mono.to_vec();
        k.sort_unstable();
        self.terms.get(&k).cloned().unwrap_or_else(C::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TMonomial, &C)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.m.min(other.m));
        for (k, c) in self.terms.iter().chain(other.terms.iter()) {
            out.add(k.clone(), c.clone());
        }
        out
    }

    pub fn times(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.m.min(other.m));
        for (k1, c1) in &self.terms {
            for (k2, c2) in &other.terms {
                if weight(k1) + weight(k2) <= out.m {
                    let mut k = k1.clone();
                    k.extend_from_slice(k2);
                    out.add(k, c1.times(c2));
                }
            }
        }
        out
    }

    pub fn map<D: Ring>(&self, f: impl Fn(&C) -> D) -> TruncatedTPoly<D> {
        let mut out = TruncatedTPoly::zero(self.m);
        for (k, c) in &self.terms {
            out.add(k.clone(), f(c));
        }
        out
    }

    /// Keeps only the monomials accepted by `keep`.
    pub fn filter(&self, keep: impl Fn(&[u32]) -> bool) -> Self {
        TruncatedTPoly {
            terms: self.terms.iter().filter(|(k, _)| keep(k)).map(|(k, c)| (k.clone(), c.clone())).collect(),
            m: self.m,
        }
    }

    /// Substitutes `t_k -> factor(k) t_k`.
    pub fn rescale_times(&self, factor: impl Fn(u32) -> C) -> Self {
        let mut out = Self::zero(self.m);
        for (k, c) in &self.terms {
            let mut x = c.clone();
            for &i in k {
                x = x.times(&factor(i));
            }
            out.add(k.clone(), x);
        }
        out
    }
}

impl<C: Scalar> TruncatedTPoly<C> {
    /// Formal logarithm, re-truncated at the same level.
    ///
    /// Requires an invertible constant term `c0`; the constant of the result
    /// is left to the caller (`log c0` is not a rational operation), i.e. the
    /// result is `log(P / c0)` and `c0` is returned alongside.
    pub fn log_normalized(&self, inv: impl Fn(&C) -> Option<C>) -> Result<(C, Self)> {
        let c0 = self.coeff(&[]);
        let c0inv = inv(&c0).ok_or(Error::ZeroConstant)?;
        let mut x = Self::zero(self.m);
        for (k, c) in &self.terms {
            if !k.is_empty() {
                x.add(k.clone(), c.times(&c0inv));
            }
        }
        let mut out = Self::zero(self.m);
        let mut pw = x.clone();
        for j in 1..=self.m.max(1) {
            let coef = BigRational::new(if j % 2 == 1 { 1.into() } else { (-1).into() }, (j as i64).into());
            for (k, c) in pw.terms() {
                out.add(k.clone(), c.scaled(&coef));
            }
            pw = pw.times(&x);
            if pw.is_zero() {
                break;
            }
        }
        Ok((c0, out))
    }

    /// Formal exponential of a polynomial without constant term.
    pub fn exp_no_constant(&self) -> Self {
        let mut out = Self::constant(C::one(), self.m);
        let mut pw = Self::constant(C::one(), self.m);
        for j in 1..=self.m.max(1) {
            pw = pw.times(self);
            let inv = BigRational::new(1.into(), (j as i64).into());
            pw = pw.map(|c| c.scaled(&inv));
            if pw.is_zero() {
                break;
            }
            out = out.plus(&pw);
        }
        out
    }
}

impl TruncatedTPoly<BigRational> {
    pub fn log(&self) -> Result<(BigRational, Self)> {
        self.log_normalized(|c| (!num::Zero::is_zero(c)).then(|| num::One::one()).map(|o: BigRational| o / c))
    }
}

impl TruncatedTPoly<crate::ring::C64> {
    /// `log P` including the principal logarithm of the constant term.
    pub fn log(&self) -> Result<Self> {
        let (c0, mut rest) = self.log_normalized(|c| (c.norm() > 0.0).then(|| c.inv()))?;
        rest.add(Vec::new(), c0.ln());
        Ok(rest)
    }
}

/// Result of comparing two truncated polynomials outside the quadratic sector.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub max_deviation: f64,
    pub worst: Option<TMonomial>,
    pub rows: Vec<(TMonomial, crate::ring::C64, crate::ring::C64)>,
}

impl Comparison {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_deviation <= tol
    }
}

/// Maximum coefficient difference over monomials with at least three factors
/// (everything except `alpha + beta_i t_i + gamma_ij t_i t_j`).
pub fn compare_mod_quadratic(
    p: &TruncatedTPoly<crate::ring::C64>,
    q: &TruncatedTPoly<crate::ring::C64>,
) -> Comparison {
    let m = p.level().min(q.level());
    let keys: std::collections::BTreeSet<TMonomial> =
        p.terms().chain(q.terms()).map(|(k, _)| k.clone()).filter(|k| k.len() >= 3 && weight(k) <= m).collect();
    let mut cmp = Comparison { max_deviation: 0.0, worst: None, rows: Vec::new() };
    for k in keys {
        let (a, b) = (p.coeff(&k), q.coeff(&k));
        let d = (a - b).norm();
        if cmp.worst.is_none() || d > cmp.max_deviation {
            cmp.max_deviation = d;
            cmp.worst = Some(k.clone());
        }
        cmp.rows.push((k, a, b));
    }
    cmp
}
