//! The graded Poisson algebra `W = C[a, b, c]`.
//!
//! Generators `a_i, b_i, c_i` (`i >= 1`) carry degrees `2i+1`, `2i`, `2i`.
//! Polynomials have exact rational coefficients; the bracket is the Leibniz
//! extension of a closed-form table of generator brackets.

use crate::resolvent;
use crate::ring::{Ring, Scalar};
use num::{BigInt, BigRational, Signed};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::RwLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    A,
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Generator {
    pub family: Family,
    pub index: u32,
}

impl Generator {
    pub fn a(i: u32) -> Self {
        Self::new(Family::A, i)
    }
    pub fn b(i: u32) -> Self {
        Self::new(Family::B, i)
    }
    pub fn c(i: u32) -> Self {
        Self::new(Family::C, i)
    }

    pub fn new(family: Family, index: u32) -> Self {
        assert!(index >= 1, "generator indices start at 1");
        Generator { family, index }
    }

    pub fn degree(self) -> u32 {
        match self.family {
            Family::A => 2 * self.index + 1,
            Family::B | Family::C => 2 * self.index,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.family {
            Family::A => "a",
            Family::B => "b",
            Family::C => "c",
        };
        write!(f, "{s}{}", self.index)
    }
}

/// A monomial: generators with positive exponents, sorted by generator.
pub type Monomial = Vec<(Generator, u32)>;

fn monomial_mul(x: &[(Generator, u32)], y: &[(Generator, u32)]) -> Monomial {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() && j < y.len() {
        match x[i].0.cmp(&y[j].0) {
            std::cmp::Ordering::Less => {
                out.push(x[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(y[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((x[i].0, x[i].1 + y[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&x[i..]);
    out.extend_from_slice(&y[j..]);
    out
}

/// Removes one factor of the generator at position `pos`.
fn monomial_drop(m: &[(Generator, u32)], pos: usize) -> Monomial {
    let mut out = m.to_vec();
    if out[pos].1 == 1 {
        out.remove(pos);
    } else {
        out[pos].1 -= 1;
    }
    out
}

pub fn monomial_degree(m: &[(Generator, u32)]) -> u32 {
    m.iter().map(|(g, e)| g.degree() * e).sum()
}

/// Exact polynomial in the generators of `W`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct GradedPoly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl GradedPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(q: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(Vec::new(), q);
        p
    }

    pub fn generator(g: Generator) -> Self {
        let mut p = Self::zero();
        p.add_term(vec![(g, 1)], BigRational::one());
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, q: BigRational) {
        if q.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(q);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += q;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Coefficient of a monomial (zero when absent).
    pub fn coefficient(&self, m: &[(Generator, u32)]) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    /// The common degree of all monomials, or `None` if inhomogeneous or zero.
    pub fn degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|m| monomial_degree(m));
        let d = it.next()?;
        it.all(|e| e == d).then_some(d)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_empty() || self.degree().is_some()
    }

    /// Largest generator index occurring in each family `(a, b, c)`.
    pub fn max_indices(&self) -> (u32, u32, u32) {
        let mut r = (0, 0, 0);
        for m in self.terms.keys() {
            for (g, _) in m {
                let slot = match g.family {
                    Family::A => &mut r.0,
                    Family::B => &mut r.1,
                    Family::C => &mut r.2,
                };
                *slot = (*slot).max(g.index);
            }
        }
        r
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        GradedPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * q)).collect(),
        }
    }

    /// Evaluates at the point given by `value`.
    pub fn evaluate<T: Scalar>(&self, value: impl Fn(Generator) -> T) -> T {
        let mut total = T::zero();
        for (m, c) in &self.terms {
            let mut t = T::from_rational(c);
            for (g, e) in m {
                let v = value(*g);
                for _ in 0..*e {
                    t = t.times(&v);
                }
            }
            total.plus_assign(&t);
        }
        total
    }

    /// Substitutes values for the generators on which `value` returns `Some`.
    pub fn substitute(&self, value: impl Fn(Generator) -> Option<BigRational>) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut coef = c.clone();
            let mut rest = Vec::new();
            for (g, e) in m {
                match value(*g) {
                    Some(v) => coef *= num::pow(v, *e as usize),
                    None => rest.push((*g, *e)),
                }
            }
            out.add_term(rest, coef);
        }
        out
    }
}

impl Ring for GradedPoly {
    fn zero() -> Self {
        GradedPoly::zero()
    }
    fn one() -> Self {
        GradedPoly::constant(BigRational::one())
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.plus_assign(other);
        out
    }
    fn plus_assign(&mut self, other: &Self) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
    fn minus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
    fn times(&self, other: &Self) -> Self {
        let mut out = GradedPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(monomial_mul(m1, m2), c1 * c2);
            }
        }
        out
    }
    fn negated(&self) -> Self {
        GradedPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Scalar for GradedPoly {
    fn from_rational(q: &BigRational) -> Self {
        GradedPoly::constant(q.clone())
    }
}

impl fmt::Debug for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if k > 0 || c.is_negative() {
                write!(f, "{}{}", if k > 0 { " " } else { "" }, sign)?;
                if k > 0 {
                    write!(f, " ")?;
                }
            }
            let a = c.abs();
            let unit = num::One::is_one(&a) && !m.is_empty();
            if !unit {
                write!(f, "{}", crate::ring::fmt_rational(&a))?;
            }
            for (i, (g, e)) in m.iter().enumerate() {
                if i > 0 || !unit {
                    write!(f, "*")?;
                }
                write!(f, "{g}")?;
                if *e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Closed-form bracket of two generators as `coefficient * generator`.
fn generator_bracket_raw(x: Generator, y: Generator) -> Option<(i64, Generator)> {
    use Family::*;
    let (i, j) = (x.index, y.index);
    match (x.family, y.family) {
        (A, A) | (B, B) => None,
        (A, B) => Some((1, Generator::b(i + j - 1))),
        (A, C) if j == 1 => Some((-1, Generator::b(i))),
        (A, C) => Some((-1, Generator::c(i + j - 1))),
        (B, C) if j == 1 => None,
        (B, C) => Some((2, Generator::a(i + j - 2))),
        (C, C) => match (i, j) {
            (1, 1) => None,
            (_, 1) => Some((2, Generator::a(i - 1))),
            (1, _) => Some((-2, Generator::a(j - 1))),
            _ => None,
        },
        (B, A) | (C, A) | (C, B) => generator_bracket_raw(y, x).map(|(k, g)| (-k, g)),
    }
}

/// `{x, y}` for two generators.
pub fn generator_bracket(x: Generator, y: Generator) -> GradedPoly {
    match generator_bracket_raw(x, y) {
        None => GradedPoly::zero(),
        Some((k, g)) => GradedPoly::generator(g).scale(&BigRational::from_integer(BigInt::from(k))),
    }
}

/// The Poisson bracket `{f, g}`, extended from generators by the Leibniz rule.
pub fn bracket(f: &GradedPoly, g: &GradedPoly) -> GradedPoly {
    let mut out = GradedPoly::zero();
    for (m1, c1) in &f.terms {
        for (m2, c2) in &g.terms {
            let c12 = c1 * c2;
            for (p, &(x, e1)) in m1.iter().enumerate() {
                for (q, &(y, e2)) in m2.iter().enumerate() {
                    let Some((k, z)) = generator_bracket_raw(x, y) else {
                        continue;
                    };
                    let coef = &c12 * BigInt::from(k * (e1 as i64) * (e2 as i64));
                    let base = monomial_mul(&monomial_drop(m1, p), &monomial_drop(m2, q));
                    out.add_term(monomial_mul(&base, &[(z, 1)]), coef);
                }
            }
        }
    }
    out
}

/// Lazily computed Hamiltonians `H_n`, `n >= -1`.
///
/// Reads are concurrent; extending the cache takes the write lock.
#[derive(Default)]
pub struct HamiltonianCache {
    computed: RwLock<Vec<GradedPoly>>,
}

impl HamiltonianCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Largest `n` currently cached (`-2` when empty).
    pub fn max_index(&self) -> i64 {
        self.computed.read().unwrap().len() as i64 - 2
    }

    pub fn get(&self, n: i64) -> GradedPoly {
        assert!(n >= -1, "Hamiltonians are indexed from -1");
        let slot = (n + 1) as usize;
        if let Some(h) = self.computed.read().unwrap().get(slot) {
            return h.clone();
        }
        let mut w = self.computed.write().unwrap();
        if w.len() <= slot {
            *w = compute_hamiltonians(n);
        }
        w[slot].clone()
    }
}

/// `H_{-1}, ..., H_nmax` read off `1 + (1/2) sum H_n z^{-n-2} = sqrt(Q(z)/z)`.
fn compute_hamiltonians(nmax: i64) -> Vec<GradedPoly> {
    let order = (nmax + 2) as usize;
    let w = resolvent::assemble_w_symbolic(order);
    let q = resolvent::q_series(&w).expect("symbolic W has W-form");
    let s = resolvent::sqrt_qz(&q).expect("Q/z starts with 1");
    let two = BigRational::from_integer(BigInt::from(2));
    (-1..=nmax)
        .map(|n| s.at(-n - 2).scale(&two))
        .collect()
}

fn global_cache() -> &'static HamiltonianCache {
    static CACHE: std::sync::OnceLock<HamiltonianCache> = std::sync::OnceLock::new();
    CACHE.get_or_init(HamiltonianCache::new)
}

/// The Hamiltonian `H_n`, homogeneous of degree `2n+4`.
pub fn hamiltonian(n: i64) -> GradedPoly {
    global_cache().get(n)
}

/// The derivation `d_n f = {H_n, f}`.
pub fn derivation(n: i64, f: &GradedPoly) -> GradedPoly {
    assert!(n >= 0, "derivations are indexed from 0");
    bracket(&hamiltonian(n), f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::rat;

    fn gp(g: Generator) -> GradedPoly {
        GradedPoly::generator(g)
    }

    fn all_generators(max: u32) -> Vec<Generator> {
        (1..=max)
            .flat_map(|i| [Generator::a(i), Generator::b(i), Generator::c(i)])
            .collect()
    }

    /// Terms of `(z^e - w^e)/(z - w)` as `(power of z, power of w, sign)`.
    fn divided_difference(e: i64) -> Vec<(i64, i64, i64)> {
        if e > 0 {
            (0..e).map(|p| (p, e - 1 - p, 1)).collect()
        } else if e < 0 {
            let k = -e;
            (0..k).map(|p| (p - k, (k - 1 - p) - k, -1)).collect()
        } else {
            Vec::new()
        }
    }

    /// Power of `z` at which a generator sits in its generating function.
    fn gf_power(g: Generator) -> i64 {
        match g.family {
            Family::A | Family::B => -(g.index as i64),
            Family::C => 1 - g.index as i64,
        }
    }

    /// Brute-force expansion of the generating-function brackets: returns
    /// `{x(z), y(w)}` as a map `(power z, power w) -> GradedPoly`.
    fn series_bracket(fx: Family, fy: Family, depth: u32) -> BTreeMap<(i64, i64), GradedPoly> {
        let mut out: BTreeMap<(i64, i64), GradedPoly> = BTreeMap::new();
        let mut add = |pz: i64, pw: i64, p: GradedPoly| {
            let e = out.entry((pz, pw)).or_default();
            e.plus_assign(&p);
        };
        let gens = |f: Family| (1..=depth).map(move |i| Generator::new(f, i));
        let dd = |f: Family, scale: i64, add: &mut dyn FnMut(i64, i64, GradedPoly)| {
            for g in gens(f) {
                for (pz, pw, sign) in divided_difference(gf_power(g)) {
                    add(pz, pw, gp(g).scale(&rat(scale * sign, 1)));
                }
            }
        };
        use Family::*;
        match (fx, fy) {
            (A, B) => dd(B, -1, &mut add),
            (A, C) => {
                dd(C, 1, &mut add);
                for g in gens(B) {
                    add(gf_power(g), 0, gp(g).negated());
                }
            }
            (B, C) => dd(A, -2, &mut add),
            (C, C) => {
                for g in gens(A) {
                    add(gf_power(g), 0, gp(g).scale(&rat(2, 1)));
                    add(0, gf_power(g), gp(g).scale(&rat(-2, 1)));
                }
            }
            _ => {}
        }
        out
    }

    #[test]
    fn closed_form_matches_generating_functions() {
        use Family::*;
        let depth = 12;
        for (fx, fy) in [(A, A), (A, B), (A, C), (B, B), (B, C), (C, C)] {
            let series = series_bracket(fx, fy, depth);
            for i in 1..=5 {
                for j in 1..=5 {
                    let x = Generator::new(fx, i);
                    let y = Generator::new(fy, j);
                    let key = (gf_power(x), gf_power(y));
                    let expected = series.get(&key).cloned().unwrap_or_default();
                    assert_eq!(generator_bracket(x, y), expected, "{{{x},{y}}}");
                }
            }
        }
    }

    #[test]
    fn a1_b1_sign() {
        assert_eq!(generator_bracket(Generator::a(1), Generator::b(1)), gp(Generator::b(1)));
        assert_eq!(
            generator_bracket(Generator::b(1), Generator::a(1)),
            gp(Generator::b(1)).negated()
        );
    }

    #[test]
    fn casimir_annihilates_generators() {
        let casimir = gp(Generator::b(1)).plus(&gp(Generator::c(1)));
        for g in all_generators(8) {
            assert!(bracket(&casimir, &gp(g)).is_empty(), "{{b1+c1,{g}}}");
        }
    }

    #[test]
    fn antisymmetry_jacobi_and_degree_on_generators() {
        let gens = all_generators(4);
        for &x in &gens {
            for &y in &gens {
                let xy = generator_bracket(x, y);
                assert_eq!(xy, generator_bracket(y, x).negated());
                if let Some(d) = xy.degree() {
                    assert_eq!(d + 3, x.degree() + y.degree());
                }
                for &z in &gens {
                    let (x, y, z) = (gp(x), gp(y), gp(z));
                    let j = bracket(&x, &bracket(&y, &z))
                        .plus(&bracket(&y, &bracket(&z, &x)))
                        .plus(&bracket(&z, &bracket(&x, &y)));
                    assert!(j.is_empty());
                }
            }
        }
    }

    #[test]
    fn bracket_trivial_cases() {
        let f = gp(Generator::a(2)).times(&gp(Generator::c(3))).plus(&gp(Generator::b(1)));
        assert!(bracket(&f, &f).is_empty());
        assert!(bracket(&GradedPoly::constant(rat(3, 1)), &f).is_empty());
    }

    #[test]
    fn jacobi_on_products() {
        let f = gp(Generator::a(1)).times(&gp(Generator::c(2)));
        let g = gp(Generator::a(1)).times(&gp(Generator::b(2))).plus(&gp(Generator::a(3)));
        let h = gp(Generator::c(3)).times(&gp(Generator::c(3))).times(&gp(Generator::b(1)));
        let j = bracket(&f, &bracket(&g, &h))
            .plus(&bracket(&g, &bracket(&h, &f)))
            .plus(&bracket(&h, &bracket(&f, &g)));
        assert!(j.is_empty());
        let fg = bracket(&f, &g);
        assert_eq!(fg.degree(), Some(f.degree().unwrap() + g.degree().unwrap() - 3));
    }

    #[test]
    fn hamiltonians() {
        let b1 = gp(Generator::b(1));
        let c1 = gp(Generator::c(1));
        assert_eq!(hamiltonian(-1), b1.plus(&c1));
        let q1 = b1.plus(&c1);
        let q2 = gp(Generator::b(2)).plus(&gp(Generator::c(2))).plus(&b1.times(&c1));
        assert_eq!(hamiltonian(0), q2.minus(&q1.times(&q1).scale(&rat(1, 4))));
        for n in 0..=6 {
            assert_eq!(hamiltonian(n).degree(), Some(2 * n as u32 + 4), "H_{n}");
        }
    }

    #[test]
    fn displayed_vector_fields() {
        let (a1, a2) = (gp(Generator::a(1)), gp(Generator::a(2)));
        let (b1, b2) = (gp(Generator::b(1)), gp(Generator::b(2)));
        let (c1, c2) = (gp(Generator::c(1)), gp(Generator::c(2)));
        assert_eq!(derivation(0, &b1), a1.scale(&rat(-2, 1)));
        assert_eq!(derivation(0, &a1), c2.minus(&b2).plus(&b1.times(&b1)).minus(&b1.times(&c1)));
        assert_eq!(
            derivation(1, &b1),
            a2.scale(&rat(-2, 1)).plus(&a1.times(&b1.plus(&c1)))
        );
    }

    #[test]
    fn derivation_raises_degree() {
        for n in 0..=3 {
            for g in all_generators(3) {
                let d = derivation(n, &gp(g));
                if !d.is_empty() {
                    assert_eq!(d.degree(), Some(g.degree() + 2 * n as u32 + 1));
                }
            }
        }
    }

    #[test]
    fn hamiltonians_commute() {
        for n in 0..=4 {
            for m in (n + 1)..=4 {
                assert!(bracket(&hamiltonian(n), &hamiltonian(m)).is_empty(), "{{H{n},H{m}}}");
            }
        }
    }

    #[test]
    fn cache_is_shared_across_threads() {
        let cache = HamiltonianCache::new();
        std::thread::scope(|s| {
            let hs: Vec<_> = (0..4).map(|n| s.spawn({
                let cache = &cache;
                move || cache.get(n)
            })).collect();
            for (n, h) in hs.into_iter().enumerate() {
                assert_eq!(h.join().unwrap(), hamiltonian(n as i64));
            }
        });
        assert!(cache.max_index() >= 3);
    }
}
