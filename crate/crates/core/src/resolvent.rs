//! The series `W(z)`, `Q(z) = -det W`, the resolvent `M = W / sqrt(Q/z)`, the
//! Lax matrices `U_n`, and the change to jet variables.
//!
//! `W(z) = [[0, 1], [z + c_1, 0]] + sum_{i>=1} [[a_i, b_i], [c_{i+1}, -a_i]] z^{-i}`.

use crate::error::{Error, Result};
use crate::ring::{Ring, Scalar};
use crate::series::{LaurentSeries, MatrixSeries};
use crate::walgebra::{derivation, Family, Generator, GradedPoly};
use num::BigRational;
use serde::{Deserialize, Serialize};

/// Initial data `(a_i, b_i, c_i)` of the resolvent at `t = 0`.
///
/// Lists are indexed from 1 (`a[0]` is `a_1`). Without a declared depth the
/// lists are exact and zero-extended; with `depth = Some(d)` only
/// `a_1..a_d`, `b_1..b_d`, `c_1..c_{d+1}` are known and reading further is an
/// error.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InitialData {
    #[serde(with = "crate::io::rational_vec", default)]
    pub a: Vec<BigRational>,
    #[serde(with = "crate::io::rational_vec", default)]
    pub b: Vec<BigRational>,
    #[serde(with = "crate::io::rational_vec", default)]
    pub c: Vec<BigRational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
}

impl InitialData {
    pub fn vacuum() -> Self {
        Self::default()
    }

    /// Number of `z^{-i}` blocks `[[a_i, b_i], [c_{i+1}, -a_i]]` that are known.
    pub fn available_depth(&self) -> Option<usize> {
        self.depth
    }

    /// Largest block index carrying non-zero data.
    pub fn support(&self) -> usize {
        let last = |v: &[BigRational]| v.iter().rposition(|x| !x.is_zero()).map_or(0, |p| p + 1);
        last(&self.a).max(last(&self.b)).max(last(&self.c).saturating_sub(1))
    }

    fn read(list: &[BigRational], i: usize, limit: Option<usize>) -> Result<BigRational> {
        if let Some(d) = limit {
            if i > d {
                return Err(Error::InsufficientDepth { have: d, need: i });
            }
        }
        Ok(list.get(i - 1).cloned().unwrap_or_else(BigRational::zero))
    }

    pub fn value(&self, g: Generator) -> Result<BigRational> {
        let i = g.index as usize;
        match g.family {
            Family::A => Self::read(&self.a, i, self.depth),
            Family::B => Self::read(&self.b, i, self.depth),
            Family::C => Self::read(&self.c, i, self.depth.map(|d| d + 1)),
        }
    }

    /// Ensures every generator up to block `need` is known.
    pub fn require_depth(&self, need: usize) -> Result<()> {
        match self.depth {
            Some(d) if d < need => Err(Error::InsufficientDepth { have: d, need }),
            _ => Ok(()),
        }
    }
}

fn w_form<C: Scalar>(order: usize, entry: impl Fn(Generator) -> C) -> MatrixSeries<C> {
    let k = order as i64;
    let mut a = Vec::new();
    let mut b = vec![(0, C::one())];
    let mut c = vec![(1, C::one()), (0, entry(Generator::c(1)))];
    for i in 1..=order as u32 {
        let p = -(i as i64);
        a.push((p, entry(Generator::a(i))));
        b.push((p, entry(Generator::b(i))));
        c.push((p, entry(Generator::c(i + 1))));
    }
    let a = LaurentSeries::from_terms(a, k);
    MatrixSeries::new([
        [a.clone(), LaurentSeries::from_terms(b, k)],
        [LaurentSeries::from_terms(c, k), a.negated()],
    ])
}

/// `W(z)` for numerical initial data, known to `O(z^{-order-1})`.
pub fn assemble_w(data: &InitialData, order: usize) -> Result<MatrixSeries<BigRational>> {
    assert!(order >= 1);
    data.require_depth(order)?;
    Ok(w_form(order, |g| data.value(g).expect("depth checked")))
}

/// `W(z)` with the generators of `W` as coefficients.
pub fn assemble_w_symbolic(order: usize) -> MatrixSeries<GradedPoly> {
    w_form(order, GradedPoly::generator)
}

fn check_w_form<C: Ring>(w: &MatrixSeries<C>) -> Result<()> {
    let lead12 = w.entry(0, 1).lead();
    let lead21 = w.entry(1, 0).lead();
    let ok = lead12 == Some(0)
        && w.entry(0, 1).at(0).minus(&C::one()).is_zero()
        && lead21 == Some(1)
        && w.entry(1, 0).at(1).minus(&C::one()).is_zero()
        && w.entry(0, 0).plus(w.entry(1, 1)).terms().next().is_none();
    if ok {
        Ok(())
    } else {
        Err(Error::WrongLeadingTerm("matrix is not of the form [[a, 1 + ...], [z + ..., -a]]".into()))
    }
}

/// `Q(z) = -det W(z) = z + sum q_i z^{1-i}`.
pub fn q_series<C: Ring>(w: &MatrixSeries<C>) -> Result<LaurentSeries<C>> {
    check_w_form(w)?;
    let q = w.det().negated();
    if q.lead() != Some(1) {
        return Err(Error::WrongLeadingTerm("Q(z) must start with z".into()));
    }
    Ok(q)
}

/// `S = sqrt(Q(z)/z) = 1 + O(1/z)`.
pub fn sqrt_qz<C: Scalar>(q: &LaurentSeries<C>) -> Result<LaurentSeries<C>> {
    let p = q.shift(-1);
    if p.order().is_none() {
        return Err(Error::WrongLeadingTerm("Q must carry a truncation order".into()));
    }
    p.sqrt_unit()
}

/// The matrix resolvent `M(z) = W(z) / sqrt(Q(z)/z)`, `det M = -z`.
pub fn m_series<C: Scalar>(w: &MatrixSeries<C>) -> Result<MatrixSeries<C>> {
    let s = sqrt_qz(&q_series(w)?)?;
    let sinv = s.inverse_unit()?;
    Ok(w.scale_series(&sinv))
}

/// `U_n = [z^n M(z)]_+ - E_21 b~_{n+1}`, a matrix polynomial of degree `n+1`.
///
/// `[.]_+` keeps `z^0` and higher; `b~_i` are the coefficients of
/// `M_12 = 1 + sum b~_i z^{-i}`.
pub fn u_matrix<C: Ring>(n: usize, m: &MatrixSeries<C>) -> Result<MatrixSeries<C>> {
    let need = n as i64 + 1;
    if m.order().map_or(false, |k| k < need) {
        return Err(Error::TruncationExhausted { power: -need, known: -m.order().unwrap() });
    }
    let shifted = m.shift(n as i64);
    let mut u = shifted.each(|s| s.positive_part());
    let bt = m.entry(0, 1).coeff(-need)?;
    u.e[1][0] = u.e[1][0].minus(&LaurentSeries::exact([(0, bt)]));
    Ok(u)
}

/// A non-zero coefficient left over by a symbolic identity check.
#[derive(Debug, Clone)]
pub struct Residual {
    pub row: usize,
    pub col: usize,
    pub power: i64,
    pub value: GradedPoly,
}

fn collect_residual(d: &MatrixSeries<GradedPoly>, lowest: i64) -> Vec<Residual> {
    let mut out = Vec::new();
    for row in 0..2 {
        for col in 0..2 {
            for (p, v) in d.entry(row, col).terms() {
                if p >= lowest && !v.is_empty() {
                    out.push(Residual { row, col, power: p, value: v.clone() });
                }
            }
        }
    }
    out
}

/// Checks `d_n W(z) = [U_n(z), W(z)]` coefficient-wise down to `z^{-order}`.
pub fn lax_check(n: usize, order: usize) -> Vec<Residual> {
    let k = order as i64;
    let w = assemble_w_symbolic(order + n + 2);
    let m = m_series(&w).expect("symbolic W has W-form");
    let u = u_matrix(n, &m).expect("resolvent deep enough");
    let rhs = u.commutator(&w).truncate(k);
    let lhs = w.truncate(k).each(|s| s.map(|c| derivation(n as i64, c)));
    collect_residual(&lhs.minus(&rhs), -k)
}

/// Checks the generating-function identity for the Hamiltonian vector fields:
/// the `w^{-n-1}` coefficient of `[M(w), W(z)]/(w - z) - b~(w)[E_21, W(z)]`,
/// expanded for `|w| > |z|`, equals `{H_n, W(z)}` down to `z^{-order}`.
pub fn hw_check(n: usize, order: usize) -> Vec<Residual> {
    let k = order as i64;
    let depth = order + n + 3;
    let w = assemble_w_symbolic(depth);
    let m = m_series(&w).expect("symbolic W has W-form");
    // 1/(w - z) = sum_{j>=0} z^j w^{-j-1}; the w^{-n-1} coefficient of
    // M(w)/(w - z) is sum_{j>=0} z^j M_{j-n}, i.e. [z^n M(z)]_+ read in z.
    let mut acc = MatrixSeries::new(std::array::from_fn(|_| {
        std::array::from_fn(|_| LaurentSeries::<GradedPoly>::exact(std::iter::empty()))
    }));
    for j in 0..=(n as i64 + 1) {
        let coef = m.coeff(j - n as i64).expect("resolvent deep enough");
        let zj = |c: &GradedPoly| LaurentSeries::exact([(j, c.clone())]);
        let term = MatrixSeries::new([[zj(&coef[0][0]), zj(&coef[0][1])], [zj(&coef[1][0]), zj(&coef[1][1])]]);
        acc = acc.plus(&term);
    }
    let lhs_w = acc.commutator(&w).truncate(k);
    let bt = m.entry(0, 1).at(-(n as i64) - 1);
    let e21 = MatrixSeries::new([
        [LaurentSeries::exact(std::iter::empty()), LaurentSeries::exact(std::iter::empty())],
        [LaurentSeries::exact([(0, bt)]), LaurentSeries::exact(std::iter::empty())],
    ]);
    let rhs = lhs_w.minus(&e21.commutator(&w).truncate(k));
    let bracket = w.truncate(k).each(|s| s.map(|c| derivation(n as i64, c)));
    collect_residual(&bracket.minus(&rhs), -k)
}

/// Jet coordinates `u, u_x, ..., u^{(2 depth - 1)}` and Casimirs `q_1..q_depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jets {
    pub u: Vec<BigRational>,
    pub q: Vec<BigRational>,
}

/// Symbolic jets `u^{(k)} = d_0^k (b_1 - c_1)/2` for `k < count`.
pub fn symbolic_jets(count: usize) -> Vec<GradedPoly> {
    let half = BigRational::new(1.into(), 2.into());
    let mut u = GradedPoly::generator(Generator::b(1))
        .minus(&GradedPoly::generator(Generator::c(1)))
        .scale(&half);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(u.clone());
        u = derivation(0, &u);
    }
    out
}

/// Symbolic Casimirs `q_1..q_count` (coefficients of `Q(z)`).
pub fn symbolic_casimirs(count: usize) -> Vec<GradedPoly> {
    let w = assemble_w_symbolic(count.max(1));
    let q = q_series(&w).expect("symbolic W has W-form");
    (1..=count as i64).map(|i| q.at(1 - i)).collect()
}

/// Forward change of variables: generators up to block `depth` to jets.
pub fn jet_change(data: &InitialData, depth: usize) -> Result<Jets> {
    data.require_depth(depth)?;
    let val = |g: Generator| data.value(g).unwrap_or_else(|_| BigRational::zero());
    let u = symbolic_jets(2 * depth).iter().map(|p| p.evaluate(val)).collect();
    let q = symbolic_casimirs(depth).iter().map(|p| p.evaluate(val)).collect();
    Ok(Jets { u, q })
}

/// Inverse change of variables: jets and Casimirs back to `a_i, b_i, c_i`,
/// solved block by block using the triangular structure.
pub fn jet_change_inverse(jets: &Jets) -> Result<InitialData> {
    let depth = jets.q.len();
    if jets.u.len() != 2 * depth {
        return Err(Error::InvalidArgument("need 2*depth jets and depth Casimirs".into()));
    }
    let ju = symbolic_jets(2 * depth);
    let jq = symbolic_casimirs(depth);
    let mut a = vec![BigRational::zero(); depth];
    let mut b = vec![BigRational::zero(); depth];
    let mut c = vec![BigRational::zero(); depth];
    let lookup = |a: &[BigRational], b: &[BigRational], c: &[BigRational], g: Generator| {
        let i = g.index as usize;
        let v = match g.family {
            Family::A => a.get(i - 1),
            Family::B => b.get(i - 1),
            Family::C => c.get(i - 1),
        };
        v.filter(|x| !x.is_zero()).cloned().or(Some(BigRational::zero()))
    };
    for i in 1..=depth {
        // degree 2i: (u^{(2i-2)}, q_i) determine (b_i, c_i).
        let (bi, ci) = (Generator::b(i as u32), Generator::c(i as u32));
        let known = |g: Generator| (g != bi && g != ci).then(|| lookup(&a, &b, &c, g)).flatten();
        let e1 = ju[2 * i - 2].substitute(known);
        let e2 = jq[i - 1].substitute(known);
        let (x, y) = solve_linear_2(&e1, &e2, bi, ci, &jets.u[2 * i - 2], &jets.q[i - 1])?;
        b[i - 1] = x;
        c[i - 1] = y;
        // degree 2i+1: u^{(2i-1)} determines a_i.
        let ai = Generator::a(i as u32);
        let known = |g: Generator| (g != ai).then(|| lookup(&a, &b, &c, g)).flatten();
        let e = ju[2 * i - 1].substitute(known);
        let lin = e.coefficient(&[(ai, 1)]);
        if lin.is_zero() {
            return Err(Error::InvalidArgument("jet change is not triangular".into()));
        }
        a[i - 1] = (&jets.u[2 * i - 1] - e.coefficient(&[])) / lin;
    }
    Ok(InitialData { a, b, c, depth: Some(depth) })
}

fn solve_linear_2(
    e1: &GradedPoly,
    e2: &GradedPoly,
    x: Generator,
    y: Generator,
    r1: &BigRational,
    r2: &BigRational,
) -> Result<(BigRational, BigRational)> {
    let co = |e: &GradedPoly, g: Generator| e.coefficient(&[(g, 1)]);
    let (m11, m12, m21, m22) = (co(e1, x), co(e1, y), co(e2, x), co(e2, y));
    let det = &m11 * &m22 - &m12 * &m21;
    for e in [e1, e2] {
        let linear = e.terms().all(|(m, _)| m.is_empty() || (m.len() == 1 && m[0].1 == 1));
        if !linear || det.is_zero() {
            return Err(Error::InvalidArgument("jet change is not triangular".into()));
        }
    }
    let s1 = r1 - e1.coefficient(&[]);
    let s2 = r2 - e2.coefficient(&[]);
    Ok(((&m22 * &s1 - &m12 * &s2) / &det, (&m11 * &s2 - &m21 * &s1) / det))
}

/// Vacuum resolvent `[[0, 1], [z, 0]]` as an exact matrix polynomial.
pub fn vacuum<C: Ring>() -> MatrixSeries<C> {
    let e = || LaurentSeries::exact(std::iter::empty());
    MatrixSeries::new([
        [e(), LaurentSeries::exact([(0, C::one())])],
        [LaurentSeries::exact([(1, C::one())]), e()],
    ])
}

/// Casts a rational resolvent series to another scalar ring.
pub fn cast<C: Scalar>(m: &MatrixSeries<BigRational>) -> MatrixSeries<C> {
    m.each_cast(|q| C::from_rational(q))
}

impl MatrixSeries<BigRational> {
    pub fn each_cast<D: Scalar>(&self, f: impl Fn(&BigRational) -> D + Copy) -> MatrixSeries<D> {
        let g = |i: usize, j: usize| self.e[i][j].map(f);
        MatrixSeries::new([[g(0, 0), g(0, 1)], [g(1, 0), g(1, 1)]])
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::rat;
    use crate::wk;
    use rand::{Rng, SeedableRng};

    fn gp(g: Generator) -> GradedPoly {
        GradedPoly::generator(g)
    }

    fn random_data(seed: u64, depth: usize) -> InitialData {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut r = |n: usize| (0..n).map(|_| rat(rng.gen_range(-9..=9), rng.gen_range(1..=6))).collect();
        InitialData { a: r(depth), b: r(depth), c: r(depth + 1), depth: Some(depth) }
    }

    #[test]
    fn vacuum_w() {
        let w = assemble_w(&InitialData::vacuum(), 4).unwrap();
        assert_eq!(w.entry(0, 1).terms().count(), 1);
        assert_eq!(w.entry(1, 0).terms().collect::<Vec<_>>(), vec![(1, &rat(1, 1))]);
        assert!(w.entry(0, 0).terms().next().is_none());
        let q = q_series(&w).unwrap();
        assert_eq!(q.terms().collect::<Vec<_>>(), vec![(1, &rat(1, 1))]);
        let m = m_series(&w).unwrap();
        assert_eq!(m.order(), Some(3));
        assert_eq!(m.truncate(3), w.truncate(3));
        let u2 = u_matrix(2, &m).unwrap();
        assert_eq!(u2.entry(1, 0).terms().collect::<Vec<_>>(), vec![(3, &rat(1, 1))]);
        assert_eq!(u2.entry(0, 1).terms().collect::<Vec<_>>(), vec![(2, &rat(1, 1))]);
    }

    #[test]
    fn symbolic_w_entries() {
        let w = assemble_w_symbolic(2);
        let c = w.entry(1, 0);
        assert_eq!(c.at(1), GradedPoly::constant(rat(1, 1)));
        assert_eq!(c.at(0), gp(Generator::c(1)));
        assert_eq!(c.at(-1), gp(Generator::c(2)));
        let q = q_series(&w).unwrap();
        assert_eq!(q.at(0), gp(Generator::b(1)).plus(&gp(Generator::c(1))));
    }

    #[test]
    fn airy_w_entry() {
        let w = assemble_w(&wk::airy_data(6), 5).unwrap();
        assert_eq!(w.entry(0, 1).at(-3), rat(5, 8));
    }

    #[test]
    fn resolvent_normalization() {
        let w = assemble_w_symbolic(3);
        let m = m_series(&w).unwrap();
        let expected = gp(Generator::c(1)).minus(&gp(Generator::b(1))).scale(&rat(1, 2));
        assert_eq!(m.entry(1, 0).at(0), expected);
        assert!(m.entry(0, 0).at(0).is_empty());
        assert!(m.entry(0, 1).at(0).minus(&GradedPoly::constant(rat(1, 1))).is_empty());
    }

    #[test]
    fn det_m_is_minus_z() {
        for seed in 0..6 {
            let w = assemble_w(&random_data(seed, 5), 5).unwrap();
            let d = m_series(&w).unwrap().det();
            assert_eq!(d.terms().collect::<Vec<_>>(), vec![(1, &rat(-1, 1))]);
        }
        let w = assemble_w_symbolic(3);
        let d = m_series(&w).unwrap().det();
        assert_eq!(d.terms().filter(|(_, c)| !c.is_empty()).count(), 1);
    }

    #[test]
    fn sqrt_of_random_q() {
        for seed in 0..4 {
            let q = q_series(&assemble_w(&random_data(seed, 6), 6).unwrap()).unwrap();
            let s = sqrt_qz(&q).unwrap();
            assert!(s.times(&s).minus(&q.shift(-1)).terms().next().is_none());
        }
    }

    fn jet_polys() -> (GradedPoly, GradedPoly, GradedPoly) {
        let j = symbolic_jets(3);
        (j[0].clone(), j[1].clone(), j[2].clone())
    }

    fn lit(p: i64, s: &GradedPoly) -> LaurentSeries<GradedPoly> {
        LaurentSeries::exact([(p, s.clone())])
    }

    #[test]
    fn u0_and_u1_in_jets() {
        let (u, ux, uxx) = jet_polys();
        let m = m_series(&assemble_w_symbolic(5)).unwrap();
        let one = GradedPoly::constant(rat(1, 1));
        let u0 = u_matrix(0, &m).unwrap();
        assert!(u0.entry(0, 0).terms().next().is_none());
        assert_eq!(u0.entry(0, 1), &lit(0, &one));
        assert_eq!(u0.entry(1, 0), &lit(1, &one).plus(&lit(0, &u.scale(&rat(-2, 1)))));
        let u1 = u_matrix(1, &m).unwrap();
        assert_eq!(u1.entry(0, 0), &lit(0, &ux.scale(&rat(-1, 2))));
        assert_eq!(u1.entry(1, 1), &lit(0, &ux.scale(&rat(1, 2))));
        assert_eq!(u1.entry(0, 1), &lit(1, &one).plus(&lit(0, &u)));
        let c21 = lit(2, &one)
            .plus(&lit(1, &u.negated()))
            .plus(&lit(0, &uxx.scale(&rat(-1, 2)).minus(&u.times(&u).scale(&rat(2, 1)))));
        assert_eq!(u1.entry(1, 0), &c21);
        for n in 0..=4 {
            let un = u_matrix(n, &m_series(&assemble_w_symbolic(n + 3)).unwrap()).unwrap();
            assert!(un.trace().terms().all(|(_, c)| c.is_empty()));
        }
    }

    #[test]
    fn lax_equations() {
        for (n, order) in [(0, 8), (1, 8), (2, 6)] {
            let r = lax_check(n, order);
            assert!(r.is_empty(), "n={n}: {:?}", r.first());
        }
    }

    #[test]
    fn generating_function_identity() {
        for n in 0..=2 {
            let r = hw_check(n, 5);
            assert!(r.is_empty(), "n={n}: {:?}", r.first());
        }
    }

    #[test]
    fn jet_change_examples() {
        let zero = jet_change(&InitialData::vacuum(), 3).unwrap();
        assert!(zero.u.iter().chain(&zero.q).all(|x| x.is_zero()));
        let jets = Jets {
            u: vec![rat(2, 3), rat(-1, 5), rat(7, 2), rat(1, 7), rat(0, 1), rat(-3, 1)],
            q: vec![rat(1, 2), rat(-4, 3), rat(5, 1)],
        };
        let data = jet_change_inverse(&jets).unwrap();
        let (u, ux, uxxx, q1) = (&jets.u[0], &jets.u[1], &jets.u[3], &jets.q[0]);
        assert_eq!(data.a[0], -ux / rat(2, 1));
        assert_eq!(data.b[0], u + q1 / rat(2, 1));
        assert_eq!(data.c[0], -u + q1 / rat(2, 1));
        let a2 = -uxxx / rat(8, 1) - rat(3, 2) * u * ux - q1 * ux / rat(4, 1);
        assert_eq!(data.a[1], a2);
        assert_eq!(jet_change(&data, 3).unwrap(), jets);
    }

    #[test]
    fn jet_change_round_trip_random() {
        for seed in 0..3 {
            let mut d = random_data(seed, 3);
            d.c.truncate(3);
            let jets = jet_change(&d, 3).unwrap();
            assert_eq!(jet_change_inverse(&jets).unwrap(), d);
        }
    }

    #[test]
    fn depth_guard() {
        let d = random_data(1, 2);
        assert!(matches!(assemble_w(&d, 3), Err(Error::InsufficientDepth { have: 2, need: 3 })));
        assert!(u_matrix(3, &m_series(&assemble_w(&d, 2).unwrap()).unwrap()).is_err());
    }
}
