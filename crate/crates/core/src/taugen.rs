//! The N-point resolvent formula for the logarithmic derivatives of tau.
//!
//! For `N >= 2`
//!
//! ```text
//! sum F_{k_1..k_N} prod z_i^{-k_i-1}
//!   = -(1/N) sum_{s in S_N} tr[M(z_{s_1}) ... M(z_{s_N})] / prod (z_{s_i} - z_{s_{i+1}})
//!     - delta_{N,2} (z_1 + z_2) / (z_1 - z_2)^2,
//! ```
//!
//! expanded in a region `|z_{r_1}| > |z_{r_2}| > ...`. The trace is invariant
//! under cyclic rotations, so only `(N-1)!` representatives are summed (the
//! multiplicity `N` cancels the `1/N`). Each representative is evaluated by a
//! transfer recursion over the geometric-series indices of its edges.

use crate::error::{Error, Result};
use crate::exec::{map_collect, Execution};
use crate::resolvent::{m_series, InitialData};
use crate::ring::{Ring, Scalar};
use crate::series::{mat_add_assign, mat_mul, mat_neg, Mat2, MatrixSeries};
use crate::tpoly::{multi_indices, symmetry_factor, TMonomial, TruncatedTPoly};
use num::{BigInt, BigRational, Integer};
use std::collections::{BTreeMap, HashMap};

/// Coefficients `M_j` of the resolvent, `j = 1, 0, -1, ..., -depth`.
#[derive(Debug, Clone)]
pub struct ResolventCoeffs<C> {
    coeffs: Vec<Mat2<C>>,
    nonzero: Vec<i64>,
    depth: i64,
}

impl<C: Ring> ResolventCoeffs<C> {
    /// Reads the coefficients of a resolvent series known to `O(z^{-depth-1})`.
    pub fn from_series(m: &MatrixSeries<C>) -> Result<Self> {
        let depth = m
            .order()
            .ok_or_else(|| Error::InvalidArgument("resolvent must carry a truncation order".into()))?;
        if m.lead().map_or(false, |l| l > 1) {
            return Err(Error::WrongLeadingTerm("resolvent has powers above z^1".into()));
        }
        let mut coeffs = Vec::new();
        let mut nonzero = Vec::new();
        for j in (-depth..=1).rev() {
            let c = m.coeff(j)?;
            if !c.iter().flatten().all(|x| x.is_zero()) {
                nonzero.push(j);
            }
            coeffs.push(c);
        }
        Ok(ResolventCoeffs { coeffs, nonzero, depth })
    }

    pub fn depth(&self) -> i64 {
        self.depth
    }

    fn get(&self, j: i64) -> &Mat2<C> {
        &self.coeffs[(1 - j) as usize]
    }

    fn map<D: Ring>(&self, f: impl Fn(&C) -> D) -> ResolventCoeffs<D> {
        let g = |m: &Mat2<C>| [[f(&m[0][0]), f(&m[0][1])], [f(&m[1][0]), f(&m[1][1])]];
        ResolventCoeffs { coeffs: self.coeffs.iter().map(g).collect(), nonzero: self.nonzero.clone(), depth: self.depth }
    }
}

/// Resolvent depth needed for a coefficient with exponents `exps`: every
/// factor carries a power `j <= 1` and the powers add up to `sum e + N`, so no
/// factor goes below `sum e + 1`.
pub fn required_depth(exps: &[i64]) -> i64 {
    (-exps.iter().sum::<i64>() - 1).max(0)
}

/// Contribution of edge `(a -> b)` with geometric index `k`: the exponents
/// added to `z_a` and `z_b` and the sign.
#[inline]
fn edge(rank: &[usize], a: usize, b: usize, k: i64) -> (i64, i64, bool) {
    if rank[a] < rank[b] {
        (-k - 1, k, true)
    } else {
        (k, -k - 1, false)
    }
}

/// Solves `j = e - c_in - c_out(k)` for the outgoing index `k`.
#[inline]
fn solve_out(rank: &[usize], a: usize, b: usize, e: i64, c_in: i64, j: i64) -> Option<i64> {
    let k = if rank[a] < rank[b] { j - e + c_in - 1 } else { e - c_in - j };
    (k >= 0).then_some(k)
}

/// Trace sum of one cyclic representative `s` (with `s[0]` of top rank).
fn cycle_sum<C: Ring>(m: &ResolventCoeffs<C>, exps: &[i64], rank: &[usize], s: &[usize]) -> C {
    let n = s.len();
    let mut total = C::zero();
    let last = s[n - 1];
    let first = s[0];
    let j_lo = -m.depth;
    // the top vertex receives -k-1 from both of its edges
    let kappa_max = -exps[first] - 1;
    for kappa in 0..=kappa_max.max(-1) {
        let (ca, cb, pos_close) = edge(rank, last, first, kappa);
        // state: outgoing edge index -> accumulated product
        let mut state: HashMap<i64, Mat2<C>> = HashMap::new();
        for &j in &m.nonzero {
            if let Some(k) = solve_out(rank, first, s[1], exps[first], cb, j) {
                let (c_out, _, pos) = edge(rank, first, s[1], k);
                debug_assert_eq!(exps[first] - cb - c_out, j);
                let x = m.get(j).clone();
                let x = if pos == pos_close { x } else { mat_neg(&x) };
                match state.get_mut(&k) {
                    Some(acc) => mat_add_assign(acc, &x),
                    None => {
                        state.insert(k, x);
                    }
                }
            }
        }
        for p in 1..n - 1 {
            let (v, next) = (s[p], s[p + 1]);
            let mut ns: HashMap<i64, Mat2<C>> = HashMap::new();
            for (&kin, acc) in &state {
                let (_, c_in, _) = edge(rank, s[p - 1], v, kin);
                for &j in &m.nonzero {
                    let Some(k) = solve_out(rank, v, next, exps[v], c_in, j) else {
                        continue;
                    };
                    let (_, _, pos) = edge(rank, v, next, k);
                    let x = mat_mul(acc, m.get(j));
                    let x = if pos { x } else { mat_neg(&x) };
                    match ns.get_mut(&k) {
                        Some(a) => mat_add_assign(a, &x),
                        None => {
                            ns.insert(k, x);
                        }
                    }
                }
            }
            state = ns;
        }
        for (&kin, acc) in &state {
            let (_, c_in, _) = edge(rank, s[n - 2], last, kin);
            let j = exps[last] - c_in - ca;
            if j > 1 || j < j_lo {
                continue;
            }
            let x = mat_mul(acc, m.get(j));
            total.plus_assign(&x[0][0].plus(&x[1][1]));
        }
    }
    total
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// The trace part `sum_reps tr[...] / prod(...)` of the combined series at
/// `prod z_i^{e_i}`, in the region where `rank[i]` is the position of `|z_i|`
/// in decreasing order. Generic over the coefficient ring.
pub fn trace_sum<C: Ring>(m: &ResolventCoeffs<C>, exps: &[i64], rank: &[usize], exec: Execution) -> Result<C> {
    let n = exps.len();
    if n < 2 || rank.len() != n {
        return Err(Error::InvalidArgument("N-point formula needs N >= 2 and a rank per variable".into()));
    }
    let need = required_depth(exps);
    if m.depth < need {
        return Err(Error::InsufficientDepth { have: m.depth as usize, need: need as usize });
    }
    let top = (0..n).min_by_key(|&i| rank[i]).unwrap();
    let others: Vec<usize> = (0..n).filter(|&i| i != top).collect();
    let perms = permutations(&others);
    let parts = map_collect(exec, &perms, |p| {
        let mut s = Vec::with_capacity(n);
        s.push(top);
        s.extend_from_slice(p);
        cycle_sum(m, exps, rank, &s)
    });
    let mut total = C::zero();
    for p in &parts {
        total.plus_assign(p);
    }
    Ok(total)
}

/// Coefficient of `(z_1 + z_2)/(z_1 - z_2)^2` at `z_1^{e_1} z_2^{e_2}`.
fn two_point_subtraction(exps: &[i64], rank: &[usize]) -> i64 {
    if exps.len() != 2 {
        return 0;
    }
    let (e1, e2) = (exps[0], exps[1]);
    let inner = if rank[0] < rank[1] { e2 } else { e1 };
    if e1 + e2 == -1 && inner >= 0 {
        2 * inner + 1
    } else {
        0
    }
}

/// Coefficient of `prod z_i^{e_i}` in the combined N-point series.
pub fn npoint_general<C: Scalar>(m: &ResolventCoeffs<C>, exps: &[i64], rank: &[usize], exec: Execution) -> Result<C> {
    let t = trace_sum(m, exps, rank, exec)?;
    Ok(t.negated().minus(&C::from_int(two_point_subtraction(exps, rank))))
}

fn exps_of(ks: &[u32]) -> Vec<i64> {
    ks.iter().map(|&k| -(k as i64) - 1).collect()
}

/// Integer-scaled copy of rational resolvent coefficients: `(D M_j, D)`.
fn integer_scaled(m: &ResolventCoeffs<BigRational>) -> (ResolventCoeffs<BigInt>, BigInt) {
    let mut d = BigInt::one();
    for c in m.coeffs.iter().flatten().flatten() {
        d = d.lcm(c.denom());
    }
    let scaled = m.map(|c| (c * BigRational::from_integer(d.clone())).to_integer());
    (scaled, d)
}

/// Exact N-point evaluator over rational resolvent data; the transfer
/// recursion runs on integers scaled by a common denominator.
pub struct NPoint {
    scaled: ResolventCoeffs<BigInt>,
    denom: BigInt,
    exec: Execution,
}

impl NPoint {
    pub fn new(m: &MatrixSeries<BigRational>, exec: Execution) -> Result<Self> {
        let rc = ResolventCoeffs::from_series(m)?;
        let (scaled, denom) = integer_scaled(&rc);
        Ok(NPoint { scaled, denom, exec })
    }

    /// Builds the evaluator from `W0`, computing `M = W0 / sqrt(Q/z)`.
    pub fn from_w(w0: &MatrixSeries<BigRational>, exec: Execution) -> Result<Self> {
        Self::new(&m_series(w0)?, exec)
    }

    pub fn depth(&self) -> i64 {
        self.scaled.depth
    }

    /// Coefficient of `prod z_i^{e_i}` in the region given by `rank`.
    pub fn coefficient(&self, exps: &[i64], rank: &[usize]) -> Result<BigRational> {
        // the integer recursion yields D^N times the trace part
        let dn = num::pow(self.denom.clone(), exps.len());
        let raw = trace_sum(&self.scaled, exps, rank, self.exec)?;
        let sub = BigRational::from_integer(BigInt::from(two_point_subtraction(exps, rank)));
        Ok(-BigRational::new(raw, dn) - sub)
    }

    /// `F_{k_1..k_N}` in the default region `|z_1| > ... > |z_N|`.
    pub fn f(&self, ks: &[u32]) -> Result<BigRational> {
        let rank: Vec<usize> = (0..ks.len()).collect();
        self.coefficient(&exps_of(ks), &rank)
    }

    /// `F_{k_1..k_N}` in an arbitrary region.
    pub fn f_in_region(&self, ks: &[u32], rank: &[usize]) -> Result<BigRational> {
        self.coefficient(&exps_of(ks), rank)
    }
}

/// `F_{k_1..k_N}` for a single multi-index.
pub fn npoint_coeff(w0: &MatrixSeries<BigRational>, ks: &[u32], exec: Execution) -> Result<BigRational> {
    NPoint::from_w(w0, exec)?.f(ks)
}

/// Symmetric table of `F_{k_1..k_N}` keyed by sorted multi-indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    entries: BTreeMap<TMonomial, BigRational>,
    max_graded_degree: usize,
}

impl CoeffTable {
    pub fn get(&self, ks: &[u32]) -> Option<&BigRational> {
        let mut k = ks.to_vec();
        k.sort_unstable();
        self.entries.get(&k)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&TMonomial, &BigRational)> {
        self.entries.iter()
    }

    pub fn max_graded_degree(&self) -> usize {
        self.max_graded_degree
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The m-truncation `sum_N (1/N!) sum F t_{k_1}..t_{k_N}` (`N >= 2`).
    pub fn to_tpoly(&self) -> TruncatedTPoly<BigRational> {
        let mut p = TruncatedTPoly::zero(self.max_graded_degree);
        for (k, f) in &self.entries {
            let sym = BigRational::from_integer(BigInt::from(symmetry_factor(k)));
            p.add(k.clone(), f / sym);
        }
        p
    }
}

/// Resolvent depth needed for every coefficient of weight `<= m`.
pub fn table_depth(m: usize) -> usize {
    m.saturating_sub(1).max(1)
}

/// Order of `W0` needed for a resolvent of the given depth: the `z` in the
/// lower-left entry costs one order when dividing by `sqrt(Q/z)`.
pub fn w_order(depth: usize) -> usize {
    depth + 1
}

/// Computes all `F` with `2 sum k + N <= m`, `N >= 2`, from `W0`.
pub fn coeff_table(w0: &MatrixSeries<BigRational>, m: usize, exec: Execution) -> Result<CoeffTable> {
    let need = w_order(table_depth(m)) as i64;
    if w0.order().map_or(false, |k| k < need) {
        return Err(Error::InsufficientDepth { have: w0.order().unwrap() as usize, need: need as usize });
    }
    let np = NPoint::from_w(&w0.truncate(need), exec)?;
    let mut entries = BTreeMap::new();
    for k in multi_indices(m, 2) {
        let f = np.f(&k)?;
        entries.insert(k, f);
    }
    Ok(CoeffTable { entries, max_graded_degree: m })
}

/// Initial data reduced to what a weight-`m` table can see.
///
/// A coefficient of weight `w` is homogeneous of degree `w` in the data, so
/// only `a_i` with `2i+1 <= m` and `b_i, c_i` with `2i <= m` matter; deeper
/// entries are dropped and the result is zero-extended. Data with a declared
/// depth below `floor(m/2)` is rejected.
pub fn relevant_data(data: &InitialData, m: usize) -> Result<InitialData> {
    let g = m / 2;
    data.require_depth(g)?;
    let take = |v: &[BigRational], n: usize| v.iter().take(n).cloned().collect::<Vec<_>>();
    Ok(InitialData {
        a: take(&data.a, (m.saturating_sub(1)) / 2),
        b: take(&data.b, g),
        c: take(&data.c, g),
        depth: None,
    })
}

/// `CoeffTable` from initial data (depth-guarded, see [`relevant_data`]).
pub fn coeff_table_from_data(data: &InitialData, m: usize, exec: Execution) -> Result<CoeffTable> {
    let d = relevant_data(data, m)?;
    let w0 = crate::resolvent::assemble_w(&d, w_order(table_depth(m)))?;
    coeff_table(&w0, m, exec)
}

/// The m-truncation of `log tau` (no constant or linear terms).
pub fn truncate_logtau(w0: &MatrixSeries<BigRational>, m: usize, exec: Execution) -> Result<TruncatedTPoly<BigRational>> {
    if m < 2 {
        return Err(Error::InvalidArgument("truncation level must be at least 2".into()));
    }
    Ok(coeff_table(w0, m, exec)?.to_tpoly())
}

/// Which KdV flow to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    /// `u_{t1} = 3 u u_x + u_xxx / 4`
    T1,
    /// `u_{t2} = 15/2 u^2 u_x + 5/2 u_x u_xx + 5/4 u u_xxx + u^{(5)} / 16`
    T2,
}

/// `d^d/dx^d` of a product of `x`-derivatives of `u` with orders `orders`,
/// as a list of `(multinomial, orders)` terms.
fn leibniz(d: usize, orders: &[usize]) -> Vec<(BigInt, Vec<usize>)> {
    fn rec(d: usize, i: usize, orders: &[usize], cur: &mut Vec<usize>, coef: BigInt, out: &mut Vec<(BigInt, Vec<usize>)>) {
        if i + 1 == orders.len() {
            cur.push(orders[i] + d);
            out.push((coef, cur.clone()));
            cur.pop();
            return;
        }
        for take in 0..=d {
            cur.push(orders[i] + take);
            let c = &coef * num::integer::binomial(BigInt::from(d), BigInt::from(take));
            rec(d - take, i + 1, orders, cur, c, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, 0, orders, &mut Vec::new(), BigInt::one(), &mut out);
    out
}

/// Residuals of a KdV flow and its first `order` `t_0`-derivatives at `t = 0`,
/// as identities between entries `F`, where `u^{(i)} = F_{0..0}` (`i+2`
/// zeros) and `d/dt_n` appends the index `n`.
pub fn kdv_identity_check(np: &NPoint, flow: Flow, order: usize) -> Result<Vec<BigRational>> {
    let mut cache: HashMap<Vec<u32>, BigRational> = HashMap::new();
    let mut f = |ks: Vec<u32>| -> Result<BigRational> {
        if let Some(v) = cache.get(&ks) {
            return Ok(v.clone());
        }
        let v = np.f(&ks)?;
        cache.insert(ks, v.clone());
        Ok(v)
    };
    let u = |i: usize| vec![0u32; i + 2];
    let terms: Vec<(BigRational, Vec<usize>)> = match flow {
        Flow::T1 => vec![(BigRational::new(3.into(), 1.into()), vec![0, 1]), (BigRational::new(1.into(), 4.into()), vec![3])],
        Flow::T2 => vec![
            (BigRational::new(15.into(), 2.into()), vec![0, 0, 1]),
            (BigRational::new(5.into(), 2.into()), vec![1, 2]),
            (BigRational::new(5.into(), 4.into()), vec![0, 3]),
            (BigRational::new(1.into(), 16.into()), vec![5]),
        ],
    };
    let time = match flow {
        Flow::T1 => 1,
        Flow::T2 => 2,
    };
    let mut out = Vec::new();
    for d in 0..=order {
        let mut lhs_k = u(d);
        lhs_k.push(time);
        let mut r = f(lhs_k)?;
        for (c, orders) in &terms {
            for (mult, ords) in leibniz(d, orders) {
                let mut prod = c * BigRational::from_integer(mult);
                for o in ords {
                    prod *= f(u(o))?;
                }
                r -= prod;
            }
        }
        out.push(r);
    }
    Ok(out)
}

/// Checks that the combined series carries no non-negative powers: returns
/// every exponent vector in `[-bound, bound]^N` with at least one
/// non-negative entry at which the coefficient is non-zero.
pub fn non_principal_terms(np: &NPoint, n: usize, bound: i64) -> Result<Vec<Vec<i64>>> {
    let rank: Vec<usize> = (0..n).collect();
    let mut bad = Vec::new();
    let mut e = vec![-bound; n];
    loop {
        if e.iter().any(|&x| x >= 0) && required_depth(&e) <= np.depth() {
            if !np.coefficient(&e, &rank)?.is_zero() {
                bad.push(e.clone());
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                return Ok(bad);
            }
            e[i] += 1;
            if e[i] <= bound {
                break;
            }
            e[i] = -bound;
            i += 1;
        }
    }
}
