//! Witten–Kontsevich specialization: Airy resolvent data, intersection
//! numbers, the truncated matrices `W0_g` and their branch-point statistics.

use crate::curve::MatrixPolynomialG;
use crate::error::{Error, Result};
use crate::exec::{map_collect, Execution};
use crate::poly::{find_roots, Poly};
use crate::resolvent::{assemble_w, InitialData};
use crate::ring::{double_factorial, factorial, rat, C64};
use crate::series::{LaurentSeries, MatrixSeries};
use crate::taugen::{required_depth, truncate_logtau, w_order, NPoint};
use crate::tpoly::TruncatedTPoly;
use num::{BigInt, BigRational, Zero};

/// Conventions for the Airy data.
///
/// `Resolvent` is the resolvent of the Airy operator and is the data that
/// produces Witten–Kontsevich numbers. `Printed` uses `24^k` in `a` and puts
/// `c` at `3k-1`; `Figure` keeps the resolvent `a` with `c` at `3k-1`, which
/// is the data whose truncations show the branch-point geometry (the double
/// point at `g = 3n` and `W0_{3n+2} = W0_{3n+1}`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AiryVariant {
    #[default]
    Resolvent,
    Printed,
    Figure,
}

fn frac(n: BigInt, d: BigInt) -> BigRational {
    BigRational::new(n, d)
}

/// `(a_{3k-2}, b_{3k}, c)` for block `k >= 1` under a variant.
fn airy_block(k: u64, variant: AiryVariant) -> (BigRational, BigRational, BigRational) {
    let k24 = |e: u64| num::pow(BigInt::from(24), e as usize);
    let a_pow = match variant {
        AiryVariant::Printed => k,
        _ => k - 1,
    };
    let a = -frac(double_factorial(6 * k as i64 - 5), k24(a_pow) * factorial(k - 1)) / BigInt::from(2);
    let b = frac(double_factorial(6 * k as i64 - 1), k24(k) * factorial(k));
    let c = -&b * rat(6 * k as i64 + 1, 6 * k as i64 - 1);
    (a, b, c)
}

fn c_index(k: usize, variant: AiryVariant) -> usize {
    match variant {
        AiryVariant::Resolvent => 3 * k,
        _ => 3 * k - 1,
    }
}

/// Airy data truncated to `a_i, b_i` for `i <= len` and `c_i` for `i <= len+1`.
fn airy_lists(len: usize, variant: AiryVariant) -> InitialData {
    let mut d = InitialData {
        a: vec![BigRational::zero(); len],
        b: vec![BigRational::zero(); len],
        c: vec![BigRational::zero(); len + 1],
        depth: None,
    };
    let mut k = 1;
    while 3 * k - 2 <= len + 1 {
        let (a, b, c) = airy_block(k as u64, variant);
        if 3 * k - 2 <= len {
            d.a[3 * k - 3] = a;
        }
        if 3 * k <= len {
            d.b[3 * k - 1] = b;
        }
        let ci = c_index(k, variant);
        if ci <= len + 1 {
            d.c[ci - 1] = c;
        }
        k += 1;
    }
    d
}

/// Resolvent Airy data known through block `depth`.
pub fn airy_data(depth: usize) -> InitialData {
    airy_data_variant(depth, AiryVariant::Resolvent)
}

pub fn airy_data_variant(depth: usize, variant: AiryVariant) -> InitialData {
    assert!(depth >= 1, "depth must be at least 1");
    InitialData { depth: Some(depth), ..airy_lists(depth, variant) }
}

/// `<tau_{k_1} ... tau_{k_N}>`, zero unless `sum k - N + 3 = 3g` with `g >= 0`.
pub fn intersection_number(ks: &[u32], exec: Execution) -> Result<BigRational> {
    if ks.len() < 2 {
        return Err(Error::InvalidArgument("one-point numbers are not given by the N-point series".into()));
    }
    let dim = ks.iter().map(|&k| k as i64).sum::<i64>() - ks.len() as i64 + 3;
    if dim < 0 || dim % 3 != 0 {
        return Ok(BigRational::zero());
    }
    let exps: Vec<i64> = ks.iter().map(|&k| -(k as i64) - 1).collect();
    let order = w_order(required_depth(&exps).max(1) as usize);
    let np = NPoint::from_w(&assemble_w(&airy_data(order), order)?, exec)?;
    let norm: BigInt = ks.iter().map(|&k| double_factorial(2 * k as i64 + 1)).product();
    Ok(np.f(ks)? / BigRational::from_integer(norm))
}

/// Airy data with only the blocks `1..=g` kept (`c` through `g+1`), exact.
pub fn truncated_data(g: usize, variant: AiryVariant) -> InitialData {
    assert!(g >= 1);
    airy_lists(g, variant)
}

/// `W0_g(z) = [[0,1],[z+c_1,0]] + sum_{i<=g} [[a_i,b_i],[c_{i+1},-a_i]] z^{-i}`.
pub fn truncated_matrix(g: usize, variant: AiryVariant) -> MatrixSeries<BigRational> {
    let d = truncated_data(g, variant);
    let mut a = Vec::new();
    let mut b = vec![(0, num::One::one())];
    let mut c = vec![(1, num::One::one()), (0, d.c[0].clone())];
    for i in 1..=g {
        let p = -(i as i64);
        a.push((p, d.a[i - 1].clone()));
        b.push((p, d.b[i - 1].clone()));
        c.push((p, d.c[i].clone()));
    }
    let a = LaurentSeries::exact(a);
    MatrixSeries::new([[a.clone(), LaurentSeries::exact(b)], [LaurentSeries::exact(c), a.negated()]])
}

/// `z^g W0_g(z)` as a matrix polynomial.
pub fn truncated_polynomial(g: usize, variant: AiryVariant) -> MatrixPolynomialG<BigRational> {
    let d = truncated_data(g, variant);
    MatrixPolynomialG { g, a: d.a, b: d.b, c: d.c }
}

/// The genus-4 matrix `[[-z^3/2 - 35/16, z^4 + 5z/8], [z^5 - 7z^2/8, z^3/2 + 35/16]]`.
pub fn kw_matrix() -> MatrixPolynomialG<BigRational> {
    truncated_polynomial(4, AiryVariant::Resolvent)
}

/// The published 9-truncation of `log tau` in standard times `T_k`,
/// including its linear terms, as `(monomial, numerator, denominator)`.
pub const WK9_PUBLISHED: &[(&[u32], i64, i64)] = &[
    (&[1], 1, 24),
    (&[4], 1, 1152),
    (&[1, 1], 1, 48),
    (&[0, 2], 1, 16),
    (&[0, 0, 0], 1, 6),
    (&[1, 1, 1], 1, 72),
    (&[0, 1, 2], 1, 12),
    (&[0, 0, 3], 1, 48),
    (&[0, 0, 0, 1], 1, 6),
    (&[0, 0, 0, 1, 1], 1, 6),
    (&[0, 0, 0, 0, 2], 1, 24),
];

pub fn wk9_published() -> TruncatedTPoly<BigRational> {
    let mut p = TruncatedTPoly::zero(9);
    for (k, n, d) in WK9_PUBLISHED {
        p.add(k.to_vec(), rat(*n, *d));
    }
    p
}

/// `t_k -> T_k / (2k+1)!!`.
pub fn to_standard_times(p: &TruncatedTPoly<BigRational>) -> TruncatedTPoly<BigRational> {
    p.rescale_times(|k| BigRational::new(1.into(), double_factorial(2 * k as i64 + 1)))
}

/// The m-truncation of `log tau` for Airy data in standard times (`N >= 2`).
pub fn wk_truncation(m: usize, exec: Execution) -> Result<TruncatedTPoly<BigRational>> {
    let order = w_order(crate::taugen::table_depth(m));
    let w0 = assemble_w(&airy_data(order), order)?;
    Ok(to_standard_times(&truncate_logtau(&w0, m, exec)?))
}

/// One row of the comparison against the published truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct WkRow {
    pub monomial: Vec<u32>,
    pub computed: BigRational,
    pub published: BigRational,
}

impl WkRow {
    pub fn matches(&self) -> bool {
        self.computed == self.published
    }
}

/// Compares every monomial with at least two factors.
pub fn compare_with_published(computed: &TruncatedTPoly<BigRational>) -> Vec<WkRow> {
    let published = wk9_published();
    let mut keys: Vec<Vec<u32>> = computed.terms().chain(published.terms()).map(|(k, _)| k.clone()).collect();
    keys.retain(|k| k.len() >= 2 && crate::tpoly::weight(k) <= computed.level());
    keys.sort_by(|a, b| (crate::tpoly::weight(a), a.len(), a).cmp(&(crate::tpoly::weight(b), b.len(), b)));
    keys.dedup();
    keys.into_iter()
        .map(|k| WkRow { computed: computed.coeff(&k), published: published.coeff(&k), monomial: k })
        .collect()
}

/// Root statistics of `det W0_{3n+1}`.
#[derive(Debug, Clone)]
pub struct BranchStats {
    pub n: usize,
    pub roots: Vec<C64>,
    /// The exceptional root, the one nearest `z = 1`.
    pub isolated: C64,
    pub inner_count: usize,
    pub inner_radius: f64,
    pub outer_count: usize,
    pub outer_radius: f64,
}

impl BranchStats {
    pub fn ratio(&self) -> f64 {
        self.outer_radius / self.inner_radius
    }

    /// `n^{2/(9n)}`, the predicted ratio of the outer and inner radii.
    pub fn predicted_ratio(&self) -> f64 {
        (self.n as f64).powf(2.0 / (9.0 * self.n as f64))
    }
}

fn complex_poly(p: &[BigRational]) -> Poly {
    Poly::new(p.iter().map(|x| C64::new(crate::ring::rational_to_f64(x), 0.0)).collect())
}

/// Classifies the `6n+3` branch points of `z^{3n+1} W0_{3n+1}` into the
/// exceptional root near `z = 1` and two circles, by two-means on `log|z|`.
pub fn branch_stats(n: usize, variant: AiryVariant) -> Result<BranchStats> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let wp = truncated_polynomial(3 * n + 1, variant);
    let roots = find_roots(&complex_poly(&wp.q_coeffs()))?;
    let (iso, _) = roots
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - C64::new(1.0, 0.0)).norm().total_cmp(&(b.1 - C64::new(1.0, 0.0)).norm()))
        .expect("nonempty");
    let rest: Vec<f64> = roots.iter().enumerate().filter(|(i, _)| *i != iso).map(|(_, z)| z.norm().ln()).collect();
    let (lo, hi) = two_means(&rest);
    let gmean = |v: &[f64]| (v.iter().sum::<f64>() / v.len().max(1) as f64).exp();
    Ok(BranchStats {
        n,
        isolated: roots[iso],
        inner_count: lo.len(),
        inner_radius: gmean(&lo),
        outer_count: hi.len(),
        outer_radius: gmean(&hi),
        roots,
    })
}

/// Statistics for `n = 1..=nmax`, one root-finding batch per `n`.
pub fn branch_stats_range(nmax: usize, variant: AiryVariant, exec: Execution) -> Result<Vec<BranchStats>> {
    let ns: Vec<usize> = (1..=nmax).collect();
    map_collect(exec, &ns, |&n| branch_stats(n, variant)).into_iter().collect()
}

/// One-dimensional two-means: splits at the fixed point of the midpoint rule.
fn two_means(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut thr = 0.5 * (min + max);
    let split = |t: f64| -> (Vec<f64>, Vec<f64>) { x.iter().partition(|&&v| v <= t) };
    for _ in 0..100 {
        let (lo, hi) = split(thr);
        if lo.is_empty() || hi.is_empty() {
            break;
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let next = 0.5 * (mean(&lo) + mean(&hi));
        if next == thr {
            break;
        }
        thr = next;
    }
    split(thr)
}

/// Largest distance from the inner (outer) roots to the nearest root of
/// `b(z)` (`c(z)`).
pub fn approximation_distances(stats: &BranchStats, variant: AiryVariant) -> Result<(f64, f64)> {
    let wp = truncated_polynomial(3 * stats.n + 1, variant);
    let br = find_roots(&complex_poly(&wp.b_coeffs()))?;
    let cr = find_roots(&complex_poly(&wp.c_coeffs()))?;
    let threshold = (stats.inner_radius * stats.outer_radius).sqrt();
    let nearest = |z: &C64, set: &[C64]| set.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min);
    let mut din: f64 = 0.0;
    let mut dout: f64 = 0.0;
    for (i, z) in stats.roots.iter().enumerate() {
        if stats.roots[i] == stats.isolated {
            continue;
        }
        if z.norm() <= threshold {
            din = din.max(nearest(z, &br));
        } else {
            dout = dout.max(nearest(z, &cr));
        }
    }
    Ok((din, dout))
}

/// `(Q(0), Q'(0))` for `z^g W0_g`, exact.
pub fn origin_jet(g: usize, variant: AiryVariant) -> (BigRational, BigRational) {
    let q = truncated_polynomial(g, variant).q_coeffs();
    (q[0].clone(), q[1].clone())
}

/// Whether `det W0_{3n}` has a double root at the origin.
pub fn has_double_point_at_origin(n: usize, variant: AiryVariant) -> bool {
    let (v, d) = origin_jet(3 * n, variant);
    v.is_zero() && d.is_zero()
}
