//! Riemann theta functions `theta(u) = sum_n exp(<n,Bn>/2 + <n,u>)` with
//! `Re B < 0`, their Taylor expansions along KdV time directions, and the
//! comparison of `log theta` with the exact N-point coefficients.

use crate::curve::{analyze, reduce_modulo_lattice, CurveReport, MatrixPolynomialG, Precision};
use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::ring::{double_factorial, rational_to_f64, C64};
use crate::resolvent::{assemble_w, InitialData};
use crate::taugen::{table_depth, truncate_logtau, w_order};
use crate::tpoly::{compare_mod_quadratic, multi_indices, Comparison, TruncatedTPoly};
use num::BigRational;
use nalgebra::{DMatrix, DVector};

/// Period matrix with the data needed to truncate lattice sums.
#[derive(Debug, Clone)]
pub struct ThetaParams {
    pub b: DMatrix<C64>,
    /// Smallest eigenvalue of `-Re B`.
    pub lambda: f64,
    /// Target truncation error of the lattice sums.
    pub eps: f64,
}

impl ThetaParams {
    pub fn new(b: DMatrix<C64>, eps: f64) -> Result<Self> {
        let g = b.nrows();
        let re = DMatrix::from_fn(g, g, |i, j| -(b[(i, j)].re + b[(j, i)].re) / 2.0);
        if re.clone().cholesky().is_none() {
            return Err(Error::NotNegativeDefinite);
        }
        let lambda = re.symmetric_eigen().eigenvalues.min();
        Ok(ThetaParams { b, lambda, eps })
    }

    pub fn genus(&self) -> usize {
        self.b.nrows()
    }

    /// `R = ceil(|Re u| / lambda + sqrt(-2 ln eps / lambda))`.
    pub fn radius(&self, u: &[C64]) -> i64 {
        let ure = u.iter().map(|z| z.re * z.re).sum::<f64>().sqrt();
        (ure / self.lambda + (-2.0 * self.eps.ln() / self.lambda).sqrt()).ceil() as i64
    }

    /// Bound on the terms dropped outside the box of half-width `r`:
    /// `sum_{s > r} (2s+1)^g exp(-lambda s^2 / 2 + s |Re u|)`, with `extra`
    /// powers of `s` for polynomial weights.
    pub fn tail_bound(&self, u: &[C64], r: i64, extra: i32) -> f64 {
        let ure = u.iter().map(|z| z.re * z.re).sum::<f64>().sqrt();
        let g = self.genus() as i32;
        (r + 1..r + 200)
            .map(|s| {
                let s = s as f64;
                (2.0 * s + 1.0).powi(g) * s.powi(extra) * (-self.lambda * s * s / 2.0 + s * ure).exp()
            })
            .sum()
    }
}

/// Calls `f(n, exp(<n,Bn>/2 + <n,u>))` for every lattice point of the box
/// whose term is not negligible, slice by slice along the first coordinate,
/// and sums the per-slice results in a fixed order.
fn lattice_sum<R: Send>(
    p: &ThetaParams,
    u: &[C64],
    r: i64,
    exec: Execution,
    init: impl Fn() -> R + Sync,
    add: impl Fn(&mut R, &[i64], C64) + Sync,
    merge: impl Fn(&mut R, R),
) -> R {
    let g = p.genus();
    let cutoff = p.eps.ln() - 10.0;
    let width = (2 * r + 1) as usize;
    let slices = map_range(exec, width, |i0| {
        let mut acc = init();
        let mut n = vec![-r; g];
        n[0] = i0 as i64 - r;
        loop {
            let mut e = C64::new(0.0, 0.0);
            for i in 0..g {
                if n[i] == 0 {
                    continue;
                }
                let ni = n[i] as f64;
                e += u[i] * ni + p.b[(i, i)] * (ni * ni / 2.0);
                for j in i + 1..g {
                    e += p.b[(i, j)] * (ni * n[j] as f64);
                }
            }
            if e.re > cutoff {
                add(&mut acc, &n, e.exp());
            }
            // odometer over coordinates 1..g
            let mut k = 1;
            while k < g {
                n[k] += 1;
                if n[k] <= r {
                    break;
                }
                n[k] = -r;
                k += 1;
            }
            if k == g {
                break;
            }
        }
        acc
    });
    let mut total = init();
    for s in slices {
        merge(&mut total, s);
    }
    total
}

/// `theta(u)`.
pub fn theta_eval(u: &[C64], p: &ThetaParams, exec: Execution) -> C64 {
    let r = p.radius(u);
    lattice_sum(p, u, r, exec, || C64::new(0.0, 0.0), |acc, _, t| *acc += t, |a, b| *a += b)
}

/// Directions `d^(k)` and base point: the expansion point is `-u0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    pub d: Vec<Vec<C64>>,
    pub u0: Vec<C64>,
}

impl DirectionSet {
    /// `d^(k) = V^(k)`: coefficients in the times of the resolvent series.
    pub fn raw_times(v: &[Vec<C64>], u0: &[C64]) -> Self {
        DirectionSet { d: v.to_vec(), u0: u0.to_vec() }
    }

    /// `d^(k) = V^(k) / (2k+1)!!`: coefficients in standard times `T_k`.
    pub fn standard_times(v: &[Vec<C64>], u0: &[C64]) -> Self {
        let d = v
            .iter()
            .enumerate()
            .map(|(k, vk)| {
                let s = rational_to_f64(&num::BigRational::from_integer(double_factorial(2 * k as i64 + 1)));
                vk.iter().map(|x| x / s).collect()
            })
            .collect();
        DirectionSet { d, u0: u0.to_vec() }
    }
}

/// Taylor coefficients of `theta(sum_k t_k d^(k) - u0)` through graded level
/// `m`, by differentiating the lattice sum term by term.
pub fn theta_taylor(ds: &DirectionSet, p: &ThetaParams, m: usize, exec: Execution) -> Result<TruncatedTPoly<C64>> {
    let base: Vec<C64> = ds.u0.iter().map(|x| -x).collect();
    let kmax = (m.saturating_sub(1) / 2).min(ds.d.len().saturating_sub(1));
    let monos: Vec<Vec<u32>> = multi_indices(m, 0).into_iter().filter(|k| k.iter().all(|&i| i as usize <= kmax)).collect();
    // exponents per direction and 1 / prod e_k!
    let shapes: Vec<(Vec<usize>, f64)> = monos
        .iter()
        .map(|k| {
            let mut e = vec![0usize; kmax + 1];
            for &i in k {
                e[i as usize] += 1;
            }
            let f: f64 = e.iter().map(|&x| (1..=x).map(|y| y as f64).product::<f64>()).product();
            (e, 1.0 / f)
        })
        .collect();
    let maxdeg = monos.iter().map(|k| k.len()).max().unwrap_or(0);
    let r = p.radius(&base) + (maxdeg as i64 + 1) / 2 + 1;
    let dirs: Vec<DVector<C64>> = ds.d.iter().take(kmax + 1).map(|v| DVector::from_column_slice(v)).collect();
    let n_mon = monos.len();
    let sums = lattice_sum(
        p,
        &base,
        r,
        exec,
        || vec![C64::new(0.0, 0.0); n_mon],
        |acc, n, t| {
            let pk: Vec<C64> = dirs.iter().map(|d| n.iter().zip(d.iter()).map(|(&ni, di)| di * ni as f64).sum()).collect();
            let mut pw: Vec<Vec<C64>> = Vec::with_capacity(pk.len());
            for x in &pk {
                let mut row = vec![C64::new(1.0, 0.0); maxdeg + 1];
                for j in 1..=maxdeg {
                    row[j] = row[j - 1] * x;
                }
                pw.push(row);
            }
            for (a, (e, f)) in acc.iter_mut().zip(&shapes) {
                let mut term = t * *f;
                for (k, &ek) in e.iter().enumerate() {
                    if ek > 0 {
                        term *= pw[k][ek];
                    }
                }
                *a += term;
            }
        },
        |a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        },
    );
    if sums[0].norm() < 1e-300 || !sums[0].is_finite() {
        return Err(Error::ThetaDivisor(sums[0].norm()));
    }
    let mut poly = TruncatedTPoly::zero(m);
    for (k, s) in monos.into_iter().zip(sums) {
        poly.add(k, s);
    }
    // theta vanishing relative to its typical size means u0 sits on the divisor
    let typical = theta_abs_sum(&base, p, exec);
    if poly.coeff(&[]).norm() < 1e-10 * typical {
        return Err(Error::ThetaDivisor(poly.coeff(&[]).norm() / typical));
    }
    Ok(poly)
}

fn theta_abs_sum(u: &[C64], p: &ThetaParams, exec: Execution) -> f64 {
    let r = p.radius(u);
    lattice_sum(p, u, r, exec, || 0.0, |acc, _, t| *acc += t.norm(), |a, b| *a += b)
}

/// `log theta(sum t_k d^(k) - u0)` truncated at level `m`.
pub fn log_theta_taylor(ds: &DirectionSet, p: &ThetaParams, m: usize, exec: Execution) -> Result<TruncatedTPoly<C64>> {
    theta_taylor(ds, p, m, exec)?.log()
}

/// The theta side of a curve report: `log theta(sum t_k d^(k) - u0)`, with
/// the representative `u0 + B(1,...,1)` and directions in the
/// requested time normalization.
pub fn log_theta_for_curve(rep: &CurveReport, m: usize, standard: bool, eps: f64, exec: Execution) -> Result<TruncatedTPoly<C64>> {
    let b = rep.periods.b_matrix();
    let g = rep.periods.g;
    let shift = &b * DVector::from_element(g, C64::new(1.0, 0.0));
    let u0: Vec<C64> = (0..g).map(|i| rep.divisor.u0[i] + shift[i]).collect();
    let v = &rep.periods.v;
    let ds = if standard { DirectionSet::standard_times(v, &u0) } else { DirectionSet::raw_times(v, &u0) };
    log_theta_taylor(&ds, &ThetaParams::new(b, eps)?, m, exec)
}

/// Same as [`log_theta_for_curve`] but with `u0` reduced modulo the lattice;
/// only the constant, linear and quadratic terms can differ.
pub fn log_theta_reduced(rep: &CurveReport, m: usize, standard: bool, eps: f64, exec: Execution) -> Result<TruncatedTPoly<C64>> {
    let b = rep.periods.b_matrix();
    let u0 = reduce_modulo_lattice(&b, &rep.divisor.u0);
    let v = &rep.periods.v;
    let ds = if standard { DirectionSet::standard_times(v, &u0) } else { DirectionSet::raw_times(v, &u0) };
    log_theta_taylor(&ds, &ThetaParams::new(b, eps)?, m, exec)
}

/// Exact `log tau` of `W(z) = z^{-g} W_poly(z)` in standard times, no
/// constant or linear terms.
pub fn exact_side(wp: &MatrixPolynomialG<BigRational>, m: usize, exec: Execution) -> Result<TruncatedTPoly<BigRational>> {
    let data = InitialData { a: wp.a.clone(), b: wp.b.clone(), c: wp.c.clone(), depth: None };
    let w0 = assemble_w(&data, w_order(table_depth(m)))?;
    Ok(crate::wk::to_standard_times(&truncate_logtau(&w0, m, exec)?))
}

/// Both sides of the comparison for one matrix polynomial.
#[derive(Debug, Clone)]
pub struct ThetaComparison {
    pub report: CurveReport,
    pub theta_side: TruncatedTPoly<C64>,
    pub exact_side: TruncatedTPoly<BigRational>,
    pub comparison: Comparison,
}

impl ThetaComparison {
    /// `log theta` at the base point.
    pub fn log_constant(&self) -> C64 {
        self.theta_side.coeff(&[])
    }
}

/// Curve, periods, divisor and theta expansion of `wp` at level `m`, compared
/// with the exact coefficients beyond the quadratic sector.
pub fn theta_compare(wp: &MatrixPolynomialG<BigRational>, m: usize, prec: Precision, exec: Execution) -> Result<ThetaComparison> {
    if m < 3 {
        return Err(Error::InvalidArgument("comparison needs truncation level at least 3".into()));
    }
    let report = analyze(&wp.to_complex(), (m - 1) / 2, prec, exec)?;
    let theta_side = log_theta_for_curve(&report, m, true, prec.lattice, exec)?;
    let exact = exact_side(wp, m, exec)?;
    let comparison = compare_mod_quadratic(&theta_side, &exact.map(|x| C64::new(rational_to_f64(x), 0.0)));
    Ok(ThetaComparison { report, theta_side, exact_side: exact, comparison })
}
