//! Hyperelliptic spectral curves `w^2 = Q(z) = -det W(z)` of matrix
//! polynomials: branch points, cut systems, period matrices, normalized
//! differentials, the vectors `V^(k)` and the Abel–Jacobi image of the
//! divisor `b(z) = 0, w = -a(z)`.

use crate::error::{Error, Result};
use crate::exec::{map_collect, map_range, Execution};
use crate::poly::{find_roots, Poly};
use crate::ring::{rational_to_f64, Ring, C64};
use nalgebra::{DMatrix, DVector};
use num::BigRational;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `[[a(z), b(z)], [c(z), -a(z)]]` with `a = sum a_i z^{g-i}`,
/// `b = z^g + sum b_i z^{g-i}`, `c = z^{g+1} + sum c_i z^{g+1-i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixPolynomialG<C> {
    pub g: usize,
    /// `a_1..a_g`
    pub a: Vec<C>,
    /// `b_1..b_g`
    pub b: Vec<C>,
    /// `c_1..c_{g+1}`
    pub c: Vec<C>,
}

impl<C: Ring> MatrixPolynomialG<C> {
    fn get(v: &[C], i: usize) -> C {
        v.get(i.wrapping_sub(1)).cloned().unwrap_or_else(C::zero)
    }

    /// Ascending coefficients of `a(z)` (length `g`).
    pub fn a_coeffs(&self) -> Vec<C> {
        (0..self.g).map(|p| Self::get(&self.a, self.g - p)).collect()
    }

    /// Ascending coefficients of `b(z)` (length `g+1`).
    pub fn b_coeffs(&self) -> Vec<C> {
        (0..=self.g).map(|p| if p == self.g { C::one() } else { Self::get(&self.b, self.g - p) }).collect()
    }

    /// Ascending coefficients of `c(z)` (length `g+2`).
    pub fn c_coeffs(&self) -> Vec<C> {
        (0..=self.g + 1).map(|p| if p == self.g + 1 { C::one() } else { Self::get(&self.c, self.g + 1 - p) }).collect()
    }

    /// Ascending coefficients of `Q(z) = a^2 + bc` (length `2g+2`, monic).
    pub fn q_coeffs(&self) -> Vec<C> {
        let mut q = vec![C::zero(); 2 * self.g + 2];
        let a = self.a_coeffs();
        for (i, x) in a.iter().enumerate() {
            for (j, y) in a.iter().enumerate() {
                q[i + j].plus_assign(&x.times(y));
            }
        }
        let (b, cc) = (self.b_coeffs(), self.c_coeffs());
        for (i, x) in b.iter().enumerate() {
            for (j, y) in cc.iter().enumerate() {
                q[i + j].plus_assign(&x.times(y));
            }
        }
        q
    }

    /// `q_1 = b_1 + c_1` and `q_{g+k+1} = sum_{i=k}^g (a_i a_{g+k-i} + b_i c_{g+k+1-i})`
    /// for `k = 1..g`, the coefficients of `Q = z^{2g+1} + q_1 z^{2g} + ...`.
    pub fn casimirs(&self) -> (C, Vec<C>) {
        let g = self.g;
        let q1 = Self::get(&self.b, 1).plus(&Self::get(&self.c, 1));
        let rest = (1..=g)
            .map(|k| {
                let mut s = C::zero();
                for i in k..=g {
                    s.plus_assign(&Self::get(&self.a, i).times(&Self::get(&self.a, g + k - i)));
                    s.plus_assign(&Self::get(&self.b, i).times(&Self::get(&self.c, g + k + 1 - i)));
                }
                s
            })
            .collect();
        (q1, rest)
    }

    pub fn map<D>(&self, f: impl Fn(&C) -> D) -> MatrixPolynomialG<D> {
        MatrixPolynomialG {
            g: self.g,
            a: self.a.iter().map(&f).collect(),
            b: self.b.iter().map(&f).collect(),
            c: self.c.iter().map(&f).collect(),
        }
    }
}

impl MatrixPolynomialG<BigRational> {
    pub fn to_complex(&self) -> MatrixPolynomialG<C64> {
        self.map(|x| c(rational_to_f64(x)))
    }
}

impl MatrixPolynomialG<C64> {
    pub fn eval_a(&self, z: C64) -> C64 {
        Poly::new(self.a_coeffs()).eval(z)
    }

    pub fn eval_b(&self, z: C64) -> C64 {
        Poly::new(self.b_coeffs()).eval(z)
    }
}

/// `w^2 = Q(z)` with `Q` monic of degree `2g+1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCurve {
    pub g: usize,
    /// `q_1..q_{2g+1}` of `Q = z^{2g+1} + q_1 z^{2g} + ... + q_{2g+1}`.
    #[serde(with = "crate::io::complex_vec")]
    pub q: Vec<C64>,
    #[serde(with = "crate::io::complex_vec")]
    pub branch_points: Vec<C64>,
}

impl SpectralCurve {
    /// Ascending coefficients of `Q`.
    pub fn q_poly(&self) -> Poly {
        let n = 2 * self.g + 1;
        let mut v: Vec<C64> = (0..n).map(|p| self.q[n - 1 - p]).collect();
        v.push(c(1.0));
        Poly::new(v)
    }

    /// Root-scale of the configuration.
    pub fn scale(&self) -> f64 {
        self.branch_points.iter().map(|z| z.norm()).fold(1.0, f64::max)
    }
}

/// Relative separation below which two branch points are considered equal.
pub const SEPARATION_TOL: f64 = 1e-6;

pub fn spectral_curve(wp: &MatrixPolynomialG<C64>) -> Result<SpectralCurve> {
    if wp.g == 0 {
        return Err(Error::InvalidArgument("genus must be at least 1".into()));
    }
    let qa = wp.q_coeffs();
    let n = 2 * wp.g + 1;
    let poly = Poly::new(qa.clone());
    let roots = find_roots(&poly)?;
    let curve = SpectralCurve { g: wp.g, q: (1..=n).map(|j| qa[n - j]).collect(), branch_points: roots };
    let scale = curve.scale();
    for i in 0..n {
        for j in i + 1..n {
            if (curve.branch_points[i] - curve.branch_points[j]).norm() < SEPARATION_TOL * scale {
                return Err(Error::DoublePoint(i, j));
            }
        }
    }
    let sum: C64 = curve.branch_points.iter().sum();
    if (sum + curve.q[0]).norm() > 1e-10 * scale * n as f64 {
        return Err(Error::RootsNotConverged(0));
    }
    Ok(curve)
}

// ---------------------------------------------------------------- geometry

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn cross2(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn orient(p: C64, q: C64, r: C64) -> f64 {
    cross2(q - p, r - p)
}

/// Whether the open segments `[a,b]` and `[p,q]` cross.
pub fn segments_cross(a: C64, b: C64, p: C64, q: C64) -> bool {
    let (d1, d2) = (orient(a, b, p), orient(a, b, q));
    let (d3, d4) = (orient(p, q, a), orient(p, q, b));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

pub fn point_segment_distance(z: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let l2 = d.norm_sqr();
    if l2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * d.conj()).re / l2).clamp(0.0, 1.0);
    (z - (a + d * t)).norm()
}

fn same(a: C64, b: C64) -> bool {
    (a - b).norm() <= 1e-12 * (1.0 + a.norm())
}

/// Distance between segments; for segments sharing an endpoint, the
/// distance from the far endpoints (zero when they fold onto each other).
pub fn segment_distance(a: C64, b: C64, p: C64, q: C64) -> f64 {
    if segments_cross(a, b, p, q) {
        return 0.0;
    }
    let shared = [(a, p), (a, q), (b, p), (b, q)].into_iter().find(|(x, y)| same(*x, *y));
    if let Some((s, _)) = shared {
        let far1 = if same(a, s) { b } else { a };
        let far2 = if same(p, s) { q } else { p };
        // folded segments
        let (u, v) = (far1 - s, far2 - s);
        if cross2(u, v).abs() <= 1e-12 * u.norm() * v.norm() && (u * v.conj()).re > 0.0 {
            return 0.0;
        }
        return point_segment_distance(far1, p, q).min(point_segment_distance(far2, a, b));
    }
    point_segment_distance(a, p, q)
        .min(point_segment_distance(b, p, q))
        .min(point_segment_distance(p, a, b))
        .min(point_segment_distance(q, a, b))
}

/// `g` finite cuts plus a ray from `e0` to infinity in direction `ray`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutSystem {
    #[serde(with = "crate::io::complex_pairs")]
    pub cuts: Vec<(C64, C64)>,
    #[serde(with = "crate::io::complex")]
    pub e0: C64,
    /// Unit direction of the infinite cut.
    #[serde(with = "crate::io::complex")]
    pub ray: C64,
}

impl CutSystem {
    /// The infinite cut as a long segment.
    pub fn ray_segment(&self, scale: f64) -> (C64, C64) {
        (self.e0, self.e0 + self.ray * (1e6 * scale))
    }

    /// Smallest distance from the segment `[p,q]` to any cut.
    pub fn clearance(&self, p: C64, q: C64, scale: f64) -> f64 {
        let (r0, r1) = self.ray_segment(scale);
        self.cuts.iter().map(|(a, b)| segment_distance(p, q, *a, *b)).fold(segment_distance(p, q, r0, r1), f64::min)
    }

    /// Whether finite cuts and the ray are pairwise disjoint.
    pub fn is_non_crossing(&self, scale: f64) -> bool {
        let (r0, r1) = self.ray_segment(scale);
        for (i, (a, b)) in self.cuts.iter().enumerate() {
            if segment_distance(*a, *b, r0, r1) <= 0.0 {
                return false;
            }
            for (p, q) in &self.cuts[i + 1..] {
                if segment_distance(*a, *b, *p, *q) <= 0.0 {
                    return false;
                }
            }
        }
        true
    }
}

fn is_conjugation_symmetric(points: &[C64], tol: f64) -> bool {
    points.iter().all(|z| points.iter().any(|w| (z.conj() - w).norm() <= tol))
}

fn best_ray(e0: C64, cuts: &[(C64, C64)], scale: f64, candidates: impl Iterator<Item = C64>) -> (C64, f64) {
    let mut best = (c(1.0), f64::NEG_INFINITY);
    for d in candidates {
        let far = e0 + d * (1e6 * scale);
        let clear = cuts.iter().map(|(a, b)| segment_distance(e0, far, *a, *b)).fold(f64::INFINITY, f64::min);
        if clear > best.1 + 1e-12 * scale {
            best = (d, clear);
        }
    }
    best
}

/// Pairs `2g` branch points into non-crossing cuts and joins the remaining
/// one to infinity.
///
/// For conjugation-symmetric configurations the rightmost real branch point
/// carries the infinite cut along the real axis, and the others are paired
/// consecutively by their angle seen from it, which keeps the cut system
/// symmetric. Otherwise each choice of leftover is paired greedily by
/// shortest non-crossing segments, and the leftover farthest from its
/// pairing wins; the ray direction maximizes the clearance.
pub fn build_cuts(curve: &SpectralCurve) -> Result<CutSystem> {
    let pts = &curve.branch_points;
    let scale = curve.scale();
    let tol = 1e-8 * scale;
    if is_conjugation_symmetric(pts, tol) {
        if let Some(cs) = symmetric_cuts(pts, scale) {
            return Ok(cs);
        }
    }
    greedy_cuts(pts, scale).ok_or(Error::NoCutSystem)
}

fn symmetric_cuts(pts: &[C64], scale: f64) -> Option<CutSystem> {
    let tol = 1e-8 * scale;
    let (li, _) = pts
        .iter()
        .enumerate()
        .filter(|(_, z)| z.im.abs() <= tol)
        .max_by(|a, b| a.1.re.total_cmp(&b.1.re))?;
    let e0 = C64::new(pts[li].re, 0.0);
    let centroid: C64 = pts.iter().sum::<C64>() / pts.len() as f64;
    let towards = if (centroid - e0).norm() > tol { (centroid - e0) / (centroid - e0).norm() } else { c(-1.0) };
    let mut rest: Vec<C64> = pts.iter().enumerate().filter(|(i, _)| *i != li).map(|(_, z)| *z).collect();
    rest.sort_by(|a, b| {
        let ka = (((a - e0) / towards).arg(), (a - e0).norm());
        let kb = (((b - e0) / towards).arg(), (b - e0).norm());
        ka.partial_cmp(&kb).unwrap()
    });
    let cuts: Vec<(C64, C64)> = rest.chunks(2).map(|p| (p[0], p[1])).collect();
    let (ray, clear) = best_ray(e0, &cuts, scale, [-towards, c(1.0), c(-1.0)].into_iter());
    let cs = CutSystem { cuts, e0, ray };
    (clear > 0.0 && cs.is_non_crossing(scale)).then_some(cs)
}

fn greedy_cuts(pts: &[C64], scale: f64) -> Option<CutSystem> {
    let mut best: Option<(f64, f64, CutSystem)> = None;
    for li in 0..pts.len() {
        let rest: Vec<C64> = pts.iter().enumerate().filter(|(i, _)| *i != li).map(|(_, z)| *z).collect();
        let mut pairs: Vec<(usize, usize)> =
            (0..rest.len()).flat_map(|i| (i + 1..rest.len()).map(move |j| (i, j))).collect();
        pairs.sort_by(|a, b| (rest[a.0] - rest[a.1]).norm().total_cmp(&(rest[b.0] - rest[b.1]).norm()));
        let mut used = vec![false; rest.len()];
        let mut cuts: Vec<(C64, C64)> = Vec::new();
        for (i, j) in pairs {
            if used[i] || used[j] {
                continue;
            }
            if cuts.iter().any(|(a, b)| segment_distance(rest[i], rest[j], *a, *b) <= 0.0) {
                continue;
            }
            used[i] = true;
            used[j] = true;
            cuts.push((rest[i], rest[j]));
        }
        if cuts.len() * 2 != rest.len() {
            continue;
        }
        let e0 = pts[li];
        let dist = cuts.iter().map(|(a, b)| point_segment_distance(e0, *a, *b)).fold(f64::INFINITY, f64::min);
        let (ray, clear) = best_ray(e0, &cuts, scale, (0..360).map(|k| C64::from_polar(1.0, k as f64 * PI / 180.0)));
        if clear <= 0.0 {
            continue;
        }
        let better = match &best {
            None => true,
            Some((d, re, _)) => dist > d + 1e-12 * scale || ((dist - d).abs() <= 1e-12 * scale && e0.re > *re),
        };
        if better {
            best = Some((dist, e0.re, CutSystem { cuts, e0, ray }));
        }
    }
    best.map(|b| b.2)
}

// ------------------------------------------------------- branch of w

/// A single-valued branch of `w = sqrt(Q)` off the cuts:
/// `w = prod_k (z - m_k) sqrt((z-p_k)(z-q_k)/(z-m_k)^2) * e^{i phi} sqrt((z-e0) e^{-2 i phi})`,
/// with `m_k` the midpoints and `phi` set by the ray direction.
#[derive(Debug, Clone)]
pub struct Branch {
    pub cuts: CutSystem,
    phase: C64,
}

impl Branch {
    pub fn new(cuts: &CutSystem) -> Self {
        let phi = (cuts.ray.arg() - PI) / 2.0;
        Branch { cuts: cuts.clone(), phase: C64::from_polar(1.0, phi) }
    }

    // differences are taken as `(base - x) + d` so that they stay exact
    // when `base` is the branch point `x` itself
    fn cut_factor(&self, k: usize, base: C64, d: C64) -> C64 {
        let (p, q) = self.cuts.cuts[k];
        let m = (p + q) / 2.0;
        let zm = (base - m) + d;
        zm * (((base - p) + d) * ((base - q) + d) / (zm * zm)).sqrt()
    }

    fn ray_factor(&self, base: C64, d: C64) -> C64 {
        self.phase * (((base - self.cuts.e0) + d) * self.phase.conj() * self.phase.conj()).sqrt()
    }

    /// All factors except the one of cut `skip`, at `base + d`.
    fn rest(&self, base: C64, d: C64, skip: Option<usize>) -> C64 {
        let mut v = self.ray_factor(base, d);
        for k in 0..self.cuts.cuts.len() {
            if Some(k) != skip {
                v *= self.cut_factor(k, base, d);
            }
        }
        v
    }

    pub fn w(&self, z: C64) -> C64 {
        self.rest(z, c(0.0), None)
    }

    /// `w(base + d)`, accurate for small `d` when `base` is a branch point.
    pub fn w_near(&self, base: C64, d: C64) -> C64 {
        self.rest(base, d, None)
    }
}

// --------------------------------------------------------------- quadrature

/// Gauss–Legendre rule on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        for i in 0..n {
            let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, t);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
                let dt = p1 / dp;
                t -= dt;
                if dt.abs() < 1e-16 {
                    break;
                }
            }
            x[i] = 0.5 * (1.0 - t);
            w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
        }
        GaussLegendre { x, w }
    }
}

fn vec_add(a: &mut [C64], b: &[C64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

fn rule(gl: &GaussLegendre, f: &dyn Fn(f64) -> Vec<C64>, a: f64, b: f64, dim: usize) -> Vec<C64> {
    let mut s = vec![C64::new(0.0, 0.0); dim];
    for (x, w) in gl.x.iter().zip(&gl.w) {
        let v = f(a + (b - a) * x);
        for (acc, y) in s.iter_mut().zip(v) {
            *acc += y * (w * (b - a));
        }
    }
    s
}

const TOL_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Adaptive bisection with a fixed Gauss–Legendre panel.
pub fn integrate(f: &dyn Fn(f64) -> Vec<C64>, a: f64, b: f64, dim: usize, tol: f64) -> Vec<C64> {
    let gl = GaussLegendre::new(20);
    fn rec(gl: &GaussLegendre, f: &dyn Fn(f64) -> Vec<C64>, a: f64, b: f64, dim: usize, tol: f64, whole: Vec<C64>, depth: u32) -> Vec<C64> {
        let m = 0.5 * (a + b);
        let l = rule(gl, f, a, m, dim);
        let r = rule(gl, f, m, b, dim);
        let mut both = l.clone();
        vec_add(&mut both, &r);
        let err = whole.iter().zip(&both).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        let size = both.iter().map(|x| x.norm()).fold(1.0, f64::max);
        if err <= tol * size || depth >= 40 {
            return both;
        }
        // halving below round-off would force every panel to full depth
        let sub = (tol / 2.0).max(TOL_FLOOR);
        let mut out = rec(gl, f, a, m, dim, sub, l, depth + 1);
        vec_add(&mut out, &rec(gl, f, m, b, dim, sub, r, depth + 1));
        out
    }
    let whole = rule(&gl, f, a, b, dim);
    rec(&gl, f, a, b, dim, tol, whole, 0)
}

/// Tolerances for the numerical pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Precision {
    /// Relative target for every contour integral.
    pub quadrature: f64,
    /// Lattice truncation error for theta sums.
    pub lattice: f64,
}

impl Default for Precision {
    fn default() -> Self {
        Precision { quadrature: 1e-12, lattice: 1e-14 }
    }
}

impl Precision {
    pub fn uniform(eps: f64) -> Self {
        Precision { quadrature: eps, lattice: eps }
    }
}

impl Branch {
    /// `int z^p dz / (2w)` for `p = 0..npow` along the polygon `pts`; the
    /// first and last vertices may be branch points.
    pub fn path_integrals(&self, pts: &[C64], npow: usize, singular_ends: (bool, bool), tol: f64) -> Vec<C64> {
        let mut total = vec![C64::new(0.0, 0.0); npow];
        let nseg = pts.len() - 1;
        for s in 0..nseg {
            let (a, b) = (pts[s], pts[s + 1]);
            let sa = s == 0 && singular_ends.0;
            let sb = s == nseg - 1 && singular_ends.1;
            let f = move |x: f64| -> Vec<C64> {
                // z = base + d and dz/dx, with square-root endpoint
                // singularities absorbed; `base` is the nearer singular end
                let (base, d, dz) = match (sa, sb) {
                    (true, true) => {
                        let th = PI * x;
                        let dz = (b - a) * (th.sin() * PI / 2.0);
                        if x <= 0.5 {
                            (a, (b - a) * (th / 2.0).sin().powi(2), dz)
                        } else {
                            (b, (a - b) * (th / 2.0).cos().powi(2), dz)
                        }
                    }
                    (true, false) => (a, (b - a) * (x * x), (b - a) * (2.0 * x)),
                    (false, true) => (b, (a - b) * ((1.0 - x) * (1.0 - x)), (b - a) * (2.0 * (1.0 - x))),
                    (false, false) => (a, (b - a) * x, b - a),
                };
                let scale = dz / (self.w_near(base, d) * 2.0);
                powers(base + d, npow).into_iter().map(|zp| zp * scale).collect()
            };
            vec_add(&mut total, &integrate(&f, 0.0, 1.0, npow, tol));
        }
        total
    }

    /// `2 int_{p}^{q} z^j dz / (2w)` on the left bank of cut `k`, for
    /// `j = 0..npow`, i.e. the period around the cut.
    pub fn cut_periods(&self, k: usize, npow: usize, tol: f64) -> Vec<C64> {
        let (p, q) = self.cuts.cuts[k];
        let m = (p + q) / 2.0;
        let h = (q - p) / 2.0;
        // boundary value of the cut factor is sign * i h sin t at z = m + h cos t
        let normal = I * h / h.norm();
        let side = self.cut_factor(k, m, normal * (1e-7 * h.norm()));
        let sign = if (side - I * h).norm() < (side + I * h).norm() { 1.0 } else { -1.0 };
        // dz = -h sin t dt cancels sin t
        let eval = |t: f64| -> Vec<C64> {
            let z = m + h * t.cos();
            let base = -(c(1.0)) / (I * (2.0 * sign) * self.rest(z, c(0.0), Some(k)));
            powers(z, npow).into_iter().map(|zp| zp * base).collect()
        };
        let midpoint = |n: usize| -> Vec<C64> {
            let mut s = vec![C64::new(0.0, 0.0); npow];
            for i in 0..n {
                vec_add(&mut s, &eval((i as f64 + 0.5) * PI / n as f64));
            }
            s.into_iter().map(|x| x * (PI / n as f64)).collect()
        };
        let mut n = 32;
        let mut prev = midpoint(n);
        loop {
            n *= 2;
            let next = midpoint(n);
            let diff = prev.iter().zip(&next).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            let size = next.iter().map(|x| x.norm()).fold(1.0, f64::max);
            prev = next;
            if diff <= tol * size || n >= 1 << 16 {
                break;
            }
        }
        // integral from q to p on this bank; the closed loop is -2 times it
        prev.into_iter().map(|x| x * -2.0).collect()
    }
}

fn powers(z: C64, n: usize) -> Vec<C64> {
    let mut v = Vec::with_capacity(n);
    let mut x = c(1.0);
    for _ in 0..n {
        v.push(x);
        x *= z;
    }
    v
}

// ------------------------------------------------------------------ periods

/// Period data of the normalized differentials. Matrices are row-major
/// `Vec<Vec<_>>`; `alpha[i][j-1]` is `alpha_ij` of
/// `omega_i = (alpha_i1 z^{g-1} + ... + alpha_ig) dz / (2w)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodData {
    pub g: usize,
    /// `a_periods[j][l] = oint_{a_j} z^{g-1-l} dz/(2w)`.
    #[serde(with = "crate::io::complex_matrix")]
    pub a_periods: Vec<Vec<C64>>,
    #[serde(with = "crate::io::complex_matrix")]
    pub alpha: Vec<Vec<C64>>,
    /// `b[i][j] = oint_{b_j} omega_i`.
    #[serde(with = "crate::io::complex_matrix")]
    pub b: Vec<Vec<C64>>,
    /// `V^(k)` from the expansion of `omega_i` at infinity.
    #[serde(with = "crate::io::complex_matrix")]
    pub v: Vec<Vec<C64>>,
    /// `V^(k)` as b-periods of the second-kind differentials `Omega^(k)`.
    #[serde(with = "crate::io::complex_matrix")]
    pub v_omega: Vec<Vec<C64>>,
    /// `q_{ki}` from the regular part of `Omega^(k)` at infinity.
    #[serde(with = "crate::io::complex_matrix")]
    pub qreg: Vec<Vec<C64>>,
    #[serde(with = "crate::io::complex_vec")]
    pub varpi: Vec<C64>,
    /// Largest `|oint_{a_j} omega_i - 2 pi i delta_ij|`.
    pub normalization_residual: f64,
    /// Integer shifts `b_j -> b_j + sum_i n_ij a_i` applied to symmetrize `B`.
    pub symmetrization: Vec<Vec<i64>>,
    /// b-cycles whose orientation was reversed so that `Re B < 0`.
    pub reversed: Vec<usize>,
    /// The point through which all b-paths run.
    #[serde(with = "crate::io::complex")]
    pub hub: C64,
}

fn to_dmatrix(v: &[Vec<C64>]) -> DMatrix<C64> {
    DMatrix::from_fn(v.len(), v.first().map_or(0, |r| r.len()), |i, j| v[i][j])
}

fn from_dmatrix(m: &DMatrix<C64>) -> Vec<Vec<C64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

impl PeriodData {
    pub fn b_matrix(&self) -> DMatrix<C64> {
        to_dmatrix(&self.b)
    }

    pub fn alpha_matrix(&self) -> DMatrix<C64> {
        to_dmatrix(&self.alpha)
    }

    /// Largest asymmetry relative to the size of `B`.
    pub fn asymmetry(&self) -> f64 {
        let b = self.b_matrix();
        max_abs(&(&b - b.transpose())) / max_abs(&b)
    }

    /// Whether `-Re B` is positive definite.
    pub fn re_negative_definite(&self) -> bool {
        let b = self.b_matrix();
        let re = DMatrix::from_fn(self.g, self.g, |i, j| -(b[(i, j)].re + b[(j, i)].re) / 2.0);
        re.cholesky().is_some()
    }

    /// Largest `|V - V_Omega|` relative to `max |V|`, over `k <= kmax`.
    pub fn v_route_discrepancy(&self, kmax: usize) -> f64 {
        let mut num: f64 = 0.0;
        let mut den: f64 = 0.0;
        for k in 0..=kmax.min(self.v.len() - 1) {
            for (x, y) in self.v[k].iter().zip(&self.v_omega[k]) {
                num = num.max((x - y).norm());
                den = den.max(x.norm());
            }
        }
        num / den.max(f64::MIN_POSITIVE)
    }
}

/// Coefficients of `1 / sqrt(1 + q_1 x + ... + q_{2g+1} x^{2g+1})` to `x^len-1`.
fn inverse_sqrt_series(q: &[C64], len: usize) -> Vec<C64> {
    let p: Vec<C64> = (0..len).map(|i| if i == 0 { c(1.0) } else { q.get(i - 1).copied().unwrap_or(c(0.0)) }).collect();
    let mut r = vec![c(0.0); len];
    r[0] = c(1.0);
    for i in 1..len {
        let s: C64 = (1..i).map(|j| r[j] * r[i - j]).sum();
        r[i] = (p[i] - s) / 2.0;
    }
    let mut inv = vec![c(0.0); len];
    inv[0] = c(1.0);
    for i in 1..len {
        inv[i] = -(1..=i).map(|j| r[j] * inv[i - j]).sum::<C64>();
    }
    inv
}

fn hub_point(curve: &SpectralCurve, cuts: &CutSystem) -> Result<C64> {
    let scale = curve.scale();
    let centroid: C64 = curve.branch_points.iter().sum::<C64>() / curve.branch_points.len() as f64;
    let quality = |h: C64| -> f64 {
        let mut worst = f64::INFINITY;
        for (k, (p, _)) in cuts.cuts.iter().enumerate() {
            let others = CutSystem {
                cuts: cuts.cuts.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, x)| *x).collect(),
                ..cuts.clone()
            };
            // own cut only needs to be left cleanly
            let own = cuts.cuts[k];
            worst = worst.min(others.clearance(*p, h, scale)).min(segment_distance(*p, h, own.0, own.1));
        }
        let finite = CutSystem { cuts: cuts.cuts.clone(), ..cuts.clone() };
        let to_e0 = finite.cuts.iter().map(|(a, b)| segment_distance(h, cuts.e0, *a, *b)).fold(f64::INFINITY, f64::min);
        let (r0, r1) = cuts.ray_segment(scale);
        worst.min(to_e0).min(segment_distance(cuts.e0, h, r0, r1)).min(
            curve.branch_points.iter().map(|z| (z - h).norm()).fold(f64::INFINITY, f64::min),
        )
    };
    let delta = 1e-2 * scale;
    if quality(centroid) >= delta {
        return Ok(centroid);
    }
    let mut best = (centroid, quality(centroid));
    for ring in 1..=12 {
        for k in 0..48 {
            let h = centroid + C64::from_polar(scale * ring as f64 / 6.0, 2.0 * PI * k as f64 / 48.0);
            let q = quality(h);
            if q > best.1 {
                best = (h, q);
            }
        }
    }
    if best.1 < delta {
        return Err(Error::NoCutSystem);
    }
    Ok(best.0)
}

/// All period data with `V^(k)` for `k = 0..=kmax`.
pub fn periods(curve: &SpectralCurve, cuts: &CutSystem, kmax: usize, prec: Precision, exec: Execution) -> Result<PeriodData> {
    let g = curve.g;
    let branch = Branch::new(cuts);
    let npow = g + kmax + 1;
    let tol = prec.quadrature;
    // raw a- and b-periods of z^p dz/(2w)
    let a_raw: Vec<Vec<C64>> = map_range(exec, g, |k| branch.cut_periods(k, npow, tol));
    let hub = hub_point(curve, cuts)?;
    let b_raw: Vec<Vec<C64>> = map_range(exec, g, |k| {
        let pts = [cuts.cuts[k].0, hub, cuts.e0];
        branch.path_integrals(&pts, npow, (true, true), tol).into_iter().map(|x| x * 2.0).collect()
    });
    let amat = DMatrix::from_fn(g, g, |j, l| a_raw[j][g - 1 - l]);
    let svd = amat.clone().svd(false, false);
    let cond = svd.singular_values.max() / svd.singular_values.min();
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::IllConditioned(cond));
    }
    let at_inv = amat.transpose().try_inverse().ok_or(Error::IllConditioned(f64::INFINITY))?;
    let alpha = at_inv * (I * 2.0 * PI);
    let resid = max_abs(&(&alpha * amat.transpose() - DMatrix::identity(g, g) * (I * 2.0 * PI)));
    let braw = DMatrix::from_fn(g, g, |l, k| b_raw[k][g - 1 - l]);
    let mut b = &alpha * braw;
    // orientation: Re B_jj < 0
    let mut bsign = vec![1.0; g];
    let mut reversed = Vec::new();
    for j in 0..g {
        if b[(j, j)].re > 0.0 {
            bsign[j] = -1.0;
            reversed.push(j);
            for i in 0..g {
                b[(i, j)] = -b[(i, j)];
            }
        }
    }
    // integer symmetrization b_j -> b_j + n_ij a_i (i < j)
    let mut shifts = vec![vec![0i64; g]; g];
    for i in 0..g {
        for j in i + 1..g {
            let n = ((b[(i, j)] - b[(j, i)]) / (I * 2.0 * PI)).re.round();
            shifts[i][j] = -n as i64;
            b[(i, j)] -= I * (2.0 * PI * n);
        }
    }
    // V from the expansion of omega at infinity
    let nser = 2 * kmax + g + 4;
    let rho = inverse_sqrt_series(&curve.q, nser);
    let v: Vec<Vec<C64>> = (0..=kmax)
        .map(|k| (0..g).map(|i| (1..=g).filter(|&j| j <= k + 1).map(|j| alpha[(i, j - 1)] * rho[k + 1 - j]).sum()).collect())
        .collect();
    // second-kind differentials Omega^(k) = (2k+1)/2 sum_l coef_l z^{g+k-l} dz / w
    let mut v_omega = Vec::new();
    let mut qreg = Vec::new();
    for k in 0..=kmax {
        let mut coef = vec![c(0.0); g + k + 1];
        coef[0] = c(1.0);
        for s in 1..=k {
            coef[s] = -(0..s).map(|l| coef[l] * rho[s - l]).sum::<C64>();
        }
        // vanishing a-periods fix coef_{k+1..k+g}
        let rhs = DVector::from_fn(g, |j, _| -(0..=k).map(|l| coef[l] * a_raw[j][g + k - l]).sum::<C64>());
        let sys = DMatrix::from_fn(g, g, |j, l| a_raw[j][g - 1 - l]);
        let sol = sys.lu().solve(&rhs).ok_or(Error::IllConditioned(f64::INFINITY))?;
        for l in 0..g {
            coef[k + 1 + l] = sol[l];
        }
        let pref = (2 * k + 1) as f64;
        // b-periods of (2k+1) sum coef_l z^{g+k-l} dz/(2w)
        let mut col = vec![c(0.0); g];
        for (j, x) in col.iter_mut().enumerate() {
            let s: C64 = (0..=g + k).map(|l| coef[l] * b_raw[j][g + k - l]).sum();
            // the integer shifts applied to B add multiples of a-periods, which vanish here
            *x = s * bsign[j] * pref;
        }
        v_omega.push(col);
        // expansion coefficients E_s of z^{k-1/2-s}, q_{ki} = 2 E_{k+i+1}
        let e = |s: usize| -> C64 { (0..=s.min(g + k)).map(|l| coef[l] * rho[s - l]).sum::<C64>() * (pref / 2.0) };
        qreg.push((0..=kmax).map(|i| e(k + i + 1) * 2.0).collect());
    }
    let ones = DVector::from_element(g, c(1.0));
    let half = (&b * ones).map(|z| z * 0.5);
    let varpi: Vec<C64> = (0..g).map(|i| if i % 2 == 0 { I * PI } else { c(0.0) } + half[i]).collect();
    Ok(PeriodData {
        g,
        a_periods: (0..g).map(|j| (0..g).map(|l| a_raw[j][g - 1 - l]).collect()).collect(),
        alpha: from_dmatrix(&alpha),
        b: from_dmatrix(&b),
        v,
        v_omega,
        qreg,
        varpi,
        normalization_residual: resid,
        symmetrization: shifts,
        reversed,
        hub,
    })
}

// ------------------------------------------------------------ Abel–Jacobi

/// Lattice coordinates `(N, M)` of `d = B N + 2 pi i M` (real solutions).
pub fn lattice_coordinates(b: &DMatrix<C64>, d: &[C64]) -> (Vec<f64>, Vec<f64>) {
    let g = d.len();
    let re = DMatrix::from_fn(g, g, |i, j| b[(i, j)].re);
    let im = DMatrix::from_fn(g, g, |i, j| b[(i, j)].im);
    let dre = DVector::from_fn(g, |i, _| d[i].re);
    let dim = DVector::from_fn(g, |i, _| d[i].im);
    let n = re.lu().solve(&dre).unwrap_or_else(|| DVector::zeros(g));
    let m = (dim - im * &n) / (2.0 * PI);
    (n.iter().copied().collect(), m.iter().copied().collect())
}

/// `d` minus its nearest lattice vector (by rounded lattice coordinates).
pub fn reduce_modulo_lattice(b: &DMatrix<C64>, d: &[C64]) -> Vec<C64> {
    let (n, m) = lattice_coordinates(b, d);
    let g = d.len();
    let nr = DVector::from_fn(g, |i, _| c(n[i].round()));
    let shift = b * nr;
    (0..g).map(|i| d[i] - shift[i] - I * (2.0 * PI * m[i].round())).collect()
}

/// Largest component of `x - y` after reduction modulo the lattice.
pub fn lattice_distance(b: &DMatrix<C64>, x: &[C64], y: &[C64]) -> f64 {
    let d: Vec<C64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    reduce_modulo_lattice(b, &d).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// The divisor `b(z_j) = 0, w_j = -a(z_j)` and its Abel–Jacobi image.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivisorData {
    #[serde(with = "crate::io::complex_vec")]
    pub z: Vec<C64>,
    #[serde(with = "crate::io::complex_vec")]
    pub w: Vec<C64>,
    /// `+1` if `w_j` is the value of the chosen branch, `-1` otherwise.
    pub sheets: Vec<i8>,
    #[serde(with = "crate::io::complex_vec")]
    pub abel_jacobi: Vec<C64>,
    /// `AJ - varpi`.
    #[serde(with = "crate::io::complex_vec")]
    pub u0: Vec<C64>,
}

pub fn divisor_and_u0(
    wp: &MatrixPolynomialG<C64>,
    curve: &SpectralCurve,
    cuts: &CutSystem,
    pd: &PeriodData,
    prec: Precision,
    exec: Execution,
) -> Result<DivisorData> {
    let g = wp.g;
    let branch = Branch::new(cuts);
    let scale = curve.scale();
    let zs = find_roots(&Poly::new(wp.b_coeffs()))?;
    let alpha = pd.alpha_matrix();
    let delta = 1e-6 * scale;
    for (j, z) in zs.iter().enumerate() {
        let near_cut = cuts.cuts.iter().any(|(p, q)| point_segment_distance(*z, *p, *q) < delta)
            || point_segment_distance(*z, cuts.ray_segment(scale).0, cuts.ray_segment(scale).1) < delta;
        if near_cut {
            return Err(Error::DivisorOnCut(j));
        }
    }
    let contributions: Vec<(C64, i8, Vec<C64>)> = map_collect(exec, &zs, |&z| {
        let wj = -wp.eval_a(z);
        let wb = branch.w(z);
        let sheet: i8 = if (wb - wj).norm() <= (wb + wj).norm() { 1 } else { -1 };
        // straight ray from infinity with the largest clearance
        let mut best = (c(1.0), f64::NEG_INFINITY);
        for k in 0..72 {
            let d = C64::from_polar(1.0, 2.0 * PI * k as f64 / 72.0);
            let clear = cuts.clearance(z, z + d * (1e6 * scale), scale);
            if clear > best.1 {
                best = (d, clear);
            }
        }
        let d = best.0 * scale.max(z.norm());
        // z = z0 + d (1/t^2 - 1), t in (0, 1]
        let f = |t: f64| -> Vec<C64> {
            if t <= 0.0 {
                return vec![c(0.0); g];
            }
            let zz = z + d * (1.0 / (t * t) - 1.0);
            let dz = d * (-2.0 / (t * t * t));
            let base = dz / (branch.w(zz) * 2.0);
            powers(zz, g).into_iter().map(|p| p * base).collect()
        };
        let raw = integrate(&f, 0.0, 1.0, g, prec.quadrature);
        let val: Vec<C64> = (0..g).map(|i| (0..g).map(|l| alpha[(i, l)] * raw[g - 1 - l]).sum::<C64>() * sheet as f64).collect();
        (wj, sheet, val)
    });
    let mut aj = vec![c(0.0); g];
    for (_, _, v) in &contributions {
        vec_add(&mut aj, v);
    }
    let u0 = aj.iter().zip(&pd.varpi).map(|(a, v)| a - v).collect();
    Ok(DivisorData {
        z: zs,
        w: contributions.iter().map(|x| x.0).collect(),
        sheets: contributions.iter().map(|x| x.1).collect(),
        abel_jacobi: aj,
        u0,
    })
}

/// Everything the theta side needs, computed from a matrix polynomial.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveReport {
    pub curve: SpectralCurve,
    pub cuts: CutSystem,
    pub periods: PeriodData,
    pub divisor: DivisorData,
}

pub fn analyze(wp: &MatrixPolynomialG<C64>, kmax: usize, prec: Precision, exec: Execution) -> Result<CurveReport> {
    let curve = spectral_curve(wp)?;
    let cuts = build_cuts(&curve)?;
    let periods = periods(&curve, &cuts, kmax, prec, exec)?;
    if !periods.re_negative_definite() {
        return Err(Error::NotNegativeDefinite);
    }
    let divisor = divisor_and_u0(wp, &curve, &cuts, &periods, prec, exec)?;
    Ok(CurveReport { curve, cuts, periods, divisor })
}

/// Integer matrix `S` with `B + 2 pi i S` closest to a reference matrix,
/// i.e. the change `b_j -> b_j + sum_i S_ij a_i` aligning the two bases.
pub fn align_basis(b: &DMatrix<C64>, reference: &DMatrix<C64>) -> DMatrix<i64> {
    DMatrix::from_fn(b.nrows(), b.ncols(), |i, j| ((reference[(i, j)] - b[(i, j)]).im / (2.0 * PI)).round() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::rat;
    use crate::wk::kw_matrix;
    use rand::{Rng, SeedableRng};

    fn elliptic(e: [f64; 3]) -> MatrixPolynomialG<C64> {
        // Q = (z-e1)(z-e2)(z-e3) via a = 0, b = z - e1, c = (z-e2)(z-e3)
        MatrixPolynomialG { g: 1, a: vec![c(0.0)], b: vec![c(-e[0])], c: vec![c(-e[1] - e[2]), c(e[1] * e[2])] }
    }

    fn agm(mut a: C64, mut b: C64) -> C64 {
        for _ in 0..60 {
            let (x, y) = ((a + b) / 2.0, (a * b).sqrt());
            // keep the "right" choice of square root
            let y = if (x - y).norm() <= (x + y).norm() { y } else { -y };
            a = x;
            b = y;
        }
        a
    }

    fn random_curve(seed: u64, g: usize) -> MatrixPolynomialG<C64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut r = |n: usize| (0..n).map(|_| c(rng.gen_range(-1.0..1.0))).collect::<Vec<_>>();
        MatrixPolynomialG { g, a: r(g), b: r(g), c: r(g + 1) }
    }

    #[test]
    fn q_and_casimirs_agree() {
        for seed in 0..6 {
            let g = 1 + seed as usize % 4;
            let wp = random_curve(seed, g).map(|x| rat((x.re * 8.0).round() as i64, 8));
            let q = wp.q_coeffs();
            let (q1, rest) = wp.casimirs();
            assert_eq!(q1, q[2 * g]);
            for k in 1..=g {
                assert_eq!(rest[k - 1], q[g - k], "g={g} k={k}");
            }
        }
        let (q1, _) = kw_matrix().casimirs();
        assert_eq!(q1, rat(0, 1));
        let vac = MatrixPolynomialG { g: 3, a: vec![rat(0, 1); 3], b: vec![rat(0, 1); 3], c: vec![rat(0, 1); 4] };
        let (q1, rest) = vac.casimirs();
        assert_eq!(q1, rat(0, 1));
        assert!(rest.iter().all(|x| *x == rat(0, 1)));
    }

    #[test]
    fn trivial_curve_and_cuts() {
        let wp = MatrixPolynomialG { g: 1, a: vec![c(0.0)], b: vec![c(0.0)], c: vec![c(0.0), c(-1.0)] };
        let curve = spectral_curve(&wp).unwrap();
        assert!((curve.q[1] + 1.0).norm() < 1e-15);
        let cs = build_cuts(&curve).unwrap();
        assert!((cs.e0 - c(1.0)).norm() < 1e-12);
        let (p, q) = cs.cuts[0];
        assert!((p + q + c(1.0)).norm() < 1e-12);
        assert!((cs.ray - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn kw_curve_layout() {
        let curve = spectral_curve(&kw_matrix().to_complex()).unwrap();
        assert_eq!(curve.branch_points.len(), 9);
        let real: Vec<_> = curve.branch_points.iter().filter(|z| z.im.abs() < 1e-9).collect();
        assert_eq!(real.len(), 1);
        let cs = build_cuts(&curve).unwrap();
        assert!(cs.e0.re < 0.0 && cs.e0.im == 0.0);
        for (p, q) in &cs.cuts {
            assert!(p.im * q.im > 0.0, "cuts stay in one half plane");
            assert!(cs.cuts.iter().any(|(a, b)| (a.conj() - *q).norm() < 1e-9 && (b.conj() - *p).norm() < 1e-9));
        }
        assert!(cs.is_non_crossing(curve.scale()));
    }

    #[test]
    fn double_point_is_reported() {
        let wp = crate::wk::truncated_polynomial(3, crate::wk::AiryVariant::Figure).to_complex();
        assert!(matches!(spectral_curve(&wp), Err(Error::DoublePoint(..))));
    }

    #[test]
    fn random_cut_systems_do_not_cross() {
        for seed in 0..30 {
            let g = 1 + seed as usize % 3;
            let curve = spectral_curve(&random_curve(100 + seed, g)).unwrap();
            let cs = build_cuts(&curve).unwrap();
            assert!(cs.is_non_crossing(curve.scale()), "seed {seed}");
            assert_eq!(cs.cuts.len(), g);
        }
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let gl = GaussLegendre::new(10);
        let s: f64 = gl.x.iter().zip(&gl.w).map(|(x, w)| w * x.powi(19)).sum();
        assert!((s - 1.0 / 20.0).abs() < 1e-15);
    }

    #[test]
    fn elliptic_period_matches_agm() {
        // w^2 = z^3 - z: the a-cycle around [-1, 0] and b through the ray from 1
        let wp = elliptic([0.0, -1.0, 1.0]);
        let curve = spectral_curve(&wp).unwrap();
        let cs = build_cuts(&curve).unwrap();
        let pd = periods(&curve, &cs, 2, Precision::default(), Execution::Sequential).unwrap();
        let br = Branch::new(&cs);
        let a = br.cut_periods(0, 1, 1e-13)[0];
        // oint dz/(2w) over the cut [-1,0] is +-pi / agm(1, sqrt 2) up to orientation/phase
        let expected = PI / agm(c(1.0), c(2f64.sqrt())).re;
        assert!((a.norm() - expected).abs() < 1e-10, "{a} vs {expected}");
        // tau = B / (2 pi i) for the square lattice is i (up to the modular action)
        let tau = pd.b[0][0] / (I * 2.0 * PI);
        let j = klein_invariant_ratio(tau);
        assert!((j - 1.0).abs() < 1e-9, "{tau} {j}");
        assert!(pd.normalization_residual < 1e-9);
    }

    /// `j(tau)/1728` from Eisenstein series; equals 1 for the square lattice.
    fn klein_invariant_ratio(tau: C64) -> f64 {
        let q = (I * 2.0 * PI * tau).exp();
        let (mut e4, mut e6) = (c(1.0), c(1.0));
        let mut qn = c(1.0);
        for n in 1..200 {
            qn *= q;
            let nf = n as f64;
            e4 += qn / (c(1.0) - qn) * (240.0 * nf.powi(3));
            e6 -= qn / (c(1.0) - qn) * (504.0 * nf.powi(5));
        }
        let j = e4.powi(3) / (e4.powi(3) - e6.powi(2));
        j.re
    }

    #[test]
    fn tight_quadrature_tolerance_is_stable() {
        // deep panels at singular path ends must not lose z - e to cancellation
        for seed in 0..30 {
            let g = 1 + seed as usize % 3;
            let curve = spectral_curve(&random_curve(300 + seed, g)).unwrap();
            let cs = build_cuts(&curve).unwrap();
            let coarse = periods(&curve, &cs, 4, Precision::uniform(1e-10), Execution::Sequential).unwrap();
            let fine = periods(&curve, &cs, 4, Precision::uniform(1e-14), Execution::Sequential).unwrap();
            assert!(max_abs(&(coarse.b_matrix() - fine.b_matrix())) < 1e-9, "seed {seed}");
            assert!(fine.v_route_discrepancy(4) < 1e-11, "seed {seed}: {}", fine.v_route_discrepancy(4));
        }
    }

    #[test]
    fn fuzzed_period_invariants() {
        for seed in 0..6 {
            let g = 1 + seed as usize % 3;
            let curve = spectral_curve(&random_curve(200 + seed, g)).unwrap();
            let cs = build_cuts(&curve).unwrap();
            let pd = periods(&curve, &cs, 3, Precision::default(), Execution::Sequential).unwrap();
            assert!(pd.asymmetry() < 1e-8, "seed {seed}: {}", pd.asymmetry());
            assert!(pd.re_negative_definite(), "seed {seed}");
            assert!(pd.normalization_residual < 1e-9);
            assert!(pd.v_route_discrepancy(3) < 1e-8, "seed {seed}: {}", pd.v_route_discrepancy(3));
        }
    }

    #[test]
    fn kw_periods_and_divisor() {
        let wp = kw_matrix().to_complex();
        let rep = analyze(&wp, 4, Precision::default(), Execution::default()).unwrap();
        let pd = &rep.periods;
        assert!(pd.asymmetry() < 1e-8);
        assert!(pd.normalization_residual < 1e-9);
        assert!(pd.v_route_discrepancy(4) < 1e-8);
        assert!(pd.v[4].iter().all(|x| x.norm() < 1e-6));
        assert!((pd.v[0][0] - C64::new(-1.731, 1.145)).norm() < 5e-3);
        // divisor points and their w-values
        let r = 5f64.cbrt() / 2.0;
        let expected = [(c(0.0), 35.0 / 16.0), (c(-r), 15.0 / 8.0), (C64::from_polar(r, PI / 3.0), 15.0 / 8.0)];
        for (z, w) in expected {
            let j = rep.divisor.z.iter().position(|x| (x - z).norm() < 1e-10).expect("divisor point");
            assert!((rep.divisor.w[j] - c(w)).norm() < 1e-10);
        }
        let aj = [C64::new(4.506, 5.841), C64::new(6.826, 1.741), C64::new(6.826, -1.741), C64::new(4.506, -5.841)];
        let d = lattice_distance(&pd.b_matrix(), &rep.divisor.abel_jacobi, &aj);
        assert!(d < 2e-2, "{d}");
    }
}
