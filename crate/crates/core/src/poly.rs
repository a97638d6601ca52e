//! Dense complex polynomials and simultaneous root finding.

use crate::error::{Error, Result};
use crate::ring::C64;

/// Polynomial with coefficients in ascending order of powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub coeffs: Vec<C64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.norm() == 0.0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[C64]) -> Self {
        let mut c = vec![C64::new(1.0, 0.0)];
        for r in roots {
            let mut n = vec![C64::new(0.0, 0.0); c.len() + 1];
            for (i, x) in c.iter().enumerate() {
                n[i + 1] += x;
                n[i] -= x * r;
            }
            c = n;
        }
        Self::new(c)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// Value and derivative by Horner's scheme.
    pub fn eval_with_derivative(&self, z: C64) -> (C64, C64) {
        let mut p = C64::new(0.0, 0.0);
        let mut d = C64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            d = d * z + p;
            p = p * z + c;
        }
        (p, d)
    }

    /// `sum |a_k| |z|^k`, the natural scale for residuals at `z`.
    pub fn abs_scale(&self, z: C64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut c = vec![C64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, x) in self.coeffs.iter().enumerate() {
            for (j, y) in other.coeffs.iter().enumerate() {
                c[i + j] += x * y;
            }
        }
        Poly::new(c)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Poly, i: usize| p.coeffs.get(i).copied().unwrap_or(C64::new(0.0, 0.0));
        Poly::new((0..n).map(|i| get(self, i) + get(other, i)).collect())
    }
}

const MAX_ITER: usize = 500;

/// All complex roots by Aberth–Ehrlich iteration, polished by Newton steps.
///
/// The variable is rescaled by the geometric mean root modulus before
/// iterating so that widely ranging coefficients stay representable.
pub fn find_roots(p: &Poly) -> Result<Vec<C64>> {
    let n = p.degree();
    if n == 0 {
        return Err(Error::InvalidArgument("constant polynomial has no roots".into()));
    }
    let lead = p.coeffs[n];
    // roots at the origin
    let zeros = p.coeffs.iter().take_while(|c| c.norm() == 0.0).count();
    let q = Poly::new(p.coeffs[zeros..].to_vec());
    let m = q.degree();
    let mut roots = vec![C64::new(0.0, 0.0); zeros];
    if m == 0 {
        return Ok(roots);
    }
    let s = (q.coeffs[0].norm() / lead.norm()).powf(1.0 / m as f64);
    let s = if s.is_finite() && s > 0.0 { s } else { 1.0 };
    // scaled monic polynomial in y = z / s
    let mut scaled: Vec<C64> = q.coeffs.iter().enumerate().map(|(k, c)| c / lead * s.powi(k as i32 - m as i32)).collect();
    scaled[m] = C64::new(1.0, 0.0);
    let sp = Poly::new(scaled);
    let radius = sp.coeffs[..m].iter().map(|c| c.norm()).fold(0.0f64, f64::max).min(1.0).max(0.5);
    let mut y: Vec<C64> = (0..m)
        .map(|k| C64::from_polar(radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / m as f64 + 0.4))
        .collect();
    let mut converged = vec![false; m];
    let mut iter = 0;
    while converged.iter().any(|c| !c) {
        iter += 1;
        if iter > MAX_ITER {
            return Err(Error::RootsNotConverged(MAX_ITER));
        }
        for i in 0..m {
            if converged[i] {
                continue;
            }
            let (v, d) = sp.eval_with_derivative(y[i]);
            // backward-error test before stepping: inside a cluster a step
            // from an acceptable point can land far away
            if v.norm() <= 4.0 * m as f64 * f64::EPSILON * sp.abs_scale(y[i]) {
                converged[i] = true;
                continue;
            }
            let ratio = v / d;
            let sum: C64 = (0..m).filter(|&j| j != i).map(|j| (y[i] - y[j]).inv()).sum();
            y[i] -= ratio / (C64::new(1.0, 0.0) - ratio * sum);
        }
    }
    for r in y {
        roots.push(polish(&q, r * s));
    }
    Ok(roots)
}

fn polish(p: &Poly, mut z: C64) -> C64 {
    for _ in 0..3 {
        let (v, d) = p.eval_with_derivative(z);
        if d.norm() == 0.0 || v.norm() == 0.0 {
            break;
        }
        let next = z - v / d;
        if !next.re.is_finite() || !next.im.is_finite() {
            break;
        }
        // accept only improving steps
        if p.eval(next).norm() <= v.norm() {
            z = next;
        } else {
            break;
        }
    }
    z
}

/// Largest relative residual `|p(r)| / sum |a_k||r|^k` over the roots.
pub fn max_relative_residual(p: &Poly, roots: &[C64]) -> f64 {
    roots.iter().map(|&r| p.eval(r).norm() / p.abs_scale(r).max(f64::MIN_POSITIVE)).fold(0.0, f64::max)
}
