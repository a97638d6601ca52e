//! Coefficient rings shared by the exact and numerical series code.

use num::{BigInt, BigRational, Complex, One, ToPrimitive, Zero};
use std::fmt::Debug;

pub type C64 = Complex<f64>;

/// A commutative ring with unit.
pub trait Ring: Clone + Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;

    fn plus_assign(&mut self, other: &Self) {
        *self = self.plus(other);
    }
}

/// A ring containing the rationals.
pub trait Scalar: Ring {
    fn from_rational(q: &BigRational) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(n)))
    }

    fn scaled(&self, q: &BigRational) -> Self {
        self.times(&Self::from_rational(q))
    }
}

impl Ring for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn plus_assign(&mut self, other: &Self) {
        *self += other;
    }
}

impl Scalar for BigRational {
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
}

impl Ring for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn plus_assign(&mut self, other: &Self) {
        *self += other;
    }
}

impl Ring for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
}

impl Scalar for C64 {
    fn from_rational(q: &BigRational) -> Self {
        C64::new(rational_to_f64(q), 0.0)
    }
}

/// Converts a rational to the nearest double, also for huge numerators and
/// denominators.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let Some(x) = q.to_f64() {
        if x.is_finite() {
            return x;
        }
    }
    let n = q.numer().bits() as i64;
    let d = q.denom().bits() as i64;
    let shift = n - d - 60;
    let scaled = if shift > 0 {
        BigRational::new(q.numer().clone(), q.denom() << (shift as usize))
    } else {
        BigRational::new(q.numer() << ((-shift) as usize), q.denom().clone())
    };
    scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
}

/// Builds a rational `p/q` from machine integers.
pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Formats a rational as `p/q` (or `p` when integral).
pub fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `p/q`, `p`, or a decimal literal into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if Zero::is_zero(&q) {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches(['-', '+']), fp);
        let n: BigInt = digits.parse().ok()?;
        let d = num::pow(BigInt::from(10), fp.len());
        let r = BigRational::new(n, d);
        return Some(if neg { -r } else { r });
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}

/// `n!!` as an arbitrary-precision integer (`(-1)!! = 1`).
pub fn double_factorial(n: i64) -> BigInt {
    let mut r = <BigInt as num::One>::one();
    let mut k = n;
    while k > 1 {
        r *= k;
        k -= 2;
    }
    r
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(<BigInt as num::One>::one(), |acc, k| acc * k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_round_trip() {
        for s in ["-1/48", "5/8", "0", "7", "-35/16"] {
            let q = parse_rational(s).unwrap();
            assert_eq!(fmt_rational(&q), s);
        }
        assert_eq!(parse_rational("-0.25").unwrap(), rat(-1, 4));
        assert!(parse_rational("1/0").is_none());
    }

    #[test]
    fn huge_rationals_convert() {
        let big = BigRational::from_integer(num::pow(BigInt::from(10), 400));
        let q = &big / BigRational::from_integer(num::pow(BigInt::from(10), 398));
        assert!((rational_to_f64(&q) - 100.0).abs() < 1e-12);
        let tiny = BigRational::new(BigInt::from(3), num::pow(BigInt::from(10), 305));
        assert!((rational_to_f64(&tiny) / 3e-305 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn double_factorials() {
        assert_eq!(double_factorial(-1), BigInt::from(1));
        assert_eq!(double_factorial(7), BigInt::from(105));
        assert_eq!(double_factorial(8), BigInt::from(384));
    }
}
