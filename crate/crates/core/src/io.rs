//! File formats: rationals as `"p/q"` strings, complex numbers as
//! `[re, im]`, multi-indices in CSV as semicolon-joined sorted lists.

use crate::curve::MatrixPolynomialG;
use crate::error::{Error, Result};
use crate::resolvent::InitialData;
use crate::ring::{fmt_rational, parse_rational, C64};
use crate::taugen::CoeffTable;
use crate::tpoly::{fmt_multi_index, TruncatedTPoly};
use num::BigRational;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use std::fmt::Write as _;

/// `#[serde(with)]` for a complex number as `[re, im]`.
pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

/// `#[serde(with)]` for `Vec<C64>`.
pub mod complex_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<C64>, D::Error> {
        Ok(Vec::<[f64; 2]>::deserialize(d)?.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

/// `#[serde(with)]` for row-major complex matrices.
pub mod complex_matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &[Vec<C64>], s: S) -> std::result::Result<S::Ok, S::Error> {
        m.iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<C64>>, D::Error> {
        Ok(Vec::<Vec<[f64; 2]>>::deserialize(d)?
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .collect())
    }
}

/// `#[serde(with)]` for a list of complex pairs (cut endpoints).
pub mod complex_pairs {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[(C64, C64)], s: S) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(|(a, b)| [[a.re, a.im], [b.re, b.im]]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<(C64, C64)>, D::Error> {
        Ok(Vec::<[[f64; 2]; 2]>::deserialize(d)?
            .into_iter()
            .map(|[a, b]| (C64::new(a[0], a[1]), C64::new(b[0], b[1])))
            .collect())
    }
}

/// `#[serde(with)]` for rationals as `"p/q"` strings (plain integers accepted).
pub mod rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(fmt_rational).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<BigRational>, D::Error> {
        Vec::<Value>::deserialize(d)?
            .iter()
            .map(|v| rational_value(v).map_err(serde::de::Error::custom))
            .collect()
    }
}

fn rational_value(v: &Value) -> Result<BigRational> {
    let parsed = match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => parse_rational(&n.to_string()),
        _ => None,
    };
    parsed.ok_or_else(|| Error::Parse(format!("not a rational: {v}")))
}

fn complex_value(v: &Value) -> Result<C64> {
    match v {
        Value::Array(a) if a.len() == 2 => {
            let f = |x: &Value| x.as_f64().ok_or_else(|| Error::Parse(format!("not a number: {x}")));
            Ok(C64::new(f(&a[0])?, f(&a[1])?))
        }
        Value::Number(n) => Ok(C64::new(n.as_f64().unwrap_or(f64::NAN), 0.0)),
        _ => Err(Error::Parse(format!("not a complex number: {v}"))),
    }
}

pub fn parse_initial_data(text: &str) -> Result<InitialData> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn initial_data_json(d: &InitialData) -> String {
    serde_json::to_string_pretty(d).expect("serializable")
}

/// A matrix polynomial read from JSON, exact when every entry is rational.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixFile {
    Exact(MatrixPolynomialG<BigRational>),
    Complex(MatrixPolynomialG<C64>),
}

impl MatrixFile {
    pub fn complex(&self) -> MatrixPolynomialG<C64> {
        match self {
            MatrixFile::Exact(m) => m.to_complex(),
            MatrixFile::Complex(m) => m.clone(),
        }
    }

    pub fn exact(&self) -> Option<&MatrixPolynomialG<BigRational>> {
        match self {
            MatrixFile::Exact(m) => Some(m),
            MatrixFile::Complex(_) => None,
        }
    }
}

/// Parses `{"g": g, "a": [a_1..a_g], "b": [b_1..b_g], "c": [c_1..c_{g+1}]}`;
/// entries are `"p/q"` strings, numbers or `[re, im]` pairs. Short lists are
/// zero-extended.
pub fn parse_matrix(text: &str) -> Result<MatrixFile> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let g = v.get("g").and_then(Value::as_u64).ok_or_else(|| Error::Parse("missing genus \"g\"".into()))? as usize;
    if g == 0 {
        return Err(Error::Parse("genus must be at least 1".into()));
    }
    let list = |key: &str, len: usize| -> Result<Vec<Value>> {
        let arr = match v.get(key) {
            None => Vec::new(),
            Some(Value::Array(a)) => a.clone(),
            Some(x) => return Err(Error::Parse(format!("\"{key}\" is not a list: {x}"))),
        };
        if arr.len() > len {
            return Err(Error::Parse(format!("\"{key}\" has {} entries, at most {len} allowed", arr.len())));
        }
        Ok(arr)
    };
    let (a, b, c) = (list("a", g)?, list("b", g)?, list("c", g + 1)?);
    let exact = a.iter().chain(&b).chain(&c).all(|x| !x.is_array());
    let pad = |v: Vec<Value>, len: usize| -> Vec<Value> {
        let mut v = v;
        v.resize(len, Value::String("0".into()));
        v
    };
    let (a, b, c) = (pad(a, g), pad(b, g), pad(c, g + 1));
    if exact {
        let conv = |v: &[Value]| v.iter().map(rational_value).collect::<Result<Vec<_>>>();
        Ok(MatrixFile::Exact(MatrixPolynomialG { g, a: conv(&a)?, b: conv(&b)?, c: conv(&c)? }))
    } else {
        let conv = |v: &[Value]| {
            v.iter()
                .map(|x| match x {
                    Value::String(_) => rational_value(x).map(|q| C64::new(crate::ring::rational_to_f64(&q), 0.0)),
                    _ => complex_value(x),
                })
                .collect::<Result<Vec<_>>>()
        };
        Ok(MatrixFile::Complex(MatrixPolynomialG { g, a: conv(&a)?, b: conv(&b)?, c: conv(&c)? }))
    }
}

pub fn matrix_json(m: &MatrixPolynomialG<BigRational>) -> String {
    #[derive(Serialize)]
    struct Out<'a> {
        g: usize,
        #[serde(with = "rational_vec")]
        a: &'a [BigRational],
        #[serde(with = "rational_vec")]
        b: &'a [BigRational],
        #[serde(with = "rational_vec")]
        c: &'a [BigRational],
    }
    serde_json::to_string_pretty(&Out { g: m.g, a: &m.a, b: &m.b, c: &m.c }).expect("serializable")
}

/// `multi_index,numerator,denominator` rows.
pub fn coeff_table_csv(t: &CoeffTable) -> String {
    let mut s = String::from("multi_index,numerator,denominator\n");
    for (k, f) in t.entries() {
        let _ = writeln!(s, "{},{},{}", fmt_multi_index(k), f.numer(), f.denom());
    }
    s
}

/// `multi_index,value` rows for an exact truncated polynomial.
pub fn tpoly_csv(p: &TruncatedTPoly<BigRational>) -> String {
    let mut s = String::from("multi_index,value\n");
    for (k, f) in p.terms() {
        let _ = writeln!(s, "{},{}", fmt_multi_index(k), fmt_rational(f));
    }
    s
}

/// `multi_index,re,im` rows for a complex truncated polynomial.
pub fn complex_tpoly_csv(p: &TruncatedTPoly<C64>) -> String {
    let mut s = String::from("multi_index,re,im\n");
    for (k, f) in p.terms() {
        let _ = writeln!(s, "{},{:.15e},{:.15e}", fmt_multi_index(k), f.re, f.im);
    }
    s
}

pub fn points_csv(points: &[C64]) -> String {
    let mut s = String::from("re,im\n");
    for z in points {
        let _ = writeln!(s, "{:.15e},{:.15e}", z.re, z.im);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::rat;

    #[test]
    fn initial_data_round_trip() {
        let d = InitialData { a: vec![rat(-1, 48)], b: vec![rat(0, 1), rat(0, 1), rat(5, 8)], c: vec![rat(3, 1)], depth: Some(3) };
        let text = initial_data_json(&d);
        assert!(text.contains("\"-1/48\""));
        assert_eq!(parse_initial_data(&text).unwrap(), d);
        let loose = parse_initial_data(r#"{"a": ["1/2", 3], "b": []}"#).unwrap();
        assert_eq!(loose.a, vec![rat(1, 2), rat(3, 1)]);
        assert!(loose.c.is_empty() && loose.depth.is_none());
        assert!(parse_initial_data(r#"{"a": ["x"]}"#).is_err());
    }

    #[test]
    fn matrix_files() {
        let m = crate::wk::kw_matrix();
        assert_eq!(parse_matrix(&matrix_json(&m)).unwrap(), MatrixFile::Exact(m));
        let c = parse_matrix(r#"{"g": 1, "a": [[0.5, 1.0]], "c": ["1/2"]}"#).unwrap();
        match c {
            MatrixFile::Complex(m) => {
                assert_eq!(m.a[0], C64::new(0.5, 1.0));
                assert_eq!(m.c, vec![C64::new(0.5, 0.0), C64::new(0.0, 0.0)]);
            }
            _ => panic!("expected complex"),
        }
        assert!(parse_matrix(r#"{"g": 1, "a": [1, 2]}"#).is_err());
        assert!(parse_matrix(r#"{"a": []}"#).is_err());
    }

    #[test]
    fn complex_serde_is_pairs() {
        #[derive(Serialize, Deserialize, PartialEq, Debug)]
        struct T {
            #[serde(with = "complex_vec")]
            v: Vec<C64>,
        }
        let t = T { v: vec![C64::new(1.0, -2.0)] };
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"v":[[1.0,-2.0]]}"#);
        assert_eq!(serde_json::from_str::<T>(&s).unwrap(), t);
    }
}
