//! Exact symbolic self-checks of the Poisson algebra and the Lax equations.

use crate::resolvent::{hw_check, lax_check};
use crate::ring::{rat, Ring};
use crate::walgebra::{bracket, derivation, hamiltonian, Generator, GradedPoly};
use std::fmt;

/// Outcome of one exact check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "ok" } else { "FAILED" };
        if self.detail.is_empty() {
            write!(f, "{status:6} {}", self.name)
        } else {
            write!(f, "{status:6} {}: {}", self.name, self.detail)
        }
    }
}

pub const SUITES: [&str; 5] = ["lax", "hamiltonians", "casimir", "vector-fields", "hw"];

/// Runs a named suite (`all` runs every suite).
pub fn run_suite(name: &str) -> Option<Vec<Check>> {
    match name {
        "lax" => Some(lax_suite(2, 8)),
        "hamiltonians" => Some(hamiltonian_suite(4)),
        "casimir" => Some(casimir_suite(8)),
        "vector-fields" => Some(vector_field_suite()),
        "hw" => Some(hw_suite(2, 6)),
        "all" => Some(SUITES.iter().flat_map(|s| run_suite(s).expect("known suite")).collect()),
        _ => None,
    }
}

/// `d_n W = [U_n, W]` for `n <= nmax`, down to `z^{-order}`.
pub fn lax_suite(nmax: usize, order: usize) -> Vec<Check> {
    (0..=nmax)
        .map(|n| {
            let r = lax_check(n, order);
            let detail = r.first().map(|x| format!("entry ({},{}) at z^{}: {}", x.row, x.col, x.power, x.value));
            Check::new(format!("d_{n} W = [U_{n}, W] to z^-{order}"), r.is_empty(), detail.unwrap_or_default())
        })
        .collect()
}

/// The generating-function form of the vector fields for `n <= nmax`.
pub fn hw_suite(nmax: usize, order: usize) -> Vec<Check> {
    (0..=nmax)
        .map(|n| {
            let r = hw_check(n, order);
            let detail = r.first().map(|x| format!("entry ({},{}) at z^{}: {}", x.row, x.col, x.power, x.value));
            Check::new(format!("{{H_{n}, W(z)}} generating identity to z^-{order}"), r.is_empty(), detail.unwrap_or_default())
        })
        .collect()
}

/// `{H_n, H_m} = 0` for `0 <= n < m <= nmax`.
pub fn hamiltonian_suite(nmax: i64) -> Vec<Check> {
    let mut out = Vec::new();
    for n in 0..=nmax {
        for m in n + 1..=nmax {
            let b = bracket(&hamiltonian(n), &hamiltonian(m));
            out.push(Check::new(format!("{{H_{n}, H_{m}}} = 0"), b.is_empty(), if b.is_empty() { String::new() } else { b.to_string() }));
        }
    }
    out
}

/// `{b_1 + c_1, x} = 0` for every generator of index `<= max`.
pub fn casimir_suite(max: u32) -> Vec<Check> {
    let casimir = gen(Generator::b(1)).plus(&gen(Generator::c(1)));
    let mut gens: Vec<Generator> = (1..=max).flat_map(|i| [Generator::a(i), Generator::b(i), Generator::c(i)]).collect();
    gens.push(Generator::c(max + 1));
    gens.into_iter()
        .map(|g| {
            let b = bracket(&casimir, &gen(g));
            Check::new(format!("{{b1 + c1, {g}}} = 0"), b.is_empty(), if b.is_empty() { String::new() } else { b.to_string() })
        })
        .collect()
}

fn gen(g: Generator) -> GradedPoly {
    GradedPoly::generator(g)
}

/// The first coefficients of `d_0` and `d_1` as published, verbatim.
///
/// Two of them cannot hold: `d_1 c_1 = 2a_2 + a_1(b_1 + c_1)` breaks the
/// conservation of `b_1 + c_1` given `d_1 b_1`, and `d_1 c_2` contains
/// `a_1(b_1^2 - a_1^2)`, which is not homogeneous of degree 7. See
/// [`corrected_vector_fields`].
pub fn displayed_vector_fields() -> Vec<(i64, Generator, GradedPoly)> {
    let (a1, a2, a3) = (gen(Generator::a(1)), gen(Generator::a(2)), gen(Generator::a(3)));
    let (b1, b2, b3, b4) = (gen(Generator::b(1)), gen(Generator::b(2)), gen(Generator::b(3)), gen(Generator::b(4)));
    let (c1, c2, c3, c4) = (gen(Generator::c(1)), gen(Generator::c(2)), gen(Generator::c(3)), gen(Generator::c(4)));
    let s = |p: &GradedPoly, n: i64, d: i64| p.scale(&rat(n, d));
    let b1c1 = b1.plus(&c1);
    let c1b1 = c1.minus(&b1);
    let b1sq_c1sq = b1.times(&b1).minus(&c1.times(&c1));
    vec![
        (0, Generator::a(1), c2.minus(&b2).plus(&b1.times(&b1)).minus(&b1.times(&c1))),
        (0, Generator::b(1), s(&a1, -2, 1)),
        (0, Generator::c(1), s(&a1, 2, 1)),
        (0, Generator::a(2), c3.minus(&b3).plus(&b2.times(&b1.minus(&c1)))),
        (0, Generator::b(2), s(&a2, -2, 1)),
        (0, Generator::c(2), s(&a2.plus(&a1.times(&c1b1)), 2, 1)),
        (
            1,
            Generator::a(1),
            c3.minus(&b3)
                .plus(&s(&b2.times(&s(&b1, 3, 1).minus(&c1)), 1, 2))
                .minus(&s(&c2.times(&b1c1), 1, 2))
                .minus(&s(&b1.times(&b1sq_c1sq), 1, 2)),
        ),
        (1, Generator::b(1), s(&a2, -2, 1).plus(&a1.times(&b1c1))),
        (1, Generator::c(1), s(&a2, 2, 1).plus(&a1.times(&b1c1))),
        (
            1,
            Generator::a(2),
            c4.minus(&b4).plus(&s(&b3.plus(&c3).times(&b1.minus(&c1)), 1, 2)).minus(&s(
                &b2.times(&s(&c2, 2, 1).minus(&s(&b2, 2, 1)).plus(&b1sq_c1sq)),
                1,
                2,
            )),
        ),
        (1, Generator::b(2), s(&a3, -2, 1).plus(&a2.times(&c1b1)).plus(&s(&a1.times(&b2), 2, 1))),
        (
            1,
            Generator::c(2),
            s(&a3, 2, 1).plus(&a2.times(&c1b1)).minus(&s(&a1.times(&b2), 2, 1)).plus(&a1.times(&b1.times(&b1).minus(&a1.times(&a1)))),
        ),
    ]
}

/// The published list with the two impossible coefficients replaced by the
/// forms forced by Casimir conservation and homogeneity.
pub fn corrected_vector_fields() -> Vec<(i64, Generator, GradedPoly)> {
    let (a1, a2, a3) = (gen(Generator::a(1)), gen(Generator::a(2)), gen(Generator::a(3)));
    let (b1, b2, c1) = (gen(Generator::b(1)), gen(Generator::b(2)), gen(Generator::c(1)));
    let two = rat(2, 1);
    let mut out = displayed_vector_fields();
    for (n, g, p) in out.iter_mut() {
        if *n == 1 && *g == Generator::c(1) {
            *p = a2.scale(&two).minus(&a1.times(&b1.plus(&c1)));
        }
        if *n == 1 && *g == Generator::c(2) {
            *p = a3
                .scale(&two)
                .plus(&a2.times(&c1.minus(&b1)))
                .minus(&a1.times(&b2).scale(&two))
                .plus(&a1.times(&b1.times(&b1).minus(&c1.times(&c1))));
        }
    }
    out
}

/// Why a published coefficient cannot be right, if a structural test shows it.
fn structural_note(n: i64, g: Generator, expected: &GradedPoly) -> Option<String> {
    let want = g.degree() + 2 * n as u32 + 1;
    if !expected.is_homogeneous() || expected.degree().map_or(false, |d| d != want) {
        return Some(format!("published form is not homogeneous of degree {want}"));
    }
    let partner = match g {
        g if g == Generator::c(1) => Some(Generator::b(1)),
        g if g == Generator::b(1) => Some(Generator::c(1)),
        _ => None,
    };
    partner.and_then(|p| {
        let sum = derivation(n, &gen(p)).plus(expected);
        (!sum.is_empty()).then(|| format!("published form gives d_{n}(b1 + c1) = {sum}, but b1 + c1 is a Casimir"))
    })
}

/// `d_0` and `d_1` against the published coefficients, one check each.
pub fn vector_field_suite() -> Vec<Check> {
    displayed_vector_fields()
        .into_iter()
        .map(|(n, g, expected)| {
            let got = derivation(n, &gen(g));
            let ok = got == expected;
            let detail = if ok {
                String::new()
            } else {
                let note = structural_note(n, g, &expected).map(|x| format!(" ({x})")).unwrap_or_default();
                format!("computed {got}, published {expected}{note}")
            };
            Check::new(format!("d_{n} {g}"), ok, detail)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_fields_match_display() {
        let failed: Vec<String> = vector_field_suite().into_iter().filter(|c| !c.passed).map(|c| c.name).collect();
        assert_eq!(failed, ["d_1 c1", "d_1 c2"]);
        for (n, g, p) in corrected_vector_fields() {
            assert_eq!(derivation(n, &GradedPoly::generator(g)), p, "d_{n} {g}");
        }
    }

    #[test]
    fn casimir_and_hamiltonians() {
        assert!(casimir_suite(8).iter().all(|c| c.passed));
        assert!(hamiltonian_suite(4).iter().all(|c| c.passed));
    }

    #[test]
    fn unknown_suite() {
        assert!(run_suite("nope").is_none());
        assert_eq!(run_suite("casimir").unwrap().len(), 3 * 8 + 1);
    }
}
