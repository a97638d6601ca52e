//! Taylor coefficients of KdV tau-functions.
//!
//! Two independent routes are provided:
//!
//! * an exact route: initial data of the matrix resolvent `W(z)` is turned into
//!   the logarithmic derivatives `F_{k1..kN}` of the tau-function by the
//!   N-point resolvent formula, in arbitrary-precision rational arithmetic;
//! * a numerical route: a matrix polynomial defines a hyperelliptic spectral
//!   curve, whose period matrix, second-kind periods and Abel–Jacobi data feed
//!   a Riemann theta function; its logarithm reproduces the same coefficients
//!   up to quadratic terms.
//!
//! Hot loops (permutation sums, lattice sums, period quadratures) run on rayon
//! when the `parallel` feature is enabled and sequentially otherwise.

pub mod curve;
pub mod error;
pub mod exec;
pub mod io;
pub mod poly;
pub mod resolvent;
pub mod ring;
pub mod series;
pub mod taugen;
pub mod theta;
pub mod tpoly;
pub mod verify;
pub mod walgebra;
pub mod wk;

pub use error::{Error, Result};
pub use exec::Execution;
