//! Monotone approximation of G-equations driven by a sublinear expectation.
//!
//! The scheme `u^Δ(t, x) = Ê[u^Δ(t − Δ, x + √Δ X + Δ Y)]` is evaluated
//! exactly for finite families of discrete measures, either on a recombining
//! lattice or on a uniform grid with monotone interpolation. Around it sit the
//! explicit error constants, consistency-error measurements, a discrete
//! comparison-principle checker, robust CLT / LLN experiments and an
//! uncertain-volatility (Black–Scholes–Barenblatt) pricer.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bounds;
pub mod bsb;
pub mod cli;
pub mod clt;
mod error;
pub mod io;
pub mod oracles;
pub mod quadrature;
pub mod scheme;
pub mod testfn;
pub mod uncertainty;

pub use error::{Error, Result};
pub use scheme::{forward_operator, scheme_residual, solve_grid, solve_lattice, Grid, GridFunction, SchemeConfig};
pub use uncertainty::{g_function, moment, sublinear_expect, Atom, DiscreteMeasure, MomentReport, UncertaintySet};
