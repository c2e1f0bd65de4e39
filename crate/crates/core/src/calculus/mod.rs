//! Symbolic functional-derivative calculus for a 1-D scalar field.
//!
//! [`DiffPoly`] holds differential polynomials in `u, u_1, u_2, …` with exact
//! rational coefficients; [`apply_a`] realizes the generator
//! `A_F = ∫dζ F(u(ζ)) δ/δu(ζ)`, and [`eval_diffpoly`] bridges to numeric
//! fields so that `Aⁿu / n!` can be compared against time-Taylor
//! coefficients of the matching PDE.

pub mod burgers;
pub mod eval;
pub mod operator;
pub mod poly;
pub mod syntax;

pub use eval::eval_diffpoly;
pub use operator::{a_power_u, a_powers_u, apply_a, derivation_check, derivation_check_with, Generator};
pub use poly::{rational, DiffMonomial, DiffPoly, Monomial};
pub use syntax::parse;
