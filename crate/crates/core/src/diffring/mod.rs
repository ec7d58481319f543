//! The differential polynomial ring `R[u]`: polynomials over `Q` in the jet
//! coordinates `g^(k)` of a finite set of generators, with the total derivative
//! `∂`, formal partials, the Euler (variational) operator, and the quotient by
//! total derivatives that defines equality of local functionals `∫ f`.

mod context;
mod functional;
mod generator;
mod poly;

pub use context::RingContext;
pub use functional::{
    exactness_obstruction, functional_equal, is_total_derivative, LocalFunctional, Obstruction,
};
pub use generator::{DerivVar, Family, Generator};
pub use poly::{DiffPoly, Monomial};
