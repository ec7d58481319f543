//! Exact symbolic engine for differential polynomial rings and pseudodifferential
//! operators.
//!
//! The crate builds the second Gel'fand–Dickey bracket from the Adler map and
//! checks, by exact computation over the rationals, the identities that tie it to
//! the Miura transformation, to the classical R-matrix `P₊ − P₋`, and to the
//! multiplication of Lax operators. A graded (supersymmetric) analogue lives in
//! [`susy`].
//!
//! Everything is exact: coefficients are arbitrary-precision rationals and the
//! infinite Volterra tails of pseudodifferential operators carry an explicit
//! exactness floor (see [`psido::PsiDO`]).

pub mod adler;
pub mod diffring;
mod error;
pub mod exec;
pub mod families;
pub mod miura;
pub mod psido;
pub mod random;
pub mod rational;
pub mod report;
pub mod susy;

pub use error::{Error, Result};

pub use adler::{BracketTable, CotangentVec, LaxOp, Settings, Sign};
pub use diffring::{DerivVar, DiffPoly, Family, Generator, LocalFunctional};
pub use psido::PsiDO;
