//! Supersymmetric analogue: superfields over `(1|1)` superspace, operators in
//! the supercovariant derivative `D` with `D² = ∂`, the graded Adler map and
//! bracket, and the super Miura map `(D + Φ1)…(D + Φn)`.

pub mod bracket;
pub mod op;
pub mod ring;

pub use bracket::{
    free_bracket, super_adler, super_gd_bracket, super_gradient, super_kw_verify, super_miura,
    super_mult_check, RelativeSigns, SuperCotangent, SuperLax,
};
pub use op::SuperPsiDO;
pub use ring::{
    is_exact, Grade, Parity, SMonomial, SVar, SuperDiffPoly, SuperFunctional, SuperGen,
};
