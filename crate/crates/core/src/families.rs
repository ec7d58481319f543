//! Fixed families of local functionals used by the bracket checks.
//!
//! * `gd2`: `∫u1, ∫u2, ∫u1², ∫u2², ∫u1·u2, ∫u1'·u2` (order-2 Lax operators).
//! * `basic`: for order `n`, `∫u_i` for every `i`, `∫u_i·u_j` for `i <= j`, and
//!   `∫u1'·u_n` when `n >= 2`.
//! * `small`: for order `n`, `∫u1`, `∫u_n`, `∫u1²`, `∫u1·u_n`.

use crate::diffring::{DiffPoly, Family, Generator, LocalFunctional};
use crate::{Error, Result};

pub type NamedFunctional = (String, LocalFunctional);

fn g(family: Family, i: u32, k: u32) -> DiffPoly {
    DiffPoly::var(Generator::new(family, i).var(k))
}

pub fn gd2() -> Vec<NamedFunctional> {
    let u = |i, k| g(Family::U, i, k);
    vec![
        ("∫u1".into(), LocalFunctional::new(u(1, 0))),
        ("∫u2".into(), LocalFunctional::new(u(2, 0))),
        ("∫u1^2".into(), LocalFunctional::new(u(1, 0).pow(2))),
        ("∫u2^2".into(), LocalFunctional::new(u(2, 0).pow(2))),
        ("∫u1*u2".into(), LocalFunctional::new(&u(1, 0) * &u(2, 0))),
        ("∫u1'*u2".into(), LocalFunctional::new(&u(1, 1) * &u(2, 0))),
    ]
}

pub fn basic(n: usize) -> Vec<NamedFunctional> {
    let n = n as u32;
    let u = |i, k| g(Family::U, i, k);
    let mut out = Vec::new();
    for i in 1..=n {
        out.push((format!("∫u{i}"), LocalFunctional::new(u(i, 0))));
    }
    for i in 1..=n {
        for j in i..=n {
            out.push((
                format!("∫u{i}*u{j}"),
                LocalFunctional::new(&u(i, 0) * &u(j, 0)),
            ));
        }
    }
    if n >= 2 {
        out.push((
            format!("∫u1'*u{n}"),
            LocalFunctional::new(&u(1, 1) * &u(n, 0)),
        ));
    }
    out
}

pub fn small(n: usize) -> Vec<NamedFunctional> {
    let n = n as u32;
    let u = |i, k| g(Family::U, i, k);
    let mut out = vec![
        ("∫u1".to_string(), LocalFunctional::new(u(1, 0))),
        ("∫u1^2".to_string(), LocalFunctional::new(u(1, 0).pow(2))),
    ];
    if n >= 2 {
        out.push((format!("∫u{n}"), LocalFunctional::new(u(n, 0))));
        out.push((
            format!("∫u1*u{n}"),
            LocalFunctional::new(&u(1, 0) * &u(n, 0)),
        ));
    }
    out
}

/// Looks a family up by name.
pub fn by_name(name: &str, n: usize) -> Result<Vec<NamedFunctional>> {
    match name {
        "gd2" if n == 2 => Ok(gd2()),
        "gd2" => Err(Error::InvalidArgument(format!(
            "family gd2 is defined for n = 2 only (got n = {n})"
        ))),
        "basic" => Ok(basic(n)),
        "small" => Ok(small(n)),
        other => Err(Error::InvalidArgument(format!(
            "unknown functional family {other:?}"
        ))),
    }
}

/// All unordered pairs `(i, j)` with `i < j`.
pub fn pairs<T>(items: &[T]) -> Vec<(&T, &T)> {
    let mut out = Vec::new();
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            out.push((&items[i], &items[j]));
        }
    }
    out
}
