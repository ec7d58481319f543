use std::fmt;

use num_traits::Zero;

use super::{DiffPoly, Generator};
use crate::rational::Rational;

/// Why a polynomial fails to be a total derivative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obstruction {
    /// Constant term (constants are not in the image of `∂`).
    pub constant: Rational,
    /// Generators with a nonzero variational derivative, with that derivative.
    pub variations: Vec<(Generator, DiffPoly)>,
}

/// `None` when `p` lies in `im ∂`, otherwise the certificate of failure.
///
/// The kernel of the Euler operators on a ring without explicit `x`-dependence
/// is `im ∂` plus constants, so `p ∈ im ∂` iff every variational derivative
/// vanishes and the constant term is zero.
pub fn exactness_obstruction(p: &DiffPoly) -> Option<Obstruction> {
    let constant = p.constant_term();
    let variations: Vec<_> = p
        .generators()
        .into_iter()
        .map(|g| (g, p.variational_derivative(&g)))
        .filter(|(_, d)| !d.is_zero())
        .collect();
    if constant.is_zero() && variations.is_empty() {
        None
    } else {
        Some(Obstruction {
            constant,
            variations,
        })
    }
}

pub fn is_total_derivative(p: &DiffPoly) -> bool {
    if !p.constant_term().is_zero() {
        return false;
    }
    p.generators()
        .iter()
        .all(|g| p.variational_derivative(g).is_zero())
}

/// A local functional `∫ f`, identified modulo total derivatives and constants.
#[derive(Clone, Debug, Default)]
pub struct LocalFunctional {
    rep: DiffPoly,
}

impl LocalFunctional {
    pub fn new(rep: DiffPoly) -> Self {
        LocalFunctional { rep }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn rep(&self) -> &DiffPoly {
        &self.rep
    }

    pub fn into_rep(self) -> DiffPoly {
        self.rep
    }

    /// Gradient component `δF/δg`.
    pub fn gradient(&self, g: &Generator) -> DiffPoly {
        self.rep.variational_derivative(g)
    }

    pub fn is_zero(&self) -> bool {
        is_total_derivative(&self.rep)
    }

    /// Equality of functionals: the representatives differ by a total derivative.
    pub fn equivalent(&self, other: &LocalFunctional) -> bool {
        is_total_derivative(&(&self.rep - &other.rep))
    }

    pub fn add(&self, other: &LocalFunctional) -> LocalFunctional {
        LocalFunctional::new(&self.rep + &other.rep)
    }

    pub fn sub(&self, other: &LocalFunctional) -> LocalFunctional {
        LocalFunctional::new(&self.rep - &other.rep)
    }

    pub fn scale(&self, c: &Rational) -> LocalFunctional {
        LocalFunctional::new(self.rep.scale(c))
    }

    pub fn neg(&self) -> LocalFunctional {
        LocalFunctional::new(-&self.rep)
    }

    pub fn substitute<F>(&self, image: F) -> LocalFunctional
    where
        F: Fn(&Generator) -> Option<DiffPoly>,
    {
        LocalFunctional::new(self.rep.substitute(image))
    }
}

impl fmt::Display for LocalFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "∫({})", self.rep)
    }
}

pub fn functional_equal(f: &LocalFunctional, g: &LocalFunctional) -> bool {
    f.equivalent(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn uk(i: u32, k: u32) -> DiffPoly {
        DiffPoly::var(Generator::u(i).var(k))
    }

    #[test]
    fn total_derivative_examples() {
        assert!(is_total_derivative(&(&uk(1, 0) * &uk(1, 1))));
        assert!(!is_total_derivative(&uk(1, 0).pow(2)));
        assert!(!is_total_derivative(&(&uk(1, 0) * &uk(1, 2))));
        assert!(!is_total_derivative(&DiffPoly::int(3)));
        let obs = exactness_obstruction(&(&uk(1, 0) * &uk(1, 2))).unwrap();
        assert_eq!(
            obs.variations,
            vec![(Generator::u(1), uk(1, 2).scale(&int(2)))]
        );
    }

    #[test]
    fn functional_equality_examples() {
        let f = LocalFunctional::new(&uk(1, 0) * &uk(1, 1));
        assert!(functional_equal(&f, &LocalFunctional::zero()));
        let g = LocalFunctional::new(&uk(1, 0) * &uk(1, 2));
        let h = LocalFunctional::new(-uk(1, 1).pow(2));
        assert!(functional_equal(&g, &h));
        assert!(!functional_equal(
            &LocalFunctional::new(uk(1, 0).pow(2)),
            &LocalFunctional::zero()
        ));
    }
}
