//! Pseudodifferential operators `Σ a_k ∂^k` with coefficients in the
//! differential ring.
//!
//! An operator stores finitely many coefficients plus an *exactness floor*:
//! every power at or above the floor is known exactly, everything below is
//! unknown (truncated). Operators with no floor are complete: they are exactly
//! the finite sum stored. Composition propagates floors so that no truncated
//! information ever leaks into a reported coefficient.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::diffring::{DiffPoly, LocalFunctional};
use crate::exec;
use crate::rational::{binomial, sign_pow, Rational};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PsiDO {
    terms: BTreeMap<i64, DiffPoly>,
    /// `None`: complete. `Some(f)`: exact for powers `>= f`, unknown below.
    floor: Option<i64>,
}

fn max_floor(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl PsiDO {
    pub fn zero() -> Self {
        PsiDO::default()
    }

    pub fn one() -> Self {
        Self::coeff_op(DiffPoly::one())
    }

    /// The multiplication operator by `c`.
    pub fn coeff_op(c: DiffPoly) -> Self {
        Self::monomial(c, 0)
    }

    /// `c ∂^k`.
    pub fn monomial(c: DiffPoly, k: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(k, c);
        }
        PsiDO { terms, floor: None }
    }

    pub fn d() -> Self {
        Self::d_pow(1)
    }

    pub fn d_pow(k: i64) -> Self {
        Self::monomial(DiffPoly::one(), k)
    }

    /// Builds an operator from `(power, coefficient)` pairs; terms below `floor`
    /// are dropped.
    pub fn from_terms(
        terms: impl IntoIterator<Item = (i64, DiffPoly)>,
        floor: Option<i64>,
    ) -> Self {
        let mut map: BTreeMap<i64, DiffPoly> = BTreeMap::new();
        for (k, c) in terms {
            if floor.is_some_and(|f| k < f) {
                continue;
            }
            *map.entry(k).or_default() += c;
        }
        map.retain(|_, c| !c.is_zero());
        PsiDO { terms: map, floor }
    }

    pub fn exact_floor(&self) -> Option<i64> {
        self.floor
    }

    pub fn is_complete(&self) -> bool {
        self.floor.is_none()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i64, &DiffPoly)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn coeff(&self, k: i64) -> DiffPoly {
        self.terms.get(&k).cloned().unwrap_or_default()
    }

    /// Highest stored power.
    pub fn order(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub fn min_power(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    /// Highest power that may carry a nonzero coefficient, known or not.
    fn upper_bound(&self) -> Option<i64> {
        let top = self.order();
        match (top, self.floor) {
            (Some(t), Some(f)) => Some(t.max(f - 1)),
            (Some(t), None) => Some(t),
            (None, Some(f)) => Some(f - 1),
            (None, None) => None,
        }
    }

    /// Complete with no negative powers.
    pub fn is_differential(&self) -> bool {
        self.floor.is_none() && self.min_power().is_none_or(|k| k >= 0)
    }

    /// Volterra: only negative powers (on the exact range).
    pub fn is_volterra(&self) -> bool {
        self.order().is_none_or(|k| k < 0)
    }

    /// Forgets everything below `floor`.
    pub fn truncate(&self, floor: i64) -> PsiDO {
        let floor = max_floor(self.floor, Some(floor));
        PsiDO::from_terms(self.terms.iter().map(|(k, c)| (*k, c.clone())), floor)
    }

    /// Marks a finite operator as complete, declaring that nothing lies below
    /// its floor.
    #[allow(dead_code)]
    pub(crate) fn assume_complete(mut self) -> PsiDO {
        self.floor = None;
        self
    }

    fn combine(&self, other: &PsiDO, negate: bool) -> PsiDO {
        let floor = max_floor(self.floor, other.floor);
        let rhs = other.terms.iter().map(|(k, c)| {
            let c = if negate { -c } else { c.clone() };
            (*k, c)
        });
        PsiDO::from_terms(
            self.terms.iter().map(|(k, c)| (*k, c.clone())).chain(rhs),
            floor,
        )
    }

    pub fn add(&self, other: &PsiDO) -> PsiDO {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &PsiDO) -> PsiDO {
        self.combine(other, true)
    }

    pub fn neg(&self) -> PsiDO {
        self.scale(&-Rational::from_integer(1.into()))
    }

    pub fn scale(&self, c: &Rational) -> PsiDO {
        PsiDO::from_terms(self.terms.iter().map(|(k, a)| (*k, a.scale(c))), self.floor)
    }

    /// `c ∘ A`: multiplies every coefficient on the left.
    pub fn mul_left(&self, c: &DiffPoly) -> PsiDO {
        PsiDO::from_terms(self.terms.iter().map(|(k, a)| (*k, c * a)), self.floor)
    }

    pub fn map_coeffs(&self, f: impl Fn(&DiffPoly) -> DiffPoly) -> PsiDO {
        PsiDO::from_terms(self.terms.iter().map(|(k, a)| (*k, f(a))), self.floor)
    }

    /// Lowest floor to which `a ∘ b` is determined by the inputs; `None` when
    /// unbounded.
    pub fn achievable_floor(a: &PsiDO, b: &PsiDO) -> Option<i64> {
        let (Some(ua), Some(ub)) = (a.upper_bound(), b.upper_bound()) else {
            return None;
        };
        let mut lim = None;
        if let Some(fa) = a.floor {
            lim = max_floor(lim, Some(fa + ub));
        }
        if let Some(fb) = b.floor {
            lim = max_floor(lim, Some(ua + fb));
        }
        lim
    }

    /// `self ∘ rhs`, exact for every power `>= floor`, via
    /// `∂^k ∘ f = Σ_j C(k, j) f^(j) ∂^(k-j)`.
    ///
    /// When `self` is a complete differential operator and `rhs` is complete,
    /// the product is finite and returned complete; `floor` is then ignored.
    pub fn compose(&self, rhs: &PsiDO, floor: i64) -> Result<PsiDO> {
        let finite = self.is_differential() && rhs.is_complete();
        if !finite {
            if let Some(lim) = Self::achievable_floor(self, rhs) {
                if floor < lim {
                    return Err(Error::InsufficientDepth {
                        requested: floor,
                        achievable: lim,
                    });
                }
            }
        }
        let out_floor = if finite { None } else { Some(floor) };
        let (Some(top_a), Some(top_b)) = (self.order(), rhs.order()) else {
            let floor = if self.upper_bound().is_none() || rhs.upper_bound().is_none() {
                None
            } else {
                out_floor
            };
            return Ok(PsiDO {
                terms: BTreeMap::new(),
                floor,
            });
        };
        let lo = if finite {
            rhs.min_power().expect("nonempty")
        } else {
            floor
        };
        let hi = top_a + top_b;
        if hi < lo {
            return Ok(PsiDO {
                terms: BTreeMap::new(),
                floor: out_floor,
            });
        }

        // Derivative tables for every coefficient of rhs, deep enough for `lo`.
        let rhs_terms: Vec<(i64, &DiffPoly)> = rhs.terms().collect();
        let lhs_terms: Vec<(i64, &DiffPoly)> = self.terms().collect();
        let derivs: Vec<Vec<DiffPoly>> = exec::map(&rhs_terms, |&(l, b)| {
            let jmax = lhs_terms
                .iter()
                .filter_map(|&(k, _)| {
                    let j = k + l - lo;
                    if j < 0 {
                        None
                    } else if k >= 0 {
                        Some(j.min(k))
                    } else {
                        Some(j)
                    }
                })
                .max();
            match jmax {
                Some(j) => b.derivatives_up_to(j as u32),
                None => Vec::new(),
            }
        });

        let powers: Vec<i64> = (lo..=hi).collect();
        let coeffs = exec::map(&powers, |&m| {
            let mut acc = DiffPoly::zero();
            for &(k, a) in &lhs_terms {
                for (idx, &(l, _)) in rhs_terms.iter().enumerate() {
                    let j = k + l - m;
                    if j < 0 || (k >= 0 && j > k) {
                        continue;
                    }
                    let c = binomial(k, j as u32);
                    if c.is_zero() {
                        continue;
                    }
                    let bj = &derivs[idx][j as usize];
                    if bj.is_zero() {
                        continue;
                    }
                    acc += (a * bj).scale(&c);
                }
            }
            acc
        });
        Ok(PsiDO::from_terms(powers.into_iter().zip(coeffs), out_floor))
    }

    /// Differential part `( )₊`: powers `>= 0`.
    pub fn proj_plus(&self) -> PsiDO {
        let floor = match self.floor {
            Some(f) if f > 0 => Some(f),
            _ => None,
        };
        PsiDO {
            terms: self
                .terms
                .range(0..)
                .map(|(k, c)| (*k, c.clone()))
                .collect(),
            floor,
        }
    }

    /// Volterra part `( )₋`: powers `< 0`, same floor.
    pub fn proj_minus(&self) -> PsiDO {
        PsiDO {
            terms: self
                .terms
                .range(..0)
                .map(|(k, c)| (*k, c.clone()))
                .collect(),
            floor: self.floor,
        }
    }

    /// Coefficient of `∂^{-1}`.
    pub fn residue(&self) -> Result<DiffPoly> {
        match self.floor {
            Some(f) if f > -1 => Err(Error::ResidueUndetermined { floor: f }),
            _ => Ok(self.coeff(-1)),
        }
    }

    /// Adler trace `Tr A = ∫ res A`.
    pub fn trace(&self) -> Result<LocalFunctional> {
        self.residue().map(LocalFunctional::new)
    }

    /// `(Σ a_k ∂^k)† = Σ (-∂)^k ∘ a_k`.
    pub fn formal_adjoint(&self) -> Result<PsiDO> {
        if !self.is_differential() {
            return Err(Error::NotDifferential(self.to_text()));
        }
        let mut out = Vec::new();
        for (k, a) in self.terms() {
            let ders = a.derivatives_up_to(k as u32);
            for (j, aj) in ders.iter().enumerate() {
                let c = binomial(k, j as u32) * sign_pow(k);
                out.push((k - j as i64, aj.scale(&c)));
            }
        }
        Ok(PsiDO::from_terms(out, None))
    }

    /// Applies a differential operator to a function: `Σ a_k f^(k)`.
    pub fn apply(&self, f: &DiffPoly) -> Result<DiffPoly> {
        if !self.is_differential() {
            return Err(Error::NotDifferential(self.to_text()));
        }
        let top = self.order().unwrap_or(0).max(0) as u32;
        let ders = f.derivatives_up_to(top);
        let mut acc = DiffPoly::zero();
        for (k, a) in self.terms() {
            acc += a * &ders[k as usize];
        }
        Ok(acc)
    }

    /// Equality on the range where both operators are exact.
    pub fn agrees_with(&self, other: &PsiDO) -> bool {
        self.mismatch(other).is_none()
    }

    /// First power (from the top) where the operators differ on the common
    /// exact range.
    pub fn mismatch(&self, other: &PsiDO) -> Option<i64> {
        let floor = max_floor(self.floor, other.floor);
        let keys: std::collections::BTreeSet<i64> = self
            .terms
            .keys()
            .chain(other.terms.keys())
            .copied()
            .filter(|k| floor.is_none_or(|f| *k >= f))
            .collect();
        keys.into_iter()
            .rev()
            .find(|k| self.coeff(*k) != other.coeff(*k))
    }

    /// Per-power, per-monomial difference report, or `None` if they agree.
    pub fn diff_report(&self, other: &PsiDO) -> Option<String> {
        self.mismatch(other)?;
        let floor = max_floor(self.floor, other.floor);
        let mut lines = Vec::new();
        let keys: std::collections::BTreeSet<i64> = self
            .terms
            .keys()
            .chain(other.terms.keys())
            .copied()
            .collect();
        for k in keys.into_iter().rev() {
            if floor.is_some_and(|f| k < f) {
                continue;
            }
            let (l, r) = (self.coeff(k), other.coeff(k));
            if l == r {
                continue;
            }
            let diff = &l - &r;
            for (m, c) in diff.terms() {
                lines.push(format!(
                    "d^{k}: {m}: lhs {} rhs {} (lhs - rhs = {})",
                    crate::rational::to_text(&l.coefficient(m)),
                    crate::rational::to_text(&r.coefficient(m)),
                    crate::rational::to_text(c)
                ));
            }
        }
        Some(lines.join("\n"))
    }

    pub fn to_text(&self) -> String {
        let mut parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(k, c)| format!("({c})·d^{k}"))
            .collect();
        if let Some(f) = self.floor {
            parts.push(format!("O(d^{})", f - 1));
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "floor": self.floor,
            "terms": self.terms.iter().rev().map(|(k, c)| json!({
                "power": k,
                "coeff": c.to_json(),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(value: &Value) -> Option<PsiDO> {
        let floor = match value.get("floor")? {
            Value::Null => None,
            v => Some(v.as_i64()?),
        };
        let mut terms = Vec::new();
        for t in value.get("terms")?.as_array()? {
            terms.push((
                t.get("power")?.as_i64()?,
                DiffPoly::from_json(t.get("coeff")?)?,
            ));
        }
        Some(PsiDO::from_terms(terms, floor))
    }
}

impl fmt::Display for PsiDO {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Free-function form of [`PsiDO::compose`].
pub fn compose(a: &PsiDO, b: &PsiDO, floor: i64) -> Result<PsiDO> {
    a.compose(b, floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffring::Generator;
    use crate::rational::int;

    fn var(g: Generator, k: u32) -> DiffPoly {
        DiffPoly::var(g.var(k))
    }
    fn u1(k: u32) -> DiffPoly {
        var(Generator::u(1), k)
    }

    #[test]
    fn leibniz_order_one() {
        let p = PsiDO::d().compose(&PsiDO::coeff_op(u1(0)), 0).unwrap();
        let want = PsiDO::from_terms([(1, u1(0)), (0, u1(1))], None);
        assert_eq!(p, want);
        assert!(p.is_complete());
    }

    #[test]
    fn miura_two_factors() {
        let phi = |i, k| var(Generator::phi(i), k);
        let f1 = PsiDO::from_terms([(1, DiffPoly::one()), (0, phi(1, 0))], None);
        let f2 = PsiDO::from_terms([(1, DiffPoly::one()), (0, phi(2, 0))], None);
        let p = f1.compose(&f2, 0).unwrap();
        let want = PsiDO::from_terms(
            [
                (2, DiffPoly::one()),
                (1, &phi(1, 0) + &phi(2, 0)),
                (0, &phi(2, 1) + &(&phi(1, 0) * &phi(2, 0))),
            ],
            None,
        );
        assert_eq!(p, want);
    }

    #[test]
    fn inverse_derivative_tail() {
        let p = PsiDO::d_pow(-1)
            .compose(&PsiDO::coeff_op(u1(0)), -3)
            .unwrap();
        let want = PsiDO::from_terms([(-1, u1(0)), (-2, -u1(1)), (-3, u1(2))], Some(-3));
        assert_eq!(p, want);
        assert_eq!(p.residue().unwrap(), u1(0));
    }

    #[test]
    fn depth_is_enforced() {
        let x = PsiDO::d_pow(-1)
            .compose(&PsiDO::coeff_op(u1(0)), -2)
            .unwrap();
        let l = PsiDO::d_pow(2);
        // x known to -2, so l∘x known to 0
        assert!(l.compose(&x, 0).is_ok());
        let err = l.compose(&x, -1).unwrap_err();
        assert_eq!(
            err,
            Error::InsufficientDepth {
                requested: -1,
                achievable: 0
            }
        );
    }

    #[test]
    fn projections() {
        let a = PsiDO::from_terms([(1, DiffPoly::one()), (0, u1(0)), (-1, u1(0))], None);
        assert_eq!(
            a.proj_plus(),
            PsiDO::from_terms([(1, DiffPoly::one()), (0, u1(0))], None)
        );
        assert_eq!(a.proj_minus(), PsiDO::monomial(u1(0), -1));
        assert!(PsiDO::d_pow(-2).proj_plus().is_zero());
    }

    #[test]
    fn residue_and_trace() {
        assert_eq!(PsiDO::monomial(u1(0), -1).residue().unwrap(), u1(0));
        let l = PsiDO::from_terms([(2, DiffPoly::one()), (0, var(Generator::u(2), 0))], None);
        assert!(l.residue().unwrap().is_zero());
        assert!(PsiDO::d_pow(2).trace().unwrap().is_zero());
        let trunc = PsiDO::from_terms([(1, DiffPoly::one())], Some(0));
        assert!(matches!(
            trunc.residue(),
            Err(Error::ResidueUndetermined { floor: 0 })
        ));
        // [∂, u1 ∂^-1] has residue u1', a total derivative
        let b = PsiDO::monomial(u1(0), -1);
        let ab = PsiDO::d().compose(&b, -1).unwrap();
        let ba = b.compose(&PsiDO::d(), -1).unwrap();
        let tr = ab.sub(&ba).trace().unwrap();
        assert_eq!(tr.rep(), &u1(1));
        assert!(tr.is_zero());
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(PsiDO::d().formal_adjoint().unwrap(), PsiDO::d().neg());
        assert_eq!(
            PsiDO::coeff_op(u1(0)).formal_adjoint().unwrap(),
            PsiDO::coeff_op(u1(0))
        );
        let a = PsiDO::monomial(u1(0), 1);
        let want = PsiDO::from_terms([(1, -u1(0)), (0, -u1(1))], None);
        assert_eq!(a.formal_adjoint().unwrap(), want);
        assert!(PsiDO::d_pow(-1).formal_adjoint().is_err());
    }

    #[test]
    fn apply_operator() {
        let op = PsiDO::from_terms([(2, DiffPoly::one()), (0, u1(0).scale(&int(3)))], None);
        let f = var(Generator::x(1), 0);
        assert_eq!(
            op.apply(&f).unwrap(),
            &var(Generator::x(1), 2) + &(&u1(0) * &f).scale(&int(3))
        );
    }

    #[test]
    fn json_round_trip_and_shape() {
        let p = PsiDO::d_pow(-1)
            .compose(&PsiDO::coeff_op(u1(0)), -2)
            .unwrap();
        assert_eq!(PsiDO::from_json(&p.to_json()), Some(p.clone()));
        assert_eq!(
            PsiDO::d().to_json().to_string(),
            r#"{"floor":null,"terms":[{"coeff":[{"coeff":"1/1","vars":[]}],"power":1}]}"#
        );
        assert_eq!(p.to_text(), "(u1)·d^-1 + (-u1^(1))·d^-2 + O(d^-3)");
    }
}
