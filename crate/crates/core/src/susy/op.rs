//! Super pseudodifferential operators `Σ a_k D^k`.
//!
//! Composition is constructive: `D ∘ f = (Df) + (-1)^{|f|} f D` iterated for
//! positive powers, and for negative powers the formal inverse
//! `D^{-1} ∘ f = Σ_j h_j D^{-1-j}` with `h_0 = (-1)^{|f|} f` and
//! `h_j = -(-1)^{|f|+j} D h_{j-1}`, iterated and truncated at the requested
//! floor. Floors follow the same rules as [`crate::psido::PsiDO`].

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;
use serde_json::{json, Value};

use super::ring::{Grade, Parity, SuperDiffPoly, SuperFunctional};
use crate::exec;
use crate::rational::{self, Rational};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperPsiDO {
    terms: BTreeMap<i64, SuperDiffPoly>,
    floor: Option<i64>,
    parity: Parity,
}

fn max_floor(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn coeff_parity(c: &SuperDiffPoly) -> Parity {
    match c.grade() {
        Grade::Pure(p) => p,
        Grade::Zero => Parity::Even,
        Grade::Mixed => panic!("inhomogeneous coefficient {c}"),
    }
}

/// `D ∘ (Σ g_m D^m)`.
fn d_step(ops: &BTreeMap<i64, SuperDiffPoly>) -> BTreeMap<i64, SuperDiffPoly> {
    let mut out: BTreeMap<i64, SuperDiffPoly> = BTreeMap::new();
    for (&m, g) in ops {
        *out.entry(m).or_default() += g.d();
        *out.entry(m + 1).or_default() += g.sign_by(coeff_parity(g));
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// `D^{-1} ∘ (Σ g_m D^m)`, keeping powers `>= bound`.
fn d_inv_step(ops: &BTreeMap<i64, SuperDiffPoly>, bound: i64) -> BTreeMap<i64, SuperDiffPoly> {
    let mut out: BTreeMap<i64, SuperDiffPoly> = BTreeMap::new();
    for (&m, g) in ops {
        let p = coeff_parity(g);
        let mut h = g.sign_by(p);
        let mut j = 0i64;
        while m - 1 - j >= bound {
            if j > 0 {
                h = -h.d().sign_by(p + Parity::of(j));
            }
            if h.is_zero() {
                break;
            }
            *out.entry(m - 1 - j).or_default() += &h;
            j += 1;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Normal-ordered `D^k ∘ b` for every `k` in `ks`, exact for powers `>= bound`.
fn expansions(
    b: &SuperDiffPoly,
    ks: &[i64],
    bound: i64,
) -> BTreeMap<i64, BTreeMap<i64, SuperDiffPoly>> {
    let mut out = BTreeMap::new();
    let start: BTreeMap<i64, SuperDiffPoly> = [(0, b.clone())].into_iter().collect();
    if let Some(&kmax) = ks.iter().max() {
        // positive powers never lower the D-order, so nothing is pruned here
        let mut cur = start.clone();
        for k in 0..=kmax.max(0) {
            if k > 0 {
                cur = d_step(&cur);
            }
            if ks.contains(&k) {
                out.insert(k, cur.clone());
            }
        }
    }
    if let Some(&kmin) = ks.iter().min() {
        if kmin < 0 {
            // keep everything at or above `bound`; deeper truncation would
            // lose terms needed by the shallower powers
            let mut cur = start;
            for k in (kmin..0).rev() {
                cur = d_inv_step(&cur, bound);
                if ks.contains(&k) {
                    out.insert(k, cur.clone());
                }
            }
        }
    }
    out
}

impl SuperPsiDO {
    /// Validates homogeneity: `|a_k| + k ≡ parity` for every term.
    pub fn new(
        terms: impl IntoIterator<Item = (i64, SuperDiffPoly)>,
        floor: Option<i64>,
        parity: Parity,
    ) -> Result<Self> {
        let mut map: BTreeMap<i64, SuperDiffPoly> = BTreeMap::new();
        for (k, c) in terms {
            if floor.is_some_and(|f| k < f) {
                continue;
            }
            *map.entry(k).or_default() += c;
        }
        map.retain(|_, c| !c.is_zero());
        for (k, c) in &map {
            match c.grade() {
                Grade::Pure(p) if p + Parity::of(*k) == parity => {}
                g => {
                    return Err(Error::Inhomogeneous(format!(
                        "coefficient of D^{k} is {c} ({g:?}), operator parity {parity}"
                    )))
                }
            }
        }
        Ok(SuperPsiDO {
            terms: map,
            floor,
            parity,
        })
    }

    /// Like [`SuperPsiDO::new`] with the parity read off the terms.
    pub fn from_terms(
        terms: impl IntoIterator<Item = (i64, SuperDiffPoly)>,
        floor: Option<i64>,
    ) -> Result<Self> {
        let terms: Vec<_> = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let parity = match terms.first() {
            Some((k, c)) => match c.grade() {
                Grade::Pure(p) => p + Parity::of(*k),
                _ => return Err(Error::Inhomogeneous(c.to_text())),
            },
            None => Parity::Even,
        };
        Self::new(terms, floor, parity)
    }

    pub fn zero(parity: Parity) -> Self {
        SuperPsiDO {
            terms: BTreeMap::new(),
            floor: None,
            parity,
        }
    }

    pub fn one() -> Self {
        Self::d_pow(0)
    }

    pub fn d() -> Self {
        Self::d_pow(1)
    }

    pub fn d_pow(k: i64) -> Self {
        SuperPsiDO {
            terms: [(k, SuperDiffPoly::one())].into_iter().collect(),
            floor: None,
            parity: Parity::of(k),
        }
    }

    /// `c D^k`.
    pub fn monomial(c: SuperDiffPoly, k: i64) -> Result<Self> {
        Self::from_terms([(k, c)], None)
    }

    pub fn coeff_op(c: SuperDiffPoly) -> Result<Self> {
        Self::monomial(c, 0)
    }

    pub fn parity(&self) -> Parity {
        self.parity
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

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i64, &SuperDiffPoly)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn coeff(&self, k: i64) -> SuperDiffPoly {
        self.terms.get(&k).cloned().unwrap_or_default()
    }

    pub fn order(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub fn min_power(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    fn upper_bound(&self) -> Option<i64> {
        match (self.order(), self.floor) {
            (Some(t), Some(f)) => Some(t.max(f - 1)),
            (Some(t), None) => Some(t),
            (None, Some(f)) => Some(f - 1),
            (None, None) => None,
        }
    }

    pub fn is_differential(&self) -> bool {
        self.floor.is_none() && self.min_power().is_none_or(|k| k >= 0)
    }

    pub fn truncate(&self, floor: i64) -> SuperPsiDO {
        let floor = max_floor(self.floor, Some(floor));
        SuperPsiDO {
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| floor.is_none_or(|f| **k >= f))
                .map(|(k, c)| (*k, c.clone()))
                .collect(),
            floor,
            parity: self.parity,
        }
    }

    fn combine(&self, other: &SuperPsiDO, negate: bool) -> Result<SuperPsiDO> {
        let parity = if self.is_zero() {
            other.parity
        } else {
            self.parity
        };
        if !self.is_zero() && !other.is_zero() && self.parity != other.parity {
            return Err(Error::Inhomogeneous(format!(
                "sum of operators of parity {} and {}",
                self.parity, other.parity
            )));
        }
        let rhs = other.terms.iter().map(|(k, c)| {
            let c = if negate { -c } else { c.clone() };
            (*k, c)
        });
        SuperPsiDO::new(
            self.terms.iter().map(|(k, c)| (*k, c.clone())).chain(rhs),
            max_floor(self.floor, other.floor),
            parity,
        )
    }

    pub fn add(&self, other: &SuperPsiDO) -> Result<SuperPsiDO> {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &SuperPsiDO) -> Result<SuperPsiDO> {
        self.combine(other, true)
    }

    pub fn scale(&self, c: &Rational) -> SuperPsiDO {
        let mut out = self.clone();
        out.terms = self
            .terms
            .iter()
            .map(|(k, a)| (*k, a.scale(c)))
            .filter(|(_, a)| !a.is_zero())
            .collect();
        out
    }

    pub fn neg(&self) -> SuperPsiDO {
        self.scale(&-Rational::one())
    }

    /// Coefficientwise map; `f` must preserve parity.
    pub fn map_coeffs(&self, f: impl Fn(&SuperDiffPoly) -> SuperDiffPoly) -> Result<SuperPsiDO> {
        SuperPsiDO::new(
            self.terms.iter().map(|(k, a)| (*k, f(a))),
            self.floor,
            self.parity,
        )
    }

    pub fn achievable_floor(a: &SuperPsiDO, b: &SuperPsiDO) -> Option<i64> {
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

    /// `self ∘ rhs`, exact for powers `>= floor` (complete when `self` is a
    /// complete differential operator and `rhs` is complete).
    pub fn compose(&self, rhs: &SuperPsiDO, floor: i64) -> Result<SuperPsiDO> {
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
        let parity = self.parity + rhs.parity;
        let out_floor = if finite { None } else { Some(floor) };
        let (Some(_), Some(_)) = (self.order(), rhs.order()) else {
            let unbounded = self.upper_bound().is_none() || rhs.upper_bound().is_none();
            return Ok(SuperPsiDO {
                terms: BTreeMap::new(),
                floor: if unbounded { None } else { out_floor },
                parity,
            });
        };
        let lo = if finite {
            rhs.min_power().expect("nonempty")
        } else {
            floor
        };
        let ks: Vec<i64> = self.terms.keys().copied().collect();
        let rhs_terms: Vec<(i64, &SuperDiffPoly)> = rhs.terms().collect();
        let partials = exec::map(&rhs_terms, |&(l, b)| {
            let ex = expansions(b, &ks, lo - l);
            let mut acc: BTreeMap<i64, SuperDiffPoly> = BTreeMap::new();
            for (k, a) in &self.terms {
                let Some(e) = ex.get(k) else { continue };
                for (m, c) in e {
                    let p = m + l;
                    if p >= lo {
                        *acc.entry(p).or_default() += a * c;
                    }
                }
            }
            acc
        });
        let mut total: BTreeMap<i64, SuperDiffPoly> = BTreeMap::new();
        for part in partials {
            for (p, c) in part {
                *total.entry(p).or_default() += c;
            }
        }
        SuperPsiDO::new(total, out_floor, parity)
    }

    pub fn proj_plus(&self) -> SuperPsiDO {
        SuperPsiDO {
            terms: self
                .terms
                .range(0..)
                .map(|(k, c)| (*k, c.clone()))
                .collect(),
            floor: match self.floor {
                Some(f) if f > 0 => Some(f),
                _ => None,
            },
            parity: self.parity,
        }
    }

    pub fn proj_minus(&self) -> SuperPsiDO {
        SuperPsiDO {
            terms: self
                .terms
                .range(..0)
                .map(|(k, c)| (*k, c.clone()))
                .collect(),
            floor: self.floor,
            parity: self.parity,
        }
    }

    /// Coefficient of `D^{-1}`.
    pub fn residue(&self) -> Result<SuperDiffPoly> {
        match self.floor {
            Some(f) if f > -1 => Err(Error::ResidueUndetermined { floor: f }),
            _ => Ok(self.coeff(-1)),
        }
    }

    /// `Str A = ∫_B res A`; its parity is `|A|`.
    pub fn str_trace(&self) -> Result<SuperFunctional> {
        self.residue().map(SuperFunctional::new)
    }

    pub fn agrees_with(&self, other: &SuperPsiDO) -> bool {
        self.mismatch(other).is_none()
    }

    pub fn mismatch(&self, other: &SuperPsiDO) -> Option<i64> {
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

    pub fn diff_report(&self, other: &SuperPsiDO) -> Option<String> {
        self.mismatch(other)?;
        let floor = max_floor(self.floor, other.floor);
        let keys: std::collections::BTreeSet<i64> = self
            .terms
            .keys()
            .chain(other.terms.keys())
            .copied()
            .collect();
        let mut lines = Vec::new();
        for k in keys.into_iter().rev() {
            if floor.is_some_and(|f| k < f) {
                continue;
            }
            let (l, r) = (self.coeff(k), other.coeff(k));
            if l == r {
                continue;
            }
            for (m, c) in (&l - &r).terms() {
                lines.push(format!(
                    "D^{k}: {m}: lhs {} rhs {} (lhs - rhs = {})",
                    rational::to_text(&l.coefficient(m)),
                    rational::to_text(&r.coefficient(m)),
                    rational::to_text(c)
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
            .map(|(k, c)| format!("({c})·D^{k}"))
            .collect();
        if let Some(f) = self.floor {
            parts.push(format!("O(D^{})", f - 1));
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
            "parity": self.parity.bit(),
            "terms": self.terms.iter().rev().map(|(k, c)| json!({
                "power": k,
                "parity": coeff_parity(c).bit(),
                "coeff": c.to_json(),
            })).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for SuperPsiDO {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::susy::ring::SuperGen;

    fn phi(i: u32, k: u32) -> SuperDiffPoly {
        SuperDiffPoly::var(SuperGen::phi(i).var(k))
    }

    #[test]
    fn leibniz_examples() {
        let dphi = SuperPsiDO::d()
            .compose(&SuperPsiDO::coeff_op(phi(1, 0)).unwrap(), 0)
            .unwrap();
        let want = SuperPsiDO::from_terms([(0, phi(1, 1)), (1, -phi(1, 0))], None).unwrap();
        assert_eq!(dphi, want);
        assert_eq!(
            SuperPsiDO::d().compose(&SuperPsiDO::d(), 0).unwrap(),
            SuperPsiDO::d_pow(2)
        );
    }

    #[test]
    fn inverse_is_two_sided() {
        for floor in [-1, -4, -7] {
            let a = SuperPsiDO::d_pow(-1)
                .compose(&SuperPsiDO::d(), floor)
                .unwrap();
            assert!(a.agrees_with(&SuperPsiDO::one()));
            let b = SuperPsiDO::d()
                .compose(&SuperPsiDO::d_pow(-1), floor)
                .unwrap();
            assert!(b.agrees_with(&SuperPsiDO::one()));
        }
        let f = SuperPsiDO::coeff_op(phi(1, 0)).unwrap();
        let inv_f = SuperPsiDO::d_pow(-1).compose(&f, -6).unwrap();
        let back = SuperPsiDO::d().compose(&inv_f, -5).unwrap();
        assert!(back.agrees_with(&f.truncate(-5)), "{back}");
    }

    #[test]
    fn d_squared_acts_as_derivative() {
        let f = &phi(1, 0) * &phi(2, 1);
        let lhs = SuperPsiDO::d_pow(2)
            .compose(&SuperPsiDO::coeff_op(f.clone()).unwrap(), 0)
            .unwrap();
        let rhs =
            SuperPsiDO::from_terms([(0, f.total_derivative()), (2, f.clone())], None).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn residue_examples() {
        let a = SuperPsiDO::monomial(phi(1, 0), -1).unwrap();
        assert_eq!(a.residue().unwrap(), phi(1, 0));
        let b = SuperPsiDO::d_pow(2)
            .add(&SuperPsiDO::coeff_op(SuperDiffPoly::gen(SuperGen::u(2))).unwrap())
            .unwrap();
        assert!(b.residue().unwrap().is_zero());
        assert!(SuperPsiDO::d_pow(-1).truncate(0).residue().is_err());
    }

    #[test]
    fn inhomogeneous_rejected() {
        let mixed = &phi(1, 0) + &SuperDiffPoly::one();
        assert!(SuperPsiDO::coeff_op(mixed).is_err());
        let bad = SuperPsiDO::from_terms([(0, phi(1, 0)), (1, phi(1, 0))], None);
        assert!(bad.is_err());
    }
}
