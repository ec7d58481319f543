use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::{DerivVar, Generator};
use crate::rational::{self, Rational};

/// A power product of jet coordinates, stored sorted by variable with
/// positive exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(DerivVar, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: DerivVar) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn from_factors(factors: impl IntoIterator<Item = (DerivVar, u32)>) -> Self {
        let mut map: BTreeMap<DerivVar, u32> = BTreeMap::new();
        for (v, e) in factors {
            if e > 0 {
                *map.entry(v).or_insert(0) += e;
            }
        }
        Monomial(map.into_iter().collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn factors(&self) -> &[(DerivVar, u32)] {
        &self.0
    }

    pub fn exponent(&self, v: &DerivVar) -> u32 {
        self.0
            .binary_search_by(|(w, _)| w.cmp(v))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// Removes one power of `v`; returns the old exponent and the quotient.
    fn divide_var(&self, v: &DerivVar) -> Option<(u32, Monomial)> {
        let i = self.0.binary_search_by(|(w, _)| w.cmp(v)).ok()?;
        let e = self.0[i].1;
        let mut out = self.0.clone();
        if e == 1 {
            out.remove(i);
        } else {
            out[i].1 -= 1;
        }
        Some((e, Monomial(out)))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Graded lexicographic: total degree first, then the sorted factor list.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (n, (v, e)) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, "*")?;
            }
            write!(f, "{v}")?;
            if *e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// An element of the differential polynomial ring, in canonical form: a sum of
/// distinct monomials with nonzero exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DiffPoly {
    terms: BTreeMap<Monomial, Rational>,
}

impl DiffPoly {
    pub fn zero() -> Self {
        DiffPoly::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn int(n: i64) -> Self {
        Self::constant(rational::int(n))
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut p = DiffPoly::zero();
        p.add_term(m, c);
        p
    }

    pub fn var(v: DerivVar) -> Self {
        Self::term(Rational::one(), Monomial::var(v))
    }

    pub fn gen(g: Generator) -> Self {
        Self::var(g.var(0))
    }

    /// Builds a polynomial from arbitrary (possibly repeated or zero) terms.
    pub fn from_terms(terms: impl IntoIterator<Item = (Rational, Monomial)>) -> Self {
        let mut p = DiffPoly::zero();
        for (c, m) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Monomial::one())
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    pub fn generators(&self) -> BTreeSet<Generator> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(v, _)| v.gen))
            .collect()
    }

    pub fn vars(&self) -> BTreeSet<DerivVar> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(v, _)| *v))
            .collect()
    }

    /// Highest derivative order of `g` present, if `g` occurs.
    pub fn max_order(&self, g: &Generator) -> Option<u32> {
        self.vars()
            .into_iter()
            .filter(|v| v.gen == *g)
            .map(|v| v.order)
            .max()
    }

    pub fn scale(&self, c: &Rational) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero();
        }
        DiffPoly {
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, c: &Rational, m: &Monomial) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero();
        }
        DiffPoly::from_terms(self.terms.iter().map(|(n, a)| (a * c, n.mul(m))))
    }

    pub fn pow(&self, e: u32) -> DiffPoly {
        let mut out = DiffPoly::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// The total derivative `∂`, a derivation raising one jet order per factor.
    pub fn total_derivative(&self) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            for (v, e) in &m.0 {
                let (_, rest) = m.divide_var(v).expect("factor present");
                let next = rest.mul(&Monomial::var(v.derivative()));
                out.add_term(next, c * rational::int(*e as i64));
            }
        }
        out
    }

    pub fn derivative_n(&self, k: u32) -> DiffPoly {
        let mut p = self.clone();
        for _ in 0..k {
            p = p.total_derivative();
        }
        p
    }

    /// Successive derivatives `[p, p', ..., p^(k)]`.
    pub fn derivatives_up_to(&self, k: u32) -> Vec<DiffPoly> {
        let mut out = Vec::with_capacity(k as usize + 1);
        out.push(self.clone());
        for j in 0..k as usize {
            let next = out[j].total_derivative();
            out.push(next);
        }
        out
    }

    /// Formal partial derivative with respect to one jet coordinate.
    pub fn partial(&self, v: &DerivVar) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            if let Some((e, rest)) = m.divide_var(v) {
                out.add_term(rest, c * rational::int(e as i64));
            }
        }
        out
    }

    /// Euler operator `Σ_j (-∂)^j ∂p/∂g^(j)`.
    pub fn variational_derivative(&self, g: &Generator) -> DiffPoly {
        let Some(top) = self.max_order(g) else {
            return DiffPoly::zero();
        };
        let mut out = DiffPoly::zero();
        for j in 0..=top {
            let mut term = self.partial(&g.var(j)).derivative_n(j);
            if j % 2 == 1 {
                term = -term;
            }
            out += term;
        }
        out
    }

    /// Replaces every generator `g` for which `image` returns a polynomial by
    /// that polynomial, mapping `g^(k)` to the `k`-th total derivative of the
    /// image. Other generators are left untouched.
    pub fn substitute<F>(&self, image: F) -> DiffPoly
    where
        F: Fn(&Generator) -> Option<DiffPoly>,
    {
        let mut cache: HashMap<DerivVar, Option<DiffPoly>> = HashMap::new();
        let mut lookup = |v: &DerivVar| -> Option<DiffPoly> {
            cache
                .entry(*v)
                .or_insert_with(|| image(&v.gen).map(|p| p.derivative_n(v.order)))
                .clone()
        };
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            let mut kept = Vec::new();
            let mut acc = DiffPoly::one();
            for (v, e) in &m.0 {
                match lookup(v) {
                    Some(p) => acc = &acc * &p.pow(*e),
                    None => kept.push((*v, *e)),
                }
            }
            out += acc.mul_monomial(c, &Monomial(kept));
        }
        out
    }

    /// Keeps the terms for which `keep` holds.
    pub fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> DiffPoly {
        DiffPoly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn to_text(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                if m.is_one() {
                    rational::to_text(c)
                } else if c.is_one() {
                    m.to_string()
                } else if rational::is_minus_one(c) {
                    format!("-{m}")
                } else {
                    format!("{}*{m}", rational::to_text(c))
                }
            })
            .collect();
        parts.join(" + ")
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(m, c)| {
                    json!({
                        "coeff": rational::to_json_string(c),
                        "vars": m.0.iter().map(|(v, e)| json!({
                            "gen": v.gen.name(),
                            "order": v.order,
                            "pow": e,
                        })).collect::<Vec<_>>(),
                    })
                })
                .collect(),
        )
    }

    pub fn from_json(value: &Value) -> Option<DiffPoly> {
        let mut p = DiffPoly::zero();
        for t in value.as_array()? {
            let c = rational::parse(t.get("coeff")?.as_str()?)?;
            let mut factors = Vec::new();
            for v in t.get("vars")?.as_array()? {
                let g = Generator::parse(v.get("gen")?.as_str()?)?;
                let order = u32::try_from(v.get("order")?.as_u64()?).ok()?;
                let pow = u32::try_from(v.get("pow")?.as_u64()?).ok()?;
                factors.push((g.var(order), pow));
            }
            p.add_term(Monomial::from_factors(factors), c);
        }
        Some(p)
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl AddAssign<&DiffPoly> for DiffPoly {
    fn add_assign(&mut self, rhs: &DiffPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl AddAssign<DiffPoly> for DiffPoly {
    fn add_assign(&mut self, rhs: DiffPoly) {
        if self.terms.len() < rhs.terms.len() {
            let lhs = std::mem::replace(self, rhs);
            *self += &lhs;
            return;
        }
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
    }
}

impl SubAssign<&DiffPoly> for DiffPoly {
    fn sub_assign(&mut self, rhs: &DiffPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Add for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for DiffPoly {
    type Output = DiffPoly;
    fn add(mut self, rhs: DiffPoly) -> DiffPoly {
        self += rhs;
        self
    }
}

impl Sub for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for DiffPoly {
    type Output = DiffPoly;
    fn sub(mut self, rhs: DiffPoly) -> DiffPoly {
        self -= &rhs;
        self
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        DiffPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }
}

impl Neg for DiffPoly {
    type Output = DiffPoly;
    fn neg(mut self) -> DiffPoly {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Mul for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        if self.is_zero() || rhs.is_zero() {
            return DiffPoly::zero();
        }
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                *acc.entry(m1.mul(m2)).or_insert_with(Rational::zero) += c1 * c2;
            }
        }
        DiffPoly {
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }
}

impl Mul for DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: DiffPoly) -> DiffPoly {
        &self * &rhs
    }
}
