use std::collections::BTreeMap;

use super::{DiffPoly, Family, Generator};
use crate::rational::Rational;
use crate::{Error, Result};

/// The set of generators a computation is allowed to mention: for each family,
/// the indices `1..=n`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RingContext {
    allowed: BTreeMap<Family, u32>,
}

impl RingContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, family: Family, count: u32) -> Self {
        self.allowed.insert(family, count);
        self
    }

    pub fn admits(&self, g: &Generator) -> bool {
        self.allowed.get(&g.family).is_some_and(|&n| g.index <= n)
    }

    pub fn check(&self, p: &DiffPoly) -> Result<()> {
        match p.generators().into_iter().find(|g| !self.admits(g)) {
            Some(g) => Err(Error::IncompatibleContext {
                generator: g.name(),
            }),
            None => Ok(()),
        }
    }

    pub fn add(&self, p: &DiffPoly, q: &DiffPoly) -> Result<DiffPoly> {
        self.check(p)?;
        self.check(q)?;
        Ok(p + q)
    }

    pub fn sub(&self, p: &DiffPoly, q: &DiffPoly) -> Result<DiffPoly> {
        self.check(p)?;
        self.check(q)?;
        Ok(p - q)
    }

    pub fn mul(&self, p: &DiffPoly, q: &DiffPoly) -> Result<DiffPoly> {
        self.check(p)?;
        self.check(q)?;
        Ok(p * q)
    }

    pub fn scale(&self, p: &DiffPoly, c: &Rational) -> Result<DiffPoly> {
        self.check(p)?;
        Ok(p.scale(c))
    }
}
