use std::fmt;

/// Generator families. The declaration order is the monomial order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    U,
    Phi,
    X,
    A,
    B,
    /// Auxiliary test field (probe functionals).
    Y,
    /// Auxiliary variation direction.
    V,
}

impl Family {
    pub fn prefix(self) -> &'static str {
        match self {
            Family::U => "u",
            Family::Phi => "phi",
            Family::X => "x",
            Family::A => "a",
            Family::B => "b",
            Family::Y => "y",
            Family::V => "v",
        }
    }

    pub fn from_prefix(s: &str) -> Option<Family> {
        Some(match s {
            "u" => Family::U,
            "phi" => Family::Phi,
            "x" => Family::X,
            "a" => Family::A,
            "b" => Family::B,
            "y" => Family::Y,
            "v" => Family::V,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Generator {
    pub family: Family,
    pub index: u32,
}

impl Generator {
    pub fn new(family: Family, index: u32) -> Self {
        assert!(index >= 1, "generator indices start at 1");
        Generator { family, index }
    }

    pub fn u(i: u32) -> Self {
        Self::new(Family::U, i)
    }
    pub fn phi(i: u32) -> Self {
        Self::new(Family::Phi, i)
    }
    pub fn x(i: u32) -> Self {
        Self::new(Family::X, i)
    }
    pub fn a(i: u32) -> Self {
        Self::new(Family::A, i)
    }
    pub fn b(i: u32) -> Self {
        Self::new(Family::B, i)
    }

    pub fn name(&self) -> String {
        format!("{}{}", self.family.prefix(), self.index)
    }

    /// Parses names such as `u3` or `phi12`.
    pub fn parse(s: &str) -> Option<Self> {
        let split = s.find(|c: char| c.is_ascii_digit())?;
        let family = Family::from_prefix(&s[..split])?;
        let index: u32 = s[split..].parse().ok()?;
        (index >= 1).then(|| Generator::new(family, index))
    }

    pub fn var(self, order: u32) -> DerivVar {
        DerivVar { gen: self, order }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family.prefix(), self.index)
    }
}

/// The jet coordinate `gen^(order)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DerivVar {
    pub gen: Generator,
    pub order: u32,
}

impl DerivVar {
    pub fn new(gen: Generator, order: u32) -> Self {
        DerivVar { gen, order }
    }

    pub fn derivative(self) -> Self {
        DerivVar {
            gen: self.gen,
            order: self.order + 1,
        }
    }
}

impl fmt::Display for DerivVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.order == 0 {
            write!(f, "{}", self.gen)
        } else {
            write!(f, "{}^({})", self.gen, self.order)
        }
    }
}
