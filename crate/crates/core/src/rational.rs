//! Exact rational helpers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// `(-1)^k` as a rational.
pub fn sign_pow(k: i64) -> Rational {
    if k.rem_euclid(2) == 0 {
        Rational::one()
    } else {
        -Rational::one()
    }
}

/// Generalized binomial coefficient `k(k-1)...(k-j+1) / j!`, valid for negative `k`.
pub fn binomial(k: i64, j: u32) -> Rational {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for t in 0..j as i64 {
        num *= BigInt::from(k - t);
        den *= BigInt::from(t + 1);
    }
    Rational::new(num, den)
}

/// `p/q` form used in JSON (the denominator is always written).
pub fn to_json_string(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Text form: integers without denominator.
pub fn to_text(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                None
            } else {
                Some(Rational::new(p, q))
            }
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

pub(crate) fn is_minus_one(q: &Rational) -> bool {
    q.is_negative() && q.is_integer() && q.numer().abs().is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_negative_top() {
        // C(-1, j) = (-1)^j
        for j in 0..6 {
            assert_eq!(binomial(-1, j), sign_pow(j as i64));
        }
        assert_eq!(binomial(-2, 3), int(-4));
        assert_eq!(binomial(3, 5), int(0));
        assert_eq!(binomial(5, 2), int(10));
    }

    #[test]
    fn formatting() {
        assert_eq!(to_json_string(&int(2)), "2/1");
        assert_eq!(to_text(&frac(-3, 6)), "-1/2");
        assert_eq!(parse("-1/2"), Some(frac(-1, 2)));
        assert_eq!(parse("7"), Some(int(7)));
        assert_eq!(parse("1/0"), None);
    }
}
