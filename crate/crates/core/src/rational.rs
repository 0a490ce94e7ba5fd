//! Exact rationals used for probabilities, rates, delays and durations.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Parses `p/q` or an integer literal. Negative values are rejected.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    let value = match text.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).ok()?;
            let d = BigInt::from_str(d.trim()).ok()?;
            if d.is_zero() {
                return None;
            }
            Rational::new(n, d)
        }
        None => Rational::from_integer(BigInt::from_str(text).ok()?),
    };
    if value.is_negative() {
        None
    } else {
        Some(value)
    }
}

/// Renders a rational as `n` or `n/d`, the inverse of [`parse_rational`].
pub fn fmt_rational(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        assert_eq!(parse_rational("3/6"), Some(ratio(1, 2)));
        assert_eq!(parse_rational("4"), Some(int(4)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("-1"), None);
        assert_eq!(fmt_rational(&ratio(6, 5)), "6/5");
        assert_eq!(fmt_rational(&int(2)), "2");
    }
}
