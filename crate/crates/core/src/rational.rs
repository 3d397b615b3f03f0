//! Exact rational arithmetic: parsing, canonical rendering, and a fixed
//! six-place decimal form for display.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational. Every quantity in this crate is one.
pub type Rational = num_rational::BigRational;

/// Shorthand constructor for rational literals in code and tests.
///
/// Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Integer as a rational.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational literal {0:?}: expected an integer or \"p/q\" with positive integer q")]
pub struct ParseRationalError(pub String);

/// Parses `"p"` or `"p/q"`. The denominator must be a positive integer;
/// the numerator may carry a sign.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let trimmed = text.trim();
    let (num_part, den_part) = match trimmed.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (trimmed, None),
    };
    let numer: BigInt = num_part.parse().map_err(|_| err())?;
    let denom: BigInt = match den_part {
        Some(d) => d.parse().map_err(|_| err())?,
        None => BigInt::one(),
    };
    if denom <= BigInt::zero() {
        return Err(err());
    }
    Ok(Rational::new(numer, denom))
}

/// Canonical lowest-terms rendering: `"3/4"`, whole numbers as `"3"`.
pub fn canonical(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering to exactly six places, rounding half away from zero.
/// Display-only: never feeds back into computation.
pub fn decimal6(r: &Rational) -> String {
    let scale = BigInt::from(1_000_000);
    let numer = r.numer() * &scale;
    let denom = r.denom().clone(); // always positive
    let negative = numer.is_negative();
    let abs = numer.abs();
    // nearest integer to abs/denom, ties rounded up
    let scaled = (abs * 2u8 + &denom) / (denom * 2u8);
    let int_part = &scaled / &scale;
    let frac_part = &scaled % &scale;
    let sign = if negative && !scaled.is_zero() {
        "-"
    } else {
        ""
    };
    format!("{sign}{int_part}.{frac_part:06}")
}

/// Both renderings side by side, as used in reports.
pub fn display_pair(r: &Rational) -> String {
    format!("{} ({})", canonical(r), decimal6(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse_rational("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("-3/4").unwrap(), rat(-3, 4));
        assert_eq!(parse_rational("7").unwrap(), rat_int(7));
        assert_eq!(parse_rational(" 6/8 ").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("0").unwrap(), Rational::zero());
    }

    #[test]
    fn rejects_bad_literals() {
        for bad in ["", "1.5", "3/0", "3/-4", "a/b", "1/2/3", "--3"] {
            assert!(parse_rational(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn canonical_is_lowest_terms() {
        assert_eq!(canonical(&rat(6, 8)), "3/4");
        assert_eq!(canonical(&rat(14, 2)), "7");
        assert_eq!(canonical(&rat(-6, 8)), "-3/4");
        assert_eq!(canonical(&Rational::zero()), "0");
    }

    #[test]
    fn decimal_rounds_half_away_from_zero() {
        assert_eq!(decimal6(&rat(3, 4)), "0.750000");
        assert_eq!(decimal6(&rat(1, 3)), "0.333333");
        assert_eq!(decimal6(&rat(2, 3)), "0.666667");
        assert_eq!(decimal6(&rat(-1, 3)), "-0.333333");
        assert_eq!(decimal6(&rat(1, 2_000_000)), "0.000001");
        assert_eq!(decimal6(&rat(-1, 2_000_000)), "-0.000001");
        assert_eq!(decimal6(&rat_int(7)), "7.000000");
    }

    #[test]
    fn display_pair_shows_both_forms() {
        assert_eq!(display_pair(&rat(3, 2)), "3/2 (1.500000)");
    }
}
