//! Exact rational arithmetic for rates, prices, and markups.
//!
//! Rationals are reduced fractions over 128-bit integers. Display rounding
//! (significant digits) is presentation-only and never feeds back into a
//! computation.

use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// A reduced fraction of integers. `Ratio` normalizes on construction.
pub type Rational = Ratio<i128>;

/// Parses `"a/b"`, `"a"`, or a decimal such as `"0.05"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = |msg: &str| Error::ScenarioParse {
        line: 0,
        col: 0,
        msg: format!("invalid rational '{s}': {msg}"),
    };
    if let Some((num, den)) = s.split_once('/') {
        let n: i128 = num.trim().parse().map_err(|_| bad("numerator"))?;
        let d: i128 = den.trim().parse().map_err(|_| bad("denominator"))?;
        if d == 0 {
            return Err(bad("zero denominator"));
        }
        Ok(Ratio::new(n, d))
    } else if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let i: i128 = if int.is_empty() || int == "-" {
            0
        } else {
            int.parse().map_err(|_| bad("integer part"))?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad("fractional part"));
        }
        let scale = 10i128
            .checked_pow(frac.len() as u32)
            .ok_or_else(|| bad("fractional part too long"))?;
        let f: i128 = frac.parse().map_err(|_| bad("fractional part"))?;
        let f = if neg { -f } else { f };
        Ok(Ratio::new(i * scale + f, scale))
    } else {
        let n: i128 = s.trim().parse().map_err(|_| bad("integer"))?;
        Ok(Ratio::from_integer(n))
    }
}

/// Rounds to the nearest integer, ties away from zero. The single rounding
/// rule of the engine.
pub fn round_half_away(r: Rational) -> i128 {
    if r.is_negative() {
        return -round_half_away(-r);
    }
    let floor = r.floor().to_integer();
    let frac = r - Rational::from_integer(floor);
    if frac * Rational::from_integer(2) >= Rational::from_integer(1) {
        floor + 1
    } else {
        floor
    }
}

/// Rounds a rational amount of minor units to an `i64`, half away from zero.
pub fn round_to_minor(r: Rational) -> Result<i64> {
    let v = round_half_away(r);
    i64::try_from(v).map_err(|_| Error::AmountOverflow)
}

/// Formats with `sig` significant digits, e.g. `2.45` for 659/269 at 3.
/// Exactness is preserved elsewhere; this is for human-facing reports.
pub fn display_sig(r: Rational, sig: u32) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let mut abs = r.abs();
    // scale into [10^(sig-1), 10^sig) and round to an integer mantissa
    let mut exp10: i32 = 0;
    let ten = Rational::from_integer(10);
    let lower = Rational::from_integer(10i128.pow(sig - 1));
    let upper = Rational::from_integer(10i128.pow(sig));
    while abs < lower {
        abs *= ten;
        exp10 -= 1;
    }
    while abs >= upper {
        abs /= ten;
        exp10 += 1;
    }
    let mut mantissa = round_half_away(abs);
    if Rational::from_integer(mantissa) >= upper {
        mantissa /= 10;
        exp10 += 1;
    }
    let digits = mantissa.to_string();
    let point = digits.len() as i32 + exp10; // position of the decimal point
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if point <= 0 {
        out.push_str("0.");
        for _ in 0..-point {
            out.push('0');
        }
        out.push_str(digits.trim_end_matches('0'));
        if out.ends_with('.') {
            out.pop();
        }
    } else if (point as usize) >= digits.len() {
        out.push_str(&digits);
        for _ in 0..(point as usize - digits.len()) {
            out.push('0');
        }
    } else {
        out.push_str(&digits[..point as usize]);
        let tail = digits[point as usize..].trim_end_matches('0');
        if !tail.is_empty() {
            out.push('.');
            out.push_str(tail);
        }
    }
    out
}

/// Year fraction between two dates under the ACT/360 convention, as an
/// exact rational: actual days elapsed over 360.
pub fn act360(from: chrono::NaiveDate, to: chrono::NaiveDate) -> Rational {
    let days = (to - from).num_days() as i128;
    Rational::new(days, 360)
}

/// Canonical `numer/denom` form used in machine reports.
pub fn display_fraction(r: Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_decimals_integers() {
        assert_eq!(parse_rational("1/10").unwrap(), Ratio::new(1, 10));
        assert_eq!(parse_rational("0.05").unwrap(), Ratio::new(1, 20));
        assert_eq!(parse_rational("-3/4").unwrap(), Ratio::new(-3, 4));
        assert_eq!(parse_rational("2").unwrap(), Ratio::from_integer(2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(round_half_away(Ratio::new(5, 2)), 3); // 2.5 -> 3
        assert_eq!(round_half_away(Ratio::new(-5, 2)), -3); // -2.5 -> -3
        assert_eq!(round_half_away(Ratio::new(49, 100)), 0);
        assert_eq!(round_half_away(Ratio::new(3, 2)), 2);
        assert_eq!(round_half_away(Ratio::from_integer(7)), 7);
    }

    #[test]
    fn significant_digit_display() {
        assert_eq!(display_sig(Ratio::new(659, 269), 3), "2.45");
        assert_eq!(display_sig(Ratio::new(1, 10), 4), "0.1");
        assert_eq!(display_sig(Ratio::new(12345, 1), 3), "12300");
        assert_eq!(display_sig(Ratio::new(-1, 3), 3), "-0.333");
    }

    #[test]
    fn fraction_display_is_reduced() {
        assert_eq!(display_fraction(Ratio::new(110, 100) - Ratio::from_integer(1)), "1/10");
        assert_eq!(display_fraction(Ratio::from_integer(3)), "3");
    }
}
