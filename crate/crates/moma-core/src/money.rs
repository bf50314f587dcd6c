//! Exact monetary amounts.
//!
//! All value in the engine is an integer number of minor units (cents)
//! tagged with a three-letter currency code. Arithmetic is checked; there is
//! no floating point anywhere near a balance.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Three-letter uppercase currency code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Currency([u8; 3]);

impl Currency {
    pub const EUR: Currency = Currency(*b"EUR");

    pub fn new(code: &str) -> Result<Self> {
        let bytes = code.as_bytes();
        if bytes.len() != 3 || !bytes.iter().all(|b| b.is_ascii_uppercase()) {
            return Err(Error::CurrencyMismatch(
                code.to_string(),
                "a three-letter uppercase code".to_string(),
            ));
        }
        Ok(Currency([bytes[0], bytes[1], bytes[2]]))
    }

    pub fn as_str(&self) -> &str {
        // constructor guarantees ASCII
        std::str::from_utf8(&self.0).unwrap()
    }
}

impl fmt::Display for Currency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl TryFrom<String> for Currency {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Currency::new(&s)
    }
}

impl From<Currency> for String {
    fn from(c: Currency) -> String {
        c.as_str().to_string()
    }
}

/// An exact amount of money in minor units.
///
/// The amount is signed so balances and balance-sheet aggregates can be
/// negative; journal entries reject non-positive amounts at posting time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Money {
    /// Amount in minor units (cents).
    pub amount: i64,
    pub currency: Currency,
}

impl Money {
    pub fn new(amount: i64, currency: Currency) -> Self {
        Money { amount, currency }
    }

    /// Euros are the engine default; handy in tests and scenarios.
    pub fn eur(amount: i64) -> Self {
        Money::new(amount, Currency::EUR)
    }

    pub fn is_zero(&self) -> bool {
        self.amount == 0
    }

    fn require_same_currency(&self, other: &Money) -> Result<()> {
        if self.currency != other.currency {
            return Err(Error::CurrencyMismatch(
                self.currency.to_string(),
                other.currency.to_string(),
            ));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Money) -> Result<Money> {
        self.require_same_currency(other)?;
        let amount = self
            .amount
            .checked_add(other.amount)
            .ok_or(Error::AmountOverflow)?;
        Ok(Money::new(amount, self.currency))
    }

    pub fn checked_sub(&self, other: &Money) -> Result<Money> {
        self.require_same_currency(other)?;
        let amount = self
            .amount
            .checked_sub(other.amount)
            .ok_or(Error::AmountOverflow)?;
        Ok(Money::new(amount, self.currency))
    }

    /// Renders `major.minor CUR`, e.g. `100000.00 EUR`. Human output only;
    /// machine formats carry minor-unit integers.
    pub fn display_major(&self) -> String {
        let sign = if self.amount < 0 { "-" } else { "" };
        let abs = self.amount.unsigned_abs();
        format!("{sign}{}.{:02} {}", abs / 100, abs % 100, self.currency)
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_major())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn currency_rejects_bad_codes() {
        assert!(Currency::new("EURO").is_err());
        assert!(Currency::new("eu").is_err());
        assert!(Currency::new("eur").is_err());
        assert_eq!(Currency::new("USD").unwrap().as_str(), "USD");
    }

    #[test]
    fn arithmetic_requires_matching_currency() {
        let a = Money::eur(100);
        let b = Money::new(100, Currency::new("USD").unwrap());
        assert!(matches!(a.checked_add(&b), Err(Error::CurrencyMismatch(_, _))));
        assert_eq!(a.checked_add(&Money::eur(50)).unwrap().amount, 150);
    }

    #[test]
    fn overflow_is_an_error_not_a_wrap() {
        let a = Money::eur(i64::MAX);
        assert!(matches!(a.checked_add(&Money::eur(1)), Err(Error::AmountOverflow)));
    }

    #[test]
    fn major_display() {
        assert_eq!(Money::eur(10_000_000).display_major(), "100000.00 EUR");
        assert_eq!(Money::eur(-1).display_major(), "-0.01 EUR");
        assert_eq!(Money::eur(7).display_major(), "0.07 EUR");
    }
}
