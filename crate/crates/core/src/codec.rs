//! Alias identities and their street-address rendering.
//!
//! An alias carries 20 decimal digits per ZIP: a 3-digit year code, a
//! 16-digit random payload and a Luhn check digit over the first 19. The
//! street number holds `year_code ‖ payload[0..7]`, the unit number holds
//! `payload[7..16] ‖ check`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::postal::{AddressError, PostalAddress, RawAddress, StateCode, Zip, MAX_FIELD_LEN};

pub const YEAR_DIGITS: usize = 3;
pub const PAYLOAD_DIGITS: usize = 16;
pub const CHECK_DIGITS: usize = 1;
pub const TOTAL_DIGITS: usize = YEAR_DIGITS + PAYLOAD_DIGITS + CHECK_DIGITS;
/// Digits printed in each of the street number and the unit number.
pub const HALF_DIGITS: usize = TOTAL_DIGITS / 2;

/// Exclusive upper bound on payload values.
pub const PAYLOAD_SPACE: u64 = 10_000_000_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("checksum input must be a nonempty string of decimal digits")]
    NonDigitInput,
    #[error("payload must be exactly {PAYLOAD_DIGITS} decimal digits, got {0:?}")]
    BadPayloadLength(String),
    #[error("year code {0} is out of range")]
    BadYearCode(u16),
    #[error("alias digits must be exactly {TOTAL_DIGITS} decimal digits")]
    BadDigitCount,
    #[error("check digit mismatch: expected {expected}, found {found}")]
    ChecksumMismatch { expected: u8, found: u8 },
    #[error(transparent)]
    Address(#[from] AddressError),
    #[error("template: {0}")]
    Template(String),
    #[error("malformed alias handle {0:?}")]
    BadHandle(String),
}

/// Luhn mod-10 check digit for a string of decimal digits.
pub fn checksum(digits: &str) -> Result<u8, CodecError> {
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(CodecError::NonDigitInput);
    }
    // The check digit will sit to the right, so the rightmost input digit is doubled.
    let sum: u32 = digits
        .bytes()
        .rev()
        .enumerate()
        .map(|(i, b)| {
            let d = u32::from(b - b'0');
            if i % 2 == 0 {
                let dd = d * 2;
                if dd > 9 {
                    dd - 9
                } else {
                    dd
                }
            } else {
                d
            }
        })
        .sum();
    Ok(((10 - sum % 10) % 10) as u8)
}

/// True when the last digit of `digits` is the Luhn check digit of the rest.
pub fn verify(digits: &str) -> Result<bool, CodecError> {
    if digits.len() < 2 {
        return Err(CodecError::NonDigitInput);
    }
    let (body, check) = digits.split_at(digits.len() - 1);
    let expected = checksum(body)?;
    let found = check.as_bytes()[0];
    if !found.is_ascii_digit() {
        return Err(CodecError::NonDigitInput);
    }
    Ok(expected == found - b'0')
}

/// Sizing of the per-ZIP alias namespace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamespaceConfig {
    pub digits_total: u32,
    pub digits_year: u32,
    pub digits_check: u32,
    pub digits_payload: u32,
}

impl Default for NamespaceConfig {
    fn default() -> Self {
        NamespaceConfig {
            digits_total: TOTAL_DIGITS as u32,
            digits_year: YEAR_DIGITS as u32,
            digits_check: CHECK_DIGITS as u32,
            digits_payload: PAYLOAD_DIGITS as u32,
        }
    }
}

impl NamespaceConfig {
    pub fn is_consistent(&self) -> bool {
        self.digits_year + self.digits_check + self.digits_payload == self.digits_total
            && self.digits_total <= 38
    }

    /// Fresh aliases available per ZIP per year code.
    pub fn capacity_per_zip_year(&self) -> u128 {
        10u128.pow(self.digits_payload)
    }

    /// Every digit string the street and unit numbers can carry for one ZIP.
    pub fn total_per_zip(&self) -> u128 {
        10u128.pow(self.digits_total)
    }
}

/// Numeric identity of one alias.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AliasCode {
    zip: Zip,
    year_code: u16,
    payload: u64,
    check_digit: u8,
}

/// `year mod 1000`, always non-negative.
pub fn year_code_for(year: i32) -> u16 {
    year.rem_euclid(1000) as u16
}

impl AliasCode {
    pub fn from_parts(zip: Zip, year_code: u16, payload: u64) -> Result<Self, CodecError> {
        if year_code >= 1000 {
            return Err(CodecError::BadYearCode(year_code));
        }
        if payload >= PAYLOAD_SPACE {
            return Err(CodecError::BadPayloadLength(payload.to_string()));
        }
        let body = format!("{year_code:03}{payload:016}");
        let check_digit = checksum(&body)?;
        Ok(AliasCode {
            zip,
            year_code,
            payload,
            check_digit,
        })
    }

    /// Decode 20 digits, rejecting a wrong check digit.
    pub fn from_digits(zip: Zip, digits: &str) -> Result<Self, CodecError> {
        if digits.len() != TOTAL_DIGITS || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(CodecError::BadDigitCount);
        }
        let year_code: u16 = digits[..YEAR_DIGITS].parse().expect("digits");
        let payload: u64 = digits[YEAR_DIGITS..YEAR_DIGITS + PAYLOAD_DIGITS]
            .parse()
            .expect("digits");
        let found = digits.as_bytes()[TOTAL_DIGITS - 1] - b'0';
        let code = AliasCode::from_parts(zip, year_code, payload)?;
        if code.check_digit != found {
            return Err(CodecError::ChecksumMismatch {
                expected: code.check_digit,
                found,
            });
        }
        Ok(code)
    }

    pub fn zip(&self) -> Zip {
        self.zip
    }

    pub fn year_code(&self) -> u16 {
        self.year_code
    }

    pub fn payload(&self) -> u64 {
        self.payload
    }

    pub fn check_digit(&self) -> u8 {
        self.check_digit
    }

    /// The full 20-digit string.
    pub fn digits(&self) -> String {
        format!(
            "{:03}{:016}{}",
            self.year_code, self.payload, self.check_digit
        )
    }

    pub fn street_number(&self) -> String {
        self.digits()[..HALF_DIGITS].to_string()
    }

    pub fn unit_number(&self) -> String {
        self.digits()[HALF_DIGITS..].to_string()
    }
}

/// `ZIP-DIGITS`, e.g. `12345-02520934857348049866`. Uniqueness only holds
/// per ZIP, so the handle carries both.
impl fmt::Display for AliasCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.zip, self.digits())
    }
}

impl FromStr for AliasCode {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (zip, digits) = s
            .trim()
            .split_once('-')
            .ok_or_else(|| CodecError::BadHandle(s.to_string()))?;
        let zip = zip.parse().map_err(|_| CodecError::BadHandle(s.to_string()))?;
        AliasCode::from_digits(zip, digits)
    }
}

impl Serialize for AliasCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AliasCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Build a code from a calendar year and a 16-digit payload string.
pub fn make_alias_code(zip: Zip, year: i32, payload: &str) -> Result<AliasCode, CodecError> {
    if payload.len() != PAYLOAD_DIGITS || !payload.bytes().all(|b| b.is_ascii_digit()) {
        return Err(CodecError::BadPayloadLength(payload.to_string()));
    }
    AliasCode::from_parts(zip, year_code_for(year), payload.parse().expect("digits"))
}

/// Carrier-chosen text around the alias digits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AliasAddressTemplate {
    pub carrier_name: String,
    pub street_suffix: String,
    pub unit_prefix: String,
}

impl Default for AliasAddressTemplate {
    fn default() -> Self {
        AliasAddressTemplate {
            carrier_name: "ABC Alias".into(),
            street_suffix: "Alias Way".into(),
            unit_prefix: "Unit".into(),
        }
    }
}

impl AliasAddressTemplate {
    /// Every rendered field must fit the 30-character budget whatever the digits.
    pub fn check(&self) -> Result<(), CodecError> {
        let fits = |label: &str, len: usize| {
            if len > MAX_FIELD_LEN {
                Err(CodecError::Template(format!(
                    "{label} renders to {len} characters, limit is {MAX_FIELD_LEN}"
                )))
            } else {
                Ok(())
            }
        };
        let words = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ");
        if words(&self.carrier_name).is_empty()
            || words(&self.street_suffix).is_empty()
            || words(&self.unit_prefix).is_empty()
        {
            return Err(CodecError::Template("template strings must be nonempty".into()));
        }
        if self.street_suffix.bytes().any(|b| b.is_ascii_digit())
            || self.unit_prefix.bytes().any(|b| b.is_ascii_digit())
        {
            return Err(CodecError::Template("template strings must not contain digits".into()));
        }
        fits("name", words(&self.carrier_name).chars().count())?;
        fits("line1", HALF_DIGITS + 1 + words(&self.street_suffix).chars().count())?;
        fits("line2", words(&self.unit_prefix).chars().count() + 1 + HALF_DIGITS)
    }
}

/// Render an alias as a postal address in the customer's city/state and the code's ZIP.
pub fn render(
    code: &AliasCode,
    template: &AliasAddressTemplate,
    city: &str,
    state: StateCode,
) -> Result<PostalAddress, CodecError> {
    template.check()?;
    let line1 = format!("{} {}", code.street_number(), template.street_suffix);
    let line2 = format!("{} {}", template.unit_prefix, code.unit_number());
    let raw = RawAddress::new(
        &template.carrier_name,
        &line1,
        Some(&line2),
        city,
        state.as_str(),
        code.zip().as_str(),
    );
    Ok(crate::postal::normalize(&raw)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("address is not an alias address")]
    NotAnAlias,
    #[error("alias check digit mismatch: expected {expected}, found {found}")]
    ChecksumMismatch { expected: u8, found: u8 },
}

fn same_words(a: &str, b: &str) -> bool {
    a.split_whitespace()
        .map(str::to_ascii_uppercase)
        .eq(b.split_whitespace().map(str::to_ascii_uppercase))
}

fn split_number_suffix<'a>(line: &'a str, suffix: &str) -> Option<&'a str> {
    let (num, rest) = line.split_once(' ')?;
    same_words(rest, suffix).then_some(num)
}

fn split_prefix_number<'a>(line: &'a str, prefix: &str) -> Option<&'a str> {
    let (head, num) = line.rsplit_once(' ')?;
    same_words(head, prefix).then_some(num)
}

fn ten_digits(s: &str) -> bool {
    s.len() == HALF_DIGITS && s.bytes().all(|b| b.is_ascii_digit())
}

/// Recover the alias code from an address rendered with `template`.
///
/// Only line1/line2 decide the shape; the name line is not inspected so a
/// label printed with the customer's own name still resolves.
pub fn parse(addr: &PostalAddress, template: &AliasAddressTemplate) -> Result<AliasCode, ParseError> {
    let street = split_number_suffix(addr.line1(), &template.street_suffix)
        .filter(|n| ten_digits(n))
        .ok_or(ParseError::NotAnAlias)?;
    let unit = addr
        .line2()
        .and_then(|l| split_prefix_number(l, &template.unit_prefix))
        .filter(|n| ten_digits(n))
        .ok_or(ParseError::NotAnAlias)?;
    let digits = format!("{street}{unit}");
    match AliasCode::from_digits(addr.zip(), &digits) {
        Ok(code) => Ok(code),
        Err(CodecError::ChecksumMismatch { expected, found }) => {
            Err(ParseError::ChecksumMismatch { expected, found })
        }
        Err(_) => Err(ParseError::NotAnAlias),
    }
}
