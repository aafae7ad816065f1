//! US-format postal addresses.
//!
//! Normalization is deliberately narrow: fields are trimmed, internal runs of
//! whitespace collapse to one space, and the state code is uppercased. No
//! street-suffix abbreviation is applied, so lookups stay exact-match.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Longest allowed name / line1 / line2, in characters.
pub const MAX_FIELD_LEN: usize = 30;

/// States, DC, territories and military "states".
const STATE_CODES: &[&str] = &[
    "AL", "AK", "AZ", "AR", "CA", "CO", "CT", "DE", "FL", "GA", "HI", "ID", "IL", "IN", "IA", "KS",
    "KY", "LA", "ME", "MD", "MA", "MI", "MN", "MS", "MO", "MT", "NE", "NV", "NH", "NJ", "NM", "NY",
    "NC", "ND", "OH", "OK", "OR", "PA", "RI", "SC", "SD", "TN", "TX", "UT", "VT", "VA", "WA", "WV",
    "WI", "WY", "DC", "AS", "GU", "MP", "PR", "VI", "UM", "FM", "MH", "PW", "AA", "AE", "AP",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AddressError {
    #[error("field `{field}` is {len} characters, limit is {MAX_FIELD_LEN}")]
    FieldTooLong { field: &'static str, len: usize },
    #[error("`{0}` is not a US state or territory code")]
    BadState(String),
    #[error("`{0}` is not a 5-digit ZIP code")]
    BadZip(String),
    #[error("required field `{0}` is missing or empty")]
    MissingField(&'static str),
}

/// Five-digit ZIP code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Zip([u8; 5]);

impl Zip {
    pub fn as_str(&self) -> &str {
        // only ASCII digits are ever stored
        std::str::from_utf8(&self.0).expect("zip is ascii")
    }
}

impl FromStr for Zip {
    type Err = AddressError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bytes = t.as_bytes();
        if bytes.len() != 5 || !bytes.iter().all(u8::is_ascii_digit) {
            return Err(AddressError::BadZip(t.to_string()));
        }
        let mut out = [0u8; 5];
        out.copy_from_slice(bytes);
        Ok(Zip(out))
    }
}

impl fmt::Display for Zip {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Zip {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Zip {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Two-letter US state or territory code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateCode([u8; 2]);

impl StateCode {
    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("state is ascii")
    }
}

impl FromStr for StateCode {
    type Err = AddressError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase();
        match STATE_CODES.iter().find(|c| **c == upper) {
            Some(code) => {
                let b = code.as_bytes();
                Ok(StateCode([b[0], b[1]]))
            }
            None => Err(AddressError::BadState(s.trim().to_string())),
        }
    }
}

impl fmt::Display for StateCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for StateCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for StateCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Address fields as entered, before any checking.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawAddress {
    pub name: Option<String>,
    pub line1: Option<String>,
    #[serde(default)]
    pub line2: Option<String>,
    pub city: Option<String>,
    pub state: Option<String>,
    pub zip: Option<String>,
}

impl RawAddress {
    pub fn new(
        name: &str,
        line1: &str,
        line2: Option<&str>,
        city: &str,
        state: &str,
        zip: &str,
    ) -> Self {
        RawAddress {
            name: Some(name.to_string()),
            line1: Some(line1.to_string()),
            line2: line2.map(str::to_string),
            city: Some(city.to_string()),
            state: Some(state.to_string()),
            zip: Some(zip.to_string()),
        }
    }
}

/// A validated, normalized US mailing address.
///
/// Serializes as a flat record `{name, line1, line2, city, state, zip}` with
/// `line2` null when absent. Deserialization runs [`normalize`], so every
/// decoded value satisfies the field invariants.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawAddress")]
pub struct PostalAddress {
    name: String,
    line1: String,
    line2: Option<String>,
    city: String,
    state: StateCode,
    zip: Zip,
}

impl PostalAddress {
    /// Convenience constructor; equivalent to `normalize(RawAddress::new(..))`.
    pub fn new(
        name: &str,
        line1: &str,
        line2: Option<&str>,
        city: &str,
        state: &str,
        zip: &str,
    ) -> Result<Self, AddressError> {
        normalize(&RawAddress::new(name, line1, line2, city, state, zip))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn line1(&self) -> &str {
        &self.line1
    }

    pub fn line2(&self) -> Option<&str> {
        self.line2.as_deref()
    }

    pub fn city(&self) -> &str {
        &self.city
    }

    pub fn state(&self) -> StateCode {
        self.state
    }

    pub fn zip(&self) -> Zip {
        self.zip
    }

    /// True when city, state and ZIP all match.
    pub fn same_locality(&self, other: &PostalAddress) -> bool {
        self.city == other.city && self.state == other.state && self.zip == other.zip
    }

    pub fn to_raw(&self) -> RawAddress {
        RawAddress {
            name: Some(self.name.clone()),
            line1: Some(self.line1.clone()),
            line2: self.line2.clone(),
            city: Some(self.city.clone()),
            state: Some(self.state.to_string()),
            zip: Some(self.zip.to_string()),
        }
    }
}

impl TryFrom<RawAddress> for PostalAddress {
    type Error = AddressError;

    fn try_from(raw: RawAddress) -> Result<Self, Self::Error> {
        normalize(&raw)
    }
}

impl From<PostalAddress> for RawAddress {
    fn from(a: PostalAddress) -> Self {
        a.to_raw()
    }
}

impl fmt::Display for PostalAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.name)?;
        writeln!(f, "{}", self.line1)?;
        if let Some(l2) = &self.line2 {
            writeln!(f, "{l2}")?;
        }
        write!(f, "{}, {} {}", self.city, self.state, self.zip)
    }
}

fn collapse(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn required(value: &Option<String>, field: &'static str) -> Result<String, AddressError> {
    let v = value.as_deref().map(collapse).unwrap_or_default();
    if v.is_empty() {
        return Err(AddressError::MissingField(field));
    }
    Ok(v)
}

fn limited(value: String, field: &'static str) -> Result<String, AddressError> {
    let len = value.chars().count();
    if len > MAX_FIELD_LEN {
        return Err(AddressError::FieldTooLong { field, len });
    }
    Ok(value)
}

/// Trim, collapse whitespace, uppercase the state and check every field.
pub fn normalize(raw: &RawAddress) -> Result<PostalAddress, AddressError> {
    let name = limited(required(&raw.name, "name")?, "name")?;
    let line1 = limited(required(&raw.line1, "line1")?, "line1")?;
    let line2 = match raw.line2.as_deref().map(collapse) {
        Some(l2) if !l2.is_empty() => Some(limited(l2, "line2")?),
        _ => None,
    };
    let city = required(&raw.city, "city")?;
    let state = required(&raw.state, "state")?.parse()?;
    let zip = required(&raw.zip, "zip")?.parse()?;
    Ok(PostalAddress {
        name,
        line1,
        line2,
        city,
        state,
        zip,
    })
}

/// Case- and whitespace-insensitive identity of an address, for joins.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AddressKey(String);

impl AddressKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Key over the physical delivery point only (recipient name excluded).
    pub fn delivery_point(addr: &PostalAddress) -> AddressKey {
        AddressKey(
            [
                addr.line1.as_str(),
                addr.line2.as_deref().unwrap_or(""),
                addr.city.as_str(),
                addr.state.as_str(),
                addr.zip.as_str(),
            ]
            .join("|")
            .to_uppercase(),
        )
    }
}

impl fmt::Display for AddressKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Canonical key over every field, recipient name included.
pub fn address_key(addr: &PostalAddress) -> AddressKey {
    let point = AddressKey::delivery_point(addr);
    AddressKey(format!("{}|{}", addr.name.to_uppercase(), point.0))
}
