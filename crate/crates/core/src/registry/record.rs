use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Duration, Utc};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codec::AliasCode;
use crate::postal::PostalAddress;
use crate::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AliasStatus {
    Issued,
    Active,
    Expired,
    Revoked,
}

impl AliasStatus {
    pub fn is_live(self) -> bool {
        matches!(self, AliasStatus::Issued | AliasStatus::Active)
    }

    /// The only edges the lifecycle allows.
    pub fn can_become(self, next: AliasStatus) -> bool {
        use AliasStatus::*;
        matches!(
            (self, next),
            (Issued, Active) | (Issued, Revoked) | (Active, Expired) | (Active, Revoked)
        )
    }
}

impl fmt::Display for AliasStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Symbols for short codes: digits and capitals without 0, 1, O, I.
pub const SHORT_CODE_ALPHABET: &[u8; 32] = b"23456789ABCDEFGHJKLMNPQRSTUVWXYZ";
pub const SHORT_CODE_LEN: usize = 8;

/// Compact token printed on a relabel, linking a parcel to its alias record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShortCode([u8; SHORT_CODE_LEN]);

impl ShortCode {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut out = [0u8; SHORT_CODE_LEN];
        for b in &mut out {
            *b = SHORT_CODE_ALPHABET[rng.random_range(0..SHORT_CODE_ALPHABET.len())];
        }
        ShortCode(out)
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("alphabet is ascii")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("`{0}` is not an {SHORT_CODE_LEN}-character short code")]
pub struct BadShortCode(pub String);

impl FromStr for ShortCode {
    type Err = BadShortCode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase();
        let bytes = upper.as_bytes();
        if bytes.len() != SHORT_CODE_LEN || !bytes.iter().all(|b| SHORT_CODE_ALPHABET.contains(b)) {
            return Err(BadShortCode(s.to_string()));
        }
        let mut out = [0u8; SHORT_CODE_LEN];
        out.copy_from_slice(bytes);
        Ok(ShortCode(out))
    }
}

impl fmt::Display for ShortCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for ShortCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ShortCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One alias binding as held by the carrier (and mirrored in the customer's
/// address manager).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AliasRecord {
    pub alias_code: AliasCode,
    pub alias_address: PostalAddress,
    pub true_address: PostalAddress,
    pub status: AliasStatus,
    pub issued_at: Timestamp,
    pub first_used_at: Option<Timestamp>,
    pub validity_days: Option<u32>,
    pub subscription: bool,
    pub merchant_domain: Option<String>,
    pub short_code: ShortCode,
}

impl AliasRecord {
    /// End of the validity window, if the alias can auto-expire and has been used.
    pub fn expires_at(&self) -> Option<DateTime<Utc>> {
        if self.subscription {
            return None;
        }
        let days = self.validity_days?;
        Some(self.first_used_at? + Duration::days(i64::from(days)))
    }

    /// Status as of `now`, applying the validity window without mutating.
    pub fn status_at(&self, now: Timestamp) -> AliasStatus {
        match (self.status, self.expires_at()) {
            (AliasStatus::Active, Some(end)) if now > end => AliasStatus::Expired,
            (s, _) => s,
        }
    }
}

/// Who, if anyone, an alias was handed to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "attribution", content = "merchant_domain", rename_all = "snake_case")]
pub enum Attribution {
    Merchant(String),
    Unknown,
}
