//! Emulated carrier address-validation API.
//!
//! Validation is exact-match on the delivery point of an address (recipient
//! name excluded, as postal databases list delivery points, not people). An
//! alias validates only when a registry view is attached and the alias is
//! live at the instant asked about.

use std::collections::HashSet;
use std::io::{self, BufRead};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec;
use crate::postal::{AddressKey, PostalAddress};
use crate::registry::Registry;
use crate::Timestamp;

/// Synthetic stand-in for the national address database.
pub const OFFICIAL_FIXTURE: &str = include_str!("../fixtures/official_addresses.jsonl");

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("fixture io: {0}")]
    Io(#[from] io::Error),
    #[error("fixture line {line}: {source}")]
    Decode {
        line: usize,
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ValidationMode {
    Hard,
    Soft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ValidationResult {
    Valid,
    Invalid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CheckoutDecision {
    Proceed,
    ProceedWithWarning,
    Blocked,
}

/// Set of known delivery points.
#[derive(Debug, Clone, Default)]
pub struct OfficialDb {
    points: HashSet<AddressKey>,
}

impl OfficialDb {
    pub fn new() -> Self {
        Self::default()
    }

    /// Load one address record per line; blank lines are ignored.
    pub fn from_jsonl<R: BufRead>(reader: R) -> Result<Self, FixtureError> {
        let mut db = OfficialDb::new();
        db.extend_jsonl(reader)?;
        Ok(db)
    }

    pub fn extend_jsonl<R: BufRead>(&mut self, reader: R) -> Result<usize, FixtureError> {
        let mut n = 0;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let addr: PostalAddress = serde_json::from_str(&line)
                .map_err(|source| FixtureError::Decode { line: i + 1, source })?;
            self.insert(&addr);
            n += 1;
        }
        Ok(n)
    }

    /// The bundled fixture.
    pub fn bundled() -> Self {
        Self::from_jsonl(OFFICIAL_FIXTURE.as_bytes()).expect("bundled fixture is well formed")
    }

    pub fn insert(&mut self, addr: &PostalAddress) -> bool {
        self.points.insert(AddressKey::delivery_point(addr))
    }

    pub fn contains(&self, addr: &PostalAddress) -> bool {
        self.points.contains(&AddressKey::delivery_point(addr))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Official database plus, optionally, a live view of the carrier's aliases.
#[derive(Clone)]
pub struct ValidationDb {
    official: Arc<OfficialDb>,
    alias_view: Option<Arc<Registry>>,
}

impl ValidationDb {
    /// A validator that knows only official addresses (e.g. a third-party service).
    pub fn official_only(official: Arc<OfficialDb>) -> Self {
        ValidationDb {
            official,
            alias_view: None,
        }
    }

    /// The carrier's own validator, which also accepts its live aliases.
    pub fn with_aliases(official: Arc<OfficialDb>, registry: Arc<Registry>) -> Self {
        ValidationDb {
            official,
            alias_view: Some(registry),
        }
    }

    /// Start accepting the carrier's live aliases.
    pub fn attach_registry(&mut self, registry: Arc<Registry>) {
        self.alias_view = Some(registry);
    }

    pub fn official(&self) -> &OfficialDb {
        &self.official
    }

    fn is_live_alias(&self, addr: &PostalAddress, now: Timestamp) -> bool {
        let Some(reg) = &self.alias_view else {
            return false;
        };
        let Ok(code) = codec::parse(addr, reg.template()) else {
            return false;
        };
        reg.lookup(&code).is_some_and(|r| {
            r.status_at(now).is_live()
                && AddressKey::delivery_point(&r.alias_address) == AddressKey::delivery_point(addr)
        })
    }

    pub fn validate(&self, addr: &PostalAddress, now: Timestamp) -> ValidationResult {
        if self.official.contains(addr) || self.is_live_alias(addr, now) {
            ValidationResult::Valid
        } else {
            ValidationResult::Invalid
        }
    }

    pub fn checkout_gate(
        &self,
        addr: &PostalAddress,
        mode: ValidationMode,
        now: Timestamp,
    ) -> CheckoutDecision {
        gate(self.validate(addr, now), mode)
    }
}

/// Merchant-side decision for a validation outcome.
pub fn gate(result: ValidationResult, mode: ValidationMode) -> CheckoutDecision {
    match (result, mode) {
        (ValidationResult::Valid, _) => CheckoutDecision::Proceed,
        (ValidationResult::Invalid, ValidationMode::Soft) => CheckoutDecision::ProceedWithWarning,
        (ValidationResult::Invalid, ValidationMode::Hard) => CheckoutDecision::Blocked,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::{IssueRequest, RegistryConfig};
    use chrono::{Duration, TimeZone, Utc};
    use rand::SeedableRng;

    fn john() -> PostalAddress {
        PostalAddress::new("John Smith", "123 Main Street", Some("Unit 456"), "Any Town", "NY", "12345")
            .unwrap()
    }

    fn now() -> Timestamp {
        Utc.with_ymd_and_hms(2025, 5, 1, 0, 0, 0).unwrap()
    }

    fn setup() -> (Arc<Registry>, ValidationDb) {
        let reg = Arc::new(Registry::new(RegistryConfig::default()).unwrap());
        let db = ValidationDb::with_aliases(Arc::new(OfficialDb::bundled()), reg.clone());
        (reg, db)
    }

    #[test]
    fn bundled_fixture_has_worked_example() {
        let db = OfficialDb::bundled();
        assert!(db.len() >= 20);
        assert!(db.contains(&john()));
    }

    #[test]
    fn official_address_validates() {
        let (_, db) = setup();
        assert_eq!(db.validate(&john(), now()), ValidationResult::Valid);
        let unknown =
            PostalAddress::new("John Smith", "999 Nowhere Rd", None, "Any Town", "NY", "12345").unwrap();
        assert_eq!(db.validate(&unknown, now()), ValidationResult::Invalid);
    }

    #[test]
    fn alias_validates_until_revoked() {
        let (reg, db) = setup();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let r = reg.issue(&IssueRequest::new(john()), now(), &mut rng).unwrap();
        assert_eq!(db.validate(&r.alias_address, now()), ValidationResult::Valid);
        reg.revoke(&r.alias_code, now()).unwrap();
        assert_eq!(db.validate(&r.alias_address, now()), ValidationResult::Invalid);
    }

    #[test]
    fn expired_alias_fails_immediately() {
        let (reg, db) = setup();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let r = reg.issue(&IssueRequest::new(john()), now(), &mut rng).unwrap();
        reg.resolve(&r.alias_code, now()).unwrap();
        let after = now() + Duration::days(30) + Duration::seconds(1);
        assert_eq!(db.validate(&r.alias_address, now() + Duration::days(30)), ValidationResult::Valid);
        assert_eq!(db.validate(&r.alias_address, after), ValidationResult::Invalid);
    }

    #[test]
    fn alias_in_wrong_city_is_invalid() {
        let (reg, db) = setup();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let r = reg.issue(&IssueRequest::new(john()), now(), &mut rng).unwrap();
        let a = &r.alias_address;
        let moved =
            PostalAddress::new(a.name(), a.line1(), a.line2(), "Other City", "NY", "12345").unwrap();
        assert_eq!(db.validate(&moved, now()), ValidationResult::Invalid);
    }

    #[test]
    fn gate_table() {
        let (reg, db) = setup();
        let unknown = PostalAddress::new("X", "1 Nowhere Rd", None, "Any Town", "NY", "12345").unwrap();
        assert_eq!(db.checkout_gate(&unknown, ValidationMode::Hard, now()), CheckoutDecision::Blocked);
        assert_eq!(
            db.checkout_gate(&unknown, ValidationMode::Soft, now()),
            CheckoutDecision::ProceedWithWarning
        );
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let r = reg.issue(&IssueRequest::new(john()), now(), &mut rng).unwrap();
        reg.resolve(&r.alias_code, now()).unwrap();
        assert_eq!(
            db.checkout_gate(&r.alias_address, ValidationMode::Hard, now()),
            CheckoutDecision::Proceed
        );
    }

    #[test]
    fn third_party_validator_blocks_alias_until_carrier_adds_it() {
        let reg = Arc::new(Registry::new(RegistryConfig::default()).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let r = reg.issue(&IssueRequest::new(john()), now(), &mut rng).unwrap();
        let mut db = ValidationDb::official_only(Arc::new(OfficialDb::bundled()));
        assert_eq!(db.checkout_gate(&r.alias_address, ValidationMode::Hard, now()), CheckoutDecision::Blocked);
        db.attach_registry(reg);
        assert_eq!(db.checkout_gate(&r.alias_address, ValidationMode::Hard, now()), CheckoutDecision::Proceed);
    }

    #[test]
    fn bad_fixture_line_is_reported() {
        let text = "{\"name\":\"A\",\"line1\":\"B\",\"city\":\"C\",\"state\":\"NY\",\"zip\":\"12345\"}\nnot json\n";
        match OfficialDb::from_jsonl(text.as_bytes()) {
            Err(FixtureError::Decode { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
