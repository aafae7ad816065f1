//! Alias registry: issuance, lifecycle, short codes, attribution and retention.
//!
//! Every mutation is expressed as a [`RegistryEvent`], appended to the
//! journal (when one is attached) and then applied to memory under the same
//! write lock, so journal order equals the linearization order. Reopening a
//! registry replays the journal.
//!
//! The clock is always passed in. Expiry is evaluated lazily against `now`
//! by every operation that reads lifecycle state, and [`Registry::sweep_expiry`]
//! materializes it in bulk.

mod events;
mod record;

use std::collections::{HashMap, HashSet};
use std::io;
use std::path::Path;

use chrono::Datelike;
use parking_lot::RwLock;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{self, AliasAddressTemplate, AliasCode, CodecError, PAYLOAD_SPACE};
use crate::postal::{PostalAddress, Zip};
use crate::Timestamp;

pub use events::{read_events, write_events, Journal, JournalError, RegistryEvent};
pub use record::{
    AliasRecord, AliasStatus, Attribution, BadShortCode, ShortCode, SHORT_CODE_ALPHABET,
    SHORT_CODE_LEN,
};

pub const DEFAULT_VALIDITY_DAYS: u32 = 30;
pub const DEFAULT_MAX_REDRAWS: u32 = 8;

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("no alias {0} on record")]
    NotFound(String),
    #[error("alias {alias} is {status} and cannot change state")]
    TerminalState { alias: AliasCode, status: AliasStatus },
    #[error("no free payload in ZIP {zip} year code {year_code:03} after {attempts} draws")]
    NamespaceExhausted { zip: Zip, year_code: u16, attempts: u32 },
    #[error("no free short code after {0} draws")]
    ShortCodeExhausted(u32),
    #[error("address cannot carry an alias: {0}")]
    InvalidAddress(#[source] CodecError),
    #[error("validity window must be at least one day")]
    InvalidValidity,
    #[error("bad alias template: {0}")]
    Template(#[source] CodecError),
    #[error(transparent)]
    Journal(#[from] JournalError),
    #[error("journal io: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryConfig {
    pub template: AliasAddressTemplate,
    /// Window applied when an issue request does not name one. `None` means no auto-expiry.
    pub default_validity_days: Option<u32>,
    pub max_redraws: u32,
}

impl Default for RegistryConfig {
    fn default() -> Self {
        RegistryConfig {
            template: AliasAddressTemplate::default(),
            default_validity_days: Some(DEFAULT_VALIDITY_DAYS),
            max_redraws: DEFAULT_MAX_REDRAWS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueRequest {
    pub true_address: PostalAddress,
    #[serde(default)]
    pub merchant_domain: Option<String>,
    #[serde(default)]
    pub validity_days: Option<u32>,
    #[serde(default)]
    pub subscription: bool,
}

impl IssueRequest {
    pub fn new(true_address: PostalAddress) -> Self {
        IssueRequest {
            true_address,
            merchant_domain: None,
            validity_days: None,
            subscription: false,
        }
    }

    pub fn for_merchant(mut self, domain: &str) -> Self {
        self.merchant_domain = Some(domain.to_string());
        self
    }

    pub fn validity_days(mut self, days: u32) -> Self {
        self.validity_days = Some(days);
        self
    }

    pub fn subscription(mut self) -> Self {
        self.subscription = true;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Refusal {
    Expired,
    Revoked,
    NotFound,
}

/// Outcome of a carrier lookup. Refusals are ordinary values: the relay needs
/// them to route a parcel back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    Deliver(PostalAddress),
    Refused(Refusal),
}

/// Issued payloads per (ZIP, year code).
#[derive(Debug, Default)]
pub struct NamespaceLedger {
    issued: HashMap<(Zip, u16), HashSet<u64>>,
}

impl NamespaceLedger {
    pub fn contains(&self, code: &AliasCode) -> bool {
        self.issued
            .get(&(code.zip(), code.year_code()))
            .is_some_and(|s| s.contains(&code.payload()))
    }

    fn insert(&mut self, code: &AliasCode) -> bool {
        self.issued
            .entry((code.zip(), code.year_code()))
            .or_default()
            .insert(code.payload())
    }

    fn remove(&mut self, code: &AliasCode) {
        let key = (code.zip(), code.year_code());
        if let Some(set) = self.issued.get_mut(&key) {
            set.remove(&code.payload());
            if set.is_empty() {
                self.issued.remove(&key);
            }
        }
    }

    /// Number of payloads held for one (ZIP, year code).
    pub fn count(&self, zip: Zip, year_code: u16) -> usize {
        self.issued.get(&(zip, year_code)).map_or(0, HashSet::len)
    }

    pub fn len(&self) -> usize {
        self.issued.values().map(HashSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Default)]
struct Inner {
    records: HashMap<AliasCode, AliasRecord>,
    ledger: NamespaceLedger,
    short_codes: HashMap<ShortCode, AliasCode>,
    journal: Option<Journal>,
}

impl Inner {
    fn commit(&mut self, ev: RegistryEvent) -> Result<(), RegistryError> {
        if let Some(j) = self.journal.as_mut() {
            j.append(&ev)?;
        }
        self.apply(ev);
        Ok(())
    }

    fn apply(&mut self, ev: RegistryEvent) {
        match ev {
            RegistryEvent::Issued { record, .. } => {
                self.ledger.insert(&record.alias_code);
                self.short_codes.insert(record.short_code, record.alias_code);
                self.records.insert(record.alias_code, record);
            }
            RegistryEvent::FirstUse { at, alias } => {
                if let Some(r) = self.records.get_mut(&alias) {
                    r.status = AliasStatus::Active;
                    r.first_used_at = Some(at);
                }
            }
            RegistryEvent::Expired { alias, .. } => {
                if let Some(r) = self.records.get_mut(&alias) {
                    r.status = AliasStatus::Expired;
                }
            }
            RegistryEvent::Revoked { alias, .. } => {
                if let Some(r) = self.records.get_mut(&alias) {
                    r.status = AliasStatus::Revoked;
                }
            }
            RegistryEvent::ValidityChanged {
                alias,
                validity_days,
                ..
            } => {
                if let Some(r) = self.records.get_mut(&alias) {
                    r.validity_days = validity_days;
                }
            }
            RegistryEvent::Purged { alias } => {
                if let Some(r) = self.records.remove(&alias) {
                    self.ledger.remove(&alias);
                    if self.short_codes.get(&r.short_code) == Some(&alias) {
                        self.short_codes.remove(&r.short_code);
                    }
                }
            }
        }
    }

    /// Materialize a lapsed validity window, then return the current status.
    fn settle(&mut self, alias: &AliasCode, now: Timestamp) -> Result<AliasStatus, RegistryError> {
        let rec = self
            .records
            .get(alias)
            .ok_or_else(|| RegistryError::NotFound(alias.to_string()))?;
        let (stored, effective) = (rec.status, rec.status_at(now));
        if stored != effective {
            self.commit(RegistryEvent::Expired {
                at: now,
                alias: *alias,
            })?;
        }
        Ok(effective)
    }

    fn draw_short_code<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        max_redraws: u32,
        pending: &HashSet<ShortCode>,
    ) -> Result<ShortCode, RegistryError> {
        for _ in 0..=max_redraws {
            let sc = ShortCode::random(rng);
            if !self.short_codes.contains_key(&sc) && !pending.contains(&sc) {
                return Ok(sc);
            }
        }
        Err(RegistryError::ShortCodeExhausted(max_redraws + 1))
    }
}

/// The carrier's authoritative alias store. Cheap to share behind an `Arc`.
pub struct Registry {
    config: RegistryConfig,
    inner: RwLock<Inner>,
}

impl Registry {
    pub fn new(config: RegistryConfig) -> Result<Self, RegistryError> {
        config.template.check().map_err(RegistryError::Template)?;
        if config.default_validity_days == Some(0) {
            return Err(RegistryError::InvalidValidity);
        }
        Ok(Registry {
            config,
            inner: RwLock::new(Inner::default()),
        })
    }

    /// Rebuild state from events without journaling them again.
    pub fn replay(
        config: RegistryConfig,
        events: impl IntoIterator<Item = RegistryEvent>,
    ) -> Result<Self, RegistryError> {
        let reg = Registry::new(config)?;
        {
            let mut inner = reg.inner.write();
            for ev in events {
                inner.apply(ev);
            }
        }
        Ok(reg)
    }

    /// Replay the journal at `path` (if present) and keep appending to it.
    pub fn open(config: RegistryConfig, path: &Path) -> Result<Self, RegistryError> {
        let events = match events::open_existing(path)? {
            Some(f) => read_events(f)?,
            None => Vec::new(),
        };
        let reg = Registry::replay(config, events)?;
        reg.inner.write().journal = Some(Journal::append_to(path)?);
        Ok(reg)
    }

    pub fn attach_journal(&self, journal: Journal) {
        self.inner.write().journal = Some(journal);
    }

    pub fn flush(&self) -> Result<(), RegistryError> {
        if let Some(j) = self.inner.write().journal.as_mut() {
            j.flush()?;
        }
        Ok(())
    }

    pub fn config(&self) -> &RegistryConfig {
        &self.config
    }

    pub fn template(&self) -> &AliasAddressTemplate {
        &self.config.template
    }

    fn build_record<R: Rng + ?Sized>(
        &self,
        inner: &Inner,
        req: &IssueRequest,
        now: Timestamp,
        rng: &mut R,
        pending_codes: &HashSet<AliasCode>,
        pending_short: &HashSet<ShortCode>,
    ) -> Result<AliasRecord, RegistryError> {
        if req.validity_days == Some(0) {
            return Err(RegistryError::InvalidValidity);
        }
        let zip = req.true_address.zip();
        let year_code = codec::year_code_for(now.year());
        let attempts = self.config.max_redraws + 1;
        let mut code = None;
        for _ in 0..attempts {
            let payload = rng.random_range(0..PAYLOAD_SPACE);
            let candidate =
                AliasCode::from_parts(zip, year_code, payload).map_err(RegistryError::InvalidAddress)?;
            if !inner.ledger.contains(&candidate) && !pending_codes.contains(&candidate) {
                code = Some(candidate);
                break;
            }
        }
        let alias_code = code.ok_or(RegistryError::NamespaceExhausted {
            zip,
            year_code,
            attempts,
        })?;
        let alias_address = codec::render(
            &alias_code,
            &self.config.template,
            req.true_address.city(),
            req.true_address.state(),
        )
        .map_err(RegistryError::InvalidAddress)?;
        let short_code = inner.draw_short_code(rng, self.config.max_redraws, pending_short)?;
        Ok(AliasRecord {
            alias_code,
            alias_address,
            true_address: req.true_address.clone(),
            status: AliasStatus::Issued,
            issued_at: now,
            first_used_at: None,
            validity_days: req.validity_days.or(self.config.default_validity_days),
            subscription: req.subscription,
            merchant_domain: req.merchant_domain.clone(),
            short_code,
        })
    }

    /// Draw a fresh alias for `req.true_address`. Check-and-insert is atomic.
    pub fn issue<R: Rng + ?Sized>(
        &self,
        req: &IssueRequest,
        now: Timestamp,
        rng: &mut R,
    ) -> Result<AliasRecord, RegistryError> {
        let mut inner = self.inner.write();
        let record = self.build_record(&inner, req, now, rng, &HashSet::new(), &HashSet::new())?;
        inner.commit(RegistryEvent::Issued {
            at: now,
            record: record.clone(),
        })?;
        Ok(record)
    }

    /// Issue `n` aliases at once; either all are recorded or none.
    pub fn issue_batch<R: Rng + ?Sized>(
        &self,
        req: &IssueRequest,
        n: usize,
        now: Timestamp,
        rng: &mut R,
    ) -> Result<Vec<AliasRecord>, RegistryError> {
        let mut inner = self.inner.write();
        let mut codes = HashSet::new();
        let mut shorts = HashSet::new();
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let r = self.build_record(&inner, req, now, rng, &codes, &shorts)?;
            codes.insert(r.alias_code);
            shorts.insert(r.short_code);
            out.push(r);
        }
        for r in &out {
            inner.commit(RegistryEvent::Issued {
                at: now,
                record: r.clone(),
            })?;
        }
        Ok(out)
    }

    /// Issued → Active on first carrier use; a no-op when already Active.
    pub fn mark_first_use(
        &self,
        alias: &AliasCode,
        now: Timestamp,
    ) -> Result<AliasRecord, RegistryError> {
        let mut inner = self.inner.write();
        match inner.settle(alias, now)? {
            AliasStatus::Issued => inner.commit(RegistryEvent::FirstUse {
                at: now,
                alias: *alias,
            })?,
            AliasStatus::Active => {}
            status => {
                return Err(RegistryError::TerminalState {
                    alias: *alias,
                    status,
                })
            }
        }
        Ok(inner.records[alias].clone())
    }

    /// Expire every used, non-subscription alias whose window has passed.
    pub fn sweep_expiry(&self, now: Timestamp) -> Result<usize, RegistryError> {
        let mut inner = self.inner.write();
        let mut lapsed: Vec<AliasCode> = inner
            .records
            .values()
            .filter(|r| r.status == AliasStatus::Active && r.status_at(now) == AliasStatus::Expired)
            .map(|r| r.alias_code)
            .collect();
        lapsed.sort();
        for alias in &lapsed {
            inner.commit(RegistryEvent::Expired {
                at: now,
                alias: *alias,
            })?;
        }
        Ok(lapsed.len())
    }

    pub fn revoke(&self, alias: &AliasCode, now: Timestamp) -> Result<AliasRecord, RegistryError> {
        let mut inner = self.inner.write();
        let status = inner.settle(alias, now)?;
        if !status.can_become(AliasStatus::Revoked) {
            return Err(RegistryError::TerminalState {
                alias: *alias,
                status,
            });
        }
        inner.commit(RegistryEvent::Revoked {
            at: now,
            alias: *alias,
        })?;
        Ok(inner.records[alias].clone())
    }

    /// Change the validity window of a live alias.
    pub fn set_validity(
        &self,
        alias: &AliasCode,
        validity_days: Option<u32>,
        now: Timestamp,
    ) -> Result<AliasRecord, RegistryError> {
        if validity_days == Some(0) {
            return Err(RegistryError::InvalidValidity);
        }
        let mut inner = self.inner.write();
        let status = inner.settle(alias, now)?;
        if !status.is_live() {
            return Err(RegistryError::TerminalState {
                alias: *alias,
                status,
            });
        }
        inner.commit(RegistryEvent::ValidityChanged {
            at: now,
            alias: *alias,
            validity_days,
        })?;
        Ok(inner.records[alias].clone())
    }

    /// Carrier lookup for relabeling. A successful resolve counts as first use.
    pub fn resolve(&self, alias: &AliasCode, now: Timestamp) -> Result<Resolution, RegistryError> {
        let mut inner = self.inner.write();
        let status = match inner.settle(alias, now) {
            Ok(s) => s,
            Err(RegistryError::NotFound(_)) => return Ok(Resolution::Refused(Refusal::NotFound)),
            Err(e) => return Err(e),
        };
        match status {
            AliasStatus::Expired => Ok(Resolution::Refused(Refusal::Expired)),
            AliasStatus::Revoked => Ok(Resolution::Refused(Refusal::Revoked)),
            AliasStatus::Issued | AliasStatus::Active => {
                if status == AliasStatus::Issued {
                    inner.commit(RegistryEvent::FirstUse {
                        at: now,
                        alias: *alias,
                    })?;
                }
                Ok(Resolution::Deliver(inner.records[alias].true_address.clone()))
            }
        }
    }

    pub fn lookup(&self, alias: &AliasCode) -> Option<AliasRecord> {
        self.inner.read().records.get(alias).cloned()
    }

    pub fn lookup_by_short_code(&self, code: &ShortCode) -> Result<AliasRecord, RegistryError> {
        let inner = self.inner.read();
        inner
            .short_codes
            .get(code)
            .and_then(|a| inner.records.get(a))
            .cloned()
            .ok_or_else(|| RegistryError::NotFound(code.to_string()))
    }

    /// Effective status at `now` without recording anything.
    pub fn status_at(&self, alias: &AliasCode, now: Timestamp) -> Option<AliasStatus> {
        self.inner.read().records.get(alias).map(|r| r.status_at(now))
    }

    /// The merchant the alias was registered for.
    pub fn attribute_leak(&self, alias: &AliasCode) -> Result<Attribution, RegistryError> {
        let inner = self.inner.read();
        let rec = inner
            .records
            .get(alias)
            .ok_or_else(|| RegistryError::NotFound(alias.to_string()))?;
        Ok(match &rec.merchant_domain {
            Some(d) => Attribution::Merchant(d.clone()),
            None => Attribution::Unknown,
        })
    }

    /// Drop records from other years unless they are still Active.
    pub fn retention_sweep(&self, current_year: i32) -> Result<usize, RegistryError> {
        let current = codec::year_code_for(current_year);
        let mut inner = self.inner.write();
        let mut stale: Vec<AliasCode> = inner
            .records
            .values()
            .filter(|r| r.alias_code.year_code() != current && r.status != AliasStatus::Active)
            .map(|r| r.alias_code)
            .collect();
        stale.sort();
        for alias in &stale {
            inner.commit(RegistryEvent::Purged { alias: *alias })?;
        }
        Ok(stale.len())
    }

    /// Snapshot of every retained record, ordered by issue time then handle.
    pub fn records(&self) -> Vec<AliasRecord> {
        let mut out: Vec<_> = self.inner.read().records.values().cloned().collect();
        out.sort_by_key(|r| (r.issued_at, r.alias_code));
        out
    }

    pub fn len(&self) -> usize {
        self.inner.read().records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Payloads recorded for one (ZIP, year code).
    pub fn ledger_count(&self, zip: Zip, year_code: u16) -> usize {
        self.inner.read().ledger.count(zip, year_code)
    }

    pub fn short_code_count(&self) -> usize {
        self.inner.read().short_codes.len()
    }

    /// Current state as a fixture: one `issued` event per retained record.
    pub fn export_events(&self) -> Vec<RegistryEvent> {
        self.records()
            .into_iter()
            .map(|record| RegistryEvent::Issued {
                at: record.issued_at,
                record,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{Duration, TimeZone, Utc};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t0() -> Timestamp {
        Utc.with_ymd_and_hms(2025, 3, 1, 12, 0, 0).unwrap()
    }

    fn john() -> PostalAddress {
        PostalAddress::new("John Smith", "123 Main Street", Some("Unit 456"), "Any Town", "NY", "12345")
            .unwrap()
    }

    fn registry() -> Registry {
        Registry::new(RegistryConfig::default()).unwrap()
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn issued_alias_keeps_locality() {
        let reg = registry();
        let r = reg.issue(&IssueRequest::new(john()), t0(), &mut rng()).unwrap();
        assert_eq!(r.status, AliasStatus::Issued);
        assert!(r.alias_address.same_locality(&john()));
        assert_eq!(r.alias_address.city(), "Any Town");
        assert_eq!(r.alias_code.year_code(), 25);
        assert_eq!(r.validity_days, Some(30));
        assert_eq!(codec::parse(&r.alias_address, reg.template()), Ok(r.alias_code));
    }

    #[test]
    fn same_seed_twice_still_distinct() {
        let reg = registry();
        let a = reg.issue(&IssueRequest::new(john()), t0(), &mut rng()).unwrap();
        let b = reg.issue(&IssueRequest::new(john()), t0(), &mut rng()).unwrap();
        assert_ne!(a.alias_code, b.alias_code);
        assert_ne!(a.short_code, b.short_code);
        assert_eq!(reg.ledger_count(a.alias_code.zip(), 25), 2);
    }

    struct Stuck;
    impl rand::RngCore for Stuck {
        fn next_u32(&mut self) -> u32 {
            0
        }
        fn next_u64(&mut self) -> u64 {
            0
        }
        fn fill_bytes(&mut self, dst: &mut [u8]) {
            dst.fill(0)
        }
    }

    #[test]
    fn exhaustion_after_bounded_redraws() {
        let reg = registry();
        reg.issue(&IssueRequest::new(john()), t0(), &mut Stuck).unwrap();
        let err = reg.issue(&IssueRequest::new(john()), t0(), &mut Stuck).unwrap_err();
        assert!(matches!(err, RegistryError::NamespaceExhausted { attempts: 9, .. }));
        assert_eq!(reg.len(), 1);
    }

    #[test]
    fn batch_is_distinct_and_resolves_to_owner() {
        let reg = registry();
        let recs = reg.issue_batch(&IssueRequest::new(john()), 5, t0(), &mut rng()).unwrap();
        assert_eq!(recs.len(), 5);
        let codes: HashSet<_> = recs.iter().map(|r| r.alias_code).collect();
        let shorts: HashSet<_> = recs.iter().map(|r| r.short_code).collect();
        assert_eq!((codes.len(), shorts.len()), (5, 5));
        for r in &recs {
            assert_eq!(reg.resolve(&r.alias_code, t0()).unwrap(), Resolution::Deliver(john()));
        }
        assert!(reg.issue_batch(&IssueRequest::new(john()), 0, t0(), &mut rng()).unwrap().is_empty());
    }

    #[test]
    fn batch_is_all_or_nothing() {
        let reg = registry();
        // Stuck always draws payload 0, so the second member collides.
        assert!(reg.issue_batch(&IssueRequest::new(john()), 2, t0(), &mut Stuck).is_err());
        assert!(reg.is_empty());
    }

    #[test]
    fn first_use_then_idempotent() {
        let reg = registry();
        let r = reg.issue(&IssueRequest::new(john()), t0(), &mut rng()).unwrap();
        let later = t0() + Duration::hours(5);
        let a = reg.mark_first_use(&r.alias_code, later).unwrap();
        assert_eq!(a.status, AliasStatus::Active);
        assert_eq!(a.first_used_at, Some(later));
        let b = reg.mark_first_use(&r.alias_code, later + Duration::days(1)).unwrap();
        assert_eq!(b.first_used_at, Some(later));
    }

    #[test]
    fn first_use_on_revoked_is_terminal() {
        let reg = registry();
        let r = reg.issue(&IssueRequest::new(john()), t0(), &mut rng()).unwrap();
        reg.revoke(&r.alias_code, t0()).unwrap();
        assert!(matches!(
            reg.mark_first_use(&r.alias_code, t0()),
            Err(RegistryError::TerminalState { status: AliasStatus::Revoked, .. })
        ));
    }

    #[test]
    fn sweep_expires_after_window() {
        let reg = registry();
        let r = reg.issue(&IssueRequest::new(john()), t0(), &mut rng()).unwrap();
        reg.mark_first_use(&r.alias_code, t0()).unwrap();
        assert_eq!(reg.sweep_expiry(t0() + Duration::days(30)).unwrap(), 0);
        assert_eq!(reg.sweep_expiry(t0() + Duration::days(31)).unwrap(), 1);
        assert_eq!(reg.lookup(&r.alias_code).unwrap().status, AliasStatus::Expired);
        assert_eq!(
            reg.resolve(&r.alias_code, t0() + Duration::days(31)).unwrap(),
            Resolution::Refused(Refusal::Expired)
        );
    }

    #[test]
    fn subscription_and_unused_aliases_survive_sweep() {
        let reg = registry();
        let sub = reg
            .issue(&IssueRequest::new(john()).subscription(), t0(), &mut rng())
            .unwrap();
        let unused = reg.issue(&IssueRequest::new(john()), t0(), &mut rng()).unwrap();
        reg.mark_first_use(&sub.alias_code, t0()).unwrap();
        let far = t0() + Duration::days(3650);
        assert_eq!(reg.sweep_expiry(far).unwrap(), 0);
        assert_eq!(reg.lookup(&sub.alias_code).unwrap().status, AliasStatus::Active);
        assert_eq!(reg.lookup(&unused.alias_code).unwrap().status, AliasStatus::Issued);
    }

    #[test]
    fn resolve_expires_lazily() {
        let reg = registry();
        let r = reg
            .issue(&IssueRequest::new(john()).validity_days(2), t0(), &mut rng())
            .unwrap();
        assert!(matches!(reg.resolve(&r.alias_code, t0()).unwrap(), Resolution::Deliver(_)));
        assert_eq!(
            reg.resolve(&r.alias_code, t0() + Duration::days(3)).unwrap(),
            Resolution::Refused(Refusal::Expired)
        );
        assert_eq!(reg.lookup(&r.alias_code).unwrap().status, AliasStatus::Expired);
    }

    #[test]
    fn revoke_edges() {
        let reg = registry();
        let a = reg.issue(&IssueRequest::new(john()), t0(), &mut rng()).unwrap();
        assert_eq!(reg.revoke(&a.alias_code, t0()).unwrap().status, AliasStatus::Revoked);
        let b = reg.issue(&IssueRequest::new(john()), t0(), &mut rng()).unwrap();
        reg.mark_first_use(&b.alias_code, t0()).unwrap();
        assert_eq!(reg.revoke(&b.alias_code, t0()).unwrap().status, AliasStatus::Revoked);
        let c = reg.issue(&IssueRequest::new(john()), t0(), &mut rng()).unwrap();
        reg.mark_first_use(&c.alias_code, t0()).unwrap();
        reg.sweep_expiry(t0() + Duration::days(40)).unwrap();
        assert!(matches!(
            reg.revoke(&c.alias_code, t0() + Duration::days(40)),
            Err(RegistryError::TerminalState { status: AliasStatus::Expired, .. })
        ));
        assert_eq!(
            reg.resolve(&a.alias_code, t0()).unwrap(),
            Resolution::Refused(Refusal::Revoked)
        );
    }

    #[test]
    fn unknown_code_is_refused_not_found() {
        let reg = registry();
        let code = codec::make_alias_code("12345".parse().unwrap(), 2025, "1111111111111111").unwrap();
        assert_eq!(reg.resolve(&code, t0()).unwrap(), Resolution::Refused(Refusal::NotFound));
        assert!(matches!(reg.revoke(&code, t0()), Err(RegistryError::NotFound(_))));
        assert!(matches!(reg.attribute_leak(&code), Err(RegistryError::NotFound(_))));
    }

    #[test]
    fn short_code_lookup() {
        let reg = registry();
        let r = reg.issue(&IssueRequest::new(john()), t0(), &mut rng()).unwrap();
        assert_eq!(reg.lookup_by_short_code(&r.short_code).unwrap(), r);
        let other: ShortCode = "ZZZZZZZZ".parse().unwrap();
        assert!(matches!(reg.lookup_by_short_code(&other), Err(RegistryError::NotFound(_))));
        assert!("0OOOIIII".parse::<ShortCode>().is_err());
        assert!(r.short_code.as_str().bytes().all(|b| SHORT_CODE_ALPHABET.contains(&b)));
    }

    #[test]
    fn attribution() {
        let reg = registry();
        let a = reg
            .issue(&IssueRequest::new(john()).for_merchant("shop.example"), t0(), &mut rng())
            .unwrap();
        let b = reg
            .issue(&IssueRequest::new(john()).for_merchant("other.example"), t0(), &mut rng())
            .unwrap();
        let c = reg.issue(&IssueRequest::new(john()), t0(), &mut rng()).unwrap();
        assert_eq!(
            reg.attribute_leak(&a.alias_code).unwrap(),
            Attribution::Merchant("shop.example".into())
        );
        assert_eq!(
            reg.attribute_leak(&b.alias_code).unwrap(),
            Attribution::Merchant("other.example".into())
        );
        assert_eq!(reg.attribute_leak(&c.alias_code).unwrap(), Attribution::Unknown);
    }

    #[test]
    fn retention_keeps_current_year_and_live_past_aliases() {
        let reg = registry();
        let last_year = Utc.with_ymd_and_hms(2024, 6, 1, 0, 0, 0).unwrap();
        let old_expired = reg.issue(&IssueRequest::new(john()), last_year, &mut rng()).unwrap();
        let old_active = reg
            .issue(&IssueRequest::new(john()).subscription(), last_year, &mut rng())
            .unwrap();
        reg.mark_first_use(&old_expired.alias_code, last_year).unwrap();
        reg.mark_first_use(&old_active.alias_code, t0()).unwrap();
        reg.sweep_expiry(t0()).unwrap();
        let new_expired = reg.issue(&IssueRequest::new(john()), t0(), &mut rng()).unwrap();
        reg.mark_first_use(&new_expired.alias_code, t0()).unwrap();
        reg.sweep_expiry(t0() + Duration::days(31)).unwrap();

        assert_eq!(reg.retention_sweep(2025).unwrap(), 1);
        assert!(reg.lookup(&old_expired.alias_code).is_none());
        assert!(!reg.inner.read().ledger.contains(&old_expired.alias_code));
        assert!(reg.lookup(&old_active.alias_code).is_some());
        assert!(reg.lookup(&new_expired.alias_code).is_some());
    }

    #[test]
    fn validity_can_change_while_live() {
        let reg = registry();
        let r = reg.issue(&IssueRequest::new(john()), t0(), &mut rng()).unwrap();
        reg.mark_first_use(&r.alias_code, t0()).unwrap();
        reg.set_validity(&r.alias_code, Some(90), t0()).unwrap();
        assert_eq!(reg.sweep_expiry(t0() + Duration::days(60)).unwrap(), 0);
        assert!(matches!(
            reg.set_validity(&r.alias_code, Some(0), t0()),
            Err(RegistryError::InvalidValidity)
        ));
    }

    #[test]
    fn journal_replay_reproduces_state() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let (a, b) = {
            let reg = Registry::open(RegistryConfig::default(), &path).unwrap();
            let a = reg
                .issue(&IssueRequest::new(john()).for_merchant("shop.example"), t0(), &mut rng())
                .unwrap();
            let b = reg.issue(&IssueRequest::new(john()), t0(), &mut rng()).unwrap();
            reg.resolve(&a.alias_code, t0()).unwrap();
            reg.revoke(&b.alias_code, t0()).unwrap();
            (a, b)
        };
        let reg = Registry::open(RegistryConfig::default(), &path).unwrap();
        assert_eq!(reg.lookup(&a.alias_code).unwrap().status, AliasStatus::Active);
        assert_eq!(reg.lookup(&b.alias_code).unwrap().status, AliasStatus::Revoked);
        assert_eq!(reg.lookup_by_short_code(&a.short_code).unwrap().alias_code, a.alias_code);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().all(|l| l.contains("\"event\":")));
    }

    #[test]
    fn export_then_replay() {
        let reg = registry();
        for _ in 0..3 {
            reg.issue(&IssueRequest::new(john()), t0(), &mut rng()).unwrap();
        }
        let mut buf = Vec::new();
        write_events(&mut buf, &reg.export_events()).unwrap();
        let back = Registry::replay(RegistryConfig::default(), read_events(&buf[..]).unwrap()).unwrap();
        assert_eq!(back.records(), reg.records());
    }
}
