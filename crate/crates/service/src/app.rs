//! Operations shared by the HTTP handlers and the command-line tool.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::sync::Arc;

use chrono::Datelike;
use mailalias_core::registry::{Attribution, Refusal, ShortCode};
use mailalias_core::relay::{ParcelBook, ParcelState};
use mailalias_core::{
    AliasCode, AliasRecord, AliasStatus, IssueRequest, OfficialDb, Parcel, ParcelId, PostalAddress,
    RawAddress, Registry, Relay, Timestamp, TrackingView, ValidationDb, ValidationMode,
    ValidationResult, ViewerRole,
};
use mailalias_core::validation::{gate, CheckoutDecision};
use parking_lot::Mutex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clock::Clock;
use crate::config::ServiceConfig;
use crate::error::ServiceError;

/// Upper bound on aliases created by one request.
pub const MAX_BATCH: usize = 1000;

#[derive(Debug, Clone, Deserialize)]
pub struct IssueBody {
    pub true_address: RawAddress,
    pub merchant_domain: Option<String>,
    pub validity_days: Option<u32>,
    #[serde(default)]
    pub subscription: bool,
    pub count: Option<usize>,
}

/// An alias record as the customer sees it, with status evaluated at request time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AliasView {
    pub handle: String,
    pub digits: String,
    #[serde(flatten)]
    pub record: AliasRecord,
    pub expires_at: Option<Timestamp>,
}

impl AliasView {
    fn new(mut record: AliasRecord, now: Timestamp) -> Self {
        record.status = record.status_at(now);
        AliasView {
            handle: record.alias_code.to_string(),
            digits: record.alias_code.digits(),
            expires_at: record.expires_at(),
            record,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefusedParcel {
    pub parcel_id: ParcelId,
    pub sender: String,
    pub at: Timestamp,
    pub reason: Refusal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributionView {
    pub handle: String,
    #[serde(flatten)]
    pub attribution: Attribution,
    pub refused_parcels: Vec<RefusedParcel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidateView {
    pub result: ValidationResult,
    pub decision: Option<CheckoutDecision>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepView {
    pub expired: usize,
    pub purged: usize,
}

#[derive(Default, Serialize, Deserialize)]
struct Snapshot {
    rng_word_pos: u128,
    parcels: ParcelBook,
}

pub fn parse_viewer(s: &str) -> Result<ViewerRole, ServiceError> {
    match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
        "merchant" => Ok(ViewerRole::Merchant),
        "customer" => Ok(ViewerRole::Customer),
        "carrier" | "carrierinternal" => Ok(ViewerRole::CarrierInternal),
        _ => Err(ServiceError::BadRequest(format!("unknown viewer `{s}`"))),
    }
}

pub fn parse_mode(s: &str) -> Result<ValidationMode, ServiceError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "hard" => Ok(ValidationMode::Hard),
        "soft" => Ok(ValidationMode::Soft),
        _ => Err(ServiceError::BadRequest(format!("unknown validation mode `{s}`"))),
    }
}

pub struct App {
    config: ServiceConfig,
    relay: Relay,
    validator: ValidationDb,
    state: Mutex<(ChaCha8Rng, ParcelBook)>,
    clock: Arc<dyn Clock>,
    persist: bool,
}

impl App {
    /// In-memory instance; nothing is written to disk.
    pub fn ephemeral(config: ServiceConfig, clock: Arc<dyn Clock>) -> Result<Self, ServiceError> {
        let registry = Registry::new(config.registry_config()?).map_err(|e| ServiceError::Config(e.to_string()))?;
        Self::assemble(config, clock, registry, Snapshot::default(), false)
    }

    /// Replay the journal and parcel snapshot under `config.data_dir`, creating it if needed.
    pub fn open(config: ServiceConfig, clock: Arc<dyn Clock>) -> Result<Self, ServiceError> {
        let storage = |e: &dyn std::fmt::Display| ServiceError::Storage(e.to_string());
        std::fs::create_dir_all(&config.data_dir).map_err(|e| storage(&e))?;
        let registry = Registry::open(config.registry_config()?, &config.journal_path()).map_err(|e| storage(&e))?;
        let snapshot = match std::fs::read_to_string(config.snapshot_path()) {
            Ok(text) => serde_json::from_str(&text).map_err(|e| storage(&e))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Snapshot::default(),
            Err(e) => return Err(storage(&e)),
        };
        Self::assemble(config, clock, registry, snapshot, true)
    }

    fn assemble(
        config: ServiceConfig,
        clock: Arc<dyn Clock>,
        registry: Registry,
        snapshot: Snapshot,
        persist: bool,
    ) -> Result<Self, ServiceError> {
        let mut official = OfficialDb::bundled();
        for path in &config.official_fixtures {
            load_fixture(&mut official, path)?;
        }
        let registry = Arc::new(registry);
        let validator = ValidationDb::with_aliases(Arc::new(official), registry.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_word_pos(snapshot.rng_word_pos);
        Ok(App {
            config,
            relay: Relay::new(registry),
            validator,
            state: Mutex::new((rng, snapshot.parcels)),
            clock,
            persist,
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn now(&self) -> Timestamp {
        self.clock.now()
    }

    fn registry(&self) -> &Registry {
        self.relay.registry()
    }

    fn save(&self, rng: &ChaCha8Rng, book: &ParcelBook) -> Result<(), ServiceError> {
        if !self.persist {
            return Ok(());
        }
        #[derive(Serialize)]
        struct SnapshotRef<'a> {
            rng_word_pos: u128,
            parcels: &'a ParcelBook,
        }
        let text = serde_json::to_string(&SnapshotRef {
            rng_word_pos: rng.get_word_pos(),
            parcels: book,
        })
        .map_err(|e| ServiceError::Storage(e.to_string()))?;
        let path = self.config.snapshot_path();
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, text)
            .and_then(|_| std::fs::rename(&tmp, &path))
            .map_err(|e| ServiceError::Storage(format!("{}: {e}", path.display())))
    }

    /// Flush the journal and write the parcel snapshot.
    pub fn flush(&self) -> Result<(), ServiceError> {
        self.registry()
            .flush()
            .map_err(|e| ServiceError::Storage(e.to_string()))?;
        let state = self.state.lock();
        self.save(&state.0, &state.1)
    }

    /// Accepts `ZIP-20digits` or, when unambiguous, the 20 digits alone.
    pub fn resolve_handle(&self, handle: &str) -> Result<AliasCode, ServiceError> {
        let handle = handle.trim();
        if handle.contains('-') {
            return handle
                .parse()
                .map_err(|e| ServiceError::BadRequest(format!("{e}")));
        }
        let matches: Vec<AliasCode> = self
            .registry()
            .records()
            .into_iter()
            .map(|r| r.alias_code)
            .filter(|c| c.digits() == handle)
            .collect();
        match matches.as_slice() {
            [one] => Ok(*one),
            [] => Err(ServiceError::NotFound(format!("alias {handle}"))),
            _ => Err(ServiceError::Conflict(format!(
                "{} aliases share digits {handle}; use ZIP-digits",
                matches.len()
            ))),
        }
    }

    pub fn issue(&self, body: &IssueBody) -> Result<Vec<AliasView>, ServiceError> {
        let n = body.count.unwrap_or(1);
        if n == 0 || n > MAX_BATCH {
            return Err(ServiceError::BadRequest(format!("count must lie in 1..={MAX_BATCH}")));
        }
        let true_address = PostalAddress::try_from(body.true_address.clone())?;
        let mut req = IssueRequest::new(true_address);
        if let Some(d) = &body.merchant_domain {
            req = req.for_merchant(d);
        }
        if let Some(v) = body.validity_days {
            req = req.validity_days(v);
        }
        if body.subscription {
            req = req.subscription();
        }
        let now = self.now();
        let mut state = self.state.lock();
        let records = self.registry().issue_batch(&req, n, now, &mut state.0)?;
        self.save(&state.0, &state.1)?;
        Ok(records.into_iter().map(|r| AliasView::new(r, now)).collect())
    }

    pub fn get(&self, handle: &str) -> Result<AliasView, ServiceError> {
        let code = self.resolve_handle(handle)?;
        let rec = self
            .registry()
            .lookup(&code)
            .ok_or_else(|| ServiceError::NotFound(format!("alias {code}")))?;
        Ok(AliasView::new(rec, self.now()))
    }

    pub fn revoke(&self, handle: &str) -> Result<AliasView, ServiceError> {
        let code = self.resolve_handle(handle)?;
        let now = self.now();
        Ok(AliasView::new(self.registry().revoke(&code, now)?, now))
    }

    pub fn list(&self) -> Vec<AliasView> {
        let now = self.now();
        self.registry()
            .records()
            .into_iter()
            .map(|r| AliasView::new(r, now))
            .collect()
    }

    pub fn by_short_code(&self, code: &str) -> Result<AliasView, ServiceError> {
        let sc: ShortCode = code
            .parse()
            .map_err(|e| ServiceError::BadRequest(format!("{e}")))?;
        Ok(AliasView::new(self.registry().lookup_by_short_code(&sc)?, self.now()))
    }

    pub fn attribution(&self, handle: &str) -> Result<AttributionView, ServiceError> {
        let code = self.resolve_handle(handle)?;
        let attribution = self.registry().attribute_leak(&code)?;
        let state = self.state.lock();
        let refused_parcels = state
            .1
            .iter()
            .filter(|p| p.alias == Some(code))
            .filter_map(|p| {
                p.refusal.as_ref().map(|n| RefusedParcel {
                    parcel_id: p.parcel_id.clone(),
                    sender: p.sender.clone(),
                    at: n.at,
                    reason: n.reason,
                })
            })
            .collect();
        Ok(AttributionView {
            handle: code.to_string(),
            attribution,
            refused_parcels,
        })
    }

    pub fn validate(&self, address: RawAddress, mode: Option<ValidationMode>) -> Result<ValidateView, ServiceError> {
        let addr = PostalAddress::try_from(address)?;
        let result = self.validator.validate(&addr, self.now());
        Ok(ValidateView {
            result,
            decision: mode.map(|m| gate(result, m)),
        })
    }

    pub fn intake(&self, sender: &str, label: RawAddress) -> Result<Parcel, ServiceError> {
        let label = PostalAddress::try_from(label)?;
        let now = self.now();
        let mut state = self.state.lock();
        let id = state.1.next_id();
        let parcel = self.relay.intake(Parcel::new(id, sender, label, now), now)?;
        state.1.put(parcel.clone());
        self.save(&state.0, &state.1)?;
        Ok(parcel)
    }

    fn step(
        &self,
        id: &str,
        f: impl FnOnce(&Relay, Parcel, Timestamp) -> Result<Parcel, mailalias_core::relay::RelayError>,
    ) -> Result<Parcel, ServiceError> {
        let now = self.now();
        let mut state = self.state.lock();
        let current = self.parcel_in(&state.1, id)?;
        let parcel = f(&self.relay, current, now)?;
        state.1.put(parcel.clone());
        self.save(&state.0, &state.1)?;
        Ok(parcel)
    }

    fn parcel_in(&self, book: &ParcelBook, id: &str) -> Result<Parcel, ServiceError> {
        book.get(&ParcelId(id.to_string()))
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(format!("parcel {id}")))
    }

    pub fn dispatch(&self, id: &str) -> Result<Parcel, ServiceError> {
        self.step(id, Relay::dispatch)
    }

    pub fn deliver(&self, id: &str) -> Result<Parcel, ServiceError> {
        self.step(id, Relay::deliver)
    }

    pub fn return_parcel(&self, id: &str) -> Result<Parcel, ServiceError> {
        self.step(id, Relay::return_to_merchant)
    }

    pub fn parcel(&self, id: &str) -> Result<Parcel, ServiceError> {
        self.parcel_in(&self.state.lock().1, id)
    }

    pub fn tracking(&self, id: &str, viewer: ViewerRole) -> Result<TrackingView, ServiceError> {
        Ok(Relay::tracking_view(&self.parcel(id)?, viewer))
    }

    /// Materialize expiries; with `retention`, also purge records from other years.
    pub fn sweep(&self, retention: bool) -> Result<SweepView, ServiceError> {
        let now = self.now();
        let expired = self.registry().sweep_expiry(now)?;
        let purged = if retention {
            self.registry().retention_sweep(now.year())?
        } else {
            0
        };
        Ok(SweepView { expired, purged })
    }

    pub fn parcel_state(&self, id: &str) -> Result<ParcelState, ServiceError> {
        Ok(self.parcel(id)?.state)
    }

    pub fn status(&self, handle: &str) -> Result<AliasStatus, ServiceError> {
        Ok(self.get(handle)?.record.status)
    }
}

fn load_fixture(db: &mut OfficialDb, path: &Path) -> Result<(), ServiceError> {
    let file = File::open(path).map_err(|e| ServiceError::Fixture(format!("{}: {e}", path.display())))?;
    db.extend_jsonl(BufReader::new(file))
        .map_err(|e| ServiceError::Fixture(format!("{}: {e}", path.display())))?;
    Ok(())
}
