//! Carrier-side parcel handling for aliased shipments.
//!
//! Intake resolves an alias label and relabels the parcel with the true
//! address plus the alias short code. Returns put the alias label back on
//! top, and tracking is filtered per viewer so a merchant never sees more
//! than the city of an aliased destination.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{self, AliasCode, ParseError};
use crate::postal::PostalAddress;
use crate::registry::{Attribution, Refusal, Registry, RegistryError, Resolution, ShortCode};
use crate::Timestamp;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParcelId(pub String);

impl fmt::Display for ParcelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParcelState {
    AtMerchant,
    AtCarrier,
    OutForDelivery,
    Delivered,
    ReturnedToMerchant,
    Refused,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrackingKind {
    Accepted,
    InTransit,
    OutForDelivery,
    Delivered,
    Returned,
}

/// How precisely an event pins down a location. Ordered coarse to fine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Granularity {
    City,
    Facility,
    Street,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackingEvent {
    pub time: Timestamp,
    pub kind: TrackingKind,
    pub location_granularity: Granularity,
    pub location: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ViewerRole {
    Merchant,
    Customer,
    CarrierInternal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelEntry {
    pub at: Timestamp,
    pub label: PostalAddress,
    pub short_code: Option<ShortCode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefusalNote {
    pub at: Timestamp,
    pub reason: Refusal,
    pub attribution: Attribution,
}

/// A shipment. The last label entry is the label currently on the box.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parcel {
    pub parcel_id: ParcelId,
    pub sender: String,
    pub state: ParcelState,
    relabel_history: Vec<LabelEntry>,
    pub alias: Option<AliasCode>,
    pub refusal: Option<RefusalNote>,
    events: Vec<TrackingEvent>,
}

impl Parcel {
    pub fn new(parcel_id: ParcelId, sender: &str, label: PostalAddress, now: Timestamp) -> Self {
        Parcel {
            parcel_id,
            sender: sender.to_string(),
            state: ParcelState::AtMerchant,
            relabel_history: vec![LabelEntry {
                at: now,
                label,
                short_code: None,
            }],
            alias: None,
            refusal: None,
            events: Vec::new(),
        }
    }

    /// Outermost label.
    pub fn label(&self) -> &PostalAddress {
        &self.relabel_history.last().expect("history is never empty").label
    }

    /// The label the merchant printed.
    pub fn original_label(&self) -> &PostalAddress {
        &self.relabel_history[0].label
    }

    pub fn relabel_history(&self) -> &[LabelEntry] {
        &self.relabel_history
    }

    /// Unfiltered event list, as the carrier sees it.
    pub fn events(&self) -> &[TrackingEvent] {
        &self.events
    }

    /// Short code printed on the most recent relabel, if any.
    pub fn short_code(&self) -> Option<ShortCode> {
        self.relabel_history.iter().rev().find_map(|e| e.short_code)
    }

    fn push_label(&mut self, at: Timestamp, label: PostalAddress, short_code: Option<ShortCode>) {
        self.relabel_history.push(LabelEntry {
            at,
            label,
            short_code,
        });
    }

    fn push_event(&mut self, time: Timestamp, kind: TrackingKind, granularity: Granularity) {
        let dest = self.label();
        let location = match granularity {
            Granularity::City => city_of(dest),
            Granularity::Facility => format!(
                "{} {} {} sort facility",
                dest.city().to_uppercase(),
                dest.state(),
                dest.zip()
            ),
            Granularity::Street => dest.line1().to_string(),
        };
        self.events.push(TrackingEvent {
            time,
            kind,
            location_granularity: granularity,
            location,
        });
    }
}

fn city_of(addr: &PostalAddress) -> String {
    format!("{}, {}", addr.city(), addr.state())
}

/// What a given party may see of a parcel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackingView {
    pub parcel_id: ParcelId,
    pub viewer: ViewerRole,
    pub state: ParcelState,
    pub destination: PostalAddress,
    pub short_code: Option<ShortCode>,
    pub events: Vec<TrackingEvent>,
}

/// Raised when a parcel's alias is refused at intake.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributionEvent {
    pub at: Timestamp,
    pub parcel_id: ParcelId,
    pub sender: String,
    pub alias: AliasCode,
    pub reason: Refusal,
    pub attribution: Attribution,
}

#[derive(Debug, Error)]
pub enum RelayError {
    #[error("parcel {parcel} is {state:?}; cannot {op}")]
    InvalidState {
        parcel: ParcelId,
        state: ParcelState,
        op: &'static str,
    },
    #[error("parcel {parcel} carries an alias label with a bad check digit (expected {expected}, found {found}); manual handling required")]
    ChecksumMismatch {
        parcel: ParcelId,
        expected: u8,
        found: u8,
    },
    #[error("parcel {0} was relabeled but has no alias on record")]
    NoAliasOnRecord(ParcelId),
    #[error("no parcel {0}")]
    UnknownParcel(ParcelId),
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

/// The carrier's parcel engine over one registry.
pub struct Relay {
    registry: Arc<Registry>,
    attributions: Mutex<Vec<AttributionEvent>>,
}

impl Relay {
    pub fn new(registry: Arc<Registry>) -> Self {
        Relay {
            registry,
            attributions: Mutex::new(Vec::new()),
        }
    }

    pub fn registry(&self) -> &Arc<Registry> {
        &self.registry
    }

    /// Attribution events raised so far, in order.
    pub fn attributions(&self) -> Vec<AttributionEvent> {
        self.attributions.lock().clone()
    }

    fn expect_state(
        parcel: &Parcel,
        allowed: &[ParcelState],
        op: &'static str,
    ) -> Result<(), RelayError> {
        if allowed.contains(&parcel.state) {
            Ok(())
        } else {
            Err(RelayError::InvalidState {
                parcel: parcel.parcel_id.clone(),
                state: parcel.state,
                op,
            })
        }
    }

    /// Accept a parcel from the merchant side.
    pub fn intake(&self, mut parcel: Parcel, now: Timestamp) -> Result<Parcel, RelayError> {
        Self::expect_state(&parcel, &[ParcelState::AtMerchant], "intake")?;
        match codec::parse(parcel.label(), self.registry.template()) {
            Err(ParseError::NotAnAlias) => {
                parcel.state = ParcelState::AtCarrier;
                parcel.push_event(now, TrackingKind::Accepted, Granularity::Facility);
            }
            Err(ParseError::ChecksumMismatch { expected, found }) => {
                return Err(RelayError::ChecksumMismatch {
                    parcel: parcel.parcel_id,
                    expected,
                    found,
                })
            }
            Ok(code) => {
                parcel.alias = Some(code);
                parcel.push_event(now, TrackingKind::Accepted, Granularity::Facility);
                match self.registry.resolve(&code, now)? {
                    Resolution::Deliver(true_address) => {
                        let short = self.registry.lookup(&code).map(|r| r.short_code);
                        parcel.push_label(now, true_address, short);
                        parcel.state = ParcelState::AtCarrier;
                    }
                    Resolution::Refused(reason) => {
                        let attribution = match self.registry.attribute_leak(&code) {
                            Ok(a) => a,
                            Err(_) => Attribution::Unknown,
                        };
                        parcel.state = ParcelState::Refused;
                        parcel.refusal = Some(RefusalNote {
                            at: now,
                            reason,
                            attribution: attribution.clone(),
                        });
                        self.attributions.lock().push(AttributionEvent {
                            at: now,
                            parcel_id: parcel.parcel_id.clone(),
                            sender: parcel.sender.clone(),
                            alias: code,
                            reason,
                            attribution,
                        });
                    }
                }
            }
        }
        Ok(parcel)
    }

    /// Finest granularity this parcel's events may carry.
    fn finest(parcel: &Parcel) -> Granularity {
        if parcel.alias.is_some() {
            Granularity::City
        } else {
            Granularity::Street
        }
    }

    pub fn dispatch(&self, mut parcel: Parcel, now: Timestamp) -> Result<Parcel, RelayError> {
        Self::expect_state(&parcel, &[ParcelState::AtCarrier], "dispatch")?;
        parcel.push_event(now, TrackingKind::InTransit, Granularity::Facility);
        let g = Self::finest(&parcel);
        parcel.push_event(now, TrackingKind::OutForDelivery, g);
        parcel.state = ParcelState::OutForDelivery;
        Ok(parcel)
    }

    pub fn deliver(&self, mut parcel: Parcel, now: Timestamp) -> Result<Parcel, RelayError> {
        Self::expect_state(&parcel, &[ParcelState::OutForDelivery], "deliver")?;
        let g = Self::finest(&parcel);
        parcel.push_event(now, TrackingKind::Delivered, g);
        parcel.state = ParcelState::Delivered;
        Ok(parcel)
    }

    /// Send an undeliverable or refused parcel back, under its alias label if it had one.
    pub fn return_to_merchant(&self, mut parcel: Parcel, now: Timestamp) -> Result<Parcel, RelayError> {
        Self::expect_state(
            &parcel,
            &[
                ParcelState::AtCarrier,
                ParcelState::OutForDelivery,
                ParcelState::Refused,
            ],
            "return",
        )?;
        match parcel.alias {
            Some(_) => {
                let alias_label = parcel.original_label().clone();
                if parcel.label() != &alias_label {
                    parcel.push_label(now, alias_label, None);
                }
            }
            None if parcel.relabel_history.len() > 1 => {
                return Err(RelayError::NoAliasOnRecord(parcel.parcel_id));
            }
            None => {}
        }
        parcel.push_event(now, TrackingKind::Returned, Granularity::Facility);
        parcel.state = ParcelState::ReturnedToMerchant;
        Ok(parcel)
    }

    /// Events and destination as `viewer` is allowed to see them.
    pub fn tracking_view(parcel: &Parcel, viewer: ViewerRole) -> TrackingView {
        let coarsen = |e: &TrackingEvent, city: &str| TrackingEvent {
            time: e.time,
            kind: e.kind,
            location_granularity: Granularity::City,
            location: city.to_string(),
        };
        let (destination, short_code, events) = match viewer {
            ViewerRole::Merchant => {
                let dest = parcel.original_label().clone();
                let city = city_of(&dest);
                let events = parcel.events.iter().map(|e| coarsen(e, &city)).collect();
                (dest, None, events)
            }
            ViewerRole::Customer => {
                let dest = parcel
                    .relabel_history
                    .iter()
                    .rev()
                    .find(|e| e.short_code.is_some())
                    .map_or_else(|| parcel.original_label().clone(), |e| e.label.clone());
                let city = city_of(&dest);
                let events = parcel
                    .events
                    .iter()
                    .map(|e| {
                        if e.location_granularity == Granularity::Street {
                            coarsen(e, &city)
                        } else {
                            e.clone()
                        }
                    })
                    .collect();
                (dest, parcel.short_code(), events)
            }
            ViewerRole::CarrierInternal => (
                parcel.label().clone(),
                parcel.short_code(),
                parcel.events.clone(),
            ),
        };
        TrackingView {
            parcel_id: parcel.parcel_id.clone(),
            viewer,
            state: parcel.state,
            destination,
            short_code,
            events,
        }
    }
}

/// In-memory parcel store with sequential ids, used by the service front end.
#[derive(Default, Serialize, Deserialize)]
pub struct ParcelBook {
    next_id: u64,
    parcels: BTreeMap<ParcelId, Parcel>,
}

impl ParcelBook {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn next_id(&mut self) -> ParcelId {
        self.next_id += 1;
        ParcelId(format!("PCL-{:08}", self.next_id))
    }

    pub fn put(&mut self, parcel: Parcel) {
        self.parcels.insert(parcel.parcel_id.clone(), parcel);
    }

    pub fn get(&self, id: &ParcelId) -> Option<&Parcel> {
        self.parcels.get(id)
    }

    pub fn take(&mut self, id: &ParcelId) -> Result<Parcel, RelayError> {
        self.parcels
            .remove(id)
            .ok_or_else(|| RelayError::UnknownParcel(id.clone()))
    }

    /// Parcels in id order.
    pub fn iter(&self) -> impl Iterator<Item = &Parcel> {
        self.parcels.values()
    }

    pub fn len(&self) -> usize {
        self.parcels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parcels.is_empty()
    }
}
