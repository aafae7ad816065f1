//! Mailing address aliasing for parcel carriers.
//!
//! A customer hands a merchant an alias address instead of their home
//! address. The alias keeps the customer's city, state and ZIP, encodes a
//! random identity in the street and unit numbers, and is resolved back to
//! the true address only by the carrier at parcel intake.
//!
//! Modules, bottom up:
//! - [`postal`]: address values, normalization, join keys.
//! - [`codec`]: alias digits, Luhn check digit, rendering and parsing.
//! - [`registry`]: issuance and lifecycle of alias bindings, with a journal.
//! - [`validation`]: emulated address-validation API with hard/soft checkout.
//! - [`relay`]: parcel intake, relabeling, returns and tracking views.
//! - [`sim`]: deterministic comparison of aliasing with PO boxes and virtual mailboxes.

pub mod codec;
pub mod postal;
pub mod registry;
pub mod relay;
pub mod sim;
pub mod validation;

use num_rational::Ratio;

/// Wall-clock instants are always supplied by the caller.
pub type Timestamp = chrono::DateTime<chrono::Utc>;

/// Cost arithmetic in floating point.
pub type CostModelF64 = sim::cost::CostModel<f64>;
/// Cost arithmetic in exact rationals.
pub type ExactCostModel = sim::cost::CostModel<Ratio<i64>>;
/// Exact currency amount.
pub type ExactMoney = Ratio<i64>;

pub use codec::{AliasAddressTemplate, AliasCode, NamespaceConfig};
pub use postal::{address_key, normalize, AddressKey, PostalAddress, RawAddress};
pub use registry::{AliasRecord, AliasStatus, IssueRequest, Registry, RegistryConfig, Resolution};
pub use relay::{Parcel, ParcelId, Relay, TrackingView, ViewerRole};
pub use validation::{CheckoutDecision, OfficialDb, ValidationDb, ValidationMode, ValidationResult};
