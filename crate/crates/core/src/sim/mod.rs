//! Deterministic e-commerce scenarios comparing address privacy strategies.
//!
//! A run places orders from synthetic customers at synthetic merchants,
//! pushes each order through checkout validation, fulfillment, carrier
//! intake and delivery, then lets some merchants mail ads to every address
//! they collected. Identical config and seed give a byte-identical report.

pub mod carriers;
pub mod config;
pub mod cost;
mod engine;
pub mod leak;
pub mod report;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::postal::AddressKey;

pub use carriers::Carrier;
pub use config::ScenarioConfig;
pub use engine::{run_all, run_scenario, run_scenario_with_artifacts, ScenarioOutcome};
pub use leak::{scan_for_leaks, LeakFinding, MerchantArtifacts};
pub use report::{ScenarioReport, StrategyAttributes};

/// Share of the US population living in ZIP codes with fewer than 100 people.
pub const SMALL_ZIP_POPULATION_SHARE: f64 = 0.0003;
/// Share of online merchants using address validation of some kind (2023).
pub const MERCHANTS_VALIDATING_SHARE: f64 = 0.53;
/// Share of USPS 2023 revenue from marketing mail. Documentation only.
pub const USPS_MARKETING_MAIL_REVENUE_SHARE: f64 = 0.19;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    TrueAddress,
    POBox,
    VirtualMailbox,
    Aliasing,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::TrueAddress,
        Strategy::POBox,
        Strategy::VirtualMailbox,
        Strategy::Aliasing,
    ];

    /// Whether parcels end up at the customer's home.
    pub fn reaches_home(self) -> bool {
        self != Strategy::POBox
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LogisticsModel {
    InHouse,
    ThirdParty,
    Dropship,
}

impl LogisticsModel {
    pub const ALL: [LogisticsModel; 3] = [
        LogisticsModel::InHouse,
        LogisticsModel::ThirdParty,
        LogisticsModel::Dropship,
    ];
}

/// Cross-merchant record joins: for every pair of merchants, the number of
/// distinct address keys both hold.
pub fn linkability(records: &[Vec<AddressKey>]) -> u64 {
    let sets: Vec<HashSet<&AddressKey>> = records.iter().map(|r| r.iter().collect()).collect();
    let mut joins = 0u64;
    for (i, a) in sets.iter().enumerate() {
        for b in &sets[i + 1..] {
            joins += a.intersection(b).count() as u64;
        }
    }
    joins
}
