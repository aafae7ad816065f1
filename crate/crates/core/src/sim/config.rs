use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::carriers::Carrier;
use super::{LogisticsModel, Strategy};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading scenario config: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing scenario config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("scenario config: {0}")]
    Invalid(String),
}

/// Relative shares; need not sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CarrierWeights {
    pub usps: f64,
    pub ups: f64,
    pub amazon_logistics: f64,
    pub fedex: f64,
    pub other: f64,
}

impl Default for CarrierWeights {
    /// 2024 parcel volume, in billions.
    fn default() -> Self {
        CarrierWeights {
            usps: 6.9,
            ups: 4.7,
            amazon_logistics: 6.3,
            fedex: 3.7,
            other: 0.8,
        }
    }
}

impl CarrierWeights {
    pub fn weight(&self, c: Carrier) -> f64 {
        match c {
            Carrier::Usps => self.usps,
            Carrier::Ups => self.ups,
            Carrier::AmazonLogistics => self.amazon_logistics,
            Carrier::Fedex => self.fedex,
            Carrier::Other => self.other,
        }
    }

    pub fn only(c: Carrier) -> Self {
        let mut w = CarrierWeights {
            usps: 0.0,
            ups: 0.0,
            amazon_logistics: 0.0,
            fedex: 0.0,
            other: 0.0,
        };
        match c {
            Carrier::Usps => w.usps = 1.0,
            Carrier::Ups => w.ups = 1.0,
            Carrier::AmazonLogistics => w.amazon_logistics = 1.0,
            Carrier::Fedex => w.fedex = 1.0,
            Carrier::Other => w.other = 1.0,
        }
        w
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticsMix {
    pub in_house: f64,
    pub third_party: f64,
    pub dropship: f64,
}

impl Default for LogisticsMix {
    fn default() -> Self {
        LogisticsMix {
            in_house: 0.5,
            third_party: 0.3,
            dropship: 0.2,
        }
    }
}

impl LogisticsMix {
    pub fn weight(&self, m: LogisticsModel) -> f64 {
        match m {
            LogisticsModel::InHouse => self.in_house,
            LogisticsModel::ThirdParty => self.third_party,
            LogisticsModel::Dropship => self.dropship,
        }
    }
}

/// Share of merchants with no validation, soft validation and hard validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidationMix {
    pub none: f64,
    pub soft: f64,
    pub hard: f64,
}

impl Default for ValidationMix {
    /// 53% of merchants validate; split evenly between hard and soft.
    fn default() -> Self {
        ValidationMix {
            none: 0.47,
            soft: 0.265,
            hard: 0.265,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrategyFees {
    pub label_unit_cost: f64,
    pub alias_fee_per_parcel: f64,
    pub po_box_monthly: f64,
    pub virtual_mailbox_monthly: f64,
    pub virtual_forward_fee: f64,
}

impl Default for StrategyFees {
    fn default() -> Self {
        StrategyFees {
            label_unit_cost: 0.05,
            alias_fee_per_parcel: 0.0,
            po_box_monthly: 10.0,
            virtual_mailbox_monthly: 15.0,
            virtual_forward_fee: 2.0,
        }
    }
}

/// Items a destination can hold; `None` is unbounded (a home).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Capacities {
    pub po_box: Option<u32>,
    pub virtual_mailbox: Option<u32>,
}

impl Default for Capacities {
    fn default() -> Self {
        Capacities {
            po_box: Some(10),
            virtual_mailbox: Some(30),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub customers: usize,
    pub merchants: usize,
    pub orders: usize,
    pub strategy: Strategy,
    pub carrier_weights: CarrierWeights,
    /// Carriers that run an alias registry.
    pub aliasing_carriers: Vec<Carrier>,
    pub logistics_mix: LogisticsMix,
    pub validation_mix: ValidationMix,
    /// Of validating merchants, the share that use the carrier's own API (which knows aliases).
    pub carrier_validator_share: f64,
    /// Chance a merchant mails ads to every address it has seen.
    pub unsolicited_probability: f64,
    pub unsolicited_delay_days: u32,
    pub alias_validity_days: u32,
    pub horizon_days: u32,
    pub transit_days: u32,
    pub undeliverable_rate: f64,
    pub fees: StrategyFees,
    pub capacities: Capacities,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 1,
            customers: 50,
            merchants: 10,
            orders: 500,
            strategy: Strategy::Aliasing,
            carrier_weights: CarrierWeights::default(),
            aliasing_carriers: vec![Carrier::Usps, Carrier::Ups, Carrier::Fedex],
            logistics_mix: LogisticsMix::default(),
            validation_mix: ValidationMix::default(),
            carrier_validator_share: 0.5,
            unsolicited_probability: 0.5,
            unsolicited_delay_days: 60,
            alias_validity_days: 30,
            horizon_days: 180,
            transit_days: 3,
            undeliverable_rate: 0.0,
            fees: StrategyFees::default(),
            capacities: Capacities::default(),
        }
    }
}

fn unit(name: &str, v: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(ConfigError::Invalid(format!("{name} must lie in [0, 1], got {v}")))
    }
}

fn weights(name: &str, ws: &[f64]) -> Result<(), ConfigError> {
    if ws.iter().any(|w| !w.is_finite() || *w < 0.0) || ws.iter().sum::<f64>() <= 0.0 {
        return Err(ConfigError::Invalid(format!(
            "{name} weights must be non-negative with a positive sum"
        )));
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn with_strategy(&self, strategy: Strategy) -> Self {
        ScenarioConfig {
            strategy,
            ..self.clone()
        }
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        let cw: Vec<f64> = Carrier::ALL
            .iter()
            .map(|c| self.carrier_weights.weight(*c))
            .collect();
        weights("carrier", &cw)?;
        let lm = &self.logistics_mix;
        weights("logistics", &[lm.in_house, lm.third_party, lm.dropship])?;
        let vm = &self.validation_mix;
        weights("validation", &[vm.none, vm.soft, vm.hard])?;
        unit("carrier_validator_share", self.carrier_validator_share)?;
        unit("unsolicited_probability", self.unsolicited_probability)?;
        unit("undeliverable_rate", self.undeliverable_rate)?;
        if self.alias_validity_days == 0 {
            return Err(ConfigError::Invalid("alias_validity_days must be positive".into()));
        }
        if self.horizon_days == 0 {
            return Err(ConfigError::Invalid("horizon_days must be positive".into()));
        }
        let f = &self.fees;
        if [
            f.label_unit_cost,
            f.alias_fee_per_parcel,
            f.po_box_monthly,
            f.virtual_mailbox_monthly,
            f.virtual_forward_fee,
        ]
        .iter()
        .any(|v| !v.is_finite() || *v < 0.0)
        {
            return Err(ConfigError::Invalid("fees must be non-negative".into()));
        }
        Ok(())
    }
}
