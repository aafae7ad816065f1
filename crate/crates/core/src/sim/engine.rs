use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::sync::Arc;

use chrono::{Duration, TimeZone, Utc};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ScenarioConfig;
use super::leak::{MerchantArtifacts, ValidationResponse};
use super::report::ScenarioReport;
use super::{linkability, Carrier, LogisticsModel, Strategy};
use crate::codec::{AliasAddressTemplate, AliasCode};
use crate::postal::{address_key, AddressKey, PostalAddress};
use crate::registry::{Attribution, IssueRequest, Registry, RegistryConfig};
use crate::relay::{Parcel, ParcelId, ParcelState, Relay, ViewerRole};
use crate::validation::{CheckoutDecision, OfficialDb, ValidationDb, ValidationMode};
use crate::Timestamp;

const LOCALITIES: [(&str, &str, &str); 5] = [
    ("Any Town", "NY", "12345"),
    ("Chicago", "IL", "60601"),
    ("San Francisco", "CA", "94103"),
    ("Austin", "TX", "73301"),
    ("Seattle", "WA", "98101"),
];
const STREETS: [&str; 6] = [
    "Birch Road",
    "Willow Court",
    "Hillcrest Avenue",
    "Lakeview Drive",
    "Orchard Street",
    "Sunset Boulevard",
];
const FIRST: [&str; 8] = ["Ada", "Ben", "Cora", "Dev", "Eli", "Fay", "Gus", "Hana"];
const LAST: [&str; 7] = ["Ames", "Brook", "Cruz", "Diaz", "Eng", "Ford", "Gray"];

/// Report plus what was needed to audit it.
pub struct ScenarioOutcome {
    pub report: ScenarioReport,
    pub artifacts: MerchantArtifacts,
    /// True line1 of every customer who used an alias.
    pub aliased_true_lines: Vec<String>,
    /// Attribution events raised across all carriers.
    pub refused_attributions: u64,
}

struct Customer {
    home: PostalAddress,
    po_box: PostalAddress,
    mailbox: PostalAddress,
}

#[derive(Clone, Copy)]
enum Validator {
    CarrierApi,
    ThirdParty,
}

struct Merchant {
    domain: String,
    carrier: Carrier,
    logistics: LogisticsModel,
    validation: Option<(ValidationMode, Validator)>,
    mails_ads: bool,
}

impl Merchant {
    fn fulfiller(&self) -> String {
        match self.logistics {
            LogisticsModel::InHouse => self.domain.clone(),
            LogisticsModel::ThirdParty => format!("3pl-for-{}", self.domain),
            LogisticsModel::Dropship => format!("supplier-for-{}", self.domain),
        }
    }
}

enum SimEvent {
    Order { customer: usize, merchant: usize },
    Ship { merchant: usize, label: PostalAddress },
    Arrive { merchant: usize, parcel: Parcel },
    Ad { merchant: usize, address: PostalAddress, alias: Option<AliasCode> },
}

struct Scheduled {
    at: Timestamp,
    seq: u64,
    event: SimEvent,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        (self.at, self.seq) == (other.at, other.seq)
    }
}
impl Eq for Scheduled {}
impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Scheduled {
    // min-heap on (time, insertion order)
    fn cmp(&self, other: &Self) -> Ordering {
        (other.at, other.seq).cmp(&(self.at, self.seq))
    }
}

struct World {
    cfg: ScenarioConfig,
    rng: ChaCha8Rng,
    customers: Vec<Customer>,
    merchants: Vec<Merchant>,
    relays: BTreeMap<Carrier, Relay>,
    carrier_validators: BTreeMap<Carrier, ValidationDb>,
    third_party_validator: ValidationDb,
    queue: BinaryHeap<Scheduled>,
    seq: u64,
    parcel_seq: u64,
    report: ScenarioReport,
    artifacts: MerchantArtifacts,
    merchant_records: Vec<Vec<AddressKey>>,
    aliased_customers: Vec<bool>,
    active_customers: Vec<bool>,
}

fn start_time() -> Timestamp {
    Utc.with_ymd_and_hms(2025, 1, 1, 0, 0, 0).unwrap()
}

fn pick<R: Rng>(rng: &mut R, weights: &[f64]) -> usize {
    WeightedIndex::new(weights)
        .expect("weights checked by config")
        .sample(rng)
}

impl World {
    fn build(cfg: &ScenarioConfig) -> World {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let customers: Vec<Customer> = (0..cfg.customers)
            .map(|i| {
                let (city, state, zip) = LOCALITIES[rng.random_range(0..LOCALITIES.len())];
                let name = format!(
                    "{} {}",
                    FIRST[rng.random_range(0..FIRST.len())],
                    LAST[rng.random_range(0..LAST.len())]
                );
                let street = STREETS[rng.random_range(0..STREETS.len())];
                let unit = rng.random_bool(0.4).then(|| format!("Apt {}", rng.random_range(1..40)));
                let home = PostalAddress::new(
                    &name,
                    &format!("{} {street}", 1000 + i),
                    unit.as_deref(),
                    city,
                    state,
                    zip,
                )
                .expect("synthetic address fits");
                let po_box =
                    PostalAddress::new(&name, &format!("PO Box {}", 5000 + i), None, city, state, zip)
                        .expect("synthetic address fits");
                let mailbox = PostalAddress::new(
                    &name,
                    "400 Commerce Plaza",
                    Some(&format!("Ste {}", 100 + i)),
                    city,
                    state,
                    zip,
                )
                .expect("synthetic address fits");
                Customer {
                    home,
                    po_box,
                    mailbox,
                }
            })
            .collect();

        let carrier_w: Vec<f64> = Carrier::ALL
            .iter()
            .map(|c| cfg.carrier_weights.weight(*c))
            .collect();
        let logistics_w: Vec<f64> = LogisticsModel::ALL
            .iter()
            .map(|m| cfg.logistics_mix.weight(*m))
            .collect();
        let vm = &cfg.validation_mix;
        let validation_w = [vm.none, vm.soft, vm.hard];
        let merchants: Vec<Merchant> = (0..cfg.merchants)
            .map(|j| {
                let carrier = Carrier::ALL[pick(&mut rng, &carrier_w)];
                let logistics = LogisticsModel::ALL[pick(&mut rng, &logistics_w)];
                let mode = match pick(&mut rng, &validation_w) {
                    0 => None,
                    1 => Some(ValidationMode::Soft),
                    _ => Some(ValidationMode::Hard),
                };
                let validator = if rng.random_bool(cfg.carrier_validator_share) {
                    Validator::CarrierApi
                } else {
                    Validator::ThirdParty
                };
                Merchant {
                    domain: format!("merchant-{j:02}.example"),
                    carrier,
                    logistics,
                    validation: mode.map(|m| (m, validator)),
                    mails_ads: rng.random_bool(cfg.unsolicited_probability),
                }
            })
            .collect();

        let mut official = OfficialDb::bundled();
        for c in &customers {
            official.insert(&c.home);
            official.insert(&c.po_box);
            official.insert(&c.mailbox);
        }
        let official = Arc::new(official);

        let mut relays = BTreeMap::new();
        let mut carrier_validators = BTreeMap::new();
        for carrier in Carrier::ALL {
            let reg = Arc::new(
                Registry::new(RegistryConfig {
                    template: AliasAddressTemplate {
                        carrier_name: format!("{} Alias", carrier.label()),
                        ..AliasAddressTemplate::default()
                    },
                    default_validity_days: Some(cfg.alias_validity_days),
                    ..RegistryConfig::default()
                })
                .expect("template fits"),
            );
            carrier_validators.insert(carrier, ValidationDb::with_aliases(official.clone(), reg.clone()));
            relays.insert(carrier, Relay::new(reg));
        }

        let mut report = ScenarioReport::empty(cfg.strategy, cfg.seed);
        report.space_limit = match cfg.strategy {
            Strategy::POBox => cfg.capacities.po_box,
            Strategy::VirtualMailbox => cfg.capacities.virtual_mailbox,
            _ => None,
        };
        let n_customers = customers.len();
        let n_merchants = merchants.len();
        World {
            cfg: cfg.clone(),
            rng,
            customers,
            merchants,
            relays,
            carrier_validators,
            third_party_validator: ValidationDb::official_only(official),
            queue: BinaryHeap::new(),
            seq: 0,
            parcel_seq: 0,
            report,
            artifacts: MerchantArtifacts::default(),
            merchant_records: vec![Vec::new(); n_merchants],
            aliased_customers: vec![false; n_customers],
            active_customers: vec![false; n_customers],
        }
    }

    fn schedule(&mut self, at: Timestamp, event: SimEvent) {
        self.seq += 1;
        self.queue.push(Scheduled {
            at,
            seq: self.seq,
            event,
        });
    }

    fn new_parcel_id(&mut self) -> ParcelId {
        self.parcel_seq += 1;
        ParcelId(format!("SIM-{:06}", self.parcel_seq))
    }

    fn aliasing_available(&self, carrier: Carrier) -> bool {
        carrier.can_offer_aliasing() && self.cfg.aliasing_carriers.contains(&carrier)
    }

    fn on_order(&mut self, now: Timestamp, ci: usize, mi: usize) {
        self.report.orders_attempted += 1;
        let carrier = self.merchants[mi].carrier;
        let mut issued: Option<AliasCode> = None;
        let ship_to = match self.cfg.strategy {
            Strategy::TrueAddress => self.customers[ci].home.clone(),
            Strategy::POBox => self.customers[ci].po_box.clone(),
            Strategy::VirtualMailbox => self.customers[ci].mailbox.clone(),
            Strategy::Aliasing => {
                if !self.aliasing_available(carrier) {
                    self.report.orders_declined += 1;
                    return;
                }
                let req = IssueRequest::new(self.customers[ci].home.clone())
                    .for_merchant(&self.merchants[mi].domain)
                    .validity_days(self.cfg.alias_validity_days);
                let rec = self.relays[&carrier]
                    .registry()
                    .issue(&req, now, &mut self.rng)
                    .expect("namespace has room");
                issued = Some(rec.alias_code);
                self.aliased_customers[ci] = true;
                rec.alias_address
            }
        };

        if let Some((mode, validator)) = self.merchants[mi].validation {
            let db = match validator {
                Validator::CarrierApi => &self.carrier_validators[&carrier],
                Validator::ThirdParty => &self.third_party_validator,
            };
            let result = db.validate(&ship_to, now);
            let decision = crate::validation::gate(result, mode);
            self.artifacts.validation_responses.push(ValidationResponse {
                merchant: self.merchants[mi].domain.clone(),
                result,
                decision,
            });
            match decision {
                CheckoutDecision::Blocked => {
                    self.report.checkouts_blocked += 1;
                    if let Some(code) = issued {
                        // the customer cancels the unused alias
                        self.relays[&carrier]
                            .registry()
                            .revoke(&code, now)
                            .expect("fresh alias is live");
                    }
                    return;
                }
                CheckoutDecision::ProceedWithWarning => self.report.checkout_warnings += 1,
                CheckoutDecision::Proceed => {}
            }
        }

        self.report.orders_placed += 1;
        self.active_customers[ci] = true;
        self.merchant_records[mi].push(address_key(&ship_to));
        self.artifacts.order_records.push(ship_to.clone());
        if self.merchants[mi].mails_ads {
            let at = now + Duration::days(i64::from(self.cfg.unsolicited_delay_days));
            self.schedule(
                at,
                SimEvent::Ad {
                    merchant: mi,
                    address: ship_to.clone(),
                    alias: issued,
                },
            );
        }
        self.schedule(
            now + Duration::days(1),
            SimEvent::Ship {
                merchant: mi,
                label: ship_to,
            },
        );
    }

    fn send_back(&mut self, carrier: Carrier, parcel: Parcel, now: Timestamp) {
        let back = self.relays[&carrier]
            .return_to_merchant(parcel, now)
            .expect("parcel is returnable");
        self.report.returns_to_sender += 1;
        self.artifacts.returned_labels.push(back.label().clone());
    }

    fn on_ship(&mut self, now: Timestamp, mi: usize, label: PostalAddress) {
        let (carrier, logistics, fulfiller) = {
            let m = &self.merchants[mi];
            (m.carrier, m.logistics, m.fulfiller())
        };
        self.report.parcels_shipped += 1;
        *self.report.parcels_by_carrier.entry(carrier).or_default() += 1;
        *self.report.parcels_by_logistics.entry(logistics).or_default() += 1;
        if carrier != Carrier::Usps {
            self.report.non_usps_parcels += 1;
        }
        let id = self.new_parcel_id();
        let parcel = Parcel::new(id, &fulfiller, label, now);
        let parcel = self.relays[&carrier]
            .intake(parcel, now)
            .expect("simulated labels are well formed");
        if parcel.state == ParcelState::Refused {
            self.report.deliveries_failed += 1;
            self.send_back(carrier, parcel, now);
            return;
        }
        if parcel.relabel_history().len() > 1 {
            self.report.relabels += 1;
        }
        let po_box_miss = self.cfg.strategy == Strategy::POBox && carrier != Carrier::Usps;
        let undeliverable =
            self.cfg.undeliverable_rate > 0.0 && self.rng.random_bool(self.cfg.undeliverable_rate);
        if po_box_miss || undeliverable {
            self.report.deliveries_failed += 1;
            self.send_back(carrier, parcel, now);
            return;
        }
        self.schedule(
            now + Duration::days(i64::from(self.cfg.transit_days)),
            SimEvent::Arrive { merchant: mi, parcel },
        );
    }

    fn on_arrive(&mut self, now: Timestamp, mi: usize, parcel: Parcel) {
        let relay = &self.relays[&self.merchants[mi].carrier];
        let parcel = relay.dispatch(parcel, now).expect("parcel at carrier");
        let parcel = relay
            .deliver(parcel, now + Duration::hours(6))
            .expect("parcel out for delivery");
        self.report.deliveries_succeeded += 1;
        if self.cfg.strategy.reaches_home() {
            self.report.home_deliveries += 1;
        }
        if self.cfg.strategy == Strategy::VirtualMailbox {
            self.report.forwarding_actions_required += 1;
        }
        self.artifacts
            .tracking_views
            .push(Relay::tracking_view(&parcel, ViewerRole::Merchant));
    }

    fn on_ad(&mut self, now: Timestamp, mi: usize, address: PostalAddress, alias: Option<AliasCode>) {
        self.report.unsolicited_attempts += 1;
        let Some(code) = alias else {
            // Plain addresses, PO boxes and mailboxes all accept marketing mail.
            self.report.unsolicited_delivered += 1;
            return;
        };
        let carrier = self.merchants[mi].carrier;
        let domain = self.merchants[mi].domain.clone();
        let id = self.new_parcel_id();
        let ad = Parcel::new(id, &format!("ads@{domain}"), address, now);
        let ad = self.relays[&carrier].intake(ad, now).expect("alias label is well formed");
        if ad.state == ParcelState::Refused {
            self.report.unsolicited_blocked += 1;
            let note = ad.refusal.as_ref().expect("refused parcels carry a note");
            if note.attribution == Attribution::Merchant(domain) {
                self.report.attribution_hits += 1;
            }
            debug_assert_eq!(ad.alias, Some(code));
            self.send_back(carrier, ad, now);
        } else {
            self.report.unsolicited_delivered += 1;
        }
    }

    fn run(mut self) -> ScenarioOutcome {
        let start = start_time();
        let horizon_secs = i64::from(self.cfg.horizon_days) * 86_400;
        if !self.customers.is_empty() && !self.merchants.is_empty() {
            for _ in 0..self.cfg.orders {
                let at = start + Duration::seconds(self.rng.random_range(0..horizon_secs));
                let customer = self.rng.random_range(0..self.customers.len());
                let merchant = self.rng.random_range(0..self.merchants.len());
                self.schedule(at, SimEvent::Order { customer, merchant });
            }
        }
        while let Some(Scheduled { at, event, .. }) = self.queue.pop() {
            match event {
                SimEvent::Order { customer, merchant } => self.on_order(at, customer, merchant),
                SimEvent::Ship { merchant, label } => self.on_ship(at, merchant, label),
                SimEvent::Arrive { merchant, parcel } => self.on_arrive(at, merchant, parcel),
                SimEvent::Ad {
                    merchant,
                    address,
                    alias,
                } => self.on_ad(at, merchant, address, alias),
            }
        }

        self.report.linkability = linkability(&self.merchant_records);
        let months = f64::from(self.cfg.horizon_days.div_ceil(30));
        let active = self.active_customers.iter().filter(|a| **a).count() as f64;
        let fees = &self.cfg.fees;
        self.report.costs.carrier_label_cost = self.report.relabels as f64 * fees.label_unit_cost;
        self.report.costs.customer_fees = match self.cfg.strategy {
            Strategy::TrueAddress => 0.0,
            Strategy::POBox => active * months * fees.po_box_monthly,
            Strategy::VirtualMailbox => {
                active * months * fees.virtual_mailbox_monthly
                    + self.report.forwarding_actions_required as f64 * fees.virtual_forward_fee
            }
            Strategy::Aliasing => self.report.relabels as f64 * fees.alias_fee_per_parcel,
        };

        let aliased_true_lines = self
            .customers
            .iter()
            .zip(&self.aliased_customers)
            .filter(|(_, used)| **used)
            .map(|(c, _)| c.home.line1().to_string())
            .collect();
        let refused_attributions = self
            .relays
            .values()
            .map(|r| r.attributions().len() as u64)
            .sum();
        ScenarioOutcome {
            report: self.report,
            artifacts: self.artifacts,
            aliased_true_lines,
            refused_attributions,
        }
    }
}

/// Run one scenario and keep the merchant-visible artifacts for auditing.
pub fn run_scenario_with_artifacts(config: &ScenarioConfig) -> ScenarioOutcome {
    World::build(config).run()
}

pub fn run_scenario(config: &ScenarioConfig) -> ScenarioReport {
    run_scenario_with_artifacts(config).report
}

/// The same world under every strategy.
pub fn run_all(config: &ScenarioConfig) -> Vec<ScenarioReport> {
    Strategy::ALL
        .iter()
        .map(|s| run_scenario(&config.with_strategy(*s)))
        .collect()
}
