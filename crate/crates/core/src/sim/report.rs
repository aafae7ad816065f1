use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Carrier, LogisticsModel, Strategy};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CostTotals {
    /// Labels printed by the carrier for relabels.
    pub carrier_label_cost: f64,
    /// Rent, forwarding and alias fees paid by customers.
    pub customer_fees: f64,
}

impl CostTotals {
    pub fn total(&self) -> f64 {
        self.carrier_label_cost + self.customer_fees
    }
}

/// Counts from one scenario run.
///
/// Partitions: `orders_attempted = orders_declined + checkouts_blocked + orders_placed`,
/// `orders_placed = parcels_shipped`, `deliveries_succeeded + deliveries_failed = parcels_shipped`,
/// `unsolicited_delivered + unsolicited_blocked = unsolicited_attempts`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub strategy: Strategy,
    pub seed: u64,
    pub orders_attempted: u64,
    /// Orders skipped because the merchant's carrier offers no aliasing.
    pub orders_declined: u64,
    pub checkouts_blocked: u64,
    pub checkout_warnings: u64,
    pub orders_placed: u64,
    pub parcels_shipped: u64,
    pub non_usps_parcels: u64,
    pub deliveries_succeeded: u64,
    pub deliveries_failed: u64,
    pub home_deliveries: u64,
    pub returns_to_sender: u64,
    pub relabels: u64,
    pub forwarding_actions_required: u64,
    pub unsolicited_attempts: u64,
    pub unsolicited_delivered: u64,
    pub unsolicited_blocked: u64,
    pub attribution_hits: u64,
    pub linkability: u64,
    pub space_limit: Option<u32>,
    pub parcels_by_carrier: BTreeMap<Carrier, u64>,
    pub parcels_by_logistics: BTreeMap<LogisticsModel, u64>,
    pub costs: CostTotals,
}

impl ScenarioReport {
    pub fn empty(strategy: Strategy, seed: u64) -> Self {
        ScenarioReport {
            strategy,
            seed,
            orders_attempted: 0,
            orders_declined: 0,
            checkouts_blocked: 0,
            checkout_warnings: 0,
            orders_placed: 0,
            parcels_shipped: 0,
            non_usps_parcels: 0,
            deliveries_succeeded: 0,
            deliveries_failed: 0,
            home_deliveries: 0,
            returns_to_sender: 0,
            relabels: 0,
            forwarding_actions_required: 0,
            unsolicited_attempts: 0,
            unsolicited_delivered: 0,
            unsolicited_blocked: 0,
            attribution_hits: 0,
            linkability: 0,
            space_limit: None,
            parcels_by_carrier: BTreeMap::new(),
            parcels_by_logistics: BTreeMap::new(),
            costs: CostTotals::default(),
        }
    }

    /// Every partition identity holds.
    pub fn is_conserved(&self) -> bool {
        self.orders_attempted == self.orders_declined + self.checkouts_blocked + self.orders_placed
            && self.orders_placed == self.parcels_shipped
            && self.deliveries_succeeded + self.deliveries_failed == self.parcels_shipped
            && self.unsolicited_delivered + self.unsolicited_blocked == self.unsolicited_attempts
            && self.parcels_by_carrier.values().sum::<u64>() == self.parcels_shipped
            && self.parcels_by_logistics.values().sum::<u64>() == self.parcels_shipped
    }

    /// Yes/no attributes read off the measured counts.
    pub fn attributes(&self) -> StrategyAttributes {
        StrategyAttributes {
            sends_to_home: self.home_deliveries > 0,
            requires_forwarding_input: self.forwarding_actions_required > 0,
            receives_from_all_carriers: self.orders_declined == 0 && self.deliveries_failed == 0,
            space_limited: self.space_limit.is_some(),
            limits_data_coupling: self.linkability == 0,
            limits_unsolicited_mail: self.unsolicited_delivered == 0,
            additional_costs: self.costs.total() > 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// One column of the strategy comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyAttributes {
    pub sends_to_home: bool,
    pub requires_forwarding_input: bool,
    pub receives_from_all_carriers: bool,
    pub space_limited: bool,
    pub limits_data_coupling: bool,
    pub limits_unsolicited_mail: bool,
    pub additional_costs: bool,
}

impl StrategyAttributes {
    pub fn rows(&self) -> [(&'static str, bool); 7] {
        [
            ("Able to send parcels to home address", self.sends_to_home),
            ("Requires customer input to forward", self.requires_forwarding_input),
            ("Can receive packages from all carriers", self.receives_from_all_carriers),
            ("Space limitations", self.space_limited),
            ("Limits data coupling", self.limits_data_coupling),
            ("Limits unsolicited mail", self.limits_unsolicited_mail),
            ("Additional costs involved", self.additional_costs),
        ]
    }
}

impl fmt::Display for ScenarioReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "strategy {} (seed {})", self.strategy, self.seed)?;
        let rows: [(&str, u64); 19] = [
            ("orders attempted", self.orders_attempted),
            ("orders declined", self.orders_declined),
            ("checkouts blocked", self.checkouts_blocked),
            ("checkout warnings", self.checkout_warnings),
            ("orders placed", self.orders_placed),
            ("parcels shipped", self.parcels_shipped),
            ("non-USPS parcels", self.non_usps_parcels),
            ("deliveries succeeded", self.deliveries_succeeded),
            ("deliveries failed", self.deliveries_failed),
            ("home deliveries", self.home_deliveries),
            ("returns to sender", self.returns_to_sender),
            ("relabels", self.relabels),
            ("forwarding actions", self.forwarding_actions_required),
            ("unsolicited attempts", self.unsolicited_attempts),
            ("unsolicited delivered", self.unsolicited_delivered),
            ("unsolicited blocked", self.unsolicited_blocked),
            ("attribution hits", self.attribution_hits),
            ("linkability joins", self.linkability),
            ("space limit", u64::from(self.space_limit.unwrap_or(0))),
        ];
        for (name, v) in rows {
            writeln!(f, "  {name:<24}{v:>10}")?;
        }
        writeln!(f, "  {:<24}{:>10.2}", "carrier label cost", self.costs.carrier_label_cost)?;
        write!(f, "  {:<24}{:>10.2}", "customer fees", self.costs.customer_fees)
    }
}

/// Side-by-side yes/no table for several runs.
pub fn comparison_table(reports: &[ScenarioReport]) -> String {
    let mut out = format!("{:<40}", "Attribute");
    for r in reports {
        out.push_str(&format!("{:>16}", r.strategy.to_string()));
    }
    out.push('\n');
    let attrs: Vec<_> = reports.iter().map(ScenarioReport::attributes).collect();
    for row in 0..7 {
        let name = StrategyAttributes::rows(&attrs[0])[row].0;
        out.push_str(&format!("{name:<40}"));
        for a in &attrs {
            out.push_str(&format!("{:>16}", if a.rows()[row].1 { "Yes" } else { "No" }));
        }
        out.push('\n');
    }
    out
}
