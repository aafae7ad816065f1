use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Carrier {
    Usps,
    Ups,
    AmazonLogistics,
    Fedex,
    Other,
}

impl Carrier {
    pub const ALL: [Carrier; 5] = [
        Carrier::Usps,
        Carrier::Ups,
        Carrier::AmazonLogistics,
        Carrier::Fedex,
        Carrier::Other,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Carrier::Usps => "USPS",
            Carrier::Ups => "UPS",
            Carrier::AmazonLogistics => "Amazon Logistics",
            Carrier::Fedex => "FedEx",
            Carrier::Other => "Other",
        }
    }

    /// US parcels carried in 2024.
    pub fn volume_2024(self) -> u64 {
        match self {
            Carrier::Usps => 6_900_000_000,
            Carrier::Ups => 4_700_000_000,
            Carrier::AmazonLogistics => 6_300_000_000,
            Carrier::Fedex => 3_700_000_000,
            Carrier::Other => 800_000_000,
        }
    }

    /// Carrier that is also the merchant cannot keep the address from the merchant.
    pub fn can_offer_aliasing(self) -> bool {
        self != Carrier::AmazonLogistics
    }
}

impl fmt::Display for Carrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Total US parcels in 2024.
pub const US_PARCELS_2024: u64 = 22_400_000_000;

/// Sum of the per-carrier 2024 volumes.
pub fn table_volume_total() -> u64 {
    Carrier::ALL.iter().map(|c| c.volume_2024()).sum()
}
