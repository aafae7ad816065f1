//! Shared fixtures for the integration tests and the acceptance runner.
#![allow(dead_code)]

pub mod lifecycle;

use chrono::{TimeZone, Utc};
use mailalias_core::{PostalAddress, Timestamp};

pub fn t0() -> Timestamp {
    Utc.with_ymd_and_hms(2025, 3, 1, 12, 0, 0).unwrap()
}

pub fn john() -> PostalAddress {
    PostalAddress::new("John Smith", "123 Main Street", Some("Unit 456"), "Any Town", "NY", "12345")
        .unwrap()
}

pub const LOCALITIES: [(&str, &str, &str); 5] = [
    ("Any Town", "NY", "12345"),
    ("Chicago", "IL", "60601"),
    ("San Francisco", "CA", "94103"),
    ("Austin", "TX", "73301"),
    ("Seattle", "WA", "98101"),
];

pub fn resident(i: usize) -> PostalAddress {
    let (city, state, zip) = LOCALITIES[i % LOCALITIES.len()];
    PostalAddress::new(
        &format!("Resident {i}"),
        &format!("{} Oak Avenue", 100 + i),
        None,
        city,
        state,
        zip,
    )
    .unwrap()
}
