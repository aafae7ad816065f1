//! Everything a merchant-side party gets to see during a run, and a scanner
//! that looks for customers' true street lines in it.

use serde::{Deserialize, Serialize};

use crate::postal::PostalAddress;
use crate::relay::TrackingView;
use crate::validation::{CheckoutDecision, ValidationResult};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationResponse {
    pub merchant: String,
    pub result: ValidationResult,
    pub decision: CheckoutDecision,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MerchantArtifacts {
    /// Shipping addresses as recorded by merchants at checkout.
    pub order_records: Vec<PostalAddress>,
    /// Outermost labels on parcels that came back to a merchant, fulfiller or mailer.
    pub returned_labels: Vec<PostalAddress>,
    pub tracking_views: Vec<TrackingView>,
    pub validation_responses: Vec<ValidationResponse>,
}

impl MerchantArtifacts {
    /// Each artifact serialized, tagged with its kind and index.
    fn texts(&self) -> Vec<(&'static str, usize, String)> {
        fn enc<T: Serialize>(v: &T) -> String {
            serde_json::to_string(v).expect("artifact serializes")
        }
        let mut out = Vec::new();
        out.extend(self.order_records.iter().enumerate().map(|(i, a)| ("order_record", i, enc(a))));
        out.extend(self.returned_labels.iter().enumerate().map(|(i, a)| ("returned_label", i, enc(a))));
        out.extend(self.tracking_views.iter().enumerate().map(|(i, a)| ("tracking_view", i, enc(a))));
        out.extend(
            self.validation_responses
                .iter()
                .enumerate()
                .map(|(i, a)| ("validation_response", i, enc(a))),
        );
        out
    }

    pub fn len(&self) -> usize {
        self.order_records.len()
            + self.returned_labels.len()
            + self.tracking_views.len()
            + self.validation_responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeakFinding {
    pub artifact: &'static str,
    pub index: usize,
    pub needle: String,
}

/// Case-insensitive substring search of every artifact for every needle.
pub fn scan_for_leaks(artifacts: &MerchantArtifacts, needles: &[String]) -> Vec<LeakFinding> {
    let needles: Vec<(String, &String)> = needles
        .iter()
        .filter(|n| !n.trim().is_empty())
        .map(|n| (n.to_uppercase(), n))
        .collect();
    let mut found = Vec::new();
    for (kind, index, text) in artifacts.texts() {
        let hay = text.to_uppercase();
        for (upper, original) in &needles {
            if hay.contains(upper.as_str()) {
                found.push(LeakFinding {
                    artifact: kind,
                    index,
                    needle: (*original).clone(),
                });
            }
        }
    }
    found
}
