mod common;

use chrono::Duration;
use mailalias_core::registry::{AliasStatus, Refusal, RegistryEvent};
use mailalias_core::{IssueRequest, Registry, RegistryConfig, Resolution};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::lifecycle::{check_sequence, sequence};
use common::{john, t0};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]
    #[test]
    fn random_sequences_match_model((seed, ops) in sequence()) {
        check_sequence(seed, &ops)?;
    }
}

#[test]
fn journal_round_trip_preserves_every_record() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("events.jsonl");
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (a, b) = {
        let reg = Registry::open(RegistryConfig::default(), &path).unwrap();
        let a = reg.issue(&IssueRequest::new(john()).for_merchant("shop.example"), t0(), &mut rng).unwrap();
        let b = reg.issue(&IssueRequest::new(john()).subscription(), t0(), &mut rng).unwrap();
        reg.resolve(&a.alias_code, t0() + Duration::days(1)).unwrap();
        reg.revoke(&b.alias_code, t0() + Duration::days(2)).unwrap();
        reg.flush().unwrap();
        (a, b)
    };
    let reg = Registry::open(RegistryConfig::default(), &path).unwrap();
    assert_eq!(reg.len(), 2);
    assert_eq!(reg.lookup(&a.alias_code).unwrap().status, AliasStatus::Active);
    assert_eq!(reg.lookup(&b.alias_code).unwrap().status, AliasStatus::Revoked);
    assert_eq!(reg.lookup_by_short_code(&a.short_code).unwrap().alias_code, a.alias_code);
    let late = t0() + Duration::days(40);
    assert_eq!(reg.resolve(&a.alias_code, late).unwrap(), Resolution::Refused(Refusal::Expired));

    let text = std::fs::read_to_string(&path).unwrap();
    let kinds: Vec<String> = text
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["event"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(kinds, ["issued", "issued", "first_use", "revoked", "expired"]);
}

#[test]
fn exported_events_rebuild_the_same_records() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let reg = Registry::new(RegistryConfig::default()).unwrap();
    for i in 0..20 {
        reg.issue(&IssueRequest::new(common::resident(i)), t0(), &mut rng).unwrap();
    }
    let events: Vec<RegistryEvent> = reg.export_events();
    let copy = Registry::replay(RegistryConfig::default(), events).unwrap();
    assert_eq!(copy.records(), reg.records());
}
