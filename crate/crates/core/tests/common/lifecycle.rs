//! Model-based check of the registry lifecycle over random operation sequences.

use std::collections::HashMap;

use chrono::Duration;
use mailalias_core::registry::{AliasStatus, Refusal};
use mailalias_core::{AliasCode, IssueRequest, PostalAddress, Registry, RegistryConfig, Resolution, Timestamp};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{resident, t0};

#[derive(Debug, Clone)]
pub enum Op {
    Issue {
        who: usize,
        validity: Option<u32>,
        subscription: bool,
    },
    Resolve(usize),
    Revoke(usize),
    SetValidity(usize, Option<u32>),
    LookupShort(usize),
    Advance(u32),
    Sweep,
}

fn validity() -> impl Strategy<Value = Option<u32>> {
    prop_oneof![3 => (1u32..4).prop_map(Some), 1 => Just(None)]
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        3 => (0usize..10, validity(), any::<bool>()).prop_map(|(who, validity, s)| Op::Issue {
            who,
            validity,
            subscription: s && who % 3 == 0,
        }),
        4 => any::<usize>().prop_map(Op::Resolve),
        1 => any::<usize>().prop_map(Op::Revoke),
        1 => (any::<usize>(), validity()).prop_map(|(i, v)| Op::SetValidity(i, v)),
        2 => any::<usize>().prop_map(Op::LookupShort),
        3 => (1u32..120).prop_map(Op::Advance),
        1 => Just(Op::Sweep),
    ]
}

/// A seed for the registry's RNG plus the operation list.
pub fn sequence() -> impl Strategy<Value = (u64, Vec<Op>)> {
    (any::<u64>(), prop::collection::vec(op(), 1..40))
}

struct Model {
    true_address: PostalAddress,
    status: AliasStatus,
    first_used: Option<Timestamp>,
    validity: Option<u32>,
    subscription: bool,
}

impl Model {
    fn status_at(&self, now: Timestamp) -> AliasStatus {
        if self.status != AliasStatus::Active || self.subscription {
            return self.status;
        }
        match (self.validity, self.first_used) {
            (Some(d), Some(f)) if now > f + Duration::days(i64::from(d)) => AliasStatus::Expired,
            _ => self.status,
        }
    }

    fn settle(&mut self, now: Timestamp) -> AliasStatus {
        self.status = self.status_at(now);
        self.status
    }
}

/// Run one sequence against a fresh registry and an independent model.
pub fn check_sequence(seed: u64, ops: &[Op]) -> Result<(), TestCaseError> {
    let reg = Registry::new(RegistryConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut now = t0();
    let mut codes: Vec<AliasCode> = Vec::new();
    let mut model: HashMap<AliasCode, Model> = HashMap::new();
    let mut last_stored: HashMap<AliasCode, AliasStatus> = HashMap::new();
    let pick = |codes: &[AliasCode], i: usize| (!codes.is_empty()).then(|| codes[i % codes.len()]);

    for op in ops {
        match op {
            Op::Issue {
                who,
                validity,
                subscription,
            } => {
                let addr = resident(*who);
                let mut req = IssueRequest::new(addr.clone()).for_merchant(&format!("m{who}.example"));
                if let Some(d) = validity {
                    req = req.validity_days(*d);
                }
                if *subscription {
                    req = req.subscription();
                }
                let rec = reg.issue(&req, now, &mut rng).unwrap();
                prop_assert_eq!(rec.status, AliasStatus::Issued);
                prop_assert!(!model.contains_key(&rec.alias_code), "duplicate alias");
                prop_assert_eq!(rec.alias_address.zip(), addr.zip());
                codes.push(rec.alias_code);
                model.insert(
                    rec.alias_code,
                    Model {
                        true_address: addr,
                        status: AliasStatus::Issued,
                        first_used: None,
                        validity: validity.or(Some(30)),
                        subscription: *subscription,
                    },
                );
            }
            Op::Resolve(i) => {
                let Some(code) = pick(&codes, *i) else { continue };
                let m = model.get_mut(&code).unwrap();
                let got = reg.resolve(&code, now).unwrap();
                match m.settle(now) {
                    AliasStatus::Issued | AliasStatus::Active => {
                        prop_assert_eq!(got, Resolution::Deliver(m.true_address.clone()));
                        if m.status == AliasStatus::Issued {
                            m.status = AliasStatus::Active;
                            m.first_used = Some(now);
                        }
                    }
                    AliasStatus::Expired => {
                        prop_assert_eq!(got, Resolution::Refused(Refusal::Expired))
                    }
                    AliasStatus::Revoked => {
                        prop_assert_eq!(got, Resolution::Refused(Refusal::Revoked))
                    }
                }
            }
            Op::Revoke(i) => {
                let Some(code) = pick(&codes, *i) else { continue };
                let m = model.get_mut(&code).unwrap();
                let got = reg.revoke(&code, now);
                if m.settle(now).is_live() {
                    prop_assert!(got.is_ok());
                    m.status = AliasStatus::Revoked;
                } else {
                    prop_assert!(got.is_err());
                }
            }
            Op::SetValidity(i, v) => {
                let Some(code) = pick(&codes, *i) else { continue };
                let m = model.get_mut(&code).unwrap();
                let got = reg.set_validity(&code, *v, now);
                if m.settle(now).is_live() {
                    prop_assert!(got.is_ok());
                    m.validity = *v;
                } else {
                    prop_assert!(got.is_err());
                }
            }
            Op::LookupShort(i) => {
                let Some(code) = pick(&codes, *i) else { continue };
                let sc = reg.lookup(&code).unwrap().short_code;
                let found = reg.lookup_by_short_code(&sc).unwrap();
                prop_assert_eq!(found.alias_code, code);
                let text: mailalias_core::registry::ShortCode = sc.to_string().to_lowercase().parse().unwrap();
                prop_assert_eq!(text, sc);
            }
            Op::Advance(h) => now += Duration::hours(i64::from(*h)),
            Op::Sweep => {
                reg.sweep_expiry(now).unwrap();
                for m in model.values_mut() {
                    m.settle(now);
                }
            }
        }

        for (code, m) in &model {
            prop_assert_eq!(reg.status_at(code, now), Some(m.status_at(now)));
            let stored = reg.lookup(code).unwrap().status;
            if let Some(prev) = last_stored.insert(*code, stored) {
                prop_assert!(
                    prev == stored || prev.can_become(stored),
                    "illegal edge {:?} -> {:?}",
                    prev,
                    stored
                );
            }
        }
    }
    prop_assert_eq!(reg.len(), codes.len());
    prop_assert_eq!(reg.short_code_count(), codes.len());
    Ok(())
}
