//! Carrier-side cost arithmetic, generic over the scalar so the same
//! formulas run in `f64` or in exact rationals.

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

use crate::codec::NamespaceConfig;

/// Numeric types the cost model accepts.
pub trait Scalar: Num + Copy + PartialOrd + FromPrimitive + Debug {}

impl<T> Scalar for T where T: Num + Copy + PartialOrd + FromPrimitive + Debug {}

fn int<T: Scalar>(v: i64) -> T {
    T::from_i64(v).expect("small integers are representable")
}

/// `cents / 100` in the target scalar.
pub fn from_cents<T: Scalar>(cents: i64) -> T {
    int::<T>(cents) / int::<T>(100)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel<T> {
    /// Price of one thermal label.
    pub label_unit_cost: T,
    pub employee_count: T,
    pub training_minutes: T,
    pub hourly_rate: T,
    /// Low and high estimate for the software build-out.
    pub software_dev_estimate: (T, T),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cost field `{0}` is negative")]
pub struct NegativeCost(pub &'static str);

impl<T: Scalar> CostModel<T> {
    /// The published figures: $0.05 labels, 121,000 retail associates,
    /// 15 minutes of training at $20/h, and software in the low hundreds of
    /// thousands (taken here as 100k to 300k).
    pub fn reported() -> Self {
        CostModel {
            label_unit_cost: from_cents(5),
            employee_count: int(121_000),
            training_minutes: int(15),
            hourly_rate: int(20),
            software_dev_estimate: (int(100_000), int(300_000)),
        }
    }

    pub fn check(&self) -> Result<(), NegativeCost> {
        let zero = T::zero();
        let fields = [
            ("label_unit_cost", self.label_unit_cost),
            ("employee_count", self.employee_count),
            ("training_minutes", self.training_minutes),
            ("hourly_rate", self.hourly_rate),
            ("software_dev_estimate.0", self.software_dev_estimate.0),
            ("software_dev_estimate.1", self.software_dev_estimate.1),
        ];
        match fields.iter().find(|(_, v)| *v < zero) {
            Some((name, _)) => Err(NegativeCost(name)),
            None => Ok(()),
        }
    }

    pub fn training_cost(&self) -> T {
        training_cost(self.employee_count, self.training_minutes, self.hourly_rate)
    }

    /// Label spend for `parcels` relabels.
    pub fn relabel_cost(&self, parcels: u64) -> T {
        T::from_u64(parcels).expect("parcel count fits the scalar") * self.label_unit_cost
    }

    /// Training plus software, low and high.
    pub fn upfront_range(&self) -> (T, T) {
        let t = self.training_cost();
        (t + self.software_dev_estimate.0, t + self.software_dev_estimate.1)
    }
}

/// `employees × minutes/60 × rate`.
pub fn training_cost<T: Scalar>(employees: T, minutes: T, rate: T) -> T {
    employees * minutes * rate / int(60)
}

/// Namespace capacity per ZIP-year divided by a yearly volume. `None` for zero volume.
pub fn capacity_check<T: Scalar>(volume_total: T, namespace: &NamespaceConfig) -> Option<T> {
    if volume_total == T::zero() {
        return None;
    }
    let capacity = T::from_u128(namespace.capacity_per_zip_year())?;
    Some(capacity / volume_total)
}
