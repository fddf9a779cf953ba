//! Executable property suites: normalization, valuation monotonicity and
//! the payment identity, neighbor-report incentive compatibility,
//! individual rationality, differential-privacy ratio bounds and the
//! layered welfare bound.
//!
//! Single-instance checks live in [`checks`]; [`suites`] runs them
//! exhaustively over small instance families and over random instances.

pub mod checks;
pub mod generators;
mod riemann;
pub mod suites;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::MechanismError;
use crate::graph::{BuyerId, GlobalProfile};
use crate::instance::Instance;

pub use checks::{
    check_dp_bound, check_ir, check_neighbor_ic, check_normalization, check_payment_identity,
    check_valuation_ic, check_valuation_monotonicity, check_welfare_bound, rec_closed_form_oracle,
};
pub use suites::{run_suite, SmallFamily, SuiteName, SuiteOptions};

pub const MONOTONICITY_SLACK: f64 = 1e-12;
pub const PAYMENT_IDENTITY_TOL: f64 = 1e-6;
pub const RIEMANN_PANELS: usize = 10_000;
pub const IR_TOL: f64 = 1e-9;
pub const DP_TOL: f64 = 1e-9;
pub const WELFARE_TOL: f64 = 1e-9;
pub const ORACLE_TOL: f64 = 1e-9;
pub const NEIGHBOR_IC_TOL: f64 = 1e-12;
pub const VALUATION_IC_TOL: f64 = 1e-9;
/// Largest neighbor set whose subsets are enumerated.
pub const NEIGHBOR_SUBSET_LIMIT: usize = 12;

/// Outcome of one property over a set of instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: String,
    pub instances: u64,
    /// Largest amount by which the property's inequality was missed
    /// (0 when it always held).
    pub max_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Instance attaining `max_violation`; the counterexample on failure.
    pub worst: Option<Instance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl PropertyReport {
    pub fn new(property: impl Into<String>, tolerance: f64) -> Self {
        PropertyReport {
            property: property.into(),
            instances: 0,
            max_violation: 0.0,
            tolerance,
            passed: true,
            worst: None,
            note: None,
        }
    }

    /// Records one instance. `instance` is only built when it becomes the
    /// worst one seen so far. NaN counts as an infinite violation.
    pub fn record(&mut self, violation: f64, instance: impl FnOnce() -> Instance) {
        self.instances += 1;
        let v = if violation.is_nan() { f64::INFINITY } else { violation };
        if v > self.max_violation || self.worst.is_none() {
            self.max_violation = self.max_violation.max(v) + 0.0;
            self.worst = Some(instance());
        }
        if self.max_violation > self.tolerance {
            self.passed = false;
        }
    }

    /// Marks the property as not checkable on this input.
    pub fn refuse(&mut self, reason: impl Into<String>) {
        self.passed = false;
        self.note = Some(reason.into());
    }

    /// Folds `other` into `self`; on ties the earlier worst case is kept.
    pub fn merge(&mut self, other: PropertyReport) {
        self.instances += other.instances;
        if other.max_violation > self.max_violation || self.worst.is_none() {
            self.max_violation = other.max_violation;
            self.worst = other.worst;
        }
        self.passed &= other.passed;
        if self.note.is_none() {
            self.note = other.note;
        }
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} instances={} max_violation={:.3e} tol={:.0e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.property,
            self.instances,
            self.max_violation,
            self.tolerance
        )?;
        if let Some(note) = &self.note {
            write!(f, " ({note})")?;
        }
        Ok(())
    }
}

/// Two profiles that differ only in one buyer's valuation.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborPair {
    pub base: GlobalProfile,
    pub deviated: GlobalProfile,
    pub deviator: BuyerId,
    /// `|v − v'|` under the linear score.
    pub delta_score: f64,
}

impl NeighborPair {
    pub fn new(base: GlobalProfile, deviator: BuyerId, valuation: f64) -> Result<Self, MechanismError> {
        let v = base
            .valuation(deviator)
            .ok_or(MechanismError::Unreachable(deviator))?;
        let deviated = base.with_valuation(deviator, valuation);
        deviated.validate()?;
        Ok(NeighborPair {
            base,
            deviated,
            deviator,
            delta_score: (v - valuation).abs(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::three_node;
    use crate::scoring::ScoreConfig;

    fn inst(note: &str) -> Instance {
        Instance::new(three_node(), &ScoreConfig::new(1.0, 10.0).unwrap()).with_note(note)
    }

    #[test]
    fn report_keeps_worst_instance() {
        let mut r = PropertyReport::new("p", 1e-6);
        r.record(0.0, || inst("a"));
        r.record(1e-8, || inst("b"));
        r.record(1e-9, || inst("c"));
        assert!(r.passed);
        assert_eq!(r.instances, 3);
        assert_eq!(r.worst.as_ref().unwrap().note, "b");
        r.record(f64::NAN, || inst("d"));
        assert!(!r.passed);
        assert_eq!(r.max_violation, f64::INFINITY);
        assert_eq!(r.worst.as_ref().unwrap().note, "d");
    }

    #[test]
    fn merge_is_order_stable() {
        let mut a = PropertyReport::new("p", 1e-6);
        a.record(1e-7, || inst("a"));
        let mut b = PropertyReport::new("p", 1e-6);
        b.record(1e-7, || inst("b"));
        b.record(1e-3, || inst("bad"));
        let mut m = a.clone();
        m.merge(b);
        assert_eq!(m.instances, 3);
        assert!(!m.passed);
        assert_eq!(m.worst.unwrap().note, "bad");
        let mut tie = PropertyReport::new("p", 1e-6);
        tie.record(1e-7, || inst("x"));
        let mut first = a;
        first.merge(tie);
        assert_eq!(first.worst.unwrap().note, "a");
    }

    #[test]
    fn neighbor_pair_differs_in_one_valuation() {
        let pair = NeighborPair::new(three_node(), BuyerId(1), 2.0).unwrap();
        assert_eq!(pair.delta_score, 1.0);
        assert_eq!(pair.deviated.valuation(BuyerId(1)), Some(2.0));
        assert_eq!(pair.deviated.profiles[&BuyerId(1)].neighbors, pair.base.profiles[&BuyerId(1)].neighbors);
        assert!(NeighborPair::new(three_node(), BuyerId(9), 2.0).is_err());
        assert!(NeighborPair::new(three_node(), BuyerId(1), -1.0).is_err());
    }
}
