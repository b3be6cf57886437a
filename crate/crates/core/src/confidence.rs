//! Hoeffding bounds, repetition counts and confidence-budget bookkeeping.

use crate::error::{invalid, Error, Result};

/// Default ceiling on repetition counts.
pub const DEFAULT_R_CAP: usize = 10_000;

/// Hoeffding tail `2e^{-2rx²}` for the mean of `r` Bernoulli samples
/// deviating by at least `x`. Returned raw; may exceed 1.
pub fn hoeffding_bound(r: usize, x: f64) -> f64 {
    2.0 * (-2.0 * r as f64 * x * x).exp()
}

/// Clamps a bound to a reportable probability.
pub fn as_probability(bound: f64) -> f64 {
    bound.clamp(0.0, 1.0)
}

/// Failure bound of the repeated-measurement phase estimator,
/// `x(n, r) = 2(n−1)e^{−r/2} + 4e^{−r/8}`.
pub fn pea_failure_bound(n: usize, r: usize) -> f64 {
    let r = r as f64;
    2.0 * (n as f64 - 1.0) * (-r / 2.0).exp() + 4.0 * (-r / 8.0).exp()
}

/// Smallest `r` with `x(n, r) < 1 − c`.
pub fn select_r(n: usize, c: f64) -> Result<usize> {
    select_r_capped(n, c, DEFAULT_R_CAP)
}

pub fn select_r_capped(n: usize, c: f64, cap: usize) -> Result<usize> {
    check_confidence(c)?;
    if n == 0 {
        return invalid("number of bits must be at least 1");
    }
    (1..=cap)
        .find(|&r| pea_failure_bound(n, r) < 1.0 - c)
        .ok_or_else(|| Error::ResourceLimit(format!("no r ≤ {cap} reaches confidence {c} for {n} bits")))
}

/// Smallest `r` with `2e^{−r/8} ≤ failure`; the repetition count for a median of samples.
pub fn select_median_r(failure: f64, cap: usize) -> Result<usize> {
    if !(failure > 0.0 && failure < 1.0) {
        return invalid(format!("failure probability {failure} outside (0, 1)"));
    }
    (1..=cap)
        .find(|&r| 2.0 * (-(r as f64) / 8.0).exp() <= failure)
        .ok_or_else(|| Error::ResourceLimit(format!("no r ≤ {cap} reaches failure {failure}")))
}

/// `1 − (1 − c)/k`: each of `k` independent steps gets an equal share of the failure budget.
pub fn split_confidence(c: f64, k: usize) -> f64 {
    1.0 - (1.0 - c) / k as f64
}

pub fn check_confidence(c: f64) -> Result<()> {
    if !(c > 0.0 && c < 1.0) {
        return invalid(format!("confidence {c} outside (0, 1)"));
    }
    Ok(())
}

/// A total confidence level and the sub-confidences carved out of it.
#[derive(Clone, Debug)]
pub struct ConfidenceBudget {
    total: f64,
    allocations: Vec<(String, f64)>,
}

impl ConfidenceBudget {
    pub fn new(total: f64) -> Result<Self> {
        check_confidence(total)?;
        Ok(Self {
            total,
            allocations: Vec::new(),
        })
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Failure probability not yet allocated.
    pub fn remaining_failure(&self) -> f64 {
        (1.0 - self.total) - self.spent()
    }

    fn spent(&self) -> f64 {
        self.allocations.iter().map(|(_, c)| 1.0 - c).sum()
    }

    /// Reserves `sub_confidence` for `label`; fails if the total failure would exceed `1 − c`.
    pub fn allocate(&mut self, label: impl Into<String>, sub_confidence: f64) -> Result<f64> {
        check_confidence(sub_confidence)?;
        let failure = 1.0 - sub_confidence;
        // relative slack for shares like (1−c)/3 summed three times
        if self.spent() + failure > (1.0 - self.total) * (1.0 + 1e-12) {
            return Err(Error::InvalidOperand(format!(
                "allocating confidence {sub_confidence} overdraws the budget of {}",
                self.total
            )));
        }
        self.allocations.push((label.into(), sub_confidence));
        Ok(sub_confidence)
    }

    pub fn allocations(&self) -> &[(String, f64)] {
        &self.allocations
    }
}
