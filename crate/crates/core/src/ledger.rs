//! Resource accounting shared by every estimator.

use serde::{Deserialize, Serialize};

/// Counts charged to an estimate.
///
/// `state_preps` is `N`, `evolution_uses` is `M`, `total_time` is `T` (the sum
/// of `|t|` over every use of an evolution operator). `depth` is the length
/// of the longest chain of oracle uses that must run one after another.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[repr(C)]
pub struct ResourceLedger {
    pub state_preps: u64,
    pub evolution_uses: u64,
    pub total_time: f64,
    pub u_uses: u64,
    pub depth: u64,
}

/// What a single use of an oracle costs.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct UseCost {
    pub state_preps: u64,
    pub u_uses: u64,
    pub evolution_uses: u64,
    pub evolution_time: f64,
    pub depth: u64,
}

impl UseCost {
    /// One call of a plain unitary oracle.
    pub const UNITARY: UseCost = UseCost {
        state_preps: 0,
        u_uses: 1,
        evolution_uses: 0,
        evolution_time: 0.0,
        depth: 1,
    };

    /// One call of `e^{-iAt}`.
    pub fn evolution(t: f64) -> Self {
        UseCost {
            evolution_uses: 1,
            evolution_time: t.abs(),
            ..Self::UNITARY
        }
    }

    /// Cost of `k` consecutive uses.
    pub fn times(&self, k: u64) -> Self {
        UseCost {
            state_preps: self.state_preps * k,
            u_uses: self.u_uses * k,
            evolution_uses: self.evolution_uses * k,
            evolution_time: self.evolution_time * k as f64,
            depth: self.depth * k,
        }
    }

    pub fn plus(&self, other: &UseCost) -> Self {
        UseCost {
            state_preps: self.state_preps + other.state_preps,
            u_uses: self.u_uses + other.u_uses,
            evolution_uses: self.evolution_uses + other.evolution_uses,
            evolution_time: self.evolution_time + other.evolution_time,
            depth: self.depth + other.depth,
        }
    }
}

impl ResourceLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Charges `uses` sequential uses of an oracle with the given cost.
    pub fn charge(&mut self, cost: &UseCost, uses: u64) {
        self.charge_counts(cost, uses);
        self.depth += cost.depth * uses;
    }

    /// Charges the counts of `uses` uses without extending the depth.
    ///
    /// Used for repetitions that run side by side with an already charged chain.
    pub fn charge_counts(&mut self, cost: &UseCost, uses: u64) {
        self.state_preps += cost.state_preps * uses;
        self.u_uses += cost.u_uses * uses;
        self.evolution_uses += cost.evolution_uses * uses;
        self.total_time += cost.evolution_time * uses as f64;
    }

    pub fn record_state_prep(&mut self) {
        self.state_preps += 1;
    }

    /// Sequential composition: `other` runs after `self`.
    pub fn then(&mut self, other: &ResourceLedger) {
        self.add_counts(other);
        self.depth += other.depth;
    }

    /// Parallel composition: `other` runs next to `self`.
    pub fn alongside(&mut self, other: &ResourceLedger) {
        self.add_counts(other);
        self.depth = self.depth.max(other.depth);
    }

    fn add_counts(&mut self, other: &ResourceLedger) {
        self.state_preps += other.state_preps;
        self.evolution_uses += other.evolution_uses;
        self.total_time += other.total_time;
        self.u_uses += other.u_uses;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_and_parallel_merge() {
        let mut a = ResourceLedger::new();
        a.charge(&UseCost::UNITARY, 3);
        let mut b = ResourceLedger::new();
        b.charge(&UseCost::evolution(-0.5), 4);
        b.record_state_prep();

        let mut seq = a;
        seq.then(&b);
        assert_eq!(seq.u_uses, 7);
        assert_eq!(seq.depth, 7);
        assert_eq!(seq.evolution_uses, 4);
        assert_eq!(seq.total_time, 2.0);
        assert_eq!(seq.state_preps, 1);

        let mut par = a;
        par.alongside(&b);
        assert_eq!(par.u_uses, 7);
        assert_eq!(par.depth, 4);
    }

    #[test]
    fn counts_only_charge_keeps_depth() {
        let mut l = ResourceLedger::new();
        l.charge(&UseCost::UNITARY, 4);
        l.charge_counts(&UseCost::UNITARY, 4);
        assert_eq!(l.u_uses, 8);
        assert_eq!(l.depth, 4);
    }
}
