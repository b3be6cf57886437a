//! Tail bounds on the spectral distribution of `A` around `⟨A⟩`.
//!
//! `F(Δ)` bounds the weight of eigenvalues farther than `Δ` from the mean
//! and `G(Δ) = ΔF(Δ) + ∫_Δ^∞ F(s) ds` bounds their contribution to it.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Shape of the tail bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailKind {
    /// Every eigenvalue in the support lies within `lambda_max` of `⟨A⟩`.
    Bounded { lambda_max: f64 },
    /// `F(Δ) = min(1, e^{1 − Δ/scale})`.
    Exponential { scale: f64 },
    /// `F(Δ) = min(1, coefficient/Δ^{2+β})`.
    Polynomial { beta: f64, coefficient: f64 },
    /// Chebyshev bound from a variance bound, `F(Δ) = min(1, v/Δ²)`.
    Variance { v: f64 },
    /// The state is an eigenstate of `A`.
    Point,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    #[serde(flatten)]
    pub kind: TailKind,
    /// Bound on `|⟨A⟩|`.
    pub b: f64,
}

impl TailModel {
    pub fn new(kind: TailKind, b: f64) -> Result<Self> {
        let model = Self { kind, b };
        model.validate()?;
        Ok(model)
    }

    pub fn bounded(lambda_max: f64, b: f64) -> Result<Self> {
        Self::new(TailKind::Bounded { lambda_max }, b)
    }

    /// Bounded tails for an operator with `‖A‖ ≤ radius`: deviations are at
    /// most `2·radius` and `|⟨A⟩| ≤ radius`.
    pub fn from_spectral_bound(radius: f64) -> Result<Self> {
        Self::bounded(2.0 * radius, radius)
    }

    pub fn exponential(scale: f64, b: f64) -> Result<Self> {
        Self::new(TailKind::Exponential { scale }, b)
    }

    pub fn polynomial(beta: f64, coefficient: f64, b: f64) -> Result<Self> {
        Self::new(TailKind::Polynomial { beta, coefficient }, b)
    }

    pub fn variance(v: f64, b: f64) -> Result<Self> {
        Self::new(TailKind::Variance { v }, b)
    }

    pub fn point(b: f64) -> Result<Self> {
        Self::new(TailKind::Point, b)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                invalid(format!("{name} must be positive and finite, got {x}"))
            }
        };
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return invalid(format!("b must be non-negative and finite, got {}", self.b));
        }
        match self.kind {
            TailKind::Bounded { lambda_max } => positive("lambda_max", lambda_max),
            TailKind::Exponential { scale } => positive("scale", scale),
            TailKind::Polynomial { beta, coefficient } => {
                if !(beta >= 0.0 && beta.is_finite()) {
                    return invalid(format!("beta must be non-negative, got {beta}"));
                }
                positive("coefficient", coefficient)
            }
            TailKind::Variance { v } => positive("v", v),
            TailKind::Point => Ok(()),
        }
    }

    pub fn is_point(&self) -> bool {
        matches!(self.kind, TailKind::Point)
    }

    /// Polynomial parameters `(β, κ)` for the two power-law kinds.
    fn power_law(&self) -> Option<(f64, f64)> {
        match self.kind {
            TailKind::Polynomial { beta, coefficient } => Some((beta, coefficient)),
            TailKind::Variance { v } => Some((0.0, v)),
            _ => None,
        }
    }

    pub fn f(&self, delta: f64) -> f64 {
        let delta = delta.max(0.0);
        match self.kind {
            TailKind::Bounded { lambda_max } => {
                if delta < lambda_max {
                    1.0
                } else {
                    0.0
                }
            }
            TailKind::Exponential { scale } => (1.0 - delta / scale).exp().min(1.0),
            TailKind::Point => 0.0,
            _ => {
                let (beta, kappa) = self.power_law().expect("power-law kind");
                if delta == 0.0 {
                    1.0
                } else {
                    (kappa / delta.powf(2.0 + beta)).min(1.0)
                }
            }
        }
    }

    pub fn g(&self, delta: f64) -> f64 {
        let delta = delta.max(0.0);
        match self.kind {
            TailKind::Bounded { lambda_max } => {
                if delta < lambda_max {
                    lambda_max
                } else {
                    0.0
                }
            }
            TailKind::Exponential { scale } => {
                if delta <= scale {
                    2.0 * scale
                } else {
                    (delta + scale) * (1.0 - delta / scale).exp()
                }
            }
            TailKind::Point => 0.0,
            _ => {
                let (beta, kappa) = self.power_law().expect("power-law kind");
                let knee = kappa.powf(1.0 / (2.0 + beta));
                let ratio = (2.0 + beta) / (1.0 + beta);
                if delta <= knee {
                    knee * ratio
                } else {
                    kappa * ratio / delta.powf(1.0 + beta)
                }
            }
        }
    }

    /// `inf{Δ ≥ 0 | G(Δ) ≤ x}`.
    pub fn g_inv(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return invalid(format!("G⁻¹ needs a positive argument, got {x}"));
        }
        if self.g(0.0) <= x {
            return Ok(0.0);
        }
        match self.kind {
            TailKind::Bounded { lambda_max } => Ok(lambda_max),
            TailKind::Point => Ok(0.0),
            TailKind::Exponential { scale } => {
                let (mut lo, mut hi) = (scale, 2.0 * scale);
                while self.g(hi) > x {
                    lo = hi;
                    hi *= 2.0;
                    if !hi.is_finite() {
                        return Err(Error::Internal(format!("G⁻¹({x}) diverged")));
                    }
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.g(mid) > x {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(hi)
            }
            _ => {
                let (beta, kappa) = self.power_law().expect("power-law kind");
                let d = (kappa * (2.0 + beta) / ((1.0 + beta) * x)).powf(1.0 / (1.0 + beta));
                // nudge past rounding so that G(G⁻¹(x)) ≤ x holds exactly
                let mut d = d * (1.0 + 4.0 * f64::EPSILON);
                while self.g(d) > x {
                    d *= 1.0 + 1e-12;
                }
                Ok(d)
            }
        }
    }
}
