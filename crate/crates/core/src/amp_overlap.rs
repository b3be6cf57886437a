//! Amplitude and overlap estimation built on phase estimation of the
//! Grover reflection `S`.
//!
//! Precision of an overlap estimate is measured on the upper unit
//! hemisphere: a point `o` of the closed unit disk is lifted to
//! `(Re o, Im o, √(1 − |o|²))` and distances are great-circle angles.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use rand::Rng;

use crate::confidence::split_confidence;
use crate::error::{invalid, Result};
use crate::ledger::ResourceLedger;
use crate::oracles::{Oracle, StatePrep};
use crate::pea::{pea_modified, pea_original, PeaOptions, PhaseEstimate};
use crate::statevec::DenseUnitary;

/// Slack allowed on `|o| ≤ 1` and on amplitudes in `[0, 1]` before an input is rejected.
pub const UNIT_DISK_SLACK: f64 = 1e-9;

/// Below this modulus the reconstructed overlap carries no usable phase.
pub const PHASE_FLOOR: f64 = 1e-6;

/// A point on the closed upper unit hemisphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HemispherePoint {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl HemispherePoint {
    /// Projection back to the unit disk.
    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.x1, self.x2)
    }

    fn dot(&self, other: &HemispherePoint) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2 + self.x3 * other.x3
    }

    fn cross_norm(&self, other: &HemispherePoint) -> f64 {
        let c1 = self.x2 * other.x3 - self.x3 * other.x2;
        let c2 = self.x3 * other.x1 - self.x1 * other.x3;
        let c3 = self.x1 * other.x2 - self.x2 * other.x1;
        (c1 * c1 + c2 * c2 + c3 * c3).sqrt()
    }
}

pub fn hemisphere_lift(o: Complex64) -> Result<HemispherePoint> {
    let r = o.norm();
    if !r.is_finite() || r > 1.0 + UNIT_DISK_SLACK {
        return invalid(format!("|{o}| = {r} lies outside the unit disk"));
    }
    let o = if r > 1.0 { o / r } else { o };
    Ok(HemispherePoint {
        x1: o.re,
        x2: o.im,
        x3: (1.0 - o.norm_sqr()).max(0.0).sqrt(),
    })
}

/// Great-circle distance between the lifts of `a` and `b`, in `[0, π]`.
pub fn hemisphere_distance(a: Complex64, b: Complex64) -> Result<f64> {
    let (ha, hb) = (hemisphere_lift(a)?, hemisphere_lift(b)?);
    // atan2 keeps full precision for nearby points, where arccos(dot) loses half the digits
    Ok(ha.cross_norm(&hb).atan2(ha.dot(&hb)))
}

/// Result of amplitude estimation.
#[derive(Clone, Debug)]
pub struct AmplitudeEstimate {
    /// Estimate of `|⟨ψ|U|ψ⟩|`.
    pub amplitude: f64,
    /// Eigenphase of `S` returned by phase estimation.
    pub phase: f64,
    pub n_bits: usize,
    pub ledger: ResourceLedger,
}

/// Estimates `|⟨ψ|U|ψ⟩|` as `|cos(φ/2)|`, where `φ` is the phase returned by
/// phase estimation of `S` at precision `2p` on `|ψ⟩`.
///
/// With `c` absent the single-shot estimator is used; otherwise the
/// repeated-measurement estimator with confidence `c`. On success
/// `|arccos a − arccos |⟨ψ|U|ψ⟩|| < π/2^n`, where `2^n ≥ 1/(2p)`.
pub fn amp_estimate<R: Rng + ?Sized>(
    u: &Oracle,
    v: &StatePrep,
    p: f64,
    c: Option<f64>,
    rng: &mut R,
) -> Result<AmplitudeEstimate> {
    if !(p > 0.0 && p <= 1.0) {
        return invalid(format!("precision {p} outside (0, 1]"));
    }
    let s = Oracle::grover(v, u)?;
    let precision = (2.0 * p).min(1.0);
    let run: PhaseEstimate = match c {
        None => pea_original(&s, v.target_state(), precision, rng)?,
        Some(c) => pea_modified(&s, v.target_state(), precision, c, &PeaOptions::default(), rng)?,
    };
    Ok(AmplitudeEstimate {
        amplitude: (run.phase / 2.0).cos().abs().min(1.0),
        phase: run.phase,
        n_bits: run.n_bits,
        ledger: run.ledger,
    })
}

/// Overlap `y` from `a = |y|`, `b₀ = |1 + y|/2` and `b_{π/2} = |1 − iy|/2`
/// by the law of cosines.
pub fn reconstruct_y(a: f64, b0: f64, b_half_pi: f64) -> Complex64 {
    Complex64::new(
        (4.0 * b0 * b0 - a * a - 1.0) / 2.0,
        (4.0 * b_half_pi * b_half_pi - a * a - 1.0) / 2.0,
    )
}

/// Result of overlap estimation.
#[derive(Clone, Debug)]
pub struct OverlapEstimate {
    /// `e^{iθ}·a`.
    pub value: Complex64,
    pub a: f64,
    pub theta: f64,
    pub b0: f64,
    pub b_half_pi: f64,
    /// Raw reconstruction, whose modulus is less reliable than `a`.
    pub y: Complex64,
    pub p: f64,
    pub c: Option<f64>,
    /// Set when `|y|` was too small to define `θ`; `θ` is then 0.
    pub phase_undetermined: bool,
    pub ledger: ResourceLedger,
}

fn checked_amplitude(x: f64) -> Result<f64> {
    if !(-UNIT_DISK_SLACK..=1.0 + UNIT_DISK_SLACK).contains(&x) {
        return invalid(format!("amplitude {x} outside [0, 1]"));
    }
    Ok(x.clamp(0.0, 1.0))
}

/// Estimates `⟨ψ|U|ψ⟩` from three amplitude estimates:
/// `|⟨ψ|U|ψ⟩|` at `p/4`, then `|⟨+ψ|cU|+ψ⟩|` and
/// `|⟨+ψ|(e^{iσ_zπ/4}⊗I)cU|+ψ⟩|` at `p/16`, each at confidence `1 − (1 − c)/3`.
pub fn overlap_estimate<R: Rng + ?Sized>(
    u: &Oracle,
    v: &StatePrep,
    p: f64,
    c: Option<f64>,
    rng: &mut R,
) -> Result<OverlapEstimate> {
    if !(p > 0.0 && p <= 1.0) {
        return invalid(format!("precision {p} outside (0, 1]"));
    }
    if let Some(c) = c {
        crate::confidence::check_confidence(c)?;
    }
    let sub_c = c.map(|c| split_confidence(c, 3));

    let cu = u.controlled();
    let v_plus = v.with_plus_ancilla()?;
    let half_turn = DenseUnitary::from_diagonal(&[
        Complex64::from_polar(1.0, FRAC_PI_4),
        Complex64::from_polar(1.0, -FRAC_PI_4),
    ])?
    .kron(&DenseUnitary::identity(v.num_qubits())?);
    let cu_rotated = cu.preceded_by_free_gate(&half_turn)?;

    let amp = amp_estimate(u, v, p / 4.0, sub_c, rng)?;
    let real_part = amp_estimate(&cu, &v_plus, p / 16.0, sub_c, rng)?;
    let imag_part = amp_estimate(&cu_rotated, &v_plus, p / 16.0, sub_c, rng)?;

    let a = checked_amplitude(amp.amplitude)?;
    let b0 = checked_amplitude(real_part.amplitude)?;
    let b_half_pi = checked_amplitude(imag_part.amplitude)?;
    let y = reconstruct_y(a, b0, b_half_pi);
    let phase_undetermined = y.norm() < PHASE_FLOOR;
    let theta = if phase_undetermined {
        log::warn!("overlap reconstruction has modulus {:.3e}; phase set to 0", y.norm());
        0.0
    } else {
        y.arg()
    };

    let mut ledger = amp.ledger;
    ledger.alongside(&real_part.ledger);
    ledger.alongside(&imag_part.ledger);

    Ok(OverlapEstimate {
        value: Complex64::from_polar(a, theta),
        a,
        theta,
        b0,
        b_half_pi,
        y,
        p,
        c,
        phase_undetermined,
        ledger,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pea::uses_for_precision;
    use crate::statevec::StateVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn zero_prep() -> StatePrep {
        StatePrep::from_state(StateVector::zero(1).unwrap()).unwrap()
    }

    #[test]
    fn lift_examples() {
        assert_eq!(
            hemisphere_lift(Complex64::new(0.0, 0.0)).unwrap(),
            HemispherePoint {
                x1: 0.0,
                x2: 0.0,
                x3: 1.0
            }
        );
        assert_eq!(
            hemisphere_lift(Complex64::new(1.0, 0.0)).unwrap(),
            HemispherePoint {
                x1: 1.0,
                x2: 0.0,
                x3: 0.0
            }
        );
        let h = hemisphere_lift(Complex64::new(0.0, FRAC_1_SQRT_2)).unwrap();
        assert!((h.x2 - FRAC_1_SQRT_2).abs() < 1e-15 && (h.x3 - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(hemisphere_lift(Complex64::new(1.0 + 1e-10, 0.0)).is_ok());
        assert!(hemisphere_lift(Complex64::new(1.01, 0.0)).is_err());
    }

    #[test]
    fn distance_examples() {
        let o = Complex64::new(0.3, -0.4);
        assert_eq!(hemisphere_distance(o, o).unwrap(), 0.0);
        let d = hemisphere_distance(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)).unwrap();
        assert!((d - FRAC_PI_2).abs() < 1e-15);
        let delta: f64 = 0.01;
        let d = hemisphere_distance(Complex64::new(1.0, 0.0), Complex64::new(1.0 - delta * delta / 2.0, 0.0)).unwrap();
        assert!((d - delta).abs() < 1e-5, "{d}");
        let d = hemisphere_distance(Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)).unwrap();
        assert!((d - PI).abs() < 1e-15);
    }

    #[test]
    fn reconstruct_examples() {
        assert!((reconstruct_y(1.0, 1.0, FRAC_1_SQRT_2) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((reconstruct_y(1.0, 0.0, FRAC_1_SQRT_2) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn reconstruct_from_exact_amplitudes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let u = DenseUnitary::random(2, &mut rng).unwrap();
            let psi = StateVector::random(2, &mut rng).unwrap();
            let y = psi.inner_product(&u.apply_to(&psi).unwrap()).unwrap();
            let one = Complex64::new(1.0, 0.0);
            let r = reconstruct_y(
                y.norm(),
                (one + y).norm() / 2.0,
                (one - Complex64::i() * y).norm() / 2.0,
            );
            assert!((r - y).norm() < 1e-10);
        }
    }

    #[test]
    fn identity_amplitude_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let u = Oracle::unitary(DenseUnitary::identity(1).unwrap());
        let est = amp_estimate(&u, &zero_prep(), 1.0 / 32.0, None, &mut rng).unwrap();
        assert_eq!(est.amplitude, 1.0);
        let est = overlap_estimate(&u, &zero_prep(), 0.05, Some(0.9), &mut rng).unwrap();
        assert!(hemisphere_distance(est.value, Complex64::new(1.0, 0.0)).unwrap() < 1e-12);
    }

    #[test]
    fn bit_flip_amplitude_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let u = Oracle::unitary(DenseUnitary::pauli_x());
        for _ in 0..20 {
            let est = amp_estimate(&u, &zero_prep(), 1.0 / 32.0, None, &mut rng).unwrap();
            assert!(est.amplitude < 1e-12, "{}", est.amplitude);
        }
    }

    #[test]
    fn rotation_amplitude() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let alpha = PI / 6.0;
        let u = Oracle::unitary(DenseUnitary::ry(2.0 * alpha));
        let p = 1.0 / 64.0;
        let trials = 300;
        let mut hits = 0;
        for _ in 0..trials {
            let est = amp_estimate(&u, &zero_prep(), p, Some(0.9), &mut rng).unwrap();
            // 2^n ≥ 1/(2p)
            if (est.amplitude.acos() - alpha).abs() < PI / 32.0 {
                hits += 1;
            }
        }
        assert!(hits as f64 >= 0.9 * trials as f64, "{hits}/{trials}");
    }

    #[test]
    fn phase_gate_overlap() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let u = Oracle::unitary(DenseUnitary::phase(1.3));
        for _ in 0..20 {
            let est = overlap_estimate(&u, &zero_prep(), 0.05, Some(0.9), &mut rng).unwrap();
            assert!(hemisphere_distance(est.value, Complex64::new(1.0, 0.0)).unwrap() <= 0.05);
        }
    }

    #[test]
    fn ledger_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let u = Oracle::unitary(DenseUnitary::random(1, &mut rng).unwrap());
        let v = StatePrep::from_state(StateVector::random(1, &mut rng).unwrap()).unwrap();
        for p in [1.0 / 16.0, 1.0 / 128.0, 0.05] {
            let a = amp_estimate(&u, &v, p, None, &mut rng).unwrap();
            let n2p = uses_for_precision(2.0 * p).unwrap();
            assert_eq!(a.ledger.state_preps, 4 * n2p + 1);
            assert_eq!(a.ledger.u_uses, 2 * n2p);

            let o = overlap_estimate(&u, &v, p, None, &mut rng).unwrap();
            let (n8, n2) = (
                uses_for_precision(p / 8.0).unwrap(),
                uses_for_precision(p / 2.0).unwrap(),
            );
            assert_eq!(o.ledger.state_preps, 8 * n8 + 4 * n2 + 3);
            assert_eq!(o.ledger.u_uses, 4 * n8 + 2 * n2);
        }
    }

    #[test]
    fn folded_amplitude_ignores_sign_of_phase() {
        for phi in [0.3, 1.7, 2.9] {
            assert!(((phi / 2.0f64).cos().abs() - ((std::f64::consts::TAU - phi) / 2.0).cos().abs()).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_overlap_flags_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let u = Oracle::unitary(DenseUnitary::pauli_x());
        let est = overlap_estimate(&u, &zero_prep(), 0.25, None, &mut rng).unwrap();
        assert!(est.value.norm() <= 1.0);
        if est.phase_undetermined {
            assert_eq!(est.theta, 0.0);
        }
    }
}
