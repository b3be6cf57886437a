//! Reference estimators whose error falls as `1/√N`.

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::ledger::ResourceLedger;
use crate::oracles::{EvolutionOracle, Oracle, StatePrep};
use crate::statevec::{draw_bit, Basis, DenseUnitary, StateVector};

/// Mean of `N` independent samples.
#[derive(Clone, Debug)]
pub struct SampledEstimate {
    pub value: Complex64,
    pub num_samples: usize,
    /// Sample standard deviation over `√N`; for complex values the two
    /// quadratures are combined in quadrature.
    pub standard_error: f64,
    pub ledger: ResourceLedger,
}

#[derive(Default)]
struct RunningMoments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn standard_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64).sqrt() / (self.n as f64).sqrt()
    }
}

fn pm_samples<R: Rng + ?Sized>(p_minus: f64, count: usize, rng: &mut R) -> RunningMoments {
    let mut moments = RunningMoments::default();
    for _ in 0..count {
        moments.push(if draw_bit(p_minus, rng) == 1 { -1.0 } else { 1.0 });
    }
    moments
}

/// `⟨ψ|U|ψ⟩ = ⟨σ_x⟩ + i⟨σ_y⟩` on the ancilla of `cU|+⟩|ψ⟩`.
///
/// The first `⌈N/2⌉` samples read `σ_x`, the rest read `σ_y` after an
/// `S†`-then-Hadamard basis change. Each sample costs one preparation and
/// one use of `cU`; samples are independent, so the depth is one use.
pub fn one_ancilla_overlap<R: Rng + ?Sized>(
    u: &Oracle,
    v: &StatePrep,
    num_samples: usize,
    rng: &mut R,
) -> Result<SampledEstimate> {
    if num_samples < 2 {
        return invalid("at least two samples are needed");
    }
    if u.dim() != v.target_state().dim() {
        return invalid("oracle and state dimensions differ");
    }
    let system: Vec<usize> = (1..=v.num_qubits()).collect();
    let mut joint = v.target_state().embed(&StateVector::plus())?;
    joint.apply_in_place(u.matrix(), &system, &[0])?;
    let p_x_minus = joint.outcome_probability(0, Basis::PlusMinus, 1)?;
    joint.apply_in_place(&DenseUnitary::phase(-std::f64::consts::FRAC_PI_2), &[0], &[])?;
    joint.apply_in_place(&DenseUnitary::hadamard(), &[0], &[])?;
    let p_y_minus = joint.outcome_probability(0, Basis::Computational, 1)?;

    let n_x = num_samples.div_ceil(2);
    let n_y = num_samples - n_x;
    let x = pm_samples(p_x_minus, n_x, rng);
    let y = pm_samples(p_y_minus, n_y, rng);

    let mut ledger = ResourceLedger::new();
    ledger.charge_counts(u.cost(), num_samples as u64);
    ledger.state_preps += num_samples as u64;
    ledger.depth = u.cost().depth;

    Ok(SampledEstimate {
        value: Complex64::new(x.mean, y.mean),
        num_samples,
        standard_error: x.standard_error().hypot(y.standard_error()),
        ledger,
    })
}

/// Mean of `N` eigenvalues drawn with the Born weights of `|ψ⟩`.
pub fn direct_sample_mean<R: Rng + ?Sized>(
    evolution: &EvolutionOracle,
    v: &StatePrep,
    num_samples: usize,
    rng: &mut R,
) -> Result<SampledEstimate> {
    if num_samples < 2 {
        return invalid("at least two samples are needed");
    }
    let weights = evolution.spectral_weights(v.target_state())?;
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::Internal(format!("spectral weights: {e}")))?;
    let eigenvalues = evolution.eigenvalues();
    let mut moments = RunningMoments::default();
    for _ in 0..num_samples {
        moments.push(eigenvalues[dist.sample(rng)]);
    }
    let mut ledger = ResourceLedger::new();
    ledger.state_preps = num_samples as u64;
    Ok(SampledEstimate {
        value: Complex64::new(moments.mean, 0.0),
        num_samples,
        standard_error: moments.standard_error(),
        ledger,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zero() -> StatePrep {
        StatePrep::from_state(StateVector::zero(1).unwrap()).unwrap()
    }

    #[test]
    fn trivial_overlaps() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let est = one_ancilla_overlap(
            &Oracle::unitary(DenseUnitary::identity(1).unwrap()),
            &zero(),
            1001,
            &mut rng,
        )
        .unwrap();
        assert_eq!(est.value.re, 1.0);
        assert!(est.value.im.abs() < 0.15);
        assert_eq!(est.ledger.u_uses, 1001);
        assert_eq!(est.ledger.state_preps, 1001);
        let est = one_ancilla_overlap(&Oracle::unitary(DenseUnitary::pauli_z()), &zero(), 1000, &mut rng).unwrap();
        assert_eq!(est.value.re, 1.0);
    }

    #[test]
    fn random_overlap_within_four_sigma() {
        let mut ok = 0;
        let n = 10_000;
        for seed in 0..60 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = DenseUnitary::random(2, &mut rng).unwrap();
            let psi = StateVector::random(2, &mut rng).unwrap();
            let exact = psi.inner_product(&u.apply_to(&psi).unwrap()).unwrap();
            let v = StatePrep::from_state(psi).unwrap();
            let est = one_ancilla_overlap(&Oracle::unitary(u), &v, n, &mut rng).unwrap();
            if (est.value - exact).norm() <= 4.0 / (n as f64).sqrt() {
                ok += 1;
            }
        }
        assert!(ok >= 57, "{ok}/60");
    }

    #[test]
    fn direct_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let z = EvolutionOracle::new(DenseUnitary::pauli_z().into_matrix()).unwrap();
        let plus = StatePrep::from_state(StateVector::plus()).unwrap();
        let est = direct_sample_mean(&z, &plus, 10_000, &mut rng).unwrap();
        assert!(est.value.re.abs() < 0.05);
        assert!((est.standard_error - 0.01).abs() < 0.001);

        let est = direct_sample_mean(&z, &zero(), 100, &mut rng).unwrap();
        assert_eq!(est.value.re, 1.0);
        assert_eq!(est.standard_error, 0.0);

        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(3.0, 0.0),
        ]));
        let est = direct_sample_mean(&EvolutionOracle::new(a).unwrap(), &plus, 20_000, &mut rng).unwrap();
        assert!((est.value.re - 2.0).abs() < 0.05);
    }

    #[test]
    fn rejects_too_few_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(one_ancilla_overlap(&Oracle::unitary(DenseUnitary::pauli_x()), &zero(), 1, &mut rng).is_err());
    }
}
