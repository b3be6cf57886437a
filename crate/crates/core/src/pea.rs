//! One-ancilla phase estimation.
//!
//! Bits of `φ/2π` are learned least-significant first. Each bit `k` uses a
//! fresh `|+⟩` ancilla, `2^{k−1}` applications of `cW`, a phase compensation
//! computed from the bits already known, and a `|+⟩/|−⟩` measurement. The
//! system register is shared across all bits and collapses as the ancillas
//! are measured, so on a superposition input the run acts as a measurement
//! of `W`.
//!
//! Precision `p` follows the binary convention: `n` is the smallest natural
//! number with `2^n ≥ 1/p`, and a successful run returns one of the two
//! `n`-bit approximations of `φ/2π` closest to the truth, i.e. a phase within
//! `2π/2^n` radians.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rand::Rng;

use crate::confidence::{pea_failure_bound, select_r_capped, DEFAULT_R_CAP};
use crate::error::{invalid, Error, Result};
use crate::ledger::{ResourceLedger, UseCost};
use crate::oracles::Oracle;
use crate::statevec::{draw_bit, Basis, DenseUnitary, StateVector};

/// Largest bit count accepted; beyond this `2^n` uses no longer fit the ledger comfortably.
pub const MAX_BITS: usize = 48;

/// Result of a phase estimation run.
#[derive(Clone, Debug)]
pub struct PhaseEstimate {
    /// Estimate in `[0, 2π)`.
    pub phase: f64,
    /// `b₁ … b_n`, most significant first; `phase = 2π·[.b₁…b_n]₂`.
    pub bits: Vec<u8>,
    pub n_bits: usize,
    pub precision: f64,
    /// `None` for the single-shot algorithm.
    pub confidence: Option<f64>,
    /// Repetitions per bit (`None` for the single-shot algorithm).
    pub repetitions: Option<usize>,
    pub delta_prime: Option<DeltaPrimeEstimate>,
    pub ledger: ResourceLedger,
    /// System register after the run, when a register was simulated.
    pub final_state: Option<StateVector>,
}

impl PhaseEstimate {
    /// Phase mapped to `[−π, π)`.
    pub fn signed_phase(&self) -> f64 {
        wrap_signed(self.phase)
    }
}

/// Estimate of `δ′ = π(δ + b_n)` from two sets of `r` measurements.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaPrimeEstimate {
    /// Argument of `(1 − 2x₁) + i(1 − 2x₂)` in `[0, 2π)`.
    pub delta_prime: f64,
    pub x1: f64,
    pub x2: f64,
    pub r: usize,
}

impl DeltaPrimeEstimate {
    fn from_means(x1: f64, x2: f64, r: usize) -> Self {
        let delta_prime = wrap_unsigned(Complex64::new(1.0 - 2.0 * x1, 1.0 - 2.0 * x2).arg());
        Self { delta_prime, x1, x2, r }
    }
}

/// Tunables for the repeated-measurement estimator.
#[derive(Clone, Copy, Debug)]
pub struct PeaOptions {
    /// Use exactly this many repetitions instead of deriving `r` from `c`.
    pub repetitions: Option<usize>,
    /// Repeat bit `k` `2^{n−k}·r` times instead of `r` times.
    pub exponential_confidence: bool,
    pub r_cap: usize,
}

impl Default for PeaOptions {
    fn default() -> Self {
        Self {
            repetitions: None,
            exponential_confidence: false,
            r_cap: DEFAULT_R_CAP,
        }
    }
}

/// Smallest `n ≥ 0` with `2^n ≥ 1/p`.
pub fn bits_for_precision(p: f64) -> Result<usize> {
    if !(p > 0.0 && p <= 1.0) {
        return invalid(format!("precision {p} outside (0, 1]"));
    }
    let target = 1.0 / p;
    let mut n = 0;
    while (2f64).powi(n as i32) < target {
        n += 1;
        if n > MAX_BITS {
            return Err(Error::ResourceLimit(format!(
                "precision {p} needs more than {MAX_BITS} bits"
            )));
        }
    }
    Ok(n)
}

/// `N(p) = 2^{⌈log₂(1/p)⌉} − 1`, the number of `cW` uses of the single-shot estimator.
pub fn uses_for_precision(p: f64) -> Result<u64> {
    Ok((1u64 << bits_for_precision(p)?) - 1)
}

/// Maps an angle to `[0, 2π)`.
pub fn wrap_unsigned(phase: f64) -> f64 {
    let w = phase.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Maps an angle to `[−π, π)`.
pub fn wrap_signed(phase: f64) -> f64 {
    let w = wrap_unsigned(phase);
    if w >= PI {
        w - TAU
    } else {
        w
    }
}

/// Angular distance between two phases, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    wrap_signed(a - b).abs()
}

/// `[.b_from … b_to]₂` over a most-significant-first bit slice (1-based, inclusive).
fn binary_fraction(bits: &[u8], from: usize, to: usize) -> f64 {
    (from..=to)
        .map(|i| f64::from(bits[i - 1]) / (2f64).powi((i - from + 1) as i32))
        .sum()
}

fn phase_of_bits(bits: &[u8]) -> f64 {
    if bits.is_empty() {
        return 0.0;
    }
    TAU * binary_fraction(bits, 1, bits.len())
}

/// A device that prepares `|+⟩`, applies `cW^{2^power}`, multiplies the
/// `|1⟩` amplitude by `e^{i·ancilla_phase}` and reads the ancilla in the
/// `|+⟩/|−⟩` basis.
trait Kickback {
    fn kick<R: Rng + ?Sized>(&mut self, power: usize, ancilla_phase: f64, rng: &mut R) -> Result<u8>;
}

/// Simulates the ancilla and system register explicitly.
struct RegisterKickback {
    register: StateVector,
    ladder: Vec<DenseUnitary>,
    system_qubits: Vec<usize>,
}

impl RegisterKickback {
    fn new(w: &Oracle, initial: &StateVector, n: usize) -> Result<Self> {
        if w.dim() != initial.dim() {
            return invalid(format!(
                "oracle of dimension {} applied to a {}-dimensional state",
                w.dim(),
                initial.dim()
            ));
        }
        Ok(Self {
            register: initial.clone(),
            ladder: w.matrix().power_of_two_ladder(n),
            system_qubits: (1..=initial.num_qubits()).collect(),
        })
    }
}

impl Kickback for RegisterKickback {
    fn kick<R: Rng + ?Sized>(&mut self, power: usize, ancilla_phase: f64, rng: &mut R) -> Result<u8> {
        let mut joint = self.register.embed(&StateVector::plus())?;
        joint.apply_in_place(&self.ladder[power], &self.system_qubits, &[0])?;
        joint.apply_in_place(&DenseUnitary::phase(ancilla_phase), &[0], &[])?;
        let outcome = joint.measure(0, Basis::PlusMinus, rng)?;
        let ancilla = if outcome.bit == 0 {
            StateVector::plus()
        } else {
            StateVector::minus()
        };
        self.register = outcome.post_state.project_ancilla(&ancilla)?;
        Ok(outcome.bit)
    }
}

/// Closed-form statistics for an exact eigenstate with known eigenphase.
///
/// The `|−⟩` probability after a kickback of `θ` is `sin²(θ/2)`; this is
/// also the statistics of the GHZ-register measurement that replaces the
/// `2^{k−1}` sequential uses.
struct EigenphaseKickback {
    eigenphase: f64,
}

impl Kickback for EigenphaseKickback {
    fn kick<R: Rng + ?Sized>(&mut self, power: usize, ancilla_phase: f64, rng: &mut R) -> Result<u8> {
        let theta = (2f64).powi(power as i32) * self.eigenphase + ancilla_phase;
        let p_one = (theta / 2.0).sin().powi(2);
        Ok(draw_bit(p_one, rng))
    }
}

/// How uses are charged to the ledger.
#[derive(Clone, Copy)]
enum DepthModel {
    /// `2^{k−1}` sequential uses per bit.
    Sequential,
    /// One parallel layer per bit.
    Parallel,
}

fn charge_bit(ledger: &mut ResourceLedger, cost: &UseCost, power: usize, reps: usize, depth: DepthModel) {
    let uses = 1u64 << power;
    ledger.charge_counts(cost, uses * reps as u64);
    ledger.depth += match depth {
        DepthModel::Sequential => cost.depth * uses,
        DepthModel::Parallel => cost.depth,
    };
}

fn run_single_shot<K: Kickback, R: Rng + ?Sized>(
    source: &mut K,
    n: usize,
    cost: &UseCost,
    ledger: &mut ResourceLedger,
    rng: &mut R,
) -> Result<Vec<u8>> {
    let mut bits = vec![0u8; n];
    for k in (1..=n).rev() {
        let compensation = if k < n {
            PI * binary_fraction(&bits, k + 1, n)
        } else {
            0.0
        };
        bits[k - 1] = source.kick(k - 1, -compensation, rng)?;
        charge_bit(ledger, cost, k - 1, 1, DepthModel::Sequential);
    }
    Ok(bits)
}

fn measure_delta_prime<K: Kickback, R: Rng + ?Sized>(
    source: &mut K,
    n: usize,
    r: usize,
    rng: &mut R,
) -> Result<DeltaPrimeEstimate> {
    let mut ones = [0usize; 2];
    // second set starts from (|0⟩ − i|1⟩)/√2
    for (set, shift) in [0.0, -FRAC_PI_2].into_iter().enumerate() {
        for _ in 0..r {
            ones[set] += usize::from(source.kick(n - 1, shift, rng)?);
        }
    }
    Ok(DeltaPrimeEstimate::from_means(
        ones[0] as f64 / r as f64,
        ones[1] as f64 / r as f64,
        r,
    ))
}

fn run_repeated<K: Kickback, R: Rng + ?Sized>(
    source: &mut K,
    n: usize,
    r: usize,
    exponential: bool,
    cost: &UseCost,
    depth: DepthModel,
    ledger: &mut ResourceLedger,
    rng: &mut R,
) -> Result<(Vec<u8>, DeltaPrimeEstimate)> {
    let dp = measure_delta_prime(source, n, r, rng)?;
    charge_bit(ledger, cost, n - 1, 2 * r, depth);

    // Represent δ′ in [−π/2, 3π/2) so that the choice of a_n (nearest of 0
    // and π) and the value fed into later compensations agree.
    let delta_used = if dp.delta_prime >= 1.5 * PI {
        dp.delta_prime - TAU
    } else {
        dp.delta_prime
    };
    let mut bits = vec![0u8; n];
    bits[n - 1] = u8::from(delta_used >= FRAC_PI_2);

    for k in (1..n).rev() {
        // b_n is carried by δ′, so only a_{k+1} … a_{n−1} enter the binary part
        let known = if k < n - 1 {
            binary_fraction(&bits, k + 1, n - 1)
        } else {
            0.0
        };
        let compensation = PI * known + delta_used / (2f64).powi((n - k) as i32);
        let reps = if exponential { r << (n - k) } else { r };
        let mut ones = 0usize;
        for _ in 0..reps {
            ones += usize::from(source.kick(k - 1, -compensation, rng)?);
        }
        // ties go to 0
        bits[k - 1] = u8::from(2 * ones > reps);
        charge_bit(ledger, cost, k - 1, reps, depth);
    }
    Ok((bits, dp))
}

/// Single-shot estimator: `N(p)` uses of `cW` and one preparation of the input.
pub fn pea_original<R: Rng + ?Sized>(w: &Oracle, initial: &StateVector, p: f64, rng: &mut R) -> Result<PhaseEstimate> {
    let n = bits_for_precision(p)?;
    let mut ledger = ResourceLedger::new();
    ledger.record_state_prep();
    let mut source = RegisterKickback::new(w, initial, n.max(1))?;
    let bits = run_single_shot(&mut source, n, w.cost(), &mut ledger, rng)?;
    Ok(PhaseEstimate {
        phase: phase_of_bits(&bits),
        bits,
        n_bits: n,
        precision: p,
        confidence: None,
        repetitions: None,
        delta_prime: None,
        ledger,
        final_state: Some(source.register),
    })
}

/// Estimates `δ′` alone: `r` measurements of `cW^{2^{n−1}}` on `|+⟩|ψ⟩` and
/// `r` more with the ancilla in `(|0⟩ − i|1⟩)/√2`.
pub fn estimate_delta_prime<R: Rng + ?Sized>(
    w: &Oracle,
    state: &StateVector,
    n: usize,
    r: usize,
    rng: &mut R,
) -> Result<(DeltaPrimeEstimate, ResourceLedger)> {
    if n == 0 || r == 0 {
        return invalid("n and r must be at least 1");
    }
    let mut source = RegisterKickback::new(w, state, n)?;
    let dp = measure_delta_prime(&mut source, n, r, rng)?;
    let mut ledger = ResourceLedger::new();
    ledger.record_state_prep();
    charge_bit(&mut ledger, w.cost(), n - 1, 2 * r, DepthModel::Sequential);
    Ok((dp, ledger))
}

/// Repetition count for the repeated-measurement estimator: the smallest
/// `r` with `x(n, r) < 1 − c`, bumped to the next odd number so that
/// majority votes cannot tie.
pub fn repetitions_for(n: usize, c: f64, cap: usize) -> Result<usize> {
    let r = select_r_capped(n.max(1), c, cap)?;
    let r = if r % 2 == 0 { r + 1 } else { r };
    if r > cap {
        return Err(Error::ResourceLimit(format!("r = {r} exceeds the cap {cap}")));
    }
    Ok(r)
}

fn resolve_repetitions(n: usize, c: f64, options: &PeaOptions) -> Result<usize> {
    match options.repetitions {
        Some(0) => invalid("repetitions must be at least 1"),
        Some(r) => Ok(r),
        None => repetitions_for(n, c, options.r_cap),
    }
}

/// Repeated-measurement estimator with confidence `c`.
///
/// Returns a phase within `2π/2^n` of an eigenphase with probability at
/// least `1 − x(n, r)`.
pub fn pea_modified<R: Rng + ?Sized>(
    w: &Oracle,
    initial: &StateVector,
    p: f64,
    c: f64,
    options: &PeaOptions,
    rng: &mut R,
) -> Result<PhaseEstimate> {
    crate::confidence::check_confidence(c)?;
    let n = bits_for_precision(p)?;
    let mut ledger = ResourceLedger::new();
    ledger.record_state_prep();
    let mut source = RegisterKickback::new(w, initial, n.max(1))?;
    if n == 0 {
        return Ok(PhaseEstimate {
            phase: 0.0,
            bits: Vec::new(),
            n_bits: 0,
            precision: p,
            confidence: Some(c),
            repetitions: Some(0),
            delta_prime: None,
            ledger,
            final_state: Some(source.register),
        });
    }
    let r = resolve_repetitions(n, c, options)?;
    let (bits, dp) = run_repeated(
        &mut source,
        n,
        r,
        options.exponential_confidence,
        w.cost(),
        DepthModel::Sequential,
        &mut ledger,
        rng,
    )?;
    Ok(PhaseEstimate {
        phase: phase_of_bits(&bits),
        bits,
        n_bits: n,
        precision: p,
        confidence: Some(c),
        repetitions: Some(r),
        delta_prime: Some(dp),
        ledger,
        final_state: Some(source.register),
    })
}

/// Statistical model of the parallelized estimator on an exact eigenstate.
///
/// Each bit's `2^{k−1}` sequential uses are replaced by one layer acting on
/// a GHZ ancilla register and `2^{k−1}` copies of the eigenstate; the
/// outcome statistics are those of the sequential kickback, so bits are
/// sampled from the closed-form probabilities. Counts match the sequential
/// estimator, while the depth is one layer per bit.
pub fn pea_parallel_model<R: Rng + ?Sized>(
    eigenphase: f64,
    p: f64,
    c: f64,
    options: &PeaOptions,
    rng: &mut R,
) -> Result<PhaseEstimate> {
    crate::confidence::check_confidence(c)?;
    let n = bits_for_precision(p)?;
    let mut ledger = ResourceLedger::new();
    ledger.record_state_prep();
    if n == 0 {
        return Ok(PhaseEstimate {
            phase: 0.0,
            bits: Vec::new(),
            n_bits: 0,
            precision: p,
            confidence: Some(c),
            repetitions: Some(0),
            delta_prime: None,
            ledger,
            final_state: None,
        });
    }
    let r = resolve_repetitions(n, c, options)?;
    let mut source = EigenphaseKickback { eigenphase };
    let (bits, dp) = run_repeated(
        &mut source,
        n,
        r,
        options.exponential_confidence,
        &UseCost::UNITARY,
        DepthModel::Parallel,
        &mut ledger,
        rng,
    )?;
    Ok(PhaseEstimate {
        phase: phase_of_bits(&bits),
        bits,
        n_bits: n,
        precision: p,
        confidence: Some(c),
        repetitions: Some(r),
        delta_prime: Some(dp),
        ledger,
        final_state: None,
    })
}

/// Outcome of projecting a register onto (approximately) one eigenspace.
#[derive(Clone, Debug)]
pub struct PreparedEigenstate {
    pub state: StateVector,
    /// Phase read off by the projecting run.
    pub coarse_phase: f64,
    /// `arg⟨ψ|W|ψ⟩` of the projected register.
    pub eigenphase: f64,
    pub ledger: ResourceLedger,
}

/// Projects `initial` onto an eigenspace of `W` by a sequential run at
/// precision `ε/2` (radians) and confidence `1 − (1 − c)p/B`, where `ε` is
/// a lower bound on the separation of the eigenphases of interest.
pub fn prepare_eigenstate<R: Rng + ?Sized>(
    w: &Oracle,
    initial: &StateVector,
    epsilon: f64,
    p: f64,
    c: f64,
    b_constant: f64,
    rng: &mut R,
) -> Result<PreparedEigenstate> {
    if !(epsilon > 0.0) || !(b_constant >= 1.0) {
        return invalid("epsilon must be positive and B at least 1");
    }
    let prep_confidence = 1.0 - (1.0 - c) * p / b_constant;
    let precision = (epsilon / 2.0 / TAU).min(1.0);
    let run = pea_modified(w, initial, precision, prep_confidence, &PeaOptions::default(), rng)?;
    let state = run.final_state.expect("register is simulated");
    let eigenphase = wrap_unsigned(state.inner_product(&w.matrix().apply_to(&state)?)?.arg());
    Ok(PreparedEigenstate {
        state,
        coarse_phase: run.phase,
        eigenphase,
        ledger: run.ledger,
    })
}

/// Default confidence-adjustment constant `B` for eigenstate preparation.
pub const DEFAULT_B_CONSTANT: f64 = 10.0;

/// Parallel estimator: eigenstate preparation followed by the parallel model.
pub fn pea_parallel<R: Rng + ?Sized>(
    w: &Oracle,
    initial: &StateVector,
    p: f64,
    c: f64,
    epsilon: f64,
    b_constant: f64,
    rng: &mut R,
) -> Result<PhaseEstimate> {
    let prepared = prepare_eigenstate(w, initial, epsilon, p, c, b_constant, rng)?;
    let mut estimate = pea_parallel_model(prepared.eigenphase, p, c, &PeaOptions::default(), rng)?;
    let mut ledger = prepared.ledger;
    ledger.then(&estimate.ledger);
    estimate.ledger = ledger;
    estimate.final_state = Some(prepared.state);
    Ok(estimate)
}

/// Whether `estimate` is one of the two `n`-bit approximations closest to `phase`.
pub fn is_two_nearest(estimate: f64, phase: f64, n: usize) -> bool {
    circular_distance(estimate, phase) < TAU / (2f64).powi(n as i32) * (1.0 + 1e-9)
}

/// Failure bound `x(n, r)` of a completed run.
pub fn failure_bound(estimate: &PhaseEstimate) -> Option<f64> {
    estimate.repetitions.map(|r| pea_failure_bound(estimate.n_bits, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn phase_oracle(phi: f64) -> (Oracle, StateVector) {
        (
            Oracle::unitary(DenseUnitary::phase(phi)),
            StateVector::basis(1, 1).unwrap(),
        )
    }

    #[test]
    fn bit_counts() {
        assert_eq!(bits_for_precision(1.0).unwrap(), 0);
        assert_eq!(bits_for_precision(0.5).unwrap(), 1);
        assert_eq!(bits_for_precision(0.3).unwrap(), 2);
        assert_eq!(bits_for_precision(1.0 / 64.0).unwrap(), 6);
        assert_eq!(bits_for_precision(0.00625).unwrap(), 8);
        assert_eq!(uses_for_precision(0.05).unwrap(), 31);
        assert!(bits_for_precision(0.0).is_err());
        assert!(bits_for_precision(1.5).is_err());
    }

    #[test]
    fn identity_gives_zero_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (w, psi) = (Oracle::unitary(DenseUnitary::identity(1).unwrap()), StateVector::plus());
        for _ in 0..20 {
            assert_eq!(pea_original(&w, &psi, 1.0 / 32.0, &mut rng).unwrap().phase, 0.0);
            let est = pea_modified(&w, &psi, 1.0 / 32.0, 0.9, &PeaOptions::default(), &mut rng).unwrap();
            assert_eq!(est.phase, 0.0);
        }
    }

    #[test]
    fn exact_binary_phase_is_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for m in [0u32, 1, 13, 37, 63] {
            let phi = TAU * f64::from(m) / 64.0;
            let (w, psi) = phase_oracle(phi);
            for _ in 0..10 {
                let est = pea_original(&w, &psi, 1.0 / 64.0, &mut rng).unwrap();
                assert!((est.phase - phi).abs() < 1e-12, "m={m} got {}", est.phase);
                let est = pea_modified(&w, &psi, 1.0 / 64.0, 0.9, &PeaOptions::default(), &mut rng).unwrap();
                assert!((est.phase - phi).abs() < 1e-12, "m={m} got {}", est.phase);
            }
        }
    }

    #[test]
    fn single_shot_ledger_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (w, psi) = phase_oracle(1.0);
        for p in [0.5, 0.3, 0.1, 1.0 / 64.0, 0.001] {
            let est = pea_original(&w, &psi, p, &mut rng).unwrap();
            assert_eq!(est.ledger.u_uses, uses_for_precision(p).unwrap());
            assert_eq!(est.ledger.depth, uses_for_precision(p).unwrap());
            assert_eq!(est.ledger.state_preps, 1);
        }
    }

    #[test]
    fn repeated_ledger_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (w, psi) = phase_oracle(1.0);
        let opts = PeaOptions {
            repetitions: Some(5),
            ..Default::default()
        };
        let est = pea_modified(&w, &psi, 1.0 / 16.0, 0.9, &opts, &mut rng).unwrap();
        // δ′ sets: 2·5·8; bits 3,2,1: 5·(4+2+1)
        assert_eq!(est.ledger.u_uses, 80 + 35);
        assert_eq!(est.ledger.depth, 15);
        let par = pea_parallel_model(1.0, 1.0 / 16.0, 0.9, &opts, &mut rng).unwrap();
        assert_eq!(par.ledger.u_uses, est.ledger.u_uses);
        assert_eq!(par.ledger.depth, 4);
    }

    #[test]
    fn delta_prime_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // n = 3: 2^{n−1}φ = δ′. Choose φ so that δ′ = π/2.
        let phi = FRAC_PI_2 / 4.0;
        let (w, psi) = phase_oracle(phi);
        let (dp, _) = estimate_delta_prime(&w, &psi, 3, 20_000, &mut rng).unwrap();
        assert!((dp.x1 - 0.5).abs() < 0.02, "{dp:?}");
        assert!(dp.x2.abs() < 0.02, "{dp:?}");
        assert!((dp.delta_prime - FRAC_PI_2).abs() < 0.05, "{dp:?}");

        let (w, psi) = phase_oracle(0.0);
        let (dp, _) = estimate_delta_prime(&w, &psi, 3, 2_000, &mut rng).unwrap();
        assert_eq!(dp.x1, 0.0);
        assert!((dp.x2 - 0.5).abs() < 0.05);
        assert!(circular_distance(dp.delta_prime, 0.0) < 0.1);
    }

    #[test]
    fn delta_prime_error_event_is_rare() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for r in [16usize, 32] {
            let bound = 4.0 * (-(r as f64) / 8.0).exp();
            let trials = 2000;
            let mut bad = 0;
            for _ in 0..trials {
                let delta_prime: f64 = rng.random::<f64>() * TAU;
                let (w, psi) = phase_oracle(delta_prime / 4.0);
                let (dp, _) = estimate_delta_prime(&w, &psi, 3, r, &mut rng).unwrap();
                if circular_distance(dp.delta_prime, delta_prime) > PI / 4.0 {
                    bad += 1;
                }
            }
            assert!((bad as f64 / trials as f64) <= bound, "r={r}: {bad}/{trials} > {bound}");
        }
    }

    #[test]
    fn eigenstate_is_left_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = DenseUnitary::random(2, &mut rng).unwrap();
        let evo = crate::oracles::EvolutionOracle::from_spectrum(&[0.3, 1.1, -0.4, 2.2], &u).unwrap();
        let w = evo.oracle(1.0).unwrap();
        let eig = StateVector::normalized(evo.eigenvectors().column(1).iter().copied().collect()).unwrap();
        let est = pea_modified(&w, &eig, 1.0 / 64.0, 0.9, &PeaOptions::default(), &mut rng).unwrap();
        let out = est.final_state.unwrap();
        assert!((eig.inner_product(&out).unwrap().norm() - 1.0).abs() < 1e-8);
        assert!(circular_distance(est.phase, -1.1) < TAU / 64.0);
    }

    #[test]
    fn superposition_collapses_onto_an_eigenspace() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let w = Oracle::unitary(DenseUnitary::phase(2.0));
        let mut hits = [0usize; 2];
        for _ in 0..400 {
            let est = pea_modified(
                &w,
                &StateVector::plus(),
                1.0 / 256.0,
                0.99,
                &PeaOptions::default(),
                &mut rng,
            )
            .unwrap();
            let out = est.final_state.unwrap();
            let p1 = out.amplitudes()[1].norm_sqr();
            if circular_distance(est.phase, 2.0) < 0.05 {
                hits[1] += 1;
                assert!(p1 > 0.99);
            } else {
                assert!(circular_distance(est.phase, 0.0) < 0.05);
                assert!(p1 < 0.01);
                hits[0] += 1;
            }
        }
        assert!(hits[0] > 150 && hits[1] > 150, "{hits:?}");
    }

    #[test]
    fn parallel_model_matches_register_simulation() {
        let opts = PeaOptions::default();
        for seed in 0..100u64 {
            let mut setup = ChaCha8Rng::seed_from_u64(1000 + seed);
            let phi: f64 = setup.random::<f64>() * TAU;
            let (w, psi) = phase_oracle(phi);
            let seq = pea_modified(&w, &psi, 1.0 / 32.0, 0.8, &opts, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let par = pea_parallel_model(phi, 1.0 / 32.0, 0.8, &opts, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(seq.bits, par.bits, "seed {seed}");
            assert_eq!(seq.ledger.u_uses, par.ledger.u_uses);
        }
    }

    #[test]
    fn exponential_confidence_repeats_more() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (w, psi) = phase_oracle(0.7);
        let opts = PeaOptions {
            repetitions: Some(3),
            exponential_confidence: true,
            ..Default::default()
        };
        let est = pea_modified(&w, &psi, 1.0 / 8.0, 0.9, &opts, &mut rng).unwrap();
        // δ′: 2·3·4; bit 2: 3·2·2; bit 1: 3·4·1
        assert_eq!(est.ledger.u_uses, 24 + 12 + 12);
        assert!(is_two_nearest(est.phase, 0.7, 3));
    }

    #[test]
    fn eigenstate_preparation_then_parallel_run() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let w = Oracle::unitary(
            DenseUnitary::from_diagonal(&[Complex64::from_polar(1.0, 1.0), Complex64::from_polar(1.0, -1.0)]).unwrap(),
        );
        let est = pea_parallel(
            &w,
            &StateVector::plus(),
            1.0 / 64.0,
            0.9,
            2.0,
            DEFAULT_B_CONSTANT,
            &mut rng,
        )
        .unwrap();
        let d = circular_distance(est.phase, 1.0).min(circular_distance(est.phase, -1.0));
        assert!(d < TAU / 64.0);
        assert!(est.ledger.depth < 64);
    }

    #[test]
    fn rejects_bad_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (w, _) = phase_oracle(0.1);
        assert!(pea_original(&w, &StateVector::zero(2).unwrap(), 0.1, &mut rng).is_err());
        assert!(pea_modified(
            &w,
            &StateVector::zero(1).unwrap(),
            0.1,
            1.0,
            &PeaOptions::default(),
            &mut rng
        )
        .is_err());
        let capped = PeaOptions {
            r_cap: 5,
            ..Default::default()
        };
        assert!(matches!(
            pea_modified(&w, &StateVector::zero(1).unwrap(), 0.1, 0.999, &capped, &mut rng),
            Err(Error::ResourceLimit(_))
        ));
    }
}
