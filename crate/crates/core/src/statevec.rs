//! Dense statevector simulation.
//!
//! Qubit ordering: qubit 0 is the most significant bit of the amplitude
//! index. For an `n`-qubit register, qubit `q` corresponds to bit
//! `n - 1 - q`, so `|10⟩` (qubit 0 set) is amplitude index 2. Every
//! multi-qubit operator uses the same convention for its own targets:
//! `targets[0]` is the most significant bit of the operator's index.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

/// Tolerance used for normalization and unitarity checks.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Branch probabilities below this are treated as unreachable.
const MIN_BRANCH_PROBABILITY: f64 = 1e-14;

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 24;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
fn qubit_mask(num_qubits: usize, qubit: usize) -> usize {
    1 << (num_qubits - 1 - qubit)
}

/// Draws a measurement bit that is 1 with probability `p_one`.
///
/// Every sampled outcome in the crate goes through this rule so that two
/// code paths fed the same probabilities and the same generator state
/// produce the same bits.
#[inline]
pub fn draw_bit<R: Rng + ?Sized>(p_one: f64, rng: &mut R) -> u8 {
    let u: f64 = rng.random();
    u8::from(u < p_one)
}

/// Normalized pure state of `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

/// Measurement basis for a single qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    /// `|0⟩` gives bit 0, `|1⟩` gives bit 1.
    Computational,
    /// `|+⟩` gives bit 0, `|−⟩` gives bit 1.
    PlusMinus,
}

/// Result of a projective single-qubit measurement.
#[derive(Clone, Debug)]
pub struct MeasurementOutcome {
    pub bit: u8,
    pub basis: Basis,
    /// Probability with which `bit` was drawn.
    pub probability: f64,
    pub post_state: StateVector,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_qubit_count(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return invalid(format!("basis index {index} out of range for {num_qubits} qubits"));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self { num_qubits, amplitudes })
    }

    /// Wraps amplitudes that must already be normalized.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let num_qubits = qubits_for_len(amplitudes.len())?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return invalid(format!("amplitudes have squared norm {norm}, expected 1"));
        }
        Ok(Self { num_qubits, amplitudes })
    }

    /// Normalizes arbitrary non-zero amplitudes.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let num_qubits = qubits_for_len(amplitudes.len())?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm < 1e-300 {
            return invalid("cannot normalize a zero or non-finite vector");
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { num_qubits, amplitudes })
    }

    /// `(|0⟩ + |1⟩)/√2`.
    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            num_qubits: 1,
            amplitudes: vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
        }
    }

    /// `(|0⟩ − |1⟩)/√2`.
    pub fn minus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            num_qubits: 1,
            amplitudes: vec![Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
        }
    }

    /// `(|0⟩ + e^{iβ}|1⟩)/√2`, the state a `|+⟩` ancilla takes after a kickback of `β`.
    pub fn equator(beta: f64) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            num_qubits: 1,
            amplitudes: vec![Complex64::new(h, 0.0), Complex64::from_polar(h, beta)],
        }
    }

    /// Haar-random state drawn from normalized complex Gaussian amplitudes.
    pub fn random<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Result<Self> {
        check_qubit_count(num_qubits)?;
        let amplitudes = (0..1usize << num_qubits)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(amplitudes)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return invalid(format!(
                "inner product of {}- and {}-qubit states",
                self.num_qubits, other.num_qubits
            ));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Tensor product `|ancilla⟩ ⊗ |self⟩`; the ancilla occupies the leading qubits.
    pub fn embed(&self, ancilla: &StateVector) -> Result<StateVector> {
        check_qubit_count(self.num_qubits + ancilla.num_qubits)?;
        let mut amplitudes = Vec::with_capacity(self.dim() * ancilla.dim());
        for a in &ancilla.amplitudes {
            amplitudes.extend(self.amplitudes.iter().map(|s| a * s));
        }
        Ok(StateVector {
            num_qubits: self.num_qubits + ancilla.num_qubits,
            amplitudes,
        })
    }

    /// Contracts the leading qubits with `⟨ancilla|` and renormalizes the rest.
    ///
    /// After a measurement has left the leading qubits in a definite state,
    /// this discards them.
    pub fn project_ancilla(&self, ancilla: &StateVector) -> Result<StateVector> {
        if ancilla.num_qubits >= self.num_qubits {
            return invalid("ancilla must be smaller than the register");
        }
        let rest = self.dim() / ancilla.dim();
        let mut out = vec![ZERO; rest];
        for (block, a) in self.amplitudes.chunks_exact(rest).zip(&ancilla.amplitudes) {
            let ac = a.conj();
            out.iter_mut().zip(block).for_each(|(o, s)| *o += ac * s);
        }
        let norm: f64 = out.iter().map(|a| a.norm_sqr()).sum();
        if norm < MIN_BRANCH_PROBABILITY {
            return Err(Error::Internal("ancilla projection has zero norm".into()));
        }
        Self::normalized(out)
    }

    /// Applies `u` to `targets`, conditioned on every qubit in `controls` being `|1⟩`.
    pub fn apply(&self, u: &DenseUnitary, targets: &[usize], controls: &[usize]) -> Result<StateVector> {
        let mut out = self.clone();
        out.apply_in_place(u, targets, controls)?;
        Ok(out)
    }

    /// In-place form of [`StateVector::apply`].
    pub fn apply_in_place(&mut self, u: &DenseUnitary, targets: &[usize], controls: &[usize]) -> Result<()> {
        let n = self.num_qubits;
        validate_operands(n, targets, controls)?;
        if u.dim() != 1usize << targets.len() {
            return invalid(format!(
                "operator of dimension {} applied to {} target qubit(s)",
                u.dim(),
                targets.len()
            ));
        }
        let target_masks: Vec<usize> = targets.iter().map(|&q| qubit_mask(n, q)).collect();
        let all_targets = target_masks.iter().fold(0, |acc, m| acc | m);
        let control_mask = controls.iter().fold(0, |acc, &q| acc | qubit_mask(n, q));
        let k = targets.len();
        let sub = 1usize << k;
        let offsets: Vec<usize> = (0..sub)
            .map(|j| {
                (0..k)
                    .filter(|&b| (j >> (k - 1 - b)) & 1 == 1)
                    .map(|b| target_masks[b])
                    .sum()
            })
            .collect();
        let m = u.matrix();
        let mut input = vec![ZERO; sub];
        for base in 0..self.dim() {
            if base & all_targets != 0 || base & control_mask != control_mask {
                continue;
            }
            for (slot, off) in input.iter_mut().zip(&offsets) {
                *slot = self.amplitudes[base | off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (c, v) in input.iter().enumerate() {
                    acc += m[(r, c)] * v;
                }
                self.amplitudes[base | off] = acc;
            }
        }
        Ok(())
    }

    /// Born probability of reading `bit` on `qubit` in `basis`.
    pub fn outcome_probability(&self, qubit: usize, basis: Basis, bit: u8) -> Result<f64> {
        let p_one = self.probability_of_one(qubit, basis)?;
        Ok(if bit == 0 { 1.0 - p_one } else { p_one })
    }

    fn probability_of_one(&self, qubit: usize, basis: Basis) -> Result<f64> {
        if qubit >= self.num_qubits {
            return invalid(format!("qubit {qubit} out of range for {} qubits", self.num_qubits));
        }
        let mask = qubit_mask(self.num_qubits, qubit);
        let p: f64 = match basis {
            Basis::Computational => self
                .amplitudes
                .iter()
                .enumerate()
                .filter(|(i, _)| i & mask != 0)
                .map(|(_, a)| a.norm_sqr())
                .sum(),
            Basis::PlusMinus => (0..self.dim())
                .filter(|i| i & mask == 0)
                .map(|i| (self.amplitudes[i] - self.amplitudes[i | mask]).norm_sqr() / 2.0)
                .sum(),
        };
        Ok(p.clamp(0.0, 1.0))
    }

    /// Projective measurement of one qubit; returns the drawn bit and the collapsed state.
    pub fn measure<R: Rng + ?Sized>(&self, qubit: usize, basis: Basis, rng: &mut R) -> Result<MeasurementOutcome> {
        let p_one = self.probability_of_one(qubit, basis)?;
        let bit = draw_bit(p_one, rng);
        let probability = if bit == 1 { p_one } else { 1.0 - p_one };
        if probability < MIN_BRANCH_PROBABILITY {
            return Err(Error::Internal(format!(
                "drew measurement branch with probability {probability:e}"
            )));
        }
        let mask = qubit_mask(self.num_qubits, qubit);
        let scale = 1.0 / probability.sqrt();
        let mut amplitudes = self.amplitudes.clone();
        match basis {
            Basis::Computational => {
                for (i, a) in amplitudes.iter_mut().enumerate() {
                    if ((i & mask != 0) as u8) == bit {
                        *a *= scale;
                    } else {
                        *a = ZERO;
                    }
                }
            }
            Basis::PlusMinus => {
                let sign = if bit == 0 { 1.0 } else { -1.0 };
                for i in (0..amplitudes.len()).filter(|i| i & mask == 0) {
                    let c = (amplitudes[i] + sign * amplitudes[i | mask]) * 0.5 * scale;
                    amplitudes[i] = c;
                    amplitudes[i | mask] = sign * c;
                }
            }
        }
        Ok(MeasurementOutcome {
            bit,
            basis,
            probability,
            post_state: StateVector {
                num_qubits: self.num_qubits,
                amplitudes,
            },
        })
    }

    /// `⟨self|M|self⟩` for a full-register matrix.
    pub fn expectation(&self, m: &DMatrix<Complex64>) -> Result<Complex64> {
        if m.nrows() != self.dim() || m.ncols() != self.dim() {
            return invalid("matrix dimension does not match the register");
        }
        let mut acc = ZERO;
        for (r, ar) in self.amplitudes.iter().enumerate() {
            let row: Complex64 = (0..self.dim()).map(|c| m[(r, c)] * self.amplitudes[c]).sum();
            acc += ar.conj() * row;
        }
        Ok(acc)
    }
}

fn check_qubit_count(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return invalid(format!("register of {num_qubits} qubits (supported: 1..={MAX_QUBITS})"));
    }
    Ok(())
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return invalid(format!("length {len} is not a power of two ≥ 2"));
    }
    let n = len.trailing_zeros() as usize;
    check_qubit_count(n)?;
    Ok(n)
}

fn validate_operands(n: usize, targets: &[usize], controls: &[usize]) -> Result<()> {
    if targets.is_empty() {
        return invalid("no target qubits");
    }
    for (i, &q) in targets.iter().chain(controls).enumerate() {
        if q >= n {
            return invalid(format!("qubit {q} out of range for {n} qubits"));
        }
        if targets.iter().chain(controls).take(i).any(|&p| p == q) {
            return invalid(format!("qubit {q} appears more than once among targets and controls"));
        }
    }
    Ok(())
}

/// Square unitary matrix acting on `log2(dim)` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseUnitary {
    matrix: DMatrix<Complex64>,
}

impl DenseUnitary {
    /// Checks shape and `U U† = I` within [`NORM_TOLERANCE`].
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return invalid("unitary must be square");
        }
        qubits_for_len(matrix.nrows())?;
        let u = Self { matrix };
        let err = u.unitarity_error();
        if err > NORM_TOLERANCE {
            return invalid(format!("matrix is not unitary (max |UU†−I| = {err:e})"));
        }
        Ok(u)
    }

    /// For products of already-checked unitaries, where rounding may exceed
    /// the construction tolerance after many squarings.
    pub(crate) fn from_trusted(matrix: DMatrix<Complex64>) -> Self {
        debug_assert!(matrix.nrows() == matrix.ncols() && matrix.nrows().is_power_of_two());
        Self { matrix }
    }

    pub fn identity(num_qubits: usize) -> Result<Self> {
        check_qubit_count(num_qubits)?;
        let d = 1usize << num_qubits;
        Ok(Self {
            matrix: DMatrix::identity(d, d),
        })
    }

    pub fn from_diagonal(diagonal: &[Complex64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diagonal)))
    }

    pub fn pauli_x() -> Self {
        Self::from_trusted(DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]))
    }

    pub fn pauli_y() -> Self {
        let i = Complex64::i();
        Self::from_trusted(DMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]))
    }

    pub fn pauli_z() -> Self {
        Self::from_trusted(DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]))
    }

    pub fn hadamard() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::from_trusted(DMatrix::from_row_slice(2, 2, &[h, h, h, -h]))
    }

    /// `diag(1, e^{iγ})`.
    pub fn phase(gamma: f64) -> Self {
        Self::from_trusted(DMatrix::from_row_slice(
            2,
            2,
            &[ONE, ZERO, ZERO, Complex64::from_polar(1.0, gamma)],
        ))
    }

    /// `e^{-iθσ_y/2}`; maps `|0⟩` to `cos(θ/2)|0⟩ + sin(θ/2)|1⟩`.
    pub fn ry(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        let (s, c) = (Complex64::new(s, 0.0), Complex64::new(c, 0.0));
        Self::from_trusted(DMatrix::from_row_slice(2, 2, &[c, -s, s, c]))
    }

    /// `e^{-iθσ_z/2}`.
    pub fn rz(theta: f64) -> Self {
        Self::from_trusted(DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::from_polar(1.0, -theta / 2.0),
                ZERO,
                ZERO,
                Complex64::from_polar(1.0, theta / 2.0),
            ],
        ))
    }

    /// Haar-random unitary from the QR decomposition of a complex Gaussian matrix.
    pub fn random<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Result<Self> {
        check_qubit_count(num_qubits)?;
        let d = 1usize << num_qubits;
        let g = DMatrix::from_fn(d, d, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let qr = g.qr();
        let (mut q, r) = (qr.q(), qr.r());
        for j in 0..d {
            let rjj = r[(j, j)];
            let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { ONE };
            for i in 0..d {
                q[(i, j)] *= phase;
            }
        }
        Ok(Self::from_trusted(q))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    /// Largest entry of `|U U† − I|`.
    pub fn unitarity_error(&self) -> f64 {
        let d = self.dim();
        let p = &self.matrix * self.matrix.adjoint();
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                let target = if r == c { ONE } else { ZERO };
                worst = worst.max((p[(r, c)] - target).norm());
            }
        }
        worst
    }

    pub fn adjoint(&self) -> Self {
        Self::from_trusted(self.matrix.adjoint())
    }

    /// `self · other`, i.e. `other` acts first.
    pub fn compose(&self, other: &DenseUnitary) -> Result<Self> {
        if self.dim() != other.dim() {
            return invalid(format!("cannot compose dimensions {} and {}", self.dim(), other.dim()));
        }
        Ok(Self::from_trusted(&self.matrix * &other.matrix))
    }

    /// `self ⊗ other`; `self` acts on the leading qubits.
    pub fn kron(&self, other: &DenseUnitary) -> Self {
        Self::from_trusted(self.matrix.kronecker(&other.matrix))
    }

    /// `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ U` with the control as the new leading qubit.
    pub fn controlled(&self) -> Self {
        let d = self.dim();
        let mut m = DMatrix::identity(2 * d, 2 * d);
        m.view_mut((d, d), (d, d)).copy_from(&self.matrix);
        Self::from_trusted(m)
    }

    /// Applies the operator to a register of the same size.
    pub fn apply_to(&self, state: &StateVector) -> Result<StateVector> {
        if state.dim() != self.dim() {
            return invalid(format!(
                "operator of dimension {} applied to a {}-dimensional state",
                self.dim(),
                state.dim()
            ));
        }
        let amplitudes = (0..self.dim())
            .map(|r| {
                state
                    .amplitudes
                    .iter()
                    .enumerate()
                    .map(|(c, a)| self.matrix[(r, c)] * a)
                    .sum()
            })
            .collect();
        Ok(StateVector {
            num_qubits: state.num_qubits,
            amplitudes,
        })
    }

    /// `[U, U², U⁴, …, U^{2^{count−1}}]` by repeated squaring.
    pub fn power_of_two_ladder(&self, count: usize) -> Vec<DenseUnitary> {
        let mut ladder = Vec::with_capacity(count);
        let mut current = self.matrix.clone();
        for i in 0..count {
            if i > 0 {
                current = &current * &current;
            }
            ladder.push(Self::from_trusted(current.clone()));
        }
        ladder
    }
}
