//! Operator toolkit: state preparation, selective sign changes, the Grover
//! reflection built from two of them, and Hamiltonian evolution.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::ledger::{ResourceLedger, UseCost};
use crate::statevec::{DenseUnitary, StateVector, NORM_TOLERANCE};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `P₀ = I − 2|0⟩⟨0|` on `num_qubits` qubits.
pub fn selective_sign_zero(num_qubits: usize) -> Result<DenseUnitary> {
    let mut u = DenseUnitary::identity(num_qubits)?.into_matrix();
    u[(0, 0)] = Complex64::new(-1.0, 0.0);
    Ok(DenseUnitary::from_trusted(u))
}

/// A preparation unitary `V` with `V|0…0⟩ = |ψ⟩`.
#[derive(Clone, Debug)]
pub struct StatePrep {
    v: DenseUnitary,
    target: StateVector,
}

impl StatePrep {
    /// Builds `V` whose first column is `target`; the remaining columns
    /// complete an orthonormal basis by Gram-Schmidt over the computational basis.
    pub fn from_state(target: StateVector) -> Result<Self> {
        let d = target.dim();
        let mut columns: Vec<DVector<Complex64>> = Vec::with_capacity(d);
        columns.push(DVector::from_column_slice(target.amplitudes()));
        for e in 0..d {
            if columns.len() == d {
                break;
            }
            let mut v = DVector::from_element(d, ZERO);
            v[e] = Complex64::new(1.0, 0.0);
            // two passes keep the basis orthonormal to rounding
            for _ in 0..2 {
                for q in &columns {
                    let proj = q.dotc(&v);
                    v -= q * proj;
                }
            }
            let norm = v.norm();
            if norm > 1e-6 {
                columns.push(v / Complex64::new(norm, 0.0));
            }
        }
        let v = DenseUnitary::new(DMatrix::from_columns(&columns))?;
        Ok(Self { v, target })
    }

    /// Wraps an arbitrary unitary; the target state is its first column.
    pub fn from_unitary(v: DenseUnitary) -> Result<Self> {
        let target = StateVector::from_amplitudes(v.matrix().column(0).iter().copied().collect())?;
        Ok(Self { v, target })
    }

    pub fn unitary(&self) -> &DenseUnitary {
        &self.v
    }

    pub fn target_state(&self) -> &StateVector {
        &self.target
    }

    pub fn num_qubits(&self) -> usize {
        self.target.num_qubits()
    }

    /// Runs the preparation on `|0…0⟩` and charges one state preparation.
    pub fn prepare(&self, ledger: &mut ResourceLedger) -> StateVector {
        ledger.record_state_prep();
        self.target.clone()
    }

    /// `H ⊗ V`, preparing `|+⟩|ψ⟩` with the `|+⟩` ancilla as the leading qubit.
    pub fn with_plus_ancilla(&self) -> Result<StatePrep> {
        let v = DenseUnitary::hadamard().kron(&self.v);
        let target = self.target.embed(&StateVector::plus())?;
        Ok(Self { v, target })
    }

    /// `|ancilla⟩ ⊗ V|0⟩` for an already prepared ancilla register.
    pub fn with_ancilla_state(&self, ancilla: &StatePrep) -> Result<StatePrep> {
        let v = ancilla.v.kron(&self.v);
        let target = self.target.embed(&ancilla.target)?;
        Ok(Self { v, target })
    }
}

/// A unitary together with what each use of it costs.
#[derive(Clone, Debug)]
pub struct Oracle {
    unitary: DenseUnitary,
    cost: UseCost,
}

impl Oracle {
    pub fn new(unitary: DenseUnitary, cost: UseCost) -> Self {
        Self { unitary, cost }
    }

    /// A black-box unitary charged as one `U`-use per call.
    pub fn unitary(unitary: DenseUnitary) -> Self {
        Self::new(unitary, UseCost::UNITARY)
    }

    pub fn matrix(&self) -> &DenseUnitary {
        &self.unitary
    }

    pub fn cost(&self) -> &UseCost {
        &self.cost
    }

    pub fn dim(&self) -> usize {
        self.unitary.dim()
    }

    /// `cU` with a fresh leading control; one use still costs one use of `U`.
    pub fn controlled(&self) -> Oracle {
        Self::new(self.unitary.controlled(), self.cost)
    }

    /// `gate · U`, where `gate` is free (e.g. a fixed single-qubit phase).
    pub fn preceded_by_free_gate(&self, gate: &DenseUnitary) -> Result<Oracle> {
        Ok(Self::new(gate.compose(&self.unitary)?, self.cost))
    }

    /// Grover reflection `S = S₀S₁` costed as four preparation-unitary uses
    /// and two uses of `U`.
    pub fn grover(prep: &StatePrep, u: &Oracle) -> Result<Oracle> {
        let s = grover_reflection(prep, &u.unitary)?;
        let two_u = u.cost.times(2);
        Ok(Self::new(
            s,
            UseCost {
                state_preps: 4,
                ..two_u
            },
        ))
    }
}

fn check_dims(prep: &StatePrep, u: &DenseUnitary) -> Result<()> {
    if prep.unitary().dim() != u.dim() {
        return invalid(format!(
            "preparation acts on dimension {} but U on {}",
            prep.unitary().dim(),
            u.dim()
        ));
    }
    Ok(())
}

/// `S = V P₀ V† U V P₀ V† U†`.
///
/// On span{|ψ⟩, U|ψ⟩} its eigenvalues are `e^{±iφ}` with `φ = 2 arccos|⟨ψ|U|ψ⟩|`.
pub fn grover_reflection(prep: &StatePrep, u: &DenseUnitary) -> Result<DenseUnitary> {
    check_dims(prep, u)?;
    let v = prep.unitary().matrix();
    let p0 = selective_sign_zero(prep.num_qubits())?;
    let s0 = v * p0.matrix() * v.adjoint();
    let um = u.matrix();
    let s = &s0 * um * &s0 * um.adjoint();
    Ok(DenseUnitary::from_trusted(s))
}

/// Conditional Grover reflection `cS = V cP₀ V† U V cP₀ V† U†`.
///
/// Only `P₀` is conditioned; with the control in `|0⟩` every `U` and `V`
/// meets its inverse. The control is the leading qubit.
pub fn controlled_grover(prep: &StatePrep, u: &DenseUnitary) -> Result<DenseUnitary> {
    check_dims(prep, u)?;
    let id2 = DenseUnitary::identity(1)?;
    let v = id2.kron(prep.unitary());
    let um = id2.kron(u);
    let cp0 = selective_sign_zero(prep.num_qubits())?.controlled();
    let s0 = v.matrix() * cp0.matrix() * v.matrix().adjoint();
    let s = &s0 * um.matrix() * &s0 * um.matrix().adjoint();
    Ok(DenseUnitary::from_trusted(s))
}

#[derive(Debug)]
struct Spectrum {
    hamiltonian: DMatrix<Complex64>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
}

/// Hermitian `A` (with `ħ = 1`) and its exact evolution `e^{-i(A − a₀)t}`.
///
/// The eigendecomposition is computed once and shared between clones, so
/// shifting the offset is cheap. Evolution under `−A` is available for free
/// here (negative `t`); a physical backend would need it as a separate
/// capability.
#[derive(Clone, Debug)]
pub struct EvolutionOracle {
    spectrum: Arc<Spectrum>,
    offset: f64,
}

impl EvolutionOracle {
    pub fn new(hamiltonian: DMatrix<Complex64>) -> Result<Self> {
        let d = hamiltonian.nrows();
        if d != hamiltonian.ncols() || d < 2 || !d.is_power_of_two() {
            return invalid("Hamiltonian must be square with a power-of-two dimension ≥ 2");
        }
        let herm_err = (&hamiltonian - hamiltonian.adjoint())
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()));
        if herm_err > NORM_TOLERANCE {
            return invalid(format!("Hamiltonian is not Hermitian (max |A − A†| = {herm_err:e})"));
        }
        let eig = hamiltonian.clone().symmetric_eigen();
        Ok(Self {
            spectrum: Arc::new(Spectrum {
                eigenvalues: eig.eigenvalues.iter().copied().collect(),
                eigenvectors: eig.eigenvectors,
                hamiltonian,
            }),
            offset: 0.0,
        })
    }

    /// Builds `Q diag(λ) Q†` for a given spectrum and eigenbasis.
    pub fn from_spectrum(eigenvalues: &[f64], basis: &DenseUnitary) -> Result<Self> {
        if eigenvalues.len() != basis.dim() {
            return invalid("spectrum length does not match the basis dimension");
        }
        let q = basis.matrix();
        let lam = DMatrix::from_diagonal(&DVector::from_iterator(
            eigenvalues.len(),
            eigenvalues.iter().map(|&l| Complex64::new(l, 0.0)),
        ));
        let a = q * lam * q.adjoint();
        // symmetrize away rounding
        let a = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
        Self::new(a)
    }

    /// The same Hamiltonian with `a₀` subtracted.
    pub fn with_offset(&self, offset: f64) -> Self {
        Self {
            spectrum: Arc::clone(&self.spectrum),
            offset,
        }
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.spectrum.hamiltonian.nrows()
    }

    pub fn num_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn hamiltonian(&self) -> &DMatrix<Complex64> {
        &self.spectrum.hamiltonian
    }

    /// Eigenvalues of `A` (without the offset), in the solver's order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.spectrum.eigenvectors
    }

    /// Largest `|λ|` of `A`.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0f64, |m, l| m.max(l.abs()))
    }

    /// `e^{-i(A − a₀)t}` without charging anything.
    pub fn unitary(&self, t: f64) -> DenseUnitary {
        let q = &self.spectrum.eigenvectors;
        let phases = DVector::from_iterator(
            self.dim(),
            self.eigenvalues()
                .iter()
                .map(|&l| Complex64::from_polar(1.0, -(l - self.offset) * t)),
        );
        let mut scaled = q.clone();
        for (j, ph) in phases.iter().enumerate() {
            for i in 0..self.dim() {
                scaled[(i, j)] *= ph;
            }
        }
        DenseUnitary::from_trusted(scaled * q.adjoint())
    }

    /// `e^{-i(A − a₀)t}`, charging `M += 1` and `T += |t|`.
    pub fn exp_at(&self, t: f64, ledger: &mut ResourceLedger) -> Result<DenseUnitary> {
        if !t.is_finite() {
            return invalid("evolution time must be finite");
        }
        ledger.charge(&UseCost::evolution(t), 1);
        Ok(self.unitary(t))
    }

    /// `e^{-i(A − a₀)t}` as an oracle that charges each use.
    pub fn oracle(&self, t: f64) -> Result<Oracle> {
        if !t.is_finite() {
            return invalid("evolution time must be finite");
        }
        Ok(Oracle::new(self.unitary(t), UseCost::evolution(t)))
    }

    /// Exact `⟨ψ|A|ψ⟩` (without the offset).
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        Ok(state.expectation(self.hamiltonian())?.re)
    }

    /// Born weights of `state` over the eigenvalues, in the order of [`Self::eigenvalues`].
    pub fn spectral_weights(&self, state: &StateVector) -> Result<Vec<f64>> {
        if state.dim() != self.dim() {
            return invalid("state dimension does not match the Hamiltonian");
        }
        let q = &self.spectrum.eigenvectors;
        Ok((0..self.dim())
            .map(|j| {
                q.column(j)
                    .iter()
                    .zip(state.amplitudes())
                    .map(|(v, a)| v.conj() * a)
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .collect())
    }
}
