//! C interface to the kickback estimators.
//!
//! Every object crosses the boundary as an opaque pointer created by a
//! `kb_*_new` function and released by the matching `kb_*_free`. Every
//! fallible call returns a [`KbStatus`]; on failure a description is
//! available from [`kb_last_error`] on the same thread.
//!
//! Handles other than [`KbRng`] are immutable after creation and may be
//! shared between threads. A [`KbRng`] must not be used by two threads at once.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use kickback::amp_overlap::{amp_estimate, overlap_estimate};
use kickback::eea::{eea_full, EeaOptions, TailModel};
use kickback::pea::{pea_modified, pea_original, PeaOptions};
use kickback::{DenseUnitary, Error, EvolutionOracle, Oracle, ResourceLedger, StatePrep, StateVector};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidOperand = 2,
    Infeasible = 3,
    ResourceLimit = 4,
    Internal = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

/// Resources charged to one estimate.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KbLedger {
    pub state_preps: u64,
    pub evolution_uses: u64,
    pub total_time: f64,
    pub u_uses: u64,
    pub depth: u64,
}

impl From<ResourceLedger> for KbLedger {
    fn from(l: ResourceLedger) -> Self {
        KbLedger {
            state_preps: l.state_preps,
            evolution_uses: l.evolution_uses,
            total_time: l.total_time,
            u_uses: l.u_uses,
            depth: l.depth,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct KbPhaseResult {
    /// Estimated eigenphase in `[0, 2π)`.
    pub phase: f64,
    pub n_bits: u32,
    pub ledger: KbLedger,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct KbAmplitudeResult {
    /// Estimate of `|⟨ψ|U|ψ⟩|`.
    pub amplitude: f64,
    pub ledger: KbLedger,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct KbOverlapResult {
    pub re: f64,
    pub im: f64,
    pub ledger: KbLedger,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct KbExpectationResult {
    pub value: f64,
    /// Nonzero when stage I alone met the precision.
    pub stage2_skipped: u8,
    pub ledger: KbLedger,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KbTailKind {
    /// `param` is the largest deviation from the mean.
    Bounded = 0,
    /// `param` is the decay scale.
    Exponential = 1,
    /// `param` is the extra exponent β, `coefficient` the prefactor κ.
    Polynomial = 2,
    /// `param` is the variance.
    Variance = 3,
    /// The state is an eigenstate; `param` is ignored.
    Point = 4,
}

/// Spectral tail of the input state, plus a bound `b` on `|⟨A⟩|`.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct KbTail {
    pub kind: KbTailKind,
    pub param: f64,
    pub coefficient: f64,
    pub b: f64,
}

/// Estimator flags for [`kb_expectation_estimate`].
pub const KB_EEA_STAGE1_LOG: u32 = 1;
pub const KB_EEA_SUPPRESS_OVERLAP: u32 = 2;

pub struct KbUnitary(Oracle);
pub struct KbState(StatePrep);
pub struct KbHamiltonian(EvolutionOracle);
pub struct KbRng(ChaCha8Rng);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(e: &Error) -> KbStatus {
    match e {
        Error::Infeasible { .. } => KbStatus::Infeasible,
        Error::ResourceLimit(_) => KbStatus::ResourceLimit,
        Error::Internal(_) | Error::Io(_) => KbStatus::Internal,
        Error::InvalidOperand(_) | Error::Parse { .. } | Error::Config(_) => KbStatus::InvalidOperand,
    }
}

enum Failure {
    Null(&'static str),
    Kb(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Kb(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> KbStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            KbStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(&format!("null pointer: {what}"));
            KbStatus::NullPointer
        }
        Ok(Err(Failure::Kb(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            KbStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn complex_array(re: *const f64, im: *const f64, len: usize) -> Result<Vec<Complex64>, Failure> {
    if re.is_null() {
        return Err(Failure::Null("re"));
    }
    let re = std::slice::from_raw_parts(re, len);
    let im = if im.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(im, len))
    };
    Ok((0..len)
        .map(|i| Complex64::new(re[i], im.map_or(0.0, |im| im[i])))
        .collect())
}

fn dimension(num_qubits: u32) -> Result<usize, Failure> {
    if num_qubits == 0 || num_qubits > 12 {
        return Err(Error::InvalidOperand(format!("num_qubits must be in 1..=12, got {num_qubits}")).into());
    }
    Ok(1usize << num_qubits)
}

unsafe fn square_matrix(num_qubits: u32, re: *const f64, im: *const f64) -> Result<DMatrix<Complex64>, Failure> {
    let dim = dimension(num_qubits)?;
    let entries = complex_array(re, im, dim * dim)?;
    Ok(DMatrix::from_row_slice(dim, dim, &entries))
}

unsafe fn publish<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    let slot = deref_mut(out, "out")?;
    *slot = Box::into_raw(Box::new(value));
    Ok(())
}

fn confidence(c: f64) -> Option<f64> {
    (c != 0.0).then_some(c)
}

/// Message for the most recent failed call on this thread, or an empty
/// string. The pointer stays valid until the next `kb_*` call on this thread.
#[no_mangle]
pub extern "C" fn kb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a unitary oracle from a row-major `2^n × 2^n` matrix.
/// `im` may be null for a real matrix.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `4^num_qubits` doubles;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kb_unitary_new(
    num_qubits: u32,
    re: *const f64,
    im: *const f64,
    out: *mut *mut KbUnitary,
) -> KbStatus {
    guard(|| {
        let u = DenseUnitary::new(square_matrix(num_qubits, re, im)?)?;
        publish(out, KbUnitary(Oracle::unitary(u)))
    })
}

/// # Safety
/// `u` must be null or a pointer from [`kb_unitary_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kb_unitary_free(u: *mut KbUnitary) {
    if !u.is_null() {
        drop(Box::from_raw(u));
    }
}

/// Creates a state preparation for a normalized `2^n` amplitude vector.
/// `im` may be null for real amplitudes.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `2^num_qubits` doubles;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kb_state_new(
    num_qubits: u32,
    re: *const f64,
    im: *const f64,
    out: *mut *mut KbState,
) -> KbStatus {
    guard(|| {
        let dim = dimension(num_qubits)?;
        let state = StateVector::from_amplitudes(complex_array(re, im, dim)?)?;
        publish(out, KbState(StatePrep::from_state(state)?))
    })
}

/// # Safety
/// `s` must be null or a pointer from [`kb_state_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kb_state_free(s: *mut KbState) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Creates an evolution oracle `t ↦ e^{-iAt}` from a Hermitian row-major matrix.
///
/// # Safety
/// As for [`kb_unitary_new`].
#[no_mangle]
pub unsafe extern "C" fn kb_hamiltonian_new(
    num_qubits: u32,
    re: *const f64,
    im: *const f64,
    out: *mut *mut KbHamiltonian,
) -> KbStatus {
    guard(|| {
        let evo = EvolutionOracle::new(square_matrix(num_qubits, re, im)?)?;
        publish(out, KbHamiltonian(evo))
    })
}

/// # Safety
/// `h` must be null or a pointer from [`kb_hamiltonian_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kb_hamiltonian_free(h: *mut KbHamiltonian) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Creates a seeded generator; equal seeds give equal estimates.
///
/// The returned pointer is never null. Release it with [`kb_rng_free`].
#[no_mangle]
pub extern "C" fn kb_rng_new(seed: u64) -> *mut KbRng {
    Box::into_raw(Box::new(KbRng(ChaCha8Rng::seed_from_u64(seed))))
}

/// # Safety
/// `r` must be null or a pointer from [`kb_rng_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kb_rng_free(r: *mut KbRng) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Phase estimation of `w` on `state` to precision `p` (in turns).
///
/// `c == 0` runs the single-shot bitwise estimator; `c` in `(0, 1)` runs the
/// repeated-measurement estimator with confidence `c`.
///
/// # Safety
/// All pointers must be valid handles of the right kind; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kb_phase_estimate(
    w: *const KbUnitary,
    state: *const KbState,
    p: f64,
    c: f64,
    rng: *mut KbRng,
    out: *mut KbPhaseResult,
) -> KbStatus {
    guard(|| {
        let w = &deref(w, "w")?.0;
        let psi = deref(state, "state")?.0.target_state();
        let rng = &mut deref_mut(rng, "rng")?.0;
        let out = deref_mut(out, "out")?;
        let est = match confidence(c) {
            None => pea_original(w, psi, p, rng)?,
            Some(c) => pea_modified(w, psi, p, c, &PeaOptions::default(), rng)?,
        };
        *out = KbPhaseResult {
            phase: est.phase,
            n_bits: est.n_bits as u32,
            ledger: est.ledger.into(),
        };
        Ok(())
    })
}

/// Estimates `|⟨ψ|U|ψ⟩|` to precision `p`; `c == 0` skips repetition.
///
/// # Safety
/// As for [`kb_phase_estimate`].
#[no_mangle]
pub unsafe extern "C" fn kb_amplitude_estimate(
    u: *const KbUnitary,
    state: *const KbState,
    p: f64,
    c: f64,
    rng: *mut KbRng,
    out: *mut KbAmplitudeResult,
) -> KbStatus {
    guard(|| {
        let u = &deref(u, "u")?.0;
        let v = &deref(state, "state")?.0;
        let rng = &mut deref_mut(rng, "rng")?.0;
        let out = deref_mut(out, "out")?;
        let est = amp_estimate(u, v, p, confidence(c), rng)?;
        *out = KbAmplitudeResult {
            amplitude: est.amplitude,
            ledger: est.ledger.into(),
        };
        Ok(())
    })
}

/// Estimates `⟨ψ|U|ψ⟩` to precision `p` in hemisphere distance; `c == 0`
/// skips repetition.
///
/// # Safety
/// As for [`kb_phase_estimate`].
#[no_mangle]
pub unsafe extern "C" fn kb_overlap_estimate(
    u: *const KbUnitary,
    state: *const KbState,
    p: f64,
    c: f64,
    rng: *mut KbRng,
    out: *mut KbOverlapResult,
) -> KbStatus {
    guard(|| {
        let u = &deref(u, "u")?.0;
        let v = &deref(state, "state")?.0;
        let rng = &mut deref_mut(rng, "rng")?.0;
        let out = deref_mut(out, "out")?;
        let est = overlap_estimate(u, v, p, confidence(c), rng)?;
        *out = KbOverlapResult {
            re: est.value.re,
            im: est.value.im,
            ledger: est.ledger.into(),
        };
        Ok(())
    })
}

fn tail_model(t: &KbTail) -> Result<TailModel, Error> {
    match t.kind {
        KbTailKind::Bounded => TailModel::bounded(t.param, t.b),
        KbTailKind::Exponential => TailModel::exponential(t.param, t.b),
        KbTailKind::Polynomial => TailModel::polynomial(t.param, t.coefficient, t.b),
        KbTailKind::Variance => TailModel::variance(t.param, t.b),
        KbTailKind::Point => TailModel::point(t.b),
    }
}

/// Estimates `⟨ψ|A|ψ⟩` to additive precision `p` with confidence `c`.
///
/// `k == 0` picks the series order from `p`. `flags` is a bitwise OR of
/// `KB_EEA_*` constants.
///
/// # Safety
/// As for [`kb_phase_estimate`]; `tail` must point to a readable [`KbTail`].
#[no_mangle]
pub unsafe extern "C" fn kb_expectation_estimate(
    h: *const KbHamiltonian,
    state: *const KbState,
    tail: *const KbTail,
    p: f64,
    c: f64,
    k: u32,
    flags: u32,
    rng: *mut KbRng,
    out: *mut KbExpectationResult,
) -> KbStatus {
    guard(|| {
        let h = &deref(h, "h")?.0;
        let v = &deref(state, "state")?.0;
        let model = tail_model(deref(tail, "tail")?)?;
        let rng = &mut deref_mut(rng, "rng")?.0;
        let out = deref_mut(out, "out")?;
        let options = EeaOptions {
            use_stage1_log: flags & KB_EEA_STAGE1_LOG != 0,
            k: (k != 0).then_some(k as usize),
            suppress_overlap: flags & KB_EEA_SUPPRESS_OVERLAP != 0,
        };
        let est = eea_full(h, v, &model, p, c, &options, rng)?;
        *out = KbExpectationResult {
            value: est.value,
            stage2_skipped: est.stage2_skipped as u8,
            ledger: est.ledger.into(),
        };
        Ok(())
    })
}

/// Exact `⟨ψ|A|ψ⟩`, for checking estimates.
///
/// # Safety
/// As for [`kb_phase_estimate`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kb_expectation_exact(
    h: *const KbHamiltonian,
    state: *const KbState,
    out: *mut f64,
) -> KbStatus {
    guard(|| {
        let h = &deref(h, "h")?.0;
        let v = &deref(state, "state")?.0;
        *deref_mut(out, "out")? = h.expectation(v.target_state())?;
        Ok(())
    })
}
