use num_complex::Complex64;
use rand::Rng;

use super::series::series_coefficients;
use super::tail::TailModel;
use crate::amp_overlap::overlap_estimate;
use crate::confidence::{check_confidence, select_median_r, DEFAULT_R_CAP};
use crate::error::{invalid, Error, Result};
use crate::ledger::ResourceLedger;
use crate::oracles::{EvolutionOracle, Oracle, StatePrep};
use crate::pea::{pea_modified, wrap_signed, PeaOptions};
use crate::statevec::{DenseUnitary, StateVector};

/// Time step and phase window for the stage II overlap measurements.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageIIParams {
    pub theta_max: f64,
    pub t: f64,
    /// Series order; 1 selects the single-overlap variant.
    pub k: usize,
}

/// The four constraints on `(θ_max, t)`, evaluated directly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstraintReport {
    /// Truncation error of the phase-to-mean approximation fits in `(t/2)p/4`.
    pub truncation: bool,
    /// Tail contribution beyond the phase window fits in the budget.
    pub tail: bool,
    pub window: bool,
    /// The stage I uncertainty stays inside the window.
    pub offset: bool,
}

impl ConstraintReport {
    pub fn all(&self) -> bool {
        self.truncation && self.tail && self.window && self.offset
    }

    pub fn first_violation(&self) -> Option<&'static str> {
        [
            (self.truncation, "A (truncation)"),
            (self.tail, "B (tail)"),
            (self.window, "C (window)"),
            (self.offset, "D (offset)"),
        ]
        .into_iter()
        .find(|(ok, _)| !ok)
        .map(|(_, name)| name)
    }
}

fn tail_budget(theta: f64, p: f64, k: usize) -> f64 {
    if k == 1 {
        theta * p / 8.0
    } else {
        theta * p / (8.0 * k as f64 * (2f64).powi(k as i32))
    }
}

fn truncation_error(theta: f64, k: usize) -> f64 {
    if k == 1 {
        theta.powi(3) / 6.0
    } else {
        let k1 = (k + 1) as f64;
        theta.powf(k1) / (k1 * (1.0 - theta).powf(k1))
    }
}

pub fn check_stage2_constraints(model: &TailModel, p: f64, delta: f64, params: &StageIIParams) -> ConstraintReport {
    let StageIIParams { theta_max: theta, t, k } = *params;
    ConstraintReport {
        truncation: truncation_error(theta, k) <= (t / 2.0) * p / 4.0,
        tail: model.g(theta / t) <= tail_budget(theta, p, k),
        window: theta <= 1.0,
        offset: t * delta <= theta,
    }
}

/// Largest `θ` allowed before the constraint search.
fn theta_cap(k: usize) -> f64 {
    if k == 1 {
        1.0
    } else {
        1.0 / (k as f64 + 1.0)
    }
}

/// Smallest admissible `θ_max/t`: at least `Δ` and at least `G⁻¹` of the tail budget.
fn window_energy(model: &TailModel, p: f64, delta: f64, theta: f64, k: usize) -> Result<f64> {
    Ok(delta.max(model.g_inv(tail_budget(theta, p, k))?))
}

/// Largest `θ_max/t` allowed by the truncation constraint.
fn truncation_energy(p: f64, theta: f64, k: usize) -> f64 {
    if k == 1 {
        (p / 8.0) / (theta * theta / 6.0)
    } else {
        let k1 = (k + 1) as f64;
        (p / 8.0) * k1 * (1.0 - theta).powf(k1) / theta.powi(k as i32)
    }
}

/// Chooses `θ_max` as large as possible with
/// `max(Δ, G⁻¹(tail budget)) ≤ truncation energy`, then `t = θ_max / max(Δ, G⁻¹(…))`.
pub fn solve_stage2(model: &TailModel, p: f64, delta: f64, k: usize) -> Result<StageIIParams> {
    if !(p > 0.0) || !(delta >= p * (1.0 - 1e-12)) {
        return invalid(format!("need 0 < p ≤ Δ, got p = {p}, Δ = {delta}"));
    }
    if k == 0 || k > super::series::MAX_ORDER {
        return invalid(format!("series order {k} out of range"));
    }
    let feasible = |theta: f64| -> Result<bool> {
        Ok(window_energy(model, p, delta, theta, k)? <= truncation_energy(p, theta, k))
    };
    let cap = theta_cap(k);
    const GRID: usize = 64;
    let floor = cap * 1e-9;
    let grid: Vec<f64> = (0..GRID)
        .map(|i| floor * (cap / floor).powf(i as f64 / (GRID - 1) as f64))
        .collect();
    let mut best = None;
    for (i, &theta) in grid.iter().enumerate().rev() {
        if feasible(theta)? {
            best = Some(i);
            break;
        }
    }
    let Some(i) = best else {
        return Err(Error::Infeasible {
            constraint: "A''",
            detail: format!(
                "no θ_max in [{floor:.1e}, {cap}] satisfies max(Δ, G⁻¹(θp/8…)) ≤ truncation bound (p = {p}, Δ = {delta}, K = {k})"
            ),
        });
    };
    let mut theta = grid[i];
    if i + 1 < GRID {
        let (mut lo, mut hi) = (grid[i], grid[i + 1]);
        while hi - lo > 1e-13 * hi {
            let mid = 0.5 * (lo + hi);
            if feasible(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        theta = lo;
    }
    // guard the predicates against rounding at the boundary
    for _ in 0..64 {
        let t = theta / window_energy(model, p, delta, theta, k)? * (1.0 - 1e-14);
        let params = StageIIParams { theta_max: theta, t, k };
        if check_stage2_constraints(model, p, delta, &params).all() {
            return Ok(params);
        }
        theta *= 1.0 - 1e-12;
    }
    Err(Error::Internal("stage II parameters fail their own constraints".into()))
}

/// Overlap `⟨ψ|W|ψ⟩` as used by the expectation estimator.
///
/// With `suppress` the overlap is read through `I ⊗ cW` on a Bell pair
/// (environment, control) times `|ψ⟩`, which equals `(1 + ⟨ψ|W|ψ⟩)/2`; the
/// control is maximally mixed, as in the parallel variant. Precision is
/// halved to compensate for the rescaling.
fn expectation_overlap<R: Rng + ?Sized>(
    w: &Oracle,
    v: &StatePrep,
    p: f64,
    c: f64,
    suppress: bool,
    rng: &mut R,
) -> Result<(Complex64, ResourceLedger)> {
    if !suppress {
        let est = overlap_estimate(w, v, p, Some(c), rng)?;
        return Ok((est.value, est.ledger));
    }
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let bell = StatePrep::from_state(StateVector::from_amplitudes(vec![
        Complex64::new(half, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(half, 0.0),
    ])?)?;
    let prep = v.with_ancilla_state(&bell)?;
    let cw = w.controlled();
    let wide = Oracle::new(DenseUnitary::identity(1)?.kron(cw.matrix()), *cw.cost());
    let est = overlap_estimate(&wide, &prep, p / 2.0, Some(c), rng)?;
    Ok((est.value * 2.0 - 1.0, est.ledger))
}

/// Outcome of stage I.
#[derive(Clone, Debug)]
pub struct StageOneResult {
    pub a0: f64,
    pub delta: f64,
    pub t_i: f64,
    pub r: usize,
    pub c_prime: f64,
    /// `Λ₁ … Λ_r` in `[−π, π)`.
    pub phases: Vec<f64>,
    pub ledger: ResourceLedger,
}

/// Smallest `Δ = p·2^j` with `F(Δ/2) < 1/4`.
pub fn stage1_delta(model: &TailModel, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return invalid(format!("precision {p} must be positive"));
    }
    (0..=64)
        .map(|j| p * (2f64).powi(j))
        .find(|&d| model.f(d / 2.0) < 0.25)
        .ok_or_else(|| Error::Infeasible {
            constraint: "F(Δ/2) < 1/4",
            detail: format!("no Δ = p·2^j up to p·2^64 satisfies the tail condition for {model:?}"),
        })
}

/// Coarse estimate `a₀` with `|a₀ − ⟨A⟩| ≤ Δ` with probability at least
/// `1 − (1 − c)/2`, from the median of `r` phase estimates of `e^{−iAt_i}`.
pub fn stage1<R: Rng + ?Sized>(
    evolution: &EvolutionOracle,
    v: &StatePrep,
    model: &TailModel,
    p: f64,
    c: f64,
    rng: &mut R,
) -> Result<StageOneResult> {
    check_confidence(c)?;
    model.validate()?;
    let delta = stage1_delta(model, p)?;
    let t_i = std::f64::consts::PI / (4.0 * (model.b + delta));
    let r = select_median_r((1.0 - c) / 4.0, DEFAULT_R_CAP)?;
    let r = if r % 2 == 0 { r + 1 } else { r };
    let c_prime = 1.0 - (1.0 - c) / (4.0 * r as f64);
    let w = evolution.oracle(t_i)?;
    // error Δt_i/2 radians is Δt_i/(4π) turns
    let precision = delta * t_i / (4.0 * std::f64::consts::PI);

    let mut ledger = ResourceLedger::new();
    let mut phases = Vec::with_capacity(r);
    for _ in 0..r {
        let run = pea_modified(&w, v.target_state(), precision, c_prime, &PeaOptions::default(), rng)?;
        phases.push(wrap_signed(run.phase));
        ledger.alongside(&run.ledger);
    }
    let mut sorted = phases.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[(r - 1) / 2];
    Ok(StageOneResult {
        a0: -median / t_i,
        delta,
        t_i,
        r,
        c_prime,
        phases,
        ledger,
    })
}

/// Outcome of the logarithmic-resource stage I variant.
#[derive(Clone, Debug)]
pub struct StageOneLogResult {
    pub a: f64,
    pub delta: f64,
    pub iterations: usize,
    /// `p_a` before the first iteration and after each one.
    pub p_a_history: Vec<f64>,
    pub ledger: ResourceLedger,
}

fn stage1_log_condition(model: &TailModel, delta: f64) -> bool {
    model.g(delta) < delta / 6.0 && model.f(delta) < 1.0 / 18.0
}

/// Smallest `Δ ≥ floor` with `G(Δ) < Δ/6` and `F(Δ) < 1/18`.
pub fn stage1_log_delta(model: &TailModel, floor: f64) -> Result<f64> {
    if !(floor > 0.0) {
        return invalid(format!("Δ floor {floor} must be positive"));
    }
    if stage1_log_condition(model, floor) {
        return Ok(floor);
    }
    let (mut lo, mut hi) = (floor, 2.0 * floor);
    let mut doublings = 0;
    while !stage1_log_condition(model, hi) {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::Infeasible {
                constraint: "G(Δ) < Δ/6 and F(Δ) < 1/18",
                detail: format!("no Δ satisfies the tail conditions for {model:?}"),
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if stage1_log_condition(model, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Iteration budget `⌈log₂(b/Δ)⌉`, or 0 when `b ≤ Δ`.
pub fn stage1_log_budget(b: f64, delta: f64) -> usize {
    let q = b / delta;
    if q <= 1.0 {
        0
    } else {
        q.log2().ceil() as usize
    }
}

/// Shrinks the uncertainty `p_a` around `a` from `b` to at most `Δ` using
/// constant-precision overlap estimates.
pub fn stage1_log<R: Rng + ?Sized>(
    evolution: &EvolutionOracle,
    v: &StatePrep,
    model: &TailModel,
    delta_floor: f64,
    c: f64,
    suppress: bool,
    rng: &mut R,
) -> Result<StageOneLogResult> {
    check_confidence(c)?;
    model.validate()?;
    let delta = stage1_log_delta(model, delta_floor)?;
    let budget = stage1_log_budget(model.b, delta);
    let mut a = 0.0;
    let mut p_a = model.b;
    let mut history = vec![p_a];
    let mut ledger = ResourceLedger::new();
    let mut iterations = 0;
    while p_a > delta {
        if iterations >= budget {
            return Err(Error::Internal(format!(
                "stage I′ needed more than {budget} iterations (p_a = {p_a}, Δ = {delta})"
            )));
        }
        let c_iter = 1.0 - (1.0 - c) / (2.0 * budget as f64);
        let t = 1.0 / (p_a + delta);
        let w = evolution.with_offset(a).oracle(t)?;
        let (x, run) = expectation_overlap(&w, v, 1.0 / 18.0, c_iter, suppress, rng)?;
        a -= x.im / t;
        let next = delta / 6.0 + (5.0 / 18.0) * (p_a + delta);
        if p_a >= 2.0 * delta && next > p_a / 2.0 {
            return Err(Error::Internal(format!(
                "p_a went from {p_a} to {next}, which is not a halving"
            )));
        }
        p_a = next;
        history.push(p_a);
        ledger.then(&run);
        iterations += 1;
    }
    Ok(StageOneLogResult {
        a,
        delta,
        iterations,
        p_a_history: history,
        ledger,
    })
}

/// `−Im(x)/(t/2) + a₀` with `x` an overlap estimate of `e^{−i(A−a₀)t/2}`.
pub fn stage2<R: Rng + ?Sized>(
    evolution: &EvolutionOracle,
    v: &StatePrep,
    a0: f64,
    params: &StageIIParams,
    p: f64,
    c: f64,
    suppress: bool,
    rng: &mut R,
) -> Result<(f64, ResourceLedger)> {
    check_confidence(c)?;
    let half = params.t / 2.0;
    let w = evolution.with_offset(a0).oracle(half)?;
    let (x, ledger) = expectation_overlap(&w, v, half * p / 4.0, 1.0 - (1.0 - c) / 2.0, suppress, rng)?;
    Ok((-x.im / half + a0, ledger))
}

/// Higher-order variant: overlaps `y_l` of `e^{−i(A−a₀)lt/2}` for
/// `l = 1 … K` combined with the log-series coefficients.
pub fn stage2_prime<R: Rng + ?Sized>(
    evolution: &EvolutionOracle,
    v: &StatePrep,
    a0: f64,
    params: &StageIIParams,
    p: f64,
    c: f64,
    suppress: bool,
    rng: &mut R,
) -> Result<(f64, ResourceLedger)> {
    check_confidence(c)?;
    let k = params.k;
    if k < 2 {
        return invalid("the series variant needs K ≥ 2");
    }
    let coefficients = series_coefficients(k)?;
    let half = params.t / 2.0;
    let precision = half * p / (4.0 * k as f64 * (2f64).powi(k as i32));
    let sub_c = 1.0 - (1.0 - c) / (2.0 * k as f64);
    let shifted = evolution.with_offset(a0);
    let mut y = vec![Complex64::new(1.0, 0.0)];
    let mut ledger = ResourceLedger::new();
    for l in 1..=k {
        let w = shifted.oracle(l as f64 * half)?;
        let (x, run) = expectation_overlap(&w, v, precision, sub_c, suppress, rng)?;
        y.push(x);
        ledger.alongside(&run);
    }
    let sum = coefficients.combine(&y)?;
    Ok((-sum.im / half + a0, ledger))
}

/// Configuration of the full estimator.
#[derive(Clone, Copy, Debug, Default)]
pub struct EeaOptions {
    /// Use the iterative stage I′ instead of the median-of-PEA stage I.
    pub use_stage1_log: bool,
    /// Series order; `None` picks [`default_order`].
    pub k: Option<usize>,
    /// Read overlaps through a maximally mixed control qubit.
    pub suppress_overlap: bool,
}

/// `max(2, ⌈log₂(1/p)⌉)`, capped at the largest supported order.
pub fn default_order(p: f64) -> usize {
    let k = (1.0 / p).log2().ceil();
    let k = if k.is_finite() && k > 2.0 { k as usize } else { 2 };
    k.min(super::series::MAX_ORDER)
}

/// Result of expectation estimation.
#[derive(Clone, Debug)]
pub struct EstimateResult {
    pub value: f64,
    pub p: f64,
    pub c: f64,
    pub a0: f64,
    pub delta: f64,
    pub k: usize,
    pub params: Option<StageIIParams>,
    pub stage2_skipped: bool,
    pub ledger: ResourceLedger,
}

/// Estimates `⟨ψ|A|ψ⟩` within `p` with confidence `c`: stage I (or I′)
/// followed by stage II (or II′), each with failure budget `(1 − c)/2`.
pub fn eea_full<R: Rng + ?Sized>(
    evolution: &EvolutionOracle,
    v: &StatePrep,
    model: &TailModel,
    p: f64,
    c: f64,
    options: &EeaOptions,
    rng: &mut R,
) -> Result<EstimateResult> {
    if !(p > 0.0 && p.is_finite()) {
        return invalid(format!("precision {p} must be positive"));
    }
    check_confidence(c)?;
    model.validate()?;
    if evolution.dim() != v.target_state().dim() {
        return invalid("state and Hamiltonian dimensions differ");
    }
    let k = options.k.unwrap_or_else(|| default_order(p));

    let (a0, delta, mut ledger) = if options.use_stage1_log {
        let s = stage1_log(evolution, v, model, p, c, options.suppress_overlap, rng)?;
        (s.a, s.delta, s.ledger)
    } else {
        let s = stage1(evolution, v, model, p, c, rng)?;
        (s.a0, s.delta, s.ledger)
    };

    if delta <= p * (1.0 + 1e-12) {
        return Ok(EstimateResult {
            value: a0,
            p,
            c,
            a0,
            delta,
            k,
            params: None,
            stage2_skipped: true,
            ledger,
        });
    }

    let params = solve_stage2(model, p, delta, k)?;
    let (value, second) = if k == 1 {
        stage2(evolution, v, a0, &params, p, c, options.suppress_overlap, rng)?
    } else {
        stage2_prime(evolution, v, a0, &params, p, c, options.suppress_overlap, rng)?
    };
    ledger.then(&second);
    Ok(EstimateResult {
        value,
        p,
        c,
        a0,
        delta,
        k,
        params: Some(params),
        stage2_skipped: false,
        ledger,
    })
}
