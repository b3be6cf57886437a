//! Expectation estimation for a Hermitian `A` given through its evolution
//! operators `e^{−iAt}`.
//!
//! Stage I locates `⟨A⟩` to within `Δ`, either from the median of several
//! phase estimates or by the iterative stage I′. Stage II then reads the
//! residual from the imaginary part of one overlap (`K = 1`) or of a
//! truncated log series over `K` overlaps.

mod series;
mod stages;
mod tail;

pub use series::{log_series, remainder_bound, series_coefficients, SeriesCoefficients, MAX_ORDER};
pub use stages::{
    check_stage2_constraints, default_order, eea_full, solve_stage2, stage1, stage1_delta, stage1_log,
    stage1_log_budget, stage1_log_delta, stage2, stage2_prime, ConstraintReport, EeaOptions, EstimateResult,
    StageIIParams, StageOneLogResult, StageOneResult,
};
pub use tail::{TailKind, TailModel};
