use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{Algorithm, ExperimentConfig};
use super::instances::{Instance, InstanceSource};
use super::output::TrialRecord;
use crate::amp_overlap::{amp_estimate, hemisphere_distance, overlap_estimate};
use crate::baseline::{direct_sample_mean, one_ancilla_overlap};
use crate::eea::{eea_full, EeaOptions};
use crate::error::{Error, Result};
use crate::ledger::ResourceLedger;
use crate::oracles::{EvolutionOracle, Oracle};
use crate::pea::{circular_distance, pea_modified, pea_original, uses_for_precision, wrap_unsigned, PeaOptions};

/// Golden-ratio increment used to split the master seed into trial seeds.
pub const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed of trial `index`: `master + index·SEED_STRIDE (mod 2⁶⁴)`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    master.wrapping_add(index.wrapping_mul(SEED_STRIDE))
}

/// Aggregates for one precision value.
#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub p: f64,
    pub trials: usize,
    pub empirical_confidence: f64,
    pub median_error: f64,
    pub mean_error: f64,
    pub mean_n_preps: f64,
    pub mean_m_evolutions: f64,
    pub mean_total_time: f64,
    pub mean_u_uses: f64,
    pub mean_depth: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub algorithm: &'static str,
    pub c: f64,
    pub points: Vec<SweepPoint>,
    /// Resource the slope is fitted against.
    pub resource: &'static str,
    /// Least-squares slope of `ln(median error)` against `ln(mean resource)`.
    pub slope: Option<f64>,
}

/// Sample count for the one-ancilla baseline at the U-uses of a single-shot overlap estimate.
pub fn matched_samples(p: f64) -> Result<usize> {
    Ok((4 * uses_for_precision(p / 8.0)? + 2 * uses_for_precision(p / 2.0)?) as usize)
}

fn need_unitary(instance: &Instance, algorithm: Algorithm) -> Result<&Oracle> {
    instance
        .unitary
        .as_ref()
        .ok_or_else(|| Error::Config(format!("{} needs a unitary instance", algorithm.name())))
}

fn need_evolution(instance: &Instance, algorithm: Algorithm) -> Result<&EvolutionOracle> {
    instance
        .evolution
        .as_ref()
        .ok_or_else(|| Error::Config(format!("{} needs a Hamiltonian instance", algorithm.name())))
}

fn exact_overlap(u: &Oracle, instance: &Instance) -> Result<Complex64> {
    let psi = instance.prep.target_state();
    psi.inner_product(&u.matrix().apply_to(psi)?)
}

struct Outcome {
    estimate: Complex64,
    exact: Complex64,
    error: f64,
    ledger: ResourceLedger,
}

fn run_algorithm(config: &ExperimentConfig, p: f64, instance: &Instance, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let algorithm = config.algorithm;
    let c = config.c;
    let real = |x: f64| Complex64::new(x, 0.0);
    match algorithm {
        Algorithm::Pea | Algorithm::PeaModified => {
            let u = need_unitary(instance, algorithm)?;
            let overlap = exact_overlap(u, instance)?;
            if (overlap.norm() - 1.0).abs() > 1e-8 {
                return Err(Error::Config("phase estimation instances need an eigenstate".into()));
            }
            let phase = wrap_unsigned(overlap.arg());
            let psi = instance.prep.target_state();
            let est = if algorithm == Algorithm::Pea {
                pea_original(u, psi, p, rng)?
            } else {
                pea_modified(u, psi, p, c, &PeaOptions::default(), rng)?
            };
            Ok(Outcome {
                estimate: real(est.phase),
                exact: real(phase),
                // in turns, matching the precision convention
                error: circular_distance(est.phase, phase) / std::f64::consts::TAU,
                ledger: est.ledger,
            })
        }
        Algorithm::Aea => {
            let u = need_unitary(instance, algorithm)?;
            let exact = exact_overlap(u, instance)?.norm().min(1.0);
            let est = amp_estimate(u, &instance.prep, p, Some(c), rng)?;
            Ok(Outcome {
                estimate: real(est.amplitude),
                exact: real(exact),
                error: (est.amplitude.acos() - exact.acos()).abs(),
                ledger: est.ledger,
            })
        }
        Algorithm::Oea => {
            let u = need_unitary(instance, algorithm)?;
            let exact = exact_overlap(u, instance)?;
            let est = overlap_estimate(u, &instance.prep, p, Some(c), rng)?;
            Ok(Outcome {
                estimate: est.value,
                exact,
                error: hemisphere_distance(est.value, exact)?,
                ledger: est.ledger,
            })
        }
        Algorithm::OneAncilla => {
            let u = need_unitary(instance, algorithm)?;
            let exact = exact_overlap(u, instance)?;
            let samples = match config.samples {
                Some(n) => n,
                None => matched_samples(p)?,
            };
            let est = one_ancilla_overlap(u, &instance.prep, samples, rng)?;
            Ok(Outcome {
                estimate: est.value,
                exact,
                error: (est.value - exact).norm(),
                ledger: est.ledger,
            })
        }
        Algorithm::Eea | Algorithm::EeaStage1Log => {
            let evolution = need_evolution(instance, algorithm)?;
            let tail = config
                .tail
                .or(instance.default_tail)
                .ok_or_else(|| Error::Config("eea needs a [tail] section".into()))?;
            let exact = evolution.expectation(instance.prep.target_state())?;
            let options = EeaOptions {
                use_stage1_log: algorithm == Algorithm::EeaStage1Log,
                k: config.k,
                suppress_overlap: config.suppress_overlap,
            };
            let est = eea_full(evolution, &instance.prep, &tail, p, c, &options, rng)?;
            Ok(Outcome {
                estimate: real(est.value),
                exact: real(exact),
                error: (est.value - exact).abs(),
                ledger: est.ledger,
            })
        }
        Algorithm::DirectSample => {
            let evolution = need_evolution(instance, algorithm)?;
            let exact = evolution.expectation(instance.prep.target_state())?;
            let samples = config
                .samples
                .unwrap_or_else(|| ((1.0 / (p * p)).ceil() as usize).max(2));
            let est = direct_sample_mean(evolution, &instance.prep, samples, rng)?;
            Ok(Outcome {
                estimate: est.value,
                exact: real(exact),
                error: (est.value.re - exact).abs(),
                ledger: est.ledger,
            })
        }
    }
}

/// Runs trial `index` at precision `p`. The instance (for random built-ins)
/// and the algorithm share one generator seeded from the trial seed.
pub fn run_trial(config: &ExperimentConfig, source: &InstanceSource, p: f64, index: u64) -> Result<TrialRecord> {
    let seed = trial_seed(config.seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Instant::now();
    let instance = source.instantiate(&mut rng)?;
    let outcome = run_algorithm(config, p, &instance, &mut rng)?;
    let wall_ms = if config.wall_time {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    Ok(TrialRecord {
        trial: index,
        seed,
        estimate_re: outcome.estimate.re,
        estimate_im: outcome.estimate.im,
        exact_re: outcome.exact.re,
        exact_im: outcome.exact.im,
        error: outcome.error,
        within_p: outcome.error <= p,
        n_preps: outcome.ledger.state_preps,
        m_evolutions: outcome.ledger.evolution_uses,
        total_time: outcome.ledger.total_time,
        u_uses: outcome.ledger.u_uses,
        depth: outcome.ledger.depth,
        wall_ms,
    })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

pub fn summarize_point(p: f64, records: &[TrialRecord]) -> SweepPoint {
    let n = records.len().max(1) as f64;
    let mean = |f: &dyn Fn(&TrialRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
    let mut errors: Vec<f64> = records.iter().map(|r| r.error).collect();
    SweepPoint {
        p,
        trials: records.len(),
        empirical_confidence: records.iter().filter(|r| r.within_p).count() as f64 / n,
        median_error: if errors.is_empty() {
            f64::NAN
        } else {
            median(&mut errors)
        },
        mean_error: mean(&|r| r.error),
        mean_n_preps: mean(&|r| r.n_preps as f64),
        mean_m_evolutions: mean(&|r| r.m_evolutions as f64),
        mean_total_time: mean(&|r| r.total_time),
        mean_u_uses: mean(&|r| r.u_uses as f64),
        mean_depth: mean(&|r| r.depth as f64),
    }
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// usable points or a degenerate spread in `x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|l| l.0).sum::<f64>() / n;
    let my = logs.iter().map(|l| l.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|l| (l.0 - mx).powi(2)).sum();
    if sxx < 1e-12 {
        return None;
    }
    let sxy: f64 = logs.iter().map(|l| (l.0 - mx) * (l.1 - my)).sum();
    Some(sxy / sxx)
}

fn resource_of(algorithm: Algorithm) -> (&'static str, fn(&SweepPoint) -> f64) {
    match algorithm {
        Algorithm::Eea | Algorithm::EeaStage1Log => ("total_time", |s| s.mean_total_time),
        Algorithm::DirectSample => ("n_preps", |s| s.mean_n_preps),
        _ => ("u_uses", |s| s.mean_u_uses),
    }
}

/// Runs every trial of every precision in the config.
///
/// Trials are numbered globally across the sweep, and each draws from its own
/// seed, so output does not depend on the worker count.
pub fn run(config: &ExperimentConfig) -> Result<(Vec<TrialRecord>, Summary)> {
    config.validate()?;
    let source = InstanceSource::from_spec(&config.instance, &config.base_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;

    let mut records = Vec::new();
    let mut points = Vec::new();
    for (s, p) in config.precisions().into_iter().enumerate() {
        let offset = (s * config.trials) as u64;
        let batch: Vec<TrialRecord> = pool.install(|| {
            (0..config.trials as u64)
                .into_par_iter()
                .map(|i| run_trial(config, &source, p, offset + i))
                .collect::<Result<Vec<_>>>()
        })?;
        points.push(summarize_point(p, &batch));
        records.extend(batch);
    }

    let (resource, get) = resource_of(config.algorithm);
    let slope = if points.len() >= 2 {
        log_log_slope(&points.iter().map(|s| (get(s), s.median_error)).collect::<Vec<_>>())
    } else {
        None
    };
    Ok((
        records,
        Summary {
            algorithm: config.algorithm.name(),
            c: config.c,
            points,
            resource,
            slope,
        },
    ))
}
