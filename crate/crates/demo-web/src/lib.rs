//! Browser bindings for the recovery engine. Three operations, each returning
//! a JSON string the page renders onto canvases:
//!
//! * [`recovery_demo`]: one seeded instance, the full error-decay trace, and
//!   the final iterate next to the truth;
//! * [`sweep_demo`]: success fraction as the number of measurements grows;
//! * [`rip_demo`]: exact restricted-isometry constants of a small matrix.
//!
//! The functions are plain Rust and also compile natively, which is how the
//! unit tests drive them.

use serde_json::json;
use wasm_bindgen::prelude::*;

use sparse_recover::checks::{run_checks, CheckReport};
use sparse_recover::problem::{Amplitude, MatrixKind, Problem};
use sparse_recover::rip::{self, RipConstants};
use sparse_recover::solver::{recover, GammaSource, IterationBudget, RecoveryConfig, TauSource};

const MAX_DIMENSION: usize = 512;
const MAX_TRIALS: usize = 200;

fn err_json(msg: impl std::fmt::Display) -> String {
    json!({ "error": msg.to_string() }).to_string()
}

fn run_recovery(
    d: usize,
    s: usize,
    m: usize,
    gamma: f64,
    iterations: usize,
    seed: u64,
) -> Result<(Problem, sparse_recover::solver::IterateTrace, CheckReport), sparse_recover::Error> {
    let problem = Problem::generate(d, s, m, MatrixKind::Gaussian, Amplitude::Unit, seed)?;
    let config = RecoveryConfig {
        s,
        norm_bound: problem.signal.norm_bound,
        gamma: GammaSource::Explicit(gamma),
        tau: TauSource::Schedule,
        iterations: IterationBudget::Fixed(iterations),
        stop_on_fixpoint: false,
    };
    let trace = recover(&problem.ensemble, Some(&problem.signal), &config)?;
    let consts = RipConstants { theta_ss: gamma, delta_s: gamma };
    let report = run_checks(&trace, &problem.signal, &problem.ensemble.matrix, &consts)?;
    Ok((problem, trace, report))
}

/// Run one seeded recovery and return the trace as JSON: per-iterate errors,
/// thresholds, support sizes, verdicts, and the final iterate beside the truth.
#[wasm_bindgen]
pub fn recovery_demo(d: usize, s: usize, m: usize, gamma: f64, iterations: usize, seed: u64) -> String {
    if d == 0 || d > MAX_DIMENSION || iterations == 0 || iterations > 500 {
        return err_json(format!("d must be 1..={MAX_DIMENSION} and iterations 1..=500"));
    }
    match run_recovery(d, s, m, gamma, iterations, seed) {
        Ok((problem, trace, report)) => {
            let err2: Vec<f64> = report.iterations.iter().map(|c| c.err2).collect();
            let err1: Vec<f64> = report.iterations.iter().map(|c| c.err1).collect();
            let bound: Vec<f64> = report.iterations.iter().map(|c| c.decay_bound).collect();
            let support: Vec<usize> = report.iterations.iter().map(|c| c.support_size).collect();
            let union_ok: Vec<bool> = report.iterations.iter().map(|c| c.support_bound_ok).collect();
            let final_rel = report
                .iterations
                .last()
                .map(|c| c.rel_err_bound)
                .unwrap_or(f64::INFINITY);
            json!({
                "d": d, "s": s, "m": m, "gamma": gamma,
                "R": problem.signal.norm_bound,
                "tau": trace.taus,
                "err2": err2,
                "err1": err1,
                "bound": bound,
                "support_size": support,
                "support_ok": union_ok,
                "truth": problem.signal.values,
                "estimate": trace.final_record().x,
                "final_rel_err": final_rel,
                "checks_passed": report.passed(),
                "applicable": report.applicable,
            })
            .to_string()
        }
        Err(e) => err_json(e),
    }
}

/// Success fraction per measurement count m, for a fixed (d, s, gamma).
/// Flat scalar arguments keep the JS call site plain.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn sweep_demo(
    d: usize,
    s: usize,
    m_min: usize,
    m_max: usize,
    m_step: usize,
    trials: usize,
    gamma: f64,
    iterations: usize,
    seed: u64,
) -> String {
    if d == 0 || d > MAX_DIMENSION || trials == 0 || trials > MAX_TRIALS || m_step == 0 {
        return err_json(format!("need d <= {MAX_DIMENSION}, 1..={MAX_TRIALS} trials, m_step >= 1"));
    }
    if m_min == 0 || m_min > m_max {
        return err_json("need 1 <= m_min <= m_max");
    }
    let mut ms = Vec::new();
    let mut fractions = Vec::new();
    let mut median_errs = Vec::new();
    let mut m = m_min;
    while m <= m_max {
        let mut successes = 0;
        let mut rel_errs = Vec::with_capacity(trials);
        for trial in 0..trials {
            let trial_seed = sparse_recover::problem::derive_seed(seed, (m * MAX_TRIALS + trial) as u64);
            match run_recovery(d, s, m, gamma, iterations, trial_seed) {
                Ok((problem, _trace, report)) => {
                    let final_err = report.iterations.last().map(|c| c.err2).unwrap_or(f64::INFINITY);
                    let r = problem.signal.norm_bound;
                    if final_err <= 1e-4 * r {
                        successes += 1;
                    }
                    rel_errs.push(if r > 0.0 { final_err / r } else { final_err });
                }
                Err(e) => return err_json(e),
            }
        }
        rel_errs.sort_by(f64::total_cmp);
        ms.push(m);
        fractions.push(successes as f64 / trials as f64);
        median_errs.push(rel_errs[rel_errs.len() / 2]);
        m += m_step;
    }
    json!({
        "d": d, "s": s, "gamma": gamma, "trials": trials,
        "m": ms,
        "success_fraction": fractions,
        "median_rel_err": median_errs,
    })
    .to_string()
}

/// Exact delta_s for s = 1..=s_max and theta_{s,s} where defined, for one
/// seeded Gaussian matrix. Small sizes only; this enumerates subsets.
#[wasm_bindgen]
pub fn rip_demo(d: usize, m: usize, s_max: usize, seed: u64) -> String {
    if d == 0 || d > 24 || s_max == 0 || s_max > 4 {
        return err_json("rip demo is limited to d <= 24 and s_max <= 4");
    }
    let matrix = match sparse_recover::problem::generate_matrix(m, d, MatrixKind::Gaussian, seed) {
        Ok(u) => u,
        Err(e) => return err_json(e),
    };
    let mut rows = Vec::new();
    for s in 1..=s_max.min(d) {
        match rip::estimate_exact(&matrix, s, rip::DEFAULT_ENUM_BUDGET) {
            Ok(est) => rows.push(json!({
                "s": est.s,
                "delta": est.delta,
                "theta": est.theta,
                "subsets_examined": est.subsets_examined,
                "admissible": est.delta <= 0.25,
            })),
            Err(e) => return err_json(e),
        }
    }
    json!({ "d": d, "m": m, "rows": rows }).to_string()
}
