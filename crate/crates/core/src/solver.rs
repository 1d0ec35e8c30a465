//! The recovery iteration: gradient steps through the measurement operator
//! followed by soft thresholding, with the threshold decaying geometrically
//! across iterations.
//!
//! One iteration maps x_t to
//!
//! ```text
//! x_{t+1} = shrink( x_t - Uᵀ(U x_t - y) / (1 + gamma),  tau_t / (1 + gamma) )
//! ```
//!
//! where `shrink(v, h) = sign(v) * max(|v| - h, 0)` componentwise. With
//! `tau_t = ((theta + delta + gamma)/sqrt(s)) * (4 gamma)^{(t-1)/2} * R` and
//! `gamma <= 1/4`, the iterates keep their support inside a 2s-sized
//! envelope around the true support and the error contracts by sqrt(4 gamma)
//! per iteration; the `checks` module verifies both claims per iteration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm1, norm2, sub};
use crate::problem::{support_of, MeasurementEnsemble, SparseSignal};
use crate::rip::{self, RipConstants};

/// Where the step parameter gamma comes from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum GammaSource {
    /// A caller-chosen value.
    Explicit(f64),
    /// max(delta_{3s}, theta_{s,s} + delta_s) measured by the exact oracles.
    /// Only feasible when the enumeration fits the budget.
    Oracle { budget: u64 },
    /// The conservative default 1/4, the largest value with a convergence
    /// guarantee when the matrix is good enough.
    #[default]
    Quarter,
}

/// Where the per-iteration thresholds tau_t come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TauSource {
    /// The geometric continuation schedule. Uses oracle-measured constants
    /// when gamma came from the oracle, otherwise the plug-in substitution
    /// theta = delta = gamma (so the leading factor becomes 3 gamma).
    Schedule,
    /// The geometric schedule with caller-supplied constants.
    ScheduleWith { theta_ss: f64, delta_s: f64 },
    /// Fixed threshold; this is plain iterative soft thresholding.
    Constant(f64),
    /// One threshold per iteration, caller-supplied.
    Explicit(Vec<f64>),
}

/// Iteration count, either fixed or derived from a target accuracy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum IterationBudget {
    Fixed(usize),
    /// Run until the guaranteed error bound falls below eps; requires
    /// gamma < 1/4 strictly (otherwise the bound never decays).
    TargetAccuracy(f64),
}

/// Everything the solver needs besides the measurements themselves.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecoveryConfig {
    pub s: usize,
    /// Upper bound R on the Euclidean norm of the target.
    pub norm_bound: f64,
    pub gamma: GammaSource,
    pub tau: TauSource,
    pub iterations: IterationBudget,
    /// Stop once the iterate is an exact fixed point and the remaining
    /// thresholds cannot change it. Off by default so traces always cover
    /// the full horizon.
    #[serde(default)]
    pub stop_on_fixpoint: bool,
}

impl RecoveryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.s == 0 {
            return Err(Error::invalid("sparsity s must be at least 1"));
        }
        if !(self.norm_bound >= 0.0) {
            return Err(Error::invalid("norm bound must be nonnegative"));
        }
        match &self.gamma {
            GammaSource::Explicit(g) if !(g.is_finite() && *g >= 0.0) => {
                return Err(Error::invalid("gamma must be finite and nonnegative"));
            }
            _ => {}
        }
        match &self.tau {
            TauSource::Constant(c) if !(c.is_finite() && *c >= 0.0) => {
                return Err(Error::invalid("constant tau must be finite and nonnegative"));
            }
            TauSource::Explicit(list) => {
                if list.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
                    return Err(Error::invalid("explicit tau list must be finite and nonnegative"));
                }
            }
            TauSource::ScheduleWith { theta_ss, delta_s }
                if !(theta_ss.is_finite() && *theta_ss >= 0.0 && delta_s.is_finite() && *delta_s >= 0.0) =>
            {
                return Err(Error::invalid("schedule constants must be finite and nonnegative"));
            }
            _ => {}
        }
        match self.iterations {
            IterationBudget::Fixed(0) => {
                return Err(Error::invalid("iteration count must be at least 1"));
            }
            IterationBudget::TargetAccuracy(eps) if !(eps > 0.0) => {
                return Err(Error::invalid("target accuracy must be positive"));
            }
            _ => {}
        }
        Ok(())
    }
}

/// One stored iterate. `t` is 1-based; `x_1` is the all-zero start.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IterateRecord {
    pub t: usize,
    pub x: Vec<f64>,
    /// Exact nonzero pattern of `x`.
    pub support: Vec<usize>,
    /// Threshold used by the step leaving this iterate (absent on the last).
    pub tau: Option<f64>,
    /// ||x_t - x_*||_2, present when ground truth was supplied.
    pub err2: Option<f64>,
    /// ||x_t - x_*||_1, present when ground truth was supplied.
    pub err1: Option<f64>,
}

/// The full run: T+1 iterates (fewer if stopped at a fixed point), the
/// resolved parameters, and wall time. Wall time is reported separately from
/// any persisted artifact so that identical runs produce identical files.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IterateTrace {
    pub records: Vec<IterateRecord>,
    pub gamma: f64,
    pub s: usize,
    pub norm_bound: f64,
    pub taus: Vec<f64>,
    /// Set to the iterate index at which the run stopped early, if it did.
    pub stopped_early: Option<usize>,
    #[serde(skip)]
    pub wall_seconds: f64,
}

impl IterateTrace {
    pub fn final_record(&self) -> &IterateRecord {
        self.records.last().expect("trace has at least one record")
    }

    /// Rebuild a trace from raw iterates (e.g. parsed from a CSV export).
    /// Supports are recomputed; error columns are filled when truth is given.
    pub fn from_iterates(
        xs: Vec<Vec<f64>>,
        taus: Vec<f64>,
        gamma: f64,
        s: usize,
        norm_bound: f64,
        truth: Option<&SparseSignal>,
    ) -> Result<IterateTrace> {
        if xs.is_empty() {
            return Err(Error::invalid("trace must contain at least one iterate"));
        }
        let records = xs
            .into_iter()
            .enumerate()
            .map(|(i, x)| make_record(i + 1, x, taus.get(i).copied(), truth))
            .collect();
        Ok(IterateTrace { records, gamma, s, norm_bound, taus, stopped_early: None, wall_seconds: 0.0 })
    }
}

fn make_record(t: usize, x: Vec<f64>, tau: Option<f64>, truth: Option<&SparseSignal>) -> IterateRecord {
    let support = support_of(&x);
    let (err2, err1) = match truth {
        Some(sig) => {
            let diff = sub(&x, &sig.values);
            (Some(norm2(&diff)), Some(norm1(&diff)))
        }
        None => (None, None),
    };
    IterateRecord { t, x, support, tau, err2, err1 }
}

/// Uᵀ(U x - y): the gradient estimate built from the measurements alone.
/// Two matrix-vector products; UᵀU is never formed.
pub fn approx_gradient(u: &crate::linalg::Mat, y: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    if u.cols() != x.len() || u.rows() != y.len() {
        return Err(Error::invalid(format!(
            "approx_gradient: matrix is {}x{}, got |y| = {}, |x| = {}",
            u.rows(),
            u.cols(),
            y.len(),
            x.len()
        )));
    }
    let mut residual = u.matvec(x);
    for (r, yi) in residual.iter_mut().zip(y) {
        *r -= yi;
    }
    Ok(u.t_matvec(&residual))
}

/// Componentwise sign(v) * max(|v| - threshold, 0).
pub fn soft_threshold(v: &[f64], threshold: f64) -> Result<Vec<f64>> {
    if !(threshold >= 0.0) {
        return Err(Error::invalid("threshold must be nonnegative"));
    }
    Ok(v.iter()
        .map(|&vi| {
            let mag = vi.abs() - threshold;
            if mag > 0.0 {
                vi.signum() * mag
            } else {
                0.0
            }
        })
        .collect())
}

/// One composite step: the minimizer of
/// tau * ||x||_1 + <x - x_t, grad> + (1 + gamma)/2 * ||x - x_t||^2,
/// which is soft_threshold(x_t - grad/(1+gamma), tau/(1+gamma)).
pub fn prox_step(x: &[f64], grad: &[f64], tau: f64, gamma: f64) -> Result<Vec<f64>> {
    if x.len() != grad.len() {
        return Err(Error::invalid("prox_step: x and grad must have equal length"));
    }
    if !(gamma >= 0.0) {
        return Err(Error::invalid("gamma must be nonnegative"));
    }
    let inv = 1.0 / (1.0 + gamma);
    let shifted: Vec<f64> = x.iter().zip(grad).map(|(xi, gi)| xi - gi * inv).collect();
    soft_threshold(&shifted, tau * inv)
}

/// Threshold schedule: tau_t = ((theta + delta + gamma)/sqrt(s))
/// * (4 gamma)^{(t-1)/2} * R. Nonincreasing in t exactly when gamma <= 1/4.
pub fn tau_schedule(
    t: usize,
    gamma: f64,
    theta_ss: f64,
    delta_s: f64,
    s: usize,
    norm_bound: f64,
) -> Result<f64> {
    if t == 0 {
        return Err(Error::invalid("iteration index is 1-based"));
    }
    if s == 0 {
        return Err(Error::invalid("sparsity s must be at least 1"));
    }
    for (name, v) in [("gamma", gamma), ("theta_ss", theta_ss), ("delta_s", delta_s), ("R", norm_bound)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::invalid(format!("{name} must be finite and nonnegative")));
        }
    }
    let lead = (theta_ss + delta_s + gamma) / (s as f64).sqrt();
    Ok(lead * (4.0 * gamma).powf((t as f64 - 1.0) / 2.0) * norm_bound)
}

/// Smallest horizon T for which the guaranteed bound (4 gamma)^{(t-1)/2} R
/// falls below eps: T = ceil(2 ln(R/eps) / ln(1/(4 gamma))) + 1. Requires
/// gamma < 1/4 strictly.
pub fn iterations_for_target(eps: f64, gamma: f64, norm_bound: f64) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(Error::invalid("target accuracy must be positive"));
    }
    if !(gamma >= 0.0) {
        return Err(Error::invalid("gamma must be nonnegative"));
    }
    if gamma >= 0.25 {
        return Err(Error::invalid(
            "gamma >= 1/4 gives no decaying error bound; supply an explicit iteration count",
        ));
    }
    if norm_bound <= eps || gamma == 0.0 {
        return Ok(1);
    }
    let t = (2.0 * (norm_bound / eps).ln() / (1.0 / (4.0 * gamma)).ln()).ceil();
    Ok(t.max(0.0) as usize + 1)
}

/// The idealized full-information step: with the exact gradient of
/// (1/2)||x - x_*||^2 and unit step, a single update lands on the target.
pub fn exact_gradient_step(_x: &[f64], truth: &[f64]) -> Vec<f64> {
    truth.to_vec()
}

/// Resolve the step parameter, measuring constants when asked to.
pub fn resolve_gamma(
    source: &GammaSource,
    ensemble: &MeasurementEnsemble,
    s: usize,
) -> Result<(f64, Option<RipConstants>)> {
    match source {
        GammaSource::Explicit(g) => Ok((*g, None)),
        GammaSource::Quarter => Ok((0.25, None)),
        GammaSource::Oracle { budget } => {
            let (gamma, consts) = rip::gamma_from_oracle(&ensemble.matrix, s, *budget)?;
            Ok((gamma, Some(consts)))
        }
    }
}

fn resolve_taus(
    source: &TauSource,
    gamma: f64,
    oracle_consts: Option<RipConstants>,
    s: usize,
    norm_bound: f64,
    horizon: usize,
) -> Result<Vec<f64>> {
    match source {
        TauSource::Schedule => {
            let consts = oracle_consts.unwrap_or(RipConstants { theta_ss: gamma, delta_s: gamma });
            (1..=horizon)
                .map(|t| tau_schedule(t, gamma, consts.theta_ss, consts.delta_s, s, norm_bound))
                .collect()
        }
        TauSource::ScheduleWith { theta_ss, delta_s } => (1..=horizon)
            .map(|t| tau_schedule(t, gamma, *theta_ss, *delta_s, s, norm_bound))
            .collect(),
        TauSource::Constant(c) => Ok(vec![*c; horizon]),
        TauSource::Explicit(list) => {
            if list.len() != horizon {
                return Err(Error::invalid(format!(
                    "explicit tau list has {} entries but the run needs {horizon}",
                    list.len()
                )));
            }
            Ok(list.clone())
        }
    }
}

struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    fn start() -> Stopwatch {
        Stopwatch {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    fn seconds(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        {
            self.start.elapsed().as_secs_f64()
        }
        #[cfg(target_arch = "wasm32")]
        {
            0.0
        }
    }
}

/// Run the full iteration from x_1 = 0. The solver reads only the matrix and
/// the measurements; `truth` feeds the error columns of the trace and nothing
/// else, and may be omitted.
pub fn recover(
    ensemble: &MeasurementEnsemble,
    truth: Option<&SparseSignal>,
    config: &RecoveryConfig,
) -> Result<IterateTrace> {
    config.validate()?;
    let d = ensemble.cols();
    if let Some(sig) = truth {
        if sig.dimension() != d {
            return Err(Error::invalid("truth dimension does not match matrix columns"));
        }
    }
    let watch = Stopwatch::start();
    let (gamma, oracle_consts) = resolve_gamma(&config.gamma, ensemble, config.s)?;
    let horizon = match config.iterations {
        IterationBudget::Fixed(t) => t,
        IterationBudget::TargetAccuracy(eps) => iterations_for_target(eps, gamma, config.norm_bound)?,
    };
    let taus = resolve_taus(&config.tau, gamma, oracle_consts, config.s, config.norm_bound, horizon)?;

    let mut records = Vec::with_capacity(horizon + 1);
    let mut x = vec![0.0; d];
    records.push(make_record(1, x.clone(), taus.first().copied(), truth));
    let mut stopped_early = None;

    for t in 1..=horizon {
        let grad = approx_gradient(&ensemble.matrix, &ensemble.measurements, &x)?;
        let next = prox_step(&x, &grad, taus[t - 1], gamma)?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure { t: t + 1 });
        }
        records.push(make_record(t + 1, next.clone(), taus.get(t).copied(), truth));
        let fixed = next == x;
        x = next;
        if config.stop_on_fixpoint && fixed && taus[t - 1..].iter().all(|&tt| tt == taus[t - 1]) {
            stopped_early = Some(t + 1);
            break;
        }
    }

    Ok(IterateTrace {
        records,
        gamma,
        s: config.s,
        norm_bound: config.norm_bound,
        taus,
        stopped_early,
        wall_seconds: watch.seconds(),
    })
}
