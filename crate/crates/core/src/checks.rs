//! Per-iteration verification of the solver's guarantees against a known
//! ground truth.
//!
//! Every verdict is recomputed from the raw iterates, the truth, the matrix,
//! and the supplied constants; nothing solver-reported is trusted. Checked
//! per iterate t:
//!
//! * support concentration: |S_t ∪ S_*| <= 2s, and |S_* ∪ S_t ∪ S_{t+1}| <= 3s;
//! * off-support counting: at most s entries of
//!   (1+gamma) x_t - Uᵀ U (x_t - x_*) restricted off the true support exceed
//!   (theta + delta + gamma)/sqrt(s) * ||x_t - x_*||_2;
//! * error decay: ||x_t - x_*||_2 <= (4 gamma)^{(t-1)/2} R, the l1 analogues
//!   with factors sqrt(s) and sqrt(2s), and the one-step recurrence
//!   ||x_{t+1} - x_*||^2 <= 4 gamma * Delta_t^2.
//!
//! The decay claims are guarantees only for gamma <= 1/4; for larger gamma
//! they are computed but marked inapplicable rather than failed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm1, norm2, sub, Mat};
use crate::problem::{support_of, SparseSignal};
use crate::rip::RipConstants;
use crate::solver::IterateTrace;

/// Relative slack applied to the right-hand side of every value inequality,
/// separating genuine violations from rounding. Cardinality comparisons get
/// no slack.
pub const VERDICT_SLACK: f64 = 1e-9;

/// Off-support counting result for one iterate.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OffSupportCheck {
    /// Entries off the true support exceeding the threshold built from
    /// theta + delta + gamma.
    pub count: usize,
    /// Same count under the alternative constant 2*theta + gamma.
    pub count_two_theta: usize,
    pub threshold: f64,
    /// count <= s.
    pub ok: bool,
}

/// All verdicts for one iterate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IterationCheck {
    pub t: usize,
    pub err2: f64,
    pub err1: f64,
    /// err2 relative to the norm bound R.
    pub rel_err_bound: f64,
    /// err2 relative to ||x_*||_2 (equals rel_err_bound when R = ||x_*||).
    pub rel_err_truth: f64,
    pub support_size: usize,
    pub union_size: usize,
    /// |S_t ∪ S_*| <= 2s.
    pub support_bound_ok: bool,
    /// |S_* ∪ S_t ∪ S_{t+1}| and its 3s bound; absent on the last iterate.
    pub union3_size: Option<usize>,
    pub union3_ok: Option<bool>,
    /// Threshold used by the step leaving this iterate.
    pub tau: Option<f64>,
    /// tau_t >= (theta + delta + gamma)/sqrt(s) * err2_t, the hypothesis
    /// under which support concentration is guaranteed to propagate.
    pub tau_admissible: Option<bool>,
    pub offsupport: OffSupportCheck,
    /// Delta_t = (4 gamma)^{(t-1)/2} R.
    pub decay_bound: f64,
    pub decay2_ok: bool,
    /// l1 bound with the sqrt(s) factor (measured, not gated).
    pub decay1_sqrt_s_ok: bool,
    /// l1 bound with the provable sqrt(2s) factor.
    pub decay1_sqrt_2s_ok: bool,
    /// Whenever the support bound holds, err1 <= sqrt(2s) * err2 must too.
    pub l1_relation_ok: bool,
    /// err2_{t+1}^2 <= 4 gamma * max(err2_t^2, Delta_t^2); absent on the last.
    pub recurrence_ok: Option<bool>,
    /// Strict form err2_{t+1}^2 <= 4 gamma * Delta_t^2.
    pub recurrence_strict_ok: Option<bool>,
}

/// Aggregate verdicts over a whole trace.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub gamma: f64,
    pub s: usize,
    #[serde(rename = "R")]
    pub norm_bound: f64,
    pub theta_ss: f64,
    pub delta_s: f64,
    /// gamma <= 1/4: the decay guarantees only apply below this.
    pub applicable: bool,
    pub iterations: Vec<IterationCheck>,
    /// Human-readable descriptions of every gated verdict that failed.
    pub failures: Vec<String>,
}

impl CheckReport {
    /// True when no gated verdict failed. Decay and recurrence verdicts are
    /// gated only when `applicable`; the conditional support/counting
    /// verdicts are gated through their own hypotheses.
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn all_support_ok(&self) -> bool {
        self.iterations.iter().all(|c| c.support_bound_ok)
    }

    pub fn all_decay2_ok(&self) -> bool {
        self.iterations.iter().all(|c| c.decay2_ok)
    }
}

/// Size of the union of two sorted index sets.
fn union_size(a: &[usize], b: &[usize]) -> usize {
    let mut i = 0;
    let mut j = 0;
    let mut n = 0;
    while i < a.len() && j < b.len() {
        n += 1;
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    n + (a.len() - i) + (b.len() - j)
}

fn union3_size(a: &[usize], b: &[usize], c: &[usize]) -> usize {
    let mut merged: Vec<usize> = a.iter().chain(b).chain(c).copied().collect();
    merged.sort_unstable();
    merged.dedup();
    merged.len()
}

/// val <= bound up to the verdict slack, evaluated in the log domain so that
/// geometrically tiny bounds neither underflow nor spuriously fail.
fn le_with_slack_log(val: f64, ln_bound: f64) -> bool {
    if val == 0.0 {
        return true;
    }
    if ln_bound == f64::NEG_INFINITY {
        return false;
    }
    val.ln() <= ln_bound + VERDICT_SLACK.ln_1p()
}

fn le_with_slack(val: f64, bound: f64) -> bool {
    val <= bound * (1.0 + VERDICT_SLACK)
}

/// ln of Delta_t = (4 gamma)^{(t-1)/2} R; -inf when the bound is exactly 0.
fn ln_decay_bound(t: usize, gamma: f64, norm_bound: f64) -> f64 {
    if norm_bound == 0.0 {
        return f64::NEG_INFINITY;
    }
    if t == 1 {
        return norm_bound.ln();
    }
    if gamma == 0.0 {
        return f64::NEG_INFINITY;
    }
    norm_bound.ln() + 0.5 * (t as f64 - 1.0) * (4.0 * gamma).ln()
}

/// Count how many entries of (1+gamma) x_t - Uᵀ U (x_t - x_*), restricted off
/// the true support, exceed (theta + delta + gamma)/sqrt(s) * ||x_t - x_*||_2.
/// The matching claim is that at most s do whenever |S_t ∪ S_*| <= 2s.
pub fn check_offsupport_count(
    x_t: &[f64],
    truth: &SparseSignal,
    u: &Mat,
    gamma: f64,
    s: usize,
    consts: &RipConstants,
) -> Result<OffSupportCheck> {
    if s == 0 {
        return Err(Error::invalid("sparsity s must be at least 1"));
    }
    if x_t.len() != truth.dimension() || u.cols() != x_t.len() {
        return Err(Error::invalid("off-support check: dimension mismatch"));
    }
    let diff = sub(x_t, &truth.values);
    let correlated = u.t_matvec(&u.matvec(&diff));
    let v: Vec<f64> = x_t
        .iter()
        .zip(&correlated)
        .map(|(xi, ci)| (1.0 + gamma) * xi - ci)
        .collect();
    let err2 = norm2(&diff);
    let sqrt_s = (s as f64).sqrt();
    let threshold = (consts.theta_ss + consts.delta_s + gamma) / sqrt_s * err2;
    let threshold_two_theta = (2.0 * consts.theta_ss + gamma) / sqrt_s * err2;
    let mut on_support = vec![false; x_t.len()];
    for &i in &truth.support {
        on_support[i] = true;
    }
    let mut count = 0;
    let mut count_two_theta = 0;
    for (i, &vi) in v.iter().enumerate() {
        if on_support[i] {
            continue;
        }
        if vi.abs() > threshold * (1.0 + VERDICT_SLACK) {
            count += 1;
        }
        if vi.abs() > threshold_two_theta * (1.0 + VERDICT_SLACK) {
            count_two_theta += 1;
        }
    }
    Ok(OffSupportCheck { count, count_two_theta, threshold, ok: count <= s })
}

/// Support concentration verdicts for every iterate of a trace. Supports are
/// recomputed from the stored iterates.
pub struct SupportEvolution {
    pub support_size: usize,
    pub union_size: usize,
    pub support_bound_ok: bool,
    pub union3_size: Option<usize>,
    pub union3_ok: Option<bool>,
    pub tau_admissible: Option<bool>,
}

pub fn check_support_evolution(
    trace: &IterateTrace,
    truth: &SparseSignal,
    consts: &RipConstants,
) -> Vec<SupportEvolution> {
    let s = trace.s;
    let gamma = trace.gamma;
    let supports: Vec<Vec<usize>> = trace.records.iter().map(|r| support_of(&r.x)).collect();
    let sqrt_s = (s as f64).sqrt();
    trace
        .records
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let union = union_size(&supports[i], &truth.support);
            let (u3, u3_ok) = match supports.get(i + 1) {
                Some(next) => {
                    let size = union3_size(&truth.support, &supports[i], next);
                    (Some(size), Some(size <= 3 * s))
                }
                None => (None, None),
            };
            let tau_admissible = rec.tau.map(|tau| {
                let err2 = norm2(&sub(&rec.x, &truth.values));
                let required = (consts.theta_ss + consts.delta_s + gamma) / sqrt_s * err2;
                tau >= required * (1.0 - VERDICT_SLACK)
            });
            SupportEvolution {
                support_size: supports[i].len(),
                union_size: union,
                support_bound_ok: union <= 2 * s,
                union3_size: u3,
                union3_ok: u3_ok,
                tau_admissible,
            }
        })
        .collect()
}

/// Decay verdicts for every iterate of a trace. Errors are recomputed from
/// the stored iterates; bound comparisons run in the log domain.
pub struct DecayCheck {
    pub err2: f64,
    pub err1: f64,
    pub decay_bound: f64,
    pub decay2_ok: bool,
    pub decay1_sqrt_s_ok: bool,
    pub decay1_sqrt_2s_ok: bool,
    pub recurrence_ok: Option<bool>,
    pub recurrence_strict_ok: Option<bool>,
}

pub fn check_decay(trace: &IterateTrace, truth: &SparseSignal) -> Vec<DecayCheck> {
    let gamma = trace.gamma;
    let r = trace.norm_bound;
    let s = trace.s;
    let errs: Vec<(f64, f64)> = trace
        .records
        .iter()
        .map(|rec| {
            let diff = sub(&rec.x, &truth.values);
            (norm2(&diff), norm1(&diff))
        })
        .collect();
    errs.iter()
        .enumerate()
        .map(|(i, &(err2, err1))| {
            let t = i + 1;
            let ln_bound = ln_decay_bound(t, gamma, r);
            let decay_bound = if ln_bound == f64::NEG_INFINITY { 0.0 } else { ln_bound.exp() };
            let decay2_ok = le_with_slack_log(err2, ln_bound);
            let decay1_sqrt_s_ok = le_with_slack_log(err1, ln_bound + 0.5 * (s as f64).ln());
            let decay1_sqrt_2s_ok = le_with_slack_log(err1, ln_bound + 0.5 * (2.0 * s as f64).ln());
            let (recurrence_ok, recurrence_strict_ok) = match errs.get(i + 1) {
                Some(&(next2, _)) => {
                    let delta_sq = if decay_bound == 0.0 { 0.0 } else { decay_bound * decay_bound };
                    let lax = le_with_slack(next2 * next2, 4.0 * gamma * (err2 * err2).max(delta_sq));
                    let strict = le_with_slack(next2 * next2, 4.0 * gamma * delta_sq);
                    (Some(lax), Some(strict))
                }
                None => (None, None),
            };
            DecayCheck {
                err2,
                err1,
                decay_bound,
                decay2_ok,
                decay1_sqrt_s_ok,
                decay1_sqrt_2s_ok,
                recurrence_ok,
                recurrence_strict_ok,
            }
        })
        .collect()
}

/// Run every checker over a trace and aggregate the verdicts.
pub fn run_checks(
    trace: &IterateTrace,
    truth: &SparseSignal,
    u: &Mat,
    consts: &RipConstants,
) -> Result<CheckReport> {
    if trace.records.is_empty() {
        return Err(Error::invalid("trace must contain at least one iterate"));
    }
    let gamma = trace.gamma;
    let s = trace.s;
    let applicable = gamma <= 0.25 * (1.0 + VERDICT_SLACK);
    let supports = check_support_evolution(trace, truth, consts);
    let decays = check_decay(trace, truth);
    let truth_norm = norm2(&truth.values);

    let mut iterations = Vec::with_capacity(trace.records.len());
    for (i, rec) in trace.records.iter().enumerate() {
        let off = check_offsupport_count(&rec.x, truth, u, gamma, s, consts)?;
        let sup = &supports[i];
        let dec = &decays[i];
        let l1_relation_ok = if sup.support_bound_ok {
            le_with_slack(dec.err1, (2.0 * s as f64).sqrt() * dec.err2)
        } else {
            true
        };
        iterations.push(IterationCheck {
            t: rec.t,
            err2: dec.err2,
            err1: dec.err1,
            rel_err_bound: if trace.norm_bound > 0.0 { dec.err2 / trace.norm_bound } else { dec.err2 },
            rel_err_truth: if truth_norm > 0.0 { dec.err2 / truth_norm } else { dec.err2 },
            support_size: sup.support_size,
            union_size: sup.union_size,
            support_bound_ok: sup.support_bound_ok,
            union3_size: sup.union3_size,
            union3_ok: sup.union3_ok,
            tau: rec.tau,
            tau_admissible: sup.tau_admissible,
            offsupport: off,
            decay_bound: dec.decay_bound,
            decay2_ok: dec.decay2_ok,
            decay1_sqrt_s_ok: dec.decay1_sqrt_s_ok,
            decay1_sqrt_2s_ok: dec.decay1_sqrt_2s_ok,
            l1_relation_ok,
            recurrence_ok: dec.recurrence_ok,
            recurrence_strict_ok: dec.recurrence_strict_ok,
        });
    }

    let mut failures = Vec::new();
    for (i, check) in iterations.iter().enumerate() {
        let t = check.t;
        // Counting claim: conditional on the support hypothesis only.
        if check.support_bound_ok && !check.offsupport.ok {
            failures.push(format!(
                "t={t}: off-support count {} exceeds s={s} despite |S_t ∪ S_*| <= 2s",
                check.offsupport.count
            ));
        }
        // Support propagation: hypothesis at t implies the bounds at t+1.
        if check.support_bound_ok && check.tau_admissible == Some(true) {
            if let Some(next) = iterations.get(i + 1) {
                if !next.support_bound_ok {
                    failures.push(format!("t={t}: support bound broke at t+1 despite admissible tau"));
                }
            }
            if check.union3_ok == Some(false) {
                failures.push(format!("t={t}: triple support union exceeds 3s despite admissible tau"));
            }
        }
        if !check.l1_relation_ok {
            failures.push(format!("t={t}: err1 > sqrt(2s) * err2 while the support bound holds"));
        }
        if t == 1 && !check.support_bound_ok {
            failures.push("t=1: |S_*| alone already exceeds 2s; the sparsity parameter is wrong".into());
        }
        if applicable {
            if !check.decay2_ok {
                failures.push(format!("t={t}: err2 exceeds (4 gamma)^((t-1)/2) R"));
            }
            if !check.decay1_sqrt_2s_ok {
                failures.push(format!("t={t}: err1 exceeds sqrt(2s) (4 gamma)^((t-1)/2) R"));
            }
            if check.recurrence_ok == Some(false) {
                failures.push(format!("t={t}: recurrence err2_{{t+1}}^2 <= 4 gamma max(err2_t^2, Delta_t^2) broke"));
            }
        }
    }

    Ok(CheckReport {
        gamma,
        s,
        norm_bound: trace.norm_bound,
        theta_ss: consts.theta_ss,
        delta_s: consts.delta_s,
        applicable,
        iterations,
        failures,
    })
}
