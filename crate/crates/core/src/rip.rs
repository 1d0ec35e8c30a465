//! Restricted-isometry oracles.
//!
//! `delta_exact` returns the smallest delta_s for a matrix by enumerating all
//! column subsets of size s and taking the worst spectral deviation of the
//! subset Gram from the identity. `theta_exact` does the same for the
//! restricted orthogonality constant theta_{s,s} over disjoint subset pairs.
//! Exact mode refuses to run past its enumeration budget; the `_sampled`
//! variants maximize over random subsets instead and therefore lower-bound
//! the exact values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_singular_value, sym_eig_2x2, sym_eigenvalues, Mat};

/// Default cap on the number of subsets (or subset pairs) exact mode will
/// enumerate before refusing.
pub const DEFAULT_ENUM_BUDGET: u64 = 1_000_000;

/// Above this column count the full Gram matrix is not precomputed.
const GRAM_PRECOMPUTE_MAX_COLS: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RipMethod {
    #[serde(rename = "exact")]
    Exact,
    #[serde(rename = "monte-carlo")]
    MonteCarlo,
}

/// Restricted-isometry constants measured for one matrix at one sparsity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RipEstimate {
    pub s: usize,
    pub delta: f64,
    /// None when 2s > d (disjoint subset pairs do not exist).
    pub theta: Option<f64>,
    pub method: RipMethod,
    pub subsets_examined: u64,
}

/// Constants consumed by the tau schedule and the checkers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RipConstants {
    pub theta_ss: f64,
    pub delta_s: f64,
}

/// C(n, k), saturating at u128::MAX.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Visit all k-subsets of {0..n-1} in lexicographic order.
fn for_each_subset(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    if k == 0 {
        f(&[]);
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        // advance to the next combination
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn validate_s(u: &Mat, s: usize) -> Result<()> {
    if s == 0 {
        return Err(Error::invalid("sparsity level must be at least 1"));
    }
    if s > u.cols() {
        return Err(Error::invalid(format!(
            "sparsity level {s} exceeds column count {}",
            u.cols()
        )));
    }
    Ok(())
}

fn maybe_gram(u: &Mat) -> Option<Mat> {
    (u.cols() <= GRAM_PRECOMPUTE_MAX_COLS).then(|| u.gram())
}

/// Spectral deviation of a subset Gram block from the identity:
/// max_i |lambda_i - 1| of the s x s block.
fn delta_of_block(s: usize, block: Vec<f64>) -> f64 {
    debug_assert_eq!(block.len(), s * s);
    let dev = sym_eigenvalues(s, block.clone())
        .into_iter()
        .fold(0.0_f64, |acc, lam| acc.max((lam - 1.0).abs()));
    if s == 2 {
        // Closed-form cross-check guarding the eigensolver itself.
        let (lo, hi) = sym_eig_2x2(block[0], block[1], block[3]);
        let dev2 = (lo - 1.0).abs().max((hi - 1.0).abs());
        debug_assert!(
            (dev - dev2).abs() <= 1e-10 * dev.max(1.0),
            "jacobi {dev} vs closed form {dev2}"
        );
    }
    dev
}

/// Exact delta_s: max over all subsets T with |T| = s of ||U_Tᵀ U_T - I||_2.
/// Subsets of size < s never dominate (eigenvalue interlacing), so
/// enumerating |T| = s suffices.
pub fn delta_exact(u: &Mat, s: usize, budget: u64) -> Result<f64> {
    validate_s(u, s)?;
    let d = u.cols();
    let total = binomial(d, s);
    if total > budget as u128 {
        return Err(Error::BudgetExceeded { needed: total, s, budget });
    }
    let gram = maybe_gram(u);
    let mut worst = 0.0_f64;
    for_each_subset(d, s, &mut |t| {
        let block = u.gram_block(gram.as_ref(), t, t);
        worst = worst.max(delta_of_block(s, block));
    });
    Ok(worst)
}

/// Exact theta_{s,s}: max over disjoint T, T' with |T| = |T'| = s of
/// ||U_Tᵀ U_{T'}||_2. Requires 2s <= d.
pub fn theta_exact(u: &Mat, s: usize, budget: u64) -> Result<f64> {
    validate_s(u, s)?;
    let d = u.cols();
    if 2 * s > d {
        return Err(Error::invalid(format!(
            "theta requires 2s <= d (got s = {s}, d = {d})"
        )));
    }
    // Unordered pairs: each pair of disjoint subsets is visited once, keyed
    // by which side holds the smaller leading index.
    let total = binomial(d, s)
        .saturating_mul(binomial(d - s, s))
        / 2;
    if total > budget as u128 {
        return Err(Error::BudgetExceeded { needed: total, s, budget });
    }
    let gram = maybe_gram(u);
    let mut worst = 0.0_f64;
    for_each_subset(d, s, &mut |t1| {
        let rest: Vec<usize> = (0..d).filter(|i| !t1.contains(i)).collect();
        for_each_subset(rest.len(), s, &mut |pick| {
            let t2: Vec<usize> = pick.iter().map(|&i| rest[i]).collect();
            if t2[0] < t1[0] {
                return;
            }
            let block = u.gram_block(gram.as_ref(), t1, &t2);
            worst = worst.max(max_singular_value(s, s, &block));
        });
    });
    Ok(worst)
}

fn sample_subset(rng: &mut ChaCha8Rng, pool: &mut [usize], s: usize) -> Vec<usize> {
    for i in 0..s {
        let j = rng.random_range(i..pool.len());
        pool.swap(i, j);
    }
    let mut t = pool[..s].to_vec();
    t.sort_unstable();
    t
}

/// Monte-Carlo lower bound on delta_s over `trials` random subsets. When the
/// total subset count does not exceed `trials`, the enumeration is exhaustive
/// and the result equals `delta_exact`.
pub fn delta_sampled(u: &Mat, s: usize, trials: u64, seed: u64) -> Result<f64> {
    validate_s(u, s)?;
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let d = u.cols();
    let total = binomial(d, s);
    let gram = maybe_gram(u);
    if total <= trials as u128 {
        let mut worst = 0.0_f64;
        for_each_subset(d, s, &mut |t| {
            let block = u.gram_block(gram.as_ref(), t, t);
            worst = worst.max(delta_of_block(s, block));
        });
        return Ok(worst);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..d).collect();
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let t = sample_subset(&mut rng, &mut pool, s);
        let block = u.gram_block(gram.as_ref(), &t, &t);
        worst = worst.max(delta_of_block(s, block));
    }
    Ok(worst)
}

/// Monte-Carlo lower bound on theta_{s,s} over `trials` random disjoint
/// subset pairs; exhaustive when the pair count does not exceed `trials`.
pub fn theta_sampled(u: &Mat, s: usize, trials: u64, seed: u64) -> Result<f64> {
    validate_s(u, s)?;
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let d = u.cols();
    if 2 * s > d {
        return Err(Error::invalid(format!(
            "theta requires 2s <= d (got s = {s}, d = {d})"
        )));
    }
    let total = binomial(d, s).saturating_mul(binomial(d - s, s)) / 2;
    let gram = maybe_gram(u);
    if total <= trials as u128 {
        let mut worst = 0.0_f64;
        for_each_subset(d, s, &mut |t1| {
            let rest: Vec<usize> = (0..d).filter(|i| !t1.contains(i)).collect();
            for_each_subset(rest.len(), s, &mut |pick| {
                let t2: Vec<usize> = pick.iter().map(|&i| rest[i]).collect();
                if t2[0] < t1[0] {
                    return;
                }
                let block = u.gram_block(gram.as_ref(), t1, &t2);
                worst = worst.max(max_singular_value(s, s, &block));
            });
        });
        return Ok(worst);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..d).collect();
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let t1 = sample_subset(&mut rng, &mut pool, s);
        let mut rest: Vec<usize> = (0..d).filter(|i| !t1.contains(i)).collect();
        let t2 = sample_subset(&mut rng, &mut rest, s);
        let block = u.gram_block(gram.as_ref(), &t1, &t2);
        worst = worst.max(max_singular_value(s, s, &block));
    }
    Ok(worst)
}

/// Exact delta_s and (when 2s <= d) theta_{s,s} for one matrix.
pub fn estimate_exact(u: &Mat, s: usize, budget: u64) -> Result<RipEstimate> {
    let delta = delta_exact(u, s, budget)?;
    let d = u.cols();
    let mut examined = binomial(d, s);
    let theta = if 2 * s <= d {
        let pairs = binomial(d, s).saturating_mul(binomial(d - s, s)) / 2;
        examined = examined.saturating_add(pairs);
        Some(theta_exact(u, s, budget)?)
    } else {
        None
    };
    Ok(RipEstimate {
        s,
        delta,
        theta,
        method: RipMethod::Exact,
        subsets_examined: examined.min(u64::MAX as u128) as u64,
    })
}

/// Sampled counterpart of `estimate_exact`.
pub fn estimate_sampled(u: &Mat, s: usize, trials: u64, seed: u64) -> Result<RipEstimate> {
    let delta = delta_sampled(u, s, trials, derive(seed, 1))?;
    let d = u.cols();
    let delta_examined = binomial(d, s).min(trials as u128) as u64;
    let (theta, theta_examined) = if 2 * s <= d {
        let pairs = binomial(d, s).saturating_mul(binomial(d - s, s)) / 2;
        (
            Some(theta_sampled(u, s, trials, derive(seed, 2))?),
            pairs.min(trials as u128) as u64,
        )
    } else {
        (None, 0)
    };
    Ok(RipEstimate {
        s,
        delta,
        theta,
        method: RipMethod::MonteCarlo,
        subsets_examined: delta_examined + theta_examined,
    })
}

fn derive(seed: u64, tag: u64) -> u64 {
    crate::problem::derive_seed(seed, tag)
}

/// max(delta_{3s}, theta_{s,s} + delta_s), the conservative step parameter
/// the schedule derives from exact constants. delta_{3s} is evaluated at
/// min(3s, d).
pub fn gamma_from_oracle(u: &Mat, s: usize, budget: u64) -> Result<(f64, RipConstants)> {
    let delta_s = delta_exact(u, s, budget)?;
    let theta_ss = theta_exact(u, s, budget)?;
    let s3 = (3 * s).min(u.cols());
    let delta_3s = delta_exact(u, s3, budget)?;
    let gamma = delta_3s.max(theta_ss + delta_s);
    Ok((gamma, RipConstants { theta_ss, delta_s }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{generate_matrix, MatrixKind};

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(8, 2), 28);
        assert_eq!(binomial(18, 6), 18564);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(4, 5), 0);
    }

    #[test]
    fn subset_enumeration_is_lexicographic_and_complete() {
        let mut seen = Vec::new();
        for_each_subset(5, 3, &mut |t| seen.push(t.to_vec()));
        assert_eq!(seen.len(), 10);
        assert_eq!(seen[0], vec![0, 1, 2]);
        assert_eq!(seen[9], vec![2, 3, 4]);
        let mut sorted = seen.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 10);
        assert_eq!(sorted, seen);
    }

    #[test]
    fn identity_has_zero_delta_and_theta() {
        let u = Mat::identity(6);
        for s in 1..=6 {
            assert_eq!(delta_exact(&u, s, DEFAULT_ENUM_BUDGET).unwrap(), 0.0);
        }
        for s in 1..=3 {
            assert_eq!(theta_exact(&u, s, DEFAULT_ENUM_BUDGET).unwrap(), 0.0);
        }
    }

    #[test]
    fn single_scaled_column_delta() {
        // One column of norm 2 embedded in a 3x2 matrix: delta_1 = |4 - 1| = 3.
        let u = Mat::new(3, 2, vec![2.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let delta = delta_exact(&u, 1, DEFAULT_ENUM_BUDGET).unwrap();
        assert!((delta - 3.0).abs() < 1e-14);
    }

    #[test]
    fn delta_s2_matches_closed_form_oracle() {
        let u = generate_matrix(16, 8, MatrixKind::Gaussian, 3).unwrap();
        let fast = delta_exact(&u, 2, DEFAULT_ENUM_BUDGET).unwrap();
        // Independent route: closed-form 2x2 eigenvalues over all 28 pairs.
        let mut worst = 0.0_f64;
        for j in 0..8 {
            for k in (j + 1)..8 {
                let a = u.col_dot(j, j);
                let b = u.col_dot(j, k);
                let c = u.col_dot(k, k);
                let (lo, hi) = sym_eig_2x2(a, b, c);
                worst = worst.max((lo - 1.0).abs()).max((hi - 1.0).abs());
            }
        }
        assert!((fast - worst).abs() < 1e-12, "{fast} vs {worst}");
    }

    #[test]
    fn theta_s1_matches_pairwise_dot_oracle() {
        let u = generate_matrix(16, 8, MatrixKind::Gaussian, 3).unwrap();
        let fast = theta_exact(&u, 1, DEFAULT_ENUM_BUDGET).unwrap();
        let mut worst = 0.0_f64;
        for j in 0..8 {
            for k in (j + 1)..8 {
                worst = worst.max(u.col_dot(j, k).abs());
            }
        }
        assert!((fast - worst).abs() < 1e-12, "{fast} vs {worst}");
    }

    #[test]
    fn duplicated_column_drives_theta() {
        // Two identical columns: theta_1 >= ||column||^2 by Cauchy-Schwarz equality.
        let col = [0.6, -0.8, 0.0];
        let mut data = Vec::new();
        for i in 0..3 {
            data.extend_from_slice(&[col[i], col[i], 0.3 * (i as f64)]);
        }
        let u = Mat::new(3, 3, data);
        let theta = theta_exact(&u, 1, DEFAULT_ENUM_BUDGET).unwrap();
        assert!(theta >= 1.0 - 1e-12, "theta {theta}");
    }

    #[test]
    fn theta_requires_room_for_disjoint_pairs() {
        let u = Mat::identity(3);
        assert!(theta_exact(&u, 2, DEFAULT_ENUM_BUDGET).is_err());
    }

    #[test]
    fn budget_refusal_points_at_sampled_mode() {
        let u = generate_matrix(4, 40, MatrixKind::Gaussian, 1).unwrap();
        let err = delta_exact(&u, 10, 1000).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("delta_sampled"), "message: {msg}");
    }

    #[test]
    fn sampled_is_dominated_by_exact() {
        let big = generate_matrix(32, 64, MatrixKind::Gaussian, 5).unwrap();
        // Truncate to the first 12 columns so the exact oracle is cheap.
        let mut data = Vec::new();
        for i in 0..32 {
            data.extend_from_slice(&big.row(i)[..12]);
        }
        let trunc = Mat::new(32, 12, data);
        let exact = delta_exact(&trunc, 3, DEFAULT_ENUM_BUDGET).unwrap();
        let sampled = delta_sampled(&trunc, 3, 50, 9).unwrap();
        assert!(sampled <= exact + 1e-15, "{sampled} > {exact}");
        // With trials >= C(12,3) = 220 the sweep is exhaustive and equal.
        let full = delta_sampled(&trunc, 3, 10_000, 9).unwrap();
        assert_eq!(full, exact);
    }

    #[test]
    fn sampled_on_identity_is_zero() {
        let u = Mat::identity(10);
        assert_eq!(delta_sampled(&u, 3, 100, 0).unwrap(), 0.0);
        assert_eq!(theta_sampled(&u, 2, 100, 0).unwrap(), 0.0);
    }

    #[test]
    fn delta_monotone_in_s() {
        for seed in 0..10_u64 {
            let u = generate_matrix(12, 9, MatrixKind::Gaussian, seed).unwrap();
            let mut prev = 0.0;
            for s in 1..=4 {
                let cur = delta_exact(&u, s, DEFAULT_ENUM_BUDGET).unwrap();
                assert!(cur >= prev, "seed {seed}: delta_{s} = {cur} < {prev}");
                prev = cur;
            }
        }
    }

    #[test]
    fn column_permutation_invariance() {
        let u = generate_matrix(10, 6, MatrixKind::Gaussian, 17).unwrap();
        let perm = [3, 0, 5, 1, 4, 2];
        let mut data = Vec::new();
        for i in 0..10 {
            for &j in &perm {
                data.push(u.get(i, j));
            }
        }
        let v = Mat::new(10, 6, data);
        for s in 1..=3 {
            let du = delta_exact(&u, s, DEFAULT_ENUM_BUDGET).unwrap();
            let dv = delta_exact(&v, s, DEFAULT_ENUM_BUDGET).unwrap();
            assert!((du - dv).abs() < 1e-12);
        }
        let tu = theta_exact(&u, 2, DEFAULT_ENUM_BUDGET).unwrap();
        let tv = theta_exact(&v, 2, DEFAULT_ENUM_BUDGET).unwrap();
        assert!((tu - tv).abs() < 1e-12);
    }

    #[test]
    fn scaled_orthonormal_delta_closed_form() {
        // c * I has delta_1 = |c^2 - 1|.
        for &c in &[0.5_f64, 1.0, 1.3, 2.0] {
            let mut u = Mat::zeros(4, 4);
            for i in 0..4 {
                u.set(i, i, c);
            }
            let delta = delta_exact(&u, 1, DEFAULT_ENUM_BUDGET).unwrap();
            assert!((delta - (c * c - 1.0).abs()).abs() < 1e-14);
        }
    }

    #[test]
    fn estimate_bundles_both_constants() {
        let u = generate_matrix(16, 8, MatrixKind::Gaussian, 3).unwrap();
        let est = estimate_exact(&u, 2, DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!(est.method, RipMethod::Exact);
        assert!(est.theta.is_some());
        assert_eq!(est.subsets_examined, 28 + 28 * 15 / 2);
        let est1 = estimate_exact(&u, 5, DEFAULT_ENUM_BUDGET).unwrap();
        assert!(est1.theta.is_none(), "2s > d must drop theta");
    }
}
