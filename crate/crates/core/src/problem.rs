//! Problem generation: sparse ground-truth signals, random measurement
//! matrices, and exact measurements y = U x.
//!
//! All generators are pure functions of their arguments including the seed;
//! two calls with identical arguments produce bit-identical output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm2, Mat};

/// Deterministic seed derivation (splitmix64 over base and tag). Used to give
/// sub-generators independent streams from a single user-facing seed.
pub fn derive_seed(base: u64, tag: u64) -> u64 {
    let mut z = base
        .wrapping_add(tag.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Distribution of the nonzero entries of a generated signal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Amplitude {
    /// Entries are +1 or -1 with random sign.
    Unit,
    /// Entries are standard normal.
    Gaussian,
    /// Magnitudes uniform in [lo, hi] (0 <= lo <= hi, hi > 0), random sign.
    Uniform { lo: f64, hi: f64 },
}

impl std::str::FromStr for Amplitude {
    type Err = Error;

    fn from_str(s: &str) -> Result<Amplitude> {
        match s {
            "unit" => Ok(Amplitude::Unit),
            "gaussian" => Ok(Amplitude::Gaussian),
            other => {
                if let Some(range) = other.strip_prefix("uniform:") {
                    let parts: Vec<&str> = range.split(',').collect();
                    if parts.len() == 2 {
                        let lo = parts[0].parse().map_err(|_| Error::Parse(format!("bad amplitude range: {range}")))?;
                        let hi = parts[1].parse().map_err(|_| Error::Parse(format!("bad amplitude range: {range}")))?;
                        return Ok(Amplitude::Uniform { lo, hi });
                    }
                }
                Err(Error::invalid(format!(
                    "unknown amplitude '{other}' (expected unit, gaussian, or uniform:lo,hi)"
                )))
            }
        }
    }
}

/// How a measurement matrix was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    /// Entries i.i.d. N(0, 1/m), so that E[UᵀU] = I.
    Gaussian,
    /// Entries i.i.d. +-1/sqrt(m).
    Rademacher,
    /// Supplied by the caller (read from file, identity, ...).
    Explicit,
}

impl std::str::FromStr for MatrixKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<MatrixKind> {
        match s {
            "gaussian" => Ok(MatrixKind::Gaussian),
            "rademacher" => Ok(MatrixKind::Rademacher),
            "explicit" => Ok(MatrixKind::Explicit),
            other => Err(Error::invalid(format!("unknown matrix kind '{other}'"))),
        }
    }
}

/// An s-sparse ground-truth vector together with its support and the norm
/// bound R used by the solver's step-size schedule.
///
/// Invariants: `support` holds exactly the indices of nonzero entries in
/// `values`, sorted ascending, and `norm_bound >= ||values||_2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseSignal {
    pub values: Vec<f64>,
    pub support: Vec<usize>,
    pub norm_bound: f64,
}

impl SparseSignal {
    /// Canonical constructor: extracts the support and sets R = ||x||_2.
    pub fn from_values(values: Vec<f64>) -> SparseSignal {
        let support = support_of(&values);
        let norm_bound = norm2(&values);
        SparseSignal { values, support, norm_bound }
    }

    /// Same signal with a larger norm bound.
    pub fn with_norm_bound(mut self, r: f64) -> Result<SparseSignal> {
        if !(r >= norm2(&self.values)) {
            return Err(Error::invalid("norm bound must be at least ||x||_2"));
        }
        self.norm_bound = r;
        Ok(self)
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }
}

/// Indices of nonzero entries, ascending.
pub fn support_of(values: &[f64]) -> Vec<usize> {
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// Generate an s-sparse signal of dimension d with support at uniformly
/// random positions. `s = 0` yields the zero vector with R = 0.
pub fn generate_signal(d: usize, s: usize, amplitude: Amplitude, seed: u64) -> Result<SparseSignal> {
    if d == 0 {
        return Err(Error::invalid("signal dimension must be positive"));
    }
    if s > d {
        return Err(Error::invalid(format!("sparsity {s} exceeds dimension {d}")));
    }
    if let Amplitude::Uniform { lo, hi } = amplitude {
        if !(0.0 <= lo && lo <= hi && hi > 0.0) {
            return Err(Error::invalid("uniform amplitude needs 0 <= lo <= hi and hi > 0"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..d).collect();
    for i in 0..s {
        let j = rng.random_range(i..d);
        indices.swap(i, j);
    }
    let mut support: Vec<usize> = indices[..s].to_vec();
    support.sort_unstable();

    let mut values = vec![0.0; d];
    for &i in &support {
        values[i] = loop {
            let v: f64 = match amplitude {
                Amplitude::Unit => {
                    if rng.random::<bool>() {
                        1.0
                    } else {
                        -1.0
                    }
                }
                Amplitude::Gaussian => rng.sample(StandardNormal),
                Amplitude::Uniform { lo, hi } => {
                    let mag: f64 = if lo == hi { lo } else { rng.random_range(lo..hi) };
                    if rng.random::<bool>() {
                        mag
                    } else {
                        -mag
                    }
                }
            };
            if v != 0.0 {
                break v;
            }
        };
    }
    Ok(SparseSignal::from_values(values))
}

/// Generate an m x d random measurement matrix with entries scaled by
/// 1/sqrt(m) so that E[UᵀU] = I.
pub fn generate_matrix(m: usize, d: usize, kind: MatrixKind, seed: u64) -> Result<Mat> {
    if m == 0 || d == 0 {
        return Err(Error::invalid("matrix dimensions must be positive"));
    }
    let scale = 1.0 / (m as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(m * d);
    match kind {
        MatrixKind::Gaussian => {
            for _ in 0..m * d {
                let g: f64 = rng.sample(StandardNormal);
                data.push(g * scale);
            }
        }
        MatrixKind::Rademacher => {
            for _ in 0..m * d {
                data.push(if rng.random::<bool>() { scale } else { -scale });
            }
        }
        MatrixKind::Explicit => {
            return Err(Error::invalid("explicit matrices are supplied, not generated"));
        }
    }
    Ok(Mat::new(m, d, data))
}

/// y = U x in full precision.
pub fn measure(u: &Mat, x: &[f64]) -> Result<Vec<f64>> {
    if u.cols() != x.len() {
        return Err(Error::invalid(format!(
            "measure: matrix has {} columns but signal has dimension {}",
            u.cols(),
            x.len()
        )));
    }
    Ok(u.matvec(x))
}

/// A measurement matrix with the measurements taken through it.
#[derive(Clone, Debug)]
pub struct MeasurementEnsemble {
    pub matrix: Mat,
    pub measurements: Vec<f64>,
    pub kind: MatrixKind,
    pub rng_seed: Option<u64>,
}

impl MeasurementEnsemble {
    pub fn from_parts(
        matrix: Mat,
        measurements: Vec<f64>,
        kind: MatrixKind,
        rng_seed: Option<u64>,
    ) -> Result<MeasurementEnsemble> {
        if measurements.len() != matrix.rows() {
            return Err(Error::invalid("measurement vector length must equal matrix rows"));
        }
        Ok(MeasurementEnsemble { matrix, measurements, kind, rng_seed })
    }

    /// Generate the matrix and measure the given signal through it.
    pub fn generate(
        m: usize,
        kind: MatrixKind,
        seed: u64,
        signal: &SparseSignal,
    ) -> Result<MeasurementEnsemble> {
        let matrix = generate_matrix(m, signal.dimension(), kind, seed)?;
        let measurements = measure(&matrix, &signal.values)?;
        Ok(MeasurementEnsemble { matrix, measurements, kind, rng_seed: Some(seed) })
    }

    /// Wrap a caller-supplied matrix, measuring the signal through it.
    pub fn explicit(matrix: Mat, signal: &SparseSignal) -> Result<MeasurementEnsemble> {
        let measurements = measure(&matrix, &signal.values)?;
        Ok(MeasurementEnsemble { matrix, measurements, kind: MatrixKind::Explicit, rng_seed: None })
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    /// Re-verify that y = U x at working precision.
    pub fn verify(&self, x: &[f64]) -> bool {
        let yx = match measure(&self.matrix, x) {
            Ok(v) => v,
            Err(_) => return false,
        };
        let diff: f64 = self
            .measurements
            .iter()
            .zip(&yx)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        diff <= 1e-12 * norm2(&self.measurements).max(f64::MIN_POSITIVE)
    }
}

/// JSON descriptor from which a generated problem can be reproduced exactly.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemDescriptor {
    pub d: usize,
    pub s: usize,
    pub m: usize,
    pub kind: MatrixKind,
    pub amplitude: Amplitude,
    pub seed: u64,
    pub support: Vec<usize>,
    #[serde(rename = "R")]
    pub norm_bound: f64,
}

/// A full generated instance: ground truth plus its measurements.
#[derive(Clone, Debug)]
pub struct Problem {
    pub signal: SparseSignal,
    pub ensemble: MeasurementEnsemble,
    pub amplitude: Amplitude,
    pub seed: u64,
}

impl Problem {
    /// Generate signal and matrix from a single seed. The signal and matrix
    /// use independent derived streams, so changing m does not change x.
    pub fn generate(
        d: usize,
        s: usize,
        m: usize,
        kind: MatrixKind,
        amplitude: Amplitude,
        seed: u64,
    ) -> Result<Problem> {
        let signal = generate_signal(d, s, amplitude, derive_seed(seed, 1))?;
        let ensemble = MeasurementEnsemble::generate(m, kind, derive_seed(seed, 2), &signal)?;
        Ok(Problem { signal, ensemble, amplitude, seed })
    }

    pub fn descriptor(&self) -> ProblemDescriptor {
        ProblemDescriptor {
            d: self.signal.dimension(),
            s: self.signal.sparsity(),
            m: self.ensemble.rows(),
            kind: self.ensemble.kind,
            amplitude: self.amplitude,
            seed: self.seed,
            support: self.signal.support.clone(),
            norm_bound: self.signal.norm_bound,
        }
    }

    /// Regenerate from a descriptor and cross-check the recorded support and
    /// norm bound against the regenerated instance.
    pub fn from_descriptor(desc: &ProblemDescriptor) -> Result<Problem> {
        if desc.kind == MatrixKind::Explicit {
            return Err(Error::invalid(
                "descriptor with explicit matrix kind cannot be regenerated; load the matrix CSV instead",
            ));
        }
        let p = Problem::generate(desc.d, desc.s, desc.m, desc.kind, desc.amplitude, desc.seed)?;
        if p.signal.support != desc.support {
            return Err(Error::Parse("descriptor support does not match regenerated signal".into()));
        }
        if (p.signal.norm_bound - desc.norm_bound).abs() > 1e-12 * desc.norm_bound.abs().max(1.0) {
            return Err(Error::Parse("descriptor norm bound does not match regenerated signal".into()));
        }
        Ok(p)
    }
}
