//! Small dense linear algebra: row-major `f64` matrices, vector helpers, and
//! a Jacobi eigensolver for the tiny symmetric blocks the oracles work on.
//!
//! Everything here is sized for this crate's regime (a few hundred columns,
//! Gram blocks of single-digit order), where plain loops are both fast enough
//! and easy to audit.

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Mat {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Mat { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// U x, one pass over the rows.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// Uᵀ v without materializing the transpose.
    pub fn t_matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows, "t_matvec dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (o, &u) in out.iter_mut().zip(self.row(i)) {
                *o += vi * u;
            }
        }
        out
    }

    /// Inner product of columns j and k.
    pub fn col_dot(&self, j: usize, k: usize) -> f64 {
        (0..self.rows).map(|i| self.get(i, j) * self.get(i, k)).sum()
    }

    /// Full Gram matrix UᵀU (cols x cols).
    pub fn gram(&self) -> Mat {
        let d = self.cols;
        let mut g = Mat::zeros(d, d);
        for j in 0..d {
            for k in j..d {
                let v = self.col_dot(j, k);
                g.set(j, k, v);
                g.set(k, j, v);
            }
        }
        g
    }

    /// Row-major block [U_a]ᵀ[U_b] of the Gram matrix for column subsets
    /// `a` and `b`, reading from a precomputed Gram when available.
    pub fn gram_block(&self, gram: Option<&Mat>, a: &[usize], b: &[usize]) -> Vec<f64> {
        let mut block = Vec::with_capacity(a.len() * b.len());
        match gram {
            Some(g) => {
                for &j in a {
                    for &k in b {
                        block.push(g.get(j, k));
                    }
                }
            }
            None => {
                for &j in a {
                    for &k in b {
                        block.push(self.col_dot(j, k));
                    }
                }
            }
        }
        block
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Eigenvalues of a symmetric n x n matrix (row-major), by cyclic Jacobi
/// rotations. Order of the returned eigenvalues is unspecified.
pub fn sym_eigenvalues(n: usize, mut a: Vec<f64>) -> Vec<f64> {
    assert_eq!(a.len(), n * n, "sym_eigenvalues shape mismatch");
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![a[0]];
    }
    let scale: f64 = a.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off2: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum();
        if off2 <= scale * 1e-30 {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                if apq.abs() <= (app.abs() + aqq.abs() + f64::MIN_POSITIVE) * 1e-18 {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A <- GᵀAG with G the rotation in the (p, q) plane.
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// Closed-form eigenvalues (min, max) of the symmetric 2x2 [[a, b], [b, c]].
pub fn sym_eig_2x2(a: f64, b: f64, c: f64) -> (f64, f64) {
    let mean = 0.5 * (a + c);
    let r = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    (mean - r, mean + r)
}

/// Largest singular value of a row-major p x q block, via the eigenvalues of
/// the smaller of B Bᵀ and BᵀB.
pub fn max_singular_value(p: usize, q: usize, b: &[f64]) -> f64 {
    assert_eq!(b.len(), p * q, "max_singular_value shape mismatch");
    if p == 0 || q == 0 {
        return 0.0;
    }
    let (n, w) = if p <= q {
        // B Bᵀ, p x p
        let mut w = vec![0.0; p * p];
        for i in 0..p {
            for j in i..p {
                let v = dot(&b[i * q..(i + 1) * q], &b[j * q..(j + 1) * q]);
                w[i * p + j] = v;
                w[j * p + i] = v;
            }
        }
        (p, w)
    } else {
        // BᵀB, q x q
        let mut w = vec![0.0; q * q];
        for i in 0..q {
            for j in i..q {
                let mut v = 0.0;
                for k in 0..p {
                    v += b[k * q + i] * b[k * q + j];
                }
                w[i * q + j] = v;
                w[j * q + i] = v;
            }
        }
        (q, w)
    };
    let top = sym_eigenvalues(n, w)
        .into_iter()
        .fold(0.0_f64, f64::max)
        .max(0.0);
    top.sqrt()
}
