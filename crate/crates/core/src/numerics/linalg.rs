//! Small dense symmetric linear algebra.

use crate::error::{Error, Result};

/// Relative pivot floor for [`cholesky`], as a fraction of the largest diagonal entry.
pub const PIVOT_FLOOR: f64 = 1e-12;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        Ok(m)
    }

    /// Builds a matrix from `f(i, j)`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// `self · selfᵀ`
    pub fn gram(&self) -> Self {
        self.matmul(&self.transpose())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// `L · z` for a lower-triangular `self`.
    pub fn lower_mul_vec(&self, z: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| (0..=i).map(|k| self.data[i * n + k] * z[k]).sum())
            .collect()
    }

    fn max_diag(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

fn is_symmetric(a: &DenseMatrix) -> bool {
    let scale = a.max_diag().abs().max(f64::MIN_POSITIVE);
    for i in 0..a.n {
        for j in 0..i {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * scale {
                return false;
            }
        }
    }
    true
}

fn factor(a: &DenseMatrix, floor: f64) -> Result<DenseMatrix> {
    let n = a.n;
    let mut l = DenseMatrix::zeros(n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > floor) {
            return Err(Error::NotPositiveDefinite { column: j, pivot: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Lower-triangular `L` with `L·Lᵀ = A`.
///
/// Fails when a pivot drops to `PIVOT_FLOOR × max diag(A)` or below.
pub fn cholesky(a: &DenseMatrix) -> Result<DenseMatrix> {
    if !is_symmetric(a) {
        return Err(Error::InvalidParameter("cholesky input is not symmetric".into()));
    }
    let floor = PIVOT_FLOOR * a.max_diag();
    factor(a, floor)
}

/// Cholesky of `A + jitter·max diag(A)·I`, for covariance matrices that are
/// positive semi-definite up to rounding.
pub fn cholesky_jittered(a: &DenseMatrix, jitter: f64) -> Result<DenseMatrix> {
    if !is_symmetric(a) {
        return Err(Error::InvalidParameter("cholesky input is not symmetric".into()));
    }
    let shift = jitter * a.max_diag();
    let mut shifted = a.clone();
    for i in 0..a.n {
        shifted[(i, i)] += shift;
    }
    factor(&shifted, 0.0)
}

/// Symmetric 3×3 matrix stored as its upper triangle.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Sym3 {
    pub a: [[f64; 3]; 3],
}

impl Sym3 {
    pub fn add(&self, other: &Sym3) -> Sym3 {
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                out.a[i][j] += other.a[i][j];
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.a[i][0] * v[0] + self.a[i][1] * v[1] + self.a[i][2] * v[2];
        }
        out
    }

    /// Eigen-decomposition by cyclic Jacobi rotations. Returns eigenvalues and
    /// eigenvectors stored as columns.
    pub fn eigen(&self) -> ([f64; 3], [[f64; 3]; 3]) {
        let mut a = self.a;
        let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        for _sweep in 0..50 {
            let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
            let diag = a[0][0].abs() + a[1][1].abs() + a[2][2].abs();
            if off <= f64::EPSILON * 1e-3 * diag || off == 0.0 {
                break;
            }
            for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..3 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..3 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
        ([a[0][0], a[1][1], a[2][2]], v)
    }

    /// Moore-Penrose pseudo-inverse applied to `b`, discarding eigenvalues at
    /// or below `rel_cutoff × λ_max`.
    pub fn pinv_mul(&self, b: &[f64; 3], rel_cutoff: f64) -> [f64; 3] {
        let (lam, v) = self.eigen();
        let lmax = lam.iter().cloned().fold(0.0, f64::max);
        let mut out = [0.0; 3];
        for k in 0..3 {
            if lam[k] <= rel_cutoff * lmax || lam[k] <= 0.0 {
                continue;
            }
            let proj = (v[0][k] * b[0] + v[1][k] * b[1] + v[2][k] * b[2]) / lam[k];
            for i in 0..3 {
                out[i] += v[i][k] * proj;
            }
        }
        out
    }

    /// Draws `M^{1/2} z` for a positive semi-definite `M`; negative rounding
    /// eigenvalues are clamped to zero.
    pub fn sqrt_mul(&self, z: &[f64; 3]) -> [f64; 3] {
        let (lam, v) = self.eigen();
        let mut out = [0.0; 3];
        for k in 0..3 {
            let s = lam[k].max(0.0).sqrt() * z[k];
            for i in 0..3 {
                out[i] += v[i][k] * s;
            }
        }
        out
    }

    /// Lower factor `L` with `L·Lᵀ ≈ M` for a positive semi-definite `M`.
    /// Pivots at or below `rel_floor × max diag` are treated as zero.
    pub fn semidefinite_factor(&self, rel_floor: f64) -> [[f64; 3]; 3] {
        let m = &self.a;
        let floor = rel_floor * m[0][0].max(m[1][1]).max(m[2][2]).max(0.0);
        let mut l = [[0.0; 3]; 3];
        for j in 0..3 {
            let mut d = m[j][j];
            for k in 0..j {
                d -= l[j][k] * l[j][k];
            }
            if d <= floor {
                continue;
            }
            let djj = d.sqrt();
            l[j][j] = djj;
            for i in j + 1..3 {
                let mut s = m[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                l[i][j] = s / djj;
            }
        }
        l
    }
}
