//! Dense complex linear algebra for the small matrices this crate works with.
//!
//! Everything here targets dimensions up to 64: a Hermitian eigensolver
//! (cyclic Jacobi), a one-sided Jacobi SVD, Kronecker products, partial
//! traces and the PSD square root. Subsystems are ordered with the first
//! subsystem most significant in the composite index, matching `kron`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest number of entries a matrix produced by [`kron`] may have.
pub const MAX_ENTRIES: usize = 4096;

/// Hermiticity violations above this are rejected.
pub const HERMITIAN_TOL: f64 = 1e-8;

/// Eigenvalues in `[-NEG_CLAMP, 0)` are round-off and clamp to zero.
pub const NEG_CLAMP: f64 = 1e-10;

/// Eigenvalues below `-PSD_TOL` mean the matrix is not PSD.
pub const PSD_TOL: f64 = 1e-8;

// Relative to the Frobenius norm (floored at 1); tighter than the 1e-12
// absolute target for the O(1) matrices used here.
const JACOBI_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::default(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { re(1.0) } else { C64::default() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { re(diag[i]) } else { C64::default() })
    }

    /// Builds a matrix from nested rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(n, m, rows.iter().flatten().copied().collect())
    }

    /// `|v><v|`
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |i, j| v[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max-entry norm of `self - other`. Shapes must agree.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |M[i][j] - conj(M[j][i])|`, or infinity for non-square input.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(M + M^dagger) / 2`
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::default() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Real eigenvalues sorted in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    /// Sorts the values descending.
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &Spectrum) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Clamps round-off negatives in `[-NEG_CLAMP, 0)` to zero.
    pub fn clamped(&self) -> Self {
        Self(
            self.0
                .iter()
                .map(|&v| if (-NEG_CLAMP..0.0).contains(&v) { 0.0 } else { v })
                .collect(),
        )
    }
}

/// Eigenvalues (descending) with the matching eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `V diag(values) V^dagger`
    pub fn reconstruct(&self) -> CMatrix {
        self.reconstruct_with(|v| v)
    }

    /// `V diag(f(values)) V^dagger`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.vectors.rows();
        let mapped: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        CMatrix::from_fn(n, n, |i, j| {
            mapped
                .iter()
                .enumerate()
                .map(|(k, &w)| self.vectors[(i, k)] * self.vectors[(j, k)].conj() * w)
                .sum()
        })
    }
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotSquare(m.rows(), m.cols()));
    }
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// Full eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
pub fn hermitian_eigen(m: &CMatrix) -> Result<HermitianEigen> {
    check_hermitian(m)?;
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm().max(1.0);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        if off.sqrt() <= JACOBI_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g <= f64::MIN_POSITIVE {
                    continue;
                }
                let phase = apq / g;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let zeta = (aqq - app) / (2.0 * g);
                let t = if zeta.is_infinite() {
                    0.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                // U restricted to (p, q): columns
                //   u_p = c e_p - s conj(phase) e_q,  u_q = s e_p + c conj(phase) e_q
                let ph = phase.conj();
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * cs - akq * ph * sn;
                    a[(k, q)] = akp * sn + akq * ph * cs;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * cs - aqk * ph.conj() * sn;
                    a[(q, k)] = apk * sn + aqk * ph.conj() * cs;
                }
                a[(p, q)] = C64::default();
                a[(q, p)] = C64::default();
                a[(p, p)] = re(a[(p, p)].re);
                a[(q, q)] = re(a[(q, q)].re);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * cs - vkq * ph * sn;
                    v[(k, q)] = vkp * sn + vkq * ph * cs;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues of a Hermitian matrix, descending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Spectrum> {
    Ok(Spectrum::new(hermitian_eigen(m)?.values))
}

/// Principal square root of a PSD Hermitian matrix.
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eigen(m)?;
    let min = eig.values.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOL {
        return Err(Error::NotPsd(min));
    }
    Ok(eig.reconstruct_with(|v| v.max(0.0).sqrt()))
}

/// Singular values (descending) by one-sided Jacobi on the columns.
///
/// Small singular values come out with good relative accuracy, which the
/// `sqrt(eig(M^dagger M))` route loses.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    // work on the orientation with fewer columns
    let mut a = if m.cols() > m.rows() { m.adjoint() } else { m.clone() };
    let (rows, cols) = (a.rows(), a.cols());
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = C64::default();
                for k in 0..rows {
                    alpha += a[(k, p)].norm_sqr();
                    beta += a[(k, q)].norm_sqr();
                    gamma += a[(k, p)].conj() * a[(k, q)];
                }
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g <= f64::MIN_POSITIVE {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                let ph = phase.conj();
                for k in 0..rows {
                    let x = a[(k, p)];
                    let y = a[(k, q)];
                    a[(k, p)] = x * cs - y * ph * sn;
                    a[(k, q)] = x * sn + y * ph * cs;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..cols)
        .map(|j| (0..rows).map(|k| a[(k, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Kronecker product, first factor most significant.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let rows = a.rows() * b.rows();
    let cols = a.cols() * b.cols();
    if rows * cols > MAX_ENTRIES {
        return Err(Error::TooLarge {
            entries: rows * cols,
            limit: MAX_ENTRIES,
        });
    }
    Ok(CMatrix::from_fn(rows, cols, |r, s| {
        a[(r / b.rows(), s / b.cols())] * b[(r % b.rows(), s % b.cols())]
    }))
}

/// Kronecker product of two vectors.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Index bookkeeping for splitting a composite system into kept and traced
/// subsystems.
#[derive(Debug, Clone)]
pub struct Split {
    pub kept_dim: usize,
    pub traced_dim: usize,
    /// `full[k * traced_dim + t]` is the composite index for kept index `k`
    /// and traced index `t`.
    full: Vec<usize>,
}

pub(crate) fn validate_keep(dims: &[usize], keep: &[usize]) -> Result<Vec<usize>> {
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() {
        return Err(Error::InvalidPartition("kept subsystem set is empty".into()));
    }
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::InvalidPartition(format!(
            "subsystem {bad} out of range for {} subsystems",
            dims.len()
        )));
    }
    Ok(keep)
}

impl Split {
    /// Validates `keep` and builds the index map for `keep | complement`.
    pub fn new(dims: &[usize], keep: &[usize]) -> Result<Self> {
        let keep = validate_keep(dims, keep)?;
        Ok(split(dims, &keep))
    }

    /// Amplitude of `psi` at kept index `k`, traced index `t`.
    #[inline]
    pub fn coeff(&self, psi: &[C64], k: usize, t: usize) -> C64 {
        psi[self.full[k * self.traced_dim + t]]
    }
}

fn split(dims: &[usize], keep: &[usize]) -> Split {
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let kept_dim: usize = keep.iter().map(|&i| dims[i]).product();
    let traced_dim: usize = traced.iter().map(|&i| dims[i]).product();
    let total: usize = dims.iter().product();
    let mut full = vec![0; total];
    let mut digits = vec![0usize; dims.len()];
    for idx in 0..total {
        let mut rem = idx;
        for s in (0..dims.len()).rev() {
            digits[s] = rem % dims[s];
            rem /= dims[s];
        }
        let k = keep.iter().fold(0, |acc, &s| acc * dims[s] + digits[s]);
        let t = traced.iter().fold(0, |acc, &s| acc * dims[s] + digits[s]);
        full[k * traced_dim + t] = idx;
    }
    Split {
        kept_dim,
        traced_dim,
        full,
    }
}

/// Partial trace of a square matrix over the complement of `keep`.
///
/// `keep` may be any nonempty subset, including all subsystems (identity
/// map); kept subsystems stay in their original order.
pub fn partial_trace_matrix(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let keep = validate_keep(dims, keep)?;
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows() != total {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{} but dims {dims:?} need {total}x{total}",
            m.rows(),
            m.cols()
        )));
    }
    let s = split(dims, &keep);
    Ok(CMatrix::from_fn(s.kept_dim, s.kept_dim, |i, j| {
        (0..s.traced_dim)
            .map(|t| m[(s.full[i * s.traced_dim + t], s.full[j * s.traced_dim + t])])
            .sum()
    }))
}

/// Reduced density matrix of the pure state `psi` on the `keep` subsystems.
pub fn reduce_vector(psi: &[C64], dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let coeffs = bipartite_coefficients(psi, dims, keep)?;
    let (rows, cols) = (coeffs.rows(), coeffs.cols());
    Ok(CMatrix::from_fn(rows, rows, |i, j| {
        (0..cols).map(|t| coeffs[(i, t)] * coeffs[(j, t)].conj()).sum()
    }))
}

/// Reshapes `psi` into the `kept x traced` coefficient matrix of the cut
/// `keep | complement`.
pub fn bipartite_coefficients(psi: &[C64], dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let keep = validate_keep(dims, keep)?;
    let total: usize = dims.iter().product();
    if psi.len() != total {
        return Err(Error::DimensionMismatch(format!(
            "vector has {} amplitudes but dims {dims:?} need {total}",
            psi.len()
        )));
    }
    let s = split(dims, &keep);
    Ok(CMatrix::from_fn(s.kept_dim, s.traced_dim, |k, t| {
        psi[s.full[k * s.traced_dim + t]]
    }))
}

/// Permutation of composite indices induced by reordering subsystems:
/// new subsystem `i` is old subsystem `perm[i]`. Returns, for each new
/// index, the old index it reads from.
pub fn subsystem_permutation(dims: &[usize], perm: &[usize]) -> Result<Vec<usize>> {
    let mut sorted = perm.to_vec();
    sorted.sort_unstable();
    if sorted != (0..dims.len()).collect::<Vec<_>>() {
        return Err(Error::InvalidPartition(format!(
            "{perm:?} is not a permutation of 0..{}",
            dims.len()
        )));
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let total: usize = dims.iter().product();
    let mut old_digits = vec![0usize; dims.len()];
    let mut map = Vec::with_capacity(total);
    for new_idx in 0..total {
        let mut rem = new_idx;
        for s in (0..new_dims.len()).rev() {
            old_digits[perm[s]] = rem % new_dims[s];
            rem /= new_dims[s];
        }
        map.push(old_digits.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d));
    }
    Ok(map)
}
