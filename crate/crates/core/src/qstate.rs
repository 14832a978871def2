//! State containers and the catalog of named states.
//!
//! Basis labels follow the usual ket notation with the first subsystem as
//! the most significant digit, so for dims `[3, 2, 2]` the ket `|a b c>`
//! lives at index `4a + 2b + c`. Kets written with labels starting at 1
//! (the qutrit examples) are shifted to start at 0.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, bipartite_coefficients, hermitian_eigen, re, singular_values, CMatrix, HermitianEigen,
    Spectrum, C64,
};

/// Norm tolerance for states built in memory.
pub const NORM_TOL: f64 = 1e-10;
/// Trace and positivity tolerance for density matrices built in memory.
pub const TRACE_TOL: f64 = 1e-9;
/// Hermiticity tolerance for density matrices built in memory.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Norm / trace tolerance when reading a state file.
pub const FILE_TOL: f64 = 1e-6;

fn validate_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::DimensionMismatch("dims must be nonempty".into()));
    }
    if let Some(&d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::DimensionMismatch(format!(
            "every subsystem dimension must be at least 2, got {d}"
        )));
    }
    Ok(dims.iter().product())
}

/// A normalized pure state on a tensor product of finite-dimensional
/// subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amps: Vec<C64>,
}

impl PureState {
    /// Accepts amplitudes whose norm is within [`NORM_TOL`] of one.
    pub fn new(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self> {
        Self::with_tolerance(dims, amps, NORM_TOL)
    }

    fn with_tolerance(dims: Vec<usize>, amps: Vec<C64>, tol: f64) -> Result<Self> {
        let total = validate_dims(&dims)?;
        if amps.len() != total {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} need {total} amplitudes, got {}",
                amps.len()
            )));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > tol {
            return Err(Error::NotNormalized(norm));
        }
        // leave vectors that are unit to rounding untouched so files round-trip
        let amps = if (norm - 1.0).abs() > 4.0 * f64::EPSILON {
            amps.into_iter().map(|a| a / norm).collect()
        } else {
            amps
        };
        Ok(Self { dims, amps })
    }

    /// Rescales any nonzero amplitude vector to unit norm.
    pub fn normalized(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 || !norm.is_finite() {
            return Err(Error::Degenerate("amplitude vector has zero norm".into()));
        }
        Self::with_tolerance(dims, amps.into_iter().map(|a| a / norm).collect(), NORM_TOL)
    }

    /// Computational basis state `|index>`.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let total = validate_dims(&dims)?;
        if index >= total {
            return Err(Error::DimensionMismatch(format!(
                "basis index {index} out of range for dimension {total}"
            )));
        }
        let mut amps = vec![C64::default(); total];
        amps[index] = re(1.0);
        Ok(Self { dims, amps })
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        PureState {
            dims,
            amps: linalg::kron_vec(&self.amps, &other.amps),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn total_dim(&self) -> usize {
        self.amps.len()
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn is_qubits(&self) -> bool {
        self.dims.iter().all(|&d| d == 2)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            dims: self.dims.clone(),
            matrix: CMatrix::outer(&self.amps),
        }
    }

    /// Reduced state on `keep` (any nonempty subset; the full set returns
    /// the projector).
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let keep = linalg::validate_keep(&self.dims, keep)?;
        let matrix = linalg::reduce_vector(&self.amps, &self.dims, &keep)?;
        Ok(DensityMatrix {
            dims: keep.iter().map(|&k| self.dims[k]).collect(),
            matrix,
        })
    }

    /// Squared Schmidt coefficients across `party | complement`, descending,
    /// padded with zeros to the dimension of `party`.
    ///
    /// This is the spectrum of the reduced state on `party`, computed from
    /// the coefficient matrix so near-zero values keep relative accuracy.
    pub fn schmidt_spectrum(&self, party: &[usize]) -> Result<Spectrum> {
        let keep = proper_party(&self.dims, party)?;
        let coeffs = bipartite_coefficients(&self.amps, &self.dims, &keep)?;
        let mut vals: Vec<f64> = singular_values(&coeffs).iter().map(|s| s * s).collect();
        vals.resize(coeffs.rows(), 0.0);
        Ok(Spectrum::new(vals))
    }

    /// Reorders subsystems: new subsystem `i` is old subsystem `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<PureState> {
        let map = linalg::subsystem_permutation(&self.dims, perm)?;
        Ok(PureState {
            dims: perm.iter().map(|&p| self.dims[p]).collect(),
            amps: map.iter().map(|&old| self.amps[old]).collect(),
        })
    }

    /// `|<self|other>|^2`
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm_sqr()
    }
}

/// Validates a party as a nonempty proper subset and returns it sorted.
pub(crate) fn proper_party(dims: &[usize], party: &[usize]) -> Result<Vec<usize>> {
    let keep = linalg::validate_keep(dims, party)?;
    if keep.len() == dims.len() {
        return Err(Error::InvalidPartition(
            "party must be a proper subset of the subsystems".into(),
        ));
    }
    Ok(keep)
}

/// A Hermitian, positive semidefinite, unit-trace matrix with subsystem
/// dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(dims: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        Self::with_tolerance(dims, matrix, TRACE_TOL, HERMITIAN_TOL)
    }

    fn with_tolerance(dims: Vec<usize>, matrix: CMatrix, tol: f64, herm_tol: f64) -> Result<Self> {
        let total = validate_dims(&dims)?;
        if !matrix.is_square() {
            return Err(Error::NotSquare(matrix.rows(), matrix.cols()));
        }
        if matrix.rows() != total {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} need a {total}x{total} matrix, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let defect = matrix.hermiticity_defect();
        if defect > herm_tol {
            return Err(Error::NotHermitian(defect));
        }
        let tr = matrix.trace().re;
        if !tr.is_finite() || (tr - 1.0).abs() > tol {
            return Err(Error::BadTrace(tr));
        }
        let matrix = if (tr - 1.0).abs() > 4.0 * f64::EPSILON {
            matrix.hermitian_part().scale(re(1.0 / tr))
        } else {
            matrix.hermitian_part()
        };
        let min = *hermitian_eigen(&matrix)?.values.last().expect("nonempty");
        if min < -tol {
            return Err(Error::NotPsd(min));
        }
        Ok(Self { dims, matrix })
    }

    /// Convex combination `sum_i w_i rho_i`; weights must be positive and
    /// are renormalized.
    pub fn mixture(parts: &[(f64, DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Degenerate("empty mixture".into()))?;
        let total_w: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || total_w <= 0.0 {
            return Err(Error::Domain("mixture weights must be nonnegative".into()));
        }
        let n = first.1.matrix.rows();
        let mut acc = CMatrix::zeros(n, n);
        for (w, rho) in parts {
            if rho.dims != first.1.dims {
                return Err(Error::DimensionMismatch("mixture parts have different dims".into()));
            }
            acc = &acc + &rho.matrix.scale(re(w / total_w));
        }
        Self::new(first.1.dims.clone(), acc)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn total_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn eigen(&self) -> HermitianEigen {
        hermitian_eigen(&self.matrix).expect("density matrices are Hermitian")
    }

    /// Eigenvalues, descending, with round-off negatives clamped.
    pub fn spectrum(&self) -> Spectrum {
        Spectrum::new(self.eigen().values).clamped()
    }

    /// Number of eigenvalues above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.spectrum().values().iter().filter(|&&v| v > tol).count()
    }

    /// Partial trace keeping a nonempty proper subset of subsystems.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let keep = proper_party(&self.dims, keep)?;
        let matrix = linalg::partial_trace_matrix(&self.matrix, &self.dims, &keep)?;
        Ok(DensityMatrix {
            dims: keep.iter().map(|&k| self.dims[k]).collect(),
            matrix,
        })
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Ok(DensityMatrix {
            dims,
            matrix: linalg::kron(&self.matrix, &other.matrix)?,
        })
    }

    /// Conjugation by a unitary `U rho U^dagger`.
    pub fn conjugated(&self, u: &CMatrix) -> Result<DensityMatrix> {
        if u.rows() != self.total_dim() || !u.is_square() {
            return Err(Error::DimensionMismatch("unitary has the wrong size".into()));
        }
        let m = &(u * &self.matrix) * &u.adjoint();
        Ok(DensityMatrix {
            dims: self.dims.clone(),
            matrix: m.hermitian_part(),
        })
    }

    /// Reorders subsystems: new subsystem `i` is old subsystem `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<DensityMatrix> {
        let map = linalg::subsystem_permutation(&self.dims, perm)?;
        let n = map.len();
        Ok(DensityMatrix {
            dims: perm.iter().map(|&p| self.dims[p]).collect(),
            matrix: CMatrix::from_fn(n, n, |i, j| self.matrix[(map[i], map[j])]),
        })
    }

    /// If the state is pure (rank one within `tol`), the pure state itself.
    pub fn as_pure(&self, tol: f64) -> Option<PureState> {
        let eig = self.eigen();
        if eig.values.get(1).copied().unwrap_or(0.0) > tol {
            return None;
        }
        PureState::normalized(self.dims.clone(), eig.vector(0)).ok()
    }
}

impl From<&PureState> for DensityMatrix {
    fn from(psi: &PureState) -> Self {
        psi.density()
    }
}

/// Weighted ensemble of pure states.
#[derive(Debug, Clone)]
pub struct Decomposition {
    members: Vec<(f64, PureState)>,
}

impl Decomposition {
    pub fn new(members: Vec<(f64, PureState)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Degenerate("empty decomposition".into()));
        }
        if let Some((w, _)) = members.iter().find(|(w, _)| !(*w > 0.0)) {
            return Err(Error::Domain(format!("decomposition weight {w} is not positive")));
        }
        let total: f64 = members.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > TRACE_TOL {
            return Err(Error::Domain(format!("decomposition weights sum to {total}")));
        }
        let dims = members[0].1.dims();
        if members.iter().any(|(_, s)| s.dims() != dims) {
            return Err(Error::DimensionMismatch("decomposition members have different dims".into()));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[(f64, PureState)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `sum_i w_i |psi_i><psi_i|`
    pub fn density_matrix(&self) -> CMatrix {
        let n = self.members[0].1.total_dim();
        let mut acc = CMatrix::zeros(n, n);
        for (w, psi) in &self.members {
            for i in 0..n {
                let ai = psi.amps[i] * *w;
                for j in 0..n {
                    acc[(i, j)] += ai * psi.amps[j].conj();
                }
            }
        }
        acc
    }

    /// Max-entry distance between the rebuilt matrix and `rho`.
    pub fn reconstruction_error(&self, rho: &DensityMatrix) -> f64 {
        self.density_matrix().max_abs_diff(rho.matrix())
    }
}

/// Either kind of state, as read from a file or named on the command line.
#[derive(Debug, Clone)]
pub enum State {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl State {
    pub fn dims(&self) -> &[usize] {
        match self {
            State::Pure(p) => p.dims(),
            State::Mixed(m) => m.dims(),
        }
    }

    pub fn density(&self) -> DensityMatrix {
        match self {
            State::Pure(p) => p.density(),
            State::Mixed(m) => m.clone(),
        }
    }
}

// ---------------------------------------------------------------------------
// Catalog

fn qubit_count_check(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 qubits, got {n}")));
    }
    if n > 6 {
        return Err(Error::Domain(format!("at most 6 qubits are supported, got {n}")));
    }
    Ok(())
}

/// `(|0...0> + |1...1>) / sqrt(2)` on `n` qubits.
pub fn ghz(n: usize) -> Result<PureState> {
    qubit_count_check(n)?;
    let total = 1 << n;
    let mut amps = vec![C64::default(); total];
    amps[0] = re(FRAC_1_SQRT_2);
    amps[total - 1] = re(FRAC_1_SQRT_2);
    PureState::new(vec![2; n], amps)
}

/// Equal superposition of the `n` single-excitation basis states.
pub fn w_state(n: usize) -> Result<PureState> {
    qubit_count_check(n)?;
    let mut amps = vec![C64::default(); 1 << n];
    let a = 1.0 / (n as f64).sqrt();
    for k in 0..n {
        amps[1 << k] = re(a);
    }
    PureState::new(vec![2; n], amps)
}

/// Three-qubit state with amplitudes `sinθ cosφ |001>`, `sinθ sinφ |010>`
/// and `cosφ |100>`, renormalized.
///
/// The `|100>` amplitude is `cosφ` as printed in the source of this family;
/// see [`generalized_w_standard`] for the `cosθ` variant.
pub fn generalized_w(theta: f64, phi: f64) -> Result<PureState> {
    let mut amps = vec![C64::default(); 8];
    amps[0b001] = re(theta.sin() * phi.cos());
    amps[0b010] = re(theta.sin() * phi.sin());
    amps[0b100] = re(phi.cos());
    PureState::normalized(vec![2, 2, 2], amps)
}

/// `sinθ cosφ |001> + sinθ sinφ |010> + cosθ |100>` (already normalized).
pub fn generalized_w_standard(theta: f64, phi: f64) -> Result<PureState> {
    let mut amps = vec![C64::default(); 8];
    amps[0b001] = re(theta.sin() * phi.cos());
    amps[0b010] = re(theta.sin() * phi.sin());
    amps[0b100] = re(theta.cos());
    PureState::normalized(vec![2, 2, 2], amps)
}

/// `(α|000> + β|110> + α|201> + β|311>) / sqrt(2)` on `4 ⊗ 2 ⊗ 2`, with
/// `α = cosθ`, `β = sinθ`.
pub fn example3_state(theta: f64) -> PureState {
    let (a, b) = (theta.cos(), theta.sin());
    let mut amps = vec![C64::default(); 16];
    let idx = |x: usize, y: usize, z: usize| 4 * x + 2 * y + z;
    amps[idx(0, 0, 0)] = re(a * FRAC_1_SQRT_2);
    amps[idx(1, 1, 0)] = re(b * FRAC_1_SQRT_2);
    amps[idx(2, 0, 1)] = re(a * FRAC_1_SQRT_2);
    amps[idx(3, 1, 1)] = re(b * FRAC_1_SQRT_2);
    PureState::normalized(vec![4, 2, 2], amps).expect("norm is one for every θ")
}

/// Totally antisymmetric three-qutrit state.
pub fn example4_state() -> PureState {
    let mut amps = vec![C64::default(); 27];
    let s = 1.0 / 6f64.sqrt();
    // (a, b, c) with labels shifted to 0..2, and the permutation sign
    let terms = [
        ((0, 1, 2), 1.0),
        ((0, 2, 1), -1.0),
        ((1, 2, 0), 1.0),
        ((1, 0, 2), -1.0),
        ((2, 0, 1), 1.0),
        ((2, 1, 0), -1.0),
    ];
    for ((a, b, c), sign) in terms {
        amps[9 * a + 3 * b + c] = re(sign * s);
    }
    PureState::normalized(vec![3, 3, 3], amps).expect("norm is one")
}

/// `∝ sqrt2|121> + sqrt2|212> + |311> + |322>` on `3 ⊗ 2 ⊗ 2`, normalized.
pub fn example5_state() -> PureState {
    let mut amps = vec![C64::default(); 12];
    let idx = |x: usize, y: usize, z: usize| 4 * (x - 1) + 2 * (y - 1) + (z - 1);
    amps[idx(1, 2, 1)] = re(2f64.sqrt());
    amps[idx(2, 1, 2)] = re(2f64.sqrt());
    amps[idx(3, 1, 1)] = re(1.0);
    amps[idx(3, 2, 2)] = re(1.0);
    PureState::normalized(vec![3, 2, 2], amps).expect("nonzero amplitudes")
}

// ---------------------------------------------------------------------------
// Random states

/// Haar-random pure state: normalized complex Gaussian vector.
pub fn haar_random<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<PureState> {
    let total = validate_dims(dims)?;
    let amps = (0..total)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    PureState::normalized(dims.to_vec(), amps)
}

/// Random mixed state of the given rank: a mixture of `rank` Haar-random
/// pure states with uniformly drawn weights.
pub fn random_mixed<R: Rng + ?Sized>(dims: &[usize], rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    if rank == 0 {
        return Err(Error::Domain("rank must be at least 1".into()));
    }
    let parts = (0..rank)
        .map(|_| {
            let w: f64 = rng.random_range(0.05..1.0);
            Ok((w, haar_random(dims, rng)?.density()))
        })
        .collect::<Result<Vec<_>>>()?;
    DensityMatrix::mixture(&parts)
}

/// Haar-random `n x n` unitary (QR of a complex Gaussian matrix with the
/// phase fix on the diagonal of R).
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    orthonormalize_columns(&g)
}

/// Modified Gram-Schmidt on the columns. Columns must be linearly
/// independent. The diagonal of the implied R factor is real positive, so
/// for Gaussian input the result is Haar distributed.
pub fn orthonormalize_columns(m: &CMatrix) -> CMatrix {
    let (rows, cols) = (m.rows(), m.cols());
    let mut q = m.clone();
    for j in 0..cols {
        for k in 0..j {
            let proj: C64 = (0..rows).map(|i| q[(i, k)].conj() * q[(i, j)]).sum();
            for i in 0..rows {
                let v = q[(i, k)];
                q[(i, j)] -= proj * v;
            }
        }
        let norm = (0..rows).map(|i| q[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..rows {
            q[(i, j)] /= norm;
        }
    }
    q
}

// ---------------------------------------------------------------------------
// File format

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum StateFile {
    Pure {
        dims: Vec<usize>,
        amplitudes: Vec<[f64; 2]>,
    },
    Mixed {
        dims: Vec<usize>,
        matrix: Vec<Vec<[f64; 2]>>,
    },
}

/// Parses the JSON state format:
/// `{"dims": [...], "amplitudes": [[re, im], ...]}` for pure states or
/// `{"dims": [...], "matrix": [[[re, im], ...], ...]}` for mixed ones.
pub fn state_from_json(text: &str) -> Result<State> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let has = |k: &str| value.get(k).is_some();
    if !(has("amplitudes") ^ has("matrix")) {
        return Err(Error::Parse(
            "expected exactly one of \"amplitudes\" or \"matrix\"".into(),
        ));
    }
    let file: StateFile = serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    match file {
        StateFile::Pure { dims, amplitudes } => {
            let amps = amplitudes.iter().map(|&[a, b]| C64::new(a, b)).collect();
            PureState::with_tolerance(dims, amps, FILE_TOL).map(State::Pure)
        }
        StateFile::Mixed { dims, matrix } => {
            let rows: Vec<Vec<C64>> = matrix
                .iter()
                .map(|row| row.iter().map(|&[a, b]| C64::new(a, b)).collect())
                .collect();
            let m = CMatrix::from_rows(&rows)?;
            DensityMatrix::with_tolerance(dims, m, FILE_TOL, FILE_TOL).map(State::Mixed)
        }
    }
}

pub fn state_to_json(state: &State) -> String {
    let file = match state {
        State::Pure(p) => StateFile::Pure {
            dims: p.dims.clone(),
            amplitudes: p.amps.iter().map(|z| [z.re, z.im]).collect(),
        },
        State::Mixed(m) => StateFile::Mixed {
            dims: m.dims.clone(),
            matrix: (0..m.total_dim())
                .map(|i| {
                    (0..m.total_dim())
                        .map(|j| {
                            let z = m.matrix[(i, j)];
                            [z.re, z.im]
                        })
                        .collect()
                })
                .collect(),
        },
    };
    let mut s = serde_json::to_string_pretty(&file).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn load_state(path: impl AsRef<Path>) -> Result<State> {
    state_from_json(&std::fs::read_to_string(path)?)
}

pub fn save_state(path: impl AsRef<Path>, state: &State) -> Result<()> {
    std::fs::write(path, state_to_json(state))?;
    Ok(())
}
