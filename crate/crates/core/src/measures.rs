//! Scalar entanglement measures: Tsallis-q entropy, the binary entropy and
//! entanglement of formation, Wootters concurrence, the function `f_q`, and
//! Tsallis-q entropy entanglement (TEE) wherever a closed form exists.
//!
//! All logarithms are natural, so the entanglement of formation of a Bell
//! state is `ln 2`. At `q = 1` exactly every Tsallis quantity is routed to
//! its von Neumann limit instead of evaluating `0/0`.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{singular_values, CMatrix, Spectrum, Split, C64};
use crate::qstate::{proper_party, DensityMatrix, PureState};

/// Lower edge of the analytic window, `(5 - sqrt 13) / 2`.
pub const Q_C1: f64 = 0.6972243622680054;
/// Upper edge of the analytic window, `(5 + sqrt 13) / 2`.
pub const Q_C2: f64 = 4.302775637731995;

const EDGE_TOL: f64 = 1e-12;
const CLAMP_TOL: f64 = 1e-12;

/// Eigenvalues of a density matrix below this are treated as exact zeros
/// when forming the Wootters ensemble; Jacobi round-off sits near 1e-17.
const RANK_FLOOR: f64 = 1e-14;

/// The Tsallis parameter `q > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct QParam(f64);

impl QParam {
    pub fn new(q: f64) -> Result<Self> {
        if !(q > 0.0) || !q.is_finite() {
            return Err(Error::QOutOfRange { q, range: "(0, inf)" });
        }
        Ok(Self(q))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_von_neumann(self) -> bool {
        self.0 == 1.0
    }

    /// `q ∈ [Q_C1, Q_C2]`: `f_q(C²)` is the two-qubit TEE and `f_q²` is
    /// monotone and convex.
    pub fn in_analytic_window(self) -> bool {
        self.0 >= Q_C1 - EDGE_TOL && self.0 <= Q_C2 + EDGE_TOL
    }

    /// `q ∈ [Q_C1, 2] ∪ [3, Q_C2]`: `f_q` is concave in `C²`, so the
    /// closed form extends to mixed `2 ⊗ d` states.
    pub fn in_concave_regime(self) -> bool {
        let q = self.0;
        (Q_C1 - EDGE_TOL..=2.0 + EDGE_TOL).contains(&q) || (3.0 - EDGE_TOL..=Q_C2 + EDGE_TOL).contains(&q)
    }

    pub(crate) fn require_analytic(self) -> Result<Self> {
        if self.in_analytic_window() {
            Ok(self)
        } else {
            Err(Error::QOutOfRange {
                q: self.0,
                range: "[(5-√13)/2, (5+√13)/2]",
            })
        }
    }

    pub(crate) fn require_concave(self) -> Result<Self> {
        if self.in_concave_regime() {
            Ok(self)
        } else {
            Err(Error::QOutOfRange {
                q: self.0,
                range: "[(5-√13)/2, 2] ∪ [3, (5+√13)/2]",
            })
        }
    }
}

impl fmt::Display for QParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Whether a TEE value is the exact measure or only a lower bound on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Exact,
    /// `f_q(C²)` outside the range where it equals the TEE; it still bounds
    /// the TEE from below for any `q > 0`.
    LowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TeeEstimate {
    pub value: f64,
    pub bound: Bound,
}

/// A concurrence with, for two-qubit mixed states, the Wootters `λ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcurrenceValue {
    pub c: f64,
    pub lambdas: Option<Spectrum>,
}

fn clamp_unit(x: f64, what: &str) -> Result<f64> {
    if !(-CLAMP_TOL..=1.0 + CLAMP_TOL).contains(&x) {
        return Err(Error::Domain(format!("{what} = {x} is outside [0, 1]")));
    }
    Ok(x.clamp(0.0, 1.0))
}

/// Tsallis-q entropy of a probability vector (eigenvalues). Round-off
/// negatives are clamped; `0 ln 0 = 0`.
pub fn tsallis_from_spectrum(values: &[f64], q: QParam) -> f64 {
    let probs = values.iter().map(|&v| v.max(0.0)).filter(|&v| v > 0.0);
    if q.is_von_neumann() {
        -probs.map(|p| p * p.ln()).sum::<f64>()
    } else {
        let q = q.value();
        (1.0 - probs.map(|p| p.powf(q)).sum::<f64>()) / (q - 1.0)
    }
}

/// `T_q(ρ) = (1 - Tr ρ^q) / (q - 1)`, von Neumann entropy at `q = 1`.
pub fn tsallis_entropy(rho: &DensityMatrix, q: QParam) -> f64 {
    tsallis_from_spectrum(rho.spectrum().values(), q)
}

/// `H(x) = -x ln x - (1 - x) ln(1 - x)`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    let x = clamp_unit(x, "probability")?;
    let h = |p: f64| if p > 0.0 { -p * p.ln() } else { 0.0 };
    Ok(h(x) + h(1.0 - x))
}

/// `f_q(x) = [1 - ((1 + sqrt(1-x))/2)^q - ((1 - sqrt(1-x))/2)^q] / (q - 1)`.
///
/// At `q = 1` this is `H((1 + sqrt(1-x))/2)`. Inputs within 1e-12 outside
/// `[0, 1]` are clamped.
pub fn f_q(x: f64, q: QParam) -> Result<f64> {
    let x = clamp_unit(x, "x")?;
    let s = (1.0 - x).sqrt();
    let a = (1.0 + s) / 2.0;
    // (1 - s)/2 cancels for small x
    let b = x / (4.0 * a);
    if q.is_von_neumann() {
        return binary_entropy(a);
    }
    let q = q.value();
    Ok((1.0 - a.powf(q) - b.powf(q)) / (q - 1.0))
}

/// Entanglement of formation of a two-qubit state,
/// `H((1 + sqrt(1 - C²)) / 2)` in nats.
pub fn ef_two_qubit(rho: &DensityMatrix) -> Result<f64> {
    let c = concurrence_two_qubit(rho)?.c;
    binary_entropy((1.0 + (1.0 - c * c).max(0.0).sqrt()) / 2.0)
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dims() != [2, 2] {
        return Err(Error::DimensionMismatch(format!(
            "two-qubit state required, got dims {:?}",
            rho.dims()
        )));
    }
    Ok(())
}

/// `σ_y ⊗ σ_y` applied to a two-qubit vector.
#[inline]
fn spin_flip(v: &[C64]) -> [C64; 4] {
    [-v[3], v[2], v[1], -v[0]]
}

/// Wootters `λ_i` from any factorization `ρ = Σ_k v_k v_k†` (the `v_k`
/// unnormalized). The `λ_i` are the singular values of the complex
/// symmetric matrix `τ_jk = v_jᵀ (σ_y ⊗ σ_y) v_k`, which are the square
/// roots of the eigenvalues of `√ρ ρ̃ √ρ`.
pub fn wootters_lambdas_from_factor(vectors: &[Vec<C64>]) -> Vec<f64> {
    let r = vectors.len();
    let flipped: Vec<[C64; 4]> = vectors.iter().map(|v| spin_flip(v)).collect();
    let tau = CMatrix::from_fn(r, r, |j, k| {
        vectors[j].iter().zip(&flipped[k]).map(|(a, b)| a * b).sum()
    });
    match r {
        0 => vec![],
        1 => vec![tau[(0, 0)].norm()],
        2 => {
            // σ1 σ2 = |det τ|, σ1² + σ2² = ‖τ‖_F²
            let fro2 = tau.data().iter().map(|z| z.norm_sqr()).sum::<f64>();
            let det = (tau[(0, 0)] * tau[(1, 1)] - tau[(0, 1)] * tau[(1, 0)]).norm();
            let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
            let s1 = ((fro2 + disc) / 2.0).sqrt();
            let s2 = if s1 > 0.0 { det / s1 } else { 0.0 };
            vec![s1, s2]
        }
        _ => singular_values(&tau),
    }
}

/// Wootters concurrence of a two-qubit density matrix,
/// `max(0, λ1 - λ2 - λ3 - λ4)`.
///
/// The `λ_i` are obtained from the eigen-ensemble of `ρ` via
/// [`wootters_lambdas_from_factor`]; [`wootters_matrix`] builds the
/// Hermitian matrix `√ρ ρ̃ √ρ` directly for cross-checking.
pub fn concurrence_two_qubit(rho: &DensityMatrix) -> Result<ConcurrenceValue> {
    require_two_qubits(rho)?;
    let eig = rho.eigen();
    let vectors: Vec<Vec<C64>> = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &mu)| mu > RANK_FLOOR)
        .map(|(k, &mu)| eig.vector(k).iter().map(|z| z * mu.sqrt()).collect())
        .collect();
    let mut lambdas = wootters_lambdas_from_factor(&vectors);
    lambdas.resize(4, 0.0);
    let lambdas = Spectrum::new(lambdas);
    let l = lambdas.values();
    let c = (l[0] - l[1] - l[2] - l[3]).clamp(0.0, 1.0);
    Ok(ConcurrenceValue {
        c,
        lambdas: Some(lambdas),
    })
}

/// `√ρ (σ_y⊗σ_y) ρ* (σ_y⊗σ_y) √ρ`, whose eigenvalues are the squared
/// Wootters `λ_i`.
pub fn wootters_matrix(rho: &DensityMatrix) -> Result<CMatrix> {
    require_two_qubits(rho)?;
    let m = rho.matrix();
    let yy = CMatrix::from_fn(4, 4, |i, j| {
        let sign = [-1.0, 1.0, 1.0, -1.0];
        if i + j == 3 {
            C64::new(sign[i], 0.0)
        } else {
            C64::default()
        }
    });
    let tilde = &(&yy * &m.conj()) * &yy;
    let s = crate::linalg::psd_sqrt(m)?;
    Ok((&(&s * &tilde) * &s).hermitian_part())
}

/// Pure-state concurrence across `party | complement`,
/// `C = sqrt(2 (1 - Tr ρ_A²))`.
///
/// `1 - Tr ρ_A² = 2 Σ_{i<j} μ_i μ_j` over the Schmidt weights, which keeps
/// accuracy for nearly product states.
pub fn concurrence_pure(psi: &PureState, party: &[usize]) -> Result<ConcurrenceValue> {
    let keep = proper_party(psi.dims(), party)?;
    let mu = psi.schmidt_spectrum(&keep)?;
    let mu = mu.values();
    let mut linear = 0.0;
    for i in 0..mu.len() {
        for j in i + 1..mu.len() {
            linear += mu[i] * mu[j];
        }
    }
    let d = mu.len() as f64;
    let cap = (2.0 * (d - 1.0) / d).sqrt();
    let c = (2.0 * 2.0 * linear).max(0.0).sqrt().min(cap);
    Ok(ConcurrenceValue { c, lambdas: None })
}

/// TEE of a pure state: the Tsallis-q entropy of the reduced state on
/// `party`.
pub fn tee_pure(psi: &PureState, party: &[usize], q: QParam) -> Result<f64> {
    let mu = psi.schmidt_spectrum(party)?;
    Ok(tsallis_from_spectrum(mu.values(), q))
}

/// TEE of a two-qubit state, `f_q(C²)`.
///
/// Outside the analytic window this is an error unless `force` is set, in
/// which case the value is returned tagged as a lower bound.
pub fn tee_two_qubit(rho: &DensityMatrix, q: QParam, force: bool) -> Result<TeeEstimate> {
    require_two_qubits(rho)?;
    let bound = match q.require_analytic() {
        Ok(_) => Bound::Exact,
        Err(_) if force => Bound::LowerBound,
        Err(e) => return Err(e),
    };
    let c = concurrence_two_qubit(rho)?.c;
    Ok(TeeEstimate {
        value: f_q(c * c, q)?,
        bound,
    })
}

/// TEE of a `2 ⊗ d` state from its concurrence, `f_q(C²)`.
///
/// The first subsystem must be a qubit; everything else is the `d` side.
/// The concurrence is supplied by the caller because for mixed states it is
/// itself a convex-roof quantity. Exact on the concave regime, a lower bound
/// for every other `q > 0`.
pub fn tee_2xd(rho: &DensityMatrix, q: QParam, c: &ConcurrenceValue) -> Result<TeeEstimate> {
    let dims = rho.dims();
    if dims.len() < 2 || dims[0] != 2 {
        return Err(Error::DimensionMismatch(format!(
            "2 ⊗ d state required, got dims {dims:?}"
        )));
    }
    if c.c < 0.0 {
        return Err(Error::Domain(format!("concurrence {} is negative", c.c)));
    }
    let bound = if q.in_concave_regime() {
        Bound::Exact
    } else {
        Bound::LowerBound
    };
    Ok(TeeEstimate {
        value: f_q(c.c * c.c, q)?,
        bound,
    })
}

/// Nonzero part of the reduced spectrum of a normalized vector across a
/// cut, taken from whichever side is smaller. A qubit side uses the
/// closed form `λ_min = 2 det / (1 + sqrt(1 - 4 det))`.
pub fn cut_spectrum(cut: &Split, psi: &[C64]) -> Vec<f64> {
    let (rows, cols) = (cut.kept_dim, cut.traced_dim);
    let small = rows.min(cols);
    if small == 1 {
        return vec![1.0];
    }
    let entry = |i: usize, t: usize| {
        if rows <= cols {
            cut.coeff(psi, i, t)
        } else {
            cut.coeff(psi, t, i)
        }
    };
    let large = rows.max(cols);
    if small == 2 {
        let mut det = 0.0;
        for j in 0..large {
            for k in j + 1..large {
                det += (entry(0, j) * entry(1, k) - entry(0, k) * entry(1, j)).norm_sqr();
            }
        }
        let det = det.clamp(0.0, 0.25);
        let lo = 2.0 * det / (1.0 + (1.0 - 4.0 * det).sqrt());
        return vec![1.0 - lo, lo];
    }
    let gram = CMatrix::from_fn(small, small, |i, j| {
        (0..large).map(|t| entry(i, t) * entry(j, t).conj()).sum()
    });
    crate::linalg::hermitian_eigenvalues(&gram)
        .map(Spectrum::into_values)
        .unwrap_or_default()
}

/// `C² = 2 (1 - Tr ρ_A²) = 4 Σ_{i<j} μ_i μ_j` over a cut spectrum.
pub fn concurrence_sq_from_spectrum(mu: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..mu.len() {
        for j in i + 1..mu.len() {
            acc += mu[i].max(0.0) * mu[j].max(0.0);
        }
    }
    4.0 * acc
}

/// Wootters concurrence of the two-qubit reduction of a pure qubit state
/// onto `pair`, from the columns of its coefficient matrix.
pub fn pair_concurrence(cut: &Split, psi: &[C64]) -> f64 {
    debug_assert_eq!(cut.kept_dim, 4);
    let vectors: Vec<Vec<C64>> = (0..cut.traced_dim)
        .map(|t| (0..4).map(|k| cut.coeff(psi, k, t)).collect())
        .collect();
    let mut l = wootters_lambdas_from_factor(&vectors);
    l.resize(4, 0.0);
    let l = Spectrum::new(l).into_values();
    (l[0] - l[1] - l[2] - l[3]).clamp(0.0, 1.0)
}
