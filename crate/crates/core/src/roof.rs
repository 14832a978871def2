//! Numerical convex roofs.
//!
//! Every ensemble of a rank-`r` density matrix `ρ = Σ_j λ_j |e_j><e_j|` with
//! `m` members arises from an `m x r` isometry `V` through
//! `|φ_i> = Σ_j V[i,j] sqrt(λ_j) |e_j>`. The average cost of the ensemble is
//! minimized over `V` by Riemannian gradient descent on the Stiefel
//! manifold with finite-difference gradients, Barzilai-Borwein steps and an
//! Armijo safeguard, from several Haar-random starts.
//!
//! The result is always the cost of an explicit decomposition, so it is an
//! upper bound on the roof. Nothing here certifies global optimality.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Split, C64};
use crate::measures::{
    concurrence_sq_from_spectrum, cut_spectrum, f_q, pair_concurrence, tsallis_from_spectrum, QParam,
};
use crate::qstate::{orthonormalize_columns, proper_party, Decomposition, DensityMatrix, PureState};

/// Largest total dimension accepted by [`minimize_roof`].
pub const MAX_DIM: usize = 64;
/// Largest rank accepted by [`minimize_roof`].
pub const MAX_RANK: usize = 8;
/// Eigenvalues at or below this are dropped from the ensemble basis.
pub const RANK_TOL: f64 = 1e-10;

const ISOMETRY_TOL: f64 = 1e-8;
const MIN_WEIGHT: f64 = 1e-12;
const FD_STEP: f64 = 1e-6;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACK: usize = 40;
const STALL_LIMIT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoofConfig {
    /// Ensemble size `m`; `None` means twice the rank.
    pub max_ensemble_size: Option<usize>,
    pub restarts: usize,
    pub max_iterations: usize,
    /// Riemannian gradient norm at which a run counts as converged.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for RoofConfig {
    fn default() -> Self {
        Self {
            max_ensemble_size: None,
            restarts: 32,
            max_iterations: 2000,
            tolerance: 1e-7,
            seed: 0,
        }
    }
}

impl RoofConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    fn validate(&self, rank: usize) -> Result<usize> {
        if self.restarts == 0 {
            return Err(Error::Domain("restarts must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Domain("max_iterations must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Domain(format!("tolerance {} must be positive", self.tolerance)));
        }
        let m = self.max_ensemble_size.unwrap_or(2 * rank);
        if m < rank {
            return Err(Error::Domain(format!(
                "ensemble size {m} is smaller than the rank {rank}"
            )));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone)]
pub struct RoofResult {
    pub value: f64,
    pub decomposition: Decomposition,
    pub converged: bool,
    /// Iterations used by the restart that produced `value`.
    pub iterations: usize,
}

/// A function of normalized pure states on fixed subsystem dimensions.
pub trait PureFunctional: Sync {
    fn dims(&self) -> &[usize];
    fn eval(&self, psi: &[C64]) -> f64;
}

/// Tsallis-q entropy of the reduced state on `party`.
#[derive(Debug, Clone)]
pub struct TeeCost {
    dims: Vec<usize>,
    cut: Split,
    q: QParam,
}

impl TeeCost {
    pub fn new(dims: &[usize], party: &[usize], q: QParam) -> Result<Self> {
        let party = proper_party(dims, party)?;
        Ok(Self {
            dims: dims.to_vec(),
            cut: Split::new(dims, &party)?,
            q,
        })
    }
}

impl PureFunctional for TeeCost {
    fn dims(&self) -> &[usize] {
        &self.dims
    }

    fn eval(&self, psi: &[C64]) -> f64 {
        tsallis_from_spectrum(&cut_spectrum(&self.cut, psi), self.q)
    }
}

/// Pure-state concurrence across `party | rest`.
#[derive(Debug, Clone)]
pub struct ConcurrenceCost {
    dims: Vec<usize>,
    cut: Split,
}

impl ConcurrenceCost {
    pub fn new(dims: &[usize], party: &[usize]) -> Result<Self> {
        let party = proper_party(dims, party)?;
        Ok(Self {
            dims: dims.to_vec(),
            cut: Split::new(dims, &party)?,
        })
    }
}

impl PureFunctional for ConcurrenceCost {
    fn dims(&self) -> &[usize] {
        &self.dims
    }

    fn eval(&self, psi: &[C64]) -> f64 {
        concurrence_sq_from_spectrum(&cut_spectrum(&self.cut, psi)).sqrt()
    }
}

/// Residual of the squared-TEE monogamy inequality for one focus qubit:
/// `T_q²(focus | rest) - Σ_j f_q(C²(focus, j))²`.
#[derive(Debug, Clone)]
pub struct IndicatorCost {
    dims: Vec<usize>,
    focus_cut: Split,
    pair_cuts: Vec<Split>,
    q: QParam,
}

impl IndicatorCost {
    pub fn new(dims: &[usize], focus: usize, q: QParam) -> Result<Self> {
        if dims.len() < 3 || dims.iter().any(|&d| d != 2) {
            return Err(Error::DimensionMismatch(format!(
                "indicator needs three or more qubits, got dims {dims:?}"
            )));
        }
        if focus >= dims.len() {
            return Err(Error::InvalidPartition(format!(
                "focus {focus} out of range for {} qubits",
                dims.len()
            )));
        }
        q.require_analytic()?;
        let pair_cuts = (0..dims.len())
            .filter(|&j| j != focus)
            .map(|j| Split::new(dims, &[focus, j]))
            .collect::<Result<_>>()?;
        Ok(Self {
            dims: dims.to_vec(),
            focus_cut: Split::new(dims, &[focus])?,
            pair_cuts,
            q,
        })
    }
}

impl PureFunctional for IndicatorCost {
    fn dims(&self) -> &[usize] {
        &self.dims
    }

    fn eval(&self, psi: &[C64]) -> f64 {
        let cut = tsallis_from_spectrum(&cut_spectrum(&self.focus_cut, psi), self.q);
        let pairs: f64 = self
            .pair_cuts
            .iter()
            .map(|cut| {
                let c = pair_concurrence(cut, psi);
                f_q(c * c, self.q).expect("concurrence lies in [0, 1]").powi(2)
            })
            .sum();
        cut * cut - pairs
    }
}

/// The `sqrt(λ_j) |e_j>` vectors spanning the support of `ρ`.
struct EnsembleBasis {
    vectors: Vec<Vec<C64>>,
}

impl EnsembleBasis {
    fn new(rho: &DensityMatrix) -> Self {
        let eig = rho.eigen();
        let vectors = eig
            .values
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > RANK_TOL)
            .map(|(k, &l)| eig.vector(k).into_iter().map(|z| z * l.sqrt()).collect())
            .collect();
        Self { vectors }
    }

    fn rank(&self) -> usize {
        self.vectors.len()
    }

    fn dim(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }

    /// `Σ_j row[j] · vectors[j]`.
    fn member(&self, row: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::default(); self.dim()];
        for (coef, v) in row.iter().zip(&self.vectors) {
            for (o, x) in out.iter_mut().zip(v) {
                *o += coef * x;
            }
        }
        out
    }
}

/// Weighted cost `<φ|φ> · g(φ / |φ|)` of one unnormalized member.
fn member_cost(cost: &dyn PureFunctional, phi: &[C64]) -> f64 {
    let w: f64 = phi.iter().map(|z| z.norm_sqr()).sum();
    if w < MIN_WEIGHT {
        return 0.0;
    }
    let scale = 1.0 / w.sqrt();
    let psi: Vec<C64> = phi.iter().map(|z| z * scale).collect();
    w * cost.eval(&psi)
}

/// Ensemble generated by the isometry `v` (`m x r`, `r` the rank of `ρ`).
pub fn decomposition_from_isometry(rho: &DensityMatrix, v: &CMatrix) -> Result<Decomposition> {
    let basis = EnsembleBasis::new(rho);
    decomposition_in_basis(rho.dims(), &basis, v)
}

fn decomposition_in_basis(dims: &[usize], basis: &EnsembleBasis, v: &CMatrix) -> Result<Decomposition> {
    let r = basis.rank();
    if v.cols() != r {
        return Err(Error::DimensionMismatch(format!(
            "isometry has {} columns but the state has rank {r}",
            v.cols()
        )));
    }
    if v.rows() < r {
        return Err(Error::DimensionMismatch(format!(
            "isometry has {} rows, fewer than the rank {r}",
            v.rows()
        )));
    }
    let defect = (&v.adjoint() * v).max_abs_diff(&CMatrix::identity(r));
    if defect > ISOMETRY_TOL {
        return Err(Error::Domain(format!("matrix is not an isometry (defect {defect:e})")));
    }
    let members = (0..v.rows())
        .filter_map(|i| {
            let row: Vec<C64> = (0..r).map(|j| v[(i, j)]).collect();
            let phi = basis.member(&row);
            let w: f64 = phi.iter().map(|z| z.norm_sqr()).sum();
            (w >= MIN_WEIGHT).then(|| PureState::normalized(dims.to_vec(), phi).map(|s| (w, s)))
        })
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = members.iter().map(|(w, _)| w).sum();
    Decomposition::new(members.into_iter().map(|(w, s)| (w / total, s)).collect())
}

struct Run {
    value: f64,
    v: CMatrix,
    converged: bool,
    iterations: usize,
}

fn inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x.conj() * y).re).sum()
}

fn row(v: &CMatrix, i: usize) -> Vec<C64> {
    (0..v.cols()).map(|j| v[(i, j)]).collect()
}

struct Problem<'a> {
    cost: &'a dyn PureFunctional,
    basis: &'a EnsembleBasis,
}

impl Problem<'_> {
    fn row_costs(&self, v: &CMatrix) -> Vec<f64> {
        (0..v.rows())
            .map(|i| member_cost(self.cost, &self.basis.member(&row(v, i))))
            .collect()
    }

    fn value(&self, v: &CMatrix) -> f64 {
        self.row_costs(v).iter().sum()
    }

    /// Central-difference Euclidean gradient, `∂F/∂Re V + i ∂F/∂Im V`.
    /// Only member `i` depends on row `i`, so each partial costs two
    /// member evaluations.
    fn gradient(&self, v: &CMatrix) -> CMatrix {
        let (m, r) = (v.rows(), v.cols());
        let mut g = CMatrix::zeros(m, r);
        for i in 0..m {
            let base = self.basis.member(&row(v, i));
            for j in 0..r {
                let dir = &self.basis.vectors[j];
                let partial = |step: C64| {
                    let shifted = |s: f64| -> f64 {
                        let phi: Vec<C64> = base.iter().zip(dir).map(|(b, d)| b + step * s * d).collect();
                        member_cost(self.cost, &phi)
                    };
                    (shifted(FD_STEP) - shifted(-FD_STEP)) / (2.0 * FD_STEP)
                };
                g[(i, j)] = C64::new(partial(C64::new(1.0, 0.0)), partial(C64::new(0.0, 1.0)));
            }
        }
        g
    }

    /// Projection of `g` onto the tangent space of the Stiefel manifold.
    fn riemannian(&self, v: &CMatrix, g: &CMatrix) -> CMatrix {
        let vg = &v.adjoint() * g;
        g - &(v * &vg.hermitian_part())
    }

    fn descend(&self, mut v: CMatrix, cfg: &RoofConfig) -> Run {
        let mut value = self.value(&v);
        let mut xi = self.riemannian(&v, &self.gradient(&v));
        let mut step = 0.1;
        let mut stalled = 0;
        for iter in 1..=cfg.max_iterations {
            let norm2 = inner(&xi, &xi);
            if norm2.sqrt() < cfg.tolerance {
                return Run { value, v, converged: true, iterations: iter };
            }
            let mut t = step;
            let mut accepted = None;
            for _ in 0..MAX_BACKTRACK {
                let trial = orthonormalize_columns(&(&v - &xi.scale(C64::new(t, 0.0))));
                let trial_value = self.value(&trial);
                if trial_value <= value - ARMIJO * t * norm2 {
                    accepted = Some((trial, trial_value));
                    break;
                }
                t *= 0.5;
            }
            let Some((next, next_value)) = accepted else {
                // no descent at any step length: finite-difference noise floor
                return Run { value, v, converged: true, iterations: iter };
            };
            let next_xi = self.riemannian(&next, &self.gradient(&next));
            let s = &next - &v;
            let y = &next_xi - &xi;
            let sy = inner(&s, &y).abs();
            step = if sy > 1e-300 { (inner(&s, &s) / sy).clamp(1e-8, 10.0) } else { 1.0 };
            let decrease = value - next_value;
            stalled = if decrease < 1e-14 * value.abs().max(1.0) { stalled + 1 } else { 0 };
            v = next;
            value = next_value;
            xi = next_xi;
            if stalled >= STALL_LIMIT {
                return Run { value, v, converged: true, iterations: iter };
            }
        }
        Run {
            value,
            v,
            converged: false,
            iterations: cfg.max_iterations,
        }
    }
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn random_isometry(m: usize, r: usize, rng: &mut impl Rng) -> CMatrix {
    let g = CMatrix::from_fn(m, r, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    orthonormalize_columns(&g)
}

/// Minimizes `Σ_i p_i cost(ψ_i)` over decompositions of `rho`.
///
/// Restarts run in parallel and are merged by minimum value, ties going to
/// the lower restart index, so the result depends only on `rho` and `cfg`.
pub fn minimize_roof(rho: &DensityMatrix, cost: &dyn PureFunctional, cfg: &RoofConfig) -> Result<RoofResult> {
    if cost.dims() != rho.dims() {
        return Err(Error::DimensionMismatch(format!(
            "cost is defined on dims {:?} but the state has dims {:?}",
            cost.dims(),
            rho.dims()
        )));
    }
    let dim = rho.total_dim();
    if dim > MAX_DIM {
        return Err(Error::Domain(format!(
            "total dimension {dim} exceeds the roof limit {MAX_DIM}"
        )));
    }
    let basis = EnsembleBasis::new(rho);
    let rank = basis.rank();
    if rank > MAX_RANK {
        return Err(Error::Domain(format!("rank {rank} exceeds the roof limit {MAX_RANK}")));
    }
    let m = cfg.validate(rank)?;

    if rank == 1 {
        let decomposition = decomposition_in_basis(rho.dims(), &basis, &CMatrix::identity(1))?;
        let value = cost.eval(decomposition.members()[0].1.amplitudes());
        return Ok(RoofResult {
            value,
            decomposition,
            converged: true,
            iterations: 1,
        });
    }

    let problem = Problem { cost, basis: &basis };
    let runs: Vec<Run> = (0..cfg.restarts)
        .into_par_iter()
        .map(|k| {
            let v = random_isometry(m, rank, &mut restart_rng(cfg.seed, k));
            problem.descend(v, cfg)
        })
        .collect();
    let best = runs
        .into_iter()
        .reduce(|best, run| if run.value < best.value { run } else { best })
        .expect("at least one restart");

    let decomposition = decomposition_in_basis(rho.dims(), &basis, &best.v)?;
    let value = decomposition
        .members()
        .iter()
        .map(|(w, s)| w * cost.eval(s.amplitudes()))
        .sum();
    Ok(RoofResult {
        value,
        decomposition,
        converged: best.converged,
        iterations: best.iterations,
    })
}

/// Roof of the TEE across `party | rest`.
pub fn roof_tee(rho: &DensityMatrix, party: &[usize], q: QParam, cfg: &RoofConfig) -> Result<RoofResult> {
    minimize_roof(rho, &TeeCost::new(rho.dims(), party, q)?, cfg)
}

/// Roof of the concurrence of a `2 ⊗ d` state across the first qubit.
pub fn roof_concurrence(rho: &DensityMatrix, cfg: &RoofConfig) -> Result<RoofResult> {
    if rho.dims().len() < 2 || rho.dims()[0] != 2 {
        return Err(Error::DimensionMismatch(format!(
            "2 ⊗ d state required, got dims {:?}",
            rho.dims()
        )));
    }
    minimize_roof(rho, &ConcurrenceCost::new(rho.dims(), &[0])?, cfg)
}
