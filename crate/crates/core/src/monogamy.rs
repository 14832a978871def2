//! Monogamy inequalities for squared TEE, the residual-tangle indicator,
//! and closed-form residuals for a few fixed states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Split;
use crate::measures::{
    concurrence_pure, concurrence_sq_from_spectrum, cut_spectrum, f_q, pair_concurrence, tee_2xd,
    tee_pure, tsallis_from_spectrum, ConcurrenceValue, QParam,
};
use crate::qstate::{PureState, State};
use crate::roof::{minimize_roof, roof_concurrence, roof_tee, IndicatorCost, RoofConfig};

/// Default slack below zero that still counts as satisfied.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// `lhs ≥ Σ terms`, with `residual = lhs - Σ terms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonogamyReport {
    /// `None` for the concurrence (CKW) check.
    pub q: Option<f64>,
    pub focus: usize,
    pub lhs: f64,
    pub terms: Vec<f64>,
    pub residual: f64,
    pub satisfied: bool,
    pub tolerance: f64,
    /// Set when the numbers come from a finite roof minimization, so the
    /// residual is only an upper bound.
    pub upper_bound: bool,
}

impl MonogamyReport {
    fn new(q: Option<QParam>, focus: usize, lhs: f64, terms: Vec<f64>) -> Self {
        let residual = lhs - terms.iter().sum::<f64>();
        Self {
            q: q.map(QParam::value),
            focus,
            lhs,
            terms,
            residual,
            satisfied: residual >= -DEFAULT_TOLERANCE,
            tolerance: DEFAULT_TOLERANCE,
            upper_bound: false,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.satisfied = self.residual >= -tolerance;
        self
    }
}

fn require_qubits(psi: &PureState, focus: usize) -> Result<()> {
    if !psi.is_qubits() || psi.num_subsystems() < 3 {
        return Err(Error::DimensionMismatch(format!(
            "three or more qubits required, got dims {:?}",
            psi.dims()
        )));
    }
    if focus >= psi.num_subsystems() {
        return Err(Error::InvalidPartition(format!(
            "focus {focus} out of range for {} qubits",
            psi.num_subsystems()
        )));
    }
    Ok(())
}

/// Wootters concurrences of every pair `(focus, j)`, `j ≠ focus`, in
/// increasing `j`.
fn pair_concurrences(psi: &PureState, focus: usize) -> Result<Vec<f64>> {
    (0..psi.num_subsystems())
        .filter(|&j| j != focus)
        .map(|j| Ok(pair_concurrence(&Split::new(psi.dims(), &[focus, j])?, psi.amplitudes())))
        .collect()
}

fn focus_spectrum(psi: &PureState, focus: usize) -> Result<Vec<f64>> {
    Ok(cut_spectrum(&Split::new(psi.dims(), &[focus])?, psi.amplitudes()))
}

/// Squared-concurrence monogamy, `C²(focus | rest) ≥ Σ_j C²(focus, j)`.
pub fn ckw_check(psi: &PureState, focus: usize) -> Result<MonogamyReport> {
    require_qubits(psi, focus)?;
    let lhs = concurrence_sq_from_spectrum(&focus_spectrum(psi, focus)?);
    let terms = pair_concurrences(psi, focus)?.into_iter().map(|c| c * c).collect();
    Ok(MonogamyReport::new(None, focus, lhs, terms))
}

/// `T_q^α(focus | rest) ≥ Σ_j T_q^α(focus, j)` with the pair TEEs taken as
/// `f_q(C²)`.
pub fn alpha_residual(psi: &PureState, focus: usize, q: QParam, alpha: f64) -> Result<MonogamyReport> {
    require_qubits(psi, focus)?;
    q.require_analytic()?;
    if !(alpha >= 2.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha = {alpha} must be at least 2")));
    }
    let power = |t: f64| if alpha == 2.0 { t * t } else { t.max(0.0).powf(alpha) };
    let lhs = power(tsallis_from_spectrum(&focus_spectrum(psi, focus)?, q));
    let terms = pair_concurrences(psi, focus)?
        .into_iter()
        .map(|c| f_q(c * c, q).map(power))
        .collect::<Result<_>>()?;
    Ok(MonogamyReport::new(Some(q), focus, lhs, terms))
}

/// `T_q²(focus | rest) ≥ Σ_j T_q²(focus, j)`; the residual is the
/// residual tangle.
pub fn tee_sq_residual(psi: &PureState, focus: usize, q: QParam) -> Result<MonogamyReport> {
    alpha_residual(psi, focus, q, 2.0)
}

/// The hierarchical inequality
/// `T_q²(A₁|A₂…A_N) ≥ Σ_{i<k} T_q²(A₁A_i) + T_q²(A₁|A_k…A_N)`, where `A₁`
/// is `focus` and the partners are the other qubits in increasing order.
///
/// The tail term is `f_q(C²)` of the focus-tail state; its concurrence is
/// exact when that state is pure or two-qubit and a roof estimate otherwise.
pub fn hierarchical_check(
    psi: &PureState,
    focus: usize,
    k: usize,
    q: QParam,
    cfg: &RoofConfig,
) -> Result<MonogamyReport> {
    require_qubits(psi, focus)?;
    let n = psi.num_subsystems();
    if !(3..=n).contains(&k) {
        return Err(Error::InvalidPartition(format!("k = {k} must lie in 3..={n}")));
    }
    q.require_concave()?;
    let partners: Vec<usize> = (0..n).filter(|&j| j != focus).collect();
    let lhs = tsallis_from_spectrum(&focus_spectrum(psi, focus)?, q).powi(2);
    let pairs = pair_concurrences(psi, focus)?;
    let mut terms: Vec<f64> = pairs[..k - 2]
        .iter()
        .map(|c| f_q(c * c, q).map(|t| t * t))
        .collect::<Result<_>>()?;

    let tail = &partners[k - 2..];
    // focus first, then the tail, then everything else
    let mut order = vec![focus];
    order.extend_from_slice(tail);
    order.extend(partners[..k - 2].iter().copied());
    let moved = psi.permuted(&order)?;
    let kept: Vec<usize> = (0..=tail.len()).collect();
    let tail_state = moved.reduced(&kept)?;
    let tail_c = if tail.len() == 1 {
        pairs[k - 2]
    } else if kept.len() == n {
        concurrence_pure(&moved, &[0])?.c
    } else {
        roof_concurrence(&tail_state, cfg)?.value
    };
    let tail_c = ConcurrenceValue { c: tail_c, lambdas: None };
    let tee = tee_2xd(&tail_state, q, &tail_c)?.value;
    terms.push(tee * tee);
    Ok(MonogamyReport::new(Some(q), focus, lhs, terms))
}

/// Residual-tangle indicator `τ_q` with the first qubit as focus.
///
/// Pure input gives [`tee_sq_residual`]. Mixed input minimizes the average
/// pure-state residual over decompositions; the report then carries the
/// averaged cut and pair terms of the best decomposition found and is
/// flagged as an upper bound.
pub fn indicator(state: &State, q: QParam, cfg: &RoofConfig) -> Result<MonogamyReport> {
    match state {
        State::Pure(psi) => tee_sq_residual(psi, 0, q),
        State::Mixed(rho) => {
            if let Some(psi) = rho.as_pure(crate::roof::RANK_TOL) {
                return tee_sq_residual(&psi, 0, q);
            }
            let cost = IndicatorCost::new(rho.dims(), 0, q)?;
            let best = minimize_roof(rho, &cost, cfg)?;
            let mut lhs = 0.0;
            let mut terms = vec![0.0; rho.dims().len() - 1];
            for (w, member) in best.decomposition.members() {
                let r = tee_sq_residual(member, 0, q)?;
                lhs += w * r.lhs;
                for (acc, t) in terms.iter_mut().zip(&r.terms) {
                    *acc += w * t;
                }
            }
            let mut report = MonogamyReport::new(Some(q), 0, lhs, terms);
            report.upper_bound = true;
            Ok(report)
        }
    }
}

/// `f_q²(4(n-1)/n²) - (n-1) f_q²(4/n²)`, the indicator of the `n`-qubit W
/// state.
pub fn w_indicator_closed_form(n: usize, q: QParam) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("W indicator needs n ≥ 3, got {n}")));
    }
    let nf = n as f64;
    let cut = f_q(4.0 * (nf - 1.0) / (nf * nf), q)?;
    let pair = f_q(4.0 / (nf * nf), q)?;
    Ok(cut * cut - (nf - 1.0) * pair * pair)
}

fn reject_von_neumann(q: QParam) -> Result<f64> {
    if q.is_von_neumann() {
        return Err(Error::Domain(
            "closed form is singular at q = 1; use the pipeline residual".into(),
        ));
    }
    Ok(q.value())
}

/// Closed-form residual for the `4 ⊗ 2 ⊗ 2` state of
/// [`example3_state`](crate::qstate::example3_state):
/// `(1-a)(1-b)[(1+a)(1+b) - 2] / (q-1)²` with `a = 2^{1-q}` and
/// `b = cos^{2q}θ + sin^{2q}θ`.
pub fn example3_residual(theta: f64, q: QParam) -> Result<f64> {
    let q = reject_von_neumann(q)?;
    let a = 2f64.powf(1.0 - q);
    let b = theta.cos().abs().powf(2.0 * q) + theta.sin().abs().powf(2.0 * q);
    Ok((1.0 - a) * (1.0 - b) * ((1.0 + a) * (1.0 + b) - 2.0) / (q - 1.0).powi(2))
}

/// Closed-form residual for the antisymmetric three-qutrit state:
/// `[(1 - 3^{1-q})² - 2(1 - 2^{1-q})²] / (q-1)²`.
pub fn example4_residual(q: QParam) -> Result<f64> {
    let q = reject_von_neumann(q)?;
    let cut = 1.0 - 3f64.powf(1.0 - q);
    let pair = 1.0 - 2f64.powf(1.0 - q);
    Ok((cut * cut - 2.0 * pair * pair) / (q - 1.0).powi(2))
}

/// Residual for the `3 ⊗ 2 ⊗ 2` state of
/// [`example5_state`](crate::qstate::example5_state), computed from its
/// reduced spectra: the cut has spectrum `{1/3, 1/3, 1/3}` and each pair
/// TEE is the Tsallis entropy of `{0, 1/3, 2/3}`.
pub fn example5_residual(q: QParam) -> Result<f64> {
    let qv = reject_von_neumann(q)?;
    let cut = (1.0 - 3f64.powf(1.0 - qv)) / (qv - 1.0);
    let pair = (1.0 - (1.0 + 2f64.powf(qv)) * 3f64.powf(-qv)) / (qv - 1.0);
    Ok(cut * cut - 2.0 * pair * pair)
}

/// Residual computed directly from a pure state with arbitrary local
/// dimensions: the focus cut TEE from its Schmidt spectrum and each pair TEE
/// from a roof minimization of the reduced pair state.
pub fn pipeline_residual(psi: &PureState, focus: usize, q: QParam, cfg: &RoofConfig) -> Result<MonogamyReport> {
    let n = psi.num_subsystems();
    if n < 3 || focus >= n {
        return Err(Error::InvalidPartition(format!(
            "need three or more subsystems and a valid focus, got {n} and {focus}"
        )));
    }
    let lhs = tee_pure(psi, &[focus], q)?.powi(2);
    let terms = (0..n)
        .filter(|&j| j != focus)
        .map(|j| {
            let pair = psi.reduced(&[focus, j])?;
            let local = if focus < j { 0 } else { 1 };
            Ok(roof_tee(&pair, &[local], q, cfg)?.value.powi(2))
        })
        .collect::<Result<_>>()?;
    let mut report = MonogamyReport::new(Some(q), focus, lhs, terms);
    report.upper_bound = true;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{Q_C1, Q_C2};
    use crate::qstate::{example3_state, ghz, haar_random, w_state, DensityMatrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn q(v: f64) -> QParam {
        QParam::new(v).unwrap()
    }

    fn product3() -> PureState {
        PureState::basis(vec![2, 2, 2], 0b101).unwrap()
    }

    #[test]
    fn ckw_examples() {
        let w = ckw_check(&w_state(3).unwrap(), 0).unwrap();
        assert!(w.residual.abs() < 1e-9);
        assert!((w.lhs - 8.0 / 9.0).abs() < 1e-12);
        let g = ckw_check(&ghz(3).unwrap(), 0).unwrap();
        assert!((g.residual - 1.0).abs() < 1e-12);
        assert!(ckw_check(&product3(), 1).unwrap().residual.abs() < 1e-15);
        assert!(ckw_check(&ghz(2).unwrap(), 0).is_err());
        assert!(ckw_check(&crate::qstate::example5_state(), 0).is_err());
    }

    #[test]
    fn tee_sq_examples() {
        let w = tee_sq_residual(&w_state(3).unwrap(), 0, q(2.0)).unwrap();
        assert!((w.residual - 8.0 / 81.0).abs() < 1e-12);
        let g = tee_sq_residual(&ghz(3).unwrap(), 0, q(2.0)).unwrap();
        assert!((g.residual - 0.25).abs() < 1e-12);
        assert!(g.satisfied);
        for v in [Q_C1, 1.0, 2.5, Q_C2] {
            assert!(tee_sq_residual(&product3(), 2, q(v)).unwrap().residual.abs() < 1e-15);
        }
        assert!(matches!(
            tee_sq_residual(&ghz(3).unwrap(), 0, q(4.5)),
            Err(Error::QOutOfRange { .. })
        ));
    }

    #[test]
    fn report_residual_and_tolerance() {
        let r = tee_sq_residual(&w_state(4).unwrap(), 1, q(1.3)).unwrap();
        assert_eq!(r.residual, r.lhs - r.terms.iter().sum::<f64>());
        let mut fake = r.clone();
        fake.residual = -1e-9;
        assert!(fake.clone().with_tolerance(1e-8).satisfied);
        assert!(!fake.with_tolerance(1e-10).satisfied);
        let json = serde_json::to_string(&r).unwrap();
        let back: MonogamyReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn alpha_examples() {
        let w = w_state(3).unwrap();
        let two = alpha_residual(&w, 0, q(2.0), 2.0).unwrap();
        assert_eq!(two, tee_sq_residual(&w, 0, q(2.0)).unwrap());
        let three = alpha_residual(&w, 0, q(2.0), 3.0).unwrap();
        assert!((three.residual - 48.0 / 729.0).abs() < 1e-12);
        assert!(alpha_residual(&w, 0, q(2.0), 1.5).is_err());
    }

    #[test]
    fn alpha_family_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let s = haar_random(&[2, 2, 2, 2], &mut rng).unwrap();
            for v in [0.8, 2.0, 3.9] {
                if tee_sq_residual(&s, 0, q(v)).unwrap().satisfied {
                    for a in [2.5, 3.0, 4.0] {
                        assert!(alpha_residual(&s, 0, q(v), a).unwrap().satisfied);
                    }
                }
            }
        }
    }

    #[test]
    fn hierarchy_examples() {
        let cfg = RoofConfig::with_seed(1).restarts(8);
        let w4 = w_state(4).unwrap();
        let full = tee_sq_residual(&w4, 0, q(2.0)).unwrap();
        let k4 = hierarchical_check(&w4, 0, 4, q(2.0), &cfg).unwrap();
        assert_eq!(k4.residual, full.residual);
        let k3 = hierarchical_check(&w4, 0, 3, q(2.0), &cfg).unwrap();
        assert!(k3.residual >= -1e-6);
        assert!(k3.residual <= full.residual + 1e-6);
        let g4 = hierarchical_check(&ghz(4).unwrap(), 0, 3, q(2.0), &cfg).unwrap();
        assert!((g4.lhs - 0.25).abs() < 1e-12);
        assert!(g4.terms[0].abs() < 1e-12);
        assert!(hierarchical_check(&w4, 0, 2, q(2.0), &cfg).is_err());
        assert!(hierarchical_check(&w4, 0, 5, q(2.0), &cfg).is_err());
        assert!(hierarchical_check(&w4, 0, 3, q(2.5), &cfg).is_err());
    }

    #[test]
    fn hierarchy_consistent_with_full_residual() {
        let cfg = RoofConfig::with_seed(2).restarts(8);
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..5 {
            let s = haar_random(&[2, 2, 2, 2], &mut rng).unwrap();
            for focus in [0, 2] {
                let full = tee_sq_residual(&s, focus, q(2.0)).unwrap().residual;
                let hier = hierarchical_check(&s, focus, 3, q(2.0), &cfg).unwrap().residual;
                assert!(hier >= -1e-6 && hier <= full + 1e-6, "{hier} vs {full}");
            }
        }
    }

    #[test]
    fn pure_indicator_matches_closed_form() {
        for n in 3..=5 {
            let w = State::Pure(w_state(n).unwrap());
            for v in [Q_C1, 1.0, 1.7, 3.0, Q_C2] {
                let pipe = indicator(&w, q(v), &RoofConfig::default()).unwrap().residual;
                let closed = w_indicator_closed_form(n, q(v)).unwrap();
                assert!((pipe - closed).abs() <= 1e-9, "n={n} q={v}");
            }
        }
        assert!((w_indicator_closed_form(3, q(2.0)).unwrap() - 8.0 / 81.0).abs() < 1e-15);
        assert!(w_indicator_closed_form(2, q(2.0)).is_err());
    }

    #[test]
    fn w_indicator_von_neumann_limit() {
        for n in [3, 6] {
            let at = w_indicator_closed_form(n, q(1.0)).unwrap();
            for v in [1.0 - 1e-6, 1.0 + 1e-6] {
                assert!((w_indicator_closed_form(n, q(v)).unwrap() - at).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn mixed_indicator_is_flagged_and_small_on_biseparable() {
        let cfg = RoofConfig::with_seed(9).restarts(8);
        let bell_c = ghz(2).unwrap().tensor(&PureState::basis(vec![2], 0).unwrap());
        let other = PureState::basis(vec![2, 2, 2], 0b011).unwrap();
        let rho = DensityMatrix::mixture(&[(0.6, bell_c.density()), (0.4, other.density())]).unwrap();
        let r = indicator(&State::Mixed(rho), q(2.0), &cfg).unwrap();
        assert!(r.upper_bound);
        assert!(r.residual <= 1e-4 && r.residual >= -1e-8, "{}", r.residual);
        let pure_as_mixed = State::Mixed(w_state(3).unwrap().density());
        let r = indicator(&pure_as_mixed, q(2.0), &cfg).unwrap();
        assert!(!r.upper_bound && (r.residual - 8.0 / 81.0).abs() < 1e-10);
    }

    #[test]
    fn example3_closed_form() {
        assert!((example3_residual(PI / 4.0, q(2.0)).unwrap() - 1.0 / 16.0).abs() < 1e-15);
        for v in [0.8, 2.0, 4.0] {
            assert!(example3_residual(0.0, q(v)).unwrap().abs() < 1e-15);
        }
        assert!(example3_residual(0.3, q(1.0)).is_err());
    }

    #[test]
    fn example3_matches_pipeline() {
        let cfg = RoofConfig::with_seed(4).restarts(16);
        let s = example3_state(PI / 4.0);
        let pipe = pipeline_residual(&s, 0, q(2.0), &cfg).unwrap();
        assert!((pipe.residual - 1.0 / 16.0).abs() < 2e-3, "{}", pipe.residual);
        // past q ≈ 2.27 the residual is genuinely negative
        for v in [3.0, 4.0] {
            let pipe = pipeline_residual(&s, 0, q(v), &cfg).unwrap();
            let closed = example3_residual(PI / 4.0, q(v)).unwrap();
            assert!(closed < 0.0 && (pipe.residual - closed).abs() < 2e-3, "q={v}: {} vs {closed}", pipe.residual);
        }
    }

    #[test]
    fn example4_and_5_values() {
        assert!((example4_residual(q(2.0)).unwrap() + 1.0 / 18.0).abs() < 1e-15);
        assert!(example4_residual(q(Q_C1)).unwrap() > 0.0);
        assert!((example5_residual(q(2.0)).unwrap() - 4.0 / 81.0).abs() < 1e-15);
        // T_cut = 4/9, T_pair = 1/3
        assert!((example5_residual(q(3.0)).unwrap() + 2.0 / 81.0).abs() < 1e-15);
        assert!(example4_residual(q(1.0)).is_err() && example5_residual(q(1.0)).is_err());
    }

    #[test]
    fn example5_formula_matches_spectra() {
        // ρ_AB has an eigen-ensemble of two equal-weight states whose A
        // marginals both have spectrum {0, 1/3, 2/3}
        let s = crate::qstate::example5_state();
        let ab = s.reduced(&[0, 1]).unwrap();
        let eig = ab.eigen();
        let members: Vec<PureState> = (0..2)
            .map(|k| PureState::normalized(vec![3, 2], eig.vector(k)).unwrap())
            .collect();
        assert!((eig.values[0] - 0.5).abs() < 1e-12 && (eig.values[1] - 0.5).abs() < 1e-12);
        let cfg = RoofConfig::with_seed(6).restarts(16);
        for v in [0.8, 1.5, 2.0, 3.0, 4.2] {
            let cut = tee_pure(&s, &[0], q(v)).unwrap();
            let pair = members.iter().map(|m| tee_pure(m, &[0], q(v)).unwrap()).sum::<f64>() / 2.0;
            let want = cut * cut - 2.0 * pair * pair;
            assert!((example5_residual(q(v)).unwrap() - want).abs() < 1e-12);
            let roof = roof_tee(&ab, &[0], q(v), &cfg).unwrap().value;
            assert!((roof - pair).abs() < 1e-6, "q={v}: roof {roof} vs {pair}");
        }
    }
}
