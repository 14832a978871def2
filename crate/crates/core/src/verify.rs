//! Numerical verification suites. Each suite runs a fixed set of checks and
//! reports every one of them, pass or fail, with the numbers behind it.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::{
    critical_q, d2_fq_wrt_c, find_root_q, g_q, l_q, power_sum_property, scan_sign, appendix_d_property, Axis,
    DerivativeKind, Sign, SignScanReport,
};
use crate::error::{Error, Result};
use crate::measures::{concurrence_two_qubit, f_q, QParam, Q_C1, Q_C2};
use crate::monogamy::{
    alpha_residual, ckw_check, example3_residual, example4_residual, example5_residual, indicator,
    tee_sq_residual, w_indicator_closed_form,
};
use crate::qstate::{generalized_w, ghz, haar_random, random_mixed, w_state, DensityMatrix, PureState, State};
use crate::roof::{roof_concurrence, roof_tee, RoofConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Window edges from the `C → 1` limit.
    AppendixA,
    /// Positivity of `l_q`.
    AppendixB,
    /// Integer-`q` closed forms, sign structure of `g_q`, derivative
    /// cross-checks.
    AppendixC,
    /// The scalar power inequalities.
    AppendixD,
    /// Random pure-state sweep of the squared-TEE, CKW and power-α
    /// residuals.
    Theorem3Sweep,
    /// Closed-form examples and the W-state family.
    Examples,
    /// Roof optimizer against Wootters, and indicator evidence on mixtures.
    Roof,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::AppendixA,
        Suite::AppendixB,
        Suite::AppendixC,
        Suite::AppendixD,
        Suite::Theorem3Sweep,
        Suite::Examples,
        Suite::Roof,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::AppendixA => "appendix-a",
            Suite::AppendixB => "appendix-b",
            Suite::AppendixC => "appendix-c",
            Suite::AppendixD => "appendix-d",
            Suite::Theorem3Sweep => "theorem3-sweep",
            Suite::Examples => "examples",
            Suite::Roof => "roof",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}]", self.suite.name())?;
        for c in &self.checks {
            writeln!(f, "  {} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        write!(f, "  => {}", if self.passed() { "PASSED" } else { "FAILED" })
    }
}

/// Runs one suite; `seed` drives every random sample and roof restart.
pub fn run_suite(suite: Suite, seed: u64) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::AppendixA => vec![critical_points()?],
        Suite::AppendixB => vec![sign_check(l_positivity()?)],
        Suite::AppendixC => {
            let mut v = vec![integer_q_closed_forms()?];
            v.extend(g_sign_structure()?.into_iter().map(sign_check));
            v.push(g_vanishes_at_2_and_3()?);
            v.push(finite_difference_agreement()?);
            v
        }
        Suite::AppendixD => vec![appendix_d_samples(seed)?],
        Suite::Theorem3Sweep => theorem3_sweep(seed)?,
        Suite::Examples => vec![
            example4_root()?,
            example5_root()?,
            example3_grid()?,
            w_indicator_positive()?,
            w_pipeline_matches_closed_form()?,
            generalized_w_grid()?,
        ],
        Suite::Roof => vec![
            roof_matches_wootters(seed)?,
            roof_lower_bound_2x3(seed)?,
            biseparable_indicator(seed)?,
            entangled_indicator()?,
        ],
    };
    Ok(SuiteReport { suite, checks })
}

fn q(v: f64) -> Result<QParam> {
    QParam::new(v)
}

/// `n` points from `lo` to `hi` inclusive.
fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// `n` points strictly inside `(lo, hi)`.
fn interior(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| lo + (hi - lo) * i as f64 / (n + 1) as f64).collect()
}

pub fn critical_points() -> Result<Check> {
    let (lo, hi) = critical_q()?;
    let ok = (lo - 0.6972244).abs() < 1e-6 && (hi - 4.3027756).abs() < 1e-6;
    Ok(Check::new(
        "window edges",
        ok,
        format!("q_c1 = {lo:.12}, q_c2 = {hi:.12}"),
    ))
}

fn sign_check(r: SignScanReport) -> Check {
    let detail = format!(
        "{}x{} grid, {} violations, min {:.3e}, max {:.3e}",
        r.x.n,
        r.q.n,
        r.violations.len(),
        r.min_value,
        r.max_value
    );
    Check::new(&r.label, r.passed(), detail)
}

pub fn l_positivity() -> Result<SignScanReport> {
    scan_sign(
        "l_q > 0 on D",
        DerivativeKind::Lq,
        Axis::new(0.0, 0.999, 200)?,
        Axis::new(Q_C1, Q_C2, 200)?,
        Sign::NonNegative,
    )
}

/// Scans of `g_q` on the two concave strips and the convex strip between.
pub fn g_sign_structure() -> Result<Vec<SignScanReport>> {
    let x = Axis::new(0.0, 0.999, 200)?;
    Ok(vec![
        scan_sign("g_q ≤ 0 on D1", DerivativeKind::Gq, x, Axis::new(Q_C1, 2.0, 200)?, Sign::NonPositive)?,
        scan_sign("g_q ≥ 0 on D2", DerivativeKind::Gq, x, Axis::new(2.0, 3.0, 200)?, Sign::NonNegative)?,
        scan_sign("g_q ≤ 0 on D3", DerivativeKind::Gq, x, Axis::new(3.0, Q_C2, 200)?, Sign::NonPositive)?,
    ])
}

pub fn integer_q_closed_forms() -> Result<Check> {
    let mut worst = 0.0f64;
    for x in grid(0.0, 1.0, 1000) {
        worst = worst
            .max((f_q(x, q(2.0)?)? - x / 2.0).abs())
            .max((f_q(x, q(3.0)?)? - 3.0 * x / 8.0).abs())
            .max((f_q(x, q(4.0)?)? - (8.0 * x - x * x) / 24.0).abs());
    }
    let mut worst_g4 = 0.0f64;
    for x in grid(0.0, 0.999, 1000) {
        worst_g4 = worst_g4.max((g_q(x, q(4.0)?)? + 1.0 / 12.0).abs());
    }
    Ok(Check::new(
        "f_2, f_3, f_4 and g_4 closed forms",
        worst <= 1e-12 && worst_g4 <= 1e-12,
        format!("max |f error| {worst:.2e}, max |g_4 + 1/12| {worst_g4:.2e}"),
    ))
}

pub fn g_vanishes_at_2_and_3() -> Result<Check> {
    let mut worst = 0.0f64;
    for x in grid(0.0, 0.999, 1000) {
        worst = worst.max(g_q(x, q(2.0)?)?.abs()).max(g_q(x, q(3.0)?)?.abs());
    }
    Ok(Check::new("g_2 = g_3 = 0", worst <= 1e-12, format!("max |g| {worst:.2e}")))
}

/// Error of each closed-form derivative against a central second
/// difference on a 50×50 interior grid, in units of `max(1e-4 |exact|, 1e-8)`.
pub fn finite_difference_agreement() -> Result<Check> {
    let qs = interior(Q_C1, Q_C2, 50);
    let xs = interior(0.0, 0.999, 50);
    let rel = |exact: f64, fd: f64| (exact - fd).abs() / (1e-4 * exact.abs()).max(1e-8);
    // five-point stencil; the three-point one is noise-limited where g is tiny
    let second = |f: &dyn Fn(f64) -> f64, x: f64, h: f64| {
        (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h)
    };
    let worst = qs
        .par_iter()
        .map(|&qv| -> Result<f64> {
            let qp = q(qv)?;
            let mut worst = 0.0f64;
            for &x in &xs {
                let h = 2e-2 * x.min(1.0 - x);
                let f = |t: f64| f_q(t, qp).expect("x in [0, 1]");
                let f2 = |t: f64| f(t).powi(2);
                worst = worst
                    .max(rel(g_q(x, qp)?, second(&f, x, h)))
                    .max(rel(l_q(x, qp)?, second(&f2, x, h)));
                let c = x.sqrt();
                let hc = 2e-2 * c.min(1.0 - c);
                let fc = |t: f64| f(t * t);
                worst = worst.max(rel(d2_fq_wrt_c(qp, c)?, second(&fc, c, hc)));
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(Check::new(
        "closed-form derivatives vs finite differences",
        worst <= 1.0,
        format!("worst error {:.3e} of the allowed max(1e-4 rel, 1e-8)", worst),
    ))
}

pub fn appendix_d_samples(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..10_000 {
        let x: f64 = rng.random();
        let t = 1.0 + 9.0 * rng.random::<f64>();
        if !appendix_d_property(x, t)? {
            failures += 1;
        }
        let len = rng.random_range(1..=6);
        let xs: Vec<f64> = (0..len).map(|_| rng.random()).collect();
        let alpha = 2.0 + 6.0 * rng.random::<f64>();
        if !power_sum_property(&xs, alpha)? {
            failures += 1;
        }
    }
    Ok(Check::new(
        "power inequalities on 10^4 random samples",
        failures == 0,
        format!("{failures} violations"),
    ))
}

/// Haar-random states on 3, 4 and 5 qubits in rotation, `count` in all.
pub fn sweep_states(count: usize, seed: u64) -> Result<Vec<PureState>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|i| haar_random(&vec![2; 3 + i % 3], &mut rng)).collect()
}

/// 25 values of `q` spanning the analytic window.
pub fn sweep_qs() -> Vec<f64> {
    grid(Q_C1, Q_C2, 25)
}

pub fn theorem3_sweep(seed: u64) -> Result<Vec<Check>> {
    let states = sweep_states(500, seed)?;
    let qs = sweep_qs();
    let alphas = [2.0, 2.5, 3.0, 4.0];
    let per_state = states
        .par_iter()
        .map(|psi| -> Result<(f64, f64, f64)> {
            let ckw = ckw_check(psi, 0)?.residual;
            let (mut tee, mut alpha) = (f64::INFINITY, f64::INFINITY);
            for &qv in &qs {
                let qp = q(qv)?;
                tee = tee.min(tee_sq_residual(psi, 0, qp)?.residual);
                for &a in &alphas {
                    alpha = alpha.min(alpha_residual(psi, 0, qp, a)?.residual);
                }
            }
            Ok((tee, ckw, alpha))
        })
        .collect::<Result<Vec<_>>>()?;
    let min = |f: fn(&(f64, f64, f64)) -> f64| per_state.iter().map(f).fold(f64::INFINITY, f64::min);
    let (tee, ckw, alpha) = (min(|r| r.0), min(|r| r.1), min(|r| r.2));
    Ok(vec![
        Check::new(
            "squared-TEE residual ≥ 0",
            tee >= -1e-8,
            format!("500 states x 25 q, min residual {tee:.3e}"),
        ),
        Check::new("CKW residual ≥ 0", ckw >= -1e-9, format!("500 states, min residual {ckw:.3e}")),
        Check::new(
            "power-α residual ≥ 0",
            alpha >= -1e-8,
            format!("α ∈ {{2, 2.5, 3, 4}}, min residual {alpha:.3e}"),
        ),
    ])
}

fn residual_root(f: fn(QParam) -> Result<f64>, lo: f64, hi: f64) -> Result<f64> {
    find_root_q(|v| QParam::new(v).and_then(f).unwrap_or(f64::NAN), lo, hi)
}

pub fn example4_root() -> Result<Check> {
    let root = residual_root(example4_residual, 1.1, 2.0)?;
    Ok(Check::new(
        "three-qutrit residual changes sign near 1.619",
        (root - 1.619).abs() <= 1e-3,
        format!("root {root:.6}"),
    ))
}

pub fn example5_root() -> Result<Check> {
    let root = residual_root(example5_residual, 2.0, 3.0)?;
    Ok(Check::new(
        "qutrit-qubit-qubit residual changes sign near 2.471",
        (root - 2.471).abs() <= 2e-3,
        format!("root {root:.6}"),
    ))
}

/// The `4 ⊗ 2 ⊗ 2` residual over `θ ∈ [0, 2π]`, `q ∈ [1.01, 4.30]`.
pub fn example3_grid() -> Result<Check> {
    let thetas = grid(0.0, 2.0 * PI, 201);
    let qs = grid(1.01, 4.30, 200);
    let mut worst = (f64::INFINITY, 0.0, 0.0);
    for &qv in &qs {
        let qp = q(qv)?;
        for &t in &thetas {
            let r = example3_residual(t, qp)?;
            if r < worst.0 {
                worst = (r, t, qv);
            }
        }
    }
    let first_negative = find_root_q(
        |v| example3_residual(PI / 4.0, QParam::new(v).expect("q > 0")).unwrap_or(f64::NAN),
        2.0,
        3.0,
    )?;
    Ok(Check::new(
        "4x2x2 residual ≥ 0 for q in [1.01, 4.30]",
        worst.0 >= -1e-10,
        format!(
            "min {:.6} at θ = {:.4}, q = {:.3}; at θ = π/4 the residual turns negative at q = {first_negative:.6}",
            worst.0, worst.1, worst.2
        ),
    ))
}

pub fn w_indicator_positive() -> Result<Check> {
    let mut min = f64::INFINITY;
    for n in [3, 6, 9, 11] {
        for qv in grid(0.7, 4.3, 73) {
            min = min.min(w_indicator_closed_form(n, q(qv)?)?);
        }
    }
    Ok(Check::new(
        "W indicator > 0 for n = 3, 6, 9, 11",
        min > 0.0,
        format!("min {min:.6e}"),
    ))
}

pub fn w_pipeline_matches_closed_form() -> Result<Check> {
    let cfg = RoofConfig::default();
    let mut worst = 0.0f64;
    for n in [3, 4, 5] {
        let w = State::Pure(w_state(n)?);
        for qv in grid(0.7, 4.3, 37) {
            let qp = q(qv)?;
            worst = worst.max((indicator(&w, qp, &cfg)?.residual - w_indicator_closed_form(n, qp)?).abs());
        }
    }
    Ok(Check::new(
        "W indicator from the state equals the closed form",
        worst <= 1e-9,
        format!("max difference {worst:.2e} for n ≤ 5"),
    ))
}

/// Generalized-W indicator at the four plotted `q`, on a 65×65 `θ × φ`
/// grid.
pub fn generalized_w_grid() -> Result<Check> {
    let thetas = grid(0.0, PI, 65);
    let phis = grid(0.0, 2.0 * PI, 65);
    let mut min = f64::INFINITY;
    let mut separable_max = 0.0f64;
    for qv in [0.7, 1.0, 2.5, 4.3] {
        let qp = q(qv)?;
        for &t in &thetas {
            for &p in &phis {
                let Ok(psi) = generalized_w(t, p) else { continue };
                min = min.min(tee_sq_residual(&psi, 0, qp)?.residual);
            }
        }
        for p in [PI / 2.0, PI, 1.5 * PI, 2.0 * PI] {
            let psi = generalized_w(PI / 2.0, p)?;
            separable_max = separable_max.max(tee_sq_residual(&psi, 0, qp)?.residual.abs());
        }
    }
    Ok(Check::new(
        "generalized-W indicator ≥ 0 and zero when separable",
        min >= -1e-8 && separable_max <= 1e-8,
        format!("grid min {min:.3e}, max |value| at separable points {separable_max:.3e}"),
    ))
}

/// Roof TEE of random rank-2 two-qubit states against `f_q(C²)`.
pub fn roof_matches_wootters(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<DensityMatrix> = (0..50)
        .map(|_| random_mixed(&[2, 2], 2, &mut rng))
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for (i, rho) in states.iter().enumerate() {
        let c = concurrence_two_qubit(rho)?.c;
        for qv in [0.8, 1.5, 2.0, 3.5] {
            let qp = q(qv)?;
            let cfg = RoofConfig::with_seed(seed.wrapping_add(i as u64));
            let roof = roof_tee(rho, &[0], qp, &cfg)?.value;
            worst = worst.max((roof - f_q(c * c, qp)?).abs());
        }
    }
    Ok(Check::new(
        "roof TEE equals f_q(C²) on two qubits",
        worst <= 1e-4,
        format!("50 rank-2 states x 4 q, max difference {worst:.2e}"),
    ))
}

/// Roof TEE of random rank-2 `2 ⊗ 3` states is at least `f_q` of the
/// squared roof concurrence.
pub fn roof_lower_bound_2x3(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x2d3);
    let qp = q(2.0)?;
    let mut worst = f64::INFINITY;
    for i in 0..20 {
        let rho = random_mixed(&[2, 3], 2, &mut rng)?;
        let cfg = RoofConfig::with_seed(seed.wrapping_add(i));
        let tee = roof_tee(&rho, &[0], qp, &cfg)?.value;
        let c = roof_concurrence(&rho, &cfg)?.value;
        worst = worst.min(tee - f_q(c * c, qp)?);
    }
    Ok(Check::new(
        "roof TEE ≥ f_q(C²) on 2x3",
        worst >= -1e-4,
        format!("20 rank-2 states, min margin {worst:.2e}"),
    ))
}

fn random_qubit<R: Rng>(rng: &mut R) -> Result<PureState> {
    haar_random(&[2], rng)
}

/// A random pure state that is a product across one of the three cuts
/// `A|BC`, `B|AC`, `C|AB`.
fn random_biseparable<R: Rng>(rng: &mut R) -> Result<PureState> {
    let lone = rng.random_range(0..3);
    let single = random_qubit(rng)?;
    let pair = haar_random(&[2, 2], rng)?;
    let joined = single.tensor(&pair);
    let perm = match lone {
        0 => [0, 1, 2],
        1 => [1, 0, 2],
        _ => [1, 2, 0],
    };
    joined.permuted(&perm)
}

/// Rank-2 mixtures of biseparable pure states.
pub fn biseparable_mixtures(count: usize, seed: u64) -> Result<Vec<DensityMatrix>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let (a, b) = (random_biseparable(&mut rng)?, random_biseparable(&mut rng)?);
            let p = 0.2 + 0.6 * rng.random::<f64>();
            DensityMatrix::mixture(&[(p, a.density()), (1.0 - p, b.density())])
        })
        .collect()
}

pub fn biseparable_indicator(seed: u64) -> Result<Check> {
    let qp = q(2.0)?;
    let mut worst = f64::NEG_INFINITY;
    for (i, rho) in biseparable_mixtures(20, seed ^ 0xb15)?.into_iter().enumerate() {
        let cfg = RoofConfig::with_seed(seed.wrapping_add(i as u64)).restarts(64);
        worst = worst.max(indicator(&State::Mixed(rho), qp, &cfg)?.residual);
    }
    Ok(Check::new(
        "indicator upper bound vanishes on biseparable mixtures",
        worst <= 1e-3,
        format!("20 mixtures, largest bound {worst:.2e}"),
    ))
}

pub fn entangled_indicator() -> Result<Check> {
    let qp = q(2.0)?;
    let cfg = RoofConfig::default();
    let w = indicator(&State::Pure(w_state(3)?), qp, &cfg)?.residual;
    let g = indicator(&State::Pure(ghz(3)?), qp, &cfg)?.residual;
    Ok(Check::new(
        "indicator of W and GHZ at q = 2",
        w >= 0.05 && g >= 0.05,
        format!("W {w:.6}, GHZ {g:.6}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("appendix-z".parse::<Suite>().is_err());
    }

    #[test]
    fn cheap_suites_pass() {
        for s in [Suite::AppendixA, Suite::AppendixB, Suite::AppendixC, Suite::AppendixD] {
            let r = run_suite(s, 7).unwrap();
            assert!(r.passed(), "{r}");
        }
        let text = run_suite(Suite::AppendixA, 0).unwrap().to_string();
        assert!(text.contains("0.697224362268") && text.contains("4.302775637732"), "{text}");
    }

    #[test]
    fn example_roots() {
        let e4 = example4_root().unwrap();
        assert!(e4.passed, "{}", e4.detail);
        let e5 = example5_root().unwrap();
        assert!(e5.passed, "{}", e5.detail);
        let e3 = example3_grid().unwrap();
        assert!(!e3.passed && e3.detail.contains("q = 2.2715"), "{}", e3.detail);
    }

    #[test]
    fn biseparable_members_have_zero_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let psi = random_biseparable(&mut rng).unwrap();
            let r = tee_sq_residual(&psi, 0, q(2.0).unwrap()).unwrap();
            assert!(r.residual.abs() < 1e-12, "{}", r.residual);
        }
    }
}
