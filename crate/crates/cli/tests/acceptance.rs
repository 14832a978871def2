//! Acceptance criteria 1 to 12. Each test prints one `PASS`/`FAIL` line
//! straight to stdout (bypassing libtest capture) and then asserts.

use std::f64::consts::PI;
use std::io::Write;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsallis_monogamy::analysis::{
    appendix_d_property, critical_q, d2_fq_wrt_c, find_root_q, g_q, l_q, power_sum_property, scan_sign, Axis,
    DerivativeKind, Sign,
};
use tsallis_monogamy::measures::{concurrence_two_qubit, f_q, QParam, Q_C1, Q_C2};
use tsallis_monogamy::monogamy::{
    alpha_residual, ckw_check, example3_residual, example4_residual, example5_residual, indicator,
    tee_sq_residual, w_indicator_closed_form,
};
use tsallis_monogamy::qstate::{
    generalized_w, ghz, haar_random, random_mixed, w_state, DensityMatrix, PureState, State,
};
use tsallis_monogamy::roof::{roof_concurrence, roof_tee, RoofConfig};

const CRITICAL_TOL: f64 = 1e-6;
const CLOSED_FORM_TOL: f64 = 1e-12;
const SIGN_TOL: f64 = 1e-10;
const FD_REL_TOL: f64 = 1e-4;
const FD_ABS_TOL: f64 = 1e-8;
const TEE_RESIDUAL_TOL: f64 = 1e-8;
const CKW_TOL: f64 = 1e-9;
const ROOF_TOL: f64 = 1e-4;
const Q1_TOL: f64 = 1e-3;
const Q2_TOL: f64 = 2e-3;
const EXAMPLE3_TOL: f64 = 1e-10;
const W_PIPELINE_TOL: f64 = 1e-9;
const GW_TOL: f64 = 1e-8;
const BISEPARABLE_TOL: f64 = 1e-3;
const ENTANGLED_MIN: f64 = 0.05;
const ALPHA_TOL: f64 = 1e-8;

const SEED: u64 = 20_240_601;

fn report(n: &str, ok: bool, detail: &str) {
    let line = format!("{} criterion {n}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    std::io::stdout().write_all(line.as_bytes()).unwrap();
    assert!(ok, "criterion {n} failed: {detail}");
}

fn q(v: f64) -> QParam {
    QParam::new(v).unwrap()
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn interior(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| lo + (hi - lo) * i as f64 / (n + 1) as f64).collect()
}

#[test]
fn criterion_01_critical_points() {
    let start = std::time::Instant::now();
    let (lo, hi) = critical_q().unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let exact = ((5.0 - 13f64.sqrt()) / 2.0, (5.0 + 13f64.sqrt()) / 2.0);
    let ok = (lo - 0.6972244).abs() < CRITICAL_TOL
        && (hi - 4.3027756).abs() < CRITICAL_TOL
        && (lo - exact.0).abs() < CRITICAL_TOL
        && (hi - exact.1).abs() < CRITICAL_TOL
        && elapsed < 1.0;
    report("1", ok, &format!("roots {lo:.10}, {hi:.10} in {elapsed:.3}s"));
}

#[test]
fn criterion_02_integer_closed_forms() {
    let mut worst_f = 0.0f64;
    for x in grid(0.0, 1.0, 1000) {
        worst_f = worst_f
            .max((f_q(x, q(2.0)).unwrap() - x / 2.0).abs())
            .max((f_q(x, q(3.0)).unwrap() - 3.0 * x / 8.0).abs())
            .max((f_q(x, q(4.0)).unwrap() - (8.0 * x - x * x) / 24.0).abs());
    }
    let mut worst_g = 0.0f64;
    for x in grid(0.0, 0.999, 1000) {
        worst_g = worst_g.max((g_q(x, q(4.0)).unwrap() + 1.0 / 12.0).abs());
    }
    report(
        "2",
        worst_f <= CLOSED_FORM_TOL && worst_g <= CLOSED_FORM_TOL,
        &format!("max |f_q - closed form| {worst_f:.2e}, max |g_4 + 1/12| {worst_g:.2e}"),
    );
}

#[test]
fn criterion_03_l_positive() {
    let start = std::time::Instant::now();
    let r = scan_sign(
        "l_q",
        DerivativeKind::Lq,
        Axis::new(0.0, 0.999, 200).unwrap(),
        Axis::new(Q_C1, Q_C2, 200).unwrap(),
        Sign::NonNegative,
    )
    .unwrap();
    let strictly_positive = r.samples.iter().all(|s| s.value > -SIGN_TOL);
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "3",
        r.passed() && strictly_positive && r.samples.len() == 40_000 && elapsed < 5.0,
        &format!("200x200 grid, min l_q {:.4e}, {elapsed:.3}s", r.min_value),
    );
}

#[test]
fn criterion_04_g_sign_structure() {
    let x = Axis::new(0.0, 0.999, 200).unwrap();
    let d1 = scan_sign("D1", DerivativeKind::Gq, x, Axis::new(Q_C1, 2.0, 200).unwrap(), Sign::NonPositive).unwrap();
    let d2 = scan_sign("D2", DerivativeKind::Gq, x, Axis::new(2.0, 3.0, 200).unwrap(), Sign::NonNegative).unwrap();
    let d3 = scan_sign("D3", DerivativeKind::Gq, x, Axis::new(3.0, Q_C2, 200).unwrap(), Sign::NonPositive).unwrap();
    let d1_ok = d1.samples.iter().all(|s| s.value <= SIGN_TOL);
    let d2_ok = d2.samples.iter().all(|s| s.value >= -SIGN_TOL);
    let d3_ok = d3.samples.iter().all(|s| s.value <= SIGN_TOL);
    let mut worst_zero = 0.0f64;
    for x in grid(0.0, 0.999, 1000) {
        worst_zero = worst_zero
            .max(g_q(x, q(2.0)).unwrap().abs())
            .max(g_q(x, q(3.0)).unwrap().abs());
    }
    report(
        "4",
        d1_ok && d2_ok && d3_ok && worst_zero <= CLOSED_FORM_TOL,
        &format!(
            "max g on D1 {:.2e}, min g on D2 {:.2e}, max g on D3 {:.2e}, max |g_2|,|g_3| {worst_zero:.2e}",
            d1.max_value, d2.min_value, d3.max_value
        ),
    );
}

/// Five-point central second difference.
fn second(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h)
}

#[test]
fn criterion_05_finite_differences() {
    let allowed = |exact: f64| (FD_REL_TOL * exact.abs()).max(FD_ABS_TOL);
    let mut worst = 0.0f64;
    let mut count = 0;
    for qv in interior(Q_C1, Q_C2, 50) {
        let qp = q(qv);
        let f = |t: f64| f_q(t, qp).unwrap();
        let f2 = |t: f64| f(t).powi(2);
        let fc = |t: f64| f(t * t);
        for x in interior(0.0, 0.999, 50) {
            let h = 2e-2 * x.min(1.0 - x);
            let g = g_q(x, qp).unwrap();
            let l = l_q(x, qp).unwrap();
            worst = worst.max((g - second(&f, x, h)).abs() / allowed(g));
            worst = worst.max((l - second(&f2, x, h)).abs() / allowed(l));
            let c = x.sqrt();
            let d2 = d2_fq_wrt_c(qp, c).unwrap();
            worst = worst.max((d2 - second(&fc, c, 2e-2 * c.min(1.0 - c))).abs() / allowed(d2));
            count += 3;
        }
    }
    report(
        "5",
        worst <= 1.0,
        &format!("{count} comparisons, worst error {worst:.3} of the allowance"),
    );
}

/// 500 Haar-random states cycling through 3, 4 and 5 qubits.
fn sweep_states() -> Vec<PureState> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    (0..500).map(|i| haar_random(&vec![2; 3 + i % 3], &mut rng).unwrap()).collect()
}

#[test]
fn criterion_06_theorem3_sweep() {
    let start = std::time::Instant::now();
    let qs = grid(Q_C1, Q_C2, 25);
    let mut min_tee = f64::INFINITY;
    let mut min_ckw = f64::INFINITY;
    for psi in sweep_states() {
        for focus in 0..psi.num_subsystems() {
            min_ckw = min_ckw.min(ckw_check(&psi, focus).unwrap().residual);
            for &qv in &qs {
                min_tee = min_tee.min(tee_sq_residual(&psi, focus, q(qv)).unwrap().residual);
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "6",
        min_tee >= -TEE_RESIDUAL_TOL && min_ckw >= -CKW_TOL && elapsed < 120.0,
        &format!("min squared-TEE residual {min_tee:.3e}, min CKW residual {min_ckw:.3e}, {elapsed:.1}s"),
    );
}

#[test]
fn criterion_07_roof_oracle() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    let mut worst_eq = 0.0f64;
    for i in 0..50 {
        let rho = random_mixed(&[2, 2], 2, &mut rng).unwrap();
        let c = concurrence_two_qubit(&rho).unwrap().c;
        for qv in [0.8, 1.5, 2.0, 3.5] {
            let cfg = RoofConfig::with_seed(SEED + i).restarts(32);
            let roof = roof_tee(&rho, &[0], q(qv), &cfg).unwrap().value;
            worst_eq = worst_eq.max((roof - f_q(c * c, q(qv)).unwrap()).abs());
        }
    }
    let mut worst_margin = f64::INFINITY;
    for i in 0..20 {
        // the 2 ⊗ 3 marginal of a random pure 2 ⊗ 3 ⊗ 2 state has rank 2
        let psi = haar_random(&[2, 3, 2], &mut rng).unwrap();
        let rho = psi.reduced(&[0, 1]).unwrap();
        let cfg = RoofConfig::with_seed(SEED + 100 + i).restarts(32);
        let tee = roof_tee(&rho, &[0], q(2.0), &cfg).unwrap().value;
        let c = roof_concurrence(&rho, &cfg).unwrap().value;
        worst_margin = worst_margin.min(tee - f_q(c * c, q(2.0)).unwrap());
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "7",
        worst_eq <= ROOF_TOL && worst_margin >= -ROOF_TOL && elapsed < 120.0,
        &format!(
            "max |roof - f_q(C²)| {worst_eq:.2e} on 2x2, min roof - f_q(roof C²) {worst_margin:.2e} on 2x3, {elapsed:.1}s"
        ),
    );
}

fn residual_root(f: fn(QParam) -> tsallis_monogamy::Result<f64>, lo: f64, hi: f64) -> f64 {
    find_root_q(|v| f(q(v)).unwrap(), lo, hi).unwrap()
}

#[test]
fn criterion_08_examples() {
    let q1 = residual_root(example4_residual, 1.1, 2.0);
    let q2 = residual_root(example5_residual, 2.0, 3.0);
    let mut min3 = (f64::INFINITY, 0.0, 0.0);
    for qv in grid(1.01, 4.30, 330) {
        for t in grid(0.0, 2.0 * PI, 361) {
            let r = example3_residual(t, q(qv)).unwrap();
            if r < min3.0 {
                min3 = (r, t, qv);
            }
        }
    }
    let a = (q1 - 1.619).abs() <= Q1_TOL;
    let b = (q2 - 2.471).abs() <= Q2_TOL;
    let c = min3.0 >= -EXAMPLE3_TOL;
    report(
        "8",
        a && b && c,
        &format!(
            "(a) q1 = {q1:.6} {}, (b) q2 = {q2:.6} {}, (c) min 4x2x2 residual {:.6} at θ = {:.4}, q = {:.3} {}",
            if a { "ok" } else { "off" },
            if b { "ok" } else { "off" },
            min3.0,
            min3.1,
            min3.2,
            if c { "ok" } else { "negative" }
        ),
    );
}

#[test]
fn criterion_09_w_indicator() {
    let mut min_closed = f64::INFINITY;
    for n in [3, 6, 9, 11] {
        for qv in grid(Q_C1, Q_C2, 200) {
            min_closed = min_closed.min(w_indicator_closed_form(n, q(qv)).unwrap());
        }
    }
    let cfg = RoofConfig::default();
    let mut worst_pipeline = 0.0f64;
    for n in [3, 4, 5] {
        let w = State::Pure(w_state(n).unwrap());
        for qv in grid(Q_C1, Q_C2, 50) {
            let got = indicator(&w, q(qv), &cfg).unwrap().residual;
            worst_pipeline = worst_pipeline.max((got - w_indicator_closed_form(n, q(qv)).unwrap()).abs());
        }
    }
    let mut min_gw = f64::INFINITY;
    let mut separable = 0.0f64;
    for qv in [0.7, 1.0, 2.0, 2.5, 4.3] {
        for t in grid(0.0, PI, 65) {
            for p in grid(0.0, 2.0 * PI, 65) {
                if let Ok(psi) = generalized_w(t, p) {
                    min_gw = min_gw.min(tee_sq_residual(&psi, 0, q(qv)).unwrap().residual);
                }
            }
        }
        for p in [PI / 2.0, PI, 1.5 * PI, 2.0 * PI] {
            let psi = generalized_w(PI / 2.0, p).unwrap();
            separable = separable.max(tee_sq_residual(&psi, 0, q(qv)).unwrap().residual);
        }
    }
    report(
        "9",
        min_closed > 0.0 && worst_pipeline <= W_PIPELINE_TOL && min_gw >= -GW_TOL && separable <= GW_TOL,
        &format!(
            "min closed form {min_closed:.4e}, pipeline gap {worst_pipeline:.2e}, generalized-W min {min_gw:.2e}, at separable points {separable:.2e}"
        ),
    );
}

/// Pure state that factors across one of the cuts A|BC, B|AC, C|AB.
fn biseparable(rng: &mut ChaCha8Rng) -> PureState {
    let single = haar_random(&[2], rng).unwrap();
    let pair = haar_random(&[2, 2], rng).unwrap();
    let joined = single.tensor(&pair);
    let perm: [usize; 3] = match rng.random_range(0..3) {
        0 => [0, 1, 2],
        1 => [1, 0, 2],
        _ => [1, 2, 0],
    };
    joined.permuted(&perm).unwrap()
}

#[test]
fn criterion_10_indicator_evidence() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 10);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..20 {
        let (a, b) = (biseparable(&mut rng), biseparable(&mut rng));
        let p = rng.random_range(0.2..0.8);
        let rho = DensityMatrix::mixture(&[(p, a.density()), (1.0 - p, b.density())]).unwrap();
        let cfg = RoofConfig::with_seed(SEED + i).restarts(64);
        worst = worst.max(indicator(&State::Mixed(rho), q(2.0), &cfg).unwrap().residual);
    }
    let cfg = RoofConfig::default();
    let w = indicator(&State::Pure(w_state(3).unwrap()), q(2.0), &cfg).unwrap().residual;
    let g = indicator(&State::Pure(ghz(3).unwrap()), q(2.0), &cfg).unwrap().residual;
    report(
        "10",
        worst <= BISEPARABLE_TOL && w >= ENTANGLED_MIN && g >= ENTANGLED_MIN,
        &format!("largest biseparable bound {worst:.2e}, W3 {w:.6}, GHZ3 {g:.6}"),
    );
}

#[test]
fn criterion_11_power_alpha() {
    let qs = grid(Q_C1, Q_C2, 25);
    let mut min_alpha = f64::INFINITY;
    for psi in sweep_states() {
        for &qv in &qs {
            for alpha in [2.0, 2.5, 3.0, 4.0] {
                min_alpha = min_alpha.min(alpha_residual(&psi, 0, q(qv), alpha).unwrap().residual);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 11);
    let mut violations = 0;
    for _ in 0..10_000 {
        let x: f64 = rng.random();
        let t = rng.random_range(1.0..10.0);
        violations += usize::from(!appendix_d_property(x, t).unwrap());
        let xs: Vec<f64> = (0..rng.random_range(1..=6)).map(|_| rng.random()).collect();
        violations += usize::from(!power_sum_property(&xs, rng.random_range(2.0..8.0)).unwrap());
    }
    report(
        "11",
        min_alpha >= -ALPHA_TOL && violations == 0,
        &format!("min power-α residual {min_alpha:.3e}, {violations} scalar violations in 10^4 samples"),
    );
}

/// One invocation per figure, plus seeded roof runs.
const DETERMINISM_RUNS: &[&[&str]] = &[
    &["scan", "--subject", "generalized-w", "--q", "0.7", "--theta", "0:π:64", "--phi", "0:2π:64"],
    &["scan", "--subject", "generalized-w", "--q", "1", "--theta", "0:π:64", "--phi", "0:2π:64"],
    &["scan", "--subject", "generalized-w", "--q", "2.5", "--theta", "0:π:64", "--phi", "0:2π:64"],
    &["scan", "--subject", "generalized-w", "--q", "4.3", "--theta", "0:π:64", "--phi", "0:2π:64"],
    &["scan", "--subject", "w-indicator:3,6,9,11", "--q", "0.7:4.3:0.05"],
    &["scan", "--subject", "example4-5", "--q", "0.7:4.3:0.01"],
    &["scan", "--subject", "d2-zero:lower", "--c", "0.01:0.999:100"],
    &["scan", "--subject", "d2-zero:upper", "--c", "0.8:0.999:100"],
    &["scan", "--subject", "l-zero", "--x", "0:0.999:100"],
    &["scan", "--subject", "l_q", "--x", "0:0.999:50", "--q", "0.6972243622680054:4.302775637731995:50"],
    &["scan", "--subject", "g-zero", "--x", "0:0.999:100"],
    &["scan", "--subject", "g_q", "--x", "0:0.999:50", "--q", "2:3:50"],
    &["scan", "--subject", "example3", "--theta", "0:2π:32", "--q", "1.01:4.3:0.1"],
    &["scan", "--subject", "example4", "--q", "0.7:4.3:0.01"],
    &["scan", "--subject", "example5", "--q", "0.7:4.3:0.01"],
    &["indicator", "--state", "mixed:2:2,2,2", "--q", "2", "--seed", "11", "--restarts", "8", "--json"],
    &["tee", "--state", "mixed:2:2,3", "--q", "2", "--seed", "5", "--restarts", "8", "--csv"],
];

#[test]
fn criterion_12_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut mismatches = Vec::new();
    for (i, args) in DETERMINISM_RUNS.iter().enumerate() {
        let run = |tag: &str| {
            let mut argv: Vec<String> = args.iter().map(|s| s.to_string()).collect();
            let path = dir.path().join(format!("{i}-{tag}.csv"));
            if args[0] == "scan" {
                argv.push("--out".into());
                argv.push(path.to_str().unwrap().into());
            }
            let out = Command::new(env!("CARGO_BIN_EXE_tsallis")).args(&argv).output().unwrap();
            assert!(out.status.success(), "{argv:?}: {}", String::from_utf8_lossy(&out.stderr));
            if args[0] == "scan" {
                std::fs::read(path).unwrap()
            } else {
                out.stdout
            }
        };
        if run("a") != run("b") {
            mismatches.push(args.join(" "));
        }
    }
    report(
        "12",
        mismatches.is_empty(),
        &format!("{} invocations run twice, {} differ", DETERMINISM_RUNS.len(), mismatches.len()),
    );
}
