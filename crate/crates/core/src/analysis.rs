//! Derivatives of `f_q`, the critical window edges, sign scans over
//! `(x, q)` rectangles and bracketing root finding in `q`.
//!
//! Throughout, `s = sqrt(1 - x)`, `a = (1 + s)/2` and `b = (1 - s)/2`, with
//! `b` evaluated as `x / (4a)` to keep relative accuracy for small `x`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{f_q, QParam};
use crate::scan::format_float;

/// Sign violations smaller than this are ignored by [`scan_sign`].
pub const SCAN_TOL: f64 = 1e-10;

struct Halves {
    s: f64,
    a: f64,
    b: f64,
}

fn halves(x: f64) -> Halves {
    let s = (1.0 - x).sqrt();
    let a = (1.0 + s) / 2.0;
    Halves { s, a, b: x / (4.0 * a) }
}

fn open_unit(x: f64, name: &str) -> Result<()> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!("{name} = {x} must lie in [0, 1)")));
    }
    Ok(())
}

/// `df_q/dx = q (a^{q-1} - b^{q-1}) / (4 (q-1) s)`.
pub fn df_q(x: f64, q: QParam) -> Result<f64> {
    open_unit(x, "x")?;
    let Halves { s, a, b } = halves(x);
    if s < SERIES_S {
        return Ok(df_q_series(s, q.value()));
    }
    if q.is_von_neumann() {
        return Ok((a / b).ln() / (4.0 * s));
    }
    let q = q.value();
    Ok(q * (a.powf(q - 1.0) - b.powf(q - 1.0)) / (4.0 * (q - 1.0) * s))
}

/// `g_q(x) = d²f_q/dx²`
/// `= q / (4 (q-1) s²) · [(a^{q-1} - b^{q-1}) / (2s) - (q-1)(a^{q-2} + b^{q-2}) / 4]`.
///
/// At `x = 0` with `q < 2` the curvature is `-∞`.
pub fn g_q(x: f64, q: QParam) -> Result<f64> {
    open_unit(x, "x")?;
    let Halves { s, a, b } = halves(x);
    let qv = q.value();
    if x == 0.0 && qv < 2.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if s < SERIES_S {
        return Ok(g_q_series(s, qv));
    }
    if q.is_von_neumann() {
        return Ok(((a / b).ln() / (2.0 * s) - 1.0 / x) / (4.0 * s * s));
    }
    let bracket = (a.powf(qv - 1.0) - b.powf(qv - 1.0)) / (2.0 * s)
        - (qv - 1.0) * (a.powf(qv - 2.0) + b.powf(qv - 2.0)) / 4.0;
    Ok(qv / (4.0 * (qv - 1.0) * s * s) * bracket)
}

/// Below this `s = √(1 − x)` the closed forms cancel badly.
const SERIES_S: f64 = 0.1;

/// Sums `Σ c_k s^(2k)` where `c_k = c_{k-1} · ratio(k)`.
fn series_in_s2(s: f64, c0: f64, ratio: impl Fn(usize) -> f64) -> f64 {
    let s2 = s * s;
    let (mut coeff, mut pow, mut sum) = (c0, 1.0, c0);
    for k in 1..20 {
        coeff *= ratio(k);
        pow *= s2;
        let term = coeff * pow;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// `f_q'` near `x = 1`; the `s^(2k)` coefficient is
/// `q (q−2)(q−3)…(q−2k−1) / (2^q (2k+1)!)`.
fn df_q_series(s: f64, q: f64) -> f64 {
    series_in_s2(s, q / 2f64.powf(q), |k| {
        let j = (2 * k) as f64;
        (q - j) * (q - j - 1.0) / (j * (j + 1.0))
    })
}

/// `g_q` as a power series in `s²`; the `s^(2k)` coefficient is
/// `−q (k+1) (q−2)(q−3)…(q−2k−3) / (2^q (2k+3)!)`.
fn g_q_series(s: f64, q: f64) -> f64 {
    series_in_s2(s, -q * (q - 2.0) * (q - 3.0) / (6.0 * 2f64.powf(q)), |k| {
        let j = (2 * k + 2) as f64;
        (k + 1) as f64 / k as f64 * (q - j) * (q - j - 1.0) / (j * (j + 1.0))
    })
}

/// `l_q(x) = d²(f_q²)/dx² = 2 f_q'² + 2 f_q g_q`.
///
/// At `x = 0` this is `2 f_q'(0)²` for `q > 1` and `+∞` for `q ≤ 1`.
pub fn l_q(x: f64, q: QParam) -> Result<f64> {
    open_unit(x, "x")?;
    if x == 0.0 {
        if q.value() <= 1.0 {
            return Ok(f64::INFINITY);
        }
        let d = df_q(0.0, q)?;
        return Ok(2.0 * d * d);
    }
    let d = df_q(x, q)?;
    Ok(2.0 * d * d + 2.0 * f_q(x, q)? * g_q(x, q)?)
}

/// `d² f_q(C²) / dC²` for `0 < C < 1`:
/// `α [A^{q-1}/s³ - C²(q-1)A^{q-2}/s² - B^{q-1}/s³ - C²(q-1)B^{q-2}/s²]`
/// with `α = q / (2^q (q-1))`, `s = sqrt(1 - C²)`, `A = 1 + s`, `B = 1 - s`.
pub fn d2_fq_wrt_c(q: QParam, c: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Domain(format!("concurrence {c} must lie in (0, 1)")));
    }
    let x = c * c;
    let s = (1.0 - x).sqrt();
    if s < SERIES_S {
        // chain rule: d²f(C²)/dC² = 2 f'(x) + 4x f''(x)
        let qv = q.value();
        return Ok(2.0 * df_q_series(s, qv) + 4.0 * x * g_q_series(s, qv));
    }
    let big = 1.0 + s;
    let small = x / big;
    if q.is_von_neumann() {
        return Ok((big / small).ln() / (2.0 * s * s * s) - 1.0 / (s * s));
    }
    let qv = q.value();
    let alpha = qv / (2f64.powf(qv) * (qv - 1.0));
    let s2 = s * s;
    let s3 = s2 * s;
    Ok(alpha
        * ((big.powf(qv - 1.0) - small.powf(qv - 1.0)) / s3
            - x * (qv - 1.0) * (big.powf(qv - 2.0) + small.powf(qv - 2.0)) / s2))
}

/// `-2 (q-1)(q² - 5q + 3)`: the sign-carrying part of `d²f_q(C²)/dC²` as
/// `C → 1`.
pub fn limit_polynomial(q: f64) -> f64 {
    -2.0 * (q - 1.0) * (q * q - 5.0 * q + 3.0)
}

/// `lim_{C→1} d²f_q(C²)/dC² = α · limit_polynomial(q) / 3
/// = -2q (q² - 5q + 3) / (3 · 2^q)`, continuous through `q = 1`.
pub fn d2_limit_at_one(q: QParam) -> f64 {
    let q = q.value();
    -2.0 * q * (q * q - 5.0 * q + 3.0) / (3.0 * 2f64.powf(q))
}

/// Finds a root of `f` on `[lo, hi]` by Brent's method. Stops when
/// `|f| ≤ 1e-15` or the bracket is narrower than `1e-12`.
pub fn find_root_q(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo.is_finite() && fhi.is_finite()) {
        return Err(Error::Root(format!("non-finite value at the bracket [{lo}, {hi}]")));
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Root(format!(
            "no sign change on [{lo}, {hi}]: f = {flo:e}, {fhi:e}"
        )));
    }
    let mut conv = roots::SimpleConvergency { eps: 1e-12, max_iter: 200 };
    let mut tight = Tight(&mut conv);
    roots::find_root_brent(lo, hi, f, &mut tight).map_err(|e| Error::Root(format!("{e:?} on [{lo}, {hi}]")))
}

/// Root test on `|f| ≤ 1e-15`, bracket test on the wrapped tolerance.
struct Tight<'a>(&'a mut roots::SimpleConvergency<f64>);

impl roots::Convergency<f64> for Tight<'_> {
    fn is_root_found(&mut self, y: f64) -> bool {
        y.abs() <= 1e-15
    }

    fn is_converged(&mut self, x1: f64, x2: f64) -> bool {
        self.0.is_converged(x1, x2)
    }

    fn is_iteration_limit_reached(&mut self, iter: usize) -> bool {
        self.0.is_iteration_limit_reached(iter)
    }
}

/// The window edges `(5 ∓ sqrt 13)/2`, found as the roots of
/// [`limit_polynomial`] away from `q = 1` and checked against the quadratic
/// formula.
pub fn critical_q() -> Result<(f64, f64)> {
    let lower = find_root_q(limit_polynomial, 0.5, 0.9)?;
    let upper = find_root_q(limit_polynomial, 4.0, 4.6)?;
    let exact = ((5.0 - 13f64.sqrt()) / 2.0, (5.0 + 13f64.sqrt()) / 2.0);
    if (lower - exact.0).abs() > 1e-10 || (upper - exact.1).abs() > 1e-10 {
        return Err(Error::Root(format!(
            "roots ({lower}, {upper}) disagree with the quadratic formula"
        )));
    }
    Ok((lower, upper))
}

/// Which closed-form derivative a scan samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DerivativeKind {
    /// `d²f_q(C²)/dC²`; the sample's `x` is the concurrence `C`.
    #[serde(rename = "d2_f_wrt_C")]
    D2WrtC,
    #[serde(rename = "l_q")]
    Lq,
    #[serde(rename = "g_q")]
    Gq,
}

impl DerivativeKind {
    pub fn eval(self, x: f64, q: QParam) -> Result<f64> {
        match self {
            DerivativeKind::D2WrtC => d2_fq_wrt_c(q, x),
            DerivativeKind::Lq => l_q(x, q),
            DerivativeKind::Gq => g_q(x, q),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DerivativeKind::D2WrtC => "d2_f_wrt_C",
            DerivativeKind::Lq => "l_q",
            DerivativeKind::Gq => "g_q",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeSample {
    pub x: f64,
    pub q: f64,
    pub value: f64,
    pub kind: DerivativeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    NonNegative,
    NonPositive,
}

impl Sign {
    fn violated(self, value: f64, tol: f64) -> bool {
        match self {
            Sign::NonNegative => !(value >= -tol),
            Sign::NonPositive => !(value <= tol),
        }
    }
}

/// Closed interval `[lo, hi]` sampled at `n ≥ 2` evenly spaced points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || !(lo <= hi) {
            return Err(Error::Domain(format!(
                "axis [{lo}, {hi}] with {n} points needs lo ≤ hi and at least 2 points"
            )));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.point(i))
    }
}

/// Summary of a sign scan; `samples` holds every grid value in `q`-major
/// order and is left out of the JSON summary.
#[derive(Debug, Clone, Serialize)]
pub struct SignScanReport {
    pub label: String,
    pub kind: DerivativeKind,
    pub x: Axis,
    pub q: Axis,
    pub claimed: Sign,
    pub tolerance: f64,
    pub violations: Vec<DerivativeSample>,
    pub min_value: f64,
    pub max_value: f64,
    /// Smallest `|value|` on the grid, i.e. how close it comes to zero.
    pub min_abs_value: f64,
    #[serde(skip)]
    pub samples: Vec<DerivativeSample>,
}

impl SignScanReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// `x,q,value` rows, one per grid point.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record([if self.kind == DerivativeKind::D2WrtC { "c" } else { "x" }, "q", self.kind.name()])
            .map_err(io)?;
        for s in &self.samples {
            w.write_record([format_float(s.x), format_float(s.q), format_float(s.value)])
                .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Evaluates `kind` on the `x × q` grid and lists every point whose sign
/// disagrees with `claimed` by more than [`SCAN_TOL`]. The value at `q = 1`
/// uses the von Neumann limit.
pub fn scan_sign(label: &str, kind: DerivativeKind, x: Axis, q: Axis, claimed: Sign) -> Result<SignScanReport> {
    let x_max = if kind == DerivativeKind::D2WrtC { 1.0 } else { 1.0 - 1e-6 };
    if x.lo < 0.0 || x.hi > x_max {
        return Err(Error::Domain(format!(
            "x range [{}, {}] must lie within [0, {x_max}]",
            x.lo, x.hi
        )));
    }
    if q.lo <= 0.0 {
        return Err(Error::Domain(format!("q range must be positive, got {}", q.lo)));
    }
    let mut samples = Vec::with_capacity(x.n * q.n);
    for qv in q.points() {
        let qp = QParam::new(qv)?;
        for xv in x.points() {
            samples.push(DerivativeSample {
                x: xv,
                q: qv,
                value: kind.eval(xv, qp)?,
                kind,
            });
        }
    }
    let violations = samples
        .iter()
        .filter(|s| claimed.violated(s.value, SCAN_TOL))
        .copied()
        .collect();
    let values = || samples.iter().map(|s| s.value);
    Ok(SignScanReport {
        label: label.to_string(),
        kind,
        x,
        q,
        claimed,
        tolerance: SCAN_TOL,
        violations,
        min_value: values().fold(f64::INFINITY, f64::min),
        max_value: values().fold(f64::NEG_INFINITY, f64::max),
        min_abs_value: values().map(f64::abs).fold(f64::INFINITY, f64::min),
        samples,
    })
}

/// `(1 + x)^t ≥ 1 + x^t` for `x ∈ [0, 1]`, `t ≥ 1`.
pub fn appendix_d_property(x: f64, t: f64) -> Result<bool> {
    if !(0.0..=1.0).contains(&x) || !(t >= 1.0) {
        return Err(Error::Domain(format!("need x in [0, 1] and t ≥ 1, got x = {x}, t = {t}")));
    }
    Ok((1.0 + x).powf(t) >= (1.0 + x.powf(t)) * (1.0 - 1e-15))
}

/// `(Σ x_i²)^{α/2} ≥ Σ x_i^α` for entries in `[0, 1]` and `α ≥ 2`.
pub fn power_sum_property(xs: &[f64], alpha: f64) -> Result<bool> {
    if xs.iter().any(|x| !(0.0..=1.0).contains(x)) || !(alpha >= 2.0) {
        return Err(Error::Domain(format!(
            "need entries in [0, 1] and alpha ≥ 2, got alpha = {alpha}"
        )));
    }
    let lhs = xs.iter().map(|x| x * x).sum::<f64>().powf(alpha / 2.0);
    let rhs: f64 = xs.iter().map(|x| x.powf(alpha)).sum();
    Ok(lhs >= rhs * (1.0 - 1e-12))
}
