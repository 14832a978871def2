//! Deterministic tables behind the figures: grids of indicator values,
//! example residuals, derivative values and the zero sets of the
//! derivatives.
//!
//! Tables serialize to CSV with a header row, LF line endings and floats
//! printed to 12 significant digits. Undefined points (a zero-norm state,
//! `q = 1` in a closed form that excludes it, no zero in range) are written
//! as `nan`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::analysis::{d2_fq_wrt_c, g_q, l_q, DerivativeKind};
use crate::error::{Error, Result};
use crate::measures::{QParam, Q_C1, Q_C2};
use crate::monogamy::{
    example3_residual, example4_residual, example5_residual, tee_sq_residual, w_indicator_closed_form,
};
use crate::qstate::{generalized_w, generalized_w_standard};

/// `%.12g`-style formatting, independent of locale.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// A number, or a multiple of π such as `π`, `2pi`, `3π/2`.
pub fn parse_scalar(text: &str) -> Result<f64> {
    let t = text.trim();
    let bad = || Error::Parse(format!("cannot read '{text}' as a number"));
    let pi_at = t.find('π').map(|i| (i, 'π'.len_utf8())).or_else(|| t.find("pi").map(|i| (i, 2)));
    let Some((at, width)) = pi_at else {
        return t.parse::<f64>().map_err(|_| bad());
    };
    let (coef, rest) = (&t[..at], &t[at + width..]);
    let coef = match coef.trim_end_matches('*') {
        "" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let den = match rest {
        "" => 1.0,
        r => r.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(coef * PI / den)
}

/// A list of sample points, read from `v`, `lo:hi:step` or `lo:hi:n`.
///
/// With a step, points are `lo + i·step` for every `i` with
/// `lo + i·step < hi + step/2`. A third field written as an integer
/// `n ≥ 2` splits `[lo, hi]` into `n` equal intervals (`n + 1` points).
/// Bounds accept `π` or `pi`, optionally with a coefficient and a divisor
/// (`2π`, `3pi/2`).
#[derive(Debug, Clone, PartialEq)]
pub struct Range(pub Vec<f64>);

impl FromStr for Range {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        match parts.as_slice() {
            [v] => Ok(Range(vec![parse_scalar(v)?])),
            [lo, hi, third] => {
                let (lo, hi) = (parse_scalar(lo)?, parse_scalar(hi)?);
                if !(lo <= hi) {
                    return Err(Error::Parse(format!("range '{text}' has lo > hi")));
                }
                let third = third.trim();
                // an integer too large to be a step counts intervals
                if let Ok(n) = third.parse::<usize>() {
                    if n >= 2 && n as f64 > hi - lo {
                        let pts = (0..=n)
                            .map(|i| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 })
                            .collect();
                        return Ok(Range(pts));
                    }
                }
                let step = parse_scalar(third)?;
                if !(step > 0.0) {
                    return Err(Error::Parse(format!("range '{text}' needs a positive step")));
                }
                let count = ((hi - lo) / step + 0.5 - 1e-9).floor() as usize + 1;
                if count > 1_000_000 {
                    return Err(Error::Parse(format!("range '{text}' has too many points")));
                }
                Ok(Range((0..count).map(|i| lo + step * i as f64).collect()))
            }
            _ => Err(Error::Parse(format!(
                "range '{text}' must be a value or lo:hi:step"
            ))),
        }
    }
}

impl Range {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// What a scan tabulates.
#[derive(Debug, Clone, PartialEq)]
pub enum Subject {
    /// Closed-form W-state indicator for each listed `n`, over `q`.
    WIndicator(Vec<usize>),
    /// `4 ⊗ 2 ⊗ 2` residual over `q` at a fixed angle, or over `θ × q`.
    Example3(Option<f64>),
    Example4,
    Example5,
    /// Three-qutrit and `3 ⊗ 2 ⊗ 2` residuals side by side over `q`.
    Example45,
    /// Generalized-W indicator over `θ × φ` at each `q`; `standard` picks
    /// the `cosθ |100>` amplitude.
    GeneralizedW { standard: bool },
    /// Derivative values over `x × q` (`C × q` for the second derivative
    /// in `C`).
    Derivative(DerivativeKind),
    /// Zeros in `q` of `d²f_q(C²)/dC²` for each `C`, in `(0, 1)` or `[4, 5]`.
    D2Zero { upper: bool },
    /// Zeros in `q` of `l_q(x)` over the window, for each `x`.
    LZero,
    /// Zeros in `q` of `g_q(x)` over the window, for each `x`.
    GZero,
}

impl FromStr for Subject {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (name, arg) = match text.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (text, None),
        };
        let bad = || Error::Parse(format!("unknown scan subject '{text}'"));
        Ok(match (name, arg) {
            ("w-indicator", Some(ns)) => {
                let ns = ns
                    .split(',')
                    .map(|n| match n.trim().parse::<usize>() {
                        Ok(n) if n >= 3 => Ok(n),
                        _ => Err(Error::Parse(format!("bad qubit count '{n}' in '{text}'"))),
                    })
                    .collect::<Result<_>>()?;
                Subject::WIndicator(ns)
            }
            ("example3", a) => Subject::Example3(a.map(parse_scalar).transpose()?),
            ("example4", None) => Subject::Example4,
            ("example5", None) => Subject::Example5,
            ("example4-5", None) => Subject::Example45,
            ("generalized-w", None) => Subject::GeneralizedW { standard: false },
            ("generalized-w-std", None) => Subject::GeneralizedW { standard: true },
            ("l_q", None) => Subject::Derivative(DerivativeKind::Lq),
            ("g_q", None) => Subject::Derivative(DerivativeKind::Gq),
            ("d2", None) => Subject::Derivative(DerivativeKind::D2WrtC),
            ("d2-zero", Some("lower")) => Subject::D2Zero { upper: false },
            ("d2-zero", Some("upper")) => Subject::D2Zero { upper: true },
            ("l-zero", None) => Subject::LZero,
            ("g-zero", None) => Subject::GZero,
            _ => return Err(bad()),
        })
    }
}

/// Grids supplied to a scan; which ones are required depends on the
/// subject.
#[derive(Debug, Clone, Default)]
pub struct ScanAxes {
    pub q: Option<Range>,
    pub theta: Option<Range>,
    pub phi: Option<Range>,
    /// `x` for `l_q`, `g_q` and their zero sets; `C` for `d2` subjects.
    pub x: Option<Range>,
}

impl ScanAxes {
    fn need<'a>(axis: &'a Option<Range>, flag: &str) -> Result<&'a [f64]> {
        axis.as_ref()
            .map(Range::values)
            .ok_or_else(|| Error::Domain(format!("this subject needs --{flag}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(header: &[&str], rows: Vec<Vec<f64>>) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows,
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(vec![]);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&v| format_float(v))).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv().map_err(|_| fmt::Error)?)
    }
}

/// Closed forms that exclude `q = 1` give `nan` there.
fn or_nan(r: Result<f64>) -> Result<f64> {
    match r {
        Err(Error::Domain(_)) => Ok(f64::NAN),
        other => other,
    }
}

fn qparam(q: f64) -> Result<QParam> {
    QParam::new(q)
}

/// Zeros of `f` on `[lo, hi]`: sign changes on an `n`-point subgrid,
/// refined by Brent's method. Infinite values count by their sign.
pub fn zeros_in(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    let clamped = |q: f64| f(q).clamp(-1e300, 1e300);
    let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&q| clamped(q)).collect();
    let mut out: Vec<f64> = Vec::new();
    for i in 0..n - 1 {
        let (a, b) = (vals[i], vals[i + 1]);
        if a.is_nan() || b.is_nan() {
            continue;
        }
        if a == 0.0 {
            if out.last().is_none_or(|&z| z != grid[i]) {
                out.push(grid[i]);
            }
        } else if b != 0.0 && a.signum() != b.signum() {
            out.push(crate::analysis::find_root_q(clamped, grid[i], grid[i + 1])?);
        }
    }
    if vals[n - 1] == 0.0 {
        out.push(grid[n - 1]);
    }
    Ok(out)
}

const ZERO_GRID: usize = 401;

/// Runs `subject` over `axes`. Rows are computed in parallel and kept in
/// grid order.
pub fn run_scan(subject: &Subject, axes: &ScanAxes) -> Result<Table> {
    match subject {
        Subject::WIndicator(ns) => {
            let qs = ScanAxes::need(&axes.q, "q")?;
            let pts: Vec<(usize, f64)> = ns.iter().flat_map(|&n| qs.iter().map(move |&q| (n, q))).collect();
            let rows = pts
                .par_iter()
                .map(|&(n, q)| Ok(vec![n as f64, q, w_indicator_closed_form(n, qparam(q)?)?]))
                .collect::<Result<_>>()?;
            Ok(Table::new(&["n", "q", "indicator"], rows))
        }
        Subject::Example3(Some(theta)) => {
            let qs = ScanAxes::need(&axes.q, "q")?;
            let rows = qs
                .iter()
                .map(|&q| Ok(vec![*theta, q, or_nan(example3_residual(*theta, qparam(q)?))?]))
                .collect::<Result<_>>()?;
            Ok(Table::new(&["theta", "q", "residual"], rows))
        }
        Subject::Example3(None) => {
            let qs = ScanAxes::need(&axes.q, "q")?;
            let thetas = ScanAxes::need(&axes.theta, "theta")?;
            let pts: Vec<(f64, f64)> = thetas.iter().flat_map(|&t| qs.iter().map(move |&q| (t, q))).collect();
            let rows = pts
                .par_iter()
                .map(|&(t, q)| Ok(vec![t, q, or_nan(example3_residual(t, qparam(q)?))?]))
                .collect::<Result<_>>()?;
            Ok(Table::new(&["theta", "q", "residual"], rows))
        }
        Subject::Example4 | Subject::Example5 | Subject::Example45 => {
            let qs = ScanAxes::need(&axes.q, "q")?;
            let rows = qs
                .iter()
                .map(|&q| {
                    let p = qparam(q)?;
                    let e4 = or_nan(example4_residual(p))?;
                    let e5 = or_nan(example5_residual(p))?;
                    Ok(match subject {
                        Subject::Example4 => vec![q, e4],
                        Subject::Example5 => vec![q, e5],
                        _ => vec![q, e4, e5],
                    })
                })
                .collect::<Result<_>>()?;
            let header: &[&str] = match subject {
                Subject::Example4 | Subject::Example5 => &["q", "residual"],
                _ => &["q", "example4", "example5"],
            };
            Ok(Table::new(header, rows))
        }
        Subject::GeneralizedW { standard } => {
            let qs = ScanAxes::need(&axes.q, "q")?;
            let thetas = ScanAxes::need(&axes.theta, "theta")?;
            let phis = ScanAxes::need(&axes.phi, "phi")?;
            for &q in qs {
                qparam(q)?.require_analytic()?;
            }
            let pts: Vec<(f64, f64, f64)> = qs
                .iter()
                .flat_map(|&q| thetas.iter().flat_map(move |&t| phis.iter().map(move |&p| (q, t, p))))
                .collect();
            let rows = pts
                .par_iter()
                .map(|&(q, t, p)| {
                    let state = if *standard { generalized_w_standard(t, p) } else { generalized_w(t, p) };
                    let value = match state {
                        Ok(s) => tee_sq_residual(&s, 0, qparam(q)?)?.residual,
                        Err(Error::Degenerate(_)) => f64::NAN,
                        Err(e) => return Err(e),
                    };
                    Ok(vec![q, t, p, value])
                })
                .collect::<Result<_>>()?;
            Ok(Table::new(&["q", "theta", "phi", "indicator"], rows))
        }
        Subject::Derivative(kind) => {
            let qs = ScanAxes::need(&axes.q, "q")?;
            let xs = ScanAxes::need(&axes.x, "x")?;
            let pts: Vec<(f64, f64)> = qs.iter().flat_map(|&q| xs.iter().map(move |&x| (x, q))).collect();
            let rows = pts
                .par_iter()
                .map(|&(x, q)| Ok(vec![x, q, kind.eval(x, qparam(q)?)?]))
                .collect::<Result<_>>()?;
            let first = if *kind == DerivativeKind::D2WrtC { "c" } else { "x" };
            Ok(Table::new(&[first, "q", kind.name()], rows))
        }
        Subject::D2Zero { upper } => {
            let cs = ScanAxes::need(&axes.x, "c")?;
            let (lo, hi) = if *upper { (4.0, 5.0) } else { (0.01, 0.999) };
            let rows = cs
                .par_iter()
                .map(|&c| {
                    d2_fq_wrt_c(qparam(0.5)?, c)?;
                    let zeros = zeros_in(|q| d2_fq_wrt_c(QParam::new(q).expect("q > 0"), c).unwrap_or(f64::NAN), lo, hi, ZERO_GRID)?;
                    Ok(vec![c, zeros.first().copied().unwrap_or(f64::NAN)])
                })
                .collect::<Result<_>>()?;
            Ok(Table::new(&["c", "q_zero"], rows))
        }
        Subject::LZero | Subject::GZero => {
            let xs = ScanAxes::need(&axes.x, "x")?;
            let eval = if *subject == Subject::LZero { l_q } else { g_q };
            let rows = xs
                .par_iter()
                .map(|&x| {
                    eval(x, qparam(1.5)?)?;
                    let zeros = zeros_in(
                        |q| eval(x, QParam::new(q).expect("q > 0")).unwrap_or(f64::NAN),
                        Q_C1,
                        Q_C2,
                        ZERO_GRID,
                    )?;
                    let z = |i: usize| zeros.get(i).copied().unwrap_or(f64::NAN);
                    Ok(vec![x, z(0), z(1), zeros.len() as f64])
                })
                .collect::<Result<_>>()?;
            Ok(Table::new(&["x", "q_zero_1", "q_zero_2", "zero_count"], rows))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format() {
        assert_eq!(format_float(0.25), "0.25");
        assert_eq!(format_float(4.0 / 9.0), "0.444444444444");
        assert_eq!(format_float(-1.0 / 18.0), "-0.0555555555556");
        assert_eq!(format_float(1e-7), "1e-07");
        assert_eq!(format_float(-2.5e-12), "-2.5e-12");
        assert_eq!(format_float(123456789012345.0), "1.23456789012e+14");
        assert_eq!(format_float(100.0), "100");
        assert_eq!(format_float(0.7 + 72.0 * 0.05), "4.3");
        assert_eq!(format_float(f64::NAN), "nan");
        assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_float(0.0), "0");
    }

    #[test]
    fn ranges() {
        let r: Range = "0.7:4.3:0.05".parse().unwrap();
        assert_eq!(r.values().len(), 73);
        assert!((r.values()[72] - 4.3).abs() < 1e-12);
        let r: Range = "0:2π:64".parse().unwrap();
        assert_eq!(r.values().len(), 65);
        assert!((r.values()[16] - PI / 2.0).abs() < 1e-15);
        assert_eq!(r.values()[64], 2.0 * PI);
        let r: Range = "0:pi/2:2".parse().unwrap();
        assert_eq!(r.values(), &[0.0, PI / 4.0, PI / 2.0]);
        let r: Range = "3pi/2".parse().unwrap();
        assert!((r.values()[0] - 1.5 * PI).abs() < 1e-15);
        let r: Range = "0:1:0.3".parse().unwrap();
        assert_eq!(r.values().len(), 4);
        let r: Range = "0:10:1".parse().unwrap();
        assert_eq!(r.values().len(), 11);
        let r: Range = "0:10:2".parse().unwrap();
        assert_eq!(r.values(), &[0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        assert!("1:0:0.1".parse::<Range>().is_err());
        assert!("0:1:-0.1".parse::<Range>().is_err());
        assert!("0:1".parse::<Range>().is_err());
        assert!("abc".parse::<Range>().is_err());
    }

    #[test]
    fn subjects() {
        assert_eq!("w-indicator:3,6".parse::<Subject>().unwrap(), Subject::WIndicator(vec![3, 6]));
        assert_eq!("example3:0.785".parse::<Subject>().unwrap(), Subject::Example3(Some(0.785)));
        assert_eq!("example3".parse::<Subject>().unwrap(), Subject::Example3(None));
        assert!("w-indicator:2".parse::<Subject>().is_err());
        assert!("nope".parse::<Subject>().is_err());
    }

    fn axes(q: &str) -> ScanAxes {
        ScanAxes {
            q: Some(q.parse().unwrap()),
            ..Default::default()
        }
    }

    #[test]
    fn example4_sign_change_brackets_root() {
        let t = run_scan(&Subject::Example4, &axes("0.7:4.3:0.01")).unwrap();
        let qs = t.column("q").unwrap();
        let v = t.column("residual").unwrap();
        let cross: Vec<f64> = (0..v.len() - 1)
            .filter(|&i| v[i] > 0.0 && v[i + 1] < 0.0)
            .map(|i| qs[i])
            .collect();
        assert_eq!(cross.len(), 1);
        assert!(cross[0] < 1.619 && cross[0] + 0.011 > 1.619);
        assert!(v.iter().any(|x| x.is_nan()));
    }

    #[test]
    fn w_indicator_rows() {
        let t = run_scan(&Subject::WIndicator(vec![3, 11]), &axes("0.7:4.3:0.05")).unwrap();
        assert_eq!(t.rows.len(), 146);
        assert!(t.column("indicator").unwrap().iter().all(|&v| v > 0.0));
        assert!(t.to_csv().unwrap().starts_with("n,q,indicator\n3,0.7,"));
    }

    #[test]
    fn generalized_w_grid() {
        let ax = ScanAxes {
            q: Some("2".parse().unwrap()),
            theta: Some("0:π:8".parse().unwrap()),
            phi: Some("0:2π:8".parse().unwrap()),
            x: None,
        };
        let t = run_scan(&Subject::GeneralizedW { standard: false }, &ax).unwrap();
        assert_eq!(t.rows.len(), 81);
        for row in &t.rows {
            assert!(row[3].is_nan() || row[3] >= -1e-8);
        }
        let bad = ScanAxes { q: Some("5".parse().unwrap()), ..ax };
        assert!(run_scan(&Subject::GeneralizedW { standard: false }, &bad).is_err());
    }

    #[test]
    fn zero_sets() {
        let ax = ScanAxes {
            x: Some("0.1:0.9:4".parse().unwrap()),
            ..Default::default()
        };
        let g = run_scan(&Subject::GZero, &ax).unwrap();
        for row in &g.rows {
            assert_eq!(row[3], 2.0);
            assert!((row[1] - 2.0).abs() < 1e-9 && (row[2] - 3.0).abs() < 1e-9, "{row:?}");
        }
        let l = run_scan(&Subject::LZero, &ax).unwrap();
        assert!(l.rows.iter().all(|r| r[3] == 0.0));
        let d = run_scan(&Subject::D2Zero { upper: false }, &ax).unwrap();
        let zs = d.column("q_zero").unwrap();
        assert!(zs.windows(2).all(|w| w[0] < w[1]));
        assert!(zs.iter().all(|&z| z < Q_C1));
        assert!(run_scan(&Subject::LZero, &ScanAxes::default()).is_err());
    }

    #[test]
    fn deterministic_csv() {
        let ax = ScanAxes {
            q: Some("0.7:4.3:0.3".parse().unwrap()),
            x: Some("0:0.999:10".parse().unwrap()),
            ..Default::default()
        };
        let a = run_scan(&Subject::Derivative(DerivativeKind::Lq), &ax).unwrap().to_csv().unwrap();
        let b = run_scan(&Subject::Derivative(DerivativeKind::Lq), &ax).unwrap().to_csv().unwrap();
        assert_eq!(a, b);
    }
}
