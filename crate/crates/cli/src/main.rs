//! `tsallis`: Tsallis-q entanglement and monogamy from the command line.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 numerical-domain error,
//! 3 failed verification.

mod catalog;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use tsallis_monogamy::measures::{
    concurrence_pure, concurrence_two_qubit, tee_2xd, tee_pure, tee_two_qubit, tsallis_entropy, Bound,
    ConcurrenceValue, QParam,
};
use tsallis_monogamy::monogamy::{alpha_residual, ckw_check, hierarchical_check, indicator, tee_sq_residual, MonogamyReport};
use tsallis_monogamy::qstate::{load_state, save_state, state_to_json, DensityMatrix, State};
use tsallis_monogamy::roof::{roof_concurrence, roof_tee, RoofConfig};
use tsallis_monogamy::scan::{format_float, run_scan, Range, ScanAxes, Subject};
use tsallis_monogamy::verify::{run_suite, Suite};
use tsallis_monogamy::Error;

#[derive(Parser, Debug)]
#[command(name = "tsallis", version, about = "Tsallis-q entanglement, monogamy checks and figure data")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Tsallis-q entropy of a state or of its reduction to --cut.
    Entropy {
        #[command(flatten)]
        input: Input,
        #[arg(long, allow_negative_numbers = true)]
        q: f64,
        /// Subsystems to keep, e.g. `0` or `0,2`; omit for the whole state.
        #[arg(long, value_delimiter = ',')]
        cut: Vec<usize>,
        #[command(flatten)]
        format: Format,
    },
    /// Concurrence across --cut (pure) or of a 2 ⊗ d mixed state.
    Concurrence {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        cut: Vec<usize>,
        #[command(flatten)]
        roof: Roof,
        #[command(flatten)]
        format: Format,
    },
    /// Tsallis-q entanglement across --cut (pure) or of a 2 ⊗ d mixed state.
    Tee {
        #[command(flatten)]
        input: Input,
        #[arg(long, allow_negative_numbers = true)]
        q: f64,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        cut: Vec<usize>,
        /// Accept any q > 0 and report f_q(C²) as a lower bound.
        #[arg(long)]
        force_q: bool,
        #[command(flatten)]
        roof: Roof,
        #[command(flatten)]
        format: Format,
    },
    /// Monogamy residual of a multi-qubit pure state: squared TEE with
    /// --q, power-α TEE with --alpha, hierarchical with --k, CKW without --q.
    Monogamy {
        #[command(flatten)]
        input: Input,
        #[arg(long, allow_negative_numbers = true)]
        q: Option<f64>,
        #[arg(long, default_value_t = 0)]
        focus: usize,
        #[arg(long, requires = "q", conflicts_with = "k", allow_negative_numbers = true)]
        alpha: Option<f64>,
        #[arg(long, requires = "q")]
        k: Option<usize>,
        #[command(flatten)]
        roof: Roof,
        #[command(flatten)]
        format: Format,
    },
    /// Residual-tangle indicator with the first qubit as focus.
    Indicator {
        #[command(flatten)]
        input: Input,
        #[arg(long, allow_negative_numbers = true)]
        q: f64,
        #[command(flatten)]
        roof: Roof,
        #[command(flatten)]
        format: Format,
    },
    /// Tabulate a subject over grids and write CSV.
    Scan {
        /// w-indicator:N[,N...], example3[:θ], example4, example5, example4-5,
        /// generalized-w, generalized-w-std, l_q, g_q, d2, d2-zero:lower,
        /// d2-zero:upper, l-zero, g-zero.
        #[arg(long)]
        subject: String,
        /// Values as `v`, `lo:hi:step` or `lo:hi:n` (n intervals when the integer n exceeds hi - lo).
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        theta: Option<String>,
        #[arg(long)]
        phi: Option<String>,
        #[arg(long, conflicts_with = "c")]
        x: Option<String>,
        /// Concurrence grid for the d2 subjects (same as --x).
        #[arg(long)]
        c: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Accepted for symmetry with other verbs; scans always emit CSV.
        #[arg(long)]
        csv: bool,
    },
    /// Run verification suites; exit 3 if any check fails.
    Verify {
        /// appendix-a, appendix-b, appendix-c, appendix-d, theorem3-sweep,
        /// examples, roof or all.
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a catalog state as JSON.
    State {
        #[arg(long)]
        emit: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Input {
    /// Catalog state as name:params, e.g. w:3, ghz:4, example3:0.785.
    #[arg(long)]
    state: Option<String>,
    /// State JSON file.
    #[arg(long = "in")]
    input: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Roof {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    restarts: usize,
}

impl Roof {
    fn config(&self) -> RoofConfig {
        RoofConfig::with_seed(self.seed).restarts(self.restarts)
    }
}

#[derive(Args, Debug)]
#[group(multiple = false)]
struct Format {
    #[arg(long)]
    csv: bool,
    #[arg(long)]
    json: bool,
}

/// A failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    fn with_context(flag: &str, value: &str, e: Error) -> Self {
        let code = match e {
            Error::Parse(_) => 1,
            _ => 2,
        };
        Self {
            code,
            message: format!("{flag} {value}: {e}"),
        }
    }
}

type Outcome = std::result::Result<String, Failure>;

fn context(flag: &str, value: impl std::fmt::Display) -> impl FnOnce(Error) -> Failure {
    let (flag, value) = (flag.to_string(), value.to_string());
    move |e| Failure::with_context(&flag, &value, e)
}

fn qparam(q: f64) -> std::result::Result<QParam, Failure> {
    QParam::new(q).map_err(context("--q", q))
}

impl Input {
    fn load(&self, seed: u64) -> std::result::Result<State, Failure> {
        match (&self.state, &self.input) {
            (Some(spec), _) => catalog::build(spec, seed).map_err(context("--state", spec)),
            (_, Some(path)) => load_state(path).map_err(|e| match e {
                Error::Io(io) => Failure::usage(format!("--in {}: {io}", path.display())),
                other => Failure::with_context("--in", &path.display().to_string(), other),
            }),
            _ => Err(Failure::usage("one of --state or --in is required")),
        }
    }
}

fn cut_label(cut: &[usize]) -> String {
    cut.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// Renders one scalar result.
fn scalar(format: &Format, name: &str, value: f64, note: Option<&str>) -> String {
    if format.json {
        let mut v = json!({ name: value });
        if let Some(n) = note {
            v["bound"] = json!(n);
        }
        format!("{v}\n")
    } else if format.csv {
        match note {
            Some(n) => format!("{name},bound\n{},{n}\n", format_float(value)),
            None => format!("{name}\n{}\n", format_float(value)),
        }
    } else {
        match note {
            Some(n) => format!("{value:.6} ({})\n", n.replace('_', " ")),
            None => format!("{value:.6}\n"),
        }
    }
}

fn bound_note(b: Bound) -> Option<&'static str> {
    match b {
        Bound::Exact => None,
        Bound::LowerBound => Some("lower_bound"),
    }
}

fn mixed_first_qubit(rho: &DensityMatrix, cut: &[usize]) -> std::result::Result<(), Failure> {
    if cut != [0] {
        return Err(Failure {
            code: 2,
            message: format!("--cut {}: mixed states are measured across 0 | rest", cut_label(cut)),
        });
    }
    if rho.dims()[0] != 2 {
        return Err(Failure {
            code: 2,
            message: format!("--cut 0: mixed input needs a qubit first, got dims {:?}", rho.dims()),
        });
    }
    Ok(())
}

fn entropy(input: &Input, q: f64, cut: &[usize], format: &Format) -> Outcome {
    let q = qparam(q)?;
    let state = input.load(0)?;
    let rho = state.density();
    let rho = if cut.is_empty() {
        rho
    } else {
        rho.partial_trace(cut).map_err(context("--cut", cut_label(cut)))?
    };
    Ok(scalar(format, "entropy", tsallis_entropy(&rho, q), None))
}

fn concurrence(input: &Input, cut: &[usize], roof: &Roof, format: &Format) -> Outcome {
    match input.load(roof.seed)? {
        State::Pure(psi) => {
            let c = concurrence_pure(&psi, cut).map_err(context("--cut", cut_label(cut)))?;
            Ok(scalar(format, "concurrence", c.c, None))
        }
        State::Mixed(rho) => {
            mixed_first_qubit(&rho, cut)?;
            if rho.dims() == [2, 2] {
                let c = concurrence_two_qubit(&rho).map_err(context("--in", "state"))?;
                return Ok(scalar(format, "concurrence", c.c, None));
            }
            let r = roof_concurrence(&rho, &roof.config()).map_err(context("--state", "mixed"))?;
            Ok(scalar(format, "concurrence", r.value, Some("upper_bound")))
        }
    }
}

fn tee(input: &Input, q: f64, cut: &[usize], force: bool, roof: &Roof, format: &Format) -> Outcome {
    let qp = qparam(q)?;
    match input.load(roof.seed)? {
        State::Pure(psi) => {
            let v = tee_pure(&psi, cut, qp).map_err(context("--cut", cut_label(cut)))?;
            Ok(scalar(format, "tee", v, None))
        }
        State::Mixed(rho) => {
            mixed_first_qubit(&rho, cut)?;
            if rho.dims() == [2, 2] {
                let t = tee_two_qubit(&rho, qp, force).map_err(context("--q", q))?;
                return Ok(scalar(format, "tee", t.value, bound_note(t.bound)));
            }
            let cfg = roof.config();
            if force {
                let c = roof_concurrence(&rho, &cfg).map_err(context("--state", "mixed"))?;
                let cv = ConcurrenceValue { c: c.value, lambdas: None };
                let t = tee_2xd(&rho, qp, &cv).map_err(context("--q", q))?;
                return Ok(scalar(format, "tee", t.value, Some("lower_bound")));
            }
            let r = roof_tee(&rho, &[0], qp, &cfg).map_err(context("--q", q))?;
            Ok(scalar(format, "tee", r.value, Some("upper_bound")))
        }
    }
}

fn report(format: &Format, r: &MonogamyReport) -> String {
    if format.json {
        return format!("{}\n", serde_json::to_string(r).expect("report serializes"));
    }
    let terms = r.terms.iter().map(|t| format_float(*t)).collect::<Vec<_>>().join(";");
    if format.csv {
        return format!(
            "q,focus,lhs,terms,residual,satisfied,upper_bound\n{},{},{},{},{},{},{}\n",
            r.q.map_or("".into(), format_float),
            r.focus,
            format_float(r.lhs),
            terms,
            format_float(r.residual),
            r.satisfied,
            r.upper_bound
        );
    }
    let mut s = String::new();
    if let Some(q) = r.q {
        writeln!(s, "q         {}", format_float(q)).unwrap();
    }
    writeln!(s, "focus     {}", r.focus).unwrap();
    writeln!(s, "lhs       {:.6}", r.lhs).unwrap();
    let terms: Vec<String> = r.terms.iter().map(|t| format!("{t:.6}")).collect();
    writeln!(s, "terms     {}", terms.join(" ")).unwrap();
    writeln!(s, "residual  {:.6}{}", r.residual, if r.upper_bound { " (upper bound)" } else { "" }).unwrap();
    writeln!(s, "{}", if r.satisfied { "SATISFIED" } else { "VIOLATED" }).unwrap();
    s
}

fn pure_input(input: &Input, seed: u64) -> std::result::Result<tsallis_monogamy::qstate::PureState, Failure> {
    let state = input.load(seed)?;
    match state {
        State::Pure(psi) => Ok(psi),
        State::Mixed(rho) => rho.as_pure(1e-10).ok_or(Failure {
            code: 2,
            message: "monogamy needs a pure state; use `indicator` for mixed input".into(),
        }),
    }
}

#[allow(clippy::too_many_arguments)]
fn monogamy(
    input: &Input,
    q: Option<f64>,
    focus: usize,
    alpha: Option<f64>,
    k: Option<usize>,
    roof: &Roof,
    format: &Format,
) -> Outcome {
    let psi = pure_input(input, roof.seed)?;
    let focus_ctx = context("--focus", focus);
    let r = match (q, alpha, k) {
        (None, _, _) => ckw_check(&psi, focus).map_err(focus_ctx)?,
        (Some(q), Some(a), _) => alpha_residual(&psi, focus, qparam(q)?, a).map_err(context("--alpha", a))?,
        (Some(q), None, Some(k)) => {
            hierarchical_check(&psi, focus, k, qparam(q)?, &roof.config()).map_err(context("--k", k))?
        }
        (Some(q), None, None) => tee_sq_residual(&psi, focus, qparam(q)?).map_err(focus_ctx)?,
    };
    Ok(report(format, &r))
}

fn indicator_verb(input: &Input, q: f64, roof: &Roof, format: &Format) -> Outcome {
    let qp = qparam(q)?;
    let state = input.load(roof.seed)?;
    let r = indicator(&state, qp, &roof.config()).map_err(context("--q", q))?;
    Ok(report(format, &r))
}

fn range(flag: &str, v: &Option<String>) -> std::result::Result<Option<Range>, Failure> {
    v.as_ref()
        .map(|s| s.parse::<Range>().map_err(|e| Failure::usage(format!("{flag} {s}: {e}"))))
        .transpose()
}

#[allow(clippy::too_many_arguments)]
fn scan(
    subject: &str,
    q: &Option<String>,
    theta: &Option<String>,
    phi: &Option<String>,
    x: &Option<String>,
    c: &Option<String>,
    out: &Option<PathBuf>,
) -> Outcome {
    let parsed: Subject = subject
        .parse()
        .map_err(|e| Failure::usage(format!("--subject {subject}: {e}")))?;
    let axes = ScanAxes {
        q: range("--q", q)?,
        theta: range("--theta", theta)?,
        phi: range("--phi", phi)?,
        x: if c.is_some() { range("--c", c)? } else { range("--x", x)? },
    };
    let table = run_scan(&parsed, &axes).map_err(context("--subject", subject))?;
    let csv = table.to_csv().map_err(context("--subject", subject))?;
    match out {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|e| Failure {
                code: 2,
                message: format!("--out {}: {e}", path.display()),
            })?;
            Ok(format!("wrote {} rows to {}\n", table.rows.len(), path.display()))
        }
        None => Ok(csv),
    }
}

fn verify(suite: &str, seed: u64) -> Outcome {
    let suites: Vec<Suite> = if suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![suite.parse().map_err(|e| Failure::usage(format!("verify {suite}: {e}")))?]
    };
    let mut text = String::new();
    let mut ok = true;
    for s in suites {
        let r = run_suite(s, seed).map_err(context("verify", s.name()))?;
        ok &= r.passed();
        writeln!(text, "{r}").unwrap();
    }
    if ok {
        Ok(text)
    } else {
        Err(Failure { code: 3, message: text })
    }
}

fn state(emit: &str, out: &Option<PathBuf>, seed: u64) -> Outcome {
    let s = catalog::build(emit, seed).map_err(context("--emit", emit))?;
    match out {
        Some(path) => {
            save_state(path, &s).map_err(context("--out", path.display()))?;
            Ok(format!("wrote {emit} to {}\n", path.display()))
        }
        None => Ok(state_to_json(&s)),
    }
}

fn run(cli: Cli) -> Outcome {
    match &cli.verb {
        Verb::Entropy { input, q, cut, format } => entropy(input, *q, cut, format),
        Verb::Concurrence { input, cut, roof, format } => concurrence(input, cut, roof, format),
        Verb::Tee {
            input,
            q,
            cut,
            force_q,
            roof,
            format,
        } => tee(input, *q, cut, *force_q, roof, format),
        Verb::Monogamy {
            input,
            q,
            focus,
            alpha,
            k,
            roof,
            format,
        } => monogamy(input, *q, *focus, *alpha, *k, roof, format),
        Verb::Indicator { input, q, roof, format } => indicator_verb(input, *q, roof, format),
        Verb::Scan {
            subject,
            q,
            theta,
            phi,
            x,
            c,
            out,
            csv: _,
        } => scan(subject, q, theta, phi, x, c, out),
        Verb::Verify { suite, seed } => verify(suite, *seed),
        Verb::State { emit, out, seed } => state(emit, out, *seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            if f.code == 3 {
                print!("{}", f.message);
                eprintln!("verification failed");
            } else {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}
