//! Command-line front end.
//!
//! Exit codes: 0 on success (including pass and evidence-only verdicts),
//! 1 when a check or scan finds a violation, 2 when an iteration or root
//! search fails to converge, 3 for usage and configuration errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::catalog::{self, Param, ResolveOptions};
use crate::error::MeanError;
use crate::exec::Execution;
use crate::taylor::{self, TaylorPolynomial};
use crate::type1::{self, ToleranceConfig};
use crate::type2;
use crate::verify::{self, ScanConfig, ScanReport, Verdict, CLOSED_FORM_TOL, ITERATED_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_CONVERGENCE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Plain,
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Parser)]
#[command(name = "invmean", version)]
#[command(about = "Invariant means in three variables: construction, extraction, Taylor data and checks")]
struct Cli {
    /// key=value file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output format [default: plain, or the --out extension for scans].
    #[arg(long, global = true)]
    format: Option<Format>,

    /// Relative stopping tolerance of the iterations.
    #[arg(long, global = true)]
    rel_tol: Option<f64>,

    #[arg(long, global = true)]
    max_iter: Option<usize>,

    /// Let constructed means use a base mean not flagged isotone.
    #[arg(long, global = true)]
    allow_non_isotone: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a two- or three-variable mean.
    Eval {
        #[arg(long)]
        mean: String,
        #[arg(long)]
        args: String,
    },
    /// Run the triple recursion of a two-variable mean.
    Construct {
        #[arg(long)]
        base: String,
        #[arg(long)]
        args: String,
        /// Print every state of the recursion.
        #[arg(long)]
        trace: bool,
    },
    /// Extract the two-variable mean of a three-variable mean by fixed point.
    Extract {
        #[arg(long)]
        mean3: String,
        #[arg(long)]
        args: String,
        #[arg(long, default_value = "A2")]
        seed_mean: String,
    },
    /// Evaluate the symmetric three-variable extension of `base` built from `n`.
    Extend {
        #[arg(long)]
        base: String,
        #[arg(long)]
        n: String,
        #[arg(long)]
        args: String,
    },
    /// Evaluate the diagonal Taylor polynomial of the invariant mean of `base`.
    Taylor {
        #[arg(long)]
        base: String,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        args: String,
        /// Evaluate on the plane x+y+z=3 and scale back (homogeneous bases).
        #[arg(long)]
        rescale: bool,
    },
    /// Print the signed invariance residual; exit 1 when it exceeds tolerance.
    Check {
        #[arg(long = "type", value_parser = ["1", "2"])]
        kind: String,
        #[arg(long)]
        mean3: String,
        #[arg(long)]
        mean2: String,
        #[arg(long)]
        args: String,
    },
    /// Run a sampled verification and write its report.
    Scan {
        #[arg(long)]
        claim: String,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Sampling box as lo:hi.
        #[arg(long = "box")]
        bounds: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Evaluate samples on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Print a tour of headline values.
    Demo,
}

/// Settings shared by all commands after merging defaults, the config file
/// and flags, in that order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CliConfig {
    pub tolerance: ToleranceConfig,
    pub scan: ScanConfig,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub allow_non_isotone: bool,
}

/// Keys accepted in a config file.
pub const CONFIG_KEYS: &[&str] = &[
    "rel_tol",
    "max_iter",
    "box",
    "samples",
    "seed",
    "tolerance",
    "format",
    "out",
    "allow_non_isotone",
    "execution",
];

impl CliConfig {
    /// Applies `key = value` lines. Blank lines and `#` comments are ignored.
    pub fn apply_file_text(&mut self, text: &str) -> Result<(), String> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key=value", n + 1))?;
            self.set(k.trim(), v.trim())
                .map_err(|e| format!("config line {}: {e}", n + 1))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let bad = || format!("bad value {value:?} for {key}");
        match key {
            "rel_tol" => self.tolerance.rel_tol = value.parse().map_err(|_| bad())?,
            "max_iter" => self.tolerance.max_iter = value.parse().map_err(|_| bad())?,
            "box" => (self.scan.lo, self.scan.hi) = parse_box(value)?,
            "samples" => self.scan.samples = value.parse().map_err(|_| bad())?,
            "seed" => self.scan.seed = value.parse().map_err(|_| bad())?,
            "tolerance" => self.scan.tolerance = value.parse().map_err(|_| bad())?,
            "format" => self.format = Some(value.parse()?),
            "out" => self.out = Some(PathBuf::from(value)),
            "allow_non_isotone" => self.allow_non_isotone = value.parse().map_err(|_| bad())?,
            "execution" => {
                self.scan.execution = match value {
                    "sequential" => Execution::Sequential,
                    "parallel" => Execution::Parallel,
                    _ => return Err(bad()),
                }
            }
            _ => {
                return Err(format!(
                    "unknown key {key:?}; expected one of {}",
                    CONFIG_KEYS.join(", ")
                ))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        self.tolerance.validate().map_err(|e| e.to_string())?;
        self.scan.validate().map_err(|e| e.to_string())
    }

    fn resolve_options(&self) -> ResolveOptions {
        ResolveOptions {
            tolerance: self.tolerance,
            allow_non_isotone: self.allow_non_isotone,
        }
    }
}

fn parse_box(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("box must be lo:hi, got {s:?}"))?;
    let lo = Param::parse(lo).map_err(|e| e.to_string())?.value;
    let hi = Param::parse(hi).map_err(|e| e.to_string())?.value;
    Ok((lo, hi))
}

fn parse_args(s: &str, allowed: &[usize]) -> Result<Vec<f64>, Failure> {
    let xs = s
        .split(',')
        .map(|t| Param::parse(t).map(|p| p.value))
        .collect::<Result<Vec<f64>, _>>()?;
    if !allowed.contains(&xs.len()) {
        let want: Vec<String> = allowed.iter().map(|n| n.to_string()).collect();
        return Err(Failure::Usage(format!(
            "--args takes {} comma-separated values, got {}",
            want.join(" or "),
            xs.len()
        )));
    }
    Ok(xs)
}

enum Failure {
    Usage(String),
    Mean(MeanError),
}

impl From<MeanError> for Failure {
    fn from(e: MeanError) -> Self {
        Failure::Mean(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Plain-mode number: six decimals, switching to exponent form for tiny
/// magnitudes so residuals stay readable.
pub fn plain_num(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-3 {
        format!("{x:.6e}")
    } else {
        format!("{x:.6}")
    }
}

/// Machine-format number with 17 significant digits; parses back exactly.
pub fn machine_num(x: f64) -> String {
    format!("{x:.16e}")
}

struct Output<'a> {
    out: &'a mut dyn Write,
    format: Format,
}

impl Output<'_> {
    /// Prints named values. Plain mode puts the first value alone on the
    /// first line so scripts can read it directly.
    fn values(&mut self, command: &str, rows: &[(&str, f64)]) -> std::io::Result<()> {
        match self.format {
            Format::Plain => {
                for (i, (name, v)) in rows.iter().enumerate() {
                    if i == 0 {
                        writeln!(self.out, "{}", plain_num(*v))?;
                    } else {
                        writeln!(self.out, "{name}: {}", plain_num(*v))?;
                    }
                }
                Ok(())
            }
            Format::Csv => {
                writeln!(self.out, "command,name,value")?;
                for (name, v) in rows {
                    writeln!(self.out, "{command},{name},{}", machine_num(*v))?;
                }
                Ok(())
            }
            Format::Json => {
                let mut map = serde_json::Map::new();
                map.insert("command".into(), command.into());
                for (name, v) in rows {
                    map.insert((*name).into(), json_num(*v));
                }
                self.json(&serde_json::Value::Object(map))
            }
        }
    }

    fn json<T: Serialize>(&mut self, value: &T) -> std::io::Result<()> {
        writeln!(self.out, "{}", serde_json::to_string_pretty(value).expect("plain data"))
    }
}

fn json_num(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(x)
        .map(Into::into)
        .unwrap_or(serde_json::Value::Null)
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit code. Diagnostics go to `err` as a single line.
pub fn run_with(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let msg = e.render().to_string();
                    let first = msg.lines().find(|l| !l.trim().is_empty()).unwrap_or("usage error");
                    let _ = writeln!(err, "{first}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Mean(e)) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_convergence_failure() {
                EXIT_CONVERGENCE
            } else {
                EXIT_USAGE
            }
        }
    }
}

/// Runs with the process arguments and standard streams.
pub fn run() -> i32 {
    let argv: Vec<String> = std::env::args().collect();
    run_with(&argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

fn merged_config(cli: &Cli) -> Result<CliConfig, Failure> {
    let mut cfg = CliConfig::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        cfg.apply_file_text(&text).map_err(Failure::Usage)?;
    }
    if let Some(v) = cli.rel_tol {
        cfg.tolerance.rel_tol = v;
    }
    if let Some(v) = cli.max_iter {
        cfg.tolerance.max_iter = v;
    }
    if let Some(f) = cli.format {
        cfg.format = Some(f);
    }
    cfg.allow_non_isotone |= cli.allow_non_isotone;
    if let Command::Scan {
        samples,
        seed,
        bounds,
        out,
        sequential,
        ..
    } = &cli.command
    {
        if let Some(n) = samples {
            cfg.scan.samples = *n;
        }
        if let Some(s) = seed {
            cfg.scan.seed = *s;
        }
        if let Some(b) = bounds {
            (cfg.scan.lo, cfg.scan.hi) = parse_box(b).map_err(Failure::Usage)?;
        }
        if let Some(p) = out {
            cfg.out = Some(p.clone());
        }
        if *sequential {
            cfg.scan.execution = Execution::Sequential;
        }
    }
    cfg.validate().map_err(Failure::Usage)?;
    Ok(cfg)
}

fn format_for_path(path: &Path) -> Option<Format> {
    match path.extension()?.to_str()? {
        "json" => Some(Format::Json),
        "csv" => Some(Format::Csv),
        _ => None,
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let cfg = merged_config(&cli)?;
    let opts = cfg.resolve_options();
    let mut o = Output {
        out,
        format: cfg.format.unwrap_or(Format::Plain),
    };
    match cli.command {
        Command::Eval { mean, args } => {
            let xs = parse_args(&args, &[2, 3])?;
            let v = if xs.len() == 2 {
                catalog::mean2(&mean)?.eval(xs[0], xs[1])?
            } else {
                catalog::mean3_with(&mean, &opts)?.eval(xs[0], xs[1], xs[2])?
            };
            o.values("eval", &[("value", v)])?;
        }
        Command::Construct { base, args, trace } => {
            let xs = parse_args(&args, &[3])?;
            let m = catalog::mean2(&base)?;
            // validates the base mean's flags
            if cfg.allow_non_isotone {
                type1::construct_invariant_unchecked(&m, &cfg.tolerance)?;
            } else {
                type1::construct_invariant(&m, &cfg.tolerance)?;
            }
            let tol = ToleranceConfig {
                trace_states: trace,
                ..cfg.tolerance
            };
            let t = type1::run_triple(&m, [xs[0], xs[1], xs[2]], &tol)?;
            match o.format {
                Format::Json => o.json(&t)?,
                Format::Csv => {
                    writeln!(o.out, "step,a,b,c")?;
                    for (k, s) in t.states.iter().enumerate() {
                        writeln!(
                            o.out,
                            "{k},{},{},{}",
                            machine_num(s[0]),
                            machine_num(s[1]),
                            machine_num(s[2])
                        )?;
                    }
                    writeln!(o.out, "limit,,,{}", machine_num(t.limit))?;
                }
                Format::Plain => {
                    writeln!(o.out, "{}", plain_num(t.limit))?;
                    if trace {
                        writeln!(o.out, "iterations: {}", t.iterations)?;
                        for (k, s) in t.states.iter().enumerate() {
                            writeln!(
                                o.out,
                                "{k:>4} {} {} {}",
                                plain_num(s[0]),
                                plain_num(s[1]),
                                plain_num(s[2])
                            )?;
                        }
                    }
                }
            }
        }
        Command::Extract { mean3, args, seed_mean } => {
            let xs = parse_args(&args, &[2])?;
            let big = catalog::mean3_with(&mean3, &opts)?;
            let seed = catalog::mean2(&seed_mean)?;
            let tol = ToleranceConfig {
                max_iter: cli
                    .max_iter
                    .unwrap_or(ToleranceConfig::fixed_point().max_iter.max(cfg.tolerance.max_iter)),
                ..cfg.tolerance
            };
            let t = type2::extract_m(&big, xs[0], xs[1], &seed, &tol)?;
            match o.format {
                Format::Json => o.json(&t)?,
                Format::Csv => o.values("extract", &[("limit", t.limit), ("iterations", t.iterations as f64)])?,
                Format::Plain => {
                    writeln!(o.out, "{}", plain_num(t.limit))?;
                    writeln!(o.out, "iterations: {}", t.iterations)?;
                }
            }
        }
        Command::Extend { base, n, args } => {
            let xs = parse_args(&args, &[3])?;
            let ext = type2::extend_m(&catalog::mean2(&base)?, &catalog::mean2(&n)?);
            o.values("extend", &[("value", ext.eval(xs[0], xs[1], xs[2])?)])?;
        }
        Command::Taylor {
            base,
            order,
            args,
            rescale,
        } => {
            let xs = parse_args(&args, &[3])?;
            let m = catalog::mean2(&base)?;
            let t = TaylorPolynomial::for_base(order, &m)?;
            let p = [xs[0], xs[1], xs[2]];
            let v = if rescale {
                if !m.flags().homogeneous {
                    return Err(Failure::Usage(format!(
                        "--rescale needs a homogeneous base, {} is not",
                        m.id()
                    )));
                }
                taylor::homogeneous_rescale_eval(&t, p)
            } else {
                taylor::taylor_eval(&t, p)
            };
            match o.format {
                Format::Json => {
                    #[derive(Serialize)]
                    struct TaylorOut<'a> {
                        command: &'static str,
                        value: f64,
                        polynomial: &'a TaylorPolynomial,
                        exact: Option<Vec<(String, String)>>,
                    }
                    let exact = t.exact.as_ref().map(|c| {
                        c.named()
                            .into_iter()
                            .map(|(k, r)| (k.to_string(), r.to_string()))
                            .collect()
                    });
                    o.json(&TaylorOut {
                        command: "taylor",
                        value: v,
                        polynomial: &t,
                        exact,
                    })?
                }
                _ => o.values("taylor", &[("value", v)])?,
            }
        }
        Command::Check {
            kind,
            mean3,
            mean2,
            args,
        } => {
            let big = catalog::mean3_with(&mean3, &opts)?;
            let m = catalog::mean2(&mean2)?;
            let (r, base) = if kind == "1" {
                let xs = parse_args(&args, &[3])?;
                let p = [xs[0], xs[1], xs[2]];
                (type1::check_type1(&big, &m, p)?, big.eval_at(p)?)
            } else {
                let xs = parse_args(&args, &[2])?;
                (type2::check_type2(&big, &m, xs[0], xs[1])?, m.eval(xs[0], xs[1])?)
            };
            let tol = if big.is_iterated() {
                ITERATED_TOL
            } else {
                CLOSED_FORM_TOL
            };
            o.values("check", &[("residual", r), ("tolerance", tol)])?;
            if r.abs() > tol * base.abs().max(1.0) {
                return Ok(EXIT_VIOLATION);
            }
        }
        Command::Scan { claim, .. } => {
            let report = verify::run_claim(&claim, &cfg.scan)?;
            let fmt = cfg
                .format
                .or_else(|| cfg.out.as_deref().and_then(format_for_path))
                .unwrap_or(if cfg.out.is_some() { Format::Json } else { Format::Plain });
            let body = render_report(&report, fmt);
            match &cfg.out {
                Some(path) => {
                    fs::write(path, body)
                        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
                    writeln!(o.out, "{}", summary_line(&report))?;
                }
                None => write!(o.out, "{body}")?,
            }
            if report.verdict == Verdict::Fail {
                return Ok(EXIT_VIOLATION);
            }
        }
        Command::Demo => demo(&mut o, &cfg)?,
    }
    Ok(EXIT_OK)
}

fn summary_line(r: &ScanReport) -> String {
    format!(
        "{}: {} ({} samples, {} excluded, {} violations, max residual {})",
        r.claim,
        r.verdict.as_str(),
        r.samples_tested,
        r.excluded_near_diagonal,
        r.violations.len(),
        r.max_residual.map(plain_num).unwrap_or_else(|| "n/a".into())
    )
}

/// Renders a report; plain mode is for people and may change.
pub fn render_report(r: &ScanReport, fmt: Format) -> String {
    match fmt {
        Format::Json => r.to_json(),
        Format::Csv => r.to_csv(),
        Format::Plain => {
            let mut s = summary_line(r) + "\n";
            for v in &r.violations {
                let pt: Vec<String> = v.point.iter().map(|&x| plain_num(x)).collect();
                s += &format!(
                    "  {} at ({}): {} vs {} (gap {})\n",
                    v.relation,
                    pt.join(", "),
                    plain_num(v.lhs),
                    plain_num(v.rhs),
                    plain_num(v.gap)
                );
            }
            for n in &r.notes {
                s += &format!("  note: {n}\n");
            }
            s
        }
    }
}

fn demo(o: &mut Output<'_>, cfg: &CliConfig) -> Result<(), Failure> {
    let l = catalog::logarithmic();
    let l3 = type1::construct_invariant(&l, &cfg.tolerance)?;
    let cert = type1::noninvariance_certificate(&catalog::qroot(), [1.0, 2.0, 3.0])?;
    let d = taylor::logmean_diagonal_data();
    let t3 = TaylorPolynomial::for_base(3, &l)?;
    let (f2, f4) = d.exact.expect("log mean data is exact");
    let forced = taylor::both_types_mxxxy(f2, f4);
    let actual = taylor::partials_type1(f2, f4).m_xxxy;
    let rows = [
        ("L(1,2)", l.eval(1.0, 2.0)?),
        ("L3(1,2,3)", l3.eval(1.0, 2.0, 3.0)?),
        ("A_1/3(1,2,3)", catalog::power3(1.0 / 3.0)?.eval(1.0, 2.0, 3.0)?),
        ("L3(1,2,L(1,2)) - L(1,2)", type2::check_type2(&l3, &l, 1.0, 2.0)?),
        ("Qroot composed at (1,2,3)", cert.composed),
        ("Qroot direct at (1,2,3)", cert.direct),
        ("T3 of L3 at (0.9,1,1.1)", taylor::taylor_eval(&t3, [0.9, 1.0, 1.1])),
        (
            "M_xxxy forced by both invariances",
            num_traits::ToPrimitive::to_f64(&forced).unwrap_or(f64::NAN),
        ),
        (
            "M_xxxy of L3",
            num_traits::ToPrimitive::to_f64(&actual).unwrap_or(f64::NAN),
        ),
    ];
    match o.format {
        Format::Plain => {
            for (name, v) in rows {
                writeln!(o.out, "{name:<36} {}", plain_num(v))?;
            }
            writeln!(
                o.out,
                "{:<36} {} - {} = {}",
                "fourth-order obstruction",
                forced,
                actual,
                forced - actual
            )?;
        }
        _ => o.values("demo", &rows)?,
    }
    Ok(())
}
