//! Command-line front end: argument parsing, dispatch, caching and report rendering.

mod cache;
mod commands;
mod identities;
mod problem_file;
mod render;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::Error;

pub use cache::{Cache, ALGORITHM_VERSION};
pub use identities::{standard_identities, IdentityRecord};
pub use problem_file::{Expected, PresentationSpec, ProblemFile};
pub use render::render_table;

#[derive(Parser, Debug, Clone)]
#[command(name = "gengap", version, about = "Minimal generator counts for modules over group rings of free products")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Eq)]
pub enum Command {
    /// d_G(ΔG) for the free product of the factors.
    Augmentation,
    /// d_G(R/R') for the free product of the factor presentations.
    Relation,
    /// d_G of the kernel at stage `--stage` of the summed factor resolutions.
    Kernel,
    /// gap(G) = d(G) - d_G(ΔG).
    Gap,
    /// Good-module evidence for each finite factor's module.
    GoodCheck,
    /// Builds an explicit generating set of the induced module and verifies it.
    Synthesize,
    /// Re-verifies a stored generation certificate.
    Verify,
    /// Evaluates group-ring identities exactly.
    IdentityCheck,
    /// Relation count for free products of the groups Q_m.
    Bridson,
    /// Runs a JSON problem file and compares with its expected values.
    Report {
        file: PathBuf,
    },
}

#[derive(clap::Args, Debug, Clone)]
pub struct Options {
    /// Factor list, e.g. "C2xZ,C3xZ" or "C2*C3".
    #[arg(long, global = true)]
    pub factors: Option<String>,
    /// Module kind for good-check, synthesize and verify: augmentation, relation or kernel.
    #[arg(long, global = true)]
    pub module: Option<String>,
    /// Kernel stage s >= 1.
    #[arg(long, global = true, default_value_t = 1)]
    pub stage: usize,
    /// Cohomological periods per factor, 0 for none.
    #[arg(long, global = true, value_delimiter = ',')]
    pub periods: Vec<u64>,
    /// JSON file with presentations of finite factors.
    #[arg(long, global = true)]
    pub presentation_file: Option<PathBuf>,
    /// Extra primes at which to evaluate or test.
    #[arg(long, global = true, value_delimiter = ',')]
    pub prime_support: Vec<u64>,
    /// Largest word length used when spinning certificates.
    #[arg(long = "depth-cap", global = true, default_value_t = crate::synth::DEFAULT_DEPTH_CAP)]
    pub depth_cap: usize,
    /// Part of the cache key; searches use fixed internal seeds
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Print a human-readable table instead of JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Write the JSON report to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Neither read nor write the report cache
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Report cache directory (default: $XDG_CACHE_HOME/gengap)
    #[arg(long, global = true, env = "GENGAP_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Parameters m_i for the bridson subcommand.
    #[arg(long, global = true, value_delimiter = ',')]
    pub m: Vec<u64>,
    /// Certificate JSON for the verify subcommand.
    #[arg(long, global = true)]
    pub certificate: Option<PathBuf>,
    /// Identity JSON for identity-check; the built-in suite runs without it.
    #[arg(long, global = true)]
    pub identities: Option<PathBuf>,
    /// Ask for the number of normal generators of the relation subgroup (always refused).
    #[arg(long, global = true)]
    pub normal_generators: bool,
}

/// Everything that determines a report, with file contents inlined.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Request {
    pub command: String,
    #[serde(default)]
    pub factors: Option<String>,
    #[serde(default)]
    pub module: Option<String>,
    #[serde(default = "one")]
    pub stage: usize,
    #[serde(default)]
    pub periods: Vec<u64>,
    #[serde(default)]
    pub presentations: Vec<PresentationSpec>,
    #[serde(default)]
    pub prime_support: Vec<u64>,
    #[serde(default = "default_depth_cap")]
    pub depth_cap: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub m: Vec<u64>,
    #[serde(default)]
    pub certificate: Option<Value>,
    #[serde(default)]
    pub identities: Option<Value>,
    #[serde(default)]
    pub normal_generators: bool,
}

fn one() -> usize {
    1
}

fn default_depth_cap() -> usize {
    crate::synth::DEFAULT_DEPTH_CAP
}

impl Request {
    pub fn new(command: &str) -> Self {
        Request { command: command.into(), stage: 1, depth_cap: default_depth_cap(), ..Default::default() }
    }

    pub fn factors(mut self, f: &str) -> Self {
        self.factors = Some(f.into());
        self
    }

    pub fn module(mut self, m: &str) -> Self {
        self.module = Some(m.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

/// The JSON report; `result` is null when the command failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub problem: String,
    pub result: Value,
    pub per_prime: Value,
    pub hypotheses: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Value>,
    /// formula, search-witness, certificate-verified, certificate-incomplete,
    /// certificate-refuted, exact-evaluation, refused or error.
    pub provenance: String,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub details: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
    pub exit_code: i32,
    /// Seconds per phase.
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    pub(crate) fn new(command: &str, problem: impl Into<String>) -> Self {
        Report {
            command: command.into(),
            problem: problem.into(),
            result: Value::Null,
            per_prime: Value::Array(vec![]),
            hypotheses: Value::Array(vec![]),
            certificate: None,
            provenance: "formula".into(),
            details: Map::new(),
            error: None,
            exit_code: 0,
            timings: BTreeMap::new(),
        }
    }

    fn failure(command: &str, problem: &str, e: &Error) -> Self {
        let field = match e {
            Error::Schema { field, .. } => Some(field.clone()),
            _ => None,
        };
        let mut r = Report::new(command, problem);
        r.provenance = if matches!(e, Error::Unsupported(_)) { "refused".into() } else { "error".into() };
        r.error = Some(ErrorInfo { kind: error_kind(e).into(), message: e.to_string(), field });
        r.exit_code = exit_code(e);
        r
    }
}

/// 1 for hypothesis and input problems, 2 for exhausted budgets, 3 for internal failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Budget(_) => 2,
        Error::Internal(_) => 3,
        _ => 1,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidModulus(_) => "invalid-modulus",
        Error::ShapeMismatch(_) => "shape-mismatch",
        Error::InvalidGroup(_) => "invalid-group",
        Error::UndeclaredGenerator(_) => "undeclared-generator",
        Error::Hypothesis(_) => "hypothesis",
        Error::Unsupported(_) => "unsupported",
        Error::InvalidResolution(_) => "invalid-resolution",
        Error::InvalidTarget(_) => "invalid-target",
        Error::ContextMismatch(_) => "context-mismatch",
        Error::Budget(_) => "budget",
        Error::Schema { .. } => "schema",
        Error::Internal(_) => "internal",
    }
}

pub(crate) fn schema(field: &str, message: impl Into<String>) -> Error {
    Error::Schema { field: field.into(), message: message.into() }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Augmentation => "augmentation",
        Command::Relation => "relation",
        Command::Kernel => "kernel",
        Command::Gap => "gap",
        Command::GoodCheck => "good-check",
        Command::Synthesize => "synthesize",
        Command::Verify => "verify",
        Command::IdentityCheck => "identity-check",
        Command::Bridson => "bridson",
        Command::Report { .. } => "report",
    }
}

pub(crate) fn read_json(path: &std::path::Path, field: &str) -> crate::Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| schema(field, format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| schema(field, format!("{}: {e}", path.display())))
}

/// Inlines the files named on the command line into a request.
pub fn request_from_cli(cli: &Cli) -> crate::Result<Request> {
    let o = &cli.opts;
    let presentations = match &o.presentation_file {
        Some(path) => problem_file::parse_presentations(read_json(path, "presentation-file")?)?,
        None => vec![],
    };
    Ok(Request {
        command: command_name(&cli.command).into(),
        factors: o.factors.clone(),
        module: o.module.clone(),
        stage: o.stage,
        periods: o.periods.clone(),
        presentations,
        prime_support: o.prime_support.clone(),
        depth_cap: o.depth_cap,
        seed: o.seed,
        m: o.m.clone(),
        certificate: o.certificate.as_deref().map(|p| read_json(p, "certificate")).transpose()?,
        identities: o.identities.as_deref().map(|p| read_json(p, "identities")).transpose()?,
        normal_generators: o.normal_generators,
    })
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Report {
    let cache = cache_for(&cli.opts);
    if let Command::Report { file } = &cli.command {
        return match read_json(file, "file").and_then(|v| ProblemFile::from_value(v)) {
            Ok(pf) => problem_file::run_problem_file(&pf, cache.as_ref()),
            Err(e) => Report::failure("report", &file.display().to_string(), &e),
        };
    }
    match request_from_cli(cli) {
        Ok(req) => execute(&req, cache.as_ref()),
        Err(e) => Report::failure(command_name(&cli.command), cli.opts.factors.as_deref().unwrap_or(""), &e),
    }
}

fn cache_for(o: &Options) -> Option<Cache> {
    if o.no_cache {
        return None;
    }
    Some(Cache::new(o.cache_dir.clone().unwrap_or_else(Cache::default_dir)))
}

/// Answers a request, from the cache when possible.
pub fn execute(req: &Request, cache: Option<&Cache>) -> Report {
    let key = Cache::key(req);
    if let Some(c) = cache {
        if let Some(r) = c.load(&key) {
            log::debug!("cache hit {key}");
            return r;
        }
    }
    let start = Instant::now();
    let mut report = match commands::dispatch(req) {
        Ok(r) => r,
        Err(e) => {
            log::info!("{} failed: {e}", req.command);
            Report::failure(&req.command, &label(req), &e)
        }
    };
    report.timings.insert("total".into(), round_seconds(start.elapsed().as_secs_f64()));
    if report.error.is_none() {
        if let Some(c) = cache {
            c.store(&key, &report);
        }
    }
    report
}

fn label(req: &Request) -> String {
    match (&req.factors, req.m.is_empty()) {
        (Some(f), _) => f.clone(),
        (None, false) => format!("Q_{:?}", req.m),
        (None, true) => String::new(),
    }
}

fn round_seconds(s: f64) -> f64 {
    (s * 1e4).round() / 1e4
}

/// Writes the report as requested and returns the exit code.
pub fn emit(o: &Options, report: &Report) -> i32 {
    let json = match serde_json::to_string_pretty(report) {
        Ok(j) => j,
        Err(e) => {
            eprintln!("cannot serialize report: {e}");
            return 3;
        }
    };
    if let Some(path) = &o.out {
        if let Err(e) = std::fs::write(path, format!("{json}\n")) {
            eprintln!("cannot write {}: {e}", path.display());
            return 3;
        }
    }
    let text = if o.pretty {
        render_table(report)
    } else if o.out.is_none() {
        format!("{json}\n")
    } else {
        return report.exit_code;
    };
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Ok(()) => report.exit_code,
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => report.exit_code,
        Err(e) => {
            eprintln!("cannot write report: {e}");
            3
        }
    }
}

#[cfg(test)]
mod tests;
