//! Command-line front end. The binary is a thin wrapper around [`run`].

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::Value;

use crate::acoustics::{self, Environment};
use crate::error::Error;
use crate::fitmodels::{self, FitModel, PolySurface, RangeViolation, SurfacePoint};
use crate::linkbudget::LinkBudget;
use crate::numeric::logspace;
use crate::oracle::{distance_grid, position_grid, ExactModel, TurningPointSweep};
use crate::output::{format_number, num, nums, object, to_json_string, Cell, Table};
use crate::planner::{self, LinkSpec, DEFAULT_PACKET_BITS};

pub const THREADS_ENV: &str = "RELAY_PLANNER_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "relay-planner", version, about = "Underwater acoustic link budgets and relay planning")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Flat key=value file; flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the result here instead of stdout.
    #[arg(long, short = 'o', global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Report failures as a JSON document on stderr.
    #[arg(long, global = true)]
    pub error_json: bool,
    /// Spreading factor.
    #[arg(long = "k", global = true)]
    pub k: Option<f64>,
    /// Shipping activity in [0, 1].
    #[arg(long = "s", global = true)]
    pub s: Option<f64>,
    /// Wind speed in m/s.
    #[arg(long = "w", global = true)]
    pub w: Option<f64>,
    /// Sound speed in m/s.
    #[arg(long = "c", global = true)]
    pub c: Option<f64>,
    /// Electro-acoustic conversion efficiency.
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// Packet size in bits.
    #[arg(long, global = true)]
    pub bits: Option<u64>,
    /// Bandwidth efficiency in bps/Hz.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Power-law parameters: the published set or a fresh fit of the
    /// link budget.
    #[arg(long, global = true, value_enum)]
    pub model: Option<ModelChoice>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelChoice {
    Published,
    Fitted,
}

impl ModelChoice {
    fn name(self) -> &'static str {
        match self {
            ModelChoice::Published => "published",
            ModelChoice::Fitted => "fitted",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Absorption, path loss, noise and their product over a frequency grid.
    Channel(ChannelArgs),
    /// Fit the bandwidth and power laws to the link budget.
    Fit(FitArgs),
    /// Relay decision and multi-hop layout for one link.
    Plan(PlanArgs),
    /// Direct versus midpoint-relay energy and delay over a grid of links.
    Table1(Table1Args),
    /// Polynomial surface for the open distance over receive power and SNR.
    Surface(SurfaceArgs),
    /// Two-hop energy against relay position.
    Curve(CurveArgs),
    /// Analytic thresholds and oracle turning points over a parameter grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct ChannelArgs {
    /// Distance in km.
    #[arg(long)]
    pub l: f64,
    /// Frequencies in kHz.
    #[arg(long, default_value = "0.1:200:0.1")]
    pub f: Grid,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Distances in km (range or list).
    #[arg(long, conflicts_with = "l_log")]
    pub l: Option<Grid>,
    /// Log-spaced distances; defaults to 1:100:60.
    #[arg(long = "l-log", value_name = "LO:HI:COUNT")]
    pub l_log: Option<LogGrid>,
    /// Target SNRs in dB.
    #[arg(long, default_value = "5:25:5")]
    pub snr: Grid,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Link length in km.
    #[arg(long)]
    pub l: f64,
    /// Target SNR in dB.
    #[arg(long)]
    pub snr: f64,
    /// Receive power in W.
    #[arg(long)]
    pub pr: f64,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    /// Target SNRs in dB.
    #[arg(long, default_value = "10:25:5")]
    pub snr: Grid,
    /// Link lengths in km.
    #[arg(long, default_value = "10:50:10")]
    pub l: Grid,
    /// Receive power in W.
    #[arg(long, default_value_t = 0.5)]
    pub pr: f64,
    /// Evaluate on the exact channel instead of the power laws.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Args)]
pub struct OracleSweepArgs {
    /// Link length spacing of the turning-point sweep in km.
    #[arg(long, default_value_t = 0.25)]
    pub l_step: f64,
    /// Longest link considered in km.
    #[arg(long, default_value_t = 120.0)]
    pub l_max: f64,
    /// Relay position spacing in km.
    #[arg(long, default_value_t = 0.125)]
    pub x_step: f64,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    /// Receive powers in W.
    #[arg(long, default_value = "0.1:2:0.1")]
    pub pr: Grid,
    #[arg(long, default_value = "10:25:1")]
    pub snr: Grid,
    /// Polynomial degrees in log10 P_R and SNR.
    #[arg(long, default_value = "5,5", value_name = "M,N")]
    pub degrees: Degrees,
    /// Use the closed-form open distance instead of the oracle.
    #[arg(long)]
    pub analytic: bool,
    /// Also write the fitted data points as CSV.
    #[arg(long, value_name = "PATH")]
    pub points_out: Option<PathBuf>,
    #[command(flatten)]
    pub sweep: OracleSweepArgs,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Link length in km.
    #[arg(long)]
    pub l: f64,
    /// Target SNR in dB.
    #[arg(long)]
    pub snr: f64,
    /// Receive power in W.
    #[arg(long)]
    pub pr: f64,
    /// Relay position spacing in km; defaults to l/400.
    #[arg(long)]
    pub step: Option<f64>,
    /// Add the exact-channel energy.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value = "10:25:5")]
    pub snr: Grid,
    #[arg(long, default_value = "0.1,0.5,1,2")]
    pub pr: Grid,
    /// Skip the oracle turning points.
    #[arg(long)]
    pub analytic: bool,
    #[command(flatten)]
    pub sweep: OracleSweepArgs,
}

/// `start:stop:step` (stop included when reached) or a comma list.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

/// Rounds to the canonical output precision so `0.1 + 2 * 0.1` is `0.3`.
fn snap(x: f64) -> f64 {
    format_number(x).parse().unwrap_or(x)
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let values = match parts.as_slice() {
            [start, stop, step] => {
                let (start, stop, step) = (parse_f64(start)?, parse_f64(stop)?, parse_f64(step)?);
                if step.is_nan() || step <= 0.0 {
                    return Err("range step must be > 0".into());
                }
                if stop < start {
                    return Err(format!("empty range {s}"));
                }
                let n = ((stop - start) / step * (1.0 + 1e-12)).floor() as usize;
                (0..=n).map(|i| snap(start + step * i as f64)).collect()
            }
            [_] => s.split(',').map(parse_f64).collect::<Result<Vec<_>, _>>()?,
            _ => return Err(format!("expected start:stop:step or a comma list, got '{s}'")),
        };
        if values.is_empty() {
            return Err(format!("empty range {s}"));
        }
        Ok(Grid(values))
    }
}

/// `lo:hi:count`, log-spaced.
#[derive(Debug, Clone, PartialEq)]
pub struct LogGrid(pub Vec<f64>);

impl FromStr for LogGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let [lo, hi, count] = s.split(':').collect::<Vec<_>>()[..] else {
            return Err(format!("expected lo:hi:count, got '{s}'"));
        };
        let (lo, hi) = (parse_f64(lo)?, parse_f64(hi)?);
        let count: usize = count.trim().parse().map_err(|_| format!("'{count}' is not a count"))?;
        if !(lo > 0.0 && hi > lo) || count == 0 {
            return Err(format!("need 0 < lo < hi and count >= 1, got '{s}'"));
        }
        Ok(LogGrid(logspace(lo, hi, count)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Degrees(pub usize, pub usize);

impl FromStr for Degrees {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (m, n) = s.split_once(',').ok_or_else(|| format!("expected M,N, got '{s}'"))?;
        let p = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("'{t}' is not a degree"));
        Ok(Degrees(p(m)?, p(n)?))
    }
}

/// A failure with its exit status.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) => match e {
                Error::Domain { .. } | Error::Config(_) => EXIT_USAGE,
                Error::Validation(_) => EXIT_VALIDATION,
                Error::BoundaryMinimizer { .. }
                | Error::BandTruncation { .. }
                | Error::Rank(_)
                | Error::Fit(_)
                | Error::Bracket(_) => EXIT_NUMERIC,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(e) => e.kind(),
        }
    }

    pub fn to_json(&self) -> Value {
        let violations = match self {
            CliError::Core(Error::Validation(v)) => v.iter().map(violation_json).collect(),
            _ => Vec::new(),
        };
        object([(
            "error",
            object([
                ("code", Value::from(self.exit_code())),
                ("kind", Value::from(self.kind())),
                ("message", Value::from(self.to_string())),
                ("violations", Value::Array(violations)),
            ]),
        )])
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => e.fmt(f),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Settings after merging defaults, the config file and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub env: Environment,
    pub packet_bits: u64,
    pub alpha: f64,
    pub model: ModelChoice,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            env: Environment::default(),
            packet_bits: DEFAULT_PACKET_BITS,
            alpha: 1.0,
            model: ModelChoice::Published,
            format: None,
            output: None,
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key=value", n + 1)))?;
        out.insert(k.trim().to_owned(), v.trim().to_owned());
    }
    Ok(out)
}

impl RunConfig {
    pub fn resolve(g: &GlobalArgs) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &g.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            cfg.apply(&parse_config(&text)?)?;
        }
        let e = &mut cfg.env;
        e.k = g.k.unwrap_or(e.k);
        e.s = g.s.unwrap_or(e.s);
        e.w = g.w.unwrap_or(e.w);
        e.c = g.c.unwrap_or(e.c);
        e.eta = g.eta.unwrap_or(e.eta);
        cfg.packet_bits = g.bits.unwrap_or(cfg.packet_bits);
        cfg.alpha = g.alpha.unwrap_or(cfg.alpha);
        cfg.model = g.model.unwrap_or(cfg.model);
        cfg.format = g.format.or(cfg.format);
        cfg.output = g.output.clone().or(cfg.output);
        cfg.env.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, kv: &BTreeMap<String, String>) -> Result<(), CliError> {
        let f = |k: &str, v: &str| parse_f64(v).map_err(|e| usage(format!("config key {k}: {e}")));
        for (k, v) in kv {
            match k.as_str() {
                "k" => self.env.k = f(k, v)?,
                "s" => self.env.s = f(k, v)?,
                "w" => self.env.w = f(k, v)?,
                "c" => self.env.c = f(k, v)?,
                "eta" => self.env.eta = f(k, v)?,
                "alpha" => self.alpha = f(k, v)?,
                "bits" | "packet_bits" => {
                    self.packet_bits = v.parse().map_err(|_| usage(format!("config key {k}: '{v}' is not a bit count")))?
                }
                "model" => self.model = ModelChoice::from_str(v, true).map_err(|e| usage(format!("config key model: {e}")))?,
                "format" => self.format = Some(Format::from_str(v, true).map_err(|e| usage(format!("config key format: {e}")))?),
                "output" => self.output = Some(PathBuf::from(v)),
                other => return Err(usage(format!("unknown config key '{other}'"))),
            }
        }
        Ok(())
    }

    fn spec(&self, l: f64, snr: f64, pr: f64) -> Result<LinkSpec, CliError> {
        Ok(LinkSpec::new(l, snr, pr, self.packet_bits, self.alpha)?)
    }

    /// One power-law model per SNR, in input order.
    pub fn models(&self, snrs: &[f64]) -> Result<Vec<FitModel>, CliError> {
        Ok(match self.model {
            ModelChoice::Published => snrs.iter().map(|&s| FitModel::published(s, &self.env)).collect(),
            ModelChoice::Fitted => fitmodels::fit_models(
                &LinkBudget::new(self.env),
                &fitmodels::default_fit_distances(),
                snrs,
            )?,
        })
    }
}

/// Caps the global rayon pool from [`THREADS_ENV`]. Only the first call in a
/// process has an effect.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n >= 1)
        .ok_or_else(|| usage(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Result of a subcommand: a JSON document, its tabular form, and an
/// optional failure to report after the output has been written.
#[derive(Debug)]
pub struct Report {
    pub command: &'static str,
    pub doc: Value,
    pub table: Table,
    pub default_format: Format,
    pub failure: Option<CliError>,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => to_json_string(&self.doc),
            Format::Csv => self.table.to_csv_string(),
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(Report, RunConfig), CliError> {
    let cfg = RunConfig::resolve(&cli.global)?;
    let report = match &cli.command {
        Command::Channel(a) => cmd_channel(a, &cfg)?,
        Command::Fit(a) => cmd_fit(a, &cfg)?,
        Command::Plan(a) => cmd_plan(a, &cfg)?,
        Command::Table1(a) => cmd_table1(a, &cfg)?,
        Command::Surface(a) => cmd_surface(a, &cfg)?,
        Command::Curve(a) => cmd_curve(a, &cfg)?,
        Command::Sweep(a) => cmd_sweep(a, &cfg)?,
    };
    Ok((report, cfg))
}

/// Parses `args` (including the program name), runs the command and writes
/// its output. Returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let error_json = cli.global.error_json;
    let fail = |e: CliError| {
        if error_json {
            eprint!("{}", to_json_string(&e.to_json()));
        } else {
            eprintln!("error: {e}");
        }
        e.exit_code()
    };
    if let Err(e) = init_threads() {
        return fail(e);
    }
    let (report, cfg) = match execute(&cli) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let text = report.render(cfg.format.unwrap_or(report.default_format));
    let written = match &cfg.output {
        Some(p) => std::fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| usage(format!("cannot write output: {e}"))),
    };
    if let Err(e) = written {
        return fail(e);
    }
    match report.failure {
        Some(e) => fail(e),
        None => EXIT_OK,
    }
}

fn env_json(env: &Environment) -> Value {
    object([
        ("k", num(env.k)),
        ("s", num(env.s)),
        ("w", num(env.w)),
        ("c", num(env.c)),
        ("eta", num(env.eta)),
    ])
}

fn model_json(m: &FitModel, source: &str) -> Value {
    object([
        ("source", Value::from(source)),
        ("snr0_db", num(m.snr0_db)),
        ("omega", num(m.omega)),
        ("log10_omega", num(m.omega.log10())),
        ("lambda", num(m.lambda)),
        ("psi", num(m.psi)),
        ("log10_psi", num(m.psi.log10())),
        ("gamma", num(m.gamma)),
        ("delta_upa", num(m.delta)),
    ])
}

fn violation_json(v: &RangeViolation) -> Value {
    object([
        ("parameter", Value::from(format!("{:?}", v.parameter).to_lowercase())),
        ("value", num(v.value)),
        ("constraint", Value::from(v.constraint.clone())),
    ])
}

fn table_doc(command: &'static str, cfg: &RunConfig, table: &Table, extra: Vec<(&str, Value)>) -> Value {
    let mut entries = vec![
        ("command", Value::from(command)),
        ("environment", env_json(&cfg.env)),
        ("rows", table.to_json()),
    ];
    entries.extend(extra);
    object(entries)
}

pub fn cmd_channel(a: &ChannelArgs, cfg: &RunConfig) -> Result<Report, CliError> {
    let env = &cfg.env;
    let mut t = Table::new(&["f_khz", "absorption_db_per_km", "path_loss_db", "noise_db", "product_db"]);
    for &f in &a.f.0 {
        t.push(vec![
            f.into(),
            acoustics::absorption_db_per_km(f)?.into(),
            acoustics::path_loss_db(a.l, f, env)?.into(),
            acoustics::noise_psd_db(f, env)?.into(),
            acoustics::attenuation_noise_product_db(a.l, f, env)?.into(),
        ]);
    }
    let doc = table_doc("channel", cfg, &t, vec![("l_km", num(a.l))]);
    Ok(Report {
        command: "channel",
        doc,
        table: t,
        default_format: Format::Csv,
        failure: None,
    })
}

pub fn cmd_fit(a: &FitArgs, cfg: &RunConfig) -> Result<Report, CliError> {
    let distances = match (&a.l, &a.l_log) {
        (Some(g), _) => g.0.clone(),
        (None, Some(g)) => g.0.clone(),
        (None, None) => fitmodels::default_fit_distances(),
    };
    if distances.len() < 2 {
        return Err(usage("fitting needs at least two distances"));
    }
    let lb = LinkBudget::new(cfg.env);
    let models = fitmodels::fit_models(&lb, &distances, &a.snr.0)?;
    let trend = if models.len() >= 2 {
        Some(fitmodels::fit_psi_trend(&models)?)
    } else {
        None
    };

    let mut t = Table::new(&["snr0_db", "omega", "log10_omega", "lambda", "psi", "log10_psi", "gamma", "valid"]);
    let mut violations = Vec::new();
    let mut entries = Vec::new();
    for m in &models {
        let v = m.range_violations();
        t.push(vec![
            m.snr0_db.into(),
            m.omega.into(),
            m.omega.log10().into(),
            m.lambda.into(),
            m.psi.into(),
            m.psi.log10().into(),
            m.gamma.into(),
            if v.is_empty() { "true" } else { "false" }.into(),
        ]);
        let Value::Object(mut e) = model_json(m, "fitted") else { unreachable!() };
        e.insert("violations".into(), Value::Array(v.iter().map(violation_json).collect()));
        entries.push(Value::Object(e));
        violations.extend(v);
    }
    let (lo, hi) = distances
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &d| (a.min(d), b.max(d)));
    let doc = object([
        ("command", Value::from("fit")),
        ("environment", env_json(&cfg.env)),
        (
            "distances_km",
            object([("count", Value::from(distances.len())), ("min", num(lo)), ("max", num(hi))]),
        ),
        ("models", Value::Array(entries)),
        (
            "trend",
            trend.map_or(Value::Null, |tr| {
                object([("slope_per_db", num(tr.slope_per_db)), ("intercept", num(tr.intercept))])
            }),
        ),
    ]);
    Ok(Report {
        command: "fit",
        doc,
        table: t,
        default_format: Format::Json,
        failure: (!violations.is_empty()).then_some(CliError::Core(Error::Validation(violations))),
    })
}

pub fn cmd_plan(a: &PlanArgs, cfg: &RunConfig) -> Result<Report, CliError> {
    let spec = cfg.spec(a.l, a.snr, a.pr)?;
    let model = cfg.models(&[a.snr])?.remove(0);
    let class = planner::classify_case(a.l, &model, a.pr)?;
    let plan = planner::plan_link(&spec, &model, &cfg.env)?;
    let cmp = planner::compare(&spec, &model, &cfg.env)?;
    let decision = if plan.hop_count > 1 { "relay" } else { "direct" };
    let case = serde_json::to_value(class.label).expect("label serializes");
    let case_name = case.as_str().unwrap_or_default().to_owned();

    let doc = object([
        ("command", Value::from("plan")),
        ("environment", env_json(&cfg.env)),
        (
            "input",
            object([
                ("l_km", num(a.l)),
                ("snr0_db", num(a.snr)),
                ("p_r_w", num(a.pr)),
                ("packet_bits", Value::from(spec.packet_bits)),
                ("alpha", num(spec.alpha)),
            ]),
        ),
        ("model", model_json(&model, cfg.model.name())),
        ("decision", Value::from(decision)),
        ("case", case),
        (
            "thresholds",
            object([("t1_km", num(class.thresholds.t1_km)), ("t2_km", num(class.thresholds.t2_km))]),
        ),
        ("open_distance_km", num(plan.open_distance_km)),
        ("hop_count", Value::from(plan.hop_count)),
        ("hop_length_km", num(plan.hop_length_km)),
        ("relay_positions_km", nums(&plan.relay_positions)),
        ("total_energy_joule", num(plan.total_energy_joule)),
        ("total_delay_sec", num(plan.total_delay_sec)),
        (
            "comparison",
            object([
                ("e0_joule", num(cmp.e0_joule)),
                ("e1_mid_joule", num(cmp.e1_mid_joule)),
                ("t0_sec", num(cmp.t0_sec)),
                ("t1_mid_sec", num(cmp.t1_mid_sec)),
                ("energy_reduction_ratio", num(cmp.energy_reduction_ratio)),
                ("delay_reduction_ratio", num(cmp.delay_reduction_ratio)),
            ]),
        ),
    ]);
    let mut t = Table::new(&[
        "l_km",
        "snr0_db",
        "p_r_w",
        "decision",
        "case",
        "open_distance_km",
        "hop_count",
        "hop_length_km",
        "relay_positions_km",
        "total_energy_joule",
        "total_delay_sec",
    ]);
    let positions = plan.relay_positions.iter().map(|&x| format_number(x)).collect::<Vec<_>>().join(";");
    t.push(vec![
        a.l.into(),
        a.snr.into(),
        a.pr.into(),
        decision.into(),
        case_name.into(),
        plan.open_distance_km.into(),
        plan.hop_count.into(),
        plan.hop_length_km.into(),
        positions.into(),
        plan.total_energy_joule.into(),
        plan.total_delay_sec.into(),
    ]);
    Ok(Report {
        command: "plan",
        doc,
        table: t,
        default_format: Format::Json,
        failure: None,
    })
}

pub fn cmd_table1(a: &Table1Args, cfg: &RunConfig) -> Result<Report, CliError> {
    let models = cfg.models(&a.snr.0)?;
    let exact = if a.exact { Some(ExactModel::new(cfg.env)?) } else { None };
    let source = if a.exact { "exact" } else { cfg.model.name() };
    let cells: Vec<(usize, f64)> = (0..models.len())
        .flat_map(|i| a.l.0.iter().map(move |&l| (i, l)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(i, l)| {
            let m = &models[i];
            let spec = cfg.spec(l, m.snr0_db, a.pr)?;
            let r = match &exact {
                None => planner::compare(&spec, m, &cfg.env)?,
                Some(x) => planner::EnergyDelayReport::from_parts(
                    x.energy(0.0, &spec)?,
                    x.energy(l / 2.0, &spec)?,
                    x.delay(0.0, &spec)?,
                    x.delay(l / 2.0, &spec)?,
                ),
            };
            Ok::<_, CliError>((m.snr0_db, l, r))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(&[
        "snr0_db",
        "l_km",
        "e0_joule",
        "e1_mid_joule",
        "energy_reduction_ratio",
        "t0_sec",
        "t1_mid_sec",
        "delay_reduction_ratio",
    ]);
    for (snr, l, r) in rows {
        t.push(vec![
            snr.into(),
            l.into(),
            r.e0_joule.into(),
            r.e1_mid_joule.into(),
            r.energy_reduction_ratio.into(),
            r.t0_sec.into(),
            r.t1_mid_sec.into(),
            r.delay_reduction_ratio.into(),
        ]);
    }
    let doc = table_doc(
        "table1",
        cfg,
        &t,
        vec![
            ("source", Value::from(source)),
            ("p_r_w", num(a.pr)),
            ("packet_bits", Value::from(cfg.packet_bits)),
            ("alpha", num(cfg.alpha)),
        ],
    );
    Ok(Report {
        command: "table1",
        doc,
        table: t,
        default_format: Format::Csv,
        failure: None,
    })
}

fn oracle_sweep(cfg: &RunConfig, a: &OracleSweepArgs) -> Result<(Vec<f64>, TurningPointSweep), CliError> {
    if !(a.x_step > 0.0 && a.l_step > 0.0 && a.l_max > a.l_step) {
        return Err(usage("oracle sweep needs l_step > 0, x_step > 0 and l_max > l_step"));
    }
    let grid = distance_grid(a.l_step, a.l_max)?;
    let sweep = TurningPointSweep {
        x_step_km: a.x_step,
        packet_bits: cfg.packet_bits,
        alpha: cfg.alpha,
    };
    Ok((grid, sweep))
}

/// Open distance per (SNR, P_R) cell, row-major over SNR then P_R.
fn open_distance_grid(
    cfg: &RunConfig,
    snrs: &[f64],
    prs: &[f64],
    oracle: Option<&OracleSweepArgs>,
) -> Result<Vec<(f64, f64, f64)>, CliError> {
    let cells: Vec<(f64, f64)> = snrs.iter().flat_map(|&s| prs.iter().map(move |&p| (s, p))).collect();
    match oracle {
        None => {
            let models = cfg.models(snrs)?;
            cells
                .iter()
                .map(|&(s, p)| {
                    let m = models.iter().find(|m| m.snr0_db == s).expect("one model per SNR");
                    Ok((s, p, planner::open_distance(m, p)?))
                })
                .collect()
        }
        Some(args) => {
            let (grid, sweep) = oracle_sweep(cfg, args)?;
            let model = ExactModel::new(cfg.env)?;
            cells
                .par_iter()
                .map(|&(s, p)| Ok((s, p, model.realistic_open_distance(s, p, &grid, &sweep)?)))
                .collect()
        }
    }
}

pub fn cmd_surface(a: &SurfaceArgs, cfg: &RunConfig) -> Result<Report, CliError> {
    let Degrees(m, n) = a.degrees;
    let data = open_distance_grid(cfg, &a.snr.0, &a.pr.0, (!a.analytic).then_some(&a.sweep))?;
    let points: Vec<SurfacePoint> = data.iter().map(|&(s, p, l)| (p.log10(), s, l.log10())).collect();

    if let Some(path) = &a.points_out {
        let mut pt = Table::new(&["snr0_db", "p_r_w", "open_distance_km"]);
        for &(s, p, l) in &data {
            pt.push(vec![s.into(), p.into(), l.into()]);
        }
        std::fs::write(path, pt.to_csv_string()).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    }

    let (surface, gof) = fitmodels::fit_open_distance_surface(&points, m, n)?;

    let mut t = Table::new(&["i", "j", "value"]);
    for c in surface.coefficients() {
        t.push(vec![c.i.into(), c.j.into(), c.value.into()]);
    }
    let doc = object([
        ("command", Value::from("surface")),
        ("environment", env_json(&cfg.env)),
        ("source", Value::from(if a.analytic { cfg.model.name() } else { "oracle" })),
        ("surface", surface_json(&surface)),
        (
            "gof",
            object([
                ("sse", num(gof.sse)),
                ("rmse", num(gof.rmse)),
                ("r2", num(gof.r2)),
                ("adj_r2", num(gof.adj_r2)),
                ("points", Value::from(gof.points)),
                ("coefficients", Value::from(gof.coefficients)),
            ]),
        ),
    ]);
    Ok(Report {
        command: "surface",
        doc,
        table: t,
        default_format: Format::Json,
        failure: None,
    })
}

/// Same layout as the bundled coefficient table, so the output can be read
/// back with [`PolySurface::from_json`].
fn surface_json(s: &PolySurface) -> Value {
    object([
        ("m", Value::from(s.m)),
        ("n", Value::from(s.n)),
        ("x", Value::from("log10(P_R / W)")),
        ("y", Value::from("SNR0 / dB")),
        ("z", Value::from("log10(l_OP / km)")),
        (
            "coefficients",
            Value::Array(
                s.coefficients()
                    .iter()
                    .map(|c| object([("i", Value::from(c.i)), ("j", Value::from(c.j)), ("value", num(c.value))]))
                    .collect(),
            ),
        ),
    ])
}

pub fn cmd_curve(a: &CurveArgs, cfg: &RunConfig) -> Result<Report, CliError> {
    let spec = cfg.spec(a.l, a.snr, a.pr)?;
    let model = cfg.models(&[a.snr])?.remove(0);
    let step = a.step.unwrap_or(a.l / 400.0);
    if !(step > 0.0 && step <= a.l / 4.0) {
        return Err(CliError::Core(Error::domain("step", step, "must lie in (0, l/4]")));
    }
    let oracle = match a.exact {
        true => Some(ExactModel::new(cfg.env)?.grid_argmin_relay(&spec, step)?),
        false => None,
    };
    let xs = position_grid(a.l, step);
    let header: &[&str] = if a.exact {
        &["x_km", "x_over_l", "e1_joule", "e1_exact_joule"]
    } else {
        &["x_km", "x_over_l", "e1_joule"]
    };
    let mut t = Table::new(header);
    let mut best = (0.0, f64::INFINITY);
    for (i, &x) in xs.iter().enumerate() {
        let e = planner::limit_energy(x, &spec, &model)?;
        if e < best.1 {
            best = (x, e);
        }
        let mut row: Vec<Cell> = vec![x.into(), (x / a.l).into(), e.into()];
        if let Some(o) = &oracle {
            row.push(o.energy_curve[i].1.into());
        }
        t.push(row);
    }
    let mut extra = vec![
        ("l_km", num(a.l)),
        ("snr0_db", num(a.snr)),
        ("p_r_w", num(a.pr)),
        ("model", model_json(&model, cfg.model.name())),
        ("best_x_km", num(best.0)),
    ];
    if let Some(o) = &oracle {
        extra.push(("best_x_exact_km", num(o.best_x)));
    }
    let doc = table_doc("curve", cfg, &t, extra);
    Ok(Report {
        command: "curve",
        doc,
        table: t,
        default_format: Format::Csv,
        failure: None,
    })
}

pub fn cmd_sweep(a: &SweepArgs, cfg: &RunConfig) -> Result<Report, CliError> {
    let models = cfg.models(&a.snr.0)?;
    let oracle = if a.analytic {
        None
    } else {
        Some(open_distance_grid(cfg, &a.snr.0, &a.pr.0, Some(&a.sweep))?)
    };
    let header: &[&str] = if a.analytic {
        &["snr0_db", "p_r_w", "t1_km", "t2_km", "open_distance_km"]
    } else {
        &[
            "snr0_db",
            "p_r_w",
            "t1_km",
            "t2_km",
            "open_distance_km",
            "oracle_open_distance_km",
            "relative_deviation",
        ]
    };
    let mut t = Table::new(header);
    let mut k = 0;
    for m in &models {
        for &p in &a.pr.0 {
            let th = planner::thresholds(m, p)?;
            let l_op = th.open_distance();
            let mut row: Vec<Cell> = vec![m.snr0_db.into(), p.into(), th.t1_km.into(), th.t2_km.into(), l_op.into()];
            if let Some(o) = &oracle {
                let real = o[k].2;
                row.push(real.into());
                row.push(((l_op - real) / real).into());
            }
            k += 1;
            t.push(row);
        }
    }
    let doc = table_doc(
        "sweep",
        cfg,
        &t,
        vec![("model", Value::from(cfg.model.name()))],
    );
    Ok(Report {
        command: "sweep",
        doc,
        table: t,
        default_format: Format::Csv,
        failure: None,
    })
}
