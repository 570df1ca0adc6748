//! Batch driver: JSON run configs in, JSON reports and CSV traces out.
//! Exit codes: 0 all checks pass, 1 a check fails, 2 inconclusive,
//! 3 configuration error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::betacalc::{b_constancy_scan, closedness_scan, GridSpec};
use crate::constructs::{
    build_pf_example, build_th001, build_th2, closing_example, ex01_pair, ex02_pair,
    th001_special, HolomorphicPair,
};
use crate::diffcore::{Direction, Point};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fields::{conformal_pair, DomainBox, MetricPair, OneFormField, RiemannMetricField};
use crate::phi::{solve_phi_ode, PhiFamily, Sign};
use crate::spray::{geodesic_trace, AbMetric};
use crate::verify::{
    class_beta_residual, class_spray_residual, conformality_residual, douglas_check, hamel_check,
    ClassId, ConformalityMode, Verdict, VerificationReport, DEFAULT_ANGLES, DEFAULT_TOL_CLASS,
    DEFAULT_TOL_DOUGLAS, DEFAULT_TOL_HAMEL, DIRECTION_SAMPLES,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Metric construction, by builder name or inline field formulas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSpec {
    Inline {
        a11: String,
        a12: String,
        a22: String,
        b1: String,
        b2: String,
    },
    Flat {
        b1: String,
        b2: String,
    },
    Conformal {
        sigma: String,
        xi: String,
        eta: String,
        b: f64,
    },
    PfExample {
        c1: f64,
        c2: f64,
        c3: f64,
        c4: f64,
        sign: Sign,
    },
    Th2 {
        b_field: String,
        u: String,
        v: String,
        sign: Sign,
    },
    Th001Special {
        c1: f64,
        c2: f64,
    },
    ClosingExample {
        sign: Sign,
        c: f64,
    },
    Ex01 {
        m: u32,
        b: f64,
        c: f64,
    },
    Ex02 {
        m: u32,
        b: f64,
        c: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    RandersType { eps: f64, k: f64 },
    Quadratic { sign: Sign },
    SquareRoot { k: f64, c: f64 },
    QuarticOde { k1: f64, k2: f64, k3: f64, eps: f64, s_max: f64 },
    IntegerPower { b: f64, c: f64, k: f64, m: u32 },
    HalfPower { b: f64, c: f64, k: f64, m: u32 },
    SingularB { b: f64, ctilde: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub x1: [f64; 2],
    pub x2: [f64; 2],
}

/// A check is either a plain name ("douglas", "hamel", "closedness",
/// "b_constancy", "conformality:thm2", "conformality:thm001",
/// "geodesic", "class:DOUGLAS_III" etc.) or a parameterized class
/// object like {"class": "DouglasI", "k1": ..., "k2": ..., "k3": ...}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CheckSpec {
    Named(String),
    Class(ClassId),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSpec {
    pub p: [f64; 2],
    pub y: [f64; 2],
    #[serde(default = "default_arclen")]
    pub arclen: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn default_arclen() -> f64 {
    0.5
}
fn default_steps() -> usize {
    512
}
fn default_grid() -> usize {
    17
}
fn default_angles() -> usize {
    DEFAULT_ANGLES
}
fn default_directions() -> usize {
    DIRECTION_SAMPLES
}
fn default_margin() -> f64 {
    0.05
}
fn default_tol_douglas() -> f64 {
    DEFAULT_TOL_DOUGLAS
}
fn default_tol_hamel() -> f64 {
    DEFAULT_TOL_HAMEL
}
fn default_tol_class() -> f64 {
    DEFAULT_TOL_CLASS
}
fn default_tol_geodesic() -> f64 {
    1e-5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub metric: MetricSpec,
    pub family: FamilySpec,
    pub domain: DomainSpec,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_angles")]
    pub angles: usize,
    #[serde(default = "default_directions")]
    pub directions: usize,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tol_douglas")]
    pub tol_douglas: f64,
    #[serde(default = "default_tol_hamel")]
    pub tol_hamel: f64,
    #[serde(default = "default_tol_class")]
    pub tol_class: f64,
    #[serde(default = "default_tol_geodesic")]
    pub tol_geodesic: f64,
    /// Absolute cap on |s| = beta/alpha for Hamel direction sampling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_cap: Option<f64>,
    pub checks: Vec<CheckSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub traces: Vec<TraceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: u32,
    pub config: RunConfig,
    pub checks: Vec<VerificationReport>,
    pub verdict: Verdict,
    pub wall_clock_ms: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceSummary {
    pub schema_version: u32,
    pub traces: Vec<TraceOutcome>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceOutcome {
    pub file: String,
    pub chord_deviation: f64,
    pub truncated: bool,
}

fn parse_field(name: &str, src: &str) -> Result<Expr> {
    Expr::parse(src).map_err(|e| Error::Config(format!("field '{name}': {e}")))
}

pub fn build_metric(spec: &MetricSpec, domain: DomainBox) -> Result<MetricPair> {
    match spec {
        MetricSpec::Inline { a11, a12, a22, b1, b2 } => Ok(MetricPair::new(
            RiemannMetricField {
                a11: parse_field("a11", a11)?,
                a12: parse_field("a12", a12)?,
                a22: parse_field("a22", a22)?,
            },
            OneFormField {
                b1: parse_field("b1", b1)?,
                b2: parse_field("b2", b2)?,
            },
            domain,
        )),
        MetricSpec::Flat { b1, b2 } => Ok(crate::fields::flat_pair(
            parse_field("b1", b1)?,
            parse_field("b2", b2)?,
            domain,
        )),
        MetricSpec::Conformal { sigma, xi, eta, b } => conformal_pair(
            parse_field("sigma", sigma)?,
            parse_field("xi", xi)?,
            parse_field("eta", eta)?,
            *b,
            domain,
        ),
        MetricSpec::PfExample { c1, c2, c3, c4, sign } => {
            build_pf_example(*c1, *c2, *c3, *c4, *sign, domain)
        }
        MetricSpec::Th2 { b_field, u, v, sign } => build_th2(
            parse_field("b_field", b_field)?,
            HolomorphicPair {
                u: parse_field("u", u)?,
                v: parse_field("v", v)?,
            },
            *sign,
            domain,
        ),
        MetricSpec::Th001Special { c1, c2 } => {
            build_th001(&th001_special(*c1, *c2, domain)?)
        }
        MetricSpec::ClosingExample { sign, c } => closing_example(*sign, *c, domain),
        MetricSpec::Ex01 { m, b, c } => Ok(ex01_pair(*m, *b, *c, domain)?.0),
        MetricSpec::Ex02 { m, b, c } => Ok(ex02_pair(*m, *b, *c, domain)?.0),
    }
}

pub fn build_family(spec: &FamilySpec) -> Result<PhiFamily> {
    Ok(match spec {
        FamilySpec::RandersType { eps, k } => PhiFamily::RandersType { eps: *eps, k: *k },
        FamilySpec::Quadratic { sign } => PhiFamily::Quadratic { sign: *sign },
        FamilySpec::SquareRoot { k, c } => PhiFamily::SquareRoot { k: *k, c: *c },
        FamilySpec::QuarticOde { k1, k2, k3, eps, s_max } => PhiFamily::QuarticOde(
            std::sync::Arc::new(solve_phi_ode(*k1, *k2, *k3, *eps, *s_max, 1e-10)?),
        ),
        FamilySpec::IntegerPower { b, c, k, m } => PhiFamily::IntegerPower {
            b: *b,
            c: *c,
            k: *k,
            m: *m,
        },
        FamilySpec::HalfPower { b, c, k, m } => PhiFamily::HalfPower {
            b: *b,
            c: *c,
            k: *k,
            m: *m,
        },
        FamilySpec::SingularB { b, ctilde } => PhiFamily::SingularB {
            b: *b,
            ctilde: *ctilde,
        },
    })
}

fn validate(cfg: &RunConfig) -> Result<()> {
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "field 'schema_version': expected {SCHEMA_VERSION}, got {}",
            cfg.schema_version
        )));
    }
    for (name, v) in [
        ("tol_douglas", cfg.tol_douglas),
        ("tol_hamel", cfg.tol_hamel),
        ("tol_class", cfg.tol_class),
        ("tol_geodesic", cfg.tol_geodesic),
    ] {
        if !(v > 0.0) {
            return Err(Error::Config(format!(
                "field '{name}': tolerance must be positive, got {v}"
            )));
        }
    }
    if cfg.grid < 3 {
        return Err(Error::Config(format!(
            "field 'grid': need at least 3, got {}",
            cfg.grid
        )));
    }
    if !(0.0..0.5).contains(&cfg.margin) {
        return Err(Error::Config(format!(
            "field 'margin': must lie in [0, 0.5), got {}",
            cfg.margin
        )));
    }
    if cfg.domain.x1[0] >= cfg.domain.x1[1] || cfg.domain.x2[0] >= cfg.domain.x2[1] {
        return Err(Error::Config("field 'domain': empty box".into()));
    }
    Ok(())
}

fn domain_box(cfg: &RunConfig) -> DomainBox {
    DomainBox::new(
        (cfg.domain.x1[0], cfg.domain.x1[1]),
        (cfg.domain.x2[0], cfg.domain.x2[1]),
    )
}

fn scan_report(check: String, grid: &GridSpec, value: f64, seed: u64) -> VerificationReport {
    VerificationReport {
        check,
        grid: format!("{}x{} margin {}", grid.n1, grid.n2, grid.margin),
        per_point_residuals: Vec::new(),
        max_residual: value,
        mean_residual: value,
        recovered: Vec::new(),
        verdict: Verdict::Pass,
        tolerance: 0.0,
        excluded_points: 0,
        total_points: grid.n1 * grid.n2,
        seed,
    }
}

fn geodesic_report(cfg: &RunConfig, metric: &AbMetric) -> Result<VerificationReport> {
    let mut residuals = Vec::new();
    let mut truncated = 0usize;
    for t in &cfg.traces {
        let tr = geodesic_trace(
            metric,
            &Point::new(t.p[0], t.p[1]),
            &Direction::new(t.y[0], t.y[1]),
            t.arclen,
            t.steps,
        )?;
        residuals.push(tr.chord_deviation);
        if tr.truncated {
            truncated += 1;
        }
    }
    let max = residuals.iter().fold(0.0f64, |m, r| m.max(*r));
    let mean = if residuals.is_empty() {
        0.0
    } else {
        residuals.iter().sum::<f64>() / residuals.len() as f64
    };
    let total = cfg.traces.len();
    let verdict = if total == 0 || truncated * 5 > total {
        Verdict::Inconclusive
    } else if max <= cfg.tol_geodesic {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(VerificationReport {
        check: "geodesic".into(),
        grid: format!("{} traces", total),
        per_point_residuals: residuals,
        max_residual: max,
        mean_residual: mean,
        recovered: Vec::new(),
        verdict,
        tolerance: cfg.tol_geodesic,
        excluded_points: truncated,
        total_points: total,
        seed: cfg.seed,
    })
}

fn run_check(
    check: &CheckSpec,
    cfg: &RunConfig,
    metric: &AbMetric,
    grid: &GridSpec,
) -> Result<VerificationReport> {
    let pair = &metric.pair;
    let class_report = |id: &ClassId| -> Result<VerificationReport> {
        if id.is_spray_class() {
            class_spray_residual(id, pair, grid, cfg.tol_class)
        } else {
            class_beta_residual(id, pair, grid, cfg.tol_class)
        }
    };
    match check {
        CheckSpec::Class(id) => class_report(id),
        CheckSpec::Named(name) => match name.as_str() {
            "douglas" => Ok(douglas_check(metric, grid, cfg.angles, cfg.tol_douglas)),
            "hamel" => Ok(hamel_check(
                metric,
                grid,
                cfg.directions,
                cfg.s_cap,
                cfg.tol_hamel,
            )),
            "closedness" => {
                let max = closedness_scan(pair, grid)?;
                let tag = if max > 1e-3 { "not closed" } else { "closed" };
                Ok(scan_report(format!("closedness: {tag}"), grid, max, cfg.seed))
            }
            "b_constancy" => {
                let max = b_constancy_scan(pair, grid)?;
                let tag = if max > 1e-3 { "not constant" } else { "constant" };
                Ok(scan_report(
                    format!("b_constancy: {tag}"),
                    grid,
                    max,
                    cfg.seed,
                ))
            }
            "conformality:thm2" => {
                conformality_residual(pair, ConformalityMode::Thm2, grid, cfg.tol_class)
            }
            "conformality:thm001" => {
                conformality_residual(pair, ConformalityMode::Thm001, grid, cfg.tol_class)
            }
            "geodesic" => geodesic_report(cfg, metric),
            "class:DOUGLAS_III" => class_report(&ClassId::DouglasIII),
            "class:DOUGLAS_IV" => class_report(&ClassId::DouglasIV),
            "class:DOUGLAS_SING" => class_report(&ClassId::DouglasSing),
            other => Err(Error::Config(format!(
                "field 'checks': unknown check '{other}'"
            ))),
        },
    }
}

pub fn run_verify(cfg: &RunConfig) -> Result<ReportFile> {
    validate(cfg)?;
    let start = Instant::now();
    let pair = build_metric(&cfg.metric, domain_box(cfg))?;
    let family = build_family(&cfg.family)?;
    let metric = AbMetric::new(pair, family);
    let grid = GridSpec {
        n1: cfg.grid,
        n2: cfg.grid,
        margin: cfg.margin,
    };
    if cfg.checks.is_empty() {
        return Err(Error::Config("field 'checks': no checks requested".into()));
    }
    let mut checks = Vec::new();
    for c in &cfg.checks {
        checks.push(run_check(c, cfg, &metric, &grid)?);
    }
    let verdict = if checks.iter().any(|r| r.verdict == Verdict::Fail) {
        Verdict::Fail
    } else if checks.iter().any(|r| r.verdict == Verdict::Inconclusive) {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    Ok(ReportFile {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        checks,
        verdict,
        wall_clock_ms: start.elapsed().as_millis() as u64,
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

#[derive(Args, Clone, Debug, Default)]
pub struct Overrides {
    /// Douglas cubic-fit tolerance
    #[arg(long)]
    pub tol_douglas: Option<f64>,
    /// Hamel relative-residual tolerance
    #[arg(long)]
    pub tol_hamel: Option<f64>,
    /// Classification residual tolerance
    #[arg(long)]
    pub tol_class: Option<f64>,
    /// Grid resolution (N x N)
    #[arg(long)]
    pub grid: Option<usize>,
    /// Angle samples for the Douglas fit
    #[arg(long)]
    pub angles: Option<usize>,
    /// RNG seed recorded in reports
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sampling margin as a fraction of box size
    #[arg(long)]
    pub margin: Option<f64>,
    /// Output path (report JSON, or directory for traces)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(v) = self.tol_douglas {
            cfg.tol_douglas = v;
        }
        if let Some(v) = self.tol_hamel {
            cfg.tol_hamel = v;
        }
        if let Some(v) = self.tol_class {
            cfg.tol_class = v;
        }
        if let Some(v) = self.grid {
            cfg.grid = v;
        }
        if let Some(v) = self.angles {
            cfg.angles = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.margin {
            cfg.margin = v;
        }
        // the output path is applied at write time, not echoed into the
        // config, so reports stay byte-identical across output locations
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "finsler2d",
    about = "Numeric verification toolkit for two-dimensional (alpha, beta)-metrics"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run the configured check suite and write a JSON report
    Verify {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Integrate the configured geodesic traces and write CSV + summary
    Trace {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

pub fn cmd_verify(config_path: &Path, overrides: &Overrides) -> ExitCode {
    let mut cfg = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => return config_error(&e),
    };
    overrides.apply(&mut cfg);
    let report = match run_verify(&cfg) {
        Ok(r) => r,
        Err(e) => return config_error(&e),
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    let out = overrides
        .out
        .as_ref()
        .map(|p| p.display().to_string())
        .or_else(|| cfg.out.clone());
    if let Some(out) = out {
        if let Err(e) = fs::write(&out, json + "\n") {
            eprintln!("error: cannot write {out}: {e}");
            return ExitCode::from(3);
        }
    } else {
        println!("{json}");
    }
    match report.verdict {
        Verdict::Pass => ExitCode::SUCCESS,
        Verdict::Fail => ExitCode::from(1),
        Verdict::Inconclusive => ExitCode::from(2),
    }
}

pub fn cmd_trace(config_path: &Path, overrides: &Overrides) -> ExitCode {
    let mut cfg = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => return config_error(&e),
    };
    overrides.apply(&mut cfg);
    match trace_inner(&cfg, overrides.out.clone()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => config_error(&e),
    }
}

fn trace_inner(cfg: &RunConfig, out_override: Option<PathBuf>) -> Result<()> {
    validate(cfg)?;
    if cfg.traces.is_empty() {
        return Err(Error::Config("field 'traces': no traces requested".into()));
    }
    let pair = build_metric(&cfg.metric, domain_box(cfg))?;
    let family = build_family(&cfg.family)?;
    let metric = AbMetric::new(pair, family);
    let out_dir = out_override
        .unwrap_or_else(|| PathBuf::from(cfg.out.as_deref().unwrap_or("traces")));
    fs::create_dir_all(&out_dir)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut outcomes = Vec::new();
    for (i, t) in cfg.traces.iter().enumerate() {
        let tr = geodesic_trace(
            &metric,
            &Point::new(t.p[0], t.p[1]),
            &Direction::new(t.y[0], t.y[1]),
            t.arclen,
            t.steps,
        )?;
        let file = format!("trace_{i:03}.csv");
        let mut csv = String::from("t,x1,x2,y1,y2\n");
        for (tt, p, y) in &tr.points {
            csv.push_str(&format!("{tt},{},{},{},{}\n", p.x1, p.x2, y[0], y[1]));
        }
        fs::write(out_dir.join(&file), csv)
            .map_err(|e| Error::Config(format!("cannot write {file}: {e}")))?;
        outcomes.push(TraceOutcome {
            file,
            chord_deviation: tr.chord_deviation,
            truncated: tr.truncated,
        });
    }
    let summary = TraceSummary {
        schema_version: SCHEMA_VERSION,
        traces: outcomes,
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    fs::write(out_dir.join("summary.json"), json + "\n")
        .map_err(|e| Error::Config(format!("cannot write summary: {e}")))?;
    Ok(())
}

fn config_error(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(3)
}

pub fn run() -> ExitCode {
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::Verify { config, overrides } => cmd_verify(config, overrides),
        Cmd::Trace { config, overrides } => cmd_trace(config, overrides),
    }
}
