//! The `expray` command line.
//!
//! Exit codes: 0 ok, 1 I/O, 2 usage, 3 ray ended prematurely, 4 numerical
//! failure (no convergence, continuation stuck, round trip failed),
//! 5 parameter not escaping or address not fast.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use expray_core::param::{trace_parameter_ray_with, ParamConfig};
use expray_core::rays::{trace_ray_with, TraceConfig, DEFAULT_EPS};
use expray_core::render::{overlay_rays, Plane, Polyline};
use expray_core::{
    classify_parameter, land_endpoint, ComplexPoint, Error, ExternalAddress, GridSpec, SpeedClass, Truncation,
};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::formats;
use crate::parallel;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TRUNCATED: i32 = 3;
pub const EXIT_CONVERGENCE: i32 = 4;
pub const EXIT_NOT_ESCAPING: i32 = 5;

const DEFAULT_SAMPLES: usize = 50;
const DEFAULT_BUDGET: usize = 1000;
const DEFAULT_CLASSIFY_EPS: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(name = "expray", version, about = "Dynamic and parameter rays of exp(z) + kappa")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Potential bound and speed class of an address.
    Address(Opts),
    /// Trace a dynamic ray to CSV.
    RayDyn(Opts),
    /// Trace a parameter ray to CSV.
    RayPar(Opts),
    /// Landing point of a fast parameter ray.
    Endpoint(Opts),
    /// Address and potential of an escaping parameter.
    Classify(Opts),
    /// Escape-time image of the parameter plane.
    RenderPar(Opts),
    /// Escape-time image of a dynamical plane.
    RenderDyn(Opts),
}

#[derive(Args, Debug, Default, Clone)]
pub struct Opts {
    /// Address literal, e.g. `p:1|0` or `f:2.0`.
    #[arg(long, allow_hyphen_values = true)]
    pub address: Option<String>,
    /// `re,im`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub kappa: Option<[f64; 2]>,
    #[arg(long)]
    pub t_lo: Option<f64>,
    #[arg(long)]
    pub t_hi: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// `cx,cy,width,height,px_w,px_h`.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub grid: Option<[f64; 6]>,
    #[arg(long)]
    pub budget: Option<usize>,
    /// Truncation index for the potential bound.
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Escape counts as CSV (render commands).
    #[arg(long)]
    pub counts: Option<PathBuf>,
    /// Overlay ray `ADDRESS;T_LO;T_HI;SAMPLES` (render commands, repeatable).
    #[arg(long = "ray", allow_hyphen_values = true)]
    pub rays: Vec<String>,
    /// Machine-readable JSON on stdout.
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse_floats<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers"));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.trim().parse().map_err(|_| format!("not a number: {p:?}"))?;
    }
    Ok(out)
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    parse_floats::<2>(s)
}

fn parse_grid(s: &str) -> Result<[f64; 6], String> {
    parse_floats::<6>(s)
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
    Io(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.into())
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::AddressParse { .. } | Error::DomainError { .. } => EXIT_USAGE,
        Error::SingularHit { .. } => EXIT_TRUNCATED,
        Error::OverflowDepth { .. }
        | Error::BoundaryStrip { .. }
        | Error::NoConvergence { .. }
        | Error::ContinuationStuck { .. }
        | Error::RoundtripFailure { .. } => EXIT_CONVERGENCE,
        Error::NotFastAddress | Error::NotEscaping { .. } => EXIT_NOT_ESCAPING,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::OverflowDepth { .. } => "overflow_depth",
        Error::InvalidInput(_) => "invalid_input",
        Error::AddressParse { .. } => "address_parse",
        Error::BoundaryStrip { .. } => "boundary_strip",
        Error::SingularHit { .. } => "singular_hit",
        Error::NoConvergence { .. } => "no_convergence",
        Error::DomainError { .. } => "domain_error",
        Error::ContinuationStuck { .. } => "continuation_stuck",
        Error::NotFastAddress => "not_fast_address",
        Error::NotEscaping { .. } => "not_escaping",
        Error::RoundtripFailure { .. } => "roundtrip_failure",
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let json = match &cli.command {
        Command::Address(o)
        | Command::RayDyn(o)
        | Command::RayPar(o)
        | Command::Endpoint(o)
        | Command::Classify(o)
        | Command::RenderPar(o)
        | Command::RenderDyn(o) => o.json,
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(f) => {
            let (code, msg, kind) = match &f {
                Failure::Usage(m) => (EXIT_USAGE, m.clone(), "usage"),
                Failure::Core(e) => (exit_code(e), e.to_string(), error_kind(e)),
                Failure::Io(e) => (EXIT_IO, format!("{e:#}"), "io"),
            };
            if json {
                let mut v = json!({ "error": kind, "message": msg });
                if let Failure::Core(Error::NotEscaping { verdict }) = &f {
                    v["verdict"] = serde_json::to_value(verdict).expect("verdict");
                }
                print!("{}", formats::pretty(&v));
            }
            eprintln!("expray: {msg}");
            code
        }
    }
}

/// Flags merged over the config file.
struct Settings {
    o: Opts,
}

impl Settings {
    fn resolve(o: Opts) -> Result<Self, Failure> {
        let cfg = match &o.config {
            Some(p) => RunConfig::load(p).map_err(|e| Failure::Usage(format!("{e:#}")))?,
            None => RunConfig::default(),
        };
        let merged = Opts {
            address: o.address.or(cfg.address),
            kappa: o.kappa.or(cfg.kappa),
            t_lo: o.t_lo.or(cfg.t_lo),
            t_hi: o.t_hi.or(cfg.t_hi),
            samples: o.samples.or(cfg.samples),
            eps: o.eps.or(cfg.eps),
            grid: o.grid.or(cfg.grid),
            budget: o.budget.or(cfg.budget),
            kmax: o.kmax.or(cfg.kmax),
            out: o.out.or(cfg.out),
            counts: o.counts,
            rays: if o.rays.is_empty() {
                cfg.rays.unwrap_or_default()
            } else {
                o.rays
            },
            json: o.json,
            config: o.config,
        };
        Ok(Settings { o: merged })
    }

    fn address(&self) -> Result<ExternalAddress, Failure> {
        let lit = self.o.address.as_deref().ok_or_else(|| missing("--address"))?;
        Ok(lit.parse::<ExternalAddress>()?)
    }

    fn kappa(&self) -> Result<ComplexPoint, Failure> {
        let [re, im] = self.o.kappa.ok_or_else(|| missing("--kappa"))?;
        Ok(ComplexPoint::new(re, im)?)
    }

    fn t_range(&self) -> Result<(f64, f64), Failure> {
        Ok((
            self.o.t_lo.ok_or_else(|| missing("--t-lo"))?,
            self.o.t_hi.ok_or_else(|| missing("--t-hi"))?,
        ))
    }

    fn samples(&self) -> usize {
        self.o.samples.unwrap_or(DEFAULT_SAMPLES)
    }

    fn eps(&self, default: f64) -> f64 {
        self.o.eps.unwrap_or(default)
    }

    fn budget(&self) -> usize {
        self.o.budget.unwrap_or(DEFAULT_BUDGET)
    }

    fn kmax(&self) -> usize {
        self.o.kmax.unwrap_or(expray_core::address::DEFAULT_K_MAX)
    }

    fn out(&self) -> Result<&Path, Failure> {
        self.o.out.as_deref().ok_or_else(|| missing("--out"))
    }

    fn grid(&self) -> Result<GridSpec, Failure> {
        let [cx, cy, w, h, pw, ph] = self.o.grid.ok_or_else(|| missing("--grid"))?;
        let px = |v: f64| {
            if v >= 1.0 && v.fract() == 0.0 && v <= 1e6 {
                Ok(v as usize)
            } else {
                Err(Failure::Usage("grid pixel counts must be positive integers".into()))
            }
        };
        let mut g = GridSpec::new(ComplexPoint::new(cx, cy)?, w, h, px(pw)?, px(ph)?)?;
        g.budget = self.budget();
        g.validate()?;
        Ok(g)
    }
}

fn missing(flag: &str) -> Failure {
    Failure::Usage(format!("missing required option {flag}"))
}

fn dispatch(cmd: Command) -> Result<i32, Failure> {
    match cmd {
        Command::Address(o) => cmd_address(&Settings::resolve(o)?),
        Command::RayDyn(o) => cmd_ray_dyn(&Settings::resolve(o)?),
        Command::RayPar(o) => cmd_ray_par(&Settings::resolve(o)?),
        Command::Endpoint(o) => cmd_endpoint(&Settings::resolve(o)?),
        Command::Classify(o) => cmd_classify(&Settings::resolve(o)?),
        Command::RenderPar(o) => cmd_render(&Settings::resolve(o)?, None),
        Command::RenderDyn(o) => {
            let s = Settings::resolve(o)?;
            let k = s.kappa()?;
            cmd_render(&s, Some(k))
        }
    }
}

fn speed_name(s: SpeedClass) -> &'static str {
    match s {
        SpeedClass::Slow => "slow",
        SpeedClass::Fast => "fast",
        SpeedClass::Undetermined => "undetermined",
    }
}

fn cmd_address(s: &Settings) -> Result<i32, Failure> {
    let a = s.address()?;
    let b = a.potential_bound(s.kmax())?;
    let entries: Vec<i64> = (1..=8).map_while(|k| a.entry(k).ok()).collect();
    if s.o.json {
        let v = json!({
            "address": a.literal(),
            "speed": speed_name(a.speed()),
            "t_s": b.estimate,
            "exact": b.exact,
            "uncertainty": b.uncertainty,
            "entries": entries,
        });
        print!("{}", formats::pretty(&v));
    } else {
        println!("address  {}", a.literal());
        println!("speed    {}", speed_name(a.speed()));
        if b.exact {
            println!("t_s      {} (exact)", formats::fmt_f64(b.estimate));
        } else {
            println!(
                "t_s      {} (+{})",
                formats::fmt_f64(b.estimate),
                formats::fmt_f64(b.uncertainty)
            );
        }
        let shown: Vec<String> = entries.iter().map(|v| v.to_string()).collect();
        println!("entries  {}", shown.join(" "));
    }
    Ok(EXIT_OK)
}

fn emit_table(s: &Settings, csv: &str, sidecar: &Value) -> Result<(), Failure> {
    match &s.o.out {
        Some(p) => formats::write_with_sidecar(p, csv, sidecar)?,
        None if !s.o.json => print!("{csv}"),
        None => {}
    }
    if s.o.json {
        print!("{}", formats::pretty(sidecar));
    }
    Ok(())
}

fn cmd_ray_dyn(s: &Settings) -> Result<i32, Failure> {
    let (lo, hi) = s.t_range()?;
    let cfg = TraceConfig {
        eps: s.eps(DEFAULT_EPS),
        ..TraceConfig::default()
    };
    let tr = trace_ray_with(s.kappa()?, &s.address()?, lo, hi, s.samples(), &cfg)?;
    emit_table(s, &formats::ray_csv(&tr), &formats::ray_sidecar(&tr))?;
    Ok(if tr.samples.is_empty() && !tr.failed.is_empty() {
        EXIT_CONVERGENCE
    } else if matches!(tr.truncation, Truncation::PrematureEnd { .. }) {
        EXIT_TRUNCATED
    } else {
        EXIT_OK
    })
}

fn cmd_ray_par(s: &Settings) -> Result<i32, Failure> {
    let (lo, hi) = s.t_range()?;
    let tr = trace_parameter_ray_with(
        &s.address()?,
        lo,
        hi,
        s.samples(),
        s.eps(DEFAULT_EPS),
        &ParamConfig::default(),
    )?;
    emit_table(s, &formats::param_csv(&tr), &formats::param_sidecar(&tr))?;
    Ok(EXIT_OK)
}

fn cmd_endpoint(s: &Settings) -> Result<i32, Failure> {
    let a = s.address()?;
    let e = land_endpoint(&a, s.eps(DEFAULT_EPS))?;
    let v = json!({
        "address": a.literal(),
        "kappa": [e.sample.kappa.re(), e.sample.kappa.im()],
        "t_s": e.t_s.estimate,
        "residual": e.sample.residual,
        "newton_iters": e.sample.newton_iters,
        "continuation_steps": e.continuation_steps,
        "verdict": serde_json::to_value(e.verdict).expect("verdict"),
    });
    if let Some(p) = &s.o.out {
        fs::write(p, formats::pretty(&v))?;
    }
    if s.o.json {
        print!("{}", formats::pretty(&v));
    } else {
        println!("kappa     {}", e.sample.kappa);
        println!("t_s       {}", formats::fmt_f64(e.t_s.estimate));
        println!("residual  {}", formats::fmt_f64(e.sample.residual));
    }
    Ok(EXIT_OK)
}

fn cmd_classify(s: &Settings) -> Result<i32, Failure> {
    let k = s.kappa()?;
    let c = classify_parameter(k, s.budget(), s.eps(DEFAULT_CLASSIFY_EPS))?;
    if s.o.json {
        let v = json!({
            "kappa": [k.re(), k.im()],
            "address": c.address.literal(),
            "observed": c.observed,
            "t": c.t,
            "verified_kappa": [c.verified_kappa.re(), c.verified_kappa.im()],
            "roundtrip_error": c.roundtrip_error,
        });
        print!("{}", formats::pretty(&v));
    } else {
        println!("address    {}", c.address.literal());
        println!("t          {}", formats::fmt_f64(c.t));
        println!("roundtrip  {}", formats::fmt_f64(c.roundtrip_error));
    }
    Ok(EXIT_OK)
}

/// `ADDRESS;T_LO;T_HI;SAMPLES`.
fn parse_overlay(spec: &str) -> Result<(ExternalAddress, f64, f64, usize), Failure> {
    let bad = || Failure::Usage(format!("bad --ray value {spec:?}, expected ADDRESS;T_LO;T_HI;SAMPLES"));
    let parts: Vec<&str> = spec.split(';').collect();
    if parts.len() != 4 {
        return Err(bad());
    }
    Ok((
        parts[0].parse()?,
        parts[1].trim().parse().map_err(|_| bad())?,
        parts[2].trim().parse().map_err(|_| bad())?,
        parts[3].trim().parse().map_err(|_| bad())?,
    ))
}

fn cmd_render(s: &Settings, kappa: Option<ComplexPoint>) -> Result<i32, Failure> {
    let grid = s.grid()?;
    let out = s.out()?;
    let plane = kappa.map_or(Plane::Parameter, Plane::Dynamic);
    let mut lines = Vec::new();
    let mut truncated = false;
    for spec in &s.o.rays {
        let (a, lo, hi, n) = parse_overlay(spec)?;
        match kappa {
            None => {
                let tr = trace_parameter_ray_with(&a, lo, hi, n, s.eps(DEFAULT_EPS), &ParamConfig::default())?;
                lines.push(Polyline::from(&tr));
            }
            Some(k) => {
                let cfg = TraceConfig {
                    eps: s.eps(DEFAULT_EPS),
                    ..TraceConfig::default()
                };
                let tr = trace_ray_with(k, &a, lo, hi, n, &cfg)?;
                truncated |= matches!(tr.truncation, Truncation::PrematureEnd { .. });
                lines.push(Polyline::from(&tr));
            }
        }
    }
    let img = parallel::render(&grid, plane, parallel::threads_from_env())?;
    fs::write(out, formats::ppm_bytes(&overlay_rays(&img, &lines)))?;
    if let Some(p) = &s.o.counts {
        fs::write(p, formats::counts_csv(&img))?;
    }
    let escaped = img.counts.iter().filter(|c| c.is_some()).count();
    if s.o.json {
        let v = json!({
            "out": out.display().to_string(),
            "width": grid.px_w,
            "height": grid.px_h,
            "escaped": escaped,
            "rays": lines.len(),
            "truncated": truncated,
        });
        print!("{}", formats::pretty(&v));
    } else {
        println!(
            "wrote {} ({}x{}, {} escaping pixels)",
            out.display(),
            grid.px_w,
            grid.px_h,
            escaped
        );
    }
    Ok(EXIT_OK)
}
