//! Command-line surface: argument parsing, `key=value` config files, dispatch
//! and exit codes.
//!
//! Exit codes: 0 success, 1 numerical failure or failed rows (diagnostics as
//! JSON on stderr), 2 usage error.

pub mod output;
pub mod verify;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::elliptic::Modulus;
use crate::error::{Error, Result};
use crate::greens::{index_sweep, StabilityIndex};
use crate::hillop::{kernel_check, lame_check};
use crate::linspec::{pencil_report, peakon_chain_check, peakon_mode_check, stability_margin_sweep};
use crate::positivity::{certify_hill, codim_k_trials, codim_one_trials, Verdict};
use crate::profiles::{change_of_variables, cubic_profile, first_integral_residual, quadratic_profile, CubicNormalization, Model, WaveProfile};
use output::{emit_csv, emit_json, emit_svg, json_bytes, Cell, ReferenceLine, Series};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "WAVESTAB_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "wavestab", version, about = "Periodic waves of the Ostrovsky and short-pulse equations and their spectral stability")]
pub struct Cli {
    /// `key=value` file overriding the command's flags; unknown keys are rejected.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WaveModel {
    Quadratic,
    Cubic,
}

impl From<WaveModel> for Model {
    fn from(m: WaveModel) -> Self {
        match m {
            WaveModel::Quadratic => Model::Quadratic,
            WaveModel::Cubic => Model::Cubic,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a wave profile over one period.
    Wave(WaveArgs),
    /// Hill operator spectrum: kernel, signature and Lamé eigenvalues.
    Spectrum(SpectrumArgs),
    /// Stability index over a range of moduli.
    Index(IndexArgs),
    /// Eigenvalues of the pencil L Z = μ Z′ for one modulus or a range.
    Pencil(PencilArgs),
    /// The explicit unstable mode of the parabolic peakon.
    Peakon(PeakonArgs),
    /// Positivity certificate for a Hill operator, optionally with random trials.
    Certify(CertifyArgs),
    /// Run every acceptance check and write the artifacts.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct WaveArgs {
    #[arg(long, value_enum, default_value = "quadratic")]
    pub model: WaveModel,
    #[arg(long)]
    pub k: Option<f64>,
    /// Physical speed for the cubic wave; the canonical normalization if absent.
    #[arg(long)]
    pub speed: Option<f64>,
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long, value_enum, default_value = "quadratic")]
    pub model: WaveModel,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[arg(long, value_enum, default_value = "quadratic")]
    pub model: WaveModel,
    #[arg(long, default_value_t = 0.05)]
    pub k_min: f64,
    #[arg(long, default_value_t = 0.995)]
    pub k_max: f64,
    #[arg(long, default_value_t = 60)]
    pub steps: usize,
    #[arg(long, default_value_t = 256)]
    pub n_quad: usize,
    /// Relative discrepancy above which a row fails.
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PencilArgs {
    #[arg(long, value_enum, default_value = "quadratic")]
    pub model: WaveModel,
    /// Single modulus; use `--k-min/--k-max/--steps` for a margin sweep instead.
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub k_min: Option<f64>,
    #[arg(long)]
    pub k_max: Option<f64>,
    #[arg(long, default_value_t = 3)]
    pub steps: usize,
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    #[arg(long, default_value_t = 0.3)]
    pub shift_re: f64,
    #[arg(long, default_value_t = 0.0)]
    pub shift_im: f64,
    /// `max|Re μ|` at or above this fails.
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PeakonArgs {
    /// Half-length `L` of the peakon's domain.
    #[arg(long, default_value_t = 3.0)]
    pub length: f64,
    #[arg(long, default_value_t = 15.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 3001)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long, value_enum, default_value = "quadratic")]
    pub model: WaveModel,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    /// Random instances per theorem (0 skips the trials).
    #[arg(long, default_value_t = 0)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value = "verify_out")]
    pub out_dir: PathBuf,
}

/// Parse a `key=value` file; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
        let key = key.trim().replace('-', "_");
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key {key}", i + 1)));
        }
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_model(value: &str) -> Result<WaveModel> {
    WaveModel::from_str(value, true).map_err(|_| Error::Config(format!("model: unknown model {value:?}")))
}

macro_rules! apply_keys {
    ($args:expr, $map:expr, { $($key:literal => $field:ident : $kind:tt),* $(,)? }) => {{
        for (key, value) in $map {
            match key.as_str() {
                $($key => apply_keys!(@set $args.$field, $kind, $key, value),)*
                other => return Err(Error::Config(format!("unknown key {other:?}"))),
            }
        }
        Ok(())
    }};
    (@set $target:expr, model, $key:literal, $value:expr) => { $target = parse_model($value)? };
    (@set $target:expr, opt, $key:literal, $value:expr) => { $target = Some(parse_value($key, $value)?) };
    (@set $target:expr, val, $key:literal, $value:expr) => { $target = parse_value($key, $value)? };
}

impl Command {
    /// Override flags with the entries of a config file.
    pub fn apply_config(&mut self, map: &BTreeMap<String, String>) -> Result<()> {
        match self {
            Command::Wave(a) => apply_keys!(a, map, {
                "model" => model: model, "k" => k: opt, "speed" => speed: opt,
                "samples" => samples: val, "out" => out: opt,
            }),
            Command::Spectrum(a) => apply_keys!(a, map, {
                "model" => model: model, "k" => k: opt, "n" => n: val, "out" => out: opt,
            }),
            Command::Index(a) => apply_keys!(a, map, {
                "model" => model: model, "k_min" => k_min: val, "k_max" => k_max: val,
                "steps" => steps: val, "n_quad" => n_quad: val, "tolerance" => tolerance: val,
                "out" => out: opt, "svg" => svg: opt,
            }),
            Command::Pencil(a) => apply_keys!(a, map, {
                "model" => model: model, "k" => k: opt, "k_min" => k_min: opt, "k_max" => k_max: opt,
                "steps" => steps: val, "n" => n: val, "shift_re" => shift_re: val,
                "shift_im" => shift_im: val, "tolerance" => tolerance: val, "out" => out: opt,
            }),
            Command::Peakon(a) => apply_keys!(a, map, {
                "length" => length: val, "x_max" => x_max: val, "n" => n: val, "out" => out: opt,
            }),
            Command::Certify(a) => apply_keys!(a, map, {
                "model" => model: model, "k" => k: opt, "n" => n: val, "trials" => trials: val,
                "seed" => seed: val, "out" => out: opt,
            }),
            Command::Verify(a) => apply_keys!(a, map, { "out_dir" => out_dir: val }),
        }
    }

    /// Check ranges: moduli in (0, 1), at least two sweep steps, even grids.
    pub fn validate(&self) -> Result<()> {
        let modulus = |k: Option<f64>| match k {
            Some(k) if k > 0.0 && k < 1.0 => Ok(()),
            Some(k) => Err(Error::Config(format!("k = {k} must lie in (0, 1)"))),
            None => Err(Error::Config("--k is required".into())),
        };
        let even = |n: usize| {
            if n.is_multiple_of(2) && n >= 16 {
                Ok(())
            } else {
                Err(Error::Config(format!("n = {n} must be even and at least 16")))
            }
        };
        let range = |lo: f64, hi: f64, steps: usize| {
            if !(lo > 0.0 && hi < 1.0 && lo < hi) {
                Err(Error::Config(format!("k-range [{lo}, {hi}] must be an increasing range inside (0, 1)")))
            } else if steps < 2 {
                Err(Error::Config(format!("steps = {steps} must be at least 2")))
            } else {
                Ok(())
            }
        };
        match self {
            Command::Wave(a) => {
                modulus(a.k)?;
                if a.samples < 2 {
                    return Err(Error::Config("samples must be at least 2".into()));
                }
                if let Some(c) = a.speed {
                    if !(c > 0.0) {
                        return Err(Error::Config(format!("speed = {c} must be positive")));
                    }
                }
                Ok(())
            }
            Command::Spectrum(a) => modulus(a.k).and(even(a.n)),
            Command::Index(a) => range(a.k_min, a.k_max, a.steps).and(even(a.n_quad)),
            Command::Pencil(a) => {
                even(a.n)?;
                match (a.k, a.k_min, a.k_max) {
                    (Some(_), None, None) => modulus(a.k),
                    (None, Some(lo), Some(hi)) => range(lo, hi, a.steps),
                    _ => Err(Error::Config("give either --k or both --k-min and --k-max".into())),
                }
            }
            Command::Peakon(a) => {
                if a.length > 0.0 && a.x_max >= 15.0 && a.n >= 512 {
                    Ok(())
                } else {
                    Err(Error::Config("need length > 0, x-max >= 15 and n >= 512".into()))
                }
            }
            Command::Certify(a) => modulus(a.k).and(even(a.n)),
            Command::Verify(_) => Ok(()),
        }
    }
}

/// Whether a run produced failed rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Clean,
    FailedRows,
}

/// Row status of a sweep record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Warn,
    Fail,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Warn => "warn",
            Status::Fail => "fail",
        }
    }
}

pub const INDEX_HEADER: [&str; 6] = ["k", "index_greens", "index_spectral", "rel_discrepancy", "wronskian", "status"];

/// `warn` marks flagged small moduli (not cross-validated); `fail` a
/// nonnegative index, a discrepancy at or above `tolerance`, or an error.
pub fn index_status(r: &StabilityIndex, tolerance: f64) -> Status {
    if !(r.value_greens < 0.0) {
        Status::Fail
    } else if r.small_k {
        Status::Warn
    } else if r.discrepancy < tolerance {
        Status::Ok
    } else {
        Status::Fail
    }
}

/// CSV rows of an index sweep; failed evaluations become `NaN` rows marked `fail`.
pub fn index_rows(records: &[(f64, Result<StabilityIndex>)], tolerance: f64) -> Vec<Vec<Cell>> {
    records
        .iter()
        .map(|(k, r)| match r {
            Ok(r) => vec![
                Cell::Float(*k),
                Cell::Float(r.value_greens),
                Cell::Float(r.value_spectral),
                Cell::Float(r.discrepancy),
                Cell::Float(r.wronskian()),
                Cell::Text(index_status(r, tolerance).as_str().into()),
            ],
            Err(_) => vec![
                Cell::Float(*k),
                Cell::Float(f64::NAN),
                Cell::Float(f64::NAN),
                Cell::Float(f64::NAN),
                Cell::Float(f64::NAN),
                Cell::Text(Status::Fail.as_str().into()),
            ],
        })
        .collect()
}

fn print_json<T: Serialize + ?Sized>(value: &T, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => emit_json(value, p),
        None => {
            print!("{}", String::from_utf8_lossy(&json_bytes(value)?));
            Ok(())
        }
    }
}

fn wave_profile(model: WaveModel, k: Modulus, speed: Option<f64>) -> Result<WaveProfile> {
    match model {
        WaveModel::Quadratic => quadratic_profile(k),
        WaveModel::Cubic => cubic_profile(k, speed.map_or(CubicNormalization::Canonical, CubicNormalization::Physical)),
    }
}

#[derive(Serialize)]
struct WaveSummary {
    profile: WaveProfile,
    period: f64,
    first_integral_residual: f64,
    monotonicity_margin: f64,
}

fn run_wave(a: &WaveArgs) -> Result<Outcome> {
    let k = Modulus::interior(a.k.expect("validated"))?;
    let p = wave_profile(a.model, k, a.speed)?;
    let cov = change_of_variables(&p)?;
    let summary = WaveSummary {
        profile: p,
        period: p.period(),
        first_integral_residual: first_integral_residual(&p, 1024)?,
        monotonicity_margin: cov.monotonicity_margin,
    };
    if let Some(out) = &a.out {
        let grid = p.grid(a.samples.max(2) + a.samples % 2)?;
        let rows: Vec<Vec<Cell>> = grid
            .points()
            .into_iter()
            .map(|x| {
                let eta = x * p.eta_per_native;
                vec![Cell::Float(x), Cell::Float(p.phi(x)), Cell::Float(p.dphi(x)), Cell::Float(cov.xi(eta))]
            })
            .collect();
        emit_csv(&["x", "phi", "dphi", "xi"], &rows, out)?;
    }
    print_json(&summary, None)?;
    Ok(Outcome::Clean)
}

#[derive(Serialize)]
struct SpectrumSummary {
    kernel: crate::hillop::KernelReport,
    lame: crate::hillop::LameReport,
}

fn run_spectrum(a: &SpectrumArgs) -> Result<Outcome> {
    let k = Modulus::interior(a.k.expect("validated"))?;
    let p = wave_profile(a.model, k, None)?;
    let summary = SpectrumSummary {
        kernel: kernel_check(&p, a.n)?,
        lame: lame_check(k, a.n)?,
    };
    print_json(&summary, a.out.as_deref())?;
    Ok(Outcome::Clean)
}

fn run_index(a: &IndexArgs) -> Result<Outcome> {
    let ks = verify::linspace(a.k_min, a.k_max, a.steps);
    let model = Model::from(a.model);
    let records = index_sweep(model, &ks, a.n_quad);
    let rows = index_rows(&records, a.tolerance);
    let failed = rows.iter().any(|r| r[5] == Cell::Text("fail".into()));
    match &a.out {
        Some(p) => emit_csv(&INDEX_HEADER, &rows, p)?,
        None => print!("{}", String::from_utf8_lossy(&output::csv_bytes(&INDEX_HEADER, &rows, "stdout")?)),
    }
    if let Some(svg) = &a.svg {
        let series = Series {
            name: format!("{model} index"),
            points: records
                .iter()
                .filter_map(|(k, r)| r.as_ref().ok().map(|r| (*k, r.value_greens)))
                .collect(),
        };
        let refs = match a.model {
            WaveModel::Quadratic => vec![
                ReferenceLine { value: -24.0, label: "-24".into() },
                ReferenceLine {
                    value: -24.0 * PI,
                    label: "-24π".into(),
                },
            ],
            WaveModel::Cubic => vec![ReferenceLine { value: -1.0, label: "-1".into() }],
        };
        emit_svg(&[series], &refs, "k", "index", svg)?;
    }
    Ok(if failed { Outcome::FailedRows } else { Outcome::Clean })
}

fn run_pencil(a: &PencilArgs) -> Result<Outcome> {
    let model = Model::from(a.model);
    if let Some(k) = a.k {
        let shift = Complex64::new(a.shift_re, a.shift_im);
        let report = pencil_report(model, Modulus::interior(k)?, a.n, shift)?;
        print_json(&report, a.out.as_deref())?;
        let ok = report.max_re < a.tolerance && report.constraints.passed;
        return Ok(if ok { Outcome::Clean } else { Outcome::FailedRows });
    }
    let ks = verify::linspace(a.k_min.expect("validated"), a.k_max.expect("validated"), a.steps);
    let sweep = stability_margin_sweep(model, &ks, a.n);
    let rows: Vec<Vec<Cell>> = sweep
        .rows
        .iter()
        .map(|r| {
            let ok = r.error.is_none() && r.max_re < a.tolerance;
            vec![
                Cell::Float(r.k),
                Cell::Float(r.max_re),
                Cell::Int(r.n_finite),
                Cell::Text(if ok { "ok" } else { "fail" }.into()),
            ]
        })
        .collect();
    let failed = rows.iter().any(|r| r[3] == Cell::Text("fail".into()));
    let header = ["k", "max_re", "n_finite", "status"];
    match &a.out {
        Some(p) => emit_csv(&header, &rows, p)?,
        None => print!("{}", String::from_utf8_lossy(&output::csv_bytes(&header, &rows, "stdout")?)),
    }
    Ok(if failed { Outcome::FailedRows } else { Outcome::Clean })
}

#[derive(Serialize)]
struct PeakonSummary {
    mode: crate::linspec::PeakonModeReport,
    chain: crate::linspec::PeakonChainReport,
    chain_passed: bool,
}

fn run_peakon(a: &PeakonArgs) -> Result<Outcome> {
    let summary = PeakonSummary {
        mode: peakon_mode_check(a.length, a.x_max, a.n)?,
        chain: peakon_chain_check(a.length)?,
        chain_passed: false,
    };
    let summary = PeakonSummary {
        chain_passed: summary.chain.passed(),
        ..summary
    };
    print_json(&summary, a.out.as_deref())?;
    Ok(if summary.chain_passed { Outcome::Clean } else { Outcome::FailedRows })
}

#[derive(Serialize)]
struct CertifySummary {
    certificate: crate::positivity::Certificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<[crate::positivity::TrialSummary; 2]>,
}

fn run_certify(a: &CertifyArgs) -> Result<Outcome> {
    let (certificate, _) = certify_hill(a.model.into(), Modulus::interior(a.k.expect("validated"))?, a.n)?;
    let trials = (a.trials > 0).then(|| [codim_one_trials(a.trials, a.seed), codim_k_trials(a.trials, a.seed.wrapping_add(1 << 32))]);
    let ok = certificate.verdict == Verdict::ConclusionHolds && trials.is_none_or(|t| t.iter().all(|s| s.conclusion_failures == 0));
    print_json(&CertifySummary { certificate, trials }, a.out.as_deref())?;
    Ok(if ok { Outcome::Clean } else { Outcome::FailedRows })
}

fn run_verify(a: &VerifyArgs) -> Result<Outcome> {
    let results = verify::run_verify(&a.out_dir)?;
    for r in &results {
        println!("{} criterion {:>2} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.id, r.name, r.detail);
    }
    Ok(if results.iter().all(|r| r.passed) {
        Outcome::Clean
    } else {
        Outcome::FailedRows
    })
}

/// Dispatch a parsed, validated command.
pub fn run(command: &Command) -> Result<Outcome> {
    match command {
        Command::Wave(a) => run_wave(a),
        Command::Spectrum(a) => run_spectrum(a),
        Command::Index(a) => run_index(a),
        Command::Pencil(a) => run_pencil(a),
        Command::Peakon(a) => run_peakon(a),
        Command::Certify(a) => run_certify(a),
        Command::Verify(a) => run_verify(a),
    }
}

fn usage_error(message: &str) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(2)
}

fn configure_workers() -> std::result::Result<(), String> {
    let Ok(value) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{WORKERS_ENV} must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Diagnostic<'a> {
    error: &'a str,
    message: String,
}

/// Entry point for the binary.
pub fn main() -> ExitCode {
    let mut cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if let Err(e) = configure_workers() {
        return usage_error(&e);
    }
    if let Some(path) = &cli.config {
        let applied = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
            .and_then(|text| parse_config(&text))
            .and_then(|map| cli.command.apply_config(&map));
        if let Err(e) = applied {
            return usage_error(&e.to_string());
        }
    }
    if let Err(e) = cli.command.validate() {
        return usage_error(&e.to_string());
    }
    match run(&cli.command) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::FailedRows) => ExitCode::from(1),
        Err(e) => {
            let diagnostic = Diagnostic {
                error: e.kind(),
                message: e.to_string(),
            };
            eprintln!("{}", serde_json::to_string(&diagnostic).unwrap_or_else(|_| e.to_string()));
            ExitCode::from(1)
        }
    }
}
