//! The `verify` command: recompute every acceptance quantity, write the
//! artifacts, and report one verdict per criterion.

use std::f64::consts::PI;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::output::{csv_bytes, json_bytes, svg_bytes, write_atomic, Cell, ReferenceLine, Series};
use super::{index_rows, INDEX_HEADER};
use crate::elliptic::{complete_k, Modulus};
use crate::error::Result;
use crate::greens::{build_tilde_system, d_matrix_cubic, evaluate_cubic, evaluate_quadratic, index_sweep, psi_cubic, psi_quadratic, IndexComponents, StabilityIndex};
use crate::hillop::{kernel_check, lame_check};
use crate::linspec::{pencil_report, peakon_chain_check, peakon_mode_check, stability_margin_sweep, DEFAULT_SHIFT};
use crate::positivity::{certify_hill, codim_k_trials, codim_one_converse, codim_one_trials, Verdict};
use crate::profiles::{cubic_profile, quadratic_profile, CubicNormalization, Model};

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn criterion(id: u32, name: &str, passed: bool, detail: String) -> CriterionResult {
    CriterionResult {
        id,
        name: name.into(),
        passed,
        detail,
    }
}

/// `steps` equally spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, steps: usize) -> Vec<f64> {
    (0..steps).map(|i| a + (b - a) * i as f64 / (steps - 1) as f64).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

type Artifacts = Vec<(String, Vec<u8>)>;

fn lame_and_kernels(out: &mut Vec<CriterionResult>, files: &mut Artifacts) -> Result<()> {
    let ks = [0.3, 0.5, 0.7, 0.9];
    let lame = ks
        .par_iter()
        .map(|&k| lame_check(Modulus::new(k)?, 256))
        .collect::<Result<Vec<_>>>()?;
    let worst = lame.iter().map(|r| r.max_rel_err).fold(0.0, f64::max);
    out.push(criterion(1, "Lame spectra", worst <= 1e-8, format!("max relative error {worst:.3e} (tol 1e-8)")));
    files.push(("lame.json".into(), json_bytes(&lame)?));

    let kernels = ks
        .par_iter()
        .map(|&k| {
            let m = Modulus::new(k)?;
            let q = kernel_check(&quadratic_profile(m)?, 256);
            let c = kernel_check(&cubic_profile(m, CubicNormalization::Canonical)?, 256);
            let tilde = build_tilde_system(m)?.kernel_residual(256)?;
            Ok((q, c, tilde))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0_f64;
    let mut signature = true;
    let mut reports = Vec::new();
    for (q, c, tilde) in kernels {
        worst = worst.max(tilde);
        for r in [q, c] {
            match r {
                Ok(r) => {
                    worst = worst.max(r.residual);
                    signature &= r.n_negative == 2 && r.n_zero == 1;
                    reports.push(r);
                }
                Err(_) => signature = false,
            }
        }
    }
    out.push(criterion(
        2,
        "Kernel and signature",
        worst < 1e-8 && signature,
        format!("max kernel residual {worst:.3e} (tol 1e-8); signature (2 negative, 1 zero) {}", if signature { "holds" } else { "violated" }),
    ));
    files.push(("kernels.json".into(), json_bytes(&reports)?));
    Ok(())
}

fn wronskians(out: &mut Vec<CriterionResult>) -> Result<()> {
    let ks = linspace(0.05, 0.99, 20);
    let rows = ks
        .par_iter()
        .map(|&k| {
            let m = Modulus::new(k)?;
            let ts = build_tilde_system(m)?;
            let q = psi_quadratic(&ts, 256)?;
            let quad = rel(q.wronskian, ts.wronskian_closed_form());
            let c = psi_cubic(m, 256)?;
            let half = c.half;
            let cubic = (0..64)
                .map(|i| {
                    let x = -half + 2.0 * half * i as f64 / 64.0;
                    (c.dpsi(x) * c.phi(x) - c.dphi(x) * c.psi(x) - 1.0).abs()
                })
                .fold(0.0, f64::max);
            Ok((quad, cubic))
        })
        .collect::<Result<Vec<_>>>()?;
    let quad = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let cubic = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    out.push(criterion(
        3,
        "Wronskians",
        quad <= 1e-9 && cubic <= 1e-9,
        format!("quadratic vs closed form {quad:.3e}; cubic |W - 1| {cubic:.3e} (tol 1e-9)"),
    ));
    Ok(())
}

fn values(records: &[(f64, Result<StabilityIndex>)]) -> Vec<Option<StabilityIndex>> {
    records.iter().map(|(_, r)| r.as_ref().ok().copied()).collect()
}

fn index_criteria(out: &mut Vec<CriterionResult>, files: &mut Artifacts) -> Result<()> {
    let ks = linspace(0.05, 0.995, 60);
    let quad = index_sweep(Model::Quadratic, &ks, 256);
    let cubic = index_sweep(Model::Cubic, &ks, 256);
    let qv = values(&quad);
    let cv = values(&cubic);

    let identity = cv
        .iter()
        .zip(&ks)
        .map(|(r, &k)| match r.map(|r| r.components) {
            Some(IndexComponents::Cubic { psi_dphi, .. }) => {
                let two_k = 2.0 * complete_k(Modulus::new(k).expect("grid inside (0,1)")).expect("k < 1");
                rel(psi_dphi, -two_k)
            }
            _ => f64::INFINITY,
        })
        .fold(0.0, f64::max);
    out.push(criterion(4, "Cubic identity", identity <= 1e-8, format!("max relative error of the identity {identity:.3e} (tol 1e-8)")));

    let all_negative = |v: &[Option<StabilityIndex>]| v.iter().all(|r| r.is_some_and(|r| r.value_greens < 0.0));
    let q_small = evaluate_quadratic(Modulus::new(0.01)?, 256)?.value_greens;
    let q_large = evaluate_quadratic(Modulus::new(0.999)?, 256)?.value_greens;
    let q_small_err = rel(q_small, -24.0 * PI);
    let q_large_err = rel(q_large, -24.0);
    out.push(criterion(
        5,
        "Quadratic index curve",
        all_negative(&qv) && q_small_err <= 0.01 && q_large_err <= 0.01,
        format!(
            "negative on grid: {}; index(0.01) = {q_small:.6} ({:.3}% from -24pi); index(0.999) = {q_large:.6} ({:.3}% from -24)",
            all_negative(&qv),
            100.0 * q_small_err,
            100.0 * q_large_err
        ),
    ));
    let c_large = evaluate_cubic(Modulus::new(0.999)?, 256)?.value_greens;
    let c_large_err = rel(c_large, -1.0);
    out.push(criterion(
        6,
        "Cubic index curve",
        all_negative(&cv) && c_large_err <= 0.01,
        format!("negative on grid: {}; index(0.999) = {c_large:.6} ({:.3}% from -1)", all_negative(&cv), 100.0 * c_large_err),
    ));
    let worst = qv
        .iter()
        .chain(&cv)
        .map(|r| r.map_or(f64::INFINITY, |r| r.discrepancy))
        .fold(0.0, f64::max);
    out.push(criterion(7, "Dual-method agreement", worst <= 1e-6, format!("max relative discrepancy {worst:.3e} (tol 1e-6)")));

    files.push(("index_quadratic.csv".into(), csv_bytes(&INDEX_HEADER, &index_rows(&quad, 1e-6), "index_quadratic.csv")?));
    files.push(("index_cubic.csv".into(), csv_bytes(&INDEX_HEADER, &index_rows(&cubic, 1e-6), "index_cubic.csv")?));
    let series = |name: &str, v: &[Option<StabilityIndex>]| Series {
        name: name.into(),
        points: ks.iter().zip(v).filter_map(|(&k, r)| r.map(|r| (k, r.value_greens))).collect(),
    };
    files.push((
        "index_quadratic.svg".into(),
        svg_bytes(
            &[series("quadratic index", &qv)],
            &[
                ReferenceLine { value: -24.0, label: "-24".into() },
                ReferenceLine {
                    value: -24.0 * PI,
                    label: "-24π".into(),
                },
            ],
            "k",
            "index",
            "index_quadratic.svg",
        )?,
    ));
    files.push((
        "index_cubic.svg".into(),
        svg_bytes(
            &[series("cubic index", &cv)],
            &[ReferenceLine { value: -1.0, label: "-1".into() }],
            "k",
            "index",
            "index_cubic.svg",
        )?,
    ));

    let d = ks
        .par_iter()
        .map(|&k| d_matrix_cubic(Modulus::new(k)?))
        .collect::<Result<Vec<_>>>()?;
    let off = d.iter().map(|r| r.d[0][1].abs().max(r.d[1][0].abs())).fold(0.0, f64::max);
    let signs = d.iter().all(|r| r.d[0][0] < 0.0 && r.d[1][1] < 0.0);
    let verdict = d.iter().all(|r| r.negative_definite);
    out.push(criterion(
        10,
        "Cubic D-matrix",
        off < 1e-9 && signs && verdict,
        format!("max |D12|, |D21| {off:.3e} (tol 1e-9); D11 < 0 and D22 < 0: {signs}; negative definite: {verdict}"),
    ));
    let rows: Vec<Vec<Cell>> = d
        .iter()
        .map(|r| {
            vec![
                Cell::Float(r.k),
                Cell::Float(r.d[0][0]),
                Cell::Float(r.d[0][1]),
                Cell::Float(r.d[1][0]),
                Cell::Float(r.d[1][1]),
                Cell::Text(r.negative_definite.to_string()),
            ]
        })
        .collect();
    files.push(("d_matrix.csv".into(), csv_bytes(&["k", "d11", "d12", "d21", "d22", "negative_definite"], &rows, "d_matrix.csv")?));
    Ok(())
}

fn pencil_criteria(out: &mut Vec<CriterionResult>, files: &mut Artifacts) -> Result<()> {
    let ks = [0.3, 0.6, 0.9];
    let cases: Vec<(Model, f64)> = [Model::Quadratic, Model::Cubic].iter().flat_map(|&m| ks.iter().map(move |&k| (m, k))).collect();
    let reports = cases
        .par_iter()
        .map(|&(m, k)| pencil_report(m, Modulus::new(k)?, 128, DEFAULT_SHIFT))
        .collect::<Result<Vec<_>>>()?;
    let coarse = reports.iter().map(|r| r.max_re).fold(0.0, f64::max);
    let fine_sweeps: Vec<_> = [Model::Quadratic, Model::Cubic]
        .iter()
        .map(|&m| stability_margin_sweep(m, &ks, 256))
        .collect();
    let fine = fine_sweeps
        .iter()
        .flat_map(|s| s.rows.iter().map(|r| r.max_re))
        .fold(0.0, |a: f64, b| if b.is_nan() { f64::INFINITY } else { a.max(b) });
    out.push(criterion(
        8,
        "Imaginary-axis spectrum",
        coarse < 1e-6 && fine < 1e-6,
        format!("max |Re mu| {coarse:.3e} at n = 128, {fine:.3e} at n = 256 (tol 1e-6)"),
    ));
    let constraints = reports.iter().all(|r| r.constraints.passed);
    let worst = reports
        .iter()
        .map(|r| r.constraints.potential.max(r.constraints.derivative).max(r.constraints.ground_state.unwrap_or(0.0)))
        .fold(0.0, f64::max);
    let checked: usize = reports.iter().map(|r| r.constraints.checked).sum();
    out.push(criterion(
        9,
        "Constraint verification",
        constraints && worst < 1e-6,
        format!("{checked} eigenpairs checked; max relative inner product {worst:.3e} (tol 1e-6)"),
    ));
    files.push(("pencil.json".into(), json_bytes(&reports)?));
    let rows: Vec<Vec<Cell>> = fine_sweeps
        .iter()
        .flat_map(|s| {
            s.rows.iter().map(move |r| {
                vec![
                    Cell::Text(s.model.to_string()),
                    Cell::Float(r.k),
                    Cell::Int(s.n),
                    Cell::Float(r.max_re),
                    Cell::Text(if r.stable { "ok" } else { "fail" }.into()),
                ]
            })
        })
        .collect();
    files.push(("margins.csv".into(), csv_bytes(&["model", "k", "n", "max_re", "status"], &rows, "margins.csv")?));
    Ok(())
}

#[derive(Serialize)]
struct TrialRecord {
    codim_one: crate::positivity::TrialSummary,
    codim_k: crate::positivity::TrialSummary,
    converse_counterexamples: usize,
}

fn positivity_criterion(out: &mut Vec<CriterionResult>, files: &mut Artifacts) -> Result<()> {
    let trials = TrialRecord {
        codim_one: codim_one_trials(1000, 1),
        codim_k: codim_k_trials(1000, 1_000_001),
        converse_counterexamples: codim_one_converse(1000, 2_000_001),
    };
    let cases: Vec<(Model, f64)> = [Model::Quadratic, Model::Cubic]
        .iter()
        .flat_map(|&m| [0.3, 0.5, 0.8].into_iter().map(move |k| (m, k)))
        .collect();
    let certs = cases
        .par_iter()
        .map(|&(m, k)| Ok(certify_hill(m, Modulus::new(k)?, 128)?.0))
        .collect::<Result<Vec<_>>>()?;
    let holds = certs.iter().all(|c| c.verdict == Verdict::ConclusionHolds);
    let failures = trials.codim_one.conclusion_failures + trials.codim_k.conclusion_failures;
    let enough = trials.codim_one.hypotheses_held >= 1000 && trials.codim_k.hypotheses_held >= 1000;
    out.push(criterion(
        11,
        "Positivity theorems",
        enough && failures == 0 && holds,
        format!(
            "{} + {} instances with hypotheses enforced, {failures} conclusion failures; certificates hold for both models: {holds}",
            trials.codim_one.hypotheses_held, trials.codim_k.hypotheses_held
        ),
    ));
    files.push(("trials.json".into(), json_bytes(&trials)?));
    files.push(("certificates.json".into(), json_bytes(&certs)?));
    Ok(())
}

#[derive(Serialize)]
struct PeakonRecord {
    mode: crate::linspec::PeakonModeReport,
    chain: crate::linspec::PeakonChainReport,
}

fn peakon_criterion(out: &mut Vec<CriterionResult>, files: &mut Artifacts) -> Result<()> {
    let length = 3.0;
    let mode = peakon_mode_check(length, 15.0, 3001);
    let chain = peakon_chain_check(length);
    let (mode, chain) = match (mode, chain) {
        (Ok(m), Ok(c)) => (m, c),
        (Err(e), _) | (_, Err(e)) => {
            out.push(criterion(12, "Peakon", false, e.to_string()));
            return Ok(());
        }
    };
    let passed = mode.residual_q < 1e-10
        && mode.residual_f < 1e-8
        && (mode.left_limit + 2.0).abs() < 1e-8
        && mode.right_limit.abs() < 1e-8
        && chain.passed()
        && (mode.mu - length / 27.0).abs() < 1e-10;
    out.push(criterion(
        12,
        "Peakon",
        passed,
        format!(
            "residual_q {:.3e}, residual_f {:.3e}, f(-15) + 2 = {:.3e}, f(15) = {:.3e}, chain max residual {:.3e}, mu = {:.12} (L/27 = {:.12})",
            mode.residual_q,
            mode.residual_f,
            mode.left_limit + 2.0,
            mode.right_limit,
            chain.slope_residual.max(chain.eigen_residual),
            mode.mu,
            length / 27.0
        ),
    ));
    files.push(("peakon.json".into(), json_bytes(&PeakonRecord { mode, chain })?));
    Ok(())
}

/// Criteria 1–12 and the artifacts they produce.
pub fn collect() -> Result<(Vec<CriterionResult>, Artifacts)> {
    let mut out = Vec::new();
    let mut files = Vec::new();
    lame_and_kernels(&mut out, &mut files)?;
    wronskians(&mut out)?;
    index_criteria(&mut out, &mut files)?;
    pencil_criteria(&mut out, &mut files)?;
    positivity_criterion(&mut out, &mut files)?;
    peakon_criterion(&mut out, &mut files)?;
    out.sort_by_key(|c| c.id);
    Ok((out, files))
}

/// Run everything, write the artifacts and `summary.json` into `dir`, and
/// check determinism by recomputing the artifacts.
pub fn run_verify(dir: &Path) -> Result<Vec<CriterionResult>> {
    let (mut results, files) = collect()?;
    for (name, bytes) in &files {
        write_atomic(&dir.join(name), bytes)?;
    }
    let (_, again) = collect()?;
    let identical = files.len() == again.len() && files.iter().zip(&again).all(|(a, b)| a == b);
    let differing: Vec<&str> = files
        .iter()
        .zip(&again)
        .filter(|(a, b)| a != b)
        .map(|(a, _)| a.0.as_str())
        .collect();
    results.push(criterion(
        13,
        "Determinism",
        identical,
        if identical {
            format!("{} artifacts byte-identical across two runs", files.len())
        } else {
            format!("differing artifacts: {}", differing.join(", "))
        },
    ));
    write_atomic(&dir.join("summary.json"), &json_bytes(&results)?)?;
    Ok(results)
}
