//! The linearized problem `L Z = μ Z′` as a matrix pencil, its constraint
//! structure, and the explicit peakon mode on the line.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::elliptic::Modulus;
use crate::error::{Error, Result};
use crate::hillop::{assemble, eig_sym, HillOperator};
use crate::linalg::{ComplexEigen, SymmetricEigen};
use crate::profiles::{cubic_profile, peakon_profile, quadratic_profile, CubicNormalization, Model, WaveProfile};
use crate::spectral::{central_first, central_second, first_derivative};

/// Default shift for the shift-invert reduction.
pub const DEFAULT_SHIFT: Complex64 = Complex64::new(0.3, 0.0);
/// `ρ` below this is the pencil's infinite eigenvalue.
pub const INFINITE_THRESHOLD: f64 = 1e-10;
/// A spectrum is on the imaginary axis when `max|Re μ| < MARGIN_TOL`.
pub const MARGIN_TOL: f64 = 1e-6;
/// Modes with `|μ|` below this are treated as `μ = 0`.
pub const ZERO_MODE: f64 = 1e-6;
/// Relative tolerance for the orthogonality constraints.
pub const CONSTRAINT_TOL: f64 = 1e-6;
/// Peakon residuals above this are verification failures.
pub const PEAKON_TOL: f64 = 1e-8;

const SHIFT_RETRIES: usize = 5;

/// Finite eigenvalues of `L Z = μ DZ` with their eigenvectors.
#[derive(Debug, Clone)]
pub struct PencilSpectrum {
    pub mus: Vec<Complex64>,
    /// Columns aligned with `mus`, unit Euclidean norm.
    pub vectors: DMatrix<Complex64>,
    pub max_re: f64,
    pub shift: Complex64,
    pub n: usize,
    /// Largest `‖Lz − μDz‖ / ((‖L‖ + |μ|‖D‖)‖z‖)`.
    pub residual: f64,
    /// Largest relative distance from `−μ` and `−μ̄` to the spectrum.
    pub symmetry_error: f64,
}

fn complexify(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

fn spectral_norm(m: &DMatrix<f64>) -> Result<f64> {
    let eig = SymmetricEigen::eigenvalues_only(&(m.transpose() * m))?;
    Ok(eig[eig.len() - 1].max(0.0).sqrt())
}

/// `(L − σD)⁻¹D`, or `None` if the factorization is numerically singular.
fn shift_invert(l: &DMatrix<f64>, d: &DMatrix<f64>, shift: Complex64) -> Option<DMatrix<Complex64>> {
    let a = complexify(l) - complexify(d) * shift;
    let lu = a.lu();
    let diag = lu.u().diagonal();
    let max = diag.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let min = diag.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if !(min > 1e-13 * max) {
        return None;
    }
    let m = lu.solve(&complexify(d))?;
    m.iter().all(|z| z.is_finite()).then_some(m)
}

/// Finite eigenvalues of the pencil for the Hill operator `h`, via the
/// eigenvalues `ρ` of `(L − σD)⁻¹D` and `μ = σ + 1/ρ`. A singular shift is
/// retried with seeded perturbations.
pub fn pencil_spectrum(h: &HillOperator, shift: Complex64) -> Result<PencilSpectrum> {
    let l = &h.matrix;
    let d = first_derivative(&h.grid);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut sigma = shift;
    let mut m = None;
    for _ in 0..SHIFT_RETRIES {
        m = shift_invert(l, &d, sigma);
        if m.is_some() {
            break;
        }
        sigma += Complex64::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1));
    }
    let m = m.ok_or(Error::SingularShift)?;
    let eig = ComplexEigen::new(&m)?;

    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&j| eig.eigenvalues[j].norm() >= INFINITE_THRESHOLD)
        .collect();
    let mus: Vec<Complex64> = keep.iter().map(|&j| sigma + 1.0 / eig.eigenvalues[j]).collect();
    let vectors = DMatrix::from_columns(&keep.iter().map(|&j| eig.eigenvectors.column(j).clone_owned()).collect::<Vec<_>>());

    let l_norm = spectral_norm(l)?;
    let d_norm = spectral_norm(&d)?;
    let (lc, dc) = (complexify(l), complexify(&d));
    let residual = mus
        .iter()
        .enumerate()
        .map(|(j, &mu)| {
            let z = vectors.column(j);
            let r = &lc * z - (&dc * z) * mu;
            r.norm() / ((l_norm + mu.norm() * d_norm) * z.norm())
        })
        .fold(0.0, f64::max);

    let distance = |target: Complex64| mus.iter().map(|m| (m - target).norm()).fold(f64::INFINITY, f64::min);
    let symmetry_error = mus
        .iter()
        .map(|&mu| distance(-mu).max(distance(-mu.conj())) / mu.norm().max(1.0))
        .fold(0.0, f64::max);
    let max_re = mus.iter().map(|m| m.re.abs()).fold(0.0, f64::max);

    Ok(PencilSpectrum {
        mus,
        vectors,
        max_re,
        shift: sigma,
        n: h.n(),
        residual,
        symmetry_error,
    })
}

impl PencilSpectrum {
    /// Eigenvalues with `|μ| ≥ ZERO_MODE`, sorted by modulus, then argument.
    pub fn nonzero_sorted(&self) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = self.mus.iter().copied().filter(|m| m.norm() >= ZERO_MODE).collect();
        v.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.arg().total_cmp(&b.arg())));
        v
    }

    pub fn count_zero_modes(&self) -> usize {
        self.mus.iter().filter(|m| m.norm() < ZERO_MODE).count()
    }
}

/// Symmetric Hausdorff distance between the `count` smallest nonzero
/// eigenvalues of two spectra.
pub fn hausdorff_lowest(a: &PencilSpectrum, b: &PencilSpectrum, count: usize) -> f64 {
    let sa: Vec<Complex64> = a.nonzero_sorted().into_iter().take(count).collect();
    let sb: Vec<Complex64> = b.nonzero_sorted().into_iter().take(count).collect();
    let one_way = |x: &[Complex64], y: &[Complex64]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(&sa, &sb).max(one_way(&sb, &sa))
}

/// Largest relative inner products `|⟨Z, w⟩| / (‖Z‖‖w‖)` over eigenpairs with
/// `|μ| > ZERO_MODE`.
#[derive(Debug, Clone, Serialize)]
pub struct ConstraintReport {
    pub checked: usize,
    pub exempt: usize,
    /// Against `L[1]`: `Φ − c` or `Φ² − c`.
    pub potential: f64,
    /// Against `Φ′`.
    pub derivative: f64,
    /// Against the ground state `χ₀` (quadratic only).
    pub ground_state: Option<f64>,
    pub passed: bool,
}

/// Verify the orthogonality constraints satisfied by every eigenfunction with
/// `μ ≠ 0`.
pub fn constraint_check(spec: &PencilSpectrum, h: &HillOperator, p: &WaveProfile) -> Result<ConstraintReport> {
    if spec.n != h.n() {
        return Err(Error::Dimension(format!("spectrum on {} points, operator on {}", spec.n, h.n())));
    }
    let grid = &h.grid;
    let mut targets = vec![h.potential_samples.clone(), grid.sample(|x| p.dphi(x))];
    if p.model == Model::Quadratic {
        let ground = eig_sym(h)?.eigenvectors.column(0).clone_owned();
        targets.push(ground);
    }
    let weight = grid.spacing();
    let targets: Vec<DVector<Complex64>> = targets
        .iter()
        .map(|t| {
            let scale = weight.sqrt() * t.norm();
            t.map(|x| Complex64::new(x / scale, 0.0))
        })
        .collect();
    let mut worst = vec![0.0_f64; targets.len()];
    let mut checked = 0;
    for (j, mu) in spec.mus.iter().enumerate() {
        if mu.norm() <= ZERO_MODE {
            continue;
        }
        checked += 1;
        let z = spec.vectors.column(j);
        let z_norm = (weight * z.norm_squared()).sqrt();
        for (t, w) in targets.iter().zip(worst.iter_mut()) {
            let ip = weight * z.dotc(t).norm();
            *w = w.max(ip / z_norm);
        }
    }
    let passed = worst.iter().all(|&w| w < CONSTRAINT_TOL);
    Ok(ConstraintReport {
        checked,
        exempt: spec.mus.len() - checked,
        potential: worst[0],
        derivative: worst[1],
        ground_state: worst.get(2).copied(),
        passed,
    })
}

/// The profile whose Hill operator enters the pencil: the quadratic wave in the
/// canonical speed, the cubic wave in the canonical normalization.
pub fn pencil_profile(model: Model, k: Modulus) -> Result<WaveProfile> {
    match model {
        Model::Quadratic => quadratic_profile(k),
        Model::Cubic => cubic_profile(k, CubicNormalization::Canonical),
        Model::Peakon => Err(Error::Parameter("the peakon has no periodic pencil".into())),
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Mu {
    pub re: f64,
    pub im: f64,
}

/// Pencil spectrum and constraint check for one wave.
#[derive(Debug, Clone, Serialize)]
pub struct PencilReport {
    pub model: Model,
    pub k: f64,
    pub n: usize,
    pub shift: Mu,
    pub max_re: f64,
    pub residual: f64,
    pub symmetry_error: f64,
    pub zero_modes: usize,
    pub mus: Vec<Mu>,
    pub constraints: ConstraintReport,
}

pub fn pencil_report(model: Model, k: Modulus, n: usize, shift: Complex64) -> Result<PencilReport> {
    let p = pencil_profile(model, k)?;
    let h = assemble(&p, n)?;
    let spec = pencil_spectrum(&h, shift)?;
    let constraints = constraint_check(&spec, &h, &p)?;
    let mut mus = spec.mus.clone();
    mus.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    Ok(PencilReport {
        model,
        k: k.value(),
        n,
        shift: Mu {
            re: spec.shift.re,
            im: spec.shift.im,
        },
        max_re: spec.max_re,
        residual: spec.residual,
        symmetry_error: spec.symmetry_error,
        zero_modes: spec.count_zero_modes(),
        mus: mus.iter().map(|m| Mu { re: m.re, im: m.im }).collect(),
        constraints,
    })
}

/// One row of a stability-margin sweep; errors are kept as failed rows.
#[derive(Debug, Clone, Serialize)]
pub struct MarginRow {
    pub k: f64,
    pub max_re: f64,
    pub n_finite: usize,
    pub stable: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MarginSweep {
    pub model: Model,
    pub n: usize,
    pub rows: Vec<MarginRow>,
    pub stable: bool,
}

/// `max|Re μ|` for each `k`, computed concurrently and returned in grid order.
pub fn stability_margin_sweep(model: Model, k_grid: &[f64], n: usize) -> MarginSweep {
    let rows: Vec<MarginRow> = k_grid
        .par_iter()
        .map(|&k| {
            let run = || -> Result<PencilSpectrum> {
                let p = pencil_profile(model, Modulus::interior(k)?)?;
                pencil_spectrum(&assemble(&p, n)?, DEFAULT_SHIFT)
            };
            match run() {
                Ok(s) => MarginRow {
                    k,
                    max_re: s.max_re,
                    n_finite: s.mus.len(),
                    stable: s.max_re < MARGIN_TOL,
                    error: None,
                },
                Err(e) => MarginRow {
                    k,
                    max_re: f64::NAN,
                    n_finite: 0,
                    stable: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let stable = !rows.is_empty() && rows.iter().all(|r| r.stable);
    MarginSweep { model, n, rows, stable }
}

/// `q₁ = sech·tanh`, the odd bound state of `−∂² − 6sech²` at energy `−1`.
fn q1(x: f64) -> f64 {
    x.tanh() / x.cosh()
}

/// `f = e^{−x}q₁ = 2tanh(x)/(1 + e^{2x})`, written to stay finite for large `|x|`.
pub fn peakon_mode(x: f64) -> f64 {
    2.0 * x.tanh() / (1.0 + (2.0 * x).exp())
}

fn sech2(x: f64) -> f64 {
    x.cosh().powi(-2)
}

#[derive(Debug, Clone, Serialize)]
pub struct PeakonModeReport {
    #[serde(rename = "L_domain")]
    pub l_domain: f64,
    /// `μ₁ = 2√(−E)` with `E` the Rayleigh quotient of `q₁`.
    pub mu1: f64,
    /// `μ = μ₁L/54`.
    pub mu: f64,
    pub residual_q: f64,
    pub residual_f: f64,
    pub left_limit: f64,
    pub right_limit: f64,
}

/// Finite-difference step for the peakon residuals.
const PEAKON_FD_STEP: f64 = 1e-2;

/// Verify the explicit unstable mode on `[−x_max, x_max]` with `n` sample points.
pub fn peakon_mode_check(l_domain: f64, x_max: f64, n: usize) -> Result<PeakonModeReport> {
    if !(l_domain > 0.0 && l_domain.is_finite()) {
        return Err(Error::Parameter(format!("domain half-length must be positive, got {l_domain}")));
    }
    if !(x_max >= 15.0) || n < 512 {
        return Err(Error::Parameter(format!("need x_max >= 15 and n >= 512, got {x_max} and {n}")));
    }
    let h = PEAKON_FD_STEP;
    let xs: Vec<f64> = (0..n).map(|i| -x_max + 2.0 * x_max * i as f64 / (n - 1) as f64).collect();

    // Schrödinger operator −∂² − 6sech² applied to q₁.
    let schrodinger_q = |x: f64| -central_second(q1, x, h) - 6.0 * sech2(x) * q1(x);
    let residual_q = xs.iter().map(|&x| (schrodinger_q(x) + q1(x)).abs()).fold(0.0, f64::max);
    let (num, den) = xs
        .iter()
        .fold((0.0, 0.0), |(a, b), &x| (a + q1(x) * schrodinger_q(x), b + q1(x) * q1(x)));
    let energy = num / den;
    let mu1 = 2.0 * (-energy).max(0.0).sqrt();

    let residual_f = xs
        .iter()
        .map(|&x| {
            let lhs = -central_second(peakon_mode, x, h) - 6.0 * sech2(x) * peakon_mode(x);
            (lhs - mu1 * central_first(peakon_mode, x, h)).abs()
        })
        .fold(0.0, f64::max);

    let report = PeakonModeReport {
        l_domain,
        mu1,
        mu: mu1 * l_domain / 54.0,
        residual_q,
        residual_f,
        left_limit: peakon_mode(-x_max),
        right_limit: peakon_mode(x_max),
    };
    if residual_q > PEAKON_TOL || residual_f > PEAKON_TOL {
        return Err(Error::Verification(format!(
            "peakon mode residuals {residual_q:.3e}, {residual_f:.3e} exceed {PEAKON_TOL:.0e}"
        )));
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct PeakonChainReport {
    #[serde(rename = "L_domain")]
    pub l_domain: f64,
    /// `dΞ/dη` against `(3/(2L²))(L² − Ξ²)`, both by differencing `Ξ` and from `1 − Φ/c`.
    pub slope_residual: f64,
    /// `−c + Φ` against `−(L²/6)sech²(3η/(2L))`, relative to `L²`.
    pub potential_residual: f64,
    /// `Φ(η)` against `φ(Ξ(η)) = Ξ²/6 − c/2`, relative to `L²`.
    pub profile_residual: f64,
    /// Residual of the rescaled eigenvalue problem for `Z(η) = f(3η/(2L))`.
    pub eigen_residual: f64,
    /// `dΞ/dη` far out on both sides.
    pub tail_slope: f64,
    pub mu: f64,
}

/// Check the chain from the peakon profile to the scalar eigenvalue problem.
pub fn peakon_chain_check(l_domain: f64) -> Result<PeakonChainReport> {
    let (p, cov) = peakon_profile(l_domain)?;
    let l = l_domain;
    let c = p.c;
    let scale = 3.0 / (2.0 * l);
    let etas: Vec<f64> = (0..=400).map(|i| -8.0 * l + 16.0 * l * i as f64 / 400.0).collect();
    let h = 1e-3 * l;

    let slope_residual = etas
        .iter()
        .map(|&eta| {
            let xi = cov.xi(eta);
            let target = 1.5 / (l * l) * (l * l - xi * xi);
            let fd = central_first(|e| cov.xi(e), eta, h);
            (fd - target).abs().max((cov.dxi(eta) - target).abs())
        })
        .fold(0.0, f64::max);
    let l2 = l * l;
    let potential_residual = etas
        .iter()
        .map(|&eta| (p.phi(eta) - c + l2 / 6.0 * sech2(scale * eta)).abs() / l2)
        .fold(0.0, f64::max);
    let profile_residual = etas
        .iter()
        .map(|&eta| {
            let xi = cov.xi(eta);
            (p.phi(eta) - (xi * xi / 6.0 - 0.5 * c)).abs() / l2
        })
        .fold(0.0, f64::max);

    // (−c²∂² − c + Φ)Z / L² = μZ′ with μ = L/27.
    let mode = peakon_mode_check(l, 15.0, 512)?;
    let z = |eta: f64| peakon_mode(scale * eta);
    let eta_step = PEAKON_FD_STEP / scale;
    let eigen_residual = etas
        .iter()
        .map(|&eta| {
            let lhs = (-c * c * central_second(z, eta, eta_step) + (p.phi(eta) - c) * z(eta)) / l2;
            (lhs - mode.mu * central_first(z, eta, eta_step)).abs()
        })
        .fold(0.0, f64::max);
    let far = 40.0 * l;
    let tail_slope = cov.dxi(far).abs().max(cov.dxi(-far).abs());

    Ok(PeakonChainReport {
        l_domain,
        slope_residual,
        potential_residual,
        profile_residual,
        eigen_residual,
        tail_slope,
        mu: mode.mu,
    })
}

impl PeakonChainReport {
    pub fn passed(&self) -> bool {
        self.slope_residual < 1e-10
            && self.potential_residual < 1e-12
            && self.profile_residual < 1e-12
            && self.eigen_residual < PEAKON_TOL
            && self.tail_slope < 1e-12
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::PeriodicGrid;

    #[test]
    fn constant_coefficient_pencil() {
        let grid = PeriodicGrid::centered(32, 2.0 * std::f64::consts::PI).unwrap();
        let h = HillOperator::new(grid, 1.0, DVector::from_element(32, 1.0)).unwrap();
        let s = pencil_spectrum(&h, DEFAULT_SHIFT).unwrap();
        // wavenumbers ±1..±15; the Nyquist mode and constants are infinite
        assert_eq!(s.mus.len(), 30);
        assert!(s.max_re < 1e-12);
        for m in &s.mus {
            // μ = −i(n² + 1)/n for some integer n ≠ 0
            let ok = (1..16).flat_map(|j| [j as f64, -(j as f64)]).any(|j| (m.im + (j * j + 1.0) / j).abs() < 1e-10);
            assert!(ok, "unexpected μ = {m}");
        }
        assert!(s.symmetry_error < 1e-10);
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn quadratic_and_cubic_on_the_axis() {
        let k = Modulus::new(0.5).unwrap();
        for model in [Model::Quadratic, Model::Cubic] {
            let r = pencil_report(model, k, 64, DEFAULT_SHIFT).unwrap();
            assert!(r.max_re < MARGIN_TOL, "{model}: {}", r.max_re);
            assert!(r.residual < 1e-7, "{model}: residual {}", r.residual);
            assert!(r.symmetry_error < 1e-8, "{model}: symmetry {}", r.symmetry_error);
            assert!(r.zero_modes >= 1);
            assert!(r.constraints.passed, "{model}: {:?}", r.constraints);
        }
    }

    #[test]
    fn shift_does_not_move_the_spectrum() {
        let p = pencil_profile(Model::Quadratic, Modulus::new(0.6).unwrap()).unwrap();
        let h = assemble(&p, 64).unwrap();
        let a = pencil_spectrum(&h, DEFAULT_SHIFT).unwrap();
        let b = pencil_spectrum(&h, Complex64::new(-0.7, 0.2)).unwrap();
        assert!(hausdorff_lowest(&a, &b, 20) < 1e-7);
    }

    #[test]
    fn peakon_mode_and_chain() {
        let m = peakon_mode_check(3.0, 15.0, 3001).unwrap();
        assert!(m.residual_q < 1e-10 && m.residual_f < 1e-8, "{m:?}");
        assert!((m.mu1 - 2.0).abs() < 1e-9);
        assert!((m.mu - 3.0 / 27.0).abs() < 1e-10);
        assert!((m.left_limit + 2.0).abs() < 1e-8 && m.right_limit.abs() < 1e-8);
        let c = peakon_chain_check(3.0).unwrap();
        assert!(c.passed(), "{c:?}");
        assert!(matches!(peakon_mode_check(3.0, 10.0, 3001), Err(Error::Parameter(_))));
    }
}
