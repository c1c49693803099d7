//! Green's-function inversion of the Hill operators and the stability index
//! `⟨L⁻¹Φ′, Φ′⟩`.
//!
//! Quadratic waves use the unit-bracket operator `L̃ = −∂² + Φ̃ + γ` on
//! `[−K, K]` with kernel `Φ̃ = 6k²sn² − 6k²/β`. Cubic waves use
//! `L = −∂² + 2κ²sn² − (1 + κ²)` on `[−2K, 2K]` with kernel `sn`. Each index is
//! computed twice: by quadrature against the explicit second solution `Ψ`, and
//! by a spectral pseudo-inverse on the orthogonal complement of the kernel.

use std::f64::consts::PI;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::elliptic::{complete_k, jacobi, Modulus};
use crate::error::{Error, Result};
use crate::hillop::{eig_sym, HillOperator, SpectrumReport};
use crate::positivity::{neg_def_2x2, odd_basis};
use crate::profiles::{root_term, Model};
use crate::quadrature::CompositeGauss;
use crate::spectral::{central_second, PeriodicGrid, RunningIntegral};

/// Accepted relative gap between the two index computations.
pub const CROSS_VALIDATION_TOL: f64 = 1e-6;
/// Below this modulus the quadratic Wronskian is tiny and the record is flagged.
pub const SMALL_K: f64 = 0.05;
/// Relative kernel component of a right-hand side that is silently projected out.
pub const KERNEL_PROJECTION_TOL: f64 = 1e-8;

/// Quantities of the unit-bracket quadratic operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TildeSystem {
    pub k: Modulus,
    /// `β = 1 + k² + √(1 − k² + k⁴)`.
    pub beta: f64,
    /// `γ = 6k²/β − 2β`.
    pub gamma: f64,
    pub quarter: f64,
    /// `2K(k)`.
    pub period: f64,
}

pub fn build_tilde_system(k: Modulus) -> Result<TildeSystem> {
    let k = Modulus::interior(k.value())?;
    let m = k.parameter();
    let beta = 1.0 + m + root_term(k);
    let quarter = complete_k(k)?;
    Ok(TildeSystem {
        k,
        beta,
        gamma: 6.0 * m / beta - 2.0 * beta,
        quarter,
        period: 2.0 * quarter,
    })
}

impl TildeSystem {
    pub fn phi(&self, y: f64) -> f64 {
        let m = self.k.parameter();
        let sn = jacobi(y, self.k).sn;
        6.0 * m * (sn * sn - 1.0 / self.beta)
    }

    pub fn dphi(&self, y: f64) -> f64 {
        let e = jacobi(y, self.k);
        12.0 * self.k.parameter() * e.sn * e.cn * e.dn
    }

    pub fn grid(&self, n: usize) -> Result<PeriodicGrid> {
        PeriodicGrid::centered(n, self.period)
    }

    /// `L̃ = −∂² + Φ̃ + γ` on `[−K, K)`.
    pub fn operator(&self, n: usize) -> Result<HillOperator> {
        let grid = self.grid(n)?;
        let v = grid.sample(|y| self.phi(y) + self.gamma);
        HillOperator::new(grid, 1.0, v)
    }

    /// `‖L̃Φ̃‖∞` on an `n`-point grid.
    pub fn kernel_residual(&self, n: usize) -> Result<f64> {
        let h = self.operator(n)?;
        Ok(h.apply(&h.grid.sample(|y| self.phi(y))).amax())
    }

    /// The closed form of the Wronskian `Ψ̃′Φ̃ − Φ̃′Ψ̃`.
    pub fn wronskian_closed_form(&self) -> f64 {
        quadratic_wronskian_closed_form(self.k.value())
    }
}

/// `W[k] = 16(2(s − 1) + k⁴(2s + 3 − 2k²) − 2k²s + 3k²)`, `s = √(k⁴ − k² + 1)`.
/// Defined on the closed interval `[0, 1]`.
pub fn quadratic_wronskian_closed_form(k: f64) -> f64 {
    let m = k * k;
    let s = (m * m - m + 1.0).sqrt();
    16.0 * (2.0 * (s - 1.0) + m * m * (2.0 * s + 3.0 - 2.0 * m) - 2.0 * m * s + 3.0 * m)
}

#[derive(Debug, Clone)]
enum Companion {
    /// `Ψ̃ = Φ̃·∫₀ˣΦ̃ − 3Φ̃′`.
    Quadratic(TildeSystem),
    /// `Ψ = −cn/dn + k²·sn·∫₀ˣ cn²/dn²`.
    Cubic(Modulus),
}

/// Kernel solution `Φ` and second solution `Ψ` of the same Hill equation.
#[derive(Debug, Clone)]
pub struct GreensPair {
    pub model: Model,
    pub k: Modulus,
    /// Right end `M` of the symmetric interval `[−M, M]`.
    pub half: f64,
    /// `Ψ′Φ − Φ′Ψ` at the origin.
    pub wronskian: f64,
    /// `max − min` of the Wronskian over the quadrature grid.
    pub wronskian_spread: f64,
    /// `(Ψ(M), Ψ′(M))`.
    pub psi_boundary: (f64, f64),
    companion: Companion,
    running: RunningIntegral,
    grid: PeriodicGrid,
}

impl GreensPair {
    pub fn phi(&self, x: f64) -> f64 {
        match &self.companion {
            Companion::Quadratic(ts) => ts.phi(x),
            Companion::Cubic(k) => jacobi(x, *k).sn,
        }
    }

    pub fn dphi(&self, x: f64) -> f64 {
        match &self.companion {
            Companion::Quadratic(ts) => ts.dphi(x),
            Companion::Cubic(k) => {
                let e = jacobi(x, *k);
                e.cn * e.dn
            }
        }
    }

    pub fn psi(&self, x: f64) -> f64 {
        let g = self.running.eval(x);
        match &self.companion {
            Companion::Quadratic(ts) => ts.phi(x) * g - 3.0 * ts.dphi(x),
            Companion::Cubic(k) => {
                let e = jacobi(x, *k);
                -e.cn / e.dn + k.parameter() * e.sn * g
            }
        }
    }

    pub fn dpsi(&self, x: f64) -> f64 {
        let g = self.running.eval(x);
        self.dpsi_with(x, g)
    }

    fn dpsi_with(&self, x: f64, g: f64) -> f64 {
        match &self.companion {
            Companion::Quadratic(ts) => {
                // Φ̃″ = (Φ̃ + γ)Φ̃ on the kernel
                let p = ts.phi(x);
                ts.dphi(x) * g + p * p - 3.0 * (p + ts.gamma) * p
            }
            Companion::Cubic(k) => {
                let m = k.parameter();
                let e = jacobi(x, *k);
                let cd = e.cn / e.dn;
                e.sn * (1.0 - m) / (e.dn * e.dn) + m * e.cn * e.dn * g + m * e.sn * cd * cd
            }
        }
    }

    /// Wronskian sampled on the quadrature grid.
    pub fn wronskian_samples(&self) -> DVector<f64> {
        let g = self.running.on_grid(&self.grid);
        DVector::from_iterator(
            self.grid.n,
            (0..self.grid.n).map(|j| {
                let x = self.grid.point(j);
                let psi = match &self.companion {
                    Companion::Quadratic(ts) => ts.phi(x) * g[j] - 3.0 * ts.dphi(x),
                    Companion::Cubic(k) => {
                        let e = jacobi(x, *k);
                        -e.cn / e.dn + k.parameter() * e.sn * g[j]
                    }
                };
                self.dpsi_with(x, g[j]) * self.phi(x) - self.dphi(x) * psi
            }),
        )
    }

    /// Potential `V` with `−Φ″ + VΦ = 0`.
    pub fn potential(&self, x: f64) -> f64 {
        match &self.companion {
            Companion::Quadratic(ts) => ts.phi(x) + ts.gamma,
            Companion::Cubic(k) => {
                let m = k.parameter();
                let sn = jacobi(x, *k).sn;
                2.0 * m * sn * sn - (1.0 + m)
            }
        }
    }

    /// Largest `|−Ψ″ + VΨ|` over interior points, with `Ψ″` from a sixth-order
    /// central difference.
    pub fn psi_residual(&self, samples: usize) -> f64 {
        let h = 5e-3;
        let lo = -self.half + 4.0 * h;
        let step = (2.0 * self.half - 8.0 * h) / samples.max(2) as f64;
        (0..=samples)
            .map(|i| {
                let x = lo + step * i as f64;
                let d2 = central_second(|y| self.psi(y), x, h);
                (-d2 + self.potential(x) * self.psi(x)).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn finish_pair(model: Model, k: Modulus, half: f64, companion: Companion, running: RunningIntegral, grid: PeriodicGrid) -> Result<GreensPair> {
    let mut pair = GreensPair {
        model,
        k,
        half,
        wronskian: 0.0,
        wronskian_spread: 0.0,
        psi_boundary: (0.0, 0.0),
        companion,
        running,
        grid,
    };
    let w = pair.wronskian_samples();
    pair.wronskian = w[grid.origin_index()];
    pair.wronskian_spread = w.max() - w.min();
    pair.psi_boundary = (pair.psi(half), pair.dpsi(half));
    if pair.wronskian.abs() < 1e-12 {
        return Err(Error::DegenerateWronskian(pair.wronskian));
    }
    Ok(pair)
}

/// Second solution `Ψ̃` of `L̃Ψ̃ = 0` on `[−K, K]`, odd.
pub fn psi_quadratic(ts: &TildeSystem, n: usize) -> Result<GreensPair> {
    let grid = ts.grid(n)?;
    let running = RunningIntegral::new(grid, &grid.sample(|y| ts.phi(y)), 0.0);
    finish_pair(Model::Quadratic, ts.k, ts.quarter, Companion::Quadratic(*ts), running, grid)
}

/// Second solution `Ψ` of `−Ψ″ + (2κ²sn² − 1 − κ²)Ψ = 0` on `[−2K, 2K]`, even,
/// with periodic values but non-periodic derivative.
pub fn psi_cubic(k: Modulus, n: usize) -> Result<GreensPair> {
    let k = Modulus::interior(k.value())?;
    let quarter = complete_k(k)?;
    let grid = PeriodicGrid::centered(n, 4.0 * quarter)?;
    let samples = grid.sample(|y| {
        let e = jacobi(y, k);
        (e.cn / e.dn).powi(2)
    });
    let running = RunningIntegral::new(grid, &samples, 0.0);
    finish_pair(Model::Cubic, k, 2.0 * quarter, Companion::Cubic(k), running, grid)
}

/// Pieces of the Green's-function evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum IndexComponents {
    Quadratic {
        i1: f64,
        i2: f64,
        h: f64,
        wronskian: f64,
        wronskian_closed_form: f64,
        phi_k: f64,
        psi_k: f64,
    },
    Cubic {
        /// `∫Φ²Φ′Ψ` over `[−2K, 2K]`.
        phi2_dphi_psi: f64,
        /// `∫ΨΦ′` over `[−2K, 2K]`.
        psi_dphi: f64,
        /// `Ψ′(2K)`.
        dpsi_end: f64,
        /// Coefficient of `Ψ` fixed by derivative periodicity.
        c_coefficient: f64,
        wronskian: f64,
        /// `u′(2K) − u′(−2K)` of the assembled `u = L⁻¹Φ′`.
        derivative_jump: f64,
        /// The index with the halved normalization `−½∫Φ²Φ′Ψ + (∫ΨΦ′)²/(4Ψ′(2K))`.
        halved_value: f64,
    },
}

/// Both evaluations of `⟨L⁻¹Φ′, Φ′⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityIndex {
    pub k: f64,
    pub model: Model,
    pub value_greens: f64,
    pub value_spectral: f64,
    /// `|greens − spectral| / max(1, |greens|)`.
    pub discrepancy: f64,
    pub n_quad: usize,
    pub n_spectral: usize,
    /// Set below `SMALL_K`, where the quadratic Wronskian degenerates.
    pub small_k: bool,
    pub components: IndexComponents,
}

impl StabilityIndex {
    pub fn accepted(&self) -> bool {
        self.discrepancy < CROSS_VALIDATION_TOL
    }

    fn check(self) -> Result<Self> {
        if self.small_k || self.accepted() {
            Ok(self)
        } else {
            Err(Error::CrossValidation {
                method_a: "green's function",
                a: self.value_greens,
                method_b: "spectral pseudo-inverse",
                b: self.value_spectral,
                discrepancy: self.discrepancy,
            })
        }
    }
}

fn relative_discrepancy(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(1.0)
}

/// Collocation size for the pseudo-inverse, from the width `K′` of the strip of
/// analyticity of the potential: enough modes for ~17 digits, but no more,
/// since roundoff in the inverse grows like `n²`.
pub fn spectral_size(k: Modulus, period: f64) -> Result<usize> {
    let kp = complete_k(Modulus::new(k.complement())?)?;
    let half_modes = (40.0 * period / (2.0 * PI * kp)).ceil() as usize;
    Ok((2 * half_modes).clamp(32, 256))
}

/// Solve `Hu = f` on the orthogonal complement of the discrete kernel.
pub fn invert_on_complement(h: &HillOperator, f: &DVector<f64>) -> Result<DVector<f64>> {
    invert_with(&eig_sym(h)?, f)
}

/// As [`invert_on_complement`] with a precomputed spectrum.
pub fn invert_with(spec: &SpectrumReport, f: &DVector<f64>) -> Result<DVector<f64>> {
    let fnorm = f.norm();
    if fnorm == 0.0 {
        return Ok(DVector::zeros(f.len()));
    }
    let kernel = spec.kernel_index();
    let v = &spec.eigenvectors;
    let coeffs = v.transpose() * f;
    if let Some(j0) = kernel {
        let component = coeffs[j0].abs() / fnorm;
        if component >= KERNEL_PROJECTION_TOL {
            return Err(Error::KernelComponent {
                component,
                tolerance: KERNEL_PROJECTION_TOL,
            });
        }
    }
    let scaled = DVector::from_iterator(
        coeffs.len(),
        coeffs
            .iter()
            .zip(spec.eigenvalues.iter())
            .enumerate()
            .map(|(j, (c, l))| if Some(j) == kernel { 0.0 } else { c / l }),
    );
    Ok(v * scaled)
}

/// Solve `Hu = f` for odd `f` on the odd grid functions. The kernel of the
/// quadratic operator is even, so the restriction is invertible; this avoids
/// the near-degenerate odd eigenvalue that pollutes the kernel eigenvector as
/// `k → 0`.
pub fn invert_odd(h: &HillOperator, f: &DVector<f64>) -> Result<DVector<f64>> {
    let b = odd_basis(h.n());
    let restricted = b.transpose() * &h.matrix * &b;
    let rhs = b.transpose() * f;
    let x = restricted
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Signature("odd restriction is singular".into()))?;
    Ok(b * x)
}

/// Quadratic index `⟨L̃⁻¹Φ̃′, Φ̃′⟩` without the cross-validation gate.
pub fn evaluate_quadratic(k: Modulus, n_quad: usize) -> Result<StabilityIndex> {
    if n_quad < 256 {
        return Err(Error::Parameter(format!("quadrature grid must have >= 256 points, got {n_quad}")));
    }
    let ts = build_tilde_system(k)?;
    let small_k = ts.k.value() < SMALL_K;
    let n_quad = if small_k { 2 * n_quad } else { n_quad };
    let pair = psi_quadratic(&ts, n_quad)?;
    let grid = ts.grid(n_quad)?;

    // Even periodic integrands: ∫₀ᴷ is half the periodic trapezoid sum.
    let half_integral = |f: &dyn Fn(f64) -> f64| 0.5 * grid.integrate(&grid.sample(f));
    let p = |y: f64| ts.phi(y);
    let dp = |y: f64| ts.dphi(y);
    let phi_k = ts.phi(ts.quarter);
    let psi_k = pair.psi(ts.quarter);
    let int_phi = half_integral(&p);
    let i1 = -3.0 * half_integral(&|y| dp(y).powi(2)) - 0.5 * half_integral(&|y| p(y).powi(3)) + 0.5 * phi_k * phi_k * int_phi;
    let i2 = -3.0 * half_integral(&|y| (p(y) * dp(y)).powi(2)) - 0.25 * half_integral(&|y| p(y).powi(5))
        + 0.25 * phi_k.powi(4) * int_phi;
    let h = phi_k * phi_k * i1 - i2 - phi_k / psi_k * i1 * i1;
    let value_greens = 2.0 * h / pair.wronskian;

    let n_spectral = spectral_size(ts.k, ts.period)?;
    let op = ts.operator(n_spectral)?;
    let f = op.grid.sample(|y| ts.dphi(y));
    let u = if small_k { invert_odd(&op, &f)? } else { invert_on_complement(&op, &f)? };
    let value_spectral = op.grid.inner(&u, &f);

    Ok(StabilityIndex {
        k: ts.k.value(),
        model: Model::Quadratic,
        value_greens,
        value_spectral,
        discrepancy: relative_discrepancy(value_greens, value_spectral),
        n_quad,
        n_spectral,
        small_k,
        components: IndexComponents::Quadratic {
            i1,
            i2,
            h,
            wronskian: pair.wronskian,
            wronskian_closed_form: ts.wronskian_closed_form(),
            phi_k,
            psi_k,
        },
    })
}

/// Quadratic index; fails if the two evaluations disagree (except for flagged
/// small moduli).
pub fn index_quadratic(k: Modulus, n_quad: usize) -> Result<StabilityIndex> {
    evaluate_quadratic(k, n_quad)?.check()
}

fn gauss_for(half: f64) -> CompositeGauss {
    CompositeGauss::new(24, ((2.0 * half / 0.5).ceil() as usize).max(32))
}

/// Cubic index `⟨L⁻¹Φ′, Φ′⟩` without the cross-validation gate.
///
/// With `u = L⁻¹Φ′ = u_p + CΨ`, `u_p = (Φ∫₀ˣΨΦ′ − Ψ∫₀ˣΦΦ′)/W`, derivative
/// periodicity gives `C = (∫ΨΦ′)/(2WΨ′(2K))` and
/// `⟨u, Φ′⟩ = −(1/W)∫Φ²Φ′Ψ + (∫ΨΦ′)²/(2WΨ′(2K))`.
pub fn evaluate_cubic(k: Modulus, n_quad: usize) -> Result<StabilityIndex> {
    if n_quad < 256 {
        return Err(Error::Parameter(format!("quadrature grid must have >= 256 points, got {n_quad}")));
    }
    let k = Modulus::interior(k.value())?;
    let pair = psi_cubic(k, n_quad)?;
    let half = pair.half;
    let w = pair.wronskian;
    let q = gauss_for(half);
    let phi2_dphi_psi = q.integrate(-half, half, |x| pair.phi(x).powi(2) * pair.dphi(x) * pair.psi(x));
    let psi_dphi = q.integrate(-half, half, |x| pair.psi(x) * pair.dphi(x));
    let dpsi_end = pair.dpsi(half);
    let c_coefficient = psi_dphi / (2.0 * w * dpsi_end);
    let value_greens = -phi2_dphi_psi / w + psi_dphi * c_coefficient;
    let halved_value = -0.5 * phi2_dphi_psi + psi_dphi * psi_dphi / (4.0 * dpsi_end);

    // u′(±2K) from the variation-of-parameters formula, each end integrated
    // separately (no parity shortcut).
    let half_q = gauss_for(0.5 * half);
    let du = |end: f64| {
        let g_psi = half_q.integrate(0.0, end, |x| pair.psi(x) * pair.dphi(x));
        let g_phi = half_q.integrate(0.0, end, |x| pair.phi(x) * pair.dphi(x));
        (pair.dphi(end) * g_psi - pair.dpsi(end) * g_phi) / w + c_coefficient * pair.dpsi(end)
    };
    let derivative_jump = du(half) - du(-half);

    let n_spectral = spectral_size(k, 2.0 * half)?;
    let op = cubic_operator(k, n_spectral)?;
    let f = op.grid.sample(|y| pair.dphi(y));
    let u = invert_on_complement(&op, &f)?;
    let value_spectral = op.grid.inner(&u, &f);

    Ok(StabilityIndex {
        k: k.value(),
        model: Model::Cubic,
        value_greens,
        value_spectral,
        discrepancy: relative_discrepancy(value_greens, value_spectral),
        n_quad,
        n_spectral,
        small_k: false,
        components: IndexComponents::Cubic {
            phi2_dphi_psi,
            psi_dphi,
            dpsi_end,
            c_coefficient,
            wronskian: w,
            derivative_jump,
            halved_value,
        },
    })
}

pub fn index_cubic(k: Modulus, n_quad: usize) -> Result<StabilityIndex> {
    evaluate_cubic(k, n_quad)?.check()
}

/// Evaluate the index over a grid of moduli concurrently; results come back in
/// grid order, errors included.
pub fn index_sweep(model: Model, ks: &[f64], n_quad: usize) -> Vec<(f64, Result<StabilityIndex>)> {
    ks.par_iter()
        .map(|&k| {
            let value = Modulus::new(k).and_then(|m| match model {
                Model::Quadratic => evaluate_quadratic(m, n_quad),
                Model::Cubic => evaluate_cubic(m, n_quad),
                Model::Peakon => Err(Error::Parameter("no stability index for the peakon".into())),
            });
            (k, value)
        })
        .collect()
}

impl StabilityIndex {
    pub fn wronskian(&self) -> f64 {
        match self.components {
            IndexComponents::Quadratic { wronskian, .. } | IndexComponents::Cubic { wronskian, .. } => wronskian,
        }
    }
}

/// `−∂² + 2κ²sn² − (1 + κ²)` on `[−2K, 2K)`.
pub fn cubic_operator(k: Modulus, n: usize) -> Result<HillOperator> {
    let quarter = complete_k(k)?;
    let grid = PeriodicGrid::centered(n, 4.0 * quarter)?;
    let m = k.parameter();
    let v = grid.sample(|y| {
        let sn = jacobi(y, k).sn;
        2.0 * m * sn * sn - (1.0 + m)
    });
    HillOperator::new(grid, 1.0, v)
}

/// The matrix `D = [⟨L⁻¹ηᵢ, ηⱼ⟩]` for `η₁ = Φ′`, `η₂ = L[1] = V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DMatrixReport {
    pub k: f64,
    pub d: [[f64; 2]; 2],
    pub negative_definite: bool,
}

pub fn d_matrix_cubic(k: Modulus) -> Result<DMatrixReport> {
    let index = evaluate_cubic(k, 256)?;
    let k = Modulus::interior(k.value())?;
    let n = spectral_size(k, 4.0 * complete_k(k)?)?;
    let op = cubic_operator(k, n)?;
    let spec = eig_sym(&op)?;
    let grid = op.grid;
    let eta1 = grid.sample(|y| {
        let e = jacobi(y, k);
        e.cn * e.dn
    });
    let eta2 = op.potential_samples.clone();
    let u1 = invert_with(&spec, &eta1)?;
    let u2 = invert_with(&spec, &eta2)?;
    let d = [
        [index.value_greens, grid.inner(&u1, &eta2)],
        [grid.inner(&u2, &eta1), grid.inner(&u2, &eta2)],
    ];
    Ok(DMatrixReport {
        k: k.value(),
        d,
        negative_definite: neg_def_2x2(d),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::differentiate;

    fn kk(k: f64) -> Modulus {
        Modulus::new(k).unwrap()
    }

    #[test]
    fn tilde_constants() {
        let ts = build_tilde_system(kk(0.5)).unwrap();
        assert!((ts.beta - (1.25 + 0.8125f64.sqrt())).abs() < 1e-15);
        assert!((ts.beta - 2.151388).abs() < 1e-6);
        // Φ̃ vanishes where sn² = 1/β
        let target = (1.0 / ts.beta).sqrt();
        let mut lo = 0.0;
        let mut hi = ts.quarter;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if jacobi(mid, ts.k).sn < target {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!(ts.phi(lo).abs() < 1e-13);
        assert!(ts.kernel_residual(256).unwrap() < 1e-8);
    }

    #[test]
    fn derivative_identity() {
        // L̃[Φ̃′] = −Φ̃′Φ̃
        let ts = build_tilde_system(kk(0.7)).unwrap();
        let op = ts.operator(128).unwrap();
        let dp = op.grid.sample(|y| ts.dphi(y));
        let p = op.grid.sample(|y| ts.phi(y));
        let r = op.apply(&dp) + dp.component_mul(&p);
        assert!(r.amax() < 1e-7);
    }

    #[test]
    fn wronskian_closed_form_limits() {
        assert!((quadratic_wronskian_closed_form(1.0) - 64.0).abs() < 1e-12);
        assert!(quadratic_wronskian_closed_form(0.0).abs() < 1e-15);
        assert!(quadratic_wronskian_closed_form(1e-3) < 1e-9);
    }

    #[test]
    fn quadratic_companion() {
        for &kv in &[0.05, 0.5, 0.9, 0.99] {
            let ts = build_tilde_system(kk(kv)).unwrap();
            let pair = psi_quadratic(&ts, 256).unwrap();
            let closed = ts.wronskian_closed_form();
            assert!((pair.wronskian - closed).abs() < 1e-9 * closed.abs(), "k={kv}");
            assert!(pair.wronskian_spread < 1e-9 * closed.abs(), "k={kv}");
            assert!(pair.psi_residual(64) < 1e-7, "k={kv}: {}", pair.psi_residual(64));
            for i in 0..20 {
                let x = 0.08 * i as f64 * ts.quarter;
                assert!((pair.psi(x) + pair.psi(-x)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cubic_companion() {
        for &kv in &[0.1, 0.5, 0.95] {
            let k = kk(kv);
            let pair = psi_cubic(k, 256).unwrap();
            assert!((pair.wronskian - 1.0).abs() < 1e-9);
            assert!(pair.wronskian_spread < 1e-9);
            assert!((pair.psi(0.0) + 1.0).abs() < 1e-14);
            assert!((pair.psi(pair.half) - pair.psi(-pair.half)).abs() < 1e-12);
            assert!((pair.dpsi(pair.half) + pair.dpsi(-pair.half)).abs() < 1e-12);
            assert!(pair.dpsi(pair.half).abs() > 1e-3);
            assert!(pair.psi_residual(64) < 1e-7);
        }
    }

    #[test]
    fn pseudo_inverse_basics() {
        let k = kk(0.5);
        let op = cubic_operator(k, 64).unwrap();
        let zero = DVector::zeros(64);
        assert_eq!(invert_on_complement(&op, &zero).unwrap(), zero);
        let spec = eig_sym(&op).unwrap();
        let j = 5;
        let v = spec.eigenvectors.column(j).clone_owned();
        let u = invert_on_complement(&op, &v).unwrap();
        assert!((u - &v / spec.eigenvalues[j]).amax() < 1e-12);
        // a right-hand side along the kernel is rejected
        let kernel = op.grid.sample(|y| jacobi(y, k).sn);
        assert!(matches!(invert_on_complement(&op, &kernel), Err(Error::KernelComponent { .. })));
    }

    #[test]
    fn pseudo_inverse_solves() {
        let ts = build_tilde_system(kk(0.6)).unwrap();
        let op = ts.operator(64).unwrap();
        let f = op.grid.sample(|y| ts.dphi(y));
        let u = invert_on_complement(&op, &f).unwrap();
        assert!((op.apply(&u) - &f).amax() < 1e-9);
        let kernel = op.grid.sample(|y| ts.phi(y));
        assert!(u.dot(&kernel).abs() < 1e-10 * u.norm() * kernel.norm());
    }

    #[test]
    fn quadratic_index_half() {
        let idx = index_quadratic(kk(0.5), 256).unwrap();
        assert!(idx.value_greens < 0.0);
        assert!(idx.discrepancy < 1e-6);
        // fixed-point check against spectral differentiation of the grid solution
        let ts = build_tilde_system(kk(0.5)).unwrap();
        let op = ts.operator(64).unwrap();
        let f = op.grid.sample(|y| ts.dphi(y));
        let u = invert_on_complement(&op, &f).unwrap();
        let lu = -differentiate(&op.grid, &u, 2) + u.component_mul(&op.potential_samples);
        assert!((lu - f).amax() < 1e-8);
    }

    #[test]
    fn cubic_index_half() {
        let idx = index_cubic(kk(0.5), 256).unwrap();
        assert!(idx.value_greens < 0.0);
        assert!(idx.discrepancy < 1e-6);
        let IndexComponents::Cubic { psi_dphi, derivative_jump, halved_value, .. } = idx.components else {
            panic!("cubic components expected")
        };
        let quarter = complete_k(kk(0.5)).unwrap();
        assert!((psi_dphi + 2.0 * quarter).abs() < 1e-8 * 2.0 * quarter);
        assert!(derivative_jump.abs() < 1e-10);
        assert!((2.0 * halved_value - idx.value_greens).abs() < 1e-12);
    }

    #[test]
    fn d_matrix_half() {
        let r = d_matrix_cubic(kk(0.5)).unwrap();
        assert!(r.d[0][1].abs() < 1e-9 && r.d[1][0].abs() < 1e-9, "{r:?}");
        assert!(r.d[0][0] < 0.0 && r.d[1][1] < 0.0);
        assert!(r.negative_definite);
        let idx = index_cubic(kk(0.5), 256).unwrap();
        assert!((r.d[0][0] - idx.value_greens).abs() < 1e-9);
        // D₂₂ = ⟨1, V⟩
        let quarter = complete_k(kk(0.5)).unwrap();
        let g = PeriodicGrid::centered(256, 4.0 * quarter).unwrap();
        let v = g.sample(|y| 0.5 * jacobi(y, kk(0.5)).sn.powi(2) - 1.25);
        assert!((r.d[1][1] - g.integrate(&v)).abs() < 1e-9);
    }
}
