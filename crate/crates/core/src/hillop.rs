//! Hill operators `−a∂² + V` on one period, discretized by Fourier
//! collocation, and their co-periodic spectra.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::elliptic::{jacobi, Modulus};
use crate::error::{Error, Result};
use crate::linalg::SymmetricEigen;
use crate::profiles::{root_term, Model, WaveProfile};
use crate::spectral::{second_derivative, PeriodicGrid};

/// The least-modulus eigenvalue is the kernel when `|λ| < KERNEL_TOL·‖L‖`.
pub const KERNEL_TOL: f64 = 1e-6;

/// Dense symmetric discretization of `−a∂² + V(x)`.
#[derive(Debug, Clone)]
pub struct HillOperator {
    pub grid: PeriodicGrid,
    /// Coefficient of `−∂²`.
    pub a: f64,
    /// Diagonal potential, constant term included.
    pub potential_samples: DVector<f64>,
    pub matrix: DMatrix<f64>,
    /// Factor turning this matrix into the physical operator
    /// `−c²∂²_η − c + Φ` (or `Φ²`) expressed in the grid variable.
    pub physical_scale: f64,
}

impl HillOperator {
    pub fn new(grid: PeriodicGrid, a: f64, potential: DVector<f64>) -> Result<Self> {
        if potential.len() != grid.n {
            return Err(Error::Dimension(format!(
                "potential has {} samples on a {}-point grid",
                potential.len(),
                grid.n
            )));
        }
        let mut matrix = second_derivative(&grid) * (-a);
        for i in 0..grid.n {
            matrix[(i, i)] += potential[i];
        }
        Ok(Self {
            grid,
            a,
            potential_samples: potential,
            matrix,
            physical_scale: 1.0,
        })
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn period(&self) -> f64 {
        self.grid.period
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }

    /// Spectral norm, i.e. the largest `|λ|`.
    pub fn norm(&self) -> Result<f64> {
        Ok(eig_sym(self)?.norm())
    }
}

/// Assemble the Hill operator of an elliptic profile on one period.
///
/// Quadratic waves give `−c²∂²_η − c + Φ` on `[−K/α, K/α]`. Cubic waves in
/// the physical normalization give `−c²∂²_η − c + Φ²`; in the canonical
/// normalization the bracket `−∂²_y + 2κ²sn² − (1 + κ²)` on `[−2K, 2K]`.
pub fn assemble(p: &WaveProfile, n: usize) -> Result<HillOperator> {
    if n < 16 || !n.is_multiple_of(2) {
        return Err(Error::Parameter(format!("grid size must be even and >= 16, got {n}")));
    }
    if p.model == Model::Peakon {
        return Err(Error::Parameter("the peakon has no periodic Hill operator".into()));
    }
    let grid = p.grid(n)?;
    let canonical_cubic = p.model == Model::Cubic && p.eta_per_native != 1.0;
    let bracket = if canonical_cubic { p.c * p.c * p.alpha * p.alpha } else { 1.0 };
    let a = p.c * p.c / bracket * p.eta_per_native.powi(-2);
    let potential = grid.sample(|x| p.shifted_potential(x) / bracket);
    let mut h = HillOperator::new(grid, a, potential)?;
    h.physical_scale = bracket;
    Ok(h)
}

/// Spectrum of a Hill operator, ascending.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
    /// Distance from 0 to the first positive eigenvalue outside the kernel.
    pub gap: f64,
}

impl SpectrumReport {
    pub fn norm(&self) -> f64 {
        self.eigenvalues.amax()
    }

    /// Index of the eigenvalue of least modulus.
    pub fn nearest_zero(&self) -> usize {
        self.eigenvalues.iamin()
    }

    /// Index of the kernel mode, if it is within `KERNEL_TOL·‖L‖` of zero.
    pub fn kernel_index(&self) -> Option<usize> {
        let j = self.nearest_zero();
        (self.eigenvalues[j].abs() < KERNEL_TOL * self.norm()).then_some(j)
    }

    /// Negative eigenvalues, the kernel mode excluded.
    pub fn count_negative(&self) -> usize {
        let kernel = self.kernel_index();
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|&(j, &l)| l < 0.0 && Some(j) != kernel)
            .count()
    }

    /// 1 if the least-modulus eigenvalue is within tolerance of zero, else 0.
    pub fn count_zero(&self) -> usize {
        usize::from(self.kernel_index().is_some())
    }
}

pub fn eig_sym(h: &HillOperator) -> Result<SpectrumReport> {
    let eig = SymmetricEigen::new(&h.matrix)?;
    let mut report = SpectrumReport {
        eigenvalues: eig.eigenvalues,
        eigenvectors: eig.eigenvectors,
        gap: f64::INFINITY,
    };
    let kernel = report.kernel_index();
    report.gap = report
        .eigenvalues
        .iter()
        .enumerate()
        .find(|&(j, &l)| l > 0.0 && Some(j) != kernel)
        .map_or(f64::INFINITY, |(_, &l)| l);
    Ok(report)
}

/// The three lowest periodic eigenvalues of both Lamé operators versus their
/// closed forms.
#[derive(Debug, Clone, Serialize)]
pub struct LameReport {
    pub k: f64,
    pub n: usize,
    /// `−∂² + 6k²sn²` on period `2K`.
    pub nu: [f64; 3],
    pub nu_closed: [f64; 3],
    /// `−∂² + 2k²sn²` on period `4K`.
    pub epsilon: [f64; 3],
    pub epsilon_closed: [f64; 3],
    pub max_rel_err: f64,
}

/// Closed forms `ν₀, ν₁, ν₂` of `−∂² + 6k²sn²`.
pub fn lame_nu(k: Modulus) -> [f64; 3] {
    let m = k.parameter();
    let s = root_term(k);
    [2.0 + 2.0 * m - 2.0 * s, 4.0 + m, 2.0 + 2.0 * m + 2.0 * s]
}

/// Closed forms `ε₀, ε₁, ε₂` of `−∂² + 2k²sn²`.
pub fn lame_epsilon(k: Modulus) -> [f64; 3] {
    let m = k.parameter();
    [m, 1.0, 1.0 + m]
}

/// `−∂² + ℓ(ℓ+1)k²sn²` on `[−P/2, P/2)`.
pub fn lame_operator(k: Modulus, coefficient: f64, period: f64, n: usize) -> Result<HillOperator> {
    let grid = PeriodicGrid::centered(n, period)?;
    let m = k.parameter();
    let v = grid.sample(|y| {
        let sn = jacobi(y, k).sn;
        coefficient * m * sn * sn
    });
    HillOperator::new(grid, 1.0, v)
}

pub fn lame_check(k: Modulus, n: usize) -> Result<LameReport> {
    let k = Modulus::interior(k.value())?;
    let quarter = crate::elliptic::complete_k(k)?;
    let lowest = |coefficient: f64, period: f64| -> Result<[f64; 3]> {
        let h = lame_operator(k, coefficient, period, n)?;
        let e = eig_sym(&h)?.eigenvalues;
        Ok([e[0], e[1], e[2]])
    };
    let nu = lowest(6.0, 2.0 * quarter)?;
    let epsilon = lowest(2.0, 4.0 * quarter)?;
    let nu_closed = lame_nu(k);
    let epsilon_closed = lame_epsilon(k);
    let max_rel_err = nu
        .iter()
        .zip(&nu_closed)
        .chain(epsilon.iter().zip(&epsilon_closed))
        .map(|(a, b)| (a - b).abs() / b.abs())
        .fold(0.0, f64::max);
    Ok(LameReport {
        k: k.value(),
        n,
        nu,
        nu_closed,
        epsilon,
        epsilon_closed,
        max_rel_err,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelReport {
    pub model: Model,
    pub k: f64,
    pub n: usize,
    /// `‖L̃Φ̃‖∞` (quadratic) or `‖L[sn]‖∞` (cubic), in the unit-bracket scaling.
    pub residual: f64,
    pub lowest: [f64; 4],
    pub n_negative: usize,
    pub n_zero: usize,
    /// `|cos|` of the angle between the kernel eigenvector and the profile.
    pub kernel_alignment: f64,
}

/// Kernel residual of the profile and the two-negative/one-zero signature.
pub fn kernel_check(p: &WaveProfile, n: usize) -> Result<KernelReport> {
    let h = assemble(p, n)?;
    let phi = h.grid.sample(|x| p.phi(x));
    // Rescale to the unit bracket: Φ = c²α²Φ̃ for quadratic waves, Φ = Φ₂ sn
    // for cubic ones.
    let bracket_in = h.physical_scale;
    let bracket_out = p.c * p.c * p.alpha * p.alpha;
    let (op_scale, fn_scale) = match p.model {
        Model::Quadratic => (bracket_out / bracket_in, bracket_out),
        _ => (bracket_out / bracket_in, p.roots[2]),
    };
    let residual = h.apply(&phi).amax() / (op_scale * fn_scale);

    let spec = eig_sym(&h)?;
    let n_negative = spec.count_negative();
    let n_zero = spec.count_zero();
    let e = &spec.eigenvalues;
    let kernel_alignment = spec
        .kernel_index()
        .map(|j| {
            let v = spec.eigenvectors.column(j);
            v.dot(&phi).abs() / (v.norm() * phi.norm())
        })
        .unwrap_or(0.0);
    let report = KernelReport {
        model: p.model,
        k: p.k.map(Modulus::value).unwrap_or(f64::NAN),
        n,
        residual,
        lowest: [e[0], e[1], e[2], e[3]],
        n_negative,
        n_zero,
        kernel_alignment,
    };
    if n_negative != 2 || n_zero != 1 {
        return Err(Error::Signature(format!(
            "expected two negative and one zero eigenvalue, found {n_negative} negative and {n_zero} zero (lowest {:?})",
            report.lowest
        )));
    }
    Ok(report)
}
