//! Positivity of a symmetric matrix on subspaces of finite codimension.
//!
//! If `H` has exactly `k` negative eigenvalues and `⟨H⁻¹z, z⟩` is negative
//! definite on a subspace `Z` (computed on the complement of the kernel), then
//! `H ≥ 0` on `Z^⊥`. The checkers here verify the hypotheses and then test the
//! conclusion by brute force: the least eigenvalue of `H` compressed to `Z^⊥`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::elliptic::Modulus;
use crate::error::{Error, Result};
use crate::hillop::assemble;
use crate::linalg::SymmetricEigen;
use crate::profiles::{cubic_profile, quadratic_profile, CubicNormalization, Model};

/// Least-modulus eigenvalue below `KERNEL_TOL·‖H‖` is the kernel.
pub const KERNEL_TOL: f64 = 1e-8;
/// Kernel component tolerated in `ξ₀` or in the columns of `Z`.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;
/// The conclusion holds when the compressed minimum is `≥ −CONCLUSION_TOL`.
pub const CONCLUSION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    HypothesesFail,
    ConclusionHolds,
    ConclusionFails,
}

#[derive(Debug, Clone, Serialize)]
pub struct Hypotheses {
    /// Negative eigenvalues of `H`, kernel excluded.
    pub n_neg: usize,
    /// Least positive eigenvalue outside the kernel.
    pub gap: f64,
    /// Largest eigenvalue of `G = [⟨H⁻¹zᵢ, zⱼ⟩]` for an orthonormal basis of `Z`.
    #[serde(rename = "G_max_eig")]
    pub g_max_eig: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubspaceCheck {
    pub n: usize,
    pub dim_z: usize,
    pub delta0: f64,
    pub hypotheses: Hypotheses,
    /// Least eigenvalue of `H` on `Z^⊥`; only computed when the hypotheses hold.
    pub conclusion_min_eig: Option<f64>,
    pub verdict: Verdict,
    /// Orthonormal basis of `Z`.
    #[serde(skip)]
    pub z_basis: DMatrix<f64>,
}

struct Decomposed {
    eig: SymmetricEigen,
    kernel: Option<usize>,
}

impl Decomposed {
    fn new(h: &DMatrix<f64>) -> Result<Self> {
        if h.nrows() != h.ncols() || h.nrows() == 0 {
            return Err(Error::Dimension(format!("H is {}x{}", h.nrows(), h.ncols())));
        }
        let eig = SymmetricEigen::new(h)?;
        let norm = eig.eigenvalues.amax();
        let j = eig.eigenvalues.iamin();
        let kernel = (eig.eigenvalues[j].abs() < KERNEL_TOL * norm).then_some(j);
        Ok(Self { eig, kernel })
    }

    fn n_neg(&self) -> usize {
        self.eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|&(j, &l)| l < 0.0 && Some(j) != self.kernel)
            .count()
    }

    fn gap(&self) -> f64 {
        self.eig
            .eigenvalues
            .iter()
            .enumerate()
            .find(|&(j, &l)| l > 0.0 && Some(j) != self.kernel)
            .map_or(f64::INFINITY, |(_, &l)| l)
    }

    fn kernel_component(&self, v: &DVector<f64>) -> f64 {
        self.kernel
            .map(|j| self.eig.eigenvectors.column(j).dot(v).abs() / v.norm())
            .unwrap_or(0.0)
    }

    /// `H⁻¹v` on the complement of the kernel.
    fn inverse_apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let q = &self.eig.eigenvectors;
        let mut c = q.transpose() * v;
        for (j, cj) in c.iter_mut().enumerate() {
            *cj = if Some(j) == self.kernel { 0.0 } else { *cj / self.eig.eigenvalues[j] };
        }
        q * c
    }
}

/// Householder QR of the columns of `z`: returns an orthonormal basis of
/// `span(z)` and one of its orthogonal complement.
pub fn split_basis(z: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (n, m) = z.shape();
    if m == 0 || m > n {
        return Err(Error::Dimension(format!("subspace of dimension {m} in R^{n}")));
    }
    let scale = z.amax().max(f64::MIN_POSITIVE);
    let mut a = z.clone();
    let mut q = DMatrix::<f64>::identity(n, n);
    for j in 0..m {
        let x: DVector<f64> = a.view((j, j), (n - j, 1)).column(0).clone_owned();
        let norm = x.norm();
        if norm <= 1e-12 * scale {
            return Err(Error::Dimension(format!("subspace basis is rank deficient at column {j}")));
        }
        let alpha = if x[0] > 0.0 { -norm } else { norm };
        let mut v = x;
        v[0] -= alpha;
        let vn = v.norm();
        if vn == 0.0 {
            continue;
        }
        v /= vn;
        // A ← (I − 2vvᵀ)A on rows j.., Q ← Q(I − 2vvᵀ) on columns j..
        let mut rows = a.rows_mut(j, n - j);
        let w: DVector<f64> = rows.tr_mul(&v).column(0).clone_owned();
        rows.ger(-2.0, &v, &w, 1.0);
        let mut cols = q.columns_mut(j, n - j);
        let w: DVector<f64> = &cols * &v;
        cols.ger(-2.0, &w, &v, 1.0);
    }
    Ok((q.columns(0, m).clone_owned(), q.columns(m, n - m).clone_owned()))
}

fn least_eigenvalue_on(h: &DMatrix<f64>, basis: &DMatrix<f64>) -> Result<f64> {
    if basis.ncols() == 0 {
        return Ok(f64::INFINITY);
    }
    let compressed = basis.transpose() * h * basis;
    Ok(SymmetricEigen::eigenvalues_only(&compressed)?[0])
}

/// Codimension one: exactly one negative eigenvalue, gap `≥ δ₀`, and
/// `⟨H⁻¹ξ₀, ξ₀⟩ < 0` imply `H ≥ 0` on `{ξ₀}^⊥`.
pub fn check_codim_one(h: &DMatrix<f64>, xi0: &DVector<f64>, delta0: f64) -> Result<SubspaceCheck> {
    if xi0.len() != h.nrows() {
        return Err(Error::Dimension(format!("ξ₀ has length {}, H is {}x{}", xi0.len(), h.nrows(), h.ncols())));
    }
    if xi0.norm() == 0.0 {
        return Err(Error::Hypothesis("ξ₀ must be nonzero".into()));
    }
    let dec = Decomposed::new(h)?;
    let component = dec.kernel_component(xi0);
    if component > ORTHOGONALITY_TOL {
        return Err(Error::Hypothesis(format!("ξ₀ has kernel component {component:.3e}")));
    }
    let unit = xi0 / xi0.norm();
    let g = dec.inverse_apply(&unit).dot(&unit);
    let hypotheses = Hypotheses {
        n_neg: dec.n_neg(),
        gap: dec.gap(),
        g_max_eig: g,
    };
    let holds = hypotheses.n_neg == 1 && hypotheses.gap >= delta0 && g < 0.0;
    let z = DMatrix::from_column_slice(unit.len(), 1, unit.as_slice());
    conclude(h, z, delta0, hypotheses, holds)
}

/// Codimension `k`: if `H` has `k ≤ dim Z` negative eigenvalues, `Z ⊥ ker H`
/// and `G ≤ −δ₀`, then `H ≥ 0` on `Z^⊥`.
pub fn check_codim_k(h: &DMatrix<f64>, z: &DMatrix<f64>, delta0: f64) -> Result<SubspaceCheck> {
    if z.nrows() != h.nrows() {
        return Err(Error::Dimension(format!("Z has {} rows, H is {}x{}", z.nrows(), h.nrows(), h.ncols())));
    }
    let dec = Decomposed::new(h)?;
    let (basis, _) = split_basis(z)?;
    for j in 0..basis.ncols() {
        let component = dec.kernel_component(&basis.column(j).clone_owned());
        if component > ORTHOGONALITY_TOL {
            return Err(Error::Hypothesis(format!("Z column {j} has kernel component {component:.3e}")));
        }
    }
    let n_neg = dec.n_neg();
    if basis.ncols() < n_neg {
        return Err(Error::Dimension(format!(
            "Z has dimension {} but H has {n_neg} negative eigenvalues",
            basis.ncols()
        )));
    }
    let m = basis.ncols();
    let images: Vec<DVector<f64>> = (0..m).map(|j| dec.inverse_apply(&basis.column(j).clone_owned())).collect();
    let g = DMatrix::from_fn(m, m, |i, j| 0.5 * (images[i].dot(&basis.column(j)) + images[j].dot(&basis.column(i))));
    let g_max = SymmetricEigen::eigenvalues_only(&g)?[m - 1];
    let hypotheses = Hypotheses {
        n_neg,
        gap: dec.gap(),
        g_max_eig: g_max,
    };
    let holds = g_max <= -delta0 + 1e-12;
    conclude(h, basis, delta0, hypotheses, holds)
}

fn conclude(h: &DMatrix<f64>, z_basis: DMatrix<f64>, delta0: f64, hypotheses: Hypotheses, holds: bool) -> Result<SubspaceCheck> {
    let (z_basis, complement) = split_basis(&z_basis)?;
    let (conclusion_min_eig, verdict) = if holds {
        let min = least_eigenvalue_on(h, &complement)?;
        let verdict = if min >= -CONCLUSION_TOL {
            Verdict::ConclusionHolds
        } else {
            Verdict::ConclusionFails
        };
        (Some(min), verdict)
    } else {
        (None, Verdict::HypothesesFail)
    };
    Ok(SubspaceCheck {
        n: h.nrows(),
        dim_z: z_basis.ncols(),
        delta0,
        hypotheses,
        conclusion_min_eig,
        verdict,
        z_basis,
    })
}

/// A 2×2 matrix is negative definite iff `D₁₁ < 0` and `det D > 0`.
pub fn neg_def_2x2(d: [[f64; 2]; 2]) -> bool {
    d[0][0] < 0.0 && d[0][0] * d[1][1] - d[0][1] * d[1][0] > 0.0
}

/// Embedding of odd grid functions: columns `(e_j − e_{n−j})/√2`,
/// `j = 1..n/2`.
pub fn odd_basis(n: usize) -> DMatrix<f64> {
    let m = n / 2 - 1;
    let mut b = DMatrix::zeros(n, m);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 1..=m {
        b[(j, j - 1)] = s;
        b[(n - j, j - 1)] = -s;
    }
    b
}

/// Certificate for a discretized Hill operator.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub model: Model,
    pub k: f64,
    pub n: usize,
    pub hypotheses: Hypotheses,
    pub conclusion_min_eig: Option<f64>,
    pub verdict: Verdict,
}

/// Quadratic: `L` on odd grid functions with `ξ₀ = Φ′`. Cubic: `L` on the full
/// grid with `Z = span{Φ′, L[1]}`.
pub fn certify_hill(model: Model, k: Modulus, n: usize) -> Result<(Certificate, SubspaceCheck)> {
    let check = match model {
        Model::Quadratic => {
            let p = quadratic_profile(k)?;
            let h = assemble(&p, n)?;
            let b = odd_basis(n);
            let h_odd = b.transpose() * &h.matrix * &b;
            let xi0 = b.transpose() * h.grid.sample(|x| p.dphi(x));
            check_codim_one(&h_odd, &xi0, 0.0)?
        }
        Model::Cubic => {
            let p = cubic_profile(k, CubicNormalization::Canonical)?;
            let h = assemble(&p, n)?;
            let dphi = h.grid.sample(|x| p.dphi(x));
            let z = DMatrix::from_columns(&[dphi, h.potential_samples.clone()]);
            check_codim_k(&h.matrix, &z, 0.0)?
        }
        Model::Peakon => return Err(Error::Parameter("no Hill operator for the peakon".into())),
    };
    let cert = Certificate {
        model,
        k: k.value(),
        n,
        hypotheses: check.hypotheses.clone(),
        conclusion_min_eig: check.conclusion_min_eig,
        verdict: check.verdict,
    };
    Ok((cert, check))
}

/// Outcome counts of a batch of random instances.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TrialSummary {
    pub trials: usize,
    pub hypotheses_held: usize,
    pub conclusion_failures: usize,
}

fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    split_basis(&g).expect("gaussian matrix has full rank").0
}

/// Random symmetric `n×n` matrix with `n_neg` negative eigenvalues and,
/// optionally, a one-dimensional kernel. Returns the matrix and its
/// eigenvectors (columns ordered: negative, kernel, positive).
fn random_hamiltonian(n: usize, n_neg: usize, kernel: bool, rng: &mut ChaCha8Rng) -> (DMatrix<f64>, DMatrix<f64>) {
    let q = random_orthogonal(n, rng);
    let lam = DVector::from_fn(n, |i, _| {
        if i < n_neg {
            -rng.random_range(0.1..3.0)
        } else if kernel && i == n_neg {
            0.0
        } else {
            rng.random_range(0.1..5.0)
        }
    });
    let h = &q * DMatrix::from_diagonal(&lam) * q.transpose();
    (0.5 * (&h + h.transpose()), q)
}

fn without_kernel(v: DVector<f64>, q: &DMatrix<f64>, kernel_col: Option<usize>) -> DVector<f64> {
    match kernel_col {
        Some(j) => {
            let e = q.column(j);
            &v - e * e.dot(&v)
        }
        None => v,
    }
}

/// Random codimension-one instances (8×8) whose `ξ₀` satisfies
/// `⟨H⁻¹ξ₀, ξ₀⟩ < 0`; each seed is drawn until the hypotheses hold.
pub fn codim_one_trials(count: usize, seed: u64) -> TrialSummary {
    let outcomes: Vec<Verdict> = (0..count)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
            loop {
                let kernel = rng.random_bool(0.5);
                let (h, q) = random_hamiltonian(8, 1, kernel, &mut rng);
                let raw = DVector::from_fn(8, |_, _| rng.sample::<f64, _>(StandardNormal));
                let xi0 = without_kernel(raw, &q, kernel.then_some(1));
                match check_codim_one(&h, &xi0, 1e-3) {
                    Ok(c) if c.verdict != Verdict::HypothesesFail => return c.verdict,
                    _ => continue,
                }
            }
        })
        .collect();
    summarize(&outcomes)
}

/// Random codimension-`k` instances (10×10, two or three negative
/// eigenvalues); `Z` is a rotation of the negative eigenvectors tilted toward
/// the positive spectral subspace, redrawn until `G ≤ −δ₀`.
pub fn codim_k_trials(count: usize, seed: u64) -> TrialSummary {
    let n = 10;
    let outcomes: Vec<Verdict> = (0..count)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
            loop {
                let n_neg = rng.random_range(2..=3);
                let kernel = rng.random_bool(0.5);
                let (h, q) = random_hamiltonian(n, n_neg, kernel, &mut rng);
                let first_pos = n_neg + usize::from(kernel);
                let rot = random_orthogonal(n_neg, &mut rng);
                let neg = q.columns(0, n_neg) * rot;
                let pos = q.columns(first_pos, n - first_pos).clone_owned();
                let tilt = rng.random_range(0.0..1.5);
                let mix = DMatrix::from_fn(n - first_pos, n_neg, |_, _| rng.sample::<f64, _>(StandardNormal));
                let z = neg + tilt * pos * mix;
                match check_codim_k(&h, &z, 1e-3) {
                    Ok(c) if c.verdict != Verdict::HypothesesFail => return c.verdict,
                    _ => continue,
                }
            }
        })
        .collect();
    summarize(&outcomes)
}

/// Converse sampling: instances with the same spectral shape but arbitrary
/// `ξ₀`. Counts how often the hypothesis fails *and* the conclusion is false.
pub fn codim_one_converse(count: usize, seed: u64) -> usize {
    (0..count)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
            let (h, _) = random_hamiltonian(8, 1, false, &mut rng);
            let xi0 = DVector::from_fn(8, |_, _| rng.sample::<f64, _>(StandardNormal));
            let dec = Decomposed::new(&h).expect("eigensolver");
            let violated = dec.inverse_apply(&xi0).dot(&xi0) >= 0.0;
            let z = DMatrix::from_column_slice(8, 1, xi0.as_slice());
            let (_, complement) = split_basis(&z).expect("nonzero ξ₀");
            violated && least_eigenvalue_on(&h, &complement).expect("eigensolver") < -CONCLUSION_TOL
        })
        .count()
}

fn summarize(outcomes: &[Verdict]) -> TrialSummary {
    TrialSummary {
        trials: outcomes.len(),
        hypotheses_held: outcomes.iter().filter(|&&v| v != Verdict::HypothesesFail).count(),
        conclusion_failures: outcomes.iter().filter(|&&v| v == Verdict::ConclusionFails).count(),
    }
}
