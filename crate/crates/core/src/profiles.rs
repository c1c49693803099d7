//! Traveling-wave profiles in the semilinear variable `η`.
//!
//! Quadratic waves solve `c²Φ″ = Φ(Φ − c)` and are cnoidal,
//! `Φ = Φ₀ + (Φ₁ − Φ₀)·sn²(αη; k)`. Cubic waves solve `−c²Φ″ − cΦ + Φ³ = 0`
//! and are snoidal, `Φ = Φ₂·sn(αη; κ)`. The parabolic peakon is the `k → 1`
//! limit of the quadratic family on the whole line.
//!
//! Each profile is evaluated in its *native* coordinate: `η` itself, except for
//! the canonical cubic wave which lives in `y = αη` so that the profile is
//! exactly `sn(y, κ)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::elliptic::{complete_k, jacobi, Modulus};
use crate::error::{Error, Result};
use crate::spectral::{PeriodicGrid, RunningIntegral};

/// Grid used for the antiderivative inside the change of variables.
const COV_GRID: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Quadratic,
    Cubic,
    Peakon,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Quadratic => "quadratic",
            Model::Cubic => "cubic",
            Model::Peakon => "peakon",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "c")]
pub enum CubicNormalization {
    /// Physical wave speed `c > 0`; native coordinate is `η`.
    Physical(f64),
    /// Unit-amplitude profile `sn(y, κ)` in `y = αη`.
    Canonical,
}

/// A constructed traveling wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveProfile {
    pub model: Model,
    pub k: Option<Modulus>,
    /// Wave speed.
    pub c: f64,
    /// Spatial scale `α`.
    pub alpha: f64,
    /// `(Φ₀, Φ₁, Φ₂)`; quadratic roots of the cubic first integral in
    /// increasing order, cubic `(0, Φ₁, Φ₂)` with `Φ₁ > Φ₂` the positive
    /// roots of `ρ⁴ − 2cρ² + A` in `ρ`, peakon `(−c/2, c, c)`.
    pub roots: [f64; 3],
    /// Half period in the native coordinate (`+∞` for the peakon).
    pub half_period: f64,
    /// Constant of integration `A` of the first integral.
    pub first_integral: f64,
    /// `dη / d(native)`; `1/α` for the canonical cubic wave, otherwise 1.
    pub eta_per_native: f64,
    /// Peakon half-length `L`.
    pub peakon_length: Option<f64>,
}

/// Quadratic wave in the canonical normalization `α = 1`.
pub fn quadratic_profile(k: Modulus) -> Result<WaveProfile> {
    let k = Modulus::interior(k.value())?;
    let s = root_term(k);
    quadratic_with_alpha(k, 1.0, 1.0 / (4.0 * s))
}

/// Quadratic wave with prescribed speed `c > 0`; `α` follows from
/// `16c²α⁴(1 − k² + k⁴) = 1`.
pub fn quadratic_profile_with_speed(k: Modulus, c: f64) -> Result<WaveProfile> {
    let k = Modulus::interior(k.value())?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Parameter(format!("wave speed must be positive, got {c}")));
    }
    let alpha = 1.0 / (4.0 * c * root_term(k)).sqrt();
    quadratic_with_alpha(k, alpha, c)
}

/// `√(1 − k² + k⁴)`.
pub(crate) fn root_term(k: Modulus) -> f64 {
    let m = k.parameter();
    (1.0 - m + m * m).sqrt()
}

fn quadratic_with_alpha(k: Modulus, alpha: f64, c: f64) -> Result<WaveProfile> {
    let m = k.parameter();
    let a2 = alpha * alpha;
    let phi0 = 0.5 * c - 2.0 * c * c * a2 * (1.0 + m);
    let phi1 = 0.5 * c + 2.0 * c * c * a2 * (2.0 * m - 1.0);
    let phi2 = 1.5 * c - phi0 - phi1;
    Ok(WaveProfile {
        model: Model::Quadratic,
        k: Some(k),
        c,
        alpha,
        roots: [phi0, phi1, phi2],
        half_period: complete_k(k)? / alpha,
        first_integral: -phi0 * phi1 * phi2,
        eta_per_native: 1.0,
        peakon_length: None,
    })
}

/// Snoidal wave of the cubic model.
pub fn cubic_profile(k: Modulus, normalization: CubicNormalization) -> Result<WaveProfile> {
    let k = Modulus::interior(k.value())?;
    let m = k.parameter();
    let c = match normalization {
        CubicNormalization::Physical(c) => {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Parameter(format!("wave speed must be positive, got {c}")));
            }
            c
        }
        // Φ₂ = 1
        CubicNormalization::Canonical => (1.0 + m) / (2.0 * m),
    };
    let phi1_sq = 2.0 * c / (1.0 + m);
    let phi2_sq = 2.0 * c * m / (1.0 + m);
    let alpha = (1.0 / ((1.0 + m) * c)).sqrt();
    let quarter = complete_k(k)?;
    let (half_period, eta_per_native) = match normalization {
        CubicNormalization::Physical(_) => (2.0 * quarter / alpha, 1.0),
        CubicNormalization::Canonical => (2.0 * quarter, 1.0 / alpha),
    };
    Ok(WaveProfile {
        model: Model::Cubic,
        k: Some(k),
        c,
        alpha,
        roots: [0.0, phi1_sq.sqrt(), phi2_sq.sqrt()],
        half_period,
        first_integral: phi1_sq * phi2_sq,
        eta_per_native,
        peakon_length: None,
    })
}

/// Parabolic peakon on `(−L, L)` together with its change of variables.
pub fn peakon_profile(length: f64) -> Result<(WaveProfile, ChangeOfVariables)> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::Parameter(format!("peakon half-length must be positive, got {length}")));
    }
    let c = length * length / 9.0;
    let profile = WaveProfile {
        model: Model::Peakon,
        k: None,
        c,
        alpha: 3.0 / (2.0 * length),
        roots: [-0.5 * c, c, c],
        half_period: f64::INFINITY,
        first_integral: 0.5 * c * c * c,
        eta_per_native: 1.0,
        peakon_length: Some(length),
    };
    let cov = ChangeOfVariables {
        profile,
        antiderivative: Antiderivative::Peakon,
        // dΞ/dη = (3/2)sech² is positive everywhere but decays to 0
        monotonicity_margin: 0.0,
    };
    Ok((profile, cov))
}

impl WaveProfile {
    /// Full period in the native coordinate.
    pub fn period(&self) -> f64 {
        2.0 * self.half_period
    }

    fn modulus(&self) -> Modulus {
        self.k.expect("elliptic profile carries a modulus")
    }

    /// Scale inside the elliptic argument in native units.
    fn native_alpha(&self) -> f64 {
        self.alpha * self.eta_per_native
    }

    /// `Φ` at native coordinate `x`.
    pub fn phi(&self, x: f64) -> f64 {
        match self.model {
            Model::Quadratic => {
                let e = jacobi(self.alpha * x, self.modulus());
                self.roots[0] + (self.roots[1] - self.roots[0]) * e.sn * e.sn
            }
            Model::Cubic => self.roots[2] * jacobi(self.native_alpha() * x, self.modulus()).sn,
            Model::Peakon => {
                let sech = 1.0 / (self.alpha * x).cosh();
                self.c * (1.0 - 1.5 * sech * sech)
            }
        }
    }

    /// `dΦ/dx` in the native coordinate.
    pub fn dphi(&self, x: f64) -> f64 {
        match self.model {
            Model::Quadratic => {
                let e = jacobi(self.alpha * x, self.modulus());
                2.0 * (self.roots[1] - self.roots[0]) * self.alpha * e.sn * e.cn * e.dn
            }
            Model::Cubic => {
                let a = self.native_alpha();
                let e = jacobi(a * x, self.modulus());
                self.roots[2] * a * e.cn * e.dn
            }
            Model::Peakon => {
                let t = self.alpha * x;
                let sech = 1.0 / t.cosh();
                3.0 * self.c * self.alpha * sech * sech * t.tanh()
            }
        }
    }

    /// Potential of the Hill operator minus the constant: `Φ − c` or `Φ² − c`.
    pub fn shifted_potential(&self, x: f64) -> f64 {
        match self.model {
            Model::Cubic => self.phi(x).powi(2) - self.c,
            _ => self.phi(x) - self.c,
        }
    }

    /// Centred periodic grid over one period.
    pub fn grid(&self, n: usize) -> Result<PeriodicGrid> {
        if self.model == Model::Peakon {
            return Err(Error::Parameter("the peakon has no finite period".into()));
        }
        PeriodicGrid::centered(n, self.period())
    }

    /// The first-integral polynomial `F(Φ)`, equal to `(dΦ/dη)²`.
    pub fn first_integral_rhs(&self, phi: f64) -> f64 {
        let c = self.c;
        let a = self.first_integral;
        match self.model {
            Model::Cubic => (phi.powi(4) - 2.0 * c * phi * phi + a) / (2.0 * c * c),
            _ => 2.0 / (3.0 * c * c) * (phi.powi(3) - 1.5 * c * phi * phi + a),
        }
    }

    /// Native coordinate of a crest, where `Φ′ = 0`.
    fn critical_point(&self) -> f64 {
        match self.model {
            Model::Cubic => 0.5 * self.half_period,
            _ => 0.0,
        }
    }
}

/// Largest `|Φ′² − F(Φ)|` over `n_samples` points of one period, starting at a
/// crest.
pub fn first_integral_residual(p: &WaveProfile, n_samples: usize) -> Result<f64> {
    if p.model == Model::Peakon {
        return Err(Error::Parameter("first-integral check needs a periodic profile".into()));
    }
    let n = n_samples.max(1);
    let step = p.period() / n as f64;
    let x0 = p.critical_point();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let x = x0 + step * j as f64;
        let deta = p.dphi(x) / p.eta_per_native;
        worst = worst.max((deta * deta - p.first_integral_rhs(p.phi(x))).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone)]
enum Antiderivative {
    /// Running integral of `Φ` or `Φ²` in the native coordinate.
    Periodic(RunningIntegral),
    Peakon,
}

/// The map `ξ = Ξ(η) = η − Ψ(η)/c` with `Ψ′ = Φ` (quadratic) or `Φ²` (cubic).
#[derive(Debug, Clone)]
pub struct ChangeOfVariables {
    pub profile: WaveProfile,
    antiderivative: Antiderivative,
    /// Minimum of `dΞ/dη` over one period.
    pub monotonicity_margin: f64,
}

impl ChangeOfVariables {
    /// `Ξ(η)`.
    pub fn xi(&self, eta: f64) -> f64 {
        let p = &self.profile;
        match &self.antiderivative {
            Antiderivative::Periodic(ri) => {
                let x = eta / p.eta_per_native;
                eta - p.eta_per_native * ri.eval(x) / p.c
            }
            Antiderivative::Peakon => {
                let l = p.peakon_length.expect("peakon length");
                l * (p.alpha * eta).tanh()
            }
        }
    }

    /// `dΞ/dη = 1 − Φ/c` or `1 − Φ²/c`.
    pub fn dxi(&self, eta: f64) -> f64 {
        let p = &self.profile;
        let x = eta / p.eta_per_native;
        match p.model {
            Model::Cubic => 1.0 - p.phi(x).powi(2) / p.c,
            _ => 1.0 - p.phi(x) / p.c,
        }
    }

    /// The antiderivative `Ψ(η)` itself.
    pub fn antiderivative(&self, eta: f64) -> f64 {
        self.profile.c * (eta - self.xi(eta))
    }
}

/// Build `Ξ` for an elliptic profile; fails if `Ξ` is not strictly increasing.
pub fn change_of_variables(p: &WaveProfile) -> Result<ChangeOfVariables> {
    if p.model == Model::Peakon {
        let length = p.peakon_length.expect("peakon length");
        return Ok(peakon_profile(length)?.1);
    }
    if p.c == 0.0 {
        return Err(Error::Parameter("change of variables needs c != 0".into()));
    }
    let grid = p.grid(COV_GRID)?;
    let integrand = match p.model {
        Model::Cubic => grid.sample(|x| p.phi(x).powi(2)),
        _ => grid.sample(|x| p.phi(x)),
    };
    let ri = RunningIntegral::new(grid, &integrand, 0.0);
    let mut cov = ChangeOfVariables {
        profile: *p,
        antiderivative: Antiderivative::Periodic(ri),
        monotonicity_margin: 0.0,
    };
    cov.monotonicity_margin = (0..grid.n)
        .map(|j| cov.dxi(grid.point(j) * p.eta_per_native))
        .fold(f64::INFINITY, f64::min);
    if cov.monotonicity_margin <= 0.0 {
        return Err(Error::NotInvertible {
            margin: cov.monotonicity_margin,
        });
    }
    Ok(cov)
}

/// Closed-form `min(1 − Φ/c) = 2α²c(1 − 2k² + √(1 − k² + k⁴))` for the
/// quadratic wave, attained where `cn = 0`.
pub fn quadratic_margin_closed_form(p: &WaveProfile) -> f64 {
    let k = p.modulus();
    2.0 * p.alpha * p.alpha * p.c * (1.0 - 2.0 * k.parameter() + root_term(k))
}
