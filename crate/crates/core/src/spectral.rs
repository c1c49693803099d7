//! Fourier collocation on uniform periodic grids.
//!
//! Differentiation matrices, the periodic trapezoid rule, trigonometric
//! interpolation and running antiderivatives. All grids have an even number of
//! points; the Nyquist mode is dropped for first derivatives and
//! antiderivatives, which keeps the first-derivative matrix antisymmetric and
//! the second-derivative matrix symmetric.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// `n` equispaced points `start + j·period/n`, `j = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicGrid {
    pub n: usize,
    pub start: f64,
    pub period: f64,
}

impl PeriodicGrid {
    pub fn new(n: usize, start: f64, period: f64) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::Parameter(format!("grid size must be even and >= 4, got {n}")));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::Parameter(format!("period must be positive, got {period}")));
        }
        Ok(Self { n, start, period })
    }

    /// Grid over one period centred at the origin, `[-period/2, period/2)`.
    pub fn centered(n: usize, period: f64) -> Result<Self> {
        Self::new(n, -0.5 * period, period)
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    #[inline]
    pub fn point(&self, j: usize) -> f64 {
        self.start + self.spacing() * j as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> DVector<f64> {
        DVector::from_iterator(self.n, (0..self.n).map(|j| f(self.point(j))))
    }

    /// Index of the mirror point `-x_j` on a centred grid.
    #[inline]
    pub fn mirror(&self, j: usize) -> usize {
        (self.n - j) % self.n
    }

    /// Index of the grid point equal to zero on a centred grid.
    #[inline]
    pub fn origin_index(&self) -> usize {
        self.n / 2
    }

    /// Signed wavenumber of FFT bin `m`.
    fn wavenumber(&self, m: usize) -> f64 {
        let signed = if m <= self.n / 2 { m as f64 } else { m as f64 - self.n as f64 };
        2.0 * PI * signed / self.period
    }

    /// Periodic trapezoid rule `h Σ f_j`.
    pub fn integrate(&self, samples: &DVector<f64>) -> f64 {
        self.spacing() * samples.sum()
    }

    /// Period-weighted inner product `h Σ a_j b_j`.
    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        self.spacing() * a.dot(b)
    }

    pub fn norm(&self, a: &DVector<f64>) -> f64 {
        self.inner(a, a).sqrt()
    }
}

/// First-derivative collocation matrix (real antisymmetric).
pub fn first_derivative(grid: &PeriodicGrid) -> DMatrix<f64> {
    let n = grid.n;
    let h = 2.0 * PI / n as f64;
    let scale = 2.0 * PI / grid.period;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            let d = i as f64 - j as f64;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            scale * 0.5 * sign / (0.5 * d * h).tan()
        }
    })
}

/// Second-derivative collocation matrix (real symmetric, negative semidefinite).
pub fn second_derivative(grid: &PeriodicGrid) -> DMatrix<f64> {
    let n = grid.n;
    let h = 2.0 * PI / n as f64;
    let scale = (2.0 * PI / grid.period).powi(2);
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            scale * (-PI * PI / (3.0 * h * h) - 1.0 / 6.0)
        } else {
            let d = i as f64 - j as f64;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            let s = (0.5 * d * h).sin();
            -scale * sign * 0.5 / (s * s)
        }
    })
}

fn forward(samples: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

fn inverse_real(mut coeffs: Vec<Complex64>) -> Vec<f64> {
    let n = coeffs.len();
    FftPlanner::new().plan_fft_inverse(n).process(&mut coeffs);
    coeffs.iter().map(|c| c.re / n as f64).collect()
}

/// Spectral derivative of periodic samples via FFT (Nyquist mode dropped).
pub fn differentiate(grid: &PeriodicGrid, samples: &DVector<f64>, order: u32) -> DVector<f64> {
    let mut c = forward(samples.as_slice());
    let n = grid.n;
    for (m, cm) in c.iter_mut().enumerate() {
        if order % 2 == 1 && m == n / 2 {
            *cm = Complex64::new(0.0, 0.0);
            continue;
        }
        *cm *= Complex64::new(0.0, grid.wavenumber(m)).powu(order);
    }
    DVector::from_vec(inverse_real(c))
}

/// Trigonometric interpolant of periodic samples, evaluable anywhere.
#[derive(Debug, Clone)]
pub struct TrigInterpolant {
    grid: PeriodicGrid,
    /// Normalized coefficients for bins `0..=n/2`.
    coeffs: Vec<Complex64>,
}

impl TrigInterpolant {
    pub fn new(grid: PeriodicGrid, samples: &DVector<f64>) -> Self {
        let c = forward(samples.as_slice());
        let n = grid.n as f64;
        let coeffs = c[..=grid.n / 2].iter().map(|v| v / n).collect();
        Self { grid, coeffs }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let half = self.grid.n / 2;
        let theta = 2.0 * PI * (x - self.grid.start) / self.grid.period;
        let step = Complex64::from_polar(1.0, theta);
        let mut phase = Complex64::new(1.0, 0.0);
        let mut acc = self.coeffs[0].re;
        for m in 1..half {
            phase *= step;
            acc += 2.0 * (self.coeffs[m] * phase).re;
        }
        // Nyquist bin: real cosine with the single coefficient.
        acc + (self.coeffs[half] * Complex64::from_polar(1.0, theta * half as f64)).re
    }
}

/// Running integral `∫_{x0}^x f` of a periodic function sampled on a grid:
/// `mean·(x − x0) + P(x) − P(x0)` with `P` the periodic antiderivative of the
/// zero-mean part.
#[derive(Debug, Clone)]
pub struct RunningIntegral {
    origin: f64,
    mean: f64,
    periodic: TrigInterpolant,
    periodic_samples: DVector<f64>,
    periodic_at_origin: f64,
}

impl RunningIntegral {
    pub fn new(grid: PeriodicGrid, samples: &DVector<f64>, origin: f64) -> Self {
        let mut c = forward(samples.as_slice());
        let n = grid.n;
        let mean = c[0].re / n as f64;
        c[0] = Complex64::new(0.0, 0.0);
        c[n / 2] = Complex64::new(0.0, 0.0);
        for (m, cm) in c.iter_mut().enumerate().skip(1) {
            if m != n / 2 {
                *cm /= Complex64::new(0.0, grid.wavenumber(m));
            }
        }
        let periodic_samples = DVector::from_vec(inverse_real(c));
        let periodic = TrigInterpolant::new(grid, &periodic_samples);
        let periodic_at_origin = periodic.eval(origin);
        Self {
            origin,
            mean,
            periodic,
            periodic_samples,
            periodic_at_origin,
        }
    }

    /// Mean value of the integrand over one period.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.mean * (x - self.origin) + self.periodic.eval(x) - self.periodic_at_origin
    }

    /// Values at the grid points (no interpolation).
    pub fn on_grid(&self, grid: &PeriodicGrid) -> DVector<f64> {
        DVector::from_iterator(
            grid.n,
            (0..grid.n).map(|j| {
                self.mean * (grid.point(j) - self.origin) + self.periodic_samples[j] - self.periodic_at_origin
            }),
        )
    }

    /// The periodic part `P(x) − P(x0)` on the grid.
    pub fn periodic_on_grid(&self) -> DVector<f64> {
        self.periodic_samples.add_scalar(-self.periodic_at_origin)
    }
}

/// Sixth-order central difference for `f′(x)` with step `h`.
pub fn central_first(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    const W: [f64; 3] = [45.0, -9.0, 1.0];
    W.iter()
        .enumerate()
        .map(|(j, w)| {
            let s = (j + 1) as f64 * h;
            w * (f(x + s) - f(x - s))
        })
        .sum::<f64>()
        / (60.0 * h)
}

/// Sixth-order central difference for `f″(x)` with step `h`.
pub fn central_second(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    const W: [f64; 3] = [270.0, -27.0, 2.0];
    let side: f64 = W
        .iter()
        .enumerate()
        .map(|(j, w)| {
            let s = (j + 1) as f64 * h;
            w * (f(x + s) + f(x - s))
        })
        .sum();
    (side - 490.0 * f(x)) / (180.0 * h * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::centered(n, 2.0 * PI).unwrap()
    }

    #[test]
    fn rejects_odd_grid() {
        assert!(PeriodicGrid::new(17, 0.0, 1.0).is_err());
        assert!(PeriodicGrid::new(16, 0.0, -1.0).is_err());
    }

    #[test]
    fn matrices_have_the_right_symmetry() {
        let g = PeriodicGrid::new(32, -1.3, 2.6).unwrap();
        let d1 = first_derivative(&g);
        let d2 = second_derivative(&g);
        assert!((&d1 + d1.transpose()).amax() < 1e-12);
        assert!((&d2 - d2.transpose()).amax() < 1e-12 * d2.amax());
        let ones = DVector::from_element(32, 1.0);
        assert!((&d1 * &ones).amax() < 1e-11);
        assert!((&d2 * &ones).amax() < 1e-9);
    }

    #[test]
    fn differentiates_trig_polynomials() {
        let g = grid(32);
        let f = g.sample(|x| (3.0 * x).sin() + 0.5 * (x).cos());
        let df = g.sample(|x| 3.0 * (3.0 * x).cos() - 0.5 * x.sin());
        let d2f = g.sample(|x| -9.0 * (3.0 * x).sin() - 0.5 * x.cos());
        assert!((first_derivative(&g) * &f - &df).amax() < 1e-12);
        assert!((second_derivative(&g) * &f - &d2f).amax() < 1e-11);
        assert!((differentiate(&g, &f, 1) - &df).amax() < 1e-12);
        assert!((differentiate(&g, &f, 2) - &d2f).amax() < 1e-11);
    }

    #[test]
    fn trapezoid_is_spectral() {
        let g = grid(32);
        let f = g.sample(|x| (x.cos()).exp());
        // ∫_0^{2π} e^{cos x} = 2π I_0(1)
        let exact = 2.0 * PI * 1.266_065_877_752_008_4;
        assert!((g.integrate(&f) - exact).abs() < 1e-13);
    }

    #[test]
    fn interpolant_reproduces_smooth_functions() {
        let g = grid(48);
        let f = g.sample(|x| 1.0 / (2.0 + x.sin()));
        let t = TrigInterpolant::new(g, &f);
        for i in 0..30 {
            let x = -3.0 + 0.2 * i as f64;
            assert!((t.eval(x) - 1.0 / (2.0 + x.sin())).abs() < 1e-12);
        }
    }

    #[test]
    fn running_integral_with_mean() {
        let g = grid(32);
        let f = g.sample(|x| 1.5 + x.cos());
        let r = RunningIntegral::new(g, &f, 0.0);
        assert!((r.mean() - 1.5).abs() < 1e-14);
        for i in 0..20 {
            let x = -4.0 + 0.45 * i as f64;
            assert!((r.eval(x) - (1.5 * x + x.sin())).abs() < 1e-13);
        }
        let on = r.on_grid(&g);
        for j in 0..g.n {
            let x = g.point(j);
            assert!((on[j] - (1.5 * x + x.sin())).abs() < 1e-13);
        }
    }

    #[test]
    fn sixth_order_differences() {
        let x = 0.7;
        assert!((central_first(f64::sin, x, 1e-2) - x.cos()).abs() < 1e-13);
        assert!((central_second(f64::sin, x, 1e-2) + x.sin()).abs() < 1e-11);
    }
}
