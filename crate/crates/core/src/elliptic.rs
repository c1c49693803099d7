//! Jacobi elliptic functions and complete elliptic integrals.
//!
//! Everything here takes the *modulus* `k`, never the parameter `m = k²`.
//! The arithmetic-geometric mean with descending Landen transformations is
//! used throughout; near the degenerate modulus `k → 1` the hyperbolic limits
//! take over.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Above this modulus the AGM amplitude recovery is replaced by the
/// hyperbolic closed forms.
pub const HYPERBOLIC_THRESHOLD: f64 = 1.0 - 1e-12;

const AGM_TOL: f64 = 1e-16;
const AGM_MAX_STEPS: usize = 40;

/// Elliptic modulus `k ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Modulus(f64);

impl Modulus {
    pub fn new(k: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&k) {
            return Err(Error::Domain(k, "[0, 1]"));
        }
        Ok(Self(k))
    }

    /// Modulus strictly inside `(0, 1)`, as required by every elliptic wave family.
    pub fn interior(k: f64) -> Result<Self> {
        if k.is_nan() || !(0.0..=1.0).contains(&k) {
            return Err(Error::Domain(k, "(0, 1)"));
        }
        if k == 0.0 || k == 1.0 {
            return Err(Error::DegenerateFamily(k));
        }
        Ok(Self(k))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Parameter `m = k²`.
    #[inline]
    pub fn parameter(self) -> f64 {
        self.0 * self.0
    }

    /// Complementary modulus `k' = √(1 − k²)`, computed without cancellation.
    #[inline]
    pub fn complement(self) -> f64 {
        ((1.0 - self.0) * (1.0 + self.0)).sqrt()
    }
}

/// The triple `(sn, cn, dn)` at some argument and modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticValues {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// Complete integrals of the first and second kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompleteIntegrals {
    /// Quarter period `K(k)`.
    pub k: f64,
    pub e: f64,
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..AGM_MAX_STEPS {
        if (a - b).abs() <= AGM_TOL * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind.
pub fn complete_k(k: Modulus) -> Result<f64> {
    if k.value() >= 1.0 {
        return Err(Error::Divergent);
    }
    Ok(FRAC_PI_2 / agm(1.0, k.complement()))
}

/// Complete elliptic integral of the second kind.
pub fn complete_e(k: Modulus) -> Result<f64> {
    if k.value() == 1.0 {
        return Ok(1.0);
    }
    Ok(complete_integrals(k)?.e)
}

/// `K(k)` and `E(k)` from a single AGM run.
///
/// `E = K·(1 − Σ 2ⁿ⁻¹ cₙ²)` with `c₀ = k` and `cₙ₊₁ = (aₙ − bₙ)/2`.
pub fn complete_integrals(k: Modulus) -> Result<CompleteIntegrals> {
    if k.value() >= 1.0 {
        return Err(Error::Divergent);
    }
    let mut a = 1.0;
    let mut b = k.complement();
    let mut c = k.value();
    let mut weight = 0.5;
    let mut sum = weight * c * c;
    for _ in 0..AGM_MAX_STEPS {
        if c.abs() <= AGM_TOL * a {
            break;
        }
        let next = 0.5 * (a + b);
        c = 0.5 * (a - b);
        b = (a * b).sqrt();
        a = next;
        weight *= 2.0;
        sum += weight * c * c;
    }
    let k_int = FRAC_PI_2 / a;
    Ok(CompleteIntegrals {
        k: k_int,
        e: k_int * (1.0 - sum),
    })
}

/// Jacobi elliptic functions `sn`, `cn`, `dn` at `(x, k)`.
pub fn jacobi(x: f64, k: Modulus) -> EllipticValues {
    let kv = k.value();
    if kv == 0.0 {
        let (s, c) = x.sin_cos();
        return EllipticValues { sn: s, cn: c, dn: 1.0 };
    }
    if kv >= HYPERBOLIC_THRESHOLD {
        let sech = 1.0 / x.cosh();
        return EllipticValues {
            sn: x.tanh(),
            cn: sech,
            dn: sech,
        };
    }

    // Descending Landen sequence: a_{n+1} = (a+b)/2, b_{n+1} = √(ab), c_{n+1} = (a-b)/2.
    let mut a = [0.0f64; AGM_MAX_STEPS + 1];
    let mut c = [0.0f64; AGM_MAX_STEPS + 1];
    a[0] = 1.0;
    c[0] = kv;
    let mut b = k.complement();
    let mut steps = 0;
    while steps < AGM_MAX_STEPS && c[steps].abs() > AGM_TOL * a[steps] {
        a[steps + 1] = 0.5 * (a[steps] + b);
        c[steps + 1] = 0.5 * (a[steps] - b);
        b = (a[steps] * b).sqrt();
        steps += 1;
    }

    let mut phi = (1u64 << steps) as f64 * a[steps] * x;
    for n in (1..=steps).rev() {
        phi = 0.5 * (phi + (c[n] / a[n] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // dn² = k′² + k²cn² avoids the cancellation in 1 − k²sn² near k → 1
    let kc = k.complement();
    let dn = (kc * kc + kv * kv * cn * cn).sqrt();
    EllipticValues { sn, cn, dn }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    // Independent oracle: adaptive Simpson on the defining integrals.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn step(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            let delta = left + right - whole;
            if depth == 0 || delta.abs() <= 15.0 * tol {
                return left + right + delta / 15.0;
            }
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
        let fa = f(a);
        let fb = f(b);
        let fm = f(0.5 * (a + b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        step(f, a, b, fa, fm, fb, whole, tol, 50)
    }

    fn k_oracle(k: f64) -> f64 {
        adaptive_simpson(&|t: f64| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(), 0.0, FRAC_PI_2, 1e-15)
    }

    fn e_oracle(k: f64) -> f64 {
        adaptive_simpson(&|t: f64| (1.0 - k * k * t.sin().powi(2)).sqrt(), 0.0, FRAC_PI_2, 1e-15)
    }

    fn m(k: f64) -> Modulus {
        Modulus::new(k).unwrap()
    }

    #[test]
    fn circular_limit() {
        assert_eq!(complete_k(m(0.0)).unwrap(), FRAC_PI_2);
        assert_eq!(complete_e(m(0.0)).unwrap(), FRAC_PI_2);
        for &x in &[-3.0, -0.4, 0.0, 1.3, 7.9] {
            let v = jacobi(x, m(0.0));
            assert!((v.sn - x.sin()).abs() < 1e-15);
            assert!((v.cn - x.cos()).abs() < 1e-15);
            assert_eq!(v.dn, 1.0);
        }
    }

    #[test]
    fn degenerate_modulus() {
        assert!(matches!(complete_k(m(1.0)), Err(Error::Divergent)));
        assert_eq!(complete_e(m(1.0)).unwrap(), 1.0);
        let v = jacobi(1.0, m(1.0));
        assert!((v.sn - 0.761_594_155_955_764_9).abs() < 1e-15);
        assert!((v.cn - 0.648_054_273_663_885_4).abs() < 1e-15);
        assert!((v.dn - 0.648_054_273_663_885_4).abs() < 1e-15);
        assert!(Modulus::new(1.2).is_err());
        assert!(Modulus::new(-0.1).is_err());
        assert!(matches!(Modulus::interior(0.0), Err(Error::DegenerateFamily(_))));
    }

    #[test]
    fn integrals_match_quadrature() {
        for &k in &[0.1, 0.5, 0.7, 0.9, 0.99] {
            let ki = complete_k(m(k)).unwrap();
            let ei = complete_e(m(k)).unwrap();
            assert!((ki - k_oracle(k)).abs() < 1e-12 * ki, "K({k})");
            assert!((ei - e_oracle(k)).abs() < 1e-12 * ei, "E({k})");
        }
    }

    #[test]
    fn legendre_relation() {
        // K E' + E K' − K K' = π/2
        for &k in &[0.2, 0.5, 0.8] {
            let a = complete_integrals(m(k)).unwrap();
            let b = complete_integrals(m(m(k).complement())).unwrap();
            let lhs = a.k * b.e + a.e * b.k - a.k * b.k;
            assert!((lhs - FRAC_PI_2).abs() < 1e-13);
        }
    }

    #[test]
    fn quarter_period_values() {
        let k = m(0.7);
        let kk = complete_k(k).unwrap();
        let v = jacobi(kk, k);
        assert!((v.sn - 1.0).abs() < 1e-14);
        assert!(v.cn.abs() < 1e-7);
        assert!((v.dn - 0.51f64.sqrt()).abs() < 1e-13);
        // half period
        let h = jacobi(2.0 * kk, k);
        assert!(h.sn.abs() < 1e-13 && (h.cn + 1.0).abs() < 1e-13 && (h.dn - 1.0).abs() < 1e-13);
    }

    #[test]
    fn derivatives_by_finite_differences() {
        let h = 1e-4;
        for &k in &[0.3, 0.8, 0.999] {
            let km = m(k);
            for i in 0..20 {
                let x = -4.0 + 0.41 * i as f64;
                let p = jacobi(x + h, km);
                let q = jacobi(x - h, km);
                let v = jacobi(x, km);
                let dsn = (p.sn - q.sn) / (2.0 * h);
                let dcn = (p.cn - q.cn) / (2.0 * h);
                let ddn = (p.dn - q.dn) / (2.0 * h);
                assert!((dsn - v.cn * v.dn).abs() < 1e-7);
                assert!((dcn + v.sn * v.dn).abs() < 1e-7);
                assert!((ddn + k * k * v.sn * v.cn).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn parity_on_symmetric_grid() {
        let km = m(0.6);
        for i in 0..50 {
            let x = 0.173 * i as f64;
            let p = jacobi(x, km);
            let q = jacobi(-x, km);
            assert!((p.sn + q.sn).abs() < 1e-12);
            assert!((p.cn - q.cn).abs() < 1e-12);
            assert!((p.dn - q.dn).abs() < 1e-12);
        }
    }

    #[test]
    fn periods() {
        for &k in &[0.2, 0.6, 0.95] {
            let km = m(k);
            let kk = complete_k(km).unwrap();
            for i in 0..25 {
                let x = -5.0 + 0.4 * i as f64;
                let a = jacobi(x, km);
                let b = jacobi(x + 4.0 * kk, km);
                let c = jacobi(x + 2.0 * kk, km);
                assert!((a.sn - b.sn).abs() < 1e-10);
                assert!((a.cn - b.cn).abs() < 1e-10);
                assert!((a.dn - c.dn).abs() < 1e-10);
                assert!((a.sn * a.sn - c.sn * c.sn).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn integral_ordering() {
        for i in 0..=20 {
            let k = 0.049 * i as f64;
            let ci = complete_integrals(m(k)).unwrap();
            assert!(ci.k >= FRAC_PI_2 - 1e-15 && ci.e <= FRAC_PI_2 + 1e-15);
            if k > 0.0 {
                assert!(ci.e < ci.k);
            }
        }
        assert!((complete_k(m(0.0)).unwrap() - PI / 2.0).abs() == 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn pythagorean_identities(x in -40.0f64..40.0, k in 0.0f64..=1.0) {
                let km = Modulus::new(k).unwrap();
                let v = jacobi(x, km);
                prop_assert!((v.sn * v.sn + v.cn * v.cn - 1.0).abs() < 1e-12);
                prop_assert!((v.dn * v.dn + k * k * v.sn * v.sn - 1.0).abs() < 1e-12);
                prop_assert!(v.sn.abs() <= 1.0 + 1e-15);
                prop_assert!(v.dn <= 1.0 + 1e-15 && v.dn >= km.complement() - 1e-12);
            }
        }
    }
}
