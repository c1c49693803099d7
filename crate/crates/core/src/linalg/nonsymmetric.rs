//! Dense complex nonsymmetric eigensolver: Householder reduction to upper
//! Hessenberg form, single-shift QR iteration to Schur form, eigenvectors by
//! back substitution on the triangular factor.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_ITER_PER_EIGENVALUE: usize = 60;

#[derive(Debug, Clone)]
pub struct ComplexEigen {
    pub eigenvalues: DVector<Complex64>,
    /// Unit-norm eigenvectors as columns, aligned with `eigenvalues`.
    pub eigenvectors: DMatrix<Complex64>,
}

impl ComplexEigen {
    pub fn new(a: &DMatrix<Complex64>) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::Dimension(format!("matrix is {}x{}, not square", n, a.ncols())));
        }
        let mut h = a.clone();
        let mut q = DMatrix::<Complex64>::identity(n, n);
        hessenberg(&mut h, &mut q);
        schur(&mut h, &mut q)?;
        let eigenvalues = DVector::from_iterator(n, (0..n).map(|i| h[(i, i)]));
        let eigenvectors = triangular_eigenvectors(&h, &q);
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }
}

fn hessenberg(h: &mut DMatrix<Complex64>, q: &mut DMatrix<Complex64>) {
    let n = h.nrows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let norm: f64 = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for c in &mut v {
            *c /= vnorm;
        }
        // H ← (I − 2vv*) H
        for j in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for (idx, vi) in v.iter().enumerate() {
                s += vi.conj() * h[(k + 1 + idx, j)];
            }
            s *= 2.0;
            for (idx, vi) in v.iter().enumerate() {
                h[(k + 1 + idx, j)] -= vi * s;
            }
        }
        // H ← H (I − 2vv*),  Q ← Q (I − 2vv*)
        for target in [&mut *h, &mut *q] {
            for i in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for (idx, vi) in v.iter().enumerate() {
                    s += target[(i, k + 1 + idx)] * vi;
                }
                s *= 2.0;
                for (idx, vi) in v.iter().enumerate() {
                    target[(i, k + 1 + idx)] -= s * vi.conj();
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
}

/// Givens rotation `[c s; -s̄ c]` (c real) with `G·[a; b] = [r; 0]`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, (b / bn).conj());
    }
    let r = an.hypot(bn);
    let c = an / r;
    let s = (a / an) * b.conj() / r;
    (c, s)
}

fn schur(h: &mut DMatrix<Complex64>, q: &mut DMatrix<Complex64>) -> Result<()> {
    let n = h.nrows();
    if n == 0 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let mut rotations: Vec<(f64, Complex64)> = Vec::with_capacity(n);
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let scale = h[(l, l)].norm() + h[(l - 1, l - 1)].norm();
            let scale = if scale == 0.0 { 1.0 } else { scale };
            if h[(l, l - 1)].norm() <= eps * scale {
                h[(l, l - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if iter > MAX_ITER_PER_EIGENVALUE {
            return Err(Error::NoConvergence {
                iterations: total,
                context: "complex Hessenberg QR",
            });
        }

        let shift = if iter.is_multiple_of(11) {
            // exceptional shift
            let extra = if hi >= 2 { h[(hi - 1, hi - 2)].norm() } else { 0.0 };
            h[(hi, hi)] + Complex64::new(h[(hi, hi - 1)].norm() + extra, 0.0)
        } else {
            wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for k in l..=hi {
            h[(k, k)] -= shift;
        }
        rotations.clear();
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * c + s * b;
                h[(k + 1, j)] = -s.conj() * a + b * c;
            }
            h[(k + 1, k)] = Complex64::new(0.0, 0.0);
            rotations.push((c, s));
        }
        for (idx, &(c, s)) in rotations.iter().enumerate() {
            let k = l + idx;
            let rows = (k + 2).min(hi) + 1;
            for i in 0..rows {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s.conj();
                h[(i, k + 1)] = -a * s + b * c;
            }
            for i in 0..n {
                let a = q[(i, k)];
                let b = q[(i, k + 1)];
                q[(i, k)] = a * c + b * s.conj();
                q[(i, k + 1)] = -a * s + b * c;
            }
        }
        for k in l..=hi {
            h[(k, k)] += shift;
        }
    }
    Ok(())
}

fn wilkinson(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mu1 = (a + d) * 0.5 + disc;
    let mu2 = (a + d) * 0.5 - disc;
    if (mu1 - d).norm() < (mu2 - d).norm() {
        mu1
    } else {
        mu2
    }
}

fn triangular_eigenvectors(t: &DMatrix<Complex64>, q: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = t.nrows();
    let tnorm = t.iter().map(|c| c.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tnorm;
    let mut vecs = DMatrix::<Complex64>::zeros(n, n);
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let lambda = t[(k, k)];
        for xi in x.iter_mut() {
            *xi = Complex64::new(0.0, 0.0);
        }
        x[k] = Complex64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for i in j + 1..=k {
                s += t[(j, i)] * x[i];
            }
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < small {
                denom = Complex64::new(small, 0.0);
            }
            x[j] = -s / denom;
            // rescale to avoid overflow in nearly defective cases
            let big = x[j].norm();
            if big > 1e100 {
                for xi in x.iter_mut().take(k + 1) {
                    *xi /= big;
                }
            }
        }
        let mut v = DVector::<Complex64>::zeros(n);
        for i in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for (m, xm) in x.iter().enumerate().take(k + 1) {
                s += q[(i, m)] * xm;
            }
            v[i] = s;
        }
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            v /= Complex64::new(norm, 0.0);
        }
        vecs.set_column(k, &v);
    }
    vecs
}
