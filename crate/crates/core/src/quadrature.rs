//! Gauss–Legendre rules for smooth, non-periodic integrands.

use std::f64::consts::PI;

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // three-term recurrence for P_n and P_{n-1}
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=order {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let (pn, pnm1) = if order == 0 { (1.0, 0.0) } else if order == 1 { (x, 1.0) } else { (p1, p0) };
            dp = n * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre quadrature with `panels` equal sub-intervals.
#[derive(Debug, Clone)]
pub struct CompositeGauss {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    panels: usize,
}

impl CompositeGauss {
    pub fn new(order: usize, panels: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        Self {
            nodes,
            weights,
            panels: panels.max(1),
        }
    }

    /// Absolute abscissae and weights on `[a, b]`.
    pub fn rule(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let width = (b - a) / self.panels as f64;
        let mut out = Vec::with_capacity(self.panels * self.nodes.len());
        for p in 0..self.panels {
            let lo = a + width * p as f64;
            let mid = lo + 0.5 * width;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                out.push((mid + 0.5 * width * x, 0.5 * width * w));
            }
        }
        out
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.rule(a, b).into_iter().map(|(x, w)| w * f(x)).sum()
    }
}

impl Default for CompositeGauss {
    fn default() -> Self {
        Self::new(24, 32)
    }
}
