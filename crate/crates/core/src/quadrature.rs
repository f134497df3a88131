//! Gauss–Legendre panels, prefix integration on panels, and an adaptive
//! integrator for complex-valued integrands.

use num_complex::Complex64;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Barycentric weights for interpolation through `nodes`.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            let prod: f64 = (0..nodes.len())
                .filter(|&k| k != j)
                .map(|k| nodes[j] - nodes[k])
                .product();
            1.0 / prod
        })
        .collect()
}

/// Values `ℓ_j(x)` of the Lagrange basis through `nodes` at `x`.
pub fn lagrange_basis(nodes: &[f64], bary: &[f64], x: f64) -> Vec<f64> {
    if let Some(hit) = nodes.iter().position(|&n| n == x) {
        let mut out = vec![0.0; nodes.len()];
        out[hit] = 1.0;
        return out;
    }
    let terms: Vec<f64> = nodes
        .iter()
        .zip(bary)
        .map(|(&n, &b)| b / (x - n))
        .collect();
    let sum: f64 = terms.iter().sum();
    terms.into_iter().map(|t| t / sum).collect()
}

/// Composite Gauss–Legendre grid over `[-1, 1]` with uniform panels.
///
/// `integration[i][j] = ∫_{-1}^{x_i} ℓ_j(t) dt` on the reference panel, so a
/// prefix integral inside a panel is one small matrix-vector product.
#[derive(Debug, Clone)]
pub struct PanelGrid {
    pub panels: usize,
    pub order: usize,
    pub ref_nodes: Vec<f64>,
    pub ref_weights: Vec<f64>,
    pub bary: Vec<f64>,
    pub integration: Vec<Vec<f64>>,
    /// All nodes, panel-major.
    pub nodes: Vec<f64>,
    pub edges: Vec<f64>,
}

impl PanelGrid {
    pub fn new(panels: usize, order: usize) -> Self {
        assert!(panels >= 1 && order >= 2);
        let (ref_nodes, ref_weights) = gauss_legendre(order);
        let bary = barycentric_weights(&ref_nodes);
        let integration = ref_nodes
            .iter()
            .map(|&xi| {
                let half = 0.5 * (xi + 1.0);
                let mut row = vec![0.0; order];
                for (&t, &w) in ref_nodes.iter().zip(&ref_weights) {
                    let s = -1.0 + half * (t + 1.0);
                    for (r, l) in row.iter_mut().zip(lagrange_basis(&ref_nodes, &bary, s)) {
                        *r += half * w * l;
                    }
                }
                row
            })
            .collect();
        let edges: Vec<f64> = (0..=panels)
            .map(|p| -1.0 + 2.0 * p as f64 / panels as f64)
            .collect();
        let mut nodes = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let (a, b) = (edges[p], edges[p + 1]);
            for &x in &ref_nodes {
                nodes.push(0.5 * (a + b) + 0.5 * (b - a) * x);
            }
        }
        Self {
            panels,
            order,
            ref_nodes,
            ref_weights,
            bary,
            integration,
            nodes,
            edges,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn panel_width(&self) -> f64 {
        2.0 / self.panels as f64
    }

    /// Prefix integral `∫_{-1}^{z} f` at every node, plus the total over `[-1, 1]`.
    pub fn cumulative(&self, f: &[Complex64], out: &mut [Complex64]) -> Complex64 {
        debug_assert_eq!(f.len(), self.len());
        debug_assert_eq!(out.len(), self.len());
        let half = 0.5 * self.panel_width();
        let m = self.order;
        let mut base = Complex64::new(0.0, 0.0);
        for p in 0..self.panels {
            let fp = &f[p * m..(p + 1) * m];
            for (i, row) in self.integration.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (q, v) in row.iter().zip(fp) {
                    acc += v * q;
                }
                out[p * m + i] = base + acc * half;
            }
            let mut total = Complex64::new(0.0, 0.0);
            for (w, v) in self.ref_weights.iter().zip(fp) {
                total += v * w;
            }
            base += total * half;
        }
        base
    }

    /// Panel index holding `z` (the last panel owns `z = 1`).
    pub fn panel_of(&self, z: f64) -> usize {
        let s = ((z + 1.0) / self.panel_width()).floor();
        (s.max(0.0) as usize).min(self.panels - 1)
    }

    /// Polynomial interpolation of panel data at an arbitrary `z`.
    pub fn interpolate(&self, values: &[Complex64], z: f64) -> Complex64 {
        let p = self.panel_of(z);
        let (a, b) = (self.edges[p], self.edges[p + 1]);
        let x = (2.0 * z - a - b) / (b - a);
        let basis = lagrange_basis(&self.ref_nodes, &self.bary, x);
        basis
            .iter()
            .zip(&values[p * self.order..(p + 1) * self.order])
            .map(|(l, v)| v * l)
            .sum()
    }
}

/// Adaptive Gauss–Legendre quadrature of a complex integrand.
///
/// Each interval is accepted when its 16-point value agrees with the sum of
/// its two halves to `tol · max(1, |running total|)`.
#[derive(Debug, Clone)]
pub struct AdaptiveQuadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    pub tol: f64,
    pub max_depth: usize,
    pub initial_intervals: usize,
}

impl Default for AdaptiveQuadrature {
    fn default() -> Self {
        Self::new(1e-13)
    }
}

impl AdaptiveQuadrature {
    pub fn new(tol: f64) -> Self {
        let (nodes, weights) = gauss_legendre(16);
        Self {
            nodes,
            weights,
            tol,
            max_depth: 40,
            initial_intervals: 16,
        }
    }

    fn rule<F: Fn(f64) -> Complex64>(&self, f: &F, a: f64, b: f64) -> Complex64 {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x) * w;
        }
        acc * half
    }

    /// `∫_a^b f`. Returns the value and a running estimate of the absolute error.
    pub fn integrate<F: Fn(f64) -> Complex64>(&self, f: F, a: f64, b: f64) -> (Complex64, f64) {
        if a == b {
            return (Complex64::new(0.0, 0.0), 0.0);
        }
        let n = self.initial_intervals;
        let pieces: Vec<(f64, f64, Complex64)> = (0..n)
            .map(|i| {
                let lo = a + (b - a) * i as f64 / n as f64;
                let hi = a + (b - a) * (i + 1) as f64 / n as f64;
                (lo, hi, self.rule(&f, lo, hi))
            })
            .collect();
        let scale = pieces.iter().map(|p| p.2).sum::<Complex64>().norm().max(1.0);
        let mut total = Complex64::new(0.0, 0.0);
        let mut err = 0.0;
        let mut stack: Vec<(f64, f64, Complex64, usize)> =
            pieces.into_iter().rev().map(|(lo, hi, v)| (lo, hi, v, 0)).collect();
        while let Some((lo, hi, whole, depth)) = stack.pop() {
            let mid = 0.5 * (lo + hi);
            let left = self.rule(&f, lo, mid);
            let right = self.rule(&f, mid, hi);
            let diff = (left + right - whole).norm();
            let width_share = ((hi - lo) / (b - a)).abs();
            if diff <= self.tol * scale * width_share.max(1e-3) || depth >= self.max_depth {
                total += left + right;
                err += diff;
            } else {
                stack.push((mid, hi, right, depth + 1));
                stack.push((lo, mid, left, depth + 1));
            }
        }
        (total, err)
    }
}
