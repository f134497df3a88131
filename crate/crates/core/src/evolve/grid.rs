use num_complex::Complex64;

/// Uniform interior grid of `[-1, 1]`: `z_i = -1 + (i+1) h`, `h = 2/(n+1)`.
///
/// Endpoints are excluded; Dirichlet data live in the solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    pub n: usize,
    pub nodes: Vec<f64>,
    pub h: f64,
}

impl Grid1D {
    pub fn new(n: usize) -> Self {
        assert!(n >= 3, "Grid1D needs at least 3 points");
        let h = 2.0 / (n + 1) as f64;
        let nodes = (0..n)
            .map(|i| {
                // Mirror the upper half so the grid is exactly symmetric.
                let j = i.min(n - 1 - i);
                let z = -1.0 + (j + 1) as f64 * h;
                if 2 * i + 1 == n {
                    0.0
                } else if i == j {
                    z
                } else {
                    -z
                }
            })
            .collect();
        Self { n, nodes, h }
    }

    /// Discrete `L²` norm `sqrt(h Σ |f_i|²)`.
    pub fn l2(&self, f: &[Complex64]) -> f64 {
        (self.h * f.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }
}

/// LU factors of `D² - κ²` with homogeneous Dirichlet data.
#[derive(Debug, Clone)]
pub struct PoissonSolver {
    kappa: f64,
    inv_h2: f64,
    /// Modified super-diagonal and inverse pivots of the Thomas sweep.
    upper: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl PoissonSolver {
    pub fn new(grid: &Grid1D, kappa: f64) -> Self {
        let n = grid.n;
        let inv_h2 = 1.0 / (grid.h * grid.h);
        let diag = -2.0 * inv_h2 - kappa * kappa;
        let off = inv_h2;
        let mut upper = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev_upper = 0.0;
        for i in 0..n {
            let pivot = diag - off * prev_upper;
            inv_pivot[i] = 1.0 / pivot;
            upper[i] = off / pivot;
            prev_upper = upper[i];
        }
        Self {
            kappa,
            inv_h2,
            upper,
            inv_pivot,
        }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn solve_into(&self, rhs: &[Complex64], out: &mut [Complex64]) {
        let n = rhs.len();
        debug_assert_eq!(n, self.upper.len());
        let off = self.inv_h2;
        let mut prev = Complex64::new(0.0, 0.0);
        for i in 0..n {
            prev = (rhs[i] - prev * off) * self.inv_pivot[i];
            out[i] = prev;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            let next = out[i + 1];
            out[i] -= next * self.upper[i];
        }
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); rhs.len()];
        self.solve_into(rhs, &mut out);
        out
    }
}

/// `∂²_z φ = ω`, `φ(±1) = 0`, second-order central differences.
pub fn poisson_hydro(omega_hat: &[Complex64], grid: &Grid1D) -> Vec<Complex64> {
    poisson_full(omega_hat, 0.0, grid)
}

/// `(∂²_z - κ²) φ = ω`, `φ(±1) = 0`.
pub fn poisson_full(omega_hat: &[Complex64], kappa: f64, grid: &Grid1D) -> Vec<Complex64> {
    assert_eq!(omega_hat.len(), grid.n);
    PoissonSolver::new(grid, kappa).solve(omega_hat)
}

/// Second-order central first derivative with zero Dirichlet data outside the grid.
pub fn central_dz(f: &[Complex64], h: f64, out: &mut [Complex64]) {
    let n = f.len();
    let s = 0.5 / h;
    for i in 0..n {
        let lo = if i == 0 { Complex64::new(0.0, 0.0) } else { f[i - 1] };
        let hi = if i + 1 == n {
            Complex64::new(0.0, 0.0)
        } else {
            f[i + 1]
        };
        out[i] = (hi - lo) * s;
    }
}
