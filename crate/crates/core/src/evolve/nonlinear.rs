use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::{Grid1D, PoissonSolver};
use crate::error::{Result, StabilityError};
use crate::profiles::StratifiedEquilibrium;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Real `(ρ, ω)` on `T_M × (-1, 1)` stored as `x`-Fourier coefficients.
///
/// Coefficient `(kx, iz)` sits at `iz * nx + kx` in FFT order, normalized so
/// that `f(x_j, z) = Σ_k f̂_k e^{i k x_j / M}`. Hermitian symmetry in `kx`
/// holds because the fields are real.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    pub nx: usize,
    pub nz: usize,
    pub m_scale: f64,
    pub rho: Vec<Complex64>,
    pub omega: Vec<Complex64>,
    pub t: f64,
}

/// Signed wavenumber index of FFT slot `j`.
pub fn signed_index(j: usize, nx: usize) -> i64 {
    if j <= nx / 2 {
        j as i64
    } else {
        j as i64 - nx as i64
    }
}

fn slot(k: i64, nx: usize) -> usize {
    k.rem_euclid(nx as i64) as usize
}

impl Field2D {
    pub fn zeros(nx: usize, nz: usize, m_scale: f64) -> Self {
        Self {
            nx,
            nz,
            m_scale,
            rho: vec![ZERO; nx * nz],
            omega: vec![ZERO; nx * nz],
            t: 0.0,
        }
    }

    /// The steady state `(ρ_s, U_s')`.
    pub fn equilibrium(eq: &StratifiedEquilibrium, nx: usize, grid: &Grid1D, m_scale: f64) -> Self {
        let mut f = Self::zeros(nx, grid.n, m_scale);
        for (iz, &z) in grid.nodes.iter().enumerate() {
            f.rho[iz * nx] = Complex64::new(eq.strat.eval(z), 0.0);
            f.omega[iz * nx] = Complex64::new(eq.shear.d1(z), 0.0);
        }
        f
    }

    pub fn x_nodes(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.nx).map(|j| j as f64 * dx).collect()
    }

    pub fn dx(&self) -> f64 {
        2.0 * PI * self.m_scale / self.nx as f64
    }

    pub fn rho_hat(&self, k: i64, iz: usize) -> Complex64 {
        self.rho[iz * self.nx + slot(k, self.nx)]
    }

    pub fn omega_hat(&self, k: i64, iz: usize) -> Complex64 {
        self.omega[iz * self.nx + slot(k, self.nx)]
    }

    /// Adds `Re(e^{i k x / M} (r(z), w(z))) · scale`.
    pub fn add_mode(&mut self, k: i64, r: &[Complex64], w: &[Complex64], scale: f64) {
        assert!(k != 0 && (k.unsigned_abs() as usize) < self.nx / 2);
        let (p, m) = (slot(k, self.nx), slot(-k, self.nx));
        for iz in 0..self.nz {
            let row = iz * self.nx;
            self.rho[row + p] += r[iz] * (0.5 * scale);
            self.rho[row + m] += r[iz].conj() * (0.5 * scale);
            self.omega[row + p] += w[iz] * (0.5 * scale);
            self.omega[row + m] += w[iz].conj() * (0.5 * scale);
        }
    }

    /// `sqrt(dx · h · Σ |f(x_j, z_i)|²)` over both fields, via Parseval.
    pub fn l2(&self, h: f64) -> f64 {
        let s: f64 = self
            .rho
            .iter()
            .chain(&self.omega)
            .map(|v| v.norm_sqr())
            .sum();
        (2.0 * PI * self.m_scale * h * s).sqrt()
    }

    /// Discrete `L²` distance from `other` (same grid).
    pub fn distance(&self, other: &Field2D, h: f64) -> f64 {
        let s: f64 = self
            .rho
            .iter()
            .zip(&other.rho)
            .chain(self.omega.iter().zip(&other.omega))
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        (2.0 * PI * self.m_scale * h * s).sqrt()
    }

    /// Largest violation of `f̂_{-k} = conj(f̂_k)`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for iz in 0..self.nz {
            let row = iz * self.nx;
            for j in 0..self.nx {
                let m = (self.nx - j) % self.nx;
                worst = worst
                    .max((self.rho[row + j] - self.rho[row + m].conj()).norm())
                    .max((self.omega[row + j] - self.omega[row + m].conj()).norm());
            }
        }
        worst
    }

    /// Domain integral of `ρ` (`2πM · h · Σ_z ρ̂_0`).
    pub fn integral_rho(&self, h: f64) -> f64 {
        2.0 * PI * self.m_scale * h * (0..self.nz).map(|iz| self.rho[iz * self.nx].re).sum::<f64>()
    }

    pub fn integral_omega(&self, h: f64) -> f64 {
        2.0 * PI * self.m_scale * h * (0..self.nz).map(|iz| self.omega[iz * self.nx].re).sum::<f64>()
    }

    fn axpy(&mut self, a: f64, rho: &[Complex64], omega: &[Complex64]) {
        for (s, o) in self.rho.iter_mut().zip(rho) {
            *s += o * a;
        }
        for (s, o) in self.omega.iter_mut().zip(omega) {
            *s += o * a;
        }
    }
}

/// Real physical-space samples, `[iz * nx + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub nx: usize,
    pub nz: usize,
    pub m_scale: f64,
    pub t: f64,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

/// Pseudo-spectral RK4 solver of
/// `ρ_t + u·∇ρ = 0`, `ω_t + u·∇ω = ρ_x`, `Δφ = ω`, `φ(±1) = 0`, `u = φ_z`, `v = -φ_x`.
///
/// Products are formed in physical space and dealiased by the 2/3 rule; the
/// advection terms use the flux form `∂_x(u f) + ∂_z(v f)` with central
/// differences in `z`.
pub struct NonlinearSolver {
    pub nx: usize,
    pub grid: Grid1D,
    pub m_scale: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    poisson: Vec<PoissonSolver>,
    keep: Vec<bool>,
}

struct Velocity {
    phi: Vec<Complex64>,
    u: Vec<Complex64>,
    v: Vec<Complex64>,
}

impl NonlinearSolver {
    pub fn new(nx: usize, grid: Grid1D, m_scale: f64) -> Self {
        assert!(nx >= 4 && nx.is_multiple_of(2), "nx must be even and at least 4");
        let mut planner = FftPlanner::new();
        let poisson = (0..nx)
            .map(|j| PoissonSolver::new(&grid, signed_index(j, nx).unsigned_abs() as f64 / m_scale))
            .collect();
        let keep = (0..nx)
            .map(|j| 3 * signed_index(j, nx).unsigned_abs() < nx as u64)
            .collect();
        Self {
            fwd: planner.plan_fft_forward(nx),
            inv: planner.plan_fft_inverse(nx),
            nx,
            grid,
            m_scale,
            poisson,
            keep,
        }
    }

    fn wavenumber(&self, j: usize) -> f64 {
        signed_index(j, self.nx) as f64 / self.m_scale
    }

    /// Zeroes the modes removed by the 2/3 rule.
    pub fn dealias(&self, f: &mut Field2D) {
        for iz in 0..f.nz {
            for j in 0..self.nx {
                if !self.keep[j] {
                    f.rho[iz * self.nx + j] = ZERO;
                    f.omega[iz * self.nx + j] = ZERO;
                }
            }
        }
    }

    fn to_physical(&self, spec: &[Complex64]) -> Vec<Complex64> {
        let mut buf = spec.to_vec();
        self.inv.process(&mut buf);
        for v in &mut buf {
            v.im = 0.0;
        }
        buf
    }

    fn to_spectral(&self, phys: &[Complex64]) -> Vec<Complex64> {
        let mut buf = phys.to_vec();
        self.fwd.process(&mut buf);
        let s = 1.0 / self.nx as f64;
        for v in &mut buf {
            *v *= s;
        }
        buf
    }

    /// Central `∂_z` of every column, zero Dirichlet data outside.
    fn dz(&self, f: &[Complex64]) -> Vec<Complex64> {
        let (nx, nz) = (self.nx, self.grid.n);
        let s = 0.5 / self.grid.h;
        let mut out = vec![ZERO; f.len()];
        for iz in 0..nz {
            for j in 0..nx {
                let lo = if iz == 0 { ZERO } else { f[(iz - 1) * nx + j] };
                let hi = if iz + 1 == nz { ZERO } else { f[(iz + 1) * nx + j] };
                out[iz * nx + j] = (hi - lo) * s;
            }
        }
        out
    }

    fn velocity(&self, omega: &[Complex64]) -> Velocity {
        let (nx, nz) = (self.nx, self.grid.n);
        let mut phi = vec![ZERO; nx * nz];
        let mut col = vec![ZERO; nz];
        let mut sol = vec![ZERO; nz];
        for j in 0..nx {
            for iz in 0..nz {
                col[iz] = omega[iz * nx + j];
            }
            self.poisson[j].solve_into(&col, &mut sol);
            for iz in 0..nz {
                phi[iz * nx + j] = sol[iz];
            }
        }
        let u = self.dz(&phi);
        let mut v = phi.clone();
        for iz in 0..nz {
            for j in 0..nx {
                v[iz * nx + j] *= -I * self.wavenumber(j);
            }
        }
        Velocity { phi, u, v }
    }

    /// Sup norms of the physical velocity `(‖u‖_∞, ‖v‖_∞)`.
    pub fn max_velocity(&self, f: &Field2D) -> (f64, f64) {
        let vel = self.velocity(&f.omega);
        let sup = |s: &[Complex64]| {
            self.to_physical(s)
                .iter()
                .map(|v| v.re.abs())
                .fold(0.0, f64::max)
        };
        (sup(&vel.u), sup(&vel.v))
    }

    /// `0.5 · min(Δx/‖u‖_∞, h/‖v‖_∞)`.
    pub fn cfl_limit(&self, f: &Field2D) -> f64 {
        let (u, v) = self.max_velocity(f);
        let dx = 2.0 * PI * self.m_scale / self.nx as f64;
        let a = if u > 0.0 { dx / u } else { f64::INFINITY };
        let b = if v > 0.0 { self.grid.h / v } else { f64::INFINITY };
        0.5 * a.min(b)
    }

    /// Advection of `(ρ, ω)` by the velocity of `ω`, with an optional extra
    /// transport field. Returns `-(∂_x(u f) + ∂_z(v f))` for both fields.
    fn advect(
        &self,
        vel: &Velocity,
        rho: &[Complex64],
        omega: &[Complex64],
    ) -> (Vec<Complex64>, Vec<Complex64>) {
        let u = self.to_physical(&vel.u);
        let v = self.to_physical(&vel.v);
        let r = self.to_physical(rho);
        let w = self.to_physical(omega);
        let prod = |a: &[Complex64], b: &[Complex64]| -> Vec<Complex64> {
            self.to_spectral(
                &a.iter()
                    .zip(b)
                    .map(|(x, y)| Complex64::new(x.re * y.re, 0.0))
                    .collect::<Vec<_>>(),
            )
        };
        let (ur, vr, uw, vw) = (prod(&u, &r), prod(&v, &r), prod(&u, &w), prod(&v, &w));
        let (dvr, dvw) = (self.dz(&vr), self.dz(&vw));
        let (nx, nz) = (self.nx, self.grid.n);
        let mut d_rho = vec![ZERO; nx * nz];
        let mut d_omega = vec![ZERO; nx * nz];
        for iz in 0..nz {
            for j in 0..nx {
                let idx = iz * nx + j;
                if !self.keep[j] {
                    continue;
                }
                let ik = I * self.wavenumber(j);
                d_rho[idx] = -(ik * ur[idx] + dvr[idx]);
                d_omega[idx] = -(ik * uw[idx] + dvw[idx]);
            }
        }
        (d_rho, d_omega)
    }

    /// Time derivative of the full nonlinear system.
    pub fn rhs(&self, f: &Field2D) -> (Vec<Complex64>, Vec<Complex64>) {
        let vel = self.velocity(&f.omega);
        let (d_rho, mut d_omega) = self.advect(&vel, &f.rho, &f.omega);
        for iz in 0..self.grid.n {
            for j in 0..self.nx {
                if self.keep[j] {
                    let idx = iz * self.nx + j;
                    d_omega[idx] += I * self.wavenumber(j) * f.rho[idx];
                }
            }
        }
        (d_rho, d_omega)
    }

    /// `-(W[ω_a]·∇ρ_b, W[ω_a]·∇ω_b)` in flux form, for Grenier forcing.
    pub fn quadratic_forcing(&self, a_omega: &[Complex64], b: &Field2D) -> (Vec<Complex64>, Vec<Complex64>) {
        let vel = self.velocity(a_omega);
        self.advect(&vel, &b.rho, &b.omega)
    }

    /// One RK4 step. Fails with `CflViolation` when `dt` exceeds the CFL limit of `f`.
    pub fn step(&self, f: &mut Field2D, dt: f64) -> Result<()> {
        let limit = self.cfl_limit(f);
        if dt > limit {
            return Err(StabilityError::CflViolation { dt, limit });
        }
        self.step_unchecked(f, dt);
        Ok(())
    }

    pub fn step_unchecked(&self, f: &mut Field2D, dt: f64) {
        let (k1r, k1w) = self.rhs(f);
        let mut s = f.clone();
        s.axpy(0.5 * dt, &k1r, &k1w);
        let (k2r, k2w) = self.rhs(&s);
        let mut s = f.clone();
        s.axpy(0.5 * dt, &k2r, &k2w);
        let (k3r, k3w) = self.rhs(&s);
        let mut s = f.clone();
        s.axpy(dt, &k3r, &k3w);
        let (k4r, k4w) = self.rhs(&s);
        for i in 0..f.rho.len() {
            f.rho[i] += (k1r[i] + (k2r[i] + k3r[i]) * 2.0 + k4r[i]) * (dt / 6.0);
            f.omega[i] += (k1w[i] + (k2w[i] + k3w[i]) * 2.0 + k4w[i]) * (dt / 6.0);
        }
        f.t += dt;
    }

    /// Physical `(ρ, u, v)` samples, used by the rescaling.
    pub fn snapshot(&self, f: &Field2D) -> FieldSnapshot {
        let vel = self.velocity(&f.omega);
        let re = |s: &[Complex64]| self.to_physical(s).iter().map(|v| v.re).collect();
        FieldSnapshot {
            nx: f.nx,
            nz: f.nz,
            m_scale: f.m_scale,
            t: f.t,
            rho: re(&f.rho),
            u: re(&vel.u),
            v: re(&vel.v),
        }
    }

    /// Stream function coefficients of `f`, for diagnostics.
    pub fn stream_function(&self, f: &Field2D) -> Vec<Complex64> {
        self.velocity(&f.omega).phi
    }
}

/// One RK4 step of the nonlinear system on the solver's grid.
pub fn step_nonlinear(solver: &NonlinearSolver, field: &Field2D, dt: f64) -> Result<Field2D> {
    let mut next = field.clone();
    solver.step(&mut next, dt)?;
    Ok(next)
}
