use num_complex::Complex64;
use serde::Serialize;

use super::grid::Grid1D;
use super::growth::GrowthSeries;
use super::linear::{LinearStepper, Model};
use super::nonlinear::{signed_index, Field2D, NonlinearSolver};
use crate::error::{Result, StabilityError};
use crate::modes::GrowingMode;
use crate::profiles::StratifiedEquilibrium;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Sampled Grenier iterate `(ρ_j, ω_j)` on `[0, T]`, `ΛT = 3`.
#[derive(Debug, Clone)]
pub struct GrenierTrajectory {
    pub j: usize,
    pub lambda: f64,
    pub times: Vec<f64>,
    pub states: Vec<Field2D>,
    pub norms: Vec<f64>,
}

impl GrenierTrajectory {
    /// Exponential fit of the norms over `[2/Λ, 3/Λ]`.
    pub fn series(&self) -> GrowthSeries {
        let mut s = GrowthSeries::new(self.times.clone(), self.norms.clone());
        s.fit_window(2.0 / self.lambda, 3.0 / self.lambda);
        s
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrenierOptions {
    pub nx: usize,
    pub m_scale: f64,
    pub dt: f64,
    pub lambda_t: f64,
    pub sample_every: usize,
}

impl Default for GrenierOptions {
    fn default() -> Self {
        Self {
            nx: 16,
            m_scale: 0.5,
            dt: 5e-3,
            lambda_t: 3.0,
            sample_every: 10,
        }
    }
}

/// The linearized operator about the equilibrium, applied per `x`-mode.
struct LinearOperator {
    nx: usize,
    steppers: Vec<LinearStepper>,
}

impl LinearOperator {
    fn new(eq: &StratifiedEquilibrium, grid: &Grid1D, nx: usize, m_scale: f64, model: Model) -> Self {
        let steppers = (0..nx)
            .map(|j| {
                let k = signed_index(j, nx) as f64 / m_scale;
                LinearStepper::new(eq, grid, k, k.abs(), model)
            })
            .collect();
        Self { nx, steppers }
    }

    fn apply(&mut self, f: &Field2D, keep: impl Fn(usize) -> bool) -> (Vec<Complex64>, Vec<Complex64>) {
        let (nx, nz) = (self.nx, f.nz);
        let mut d_rho = vec![ZERO; nx * nz];
        let mut d_omega = vec![ZERO; nx * nz];
        let mut r = vec![ZERO; nz];
        let mut w = vec![ZERO; nz];
        let mut dr = vec![ZERO; nz];
        let mut dw = vec![ZERO; nz];
        for j in 0..nx {
            if !keep(j) {
                continue;
            }
            for iz in 0..nz {
                r[iz] = f.rho[iz * nx + j];
                w[iz] = f.omega[iz * nx + j];
            }
            self.steppers[j].rhs(&r, &w, &mut dr, &mut dw);
            for iz in 0..nz {
                d_rho[iz * nx + j] = dr[iz];
                d_omega[iz * nx + j] = dw[iz];
            }
        }
        (d_rho, d_omega)
    }
}

/// `Z₁(t) = Re(e^{λt} Z_eig)` with `Re λ = Λ` and the mode's own oscillation.
pub fn first_iterate(mode: &GrowingMode, lambda: f64, nx: usize, m_scale: f64, t: f64) -> Field2D {
    let freq = -(mode.k as f64 / m_scale) * mode.c.re;
    let g = Complex64::new(lambda, freq) * t;
    let e = g.exp();
    let r: Vec<Complex64> = mode.r.iter().map(|v| v * e).collect();
    let w: Vec<Complex64> = mode.w.iter().map(|v| v * e).collect();
    let mut f = Field2D::zeros(nx, mode.r.len(), m_scale);
    f.add_mode(mode.k, &r, &w, 1.0);
    f.t = t;
    f
}

/// Integrates iterates `2..=j` from zero data, forced by
/// `-Σ_{k<j} W[ω_k]·∇(ρ_{j-k}, ω_{j-k})`, and returns iterate `j`.
pub fn grenier_iterate(
    j: usize,
    mode: &GrowingMode,
    lambda: f64,
    eq: &StratifiedEquilibrium,
    grid: &Grid1D,
    opts: &GrenierOptions,
) -> Result<GrenierTrajectory> {
    if !(2..=3).contains(&j) {
        return Err(StabilityError::InvalidArgument(format!("Grenier iterate j = {j} must be 2 or 3")));
    }
    if !(lambda > 0.0) {
        return Err(StabilityError::InvalidArgument(format!("Grenier iterates need Lambda > 0, got {lambda}")));
    }
    let model = if mode.kappa == 0.0 { Model::Hydrostatic } else { Model::Boussinesq };
    if model == Model::Boussinesq && (mode.kappa - mode.k.unsigned_abs() as f64 / opts.m_scale).abs() > 1e-12 {
        return Err(StabilityError::InvalidArgument(format!(
            "mode kappa {} does not match k/M = {}",
            mode.kappa,
            mode.k as f64 / opts.m_scale
        )));
    }
    let (nx, m_scale) = (opts.nx, opts.m_scale);
    let solver = NonlinearSolver::new(nx, grid.clone(), m_scale);
    let mut op = LinearOperator::new(eq, grid, nx, m_scale, model);
    let keep = |jx: usize| 3 * signed_index(jx, nx).unsigned_abs() < nx as u64;
    let t_final = opts.lambda_t / lambda;
    let steps = (t_final / opts.dt).ceil() as usize;
    let dt = t_final / steps as f64;

    // iterates[0] is unused, iterates[1] analytic
    let mut iterates: Vec<Field2D> = (0..=j).map(|_| Field2D::zeros(nx, grid.n, m_scale)).collect();
    let rhs = |t: f64, z: &[Field2D], op: &mut LinearOperator| -> Vec<(Vec<Complex64>, Vec<Complex64>)> {
        let mut all: Vec<Field2D> = z.to_vec();
        all[1] = first_iterate(mode, lambda, nx, m_scale, t);
        (2..=j)
            .map(|i| {
                let (mut dr, mut dw) = op.apply(&all[i], keep);
                for k in 1..i {
                    let (fr, fw) = solver.quadratic_forcing(&all[k].omega, &all[i - k]);
                    for (a, b) in dr.iter_mut().zip(&fr) {
                        *a += b;
                    }
                    for (a, b) in dw.iter_mut().zip(&fw) {
                        *a += b;
                    }
                }
                (dr, dw)
            })
            .collect()
    };
    let mut out = GrenierTrajectory {
        j,
        lambda,
        times: vec![0.0],
        states: vec![iterates[j].clone()],
        norms: vec![0.0],
    };
    for s in 0..steps {
        let t = s as f64 * dt;
        let stage = |base: &[Field2D], k: &[(Vec<Complex64>, Vec<Complex64>)], h: f64| -> Vec<Field2D> {
            let mut next = base.to_vec();
            for (i, (dr, dw)) in k.iter().enumerate() {
                let f = &mut next[i + 2];
                for (a, b) in f.rho.iter_mut().zip(dr) {
                    *a += b * h;
                }
                for (a, b) in f.omega.iter_mut().zip(dw) {
                    *a += b * h;
                }
            }
            next
        };
        let k1 = rhs(t, &iterates, &mut op);
        let k2 = rhs(t + 0.5 * dt, &stage(&iterates, &k1, 0.5 * dt), &mut op);
        let k3 = rhs(t + 0.5 * dt, &stage(&iterates, &k2, 0.5 * dt), &mut op);
        let k4 = rhs(t + dt, &stage(&iterates, &k3, dt), &mut op);
        for i in 2..=j {
            let f = &mut iterates[i];
            let (a, b, c, d) = (&k1[i - 2], &k2[i - 2], &k3[i - 2], &k4[i - 2]);
            for q in 0..f.rho.len() {
                f.rho[q] += (a.0[q] + (b.0[q] + c.0[q]) * 2.0 + d.0[q]) * (dt / 6.0);
                f.omega[q] += (a.1[q] + (b.1[q] + c.1[q]) * 2.0 + d.1[q]) * (dt / 6.0);
            }
            f.t = t + dt;
        }
        if (s + 1) % opts.sample_every == 0 || s + 1 == steps {
            out.times.push(t + dt);
            out.norms.push(iterates[j].l2(grid.h));
            out.states.push(iterates[j].clone());
        }
    }
    Ok(out)
}
