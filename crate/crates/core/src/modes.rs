//! Growing modes rebuilt from dispersion zeros, their residual checks, and
//! dominant growth of the discrete linearized operator.

use num_complex::Complex64;
use serde::Serialize;

use crate::dispersion::{Dispersion, DispersionQuery, Shooter, ShootingTrajectory, DEFAULT_MAX_TERMS, DEFAULT_SHOOTING_STEPS};
use crate::error::{Result, StabilityError};
use crate::evolve::{Grid1D, LinearStepper, ModeState, Model};
use crate::profiles::StratifiedEquilibrium;
use crate::rootfinder::Zero;

/// Largest `|D̃(c)|` accepted as a zero by [`reconstruct_mode`].
pub const ZERO_ACCEPTANCE: f64 = 1e-6;
const RECONSTRUCT_TOL: f64 = 1e-12;

/// A normal mode `e^{ik(x - ct)}(φ, r, w)(z)` sampled on a [`Grid1D`], with `sup|φ| = 1`.
#[derive(Debug, Clone, Serialize)]
pub struct GrowingMode {
    pub k: i64,
    pub c: Complex64,
    pub kappa: f64,
    pub sigma: f64,
    pub z: Vec<f64>,
    pub phi: Vec<Complex64>,
    pub r: Vec<Complex64>,
    pub w: Vec<Complex64>,
    /// `φ` at `z = ±1` in the same normalization.
    pub phi_walls: (Complex64, Complex64),
}

impl GrowingMode {
    /// The mode as a linear-evolution state at wavenumber `k`.
    pub fn to_state(&self) -> ModeState {
        ModeState {
            k: self.k,
            kappa: self.kappa,
            rho_hat: self.r.clone(),
            omega_hat: self.w.clone(),
            t: 0.0,
        }
    }

    /// `-ikc`, the eigenvalue of the linearized operator for this mode.
    pub fn eigenvalue(&self) -> Complex64 {
        Complex64::new(0.0, -(self.k as f64)) * self.c
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModeResidualReport {
    pub tg_residual: f64,
    pub bc_defect: f64,
}

/// Rebuilds the mode of `zero` at wavenumber `k` on `grid`.
///
/// Friedlander equilibria go through the Neumann solution `ψ` with
/// `φ = (U_s - c)^α ψ`; anything else uses the shooting trajectory.
pub fn reconstruct_mode(zero: &Zero, k: i64, q: &DispersionQuery, grid: &Grid1D) -> Result<GrowingMode> {
    if k == 0 {
        return Err(StabilityError::InvalidArgument("mode wavenumber must be nonzero".into()));
    }
    let c = zero.c;
    if !(c.im > 0.0) {
        return Err(StabilityError::BranchViolation(c.im));
    }
    let eq = q.equilibrium;
    let kappa = q.kappa;
    let (mut phi, mut walls) = match q.alpha {
        Some(alpha) => {
            let mut eq_a = eq.clone();
            eq_a.alpha = Some(alpha);
            let engine = Dispersion::with_default_panels(&eq_a);
            let sol = engine.solve_neumann(c, kappa, RECONSTRUCT_TOL, DEFAULT_MAX_TERMS)?;
            if sol.psi.right.norm() > ZERO_ACCEPTANCE {
                return Err(StabilityError::NotAZero(sol.psi.right.norm()));
            }
            let lift = |z: f64, psi: Complex64| (Complex64::new(eq.shear.eval(z), 0.0) - c).powf(alpha) * psi;
            let phi: Vec<Complex64> = grid.nodes.iter().map(|&z| lift(z, sol.psi.at(z))).collect();
            (phi, (lift(-1.0, sol.psi.left), lift(1.0, sol.psi.right)))
        }
        None => {
            let traj = Shooter::new(eq, DEFAULT_SHOOTING_STEPS).trajectory(c, kappa);
            let end = *traj.phi.last().unwrap();
            if end.norm() > ZERO_ACCEPTANCE {
                return Err(StabilityError::NotAZero(end.norm()));
            }
            let phi = grid.nodes.iter().map(|&z| hermite(&traj, z)).collect();
            (phi, (traj.phi[0], end))
        }
    };
    let peak = phi
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    let scale = peak.inv();
    for v in &mut phi {
        *v *= scale;
    }
    walls = (walls.0 * scale, walls.1 * scale);
    let mut r = Vec::with_capacity(grid.n);
    let mut w = Vec::with_capacity(grid.n);
    for (&z, &p) in grid.nodes.iter().zip(&phi) {
        let inv = (Complex64::new(eq.shear.eval(z), 0.0) - c).inv();
        let r1 = eq.strat.d1(z);
        r.push(p * inv * r1);
        // φ'' - κ²φ from the Taylor-Goldstein identity
        w.push(p * inv * (eq.shear.d2(z) + r1 * inv));
    }
    Ok(GrowingMode {
        k,
        c,
        kappa,
        sigma: k as f64 * c.im,
        z: grid.nodes.clone(),
        phi,
        r,
        w,
        phi_walls: walls,
    })
}

/// Cubic Hermite interpolation of a shooting trajectory.
fn hermite(t: &ShootingTrajectory, z: f64) -> Complex64 {
    let n = t.z.len() - 1;
    let h = t.z[1] - t.z[0];
    let j = (((z - t.z[0]) / h).floor() as usize).min(n - 1);
    let s = (z - t.z[j]) / h;
    let (s2, s3) = (s * s, s * s * s);
    t.phi[j] * (2.0 * s3 - 3.0 * s2 + 1.0)
        + t.dphi[j] * (h * (s3 - 2.0 * s2 + s))
        + t.phi[j + 1] * (-2.0 * s3 + 3.0 * s2)
        + t.dphi[j + 1] * (h * (s3 - s2))
}

/// Taylor-Goldstein defect of `m` with `φ''` from fourth-order differences.
pub fn mode_residual(m: &GrowingMode, eq: &StratifiedEquilibrium) -> ModeResidualReport {
    let n = m.phi.len();
    let h = if n > 1 { m.z[1] - m.z[0] } else { 2.0 };
    let mut padded = Vec::with_capacity(n + 2);
    padded.push(m.phi_walls.0);
    padded.extend_from_slice(&m.phi);
    padded.push(m.phi_walls.1);
    let k2 = m.kappa * m.kappa;
    let (mut defect, mut scale) = (0.0f64, 0.0f64);
    for j in 2..n {
        let z = m.z[j - 1];
        let d2 = (-padded[j - 2] + padded[j - 1] * 16.0 - padded[j] * 30.0 + padded[j + 1] * 16.0
            - padded[j + 2])
            / (12.0 * h * h);
        let uc = Complex64::new(eq.shear.eval(z), 0.0) - m.c;
        let p = padded[j];
        let lhs = uc * uc * d2;
        let res = uc * uc * (d2 - p * k2) - uc * eq.shear.d2(z) * p - p * eq.strat.d1(z);
        defect = defect.max(res.norm());
        scale = scale.max(lhs.norm());
    }
    let sup = m.phi.iter().map(|v| v.norm()).fold(0.0, f64::max);
    ModeResidualReport {
        tg_residual: if scale > 0.0 { defect / scale } else { f64::INFINITY },
        bc_defect: m.phi_walls.0.norm().max(m.phi_walls.1.norm()) / sup,
    }
}

/// Settings of the propagator power iteration.
#[derive(Debug, Clone, Copy)]
pub struct PowerIteration {
    pub horizon: f64,
    pub dt: f64,
    pub rel_tol: f64,
    pub window: usize,
    pub max_iterations: usize,
    pub seed: u64,
    /// Estimates at or below this are reported as [`StabilityError::NoGrowth`].
    pub growth_floor: f64,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            dt: 1e-3,
            rel_tol: 1e-4,
            window: 5,
            max_iterations: 400,
            seed: 0,
            growth_floor: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthEstimate {
    pub rate: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
}

/// Fits `g(t) = λ + p/t` through the latest estimate and the one at half its
/// time, returning `λ`. Algebraic growth `t^p` gives `λ ≈ 0`.
fn polynomial_corrected(history: &[f64], horizon: f64) -> f64 {
    let b = history.len();
    let a = b / 2;
    let (ta, tb) = ((a as f64 - 0.5) * horizon, (b as f64 - 0.5) * horizon);
    let (ga, gb) = (history[a - 1], history[b - 1]);
    let p = (ga - gb) / (1.0 / ta - 1.0 / tb);
    gb - p / tb
}

/// Largest growth rate of the per-mode linearized operator, hydrostatic when `kappa == 0`.
pub fn dominant_growth(k: i64, kappa: f64, eq: &StratifiedEquilibrium, grid: &Grid1D) -> Result<f64> {
    dominant_growth_with(k as f64, kappa, eq, grid, &PowerIteration::default()).map(|g| g.rate)
}

pub fn dominant_growth_with(
    k: f64,
    kappa: f64,
    eq: &StratifiedEquilibrium,
    grid: &Grid1D,
    opts: &PowerIteration,
) -> Result<GrowthEstimate> {
    if grid.n < 64 {
        return Err(StabilityError::InvalidArgument(format!(
            "dominant_growth needs at least 64 grid points, got {}",
            grid.n
        )));
    }
    let model = if kappa == 0.0 { Model::Hydrostatic } else { Model::Boussinesq };
    let mut stepper = LinearStepper::new(eq, grid, k, kappa, model);
    let steps = (opts.horizon / opts.dt).round().max(1.0) as usize;
    let dt = opts.horizon / steps as f64;
    let mut state = ModeState::random(k.round() as i64, kappa, grid, opts.seed);
    let mut history: Vec<f64> = Vec::new();
    for it in 1..=opts.max_iterations {
        stepper.advance(&mut state, dt, steps);
        let norm = state.norm(grid);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(StabilityError::ToleranceNotReached {
                what: "power iteration (non-finite state)",
                iterations: it,
                last: norm,
            });
        }
        state.scale(1.0 / norm);
        let g = norm.ln() / opts.horizon;
        history.push(g);
        if history.len() > opts.window {
            let old = history[history.len() - 1 - opts.window];
            let scale = g.abs().max(opts.growth_floor);
            if (g - old).abs() < opts.rel_tol * scale {
                if g <= opts.growth_floor {
                    return Err(StabilityError::NoGrowth(g));
                }
                return Ok(GrowthEstimate {
                    rate: g,
                    iterations: it,
                    history,
                });
            }
        }
        if it >= 8 * opts.window {
            let lambda = polynomial_corrected(&history, opts.horizon);
            if lambda <= opts.growth_floor {
                return Err(StabilityError::NoGrowth(lambda));
            }
        }
    }
    let last = *history.last().unwrap();
    Err(StabilityError::ToleranceNotReached {
        what: "power iteration",
        iterations: opts.max_iterations,
        last,
    })
}
