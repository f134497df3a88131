use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::grid::{Grid1D, PoissonSolver};
use super::growth::GrowthSeries;
use crate::profiles::StratifiedEquilibrium;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Hydrostatic,
    Boussinesq,
}

/// Per-wavenumber complex state `(ρ̂, ω̂)` on a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    pub k: i64,
    pub kappa: f64,
    pub rho_hat: Vec<Complex64>,
    pub omega_hat: Vec<Complex64>,
    pub t: f64,
}

impl ModeState {
    pub fn zeros(k: i64, kappa: f64, n: usize) -> Self {
        Self {
            k,
            kappa,
            rho_hat: vec![Complex64::new(0.0, 0.0); n],
            omega_hat: vec![Complex64::new(0.0, 0.0); n],
            t: 0.0,
        }
    }

    /// Uniform random complex entries from a seeded ChaCha stream, unit norm.
    pub fn random(k: i64, kappa: f64, grid: &Grid1D, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = Self::zeros(k, kappa, grid.n);
        for v in s.rho_hat.iter_mut().chain(s.omega_hat.iter_mut()) {
            *v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        let norm = s.norm(grid);
        s.scale(1.0 / norm);
        s
    }

    /// Joint discrete `L²` norm of `(ρ̂, ω̂)`.
    pub fn norm(&self, grid: &Grid1D) -> f64 {
        grid.l2(&self.rho_hat).hypot(grid.l2(&self.omega_hat))
    }

    pub fn scale(&mut self, s: f64) {
        for v in self.rho_hat.iter_mut().chain(self.omega_hat.iter_mut()) {
            *v *= s;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.rho_hat
            .iter()
            .chain(&self.omega_hat)
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// RK4 integrator of the linearized system for one `x`-wavenumber:
///
/// `ρ̂_t = -ik U_s ρ̂ + ik ρ_s' φ̂`, `ω̂_t = -ik U_s ω̂ + ik U_s'' φ̂ + ik ρ̂`,
/// with `φ̂` from the hydrostatic or Boussinesq Poisson problem.
///
/// `k` is real so that the same stepper runs in rescaled time (integer `k`)
/// or in physical time on a torus of length `2πM` (`k/M`).
#[derive(Debug, Clone)]
pub struct LinearStepper {
    pub k: f64,
    pub model: Model,
    pub suppress_coupling: bool,
    poisson: PoissonSolver,
    u: Vec<f64>,
    u2: Vec<f64>,
    r1: Vec<f64>,
    scratch_phi: Vec<Complex64>,
}

impl LinearStepper {
    pub fn new(eq: &StratifiedEquilibrium, grid: &Grid1D, k: f64, kappa: f64, model: Model) -> Self {
        let kappa = match model {
            Model::Hydrostatic => 0.0,
            Model::Boussinesq => kappa,
        };
        Self {
            k,
            model,
            suppress_coupling: false,
            poisson: PoissonSolver::new(grid, kappa),
            u: grid.nodes.iter().map(|&z| eq.shear.eval(z)).collect(),
            u2: grid.nodes.iter().map(|&z| eq.shear.d2(z)).collect(),
            r1: grid.nodes.iter().map(|&z| eq.strat.d1(z)).collect(),
            scratch_phi: vec![Complex64::new(0.0, 0.0); grid.n],
        }
    }

    /// Drops the `ρ_s'φ̂` and `U_s''φ̂` terms, leaving pure transport plus the `ikρ̂` coupling.
    pub fn without_coupling(mut self) -> Self {
        self.suppress_coupling = true;
        self
    }

    pub fn rhs(
        &mut self,
        rho: &[Complex64],
        omega: &[Complex64],
        d_rho: &mut [Complex64],
        d_omega: &mut [Complex64],
    ) {
        let ik = I * self.k;
        if !self.suppress_coupling {
            self.poisson.solve_into(omega, &mut self.scratch_phi);
        }
        for i in 0..rho.len() {
            let adv = -ik * self.u[i];
            d_rho[i] = adv * rho[i];
            d_omega[i] = adv * omega[i] + ik * rho[i];
            if !self.suppress_coupling {
                let phi = self.scratch_phi[i];
                d_rho[i] += ik * self.r1[i] * phi;
                d_omega[i] += ik * self.u2[i] * phi;
            }
        }
    }

    pub fn step(&mut self, state: &mut ModeState, dt: f64) {
        let n = state.rho_hat.len();
        let zero = Complex64::new(0.0, 0.0);
        let mut kr = [vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]];
        let mut kw = [vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]];
        let mut tr = vec![zero; n];
        let mut tw = vec![zero; n];
        let (r0, w0) = (&state.rho_hat, &state.omega_hat);
        for stage in 0..4 {
            let frac = match stage {
                0 => 0.0,
                3 => 1.0,
                _ => 0.5,
            };
            if stage == 0 {
                tr.copy_from_slice(r0);
                tw.copy_from_slice(w0);
            } else {
                for i in 0..n {
                    tr[i] = r0[i] + kr[stage - 1][i] * (frac * dt);
                    tw[i] = w0[i] + kw[stage - 1][i] * (frac * dt);
                }
            }
            let (a, b) = (&mut kr[stage], &mut kw[stage]);
            self.rhs(&tr, &tw, a, b);
        }
        let s = dt / 6.0;
        for i in 0..n {
            state.rho_hat[i] += (kr[0][i] + (kr[1][i] + kr[2][i]) * 2.0 + kr[3][i]) * s;
            state.omega_hat[i] += (kw[0][i] + (kw[1][i] + kw[2][i]) * 2.0 + kw[3][i]) * s;
        }
        state.t += dt;
    }

    pub fn advance(&mut self, state: &mut ModeState, dt: f64, steps: usize) {
        for _ in 0..steps {
            self.step(state, dt);
        }
    }
}

/// One RK4 step of the linearized system at the state's own integer wavenumber.
pub fn step_linear(
    state: &ModeState,
    eq: &StratifiedEquilibrium,
    grid: &Grid1D,
    dt: f64,
    model: Model,
) -> ModeState {
    let mut stepper = LinearStepper::new(eq, grid, state.k as f64, state.kappa, model);
    let mut next = state.clone();
    stepper.step(&mut next, dt);
    next
}

/// Norm history of a linear run from seeded random data, fitted over the second half.
pub fn linear_growth(
    stepper: &mut LinearStepper,
    grid: &Grid1D,
    dt: f64,
    t_final: f64,
    seed: u64,
) -> GrowthSeries {
    let steps = (t_final / dt).round() as usize;
    let mut state = ModeState::random(stepper.k.round() as i64, 0.0, grid, seed);
    let mut series = GrowthSeries::new(vec![0.0], vec![1.0]);
    for i in 1..=steps {
        stepper.step(&mut state, dt);
        series.push(i as f64 * dt, state.norm(grid));
    }
    series.fit_window(0.5 * t_final, t_final);
    series
}
