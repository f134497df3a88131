use serde::Serialize;

use super::grid::Grid1D;
use super::growth::GrowthSeries;
use super::nonlinear::{Field2D, NonlinearSolver};
use crate::error::{Result, StabilityError};
use crate::modes::GrowingMode;
use crate::profiles::StratifiedEquilibrium;

/// Step budget of a run, in units of `|log δ|/Λ`.
pub const BUDGET_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct InstabilitySetup {
    pub nx: usize,
    pub m_scale: f64,
    pub dt: f64,
    pub threshold: f64,
    /// Growth rate `Λ` in physical time, from the power iteration.
    pub lambda: f64,
}

/// Outcome of one nonlinear run; `failure` is set when the run stopped early.
#[derive(Debug, Clone, Serialize)]
pub struct InstabilityRun {
    pub delta: f64,
    pub crossing: Option<f64>,
    pub series: GrowthSeries,
    #[serde(skip)]
    pub failure: Option<StabilityError>,
}

/// `(ρ_s, U_s') + δ Re(e^{ikx/M}(r, w))`, scaled so the deviation norm is `δ`.
pub fn perturbed_equilibrium(
    eq: &StratifiedEquilibrium,
    mode: &GrowingMode,
    delta: f64,
    grid: &Grid1D,
    nx: usize,
    m_scale: f64,
) -> Field2D {
    let mut unit = Field2D::zeros(nx, grid.n, m_scale);
    unit.add_mode(mode.k, &mode.r, &mode.w, 1.0);
    let norm = unit.l2(grid.h);
    let mut f = Field2D::equilibrium(eq, nx, grid, m_scale);
    f.add_mode(mode.k, &mode.r, &mode.w, delta / norm);
    f
}

/// Evolves the perturbed equilibrium until the deviation reaches the threshold
/// or the budget `10 |log δ| / Λ` runs out.
pub fn instability_run(
    delta: f64,
    mode: &GrowingMode,
    eq: &StratifiedEquilibrium,
    grid: &Grid1D,
    setup: &InstabilitySetup,
) -> InstabilityRun {
    let solver = NonlinearSolver::new(setup.nx, grid.clone(), setup.m_scale);
    let base = Field2D::equilibrium(eq, setup.nx, grid, setup.m_scale);
    let mut f = perturbed_equilibrium(eq, mode, delta, grid, setup.nx, setup.m_scale);
    let mut series = GrowthSeries::new(vec![0.0], vec![f.distance(&base, grid.h)]);
    let budget = BUDGET_FACTOR * delta.ln().abs() / setup.lambda;
    let steps = (budget / setup.dt).ceil() as usize;
    let mut failure = None;
    if series.norms[0] < setup.threshold {
        for s in 1..=steps {
            if let Err(e) = solver.step(&mut f, setup.dt) {
                failure = Some(e);
                break;
            }
            let d = f.distance(&base, grid.h);
            series.push(s as f64 * setup.dt, d);
            if d >= setup.threshold {
                break;
            }
        }
    }
    let crossing = series.first_crossing(setup.threshold);
    if crossing.is_none() && failure.is_none() {
        failure = Some(StabilityError::NoBlowupWithinBudget {
            threshold: setup.threshold,
            t_final: *series.times.last().unwrap(),
        });
    }
    // linear phase: from the initial size up to a tenth of the threshold
    series.fit_norm_band(delta, 0.1 * setup.threshold);
    InstabilityRun {
        delta,
        crossing,
        series,
        failure,
    }
}

/// First time the deviation norm reaches `setup.threshold`, with the norm history.
pub fn instability_time(
    delta: f64,
    mode: &GrowingMode,
    eq: &StratifiedEquilibrium,
    grid: &Grid1D,
    setup: &InstabilitySetup,
) -> Result<(f64, GrowthSeries)> {
    let run = instability_run(delta, mode, eq, grid, setup);
    match (run.crossing, run.failure) {
        (Some(t), _) => Ok((t, run.series)),
        (None, Some(e)) => Err(e),
        (None, None) => unreachable!("a run without a crossing records its failure"),
    }
}
