//! Dispersion functions of the hydrostatic and long-wave Taylor–Goldstein problems.
//!
//! With `φ = (U_s - c)^α ψ` the Taylor–Goldstein equation for a Friedlander
//! equilibrium becomes the Volterra fixed point
//! `ψ = D_α(c) + (1-α) S[ψ] + κ² S̃[ψ]`, solved here by its Neumann series on
//! a composite Gauss–Legendre grid. Zeros of `ψ(1)` in `Im c > 0` are the
//! unstable phase speeds. [`Shooter`] integrates the ODE directly and serves
//! as an independent oracle.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, StabilityError};
use crate::profiles::{linspace, ShearProfile, StratifiedEquilibrium};
use crate::quadrature::{AdaptiveQuadrature, PanelGrid};

pub const DEFAULT_PANELS: usize = 64;
pub const PANEL_ORDER: usize = 16;
pub const DEFAULT_SHOOTING_STEPS: usize = 4096;
pub const DEFAULT_MAX_TERMS: usize = 200;

/// Consecutive non-decreasing terms after which the series is declared divergent.
const NONCONTRACTIVE_STREAK: usize = 3;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// A candidate phase speed `c` at transverse wavenumber `kappa` (`0` is hydrostatic).
#[derive(Debug, Clone, Copy)]
pub struct DispersionQuery<'a> {
    pub c: Complex64,
    pub alpha: Option<f64>,
    pub kappa: f64,
    pub equilibrium: &'a StratifiedEquilibrium,
}

impl<'a> DispersionQuery<'a> {
    /// `alpha` is taken from the equilibrium; it is `None` unless the
    /// equilibrium came from the Friedlander constructor.
    pub fn new(equilibrium: &'a StratifiedEquilibrium, c: Complex64, kappa: f64) -> Self {
        Self {
            c,
            alpha: equilibrium.alpha,
            kappa,
            equilibrium,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn alpha(&self) -> Result<f64> {
        self.alpha.ok_or(StabilityError::NotFriedlander)
    }

    fn check_branch(&self) -> Result<()> {
        check_upper(self.c)
    }
}

fn check_upper(c: Complex64) -> Result<()> {
    if c.im > 0.0 && c.re.is_finite() && c.im.is_finite() {
        Ok(())
    } else {
        Err(StabilityError::BranchViolation(c.im))
    }
}

/// Complex samples on a [`PanelGrid`] plus the two endpoint values.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<PanelGrid>,
    pub left: Complex64,
    pub values: Vec<Complex64>,
    pub right: Complex64,
}

impl GridFunction {
    pub fn zeros(grid: Arc<PanelGrid>) -> Self {
        let n = grid.len();
        Self {
            grid,
            left: ZERO,
            values: vec![ZERO; n],
            right: ZERO,
        }
    }

    pub fn from_fn(grid: Arc<PanelGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes.iter().map(|&z| f(z)).collect();
        Self {
            left: f(-1.0),
            right: f(1.0),
            values,
            grid,
        }
    }

    pub fn grid(&self) -> &Arc<PanelGrid> {
        &self.grid
    }

    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.norm())
            .fold(self.left.norm().max(self.right.norm()), f64::max)
    }

    /// Value at any `z ∈ [-1, 1]`; endpoints are returned exactly.
    pub fn at(&self, z: f64) -> Complex64 {
        if z <= -1.0 {
            self.left
        } else if z >= 1.0 {
            self.right
        } else {
            self.grid.interpolate(&self.values, z)
        }
    }

    fn axpy(&mut self, a: f64, other: &GridFunction) {
        self.left += other.left * a;
        self.right += other.right * a;
        for (s, o) in self.values.iter_mut().zip(&other.values) {
            *s += o * a;
        }
    }

    fn max_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(
                (self.left - other.left)
                    .norm()
                    .max((self.right - other.right).norm()),
                f64::max,
            )
    }
}

#[derive(Debug, Clone)]
pub struct NeumannSolution {
    pub psi: GridFunction,
    pub terms_used: usize,
    pub fixed_point_residual: f64,
    pub contraction_estimate: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DispersionValue {
    pub value: Complex64,
    pub estimated_error: f64,
}

/// Weights `(U_s - c)^{-2α}`, `(U_s - c)^{2α-1} U_s''`, `(U_s - c)^{2α}` at every node.
struct Kernels {
    minus: Vec<Complex64>,
    inner_s: Vec<Complex64>,
    plus: Vec<Complex64>,
}

/// Panel discretization of the integral operators for one equilibrium.
///
/// Tabulates `U_s` and `U_s''` once; every query afterwards only evaluates
/// complex powers.
#[derive(Clone)]
pub struct Dispersion {
    eq: StratifiedEquilibrium,
    grid: Arc<PanelGrid>,
    u: Vec<f64>,
    u2: Vec<f64>,
}

impl Dispersion {
    pub fn new(eq: &StratifiedEquilibrium, panels: usize) -> Self {
        let grid = Arc::new(PanelGrid::new(panels, PANEL_ORDER));
        let u = grid.nodes.iter().map(|&z| eq.shear.eval(z)).collect();
        let u2 = grid.nodes.iter().map(|&z| eq.shear.d2(z)).collect();
        Self {
            eq: eq.clone(),
            grid,
            u,
            u2,
        }
    }

    pub fn with_default_panels(eq: &StratifiedEquilibrium) -> Self {
        Self::new(eq, DEFAULT_PANELS)
    }

    pub fn grid(&self) -> &Arc<PanelGrid> {
        &self.grid
    }

    pub fn equilibrium(&self) -> &StratifiedEquilibrium {
        &self.eq
    }

    fn kernels(&self, c: Complex64, alpha: f64) -> Kernels {
        let n = self.u.len();
        let mut minus = Vec::with_capacity(n);
        let mut inner_s = Vec::with_capacity(n);
        let mut plus = Vec::with_capacity(n);
        for (&u, &u2) in self.u.iter().zip(&self.u2) {
            let w = Complex64::new(u, 0.0) - c;
            let p = (w.ln() * (2.0 * alpha)).exp();
            minus.push(p.inv());
            inner_s.push(p / w * u2);
            plus.push(p);
        }
        Kernels {
            minus,
            inner_s,
            plus,
        }
    }

    /// `D_α^z(c)` on the grid.
    fn d_grid(&self, k: &Kernels) -> GridFunction {
        let mut out = GridFunction::zeros(self.grid.clone());
        out.right = self.grid.cumulative(&k.minus, &mut out.values);
        out
    }

    /// `∫_{-1}^z (U_s - c)^{-2α} ∫_{-1}^r weight · f`.
    fn nested(&self, k: &Kernels, weight: &[Complex64], f: &GridFunction) -> GridFunction {
        let n = self.grid.len();
        let prod: Vec<Complex64> = weight.iter().zip(&f.values).map(|(w, v)| w * v).collect();
        let mut inner = vec![ZERO; n];
        self.grid.cumulative(&prod, &mut inner);
        for (v, m) in inner.iter_mut().zip(&k.minus) {
            *v *= m;
        }
        let mut out = GridFunction::zeros(self.grid.clone());
        out.right = self.grid.cumulative(&inner, &mut out.values);
        out
    }

    fn combined(&self, k: &Kernels, alpha: f64, kappa: f64, f: &GridFunction) -> GridFunction {
        let mut out = GridFunction::zeros(self.grid.clone());
        if alpha != 1.0 {
            out.axpy(1.0 - alpha, &self.nested(k, &k.inner_s, f));
        }
        if kappa != 0.0 {
            out.axpy(kappa * kappa, &self.nested(k, &k.plus, f));
        }
        out
    }

    pub fn apply_s(&self, f: &GridFunction, c: Complex64, alpha: f64) -> Result<GridFunction> {
        check_upper(c)?;
        let k = self.kernels(c, alpha);
        Ok(self.nested(&k, &k.inner_s, f))
    }

    pub fn apply_s_tilde(&self, f: &GridFunction, c: Complex64, alpha: f64) -> Result<GridFunction> {
        check_upper(c)?;
        let k = self.kernels(c, alpha);
        Ok(self.nested(&k, &k.plus, f))
    }

    pub fn d_alpha(&self, c: Complex64, alpha: f64) -> Result<GridFunction> {
        check_upper(c)?;
        Ok(self.d_grid(&self.kernels(c, alpha)))
    }

    /// Sums `Σ_n T^n[D]` with `T = (1-α)S + κ²S̃`.
    ///
    /// Stops once the latest term is below `tol · (1 - ratio)`; the fixed-point
    /// residual of the sum is then checked against `tol`.
    pub fn solve_neumann(
        &self,
        c: Complex64,
        kappa: f64,
        tol: f64,
        max_terms: usize,
    ) -> Result<NeumannSolution> {
        check_upper(c)?;
        let alpha = self.eq.friedlander_alpha()?;
        if !(tol > 0.0) || max_terms == 0 {
            return Err(StabilityError::InvalidArgument(
                "solve_neumann needs tol > 0 and max_terms >= 1".into(),
            ));
        }
        let k = self.kernels(c, alpha);
        let d = self.d_grid(&k);
        let mut psi = d.clone();
        let mut term = d.clone();
        let mut prev = term.sup_norm();
        let mut ratio = 0.0;
        let mut streak = 0;
        let mut terms_used = 1;
        let mut converged = prev == 0.0;
        while !converged && terms_used < max_terms {
            let next = self.combined(&k, alpha, kappa, &term);
            let norm = next.sup_norm();
            if norm == 0.0 {
                converged = true;
                break;
            }
            psi.axpy(1.0, &next);
            terms_used += 1;
            ratio = norm / prev;
            if !ratio.is_finite() {
                return Err(StabilityError::NonContractive {
                    ratio,
                    term: terms_used,
                });
            }
            if ratio >= 1.0 {
                streak += 1;
                if streak >= NONCONTRACTIVE_STREAK {
                    return Err(StabilityError::NonContractive {
                        ratio,
                        term: terms_used,
                    });
                }
            } else {
                streak = 0;
                if norm < tol * (1.0 - ratio) {
                    converged = true;
                }
            }
            prev = norm;
            term = next;
        }
        if !converged {
            return Err(StabilityError::ToleranceNotReached {
                what: "Neumann series",
                iterations: terms_used,
                last: prev,
            });
        }
        let mut rebuilt = d;
        rebuilt.axpy(1.0, &self.combined(&k, alpha, kappa, &psi));
        let residual = psi.max_diff(&rebuilt);
        // one quadrature sum of rounding per node
        let floor = self.grid.len() as f64 * f64::EPSILON * psi.sup_norm();
        if !(residual <= tol.max(floor)) {
            return Err(StabilityError::ToleranceNotReached {
                what: "fixed-point residual",
                iterations: terms_used,
                last: residual,
            });
        }
        Ok(NeumannSolution {
            psi,
            terms_used,
            fixed_point_residual: residual,
            contraction_estimate: ratio,
        })
    }

    /// `ψ(1)` at this resolution.
    pub fn value(&self, c: Complex64, kappa: f64, tol: f64) -> Result<Complex64> {
        Ok(self
            .solve_neumann(c, kappa, tol, DEFAULT_MAX_TERMS)?
            .psi
            .right)
    }
}

/// Adaptive quadrature of `∫_{-1}^z (U_s(r) - c)^{-p} dr` on the principal branch.
///
/// No half-plane check: callers that need one go through [`d_alpha`].
pub fn integrate_power(shear: &ShearProfile, c: Complex64, p: f64, z: f64) -> Complex64 {
    let q = AdaptiveQuadrature::default();
    if p == 2.0 {
        return q
            .integrate(
                |r| {
                    let w = Complex64::new(shear.eval(r), 0.0) - c;
                    (w * w).inv()
                },
                -1.0,
                z,
            )
            .0;
    }
    q.integrate(
        |r| (-(Complex64::new(shear.eval(r), 0.0) - c).ln() * p).exp(),
        -1.0,
        z,
    )
    .0
}

/// `D_α^z(c) = ∫_{-1}^z (U_s - c)^{-2α}`.
pub fn d_alpha(q: &DispersionQuery, z: f64) -> Result<Complex64> {
    q.check_branch()?;
    let alpha = q.alpha()?;
    if !(-1.0..=1.0).contains(&z) {
        return Err(StabilityError::InvalidArgument(format!(
            "z = {z} is outside [-1, 1]"
        )));
    }
    Ok(integrate_power(&q.equilibrium.shear, q.c, 2.0 * alpha, z))
}

/// `S_{α,c}[f]` at the default resolution.
pub fn apply_s(f: &GridFunction, q: &DispersionQuery) -> Result<GridFunction> {
    let d = dispersion_for_grid(q.equilibrium, f.grid());
    d.apply_s(f, q.c, q.alpha()?)
}

/// Composed long-wave operator `∫(U_s - c)^{-2α} ∫(U_s - c)^{2α} f`.
pub fn apply_s_tilde(f: &GridFunction, q: &DispersionQuery) -> Result<GridFunction> {
    let d = dispersion_for_grid(q.equilibrium, f.grid());
    d.apply_s_tilde(f, q.c, q.alpha()?)
}

fn dispersion_for_grid(eq: &StratifiedEquilibrium, grid: &Arc<PanelGrid>) -> Dispersion {
    let mut d = Dispersion::new(eq, grid.panels);
    d.grid = grid.clone();
    d
}

pub fn solve_neumann(q: &DispersionQuery, tol: f64, max_terms: usize) -> Result<NeumannSolution> {
    q.check_branch()?;
    let eq = with_query_alpha(q)?;
    Dispersion::with_default_panels(&eq).solve_neumann(q.c, q.kappa, tol, max_terms)
}

/// `ψ(1)` with an error estimate from a doubled-panel evaluation.
pub fn dispersion_value(q: &DispersionQuery, tol: f64) -> Result<DispersionValue> {
    q.check_branch()?;
    let eq = with_query_alpha(q)?;
    let coarse = Dispersion::new(&eq, DEFAULT_PANELS).value(q.c, q.kappa, tol)?;
    let fine = Dispersion::new(&eq, 2 * DEFAULT_PANELS).value(q.c, q.kappa, tol)?;
    Ok(DispersionValue {
        value: coarse,
        estimated_error: (coarse - fine).norm() + f64::EPSILON * coarse.norm(),
    })
}

fn with_query_alpha(q: &DispersionQuery) -> Result<StratifiedEquilibrium> {
    let alpha = q.alpha()?;
    let mut eq = q.equilibrium.clone();
    eq.alpha = Some(alpha);
    Ok(eq)
}

/// Fixed-step RK4 integrator of
/// `φ'' = κ²φ + [U_s''/(U_s - c) + ρ_s'/(U_s - c)²] φ`, `φ(-1) = 0`, `φ'(-1) = 1`.
#[derive(Clone)]
pub struct Shooter {
    steps: usize,
    /// `(U_s, U_s'', ρ_s')` at the `2·steps + 1` half-step points.
    table: Vec<(f64, f64, f64)>,
}

/// Shooting trajectory at the step points `z_j = -1 + j·h`.
#[derive(Debug, Clone)]
pub struct ShootingTrajectory {
    pub z: Vec<f64>,
    pub phi: Vec<Complex64>,
    pub dphi: Vec<Complex64>,
}

impl Shooter {
    pub fn new(eq: &StratifiedEquilibrium, steps: usize) -> Self {
        assert!(steps >= 1);
        let h = 2.0 / steps as f64;
        let table = (0..=2 * steps)
            .map(|j| {
                let z = -1.0 + 0.5 * h * j as f64;
                (eq.shear.eval(z), eq.shear.d2(z), eq.strat.d1(z))
            })
            .collect();
        Self { steps, table }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    #[inline]
    fn coeff(&self, j: usize, c: Complex64, k2: f64) -> Complex64 {
        let (u, u2, r1) = self.table[j];
        let inv = (Complex64::new(u, 0.0) - c).inv();
        inv * (u2 + r1 * inv) + k2
    }

    fn run(&self, c: Complex64, kappa: f64, mut record: impl FnMut(usize, Complex64, Complex64)) {
        let h = 2.0 / self.steps as f64;
        let k2 = kappa * kappa;
        let (mut y, mut dy) = (ZERO, Complex64::new(1.0, 0.0));
        record(0, y, dy);
        for s in 0..self.steps {
            let a0 = self.coeff(2 * s, c, k2);
            let am = self.coeff(2 * s + 1, c, k2);
            let a1 = self.coeff(2 * s + 2, c, k2);
            let k1y = dy;
            let k1d = a0 * y;
            let k2y = dy + k1d * (0.5 * h);
            let k2d = am * (y + k1y * (0.5 * h));
            let k3y = dy + k2d * (0.5 * h);
            let k3d = am * (y + k2y * (0.5 * h));
            let k4y = dy + k3d * h;
            let k4d = a1 * (y + k3y * h);
            y += (k1y + (k2y + k3y) * 2.0 + k4y) * (h / 6.0);
            dy += (k1d + (k2d + k3d) * 2.0 + k4d) * (h / 6.0);
            record(s + 1, y, dy);
        }
    }

    /// `φ(1)`.
    pub fn value(&self, c: Complex64, kappa: f64) -> Complex64 {
        let mut end = ZERO;
        self.run(c, kappa, |_, y, _| end = y);
        end
    }

    pub fn trajectory(&self, c: Complex64, kappa: f64) -> ShootingTrajectory {
        let h = 2.0 / self.steps as f64;
        let mut out = ShootingTrajectory {
            z: Vec::with_capacity(self.steps + 1),
            phi: Vec::with_capacity(self.steps + 1),
            dphi: Vec::with_capacity(self.steps + 1),
        };
        self.run(c, kappa, |j, y, dy| {
            out.z.push(-1.0 + h * j as f64);
            out.phi.push(y);
            out.dphi.push(dy);
        });
        out
    }
}

/// `φ(1)` from the shooting oracle with the default step count.
pub fn shoot_tg(q: &DispersionQuery) -> Result<Complex64> {
    shoot_tg_steps(q, DEFAULT_SHOOTING_STEPS)
}

pub fn shoot_tg_steps(q: &DispersionQuery, steps: usize) -> Result<Complex64> {
    q.check_branch()?;
    Ok(Shooter::new(q.equilibrium, steps).value(q.c, q.kappa))
}

/// `(1 + 4‖U_s‖²_∞/Im(c)²)^α · ‖U_s''/U_s'‖_{W^{1,∞}}`, the operator bound with unit constant.
pub fn operator_norm_bound(q: &DispersionQuery) -> Result<f64> {
    q.check_branch()?;
    let shear = &q.equilibrium.shear;
    shear.check_strictly_monotone()?;
    let alpha = q.alpha.unwrap_or(1.0);
    let (mut sup_g, mut sup_dg) = (0.0f64, 0.0f64);
    for z in linspace(-1.0, 1.0, 2001) {
        let (d1, d2, d3) = (shear.d1(z), shear.d2(z), shear.d3(z));
        sup_g = sup_g.max((d2 / d1).abs());
        sup_dg = sup_dg.max(((d3 * d1 - d2 * d2) / (d1 * d1)).abs());
    }
    let s = shear.sup_norm();
    let prefactor = (1.0 + 4.0 * s * s / (q.c.im * q.c.im)).powf(alpha);
    Ok(prefactor * (sup_g + sup_dg))
}
