//! Shear and stratification equilibria of a channel flow on `z ∈ [-1, 1]`.
//!
//! Profiles are evaluation maps, not tables, so every derivative of the
//! `tanh` family is exact. The Friedlander constructor couples the density
//! gradient to the shear through `-ρ_s' = α(1-α) U_s'²`, which pins the
//! Richardson number to the constant `α(1-α)`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Result, StabilityError};

/// Real map `z -> f(z)` shared between profiles.
pub type RealMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Number of sample points used for monotonicity and sup-norm scans.
pub const PROFILE_SCAN_POINTS: usize = 1001;

/// Nodes of the Simpson accumulation used for custom-shear densities.
pub const SIMPSON_NODES: usize = 4097;

/// Richardson number at which Miles–Howard stability starts (inclusive).
pub const MILES_HOWARD_THRESHOLD: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ShearKind {
    Tanh { beta: f64 },
    Couette,
    Custom { name: String },
}

/// Horizontal velocity `U_s(z)` and its first three derivatives.
#[derive(Clone)]
pub struct ShearProfile {
    kind: ShearKind,
    u: RealMap,
    d1: RealMap,
    d2: RealMap,
    d3: RealMap,
    sup_norm: f64,
}

impl fmt::Debug for ShearProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ShearProfile")
            .field("kind", &self.kind)
            .field("sup_norm", &self.sup_norm)
            .finish()
    }
}

impl ShearProfile {
    /// `U_s(z) = tanh(βz)`.
    pub fn tanh(beta: f64) -> Self {
        assert!(beta > 0.0 && beta.is_finite(), "tanh shear needs beta > 0");
        Self {
            kind: ShearKind::Tanh { beta },
            u: Arc::new(move |z| (beta * z).tanh()),
            d1: Arc::new(move |z| {
                let t = (beta * z).tanh();
                beta * (1.0 - t * t)
            }),
            d2: Arc::new(move |z| {
                let t = (beta * z).tanh();
                -2.0 * beta * beta * t * (1.0 - t * t)
            }),
            d3: Arc::new(move |z| {
                let t = (beta * z).tanh();
                let s = 1.0 - t * t;
                -2.0 * beta.powi(3) * s * (1.0 - 3.0 * t * t)
            }),
            sup_norm: beta.tanh(),
        }
    }

    /// Plane Couette flow `U_s(z) = z`.
    pub fn couette() -> Self {
        Self {
            kind: ShearKind::Couette,
            u: Arc::new(|z| z),
            d1: Arc::new(|_| 1.0),
            d2: Arc::new(|_| 0.0),
            d3: Arc::new(|_| 0.0),
            sup_norm: 1.0,
        }
    }

    /// A user supplied shear. The sup-norm is taken over a uniform scan of `[-1, 1]`.
    pub fn custom(
        name: impl Into<String>,
        u: RealMap,
        d1: RealMap,
        d2: RealMap,
        d3: RealMap,
    ) -> Self {
        let sup_norm = scan_grid(PROFILE_SCAN_POINTS)
            .map(|z| u(z).abs())
            .fold(0.0, f64::max);
        Self {
            kind: ShearKind::Custom { name: name.into() },
            u,
            d1,
            d2,
            d3,
            sup_norm,
        }
    }

    pub fn kind(&self) -> &ShearKind {
        &self.kind
    }

    #[inline]
    pub fn eval(&self, z: f64) -> f64 {
        (self.u)(z)
    }

    #[inline]
    pub fn d1(&self, z: f64) -> f64 {
        (self.d1)(z)
    }

    #[inline]
    pub fn d2(&self, z: f64) -> f64 {
        (self.d2)(z)
    }

    #[inline]
    pub fn d3(&self, z: f64) -> f64 {
        (self.d3)(z)
    }

    /// `‖U_s‖_∞` over `[-1, 1]`.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// `(min U_s, max U_s)` over a uniform scan, endpoints included.
    pub fn range(&self) -> (f64, f64) {
        scan_grid(PROFILE_SCAN_POINTS)
            .map(|z| self.eval(z))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), u| {
                (lo.min(u), hi.max(u))
            })
    }

    /// Fails with `NonMonotoneShear` unless `U_s'` keeps one strict sign on the scan grid.
    pub fn check_strictly_monotone(&self) -> Result<()> {
        let first = self.d1(-1.0);
        if first == 0.0 || !first.is_finite() {
            return Err(StabilityError::NonMonotoneShear(-1.0));
        }
        for z in scan_grid(PROFILE_SCAN_POINTS) {
            let d = self.d1(z);
            if !(d * first > 0.0) {
                return Err(StabilityError::NonMonotoneShear(z));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StratificationKind {
    /// Closed-form Friedlander density of the `tanh` shear.
    FriedlanderTanh { beta: f64, alpha: f64 },
    /// Friedlander density obtained by Simpson accumulation.
    FriedlanderNumeric { alpha: f64 },
    /// `ρ_s(z) = gradient · z`.
    Linear { gradient: f64 },
    Custom { name: String },
}

/// Background density `ρ_s(z)` with two derivatives.
#[derive(Clone)]
pub struct Stratification {
    kind: StratificationKind,
    eval: RealMap,
    d1: RealMap,
    d2: RealMap,
}

impl fmt::Debug for Stratification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Stratification")
            .field("kind", &self.kind)
            .finish()
    }
}

impl Stratification {
    /// Constant density.
    pub fn homogeneous() -> Self {
        Self::linear(0.0)
    }

    pub fn linear(gradient: f64) -> Self {
        Self {
            kind: StratificationKind::Linear { gradient },
            eval: Arc::new(move |z| gradient * z),
            d1: Arc::new(move |_| gradient),
            d2: Arc::new(|_| 0.0),
        }
    }

    pub fn custom(name: impl Into<String>, eval: RealMap, d1: RealMap, d2: RealMap) -> Self {
        Self {
            kind: StratificationKind::Custom { name: name.into() },
            eval,
            d1,
            d2,
        }
    }

    pub fn kind(&self) -> &StratificationKind {
        &self.kind
    }

    #[inline]
    pub fn eval(&self, z: f64) -> f64 {
        (self.eval)(z)
    }

    #[inline]
    pub fn d1(&self, z: f64) -> f64 {
        (self.d1)(z)
    }

    #[inline]
    pub fn d2(&self, z: f64) -> f64 {
        (self.d2)(z)
    }

    /// Stable stratification: `ρ_s' < 0` on the scan grid.
    pub fn is_stable(&self) -> bool {
        scan_grid(PROFILE_SCAN_POINTS).all(|z| self.d1(z) < 0.0)
    }
}

/// A steady state `(ρ_s(z), U_s(z), 0)`.
///
/// `alpha` is present only when the density was built by [`build_friedlander`];
/// the Neumann dispersion machinery requires it.
#[derive(Debug, Clone)]
pub struct StratifiedEquilibrium {
    pub shear: ShearProfile,
    pub strat: Stratification,
    pub alpha: Option<f64>,
}

impl StratifiedEquilibrium {
    /// An arbitrary pairing of shear and density, with no Friedlander structure.
    pub fn new(shear: ShearProfile, strat: Stratification) -> Self {
        Self {
            shear,
            strat,
            alpha: None,
        }
    }

    /// The Friedlander parameter, or `NotFriedlander`.
    pub fn friedlander_alpha(&self) -> Result<f64> {
        self.alpha.ok_or(StabilityError::NotFriedlander)
    }

    /// Relative defect `max |ρ_s' + α(1-α)U_s'²| / max(1, α(1-α)‖U_s'‖²)` on `n` points.
    pub fn friedlander_residual(&self, n: usize) -> Result<f64> {
        let alpha = self.friedlander_alpha()?;
        let a = alpha * (1.0 - alpha);
        let mut worst: f64 = 0.0;
        let mut sup_d1: f64 = 0.0;
        for z in linspace(-1.0, 1.0, n) {
            let d1 = self.shear.d1(z);
            sup_d1 = sup_d1.max(d1.abs());
            worst = worst.max((self.strat.d1(z) + a * d1 * d1).abs());
        }
        Ok(worst / f64::max(1.0, a * sup_d1 * sup_d1))
    }
}

/// Richardson-number scan of an equilibrium.
#[derive(Debug, Clone, Serialize)]
pub struct RichardsonReport {
    pub min_ri: f64,
    pub argmin_z: f64,
    pub miles_howard_satisfied: bool,
    pub samples: Vec<(f64, f64)>,
}

/// Couples a density to `shear` so that `-ρ_s' = α(1-α)U_s'²`.
///
/// The `tanh` family uses the closed-form antiderivative; every other shear
/// gets a Simpson-accumulated density normalized to `ρ_s(0) = 0`.
pub fn build_friedlander(shear: ShearProfile, alpha: f64) -> Result<StratifiedEquilibrium> {
    if !(alpha > 0.5 && alpha <= 1.0) {
        return Err(StabilityError::AlphaOutOfRange(alpha));
    }
    friedlander_profile(shear, alpha)
}

/// Same density for `α ∈ [1/2, 1]`, including the marginal `α = 1/2` where
/// `Ri ≡ 1/4`. The result only carries `alpha` when `α > 1/2`.
pub fn friedlander_profile(shear: ShearProfile, alpha: f64) -> Result<StratifiedEquilibrium> {
    if !(0.5..=1.0).contains(&alpha) {
        return Err(StabilityError::AlphaOutOfRange(alpha));
    }
    shear.check_strictly_monotone()?;
    let a = alpha * (1.0 - alpha);
    let strat = match *shear.kind() {
        ShearKind::Tanh { beta } => Stratification {
            kind: StratificationKind::FriedlanderTanh { beta, alpha },
            eval: Arc::new(move |z| {
                let t = (beta * z).tanh();
                a * (-beta * t + beta / 3.0 * t * t * t)
            }),
            d1: Arc::new(move |z| {
                let t = (beta * z).tanh();
                let s = 1.0 - t * t;
                -a * beta * beta * s * s
            }),
            d2: Arc::new(move |z| {
                let t = (beta * z).tanh();
                let s = 1.0 - t * t;
                4.0 * a * beta.powi(3) * t * s * s
            }),
        },
        _ => numeric_friedlander_density(&shear, alpha),
    };
    Ok(StratifiedEquilibrium {
        shear,
        strat,
        alpha: (alpha > 0.5).then_some(alpha),
    })
}

/// Friedlander density by Simpson accumulation of `-α(1-α)U_s'²`, for any shear.
///
/// Values between the [`SIMPSON_NODES`] accumulation nodes are cubic Hermite
/// interpolants that use the exact derivative.
pub fn numeric_friedlander_density(shear: &ShearProfile, alpha: f64) -> Stratification {
    let a = alpha * (1.0 - alpha);
    let n = SIMPSON_NODES;
    let h = 2.0 / (n - 1) as f64;
    let zs: Vec<f64> = (0..n).map(|i| -1.0 + i as f64 * h).collect();
    let slope: Vec<f64> = zs
        .iter()
        .map(|&z| {
            let d = shear.d1(z);
            -a * d * d
        })
        .collect();

    // Simpson on every cell, with the cell midpoint as the middle node
    let mut acc = vec![0.0; n];
    for i in 0..n - 1 {
        let d = shear.d1(zs[i] + 0.5 * h);
        let mid = -a * d * d;
        acc[i + 1] = acc[i] + h * (slope[i] + 4.0 * mid + slope[i + 1]) / 6.0;
    }
    let shift = acc[(n - 1) / 2];
    for v in &mut acc {
        *v -= shift;
    }

    let table = Arc::new((acc, slope));
    let sh = shear.clone();
    let sh2 = shear.clone();
    let eval: RealMap = Arc::new(move |z: f64| {
        let (vals, ders) = &*table;
        let s = ((z + 1.0) / h).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        let t = s - i as f64;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * vals[i] + h10 * h * ders[i] + h01 * vals[i + 1] + h11 * h * ders[i + 1]
    });
    Stratification {
        kind: StratificationKind::FriedlanderNumeric { alpha },
        eval,
        d1: Arc::new(move |z| {
            let d = sh.d1(z);
            -a * d * d
        }),
        d2: Arc::new(move |z| -2.0 * a * sh2.d1(z) * sh2.d2(z)),
    }
}

/// Local Richardson number `-ρ_s'(z) / U_s'(z)²`.
pub fn richardson(eq: &StratifiedEquilibrium, z: f64) -> Result<f64> {
    let d1 = eq.shear.d1(z);
    let denom = d1 * d1;
    if !(denom > 1e-300) {
        return Err(StabilityError::DegenerateShear(z));
    }
    let ri = -eq.strat.d1(z) / denom;
    if !ri.is_finite() {
        return Err(StabilityError::DegenerateShear(z));
    }
    Ok(ri)
}

/// Scans `Ri` on `n_samples` uniform interior points of `[-1+h, 1-h]`.
///
/// The boundary value `Ri = 1/4` counts as satisfied; a relative slack of
/// `1e-12` absorbs the rounding in `-ρ_s'/U_s'²` when `α(1-α) = 1/4`.
pub fn miles_howard_check(eq: &StratifiedEquilibrium, n_samples: usize) -> Result<RichardsonReport> {
    if n_samples < 2 {
        return Err(StabilityError::InvalidArgument(
            "miles_howard_check needs at least 2 samples".into(),
        ));
    }
    let h = 2.0 / (n_samples + 1) as f64;
    let mut samples = Vec::with_capacity(n_samples);
    let (mut min_ri, mut argmin_z) = (f64::INFINITY, 0.0);
    for i in 1..=n_samples {
        let z = -1.0 + i as f64 * h;
        let ri = richardson(eq, z)?;
        if ri < min_ri {
            min_ri = ri;
            argmin_z = z;
        }
        samples.push((z, ri));
    }
    Ok(RichardsonReport {
        min_ri,
        argmin_z,
        miles_howard_satisfied: min_ri >= MILES_HOWARD_THRESHOLD * (1.0 - 1e-12),
        samples,
    })
}

fn scan_grid(n: usize) -> impl Iterator<Item = f64> {
    linspace(-1.0, 1.0, n)
}

pub(crate) fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = if n > 1 { (b - a) / (n - 1) as f64 } else { 0.0 };
    (0..n).map(move |i| a + i as f64 * step)
}
