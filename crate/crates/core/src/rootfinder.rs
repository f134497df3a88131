//! Zeros of holomorphic dispersion functions in the upper half-plane.
//!
//! Winding numbers are read off adaptively sampled contour images; cells of a
//! recursive quadrisection with nonzero winding are shrunk until small and
//! then polished by the secant method.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dispersion::{integrate_power, Dispersion, Shooter, DEFAULT_PANELS, DEFAULT_SHOOTING_STEPS};
use crate::error::{Result, StabilityError};
use crate::profiles::{miles_howard_check, ShearProfile, StratifiedEquilibrium};

/// Samples whose modulus falls below this fraction of the median count as a zero on the contour.
pub const ZERO_ON_CONTOUR_RATIO: f64 = 1e-13;
pub const DEFAULT_SAMPLE_BUDGET: usize = 1 << 16;
const MAX_LOG_MODULUS_STEP: f64 = 2.0;
pub const DEFAULT_EPS_FLOOR: f64 = 0.05;
pub const SHOOTING_EPS_FLOOR: f64 = 1e-3;
pub const NYQUIST_EPS: f64 = 1e-2;
pub const NYQUIST_EPS_CHECK: f64 = 5e-3;
/// Neumann series tolerance used inside zero searches.
pub const NEUMANN_SEARCH_TOL: f64 = 1e-13;
pub const BETA_SCAN: [f64; 5] = [1.0, 2.0, 3.0, 5.0, 8.0];

/// `F(c) = ∫_{-1}^1 (U_s - c)^{-2} dz`.
pub fn nyquist_f(c: Complex64, shear: &ShearProfile) -> Complex64 {
    integrate_power(shear, c, 2.0, 1.0)
}

/// A closed, positively oriented curve parametrized by `s ∈ [0, pieces)`.
pub trait Contour: Sync {
    fn pieces(&self) -> usize;
    fn point(&self, s: f64) -> Complex64;
    /// Initial uniform samples on piece `i`.
    fn initial_samples(&self, piece: usize) -> usize;
}

/// `∂Ω_{ε,R}`: the segment `[-R, R] + iε` followed by the upper arc `|c - iε| = R`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HalfDiskContour {
    pub eps: f64,
    pub radius: f64,
    pub n_base: usize,
    pub n_arc: usize,
}

impl HalfDiskContour {
    pub fn new(eps: f64, radius: f64) -> Self {
        Self {
            eps,
            radius,
            n_base: 256,
            n_arc: 64,
        }
    }
}

impl Contour for HalfDiskContour {
    fn pieces(&self) -> usize {
        2
    }

    fn point(&self, s: f64) -> Complex64 {
        let centre = Complex64::new(0.0, self.eps);
        if s < 1.0 {
            centre + Complex64::new(self.radius * (2.0 * s - 1.0), 0.0)
        } else {
            centre + Complex64::from_polar(self.radius, PI * (s - 1.0))
        }
    }

    fn initial_samples(&self, piece: usize) -> usize {
        if piece == 0 {
            self.n_base
        } else {
            self.n_arc
        }
    }
}

/// Axis-aligned rectangle `[lo.re, hi.re] × [lo.im, hi.im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rect {
    pub lo: Complex64,
    pub hi: Complex64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Self {
            lo: Complex64::new(re_min, im_min),
            hi: Complex64::new(re_max, im_max),
        }
    }

    pub fn diameter(&self) -> f64 {
        (self.hi - self.lo).norm()
    }

    pub fn centre(&self) -> Complex64 {
        (self.lo + self.hi) * 0.5
    }

    pub fn contains(&self, c: Complex64) -> bool {
        c.re >= self.lo.re && c.re <= self.hi.re && c.im >= self.lo.im && c.im <= self.hi.im
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            self.lo,
            Complex64::new(self.hi.re, self.lo.im),
            self.hi,
            Complex64::new(self.lo.re, self.hi.im),
        ]
    }

    fn grow(&self, by: f64) -> Rect {
        let d = Complex64::new(by, by);
        Rect {
            lo: self.lo - d,
            hi: self.hi + d,
        }
    }

    fn split(&self, fx: f64, fy: f64) -> [Rect; 4] {
        let mx = self.lo.re + fx * (self.hi.re - self.lo.re);
        let my = self.lo.im + fy * (self.hi.im - self.lo.im);
        [
            Rect::new(self.lo.re, mx, self.lo.im, my),
            Rect::new(mx, self.hi.re, self.lo.im, my),
            Rect::new(mx, self.hi.re, my, self.hi.im),
            Rect::new(self.lo.re, mx, my, self.hi.im),
        ]
    }
}

/// Rectangle boundary as a [`Contour`] with `per_edge` initial samples on each side.
#[derive(Debug, Clone, Copy)]
pub struct RectContour {
    pub rect: Rect,
    pub per_edge: usize,
}

impl Contour for RectContour {
    fn pieces(&self) -> usize {
        4
    }

    fn point(&self, s: f64) -> Complex64 {
        let corners = self.rect.corners();
        let i = (s.floor() as usize).min(3);
        let t = s - i as f64;
        corners[i] + (corners[(i + 1) % 4] - corners[i]) * t
    }

    fn initial_samples(&self, _piece: usize) -> usize {
        self.per_edge
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WindingReport {
    pub winding: i64,
    pub max_phase_step: f64,
    /// `(c, f(c))` in contour order; the curve closes back onto the first sample.
    pub samples: Vec<(Complex64, Complex64)>,
}

impl WindingReport {
    /// Cumulative unwrapped phase of `f` at each sample, starting from 0.
    pub fn cumulative_phase(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.samples.len());
        for (i, s) in self.samples.iter().enumerate() {
            if i > 0 {
                acc += phase_step(self.samples[i - 1].1, s.1);
            }
            out.push(acc);
        }
        out
    }
}

fn phase_step(a: Complex64, b: Complex64) -> f64 {
    (b * a.conj()).arg()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    v[v.len() / 2]
}

/// Argument-principle winding number of `f` along `contour`.
///
/// Consecutive samples are bisected until every phase step is below `π/2`.
/// Steps where `|f|` jumps by more than `e²` are bisected too: a large
/// modulus jump means a nearby zero, where a coarse phase step can alias.
/// Once the criteria hold, every step is halved once more and rechecked.
pub fn winding_number<F>(f: &F, contour: &dyn Contour) -> Result<WindingReport>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    winding_number_with_budget(f, contour, DEFAULT_SAMPLE_BUDGET)
}

pub fn winding_number_with_budget<F>(
    f: &F,
    contour: &dyn Contour,
    budget: usize,
) -> Result<WindingReport>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let mut params = Vec::new();
    for piece in 0..contour.pieces() {
        let n = contour.initial_samples(piece).max(1);
        for j in 0..n {
            params.push(piece as f64 + j as f64 / n as f64);
        }
    }
    let mut values: Vec<Complex64> = params
        .par_iter()
        .map(|&s| f(contour.point(s)))
        .collect::<Result<_>>()?;
    let end = contour.pieces() as f64;

    let mut verified = false;
    loop {
        check_zero_on_contour(&params, &values, contour)?;
        let n = params.len();
        let mut bad: Vec<usize> = (0..n)
            .filter(|&i| {
                let (a, b) = (values[i], values[(i + 1) % n]);
                phase_step(a, b).abs() >= FRAC_PI_2
                    || (b.norm() / a.norm()).ln().abs() > MAX_LOG_MODULUS_STEP
            })
            .collect();
        if bad.is_empty() {
            if verified {
                break;
            }
            // One extra halving of every step: a step that aliased past π
            // shows up as two large half-steps.
            verified = true;
            bad = (0..n).collect();
        }
        if n + bad.len() > budget {
            let max_step = (0..n)
                .map(|i| phase_step(values[i], values[(i + 1) % n]).abs())
                .fold(0.0, f64::max);
            return Err(StabilityError::RefinementExhausted {
                max_phase_step: max_step,
                samples: n,
            });
        }
        let mids: Vec<f64> = bad
            .iter()
            .map(|&i| {
                let next = if i + 1 == n { end } else { params[i + 1] };
                0.5 * (params[i] + next)
            })
            .collect();
        let mid_vals: Vec<Complex64> = mids
            .par_iter()
            .map(|&s| f(contour.point(s)))
            .collect::<Result<_>>()?;
        let mut new_params = Vec::with_capacity(n + bad.len());
        let mut new_values = Vec::with_capacity(n + bad.len());
        let mut k = 0;
        for i in 0..n {
            new_params.push(params[i]);
            new_values.push(values[i]);
            if k < bad.len() && bad[k] == i {
                new_params.push(mids[k]);
                new_values.push(mid_vals[k]);
                k += 1;
            }
        }
        params = new_params;
        values = new_values;
    }

    let n = params.len();
    let mut total = 0.0;
    let mut max_step: f64 = 0.0;
    for i in 0..n {
        let step = phase_step(values[i], values[(i + 1) % n]);
        total += step;
        max_step = max_step.max(step.abs());
    }
    Ok(WindingReport {
        winding: (total / (2.0 * PI)).round() as i64,
        max_phase_step: max_step,
        samples: params
            .iter()
            .map(|&s| contour.point(s))
            .zip(values)
            .collect(),
    })
}

fn check_zero_on_contour(params: &[f64], values: &[Complex64], contour: &dyn Contour) -> Result<()> {
    let med = median(values.iter().map(|v| v.norm()).collect());
    for (&s, v) in params.iter().zip(values) {
        let m = v.norm();
        if !m.is_finite() || m <= ZERO_ON_CONTOUR_RATIO * med || m == 0.0 {
            return Err(StabilityError::ZeroOnContour {
                at: contour.point(s),
                modulus: m,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Zero {
    pub c: Complex64,
    pub residual: f64,
    pub iterations: usize,
    pub multiplicity_hint: i64,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub tol: f64,
    /// Cells smaller than this are handed to the secant refinement.
    pub min_diameter: f64,
    pub per_edge: usize,
    pub max_jitters: usize,
    pub max_secant_iterations: usize,
    pub sample_budget: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            min_diameter: 1e-3,
            per_edge: 32,
            max_jitters: 5,
            max_secant_iterations: 60,
            sample_budget: DEFAULT_SAMPLE_BUDGET,
        }
    }
}

impl SearchOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    pub zeros: Vec<Zero>,
    pub total_winding: i64,
    pub cells_visited: usize,
    pub evaluations: usize,
    pub jitters: usize,
    /// Subdivisions whose children's windings did not add up to the parent's.
    pub conservation_violations: usize,
}

/// Split fractions. Off-centre so that zeros on symmetry axes avoid cell edges.
const SPLIT: (f64, f64) = (0.4721, 0.5317);

fn jittered_split(attempt: usize) -> (f64, f64) {
    let d = 0.0373 * attempt as f64;
    (SPLIT.0 + d * if attempt.is_multiple_of(2) { 1.0 } else { -1.0 }, SPLIT.1 - 0.61 * d)
}

/// Zeros of `f` inside `region`, refined to `|f| < tol`.
pub fn find_zeros<F>(f: &F, region: Rect, tol: f64) -> Result<Vec<Zero>>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    Ok(find_zeros_with(f, region, &SearchOptions::with_tol(tol))?.zeros)
}

pub fn find_zeros_with<F>(f: &F, region: Rect, opts: &SearchOptions) -> Result<SearchReport>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    if !(region.lo.im > 0.0) || region.hi.re <= region.lo.re || region.hi.im <= region.lo.im {
        return Err(StabilityError::InvalidArgument(format!(
            "search region must be a nonempty rectangle in Im(c) > 0, got {:?}",
            region
        )));
    }
    let evals = AtomicUsize::new(0);
    let counted = |c: Complex64| {
        evals.fetch_add(1, Ordering::Relaxed);
        f(c)
    };
    // A holomorphic function cannot wind negatively; a negative count means
    // the initial sampling aliased, so resample more densely.
    let winding_of = |rect: Rect| {
        let mut per_edge = opts.per_edge;
        for _ in 0..4 {
            let w = winding_number_with_budget(
                &counted,
                &RectContour { rect, per_edge },
                opts.sample_budget,
            )?
            .winding;
            if w >= 0 {
                return Ok(w);
            }
            per_edge *= 4;
        }
        Err(StabilityError::RefinementExhausted {
            max_phase_step: f64::NAN,
            samples: 4 * per_edge,
        })
    };

    let mut jitters = 0;
    let mut root = None;
    for attempt in 0..=opts.max_jitters {
        // Grow outward only, never below the requested floor.
        let grown = region.grow(1e-4 * region.diameter() * attempt as f64);
        let rect = Rect::new(grown.lo.re, grown.hi.re, region.lo.im, grown.hi.im);
        match winding_of(rect) {
            Ok(w) => {
                root = Some((rect, w));
                break;
            }
            Err(StabilityError::ZeroOnContour { .. }) => jitters += 1,
            Err(e) => return Err(e),
        }
    }
    let (root_rect, total_winding) = root.ok_or(StabilityError::RefinementExhausted {
        max_phase_step: f64::NAN,
        samples: 0,
    })?;

    let mut cells_visited = 1;
    let mut violations = 0;
    let mut frontier = if total_winding > 0 {
        vec![(root_rect, total_winding)]
    } else {
        Vec::new()
    };
    let mut leaves = Vec::new();
    while !frontier.is_empty() {
        let (small, large): (Vec<_>, Vec<_>) = frontier
            .into_iter()
            .partition(|(r, _)| r.diameter() < opts.min_diameter);
        leaves.extend(small);
        let results: Vec<Result<Split>> = large
            .par_iter()
            .map(|&(rect, w)| subdivide(rect, w, opts, &winding_of))
            .collect();
        frontier = Vec::new();
        for r in results {
            let (children, used_jitters, conserved) = r?;
            cells_visited += 4;
            jitters += used_jitters;
            if !conserved {
                violations += 1;
            }
            frontier.extend(children.into_iter().filter(|(_, w)| *w > 0));
        }
    }

    let refined: Vec<Zero> = leaves
        .par_iter()
        .map(|&(rect, w)| secant(&counted, rect, w, opts))
        .collect::<Result<_>>()?;
    let mut zeros: Vec<Zero> = Vec::new();
    for z in refined {
        match zeros
            .iter_mut()
            .find(|k| (k.c - z.c).norm() < 10.0 * opts.tol)
        {
            Some(k) if k.residual > z.residual => *k = z,
            Some(_) => {}
            None => zeros.push(z),
        }
    }
    zeros.sort_by(|a, b| b.c.im.total_cmp(&a.c.im).then(a.c.re.total_cmp(&b.c.re)));
    Ok(SearchReport {
        zeros,
        total_winding,
        cells_visited,
        evaluations: evals.load(Ordering::Relaxed),
        jitters,
        conservation_violations: violations,
    })
}

/// Children with their windings, jitter attempts used, and whether the total winding was conserved.
type Split = (Vec<(Rect, i64)>, usize, bool);

fn subdivide(
    rect: Rect,
    winding: i64,
    opts: &SearchOptions,
    winding_of: &(dyn Fn(Rect) -> Result<i64> + Sync),
) -> Result<Split> {
    let mut last_err = None;
    for attempt in 0..=opts.max_jitters {
        let (fx, fy) = jittered_split(attempt);
        let kids = rect.split(fx, fy);
        let windings: Result<Vec<i64>> = kids.iter().map(|&k| winding_of(k)).collect();
        match windings {
            Ok(ws) => {
                let conserved = ws.iter().sum::<i64>() == winding;
                return Ok((kids.into_iter().zip(ws).collect(), attempt, conserved));
            }
            Err(e @ StabilityError::ZeroOnContour { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(match last_err {
        Some(StabilityError::ZeroOnContour { modulus, .. }) => StabilityError::RefinementExhausted {
            max_phase_step: modulus,
            samples: opts.max_jitters + 1,
        },
        _ => StabilityError::NoZeroFound,
    })
}

/// Secant refinement from `guess` without a winding certificate.
pub fn refine_zero<F>(f: &F, guess: Complex64, tol: f64) -> Result<Zero>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let d = 2.5e-3 * guess.im.min(1.0);
    let rect = Rect::new(guess.re - d, guess.re + d, guess.im - d, guess.im + d);
    secant(f, rect, 1, &SearchOptions::with_tol(tol))
}

fn secant<F>(f: &F, rect: Rect, winding: i64, opts: &SearchOptions) -> Result<Zero>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut c0 = rect.centre();
    let mut c1 = c0 + Complex64::new(1e-4 * rect.diameter(), 0.0);
    let mut f0 = f(c0)?;
    let mut f1 = f(c1)?;
    if f0.norm() < f1.norm() {
        std::mem::swap(&mut c0, &mut c1);
        std::mem::swap(&mut f0, &mut f1);
    }
    let mut iterations = 0;
    while f1.norm() >= opts.tol && iterations < opts.max_secant_iterations {
        let denom = f1 - f0;
        if denom.norm() == 0.0 {
            break;
        }
        let c2 = c1 - f1 * (c1 - c0) / denom;
        if !(c2.re.is_finite() && c2.im.is_finite()) || c2.im <= 0.0 {
            break;
        }
        c0 = c1;
        f0 = f1;
        c1 = c2;
        f1 = f(c1)?;
        iterations += 1;
        if (c1 - c0).norm() <= 1e-16 * c1.norm() {
            break;
        }
    }
    if !(f1.norm() < opts.tol) || c1.im <= 0.0 {
        return Err(StabilityError::ToleranceNotReached {
            what: "secant refinement",
            iterations,
            last: f1.norm(),
        });
    }
    Ok(Zero {
        c: c1,
        residual: f1.norm(),
        iterations,
        multiplicity_hint: winding,
    })
}

/// Smallest `R` with `s(1 - s/R)² > 1 - (1 - s/R)²`, `s = ‖U_s‖_∞`, by bisection to `1e-6`.
///
/// For `s → 0` the condition tends to `R > 2`, which is returned for `s = 0`.
pub fn exclusion_radius(shear: &ShearProfile) -> f64 {
    exclusion_radius_for_sup(shear.sup_norm())
}

pub fn exclusion_radius_for_sup(s: f64) -> f64 {
    if !(s > 0.0) {
        return 2.0;
    }
    let holds = |r: f64| {
        let x = (1.0 - s / r).powi(2);
        s * x > 1.0 - x
    };
    let (mut lo, mut hi) = (s, 4.0 * s + 4.0);
    while !holds(hi) {
        hi *= 2.0;
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Which dispersion function a search runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroMethod {
    Neumann,
    Shooting,
}

impl ZeroMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            ZeroMethod::Neumann => "neumann",
            ZeroMethod::Shooting => "shooting",
        }
    }
}

/// A ready-to-evaluate dispersion function for one equilibrium and `κ`.
#[derive(Clone)]
#[allow(clippy::large_enum_variant)]
pub enum DispersionFunction {
    Neumann {
        engine: Dispersion,
        kappa: f64,
        tol: f64,
    },
    Shooting {
        shooter: Shooter,
        kappa: f64,
    },
}

impl DispersionFunction {
    pub fn neumann(eq: &StratifiedEquilibrium, kappa: f64, tol: f64) -> Result<Self> {
        Self::neumann_with_panels(eq, kappa, tol, DEFAULT_PANELS)
    }

    pub fn neumann_with_panels(eq: &StratifiedEquilibrium, kappa: f64, tol: f64, panels: usize) -> Result<Self> {
        eq.friedlander_alpha()?;
        Ok(Self::Neumann {
            engine: Dispersion::new(eq, panels),
            kappa,
            tol,
        })
    }

    pub fn shooting(eq: &StratifiedEquilibrium, kappa: f64) -> Self {
        Self::Shooting {
            shooter: Shooter::new(eq, DEFAULT_SHOOTING_STEPS),
            kappa,
        }
    }

    /// Neumann for Friedlander equilibria, shooting otherwise.
    pub fn auto(eq: &StratifiedEquilibrium, kappa: f64, tol: f64) -> Self {
        Self::neumann(eq, kappa, tol).unwrap_or_else(|_| Self::shooting(eq, kappa))
    }

    pub fn method(&self) -> ZeroMethod {
        match self {
            Self::Neumann { .. } => ZeroMethod::Neumann,
            Self::Shooting { .. } => ZeroMethod::Shooting,
        }
    }

    pub fn eval(&self, c: Complex64) -> Result<Complex64> {
        if !(c.im > 0.0) {
            return Err(StabilityError::BranchViolation(c.im));
        }
        match self {
            Self::Neumann { engine, kappa, tol } => engine.value(c, *kappa, *tol),
            Self::Shooting { shooter, kappa } => Ok(shooter.value(c, *kappa)),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Gamma0Report {
    pub gamma0: f64,
    pub method: ZeroMethod,
    pub region: Rect,
    pub zeros: Vec<Zero>,
    pub total_winding: i64,
    pub conservation_violations: usize,
}

/// `γ₀ = max Im(c)` over the zeros in `[-R̄, R̄] × [eps_floor, R̄]`, `R̄` the exclusion radius.
///
/// The Friedlander parameter is carried by `eq`; equilibria without one are
/// searched with the shooting oracle.
pub fn gamma0(eq: &StratifiedEquilibrium, eps_floor: f64, opts: &SearchOptions) -> Result<Gamma0Report> {
    let f = DispersionFunction::auto(eq, 0.0, NEUMANN_SEARCH_TOL);
    gamma0_with(&f, eq, eps_floor, opts)
}

pub fn gamma0_with(
    f: &DispersionFunction,
    eq: &StratifiedEquilibrium,
    eps_floor: f64,
    opts: &SearchOptions,
) -> Result<Gamma0Report> {
    if !(eps_floor > 0.0) {
        return Err(StabilityError::InvalidArgument(format!(
            "eps_floor must be positive, got {eps_floor}"
        )));
    }
    let r = exclusion_radius(&eq.shear);
    let region = Rect::new(-r, r, eps_floor, r);
    let report = find_zeros_with(&|c| f.eval(c), region, opts)?;
    let gamma0 = report
        .zeros
        .iter()
        .map(|z| z.c.im)
        .fold(f64::NEG_INFINITY, f64::max);
    if report.zeros.is_empty() {
        return Err(StabilityError::NoZeroFound);
    }
    Ok(Gamma0Report {
        gamma0,
        method: f.method(),
        region,
        zeros: report.zeros,
        total_winding: report.total_winding,
        conservation_violations: report.conservation_violations,
    })
}

/// Sanity flags for a located zero.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NecessaryConditions {
    /// `Re c` lies in the range of `U_s`.
    pub range_pass: bool,
    /// True when the density is constant, so the range test is the homogeneous one.
    pub homogeneous: bool,
    pub miles_howard_stable: bool,
    /// A zero of a Miles–Howard stable profile can only be a numerical artifact.
    pub spurious: bool,
}

pub fn verify_necessary_conditions(zero: &Zero, eq: &StratifiedEquilibrium) -> NecessaryConditions {
    let (lo, hi) = eq.shear.range();
    let homogeneous = crate::profiles::linspace(-1.0, 1.0, 201).all(|z| eq.strat.d1(z) == 0.0);
    let stable = miles_howard_check(eq, 1000)
        .map(|r| r.miles_howard_satisfied)
        .unwrap_or(false);
    NecessaryConditions {
        range_pass: zero.c.re >= lo && zero.c.re <= hi,
        homogeneous,
        miles_howard_stable: stable,
        spurious: stable,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaScanRow {
    pub beta: f64,
    pub radius: f64,
    pub winding: i64,
    pub winding_check: i64,
    pub agree: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaScan {
    pub eps: f64,
    pub eps_check: f64,
    pub rows: Vec<BetaScanRow>,
    /// First β of the scan whose Nyquist winding is 1 at both offsets.
    pub first_unit_beta: Option<f64>,
}

/// Nyquist winding of the tanh family over `∂Ω_{ε,R̄}` for each β, at two offsets.
pub fn beta_scan(betas: &[f64], eps: f64, eps_check: f64) -> Result<BetaScan> {
    let rows = betas
        .par_iter()
        .map(|&beta| {
            let shear = ShearProfile::tanh(beta);
            let radius = exclusion_radius(&shear);
            let f = |c: Complex64| Ok(nyquist_f(c, &shear));
            let a = winding_number(&f, &HalfDiskContour::new(eps, radius))?;
            let b = winding_number(&f, &HalfDiskContour::new(eps_check, radius))?;
            Ok(BetaScanRow {
                beta,
                radius,
                winding: a.winding,
                winding_check: b.winding,
                agree: a.winding == b.winding,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let first_unit_beta = rows
        .iter()
        .find(|r| r.winding == 1 && r.agree)
        .map(|r| r.beta);
    Ok(BetaScan {
        eps,
        eps_check,
        rows,
        first_unit_beta,
    })
}

/// Sign change of `Im F(a + iε)` on `[-a_max, a_max]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SignChange {
    /// Linear interpolation of the crossing.
    pub at: f64,
    pub upward: bool,
}

/// Samples `Im F` at `n` uniform points and lists its sign changes.
pub fn plemelj_sign_changes(shear: &ShearProfile, eps: f64, a_max: f64, n: usize) -> Vec<SignChange> {
    let pts: Vec<(f64, f64)> = crate::profiles::linspace(-a_max, a_max, n)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&a| (a, nyquist_f(Complex64::new(a, eps), shear).im))
        .collect();
    pts.windows(2)
        .filter(|w| (w[0].1 < 0.0) != (w[1].1 < 0.0))
        .map(|w| {
            let ((a0, v0), (a1, v1)) = (w[0], w[1]);
            SignChange {
                at: a0 - v0 * (a1 - a0) / (v1 - v0),
                upward: v1 > v0,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn nyquist_f_couette() {
        let f = nyquist_f(c(0.0, 1.0), &ShearProfile::couette());
        assert!((f - c(-1.0, 0.0)).norm() < 1e-13);
        let shear = ShearProfile::tanh(5.0);
        let a = nyquist_f(c(0.3, 0.2), &shear);
        let b = nyquist_f(c(0.3, -0.2), &shear);
        assert!((a - b.conj()).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn nyquist_f_large_radius() {
        let shear = ShearProfile::tanh(5.0);
        let defect = |r: f64, theta: f64| {
            let cc = c(0.0, 0.01) + Complex64::from_polar(r, theta);
            let lead = Complex64::from_polar(2.0 / (r * r), -2.0 * theta);
            (nyquist_f(cc, &shear) - lead).norm() * r * r
        };
        for theta in [0.3, 1.2, 2.5] {
            let (d50, d100) = (defect(50.0, theta), defect(100.0, theta));
            assert!(d50 < 0.1 && d100 < 0.5 * d50, "{d50} {d100}");
        }
    }

    #[test]
    fn winding_of_simple_polynomials() {
        let contour = HalfDiskContour::new(0.01, 2.0);
        let a = c(0.3, 0.4);
        let f1 = |z: Complex64| Ok(z - a);
        assert_eq!(winding_number(&f1, &contour).unwrap().winding, 1);
        let b = c(-0.8, 1.1);
        let f2 = |z: Complex64| Ok((z - a) * (z - b));
        let report = winding_number(&f2, &contour).unwrap();
        assert_eq!(report.winding, 2);
        assert!(report.max_phase_step < FRAC_PI_2);
        let f0 = |z: Complex64| Ok(z - c(0.0, -1.0));
        assert_eq!(winding_number(&f0, &contour).unwrap().winding, 0);
    }

    #[test]
    fn zero_on_contour_is_detected() {
        let contour = RectContour {
            rect: Rect::new(-1.0, 1.0, 0.5, 2.0),
            per_edge: 4,
        };
        let f = |z: Complex64| Ok(z - c(0.0, 0.5));
        assert!(matches!(
            winding_number(&f, &contour),
            Err(StabilityError::ZeroOnContour { .. })
        ));
    }

    #[test]
    fn refinement_budget_is_enforced() {
        let contour = RectContour {
            rect: Rect::new(-1.0, 1.0, 0.5, 2.0),
            per_edge: 4,
        };
        let f = |z: Complex64| Ok((z - c(0.0, 1.25)).powi(12));
        let r = winding_number_with_budget(&f, &contour, 20);
        assert!(
            matches!(r, Err(StabilityError::RefinementExhausted { .. })),
            "{:?}",
            r.map(|w| w.winding)
        );
        assert_eq!(winding_number(&f, &contour).unwrap().winding, 12);
    }

    #[test]
    fn find_zeros_of_quadratic() {
        let f = |z: Complex64| Ok(z * z + 1.0);
        let zeros = find_zeros(&f, Rect::new(-2.0, 2.0, 0.1, 3.0), 1e-12).unwrap();
        assert_eq!(zeros.len(), 1);
        assert!((zeros[0].c - c(0.0, 1.0)).norm() < 1e-12);
        assert!(zeros[0].residual < 1e-12);
    }

    #[test]
    fn find_zeros_of_cubic_counts_and_conserves() {
        let roots = [c(0.5, 0.5), c(-1.0, 1.5), c(0.25, 2.25)];
        let f = |z: Complex64| Ok(roots.iter().map(|r| z - r).product());
        let report = find_zeros_with(&f, Rect::new(-2.0, 2.0, 0.1, 3.0), &SearchOptions::default())
            .unwrap();
        assert_eq!(report.total_winding, 3);
        assert_eq!(report.zeros.len(), 3);
        assert_eq!(report.conservation_violations, 0);
        assert!((report.zeros[0].c - roots[2]).norm() < 1e-12);
    }

    #[test]
    fn find_zeros_rejects_lower_region() {
        let f = |z: Complex64| Ok(z);
        assert!(find_zeros(&f, Rect::new(-1.0, 1.0, 0.0, 1.0), 1e-12).is_err());
    }

    #[test]
    fn exclusion_radius_closed_form() {
        for s in [0.01f64, 0.3, 1.0, 2.5] {
            let exact = s / (1.0 - 1.0 / (1.0 + s).sqrt());
            let r = exclusion_radius_for_sup(s);
            assert!((r - exact).abs() < 2e-6 && r >= exact, "{s}: {r} vs {exact}");
            assert!(r > s);
        }
        assert!((exclusion_radius(&ShearProfile::couette()) - 3.414213562).abs() < 2e-6);
        let mut prev = 0.0;
        for i in 1..=50 {
            let r = exclusion_radius_for_sup(0.05 * i as f64);
            assert!(r > prev);
            prev = r;
        }
        assert!(exclusion_radius_for_sup(1e-9) < 2.0 + 1e-6);
    }

    #[test]
    fn exclusion_radius_excludes_zeros_of_f() {
        let shear = ShearProfile::tanh(5.0);
        let r = exclusion_radius(&shear);
        for k in 0..40 {
            let theta = PI * (k as f64 + 0.5) / 40.0;
            for scale in [1.0, 1.5, 3.0] {
                let f = nyquist_f(Complex64::from_polar(r * scale, theta), &shear);
                assert!(f.norm() > 0.0);
            }
        }
    }

    #[test]
    fn necessary_conditions_flags() {
        let eq = crate::profiles::build_friedlander(ShearProfile::tanh(5.0), 0.97).unwrap();
        let fake = Zero {
            c: c(2.0, 0.5),
            residual: 0.0,
            iterations: 0,
            multiplicity_hint: 1,
        };
        let r = verify_necessary_conditions(&fake, &eq);
        assert!(!r.range_pass && !r.spurious && !r.homogeneous);
        let stable = StratifiedEquilibrium::new(
            ShearProfile::couette(),
            crate::profiles::Stratification::linear(-1.0),
        );
        let r = verify_necessary_conditions(&Zero { c: c(0.1, 0.5), ..fake }, &stable);
        assert!(r.range_pass && r.spurious);
    }
}
