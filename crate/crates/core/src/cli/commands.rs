use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::{Command, Kind, RunConfig};
use super::output::{jnum, Cell, Plot, Sink, Table};
use crate::dispersion::DispersionQuery;
use crate::error::{Result, StabilityError};
use crate::evolve::{instability_run, linear_fit, linear_growth, Grid1D, InstabilitySetup, LinearStepper, Model};
use crate::modes::{dominant_growth_with, mode_residual, reconstruct_mode, PowerIteration};
use crate::profiles::{
    build_friedlander, friedlander_profile, miles_howard_check, ShearProfile, Stratification, StratifiedEquilibrium,
    PROFILE_SCAN_POINTS,
};
use crate::rootfinder::{
    beta_scan, exclusion_radius, find_zeros_with, nyquist_f, plemelj_sign_changes, refine_zero, verify_necessary_conditions,
    winding_number, DispersionFunction, HalfDiskContour, Rect, SearchOptions, Zero, ZeroMethod, NEUMANN_SEARCH_TOL,
};

const JITTER: f64 = 0.0373;
const CONTOUR_ATTEMPTS: usize = 3;
const PLEMELJ_EPS: f64 = 1e-3;
const PLEMELJ_SAMPLES: usize = 2001;

pub fn run(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    match cfg.command {
        Command::ProfileCheck => profile_check(cfg),
        Command::Nyquist => nyquist(cfg),
        Command::Spectrum => spectrum(cfg),
        Command::Mode => mode(cfg),
        Command::EvolveLinear => evolve_linear(cfg),
        Command::EvolveNonlinear | Command::ScanDelta => evolve_nonlinear(cfg),
        Command::ScanBeta => scan_beta(cfg),
        Command::ScanM => scan_m(cfg),
    }
}

fn shear(cfg: &RunConfig) -> ShearProfile {
    match cfg.kind {
        Kind::Tanh => ShearProfile::tanh(cfg.beta),
        Kind::Couette => ShearProfile::couette(),
    }
}

pub fn equilibrium(cfg: &RunConfig) -> Result<StratifiedEquilibrium> {
    match cfg.alpha {
        Some(a) if cfg.command == Command::ProfileCheck => friedlander_profile(shear(cfg), a),
        Some(a) => build_friedlander(shear(cfg), a),
        None => Ok(StratifiedEquilibrium::new(shear(cfg), Stratification::linear(cfg.gradient))),
    }
}

fn search_options(cfg: &RunConfig) -> SearchOptions {
    let mut o = SearchOptions::with_tol(cfg.tol);
    o.per_edge = cfg.per_edge;
    o
}

fn region(cfg: &RunConfig, eq: &StratifiedEquilibrium) -> Rect {
    match cfg.region {
        Some([a, b, c, d]) => Rect::new(a, b, c, d),
        None => {
            let r = exclusion_radius(&eq.shear);
            Rect::new(-r, r, cfg.eps_floor, r)
        }
    }
}

fn dispersion(cfg: &RunConfig, eq: &StratifiedEquilibrium, kappa: f64, method: ZeroMethod) -> Result<DispersionFunction> {
    Ok(match method {
        ZeroMethod::Neumann => DispersionFunction::neumann_with_panels(eq, kappa, NEUMANN_SEARCH_TOL, cfg.panels)?,
        ZeroMethod::Shooting => DispersionFunction::shooting(eq, kappa),
    })
}

fn auto(cfg: &RunConfig, eq: &StratifiedEquilibrium, kappa: f64) -> DispersionFunction {
    dispersion(cfg, eq, kappa, ZeroMethod::Neumann).unwrap_or_else(|_| DispersionFunction::shooting(eq, kappa))
}

/// The fastest-growing zero at `kappa`: refined from `c_re/c_im` when given,
/// otherwise the top of a full search.
fn top_zero(cfg: &RunConfig, eq: &StratifiedEquilibrium, kappa: f64) -> Result<Zero> {
    let f = auto(cfg, eq, kappa);
    match cfg.c_guess {
        Some((re, im)) => refine_zero(&|c| f.eval(c), Complex64::new(re, im), cfg.tol),
        None => find_zeros_with(&|c| f.eval(c), region(cfg, eq), &search_options(cfg))?
            .zeros
            .into_iter()
            .next()
            .ok_or(StabilityError::NoZeroFound),
    }
}

fn cjson(c: Complex64) -> Value {
    json!({"re": jnum(c.re), "im": jnum(c.im)})
}

fn profile_check(cfg: &RunConfig) -> Result<()> {
    let eq = equilibrium(cfg)?;
    let report = miles_howard_check(&eq, PROFILE_SCAN_POINTS)?;
    let sink = Sink::new(cfg)?;
    let mut t = Table::new(&["z", "ri"]);
    for &(z, ri) in &report.samples {
        t.push(vec![z.into(), ri.into()]);
    }
    sink.csv("profile_check", &t)?;
    sink.json(
        "profile_check",
        json!({
            "min_ri": jnum(report.min_ri),
            "argmin_z": jnum(report.argmin_z),
            "satisfied": report.miles_howard_satisfied,
        }),
    )?;
    sink.svg(
        "profile_check",
        &Plot {
            title: "Richardson number".into(),
            x_label: "z".into(),
            y_label: "Ri".into(),
            log_y: false,
            lines: vec![report.samples.clone(), vec![(-1.0, 0.25), (1.0, 0.25)]],
        },
    )
}

fn nyquist(cfg: &RunConfig) -> Result<()> {
    let shear = shear(cfg);
    let radius = cfg.radius.unwrap_or_else(|| exclusion_radius(&shear));
    let f = |c: Complex64| Ok(nyquist_f(c, &shear));
    let mut attempt = 0;
    let (report, eps, radius) = loop {
        let s = 1.0 + JITTER * attempt as f64;
        let (eps, r) = (cfg.eps * s, radius * s);
        match winding_number(&f, &HalfDiskContour::new(eps, r)) {
            Ok(rep) => break (rep, eps, r),
            Err(StabilityError::ZeroOnContour { .. }) if attempt + 1 < CONTOUR_ATTEMPTS => attempt += 1,
            Err(e) => return Err(e),
        }
    };
    let zeros = if report.winding > 0 {
        find_zeros_with(&f, Rect::new(-radius, radius, eps, radius), &search_options(cfg))?.zeros
    } else {
        Vec::new()
    };
    let a_max = 0.95 * shear.sup_norm();
    let signs = plemelj_sign_changes(&shear, PLEMELJ_EPS, a_max, PLEMELJ_SAMPLES);
    let sink = Sink::new(cfg)?;
    let mut t = Table::new(&["re_c", "im_c", "re_f", "im_f", "cumulative_phase"]);
    for ((c, v), p) in report.samples.iter().zip(report.cumulative_phase()) {
        t.push(vec![c.re.into(), c.im.into(), v.re.into(), v.im.into(), p.into()]);
    }
    sink.csv("nyquist", &t)?;
    sink.json(
        "nyquist",
        json!({
            "winding": report.winding,
            "max_phase_step": jnum(report.max_phase_step),
            "eps": eps,
            "radius": radius,
            "contour_attempts": attempt + 1,
            "zeros": zeros.iter().map(|z| json!({"c": cjson(z.c), "residual": jnum(z.residual)})).collect::<Vec<_>>(),
            "plemelj": {
                "eps": PLEMELJ_EPS,
                "a_max": a_max,
                "sign_changes": signs.iter().map(|s| json!({"at": s.at, "upward": s.upward})).collect::<Vec<_>>(),
            },
        }),
    )?;
    sink.svg(
        "nyquist",
        &Plot {
            title: "Nyquist image F(boundary)".into(),
            x_label: "Re F".into(),
            y_label: "Im F".into(),
            log_y: false,
            lines: vec![report.samples.iter().map(|(_, v)| (v.re, v.im)).collect()],
        },
    )
}

fn spectrum(cfg: &RunConfig) -> Result<()> {
    let eq = equilibrium(cfg)?;
    let mut methods = vec![ZeroMethod::Shooting];
    if eq.alpha.is_some() {
        methods.insert(0, ZeroMethod::Neumann);
    }
    let rect = region(cfg, &eq);
    let opts = search_options(cfg);
    let reports = methods
        .par_iter()
        .map(|&m| {
            let f = dispersion(cfg, &eq, cfg.kappa, m)?;
            find_zeros_with(&|c| f.eval(c), rect, &opts).map(|r| (m, r))
        })
        .collect::<Result<Vec<_>>>()?;
    let sink = Sink::new(cfg)?;
    let mut t = Table::new(&["method", "alpha", "kappa", "re_c", "im_c", "residual", "g1_pass"]);
    let alpha = eq.alpha.map_or(Cell::S("none".into()), Cell::F);
    let mut gamma0 = f64::NEG_INFINITY;
    for (m, r) in &reports {
        for z in &r.zeros {
            let nc = verify_necessary_conditions(z, &eq);
            gamma0 = gamma0.max(z.c.im);
            t.push(vec![
                m.as_str().into(),
                alpha.clone(),
                cfg.kappa.into(),
                z.c.re.into(),
                z.c.im.into(),
                z.residual.into(),
                nc.range_pass.into(),
            ]);
        }
    }
    // largest distance from a Neumann zero to the nearest shooting zero
    let gap = match reports.as_slice() {
        [(ZeroMethod::Neumann, a), (ZeroMethod::Shooting, b)] if !a.zeros.is_empty() && a.zeros.len() == b.zeros.len() => a
            .zeros
            .iter()
            .map(|x| b.zeros.iter().map(|y| (x.c - y.c).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max),
        _ => f64::NAN,
    };
    sink.csv("spectrum", &t)?;
    sink.json(
        "spectrum",
        json!({
            "gamma0": jnum(gamma0),
            "region": {"re_min": rect.lo.re, "re_max": rect.hi.re, "im_min": rect.lo.im, "im_max": rect.hi.im},
            "methods": reports.iter().map(|(m, r)| json!({
                "method": m.as_str(),
                "zeros": r.zeros.len(),
                "total_winding": r.total_winding,
                "conservation_violations": r.conservation_violations,
            })).collect::<Vec<_>>(),
            "method_gap": jnum(gap),
        }),
    )
}

fn power_options(cfg: &RunConfig) -> PowerIteration {
    PowerIteration {
        seed: cfg.seed,
        dt: cfg.dt,
        ..PowerIteration::default()
    }
}

fn mode(cfg: &RunConfig) -> Result<()> {
    let eq = equilibrium(cfg)?;
    let zero = top_zero(cfg, &eq, cfg.kappa)?;
    let grid = Grid1D::new(cfg.nz);
    let q = DispersionQuery::new(&eq, zero.c, cfg.kappa);
    let m = reconstruct_mode(&zero, cfg.k, &q, &grid)?;
    let res = mode_residual(&m, &eq);
    let sink = Sink::new(cfg)?;
    let mut t = Table::new(&["z", "phi_re", "phi_im", "r_re", "r_im", "w_re", "w_im"]);
    for i in 0..grid.n {
        t.push(vec![
            m.z[i].into(),
            m.phi[i].re.into(),
            m.phi[i].im.into(),
            m.r[i].re.into(),
            m.r[i].im.into(),
            m.w[i].re.into(),
            m.w[i].im.into(),
        ]);
    }
    sink.csv("mode", &t)?;
    let growth = dominant_growth_with(cfg.k as f64, cfg.kappa, &eq, &grid, &power_options(cfg));
    let rate = growth.as_ref().map_or(f64::NAN, |g| g.rate);
    sink.json(
        "mode",
        json!({
            "c": cjson(m.c),
            "k": m.k,
            "kappa": m.kappa,
            "sigma": jnum(m.sigma),
            "tg_residual": jnum(res.tg_residual),
            "bc_defect": jnum(res.bc_defect),
            "dominant_growth": jnum(rate),
            "relative_error": jnum(rate / m.sigma - 1.0),
        }),
    )?;
    sink.svg(
        "mode",
        &Plot {
            title: "|phi|, |r|, |w|".into(),
            x_label: "z".into(),
            y_label: "modulus".into(),
            log_y: false,
            lines: [&m.phi, &m.r, &m.w]
                .iter()
                .map(|v| m.z.iter().zip(v.iter()).map(|(z, a)| (*z, a.norm())).collect())
                .collect(),
        },
    )?;
    growth.map(|_| ())
}

fn series_table(times: &[f64], norms: &[f64], every: usize) -> Table {
    let mut t = Table::new(&["t", "deviation_norm"]);
    let last = times.len().saturating_sub(1);
    for (i, (a, b)) in times.iter().zip(norms).enumerate() {
        if i % every == 0 || i == last {
            t.push(vec![(*a).into(), (*b).into()]);
        }
    }
    t
}

fn growth_plot(title: &str, lines: Vec<Vec<(f64, f64)>>) -> Plot {
    Plot {
        title: title.into(),
        x_label: "t".into(),
        y_label: "deviation norm".into(),
        log_y: true,
        lines,
    }
}

fn evolve_linear(cfg: &RunConfig) -> Result<()> {
    let eq = equilibrium(cfg)?;
    let grid = Grid1D::new(cfg.nz);
    let model = if cfg.kappa == 0.0 { Model::Hydrostatic } else { Model::Boussinesq };
    let mut stepper = LinearStepper::new(&eq, &grid, cfg.k as f64, cfg.kappa, model);
    let t_final = cfg.t_final.unwrap_or(20.0 / cfg.k.unsigned_abs() as f64);
    let series = linear_growth(&mut stepper, &grid, cfg.dt, t_final, cfg.seed);
    let zero = match top_zero(cfg, &eq, cfg.kappa) {
        Ok(z) => Some(z),
        Err(StabilityError::NoZeroFound) => None,
        Err(e) => return Err(e),
    };
    let predicted = zero.map_or(f64::NAN, |z| cfg.k as f64 * z.c.im);
    let sink = Sink::new(cfg)?;
    sink.csv("evolve_linear", &series_table(&series.times, &series.norms, cfg.sample_every))?;
    sink.json(
        "evolve_linear",
        json!({
            "model": model,
            "fitted_sigma": jnum(series.fitted_sigma),
            "fit_r2": jnum(series.fit_r2),
            "fit_window": [series.fit_window.0, series.fit_window.1],
            "c": zero.map_or(Value::Null, |z| cjson(z.c)),
            "predicted_sigma": jnum(predicted),
            "relative_error": jnum(series.fitted_sigma / predicted - 1.0),
        }),
    )?;
    sink.svg(
        "evolve_linear",
        &growth_plot("linear evolution", vec![series.times.iter().copied().zip(series.norms.iter().copied()).collect()]),
    )
}

fn evolve_nonlinear(cfg: &RunConfig) -> Result<()> {
    let eq = equilibrium(cfg)?;
    let grid = Grid1D::new(cfg.nz);
    let k_phys = cfg.k as f64 / cfg.m_scale;
    let kappa = k_phys.abs();
    let zero = top_zero(cfg, &eq, kappa)?;
    let mode = reconstruct_mode(&zero, cfg.k, &DispersionQuery::new(&eq, zero.c, kappa), &grid)?;
    let lambda = dominant_growth_with(k_phys, kappa, &eq, &grid, &power_options(cfg))?.rate;
    let setup = InstabilitySetup {
        nx: cfg.nx,
        m_scale: cfg.m_scale,
        dt: cfg.dt,
        threshold: cfg.threshold,
        lambda,
    };
    let deltas = cfg.delta_list.clone().unwrap_or_else(|| vec![cfg.delta]);
    let stem = cfg.command.stem();
    let sink = Sink::new(cfg)?;
    let runs = deltas
        .par_iter()
        .enumerate()
        .map(|(i, &d)| {
            let run = instability_run(d, &mode, &eq, &grid, &setup);
            let name = if deltas.len() == 1 { stem.clone() } else { format!("{stem}_{i}") };
            sink.csv(&name, &series_table(&run.series.times, &run.series.norms, cfg.sample_every))?;
            Ok(run)
        })
        .collect::<Result<Vec<_>>>()?;
    let crossing: Vec<f64> = runs.iter().map(|r| r.crossing.unwrap_or(f64::NAN)).collect();
    let rate_error: Vec<Value> = runs.iter().map(|r| jnum(r.series.fitted_sigma / lambda - 1.0)).collect();
    let fields = if runs.len() == 1 {
        let r = &runs[0];
        json!({
            "c": cjson(zero.c),
            "lambda": lambda,
            "delta": r.delta,
            "T": jnum(crossing[0]),
            "fitted_sigma": jnum(r.series.fitted_sigma),
            "fit_r2": jnum(r.series.fit_r2),
            "relative_error": rate_error[0],
        })
    } else {
        let logs: Vec<f64> = deltas.iter().map(|d| d.ln().abs()).collect();
        let slope = if crossing.iter().all(|t| t.is_finite()) { linear_fit(&logs, &crossing).0 } else { f64::NAN };
        json!({
            "c": cjson(zero.c),
            "lambda": lambda,
            "deltas": deltas,
            "T_delta": crossing.iter().map(|t| jnum(*t)).collect::<Vec<_>>(),
            "fitted_sigmas": runs.iter().map(|r| jnum(r.series.fitted_sigma)).collect::<Vec<_>>(),
            "rate_relative_errors": rate_error,
            "fitted_slope_vs_logdelta": jnum(slope),
            "predicted_slope": 1.0 / lambda,
            "relative_error": jnum(slope * lambda - 1.0),
        })
    };
    sink.json(&stem, fields)?;
    sink.svg(
        &stem,
        &growth_plot(
            "nonlinear deviation",
            runs.iter()
                .map(|r| r.series.times.iter().copied().zip(r.series.norms.iter().copied()).collect())
                .collect(),
        ),
    )?;
    match runs.into_iter().find_map(|r| r.failure) {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn scan_beta(cfg: &RunConfig) -> Result<()> {
    let scan = beta_scan(&cfg.beta_list, cfg.eps, cfg.eps_check)?;
    let sink = Sink::new(cfg)?;
    let mut t = Table::new(&["beta", "radius", "winding", "winding_check", "agree"]);
    for r in &scan.rows {
        t.push(vec![r.beta.into(), r.radius.into(), r.winding.into(), r.winding_check.into(), r.agree.into()]);
    }
    sink.csv("scan_beta", &t)?;
    sink.json(
        "scan_beta",
        json!({
            "eps": scan.eps,
            "eps_check": scan.eps_check,
            "first_unit_beta": scan.first_unit_beta,
            "rows": scan.rows,
        }),
    )
}

fn scan_m(cfg: &RunConfig) -> Result<()> {
    let eq = equilibrium(cfg)?;
    let c_star = top_zero(cfg, &eq, 0.0)?.c;
    let grid = Grid1D::new(cfg.nz);
    let rows = cfg
        .m_list
        .par_iter()
        .map(|&m| {
            if !(m > 0.0) {
                return Err(StabilityError::Config(format!("M_list entries must be positive, got {m}")));
            }
            let kappa = 1.0 / m;
            let f = auto(cfg, &eq, kappa);
            let z = refine_zero(&|c| f.eval(c), c_star, cfg.tol)?;
            let g = dominant_growth_with(1.0, kappa, &eq, &grid, &power_options(cfg))?.rate;
            Ok((m, kappa, z.c, g))
        })
        .collect::<Result<Vec<_>>>()?;
    let sink = Sink::new(cfg)?;
    let mut t = Table::new(&["M", "kappa", "re_c", "im_c", "gap", "growth", "relative_error"]);
    for &(m, kappa, c, g) in &rows {
        t.push(vec![
            m.into(),
            kappa.into(),
            c.re.into(),
            c.im.into(),
            (c - c_star).norm().into(),
            g.into(),
            (g / c.im - 1.0).into(),
        ]);
    }
    let mut by_m = rows.clone();
    by_m.sort_by(|a, b| a.0.total_cmp(&b.0));
    let decreasing = by_m.windows(2).all(|w| (w[1].2 - c_star).norm() < (w[0].2 - c_star).norm());
    sink.csv("scan_m", &t)?;
    sink.json(
        "scan_m",
        json!({
            "c_star": cjson(c_star),
            "gap_decreasing": decreasing,
            "rows": rows.iter().map(|&(m, kappa, c, g)| json!({
                "M": m,
                "kappa": kappa,
                "c": cjson(c),
                "gap": (c - c_star).norm(),
                "growth": g,
                "relative_error": g / c.im - 1.0,
            })).collect::<Vec<_>>(),
        }),
    )
}
