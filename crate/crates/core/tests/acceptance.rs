//! End-to-end acceptance suite. One line per criterion, PASS or FAIL, then a
//! nonzero exit if any criterion failed.

use std::f64::consts::PI;
use std::fs;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use shearstab::dispersion::{solve_neumann, DispersionQuery};
use shearstab::evolve::{
    grenier_iterate, instability_run, linear_fit, linear_growth, poisson_full, transport_exact, Field2D, GrenierOptions,
    Grid1D, InstabilitySetup, LinearStepper, Model, ModeState, NonlinearSolver,
};
use shearstab::modes::{dominant_growth_with, reconstruct_mode, GrowingMode, PowerIteration};
use shearstab::profiles::{build_friedlander, ShearProfile, Stratification, StratifiedEquilibrium};
use shearstab::rootfinder::{
    beta_scan, exclusion_radius, find_zeros_with, gamma0_with, nyquist_f, plemelj_sign_changes, refine_zero,
    winding_number, DispersionFunction, HalfDiskContour, Rect, SearchOptions, Zero, NEUMANN_SEARCH_TOL,
};

const TOL: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn tanh5(alpha: f64) -> StratifiedEquilibrium {
    build_friedlander(ShearProfile::tanh(5.0), alpha).unwrap()
}

fn opts() -> SearchOptions {
    SearchOptions::with_tol(TOL)
}

fn zeros_of(f: &DispersionFunction, rect: Rect) -> Vec<Zero> {
    find_zeros_with(&|c| f.eval(c), rect, &opts()).unwrap().zeros
}

fn top_zero(eq: &StratifiedEquilibrium, kappa: f64) -> Zero {
    let f = DispersionFunction::auto(eq, kappa, NEUMANN_SEARCH_TOL);
    gamma0_with(&f, eq, 0.05, &opts()).unwrap().zeros[0]
}

fn c1_friedlander_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut formula: f64 = 0.0;
    for beta in [3.0, 5.0] {
        for alpha in [0.9, 0.97] {
            let eq = build_friedlander(ShearProfile::tanh(beta), alpha).unwrap();
            let a = alpha * (1.0 - alpha);
            let (mut num, mut scale) = (0.0f64, 0.0f64);
            for i in 0..1000 {
                let z = -1.0 + 2.0 * i as f64 / 999.0;
                let u1 = eq.shear.d1(z);
                num = num.max((eq.strat.d1(z) + a * u1 * u1).abs());
                scale = scale.max(a * u1 * u1);
                // closed form printed with the explicit profile
                let t = (beta * z).tanh();
                let rho = a * (-beta * t + beta / 3.0 * t.powi(3));
                formula = formula.max((eq.strat.eval(z) - rho).abs() / (a * beta).max(1e-300));
                formula = formula.max((eq.shear.eval(z) - t).abs());
            }
            worst = worst.max(num / scale);
        }
    }
    check(
        worst <= 1e-12 && formula <= 1e-14,
        format!("max relative identity defect {worst:.2e}, explicit formula mismatch {formula:.2e}"),
    )
}

fn c2_miles_howard_gate() -> Outcome {
    let stable = StratifiedEquilibrium::new(ShearProfile::couette(), Stratification::linear(-1.0));
    let r = exclusion_radius(&stable.shear);
    let f = DispersionFunction::shooting(&stable, 0.0);
    let none = zeros_of(&f, Rect::new(-r, r, 0.05, r));
    let unstable = tanh5(0.97);
    let r = exclusion_radius(&unstable.shear);
    let g = DispersionFunction::auto(&unstable, 0.0, NEUMANN_SEARCH_TOL);
    let some = zeros_of(&g, Rect::new(-r, r, 0.05, r));
    check(
        none.is_empty() && !some.is_empty(),
        format!("stable profile: {} zeros, Friedlander: {} zeros", none.len(), some.len()),
    )
}

fn c3_nyquist() -> Outcome {
    let scan = beta_scan(&[1.0, 2.0, 3.0, 5.0, 8.0], 0.01, 0.005).unwrap();
    let regime = scan.first_unit_beta.is_some_and(|b| b <= 5.0)
        && scan.rows.iter().filter(|r| r.beta >= 5.0).all(|r| r.winding == 1 && r.agree);
    let shear = ShearProfile::tanh(5.0);
    let r = exclusion_radius(&shear);
    let f = |c: Complex64| Ok(nyquist_f(c, &shear));
    let w = winding_number(&f, &HalfDiskContour::new(0.01, r)).unwrap();
    let zeros = find_zeros_with(&f, Rect::new(-r, r, 0.01, r), &opts()).unwrap().zeros;
    let t5 = 5.0f64.tanh();
    let zero_ok = zeros.len() == 1 && {
        let c = zeros[0].c;
        c.im > 0.0 && nyquist_f(c, &shear).norm() < 1e-10 && c.re.abs() <= t5
    };
    // boundary values Im F(a + i0) are nonzero only inside the range of U_s
    let signs = plemelj_sign_changes(&shear, 0.01, 0.95 * shear.sup_norm(), 2001);
    let plemelj = signs.len() == 1 && signs[0].upward && signs[0].at.abs() < 1e-10;
    check(
        regime && w.winding == 1 && w.max_phase_step < PI / 2.0 && zero_ok && plemelj,
        format!(
            "first unit beta {:?}, winding {}, max phase step {:.3}, c1 = {:.10}, sign changes {:?}",
            scan.first_unit_beta,
            w.winding,
            w.max_phase_step,
            zeros.first().map(|z| z.c).unwrap_or_default(),
            signs.iter().map(|s| (s.at, s.upward)).collect::<Vec<_>>()
        ),
    )
}

/// Neumann and shooting zeros for α ∈ {0.95, 0.97, 0.99} at κ = 0.
fn alpha_family() -> Vec<(f64, Zero, Zero, f64)> {
    [0.95, 0.97, 0.99]
        .par_iter()
        .map(|&alpha| {
            let eq = tanh5(alpha);
            let r = exclusion_radius(&eq.shear);
            let rect = Rect::new(-r, r, 0.05, r);
            let (n, s) = rayon::join(
                || zeros_of(&DispersionFunction::neumann(&eq, 0.0, NEUMANN_SEARCH_TOL).unwrap(), rect),
                || zeros_of(&DispersionFunction::shooting(&eq, 0.0), rect),
            );
            assert!(n.len() == 1 && s.len() == 1, "alpha {alpha}: {} / {} zeros", n.len(), s.len());
            let sol = solve_neumann(&DispersionQuery::new(&eq, n[0].c, 0.0), NEUMANN_SEARCH_TOL, 200).unwrap();
            (alpha, n[0], s[0], sol.fixed_point_residual)
        })
        .collect()
}

fn c4_oracle_equivalence(family: &[(f64, Zero, Zero, f64)]) -> Outcome {
    let gap = family.iter().map(|(_, n, s, _)| (n.c - s.c).norm()).fold(0.0, f64::max);
    let res = family.iter().map(|f| f.3).fold(0.0, f64::max);
    check(gap < 1e-8 && res < 1e-10, format!("max |dc| {gap:.2e}, max fixed-point residual {res:.2e}"))
}

fn c5_rouche(family: &[(f64, Zero, Zero, f64)]) -> Outcome {
    let shear = ShearProfile::tanh(5.0);
    let r = exclusion_radius(&shear);
    let c1 = find_zeros_with(&|c| Ok(nyquist_f(c, &shear)), Rect::new(-r, r, 0.01, r), &opts()).unwrap().zeros[0].c;
    let d: Vec<f64> = family.iter().map(|(_, n, _, _)| (n.c - c1).norm()).collect();
    check(
        d.windows(2).all(|w| w[1] < w[0]) && d[2] < 0.2,
        format!("|c*(alpha) - c1| = {}", sci(&d)),
    )
}

fn c6_growth_law() -> Outcome {
    let eq = tanh5(0.97);
    let c = top_zero(&eq, 0.0).c;
    let grid = Grid1D::new(512);
    let rows: Vec<(i64, f64, f64)> = [1i64, 2, 4]
        .par_iter()
        .map(|&k| {
            let mut st = LinearStepper::new(&eq, &grid, k as f64, 0.0, Model::Hydrostatic);
            let s = linear_growth(&mut st, &grid, 1e-3, 20.0 / k as f64, 0);
            (k, s.fitted_sigma / (k as f64 * c.im) - 1.0, s.fit_r2)
        })
        .collect();
    check(
        rows.iter().all(|&(_, e, r2)| e.abs() < 0.02 && r2 >= 0.99),
        format!(
            "relative errors {} for k = 1, 2, 4, r2 {:.5?}",
            sci(&rows.iter().map(|r| r.1).collect::<Vec<_>>()),
            rows.iter().map(|r| r.2).collect::<Vec<_>>()
        ),
    )
}

fn c7_long_wave() -> Outcome {
    let eq = tanh5(0.97);
    let c_star = top_zero(&eq, 0.0).c;
    let grid = Grid1D::new(512);
    let rows: Vec<(f64, Complex64, f64)> = [20.0, 40.0, 80.0]
        .par_iter()
        .map(|&m: &f64| {
            let kappa = 1.0 / m;
            let f = DispersionFunction::auto(&eq, kappa, NEUMANN_SEARCH_TOL);
            let c = refine_zero(&|c| f.eval(c), c_star, TOL).unwrap().c;
            let mut st = LinearStepper::new(&eq, &grid, 1.0, kappa, Model::Boussinesq);
            let s = linear_growth(&mut st, &grid, 1e-3, 20.0, 0);
            (m, c, s.fitted_sigma / c.im - 1.0)
        })
        .collect();
    let gaps: Vec<f64> = rows.iter().map(|r| (r.1 - c_star).norm()).collect();
    check(
        rows.iter().all(|r| r.1.im > 0.0 && r.2.abs() < 0.03) && gaps.windows(2).all(|w| w[1] < w[0]),
        format!(
            "|c(M) - c*| = {}, growth relative errors {}",
            sci(&gaps),
            sci(&rows.iter().map(|r| r.2).collect::<Vec<_>>())
        ),
    )
}

fn mode_diff(a: &ModeState, b: &ModeState, g: &Grid1D) -> f64 {
    let mut d = a.clone();
    for i in 0..g.n {
        d.rho_hat[i] -= b.rho_hat[i];
        d.omega_hat[i] -= b.omega_hat[i];
    }
    d.norm(g)
}

fn smooth_state(g: &Grid1D, k: i64, kappa: f64) -> ModeState {
    let mut s = ModeState::zeros(k, kappa, g.n);
    for (i, &z) in g.nodes.iter().enumerate() {
        let b = 1.0 - z * z;
        s.rho_hat[i] = Complex64::new(b * (2.0 * z).cos(), 0.3 * b);
        s.omega_hat[i] = Complex64::new((4.0 * z).sin(), b.sqrt());
    }
    s
}

fn c8_transport() -> Outcome {
    let eq = tanh5(0.97);
    let g = Grid1D::new(256);
    let s = smooth_state(&g, 1, 0.0);
    let mut st = LinearStepper::new(&eq, &g, 1.0, 0.0, Model::Hydrostatic).without_coupling();
    let mut num = s.clone();
    st.advance(&mut num, 1e-3, 1000);
    let exact = transport_exact(&s, 1.0, &eq, &g);
    let err = mode_diff(&num, &exact, &g) / exact.norm(&g);
    let once = transport_exact(&s, 1.0, &eq, &g);
    let twice = transport_exact(&transport_exact(&s, 0.35, &eq, &g), 0.65, &eq, &g);
    let semi = mode_diff(&twice, &once, &g) / once.norm(&g);
    check(err < 1e-4 && semi < 1e-13, format!("stepper vs exact {err:.2e}, composition {semi:.2e}"))
}

/// Growing mode of the `k = 1` perturbation on a torus of scale `M`, with `Λ` from the power iteration.
struct Unstable {
    eq: StratifiedEquilibrium,
    grid: Grid1D,
    mode: GrowingMode,
    lambda: f64,
}

fn unstable_setup(m_scale: f64, nz: usize) -> Unstable {
    let eq = tanh5(0.97);
    let grid = Grid1D::new(nz);
    let kappa = 1.0 / m_scale;
    let zero = top_zero(&eq, kappa);
    let mode = reconstruct_mode(&zero, 1, &DispersionQuery::new(&eq, zero.c, kappa), &grid).unwrap();
    let lambda = dominant_growth_with(kappa, kappa, &eq, &grid, &PowerIteration::default()).unwrap().rate;
    Unstable { eq, grid, mode, lambda }
}

fn c9_grenier(u: &Unstable) -> Outcome {
    let opts = GrenierOptions::default();
    let rows: Vec<(usize, f64, f64)> = [2usize, 3]
        .par_iter()
        .map(|&j| {
            let tr = grenier_iterate(j, &u.mode, u.lambda, &u.eq, &u.grid, &opts).unwrap();
            let s = tr.series();
            (j, s.fitted_sigma / (j as f64 * u.lambda), s.fit_r2)
        })
        .collect();
    check(
        opts.lambda_t <= 3.0 && rows.iter().all(|r| (0.95..=1.05).contains(&r.1)),
        format!("Lambda = {:.6}, (j, rate / (j Lambda), r2) = {rows:.4?}", u.lambda),
    )
}

fn c10_lyapunov(u: &Unstable) -> Outcome {
    let setup = InstabilitySetup {
        nx: 64,
        m_scale: 0.5,
        dt: 0.01,
        threshold: 0.05,
        lambda: u.lambda,
    };
    let deltas = [1e-3, 1e-4, 1e-5];
    let runs: Vec<_> = deltas
        .par_iter()
        .map(|&d| instability_run(d, &u.mode, &u.eq, &u.grid, &setup))
        .collect();
    if let Some(r) = runs.iter().find(|r| r.crossing.is_none()) {
        return check(false, format!("delta {} never crossed: {:?}", r.delta, r.failure));
    }
    let t: Vec<f64> = runs.iter().map(|r| r.crossing.unwrap()).collect();
    let logs: Vec<f64> = deltas.iter().map(|d: &f64| d.ln().abs()).collect();
    let slope = linear_fit(&logs, &t).0;
    let slope_err = slope * u.lambda - 1.0;
    let rate_err: Vec<f64> = runs.iter().map(|r| r.series.fitted_sigma / u.lambda - 1.0).collect();
    check(
        slope_err.abs() < 0.2 && rate_err.iter().all(|e| e.abs() < 0.05),
        format!("T(delta) = {t:.3?}, slope * Lambda - 1 = {slope_err:.2e}, rate errors {}", sci(&rate_err)),
    )
}

fn ratio_ok(r: f64) -> bool {
    (r - 16.0).abs() < 3.2
}

fn c11_hygiene() -> Outcome {
    let eq = tanh5(0.97);
    let mut ratios = Vec::new();

    let g = Grid1D::new(64);
    for (model, coupled) in [(Model::Hydrostatic, true), (Model::Boussinesq, true), (Model::Hydrostatic, false)] {
        let run = |dt: f64| {
            let mut st = LinearStepper::new(&eq, &g, 1.0, 0.5, model);
            if !coupled {
                st = st.without_coupling();
            }
            let mut s = smooth_state(&g, 1, 0.5);
            st.advance(&mut s, dt, (1.0 / dt).round() as usize);
            s
        };
        let (a, b, c) = (run(0.1), run(0.05), run(0.025));
        ratios.push(mode_diff(&a, &b, &g) / mode_diff(&b, &c, &g));
    }

    let g = Grid1D::new(32);
    let solver = NonlinearSolver::new(16, g.clone(), 0.5);
    let state = smooth_state(&g, 1, 0.0);
    let run = |dt: f64| {
        let mut f = Field2D::equilibrium(&eq, 16, &g, 0.5);
        f.add_mode(1, &state.rho_hat, &state.omega_hat, 0.2);
        f.add_mode(2, &state.omega_hat, &state.rho_hat, 0.1);
        for _ in 0..(0.4 / dt).round() as usize {
            solver.step(&mut f, dt).unwrap();
        }
        f
    };
    let (a, b, c) = (run(0.02), run(0.01), run(0.005));
    ratios.push(a.distance(&b, g.h) / b.distance(&c, g.h));

    // manufactured Poisson solutions
    let quad = {
        let g = Grid1D::new(200);
        let phi = poisson_full(&vec![Complex64::new(1.0, 0.0); g.n], 0.0, &g);
        g.nodes.iter().zip(&phi).map(|(z, p)| (p.re - 0.5 * (z * z - 1.0)).abs()).fold(0.0, f64::max)
    };
    let sine = |n: usize, kappa: f64| {
        let g = Grid1D::new(n);
        let k2 = PI * PI / 4.0 + kappa * kappa;
        let w: Vec<Complex64> =
            g.nodes.iter().map(|z| Complex64::new(-k2 * (PI * (z + 1.0) / 2.0).sin(), 0.0)).collect();
        let phi = poisson_full(&w, kappa, &g);
        g.nodes.iter().zip(&phi).map(|(z, p)| (p.re - (PI * (z + 1.0) / 2.0).sin()).abs()).fold(0.0, f64::max)
    };
    let poisson_order: Vec<f64> = [0.0, 0.3, 2.0].iter().map(|&k| sine(63, k) / sine(127, k)).collect();
    let poisson_ok = quad < 1e-12 && poisson_order.iter().all(|r| (r - 4.0).abs() < 0.2);

    let determinism = cli_is_deterministic();
    check(
        ratios.iter().all(|&r| ratio_ok(r)) && poisson_ok && determinism,
        format!(
            "RK4 ratios (hydrostatic, Boussinesq, transport, nonlinear) {ratios:.2?}, Poisson exact {quad:.1e} order {poisson_order:.3?}, deterministic CLI {determinism}"
        ),
    )
}

fn cli_is_deterministic() -> bool {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap().to_string();
    let run = || {
        let code = shearstab::cli::main_with_args([
            "shearstab", "evolve-linear", "--nz", "128", "--t-final", "2", "--seed", "7", "--out", &out,
        ]);
        assert_eq!(code, 0);
        let mut files: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files.iter().map(|p| fs::read(p).unwrap()).collect::<Vec<_>>()
    };
    let (a, b) = (run(), run());
    !a.is_empty() && a == b
}

fn report(id: usize, name: &str, budget_s: f64, f: impl FnOnce() -> Outcome) -> bool {
    let t0 = Instant::now();
    let o = f();
    let secs = t0.elapsed().as_secs_f64();
    let pass = o.pass && secs < budget_s;
    println!(
        "criterion {id:>2} {name}: {}  ({secs:.1} s of {budget_s:.0} s) {}",
        if pass { "PASS" } else { "FAIL" },
        o.detail
    );
    pass
}

fn main() {
    let mut ok = true;
    ok &= report(1, "Friedlander identity", 1.0, c1_friedlander_identity);
    ok &= report(2, "Miles-Howard gate", 60.0, c2_miles_howard_gate);
    ok &= report(3, "Nyquist winding", 30.0, c3_nyquist);
    let t0 = Instant::now();
    let family = alpha_family();
    let shared = t0.elapsed().as_secs_f64();
    ok &= report(4, "oracle equivalence", 120.0 - shared, || c4_oracle_equivalence(&family));
    ok &= report(5, "Rouche persistence", 120.0 - shared, || c5_rouche(&family));
    ok &= report(6, "growth-rate law", 120.0, c6_growth_law);
    ok &= report(7, "long-wave limit", 300.0, c7_long_wave);
    ok &= report(8, "transport semigroup", 10.0, c8_transport);
    let t0 = Instant::now();
    let unstable = unstable_setup(0.5, 128);
    let shared = t0.elapsed().as_secs_f64();
    ok &= report(9, "Grenier iterates", 120.0 - shared, || c9_grenier(&unstable));
    ok &= report(10, "Lyapunov instability time", 1800.0 - shared, || c10_lyapunov(&unstable));
    ok &= report(11, "numerical hygiene", 60.0, c11_hygiene);
    println!("shared setup times are charged to the criteria that use them");
    if !ok {
        std::process::exit(1);
    }
}
