use num_complex::Complex64;
use proptest::prelude::*;

use shearstab::cli::config::KEYS;
use shearstab::cli::{Command, RunConfig};
use shearstab::dispersion::{dispersion_value, integrate_power, operator_norm_bound, solve_neumann, DispersionQuery};
use shearstab::error::StabilityError;
use shearstab::evolve::{
    hydrostatic_rescale, poisson_full, transport_exact, Field2D, Grid1D, ModeState, NonlinearSolver, RescaleDirection,
};
use shearstab::profiles::{
    build_friedlander, miles_howard_check, numeric_friedlander_density, richardson, ShearProfile, PROFILE_SCAN_POINTS,
};
use shearstab::rootfinder::{find_zeros_with, winding_number, Rect, RectContour, SearchOptions};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn poly(roots: &[Complex64]) -> impl Fn(Complex64) -> shearstab::error::Result<Complex64> + '_ {
    move |z| Ok(roots.iter().fold(c(1.0, 0.0), |acc, r| acc * (z - r)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn friedlander_identity_and_constant_richardson(beta in 0.5f64..8.0, alpha in 0.5001f64..=1.0) {
        let eq = build_friedlander(ShearProfile::tanh(beta), alpha).unwrap();
        let a = alpha * (1.0 - alpha);
        let mut worst = 0.0f64;
        for i in 0..1000 {
            let z = -1.0 + 2.0 * i as f64 / 999.0;
            let u1 = eq.shear.d1(z);
            worst = worst.max((eq.strat.d1(z) + a * u1 * u1).abs());
        }
        let scale = (a * beta * beta).max(1.0);
        prop_assert!(worst <= 1e-12 * scale, "defect {worst}");
        if alpha < 1.0 {
            let r = miles_howard_check(&eq, PROFILE_SCAN_POINTS).unwrap();
            let max = r.samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(max - r.min_ri <= 1e-12, "spread {}", max - r.min_ri);
            prop_assert!((r.min_ri - a).abs() <= 1e-12);
            prop_assert_eq!(r.miles_howard_satisfied, r.min_ri >= 0.25);
        }
    }

    #[test]
    fn closed_form_matches_numeric_antiderivative(beta in 0.5f64..8.0, alpha in 0.51f64..1.0) {
        let shear = ShearProfile::tanh(beta);
        let eq = build_friedlander(shear.clone(), alpha).unwrap();
        let num = numeric_friedlander_density(&shear, alpha);
        for i in 0..101 {
            let z = -1.0 + 0.02 * i as f64;
            prop_assert!((eq.strat.eval(z) - num.eval(z)).abs() < 1e-10, "z = {z}");
        }
    }

    #[test]
    fn tanh_is_strictly_increasing_with_second_order_differences(beta in 0.1f64..10.0, z in -0.95f64..0.95) {
        let s = ShearProfile::tanh(beta);
        prop_assert!(s.d1(z) > 0.0);
        let fd = |h: f64| ((s.eval(z + h) - s.eval(z - h)) / (2.0 * h) - s.d1(z)).abs();
        let (a, b) = (fd(1e-3), fd(5e-4));
        // error quarters when h halves, until rounding takes over
        prop_assert!(b <= a / 3.0 || b < 1e-9, "{a} {b}");
    }

    #[test]
    fn grid_is_symmetric_and_increasing(n in 3usize..600) {
        let g = Grid1D::new(n);
        for i in 0..n {
            prop_assert_eq!(g.nodes[i], -g.nodes[n - 1 - i]);
        }
        prop_assert!(g.nodes.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn conjugation_symmetry(
        alpha in 0.51f64..=1.0, z in -1.0f64..=1.0, re in -2.0f64..2.0, im in 0.05f64..2.0, beta in 1.0f64..8.0,
    ) {
        let s = ShearProfile::tanh(beta);
        let up = integrate_power(&s, c(re, im), 2.0 * alpha, z);
        let down = integrate_power(&s, c(re, -im), 2.0 * alpha, z);
        prop_assert!((up - down.conj()).norm() <= 1e-12 * up.norm().max(1.0), "{up} {down}");
    }

    #[test]
    fn winding_counts_enclosed_polynomial_roots(
        raw in prop::collection::vec((-2.0f64..2.0, -1.0f64..2.0), 1..=4),
    ) {
        let rect = Rect::new(-1.0, 1.0, 0.2, 1.5);
        // keep roots off the contour
        let clear = |r: &Complex64| {
            let dx = (r.re.abs() - 1.0).abs();
            let dy = (r.im - 0.2).abs().min((r.im - 1.5).abs());
            let on_vertical = dx < 0.02 && r.im > 0.18 && r.im < 1.52;
            let on_horizontal = dy < 0.02 && r.re.abs() < 1.02;
            !(on_vertical || on_horizontal)
        };
        let roots: Vec<Complex64> = raw.iter().map(|&(a, b)| c(a, b)).collect();
        prop_assume!(roots.iter().all(clear));
        let inside = roots.iter().filter(|r| rect.contains(**r)).count() as i64;
        let w = winding_number(&poly(&roots), &RectContour { rect, per_edge: 32 }).unwrap();
        prop_assert_eq!(w.winding, inside);
        prop_assert!(w.max_phase_step < std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn transport_is_a_semigroup(t1 in 0.0f64..2.0, t2 in 0.0f64..2.0, k in 1i64..6, seed in 0u64..1000) {
        let eq = build_friedlander(ShearProfile::tanh(5.0), 0.97).unwrap();
        let g = Grid1D::new(64);
        let s = ModeState::random(k, 0.0, &g, seed);
        let once = transport_exact(&s, t1 + t2, &eq, &g);
        let twice = transport_exact(&transport_exact(&s, t1, &eq, &g), t2, &eq, &g);
        let mut d = once.clone();
        for i in 0..g.n {
            d.rho_hat[i] -= twice.rho_hat[i];
            d.omega_hat[i] -= twice.omega_hat[i];
        }
        prop_assert!(d.norm(&g) <= 1e-13 * once.norm(&g).max(1.0));
    }

    #[test]
    fn poisson_is_linear(kappa in 0.0f64..50.0, a in -3.0f64..3.0, seed in 0u64..1000) {
        let g = Grid1D::new(48);
        let x = ModeState::random(1, 0.0, &g, seed);
        let (u, v) = (&x.rho_hat, &x.omega_hat);
        let comb: Vec<Complex64> = u.iter().zip(v).map(|(p, q)| p * a + q).collect();
        let (pu, pv, pc) = (poisson_full(u, kappa, &g), poisson_full(v, kappa, &g), poisson_full(&comb, kappa, &g));
        let scale = pc.iter().map(|z| z.norm()).fold(1e-300, f64::max) + a.abs();
        for i in 0..g.n {
            prop_assert!((pc[i] - (pu[i] * a + pv[i])).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn unknown_config_keys_are_rejected(key in "[a-z_]{1,12}") {
        prop_assume!(!KEYS.contains(&key.as_str()));
        let mut cfg = RunConfig::defaults(Command::Spectrum);
        prop_assert!(matches!(cfg.set(&key, "1"), Err(StabilityError::Config(_))));
    }

    #[test]
    fn config_pairs_round_trip(beta in 0.1f64..10.0, alpha in 0.51f64..=1.0, nz in 8usize..2048, seed: u64) {
        let mut cfg = RunConfig::defaults(Command::Mode);
        cfg.set("beta", &beta.to_string()).unwrap();
        cfg.set("alpha", &alpha.to_string()).unwrap();
        cfg.set("nz", &nz.to_string()).unwrap();
        cfg.set("seed", &seed.to_string()).unwrap();
        let mut again = RunConfig::defaults(Command::Mode);
        for (k, v) in cfg.pairs() {
            again.set(k, &v).unwrap();
        }
        prop_assert_eq!(cfg.pairs(), again.pairs());
        prop_assert!(again.validate().is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    // Random admissible queries: every returned solution satisfies its own fixed-point equation.
    #[test]
    fn neumann_solutions_are_self_consistent(
        alpha in 0.9f64..=1.0, re in -0.8f64..0.8, im in 0.3f64..1.5, kappa in 0.0f64..1.0,
    ) {
        let eq = build_friedlander(ShearProfile::tanh(5.0), alpha).unwrap();
        let q = DispersionQuery::new(&eq, c(re, im), kappa);
        let tol = 1e-10;
        match solve_neumann(&q, tol, 200) {
            Ok(sol) => {
                prop_assert!(sol.fixed_point_residual <= tol, "{}", sol.fixed_point_residual);
                prop_assert_eq!(sol.psi.left.norm(), 0.0);
            }
            Err(StabilityError::NonContractive { .. }) => {
                let bound = (1.0 - alpha) * operator_norm_bound(&q).unwrap();
                if bound < 1.0 {
                    eprintln!("series-bound counterexample: alpha {alpha}, c {re}+{im}i, kappa {kappa}, bound {bound}");
                }
            }
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn hydrostatic_reduction_is_continuous(alpha in 0.9f64..=1.0, re in -0.8f64..0.8, im in 0.3f64..1.5) {
        let eq = build_friedlander(ShearProfile::tanh(5.0), alpha).unwrap();
        let a = dispersion_value(&DispersionQuery::new(&eq, c(re, im), 0.0), 1e-13).unwrap().value;
        let b = dispersion_value(&DispersionQuery::new(&eq, c(re, im), 1e-14), 1e-13).unwrap().value;
        prop_assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn found_zeros_are_in_the_upper_half_plane_and_converged(
        raw in prop::collection::vec((-0.9f64..0.9, 0.25f64..1.4), 1..=3),
    ) {
        let roots: Vec<Complex64> = raw.iter().map(|&(a, b)| c(a, b)).collect();
        let distinct = roots.iter().enumerate().all(|(i, r)| roots[..i].iter().all(|s| (r - s).norm() > 0.05));
        prop_assume!(distinct);
        let rect = Rect::new(-1.0, 1.0, 0.2, 1.5);
        let rep = find_zeros_with(&poly(&roots), rect, &SearchOptions::with_tol(1e-12)).unwrap();
        prop_assert_eq!(rep.zeros.len(), roots.len());
        prop_assert_eq!(rep.total_winding, roots.len() as i64);
        for z in &rep.zeros {
            prop_assert!(z.c.im > 0.0 && z.residual < 1e-12);
            prop_assert!(roots.iter().any(|r| (r - z.c).norm() < 1e-9));
        }
    }

    #[test]
    fn nonlinear_step_keeps_fields_real(seed in 0u64..1000, amp in 0.0f64..0.3) {
        let eq = build_friedlander(ShearProfile::tanh(5.0), 0.97).unwrap();
        let g = Grid1D::new(16);
        let solver = NonlinearSolver::new(8, g.clone(), 0.5);
        let s = ModeState::random(1, 0.0, &g, seed);
        let mut f = Field2D::equilibrium(&eq, 8, &g, 0.5);
        f.add_mode(1, &s.rho_hat, &s.omega_hat, amp);
        f.add_mode(2, &s.omega_hat, &s.rho_hat, amp);
        for _ in 0..5 {
            solver.step(&mut f, 1e-2).unwrap();
        }
        prop_assert!(f.hermitian_defect() < 1e-14);
    }

    #[test]
    fn rescale_round_trips(l in 1usize..6, seed in 0u64..1000) {
        let eq = build_friedlander(ShearProfile::tanh(5.0), 0.97).unwrap();
        let g = Grid1D::new(16);
        let m = 1.0;
        let solver = NonlinearSolver::new(8, g.clone(), m);
        let s = ModeState::random(1, 0.0, &g, seed);
        let mut f = Field2D::equilibrium(&eq, 8, &g, m);
        f.add_mode(1, &s.rho_hat, &s.omega_hat, 0.1);
        f.t = 0.7;
        let snap = solver.snapshot(&f);
        let eps = 1.0 / (l as f64 * m);
        let fast = hydrostatic_rescale(&snap, eps, RescaleDirection::ToFast).unwrap();
        let back = hydrostatic_rescale(&fast, eps, RescaleDirection::ToSlow).unwrap();
        prop_assert!((back.t - snap.t).abs() < 1e-14 && (back.m_scale - snap.m_scale).abs() < 1e-14);
        for (a, b) in back.v.iter().zip(&snap.v) {
            prop_assert!((a - b).abs() <= 1e-14 * b.abs().max(1.0));
        }
        prop_assert_eq!(&back.rho, &snap.rho);
    }
}

#[test]
fn richardson_of_a_linear_profile_is_constant() {
    let eq = shearstab::profiles::StratifiedEquilibrium::new(
        ShearProfile::couette(),
        shearstab::profiles::Stratification::linear(-1.0),
    );
    for z in [-0.9, 0.0, 0.6] {
        assert_eq!(richardson(&eq, z).unwrap(), 1.0);
    }
}
