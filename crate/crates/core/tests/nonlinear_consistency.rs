use shearstab::dispersion::DispersionQuery;
use shearstab::evolve::{first_iterate, linear_fit, perturbed_equilibrium, Field2D, Grid1D, NonlinearSolver};
use shearstab::modes::{dominant_growth_with, reconstruct_mode, PowerIteration};
use shearstab::profiles::{build_friedlander, ShearProfile};
use shearstab::rootfinder::{gamma0_with, DispersionFunction, SearchOptions, NEUMANN_SEARCH_TOL};

// Small perturbations along the growing mode follow the linearized flow up to
// a quadratic remainder, so the gap between the two grows at twice the rate.
#[test]
fn nonlinear_minus_linear_grows_at_twice_the_rate() {
    let (m, nz, nx, dt, delta) = (0.5, 256, 32, 0.01, 1e-3);
    let eq = build_friedlander(ShearProfile::tanh(5.0), 0.97).unwrap();
    let grid = Grid1D::new(nz);
    let kappa = 1.0 / m;
    let f = DispersionFunction::auto(&eq, kappa, NEUMANN_SEARCH_TOL);
    let zero = gamma0_with(&f, &eq, 0.05, &SearchOptions::with_tol(1e-12)).unwrap().zeros[0];
    let mode = reconstruct_mode(&zero, 1, &DispersionQuery::new(&eq, zero.c, kappa), &grid).unwrap();
    let lambda = dominant_growth_with(kappa, kappa, &eq, &grid, &PowerIteration::default()).unwrap().rate;

    let solver = NonlinearSolver::new(nx, grid.clone(), m);
    let base = Field2D::equilibrium(&eq, nx, &grid, m);
    let mut field = perturbed_equilibrium(&eq, &mode, delta, &grid, nx, m);
    let scale = field.distance(&base, grid.h) / first_iterate(&mode, lambda, nx, m, 0.0).l2(grid.h);

    let (mut ts, mut logs) = (Vec::new(), Vec::new());
    for s in 1.. {
        solver.step(&mut field, dt).unwrap();
        let t = s as f64 * dt;
        let dev = field.distance(&base, grid.h);
        if dev > 0.3 {
            break;
        }
        let mut linear = base.clone();
        let z1 = first_iterate(&mode, lambda, nx, m, t);
        for (a, b) in linear.rho.iter_mut().zip(&z1.rho) {
            *a += b * scale;
        }
        for (a, b) in linear.omega.iter_mut().zip(&z1.omega) {
            *a += b * scale;
        }
        let gap = field.distance(&linear, grid.h);
        if (10.0 * delta..=0.15).contains(&dev) && dev < 1.5 * delta * (lambda * t).exp() {
            ts.push(t);
            logs.push(gap.ln());
        }
    }
    assert!(ts.len() > 50, "only {} samples in the fit band", ts.len());
    let (slope, _, r2) = linear_fit(&ts, &logs);
    let ratio = slope / (2.0 * lambda);
    assert!((ratio - 1.0).abs() < 0.15, "slope {slope}, 2 Lambda {}, ratio {ratio}, r2 {r2}", 2.0 * lambda);
}
