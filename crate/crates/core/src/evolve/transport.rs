use num_complex::Complex64;

use super::grid::Grid1D;
use super::linear::ModeState;
use crate::profiles::StratifiedEquilibrium;

/// Exact propagator of the coupling-free system:
/// `ρ̂ ↦ e^{-iktU_s} ρ̂`, `ω̂ ↦ e^{-iktU_s}(ω̂ + ikt ρ̂)`.
pub fn transport_exact(
    state: &ModeState,
    t: f64,
    eq: &StratifiedEquilibrium,
    grid: &Grid1D,
) -> ModeState {
    transport_exact_k(state, state.k as f64, t, eq, grid)
}

pub fn transport_exact_k(
    state: &ModeState,
    k: f64,
    t: f64,
    eq: &StratifiedEquilibrium,
    grid: &Grid1D,
) -> ModeState {
    let mut out = state.clone();
    let ikt = Complex64::new(0.0, k * t);
    for (i, &z) in grid.nodes.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -k * t * eq.shear.eval(z));
        let rho = state.rho_hat[i];
        out.rho_hat[i] = phase * rho;
        out.omega_hat[i] = phase * (state.omega_hat[i] + ikt * rho);
    }
    out.t = state.t + t;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::linear::LinearStepper;
    use crate::evolve::Model;
    use crate::profiles::{build_friedlander, ShearProfile};

    fn setup(n: usize) -> (StratifiedEquilibrium, Grid1D, ModeState) {
        let eq = build_friedlander(ShearProfile::tanh(5.0), 0.97).unwrap();
        let g = Grid1D::new(n);
        let mut s = ModeState::zeros(1, 0.0, n);
        for (i, &z) in g.nodes.iter().enumerate() {
            s.rho_hat[i] = Complex64::new((1.0 - z * z) * (1.0 + z), 0.2);
            s.omega_hat[i] = Complex64::new((4.0 * z).sin(), (1.0 - z * z).sqrt());
        }
        (eq, g, s)
    }

    fn rel(a: &ModeState, b: &ModeState, g: &Grid1D) -> f64 {
        let mut d = a.clone();
        for i in 0..g.n {
            d.rho_hat[i] -= b.rho_hat[i];
            d.omega_hat[i] -= b.omega_hat[i];
        }
        d.norm(g) / b.norm(g)
    }

    #[test]
    fn zero_time_is_identity() {
        let (eq, g, s) = setup(32);
        let out = transport_exact(&s, 0.0, &eq, &g);
        assert_eq!(out.rho_hat, s.rho_hat);
        assert_eq!(out.omega_hat, s.omega_hat);
    }

    #[test]
    fn semigroup_composition() {
        let (eq, g, s) = setup(256);
        for k in [1i64, 3] {
            let mut s = s.clone();
            s.k = k;
            let once = transport_exact(&s, 1.0, &eq, &g);
            let twice = transport_exact(&transport_exact(&s, 0.35, &eq, &g), 0.65, &eq, &g);
            assert!(rel(&twice, &once, &g) < 1e-13);
        }
    }

    #[test]
    fn coupling_free_stepper_matches_exact_propagator() {
        let (eq, g, s) = setup(256);
        let mut st = LinearStepper::new(&eq, &g, 1.0, 0.0, Model::Hydrostatic).without_coupling();
        let mut num = s.clone();
        st.advance(&mut num, 1e-3, 1000);
        let exact = transport_exact(&s, 1.0, &eq, &g);
        assert!(rel(&num, &exact, &g) < 1e-4);
    }
}
