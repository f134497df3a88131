//! Time integration: per-mode linear systems, the transport oracle, the
//! nonlinear channel solver, Grenier iterates and instability times.

pub mod grenier;
pub mod grid;
pub mod growth;
pub mod instability;
pub mod linear;
pub mod nonlinear;
pub mod rescale;
pub mod transport;

pub use grenier::{first_iterate, grenier_iterate, GrenierOptions, GrenierTrajectory};
pub use grid::{central_dz, poisson_full, poisson_hydro, Grid1D, PoissonSolver};
pub use growth::{linear_fit, GrowthSeries};
pub use instability::{instability_run, instability_time, perturbed_equilibrium, InstabilityRun, InstabilitySetup};
pub use linear::{linear_growth, step_linear, LinearStepper, Model, ModeState};
pub use nonlinear::{step_nonlinear, Field2D, FieldSnapshot, NonlinearSolver};
pub use rescale::{hydrostatic_rescale, RescaleDirection};
pub use transport::{transport_exact, transport_exact_k};
