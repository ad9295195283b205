//! Fourier-Galerkin solvers for the mean-field flow and its linearisations.

mod backward;
mod bessel;
mod fit;
mod flow;
mod galerkin;
mod integrator;
mod linearized;
mod relaxation;
mod representation;
mod stationary;
mod tangent;

pub use backward::{solve_backward_kolmogorov, Freeze};
pub use bessel::bessel_ratio_i1_i0;
pub use fit::{decay_rate_fit, DecayFit};
pub use flow::{fp_rhs, kuramoto_mode_flow, solve_nonlinear_fp, PositivityBreach, Series};
pub use integrator::{Integrator, SolverConfig};
pub use linearized::{apply_linearized, dense_spectrum, galerkin_matrix};
pub use relaxation::{refine_stationary, relaxation_distance, RelaxTarget, Relaxation};
pub use representation::{
    u_first_derivative, u_first_derivative_fd, u_second_mixed_derivative, u_second_mixed_derivative_fd,
};
pub use stationary::{stationary_kuramoto_profile, KuramotoProfile};
pub use tangent::{
    dirac_derivative_modes, dirac_modes, solve_d1, solve_d2, solve_linearised, solve_m1, solve_m2, DiracSmoothing,
    LinearisedRun,
};
