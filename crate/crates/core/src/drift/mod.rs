//! Drift specifications `b(x, μ)` and their evaluation.

mod eval;
mod potential;
mod spec;
mod spectrum;

pub use eval::{drift_field, eval_drift_on_particles, eval_drift_pairwise, linear_part, DriftField};
pub(crate) use eval::drift_lattice;
pub use potential::{h_stability_check, HStability, PotentialSpec};
pub use spec::{DriftSpec, SmallMeanField};
pub use spectrum::{uniform_linearization_spectrum, Spectrum};
