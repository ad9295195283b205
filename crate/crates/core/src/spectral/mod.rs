//! Torus geometry and the Fourier representation shared by every other module.

mod align;
pub(crate) mod empirical;
mod fejer;
mod field;
mod grid;
pub mod io;
mod lattice;
mod norms;
mod torus;
mod wasserstein;

pub use align::{align_to_family, rotate, Alignment};
pub use empirical::{fourier_modes_of_empirical, EmpiricalMeasure, ModeAccumulator};
pub use fejer::{fejer_smooth, fejer_weight};
pub use field::{FieldKind, Measure, SpectralField};
pub use grid::{evaluate_on_grid, from_grid_samples, GridTransform, Product};
pub use lattice::ModeLattice;
pub use norms::{
    sobolev_dual_inner, sobolev_dual_norm, sobolev_dual_norm_sq, sobolev_tail_bound,
    weighted_dual_inner, SobolevNorm,
};
pub use torus::{torus_distance, wrap, wrap_coord, TorusPoint};
pub use wasserstein::{wasserstein1_1d, wasserstein1_samples};

/// Tolerance used by every density positivity check.
pub const TOL_POS: f64 = 1e-8;

/// Default evaluation grid size per axis for a lattice of cutoff `m`.
pub fn default_grid(m: usize) -> usize {
    4 * m + 1
}
