//! Test functionals `Φ` on probability measures and their linear functional
//! derivatives.

mod cutoff;
mod derivatives;
mod eval;
pub mod hyperdual;
mod mollify;
mod spec;

pub use cutoff::smoothstep;
pub use derivatives::{FunctionalDerivatives, ModePairArray};
pub use mollify::{bump_density, Mollified};
pub use spec::FunctionalSpec;
