//! Weakly interacting diffusions on the flat torus.
//!
//! `chaosbench` simulates the `N`-particle system
//!
//! ```text
//! dY^i = b(Y^i, μ^N) dt + dW^i,    μ^N = (1/N) Σ_i δ_{Y^i},
//! ```
//!
//! solves its mean-field limit (the nonlinear Fokker-Planck equation) together
//! with the linearised tangent equations by Fourier-Galerkin methods, and wires
//! both into reproducible experiments that measure weak and strong
//! propagation-of-chaos errors, ergodic decay rates and spectral gaps.
//!
//! Every measure, density and distribution is carried as a [`SpectralField`]:
//! complex Fourier coefficients `c^n = ∫ e^{-i2π n·x} μ(dx)` on a truncated
//! integer lattice.
//!
//! ```
//! use chaosbench::spectral::{ModeLattice, SpectralField, sobolev_dual_norm_sq};
//!
//! let lattice = ModeLattice::new(1, 8).unwrap();
//! let uniform = SpectralField::uniform(lattice);
//! let norm = sobolev_dual_norm_sq(&uniform, &uniform, 1.0).unwrap();
//! assert_eq!(norm.value, 0.0);
//! ```

pub mod drift;
pub mod error;
pub mod experiments;
pub mod functionals;
pub mod particles;
pub mod pde;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{EmpiricalMeasure, ModeLattice, SpectralField, TorusPoint};
