use crate::error::{invalid, Error, Result};
use crate::pde::stationary_kuramoto_profile;
use crate::spectral::{Measure, ModeLattice, SpectralField};

use super::hyperdual::{Cx, Scalar};
use super::Mollified;

#[derive(Clone, Debug, PartialEq)]
pub enum FunctionalSpec {
    /// `Φ(μ) = ∫ G dμ`.
    Linear { g: SpectralField },
    /// `Φ(μ) = ‖μ − ν₀‖²_{-s,2}`.
    SobolevDualSq { s: f64, nu0: SpectralField },
    /// Rotation-invariant distance to the synchronised Kuramoto profile:
    /// `φ(|μ¹|) ‖μ∘τ⁻¹ − p‖²_{-(1+ε_s)/2,2} + 1 − φ(|μ¹|)`, where the shift
    /// `τ` makes the first mode real and positive and `φ` is a smoothstep on
    /// `[δ/2, δ]`.
    KuramotoRotInv { eps_s: f64, delta_cut: f64, profile: SpectralField },
    Mollified(Box<Mollified>),
}

impl FunctionalSpec {
    pub fn linear(g: SpectralField) -> Self {
        FunctionalSpec::Linear { g: g.into_signed() }
    }

    /// `‖μ − ν₀‖²_{-s,2}` on the lattice of `ν₀`.
    pub fn sobolev(nu0: SpectralField, s: f64) -> Result<Self> {
        if !(s > 0.0) {
            return invalid(format!("Sobolev exponent must be positive, got {s}"));
        }
        Ok(FunctionalSpec::SobolevDualSq { s, nu0 })
    }

    /// Sobolev functional with the exponent `s = (d + α)/2`, `α ∈ (0, 1]`.
    pub fn sobolev_alpha(nu0: SpectralField, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return invalid(format!("α must lie in (0, 1], got {alpha}"));
        }
        let s = (nu0.dim() as f64 + alpha) / 2.0;
        Self::sobolev(nu0, s)
    }

    /// Rotation-invariant Kuramoto functional with the stationary profile at
    /// coupling `kappa`, represented on `lattice`.
    pub fn kuramoto_rot_inv(kappa: f64, eps_s: f64, delta_cut: f64, lattice: ModeLattice) -> Result<Self> {
        let profile = stationary_kuramoto_profile(kappa, lattice)?.p;
        Self::kuramoto_with_profile(profile, eps_s, delta_cut)
    }

    pub fn kuramoto_with_profile(profile: SpectralField, eps_s: f64, delta_cut: f64) -> Result<Self> {
        if profile.dim() != 1 {
            return Err(Error::UnsupportedDimension(profile.dim()));
        }
        if !(eps_s > 0.0) || !(delta_cut > 0.0 && delta_cut < 1.0) {
            return invalid("need ε_s > 0 and δ_cut ∈ (0, 1)");
        }
        Ok(FunctionalSpec::KuramotoRotInv { eps_s, delta_cut, profile })
    }

    /// Mollified version `Φ_{N,ε}` with the default quadrature size.
    pub fn mollify(self, n_moll: usize, eps_moll: f64) -> Result<Self> {
        Ok(FunctionalSpec::Mollified(Box::new(Mollified::new(self, n_moll, eps_moll, 1024)?)))
    }

    /// Lattice on which the functional reads the measure's modes.
    pub fn lattice(&self) -> ModeLattice {
        match self {
            FunctionalSpec::Linear { g } => g.lattice(),
            FunctionalSpec::SobolevDualSq { nu0, .. } => nu0.lattice(),
            FunctionalSpec::KuramotoRotInv { profile, .. } => profile.lattice(),
            FunctionalSpec::Mollified(m) => m.lattice(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lattice().dim()
    }

    /// `Φ(μ)`.
    pub fn eval<M: Measure + ?Sized>(&self, mu: &M) -> Result<f64> {
        if mu.dim() != self.dim() {
            if matches!(self, FunctionalSpec::KuramotoRotInv { .. }) {
                return Err(Error::UnsupportedDimension(mu.dim()));
            }
            return invalid(format!("measure has d={}, functional has d={}", mu.dim(), self.dim()));
        }
        let modes = mu.modes_on(self.lattice())?;
        let c: Vec<Cx<f64>> = modes.coeffs().iter().map(|z| Cx::new(z.re, z.im)).collect();
        Ok(self.value_t(&c))
    }

    /// `Φ` on raw coefficients over [`FunctionalSpec::lattice`], generic in the scalar.
    pub fn value_t<T: Scalar>(&self, c: &[Cx<T>]) -> T {
        match self {
            FunctionalSpec::Linear { g } => super::eval::linear(g, c),
            FunctionalSpec::SobolevDualSq { s, nu0 } => super::eval::sobolev(nu0, *s, c),
            FunctionalSpec::KuramotoRotInv { eps_s, delta_cut, profile } => {
                super::eval::kuramoto(profile, 0.5 * (1.0 + eps_s), *delta_cut, c)
            }
            FunctionalSpec::Mollified(m) => m.value_t(c),
        }
    }
}
